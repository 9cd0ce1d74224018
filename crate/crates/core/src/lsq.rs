//! Ordinary least squares with the usual frequentist inference.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statdist::{f_sf, student_t_quantile_two_sided, student_t_sf2};

/// Name given to the column of ones.
pub const INTERCEPT: &str = "(Intercept)";

/// Reciprocal condition number (of the column-equilibrated Gram matrix)
/// below which a design is rejected as collinear.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// `n x p` regressor matrix with unique column names.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    values: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "design matrix contains non-finite value {v}"
            )));
        }
        Ok(Self { names, values })
    }

    /// Builds `[1, columns...]` with the intercept named [`INTERCEPT`].
    pub fn with_intercept(n: usize, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut names = Vec::with_capacity(columns.len() + 1);
        names.push(INTERCEPT.to_string());
        let mut values = DMatrix::from_element(n, columns.len() + 1, 1.0);
        for (j, (name, col)) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column \"{name}\" has {} rows, expected {n}",
                    col.len()
                )));
            }
            values.set_column(j + 1, &DVector::from_vec(col));
            names.push(name);
        }
        Self::new(names, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// True when the first column is identically one.
    pub fn has_intercept(&self) -> bool {
        self.ncols() > 0 && self.values.column(0).iter().all(|&v| v == 1.0)
    }
}

/// Joint test that all non-intercept coefficients are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub value: f64,
    pub df1: usize,
    pub df2: usize,
    pub p_value: f64,
}

/// Everything reported for one least-squares fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub conf_intervals: Vec<(f64, f64)>,
    pub alpha: f64,
    pub sigma2_hat: f64,
    pub cov_matrix: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Zero when the response has no variation to explain.
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// Absent for intercept-only models and constant responses.
    pub f_test: Option<FTest>,
    pub df_residual: usize,
    pub n: usize,
}

impl FitSummary {
    pub fn sigma(&self) -> f64 {
        self.sigma2_hat.sqrt()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }
}

/// Cholesky factor of an equilibrated Gram matrix `S^-1 X'X S^-1`.
///
/// Shared by the OLS and IRLS solvers.
pub(crate) struct GramSolver {
    scale: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl GramSolver {
    pub(crate) fn new(gram: &DMatrix<f64>, names: &[String]) -> Result<Self> {
        let p = gram.nrows();
        let scale = DVector::from_iterator(p, (0..p).map(|j| gram[(j, j)].sqrt()));
        if let Some(j) = scale.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::Collinear {
                columns: vec![names[j].clone()],
            });
        }
        let mut a = gram.clone();
        for i in 0..p {
            for j in 0..p {
                a[(i, j)] /= scale[i] * scale[j];
            }
        }
        let eig = SymmetricEigen::new(a.clone());
        let (imin, lmin) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, l)| if l < acc.1 { (i, l) } else { acc });
        let lmax = eig.eigenvalues.max();
        if !(lmin / lmax > RCOND_THRESHOLD) {
            return Err(Error::Collinear {
                columns: offending_columns(&eig.eigenvectors.column(imin).into_owned(), names),
            });
        }
        let chol = Cholesky::new(a).ok_or_else(|| Error::Collinear {
            columns: names.to_vec(),
        })?;
        Ok(Self { scale, chol })
    }

    /// Solves `(X'X) b = rhs`.
    pub(crate) fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let scaled = rhs.component_div(&self.scale);
        self.chol.solve(&scaled).component_div(&self.scale)
    }

    /// `(X'X)^-1`.
    pub(crate) fn inverse(&self) -> DMatrix<f64> {
        let mut inv = self.chol.inverse();
        let p = inv.nrows();
        for i in 0..p {
            for j in 0..p {
                inv[(i, j)] /= self.scale[i] * self.scale[j];
            }
        }
        inv
    }
}

/// Columns loading on the near-null direction of the Gram matrix.
fn offending_columns(null_vec: &DVector<f64>, names: &[String]) -> Vec<String> {
    let max = null_vec.amax();
    null_vec
        .iter()
        .zip(names)
        .filter(|(v, _)| v.abs() >= 0.05 * max)
        .map(|(_, n)| n.clone())
        .collect()
}

/// Least-squares solution of `X b = y` via the normal equations with two
/// rounds of iterative refinement.
pub(crate) fn solve_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    solver: &GramSolver,
) -> DVector<f64> {
    let mut beta = solver.solve(&x.tr_mul(y));
    for _ in 0..2 {
        let r = y - x * &beta;
        beta += solver.solve(&x.tr_mul(&r));
    }
    beta
}

/// Fits `y = X b + e` by least squares.
///
/// `alpha` sets the confidence level `1 - alpha` of the reported intervals.
pub fn fit_ols(design: &DesignMatrix, y: &[f64], alpha: f64) -> Result<FitSummary> {
    let n = design.nrows();
    let p = design.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} values, design has {n} rows",
            y.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("response contains {v}")));
    }
    if p == 0 || n <= p {
        return Err(Error::InsufficientData { n, p });
    }

    let x = design.values();
    let yv = DVector::from_column_slice(y);
    let solver = GramSolver::new(&x.tr_mul(x), design.names())?;
    let beta = solve_least_squares(x, &yv, &solver);
    let fitted = x * &beta;
    let residuals = &yv - &fitted;
    let rss = residuals.norm_squared();
    let df_residual = n - p;
    let sigma2 = rss / df_residual as f64;
    let xtx_inv = solver.inverse();
    let cov = &xtx_inv * sigma2;

    let df = df_residual as f64;
    let t_crit = student_t_quantile_two_sided(alpha, df)?;
    let mut std_errors = Vec::with_capacity(p);
    let mut t_values = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    let mut conf_intervals = Vec::with_capacity(p);
    for j in 0..p {
        let se = cov[(j, j)].max(0.0).sqrt();
        let t = beta[j] / se;
        let pv = if t.is_nan() {
            f64::NAN
        } else {
            student_t_sf2(t, df)?.value
        };
        std_errors.push(se);
        t_values.push(t);
        p_values.push(pv);
        conf_intervals.push((beta[j] - t_crit * se, beta[j] + t_crit * se));
    }

    let intercept = design.has_intercept();
    let tss = if intercept {
        let mean = yv.mean();
        yv.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        yv.norm_squared()
    };
    let (r_squared, adj_r_squared) = if tss > 0.0 {
        let r2 = (1.0 - rss / tss).clamp(0.0, 1.0);
        let dfm = if intercept { n - 1 } else { n } as f64;
        (r2, 1.0 - (1.0 - r2) * dfm / df)
    } else {
        (0.0, 0.0)
    };
    let df1 = if intercept { p - 1 } else { p };
    let f_test = if df1 > 0 && tss > 0.0 {
        let value = ((tss - rss).max(0.0) / df1 as f64) / sigma2;
        let p_value = f_sf(value, df1 as f64, df)?.value;
        Some(FTest {
            value,
            df1,
            df2: df_residual,
            p_value,
        })
    } else {
        None
    };

    Ok(FitSummary {
        names: design.names().to_vec(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        t_values,
        p_values,
        conf_intervals,
        alpha,
        sigma2_hat: sigma2,
        cov_matrix: (0..p).map(|i| cov.row(i).iter().copied().collect()).collect(),
        residuals: residuals.iter().copied().collect(),
        fitted: fitted.iter().copied().collect(),
        r_squared,
        adj_r_squared,
        f_test,
        df_residual,
        n,
    })
}

/// `X b` for a design whose columns match the fit by name and order.
pub fn predict(fit: &FitSummary, design: &DesignMatrix) -> Result<Vec<f64>> {
    linear_predictor(&fit.names, &fit.coefficients, design)
}

pub(crate) fn linear_predictor(
    names: &[String],
    coefficients: &[f64],
    design: &DesignMatrix,
) -> Result<Vec<f64>> {
    if design.names() != names {
        return Err(Error::DimensionMismatch(format!(
            "design columns [{}] do not match fitted columns [{}]",
            design.names().join(", "),
            names.join(", ")
        )));
    }
    let beta = DVector::from_column_slice(coefficients);
    Ok((design.values() * beta).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(cols: Vec<(&str, Vec<f64>)>) -> DesignMatrix {
        let n = cols[0].1.len();
        DesignMatrix::with_intercept(
            n,
            cols.into_iter().map(|(n, c)| (n.to_string(), c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_response_gives_zero_fit() {
        let d = design(vec![("a", vec![1.0, 2.0, 3.0, 5.0]), ("b", vec![0.5, -1.0, 2.0, 0.0])]);
        let fit = fit_ols(&d, &[0.0; 4], 0.05).unwrap();
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-15));
        assert_eq!(fit.sigma2_hat, 0.0);
        assert!(fit.f_test.is_none());
    }

    #[test]
    fn exact_column_is_reproduced() {
        let a = vec![1.0, 2.0, 3.0, 5.0, 8.0];
        let d = design(vec![("a", a.clone()), ("b", vec![0.5, -1.0, 2.0, 0.0, 1.0])]);
        let fit = fit_ols(&d, &a, 0.05).unwrap();
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.coefficients[0].abs() < 1e-12);
        assert!(fit.coefficients[2].abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn collinear_columns_are_named() {
        let d = design(vec![
            ("a", vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            ("b", vec![2.0, 4.0, 6.0, 8.0, 10.0]),
            ("c", vec![1.0, 0.0, 1.0, 0.0, 1.0]),
        ]);
        match fit_ols(&d, &[1.0, 2.0, 3.0, 4.0, 4.0], 0.05) {
            Err(Error::Collinear { columns }) => assert_eq!(columns, vec!["a", "b"]),
            other => panic!("expected collinearity error, got {other:?}"),
        }
        let d = design(vec![("const", vec![3.0; 5])]);
        match fit_ols(&d, &[1.0, 2.0, 3.0, 4.0, 4.0], 0.05) {
            Err(Error::Collinear { columns }) => assert_eq!(columns, vec![INTERCEPT, "const"]),
            other => panic!("expected collinearity error, got {other:?}"),
        }
    }

    #[test]
    fn too_few_rows() {
        let d = design(vec![("a", vec![1.0, 2.0])]);
        assert!(matches!(
            fit_ols(&d, &[1.0, 2.0], 0.05),
            Err(Error::InsufficientData { n: 2, p: 2 })
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = DesignMatrix::new(vec!["a".into(), "a".into()], DMatrix::zeros(3, 2));
        assert!(matches!(err, Err(Error::DuplicateColumn(_))));
    }

    #[test]
    fn single_regressor_f_equals_t_squared() {
        let d = design(vec![("a", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])]);
        let fit = fit_ols(&d, &[1.1, 1.9, 3.2, 3.8, 5.3, 5.9], 0.05).unwrap();
        let f = fit.f_test.unwrap();
        assert!((f.value - fit.t_values[1].powi(2)).abs() < 1e-10 * f.value);
        assert!((f.p_value - fit.p_values[1]).abs() < 1e-12);
    }

    #[test]
    fn predict_examples() {
        let d = design(vec![("a", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])]);
        let y = [1.1, 1.9, 3.2, 3.8, 5.3, 5.9];
        let fit = fit_ols(&d, &y, 0.05).unwrap();
        let p = predict(&fit, &d).unwrap();
        assert!(p.iter().zip(&fit.fitted).all(|(a, b)| (a - b).abs() < 1e-12));
        let zero_row = design(vec![("a", vec![0.0])]);
        assert!((predict(&fit, &zero_row).unwrap()[0] - fit.coefficients[0]).abs() < 1e-15);

        let only = DesignMatrix::with_intercept(6, vec![]).unwrap();
        let mean_fit = fit_ols(&only, &y, 0.05).unwrap();
        let ybar = y.iter().sum::<f64>() / 6.0;
        assert!(predict(&mean_fit, &only).unwrap().iter().all(|v| (v - ybar).abs() < 1e-14));
        assert!(mean_fit.f_test.is_none());

        let wrong = DesignMatrix::with_intercept(1, vec![("b".into(), vec![0.0])]).unwrap();
        assert!(predict(&fit, &wrong).is_err());
    }
}
