//! The three compositional regression families, fitted once per pivot part,
//! plus the raw-percentage baseline.
//!
//! Each family runs `D` separate fits, one for every choice of pivot part, and
//! keeps only the coefficients attached to the first pivot coordinate from each.
//! Quantities that do not depend on the pivot (intercept, covariate effects,
//! fit statistics) are reported once, from the first pivot, and the largest
//! disagreement across pivots is recorded alongside them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnRole, Dataset};
use crate::error::{Error, Result};
use crate::glm::{fit_logit, GlmSummary};
use crate::lsq::{fit_ols, DesignMatrix, FTest, FitSummary, INTERCEPT};
use crate::simplex::{
    response_coordinate_z0, to_coordinates, Composition, CoordinateBlock, CoordinateScheme,
    PivotSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "binomial" => Ok(Family::Binomial),
            other => Err(Error::InvalidInput(format!("unknown family \"{other}\""))),
        }
    }
}

/// What the model explains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// A non-compositional column.
    Variable(String),
    /// The composition itself, one pivot coordinate at a time.
    Composition,
    /// One part explained by the remaining parts.
    Part(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    CompCovariates,
    CompResponse,
    WithinComposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    /// The full composition, including parts that will not be displayed.
    pub parts: Vec<String>,
    pub covariates: Vec<String>,
    pub response: Response,
    pub scheme: CoordinateScheme,
    pub alpha: f64,
}

impl ModelSpec {
    fn validate(&self, data: &Dataset) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        for (i, p) in self.parts.iter().enumerate() {
            if self.parts[..i].contains(p) {
                return Err(Error::DuplicateColumn(p.clone()));
            }
        }
        for c in &self.covariates {
            if self.parts.contains(c) {
                return Err(Error::InvalidInput(format!(
                    "\"{c}\" is listed both as a part and as a covariate"
                )));
            }
            if data.column(c)?.role == ColumnRole::CompositionalPart {
                return Err(Error::InvalidInput(format!(
                    "covariate \"{c}\" is declared as a compositional part"
                )));
            }
        }
        Ok(())
    }

    fn covariate_columns(&self, data: &Dataset) -> Result<Vec<(String, Vec<f64>)>> {
        self.covariates
            .iter()
            .map(|c| Ok((c.clone(), data.values(c)?.to_vec())))
            .collect()
    }
}

/// One reported coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// t value for least squares, z value for the logit model.
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Fit-level statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FitStats {
    Gaussian {
        sigma: f64,
        sigma2: f64,
        df_residual: usize,
        r_squared: f64,
        adj_r_squared: f64,
        f_test: Option<FTest>,
    },
    Binomial {
        null_deviance: f64,
        residual_deviance: f64,
        aic: f64,
        df_null: usize,
        df_residual: usize,
        iterations: usize,
    },
}

/// A single engine fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum ModelFit {
    Ols(FitSummary),
    Logit(GlmSummary),
}

impl ModelFit {
    pub fn names(&self) -> &[String] {
        match self {
            ModelFit::Ols(f) => &f.names,
            ModelFit::Logit(f) => &f.names,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        match self {
            ModelFit::Ols(f) => &f.coefficients,
            ModelFit::Logit(f) => &f.coefficients,
        }
    }

    pub fn std_errors(&self) -> &[f64] {
        match self {
            ModelFit::Ols(f) => &f.std_errors,
            ModelFit::Logit(f) => &f.std_errors,
        }
    }

    /// t or z values.
    pub fn statistics(&self) -> &[f64] {
        match self {
            ModelFit::Ols(f) => &f.t_values,
            ModelFit::Logit(f) => &f.z_values,
        }
    }

    pub fn p_values(&self) -> &[f64] {
        match self {
            ModelFit::Ols(f) => &f.p_values,
            ModelFit::Logit(f) => &f.p_values,
        }
    }

    /// Fitted means (probabilities for the logit model).
    pub fn fitted(&self) -> &[f64] {
        match self {
            ModelFit::Ols(f) => &f.fitted,
            ModelFit::Logit(f) => &f.fitted,
        }
    }

    pub fn coefficient(&self, j: usize, alpha: f64) -> Coefficient {
        let p_value = self.p_values()[j];
        Coefficient {
            name: self.names()[j].clone(),
            estimate: self.coefficients()[j],
            std_error: self.std_errors()[j],
            statistic: self.statistics()[j],
            p_value,
            significant: p_value < alpha,
        }
    }

    pub fn stats(&self) -> FitStats {
        match self {
            ModelFit::Ols(f) => FitStats::Gaussian {
                sigma: f.sigma(),
                sigma2: f.sigma2_hat,
                df_residual: f.df_residual,
                r_squared: f.r_squared,
                adj_r_squared: f.adj_r_squared,
                f_test: f.f_test,
            },
            ModelFit::Logit(f) => FitStats::Binomial {
                null_deviance: f.null_deviance,
                residual_deviance: f.residual_deviance,
                aic: f.aic,
                df_null: f.df_null,
                df_residual: f.df_residual,
                iterations: f.iterations,
            },
        }
    }

    /// Pivot-independent scalars used to measure agreement between pivots.
    fn invariant_scalars(&self) -> Vec<f64> {
        match self.stats() {
            FitStats::Gaussian {
                sigma2,
                r_squared,
                f_test,
                ..
            } => vec![sigma2, r_squared, f_test.map_or(0.0, |f| f.value)],
            FitStats::Binomial {
                residual_deviance,
                aic,
                ..
            } => vec![residual_deviance, aic],
        }
    }
}

/// One row per part: the coefficient(s) of the first pivot coordinate when
/// that part is the pivot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotRow {
    pub part: String,
    pub terms: Vec<Coefficient>,
    /// Per-row statistics, present when every row is its own model
    /// (compositional response).
    pub stats: Option<FitStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotTable {
    pub kind: ModelKind,
    pub family: Family,
    pub scheme: CoordinateScheme,
    pub alpha: f64,
    /// Response label: a column name, a target part, or "composition".
    pub response: String,
    /// Parts entering the pivot coordinates, in row order.
    pub parts: Vec<String>,
    pub covariates: Vec<String>,
    pub rows: Vec<PivotRow>,
    /// Pivot-independent coefficients (intercept and covariates), taken from
    /// the first pivot fit.
    pub shared: Vec<Coefficient>,
    pub stats: Option<FitStats>,
    /// Largest relative disagreement across pivots among quantities that
    /// should not depend on the pivot.
    pub max_pivot_discrepancy: f64,
    #[serde(skip)]
    pub fits: Vec<ModelFit>,
}

impl PivotTable {
    pub fn statistic_label(&self) -> &'static str {
        match self.family {
            Family::Gaussian => "t",
            Family::Binomial => "z",
        }
    }

    pub fn row(&self, part: &str) -> Option<&PivotRow> {
        self.rows.iter().find(|r| r.part == part)
    }

    /// Number of parts entering the coordinates.
    pub fn d(&self) -> usize {
        self.parts.len()
    }
}

fn pivot_design(
    comps: &[Composition],
    part_names: &[String],
    l: usize,
    scheme: CoordinateScheme,
    covariates: &[(String, Vec<f64>)],
) -> Result<DesignMatrix> {
    let block: CoordinateBlock = to_coordinates(comps, &PivotSpec::new(l, part_names.len())?, scheme)?
        .with_part_names(part_names)?;
    let mut columns: Vec<(String, Vec<f64>)> = block
        .coordinate_names()
        .into_iter()
        .enumerate()
        .map(|(j, name)| (name, block.column(j)))
        .collect();
    columns.extend(covariates.iter().cloned());
    DesignMatrix::with_intercept(comps.len(), columns)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b || (a.is_nan() && b.is_nan()) {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Largest relative disagreement of pivot-invariant quantities across fits.
/// `shared` indexes the coefficients that should agree.
fn pivot_discrepancy(fits: &[ModelFit], shared: &[usize]) -> f64 {
    let first = &fits[0];
    let base_scalars = first.invariant_scalars();
    fits[1..]
        .iter()
        .flat_map(|f| {
            let coefs = shared.iter().map(move |&j| {
                rel_diff(f.coefficients()[j], first.coefficients()[j])
                    .max(rel_diff(f.std_errors()[j], first.std_errors()[j]))
            });
            let scalars = f
                .invariant_scalars()
                .into_iter()
                .zip(base_scalars.clone())
                .map(|(a, b)| rel_diff(a, b));
            let fitted = f
                .fitted()
                .iter()
                .zip(first.fitted())
                .map(|(&a, &b)| rel_diff(a, b));
            coefs.chain(scalars).chain(fitted).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Covariate-model assembly shared by the compositional-covariate and
/// within-composition families.
fn assemble_covariate_table(
    kind: ModelKind,
    spec: &ModelSpec,
    response: String,
    parts: Vec<String>,
    fits: Vec<ModelFit>,
) -> PivotTable {
    let d = parts.len();
    let p = fits[0].coefficients().len();
    // design layout: intercept, D-1 coordinates, covariates
    let shared_idx: Vec<usize> = std::iter::once(0).chain(d..p).collect();
    let rows = parts
        .iter()
        .zip(&fits)
        .map(|(part, fit)| PivotRow {
            part: part.clone(),
            terms: vec![fit.coefficient(1, spec.alpha)],
            stats: None,
        })
        .collect();
    PivotTable {
        kind,
        family: spec.family,
        scheme: spec.scheme,
        alpha: spec.alpha,
        response,
        parts,
        covariates: spec.covariates.clone(),
        rows,
        shared: shared_idx
            .iter()
            .map(|&j| fits[0].coefficient(j, spec.alpha))
            .collect(),
        stats: Some(fits[0].stats()),
        max_pivot_discrepancy: pivot_discrepancy(&fits, &shared_idx),
        fits,
    }
}

/// Regression of a non-compositional response on the pivot coordinates of a
/// composition plus further covariates, once per pivot part.
pub fn fit_comp_covariates(data: &Dataset, spec: &ModelSpec) -> Result<PivotTable> {
    spec.validate(data)?;
    let response = match &spec.response {
        Response::Variable(name) => name.clone(),
        other => {
            return Err(Error::InvalidInput(format!(
                "compositional covariates need a non-compositional response, got {other:?}"
            )))
        }
    };
    if spec.parts.contains(&response) || spec.covariates.contains(&response) {
        return Err(Error::InvalidInput(format!(
            "response \"{response}\" is also a regressor"
        )));
    }
    let col = data.column(&response)?;
    if col.role == ColumnRole::CompositionalPart {
        return Err(Error::InvalidInput(format!(
            "response \"{response}\" is a compositional part"
        )));
    }
    let y = col.values.clone();
    let comps = data.compositions(&spec.parts)?;
    let covs = spec.covariate_columns(data)?;

    let fits = (0..spec.parts.len())
        .into_par_iter()
        .map(|l| {
            let design = pivot_design(&comps, &spec.parts, l, spec.scheme, &covs)?;
            Ok(match spec.family {
                Family::Gaussian => ModelFit::Ols(fit_ols(&design, &y, spec.alpha)?),
                Family::Binomial => ModelFit::Logit(fit_logit(&design, &y)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble_covariate_table(
        ModelKind::CompCovariates,
        spec,
        response,
        spec.parts.clone(),
        fits,
    ))
}

/// Regression of each part's first pivot coordinate on non-compositional
/// covariates.
pub fn fit_comp_response(data: &Dataset, spec: &ModelSpec) -> Result<PivotTable> {
    spec.validate(data)?;
    if spec.response != Response::Composition {
        return Err(Error::InvalidInput(format!(
            "compositional response model needs response = composition, got {:?}",
            spec.response
        )));
    }
    if spec.family != Family::Gaussian {
        return Err(Error::InvalidInput(
            "compositional response models are fitted by least squares (gaussian family)".into(),
        ));
    }
    let comps = data.compositions(&spec.parts)?;
    let design = DesignMatrix::with_intercept(data.n_rows(), spec.covariate_columns(data)?)?;
    let d = spec.parts.len();

    let fits = (0..d)
        .into_par_iter()
        .map(|l| {
            let block = to_coordinates(&comps, &PivotSpec::new(l, d)?, spec.scheme)?;
            Ok(ModelFit::Ols(fit_ols(&design, &block.column(0), spec.alpha)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = spec
        .parts
        .iter()
        .zip(&fits)
        .map(|(part, fit)| PivotRow {
            part: part.clone(),
            terms: (0..fit.coefficients().len())
                .map(|j| fit.coefficient(j, spec.alpha))
                .collect(),
            stats: Some(fit.stats()),
        })
        .collect();

    Ok(PivotTable {
        kind: ModelKind::CompResponse,
        family: Family::Gaussian,
        scheme: spec.scheme,
        alpha: spec.alpha,
        response: "composition".into(),
        parts: spec.parts.clone(),
        covariates: spec.covariates.clone(),
        rows,
        shared: Vec::new(),
        stats: None,
        max_pivot_discrepancy: 0.0,
        fits,
    })
}

/// Regression of one part's relative information on the pivot coordinates
/// of the remaining parts plus covariates.
///
/// `spec.parts` is the full composition including `target_part`.
pub fn fit_within_composition(
    data: &Dataset,
    target_part: &str,
    spec: &ModelSpec,
) -> Result<PivotTable> {
    spec.validate(data)?;
    if let Response::Part(p) = &spec.response {
        if p != target_part {
            return Err(Error::InvalidInput(format!(
                "spec response part \"{p}\" differs from target \"{target_part}\""
            )));
        }
    }
    if spec.family != Family::Gaussian {
        return Err(Error::InvalidInput(
            "within-composition models are fitted by least squares (gaussian family)".into(),
        ));
    }
    if !spec.parts.iter().any(|p| p == target_part) {
        return Err(Error::MissingColumn(target_part.to_string()));
    }
    let rest: Vec<String> = spec
        .parts
        .iter()
        .filter(|p| *p != target_part)
        .cloned()
        .collect();
    if rest.len() < 2 {
        return Err(Error::InvalidInput(
            "within-composition regression needs at least two explanatory parts".into(),
        ));
    }
    // Validate the full composition so zeros in the target are reported.
    data.compositions(&spec.parts)?;
    let comps = data.compositions(&rest)?;
    let z0 = response_coordinate_z0(data.values(target_part)?, &comps, spec.scheme)?;
    let covs = spec.covariate_columns(data)?;

    let fits = (0..rest.len())
        .into_par_iter()
        .map(|l| {
            let design = pivot_design(&comps, &rest, l, spec.scheme, &covs)?;
            Ok(ModelFit::Ols(fit_ols(&design, &z0, spec.alpha)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble_covariate_table(
        ModelKind::WithinComposition,
        spec,
        target_part.to_string(),
        rest,
        fits,
    ))
}

/// Raw-scale least squares used as the comparison baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveFit {
    pub fit: FitSummary,
    /// The response is a part of a constant-sum composition and every other
    /// part is a regressor, so the fit is exact by construction.
    pub constant_sum_pathology: bool,
    pub warning: Option<String>,
}

/// Ordinary regression on parts in their original (e.g. percentage) scale.
pub fn fit_naive_raw<S: AsRef<str>>(
    data: &Dataset,
    response: &str,
    regressor_parts: &[S],
    covariates: &[S],
    alpha: f64,
) -> Result<NaiveFit> {
    let regressor_parts: Vec<&str> = regressor_parts.iter().map(AsRef::as_ref).collect();
    if regressor_parts.contains(&response) {
        return Err(Error::InvalidInput(format!(
            "response \"{response}\" is also a regressor"
        )));
    }
    let y = data.values(response)?.to_vec();
    let mut columns = Vec::new();
    for name in regressor_parts.iter().copied().chain(covariates.iter().map(AsRef::as_ref)) {
        columns.push((name.to_string(), data.values(name)?.to_vec()));
    }
    let design = DesignMatrix::with_intercept(data.n_rows(), columns)?;
    let fit = fit_ols(&design, &y, alpha)?;

    let declared = data.part_names();
    let response_is_part = declared.iter().any(|p| p == response);
    let covers_all = declared
        .iter()
        .all(|p| p == response || regressor_parts.contains(&p.as_str()));
    let pathology = response_is_part && covers_all && constant_row_sum(data, &declared)?;
    let warning = pathology.then(|| {
        format!(
            "\"{response}\" and the regressor parts make up a constant-sum composition; \
             the fit is exact by construction (R-squared = 1) and carries no information"
        )
    });
    Ok(NaiveFit {
        fit,
        constant_sum_pathology: pathology,
        warning,
    })
}

fn constant_row_sum(data: &Dataset, parts: &[String]) -> Result<bool> {
    let cols = parts
        .iter()
        .map(|p| data.values(p))
        .collect::<Result<Vec<_>>>()?;
    let sums: Vec<f64> = (0..data.n_rows())
        .map(|r| cols.iter().map(|c| c[r]).sum())
        .collect();
    let Some(&first) = sums.first() else {
        return Ok(false);
    };
    Ok(sums
        .iter()
        .all(|s| (s - first).abs() <= 1e-9 * first.abs().max(1.0)))
}

/// Coefficient lookup by name in the shared block.
pub fn shared_coefficient<'a>(table: &'a PivotTable, name: &str) -> Option<&'a Coefficient> {
    table.shared.iter().find(|c| c.name == name)
}

/// The intercept of a covariate-model table.
pub fn intercept(table: &PivotTable) -> Option<&Coefficient> {
    shared_coefficient(table, INTERCEPT)
}
