//! Binomial regression with the logit link, fitted by Fisher scoring.
//!
//! For the canonical logit link Fisher scoring coincides with Newton's
//! method and with iteratively reweighted least squares: each step solves
//! `(X'WX) b = X'W z` with weights `mu (1 - mu)` and working response
//! `z = eta + (y - mu) / w`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::{linear_predictor, DesignMatrix, GramSolver};
use crate::statdist::normal_sf2;

const POLISH_STEPS: usize = 3;

/// Iteration controls for [`fit_logit_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmOptions {
    pub max_iterations: usize,
    /// Stop when `|dev_old - dev| / (|dev| + 0.1)` falls to this level.
    pub deviance_tolerance: f64,
    /// Stop when `max |X'(y - mu)|` falls to this level.
    pub score_tolerance: f64,
    pub max_step_halvings: usize,
    pub min_weight: f64,
    /// `|eta|` beyond which fitted probabilities are 0 or 1 in double precision.
    pub separation_threshold: f64,
}

impl Default for GlmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 25,
            deviance_tolerance: 1e-10,
            score_tolerance: 1e-8,
            max_step_halvings: 10,
            min_weight: 1e-10,
            separation_threshold: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmSummary {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub cov_matrix: Vec<Vec<f64>>,
    pub fitted: Vec<f64>,
    pub null_deviance: f64,
    pub residual_deviance: f64,
    pub aic: f64,
    pub df_null: usize,
    pub df_residual: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `max |X'(y - mu)|` at the returned coefficients.
    pub score_norm: f64,
    pub n: usize,
}

pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Binary deviance `-2 sum [y ln mu + (1 - y) ln(1 - mu)]`, evaluated from
/// the linear predictor to keep precision near 0 and 1.
fn deviance(y: &[f64], eta: &DVector<f64>) -> f64 {
    // ln(1 + e^x) without overflow
    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    2.0 * y
        .iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| if yi == 1.0 { softplus(-e) } else { softplus(e) })
        .sum::<f64>()
}

fn score(x: &DMatrix<f64>, y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    let resid = DVector::from_iterator(y.len(), y.iter().zip(eta.iter()).map(|(yi, e)| yi - logistic(*e)));
    x.tr_mul(&resid).amax()
}

/// Newton increment `(X'WX)^-1 X'(y - mu)`; same step as the working-response
/// form but without cancellation near the solution.
fn fisher_increment(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    eta: &DVector<f64>,
    names: &[String],
    min_weight: f64,
) -> Result<DVector<f64>> {
    let mu = eta.map(logistic);
    let w = mu.map(|m| (m * (1.0 - m)).max(min_weight));
    let solver = GramSolver::new(&weighted_gram(x, &w), names)?;
    Ok(solver.solve(&x.tr_mul(&(y - mu))))
}

fn weighted_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    x.tr_mul(&xw)
}

/// Fits a logistic regression with default [`GlmOptions`].
pub fn fit_logit(design: &DesignMatrix, y: &[f64]) -> Result<GlmSummary> {
    fit_logit_with(design, y, &GlmOptions::default())
}

pub fn fit_logit_with(design: &DesignMatrix, y: &[f64], opts: &GlmOptions) -> Result<GlmSummary> {
    let n = design.nrows();
    let p = design.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} values, design has {n} rows",
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidInput(format!(
            "binomial response must be coded 0/1, found {v}"
        )));
    }
    if p == 0 || n <= p {
        return Err(Error::InsufficientData { n, p });
    }
    let x = design.values();
    let names = design.names();
    let yv = DVector::from_column_slice(y);

    // rank check on the unweighted design
    GramSolver::new(&x.tr_mul(x), names)?;

    let mut beta = DVector::zeros(p);
    let mut eta = DVector::zeros(n);
    let mut dev = deviance(y, &eta);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let mut candidate = &beta + fisher_increment(x, &yv, &eta, names, opts.min_weight)?;
        let mut cand_eta = x * &candidate;
        let mut cand_dev = deviance(y, &cand_eta);
        let mut halvings = 0;
        while !(cand_dev <= dev) && halvings < opts.max_step_halvings {
            candidate = (&beta + &candidate) * 0.5;
            cand_eta = x * &candidate;
            cand_dev = deviance(y, &cand_eta);
            halvings += 1;
        }
        let rel_change = (dev - cand_dev).abs() / (cand_dev.abs() + 0.1);
        beta = candidate;
        eta = cand_eta;
        dev = cand_dev;
        if rel_change <= opts.deviance_tolerance || score(x, &yv, &eta) <= opts.score_tolerance {
            converged = true;
            break;
        }
    }

    if converged {
        // A few more full steps take the estimates from the stopping rule's
        // accuracy to working precision; convergence is quadratic here.
        for _ in 0..POLISH_STEPS {
            let step = fisher_increment(x, &yv, &eta, names, opts.min_weight)?;
            let candidate = &beta + &step;
            let cand_eta = x * &candidate;
            let cand_dev = deviance(y, &cand_eta);
            if !(cand_dev <= dev + 1e-12 * dev.abs().max(1.0)) {
                break;
            }
            let settled = step.amax() <= 1e-15 * beta.amax().max(1.0);
            beta = candidate;
            eta = cand_eta;
            dev = cand_dev;
            iterations += 1;
            if settled {
                break;
            }
        }
    }

    let max_eta = eta.amax();
    if max_eta > opts.separation_threshold {
        return Err(Error::Separation { max_eta });
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            coefficients: beta.iter().copied().collect(),
        });
    }

    let mu = eta.map(logistic);
    let w = mu.map(|m| (m * (1.0 - m)).max(opts.min_weight));
    let cov = GramSolver::new(&weighted_gram(x, &w), names)?.inverse();

    let mut std_errors = Vec::with_capacity(p);
    let mut z_values = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let se = cov[(j, j)].max(0.0).sqrt();
        let z = beta[j] / se;
        std_errors.push(se);
        z_values.push(z);
        p_values.push(normal_sf2(z).value);
    }

    let intercept = design.has_intercept();
    let null_eta = if intercept {
        let ybar = yv.mean();
        (ybar / (1.0 - ybar)).ln()
    } else {
        0.0
    };
    let null_deviance = deviance(y, &DVector::from_element(n, null_eta));

    Ok(GlmSummary {
        names: names.to_vec(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        z_values,
        p_values,
        cov_matrix: (0..p).map(|i| cov.row(i).iter().copied().collect()).collect(),
        fitted: mu.iter().copied().collect(),
        null_deviance,
        residual_deviance: dev,
        aic: dev + 2.0 * p as f64,
        df_null: if intercept { n - 1 } else { n },
        df_residual: n - p,
        iterations,
        converged,
        score_norm: score(x, &yv, &eta),
        n,
    })
}

/// Fitted probabilities `logistic(X b)` for a design matching the fit.
pub fn predict_prob(fit: &GlmSummary, design: &DesignMatrix) -> Result<Vec<f64>> {
    Ok(linear_predictor(&fit.names, &fit.coefficients, design)?
        .into_iter()
        .map(logistic)
        .collect())
}
