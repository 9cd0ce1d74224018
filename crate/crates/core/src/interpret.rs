//! Rescaling between the orthonormal and orthogonal coordinate schemes, and
//! dominance-factor readings of orthogonal-scheme coefficients.
//!
//! Moving from orthonormal to orthogonal coordinates divides each regressor
//! coordinate by `ln 2 * k_i` and a response coordinate by `ln 2 * k`, so
//! least-squares estimates and their standard errors pick up the reciprocal
//! factors while t, z and F statistics are untouched.

use std::f64::consts::{LN_2, LOG2_E};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, PivotTable};
use crate::simplex::{normalizing_constant, CoordinateScheme};

/// Identifies the model family and the number of parts entering the
/// pivot coordinates (for within-composition models, the explanatory
/// parts only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeTransform {
    pub family: ModelKind,
    pub d: usize,
}

impl SchemeTransform {
    pub fn new(family: ModelKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!(
                "scheme transform needs D >= 2, got {d}"
            )));
        }
        Ok(Self { family, d })
    }

    /// Transform matching a fitted table.
    pub fn for_table(table: &PivotTable) -> Result<Self> {
        Self::new(table.kind, table.d())
    }

    /// Factor for the coefficient of pivot coordinate `i` (1-based) in
    /// covariate models.
    pub fn coordinate_factor(&self, i: usize) -> f64 {
        let d = self.d;
        match self.family {
            ModelKind::CompCovariates => LN_2 * normalizing_constant(d, i),
            ModelKind::WithinComposition => {
                let (df, di) = (d as f64, i as f64);
                ((df + 1.0) * (df - di) / (df * (df - di + 1.0))).sqrt()
            }
            ModelKind::CompResponse => self.response_factor(),
        }
    }

    /// Factor applied to the intercept and to non-compositional covariates.
    pub fn response_factor(&self) -> f64 {
        let d = self.d as f64;
        match self.family {
            ModelKind::CompCovariates => 1.0,
            ModelKind::CompResponse => LOG2_E * (d / (d - 1.0)).sqrt(),
            ModelKind::WithinComposition => LOG2_E * ((d + 1.0) / d).sqrt(),
        }
    }

    /// Per-slot factors: `D - 1` coordinate slots for covariate models,
    /// `len` identical slots for the compositional-response model.
    fn factors(&self, len: usize) -> Result<Vec<f64>> {
        match self.family {
            ModelKind::CompResponse => Ok(vec![self.response_factor(); len]),
            _ => {
                if len != self.d - 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "expected {} coordinate coefficients, got {len}",
                        self.d - 1
                    )));
                }
                Ok((1..self.d).map(|i| self.coordinate_factor(i)).collect())
            }
        }
    }
}

/// Rescales orthonormal-scheme coefficients (or standard errors) into
/// their orthogonal-scheme values.
///
/// Covariate models take the `D - 1` coordinate coefficients; the
/// compositional-response model takes the full `k + 1` vector.
pub fn orthonormal_to_orthogonal(params: &[f64], transform: &SchemeTransform) -> Result<Vec<f64>> {
    let f = transform.factors(params.len())?;
    if transform.family == ModelKind::CompResponse && params.is_empty() {
        return Err(Error::DimensionMismatch("empty coefficient vector".into()));
    }
    Ok(params.iter().zip(f).map(|(p, f)| p * f).collect())
}

/// Inverse of [`orthonormal_to_orthogonal`].
pub fn orthogonal_to_orthonormal(params: &[f64], transform: &SchemeTransform) -> Result<Vec<f64>> {
    let f = transform.factors(params.len())?;
    if transform.family == ModelKind::CompResponse && params.is_empty() {
        return Err(Error::DimensionMismatch("empty coefficient vector".into()));
    }
    Ok(params.iter().zip(f).map(|(p, f)| p / f).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increase,
    Decrease,
    NoChange,
}

/// Multiplicative change in relative dominance implied by an
/// orthogonal-scheme coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub part: Option<String>,
    pub coefficient: f64,
    /// `2^coefficient`
    pub delta: f64,
    /// `100 * (delta - 1)`, unrounded.
    pub percent_change: f64,
    pub direction: Direction,
}

impl DominanceReport {
    pub fn for_part(part: impl Into<String>, beta_star: f64) -> Self {
        Self {
            part: Some(part.into()),
            ..dominance_factor(beta_star)
        }
    }

    /// Percent change rounded to whole percent, e.g. `+18%`, `-10%`, or
    /// `no change`.
    pub fn percent_label(&self) -> String {
        let rounded = self.percent_change.round();
        if rounded == 0.0 {
            "no change".to_string()
        } else {
            format!("{rounded:+.0}%")
        }
    }
}

pub fn dominance_factor(beta_star: f64) -> DominanceReport {
    let delta = beta_star.exp2();
    let direction = if beta_star > 0.0 {
        Direction::Increase
    } else if beta_star < 0.0 {
        Direction::Decrease
    } else {
        Direction::NoChange
    };
    DominanceReport {
        part: None,
        coefficient: beta_star,
        delta,
        percent_change: 100.0 * (delta - 1.0),
        direction,
    }
}

/// Plain-language readings of the significant coefficients in `table`.
///
/// Orthonormal-scheme tables are rescaled with `transform` first, so the
/// sentences always describe doubling of relative dominance.
pub fn render_interpretation(table: &PivotTable, transform: &SchemeTransform) -> Vec<String> {
    let to_orthogonal = |value: f64, factor: f64| match table.scheme {
        CoordinateScheme::Orthogonal => value,
        CoordinateScheme::Orthonormal => value * factor,
    };
    let mut lines = Vec::new();
    match table.kind {
        ModelKind::CompCovariates => {
            let subject = match table.family {
                crate::models::Family::Gaussian => table.response.clone(),
                crate::models::Family::Binomial => format!("the logit of {}", table.response),
            };
            for row in &table.rows {
                let term = &row.terms[0];
                if !term.significant {
                    continue;
                }
                let beta = to_orthogonal(term.estimate, transform.coordinate_factor(1));
                lines.push(format!(
                    "{subject} is {} by {:.3} units when the relative dominance of {} doubles",
                    if beta >= 0.0 { "higher" } else { "lower" },
                    beta.abs(),
                    row.part,
                ));
            }
        }
        ModelKind::CompResponse => {
            for row in &table.rows {
                for term in row.terms.iter().skip(1).filter(|t| t.significant) {
                    let beta = to_orthogonal(term.estimate, transform.response_factor());
                    let rep = dominance_factor(beta);
                    lines.push(format!(
                        "a unit increase in {} multiplies the relative dominance of {} by {:.2} ({})",
                        term.name,
                        row.part,
                        rep.delta,
                        rep.percent_label()
                    ));
                }
            }
        }
        ModelKind::WithinComposition => {
            for row in &table.rows {
                let term = &row.terms[0];
                if !term.significant {
                    continue;
                }
                let beta = to_orthogonal(term.estimate, transform.coordinate_factor(1));
                let rep = dominance_factor(beta);
                lines.push(format!(
                    "doubling the relative dominance of {} multiplies the relative dominance of {} by {:.2} ({})",
                    row.part,
                    table.response,
                    rep.delta,
                    rep.percent_label()
                ));
            }
            for term in table.shared.iter().skip(1).filter(|t| t.significant) {
                let beta = to_orthogonal(term.estimate, transform.response_factor());
                let rep = dominance_factor(beta);
                lines.push(format!(
                    "a unit increase in {} multiplies the relative dominance of {} by {:.2} ({})",
                    term.name,
                    table.response,
                    rep.delta,
                    rep.percent_label()
                ));
            }
        }
    }
    lines
}
