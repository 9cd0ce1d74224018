//! Simplex primitives and pivot logratio coordinates.
//!
//! A composition is a vector of strictly positive parts whose information is
//! carried entirely by the ratios between parts. Pivot coordinates map a
//! `D`-part composition to `D - 1` real values such that the first coordinate
//! captures everything about one chosen part relative to the rest:
//!
//! ```text
//! z_i = k_i * log( x_i / gm(x_{i+1}, ..., x_D) ),   i = 1..D-1
//! ```
//!
//! where the parts have been reordered so the pivot comes first. The
//! orthonormal scheme uses the natural log with `k_i = sqrt((D-i)/(D-i+1))`;
//! the orthogonal scheme uses the binary log with `k_i = 1`, so a unit step in
//! a coordinate means doubling the relative dominance of its part.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// One observation of a `D`-part composition. All parts are strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<f64>,
}

impl Composition {
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        Self::validated(parts, 0)
    }

    /// Like [`Composition::new`], but reports `row` in the error.
    pub(crate) fn validated(parts: Vec<f64>, row: usize) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a composition needs at least 2 parts, got {}",
                parts.len()
            )));
        }
        if let Some((part, &value)) = parts
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositivePart { row, part, value });
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.parts.iter().sum()
    }

    /// Rescales the parts so they sum to `total`. Ratios are unchanged.
    pub fn closure(&self, total: f64) -> Result<Self> {
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidInput(format!(
                "closure total must be positive, got {total}"
            )));
        }
        let scale = total / self.total();
        Ok(Self {
            parts: self.parts.iter().map(|p| p * scale).collect(),
        })
    }

    /// Multiplies every part by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.parts.iter().map(|p| p * factor).collect())
    }
}

/// `exp(mean(ln v))`, computed in log space so wide dynamic ranges don't overflow.
pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "geometric mean of an empty list".into(),
        ));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "geometric mean requires positive values, got {v}"
        )));
    }
    if values.len() == 1 {
        return Ok(values[0]);
    }
    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    Ok(mean_log.exp())
}

/// Which family of pivot coordinates to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordinateScheme {
    /// Natural log with normalizing constants; an isometric basis.
    Orthonormal,
    /// Binary log without normalizing constants.
    Orthogonal,
}

impl CoordinateScheme {
    pub fn log_base(self) -> f64 {
        match self {
            CoordinateScheme::Orthonormal => std::f64::consts::E,
            CoordinateScheme::Orthogonal => 2.0,
        }
    }

    /// Factor multiplying the natural-log ratio for coordinate `i`
    /// (1-based) of a `d`-part composition.
    ///
    /// Orthonormal: `sqrt((d-i)/(d-i+1))`. Orthogonal: `1 / ln 2`.
    pub fn coordinate_factor(self, d: usize, i: usize) -> f64 {
        debug_assert!(i >= 1 && i < d);
        match self {
            CoordinateScheme::Orthonormal => normalizing_constant(d, i),
            CoordinateScheme::Orthogonal => 1.0 / LN_2,
        }
    }

    /// Converts a natural logarithm into this scheme's logarithm.
    pub(crate) fn rebase_ln(self, ln_value: f64) -> f64 {
        match self {
            CoordinateScheme::Orthonormal => ln_value,
            CoordinateScheme::Orthogonal => ln_value / LN_2,
        }
    }
}

impl std::fmt::Display for CoordinateScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoordinateScheme::Orthonormal => f.write_str("orthonormal"),
            CoordinateScheme::Orthogonal => f.write_str("orthogonal"),
        }
    }
}

impl std::str::FromStr for CoordinateScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthonormal" => Ok(CoordinateScheme::Orthonormal),
            "orthogonal" => Ok(CoordinateScheme::Orthogonal),
            other => Err(Error::InvalidInput(format!(
                "unknown coordinate scheme \"{other}\""
            ))),
        }
    }
}

/// `sqrt((d-i)/(d-i+1))`, the orthonormal scaling of coordinate `i` (1-based).
pub fn normalizing_constant(d: usize, i: usize) -> f64 {
    let rest = (d - i) as f64;
    (rest / (rest + 1.0)).sqrt()
}

/// Pivot selection: part `pivot` (0-based) goes first, the others follow in
/// their original order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotSpec {
    pivot: usize,
    order: Vec<usize>,
}

impl PivotSpec {
    pub fn new(pivot: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!(
                "pivot coordinates need D >= 2, got {d}"
            )));
        }
        if pivot >= d {
            return Err(Error::InvalidInput(format!(
                "pivot index {pivot} out of range for {d} parts"
            )));
        }
        let order = std::iter::once(pivot)
            .chain((0..d).filter(|&j| j != pivot))
            .collect();
        Ok(Self { pivot, order })
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// `order()[k]` is the original index of the part at position `k`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn parts(&self) -> usize {
        self.order.len()
    }
}

/// `n x (D-1)` pivot coordinates with the metadata needed to invert them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateBlock {
    pub values: DMatrix<f64>,
    pub scheme: CoordinateScheme,
    pub pivot: PivotSpec,
    pub part_names: Vec<String>,
}

impl CoordinateBlock {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn parts(&self) -> usize {
        self.pivot.parts()
    }

    /// Replaces the default `x1..xD` labels.
    pub fn with_part_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.parts() {
            return Err(Error::DimensionMismatch(format!(
                "{} part names for {} parts",
                names.len(),
                self.parts()
            )));
        }
        self.part_names = names.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(self)
    }

    /// Column labels: the pivot part's name for the first coordinate,
    /// `z2[pivot]..z{D-1}[pivot]` for the rest.
    pub fn coordinate_names(&self) -> Vec<String> {
        let first = self.part_names[self.pivot.pivot()].clone();
        let rest = (2..self.parts()).map(|i| format!("z{i}[{first}]")).collect::<Vec<_>>();
        std::iter::once(first).chain(rest).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }
}

fn check_width(data: &[Composition]) -> Result<usize> {
    let d = data.first().map(Composition::len).ok_or_else(|| {
        Error::InvalidInput("no compositions supplied".into())
    })?;
    if let Some((row, c)) = data.iter().enumerate().find(|(_, c)| c.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "row {row} has {} parts, expected {d}",
            c.len()
        )));
    }
    Ok(d)
}

/// Pivot coordinates of every row of `data`.
pub fn to_coordinates(
    data: &[Composition],
    pivot: &PivotSpec,
    scheme: CoordinateScheme,
) -> Result<CoordinateBlock> {
    let d = check_width(data)?;
    if pivot.parts() != d {
        return Err(Error::DimensionMismatch(format!(
            "pivot defined for {} parts, data has {d}",
            pivot.parts()
        )));
    }
    let factors: Vec<f64> = (1..d).map(|i| scheme.coordinate_factor(d, i)).collect();
    let mut values = DMatrix::zeros(data.len(), d - 1);
    let mut logs = vec![0.0; d];
    for (r, comp) in data.iter().enumerate() {
        for (k, &j) in pivot.order().iter().enumerate() {
            logs[k] = comp.parts()[j].ln();
        }
        // Suffix sums give the mean log of the trailing parts for each position.
        let mut tail_sum = logs[d - 1];
        for i in (0..d - 1).rev() {
            let tail_mean = tail_sum / (d - 1 - i) as f64;
            values[(r, i)] = factors[i] * (logs[i] - tail_mean);
            tail_sum += logs[i];
        }
    }
    Ok(CoordinateBlock {
        values,
        scheme,
        pivot: pivot.clone(),
        part_names: (1..=d).map(|j| format!("x{j}")).collect(),
    })
}

/// Logcontrast coefficients generating each coordinate, one row per
/// coordinate and one column per part in the original order.
///
/// Applied to logs in the scheme's base (natural for orthonormal, binary for
/// orthogonal), `C * log(x)` reproduces the coordinates.
pub fn contrast_matrix(pivot: &PivotSpec, scheme: CoordinateScheme, d: usize) -> Result<DMatrix<f64>> {
    if pivot.parts() != d {
        return Err(Error::DimensionMismatch(format!(
            "pivot defined for {} parts, requested D = {d}",
            pivot.parts()
        )));
    }
    let mut c = DMatrix::zeros(d - 1, d);
    for i in 1..d {
        let k = match scheme {
            CoordinateScheme::Orthonormal => normalizing_constant(d, i),
            CoordinateScheme::Orthogonal => 1.0,
        };
        let share = 1.0 / (d - i) as f64;
        c[(i - 1, pivot.order()[i - 1])] = k;
        for &j in &pivot.order()[i..] {
            c[(i - 1, j)] = -k * share;
        }
    }
    Ok(c)
}

/// Inverts a coordinate block back to compositions closed to `total`.
pub fn from_coordinates(block: &CoordinateBlock, total: f64) -> Result<Vec<Composition>> {
    let d = block.parts();
    if block.values.ncols() != d - 1 {
        return Err(Error::DimensionMismatch(format!(
            "block has {} columns, expected {}",
            block.values.ncols(),
            d - 1
        )));
    }
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidInput(format!(
            "closure total must be positive, got {total}"
        )));
    }
    let c = contrast_matrix(&block.pivot, block.scheme, d)?;
    // Rows of C are mutually orthogonal, so the centred logs are
    // sum_i c_i z_i / |c_i|^2.
    let norms: Vec<f64> = (0..d - 1).map(|i| c.row(i).norm_squared()).collect();
    let base_ln = block.scheme.log_base().ln();
    let mut out = Vec::with_capacity(block.nrows());
    for r in 0..block.nrows() {
        let mut clr = vec![0.0; d];
        for i in 0..d - 1 {
            let w = block.values[(r, i)] / norms[i];
            for (j, v) in clr.iter_mut().enumerate() {
                *v += c[(i, j)] * w;
            }
        }
        let max = clr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let parts: Vec<f64> = clr.iter().map(|v| ((v - max) * base_ln).exp()).collect();
        out.push(Composition::validated(parts, r)?.closure(total)?);
    }
    Ok(out)
}

/// Coordinate carrying the relative information of an extra part `x0`
/// with respect to a `D`-part explanatory composition.
///
/// Orthonormal: `sqrt(D/(D+1)) * ln(x0 / gm(x))`; orthogonal: `log2(x0 / gm(x))`.
pub fn response_coordinate_z0(
    x0: &[f64],
    explanatory: &[Composition],
    scheme: CoordinateScheme,
) -> Result<Vec<f64>> {
    if x0.len() != explanatory.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} response values for {} compositions",
            x0.len(),
            explanatory.len()
        )));
    }
    let d = check_width(explanatory)?;
    let factor = match scheme {
        CoordinateScheme::Orthonormal => (d as f64 / (d as f64 + 1.0)).sqrt(),
        CoordinateScheme::Orthogonal => 1.0,
    };
    x0.iter()
        .zip(explanatory)
        .enumerate()
        .map(|(row, (&v, comp))| {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositivePart { row, part: 0, value: v });
            }
            let mean_log = comp.parts().iter().map(|p| p.ln()).sum::<f64>() / d as f64;
            Ok(factor * scheme.rebase_ln(v.ln() - mean_log))
        })
        .collect()
}

/// Sample variances of all pairwise log-ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationMatrix {
    pub part_names: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl VariationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// Entry `(i, j)` is the sample variance (denominator `n - 1`) of `ln(x_i / x_j)`.
pub fn variation_matrix(data: &[Composition]) -> Result<VariationMatrix> {
    if data.len() < 2 {
        return Err(Error::InsufficientData { n: data.len(), p: 1 });
    }
    let d = check_width(data)?;
    let n = data.len();
    let logs: Vec<Vec<f64>> = data
        .iter()
        .map(|c| c.parts().iter().map(|p| p.ln()).collect())
        .collect();
    let mut entries = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in (i + 1)..d {
            let ratios: Vec<f64> = logs.iter().map(|l| l[i] - l[j]).collect();
            let mean = ratios.iter().sum::<f64>() / n as f64;
            let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            entries[i][j] = var;
            entries[j][i] = var;
        }
    }
    Ok(VariationMatrix {
        part_names: (1..=d).map(|j| format!("x{j}")).collect(),
        entries,
    })
}
