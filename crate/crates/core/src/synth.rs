//! Seeded synthetic compositional datasets with planted regression effects.
//!
//! Coordinates are drawn from a multivariate normal in the pivot coordinates
//! of a chosen scheme and pivot, shifted by planted covariate effects, and
//! mapped back to the simplex (a logistic-normal composition). An optional
//! response is generated from the same coordinates.
//!
//! Randomness comes from ChaCha20 (a counter-based stream cipher generator,
//! identical output on every platform for a given seed). Uniforms take the top
//! 53 bits of each 64-bit word; standard normals use the Marsaglia polar
//! method. Draws per row happen in a fixed order: covariates in declaration
//! order, then the `D - 1` coordinate normals, then the response noise.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnRole, Dataset};
use crate::error::{Error, Result};
use crate::glm::logistic;
use crate::simplex::{from_coordinates, CoordinateBlock, CoordinateScheme, PivotSpec};

/// ChaCha20 stream with uniform and normal variates.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the Marsaglia polar method.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}

/// Lower-triangular `L` with `L L' = cov`, tolerating singular PSD matrices.
pub fn psd_cholesky(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    let scale = cov.diagonal().amax().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    for i in 0..n {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > tol {
                return Err(Error::NotPositiveSemidefinite);
            }
        }
    }
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let d = cov[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d < -tol {
            return Err(Error::NotPositiveSemidefinite);
        }
        if d <= tol {
            for i in (j + 1)..n {
                let off = cov[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
                if off.abs() > tol.sqrt() * scale.sqrt() {
                    return Err(Error::NotPositiveSemidefinite);
                }
            }
            continue;
        }
        let root = d.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..n {
            let off = cov[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = off / root;
        }
    }
    Ok(l)
}

/// `mean + L z` with `L` the Cholesky factor of `cov` and `z` standard normal.
pub fn mvn_sample(mean: &[f64], cov: &DMatrix<f64>, rng: &mut SeededRng) -> Result<Vec<f64>> {
    if cov.nrows() != mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "mean has {} entries, covariance is {}x{}",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    let l = psd_cholesky(cov)?;
    Ok(draw_with_factor(mean, &l, 1.0, rng))
}

fn draw_with_factor(mean: &[f64], l: &DMatrix<f64>, sd: f64, rng: &mut SeededRng) -> Vec<f64> {
    let z = DVector::from_iterator(mean.len(), (0..mean.len()).map(|_| rng.standard_normal()));
    let shift = l * z;
    mean.iter().zip(shift.iter()).map(|(m, s)| m + sd * s).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CovariateDist {
    /// `high` with probability `p_high`, otherwise `low`.
    Binary { low: f64, high: f64, p_high: f64 },
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    pub dist: CovariateDist,
}

impl CovariateSpec {
    fn draw(&self, rng: &mut SeededRng) -> f64 {
        match self.dist {
            CovariateDist::Binary { low, high, p_high } => {
                if rng.uniform() < p_high {
                    high
                } else {
                    low
                }
            }
            CovariateDist::Normal { mean, sd } => mean + sd * rng.standard_normal(),
            CovariateDist::Uniform { low, high } => low + (high - low) * rng.uniform(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Gaussian,
    /// 0/1 draws with logit-linear success probability.
    Binomial,
    /// An extra compositional part whose coordinate against the generated
    /// parts follows the linear predictor.
    Part,
}

/// A response generated from the coordinates and covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSpec {
    pub name: String,
    pub kind: ResponseKind,
    pub intercept: f64,
    /// Effects of the generated pivot coordinates (`D - 1` values).
    pub coord_effects: Vec<f64>,
    pub covariate_effects: BTreeMap<String, f64>,
    /// Standard deviation of additive noise (ignored for binomial).
    pub noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub seed: u64,
    pub part_names: Vec<String>,
    /// Pivot (0-based) and scheme of the coordinates the model is stated in.
    pub pivot: usize,
    pub scheme: CoordinateScheme,
    pub mean_coords: Vec<f64>,
    pub cov_coords: Vec<Vec<f64>>,
    /// Scales the multivariate-normal deviation around the mean.
    pub noise_sd: f64,
    pub covariates: Vec<CovariateSpec>,
    /// Covariate name to additive effect on every coordinate (`D - 1` values).
    pub planted_effects: BTreeMap<String, Vec<f64>>,
    pub response: Option<ResponseSpec>,
    /// Closure total of the generated compositions.
    pub total: f64,
}

impl GeneratorSpec {
    /// `n` rows of a `d`-part composition with identity covariance, unit noise,
    /// no covariates and no response.
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        let mut cov = vec![vec![0.0; d.saturating_sub(1)]; d.saturating_sub(1)];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            n,
            seed,
            part_names: (1..=d).map(|j| format!("x{j}")).collect(),
            pivot: 0,
            scheme: CoordinateScheme::Orthogonal,
            mean_coords: vec![0.0; d.saturating_sub(1)],
            cov_coords: cov,
            noise_sd: 1.0,
            covariates: Vec::new(),
            planted_effects: BTreeMap::new(),
            response: None,
            total: 100.0,
        }
    }

    pub fn d(&self) -> usize {
        self.part_names.len()
    }

    fn validate(&self) -> Result<DMatrix<f64>> {
        let d = self.d();
        if d < 2 {
            return Err(Error::InvalidInput("generator needs at least 2 parts".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidInput("generator needs n >= 1".into()));
        }
        let k = d - 1;
        if self.mean_coords.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "mean_coords has {} entries, expected {k}",
                self.mean_coords.len()
            )));
        }
        if self.cov_coords.len() != k || self.cov_coords.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "cov_coords must be {k}x{k}"
            )));
        }
        if !(self.noise_sd >= 0.0) || !(self.total > 0.0) {
            return Err(Error::InvalidInput(
                "noise_sd must be >= 0 and total > 0".into(),
            ));
        }
        for (name, eff) in &self.planted_effects {
            if !self.covariates.iter().any(|c| &c.name == name) {
                return Err(Error::MissingColumn(name.clone()));
            }
            if eff.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "planted effect for \"{name}\" has {} entries, expected {k}",
                    eff.len()
                )));
            }
        }
        if let Some(resp) = &self.response {
            if resp.coord_effects.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "response coord_effects has {} entries, expected {k}",
                    resp.coord_effects.len()
                )));
            }
            for name in resp.covariate_effects.keys() {
                if !self.covariates.iter().any(|c| &c.name == name) {
                    return Err(Error::MissingColumn(name.clone()));
                }
            }
        }
        PivotSpec::new(self.pivot, d)?;
        let cov = DMatrix::from_fn(k, k, |i, j| self.cov_coords[i][j]);
        psd_cholesky(&cov)
    }
}

/// Generates a dataset from `spec`. Identical specs give identical output.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    let factor = spec.validate()?;
    let d = spec.d();
    let k = d - 1;
    let mut rng = SeededRng::new(spec.seed);

    let mut cov_values = vec![Vec::with_capacity(spec.n); spec.covariates.len()];
    let mut coords = DMatrix::zeros(spec.n, k);
    let mut linear = Vec::with_capacity(spec.n);
    let mut response_noise = Vec::with_capacity(spec.n);

    for r in 0..spec.n {
        let row_covs: Vec<f64> = spec.covariates.iter().map(|c| c.draw(&mut rng)).collect();
        let mut z = draw_with_factor(&spec.mean_coords, &factor, spec.noise_sd, &mut rng);
        for (c, value) in spec.covariates.iter().zip(&row_covs) {
            if let Some(eff) = spec.planted_effects.get(&c.name) {
                for (zi, e) in z.iter_mut().zip(eff) {
                    *zi += e * value;
                }
            }
        }
        for (j, v) in z.iter().enumerate() {
            coords[(r, j)] = *v;
        }
        if let Some(resp) = &spec.response {
            let mut eta = resp.intercept
                + resp.coord_effects.iter().zip(&z).map(|(b, v)| b * v).sum::<f64>();
            for (c, value) in spec.covariates.iter().zip(&row_covs) {
                if let Some(b) = resp.covariate_effects.get(&c.name) {
                    eta += b * value;
                }
            }
            linear.push(eta);
            response_noise.push(match resp.kind {
                ResponseKind::Binomial => rng.uniform(),
                _ => resp.noise_sd * rng.standard_normal(),
            });
        }
        for (out, v) in cov_values.iter_mut().zip(row_covs) {
            out.push(v);
        }
    }

    let block = CoordinateBlock {
        values: coords,
        scheme: spec.scheme,
        pivot: PivotSpec::new(spec.pivot, d)?,
        part_names: spec.part_names.clone(),
    };
    let comps = from_coordinates(&block, spec.total)?;
    let mut part_values: Vec<Vec<f64>> = (0..d)
        .map(|j| comps.iter().map(|c| c.parts()[j]).collect())
        .collect();

    let mut extra_part: Option<(String, Vec<f64>)> = None;
    let mut response_col: Option<Column> = None;
    if let Some(resp) = &spec.response {
        match resp.kind {
            ResponseKind::Gaussian => {
                let y = linear.iter().zip(&response_noise).map(|(e, n)| e + n).collect();
                response_col = Some(Column::new(&resp.name, ColumnRole::NumericResponse, y));
            }
            ResponseKind::Binomial => {
                let y = linear
                    .iter()
                    .zip(&response_noise)
                    .map(|(e, u)| if *u < logistic(*e) { 1.0 } else { 0.0 })
                    .collect();
                response_col = Some(Column::new(&resp.name, ColumnRole::BinaryResponse, y));
            }
            ResponseKind::Part => {
                // ln(x0 / gm) from the target coordinate
                let scale = match spec.scheme {
                    CoordinateScheme::Orthonormal => (d as f64 / (d as f64 + 1.0)).sqrt().recip(),
                    CoordinateScheme::Orthogonal => std::f64::consts::LN_2,
                };
                let mut x0 = Vec::with_capacity(spec.n);
                for (r, comp) in comps.iter().enumerate() {
                    let mean_log = comp.parts().iter().map(|p| p.ln()).sum::<f64>() / d as f64;
                    let z0 = linear[r] + response_noise[r];
                    x0.push((mean_log + scale * z0).exp());
                }
                // reclose the D + 1 parts
                for r in 0..spec.n {
                    let sum: f64 = part_values.iter().map(|c| c[r]).sum::<f64>() + x0[r];
                    let f = spec.total / sum;
                    for col in part_values.iter_mut() {
                        col[r] *= f;
                    }
                    x0[r] *= f;
                }
                extra_part = Some((resp.name.clone(), x0));
            }
        }
    }

    let mut columns: Vec<Column> = spec
        .part_names
        .iter()
        .zip(part_values)
        .map(|(name, v)| Column::new(name, ColumnRole::CompositionalPart, v))
        .collect();
    if let Some((name, v)) = extra_part {
        columns.push(Column::new(name, ColumnRole::CompositionalPart, v));
    }
    for (c, v) in spec.covariates.iter().zip(cov_values) {
        columns.push(Column::new(&c.name, ColumnRole::NumericCovariate, v));
    }
    columns.extend(response_col);
    Dataset::new(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::to_coordinates;

    #[test]
    fn zero_noise_gives_uniform_rows() {
        let mut spec = GeneratorSpec::new(5, 4, 7);
        spec.noise_sd = 0.0;
        let data = generate(&spec).unwrap();
        for c in data.compositions(&spec.part_names).unwrap() {
            assert!(c.parts().iter().all(|p| (p - 25.0).abs() < 1e-12));
        }
    }

    #[test]
    fn same_seed_same_data() {
        let spec = GeneratorSpec::new(50, 5, 42);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        let mut other = spec.clone();
        other.seed = 43;
        assert_ne!(generate(&other).unwrap(), a);
    }

    #[test]
    fn rows_are_positive_and_closed() {
        let mut spec = GeneratorSpec::new(200, 6, 1);
        spec.noise_sd = 3.0;
        let data = generate(&spec).unwrap();
        for c in data.compositions(&spec.part_names).unwrap() {
            assert!(c.parts().iter().all(|p| *p > 0.0));
            assert!((c.total() - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_covariance_returns_mean() {
        let mut rng = SeededRng::new(3);
        let mean = [1.5, -2.0, 0.25];
        let s = mvn_sample(&mean, &DMatrix::zeros(3, 3), &mut rng).unwrap();
        assert_eq!(s, mean.to_vec());
    }

    #[test]
    fn non_psd_rejected() {
        let mut rng = SeededRng::new(3);
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            mvn_sample(&[0.0, 0.0], &cov, &mut rng),
            Err(Error::NotPositiveSemidefinite)
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(mvn_sample(&[0.0, 0.0], &asym, &mut rng).is_err());
        let mut spec = GeneratorSpec::new(5, 3, 1);
        spec.cov_coords = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn singular_psd_is_accepted() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let l = psd_cholesky(&cov).unwrap();
        assert!((&l * l.transpose() - cov).amax() < 1e-14);
    }

    #[test]
    fn zero_noise_recovers_planted_coordinates() {
        let mut spec = GeneratorSpec::new(40, 5, 11);
        spec.noise_sd = 0.0;
        spec.pivot = 2;
        spec.mean_coords = vec![0.3, -1.2, 0.8, 2.0];
        spec.covariates.push(CovariateSpec {
            name: "g".into(),
            dist: CovariateDist::Binary { low: -1.0, high: 1.0, p_high: 0.5 },
        });
        spec.planted_effects.insert("g".into(), vec![0.5, 0.0, -0.25, 1.0]);
        let data = generate(&spec).unwrap();
        let comps = data.compositions(&spec.part_names).unwrap();
        let b = to_coordinates(&comps, &PivotSpec::new(2, 5).unwrap(), spec.scheme).unwrap();
        let g = data.values("g").unwrap();
        for (r, gr) in g.iter().enumerate() {
            for j in 0..4 {
                let want = spec.mean_coords[j] + spec.planted_effects["g"][j] * gr;
                assert!((b.values[(r, j)] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn polar_normals_have_unit_moments() {
        let mut rng = SeededRng::new(99);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.02);
    }
}
