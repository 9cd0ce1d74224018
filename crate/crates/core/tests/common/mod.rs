#![allow(dead_code)]

use std::collections::BTreeMap;

use logratio_core::data::Dataset;
use logratio_core::simplex::CoordinateScheme;
use logratio_core::synth::{
    generate, CovariateDist, CovariateSpec, GeneratorSpec, ResponseKind, ResponseSpec, SeededRng,
};

pub const COVARIATES: [&str; 3] = ["gender", "age", "income"];

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a == b || (a.is_nan() && b.is_nan()) {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == y {
                0.0
            } else {
                (x - y).abs() / x.abs().max(y.abs()).max(1.0)
            }
        })
        .fold(0.0, f64::max)
}

pub fn covariate_specs() -> Vec<CovariateSpec> {
    vec![
        CovariateSpec {
            name: COVARIATES[0].into(),
            dist: CovariateDist::Binary { low: 0.0, high: 1.0, p_high: 0.5 },
        },
        CovariateSpec {
            name: COVARIATES[1].into(),
            dist: CovariateDist::Uniform { low: 18.0, high: 30.0 },
        },
        CovariateSpec {
            name: COVARIATES[2].into(),
            dist: CovariateDist::Normal { mean: 0.0, sd: 1.0 },
        },
    ]
}

/// Time-use-like data: `d` parts, three covariates with planted effects on the
/// coordinates, and a gaussian or binomial response.
pub fn synthetic(n: usize, d: usize, seed: u64, kind: ResponseKind) -> (GeneratorSpec, Dataset) {
    let mut rng = SeededRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let k = d - 1;
    let mut spec = GeneratorSpec::new(n, d, seed);
    spec.part_names = (1..=d).map(|j| format!("part{j}")).collect();
    spec.scheme = CoordinateScheme::Orthogonal;
    spec.mean_coords = (0..k).map(|_| 0.5 * rng.standard_normal()).collect();
    // mildly correlated coordinates
    spec.cov_coords = (0..k)
        .map(|i| (0..k).map(|j| 0.3f64.powi((i as i32 - j as i32).abs())).collect())
        .collect();
    spec.noise_sd = 0.6;
    spec.covariates = covariate_specs();
    spec.planted_effects = BTreeMap::from([
        (COVARIATES[0].to_string(), (0..k).map(|_| 0.3 * rng.standard_normal()).collect()),
        (COVARIATES[1].to_string(), (0..k).map(|_| 0.02 * rng.standard_normal()).collect()),
    ]);
    let scale = if kind == ResponseKind::Binomial { 0.4 } else { 1.0 };
    spec.response = Some(ResponseSpec {
        name: "y".into(),
        kind,
        intercept: 0.2,
        coord_effects: (0..k).map(|_| scale * rng.standard_normal()).collect(),
        covariate_effects: BTreeMap::from([
            (COVARIATES[0].to_string(), 0.5 * scale),
            (COVARIATES[1].to_string(), -0.01),
            (COVARIATES[2].to_string(), 0.3 * scale),
        ]),
        noise_sd: 1.0,
    });
    let data = generate(&spec).expect("generator spec is valid");
    (spec, data)
}

pub fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Dense Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        assert!(d != 0.0, "singular matrix in oracle");
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    let pivot_row = m[col].clone();
                    for (v, p) in m[r].iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Least squares by the explicit normal-equation inverse.
pub struct OlsOracle {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub sigma2: f64,
    pub r_squared: f64,
}

pub fn ols_oracle(x: &[Vec<f64>], y: &[f64]) -> OlsOracle {
    let n = x.len();
    let p = x[0].len();
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| (0..n).map(|r| x[r][i] * x[r][j]).sum()).collect())
        .collect();
    let xty: Vec<f64> = (0..p).map(|i| (0..n).map(|r| x[r][i] * y[r]).sum()).collect();
    let inv = gauss_jordan_inverse(&xtx);
    let beta: Vec<f64> = (0..p).map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum()).collect();
    let rss: f64 = (0..n)
        .map(|r| {
            let f: f64 = (0..p).map(|j| x[r][j] * beta[j]).sum();
            (y[r] - f).powi(2)
        })
        .sum();
    let sigma2 = rss / (n - p) as f64;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    OlsOracle {
        se: (0..p).map(|j| (sigma2 * inv[j][j]).sqrt()).collect(),
        beta,
        sigma2,
        r_squared: 1.0 - rss / tss,
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    // split first so narrow peaks are not missed
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (flo, fhi) = (
                if i == 0 { fa } else { f(lo) },
                if i == pieces - 1 { fb } else { f(hi) },
            );
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            recurse(f, lo, flo, hi, fhi, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Two-sided Student t tail by quadrature over `x = sqrt(df) tan(theta)`.
pub fn t_tail_oracle(t: f64, df: f64) -> f64 {
    let g = |th: f64| th.cos().powf(df - 1.0);
    let half = std::f64::consts::FRAC_PI_2;
    let theta = (t.abs() / df.sqrt()).atan();
    integrate(&g, theta, half, 1e-14) / integrate(&g, 0.0, half, 1e-14)
}

/// Upper F tail as a ratio of beta-kernel integrals.
pub fn f_tail_oracle(f: f64, df1: f64, df2: f64) -> f64 {
    let (a, b) = (df2 / 2.0, df1 / 2.0);
    let x = df2 / (df2 + df1 * f);
    let g = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            ((a - 1.0) * u.ln() + (b - 1.0) * (1.0 - u).ln()).exp()
        }
    };
    integrate(&g, 0.0, x, 1e-16) / integrate(&g, 0.0, 1.0, 1e-16)
}

/// Two-sided normal tail from the density.
pub fn normal_tail_oracle(z: f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let z = z.abs();
    // integrate the far side directly when the tail is small
    if z > 1.0 {
        2.0 * integrate(&phi, z, z + 40.0, 1e-18)
    } else {
        1.0 - 2.0 * integrate(&phi, 0.0, z, 1e-16)
    }
}
