//! Special functions and distribution tails used for inference.
//!
//! Everything reduces to two primitives: the regularized incomplete beta
//! function (Student t and F tails) and the regularized upper incomplete
//! gamma function (normal tails through `erfc`). Both are evaluated with
//! a power series or a continued fraction under modified Lentz iteration.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 20_000;

/// A tail probability, always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub value: f64,
    pub two_sided: bool,
}

impl TailProbability {
    fn two_sided(value: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            two_sided: true,
        }
    }

    fn upper(value: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            two_sided: false,
        }
    }
}

/// Natural log of the gamma function for `x > 0`.
///
/// Shifts small arguments up to at least 10 by the recurrence and then uses
/// the Stirling series.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "log_gamma requires x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    if z < 10.0 {
        let mut prod = 1.0;
        while z < 10.0 {
            prod *= z;
            z += 1.0;
        }
        shift = prod.ln();
    }
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in C {
        series += c * pow;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!(
            "incomplete beta needs 0 <= x <= 1, got {x}"
        )));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "incomplete beta needs a, b > 0, got a = {a}, b = {b}"
        )));
    }
    Ok(inc_beta(x, a, b))
}

fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma_pos(a + b) - ln_gamma_pos(a) - ln_gamma_pos(b)
        + a * x.ln()
        + b * (-x).ln_1p();
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(x, a, b) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b).clamp(0.0, 1.0)
    }
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized upper incomplete gamma `Q(a, x)`.
fn upper_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ln_front = -x + a * x.ln() - ln_gamma_pos(a);
    if x < a + 1.0 {
        // series for P(a, x)
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * ln_front.exp()
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let i = i as f64;
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        ln_front.exp() * h
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        upper_gamma_q(0.5, x * x)
    } else {
        2.0 - upper_gamma_q(0.5, x * x)
    }
}

fn check_df(df: f64, what: &str) -> Result<()> {
    if !(df >= 1.0) || df.is_nan() {
        return Err(Error::InvalidInput(format!(
            "{what} must be at least 1, got {df}"
        )));
    }
    Ok(())
}

/// Two-sided Student t tail `P(|T| >= |t|)` with `df` degrees of freedom.
pub fn student_t_sf2(t: f64, df: f64) -> Result<TailProbability> {
    check_df(df, "degrees of freedom")?;
    if t.is_nan() {
        return Err(Error::InvalidInput("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(TailProbability::two_sided(0.0));
    }
    let x = df / (df + t * t);
    Ok(TailProbability::two_sided(inc_beta(x, 0.5 * df, 0.5)))
}

/// Upper tail `P(F >= f)` of the F distribution.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> Result<TailProbability> {
    check_df(df1, "numerator degrees of freedom")?;
    check_df(df2, "denominator degrees of freedom")?;
    if !(f >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "F statistic must be nonnegative, got {f}"
        )));
    }
    if f.is_infinite() {
        return Ok(TailProbability::upper(0.0));
    }
    let x = df2 / (df2 + df1 * f);
    Ok(TailProbability::upper(inc_beta(x, 0.5 * df2, 0.5 * df1)))
}

/// Two-sided standard normal tail `P(|Z| >= |z|)`.
pub fn normal_sf2(z: f64) -> TailProbability {
    TailProbability::two_sided(erfc(z.abs() / std::f64::consts::SQRT_2))
}

/// The `t > 0` with `student_t_sf2(t, df) == alpha`, i.e. the `1 - alpha/2`
/// quantile. Found by bisection.
pub fn student_t_quantile_two_sided(alpha: f64, df: f64) -> Result<f64> {
    check_df(df, "degrees of freedom")?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let sf = |t: f64| inc_beta(df / (df + t * t), 0.5 * df, 0.5);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while sf(hi) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
