//! χ² and standard normal distribution functions.
//!
//! The χ² CDF is the regularized lower incomplete gamma `P(k/2, x/2)`,
//! computed by its power series below `a + 1` and by a Lentz continued
//! fraction for the upper tail above. Quantiles are found by bisection.

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

fn lower_series(a: f64, x: f64, ln_pre: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * ln_pre.exp()
}

fn upper_fraction(a: f64, x: f64, ln_pre: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    ln_pre.exp() * h
}

/// Regularized incomplete gammas `(P(a, x), Q(a, x))`.
pub fn incomplete_gamma(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let ln_pre = a * x.ln() - x - libm::lgamma(a);
    if x < a + 1.0 {
        let p = lower_series(a, x, ln_pre).min(1.0);
        (p, 1.0 - p)
    } else {
        let q = upper_fraction(a, x, ln_pre).min(1.0);
        (1.0 - q, q)
    }
}

fn check_dof(dof: usize) -> Result<()> {
    if dof == 0 {
        return Err(Error::ZeroDegreesOfFreedom);
    }
    Ok(())
}

fn check_prob(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(())
}

pub fn chi2_cdf(x: f64, dof: usize) -> Result<f64> {
    check_dof(dof)?;
    Ok(incomplete_gamma(dof as f64 / 2.0, x / 2.0).0)
}

/// Upper tail `1 - F(x)`, accurate far into the tail.
pub fn chi2_sf(x: f64, dof: usize) -> Result<f64> {
    check_dof(dof)?;
    Ok(incomplete_gamma(dof as f64 / 2.0, x / 2.0).1)
}

/// `x` with `P(χ²_dof > x) = p`.
pub fn chi2_upper_quantile(p: f64, dof: usize) -> Result<f64> {
    check_dof(dof)?;
    check_prob(p)?;
    let mut hi = dof as f64 + 10.0;
    while chi2_sf(hi, dof)? > p {
        hi *= 2.0;
    }
    Ok(bisect(0.0, hi, |x| chi2_sf(x, dof).map(|s| s > p).unwrap_or(false)))
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_sf(x: f64) -> f64 {
    normal_cdf(-x)
}

/// Lower quantile of the standard normal.
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob(p)?;
    Ok(bisect(-40.0, 40.0, |x| normal_cdf(x) < p))
}

/// Bisection on a monotone predicate that is true left of the root.
fn bisect(mut lo: f64, mut hi: f64, left: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * mid.abs().max(1.0) {
            break;
        }
        if left(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and `cdf`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = sample.iter().copied().filter(|x| !x.is_nan()).collect();
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn empirical_quantile(sample: &[f64], q: f64) -> f64 {
    let mut xs: Vec<f64> = sample.iter().copied().filter(|x| !x.is_nan()).collect();
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < xs.len() {
        xs[i] + frac * (xs[i + 1] - xs[i])
    } else {
        xs[i]
    }
}
