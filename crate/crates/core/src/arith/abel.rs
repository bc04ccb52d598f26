//! Abel (partial) summation against a step-function prefix sum.

use crate::error::{domain, Error, Result};

const SIMPSON_TOL: f64 = 1e-10;
const SIMPSON_MAX_DEPTH: u32 = 48;
const DERIVATIVE_RTOL: f64 = 1e-6;

/// `A(x) f(x) - \int_1^x A(t) f'(t) dt` where `A(t) = sum_{n <= t} a_n`.
///
/// `a[0]` is `a_1`; terms past the end of `a` are zero. `A` is constant on
/// each `[k, k + 1)`, so the integral splits into unit pieces and `f'` is
/// integrated on each with adaptive Simpson at tolerance `1e-10`.
pub fn abel_sum<F, G>(a: &[f64], f: F, f_prime: G, x: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(x >= 1.0) || !x.is_finite() {
        return Err(domain(format!("partial summation needs x >= 1, got {x}")));
    }
    check_derivative(&f, &f_prime, x)?;

    let last = x.floor() as usize;
    let mut prefix = 0.0;
    let mut integral = 0.0;
    for k in 1..=last {
        prefix += a.get(k - 1).copied().unwrap_or(0.0);
        let hi = ((k + 1) as f64).min(x);
        let lo = k as f64;
        if prefix != 0.0 && hi > lo {
            integral += prefix * adaptive_simpson(&f_prime, lo, hi, SIMPSON_TOL);
        }
    }
    Ok(prefix * f(x) - integral)
}

fn check_derivative<F, G>(f: &F, f_prime: &G, x: f64) -> Result<()>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    for frac in [0.25, 0.5, 0.75] {
        let t = 1.0 + frac * (x - 1.0);
        let h = 1e-5 * t.max(1.0);
        let estimate = (f(t + h) - f(t - h)) / (2.0 * h);
        let supplied = f_prime(t);
        let scale = supplied.abs().max(estimate.abs());
        // rounding floor of the central difference itself
        let noise = 4.0 * f64::EPSILON * f(t).abs().max(f64::MIN_POSITIVE) / h;
        if !((estimate - supplied).abs() <= DERIVATIVE_RTOL * scale + noise) {
            return Err(Error::InconsistentDerivative {
                at: t,
                supplied,
                estimate,
            });
        }
    }
    Ok(())
}

fn adaptive_simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, tol: f64) -> f64 {
    let fa = g(a);
    let fb = g(b);
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(g, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
