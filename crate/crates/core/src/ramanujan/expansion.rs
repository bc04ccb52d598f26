use super::family::CoefficientFamily;
use super::ramanujan_sum_factored;
use crate::arith::{divisor_sum, PrimeSieve, SieveConfig};
use crate::error::{domain, Result};
use crate::sum::CompensatedSum;

/// A truncated expansion value with a rigorous bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub value: f64,
    pub tail_bound: f64,
}

/// Evaluates `sum_{r <= R} f^(r) c_r(n)` for many `n` against one
/// precomputed coefficient vector.
#[derive(Debug)]
pub struct ExpansionEvaluator {
    family: CoefficientFamily,
    coeffs: Vec<f64>,
    factors: Vec<Vec<(u64, u32)>>,
}

impl ExpansionEvaluator {
    pub fn new(family: &CoefficientFamily, r_max: usize) -> Result<Self> {
        if r_max == 0 {
            return Err(domain("truncation point R must be at least 1"));
        }
        let sieve: PrimeSieve = SieveConfig::default().prime_sieve(r_max)?;
        let factors = (0..=r_max)
            .map(|r| {
                if r == 0 {
                    Vec::new()
                } else {
                    sieve.factorize(r)
                }
            })
            .collect();
        Ok(ExpansionEvaluator {
            family: family.clone(),
            coeffs: family.eval_range(r_max)?,
            factors,
        })
    }

    pub fn r_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value plus `C sigma(n) R^-delta / delta` for the dropped terms, using
    /// `|c_r(n)| <= sigma(gcd(n, r)) <= sigma(n)`, plus rounding and
    /// coefficient-error allowances.
    pub fn evaluate(&self, n: u64) -> Result<Expansion> {
        if n == 0 {
            return Err(domain("expansions are evaluated at n >= 1"));
        }
        let mut acc = CompensatedSum::new();
        for r in 1..=self.r_max() {
            let c = self.coeffs[r];
            if c != 0.0 {
                acc.add(c * ramanujan_sum_factored(&self.factors[r], n) as f64);
            }
        }
        let delta = self.family.delta();
        let r = self.r_max() as f64;
        let dropped =
            self.family.tail_constant() * divisor_sum(n) as f64 * (-delta * r.ln()).exp() / delta;
        let tail_bound =
            dropped + acc.rounding_allowance() + self.family.relative_error() * acc.abs_total();
        Ok(Expansion {
            value: acc.value(),
            tail_bound,
        })
    }
}

/// `sum_{r <= R} f^(r) c_r(n)` with its tail bound.
pub fn truncated_expansion(family: &CoefficientFamily, n: u64, r_max: usize) -> Result<Expansion> {
    if !(family.delta() > 0.0) {
        return Err(domain("tail bound needs delta > 0"));
    }
    ExpansionEvaluator::new(family, r_max)?.evaluate(n)
}
