use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize_trial, mobius_of, FunctionTable, SieveConfig};
use crate::closed_forms::{zeta_real, zeta_rel_error};
use crate::error::{domain, Error, Result};

/// Range on which declared decay bounds are checked.
pub const DECAY_CHECK_LIMIT: u64 = 10_000;
const DECAY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Coefficients of `sigma_s(n) / n^s`.
    Sigma,
    /// Coefficients of `phi_s(n) / n^s`.
    Phi,
    Custom,
}

/// JSON form `{family, s, delta, C}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub family: FamilyKind,
    pub s: Option<f64>,
    pub delta: f64,
    #[serde(rename = "C")]
    pub constant: f64,
}

type CustomRule = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Rule {
    /// `zeta(s + 1) / r^(s + 1)`
    Sigma {
        zeta: f64,
    },
    /// `mu(r) / (zeta(s + 1) phi_{s+1}(r))`
    Phi {
        zeta: f64,
    },
    Custom(CustomRule),
}

/// Ramanujan coefficients `r -> f^(r)` with a declared bound
/// `|f^(r)| <= C r^-(1 + delta)`.
#[derive(Clone)]
pub struct CoefficientFamily {
    kind: FamilyKind,
    s: Option<f64>,
    name: String,
    delta: f64,
    tail_constant: f64,
    relative_error: f64,
    rule: Rule,
}

impl fmt::Debug for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFamily")
            .field("name", &self.name)
            .field("delta", &self.delta)
            .field("tail_constant", &self.tail_constant)
            .finish()
    }
}

impl CoefficientFamily {
    /// Family of `sigma_s(n) / n^s`; `delta = s`, `C = zeta(s + 1)`.
    pub fn sigma(s: f64) -> Result<Self> {
        check_s(s)?;
        let zeta = zeta_real(s + 1.0)?;
        Ok(CoefficientFamily {
            kind: FamilyKind::Sigma,
            s: Some(s),
            name: format!("sigma({s})"),
            delta: s,
            tail_constant: zeta,
            relative_error: zeta_rel_error(s + 1.0) + 8.0 * f64::EPSILON,
            rule: Rule::Sigma { zeta },
        })
    }

    /// Family of `phi_s(n) / n^s`; `delta = s`.
    ///
    /// `phi_{s+1}(r) >= r^(s+1) / zeta(s + 1)`, so `C = 1` bounds every
    /// coefficient.
    pub fn phi(s: f64) -> Result<Self> {
        check_s(s)?;
        let zeta = zeta_real(s + 1.0)?;
        Ok(CoefficientFamily {
            kind: FamilyKind::Phi,
            s: Some(s),
            name: format!("phi({s})"),
            delta: s,
            tail_constant: 1.0,
            relative_error: zeta_rel_error(s + 1.0) + 64.0 * f64::EPSILON,
            rule: Rule::Phi { zeta },
        })
    }

    /// User-supplied rule. The declared `(C, delta)` is checked on
    /// `r <= 10^4` and the family is refused if any value breaks it.
    pub fn custom<F>(name: &str, tail_constant: f64, delta: f64, rule: F) -> Result<Self>
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        if !(tail_constant > 0.0) || !tail_constant.is_finite() || !delta.is_finite() {
            return Err(domain("custom family needs finite C > 0 and finite delta"));
        }
        let fam = CoefficientFamily {
            kind: FamilyKind::Custom,
            s: None,
            name: name.to_string(),
            delta,
            tail_constant,
            relative_error: 0.0,
            rule: Rule::Custom(Arc::new(rule)),
        };
        fam.verify_decay(DECAY_CHECK_LIMIT)?;
        Ok(fam)
    }

    pub fn from_descriptor(d: &FamilyDescriptor) -> Result<Self> {
        let s =
            d.s.ok_or_else(|| domain("descriptor lacks the parameter s"))?;
        let fam = match d.family {
            FamilyKind::Sigma => Self::sigma(s)?,
            FamilyKind::Phi => Self::phi(s)?,
            FamilyKind::Custom => {
                return Err(domain(
                    "custom families cannot be rebuilt from a descriptor",
                ))
            }
        };
        if (fam.delta - d.delta).abs() > 1e-12 {
            return Err(domain(format!(
                "descriptor delta {} disagrees with family delta {}",
                d.delta, fam.delta
            )));
        }
        Ok(fam)
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor {
            family: self.kind,
            s: self.s,
            delta: self.delta,
            constant: self.tail_constant,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn s(&self) -> Option<f64> {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail_constant
    }

    /// Relative error model of a single coefficient evaluation.
    pub fn relative_error(&self) -> f64 {
        self.relative_error
    }

    /// `C r^-(1 + delta)`.
    pub fn decay_bound(&self, r: u64) -> f64 {
        self.tail_constant * (-(1.0 + self.delta) * (r as f64).ln()).exp()
    }

    pub fn eval(&self, r: u64) -> f64 {
        assert!(r >= 1, "coefficients are indexed from r = 1");
        match &self.rule {
            Rule::Sigma { zeta } => zeta * self.power(r),
            Rule::Phi { zeta } => {
                let mu = mobius_of(r);
                if mu == 0 {
                    return 0.0;
                }
                let e = self.s.unwrap() + 1.0;
                let ratio: f64 = factorize_trial(r)
                    .iter()
                    .map(|&(p, _)| 1.0 - (p as f64).powf(-e))
                    .product();
                mu as f64 * self.power(r) / (zeta * ratio)
            }
            Rule::Custom(f) => f(r),
        }
    }

    /// `f^(1), ..., f^(r_max)` at indices `1..=r_max`; index 0 holds 0.
    pub fn eval_range(&self, r_max: usize) -> Result<Vec<f64>> {
        let config = SieveConfig::default();
        config.check(r_max, 8)?;
        let mut out = vec![0.0; r_max + 1];
        match &self.rule {
            Rule::Sigma { zeta } => {
                for (r, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = zeta * self.power(r as u64);
                }
            }
            Rule::Phi { zeta } => {
                let e = self.s.unwrap() + 1.0;
                let mu = config.mobius(r_max)?;
                let ratio = config.phi_ratio(e, r_max)?;
                for (r, slot) in out.iter_mut().enumerate().skip(1) {
                    let m = mu.get_int(r).unwrap();
                    if m != 0 {
                        *slot = m as f64 * self.power(r as u64) / (zeta * ratio.get(r));
                    }
                }
            }
            Rule::Custom(f) => {
                for (r, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = f(r as u64);
                }
            }
        }
        Ok(out)
    }

    /// Checks `|f^(r)| <= C r^-(1 + delta)` for `r <= r_max`.
    pub fn verify_decay(&self, r_max: u64) -> Result<()> {
        let values = self.eval_range(r_max as usize)?;
        for (r, v) in values.iter().enumerate().skip(1) {
            let bound = self.decay_bound(r as u64);
            if !(v.abs() <= bound * (1.0 + DECAY_SLACK)) {
                return Err(Error::DecayViolation {
                    family: self.name.clone(),
                    constant: self.tail_constant,
                    delta: self.delta,
                    r: r as u64,
                });
            }
        }
        Ok(())
    }

    /// The function this family expands, sieved to `limit`, when known.
    pub fn sieve_table(&self, limit: usize, config: &SieveConfig) -> Option<Result<FunctionTable>> {
        match self.kind {
            FamilyKind::Sigma => Some(config.sigma_ratio(self.s.unwrap(), limit)),
            FamilyKind::Phi => Some(config.phi_ratio(self.s.unwrap(), limit)),
            FamilyKind::Custom => None,
        }
    }

    /// `r^-(s + 1)` for the built-in families.
    fn power(&self, r: u64) -> f64 {
        let e = self.s.unwrap_or(self.delta) + 1.0;
        (-e * (r as f64).ln()).exp()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "family parameter s must be positive, got {s}"
        )))
    }
}

/// Ramanujan coefficient of `sigma_s(n) / n^s`: `zeta(s + 1) / r^(s + 1)`.
pub fn coeff_sigma(s: f64, r: u64) -> Result<f64> {
    Ok(CoefficientFamily::sigma(s)?.eval(r))
}

/// Ramanujan coefficient of `phi_s(n) / n^s`: `mu(r) / (zeta(s + 1) phi_{s+1}(r))`.
pub fn coeff_phi(s: f64, r: u64) -> Result<f64> {
    Ok(CoefficientFamily::phi(s)?.eval(r))
}
