use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::sieve::{segmented_multiplicative, PrimeSieve};
use crate::error::{domain, Error, Result};

/// Which arithmetical function a [`FunctionTable`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    Mobius,
    EulerPhi,
    /// Number of ordered factorizations into `k` factors.
    DivisorK {
        k: u32,
    },
    /// `sigma_s(n) / n^s`.
    SigmaRatio {
        s: f64,
    },
    /// `phi_s(n) / n^s = prod_{p | n} (1 - p^-s)`.
    PhiRatio {
        s: f64,
    },
    /// Values supplied by the caller.
    Custom,
}

impl FunctionKind {
    pub fn is_integer(&self) -> bool {
        matches!(
            self,
            FunctionKind::Mobius | FunctionKind::EulerPhi | FunctionKind::DivisorK { .. }
        )
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            FunctionKind::SigmaRatio { s } | FunctionKind::PhiRatio { s } => s,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableValues {
    Integer(Vec<i64>),
    Real(Vec<f64>),
}

/// Values `v[1..=limit]` of one arithmetical function.
///
/// Storage is offset by one: index 0 is a placeholder so that `v[n]` is the
/// value at `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    kind: FunctionKind,
    limit: usize,
    values: TableValues,
}

impl FunctionTable {
    pub(crate) fn from_parts(kind: FunctionKind, values: TableValues) -> Self {
        let len = match &values {
            TableValues::Integer(v) => v.len(),
            TableValues::Real(v) => v.len(),
        };
        debug_assert!(len >= 1);
        FunctionTable {
            kind,
            limit: len - 1,
            values,
        }
    }

    /// Wraps caller-supplied values `v(1), ..., v(N)`.
    pub fn custom_real(values: &[f64]) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(0.0);
        v.extend_from_slice(values);
        Self::from_parts(FunctionKind::Custom, TableValues::Real(v))
    }

    pub fn constant(value: f64, limit: usize) -> Self {
        Self::custom_real(&vec![value; limit])
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn values(&self) -> &TableValues {
        &self.values
    }

    /// Value at `n` as a float. Panics if `n` is 0 or above the limit.
    pub fn get(&self, n: usize) -> f64 {
        assert!(
            n >= 1 && n <= self.limit,
            "index {n} outside 1..={}",
            self.limit
        );
        match &self.values {
            TableValues::Integer(v) => v[n] as f64,
            TableValues::Real(v) => v[n],
        }
    }

    /// Exact value at `n` for integer-valued kinds.
    pub fn get_int(&self, n: usize) -> Option<i64> {
        match &self.values {
            TableValues::Integer(v) if n >= 1 && n <= self.limit => Some(v[n]),
            _ => None,
        }
    }

    pub fn integers(&self) -> Option<&[i64]> {
        match &self.values {
            TableValues::Integer(v) => Some(v),
            TableValues::Real(_) => None,
        }
    }

    /// All values (index 0 included) as floats.
    pub fn real_values(&self) -> Cow<'_, [f64]> {
        match &self.values {
            TableValues::Integer(v) => Cow::Owned(v.iter().map(|&x| x as f64).collect()),
            TableValues::Real(v) => Cow::Borrowed(v),
        }
    }
}

pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;
pub const DEFAULT_SEGMENT_THRESHOLD: usize = 10_000_000;
const DEFAULT_SEGMENT_LEN: usize = 1 << 18;

/// Memory budget and segmentation policy shared by every sieve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub memory_budget: u64,
    /// Limits above this use the segmented sieve for mu, phi and phi_s ratios.
    pub segment_threshold: usize,
    pub segment_len: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            memory_budget: DEFAULT_MEMORY_BUDGET,
            segment_threshold: DEFAULT_SEGMENT_THRESHOLD,
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

impl SieveConfig {
    pub fn with_budget(memory_budget: u64) -> Self {
        SieveConfig {
            memory_budget,
            ..Self::default()
        }
    }

    pub fn check(&self, limit: usize, bytes_per_entry: u64) -> Result<()> {
        let bytes = (limit as u64 + 1).saturating_mul(bytes_per_entry);
        if limit as u64 >= u32::MAX as u64 || bytes > self.memory_budget {
            return Err(Error::LimitExceeded {
                limit: limit as u64,
                bytes,
                budget: self.memory_budget,
            });
        }
        Ok(())
    }

    fn segmented(&self, limit: usize) -> bool {
        limit > self.segment_threshold
    }

    /// Smallest-prime-factor sieve up to `limit`, within budget.
    pub fn prime_sieve(&self, limit: usize) -> Result<PrimeSieve> {
        self.check(limit.max(1), 4)?;
        Ok(PrimeSieve::new(limit.max(1)))
    }

    pub fn mobius(&self, limit: usize) -> Result<FunctionTable> {
        positive(limit)?;
        let mu = if self.segmented(limit) {
            self.check(limit, 8)?;
            segmented_multiplicative(limit, self.segment_len, 1i64, 0, |acc, _, e| {
                if e >= 2 {
                    0
                } else {
                    -acc
                }
            })
        } else {
            self.check(limit, 12)?;
            let sieve = PrimeSieve::new(limit);
            mobius_from_spf(sieve.spf())
        };
        Ok(FunctionTable::from_parts(
            FunctionKind::Mobius,
            TableValues::Integer(mu),
        ))
    }

    pub fn euler_phi(&self, limit: usize) -> Result<FunctionTable> {
        positive(limit)?;
        let phi = if self.segmented(limit) {
            self.check(limit, 8)?;
            segmented_multiplicative(limit, self.segment_len, 1i64, 0, |acc, p, e| {
                acc * (p as i64 - 1) * (p as i64).pow(e - 1)
            })
        } else {
            self.check(limit, 12)?;
            let sieve = PrimeSieve::new(limit);
            phi_from_spf(sieve.spf())
        };
        Ok(FunctionTable::from_parts(
            FunctionKind::EulerPhi,
            TableValues::Integer(phi),
        ))
    }

    pub fn divisor_k(&self, k: u32, limit: usize) -> Result<FunctionTable> {
        positive(limit)?;
        if k < 2 {
            return Err(domain(format!("d_k needs k >= 2, got {k}")));
        }
        self.check(limit, 16)?;
        // d_{j+1} = d_j * 1, one Dirichlet convolution per step
        let mut cur = vec![1i64; limit + 1];
        cur[0] = 0;
        for _ in 1..k {
            let mut next = vec![0i64; limit + 1];
            for d in 1..=limit {
                let w = cur[d];
                let mut m = d;
                while m <= limit {
                    next[m] = next[m]
                        .checked_add(w)
                        .ok_or(Error::Overflow { what: "d_k(n)" })?;
                    m += d;
                }
            }
            cur = next;
        }
        Ok(FunctionTable::from_parts(
            FunctionKind::DivisorK { k },
            TableValues::Integer(cur),
        ))
    }

    pub fn sigma_ratio(&self, s: f64, limit: usize) -> Result<FunctionTable> {
        positive(limit)?;
        positive_param(s)?;
        self.check(limit, 8)?;
        let mut v = vec![0.0f64; limit + 1];
        for d in 1..=limit {
            let w = (-s * (d as f64).ln()).exp();
            let mut m = d;
            while m <= limit {
                v[m] += w;
                m += d;
            }
        }
        Ok(FunctionTable::from_parts(
            FunctionKind::SigmaRatio { s },
            TableValues::Real(v),
        ))
    }

    pub fn phi_ratio(&self, s: f64, limit: usize) -> Result<FunctionTable> {
        positive(limit)?;
        positive_param(s)?;
        let v = if self.segmented(limit) {
            self.check(limit, 16)?;
            segmented_multiplicative(limit, self.segment_len, 1.0f64, 0.0, |acc, p, _| {
                acc * (1.0 - (p as f64).powf(-s))
            })
        } else {
            self.check(limit, 12)?;
            let sieve = PrimeSieve::new(limit);
            phi_ratio_from_spf(sieve.spf(), s)
        };
        Ok(FunctionTable::from_parts(
            FunctionKind::PhiRatio { s },
            TableValues::Real(v),
        ))
    }

    pub fn mertens(&self, limit: usize) -> Result<MertensValues> {
        let mu = self.mobius(limit)?;
        Ok(MertensValues::from_mobius(&mu))
    }
}

fn positive(limit: usize) -> Result<()> {
    if limit == 0 {
        Err(domain("table limit N must be at least 1"))
    } else {
        Ok(())
    }
}

fn positive_param(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "parameter s must be positive and finite, got {s}"
        )))
    }
}

fn mobius_from_spf(spf: &[u32]) -> Vec<i64> {
    let mut mu = vec![0i64; spf.len()];
    if spf.len() > 1 {
        mu[1] = 1;
    }
    for i in 2..spf.len() {
        let p = spf[i] as usize;
        let m = i / p;
        mu[i] = if m % p == 0 { 0 } else { -mu[m] };
    }
    mu
}

fn phi_from_spf(spf: &[u32]) -> Vec<i64> {
    let mut phi = vec![0i64; spf.len()];
    if spf.len() > 1 {
        phi[1] = 1;
    }
    for i in 2..spf.len() {
        let p = spf[i] as usize;
        let m = i / p;
        phi[i] = phi[m] * if m % p == 0 { p as i64 } else { p as i64 - 1 };
    }
    phi
}

fn phi_ratio_from_spf(spf: &[u32], s: f64) -> Vec<f64> {
    let mut v = vec![0.0f64; spf.len()];
    if spf.len() > 1 {
        v[1] = 1.0;
    }
    for i in 2..spf.len() {
        let p = spf[i] as usize;
        let m = i / p;
        v[i] = if m % p == 0 {
            v[m]
        } else {
            v[m] * (1.0 - (p as f64).powf(-s))
        };
    }
    v
}

pub fn sieve_mobius(limit: usize) -> Result<FunctionTable> {
    SieveConfig::default().mobius(limit)
}

pub fn sieve_euler_phi(limit: usize) -> Result<FunctionTable> {
    SieveConfig::default().euler_phi(limit)
}

pub fn sieve_dk(k: u32, limit: usize) -> Result<FunctionTable> {
    SieveConfig::default().divisor_k(k, limit)
}

pub fn sieve_sigma_ratio(s: f64, limit: usize) -> Result<FunctionTable> {
    SieveConfig::default().sigma_ratio(s, limit)
}

pub fn sieve_phi_ratio(s: f64, limit: usize) -> Result<FunctionTable> {
    SieveConfig::default().phi_ratio(s, limit)
}

pub fn mertens_values(limit: usize) -> Result<MertensValues> {
    SieveConfig::default().mertens(limit)
}

/// Prefix sums `M(n) = sum_{k <= n} mu(k)` for `n <= limit`, with `M(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MertensValues {
    prefix: Vec<i64>,
}

impl MertensValues {
    pub fn from_mobius(mu: &FunctionTable) -> Self {
        let ints = mu
            .integers()
            .expect("Mertens values need an integer Mobius table");
        let mut prefix = Vec::with_capacity(ints.len());
        let mut acc = 0i64;
        prefix.push(0);
        for &m in &ints[1..] {
            acc += m;
            prefix.push(acc);
        }
        MertensValues { prefix }
    }

    pub fn limit(&self) -> usize {
        self.prefix.len() - 1
    }

    /// `M(n)`; `M(0) = 0`.
    pub fn get(&self, n: usize) -> Option<i64> {
        self.prefix.get(n).copied()
    }

    /// `M(x)` for real `x >= 0`, i.e. `M(floor x)`.
    pub fn at(&self, x: f64) -> Option<i64> {
        if !(x >= 0.0) {
            return None;
        }
        self.get(x.floor() as usize)
    }

    pub fn prefix(&self) -> &[i64] {
        &self.prefix
    }
}
