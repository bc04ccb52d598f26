//! Shifted correlation sums `sum_{n <= N} f(n) g(n + h)`, their predicted
//! main terms and error envelopes, and the `rs <= U` split of the double
//! Ramanujan series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, FunctionTable, PrimeSieve, SieveConfig};
use crate::closed_forms::{
    cor1_constant, euler_delta, main_term_series, MainTermPrediction, DEFAULT_PRIME_LIMIT,
    DEFAULT_SERIES_TERMS,
};
use crate::error::{domain, Error, Result};
use crate::ramanujan::{ramanujan_sum_factored, CoefficientFamily, FamilyDescriptor, FamilyKind};
use crate::sum::CompensatedSum;

const CHUNK: usize = 1 << 15;
pub const DEFAULT_MAX_SHIFT: u64 = 10_000;
pub const DEFAULT_R_CAP: u64 = 1_000_000;

/// Compensated `sum_{n <= N} f(n) g(n + h)`, with its summation record.
///
/// Fixed-size chunks are summed in parallel and merged in index order, so
/// the result does not depend on the thread count.
pub fn correlate_compensated(
    f: &FunctionTable,
    g: &FunctionTable,
    h: usize,
    n: usize,
) -> Result<CompensatedSum> {
    if f.limit() < n {
        return Err(Error::TableTooShort {
            have: f.limit(),
            need: n,
        });
    }
    if g.limit() < n + h {
        return Err(Error::TableTooShort {
            have: g.limit(),
            need: n + h,
        });
    }
    let fv = f.real_values();
    let gv = g.real_values();
    let fv = &fv[1..=n];
    let gv = &gv[1 + h..=n + h];
    let partials: Vec<CompensatedSum> = fv
        .par_chunks(CHUNK)
        .zip(gv.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).collect())
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    Ok(total)
}

pub fn correlate_direct(f: &FunctionTable, g: &FunctionTable, h: usize, n: usize) -> Result<f64> {
    Ok(correlate_compensated(f, g, h, n)?.value())
}

fn check_n_delta(n: f64, delta: f64) -> Result<()> {
    if !(n >= 3.0) || !n.is_finite() {
        return Err(domain(format!("N must be at least 3, got {n}")));
    }
    if !(delta > 0.5) || !delta.is_finite() {
        return Err(domain(format!("delta must exceed 1/2, got {delta}")));
    }
    Ok(())
}

/// `U = N^(2/(1+2 delta)) (log N)^(4/(1+2 delta))`.
pub fn optimal_u(n: f64, delta: f64) -> Result<f64> {
    check_n_delta(n, delta)?;
    let k = 1.0 + 2.0 * delta;
    Ok(n.powf(2.0 / k) * n.ln().powf(4.0 / k))
}

/// `N^(2/(1+2 delta)) (log N)^((5+2 delta)/(1+2 delta))`.
pub fn error_shape(n: f64, delta: f64) -> Result<f64> {
    check_n_delta(n, delta)?;
    let k = 1.0 + 2.0 * delta;
    Ok(n.powf(2.0 / k) * n.ln().powf((5.0 + 2.0 * delta) / k))
}

/// `C N^(2/(1+2 delta)) (log N)^((5+2 delta)/(1+2 delta))`.
pub fn error_bound(n: f64, delta: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("bound constant must be positive, got {c}")));
    }
    Ok(c * error_shape(n, delta)?)
}

/// Truncation settings for main-term predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionOptions {
    pub r_max: usize,
    pub prime_limit: u64,
    /// Use the truncated series even when a closed form exists.
    pub series_only: bool,
}

impl Default for PredictionOptions {
    fn default() -> Self {
        PredictionOptions {
            r_max: DEFAULT_SERIES_TERMS,
            prime_limit: DEFAULT_PRIME_LIMIT,
            series_only: false,
        }
    }
}

/// Main term for a family pair: the closed form when both families are
/// `sigma` or both `phi` and `h >= 1`, the truncated series otherwise.
pub fn predict(
    fam_f: &CoefficientFamily,
    fam_g: &CoefficientFamily,
    h: u64,
    opts: &PredictionOptions,
) -> Result<MainTermPrediction> {
    if h >= 1 && !opts.series_only {
        if let (Some(s), Some(t)) = (fam_f.s(), fam_g.s()) {
            match (fam_f.kind(), fam_g.kind()) {
                (FamilyKind::Sigma, FamilyKind::Sigma) => return cor1_constant(s, t, h),
                (FamilyKind::Phi, FamilyKind::Phi) => {
                    return euler_delta(s, t, h, opts.prime_limit)
                }
                _ => {}
            }
        }
    }
    main_term_series(fam_f, fam_g, h, opts.r_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub h: u64,
    pub direct_sum: f64,
    pub prediction: MainTermPrediction,
    /// `direct_sum - N * prediction.value`
    pub residual: f64,
    /// `bound_constant * error_shape(N, delta)`
    pub bound_value: f64,
    pub bound_constant: f64,
    pub delta: f64,
    pub family_f: FamilyDescriptor,
    pub family_g: FamilyDescriptor,
}

impl CorrelationReport {
    pub fn ratio(&self) -> f64 {
        self.direct_sum / self.n as f64
    }

    /// `|residual| / error_shape(N, delta)`.
    pub fn normalized_residual(&self) -> f64 {
        self.residual.abs() / error_shape(self.n as f64, self.delta).unwrap_or(f64::NAN)
    }

    pub fn within_bound(&self) -> bool {
        self.residual.abs() <= self.bound_value
    }

    pub const CSV_HEADER: &'static str = "N,h,family_f,s,family_g,t,delta,direct_sum,ratio,prediction,route,tail_estimate,residual,normalized_residual,bound_value";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:?},{:?},{:?},{},{:e},{:?},{:?},{:?}",
            self.n,
            self.h,
            family_label(&self.family_f),
            opt(self.family_f.s),
            family_label(&self.family_g),
            opt(self.family_g.s),
            self.delta,
            self.direct_sum,
            self.ratio(),
            self.prediction.value,
            serde_json::to_value(self.prediction.route)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            self.prediction.tail_estimate,
            self.residual,
            self.normalized_residual(),
            self.bound_value,
        )
    }
}

pub(crate) fn family_label(d: &FamilyDescriptor) -> &'static str {
    match d.family {
        FamilyKind::Sigma => "sigma",
        FamilyKind::Phi => "phi",
        FamilyKind::Custom => "custom",
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Correlation reports for one family pair and shift over a grid of `N`.
///
/// Tables are sieved once to `max N + h`. The bound constant is fitted at
/// the smallest `N` so that `bound_value` there equals `|residual|`.
pub fn correlation_grid(
    fam_f: &CoefficientFamily,
    fam_g: &CoefficientFamily,
    h: u64,
    n_grid: &[u64],
    opts: &PredictionOptions,
    config: &SieveConfig,
) -> Result<Vec<CorrelationReport>> {
    let mut grid: Vec<u64> = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let n_max = *grid.last().ok_or_else(|| domain("empty N grid"))?;
    if grid[0] < 3 {
        return Err(domain("grid values of N must be at least 3"));
    }
    let limit = (n_max + h) as usize;
    let f = fam_f
        .sieve_table(limit, config)
        .ok_or_else(|| domain("direct sums need a sieved family (sigma or phi)"))??;
    let g = fam_g
        .sieve_table(limit, config)
        .ok_or_else(|| domain("direct sums need a sieved family (sigma or phi)"))??;
    let prediction = predict(fam_f, fam_g, h, opts)?;
    let delta = fam_f.delta().min(fam_g.delta());

    let mut reports = Vec::with_capacity(grid.len());
    for &n in &grid {
        let direct_sum = correlate_direct(&f, &g, h as usize, n as usize)?;
        let residual = direct_sum - n as f64 * prediction.value;
        reports.push(CorrelationReport {
            n,
            h,
            direct_sum,
            prediction: prediction.clone(),
            residual,
            bound_value: 0.0,
            bound_constant: 0.0,
            delta,
            family_f: fam_f.descriptor(),
            family_g: fam_g.descriptor(),
        });
    }
    let c_fit = reports[0].normalized_residual();
    for r in &mut reports {
        r.bound_constant = c_fit;
        r.bound_value = c_fit * error_shape(r.n as f64, delta)?;
    }
    Ok(reports)
}

/// Exact `sum_{n <= N} c_r(n) c_s(n + h)` for many `(r, s)`.
///
/// Expanding `c_r(n) = sum_{d | (n, r)} mu(r/d) d` turns the sum into
/// `sum mu(r/d) mu(s/e) d e #{n <= N : d | n, e | n + h}`, and each count
/// is one residue class modulo `lcm(d, e)` by the Chinese remainder theorem.
#[derive(Debug, Clone)]
pub struct ShiftedSumEngine {
    /// For each r: `(d, mu(r/d))` over `d | r` with `r/d` squarefree.
    divisors: Vec<Vec<(i64, i64)>>,
}

impl ShiftedSumEngine {
    pub fn new(r_max: usize) -> Result<Self> {
        let sieve: PrimeSieve = SieveConfig::default().prime_sieve(r_max.max(1))?;
        let mut divisors = vec![Vec::new(); r_max + 1];
        for (r, slot) in divisors.iter_mut().enumerate().skip(1) {
            let primes: Vec<u64> = sieve.factorize(r).iter().map(|&(p, _)| p).collect();
            let mut list = Vec::with_capacity(1 << primes.len());
            for mask in 0u32..(1 << primes.len()) {
                let mut k = 1i64;
                for (i, &p) in primes.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        k *= p as i64;
                    }
                }
                let mu = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
                list.push((r as i64 / k, mu));
            }
            *slot = list;
        }
        Ok(ShiftedSumEngine { divisors })
    }

    pub fn r_max(&self) -> usize {
        self.divisors.len() - 1
    }

    pub fn sum(&self, r: usize, s: usize, h: u64, n: u64) -> i128 {
        let mut total = 0i128;
        for &(d, mu_d) in &self.divisors[r] {
            for &(e, mu_e) in &self.divisors[s] {
                let count = residue_count(d, e, h as i64, n as i64);
                if count != 0 {
                    total += (mu_d * mu_e) as i128 * d as i128 * e as i128 * count as i128;
                }
            }
        }
        total
    }
}

/// `#{1 <= n <= N : n = 0 mod d, n = -h mod e}`.
fn residue_count(d: i64, e: i64, h: i64, n: i64) -> i64 {
    let g = gcd(d as u64, e as u64) as i64;
    if h % g != 0 {
        return 0;
    }
    let l = d / g * e;
    let m = e / g;
    // (d/g) x = -h/g (mod m)
    let n0 = if m == 1 {
        0
    } else {
        let inv = mod_inverse((d / g) % m, m);
        let rhs = (-(h / g)).rem_euclid(m);
        let x = ((rhs as i128 * inv as i128) % m as i128) as i64;
        d * x
    };
    if n0 == 0 {
        n / l
    } else if n0 > n {
        0
    } else {
        (n - n0) / l + 1
    }
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m)
}

/// Terms of the `rs <= U` split of `sum_{n <= N} f(n) g(n + h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct USplitDiagnostics {
    #[serde(rename = "N")]
    pub n: u64,
    pub h: u64,
    #[serde(rename = "U")]
    pub u: f64,
    pub delta: f64,
    /// `sum_{rs <= U} f^(r) g^(s) sum_{n <= N} c_r(n) c_s(n + h)`, exact inner sums.
    #[serde(rename = "A")]
    pub a: f64,
    /// `direct_sum - A` when the functions can be sieved.
    #[serde(rename = "B")]
    pub b: Option<f64>,
    /// `N` times the full main-term series.
    #[serde(rename = "C")]
    pub c: f64,
    /// `-N sum_{r^2 > U} f^(r) g^(r) w(r)`.
    #[serde(rename = "D")]
    pub d: f64,
    pub direct_sum: Option<f64>,
    /// `|(A + B) - direct_sum|`.
    pub recomposition_error: Option<f64>,
    /// `A - C - D`, the part the Kronecker-delta lemma bounds by `O(U log U)`.
    pub a_remainder: f64,
    /// `N / U^delta`
    pub d_envelope: f64,
    /// `sqrt(N (N + h)) (log U)^3 / U^(delta - 1/2)`
    pub b_envelope: f64,
    /// `C_f C_g sqrt(N(N+h)) sum_{U < t <= R_cap} d_4(t) t^-(1/2 + delta)`
    pub b_lemma2_envelope: f64,
    pub pairs: u64,
}

impl USplitDiagnostics {
    pub const CSV_HEADER: &'static str =
        "N,h,U,delta,A,B,C,D,direct_sum,recomposition_error,a_remainder,d_envelope,b_envelope,b_lemma2_envelope,pairs";

    pub fn csv_row(&self) -> String {
        let o = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
        format!(
            "{},{},{:?},{},{:?},{},{:?},{:?},{},{},{:?},{:?},{:?},{:?},{}",
            self.n,
            self.h,
            self.u,
            self.delta,
            self.a,
            o(self.b),
            self.c,
            self.d,
            o(self.direct_sum),
            o(self.recomposition_error),
            self.a_remainder,
            self.d_envelope,
            self.b_envelope,
            self.b_lemma2_envelope,
            self.pairs
        )
    }
}

/// Decomposes `sum_{n <= N} f(n) g(n + h) = A + B` at the cutoff `U`, with
/// `A = C + D + O(U log U)`.
pub fn u_split(
    fam_f: &CoefficientFamily,
    fam_g: &CoefficientFamily,
    h: u64,
    n: u64,
    u: f64,
    r_cap: u64,
) -> Result<USplitDiagnostics> {
    u_split_with(
        fam_f,
        fam_g,
        h,
        n,
        u,
        r_cap,
        &PredictionOptions::default(),
        &SieveConfig::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn u_split_with(
    fam_f: &CoefficientFamily,
    fam_g: &CoefficientFamily,
    h: u64,
    n: u64,
    u: f64,
    r_cap: u64,
    opts: &PredictionOptions,
    config: &SieveConfig,
) -> Result<USplitDiagnostics> {
    let delta = fam_f.delta().min(fam_g.delta());
    if !(delta > 0.5) {
        return Err(domain(format!("families need delta > 1/2, got {delta}")));
    }
    if !(u >= 4.0) || !u.is_finite() {
        return Err(domain(format!("U must be at least 4, got {u}")));
    }
    if n < 1 {
        return Err(domain("N must be at least 1"));
    }
    if u > r_cap as f64 {
        return Err(Error::CapExceeded { u, cap: r_cap });
    }
    let ui = u.floor() as usize;

    let f = fam_f.eval_range(ui)?;
    let g = fam_g.eval_range(ui)?;
    let engine = ShiftedSumEngine::new(ui)?;
    let rows: Vec<(CompensatedSum, u64)> = (1..=ui)
        .into_par_iter()
        .map(|r| {
            let mut acc = CompensatedSum::new();
            let mut pairs = 0;
            if f[r] != 0.0 {
                for s in 1..=ui / r {
                    if g[s] != 0.0 {
                        let inner = engine.sum(r, s, h, n);
                        acc.add(f[r] * g[s] * inner as f64);
                        pairs += 1;
                    }
                }
            }
            (acc, pairs)
        })
        .collect();
    let mut a_acc = CompensatedSum::new();
    let mut pairs = 0;
    for (acc, p) in &rows {
        a_acc.merge(acc);
        pairs += p;
    }
    let a = a_acc.value();

    let nf = n as f64;
    let series = main_term_series(fam_f, fam_g, h, opts.r_max.max(ui))?;
    let c = nf * series.value;
    // partial series over r^2 <= U
    let root = (1..=ui)
        .take_while(|&r| (r * r) as f64 <= u)
        .last()
        .unwrap_or(0);
    let mut head = CompensatedSum::new();
    if root >= 1 {
        let sieve = config.prime_sieve(root)?;
        for r in 1..=root {
            let factors = sieve.factorize(r);
            let w = if h == 0 {
                factors
                    .iter()
                    .map(|&(p, e)| ((p - 1) * p.pow(e - 1)) as f64)
                    .product::<f64>()
            } else {
                ramanujan_sum_factored(&factors, h) as f64
            };
            head.add(f[r] * g[r] * w);
        }
    }
    let d = -(c - nf * head.value());

    let direct_sum = match (
        fam_f.sieve_table(n as usize, config),
        fam_g.sieve_table((n + h) as usize, config),
    ) {
        (Some(ft), Some(gt)) => Some(correlate_direct(&ft?, &gt?, h as usize, n as usize)?),
        _ => None,
    };
    let b = direct_sum.map(|s| s - a);
    let recomposition_error = direct_sum.zip(b).map(|(s, b)| ((a + b) - s).abs());

    let logu = u.ln();
    let root_nn = (nf * (nf + h as f64)).sqrt();
    let d_envelope = nf / u.powf(delta);
    let b_envelope = root_nn * logu.powi(3) / u.powf(delta - 0.5);
    let b_lemma2_envelope = if (r_cap as usize) > ui {
        let d4 = config.divisor_k(4, r_cap as usize)?;
        let mut acc = CompensatedSum::new();
        for t in ui + 1..=r_cap as usize {
            acc.add(d4.get(t) * (t as f64).powf(-(0.5 + delta)));
        }
        fam_f.tail_constant() * fam_g.tail_constant() * root_nn * acc.value()
    } else {
        0.0
    };

    Ok(USplitDiagnostics {
        n,
        h,
        u,
        delta,
        a,
        b,
        c,
        d,
        direct_sum,
        recomposition_error,
        a_remainder: a - c - d,
        d_envelope,
        b_envelope,
        b_lemma2_envelope,
        pairs,
    })
}
