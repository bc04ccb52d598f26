//! Verification drivers built on the other modules: exact residual grids for
//! the two Ramanujan-sum correlation lemmas, average orders of `phi`, `d_4`
//! and `M(x)`, growth of `sum_{r <= x} c_r(h)`, and log-log fits of
//! correlation residuals.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{divisor_count, SieveConfig};
use crate::correlation::{
    optimal_u, u_split_with, CorrelationReport, PredictionOptions, USplitDiagnostics,
};
use crate::error::{domain, Error, Result};
use crate::ramanujan::{
    ramanujan_partial_sum, ramanujan_partial_sum_direct, ramanujan_sum, CoefficientFamily,
    RamanujanSumTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaKind {
    /// `sum c_r(n) c_s(n + h) = delta_{r,s} N c_r(h) + O(rs log rs)`
    Orthogonality,
    /// `|sum c_r(n) c_s(n + h)| <= d(r) d(s) sqrt(rs N (N + h))`
    CauchySchwarz,
}

/// One `(r, s, h, N)` cell of a lemma grid. All sums are exact integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaResidual {
    pub lemma: LemmaKind,
    pub r: u64,
    pub s: u64,
    pub h: u64,
    #[serde(rename = "N")]
    pub n: u64,
    /// `sum_{n <= N} c_r(n) c_s(n + h)`
    pub sum_value: i64,
    /// `N c_r(h)` when `r = s`, else 0.
    pub main: i64,
    pub residual: i64,
    /// `rs log(rs + 2)` for orthogonality records, `d(r) d(s) sqrt(rs N (N + h))`
    /// for Cauchy-Schwarz records.
    pub bound: f64,
    /// Cauchy-Schwarz records: `|sum| <= bound`, decided in integers.
    pub within_bound: Option<bool>,
    /// Cauchy-Schwarz records: `|sum| < bound`, decided in integers.
    pub strict: Option<bool>,
}

impl LemmaResidual {
    pub const CSV_HEADER: &'static str =
        "lemma,r,s,h,N,sum,main,residual,bound,ratio,within_bound,strict";

    /// `|residual| / bound` for orthogonality, `|sum| / bound` otherwise.
    pub fn ratio(&self) -> f64 {
        match self.lemma {
            LemmaKind::Orthogonality => self.residual.unsigned_abs() as f64 / self.bound,
            LemmaKind::CauchySchwarz => self.sum_value.unsigned_abs() as f64 / self.bound,
        }
    }

    pub fn csv_row(&self) -> String {
        let b = |x: Option<bool>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{:?},{:?},{},{}",
            match self.lemma {
                LemmaKind::Orthogonality => "orthogonality",
                LemmaKind::CauchySchwarz => "cauchy_schwarz",
            },
            self.r,
            self.s,
            self.h,
            self.n,
            self.sum_value,
            self.main,
            self.residual,
            self.bound,
            self.ratio(),
            b(self.within_bound),
            b(self.strict),
        )
    }
}

fn check_grid(r_max: u64, s_max: u64, h_set: &[u64], n_set: &[u64]) -> Result<()> {
    if r_max == 0 || s_max == 0 {
        return Err(domain("r_max and s_max must be at least 1"));
    }
    if h_set.is_empty() || n_set.is_empty() {
        return Err(domain("h and N sets must be non-empty"));
    }
    if n_set.contains(&0) {
        return Err(domain("N must be at least 1"));
    }
    Ok(())
}

/// Exact sums `sum_{n <= N} c_r(n) c_s(n + h)` for every cell, grouped by
/// `(r, s, h)` in lexicographic order with `N` ascending inside each group.
fn exact_cells(
    r_max: u64,
    s_max: u64,
    h_set: &[u64],
    n_set: &[u64],
    config: &SieveConfig,
) -> Result<Vec<(u64, u64, u64, Vec<(u64, i64)>)>> {
    check_grid(r_max, s_max, h_set, n_set)?;
    let mut hs = h_set.to_vec();
    hs.sort_unstable();
    hs.dedup();
    let mut ns = n_set.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().unwrap();
    let h_max = *hs.last().unwrap();
    let width = (n_max + h_max) as usize;
    let rows = r_max.max(s_max) as usize;
    config.check(width, 8 * rows as u64)?;
    let table = RamanujanSumTable::with_config(rows, width, config)?;

    let mut cells = Vec::new();
    for r in 1..=r_max {
        for s in 1..=s_max {
            for &h in &hs {
                cells.push((r, s, h));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(r, s, h)| {
            let cr = table.row(r as usize);
            let cs = table.row(s as usize);
            let mut acc = 0i64;
            let mut out = Vec::with_capacity(ns.len());
            let mut next = 0;
            for n in 1..=n_max as usize {
                acc = cr[n]
                    .checked_mul(cs[n + h as usize])
                    .and_then(|t| acc.checked_add(t))
                    .ok_or(Error::Overflow {
                        what: "lemma grid sum",
                    })?;
                if n as u64 == ns[next] {
                    out.push((ns[next], acc));
                    next += 1;
                }
            }
            Ok((r, s, h, out))
        })
        .collect()
}

/// Residuals `sum - delta_{r,s} N c_r(h)` on the grid `r <= r_max`,
/// `s <= s_max`, with the shape `rs log(rs + 2)` as `bound`.
pub fn lemma1_grid(
    r_max: u64,
    s_max: u64,
    h_set: &[u64],
    n_set: &[u64],
    config: &SieveConfig,
) -> Result<Vec<LemmaResidual>> {
    let cells = exact_cells(r_max, s_max, h_set, n_set, config)?;
    let mut out = Vec::new();
    for (r, s, h, sums) in cells {
        let crh = if r == s { ramanujan_sum(r, h) } else { 0 };
        let rs = (r * s) as f64;
        for (n, sum_value) in sums {
            let main = n as i64 * crh;
            out.push(LemmaResidual {
                lemma: LemmaKind::Orthogonality,
                r,
                s,
                h,
                n,
                sum_value,
                main,
                residual: sum_value - main,
                bound: rs * (rs + 2.0).ln(),
                within_bound: None,
                strict: None,
            });
        }
    }
    Ok(out)
}

/// Sums checked against `d(r) d(s) sqrt(rs N (N + h))`. The comparison
/// squares both sides and is done in `i128`.
pub fn lemma2_grid(
    r_max: u64,
    s_max: u64,
    h_set: &[u64],
    n_set: &[u64],
    config: &SieveConfig,
) -> Result<Vec<LemmaResidual>> {
    let cells = exact_cells(r_max, s_max, h_set, n_set, config)?;
    let mut out = Vec::new();
    for (r, s, h, sums) in cells {
        let dd = (divisor_count(r) * divisor_count(s)) as i128;
        let main_unit = if r == s { ramanujan_sum(r, h) } else { 0 };
        for (n, sum_value) in sums {
            let rhs = dd * dd * (r * s) as i128 * n as i128 * (n + h) as i128;
            let lhs = sum_value as i128 * sum_value as i128;
            let bound = dd as f64 * ((r * s) as f64 * n as f64 * (n + h) as f64).sqrt();
            let main = n as i64 * main_unit;
            out.push(LemmaResidual {
                lemma: LemmaKind::CauchySchwarz,
                r,
                s,
                h,
                n,
                sum_value,
                main,
                residual: sum_value - main,
                bound,
                within_bound: Some(lhs <= rhs),
                strict: Some(lhs < rhs),
            });
        }
    }
    Ok(out)
}

/// Stability of orthogonality residuals in `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Stability {
    /// `N` at which the constant was fitted.
    pub n_fit: u64,
    /// `max |residual| / (rs log(rs + 2))` over the cells at `n_fit`.
    pub constant: f64,
    /// The same maximum taken separately for each `h`.
    pub per_h: BTreeMap<u64, f64>,
    /// Largest `|residual| / (rs log(rs + 2))` at larger `N`.
    pub max_later_ratio: f64,
    /// Cells at larger `N` whose residual exceeds `constant * rs log(rs + 2)`.
    pub violations: Vec<LemmaResidual>,
}

impl Lemma1Stability {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn lemma1_stability(records: &[LemmaResidual]) -> Result<Lemma1Stability> {
    let n_fit = records
        .iter()
        .map(|r| r.n)
        .min()
        .ok_or_else(|| domain("no lemma records"))?;
    let mut constant = 0.0f64;
    let mut per_h = BTreeMap::new();
    for rec in records.iter().filter(|r| r.n == n_fit) {
        constant = constant.max(rec.ratio());
        let e = per_h.entry(rec.h).or_insert(0.0f64);
        *e = e.max(rec.ratio());
    }
    let mut max_later_ratio = 0.0f64;
    let mut violations = Vec::new();
    for rec in records.iter().filter(|r| r.n > n_fit) {
        max_later_ratio = max_later_ratio.max(rec.ratio());
        if rec.residual.unsigned_abs() as f64 > constant * rec.bound {
            violations.push(rec.clone());
        }
    }
    Ok(Lemma1Stability {
        n_fit,
        constant,
        per_h,
        max_later_ratio,
        violations,
    })
}

/// Measured envelope for `(sum phi - 3x^2/pi^2) / (x log x)`.
pub const PHI_RATIO_ENVELOPE: f64 = 1.0;
/// Measured envelope for `(sum d_4 - x (log x)^3 / 6) / (x (log x)^2)`.
pub const D4_RATIO_ENVELOPE: f64 = 1.0;

/// `c` maximal with `|S(x)| <= x exp(-c sqrt(log x))` on the grid; infinite
/// when every `S(x)` is zero.
fn fit_exp_sqrt_log(points: &[(u64, i64)]) -> f64 {
    points
        .iter()
        .filter(|&&(_, v)| v != 0)
        .map(|&(x, v)| {
            let lx = (x as f64).ln();
            (lx - (v.unsigned_abs() as f64).ln()) / lx.sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn exp_sqrt_log_ratio(x: u64, v: i64, c: f64) -> f64 {
    let lx = (x as f64).ln();
    if v == 0 {
        0.0
    } else {
        v.unsigned_abs() as f64 * (c * lx.sqrt()).exp() / x as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageOrderRow {
    pub x: u64,
    pub phi_sum: i64,
    /// `(sum phi - 3x^2/pi^2) / (x log x)`
    pub phi_ratio: f64,
    pub d4_sum: i64,
    /// `(sum d_4 - x (log x)^3 / 6) / (x (log x)^2)`
    pub d4_ratio: f64,
    pub mertens: i64,
    /// `|M(x)| exp(c sqrt(log x)) / x` with the fitted `c`.
    pub mertens_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageOrderReport {
    pub rows: Vec<AverageOrderRow>,
    pub mertens_c: f64,
    pub phi_bounded: bool,
    pub d4_bounded: bool,
    pub mertens_bounded: bool,
}

impl AverageOrderReport {
    pub const CSV_HEADER: &'static str =
        "x,phi_sum,phi_ratio,d4_sum,d4_ratio,mertens,mertens_ratio";

    pub fn passed(&self) -> bool {
        self.phi_bounded && self.d4_bounded && self.mertens_bounded
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{:?},{},{:?},{},{:?}",
                    r.x, r.phi_sum, r.phi_ratio, r.d4_sum, r.d4_ratio, r.mertens, r.mertens_ratio
                )
            })
            .collect()
    }
}

fn sorted_grid(grid: &[u64], min: u64) -> Result<Vec<u64>> {
    let mut g = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    match g.first() {
        None => Err(domain("empty x grid")),
        Some(&x) if x < min => Err(domain(format!("grid values must be at least {min}"))),
        _ => Ok(g),
    }
}

/// Normalized residuals of `sum phi`, `sum d_4` and `M(x)` over `x_grid`.
pub fn average_order_checks(x_grid: &[u64], config: &SieveConfig) -> Result<AverageOrderReport> {
    let grid = sorted_grid(x_grid, 3)?;
    let x_max = *grid.last().unwrap() as usize;
    config.check(x_max, 24)?;
    let phi = config.euler_phi(x_max)?;
    let d4 = config.divisor_k(4, x_max)?;
    let mertens = config.mertens(x_max)?;
    let (phi_v, d4_v) = (phi.integers().unwrap(), d4.integers().unwrap());

    let mut rows = Vec::with_capacity(grid.len());
    let (mut phi_acc, mut d4_acc) = (0i64, 0i64);
    let mut next = 1usize;
    for &x in &grid {
        for n in next..=x as usize {
            phi_acc += phi_v[n];
            d4_acc = d4_acc
                .checked_add(d4_v[n])
                .ok_or(Error::Overflow { what: "sum of d_4" })?;
        }
        next = x as usize + 1;
        let xf = x as f64;
        let lx = xf.ln();
        rows.push(AverageOrderRow {
            x,
            phi_sum: phi_acc,
            phi_ratio: (phi_acc as f64 - 3.0 * xf * xf / (PI * PI)) / (xf * lx),
            d4_sum: d4_acc,
            d4_ratio: (d4_acc as f64 - xf * lx.powi(3) / 6.0) / (xf * lx * lx),
            mertens: mertens.get(x as usize).unwrap(),
            mertens_ratio: 0.0,
        });
    }
    let m_points: Vec<(u64, i64)> = rows.iter().map(|r| (r.x, r.mertens)).collect();
    let mertens_c = fit_exp_sqrt_log(&m_points);
    for row in &mut rows {
        row.mertens_ratio = exp_sqrt_log_ratio(row.x, row.mertens, mertens_c);
    }
    Ok(AverageOrderReport {
        phi_bounded: rows.iter().all(|r| r.phi_ratio.abs() <= PHI_RATIO_ENVELOPE),
        d4_bounded: rows.iter().all(|r| r.d4_ratio.abs() <= D4_RATIO_ENVELOPE),
        mertens_bounded: mertens_c > 0.0 && rows.iter().all(|r| r.mertens_ratio <= 1.0 + 1e-12),
        rows,
        mertens_c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrhRow {
    pub h: u64,
    pub x: u64,
    /// `sum_{d | h} d M(x / d)`
    pub via_mertens: i64,
    /// Term-by-term `sum_{r <= x} c_r(h)`.
    pub direct: i64,
    /// `|sum| exp(c_h sqrt(log x)) / x` with the fitted `c_h`.
    pub growth_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrhReport {
    pub rows: Vec<CrhRow>,
    /// Fitted exponent constant per `h`.
    pub constants: BTreeMap<u64, f64>,
    pub routes_agree: bool,
}

impl CrhReport {
    pub const CSV_HEADER: &'static str = "h,x,via_mertens,direct,growth_ratio";

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{:?}",
                    r.h, r.x, r.via_mertens, r.direct, r.growth_ratio
                )
            })
            .collect()
    }
}

/// `sum_{r <= x} c_r(h)` two ways, and its size against `x exp(-c sqrt(log x))`.
pub fn crh_growth_check(h_set: &[u64], x_grid: &[u64], config: &SieveConfig) -> Result<CrhReport> {
    let grid = sorted_grid(x_grid, 2)?;
    let mut hs = h_set.to_vec();
    hs.sort_unstable();
    hs.dedup();
    if hs.is_empty() || hs[0] == 0 {
        return Err(domain("h values must be at least 1"));
    }
    let x_max = *grid.last().unwrap() as usize;
    let mertens = config.mertens(x_max)?;

    let mut rows = Vec::new();
    let mut constants = BTreeMap::new();
    for &h in &hs {
        let start = rows.len();
        for &x in &grid {
            let via = ramanujan_partial_sum(h, x as f64, &mertens)?;
            let direct = ramanujan_partial_sum_direct(h, x as f64)?;
            rows.push(CrhRow {
                h,
                x,
                via_mertens: via,
                direct,
                growth_ratio: 0.0,
            });
        }
        let pts: Vec<(u64, i64)> = rows[start..].iter().map(|r| (r.x, r.via_mertens)).collect();
        let c = fit_exp_sqrt_log(&pts);
        for row in &mut rows[start..] {
            row.growth_ratio = exp_sqrt_log_ratio(row.x, row.via_mertens, c);
        }
        constants.insert(h, c);
    }
    Ok(CrhReport {
        routes_agree: rows.iter().all(|r| r.via_mertens == r.direct),
        rows,
        constants,
    })
}

/// `|D|` and `|B|` against their envelopes with constants fitted at the
/// smallest `N` of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub diagnostics: Vec<USplitDiagnostics>,
    /// `|D| / (N / U^delta)` at the smallest `N`.
    pub d_constant: f64,
    /// `|B| / (sqrt(N (N + h)) (log U)^3 / U^(delta - 1/2))` at the smallest `N`.
    pub b_constant: f64,
    pub d_holds: bool,
    pub b_holds: bool,
}

impl EnvelopeFit {
    pub fn holds(&self) -> bool {
        self.d_holds && self.b_holds
    }
}

/// Runs the `rs <= U` split at the optimal `U` for every `N` in the grid.
pub fn usplit_envelopes(
    fam_f: &CoefficientFamily,
    fam_g: &CoefficientFamily,
    h: u64,
    n_grid: &[u64],
    r_cap: u64,
    opts: &PredictionOptions,
    config: &SieveConfig,
) -> Result<EnvelopeFit> {
    let grid = sorted_grid(n_grid, 3)?;
    let delta = fam_f.delta().min(fam_g.delta());
    let diagnostics = grid
        .iter()
        .map(|&n| {
            let u = optimal_u(n as f64, delta)?;
            u_split_with(fam_f, fam_g, h, n, u, r_cap, opts, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let b_of = |d: &USplitDiagnostics| {
        d.b.map(f64::abs)
            .ok_or_else(|| domain("B needs families that can be sieved"))
    };
    let d_constant = diagnostics[0].d.abs() / diagnostics[0].d_envelope;
    let b_constant = b_of(&diagnostics[0])? / diagnostics[0].b_envelope;
    let mut b_holds = true;
    for d in &diagnostics {
        b_holds &= b_of(d)? <= b_constant * d.b_envelope;
    }
    Ok(EnvelopeFit {
        d_holds: diagnostics
            .iter()
            .all(|d| d.d.abs() <= d_constant * d.d_envelope),
        b_holds,
        d_constant,
        b_constant,
        diagnostics,
    })
}

/// Least-squares fit of `log |E| = alpha log N + log c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorFit {
    /// `(N, |residual|)` with zero residuals removed.
    pub points: Vec<(f64, f64)>,
    pub alpha: f64,
    pub log_c: f64,
    pub r_squared: f64,
}

/// Fits a power law to positive `(N, |E|)` pairs.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ErrorFit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, e)| e != 0.0).collect();
    if pts
        .iter()
        .any(|&(n, e)| !(n > 0.0) || !e.is_finite() || !n.is_finite())
    {
        return Err(Error::DegenerateFit(
            "points need finite N > 0 and finite |E|".into(),
        ));
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{} nonzero residuals, need at least 2",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all N values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let alpha = sxy / sxx;
    let log_c = my - alpha * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ErrorFit {
        points: pts.iter().map(|&(n, e)| (n, e.abs())).collect(),
        alpha,
        log_c,
        r_squared,
    })
}

/// Fits `|residual|` against `N` across correlation reports.
///
/// Needs at least four distinct `N`. If every residual is zero the
/// prediction is exact and [`Error::ExactMatch`] is returned.
pub fn fit_error_exponent(reports: &[CorrelationReport]) -> Result<ErrorFit> {
    let mut ns: Vec<u64> = reports.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "{} distinct N values, need at least 4",
            ns.len()
        )));
    }
    if reports.iter().all(|r| r.residual == 0.0) {
        return Err(Error::ExactMatch);
    }
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n as f64, r.residual.abs()))
        .collect();
    fit_power_law(&pts)
}

/// Whether `|E| / shape(N)` never exceeds its value at the smallest `N`.
pub fn normalized_residual_stable(reports: &[CorrelationReport]) -> bool {
    let Some(first) = reports.iter().min_by_key(|r| r.n) else {
        return true;
    };
    let base = first.normalized_residual();
    reports.iter().all(|r| r.normalized_residual() <= base)
}

/// Named pass/fail flags and fitted constants, for JSON emission.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: BTreeMap<String, bool>,
    pub constants: BTreeMap<String, f64>,
}

impl Summary {
    pub fn check(&mut self, name: &str, pass: bool) -> &mut Self {
        self.checks.insert(name.to_string(), pass);
        self
    }

    pub fn constant(&mut self, name: &str, value: f64) -> &mut Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|&b| b)
    }
}
