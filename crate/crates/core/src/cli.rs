//! The `parseval` command line.
//!
//! Every subcommand writes CSV (with a versioned `#` header line) or JSON to
//! stdout or `--output`. Exit status is 0 on success, 1 on usage or
//! computation errors and 2 when a checked invariant fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    average_order_checks, crh_growth_check, fit_error_exponent, lemma1_grid, lemma1_stability,
    lemma2_grid, normalized_residual_stable, usplit_envelopes, LemmaResidual, Summary,
};
use crate::arith::{format, SieveConfig, DEFAULT_MEMORY_BUDGET};
use crate::correlation::{
    correlation_grid, optimal_u, u_split_with, CorrelationReport, PredictionOptions,
    USplitDiagnostics, DEFAULT_MAX_SHIFT,
};
use crate::error::{domain, Error, Result};
use crate::ramanujan::{ramanujan_sum, CoefficientFamily, ExpansionEvaluator};

pub const SCHEMA_VERSION: u32 = 1;
pub const MEMORY_BUDGET_ENV: &str = "RAMANUJAN_PARSEVAL_MEMORY_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "parseval",
    version,
    about = "Numerical checks of Parseval-type formulas for Ramanujan expansions"
)]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Also write `series,x,y` plot data to this file.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,

    /// Largest table allocation in bytes.
    #[arg(long, global = true, env = MEMORY_BUDGET_ENV, value_parser = parse_count)]
    pub memory_budget: Option<u64>,

    /// Print which statement each subcommand exercises and exit.
    #[arg(long)]
    pub explain: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Sigma,
    Phi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ramanujan sum c_r(n).
    Csum {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        n: u64,
    },
    /// Direct correlation sums against the predicted main term.
    Correlate(CorrelateArgs),
    /// The rs <= U split of a correlation sum.
    Usplit(UsplitArgs),
    /// Exact orthogonality residuals of Ramanujan-sum correlations.
    Lemma1(GridArgs),
    /// Exact Cauchy-Schwarz bound check for Ramanujan-sum correlations.
    Lemma2(GridArgs),
    /// Average orders of phi, d_4 and the Mertens function.
    Averages {
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6")]
        x: Vec<u64>,
    },
    /// Growth of sum_{r <= x} c_r(h), computed two ways.
    Crh {
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1,2,6,24")]
        h: Vec<u64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6")]
        x: Vec<u64>,
    },
    /// Log-log fit of correlation residuals against N.
    Fit(FitArgs),
    /// Truncated Ramanujan expansion against the sieved function.
    Expand(ExpandArgs),
    /// Sieve an arithmetic function table.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Family of g when it differs from f.
    #[arg(long, value_enum)]
    pub family_g: Option<FamilyArg>,
    #[arg(long)]
    pub s: f64,
    /// Parameter of g; defaults to s.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 0, value_parser = parse_count)]
    pub h: u64,
    /// Terms of the main-term series.
    #[arg(long = "r-max", value_parser = parse_count, default_value = "1e5")]
    pub r_max: u64,
    /// Prime cutoff of the Euler product.
    #[arg(long = "prime-limit", value_parser = parse_count, default_value = "1e6")]
    pub prime_limit: u64,
    /// Use the series even when a closed form exists.
    #[arg(long)]
    pub series_only: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long = "N", value_delimiter = ',', value_parser = parse_count, required = true)]
    pub n: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6")]
    pub grid: Vec<u64>,
    /// Allowed excess of alpha over 2/(1 + 2 delta).
    #[arg(long, default_value_t = 0.1)]
    pub slack: f64,
}

#[derive(Debug, Args)]
pub struct UsplitArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// One N, or several to fit the D and B envelopes at the smallest.
    #[arg(long = "N", value_delimiter = ',', value_parser = parse_count, required = true)]
    pub n: Vec<u64>,
    /// Cutoff for a single N; defaults to the optimal U for delta = min(s, t).
    #[arg(long = "U")]
    pub u: Option<f64>,
    #[arg(long = "r-cap", value_parser = parse_count, default_value = "1e6")]
    pub r_cap: u64,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "r-max", value_parser = parse_count, default_value = "12")]
    pub r_max: u64,
    #[arg(long = "s-max", value_parser = parse_count, default_value = "12")]
    pub s_max: u64,
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "0,1,5")]
    pub h: Vec<u64>,
    #[arg(long = "N", value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4")]
    pub n: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub s: f64,
    /// Largest n evaluated.
    #[arg(long = "n-max", value_parser = parse_count, default_value = "100")]
    pub n_max: u64,
    #[arg(long = "R", value_parser = parse_count, default_value = "1e4")]
    pub r: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Mobius,
    Phi,
    Dk,
    SigmaRatio,
    PhiRatio,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub kind: TableKind,
    #[arg(long, value_parser = parse_count)]
    pub limit: u64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Write the binary table format instead of CSV (requires --output).
    #[arg(long)]
    pub binary: bool,
}

/// Parses `1000`, `1e6` or `10^6` as a non-negative integer.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.parse().map_err(|_| format!("invalid count '{s}'"))?;
        let e: u32 = e.parse().map_err(|_| format!("invalid count '{s}'"))?;
        return b
            .checked_pow(e)
            .ok_or_else(|| format!("count '{s}' overflows"));
    }
    let v: f64 = s.parse().map_err(|_| format!("invalid count '{s}'"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

const EXPLAIN: &str = "\
csum       c_r(n) as a divisor sum over gcd(r, n), checked against the exponential-sum definition.
correlate  sum_{n<=N} f(n) g(n+h) for f, g in {sigma_s(n)/n^s, phi_s(n)/n^s} against N times the
           Parseval-type main term: sum_r f^(r) g^(r) phi(r) at h = 0, sum_r f^(r) g^(r) c_r(h)
           otherwise, or its closed forms zeta(s+1) zeta(t+1) sigma_{-(s+t+1)}(h) / zeta(s+t+2)
           (sigma pair) and the Euler product Delta(h) (phi pair).
usplit     splits the double Ramanujan series at rs <= U into A (exact inner sums) and B = rest,
           with A = C + D + O(U log U), D = O(N / U^delta) and the d_4 envelope for B.
lemma1     sum_{n<=N} c_r(n) c_s(n+h) = [r = s] N c_r(h) + O(rs log rs), exact integer residuals.
lemma2     |sum_{n<=N} c_r(n) c_s(n+h)| <= d(r) d(s) sqrt(rs N (N + h)), decided in integers.
averages   sum phi = 3x^2/pi^2 + O(x log x), sum d_4 = x (log x)^3 / 6 + O(x (log x)^2),
           M(x) = O(x exp(-c sqrt(log x))).
crh        sum_{r<=x} c_r(h) = sum_{d|h} d M(x/d), compared term by term, and its growth.
fit        least-squares exponent of |residual| in N against the error term
           O(N^{2/(1+2 delta)} (log N)^{(5+2 delta)/(1+2 delta)}).
expand     truncated expansions sum_{r<=R} f^(r) c_r(n) against the sieved functions.
table      sieved mu, phi, d_k, sigma_s(n)/n^s or phi_s(n)/n^s tables (CSV or binary).
";

struct Output {
    main: Box<dyn Write + Send>,
    plot: Option<BufWriter<File>>,
    format: OutputFormat,
    command: &'static str,
}

impl Output {
    fn header(&mut self, columns: &str) -> Result<()> {
        writeln!(
            self.main,
            "# ramanujan-parseval {} v{}",
            self.command, SCHEMA_VERSION
        )?;
        writeln!(self.main, "{columns}")?;
        Ok(())
    }

    fn csv(&mut self, columns: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
        self.header(columns)?;
        for row in rows {
            writeln!(self.main, "{row}")?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let wrapped = json!({
            "schema": format!("ramanujan-parseval {} v{}", self.command, SCHEMA_VERSION),
            "data": value,
        });
        serde_json::to_writer_pretty(&mut self.main, &wrapped)?;
        writeln!(self.main)?;
        Ok(())
    }

    fn plot(&mut self, series: &str, points: &[(f64, f64)]) -> Result<()> {
        if let Some(p) = self.plot.as_mut() {
            for (x, y) in points {
                writeln!(p, "{series},{x:?},{y:?}")?;
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.main.flush()?;
        if let Some(mut p) = self.plot.take() {
            p.flush()?;
        }
        Ok(())
    }
}

fn family(kind: FamilyArg, s: f64) -> Result<CoefficientFamily> {
    match kind {
        FamilyArg::Sigma => CoefficientFamily::sigma(s),
        FamilyArg::Phi => CoefficientFamily::phi(s),
    }
}

impl PairArgs {
    fn families(&self) -> Result<(CoefficientFamily, CoefficientFamily)> {
        if self.h > DEFAULT_MAX_SHIFT {
            return Err(domain(format!(
                "h = {} exceeds the shift limit {DEFAULT_MAX_SHIFT}",
                self.h
            )));
        }
        let f = family(self.family, self.s)?;
        let g = family(
            self.family_g.unwrap_or(self.family),
            self.t.unwrap_or(self.s),
        )?;
        Ok((f, g))
    }

    fn options(&self) -> PredictionOptions {
        PredictionOptions {
            r_max: self.r_max as usize,
            prime_limit: self.prime_limit,
            series_only: self.series_only,
        }
    }
}

fn lemma_summary(records: &[LemmaResidual], lemma1: bool) -> Result<(Summary, bool)> {
    let mut summary = Summary::default();
    if lemma1 {
        let st = lemma1_stability(records)?;
        summary
            .check("residuals_within_fitted_constant", st.holds())
            .constant("fitted_constant", st.constant)
            .constant("fit_N", st.n_fit as f64)
            .constant("max_ratio_at_larger_N", st.max_later_ratio);
        for (h, c) in &st.per_h {
            summary.constant(&format!("fitted_constant_h{h}"), *c);
        }
    } else {
        let all = records.iter().all(|r| r.within_bound == Some(true));
        let strict = records.iter().all(|r| r.strict == Some(true));
        let tight = records.iter().map(|r| r.ratio()).fold(0.0, f64::max);
        summary
            .check("bound_holds", all)
            .check("bound_holds_strictly", strict)
            .constant("max_ratio", tight);
    }
    let ok = if lemma1 {
        summary.checks["residuals_within_fitted_constant"]
    } else {
        summary.checks["bound_holds"]
    };
    Ok((summary, ok))
}

fn run_command(cmd: &Command, out: &mut Output, config: &SieveConfig) -> Result<bool> {
    match cmd {
        Command::Csum { r, n } => {
            if *r == 0 {
                return Err(domain("r must be at least 1"));
            }
            let v = ramanujan_sum(*r, *n);
            match out.format {
                OutputFormat::Csv => writeln!(out.main, "{v}")?,
                OutputFormat::Json => out.json(&json!({"r": r, "n": n, "value": v}))?,
            }
            Ok(true)
        }
        Command::Correlate(a) => {
            let (f, g) = a.pair.families()?;
            let reports = correlation_grid(&f, &g, a.pair.h, &a.n, &a.pair.options(), config)?;
            emit_reports(out, &reports)?;
            let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.n as f64, r.ratio())).collect();
            out.plot("ratio", &pts)?;
            Ok(true)
        }
        Command::Fit(a) => {
            let (f, g) = a.pair.families()?;
            let reports = correlation_grid(&f, &g, a.pair.h, &a.grid, &a.pair.options(), config)?;
            let delta = f.delta().min(g.delta());
            let threshold = 2.0 / (1.0 + 2.0 * delta) + a.slack;
            let stable = normalized_residual_stable(&reports);
            let (fit, exact) = match fit_error_exponent(&reports) {
                Ok(fit) => (Some(fit), false),
                Err(Error::ExactMatch) => (None, true),
                Err(e) => return Err(e),
            };
            let pass = exact || (fit.as_ref().is_some_and(|f| f.alpha <= threshold) && stable);
            match out.format {
                OutputFormat::Json => out.json(&json!({
                    "fit": fit,
                    "exact_match": exact,
                    "delta": delta,
                    "threshold": threshold,
                    "normalized_residual_stable": stable,
                    "pass": pass,
                    "reports": reports,
                }))?,
                OutputFormat::Csv => {
                    out.header("alpha,log_c,r_squared,delta,threshold,normalized_residual_stable,exact_match,pass")?;
                    let (al, lc, r2) = fit
                        .as_ref()
                        .map(|f| {
                            (
                                format!("{:?}", f.alpha),
                                format!("{:?}", f.log_c),
                                format!("{:?}", f.r_squared),
                            )
                        })
                        .unwrap_or_default();
                    writeln!(
                        out.main,
                        "{al},{lc},{r2},{delta},{threshold:?},{stable},{exact},{pass}"
                    )?;
                }
            }
            let pts: Vec<(f64, f64)> = reports
                .iter()
                .map(|r| (r.n as f64, r.residual.abs()))
                .collect();
            out.plot("abs_residual", &pts)?;
            Ok(pass)
        }
        Command::Usplit(a) => {
            let (f, g) = a.pair.families()?;
            let delta = f.delta().min(g.delta());
            let recomposed = |d: &USplitDiagnostics| match (d.recomposition_error, d.direct_sum) {
                (Some(e), Some(s)) => e <= 1e-6 * s.abs().max(1.0),
                _ => true,
            };
            if let [n] = a.n[..] {
                let u = match a.u {
                    Some(u) => u,
                    None => optimal_u(n as f64, delta)?,
                };
                let d = u_split_with(&f, &g, a.pair.h, n, u, a.r_cap, &a.pair.options(), config)?;
                match out.format {
                    OutputFormat::Csv => out.csv(USplitDiagnostics::CSV_HEADER, [d.csv_row()])?,
                    OutputFormat::Json => out.json(&d)?,
                }
                return Ok(recomposed(&d));
            }
            if a.u.is_some() {
                return Err(domain("--U applies to a single N; grids use the optimal U"));
            }
            let fit = usplit_envelopes(&f, &g, a.pair.h, &a.n, a.r_cap, &a.pair.options(), config)?;
            match out.format {
                OutputFormat::Csv => out.csv(
                    USplitDiagnostics::CSV_HEADER,
                    fit.diagnostics.iter().map(USplitDiagnostics::csv_row),
                )?,
                OutputFormat::Json => out.json(&fit)?,
            }
            let pts: Vec<(f64, f64)> = fit
                .diagnostics
                .iter()
                .map(|d| (d.n as f64, d.d.abs() / d.d_envelope))
                .collect();
            out.plot("d_ratio", &pts)?;
            Ok(fit.holds() && fit.diagnostics.iter().all(recomposed))
        }
        Command::Lemma1(a) | Command::Lemma2(a) => {
            let first = matches!(cmd, Command::Lemma1(_));
            let records = if first {
                lemma1_grid(a.r_max, a.s_max, &a.h, &a.n, config)?
            } else {
                lemma2_grid(a.r_max, a.s_max, &a.h, &a.n, config)?
            };
            let (summary, ok) = lemma_summary(&records, first)?;
            match out.format {
                OutputFormat::Csv => out.csv(
                    LemmaResidual::CSV_HEADER,
                    records.iter().map(LemmaResidual::csv_row),
                )?,
                OutputFormat::Json => out.json(&json!({"summary": summary, "records": records}))?,
            }
            Ok(ok)
        }
        Command::Averages { x } => {
            let rep = average_order_checks(x, config)?;
            match out.format {
                OutputFormat::Csv => out.csv(
                    crate::analysis::AverageOrderReport::CSV_HEADER,
                    rep.csv_rows(),
                )?,
                OutputFormat::Json => {
                    let mut s = Summary::default();
                    s.check("phi_bounded", rep.phi_bounded)
                        .check("d4_bounded", rep.d4_bounded)
                        .check("mertens_bounded", rep.mertens_bounded)
                        .constant("mertens_c", rep.mertens_c);
                    out.json(&json!({"summary": s, "rows": rep.rows}))?
                }
            }
            let series = |f: fn(&crate::analysis::AverageOrderRow) -> f64| -> Vec<(f64, f64)> {
                rep.rows.iter().map(|r| (r.x as f64, f(r))).collect()
            };
            out.plot("phi_ratio", &series(|r| r.phi_ratio))?;
            out.plot("d4_ratio", &series(|r| r.d4_ratio))?;
            out.plot("mertens_ratio", &series(|r| r.mertens_ratio))?;
            Ok(rep.passed())
        }
        Command::Crh { h, x } => {
            let rep = crh_growth_check(h, x, config)?;
            match out.format {
                OutputFormat::Csv => {
                    out.csv(crate::analysis::CrhReport::CSV_HEADER, rep.csv_rows())?
                }
                OutputFormat::Json => out.json(&rep)?,
            }
            for hv in rep.constants.keys() {
                let pts: Vec<(f64, f64)> = rep
                    .rows
                    .iter()
                    .filter(|r| r.h == *hv)
                    .map(|r| (r.x as f64, r.growth_ratio))
                    .collect();
                out.plot(&format!("growth_h{hv}"), &pts)?;
            }
            Ok(rep.routes_agree)
        }
        Command::Expand(a) => {
            let fam = family(a.family, a.s)?;
            if a.n_max == 0 {
                return Err(domain("n-max must be at least 1"));
            }
            let eval = ExpansionEvaluator::new(&fam, a.r as usize)?;
            let table = fam
                .sieve_table(a.n_max as usize, config)
                .expect("built-in families can be sieved")?;
            let mut rows = Vec::with_capacity(a.n_max as usize);
            let mut ok = true;
            for n in 1..=a.n_max {
                let e = eval.evaluate(n)?;
                let exact = table.get(n as usize);
                let err = (e.value - exact).abs();
                let within = err <= e.tail_bound;
                ok &= within;
                rows.push(json!({
                    "n": n,
                    "expansion": e.value,
                    "sieved": exact,
                    "abs_error": err,
                    "tail_bound": e.tail_bound,
                    "within": within,
                }));
            }
            match out.format {
                OutputFormat::Csv => out.csv(
                    "n,expansion,sieved,abs_error,tail_bound,within",
                    rows.iter().map(|r| {
                        format!(
                            "{},{:?},{:?},{:?},{:?},{}",
                            r["n"],
                            r["expansion"].as_f64().unwrap(),
                            r["sieved"].as_f64().unwrap(),
                            r["abs_error"].as_f64().unwrap(),
                            r["tail_bound"].as_f64().unwrap(),
                            r["within"]
                        )
                    }),
                )?,
                OutputFormat::Json => out.json(&rows)?,
            }
            Ok(ok)
        }
        Command::Table(a) => {
            let limit = a.limit as usize;
            let table = match a.kind {
                TableKind::Mobius => config.mobius(limit)?,
                TableKind::Phi => config.euler_phi(limit)?,
                TableKind::Dk => config.divisor_k(a.k, limit)?,
                TableKind::SigmaRatio => config.sigma_ratio(a.s, limit)?,
                TableKind::PhiRatio => config.phi_ratio(a.s, limit)?,
            };
            if a.binary {
                format::write_binary(&table, &mut out.main)?;
            } else if out.format == OutputFormat::Json {
                out.json(&table.real_values()[1..].to_vec())?;
            } else {
                writeln!(out.main, "# ramanujan-parseval table v{SCHEMA_VERSION}")?;
                format::write_csv(&table, &mut out.main)?;
            }
            Ok(true)
        }
    }
}

fn emit_reports(out: &mut Output, reports: &[CorrelationReport]) -> Result<()> {
    match out.format {
        OutputFormat::Csv => out.csv(
            CorrelationReport::CSV_HEADER,
            reports.iter().map(|r| r.csv_row()),
        ),
        OutputFormat::Json => out.json(&reports),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Csum { .. } => "csum",
        Command::Correlate(_) => "correlate",
        Command::Usplit(_) => "usplit",
        Command::Lemma1(_) => "lemma1",
        Command::Lemma2(_) => "lemma2",
        Command::Averages { .. } => "averages",
        Command::Crh { .. } => "crh",
        Command::Fit(_) => "fit",
        Command::Expand(_) => "expand",
        Command::Table(_) => "table",
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let Some(cmd) = &cli.command else {
        return Err(domain("no subcommand given; see --help"));
    };
    if let Command::Table(t) = cmd {
        if t.binary && cli.output.is_none() {
            return Err(domain("--binary needs --output"));
        }
    }
    let config = SieveConfig::with_budget(cli.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET));
    let main: Box<dyn Write + Send> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let plot = match &cli.plot {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "series,x,y")?;
            Some(w)
        }
        None => None,
    };
    let mut out = Output {
        main,
        plot,
        format: cli.format,
        command: command_name(cmd),
    };
    let ok = match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build()
            .map_err(|e| domain(format!("cannot start {t} threads: {e}")))?
            .install(|| run_command(cmd, &mut out, &config))?,
        None => run_command(cmd, &mut out, &config)?,
    };
    out.finish()?;
    Ok(ok)
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.explain {
        print!("{EXPLAIN}");
        return EXIT_OK;
    }
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("invariant check failed");
            EXIT_INVARIANT
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_parse() {
        assert_eq!(parse_count("1000"), Ok(1000));
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("10^4"), Ok(10_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["parseval", "csum", "--r"]), EXIT_USAGE);
        assert_eq!(run(["parseval", "nonsense"]), EXIT_USAGE);
        assert_eq!(
            run(["parseval", "csum", "--r", "0", "--n", "3"]),
            EXIT_USAGE
        );
        assert_eq!(run(["parseval", "--help"]), EXIT_OK);
    }
}
