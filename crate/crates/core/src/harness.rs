//! Monte Carlo experiments: bias/RMSE tables, contamination study, report
//! rendering and the table protocols.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::copula::{CopulaModel, Family};
use crate::dependence::{pseudo_observations, Direction};
use crate::error::{Error, Result};
use crate::estimators::{estimate, Method};
use crate::rng::{replication_seed, rng_from_seed, stream_seed};

/// Stream index of the mixture indicators in [`contaminated_sample`].
const MIXTURE_STREAM: u64 = 0x00C0_FFEE;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub true_params: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub methods: Vec<Method>,
    /// Mixing weight `ε` of the contaminant.
    pub contamination: f64,
    pub contaminant_family: Family,
    pub contaminant_params: Vec<f64>,
    pub base_seed: u64,
    pub direction: Direction,
}

impl ExperimentConfig {
    pub fn new(family: Family, true_params: Vec<f64>) -> Self {
        Self {
            family,
            true_params,
            sample_sizes: DESK_SIZES.to_vec(),
            replications: DESK_REPLICATIONS,
            methods: Method::ALL.to_vec(),
            contamination: 0.0,
            contaminant_family: Family::Product,
            contaminant_params: vec![],
            base_seed: 0,
            direction: Direction::D12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        CopulaModel::new(self.family, &self.true_params)
            .map_err(|e| Error::Config(format!("true_params: {e}")))?;
        CopulaModel::new(self.contaminant_family, &self.contaminant_params)
            .map_err(|e| Error::Config(format!("contaminant_params: {e}")))?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.iter().any(|&n| n < 2) {
            return Err(Error::Config(
                "sample_sizes must be nonempty and each ≥ 2".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if !(0.0..1.0).contains(&self.contamination) {
            return Err(Error::Config(format!(
                "contamination {} not in [0, 1)",
                self.contamination
            )));
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut family = None;
        let mut true_params = None;
        let mut cfg = Self::new(Family::Product, vec![]);
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            let ctx = |e: Error| Error::Config(format!("line {}: {key}: {e}", lineno + 1));
            match key {
                "family" => family = Some(value.parse::<Family>().map_err(ctx)?),
                "true_params" => true_params = Some(parse_list::<f64>(value).map_err(ctx)?),
                "sample_sizes" => cfg.sample_sizes = parse_list(value).map_err(ctx)?,
                "replications" => cfg.replications = parse_one(value).map_err(ctx)?,
                "methods" => cfg.methods = parse_list(value).map_err(ctx)?,
                "contamination" => cfg.contamination = parse_one(value).map_err(ctx)?,
                "contaminant_family" => cfg.contaminant_family = value.parse().map_err(ctx)?,
                "contaminant_params" => cfg.contaminant_params = parse_list(value).map_err(ctx)?,
                "base_seed" => cfg.base_seed = parse_one(value).map_err(ctx)?,
                "direction" => cfg.direction = value.parse().map_err(ctx)?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.family = family.ok_or_else(|| Error::Config("missing key `family`".into()))?;
        cfg.true_params =
            true_params.ok_or_else(|| Error::Config("missing key `true_params`".into()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_one<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| Error::Config(format!("cannot parse `{s}`: {e}")))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(parse_one).collect()
}

/// Summary of one `(method, n, parameter)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub method: Method,
    pub n: usize,
    pub param: String,
    pub bias: f64,
    pub rmse: f64,
    /// Replications excluded because the estimator did not converge.
    pub fails: usize,
    /// Total estimator wall time over all replications.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub cells: Vec<ReportCell>,
}

impl ExperimentReport {
    pub fn cell(&self, method: Method, n: usize, param: &str) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.n == n && c.param == param)
    }

    /// Total wall time of `method` over every `n`, counted once per replication.
    pub fn method_seconds(&self, method: Method) -> f64 {
        let mut seen = HashSet::new();
        self.cells
            .iter()
            .filter(|c| c.method == method && seen.insert(c.n))
            .map(|c| c.seconds)
            .sum()
    }
}

/// Parameter labels used in reports.
pub fn param_names(family: Family) -> Vec<String> {
    let names: &[&str] = match family {
        Family::Product => &[],
        Family::Fgm => &["alpha"],
        Family::FgmIter1 => &["alpha1", "alpha2"],
        Family::FgmIter2 => &["alpha1", "alpha2", "alpha3"],
        Family::Gumbel => &["beta"],
        Family::Gumbel2 => &["beta1", "beta2"],
        Family::Clayton | Family::Frank => &["theta"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

/// `n` pairs from the mixture `(1 − ε) C + ε C*`.
///
/// Mixture indicators come from a separate stream, so `ε = 0` reproduces
/// `copula::sample(true_model, n, seed)` bit for bit.
pub fn contaminated_sample(
    true_model: &CopulaModel,
    contaminant: &CopulaModel,
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidInput(format!("ε = {epsilon} not in [0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut coin = rng_from_seed(stream_seed(seed, MIXTURE_STREAM));
    (0..n)
        .map(|_| {
            if epsilon > 0.0 && coin.gen::<f64>() < epsilon {
                contaminant.draw(&mut rng)
            } else {
                true_model.draw(&mut rng)
            }
        })
        .collect()
}

struct Outcome {
    estimate: Option<Vec<f64>>,
    seconds: f64,
}

/// Bias and RMSE of each requested estimator over `N` replications per sample size.
///
/// Replication `i` at size `n` uses seed `base_seed ⊕ hash(n, i)` and the
/// per-replication results are reduced in index order, so the report does not
/// depend on the number of threads. Timings are the only nondeterministic field.
pub fn run_bias_rmse_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let truth = CopulaModel::new(cfg.family, &cfg.true_params)?;
    let contaminant = CopulaModel::new(cfg.contaminant_family, &cfg.contaminant_params)?;
    let names = param_names(cfg.family);
    let mut report = ExperimentReport::default();
    for &n in &cfg.sample_sizes {
        let runs: Vec<Vec<Outcome>> = (0..cfg.replications)
            .into_par_iter()
            .map(|i| {
                let seed = replication_seed(cfg.base_seed, n, i);
                let data = contaminated_sample(&truth, &contaminant, cfg.contamination, n, seed);
                let ps = data.and_then(|d| pseudo_observations(&d));
                cfg.methods
                    .iter()
                    .map(|&m| match &ps {
                        Ok(ps) => match estimate(ps, cfg.family, m, cfg.direction) {
                            Ok(r) => Outcome {
                                estimate: r.status.is_usable().then_some(r.estimate),
                                seconds: r.wall_time,
                            },
                            Err(e) => {
                                log::debug!("{m} failed at n={n}, replication {i}: {e}");
                                Outcome {
                                    estimate: None,
                                    seconds: 0.0,
                                }
                            }
                        },
                        Err(_) => Outcome {
                            estimate: None,
                            seconds: 0.0,
                        },
                    })
                    .collect()
            })
            .collect();
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let outcomes: Vec<&Outcome> = runs.iter().map(|r| &r[mi]).collect();
            let seconds: f64 = outcomes.iter().map(|o| o.seconds).sum();
            let usable: Vec<&Vec<f64>> = outcomes
                .iter()
                .filter_map(|o| o.estimate.as_ref())
                .collect();
            let fails = outcomes.len() - usable.len();
            if fails > 0 {
                log::info!(
                    "{method}, n={n}: {fails} of {} replications excluded",
                    outcomes.len()
                );
            }
            for (k, name) in names.iter().enumerate() {
                let (bias, rmse) = bias_rmse(usable.iter().map(|e| e[k]), cfg.true_params[k]);
                report.cells.push(ReportCell {
                    method,
                    n,
                    param: name.clone(),
                    bias,
                    rmse,
                    fails,
                    seconds,
                });
            }
        }
    }
    Ok(report)
}

/// `(N⁻¹ Σ (θ̂ᵢ − θ), (N⁻¹ Σ (θ̂ᵢ − θ)²)^{1/2})`; NaN when nothing converged.
pub fn bias_rmse(estimates: impl Iterator<Item = f64>, truth: f64) -> (f64, f64) {
    let (mut count, mut sum, mut sq) = (0usize, 0.0, 0.0);
    for e in estimates {
        let d = e - truth;
        count += 1;
        sum += d;
        sq += d * d;
    }
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let bias = sum / count as f64;
    // guard the last ulp so that rmse ≥ |bias| always holds
    let rmse = (sq / count as f64).sqrt().max(bias.abs());
    (bias, rmse)
}

/// Reports for each contamination level of a study.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContaminationStudy {
    pub levels: Vec<(f64, ExperimentReport)>,
}

impl ContaminationStudy {
    pub fn report(&self, epsilon: f64) -> Option<&ExperimentReport> {
        self.levels
            .iter()
            .find(|(e, _)| (e - epsilon).abs() < 1e-12)
            .map(|(_, r)| r)
    }
}

/// Reruns `cfg` at every contamination level, reusing the same replication
/// seeds so that levels differ only by the mixture.
pub fn run_contamination_study(
    cfg: &ExperimentConfig,
    levels: &[f64],
) -> Result<ContaminationStudy> {
    let mut study = ContaminationStudy::default();
    for &eps in levels {
        let mut c = cfg.clone();
        c.contamination = eps;
        study.levels.push((eps, run_bias_rmse_experiment(&c)?));
    }
    Ok(study)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

const COLUMNS: [&str; 7] = ["method", "n", "param", "bias", "rmse", "fails", "seconds"];

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&COLUMNS.join(","));
            out.push('\n');
            for c in &report.cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{:?},{:?},{},{:?}",
                    c.method, c.n, c.param, c.bias, c.rmse, c.fails, c.seconds
                );
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
            for c in &report.cells {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.3} | {:.3} | {} | {:.3} |",
                    c.method, c.n, c.param, c.bias, c.rmse, c.fails, c.seconds
                );
            }
        }
    }
    out
}

/// Inverse of [`render_report`] in CSV format.
pub fn parse_report_csv(text: &str) -> Result<ExperimentReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != COLUMNS {
        return Err(Error::InvalidInput(format!(
            "unexpected report header {header:?}"
        )));
    }
    let mut report = ExperimentReport::default();
    for record in rdr.records() {
        let r = record.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        report.cells.push(ReportCell {
            method: r[0].parse()?,
            n: parse_one(&r[1])?,
            param: r[2].to_string(),
            bias: parse_one(&r[3])?,
            rmse: parse_one(&r[4])?,
            fails: parse_one(&r[5])?,
            seconds: parse_one(&r[6])?,
        });
    }
    Ok(report)
}

/// Renders a contamination study as one section per level.
pub fn render_study(study: &ContaminationStudy, format: ReportFormat) -> String {
    let mut out = String::new();
    for (eps, report) in &study.levels {
        match format {
            ReportFormat::Csv => {
                let _ = writeln!(out, "# epsilon={eps}");
            }
            ReportFormat::Markdown => {
                let _ = writeln!(out, "\n### ε = {:.0}%\n", eps * 100.0);
            }
        }
        out.push_str(&render_report(report, format));
    }
    out
}

// ---------------------------------------------------------------------------
// table protocols

pub const DESK_REPLICATIONS: usize = 200;
pub const DESK_SIZES: [usize; 3] = [30, 100, 500];
pub const FULL_REPLICATIONS: usize = 1000;
pub const FULL_SIZES: [usize; 4] = [30, 50, 100, 500];
pub const CONTAMINATION_LEVELS: [f64; 5] = [0.0, 0.05, 0.10, 0.20, 0.30];
pub const CONTAMINATION_N: usize = 40;
pub const DESK_CONTAMINATION_REPLICATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(Error::Config(format!(
                "unknown scale `{other}` (desk, full)"
            ))),
        }
    }
}

/// True parameters of the weak, moderate and strong dependence designs.
pub const FGM_ITER1_POINTS: [[f64; 2]; 3] = [[0.1, 0.0], [0.4, 0.9], [0.941, 1.445]];
pub const GUMBEL2_POINTS: [[f64; 2]; 3] = [[1.0, 0.001], [1.4, 0.2], [2.5, 1.0]];

#[derive(Debug, Clone, PartialEq)]
pub enum TableProtocol {
    /// Bias/RMSE of all four estimators at one design point.
    Comparison(ExperimentConfig),
    /// The contamination study at the given levels.
    Contamination(ExperimentConfig, Vec<f64>),
}

/// Protocol of tables 3–9: tables 3–5 are the one-iterated FGM designs,
/// 6–8 the two-parameter Gumbel designs (weak, moderate, strong), and 9 the
/// contamination study.
pub fn table_protocol(table: u8, scale: Scale, seed: u64) -> Result<TableProtocol> {
    let (reps, sizes) = match scale {
        Scale::Desk => (DESK_REPLICATIONS, DESK_SIZES.to_vec()),
        Scale::Full => (FULL_REPLICATIONS, FULL_SIZES.to_vec()),
    };
    let design = |family: Family, params: &[f64]| {
        let mut cfg = ExperimentConfig::new(family, params.to_vec());
        cfg.replications = reps;
        cfg.sample_sizes = sizes.clone();
        cfg.base_seed = seed;
        cfg
    };
    match table {
        3..=5 => Ok(TableProtocol::Comparison(design(
            Family::FgmIter1,
            &FGM_ITER1_POINTS[(table - 3) as usize],
        ))),
        6..=8 => Ok(TableProtocol::Comparison(design(
            Family::Gumbel2,
            &GUMBEL2_POINTS[(table - 6) as usize],
        ))),
        9 => {
            let mut cfg = design(Family::FgmIter1, &FGM_ITER1_POINTS[1]);
            cfg.sample_sizes = vec![CONTAMINATION_N];
            cfg.replications = match scale {
                Scale::Desk => DESK_CONTAMINATION_REPLICATIONS,
                Scale::Full => FULL_REPLICATIONS,
            };
            Ok(TableProtocol::Contamination(
                cfg,
                CONTAMINATION_LEVELS.to_vec(),
            ))
        }
        other => Err(Error::Config(format!(
            "table must be in 3..=9, got {other}"
        ))),
    }
}
