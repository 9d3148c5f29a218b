//! Seeded Monte Carlo sweeps over `(n, kappa)` with `M = round(e^(n / kappa))`.
//!
//! Every trial owns a PRNG stream `(cell << 32) | trial` of the sweep seed, so
//! a record depends only on the configuration. Trials run in parallel and are
//! reduced in trial order.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{count_dp_with_budget, exists_perfect_with_budget, DpBudget};
use crate::error::{Error, Result};
use crate::moments::thresholds;
use crate::numeric::CompensatedSum;
use crate::problem::{divisibility_check, kappa_of, Instance};

/// Tolerance for sitting on an excluded boundary point.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Largest `M` a sweep cell may use; keeps `M` exactly representable.
pub const MAX_BOUND: u64 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Exists,
    Count,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exists" => Ok(Self::Exists),
            "count" => Ok(Self::Count),
            _ => Err(Error::Config(format!("unknown sweep mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub nu: usize,
    pub n_list: Vec<usize>,
    pub kappa_list: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub mode: SweepMode,
    pub condition_on_divisibility: bool,
    pub budget: DpBudget,
}

impl SweepConfig {
    pub fn new(nu: usize, n_list: Vec<usize>, kappa_list: Vec<f64>) -> Self {
        Self {
            nu,
            n_list,
            kappa_list,
            trials: 100,
            seed: 0,
            mode: SweepMode::Exists,
            condition_on_divisibility: true,
            budget: DpBudget::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.nu < 2 {
            return bad(format!("nu must be at least 2, got {}", self.nu));
        }
        if self.n_list.is_empty() || self.kappa_list.is_empty() {
            return bad("n and kappa lists must be non-empty".into());
        }
        if self.trials == 0 || self.trials > u32::MAX as u64 {
            return bad(format!("trials must lie in [1, 2^32), got {}", self.trials));
        }
        if self.n_list.len() * self.kappa_list.len() > u32::MAX as usize {
            return bad("too many sweep cells".into());
        }
        for &n in &self.n_list {
            if n == 0 {
                return bad("n must be positive".into());
            }
            for &kappa in &self.kappa_list {
                cell_bound(n, kappa)?;
            }
        }
        Ok(())
    }
}

/// `M = round(e^(n / kappa))` with range checks.
pub fn cell_bound(n: usize, kappa: f64) -> Result<u64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Config(format!(
            "kappa must be positive and finite, got {kappa}"
        )));
    }
    let m = (n as f64 / kappa).exp().round();
    if m > MAX_BOUND as f64 {
        return Err(Error::Config(format!(
            "M = round(exp({n}/{kappa})) exceeds 2^53"
        )));
    }
    let m = m as u64;
    if m.checked_mul(n as u64).is_none() {
        return Err(Error::Config(format!(
            "n * M overflows for n = {n}, M = {m}"
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeLabel {
    Subcritical,
    MeanExponential,
    SecondMoment,
    ExcludedBoundary,
    Unknown,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Subcritical => "SUBCRITICAL",
            Self::MeanExponential => "MEAN_EXPONENTIAL",
            Self::SecondMoment => "SECOND_MOMENT",
            Self::ExcludedBoundary => "EXCLUDED_BOUNDARY",
            Self::Unknown => "UNKNOWN",
        })
    }
}

/// Regime of `kappa` according to the threshold set alone.
///
/// Threshold values themselves, and the window between `2 / ln nu` and
/// `2 / eta(nu)` for `nu >= 4`, are `UNKNOWN`.
pub fn label_regime(nu: usize, kappa: f64) -> Result<RegimeLabel> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain(format!(
            "kappa must be positive and finite, got {kappa}"
        )));
    }
    let th = thresholds(nu)?;
    if th
        .kappa_excluded
        .iter()
        .any(|&x| (kappa - x).abs() <= BOUNDARY_TOL)
    {
        return Ok(RegimeLabel::ExcludedBoundary);
    }
    Ok(if kappa < th.kappa_exist {
        RegimeLabel::Subcritical
    } else if kappa > th.kappa_second {
        RegimeLabel::SecondMoment
    } else if kappa > th.kappa_mean_lo {
        RegimeLabel::MeanExponential
    } else {
        RegimeLabel::Unknown
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetFlag {
    Ok,
    /// Count mode could not count exactly; the cell was rerun as existence only.
    CountFallbackExists,
    /// Even existence was infeasible; no solver statistics are reported.
    BudgetExceeded,
}

impl fmt::Display for BudgetFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::CountFallbackExists => "count_fallback_exists",
            Self::BudgetExceeded => "budget_exceeded",
        })
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub nu: usize,
    pub n: usize,
    pub kappa: f64,
    /// `n / ln M` for the rounded `M`; absent when `M = 1`.
    pub kappa_eff: Option<f64>,
    pub M: u64,
    pub seed: u64,
    pub trials: u64,
    pub divisible_trials: u64,
    /// Absent when the cell exceeded the solver budget.
    pub exists_count: Option<u64>,
    pub mean_Z: Option<f64>,
    /// Unbiased sample variance.
    pub var_Z: Option<f64>,
    pub regime_label: RegimeLabel,
    pub budget_flag: BudgetFlag,
}

impl SweepRecord {
    /// Denominator of the exists fraction.
    pub fn denominator(&self, conditioned: bool) -> u64 {
        if conditioned {
            self.divisible_trials
        } else {
            self.trials
        }
    }

    pub fn exists_fraction(&self, conditioned: bool) -> Option<f64> {
        let d = self.denominator(conditioned);
        match self.exists_count {
            Some(k) if d > 0 => Some(k as f64 / d as f64),
            _ => None,
        }
    }

    pub fn divisible_fraction(&self) -> f64 {
        self.divisible_trials as f64 / self.trials as f64
    }
}

enum Trial {
    NotDivisible,
    Exists(bool),
    Count(BigUint),
}

fn run_trial(inst: &Instance, nu: usize, mode: SweepMode, budget: DpBudget) -> Result<Trial> {
    if !divisibility_check(inst, nu)?.divisible {
        return Ok(Trial::NotDivisible);
    }
    Ok(match mode {
        SweepMode::Exists => Trial::Exists(exists_perfect_with_budget(inst, nu, budget)?),
        SweepMode::Count => Trial::Count(count_dp_with_budget(inst, nu, budget)?.z),
    })
}

fn run_cell_trials(
    cfg: &SweepConfig,
    cell: u64,
    n: usize,
    bound: u64,
    mode: SweepMode,
) -> Result<Vec<Trial>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let inst = Instance::generate_stream(n, bound, cfg.seed, (cell << 32) | t)?;
            run_trial(&inst, cfg.nu, mode, cfg.budget)
        })
        .collect()
}

fn mean_var(zs: &[f64]) -> (Option<f64>, Option<f64>) {
    if zs.is_empty() {
        return (None, None);
    }
    let mut s = CompensatedSum::default();
    zs.iter().for_each(|&z| s.add(z));
    let mean = s.value() / zs.len() as f64;
    if zs.len() < 2 {
        return (Some(mean), None);
    }
    let mut q = CompensatedSum::default();
    zs.iter().for_each(|&z| q.add((z - mean) * (z - mean)));
    (Some(mean), Some(q.value() / (zs.len() - 1) as f64))
}

fn run_cell(cfg: &SweepConfig, cell: u64, n: usize, kappa: f64) -> Result<SweepRecord> {
    let bound = cell_bound(n, kappa)?;
    let regime_label = if cfg.nu >= 3 {
        label_regime(cfg.nu, kappa)?
    } else {
        RegimeLabel::Unknown
    };
    let mut record = SweepRecord {
        nu: cfg.nu,
        n,
        kappa,
        kappa_eff: kappa_of(n, bound),
        M: bound,
        seed: cfg.seed,
        trials: cfg.trials,
        divisible_trials: 0,
        exists_count: None,
        mean_Z: None,
        var_Z: None,
        regime_label,
        budget_flag: BudgetFlag::Ok,
    };

    let mut outcome = run_cell_trials(cfg, cell, n, bound, cfg.mode);
    if cfg.mode == SweepMode::Count && matches!(&outcome, Err(e) if e.is_budget()) {
        record.budget_flag = BudgetFlag::CountFallbackExists;
        outcome = run_cell_trials(cfg, cell, n, bound, SweepMode::Exists);
    }
    let trials = match outcome {
        Ok(t) => t,
        Err(e) if e.is_budget() => {
            record.budget_flag = BudgetFlag::BudgetExceeded;
            // divisibility needs no solver
            record.divisible_trials = (0..cfg.trials)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let inst = Instance::generate_stream(n, bound, cfg.seed, (cell << 32) | t)?;
                    Ok(divisibility_check(&inst, cfg.nu)?.divisible as u64)
                })
                .sum::<Result<u64>>()?;
            return Ok(record);
        }
        Err(e) => return Err(e),
    };

    let mut exists = 0u64;
    let mut zs = Vec::new();
    for t in &trials {
        match t {
            Trial::NotDivisible => {
                if !cfg.condition_on_divisibility {
                    zs.push(0.0);
                }
            }
            Trial::Exists(found) => {
                record.divisible_trials += 1;
                exists += *found as u64;
            }
            Trial::Count(z) => {
                record.divisible_trials += 1;
                exists += !z.is_zero() as u64;
                zs.push(z.to_f64().unwrap_or(f64::INFINITY));
            }
        }
    }
    record.exists_count = Some(exists);
    if record.budget_flag == BudgetFlag::Ok && cfg.mode == SweepMode::Count {
        (record.mean_Z, record.var_Z) = mean_var(&zs);
    }
    Ok(record)
}

/// One record per `(n, kappa)` cell, `n`-major in list order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.n_list.len() * cfg.kappa_list.len());
    for (i, &n) in cfg.n_list.iter().enumerate() {
        for (j, &kappa) in cfg.kappa_list.iter().enumerate() {
            let cell = (i * cfg.kappa_list.len() + j) as u64;
            out.push(run_cell(cfg, cell, n, kappa)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown output format {s:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "nu",
    "n",
    "kappa",
    "kappa_eff",
    "M",
    "seed",
    "trials",
    "divisible_trials",
    "exists_count",
    "mean_Z",
    "var_Z",
    "regime_label",
    "budget_flag",
];

pub fn write_csv<W: Write>(out: W, records: &[SweepRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    // written by hand so that an empty sweep still gets a header
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<SweepRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_json<W: Write>(mut out: W, records: &[SweepRecord]) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n").map_err(serde_json::Error::io)
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn emit(records: &[SweepRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let out = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(out, records).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        }),
        OutputFormat::Json => write_json(out, records).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        }),
    }
}

pub fn load_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_csv(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Option<(f64, f64)> {
    if n == 0 || successes > n {
        return None;
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// Adjacent cells at equal `n` whose exists fraction drops as `kappa` grows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityFlag {
    pub n: usize,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub fraction_lo: f64,
    pub fraction_hi: f64,
}

/// Flags drops in the exists fraction whose 95% Wilson intervals are disjoint.
/// A flag is informational: sampling noise can still produce one.
pub fn monotonicity_probe(records: &[SweepRecord], conditioned: bool) -> Vec<MonotonicityFlag> {
    const Z95: f64 = 1.959_963_984_540_054;
    let mut by_n: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.exists_count.is_some())
        .collect();
    by_n.sort_by(|a, b| a.n.cmp(&b.n).then(a.kappa.total_cmp(&b.kappa)));
    let mut flags = Vec::new();
    for pair in by_n.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if lo.n != hi.n {
            continue;
        }
        let ci =
            |r: &SweepRecord| wilson_interval(r.exists_count?, r.denominator(conditioned), Z95);
        let (Some(fl), Some(fh)) = (
            lo.exists_fraction(conditioned),
            hi.exists_fraction(conditioned),
        ) else {
            continue;
        };
        if let (Some((_, hi_upper)), Some((lo_lower, _))) = (ci(hi), ci(lo)) {
            if fh < fl && hi_upper < lo_lower {
                flags.push(MonotonicityFlag {
                    n: lo.n,
                    kappa_lo: lo.kappa,
                    kappa_hi: hi.kappa,
                    fraction_lo: fl,
                    fraction_hi: fh,
                });
            }
        }
    }
    flags
}
