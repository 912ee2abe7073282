//! Monte-Carlo trials, example reproduction and result serialization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{
    run_max_cb, run_maximal_eliminator, run_unified_arm, unified_sample_count, AlgorithmError,
    MaxCbConfig, PacParams,
};
use crate::bandit_env::{BanditInstance, InstanceError, RunResult};
use crate::bounds::{case_comparison, BoundReport, Verdict};
use crate::reward_models::{RewardDistribution, TailParams};
use crate::rng::{trial_rng, trial_seed};
use crate::stats::{three_sigma_upper, wilson_interval, Z_95};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_MAX_SAMPLES: u64 = 1_000_000_000;
/// ε₀ used for the reference examples, which leave it unstated.
pub const EXAMPLE_EPS0: f64 = 25.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("unified arm needs {required} samples per trial, above the cap of {cap}; raise --max-samples to run it")]
    BudgetExceeded { required: u64, cap: u64 },
    #[error("trial {trial} failed: {message}")]
    TrialFailed {
        trial: u64,
        message: String,
        /// Trials that finished, in trial order.
        completed: Vec<TrialRecord>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MaxCb,
    MaximalEliminator,
    UnifiedArm,
}

impl Algorithm {
    pub fn run<R: rand::Rng + ?Sized>(
        self,
        instance: &BanditInstance,
        pac: &PacParams,
        rng: &mut R,
    ) -> Result<RunResult, AlgorithmError> {
        match self {
            Self::MaxCb => run_max_cb(instance, pac, rng),
            Self::MaximalEliminator => run_maximal_eliminator(instance, pac, rng),
            Self::UnifiedArm => run_unified_arm(instance, pac, rng),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec<'a> {
    pub instance: &'a BanditInstance,
    pub pac: PacParams,
    pub algorithm: Algorithm,
    pub trials: u64,
    pub master_seed: u64,
    pub workers: usize,
    /// Per-trial sample budget for the unified arm.
    pub max_samples: u64,
}

impl<'a> ExperimentSpec<'a> {
    pub fn new(instance: &'a BanditInstance, pac: PacParams, algorithm: Algorithm) -> Self {
        Self {
            instance,
            pac,
            algorithm,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            workers: 1,
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }
}

/// One row of the per-trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    #[serde(rename = "V")]
    pub value: f64,
    #[serde(rename = "T")]
    pub total_samples: u64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessReport {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub trials: u64,
    pub master_seed: u64,
    pub eps: f64,
    pub delta: f64,
    pub k_size: usize,
    pub mu_star: f64,
    pub successes: u64,
    /// Fraction of trials with `V > μ* − ε`.
    pub success_rate: f64,
    pub wilson_ci_95: [f64; 2],
    pub mean_t: f64,
    pub max_t: u64,
    /// Pathwise cap on `T`, when the algorithm has one.
    pub t_cap: Option<u64>,
    pub bound_violations: u64,
    pub passed: bool,
    pub per_trial_csv_path: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TrialsOutcome {
    pub report: CorrectnessReport,
    pub records: Vec<TrialRecord>,
}

fn t_cap(spec: &ExperimentSpec) -> Result<Option<u64>, AlgorithmError> {
    let inst = spec.instance;
    Ok(match spec.algorithm {
        Algorithm::MaxCb => {
            let cfg = MaxCbConfig::new(inst.len(), inst.tail(), &spec.pac, true)?;
            Some(cfg.total_cap(inst.len(), inst.tail(), &spec.pac)?)
        }
        Algorithm::UnifiedArm => Some(unified_sample_count(inst.len(), inst.tail(), &spec.pac)?),
        Algorithm::MaximalEliminator => None,
    })
}

/// Runs `spec.trials` independent trials on up to `spec.workers` threads.
/// Trial `i` draws from a stream seeded by `(master_seed, i)` alone, and
/// results are gathered in trial order, so the report does not depend on
/// scheduling.
pub fn run_trials(spec: &ExperimentSpec) -> Result<TrialsOutcome, HarnessError> {
    if spec.trials == 0 {
        return Err(HarnessError::InvalidSpec(
            "trials must be at least 1".into(),
        ));
    }
    if spec.workers == 0 {
        return Err(HarnessError::InvalidSpec(
            "workers must be at least 1".into(),
        ));
    }
    if spec.instance.is_empty() {
        return Err(HarnessError::Instance(InstanceError::Empty));
    }
    if spec.algorithm == Algorithm::UnifiedArm {
        let required = unified_sample_count(spec.instance.len(), spec.instance.tail(), &spec.pac)?;
        if required > spec.max_samples {
            return Err(HarnessError::BudgetExceeded {
                required,
                cap: spec.max_samples,
            });
        }
    }
    let cap = t_cap(spec)?;
    let mu_star = spec.instance.mu_star();
    let threshold = mu_star - spec.pac.eps();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| HarnessError::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(spec.master_seed, trial);
                let run = spec
                    .algorithm
                    .run(spec.instance, &spec.pac, &mut rng)
                    .map_err(|e| (trial, e))?;
                Ok(TrialRecord {
                    trial,
                    seed: trial_seed(spec.master_seed, trial),
                    value: run.value,
                    total_samples: run.total_samples,
                    success: run.value > threshold,
                })
            })
            .collect()
    });

    let records = gather(results)?;
    let report = summarize(spec, &records, cap, mu_star);
    Ok(TrialsOutcome { report, records })
}

type TrialResult = Result<TrialRecord, (u64, AlgorithmError)>;

/// Unwraps trial results, or reports the first failure together with the
/// trials that did finish.
fn gather(results: Vec<TrialResult>) -> Result<Vec<TrialRecord>, HarnessError> {
    if let Some(&(trial, ref err)) = results.iter().find_map(|r| r.as_ref().err()) {
        let completed = results
            .iter()
            .filter_map(|r| r.as_ref().ok().cloned())
            .collect();
        return Err(HarnessError::TrialFailed {
            trial,
            message: err.to_string(),
            completed,
        });
    }
    Ok(results
        .into_iter()
        .map(|r| r.expect("errors handled above"))
        .collect())
}

fn summarize(
    spec: &ExperimentSpec,
    records: &[TrialRecord],
    cap: Option<u64>,
    mu_star: f64,
) -> CorrectnessReport {
    let n = records.len() as u64;
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let total: u128 = records.iter().map(|r| r.total_samples as u128).sum();
    let max_t = records.iter().map(|r| r.total_samples).max().unwrap_or(0);
    let bound_violations = cap.map_or(0, |c| {
        records.iter().filter(|r| r.total_samples > c).count() as u64
    });
    let (lo, hi) = wilson_interval(successes, n, Z_95);
    let passed = three_sigma_upper(successes, n) >= 1.0 - spec.pac.delta() && bound_violations == 0;
    CorrectnessReport {
        schema_version: SCHEMA_VERSION,
        algorithm: spec.algorithm,
        trials: n,
        master_seed: spec.master_seed,
        eps: spec.pac.eps(),
        delta: spec.pac.delta(),
        k_size: spec.instance.len(),
        mu_star,
        successes,
        success_rate: successes as f64 / n as f64,
        wilson_ci_95: [lo, hi],
        mean_t: total as f64 / n as f64,
        max_t,
        t_cap: cap,
        bound_violations,
        passed,
        per_trial_csv_path: None,
    }
}

/// The two-level instances of the examples: one arm at `first`, the
/// remaining `k_size − 1` at `rest`, all tight power tails.
pub fn two_level_instance(
    k_size: usize,
    first: f64,
    rest: f64,
    a: f64,
    beta: f64,
    eps0: f64,
) -> BanditInstance {
    let tail = TailParams::new(a, beta, eps0).expect("valid example tail");
    let mut arms = Vec::with_capacity(k_size);
    arms.push(RewardDistribution::power_tail(first, a, beta).expect("valid arm"));
    arms.extend(std::iter::repeat_n(
        RewardDistribution::power_tail(rest, a, beta).expect("valid arm"),
        k_size - 1,
    ));
    BanditInstance::new_unchecked(arms, tail).expect("nonempty")
}

/// Example 1 (`first = 0.9`, rest 0.1) or Example 2 (`first = 0.1`, rest 0.9).
pub fn reference_example(which: u8) -> (BanditInstance, PacParams) {
    let (first, rest) = if which == 1 { (0.9, 0.1) } else { (0.1, 0.9) };
    let inst = two_level_instance(10_000, first, rest, 0.01, 1.0, EXAMPLE_EPS0);
    (inst, PacParams::new(1e-4, 1e-3).expect("valid pac"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub example: u8,
    pub quantity: String,
    pub computed: f64,
    pub printed: f64,
    pub rel_error: f64,
    pub within_1pct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleVerdict {
    pub example: u8,
    pub verdict: Verdict,
    pub expected: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleTable {
    pub schema_version: u32,
    pub eps0: f64,
    pub rows: Vec<ExampleRow>,
    pub verdicts: Vec<ExampleVerdict>,
    pub passed: bool,
}

/// Example number, printed `(quantity, value)` pairs and expected verdict.
type PrintedExample = (u8, &'static [(&'static str, f64)], Verdict);

/// Evaluates the bounds on both examples and pairs them with the printed
/// magnitudes.
pub fn reproduce_examples() -> ExampleTable {
    let printed: [PrintedExample; 2] = [
        (
            1,
            &[
                ("thm2_core", 3.52e8),
                ("thm3_lower", 1.59e10),
                ("thm4_upper", 6.9e10),
            ],
            Verdict::MultiArmFavored,
        ),
        (
            2,
            &[("thm2_core", 1.56e12), ("thm4_upper", 6.9e10)],
            Verdict::UnifiedFavored,
        ),
    ];
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (example, values, expected) in printed {
        let (inst, pac) = reference_example(example);
        let cmp = case_comparison(&inst, &pac);
        for &(quantity, printed_value) in values {
            let computed = pick(&cmp.report, quantity);
            let rel_error = ((computed - printed_value) / printed_value).abs();
            rows.push(ExampleRow {
                example,
                quantity: quantity.to_string(),
                computed,
                printed: printed_value,
                rel_error,
                within_1pct: rel_error < 0.01,
            });
        }
        verdicts.push(ExampleVerdict {
            example,
            verdict: cmp.verdict,
            expected,
        });
    }
    let passed =
        rows.iter().all(|r| r.within_1pct) && verdicts.iter().all(|v| v.verdict == v.expected);
    ExampleTable {
        schema_version: SCHEMA_VERSION,
        eps0: EXAMPLE_EPS0,
        rows,
        verdicts,
        passed,
    }
}

fn pick(r: &BoundReport, quantity: &str) -> f64 {
    match quantity {
        "thm1_lower" => r.thm1_lower,
        "thm2_core" => r.thm2_core,
        "thm2_total" => r.thm2_total,
        "thm3_lower" => r.thm3_lower,
        "thm4_upper" => r.thm4_upper,
        other => unreachable!("unknown quantity {other}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Something that can be written as CSV or JSON.
pub trait Emit: Serialize {
    fn write_csv(&self, out: &mut dyn Write) -> Result<(), HarnessError>;
}

impl Emit for BoundReport {
    fn write_csv(&self, out: &mut dyn Write) -> Result<(), HarnessError> {
        BoundReport::write_csv(self, out)?;
        Ok(())
    }
}

impl Emit for CorrectnessReport {
    fn write_csv(&self, out: &mut dyn Write) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "algorithm",
            "trials",
            "master_seed",
            "eps",
            "delta",
            "success_rate",
            "wilson_lo",
            "wilson_hi",
            "mean_T",
            "max_T",
            "bound_violations",
            "passed",
        ])?;
        let alg = serde_json::to_value(self.algorithm)?;
        w.write_record([
            alg.as_str().unwrap_or_default().to_string(),
            self.trials.to_string(),
            self.master_seed.to_string(),
            self.eps.to_string(),
            self.delta.to_string(),
            self.success_rate.to_string(),
            self.wilson_ci_95[0].to_string(),
            self.wilson_ci_95[1].to_string(),
            self.mean_t.to_string(),
            self.max_t.to_string(),
            self.bound_violations.to_string(),
            self.passed.to_string(),
        ])?;
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

impl Emit for ExampleTable {
    fn write_csv(&self, out: &mut dyn Write) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "example",
            "quantity",
            "computed",
            "printed",
            "rel_error",
            "within_1pct",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.example.to_string(),
                r.quantity.clone(),
                r.computed.to_string(),
                r.printed.to_string(),
                r.rel_error.to_string(),
                r.within_1pct.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Per-trial log with header `trial,seed,V,T,success`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrialLog(pub Vec<TrialRecord>);

impl Emit for TrialLog {
    fn write_csv(&self, out: &mut dyn Write) -> Result<(), HarnessError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record(["trial", "seed", "V", "T", "success"])?;
        for r in &self.0 {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Writes `item` to `path`; errors carry the path.
pub fn emit_results<T: Emit>(item: &T, format: Format, path: &Path) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, item)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        Format::Csv => item.write_csv(&mut out)?,
    }
    out.flush().map_err(io_err)
}
