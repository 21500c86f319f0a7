//! Monte Carlo estimation of expected latencies.
//!
//! Trial `t` of a run draws its setup times from the ChaCha stream selected
//! by `(base_seed, t)`, so every trial can be regenerated alone and the
//! schemes in one run see identical straggler realisations. Per-trial
//! `(δ_C, δ_D)` pairs do not depend on `γ`; a sweep evaluates them once and
//! reweights.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::latency::{hs_latency_sample, mc_latency_sample, uc_latency, LatencyBreakdown};
use crate::model::{sample_trial, SystemConfig};
use crate::placement::{cyclic_schedule, validate_hybrid, HybridParams, Schedule};

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SchemeSpec {
    Uncoded,
    Mds,
    Hybrid(HybridParams),
}

impl SchemeSpec {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeSpec::Uncoded => "uc",
            SchemeSpec::Mds => "mc",
            SchemeSpec::Hybrid(_) => "hs",
        }
    }

    /// `(q, ρ1, ρ2)` as CSV fields; empty for the uncoded scheme, and the
    /// equivalent hybrid point `(⌈1/μ⌉, Kμ, 1)` for MDS.
    pub fn param_fields(&self, config: &SystemConfig) -> [String; 3] {
        match self {
            SchemeSpec::Uncoded => [String::new(), String::new(), String::new()],
            SchemeSpec::Mds => [
                config.mds_threshold().to_string(),
                (config.nodes() as f64 * config.rows_per_node() as f64 / config.rows() as f64)
                    .to_string(),
                "1".into(),
            ],
            SchemeSpec::Hybrid(p) => [
                p.q.to_string(),
                p.rho1(config).to_string(),
                p.rho2.to_string(),
            ],
        }
    }
}

/// Per-trial `(δ_C, δ_D)` for one scheme, kept in trial order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSamples {
    pub scheme: SchemeSpec,
    pub base_seed: u64,
    pub delta_c: Vec<f64>,
    pub delta_d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub scheme: SchemeSpec,
    pub gamma: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub mean_delta_c: f64,
    pub mean_delta_d: f64,
    pub mean_delta: f64,
    /// Half-width of the normal-approximation 95% interval on `mean_delta`.
    pub ci95_delta: f64,
}

impl TrialSamples {
    pub fn len(&self) -> usize {
        self.delta_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_c.is_empty()
    }

    /// Summary at weight `gamma`. Sums run in trial order.
    pub fn report(&self, gamma: f64) -> TrialReport {
        let n = self.len();
        let nf = n as f64;
        let mean_delta_c = self.delta_c.iter().sum::<f64>() / nf;
        let mean_delta_d = self.delta_d.iter().sum::<f64>() / nf;
        let mean_delta = mean_delta_c + gamma * mean_delta_d;
        let ci95_delta = if n > 1 {
            let ss: f64 = self
                .delta_c
                .iter()
                .zip(&self.delta_d)
                .map(|(c, d)| (c + gamma * d - mean_delta).powi(2))
                .sum();
            Z95 * (ss / (nf - 1.0)).sqrt() / nf.sqrt()
        } else {
            0.0
        };
        TrialReport {
            scheme: self.scheme,
            gamma,
            trials: n,
            base_seed: self.base_seed,
            mean_delta_c,
            mean_delta_d,
            mean_delta,
            ci95_delta,
        }
    }
}

enum Evaluator {
    Uncoded(Schedule),
    Mds,
    Hybrid(HybridParams),
}

impl Evaluator {
    fn new(config: &SystemConfig, scheme: &SchemeSpec) -> Result<Self> {
        Ok(match scheme {
            SchemeSpec::Uncoded => Evaluator::Uncoded(cyclic_schedule(config)),
            SchemeSpec::Mds => Evaluator::Mds,
            SchemeSpec::Hybrid(p) => {
                validate_hybrid(config, p).map_err(Error::InvalidHybrid)?;
                Evaluator::Hybrid(*p)
            }
        })
    }

    fn eval(&self, config: &SystemConfig, base_seed: u64, trial: u64) -> Result<LatencyBreakdown> {
        let sample = sample_trial(config, base_seed, trial);
        let out = match self {
            Evaluator::Uncoded(s) => uc_latency(config, s, &sample),
            Evaluator::Mds => mc_latency_sample(config, &sample),
            Evaluator::Hybrid(p) => hs_latency_sample(config, p, &sample),
        };
        out.map_err(|e| Error::Trial {
            trial,
            base_seed,
            source: Box::new(e),
        })
    }
}

/// Simulates `trials` straggler realisations, evaluating uncoded trials with
/// the given schedule instead of the cyclic one.
pub fn simulate_with_schedule(
    config: &SystemConfig,
    schedule: &Schedule,
    trials: usize,
    base_seed: u64,
) -> Result<TrialSamples> {
    run_evaluator(
        config,
        SchemeSpec::Uncoded,
        &Evaluator::Uncoded(schedule.clone()),
        trials,
        base_seed,
    )
}

/// Per-trial latencies for `scheme`.
pub fn simulate(
    config: &SystemConfig,
    scheme: &SchemeSpec,
    trials: usize,
    base_seed: u64,
) -> Result<TrialSamples> {
    let evaluator = Evaluator::new(config, scheme)?;
    run_evaluator(config, *scheme, &evaluator, trials, base_seed)
}

fn run_evaluator(
    config: &SystemConfig,
    scheme: SchemeSpec,
    evaluator: &Evaluator,
    trials: usize,
    base_seed: u64,
) -> Result<TrialSamples> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    // indexed collect keeps trial order regardless of completion order
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| evaluator.eval(config, base_seed, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSamples {
        scheme,
        base_seed,
        delta_c: results.iter().map(|b| b.delta_c).collect(),
        delta_d: results.iter().map(|b| b.delta_d).collect(),
    })
}

/// Sample means and 95% interval at the configuration's `γ`.
pub fn run_trials(
    config: &SystemConfig,
    scheme: &SchemeSpec,
    trials: usize,
    base_seed: u64,
) -> Result<TrialReport> {
    Ok(simulate(config, scheme, trials, base_seed)?.report(config.gamma()))
}

/// One `(γ, scheme)` point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub report: TrialReport,
}

/// Evaluates every scheme once and reweights the same trials across the grid.
pub fn sweep_gamma(
    config: &SystemConfig,
    schemes: &[SchemeSpec],
    gamma_grid: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if gamma_grid.is_empty() {
        return Err(Error::Domain("gamma grid is empty".into()));
    }
    if let Some(g) = gamma_grid.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::Domain(format!("gamma must be nonnegative, got {g}")));
    }
    let samples = schemes
        .iter()
        .map(|s| simulate(config, s, trials, base_seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(gamma_grid
        .iter()
        .flat_map(|&gamma| {
            samples.iter().map(move |s| SweepRow {
                gamma,
                report: s.report(gamma),
            })
        })
        .collect())
}

/// Header of the simulation CSV.
pub const RESULT_HEADER: &str =
    "gamma,scheme,q,rho1,rho2,trials,seed,mean_delta_C,mean_delta_D,mean_delta,ci95";

/// One CSV line (no newline) in [`RESULT_HEADER`] layout.
pub fn result_row(config: &SystemConfig, report: &TrialReport) -> String {
    let [q, rho1, rho2] = report.scheme.param_fields(config);
    let mut line = String::new();
    write!(
        line,
        "{},{},{},{},{},{},{},{},{},{},{}",
        report.gamma,
        report.scheme.label(),
        q,
        rho1,
        rho2,
        report.trials,
        report.base_seed,
        report.mean_delta_c,
        report.mean_delta_d,
        report.mean_delta,
        report.ci95_delta
    )
    .expect("writing to a String");
    line
}
