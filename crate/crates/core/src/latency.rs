//! Stopping times, redundancy profiles and normalised latencies for the
//! uncoded, MDS and hybrid schemes.
//!
//! Normalisation: `δ_C = T_C / τ`; `δ_D` counts downlink blocks, where an IV
//! held by `r` nodes reaches `min(r, N)` users per block under cooperative
//! zero-forcing; `δ = δ_C + γ·δ_D`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{binomial, harmonic, ComputationVector, StragglerSample, SystemConfig};
use crate::placement::{validate_hybrid, HybridParams, Schedule};

/// Number of distinct IVs computed at exactly `r` nodes, for each `r ≥ 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RedundancyProfile {
    counts: BTreeMap<usize, usize>,
}

impl RedundancyProfile {
    /// Aggregates per-IV redundancies; zeros (uncomputed IVs) are skipped.
    pub fn from_redundancies(levels: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        for r in levels.into_iter().filter(|&r| r > 0) {
            *counts.entry(r).or_insert(0) += 1;
        }
        RedundancyProfile { counts }
    }

    pub fn from_counts(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        RedundancyProfile {
            counts: pairs.into_iter().filter(|&(r, c)| r > 0 && c > 0).collect(),
        }
    }

    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn get(&self, r: usize) -> usize {
        self.counts.get(&r).copied().unwrap_or(0)
    }

    /// Distinct IVs computed anywhere.
    pub fn distinct(&self) -> usize {
        self.counts.values().sum()
    }

    /// Total computations, `Σ_r r·counts[r]`.
    pub fn computations(&self) -> usize {
        self.counts.iter().map(|(r, c)| r * c).sum()
    }

    pub fn max_level(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }
}

/// Normalised compute delay, downlink delay and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyBreakdown {
    pub delta_c: f64,
    pub delta_d: f64,
    pub delta: f64,
}

impl LatencyBreakdown {
    pub fn new(delta_c: f64, delta_d: f64, gamma: f64) -> Self {
        LatencyBreakdown {
            delta_c,
            delta_d,
            delta: delta_c + gamma * delta_d,
        }
    }

    /// Same compute and downlink delays reweighted by another `γ`.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        LatencyBreakdown::new(self.delta_c, self.delta_d, gamma)
    }
}

/// Downlink blocks needed for one IV held by `r` nodes: `1 / min(r, N)`.
pub fn zf_slot_cost(r: usize, users: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::Domain(
            "IV was not computed at any node (redundancy 0)".into(),
        ));
    }
    if users == 0 {
        return Err(Error::Domain("no users to serve".into()));
    }
    Ok(1.0 / r.min(users) as f64)
}

// ---------------------------------------------------------------------------
// Uncoded
// ---------------------------------------------------------------------------

/// Outcome of the uncoded stopping rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncodedStop {
    /// `T_C` in seconds.
    pub time: f64,
    /// `m(T_C)`: everything completed by `T_C`, not a pruned subset.
    pub vector: ComputationVector,
    /// Largest event time strictly before `T_C`, if any.
    pub previous_event: Option<f64>,
}

/// Per-row redundancy `r_i`: nodes whose first `m_k` entries contain row `i`.
pub fn row_redundancy(
    schedule: &Schedule,
    stop: &ComputationVector,
    row_space: usize,
) -> Vec<usize> {
    let mut r = vec![0; row_space];
    for (list, &done) in schedule.nodes().iter().zip(stop.counts()) {
        for &row in &list[..done.min(list.len())] {
            if row < row_space {
                r[row] += 1;
            }
        }
    }
    r
}

fn covers_all(schedule: &Schedule, stop: &ComputationVector, rows: usize) -> bool {
    row_redundancy(schedule, stop, rows).iter().all(|&r| r > 0)
}

/// Earliest time at which the union of schedule prefixes covers all `m` rows.
///
/// Counts only change at `λ_k + j·τ`, and coverage is monotone in time, so a
/// binary search over the sorted event times finds the first covering one.
pub fn uc_stop(
    config: &SystemConfig,
    schedule: &Schedule,
    sample: &StragglerSample,
) -> Result<UncodedStop> {
    if sample.len() != schedule.node_count() || sample.len() != config.nodes() {
        return Err(Error::Shape(format!(
            "{} setup times for {} scheduled nodes ({} configured)",
            sample.len(),
            schedule.node_count(),
            config.nodes()
        )));
    }
    let m = config.rows();
    let per_node = config.rows_per_node();
    let tau = config.tau();

    let mut events: Vec<f64> = sample
        .lambdas()
        .iter()
        .flat_map(|&l| (1..=per_node).map(move |j| l + j as f64 * tau))
        .collect();
    events.sort_by(f64::total_cmp);

    let feasible_at =
        |t: f64| covers_all(schedule, &ComputationVector::at_time(t, sample, config), m);

    match events.last() {
        Some(&last) if feasible_at(last) => {}
        _ => {
            return Err(Error::Infeasible(format!(
                "schedule does not cover all {m} rows even after every node finishes"
            )))
        }
    }

    let idx = events.partition_point(|&t| !feasible_at(t));
    let time = events[idx];
    let previous_event = events[..idx].iter().rev().find(|&&t| t < time).copied();
    debug_assert!(previous_event.is_none_or(|t| !feasible_at(t)));

    Ok(UncodedStop {
        time,
        vector: ComputationVector::at_time(time, sample, config),
        previous_event,
    })
}

/// Redundancy profile of the uncoded rows at `stop`.
pub fn uc_redundancy(
    config: &SystemConfig,
    schedule: &Schedule,
    stop: &ComputationVector,
) -> RedundancyProfile {
    RedundancyProfile::from_redundancies(row_redundancy(schedule, stop, config.rows()))
}

/// Per-sample uncoded latency: `δ_C = T_C/τ`, `δ_D = Σ_i 1/min(r_i, N)`.
pub fn uc_latency(
    config: &SystemConfig,
    schedule: &Schedule,
    sample: &StragglerSample,
) -> Result<LatencyBreakdown> {
    let stop = uc_stop(config, schedule, sample)?;
    let redundancy = row_redundancy(schedule, &stop.vector, config.rows());
    let mut delta_d = 0.0;
    for r in redundancy {
        delta_d += zf_slot_cost(r, config.users())?;
    }
    Ok(LatencyBreakdown::new(
        stop.time / config.tau(),
        delta_d,
        config.gamma(),
    ))
}

// ---------------------------------------------------------------------------
// MDS
// ---------------------------------------------------------------------------

/// Per-sample MDS latency: wait for the fastest `⌈1/μ⌉` nodes to finish all
/// `m·μ` rows, then send the `m` IVs one per block.
pub fn mc_latency_sample(
    config: &SystemConfig,
    sample: &StragglerSample,
) -> Result<LatencyBreakdown> {
    let q = config.mds_threshold();
    let t_c = sample.order_stat(q)? + config.tau() * config.rows_per_node() as f64;
    Ok(LatencyBreakdown::new(
        t_c / config.tau(),
        config.rows() as f64,
        config.gamma(),
    ))
}

/// Expected MDS latency, `(H_K − H_{K−⌈1/μ⌉})/(ητ) + m(μ + γ)`.
pub fn mc_latency_closed(config: &SystemConfig) -> LatencyBreakdown {
    let k = config.nodes();
    let q = config.mds_threshold();
    let wait = (harmonic(k) - harmonic(k - q)) / (config.eta() * config.tau());
    LatencyBreakdown::new(
        wait + config.rows_per_node() as f64,
        config.rows() as f64,
        config.gamma(),
    )
}

// ---------------------------------------------------------------------------
// Hybrid
// ---------------------------------------------------------------------------

/// `[r_min, r_max]` for the hybrid scheme: `max(ρ2 − (K−q), 1) ..= min(q, ρ2)`.
pub fn hs_redundancy_range(config: &SystemConfig, params: &HybridParams) -> (usize, usize) {
    let slow = config.nodes().saturating_sub(params.q);
    let r_min = params.rho2.saturating_sub(slow).max(1);
    let r_max = params.q.min(params.rho2);
    (r_min, r_max)
}

/// Redundancy profile once any `q` nodes have finished:
/// `B_r = C(q, r)·C(K−q, ρ2−r)·b` for `r ∈ [r_min, r_max]`.
pub fn hs_profile(config: &SystemConfig, params: &HybridParams) -> Result<RedundancyProfile> {
    validate_hybrid(config, params).map_err(Error::InvalidHybrid)?;
    let k = config.nodes();
    let q = params.q;
    let b = params.rows_per_group(config) as u128;
    let (r_min, r_max) = hs_redundancy_range(config, params);
    Ok(RedundancyProfile::from_counts((r_min..=r_max).map(|r| {
        let groups = binomial(q, r) * binomial(k - q, params.rho2 - r);
        (r, (groups * b) as usize)
    })))
}

/// Downlink plan for the hybrid scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Downlink {
    /// `r_q`: smallest populated level whose tail `Σ_{r ≥ r_q} B_r` fits
    /// within `m`; one above the highest level if even that overflows.
    pub threshold: usize,
    /// IVs sent at level `r_q − 1` to make up `m`.
    pub remainder: usize,
    pub delta_d: f64,
}

/// Sends IVs in descending redundancy: the whole tail above `r_q`, then the
/// remainder at level `r_q − 1`. Each block serves `min(r, N)` users.
pub fn hs_downlink(config: &SystemConfig, profile: &RedundancyProfile) -> Result<Downlink> {
    let m = config.rows();
    let n = config.users();
    if profile.distinct() < m {
        return Err(Error::Infeasible(format!(
            "only {} distinct IVs computed, {m} required",
            profile.distinct()
        )));
    }
    let (Some(&lowest), Some(highest)) = (profile.counts().keys().next(), profile.max_level())
    else {
        return Err(Error::Infeasible("no IVs computed".into()));
    };
    let mut tail = 0usize;
    let mut delta_d = 0.0;
    let mut threshold = highest + 1;
    for r in (lowest..=highest).rev() {
        let count = profile.get(r);
        if tail + count > m {
            break;
        }
        tail += count;
        delta_d += count as f64 * zf_slot_cost(r, n)?;
        threshold = r;
    }
    // distinct >= m, so a nonzero remainder only arises above the lowest level
    let remainder = m - tail;
    if remainder > 0 {
        delta_d += remainder as f64 * zf_slot_cost(threshold - 1, n)?;
    }
    Ok(Downlink {
        threshold,
        remainder,
        delta_d,
    })
}

/// Per-sample hybrid latency: wait for the `q`-th fastest node to finish its
/// `ρ1ρ2m/K` stored rows.
pub fn hs_latency_sample(
    config: &SystemConfig,
    params: &HybridParams,
    sample: &StragglerSample,
) -> Result<LatencyBreakdown> {
    let profile = hs_profile(config, params)?;
    let downlink = hs_downlink(config, &profile)?;
    let stored = params.rows_per_node(config) as f64;
    let t_c = sample.order_stat(params.q)? + config.tau() * stored;
    Ok(LatencyBreakdown::new(
        t_c / config.tau(),
        downlink.delta_d,
        config.gamma(),
    ))
}

/// Closed-form hybrid latency with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridClosedForm {
    pub breakdown: LatencyBreakdown,
    pub downlink: Downlink,
    pub profile: RedundancyProfile,
    /// Rows each node computes, `ρ1ρ2m/K`; used in `δ_C`.
    pub stored_rows: usize,
    /// Storage budget `m·μ`. Differs from `stored_rows` when the storage
    /// condition is slack.
    pub storage_budget: usize,
}

/// Expected hybrid latency, `(H_K − H_{K−q})/(ητ) + ρ1ρ2m/K + γ·δ_D`.
pub fn hs_latency_closed(config: &SystemConfig, params: &HybridParams) -> Result<HybridClosedForm> {
    let profile = hs_profile(config, params)?;
    let downlink = hs_downlink(config, &profile)?;
    let k = config.nodes();
    let stored_rows = params.rows_per_node(config);
    let wait = (harmonic(k) - harmonic(k - params.q)) / (config.eta() * config.tau());
    Ok(HybridClosedForm {
        breakdown: LatencyBreakdown::new(
            wait + stored_rows as f64,
            downlink.delta_d,
            config.gamma(),
        ),
        downlink,
        profile,
        stored_rows,
        storage_budget: config.rows_per_node(),
    })
}
