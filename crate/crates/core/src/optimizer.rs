//! Exhaustive search over hybrid designs `(q, ρ1, ρ2)`.
//!
//! `q` ranges over `[⌈1/μ⌉, K]`, `ρ2` over `[max(1, ⌊qμ⌋), ⌊Kμ⌋]` and the
//! coded-row count `mprime` over multiples of `C(K, ρ2)` in `[m, K·mμ]`. Every
//! candidate passing the storage and recovery conditions is scored with the
//! closed-form hybrid latency.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::latency::{hs_latency_closed, hs_redundancy_range, LatencyBreakdown};
use crate::model::{binomial, SystemConfig};
use crate::placement::{validate_hybrid, HybridParams};

/// One scored hybrid design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub params: HybridParams,
    pub rho1: f64,
    /// Coded rows per node subset.
    pub b: usize,
    pub r_min: usize,
    pub r_max: usize,
    pub r_q: usize,
    pub breakdown: LatencyBreakdown,
    pub stored_rows: usize,
    pub storage_budget: usize,
    /// `ρ1 ∈ {1, (q+1)/q, …, K/q}`.
    pub on_coarse_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub best: Candidate,
    /// Every candidate, in enumeration order.
    pub table: Vec<Candidate>,
}

/// All valid `(q, mprime, ρ2)` designs ordered by `q`, then `ρ2`, then
/// `mprime`. Empty when none exists.
pub fn enumerate_candidates(config: &SystemConfig) -> Vec<HybridParams> {
    let k = config.nodes();
    let m = config.rows();
    let max_mprime = k * config.rows_per_node();
    let rho2_max = config.floor_mu_times(k);
    let mut out = Vec::new();
    for q in config.mds_threshold()..=k {
        for rho2 in config.floor_mu_times(q).max(1)..=rho2_max {
            let step = binomial(k, rho2) as usize;
            let first = m.div_ceil(step) * step;
            for mprime in (first..=max_mprime).step_by(step) {
                let params = HybridParams::new(q, mprime, rho2);
                if validate_hybrid(config, &params).is_ok() {
                    out.push(params);
                }
            }
        }
    }
    out
}

/// Scores one design with the closed form.
pub fn score(config: &SystemConfig, params: &HybridParams) -> Result<Candidate> {
    let closed = hs_latency_closed(config, params)?;
    let (r_min, r_max) = hs_redundancy_range(config, params);
    Ok(Candidate {
        params: *params,
        rho1: params.rho1(config),
        b: params.rows_per_group(config),
        r_min,
        r_max,
        r_q: closed.downlink.threshold,
        breakdown: closed.breakdown,
        stored_rows: closed.stored_rows,
        storage_budget: closed.storage_budget,
        on_coarse_grid: params.on_coarse_grid(config),
    })
}

/// Minimises total latency over [`enumerate_candidates`]. Ties go to the
/// earlier candidate (smaller `q`, then `ρ2`, then `mprime`).
pub fn optimize(config: &SystemConfig) -> Result<Optimum> {
    let candidates = enumerate_candidates(config);
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let table = candidates
        .par_iter()
        .map(|p| score(config, p))
        .collect::<Result<Vec<_>>>()?;
    let best = table
        .iter()
        .reduce(|best, c| {
            if c.breakdown.delta < best.breakdown.delta {
                c
            } else {
                best
            }
        })
        .cloned()
        .expect("nonempty table");
    Ok(Optimum { best, table })
}

/// Candidate table header.
pub const CANDIDATE_HEADER: &str =
    "q,rho1,rho2,b,r_min,r_max,r_q,delta_C,delta_D,delta,stored_rows,storage_budget,on_coarse_grid";

/// Candidate table as CSV, header included.
pub fn candidate_table_csv(table: &[Candidate]) -> String {
    let mut out = String::from(CANDIDATE_HEADER);
    out.push('\n');
    for c in table {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.params.q,
            c.rho1,
            c.params.rho2,
            c.b,
            c.r_min,
            c.r_max,
            c.r_q,
            c.breakdown.delta_c,
            c.breakdown.delta_d,
            c.breakdown.delta,
            c.stored_rows,
            c.storage_budget,
            c.on_coarse_grid
        )
        .expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::mc_latency_closed;
    use crate::model::SystemParams;

    fn cfg(eta: f64, gamma: f64) -> SystemConfig {
        SystemConfig::new(SystemParams {
            eta,
            gamma,
            ..SystemParams::default()
        })
        .unwrap()
    }

    #[test]
    fn reference_candidates_present() {
        let c = cfg(0.8, 0.0);
        let cands = enumerate_candidates(&c);
        assert!(cands.contains(&HybridParams::new(4, 75, 2)));
        assert!(cands.contains(&HybridParams::new(2, 180, 1)));
        assert!(cands.iter().all(|p| p.rho2 <= 3));
        assert!(cands.iter().all(|p| validate_hybrid(&c, p).is_ok()));
        let mut sorted = cands.clone();
        sorted.sort_by_key(|p| (p.q, p.rho2, p.mprime));
        sorted.dedup();
        assert_eq!(sorted, cands);
    }

    #[test]
    fn minimal_storage_forces_trivial_design() {
        let c = SystemConfig::new(SystemParams {
            mu: 1.0 / 6.0,
            ..SystemParams::default()
        })
        .unwrap();
        assert_eq!(enumerate_candidates(&c), vec![HybridParams::new(6, 60, 1)]);
    }

    #[test]
    fn zero_gamma_waits_for_fewest_nodes_at_reference_rate() {
        let opt = optimize(&cfg(0.8, 0.0)).unwrap();
        assert_eq!(opt.best.params.q, 2);
    }

    #[test]
    fn zero_gamma_fast_setup_prefers_smaller_storage() {
        // with little straggling, waiting for a third node pays for itself by
        // shrinking the per-node workload from 30 to 20 rows
        let opt = optimize(&cfg(10.0, 0.0)).unwrap();
        assert!(opt.best.params.q > 2, "{:?}", opt.best.params);
    }

    #[test]
    fn large_gamma_uses_cooperation() {
        let opt = optimize(&cfg(10.0, 50.0)).unwrap();
        assert!(opt.best.params.rho2 >= 2);
        assert!(opt.best.breakdown.delta_d < 60.0);
    }

    #[test]
    fn never_worse_than_mds() {
        for gamma in [0.0, 0.3, 1.0, 2.0, 10.0] {
            for eta in [0.8, 2.0, 10.0] {
                let c = cfg(eta, gamma);
                let opt = optimize(&c).unwrap();
                assert!(opt.best.breakdown.delta <= mc_latency_closed(&c).delta + 1e-9);
                assert!(opt
                    .table
                    .iter()
                    .all(|t| opt.best.breakdown.delta <= t.breakdown.delta));
            }
        }
    }

    #[test]
    fn optimum_is_reproducible() {
        let c = cfg(0.8, 1.0);
        let opt = optimize(&c).unwrap();
        assert!(validate_hybrid(&c, &opt.best.params).is_ok());
        let again = hs_latency_closed(&c, &opt.best.params).unwrap();
        assert_eq!(
            again.breakdown.delta.to_bits(),
            opt.best.breakdown.delta.to_bits()
        );
        assert_eq!(optimize(&c).unwrap(), opt);
    }

    #[test]
    fn csv_shape() {
        let opt = optimize(&cfg(0.8, 1.0)).unwrap();
        let csv = candidate_table_csv(&opt.table);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CANDIDATE_HEADER);
        assert_eq!(lines.len(), opt.table.len() + 1);
        let cols = CANDIDATE_HEADER.split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == cols));
    }
}
