//! System configuration, the straggler timing model and shared analytic
//! helpers (harmonic numbers, exponential order statistics, binomials).
//!
//! Node `k` finishes its `j`-th inner product at `λ_k + j·τ`, where the setup
//! time `λ_k ~ Exp(η)` is drawn independently per node. All times are kept in
//! seconds; normalisation by `τ` happens only when a latency is reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::Serialize;

use crate::error::{Error, Result};

/// Field sizes supported by the finite-field oracle.
pub const SUPPORTED_FIELD_BITS: [u32; 3] = [4, 8, 16];

/// Slack (in units of one inner product) used when converting an elapsed time
/// into a completed-computation count, so that `t = λ_k + j·τ` counts `j`
/// despite rounding in the subtraction.
const COUNT_SLACK: f64 = 1e-9;

/// Tolerance on `m·μ` being an integer.
const INTEGRALITY_TOL: f64 = 1e-9;

/// Raw, unvalidated system parameters. `Default` is the reference operating
/// point `K = N = 6`, `m = 60`, `μ = 0.5`, `τ = 0.005`, `η = 0.8`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    pub nodes: usize,
    pub users: usize,
    pub rows: usize,
    pub mu: f64,
    pub tau: f64,
    pub eta: f64,
    pub gamma: f64,
    pub field_bits: u32,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            nodes: 6,
            users: 6,
            rows: 60,
            mu: 0.5,
            tau: 0.005,
            eta: 0.8,
            gamma: 0.0,
            field_bits: 8,
        }
    }
}

/// Validated system configuration.
///
/// Invariants: `K, N, m ≥ 1`, `τ, η > 0`, `γ ≥ 0`, `1/K ≤ μ ≤ 1` and `m·μ`
/// is an integer (the number of rows stored per node).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    params: SystemParams,
    rows_per_node: usize,
}

impl SystemConfig {
    /// Validates `params`, reporting every violated invariant at once.
    pub fn new(params: SystemParams) -> Result<Self> {
        let mut problems = Vec::new();
        let p = &params;
        if p.nodes == 0 {
            problems.push("K must be at least 1".to_string());
        }
        if p.users == 0 {
            problems.push("N must be at least 1".to_string());
        }
        if p.rows == 0 {
            problems.push("m must be at least 1".to_string());
        }
        if !(p.tau.is_finite() && p.tau > 0.0) {
            problems.push(format!("tau must be positive and finite, got {}", p.tau));
        }
        if !(p.eta.is_finite() && p.eta > 0.0) {
            problems.push(format!("eta must be positive and finite, got {}", p.eta));
        }
        if !(p.gamma.is_finite() && p.gamma >= 0.0) {
            problems.push(format!(
                "gamma must be nonnegative and finite, got {}",
                p.gamma
            ));
        }
        if !SUPPORTED_FIELD_BITS.contains(&p.field_bits) {
            problems.push(format!(
                "L must be one of {:?}, got {}",
                SUPPORTED_FIELD_BITS, p.field_bits
            ));
        }

        let mut rows_per_node = 0;
        if !(p.mu.is_finite() && p.mu > 0.0 && p.mu <= 1.0 + INTEGRALITY_TOL) {
            problems.push(format!("mu must lie in [1/K, 1], got {}", p.mu));
        } else if p.rows > 0 {
            let stored = p.rows as f64 * p.mu;
            let rounded = stored.round();
            if (stored - rounded).abs() > INTEGRALITY_TOL * stored.max(1.0) || rounded < 1.0 {
                problems.push(format!(
                    "m*mu must be a positive integer, got {} * {} = {}",
                    p.rows, p.mu, stored
                ));
            } else {
                rows_per_node = rounded as usize;
                if p.nodes > 0 && rows_per_node * p.nodes < p.rows {
                    problems.push(format!(
                        "mu must be at least 1/K: {} nodes storing {} rows each cannot hold {} rows",
                        p.nodes, rows_per_node, p.rows
                    ));
                }
            }
        }

        if problems.is_empty() {
            Ok(SystemConfig {
                params,
                rows_per_node,
            })
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Number of edge nodes `K`.
    pub fn nodes(&self) -> usize {
        self.params.nodes
    }

    /// Number of users `N`.
    pub fn users(&self) -> usize {
        self.params.users
    }

    /// Number of model rows `m`.
    pub fn rows(&self) -> usize {
        self.params.rows
    }

    pub fn mu(&self) -> f64 {
        self.params.mu
    }

    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    pub fn eta(&self) -> f64 {
        self.params.eta
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn field_bits(&self) -> u32 {
        self.params.field_bits
    }

    /// Rows stored at each node, `m·μ`.
    pub fn rows_per_node(&self) -> usize {
        self.rows_per_node
    }

    /// `⌈1/μ⌉`: the fewest nodes whose storage can hold `m` distinct rows.
    pub fn mds_threshold(&self) -> usize {
        self.rows().div_ceil(self.rows_per_node)
    }

    /// `⌊q·μ⌋`, computed exactly from the integer storage size.
    pub fn floor_mu_times(&self, q: usize) -> usize {
        q * self.rows_per_node / self.rows()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        SystemConfig::new(SystemParams {
            gamma,
            ..self.params.clone()
        })
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        SystemConfig::new(SystemParams {
            eta,
            ..self.params.clone()
        })
    }
}

/// One draw of the per-node setup times `λ_1..λ_K`, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StragglerSample {
    lambdas: Vec<f64>,
}

impl StragglerSample {
    /// Builds a sample from explicit setup times. Entries must be finite and
    /// nonnegative.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Domain(format!(
                "setup times must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(StragglerSample { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Setup times in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.lambdas.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// The `q`-th smallest setup time (1-based).
    pub fn order_stat(&self, q: usize) -> Result<f64> {
        if q == 0 || q > self.lambdas.len() {
            return Err(Error::Domain(format!(
                "order statistic {q} out of range 1..={}",
                self.lambdas.len()
            )));
        }
        Ok(self.sorted()[q - 1])
    }

    /// Node indices in order of finishing setup; ties broken by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.lambdas.len()).collect();
        idx.sort_by(|&a, &b| self.lambdas[a].total_cmp(&self.lambdas[b]).then(a.cmp(&b)));
        idx
    }
}

/// Generator for trial `trial` under `base_seed`. Each `(base_seed, trial)`
/// pair selects a distinct ChaCha8 stream, so trials are reproducible in
/// isolation and independent of evaluation order.
pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial);
    rng
}

/// Draws `K` independent `Exp(η)` setup times from `seed`.
pub fn sample_stragglers(config: &SystemConfig, seed: u64) -> StragglerSample {
    sample_trial(config, seed, 0)
}

/// Draws the setup times for trial `trial` of a run seeded with `base_seed`.
pub fn sample_trial(config: &SystemConfig, base_seed: u64, trial: u64) -> StragglerSample {
    let mut rng = trial_rng(base_seed, trial);
    draw_stragglers(config, &mut rng)
}

pub fn draw_stragglers<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> StragglerSample {
    // eta > 0 and finite is a config invariant
    let exp = Exp::new(config.eta()).expect("validated rate");
    StragglerSample {
        lambdas: (0..config.nodes()).map(|_| rng.sample(exp)).collect(),
    }
}

/// `H_k = Σ_{i=1..k} 1/i`, with `H_0 = 0`.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// Mean of the `q`-th smallest of `k` i.i.d. `Exp(η)` variables,
/// `(H_k − H_{k−q}) / η`.
pub fn expected_order_stat(k: usize, q: usize, eta: f64) -> Result<f64> {
    if q == 0 || q > k {
        return Err(Error::Domain(format!(
            "order statistic {q} out of range 1..={k}"
        )));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {eta}")));
    }
    let tail: f64 = (k - q + 1..=k).map(|i| 1.0 / i as f64).sum();
    Ok(tail / eta)
}

/// Inner products finished by time `t` at a node whose setup ends at
/// `lambda_k`, capped by the node's storage.
pub fn completed_by(t: f64, lambda_k: f64, config: &SystemConfig) -> usize {
    let elapsed = (t - lambda_k) / config.tau();
    if elapsed.is_nan() || elapsed < 0.0 {
        return 0;
    }
    let done = (elapsed + COUNT_SLACK).floor();
    (done as usize).min(config.rows_per_node())
}

/// Per-node computed-IV counts `m_1..m_K`, each bounded by `m·μ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComputationVector(Vec<usize>);

impl ComputationVector {
    pub fn new(counts: Vec<usize>, config: &SystemConfig) -> Result<Self> {
        if counts.len() != config.nodes() {
            return Err(Error::Shape(format!(
                "computation vector has {} entries for {} nodes",
                counts.len(),
                config.nodes()
            )));
        }
        if let Some(c) = counts.iter().find(|&&c| c > config.rows_per_node()) {
            return Err(Error::Domain(format!(
                "{c} computations exceed storage of {} rows",
                config.rows_per_node()
            )));
        }
        Ok(ComputationVector(counts))
    }

    /// Counts at time `t` for the given sample.
    pub fn at_time(t: f64, sample: &StragglerSample, config: &SystemConfig) -> Self {
        ComputationVector(
            sample
                .lambdas()
                .iter()
                .map(|&l| completed_by(t, l, config))
                .collect(),
        )
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `r`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still advance
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(nodes: usize, rows: usize, mu: f64, tau: f64) -> SystemConfig {
        SystemConfig::new(SystemParams {
            nodes,
            rows,
            mu,
            tau,
            ..SystemParams::default()
        })
        .unwrap()
    }

    #[test]
    fn defaults_are_valid() {
        let c = SystemConfig::new(SystemParams::default()).unwrap();
        assert_eq!(c.rows_per_node(), 30);
        assert_eq!(c.mds_threshold(), 2);
    }

    #[test]
    fn rejects_fractional_storage() {
        let err = SystemConfig::new(SystemParams {
            mu: 0.33,
            ..SystemParams::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::Config(ref p) if p.len() == 1), "{err}");
        for mu in [0.3, 0.35, 1.0 / 3.0] {
            let c = SystemConfig::new(SystemParams {
                mu,
                ..SystemParams::default()
            })
            .unwrap();
            assert_eq!(c.rows_per_node(), (60.0 * mu).round() as usize);
        }
        assert_eq!(cfg(6, 60, 1.0 / 3.0, 0.005).mds_threshold(), 3);
    }

    #[test]
    fn reports_all_problems() {
        let err = SystemConfig::new(SystemParams {
            nodes: 0,
            tau: -1.0,
            eta: 0.0,
            field_bits: 7,
            ..SystemParams::default()
        })
        .unwrap_err();
        let Error::Config(problems) = err else {
            panic!()
        };
        assert_eq!(problems.len(), 4, "{problems:?}");
    }

    #[test]
    fn storage_below_one_over_k_rejected() {
        assert!(SystemConfig::new(SystemParams {
            nodes: 3,
            mu: 0.25,
            rows: 4,
            ..SystemParams::default()
        })
        .is_err());
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert_relative_eq!(harmonic(4), 1.0 + 0.5 + 1.0 / 3.0 + 0.25);
        assert_relative_eq!(harmonic(4), 2.083_333_333_333_333, epsilon = 1e-12);
        assert_relative_eq!(harmonic(6), 2.45, epsilon = 1e-12);
    }

    #[test]
    fn order_stat_expectations() {
        assert_relative_eq!(
            expected_order_stat(6, 2, 0.8).unwrap(),
            0.458_333_333_333_333_3,
            epsilon = 1e-12
        );
        assert_relative_eq!(expected_order_stat(1, 1, 1.0).unwrap(), 1.0);
        assert_relative_eq!(expected_order_stat(6, 6, 2.0).unwrap(), harmonic(6) / 2.0);
        assert!(expected_order_stat(6, 0, 1.0).is_err());
        assert!(expected_order_stat(6, 7, 1.0).is_err());
        assert!(expected_order_stat(6, 2, 0.0).is_err());
    }

    #[test]
    fn order_stat_matches_monte_carlo() {
        let c = SystemConfig::new(SystemParams::default()).unwrap();
        let n = 100_000u64;
        let mean: f64 = (0..n)
            .map(|t| sample_trial(&c, 11, t).order_stat(2).unwrap())
            .sum::<f64>()
            / n as f64;
        let exact = expected_order_stat(6, 2, 0.8).unwrap();
        assert!((mean - exact).abs() / exact < 0.01, "{mean} vs {exact}");
    }

    #[test]
    fn completed_by_cases() {
        let c = cfg(2, 60, 0.5, 1.0);
        assert_eq!(completed_by(0.5, 1.0, &c), 0);
        assert_eq!(completed_by(2.5, 0.0, &c), 2);
        assert_eq!(completed_by(100.0, 0.0, &c), 30);
        let c = cfg(6, 60, 0.5, 0.005);
        let lambda = 0.123_456_789;
        for j in 0..=30 {
            assert_eq!(completed_by(lambda + j as f64 * 0.005, lambda, &c), j);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = SystemConfig::new(SystemParams::default()).unwrap();
        let a = sample_stragglers(&c, 42);
        let b = sample_stragglers(&c, 42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert!(a.lambdas().iter().all(|&l| l >= 0.0));
        assert_ne!(sample_trial(&c, 42, 1), sample_trial(&c, 42, 2));
    }

    #[test]
    fn exponential_moments() {
        let c = SystemConfig::new(SystemParams::default()).unwrap();
        let draws: Vec<f64> = (0..1_000_000 / 6 + 1)
            .flat_map(|t| sample_trial(&c, 5, t).lambdas().to_vec())
            .take(1_000_000)
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 1.25).abs() / 1.25 < 0.01, "mean {mean}");
        assert!((var - 1.5625).abs() / 1.5625 < 0.03, "var {var}");
    }

    #[test]
    fn binomials_and_subsets() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(2, 2), 1);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(0, 0), 1);
        let s = subsets(4, 2);
        assert_eq!(
            s,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
        for n in 0..8 {
            for r in 0..=n {
                assert_eq!(subsets(n, r).len() as u128, binomial(n, r));
            }
        }
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        let s = StragglerSample::new(vec![0.3, 0.1, 0.3, 0.0]).unwrap();
        assert_eq!(s.ranking(), vec![3, 1, 0, 2]);
        assert_eq!(s.order_stat(2).unwrap(), 0.1);
        assert!(StragglerSample::new(vec![-1.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn completed_by_monotone(l in 0.0f64..2.0, t1 in 0.0f64..3.0, dt in 0.0f64..1.0) {
                let c = cfg(6, 60, 0.5, 0.01);
                prop_assert!(completed_by(t1, l, &c) <= completed_by(t1 + dt, l, &c));
            }

            #[test]
            fn order_stat_nondecreasing_in_q(k in 1usize..20, eta in 0.1f64..10.0) {
                let v: Vec<f64> = (1..=k).map(|q| expected_order_stat(k, q, eta).unwrap()).collect();
                prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
