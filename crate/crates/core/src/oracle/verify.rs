//! Scheme-level decodability checks: simulate the stopping rule, collect the
//! computed IV indices, and decode a random model from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::latency::{row_redundancy, uc_stop};
use crate::model::{sample_trial, subsets, ComputationVector, StragglerSample, SystemConfig};
use crate::oracle::{decode_outputs, encode_model, feasible, mds_generator, GaloisField, GfMatrix};
use crate::placement::{hybrid_placement, mds_placement, HybridParams, Schedule};

/// Largest node count accepted for verification.
pub const MAX_NODES: usize = 8;
/// Largest model size accepted for verification.
pub const MAX_ROWS: usize = 24;
/// Columns of the random model `W` (the inner dimension of `W x`).
const MODEL_COLS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    /// Which case failed, e.g. `trial 7` or `finishers [1, 3]`.
    pub case: String,
    /// `(base_seed, trial)` when the case came from a simulated sample.
    pub seed: Option<(u64, u64)>,
    /// 1-based computed row indices.
    pub computed: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scheme: String,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<CheckFailure>,
}

impl VerifyReport {
    fn new(scheme: impl Into<String>) -> Self {
        VerifyReport {
            scheme: scheme.into(),
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }

    fn record(
        &mut self,
        case: String,
        seed: Option<(u64, u64)>,
        computed: &[usize],
        outcome: std::result::Result<(), String>,
    ) {
        self.total += 1;
        match outcome {
            Ok(()) => self.passed += 1,
            Err(reason) => self.failures.push(CheckFailure {
                case,
                seed,
                computed: computed.iter().map(|r| r + 1).collect(),
                reason,
            }),
        }
    }
}

/// Holds the field and the small-scale limits for one configuration.
pub struct Verifier<'a> {
    config: &'a SystemConfig,
    field: GaloisField,
}

impl<'a> Verifier<'a> {
    pub fn new(config: &'a SystemConfig) -> Result<Self> {
        if config.nodes() > MAX_NODES || config.rows() > MAX_ROWS {
            return Err(Error::Domain(format!(
                "verification is limited to K <= {MAX_NODES} and m <= {MAX_ROWS} (got K={}, m={})",
                config.nodes(),
                config.rows()
            )));
        }
        Ok(Verifier {
            config,
            field: GaloisField::new(config.field_bits())?,
        })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Encodes a random `W`, evaluates the computed IVs on a random `X` and
    /// checks that decoding reproduces `W X`.
    pub fn check_decode(
        &self,
        g: &GfMatrix,
        computed: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> std::result::Result<(), String> {
        if !feasible(&self.field, computed, g) {
            return Err("computed rows do not have full rank".into());
        }
        let m = g.cols();
        let n = self.config.users();
        let size = self.field.size();
        let w = GfMatrix::from_fn(m, MODEL_COLS, |_, _| rng.random_range(0..size) as u16);
        let x = GfMatrix::from_fn(MODEL_COLS, n, |_, _| rng.random_range(0..size) as u16);
        let run = || -> Result<bool> {
            let coded = encode_model(&self.field, g, &w)?;
            let ivs = coded.select_rows(computed)?.mul(&self.field, &x)?;
            let decoded = decode_outputs(&self.field, g, computed, &ivs)?;
            Ok(decoded == w.mul(&self.field, &x)?)
        };
        match run() {
            Ok(true) => Ok(()),
            Ok(false) => Err("decoded outputs differ from W X".into()),
            Err(e) => Err(e.to_string()),
        }
    }

    /// Uncoded scheme under `schedule`: for each sampled straggler pattern the
    /// IVs computed by `T_C` must decode, and those computed by the previous
    /// event time must not.
    pub fn uncoded(
        &self,
        schedule: &Schedule,
        samples: usize,
        base_seed: u64,
    ) -> Result<VerifyReport> {
        let c = self.config;
        schedule.check_against(c, c.rows())?;
        let g = GfMatrix::identity(c.rows());
        let mut report = VerifyReport::new("uc");
        for t in 0..samples as u64 {
            let sample = sample_trial(c, base_seed, t);
            let mut rng = data_rng(base_seed, t);
            let (computed, outcome) = match uc_stop(c, schedule, &sample) {
                Ok(stop) => {
                    let computed = computed_rows(schedule, &stop.vector, c.rows());
                    let mut outcome = self.check_decode(&g, &computed, &mut rng);
                    if let (Ok(()), Some(prev)) = (&outcome, stop.previous_event) {
                        let before = ComputationVector::at_time(prev, &sample, c);
                        if feasible(&self.field, &computed_rows(schedule, &before, c.rows()), &g) {
                            outcome = Err(format!("already decodable at earlier event t={prev}"));
                        }
                    }
                    (computed, outcome)
                }
                Err(e) => {
                    let all = ComputationVector::at_time(f64::INFINITY, &sample, c);
                    (computed_rows(schedule, &all, c.rows()), Err(e.to_string()))
                }
            };
            report.record(
                format!("trial {t}"),
                Some((base_seed, t)),
                &computed,
                outcome,
            );
        }
        Ok(report)
    }

    /// MDS scheme: the fastest `⌈1/μ⌉` nodes' coded rows must decode.
    pub fn mds(&self, samples: usize, base_seed: u64) -> Result<VerifyReport> {
        let c = self.config;
        let schedule = mds_placement(c);
        let g = mds_generator(&self.field, c.nodes() * c.rows_per_node(), c.rows())?;
        self.fastest_nodes("mc", &schedule, &g, c.mds_threshold(), samples, base_seed)
    }

    /// Hybrid scheme: the fastest `q` nodes' coded rows must decode.
    pub fn hybrid(
        &self,
        params: &HybridParams,
        samples: usize,
        base_seed: u64,
    ) -> Result<VerifyReport> {
        let schedule = hybrid_placement(self.config, params)?;
        let g = mds_generator(&self.field, params.mprime, self.config.rows())?;
        self.fastest_nodes(
            &format!("hs{params}"),
            &schedule,
            &g,
            params.q,
            samples,
            base_seed,
        )
    }

    /// MDS scheme with every `⌈1/μ⌉`-subset of finishers.
    pub fn mds_subsets(&self) -> Result<VerifyReport> {
        let c = self.config;
        let g = mds_generator(&self.field, c.nodes() * c.rows_per_node(), c.rows())?;
        self.all_subsets("mc", &mds_placement(c), &g, c.mds_threshold())
    }

    /// Hybrid scheme with every `q`-subset of finishers.
    pub fn hybrid_subsets(&self, params: &HybridParams) -> Result<VerifyReport> {
        let schedule = hybrid_placement(self.config, params)?;
        let g = mds_generator(&self.field, params.mprime, self.config.rows())?;
        self.all_subsets(&format!("hs{params}"), &schedule, &g, params.q)
    }

    fn fastest_nodes(
        &self,
        label: &str,
        schedule: &Schedule,
        g: &GfMatrix,
        q: usize,
        samples: usize,
        base_seed: u64,
    ) -> Result<VerifyReport> {
        let mut report = VerifyReport::new(label);
        for t in 0..samples as u64 {
            let sample: StragglerSample = sample_trial(self.config, base_seed, t);
            let finishers = &sample.ranking()[..q];
            let computed = finished_rows(schedule, finishers);
            let outcome = self.check_decode(g, &computed, &mut data_rng(base_seed, t));
            report.record(
                format!("trial {t}"),
                Some((base_seed, t)),
                &computed,
                outcome,
            );
        }
        Ok(report)
    }

    fn all_subsets(
        &self,
        label: &str,
        schedule: &Schedule,
        g: &GfMatrix,
        q: usize,
    ) -> Result<VerifyReport> {
        let mut report = VerifyReport::new(label);
        for (i, finishers) in subsets(self.config.nodes(), q).into_iter().enumerate() {
            let computed = finished_rows(schedule, &finishers);
            let outcome = self.check_decode(g, &computed, &mut data_rng(0, i as u64));
            let one_based: Vec<usize> = finishers.iter().map(|k| k + 1).collect();
            report.record(format!("finishers {one_based:?}"), None, &computed, outcome);
        }
        Ok(report)
    }
}

fn data_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    // separate key from the straggler streams
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ 0xD1B5_4A32_D192_ED03);
    rng.set_stream(trial);
    rng
}

/// Distinct rows inside the computed prefixes, ascending.
fn computed_rows(schedule: &Schedule, vector: &ComputationVector, row_space: usize) -> Vec<usize> {
    row_redundancy(schedule, vector, row_space)
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0)
        .map(|(i, _)| i)
        .collect()
}

/// Distinct rows stored at `finishers`, ascending.
fn finished_rows(schedule: &Schedule, finishers: &[usize]) -> Vec<usize> {
    let mut rows: Vec<usize> = finishers
        .iter()
        .flat_map(|&k| schedule.node(k).iter().copied())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::optimizer::enumerate_candidates;
    use crate::placement::cyclic_schedule;

    fn cfg(nodes: usize, rows: usize, mu: f64) -> SystemConfig {
        SystemConfig::new(SystemParams {
            nodes,
            rows,
            mu,
            ..SystemParams::default()
        })
        .unwrap()
    }

    #[test]
    fn mds_four_nodes() {
        let c = cfg(4, 4, 0.5);
        let v = Verifier::new(&c).unwrap();
        assert!(v.mds_subsets().unwrap().all_passed());
        let r = v.mds(100, 1).unwrap();
        assert_eq!((r.passed, r.total), (100, 100));
    }

    #[test]
    fn uncoded_minimal_stops() {
        let c = cfg(6, 12, 0.5);
        let v = Verifier::new(&c).unwrap();
        let r = v.uncoded(&cyclic_schedule(&c), 100, 2).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures.first());
    }

    #[test]
    fn uncoded_negative_control() {
        let c = cfg(3, 6, 0.5);
        let v = Verifier::new(&c).unwrap();
        let bad = Schedule::new(vec![vec![0, 1, 2], vec![0, 1, 2], vec![3, 4, 0]]).unwrap();
        let r = v.uncoded(&bad, 10, 3).unwrap();
        assert_eq!(r.passed, 0);
        assert_eq!(r.failures.len(), 10);
        assert_eq!(r.failures[0].computed, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.failures[0].seed, Some((3, 0)));
    }

    #[test]
    fn hybrid_candidates_decode() {
        let c = cfg(6, 12, 0.5);
        let v = Verifier::new(&c).unwrap();
        let cands = enumerate_candidates(&c);
        assert!(!cands.is_empty());
        for p in cands {
            let r = v.hybrid_subsets(&p).unwrap();
            assert!(r.all_passed(), "{p}: {:?}", r.failures.first());
        }
    }

    #[test]
    fn recovery_condition_is_tight() {
        // q=2 with rho2=1 needs mprime >= 36; violating it must fail decoding
        let c = cfg(6, 12, 0.5);
        let v = Verifier::new(&c).unwrap();
        let schedule =
            Schedule::new((0..6).map(|k| (k * 5..k * 5 + 5).collect()).collect()).unwrap();
        let g = mds_generator(v.field(), 30, 12).unwrap();
        let r = v.all_subsets("short", &schedule, &g, 2).unwrap();
        assert_eq!(r.passed, 0);
    }

    #[test]
    fn scale_limits() {
        assert!(Verifier::new(&cfg(6, 60, 0.5)).is_err());
        let small_field = SystemConfig::new(SystemParams {
            nodes: 6,
            rows: 12,
            field_bits: 4,
            ..SystemParams::default()
        })
        .unwrap();
        let v = Verifier::new(&small_field).unwrap();
        assert!(matches!(v.mds(1, 0), Err(Error::FieldTooSmall { .. })));
    }
}
