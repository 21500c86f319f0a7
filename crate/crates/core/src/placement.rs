//! What each edge node stores and the order in which it computes.
//!
//! Row identifiers are 0-based internally and refer either to the uncoded
//! rows `w_i` (uncoded scheme) or to coded rows `c_i` (MDS and hybrid). The
//! JSON form uses 1-based indices.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{binomial, subsets, SystemConfig};

/// Per-node ordered row lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    nodes: Vec<Vec<usize>>,
}

impl Schedule {
    /// Builds a schedule, rejecting a node that lists the same row twice.
    pub fn new(nodes: Vec<Vec<usize>>) -> Result<Self> {
        for (k, list) in nodes.iter().enumerate() {
            let mut seen = HashSet::with_capacity(list.len());
            if let Some(dup) = list.iter().find(|r| !seen.insert(**r)) {
                return Err(Error::Domain(format!(
                    "node {} lists row {} more than once",
                    k + 1,
                    dup + 1
                )));
            }
        }
        Ok(Schedule { nodes })
    }

    pub fn nodes(&self) -> &[Vec<usize>] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &[usize] {
        &self.nodes[k]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// One past the largest row identifier used.
    pub fn row_space(&self) -> usize {
        self.nodes.iter().flatten().max().map_or(0, |&r| r + 1)
    }

    /// How many nodes store each row in `0..row_space`.
    pub fn multiplicities(&self, row_space: usize) -> Vec<usize> {
        let mut mult = vec![0; row_space];
        for &r in self.nodes.iter().flatten() {
            if r < row_space {
                mult[r] += 1;
            }
        }
        mult
    }

    /// JSON array of per-node arrays of 1-based row indices.
    pub fn to_json(&self) -> String {
        let one_based: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|l| l.iter().map(|r| r + 1).collect())
            .collect();
        serde_json::to_string(&one_based).expect("plain integer arrays serialize")
    }

    /// Parses the form written by [`Schedule::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<Vec<usize>> =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("schedule JSON: {e}")))?;
        let mut nodes = Vec::with_capacity(raw.len());
        for (k, list) in raw.into_iter().enumerate() {
            let mut zero_based = Vec::with_capacity(list.len());
            for r in list {
                if r == 0 {
                    return Err(Error::Domain(format!(
                        "schedule JSON: node {} uses row index 0; indices are 1-based",
                        k + 1
                    )));
                }
                zero_based.push(r - 1);
            }
            nodes.push(zero_based);
        }
        Schedule::new(nodes)
    }

    /// Checks that this schedule fits `config`: K nodes, each listing exactly
    /// `m·μ` rows drawn from `0..row_space`.
    pub fn check_against(&self, config: &SystemConfig, row_space: usize) -> Result<()> {
        if self.nodes.len() != config.nodes() {
            return Err(Error::Shape(format!(
                "schedule has {} nodes, configuration has {}",
                self.nodes.len(),
                config.nodes()
            )));
        }
        for (k, list) in self.nodes.iter().enumerate() {
            if list.len() != config.rows_per_node() {
                return Err(Error::Shape(format!(
                    "node {} lists {} rows, storage holds {}",
                    k + 1,
                    list.len(),
                    config.rows_per_node()
                )));
            }
            if let Some(r) = list.iter().find(|&&r| r >= row_space) {
                return Err(Error::Shape(format!(
                    "node {} lists row {} outside 1..={}",
                    k + 1,
                    r + 1,
                    row_space
                )));
            }
        }
        Ok(())
    }
}

/// Cyclic repetition of the uncoded rows.
///
/// Stepping by `K` modulo `m` splits the rows into `d = gcd(K, m)` orbits of
/// length `m/d` (`O_c = c, c+K, c+2K, …`). Node `k` walks the orbit through
/// row `k mod m`; after each full lap it hops to the next orbit, one index
/// further along. Orbits never repeat within a node, and every row is stored
/// `⌊Kμ⌋` or `⌈Kμ⌉` times. For `m = 6, μ = 1/2, K = 3` this yields
/// `[w1,w4,w5]`, `[w2,w5,w6]`, `[w3,w6,w4]`.
pub fn cyclic_schedule(config: &SystemConfig) -> Schedule {
    let k_nodes = config.nodes();
    let m = config.rows();
    let per_node = config.rows_per_node();
    let d = gcd(k_nodes, m);
    let lap = m / d;
    let orbit_row = |c: usize, j: usize| (c + j * k_nodes) % m;
    let mut index = vec![0; m];
    for c in 0..d {
        for j in 0..lap {
            index[orbit_row(c, j)] = j;
        }
    }

    let nodes = (0..k_nodes)
        .map(|k| {
            let start = k % m;
            let (c, j) = (start % d, index[start]);
            (0..per_node)
                .map(|i| {
                    let (hop, step) = (i / lap, i % lap);
                    orbit_row((c + hop) % d, (j + step + hop) % lap)
                })
                .collect()
        })
        .collect();
    Schedule { nodes }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Disjoint blocks of an `(K·m·μ, m)` MDS code: node `k` stores coded rows
/// `k·mμ .. (k+1)·mμ`, computed in ascending order.
pub fn mds_placement(config: &SystemConfig) -> Schedule {
    let per_node = config.rows_per_node();
    let nodes = (0..config.nodes())
        .map(|k| (k * per_node..(k + 1) * per_node).collect())
        .collect();
    Schedule { nodes }
}

/// Design parameters of the hybrid scheme. The MDS expansion `ρ1 = mprime/m`
/// is carried as the integer coded-row count `mprime`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HybridParams {
    /// Nodes awaited before the downlink starts.
    pub q: usize,
    /// Coded rows produced by the outer MDS code.
    pub mprime: usize,
    /// Nodes each coded row is replicated to.
    pub rho2: usize,
}

impl HybridParams {
    pub fn new(q: usize, mprime: usize, rho2: usize) -> Self {
        HybridParams { q, mprime, rho2 }
    }

    /// `ρ1 = mprime / m`.
    pub fn rho1(&self, config: &SystemConfig) -> f64 {
        self.mprime as f64 / config.rows() as f64
    }

    /// Number of node subsets (groups), `C(K, ρ2)`.
    pub fn groups(&self, config: &SystemConfig) -> u128 {
        binomial(config.nodes(), self.rho2)
    }

    /// Coded rows per group, `b = mprime / C(K, ρ2)` (floored).
    pub fn rows_per_group(&self, config: &SystemConfig) -> usize {
        match self.groups(config) {
            0 => 0,
            g => (self.mprime as u128 / g) as usize,
        }
    }

    /// Rows actually stored per node, `b·C(K−1, ρ2−1) = ρ1ρ2m/K`.
    pub fn rows_per_node(&self, config: &SystemConfig) -> usize {
        if self.rho2 == 0 {
            return 0;
        }
        (self.rows_per_group(config) as u128 * binomial(config.nodes() - 1, self.rho2 - 1)) as usize
    }

    /// Whether `ρ1` lies on the grid `{1, (q+1)/q, …, K/q}`.
    pub fn on_coarse_grid(&self, config: &SystemConfig) -> bool {
        let m = config.rows();
        let scaled = self.mprime * self.q;
        scaled.is_multiple_of(m) && (self.q..=config.nodes()).contains(&(scaled / m))
    }
}

impl fmt::Display for HybridParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(q={}, mprime={}, rho2={})",
            self.q, self.mprime, self.rho2
        )
    }
}

/// A violated hybrid design condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum HybridViolation {
    /// `q` outside `[⌈1/μ⌉, K]`.
    WaitCount { q: usize, min: usize, max: usize },
    /// `ρ2` outside `[1, K]`.
    Repetition { rho2: usize, nodes: usize },
    /// `ρ1 < 1`.
    CodeRate { mprime: usize, rows: usize },
    /// `mprime` not divisible by `C(K, ρ2)`.
    Divisibility { mprime: usize, groups: u128 },
    /// `ρ1ρ2 > Kμ`, i.e. `mprime·ρ2 > K·mμ`.
    Storage { demand: u128, budget: u128 },
    /// `(C(K,ρ2) − C(K−q,ρ2))·ρ1 < C(K,ρ2)`: the `q` fastest nodes may not
    /// hold `m` distinct coded rows.
    Recovery { covered: u128, required: u128 },
}

impl fmt::Display for HybridViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HybridViolation::WaitCount { q, min, max } => {
                write!(f, "q={q} outside [{min}, {max}]")
            }
            HybridViolation::Repetition { rho2, nodes } => {
                write!(f, "rho2={rho2} outside [1, {nodes}]")
            }
            HybridViolation::CodeRate { mprime, rows } => {
                write!(f, "mprime={mprime} below m={rows} (rho1 < 1)")
            }
            HybridViolation::Divisibility { mprime, groups } => {
                write!(f, "mprime={mprime} not divisible by C(K,rho2)={groups}")
            }
            HybridViolation::Storage { demand, budget } => write!(
                f,
                "storage condition: mprime*rho2={demand} exceeds K*m*mu={budget}"
            ),
            HybridViolation::Recovery { covered, required } => write!(
                f,
                "recovery condition: (C(K,rho2)-C(K-q,rho2))*mprime={covered} below C(K,rho2)*m={required}"
            ),
        }
    }
}

/// Checks every hybrid design condition, returning all violations.
pub fn validate_hybrid(
    config: &SystemConfig,
    params: &HybridParams,
) -> std::result::Result<(), Vec<HybridViolation>> {
    let k = config.nodes();
    let m = config.rows();
    let mut violations = Vec::new();

    let q_min = config.mds_threshold();
    if params.q < q_min || params.q > k {
        violations.push(HybridViolation::WaitCount {
            q: params.q,
            min: q_min,
            max: k,
        });
    }
    let rho2_ok = (1..=k).contains(&params.rho2);
    if !rho2_ok {
        violations.push(HybridViolation::Repetition {
            rho2: params.rho2,
            nodes: k,
        });
    }
    if params.mprime < m {
        violations.push(HybridViolation::CodeRate {
            mprime: params.mprime,
            rows: m,
        });
    }
    if rho2_ok {
        let groups = binomial(k, params.rho2);
        if !(params.mprime as u128).is_multiple_of(groups) {
            violations.push(HybridViolation::Divisibility {
                mprime: params.mprime,
                groups,
            });
        }
        let demand = params.mprime as u128 * params.rho2 as u128;
        let budget = k as u128 * config.rows_per_node() as u128;
        if demand > budget {
            violations.push(HybridViolation::Storage { demand, budget });
        }
        let missed = binomial(k.saturating_sub(params.q), params.rho2);
        let covered = (groups - missed) * params.mprime as u128;
        let required = groups * m as u128;
        if covered < required {
            violations.push(HybridViolation::Recovery { covered, required });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Node subsets of size `ρ2` in lexicographic order; group `g` owns coded rows
/// `g·b .. (g+1)·b`.
pub fn hybrid_groups(config: &SystemConfig, params: &HybridParams) -> Vec<Vec<usize>> {
    subsets(config.nodes(), params.rho2)
}

/// Concatenated MDS + repetition placement. Each group of `b` coded rows is
/// stored at every node of its subset; a node computes its groups in
/// lexicographic subset order, rows ascending within a group.
pub fn hybrid_placement(config: &SystemConfig, params: &HybridParams) -> Result<Schedule> {
    validate_hybrid(config, params).map_err(Error::InvalidHybrid)?;
    let b = params.rows_per_group(config);
    let mut nodes = vec![Vec::with_capacity(params.rows_per_node(config)); config.nodes()];
    for (g, members) in hybrid_groups(config, params).iter().enumerate() {
        for &k in members {
            nodes[k].extend(g * b..(g + 1) * b);
        }
    }
    Ok(Schedule { nodes })
}
