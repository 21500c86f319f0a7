use thiserror::Error;

use crate::placement::HybridViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Every problem found while building a configuration, in discovery order.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("hybrid parameters rejected: {}", join_violations(.0))]
    InvalidHybrid(Vec<HybridViolation>),

    #[error("no hybrid candidate satisfies the storage and recovery conditions")]
    NoCandidates,

    #[error(
        "GF(2^{bits}) has {size} elements but {needed} distinct evaluation points are required"
    )]
    FieldTooSmall {
        bits: u32,
        size: usize,
        needed: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("selected rows have rank {rank}, {needed} required")]
    Singular { rank: usize, needed: usize },

    #[error("trial {trial} (base seed {base_seed}) failed: {source}")]
    Trial {
        trial: u64,
        base_seed: u64,
        #[source]
        source: Box<Error>,
    },
}

fn join_violations(v: &[HybridViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
