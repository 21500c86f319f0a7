//! Latency analysis for coded distributed linear inference at the wireless edge.
//!
//! A model matrix `W` (m rows) is stored across K edge nodes, each holding
//! `m·μ` (possibly coded) rows. Every node computes inner products between its
//! rows and the users' data after a random exponential setup delay, then the
//! computed intermediate values are delivered over a cooperative zero-forcing
//! downlink. Three storage schemes are modelled:
//!
//! * **uncoded** (cyclic repetition of the raw rows),
//! * **MDS** (each node stores distinct rows of an MDS code, the system waits
//!   for the fastest `⌈1/μ⌉` nodes),
//! * **hybrid** (an MDS code concatenated with a repetition code over node
//!   subsets, waiting for `q` nodes).
//!
//! [`latency`] evaluates per-sample and closed-form latencies, [`optimizer`]
//! searches the hybrid design space, [`montecarlo`] estimates expectations and
//! [`oracle`] checks decodability exactly over GF(2^L).

pub mod config;
pub mod error;
pub mod latency;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod oracle;
pub mod placement;

pub use error::{Error, Result};
pub use latency::{LatencyBreakdown, RedundancyProfile};
pub use model::{StragglerSample, SystemConfig, SystemParams};
pub use montecarlo::{SchemeSpec, TrialReport};
pub use placement::{HybridParams, HybridViolation, Schedule};
