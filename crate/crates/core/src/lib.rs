//! Importance-sampling coresets for (k,z)-clustering under ℓ_p distances,
//! with the solver, distortion harness and lower-bound generators used to
//! evaluate them.

pub mod adversarial;
pub mod categorical;
pub mod codec;
pub mod coreset;
pub mod cost;
pub mod error;
pub mod harness;
pub mod lemma;
pub mod metric;
pub mod rng;
pub mod sampler;
pub mod solver;
pub mod subspace;
pub mod synthetic;
pub mod types;

pub use coreset::{cost_weighted, CoresetMeta, WeightedCoreset};
pub use cost::{assign, cost, ln_cost, Assignment, LogValue};
pub use error::{Error, Result};
pub use metric::{dist, Metric};
pub use sampler::{build, BuildConfig, Method, SensitivityProfile, TheorySizes};
pub use solver::{ApproxSolution, SolverConfig};
pub use types::{CenterSet, PointSet};
