//! Exact mixing analysis for random walks on finite groups.
//!
//! The crate enumerates small groups (cycles, Heisenberg groups mod `m` and
//! their direct products), evolves random walks on them exactly in discrete
//! and continuous time, and measures total variation and Hellinger distances
//! to the uniform law. On top of that sit the product-chain Hellinger
//! identity, explicit moderate-growth bounds, and the exponential-sum cutoff
//! machinery used to study families of product chains.

pub mod cutoff;
pub mod error;
pub mod group;
pub mod growth;
pub mod numeric;
pub mod output;
pub mod product;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use group::{GroupTable, DEFAULT_ENUMERATION_CAP};
pub use growth::{GeneratorSet, GrowthProfile, ModerateGrowthCert};
pub use product::ProductWalkSpec;
pub use walk::{Clock, DistanceCurve, Distribution, Metric, WalkSpec};

/// Version string echoed into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
