//! Random matrix-product states and their projected ensembles.
//!
//! The crate builds random MPS from two circuit architectures (a sequential
//! staircase and a glued shallow circuit), samples projective measurements on
//! a region `B`, and computes frame potentials of the resulting ensemble on
//! region `A` three ways:
//!
//! * Monte-Carlo estimates from Born-rule sampling ([`estimator`]);
//! * exact averages from the replica transfer-matrix chain over `S_m`
//!   ([`replica`]);
//! * scaling-limit closed forms ([`theory`]).
//!
//! A dense statevector simulator ([`tensorstate::oracle`]) provides an
//! independent reference for tiny systems.

pub mod error;
pub mod estimator;
pub mod numeric;
pub mod permgroup;
pub mod replica;
pub mod rng;
pub mod tensorstate;
pub mod theory;
pub mod weingarten;

pub use error::{Error, Result};
pub use numeric::LogValue;
pub use permgroup::{Permutation, ReplicaShape};
pub use weingarten::{EnsembleKind, PermIndexedMatrix};

/// Circuit architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    /// Sequential gates in `U(dχ)`; region `A` is the first `N_A` sites.
    Staircase,
    /// Parallel blocks in `U(dχ²)` joined by `U(χ²)` gates on auxiliaries.
    Glued,
}

impl std::fmt::Display for Setup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Setup::Staircase => write!(f, "staircase"),
            Setup::Glued => write!(f, "glued"),
        }
    }
}

impl std::str::FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "staircase" | "1" | "I" => Ok(Setup::Staircase),
            "glued" | "2" | "II" => Ok(Setup::Glued),
            other => Err(Error::Parse(format!("unknown setup '{other}'"))),
        }
    }
}
