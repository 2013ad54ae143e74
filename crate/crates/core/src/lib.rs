//! Minimum-energy bounds for controlling linear dynamics on weighted networks.
//!
//! The system is `ẋ = A x + B u` with a symmetric adjacency `A` and an input
//! matrix `B` that injects one signal per driver node. For a unit target state
//! the minimum control energy over a horizon `tf` lies between
//! `1/λ_max(G)` and `1/λ_min(G)`, where `G` is the finite-horizon
//! controllability Gramian. This crate
//!
//! * generates the scale-free test networks ([`netgen`]),
//! * builds `G` in closed form through the spectrum of `A` ([`gramian`]),
//! * estimates the extremal eigenvalues from traces of `M²`/`M⁴` ([`bounds`]),
//! * sweeps `tf` and fits the asymptotic scaling laws ([`scaling`]),
//! * orchestrates preset experiments and the acceptance checks
//!   ([`experiment`], [`acceptance`]).
//!
//! Quantities that leave the `f64` range at long horizons are carried as
//! natural logarithms ([`Magnitude`]). Single-driver Gramians are so badly
//! conditioned that their smallest eigenvalue is computed in MPFR arithmetic
//! ([`precise`]).

pub mod acceptance;
pub mod bounds;
mod error;
pub mod experiment;
pub mod gramian;
mod magnitude;
pub mod netgen;
pub mod par;
pub mod precise;
pub mod scaling;
pub mod spectral;

pub use error::{Error, Result};
pub use magnitude::{log_add_exp, log_sum_exp, Magnitude};
