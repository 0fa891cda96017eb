//! Exact lower bounds on the peak and expected normalized delivery time (NDT)
//! of cache-aided interference networks with `K_T` cache-equipped
//! transmitters, `K_R` receivers and a library of `N` files under uniform
//! popularity, together with brute-force oracles for every combinatorial
//! step of the converse argument.
//!
//! All values are exact [`Rational`]s; floating point only appears when
//! rendering output or summarizing Monte-Carlo spread.

pub mod bound;
pub mod combinatorics;
pub mod comparator;
pub mod demand;
pub mod envelope;
pub mod error;
pub mod montecarlo;
pub mod oracle;

pub use bound::{
    bound_expression, envelope_for_sigma, expected_ndt_lower_bound, peak_ndt_lower_bound, per_category_bound,
    sweep, BoundCurve, BoundKind, EnvelopeOrder, NetworkConfig,
};
pub use combinatorics::{binom, surjection_count, Rational};
pub use demand::{distinct_distribution, DemandVector, DistinctCountDistribution};
pub use envelope::ConvexEnvelope;
pub use error::{Error, Result};
