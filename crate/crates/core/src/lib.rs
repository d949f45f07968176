//! Planning for goal and plan obfuscation or legibility against an observer
//! who sees only a many-to-one projection of the agent's actions.
//!
//! The core is generic over the numeric type used for costs and distances
//! (see [`scalar::Scalar`]); the aliases below fix the common choices.

pub mod belief;
pub mod distances;
pub mod generate;
pub mod io;
pub mod observation;
pub mod oracle;
pub mod plangraph;
pub mod scalar;
pub mod search;
pub mod strips;

use num_rational::Ratio;

/// Exact costs and distances.
pub type Rational = Ratio<i64>;

pub type Domain = strips::GroundedDomain<Rational>;
pub type Config = search::VariantConfig<Rational>;
pub type Outcome = search::SearchResult<Rational>;

pub type DomainF64 = strips::GroundedDomain<f64>;
pub type ConfigF64 = search::VariantConfig<f64>;
pub type OutcomeF64 = search::SearchResult<f64>;
