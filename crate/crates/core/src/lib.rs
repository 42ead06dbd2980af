//! Exact degrees-of-freedom analysis for layered multi-source multi-destination
//! relay networks.
//!
//! The crate computes the achievable (interference-alignment, decode-and-forward)
//! and cut-set sum-DoF bounds of a layered network, their gap and optimality,
//! checks demand matrices against the achievable region, synthesizes the
//! phase schedule and message split plan that reach it, and classifies how
//! the sum DoF scales over parameterized topology families.
//!
//! The closed forms are generic over [`Scalar`]; [`Rational`] is the exact
//! default and the aliases below fix it.

pub mod analysis;
pub mod error;
pub mod model;
pub mod num;
pub mod region;
pub mod scaling;
pub mod schedule;

pub use analysis::{analyze, AnalysisReport};
pub use error::{Error, Result};
pub use model::{validate_demand, DemandIssue, DemandMatrix, LayerSpec, NetworkTopology};
pub use num::{Ext, ExtCount, Scalar};
pub use region::{check_demand, max_uniform_scale, RegionVerdict};
pub use scaling::{classify, FamilySpec, ScalingClass, ScalingVerdict};
pub use schedule::{integer_schedule, verify_schedule, Schedule, SplitPlan};

/// Arbitrary-precision exact rational.
pub type Rational = num_rational::BigRational;
/// Exact rational extended with infinity.
pub type ExtRational = Ext<Rational>;
pub type ExtF64 = Ext<f64>;
pub type ExactReport = AnalysisReport<Rational>;
pub type ExactDemand = DemandMatrix<Rational>;
pub type ExactVerdict = RegionVerdict<Rational>;
