//! Zonotopes whose noise symbols are constrained by an interval domain.
//!
//! The crate provides the abstract domain of constrained affine sets
//! ([`ConstrainedAffineSet`]) with its transfer functions, test
//! interpretation, order and join, plus a small analyzer for a real-valued
//! imperative language built on top of it.
//!
//! Every numeric routine is generic over [`Scalar`]; the aliases at the crate
//! root fix the common instantiations.

pub mod error;
pub mod scalar;
pub mod interval;
pub mod noise;
pub mod affine;
mod lp;
pub mod order;
pub mod ast;
pub mod transfer;
pub mod state;
pub mod guards;
pub mod join;
pub mod analyzer;

pub use error::{Error, Result};
pub use affine::{AffineForm, ConstrainedAffineSet};
pub use interval::Interval;
pub use noise::{LinearConstraint, NoiseBox, NoiseId, NoiseKind, Relation};
pub use order::{leq_form, leq_set_exact, leq_set_sufficient, Verdict};
pub use scalar::{Rational, Scalar};
pub use transfer::{Combination, Evaluator, MulMode};
pub use state::AbstractState;
pub use join::{join_forms, join_sets, JoinKind, JoinedForm};
pub use guards::{minimize_abs_sum, AbsTerm, MinimizeAbsSumProblem};
pub use analyzer::{analyze, analyze_source, check_soundness, AnalysisResult, AnalyzerConfig};

pub type AffineSet = ConstrainedAffineSet<f64>;
pub type ExactAffineSet = ConstrainedAffineSet<Rational>;
pub type Form = AffineForm<f64>;
pub type ExactForm = AffineForm<Rational>;
pub type Noise = NoiseBox<f64>;
pub type ExactNoise = NoiseBox<Rational>;
pub type Range = Interval<f64>;
pub type ExactRange = Interval<Rational>;
