//! Walsh–Paley analysis on the dyadic group.
//!
//! Points of the group are encoded as integers whose bit `j` is the
//! coordinate `x_j`; group addition is bitwise XOR and
//! `w_n(x) = (-1)^{popcount(n & x)}`. Functions are [`StepFunction`]s constant
//! on the rank-`N` dyadic intervals, held either as exact dyadic rationals or
//! as doubles.

pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod group;
pub mod index;
pub mod martingale;
pub mod norms;
pub mod transform;

pub use dyadic::{Dyadic, Number};
pub use error::{Error, Result};
pub use group::{DyadicInterval, Mode, Point, Samples, StepFunction};
pub use index::{expand, IndexExpansion, IndexSequence, SequenceKind};
pub use martingale::{build, ConstructionSpec, RealizedConstruction, Theorem, WeightFunction};
pub use norms::NormValue;
pub use transform::CoefficientVector;
