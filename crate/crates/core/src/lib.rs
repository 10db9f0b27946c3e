//! Computational toolkit for theta-expansions with `theta^2 = 1/m`.
//!
//! The crate provides exact digit and convergent arithmetic over
//! Q(1/sqrt(m)), the geometry of fundamental (cylinder) intervals, the
//! invariant measure of the underlying Gauss-type map, closed-form and
//! covering-sum Hausdorff-dimension bounds for bounded-digit sets, and
//! constructions and statistics for extreme values of partial quotients.

pub mod bigfloat;
pub mod bounds;
pub mod error;
pub mod expansion;
pub mod extremes;
pub mod highprec;
pub mod intervals;
pub mod measure;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use expansion::{ConvergentPair, DigitSeq};
pub use intervals::FundamentalInterval;
pub use quad::QuadValue;
