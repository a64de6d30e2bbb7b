//! Reduction and symmetry verification for three classes of Ermakov systems.
//!
//! The numeric side (`shapefn`, `systems`, `integrate`, `reduce`, `symflow`)
//! is generic over the floating point scalar through [`Real`]; the exact side
//! (`symexpr`) works over the field Q(sqrt 2, i) with arbitrary precision
//! rationals. Concrete `f64` aliases live at the bottom of this file.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod integrate;
pub mod reduce;
pub mod shapefn;
pub mod symexpr;
pub mod symflow;
pub mod systems;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, ErrorCategory, Result};

/// Floating point scalar used by every numeric module: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for the primitive floats.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite float converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type SystemSpec64 = systems::SystemSpec<f64>;
pub type CartState64 = systems::CartState<f64>;
pub type PolarState64 = systems::PolarState<f64>;
pub type Trajectory64 = integrate::Trajectory<f64>;
pub type ReducedTrajectory64 = integrate::ReducedTrajectory<f64>;
pub type AngularLaw64 = reduce::AngularLaw<f64>;
pub type GeneratorNum64 = symflow::GeneratorNum<f64>;
pub type PullbackReport64 = symflow::PullbackReport<f64>;
