use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point element type shared by the regression and network code.
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Lift an `f64` constant into the scalar type.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    /// Condition number above which a Gram system counts as ill-conditioned.
    fn ill_conditioned() -> Self {
        Self::c(1e10).min(Self::c(0.01) / Self::epsilon())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
