use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Engine-level numerical tolerance (norms, exact identities).
pub const ENGINE_TOLERANCE: f64 = 1e-12;
/// Protocol-level tolerance (fidelities of protocol outputs).
pub const PROTOCOL_TOLERANCE: f64 = 1e-9;

/// Real scalar the statevector engine is generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }

    /// Amplitudes below this norm squared are treated as exact zeros.
    fn zero_threshold() -> Self;
}

impl Scalar for f64 {
    fn zero_threshold() -> Self {
        1e-28
    }
}

impl Scalar for f32 {
    fn zero_threshold() -> Self {
        1e-14
    }
}
