use ndarray::NdFloat;
use num_traits::FromPrimitive;

/// Floating-point scalar the whole library is generic over.
///
/// Implemented for `f32` and `f64`. Solvers accumulate in `T`, so `f64` is
/// the type to use unless memory is the constraint.
pub trait Real: NdFloat + FromPrimitive + std::iter::Sum + Default {
    /// Lossy conversion from an `f64` constant.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    /// Machine epsilon as `f64`, handy for tolerance arithmetic.
    fn eps64() -> f64 {
        Self::epsilon().to_f64().unwrap_or(f64::EPSILON)
    }
}

impl Real for f32 {}
impl Real for f64 {}
