//! Scalar abstraction shared by the linear algebra, Hamiltonian and
//! classification code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point type the numerical core is generic over.
///
/// Tolerances are tied to the precision of the type: the `f64` values are
/// the contract figures, the `f32` ones are scaled to what single precision
/// can actually deliver.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Maximum asymmetry `|M_ij - conj(M_ji)|` accepted for a Hermitian input.
    const HERMITIAN_TOL: Self;
    /// Maximum entry of `W^dag W - I` accepted for a unitary input.
    const UNITARY_TOL: Self;
    /// Target off-diagonal mass at which Jacobi sweeps stop.
    const JACOBI_EPS: Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

macro_rules! impl_real {
    ($t:ty, $herm:expr, $unit:expr, $jac:expr) => {
        impl Real for $t {
            const HERMITIAN_TOL: Self = $herm;
            const UNITARY_TOL: Self = $unit;
            const JACOBI_EPS: Self = $jac;
        }
    };
}

impl_real!(f64, 1e-12, 1e-8, 1e-17);
impl_real!(f32, 1e-5, 1e-4, 1e-8);
