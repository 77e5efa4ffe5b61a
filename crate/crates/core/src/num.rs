//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type the solvers are generic over (`f32` or `f64`).
///
/// Tolerances in the crate are written as `f64` literals and converted with
/// [`Scalar::tol`], which never returns anything finer than a small multiple of
/// the type's machine epsilon. An `f64` tolerance of `1e-12` therefore stays
/// `1e-12` for `f64` but is widened for `f32`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Relative precision floor used by [`Scalar::tol`].
    const EPS_FLOOR: f64;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn tol(x: f64) -> Self {
        Self::of(x.max(Self::EPS_FLOOR))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// `log2(1 + x)`, accurate for small `x`.
    fn log2_1p(self) -> Self {
        self.ln_1p() / Self::ln2()
    }

    fn ln2() -> Self {
        Self::of(std::f64::consts::LN_2)
    }
}

impl Scalar for f64 {
    const EPS_FLOOR: f64 = 1e-15;
}

impl Scalar for f32 {
    const EPS_FLOOR: f64 = 1e-5;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_depends_on_type() {
        assert_eq!(<f64 as Scalar>::tol(1e-12), 1e-12);
        assert!(<f32 as Scalar>::tol(1e-12) >= 1e-5);
        assert_eq!(<f32 as Scalar>::tol(1e-3), 1e-3_f32);
    }

    #[test]
    fn log2_1p_matches_direct_form() {
        for &x in &[0.0, 1e-12, 0.5, 3.0, 1e6] {
            let a: f64 = x.log2_1p();
            let b = (1.0 + x).log2();
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}
