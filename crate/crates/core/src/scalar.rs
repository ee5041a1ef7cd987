//! Floating-point scalar abstraction.
//!
//! Every amplitude and density-matrix entry in this crate is a
//! `Complex<S>` for some `S: Scalar`. `f64` is the working precision used by
//! the verifier defaults; `f32` is supported for cheap exploratory builds.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type usable for state amplitudes.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Amplitudes with modulus at or below this value are dropped after arithmetic.
    fn drop_tolerance() -> Self;

    /// Lossy conversion from `f64`; used for literals and serialized values.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn drop_tolerance() -> Self {
        1e-14
    }
}

impl Scalar for f32 {
    fn drop_tolerance() -> Self {
        1e-6
    }
}

/// `exp(2πi · e / d)`, with `e` reduced modulo `d`.
pub fn root_of_unity<S: Scalar>(e: u64, d: u64) -> Complex<S> {
    let e = e % d;
    if e == 0 {
        return Complex::new(S::one(), S::zero());
    }
    let angle = S::TAU() * S::of(e as f64) / S::of(d as f64);
    Complex::from_polar(S::one(), angle)
}

/// `1/√n`.
pub fn inv_sqrt<S: Scalar>(n: usize) -> S {
    S::one() / S::of(n as f64).sqrt()
}
