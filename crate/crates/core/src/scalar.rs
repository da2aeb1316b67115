//! Scalar abstraction shared by the lattice code.
//!
//! The spectral pipeline is written once over [`Real`]; `f64` uses `rustfft`,
//! [`DoubleDouble`] uses an in-crate radix-2 transform with twiddles computed
//! in double-double (an `f64` twiddle table would cap the accuracy at `f64`).

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::dd::DoubleDouble;

pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + Default
    + PartialOrd
    + num_traits::Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    /// Unit roundoff of the type.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn pi() -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
    /// `(sin x, cos x)`
    fn sin_cos(self) -> (Self, Self);
    /// `(cosh x, sinh x)`
    fn cosh_sinh(self) -> (Self, Self);

    /// Unnormalized in-place DFT. Forward uses `exp(-2 pi i jk/N)`, inverse `exp(+...)`.
    fn fft(buf: &mut [Complex<Self>], inverse: bool);

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn cosh_sinh(self) -> (Self, Self) {
        (self.cosh(), self.sinh())
    }

    fn fft(buf: &mut [Complex<Self>], inverse: bool) {
        let mut planner = FftPlanner::new();
        let plan = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.93e-32;

    fn from_f64(x: f64) -> Self {
        DoubleDouble::new(x)
    }
    fn to_f64(self) -> f64 {
        self.hi()
    }
    fn pi() -> Self {
        DoubleDouble::PI
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        DoubleDouble::sin_cos(self)
    }
    fn cosh_sinh(self) -> (Self, Self) {
        DoubleDouble::cosh_sinh(self)
    }

    fn fft(buf: &mut [Complex<Self>], inverse: bool) {
        radix2_fft(buf, inverse);
    }
}

/// Iterative decimation-in-time radix-2 transform. Panics unless the length is a
/// power of two; `LatticeSpec` guarantees that.
pub(crate) fn radix2_fft<R: Real>(buf: &mut [Complex<R>], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "radix-2 transform needs a power-of-two length, got {n}");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    // twiddles w^j = exp(-+ 2 pi i j / n) for j < n/2
    let sign = if inverse { R::one() } else { -R::one() };
    let step = (R::pi() + R::pi()) / R::from_usize(n);
    let twiddles: Vec<Complex<R>> = (0..n / 2)
        .map(|j| {
            let (s, c) = (step * R::from_usize(j)).sin_cos();
            Complex::new(c, sign * s)
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}
