//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand. The unstable band of the lattice
//! amplifies rounding noise by `exp(m t)`; at `m t ~ 40` that eats all of an
//! `f64` significand, so the classical pipeline runs in this type.
//!
//! Only what the field code needs is provided: the four operations, `sqrt`,
//! `exp`, `sin`/`cos` and `cosh`/`sinh`. Transcendentals are accurate to a few
//! units of 1e-32 relative for the argument ranges seen here (|x| up to ~1e5
//! for the trigonometric functions).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: 3.141_592_653_589_793_116e0,
        lo: 1.224_646_799_147_353_207e-16,
    };
    pub const TWO_PI: Self = Self {
        hi: 6.283_185_307_179_586_232e0,
        lo: 2.449_293_598_294_706_414e-16,
    };
    pub const FRAC_PI_2: Self = Self {
        hi: 1.570_796_326_794_896_558e0,
        lo: 6.123_233_995_736_766_036e-17,
    };
    pub const LN_2: Self = Self {
        hi: 6.931_471_805_599_452_862e-1,
        lo: 2.319_046_813_846_299_558e-17,
    };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Multiplication by an exact power of two.
    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Self::new(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Self::new(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }

    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            // hi already integral; round lo and renormalize.
            let lo = self.lo.round();
            let (hi, lo) = quick_two_sum(hi, lo);
            Self { hi, lo }
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // tie on hi resolved by the sign of lo
            let h = if self.lo > 0.0 { self.hi.ceil() } else { self.hi.floor() };
            Self::new(h)
        } else {
            Self::new(hi)
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 { Self::ZERO } else { Self::new(f64::NAN) };
        }
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let resid = self - Self { hi: p, lo: e };
        Self::new(s) + Self::new(resid.hi / (2.0 * s))
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Self::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / Self::LN_2.hi).round();
        let r = self - Self::LN_2.mul_f64(k);
        // exp(r) = (exp(r / 1024))^1024, carried as expm1 to keep the small part exact.
        let s = r.ldexp(-10);
        let mut term = s;
        let mut p = s;
        for n in 2..=11 {
            term = (term * s).div_f64(n as f64);
            p += term;
        }
        for _ in 0..10 {
            p = p * (p + Self::new(2.0));
        }
        (p + Self::ONE).ldexp(k as i32)
    }

    /// Returns `(sin x, cos x)`.
    pub fn sin_cos(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::new(f64::NAN), Self::new(f64::NAN));
        }
        let turns = (self / Self::TWO_PI).round();
        let r = self - Self::TWO_PI * turns;
        let quarter = (r / Self::FRAC_PI_2).round();
        let q = quarter.hi as i64;
        let r = r - Self::FRAC_PI_2 * quarter;
        let (s, c) = sin_cos_taylor(r);
        match q.rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(self) -> Self {
        self.sin_cos().1
    }

    /// Returns `(cosh x, sinh x)`.
    pub fn cosh_sinh(self) -> (Self, Self) {
        if self.hi.abs() < 0.5 {
            let x2 = self * self;
            let mut sinh = self;
            let mut cosh = Self::ONE;
            let mut ts = self;
            let mut tc = Self::ONE;
            let mut n = 1.0;
            loop {
                tc = (tc * x2).div_f64((n) * (n + 1.0));
                ts = (ts * x2).div_f64((n + 1.0) * (n + 2.0));
                cosh += tc;
                sinh += ts;
                n += 2.0;
                if tc.hi.abs() < 1e-34 && ts.hi.abs() <= 1e-34 * sinh.hi.abs() {
                    break;
                }
            }
            (cosh, sinh)
        } else {
            let e = self.exp();
            let inv = Self::ONE / e;
            ((e + inv).ldexp(-1), (e - inv).ldexp(-1))
        }
    }
}

/// Taylor series on |r| <= pi/4.
fn sin_cos_taylor(r: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    let r2 = r * r;
    let mut sin = r;
    let mut cos = DoubleDouble::ONE;
    let mut ts = r;
    let mut tc = DoubleDouble::ONE;
    let mut n = 1.0;
    while n < 60.0 {
        tc = -(tc * r2).div_f64(n * (n + 1.0));
        ts = -(ts * r2).div_f64((n + 1.0) * (n + 2.0));
        cos += tc;
        sin += ts;
        n += 2.0;
        if tc.hi.abs() < 1e-35 && ts.hi.abs() < 1e-35 {
            break;
        }
    }
    (sin, cos)
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi, f)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, y: Self) -> Self {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, y: Self) -> Self {
        let (p, e) = two_prod(self.hi, y.hi);
        let e = e + (self.hi * y.lo + self.lo * y.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        let q1 = self.hi / y.hi;
        let r = self - y.mul_f64(q1);
        let q2 = r.hi / y.hi;
        let r = r - y.mul_f64(q2);
        let q3 = r.hi / y.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, y: Self) -> Self {
        self - y * (self / y).trunc()
    }
}

impl DoubleDouble {
    pub fn floor(self) -> Self {
        let f = self.hi.floor();
        if f != self.hi {
            return Self::new(f);
        }
        let (hi, lo) = quick_two_sum(f, self.lo.floor());
        Self { hi, lo }
    }

    pub fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            -(-self).floor()
        }
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for DoubleDouble {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl num_traits::Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl num_traits::One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}

impl num_traits::Num for DoubleDouble {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        <f64 as num_traits::Num>::from_str_radix(s, radix).map(Self::new)
    }
}
