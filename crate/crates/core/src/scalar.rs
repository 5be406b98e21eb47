//! Real scalars with selectable precision.
//!
//! Everything numeric in the solvers is generic over [`Real`]. Two backends
//! exist: `f64` and [`BigReal`], an MPFR float whose mantissa width is fixed
//! when the value is created.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rug::integer::Order;
use rug::Assign;

/// Mantissa width in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(pub u32);

impl Precision {
    pub const DOUBLE: Precision = Precision(53);

    /// Default working precision for an instance of bit complexity `l`.
    pub fn for_bit_complexity(l: u32) -> Precision {
        Precision(8 * l + 64)
    }

    /// Number of 64-bit words one scalar of this precision occupies.
    pub fn words(self) -> usize {
        (self.0 as usize).div_ceil(64).max(1)
    }
}

pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    fn from_f64(v: f64, prec: Precision) -> Self;
    fn from_i128(v: i128, prec: Precision) -> Self;
    fn from_bigint(v: &BigInt, prec: Precision) -> Self;
    /// Exact conversion when the precision allows it, nearest otherwise.
    fn from_rational(v: &BigRational, prec: Precision) -> Self {
        Self::from_bigint(v.numer(), prec) / Self::from_bigint(v.denom(), prec)
    }
    /// `2^k`, exact.
    fn pow2(k: i64, prec: Precision) -> Self;

    fn zero(prec: Precision) -> Self {
        Self::from_i128(0, prec)
    }
    fn one(prec: Precision) -> Self {
        Self::from_i128(1, prec)
    }

    /// Overwrites the value in place, keeping the precision.
    fn set_i128(&mut self, v: i128);
    fn set_zero(&mut self) {
        self.set_i128(0);
    }

    fn precision(&self) -> Precision;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn abs(&self) -> Self;
    fn recip(&self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    /// Base-2 exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    fn log2_magnitude(&self) -> Option<i64>;

    /// Nearest integer, ties away from zero.
    fn round_to_bigint(&self) -> Option<BigInt>;
    /// Exact value as a rational.
    fn to_rational(&self) -> Option<BigRational>;

    /// Unit roundoff `2^-p`.
    fn unit_roundoff(prec: Precision) -> f64 {
        (-(prec.0 as f64)).exp2()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(v: f64, _: Precision) -> Self {
        v
    }
    fn from_i128(v: i128, _: Precision) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt, _: Precision) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }
    fn pow2(k: i64, _: Precision) -> Self {
        (k as f64).exp2()
    }
    fn set_i128(&mut self, v: i128) {
        *self = v as f64;
    }
    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn log2_magnitude(&self) -> Option<i64> {
        if *self == 0.0 || !self.is_finite() {
            return None;
        }
        Some(self.abs().log2().floor() as i64 + 1)
    }
    fn round_to_bigint(&self) -> Option<BigInt> {
        BigInt::from_f64(self.round())
    }
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
}

/// Arbitrary-precision binary float backed by MPFR.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(pub rug::Float);

impl BigReal {
    pub fn inner(&self) -> &rug::Float {
        &self.0
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.0.to_f64())
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0.to_f64(), f)
    }
}

fn bigint_to_rug(v: &BigInt) -> rug::Integer {
    let digits = v.magnitude().to_u64_digits();
    let mag = rug::Integer::from_digits(&digits, Order::Lsf);
    if v.sign() == Sign::Minus {
        -mag
    } else {
        mag
    }
}

fn rug_to_bigint(v: &rug::Integer) -> BigInt {
    let digits = v.to_digits::<u64>(Order::Lsf);
    let mut out = BigInt::zero();
    for d in digits.iter().rev() {
        out <<= 64;
        out += *d;
    }
    if *v < 0 {
        -out
    } else {
        out
    }
}

macro_rules! big_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for BigReal {
            type Output = BigReal;
            fn $m(mut self, rhs: BigReal) -> BigReal {
                $atr::$am(&mut self.0, &rhs.0);
                self
            }
        }
        impl<'a> $tr<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $m(mut self, rhs: &'a BigReal) -> BigReal {
                $atr::$am(&mut self.0, &rhs.0);
                self
            }
        }
        impl $atr for BigReal {
            fn $am(&mut self, rhs: BigReal) {
                $atr::$am(&mut self.0, &rhs.0);
            }
        }
        impl<'a> $atr<&'a BigReal> for BigReal {
            fn $am(&mut self, rhs: &'a BigReal) {
                $atr::$am(&mut self.0, &rhs.0);
            }
        }
    };
}

big_binop!(Add, add, AddAssign, add_assign);
big_binop!(Sub, sub, SubAssign, sub_assign);
big_binop!(Mul, mul, MulAssign, mul_assign);
big_binop!(Div, div, DivAssign, div_assign);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Real for BigReal {
    fn from_f64(v: f64, prec: Precision) -> Self {
        BigReal(rug::Float::with_val(prec.0, v))
    }
    fn from_i128(v: i128, prec: Precision) -> Self {
        BigReal(rug::Float::with_val(prec.0, v))
    }
    fn from_bigint(v: &BigInt, prec: Precision) -> Self {
        BigReal(rug::Float::with_val(prec.0, bigint_to_rug(v)))
    }
    fn from_rational(v: &BigRational, prec: Precision) -> Self {
        let q = rug::Rational::from((bigint_to_rug(v.numer()), bigint_to_rug(v.denom())));
        BigReal(rug::Float::with_val(prec.0, q))
    }
    fn pow2(k: i64, prec: Precision) -> Self {
        let k = i32::try_from(k).expect("exponent out of range");
        BigReal(rug::Float::with_val(prec.0, 1u32) << k)
    }
    fn set_i128(&mut self, v: i128) {
        self.0.assign(v);
    }
    fn set_zero(&mut self) {
        self.0.assign(0u32);
    }
    fn precision(&self) -> Precision {
        Precision(self.0.prec())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn sqrt(&self) -> Self {
        BigReal(self.0.clone().sqrt())
    }
    fn ln(&self) -> Self {
        BigReal(self.0.clone().ln())
    }
    fn abs(&self) -> Self {
        BigReal(self.0.clone().abs())
    }
    fn recip(&self) -> Self {
        BigReal(self.0.clone().recip())
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero() && !self.0.is_nan()
    }
    fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero() && !self.0.is_nan()
    }
    fn log2_magnitude(&self) -> Option<i64> {
        if self.0.is_zero() || !self.0.is_finite() {
            return None;
        }
        self.0.get_exp().map(i64::from)
    }
    fn round_to_bigint(&self) -> Option<BigInt> {
        if !self.0.is_finite() {
            return None;
        }
        let r = self.0.clone().round();
        r.to_integer().map(|i| rug_to_bigint(&i))
    }
    fn to_rational(&self) -> Option<BigRational> {
        let (mant, exp) = self.0.to_integer_exp()?;
        let m = rug_to_bigint(&mant);
        Some(if exp >= 0 {
            BigRational::from_integer(m << exp as usize)
        } else {
            BigRational::new(m, BigInt::from(1u8) << (-exp) as usize)
        })
    }
}

/// Dot product of two equal-length vectors.
pub fn dot<T: Real>(a: &[T], b: &[T], prec: Precision) -> T {
    let mut acc = T::zero(prec);
    let mut tmp = T::zero(prec);
    for (x, y) in a.iter().zip(b) {
        tmp.clone_from(x);
        tmp *= y;
        acc += &tmp;
    }
    acc
}

/// `y += a * x`
pub fn axpy<T: Real>(y: &mut [T], a: &T, x: &[T]) {
    let mut tmp = a.clone();
    for (yi, xi) in y.iter_mut().zip(x) {
        tmp.clone_from(a);
        tmp *= xi;
        *yi += &tmp;
    }
}

pub fn zeros<T: Real>(n: usize, prec: Precision) -> Vec<T> {
    vec![T::zero(prec); n]
}

/// Largest absolute entry as `f64`.
pub fn max_abs_f64<T: Real>(v: &[T]) -> f64 {
    v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}
