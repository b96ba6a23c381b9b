//! Approximate reals: arbitrary-precision binary floats, a precision context
//! and values carrying an absolute error bound.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::BitTest;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type Real = FBig<HalfEven, 2>;

pub const DEFAULT_BITS: usize = 256;
pub const DEFAULT_TOLERANCE: f64 = 1e-30;

/// Working precision plus the absolute error every approximate result must meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionContext {
    pub working_bits: usize,
    pub target_abs_error: f64,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { working_bits: DEFAULT_BITS, target_abs_error: DEFAULT_TOLERANCE }
    }
}

impl PrecisionContext {
    pub fn new(working_bits: usize, target_abs_error: f64) -> Result<Self> {
        if working_bits < 64 {
            return Err(Error::InvalidArgument(format!("working precision must be >= 64 bits, got {working_bits}")));
        }
        if !(target_abs_error > 0.0 && target_abs_error.is_finite()) {
            return Err(Error::InvalidArgument(format!("target error must be positive, got {target_abs_error}")));
        }
        Ok(PrecisionContext { working_bits, target_abs_error })
    }

    /// Bits needed so that `2^-bits` is below the target error.
    pub fn target_bits(&self) -> usize {
        (-self.target_abs_error.log2()).ceil().max(0.0) as usize
    }

    pub fn with_bits(self, working_bits: usize) -> Self {
        PrecisionContext { working_bits, ..self }
    }

    pub fn with_target(self, target_abs_error: f64) -> Self {
        PrecisionContext { target_abs_error, ..self }
    }
}

/// A value with an absolute error bound.
#[derive(Debug, Clone)]
pub struct Approx {
    pub value: Real,
    pub error: Real,
}

impl Approx {
    pub fn exact(value: Real) -> Self {
        let error = zero(value.precision().max(64));
        Approx { value, error }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    pub fn error_f64(&self) -> f64 {
        to_f64(&self.error)
    }
}

fn ibig(x: &BigInt) -> IBig {
    IBig::from_le_bytes(&x.to_signed_bytes_le())
}

pub fn zero(bits: usize) -> Real {
    Real::ZERO.with_precision(bits).value()
}

pub fn from_int(x: &BigInt, bits: usize) -> Real {
    let exact = Real::from(ibig(x));
    if exact.precision() == 0 || exact.precision() > bits {
        exact.with_precision(bits).value()
    } else {
        // widen; widening never rounds
        Real::from_parts(ibig(x), 0).with_precision(bits).value()
    }
}

pub fn from_i64(x: i64, bits: usize) -> Real {
    from_int(&BigInt::from(x), bits)
}

pub fn from_rational(x: &BigRational, bits: usize) -> Real {
    if x.is_zero() {
        return zero(bits);
    }
    let num = from_int(x.numer(), bits + 8);
    let den = from_int(x.denom(), bits + 8);
    (num / den).with_precision(bits).value()
}

pub fn from_f64(x: f64, bits: usize) -> Real {
    Real::try_from(x).expect("finite float").with_precision(bits).value()
}

pub fn with_bits(x: &Real, bits: usize) -> Real {
    x.clone().with_precision(bits).value()
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

pub fn abs(x: &Real) -> Real {
    if x.sign() == dashu_int::Sign::Negative { -x.clone() } else { x.clone() }
}

/// `2^e` at the given precision.
pub fn pow2(e: isize, bits: usize) -> Real {
    Real::from_parts(IBig::from(1), e).with_precision(bits).value()
}

/// Natural logarithm of a positive value, as f64 (valid far outside f64 range).
pub fn ln_f64(x: &Real) -> f64 {
    let repr = x.repr();
    let sig = repr.significand();
    let bits = sig.bit_len() as isize;
    let shift = bits - 60;
    let top: i128 = if shift > 0 { (sig >> shift as usize).try_into().unwrap() } else { sig.clone().try_into().unwrap() };
    let shift = shift.max(0);
    (top as f64).ln() + (shift + repr.exponent()) as f64 * std::f64::consts::LN_2
}

/// Scientific notation with the given number of significant decimal digits.
pub fn to_decimal_string(x: &Real, digits: usize) -> String {
    if x.repr().significand() == &IBig::ZERO {
        return "0".into();
    }
    let dec = x.clone().with_base_and_precision::<10>(digits).value();
    format!("{:e}", dec)
}

/// Default digit count for `bits` of precision.
pub fn digits_for(bits: usize) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).floor() as usize
}

/// `|x| <= bound`.
pub fn le(x: &Real, bound: &Real) -> bool {
    abs(x) <= *bound
}
