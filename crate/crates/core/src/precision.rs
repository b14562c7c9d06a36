//! Working precision and high-precision conversions of exact values.
//!
//! Exact coefficients can be far outside `f64` range, so their magnitudes are
//! carried as natural logarithms computed at `P` mantissa bits.

use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign as FloatSign, Word, WORD_BIT_SIZE};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Environment variable overriding the default working precision.
pub const PRECISION_ENV: &str = "MIXEDPOWERS_PRECISION";

const ROUNDING: RoundingMode = RoundingMode::ToEven;

/// Mantissa bits used for high-precision conversions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision(usize);

impl Precision {
    pub const DEFAULT_BITS: usize = 128;
    pub const MIN_BITS: usize = 53;
    pub const MAX_BITS: usize = 1 << 16;

    pub fn new(bits: usize) -> Result<Self> {
        if !(Self::MIN_BITS..=Self::MAX_BITS).contains(&bits) {
            return Err(Error::InvalidInput(format!(
                "precision must be between {} and {} bits, got {bits}",
                Self::MIN_BITS,
                Self::MAX_BITS
            )));
        }
        Ok(Precision(bits))
    }

    /// Reads [`PRECISION_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(s) => {
                let bits = s.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidInput(format!("{PRECISION_ENV}={s:?} is not an integer"))
                })?;
                Precision::new(bits)
            }
            Err(_) => Ok(Precision::default()),
        }
    }

    pub fn bits(self) -> usize {
        self.0
    }

    /// Number of significant decimal digits representable at this precision.
    pub fn decimal_digits(self) -> usize {
        (self.0 as f64 * std::f64::consts::LOG10_2).floor() as usize
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(Self::DEFAULT_BITS)
    }
}

/// A real number computed at a given working precision.
#[derive(Clone, Debug)]
pub struct HighPrecisionReal {
    value: BigFloat,
    approx: f64,
    precision: Precision,
}

impl HighPrecisionReal {
    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn from_f64(x: f64, precision: Precision) -> Self {
        HighPrecisionReal { value: BigFloat::from_f64(x, precision.bits()), approx: x, precision }
    }

    pub fn zero(precision: Precision) -> Self {
        Self::from_f64(0.0, precision)
    }

    fn wrap(value: BigFloat, precision: Precision) -> Self {
        let approx = big_to_f64(&value);
        HighPrecisionReal { value, approx, precision }
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.precision.bits().max(other.precision.bits());
        let prec = Precision(p);
        Self::wrap(self.value.add(&other.value, p, ROUNDING), prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.precision.bits().max(other.precision.bits());
        Self::wrap(self.value.sub(&other.value, p, ROUNDING), Precision(p))
    }

    pub fn add_f64(&self, x: f64) -> Self {
        self.add(&Self::from_f64(x, self.precision))
    }

    /// `k * self` for an integer `k`.
    pub fn mul_int(&self, k: i128) -> Self {
        let p = self.precision.bits();
        let mag = BigFloat::from_u128(k.unsigned_abs(), 128);
        let mut v = self.value.mul(&mag, p, ROUNDING);
        if k < 0 {
            v = v.neg();
        }
        Self::wrap(v, self.precision)
    }

    /// Decimal rendering with all digits carried by the working precision.
    pub fn to_decimal_string(&self) -> String {
        let mut cc = consts();
        self.value
            .format(astro_float::Radix::Dec, ROUNDING, &mut cc)
            .unwrap_or_else(|_| format!("{:e}", self.approx))
    }
}

impl PartialEq for HighPrecisionReal {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl fmt::Display for HighPrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let mut cc = consts();
    x.format(astro_float::Radix::Dec, ROUNDING, &mut cc)
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(f64::NAN)
}

fn consts() -> Consts {
    Consts::new().expect("astro-float constant cache")
}

/// Top `bits` bits of `x` (rounded down) as an astro-float number.
fn biguint_to_float(x: &BigUint, bits: usize) -> BigFloat {
    let len = x.bits() as usize;
    let words_needed = bits.div_ceil(WORD_BIT_SIZE) + 1;
    let total_bits = words_needed * WORD_BIT_SIZE;
    // Align so the leading bit of x becomes the leading bit of the mantissa.
    let aligned: BigUint = if len >= total_bits {
        x >> (len - total_bits)
    } else {
        x << (total_bits - len)
    };
    let mut words: Vec<Word> = aligned.to_u64_digits().into_iter().map(|w| w as Word).collect();
    words.resize(words_needed, 0);
    BigFloat::from_words(&words, FloatSign::Pos, len as i32)
}

/// Natural logarithm of `|x|` at the given precision. `x` must be nonzero.
pub fn ln_abs(x: &BigRational, precision: Precision) -> Result<HighPrecisionReal> {
    if x.is_zero() {
        return Err(Error::Domain("logarithm of zero".into()));
    }
    let p = precision.bits() + 32;
    let mut cc = consts();
    let numer = biguint_to_float(x.numer().magnitude(), p);
    let denom = biguint_to_float(x.denom().magnitude(), p);
    let ln_n = numer.ln(p, ROUNDING, &mut cc);
    let ln_d = denom.ln(p, ROUNDING, &mut cc);
    let mut value = ln_n.sub(&ln_d, p, ROUNDING);
    if let Some(e) = value.err() {
        return Err(Error::InternalInconsistency(format!("high-precision log failed: {e:?}")));
    }
    value
        .set_precision(precision.bits(), ROUNDING)
        .map_err(|e| Error::InternalInconsistency(format!("precision change failed: {e:?}")))?;
    let approx = ln_abs_f64(x);
    Ok(HighPrecisionReal { value, approx, precision })
}

/// Double-precision `ln|x|` that never overflows.
pub fn ln_abs_f64(x: &BigRational) -> f64 {
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

fn ln_biguint(x: &BigUint) -> f64 {
    let len = x.bits();
    if len <= 1000 {
        return x.to_f64().map(f64::ln).unwrap_or(f64::NEG_INFINITY);
    }
    let shift = len - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact rational rendered with `digits` significant decimal digits
/// (scientific notation, truncated toward zero).
pub fn rational_to_decimal(x: &BigRational, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let neg = x.is_negative();
    let num = x.numer().abs();
    let den = x.denom().clone();
    // Decimal exponent estimate, corrected below.
    let mut exp10 = (ln_abs_f64(x) / std::f64::consts::LN_10).floor() as i64;
    let ten = BigInt::from(10u32);
    let scaled = |e: i64| -> BigInt {
        let shift = digits as i64 - 1 - e;
        if shift >= 0 {
            (&num * num_traits::pow(ten.clone(), shift as usize)).div_floor(&den)
        } else {
            num.div_floor(&(&den * num_traits::pow(ten.clone(), (-shift) as usize)))
        }
    };
    let lower = num_traits::pow(ten.clone(), digits - 1);
    let upper = num_traits::pow(ten.clone(), digits);
    let mut mant = scaled(exp10);
    while mant >= upper {
        exp10 += 1;
        mant = scaled(exp10);
    }
    while mant < lower {
        exp10 -= 1;
        mant = scaled(exp10);
    }
    let s = mant.to_string();
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp10}")
    } else {
        format!("{sign}{head}.{tail}e{exp10}")
    }
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidInput(format!("{x} is not a finite number")))
}

/// Rounds `x` to a dyadic rational with `bits` significant bits.
pub fn round_to_bits(x: &BigRational, bits: usize) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    let lg = (ln_abs_f64(x) / std::f64::consts::LN_2).floor() as i64;
    let shift = bits as i64 - 1 - lg;
    let two = BigInt::from(2u32);
    if shift >= 0 {
        let scale = num_traits::pow(two, shift as usize);
        let n = (x * BigRational::from_integer(scale.clone())).round();
        BigRational::new(n.to_integer(), scale)
    } else {
        let scale = num_traits::pow(two, (-shift) as usize);
        let n = (x / BigRational::from_integer(scale.clone())).round();
        BigRational::from_integer(n.to_integer() * scale)
    }
}

pub(crate) fn sign_of(x: &BigRational) -> i8 {
    match x.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
