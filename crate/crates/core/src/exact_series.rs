//! Exact polynomial arithmetic over the rationals and the brute-force
//! coefficient oracle `[z^n0] prod f_j^n_j`.
//!
//! Products are carried out on integer coefficient vectors: every factor is
//! scaled by the lcm of its denominators, the integer polynomials are powered
//! and convolved, and the common denominator is divided out once at the end.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::precision::{self, HighPrecisionReal, Precision};

/// Dense univariate polynomial with exact rational coefficients, lowest degree
/// first. The zero polynomial is the empty coefficient list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_integers<I: Into<BigInt> + Copy>(coeffs: &[I]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_integers(&[1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Index of the lowest nonzero coefficient (the order of vanishing at 0).
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, max_degree: usize) -> Self {
        Self::new(self.coeffs.iter().take(max_degree + 1).cloned().collect())
    }

    /// Divides by `z^k`; the low `k` coefficients must already be zero.
    pub fn shift_down(&self, k: usize) -> Self {
        debug_assert!(self.coeffs.iter().take(k).all(Zero::is_zero));
        Self::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Coefficients of `w -> f(a + w)`, i.e. the Taylor coefficients
    /// `f^(k)(a)/k!` at `a`.
    pub fn taylor_shift(&self, a: &BigRational) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        // Repeated synthetic division by (z - a).
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &c[j + 1] * a;
                c[j] += t;
            }
        }
        Self::new(c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// gcd of the exponents carrying nonzero coefficients (the period of the
    /// polynomial); 0 for constants.
    pub fn period(&self) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(0usize, |g, (k, _)| g.gcd(&k))
    }

    /// Integer polynomial `P` and positive integer `L` with `self = P / L`.
    fn to_integer_form(&self) -> (Vec<BigInt>, BigInt) {
        let l = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let p = self.coeffs.iter().map(|c| c.numer() * (&l / c.denom())).collect();
        (p, l)
    }

    fn from_integer_form(p: Vec<BigInt>, l: &BigInt) -> Self {
        Self::new(p.into_iter().map(|c| BigRational::new(c, l.clone())).collect())
    }

    /// Parses the JSON-facing representation: one exact rational string per
    /// coefficient, lowest degree first.
    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let a = c.abs();
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => f.write_str("z")?,
                (1, false) => write!(f, "{a}z")?,
                (_, true) => write!(f, "z^{k}")?,
                (_, false) => write!(f, "{a}z^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        RationalPoly::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

/// Parses `"3"`, `"-3"`, `"2/5"` (surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("{s:?} is not an exact rational"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("{s:?} has a zero denominator")));
            }
            Ok(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().map(BigRational::from_integer).map_err(|_| bad()),
    }
}

/// Exact coefficient together with its sign and high-precision `ln|value|`.
#[derive(Clone, Debug, PartialEq)]
pub struct BigCoefficient {
    value: BigRational,
    sign: i8,
    log_abs: Option<HighPrecisionReal>,
}

impl BigCoefficient {
    pub fn new(value: BigRational) -> Self {
        Self::with_precision(value, Precision::default())
    }

    pub fn with_precision(value: BigRational, precision: Precision) -> Self {
        let sign = precision::sign_of(&value);
        let log_abs = if sign == 0 {
            None
        } else {
            Some(precision::ln_abs(&value, precision).expect("nonzero value"))
        };
        BigCoefficient { value, sign, log_abs }
    }

    pub fn from_integer(value: BigInt) -> Self {
        Self::new(BigRational::from_integer(value))
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn log_abs(&self) -> Option<&HighPrecisionReal> {
        self.log_abs.as_ref()
    }

    pub fn log_abs_f64(&self) -> Option<f64> {
        self.log_abs.as_ref().map(HighPrecisionReal::to_f64)
    }

    /// The value as `f64` when it is representable.
    pub fn to_f64(&self) -> Option<f64> {
        self.value.to_f64().filter(|v| v.is_finite())
    }

    /// Exact decimal string for integers, `p/q` otherwise.
    pub fn to_exact_string(&self) -> String {
        self.value.to_string()
    }
}

impl fmt::Display for BigCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for BigCoefficient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BigCoefficient", 3)?;
        st.serialize_field("value", &self.value.to_string())?;
        st.serialize_field("sign", &self.sign)?;
        st.serialize_field("log_abs", &self.log_abs.as_ref().map(|l| l.to_decimal_string()))?;
        st.end()
    }
}

/// Exact product `a * b`, optionally truncated to degrees `<= truncate_at`.
pub fn poly_mul(a: &RationalPoly, b: &RationalPoly, truncate_at: Option<usize>) -> RationalPoly {
    if a.is_zero() || b.is_zero() {
        return RationalPoly::zero();
    }
    let (pa, la) = a.to_integer_form();
    let (pb, lb) = b.to_integer_form();
    let limit = truncate_at.unwrap_or(usize::MAX);
    let prod = int_mul(&pa, &pb, limit);
    RationalPoly::from_integer_form(prod, &(la * lb))
}

/// `f^e mod z^(truncate_at + 1)`.
pub fn poly_pow(f: &RationalPoly, e: u64, truncate_at: usize) -> RationalPoly {
    let (p, l) = f.to_integer_form();
    let powered = int_pow(&p, e, truncate_at);
    let denom = num_traits::pow(l, usize::try_from(e).expect("exponent fits in usize"));
    RationalPoly::from_integer_form(powered, &denom)
}

/// Exact `[z^n0] prod_j f_j^e_j` via truncated powering and convolution.
pub fn coeff_of_product(n0: u64, factors: &[(RationalPoly, u64)]) -> BigCoefficient {
    BigCoefficient::new(coeff_of_product_exact(n0, factors))
}

pub(crate) fn coeff_of_product_exact(n0: u64, factors: &[(RationalPoly, u64)]) -> BigRational {
    let t = usize::try_from(n0).expect("degree fits in usize");
    let mut denom = BigInt::one();
    let mut acc: Vec<BigInt> = vec![BigInt::one()];
    let active: Vec<_> = factors.iter().filter(|(_, e)| *e > 0).collect();
    for (i, (f, e)) in active.iter().enumerate() {
        let (p, l) = f.to_integer_form();
        let powered = int_pow(&p, *e, t);
        denom *= num_traits::pow(l, usize::try_from(*e).expect("exponent fits in usize"));
        if i + 1 == active.len() {
            // Only the degree-n0 coefficient of the final product is needed.
            let c = (0..=t)
                .filter_map(|k| Some(acc.get(k)? * powered.get(t - k)?))
                .fold(BigInt::zero(), |s, x| s + x);
            return BigRational::new(c, denom);
        }
        acc = int_mul(&acc, &powered, t);
    }
    // Empty product: the constant polynomial 1.
    if t == 0 {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

/// Exact binomial coefficient; zero unless `0 <= t <= k`.
pub fn binomial(k: u64, t: i64) -> BigCoefficient {
    BigCoefficient::from_integer(binomial_int(k, t))
}

pub(crate) fn binomial_int(k: u64, t: i64) -> BigInt {
    if t < 0 || t as u64 > k {
        return BigInt::zero();
    }
    let t = (t as u64).min(k - t as u64);
    let mut acc = BigInt::one();
    for i in 0..t {
        acc *= k - i;
        acc /= i + 1;
    }
    acc
}

fn int_mul(a: &[BigInt], b: &[BigInt], limit: usize) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = (a.len() + b.len() - 1).min(limit.saturating_add(1));
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// Integer polynomial power truncated at degree `limit`.
///
/// Uses the power recurrence `k g0 h_k = sum_i ((e+1) i - k) g_i h_{k-i}`,
/// which costs `O(deg g * limit)` big-integer products regardless of `e`.
fn int_pow(p: &[BigInt], e: u64, limit: usize) -> Vec<BigInt> {
    if e == 0 {
        return vec![BigInt::one()];
    }
    let Some(v) = p.iter().position(|c| !c.is_zero()) else {
        return Vec::new();
    };
    let shift = match (v as u128).checked_mul(e as u128) {
        Some(s) if s <= limit as u128 => s as usize,
        _ => return Vec::new(),
    };
    let g = &p[v..];
    let g0 = &g[0];
    let deg = g.len() - 1;
    let n = limit - shift;
    let mut h: Vec<BigInt> = Vec::with_capacity(n + 1);
    h.push(num_traits::pow(g0.clone(), usize::try_from(e).expect("exponent fits in usize")));
    let e1 = BigInt::from(e) + 1u32;
    for k in 1..=n {
        let mut s = BigInt::zero();
        for i in 1..=k.min(deg) {
            if g[i].is_zero() {
                continue;
            }
            let w = &e1 * i - k;
            s += w * &g[i] * &h[k - i];
        }
        let d = g0 * k;
        let (q, r) = s.div_rem(&d);
        debug_assert!(r.is_zero(), "power recurrence division must be exact");
        h.push(q);
    }
    let mut out = vec![BigInt::zero(); shift];
    out.extend(h);
    trim(out)
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}
