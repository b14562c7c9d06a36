//! Validated systems `(f_1, ..., f_m)` with an optional amplitude `f_0`,
//! norms on the direction simplex, directions and exponent vectors.
//!
//! Factor indices are 0-based in the API. Error payloads report them 1-based
//! so they read as `f_1, ..., f_m`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Hypothesis, Result};
use crate::exact_series::{coeff_of_product, BigCoefficient, RationalPoly};

/// Threshold below which `|f_j(0)|` counts as zero for numeric factors.
pub const H1_TOLERANCE: f64 = 1e-12;

/// Tolerance on `|d| = 1` for directions.
pub const DIRECTION_TOLERANCE: f64 = 1e-12;

/// `|f_j(z)|` below this is treated as a zero of `f_j`.
pub const POLE_TOLERANCE: f64 = 1e-14;

/// A non-polynomial analytic factor known through numeric evaluation and a
/// rational Taylor prefix.
pub trait AnalyticFactor: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    /// `f`, `f'` or `f''` at `z` for `order` 0, 1, 2.
    fn eval(&self, z: Complex64, order: u8) -> Complex64;

    /// Exact Taylor coefficients of degree `<= degree`.
    fn taylor_prefix(&self, degree: usize) -> RationalPoly;

    /// Radius of analyticity (`f64::INFINITY` for entire functions).
    fn radius(&self) -> f64 {
        f64::INFINITY
    }

    /// `(k, g)` with `f = z^k g` and `g(0) != 0`, when `f(0) = 0`.
    fn factor_out_zero(&self) -> Option<(usize, Arc<dyn AnalyticFactor>)> {
        None
    }
}

fn factorial_rational(k: usize) -> BigRational {
    let mut acc = num_bigint::BigInt::from(1);
    for i in 2..=k {
        acc *= i;
    }
    BigRational::from_integer(acc)
}

/// `e^z - 1`, the occupancy-type factor. Violates H1; its reduced form is
/// [`ExpMinusOneOverZ`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpMinusOne;

impl AnalyticFactor for ExpMinusOne {
    fn name(&self) -> String {
        "exp(z)-1".into()
    }

    fn eval(&self, z: Complex64, order: u8) -> Complex64 {
        match order {
            0 => z.exp() - 1.0,
            _ => z.exp(),
        }
    }

    fn taylor_prefix(&self, degree: usize) -> RationalPoly {
        let mut c: Vec<BigRational> = (0..=degree).map(|k| factorial_rational(k).recip()).collect();
        c[0] = BigRational::zero();
        RationalPoly::new(c)
    }

    fn factor_out_zero(&self) -> Option<(usize, Arc<dyn AnalyticFactor>)> {
        Some((1, Arc::new(ExpMinusOneOverZ)))
    }
}

/// `(e^z - 1)/z`, entire with value 1 at the origin.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpMinusOneOverZ;

impl AnalyticFactor for ExpMinusOneOverZ {
    fn name(&self) -> String {
        "(exp(z)-1)/z".into()
    }

    fn eval(&self, z: Complex64, order: u8) -> Complex64 {
        if z.norm() < 0.5 {
            // g(z) = sum_k z^k/(k+1)!, differentiated termwise.
            let order = order.min(2) as usize;
            let mut acc = Complex64::zero();
            let mut inv_fact = 1.0f64;
            for k in 0..40usize {
                inv_fact /= (k + 1) as f64;
                if k < order {
                    continue;
                }
                let falling: f64 = (0..order).map(|i| (k - i) as f64).product();
                acc += z.powu((k - order) as u32) * (falling * inv_fact);
            }
            return acc;
        }
        let e = z.exp();
        let g = (e - 1.0) / z;
        match order {
            0 => g,
            1 => (e - g) / z,
            _ => {
                let g1 = (e - g) / z;
                (e - 2.0 * g1) / z
            }
        }
    }

    fn taylor_prefix(&self, degree: usize) -> RationalPoly {
        RationalPoly::new((0..=degree).map(|k| factorial_rational(k + 1).recip()).collect())
    }
}

/// One factor `f_j` of a system.
#[derive(Clone, Debug)]
pub enum Factor {
    Polynomial { poly: RationalPoly, approx: Vec<f64> },
    Analytic(Arc<dyn AnalyticFactor>),
}

impl Factor {
    pub fn polynomial(poly: RationalPoly) -> Self {
        let approx = poly.to_f64_coeffs();
        Factor::Polynomial { poly, approx }
    }

    pub fn analytic<A: AnalyticFactor + 'static>(f: A) -> Self {
        Factor::Analytic(Arc::new(f))
    }

    pub fn as_polynomial(&self) -> Option<&RationalPoly> {
        match self {
            Factor::Polynomial { poly, .. } => Some(poly),
            Factor::Analytic(_) => None,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            Factor::Polynomial { .. } => f64::INFINITY,
            Factor::Analytic(a) => a.radius(),
        }
    }

    /// Value and first two derivatives in one Horner pass.
    pub fn eval_all(&self, z: Complex64) -> [Complex64; 3] {
        match self {
            Factor::Polynomial { approx, .. } => horner3(approx, z),
            Factor::Analytic(a) => [a.eval(z, 0), a.eval(z, 1), a.eval(z, 2)],
        }
    }

    pub fn eval(&self, z: Complex64, order: u8) -> Complex64 {
        match self {
            Factor::Polynomial { approx, .. } => horner3(approx, z)[order.min(2) as usize],
            Factor::Analytic(a) => a.eval(z, order),
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        match self {
            Factor::Polynomial { approx, .. } => approx.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Factor::Analytic(a) => a.eval(Complex64::new(x, 0.0), 0).re,
        }
    }

    /// Exact Taylor coefficients up to `degree`.
    pub fn taylor_prefix(&self, degree: usize) -> RationalPoly {
        match self {
            Factor::Polynomial { poly, .. } => poly.truncate(degree),
            Factor::Analytic(a) => a.taylor_prefix(degree),
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Factor::Polynomial { poly, .. } => poly.is_constant(),
            Factor::Analytic(a) => a.taylor_prefix(16).is_constant(),
        }
    }

    fn value_at_zero(&self) -> f64 {
        match self {
            Factor::Polynomial { poly, .. } => poly.coeff(0).to_f64().unwrap_or(0.0),
            Factor::Analytic(a) => a.eval(Complex64::zero(), 0).norm(),
        }
    }

    /// Whether every Taylor coefficient is known to be nonnegative.
    pub fn has_nonnegative_coeffs(&self) -> bool {
        match self {
            Factor::Polynomial { poly, .. } => poly.has_nonnegative_coeffs(),
            Factor::Analytic(a) => a.taylor_prefix(32).has_nonnegative_coeffs(),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Polynomial { poly, .. } => write!(f, "{poly}"),
            Factor::Analytic(a) => f.write_str(&a.name()),
        }
    }
}

fn horner3(c: &[f64], z: Complex64) -> [Complex64; 3] {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    let mut ddp = Complex64::zero();
    for &a in c.iter().rev() {
        ddp = ddp * z + dp * 2.0;
        dp = dp * z + p;
        p = p * z + a;
    }
    [p, dp, ddp]
}

/// A tuple of factors with an optional polynomial amplitude `f_0`.
#[derive(Clone, Debug)]
pub struct FunctionSystem {
    factors: Vec<Factor>,
    amplitude: Option<(RationalPoly, Vec<f64>)>,
}

impl FunctionSystem {
    /// Builds and validates a system against H1 and H2.
    pub fn new(factors: Vec<Factor>, amplitude: Option<RationalPoly>) -> Result<Self> {
        let sys = Self::new_unchecked(factors, amplitude)?;
        sys.validate()?;
        Ok(sys)
    }

    pub fn from_polys(factors: Vec<RationalPoly>, amplitude: Option<RationalPoly>) -> Result<Self> {
        Self::new(factors.into_iter().map(Factor::polynomial).collect(), amplitude)
    }

    /// Builds a system without checking H1/H2; useful ahead of
    /// [`reduce_vanishing`].
    pub fn new_unchecked(factors: Vec<Factor>, amplitude: Option<RationalPoly>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("a system needs at least one factor".into()));
        }
        let amplitude = amplitude.map(|a| {
            let approx = a.to_f64_coeffs();
            (a, approx)
        });
        Ok(FunctionSystem { factors, amplitude })
    }

    /// Checks H1 and H2 for every factor, reporting the first offender.
    pub fn validate(&self) -> Result<()> {
        for (j, f) in self.factors.iter().enumerate() {
            if f.value_at_zero().abs() <= H1_TOLERANCE {
                return Err(Error::ConstraintViolation { factor: j + 1, hypothesis: Hypothesis::H1 });
            }
            if f.is_constant() {
                return Err(Error::ConstraintViolation { factor: j + 1, hypothesis: Hypothesis::H2 });
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &Factor {
        &self.factors[j]
    }

    pub fn amplitude(&self) -> Option<&RationalPoly> {
        self.amplitude.as_ref().map(|(a, _)| a)
    }

    pub fn with_amplitude(mut self, amplitude: Option<RationalPoly>) -> Self {
        self.amplitude = amplitude.map(|a| {
            let approx = a.to_f64_coeffs();
            (a, approx)
        });
        self
    }

    /// `f_0(z)`, or 1 without an amplitude.
    pub fn eval_amplitude(&self, z: Complex64) -> Complex64 {
        match &self.amplitude {
            Some((_, c)) => horner3(c, z)[0],
            None => Complex64::new(1.0, 0.0),
        }
    }

    pub fn radius(&self) -> f64 {
        self.factors.iter().map(Factor::radius).fold(f64::INFINITY, f64::min)
    }

    pub fn all_polynomial(&self) -> bool {
        self.factors.iter().all(|f| f.as_polynomial().is_some())
    }

    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.factors.iter().all(Factor::has_nonnegative_coeffs)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.m() {
            return Err(Error::InvalidInput(format!(
                "factor index {} out of range 1..={}",
                j + 1,
                self.m()
            )));
        }
        Ok(())
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        let r = self.radius();
        if z.norm() >= r {
            return Err(Error::Domain(format!("|z| = {} is outside the disk of radius {r}", z.norm())));
        }
        Ok(())
    }

    /// Checks that `v` has one entry per coordinate `(n_0, ..., n_m)`.
    pub fn check_arity(&self, len: usize) -> Result<()> {
        if len != self.m() + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates (n_0..n_m), found {len}",
                self.m() + 1
            )));
        }
        Ok(())
    }
}

/// `f_j^{(order)}(z)` for `order` in {0, 1, 2}.
pub fn eval_f(system: &FunctionSystem, j: usize, z: Complex64, order: u8) -> Result<Complex64> {
    system.check_index(j)?;
    if order > 2 {
        return Err(Error::InvalidInput(format!("derivative order {order} not supported")));
    }
    system.check_domain(z)?;
    Ok(system.factors[j].eval(z, order))
}

/// `z f_j'(z) / f_j(z)`.
pub fn log_derivative(system: &FunctionSystem, j: usize, z: Complex64) -> Result<Complex64> {
    system.check_index(j)?;
    system.check_domain(z)?;
    let [f, df, _] = system.factors[j].eval_all(z);
    if f.norm() < POLE_TOLERANCE {
        return Err(Error::Pole { factor: j + 1, z });
    }
    Ok(z * df / f)
}

/// A norm on `R^{m+1}` used to place exponent vectors on the simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NormSpec {
    /// `sum_i w_i |x_i|`.
    #[serde(rename = "wl1")]
    WeightedL1 { weights: Vec<f64> },
    #[serde(rename = "linf")]
    LInf,
}

impl NormSpec {
    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self> {
        let n = NormSpec::WeightedL1 { weights };
        n.validate()?;
        Ok(n)
    }

    /// Plain L1 on `m + 1` coordinates.
    pub fn l1(dim: usize) -> Self {
        NormSpec::WeightedL1 { weights: vec![1.0; dim] }
    }

    pub fn validate(&self) -> Result<()> {
        if let NormSpec::WeightedL1 { weights } = self {
            if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(Error::InvalidInput("norm weights must be finite and strictly positive".into()));
            }
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            NormSpec::WeightedL1 { weights } if weights.len() != dim => Err(Error::InvalidInput(format!(
                "norm has {} weights but vectors have {dim} coordinates",
                weights.len()
            ))),
            _ => Ok(()),
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::WeightedL1 { weights } => weights.iter().zip(x).map(|(w, v)| w * v.abs()).sum(),
            NormSpec::LInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NormSpec::WeightedL1 { weights } => {
                let w: Vec<String> = weights.iter().map(|w| format!("{w}")).collect();
                format!("wl1({})", w.join(","))
            }
            NormSpec::LInf => "linf".into(),
        }
    }
}

/// A point of the nonnegative unit sphere under a [`NormSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    d: Vec<f64>,
    norm: NormSpec,
}

impl Direction {
    pub fn new(d: Vec<f64>, norm: NormSpec) -> Result<Self> {
        norm.validate()?;
        norm.check_dim(d.len())?;
        if d.len() < 2 {
            return Err(Error::InvalidInput("a direction needs at least two coordinates".into()));
        }
        if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidInput(format!("direction {d:?} has a negative or non-finite entry")));
        }
        let len = norm.norm(&d);
        if (len - 1.0).abs() > DIRECTION_TOLERANCE {
            return Err(Error::InvalidInput(format!("direction {d:?} has norm {len}, not 1")));
        }
        Ok(Direction { d, norm })
    }

    /// Scales a nonzero nonnegative vector onto the unit sphere.
    pub fn normalized(v: &[f64], norm: NormSpec) -> Result<Self> {
        norm.validate()?;
        norm.check_dim(v.len())?;
        let len = norm.norm(v);
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        let mut d: Vec<f64> = v.iter().map(|x| x / len).collect();
        // In the L-infinity case the maximal entry is pinned to exactly 1.
        if let NormSpec::LInf = norm {
            let (imax, _) = v.iter().enumerate().fold((0, f64::MIN), |b, (i, &x)| if x > b.1 { (i, x) } else { b });
            d[imax] = 1.0;
        }
        Self::new(d, norm)
    }

    pub fn coords(&self) -> &[f64] {
        &self.d
    }

    pub fn d0(&self) -> f64 {
        self.d[0]
    }

    /// `(d_1, ..., d_m)`.
    pub fn tail(&self) -> &[f64] {
        &self.d[1..]
    }

    pub fn norm_spec(&self) -> &NormSpec {
        &self.norm
    }

    pub fn require_norm(&self, expected: &NormSpec) -> Result<()> {
        if &self.norm != expected {
            return Err(Error::NormMismatch { expected: expected.label(), found: self.norm.label() });
        }
        Ok(())
    }
}

/// `(n_0, n_1, ..., n_m)`: target degree followed by factor exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u64>);

impl ExponentVector {
    pub fn new(n: Vec<u64>) -> Result<Self> {
        if n.len() < 2 {
            return Err(Error::InvalidInput("an exponent vector needs n_0 and at least one n_j".into()));
        }
        if n.iter().all(|&x| x == 0) {
            return Err(Error::InvalidInput("exponent vector must be nonzero".into()));
        }
        Ok(ExponentVector(n))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn n0(&self) -> u64 {
        self.0[0]
    }

    pub fn exponents(&self) -> &[u64] {
        &self.0[1..]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&x| x as f64).collect()
    }

    pub fn norm(&self, norm: &NormSpec) -> f64 {
        norm.norm(&self.to_f64())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `n / |n|`.
pub fn direction_of(n: &ExponentVector, norm: &NormSpec) -> Result<Direction> {
    Direction::normalized(&n.to_f64(), norm.clone())
}

/// Exact `[z^{n_0}] f_0 prod_j f_j^{n_j}` from truncated Taylor prefixes.
pub fn exact_coefficient(system: &FunctionSystem, n: &ExponentVector) -> Result<BigCoefficient> {
    system.check_arity(n.as_slice().len())?;
    let deg = usize::try_from(n.n0()).map_err(|_| Error::InvalidInput("n_0 is too large".into()))?;
    let mut factors: Vec<(RationalPoly, u64)> = system
        .factors()
        .iter()
        .zip(n.exponents())
        .map(|(f, &e)| (f.taylor_prefix(deg), e))
        .collect();
    if let Some(a) = system.amplitude() {
        factors.push((a.truncate(deg), 1));
    }
    Ok(coeff_of_product(n.n0(), &factors))
}

/// Outcome of factoring `z^{k_j}` out of every factor.
#[derive(Clone, Debug)]
pub enum Reduction {
    Reduced { system: FunctionSystem, n: ExponentVector, shift: u64 },
    /// The shifted `n_0` is negative, so the coefficient is exactly zero.
    Vanishes { shifted_n0: i128 },
}

/// Replaces each `f_j = z^{k_j} g_j` by `g_j` and `n_0` by `n_0 - sum k_j n_j`.
pub fn reduce_vanishing(system: &FunctionSystem, n: &ExponentVector) -> Reduction {
    let mut shift: i128 = 0;
    let mut factors = Vec::with_capacity(system.m());
    for (f, &e) in system.factors.iter().zip(n.exponents()) {
        match f {
            Factor::Polynomial { poly, .. } => {
                let k = poly.valuation().unwrap_or(0);
                shift += k as i128 * e as i128;
                factors.push(Factor::polynomial(poly.shift_down(k)));
            }
            Factor::Analytic(a) => match a.factor_out_zero() {
                Some((k, g)) => {
                    shift += k as i128 * e as i128;
                    factors.push(Factor::Analytic(g));
                }
                None => factors.push(f.clone()),
            },
        }
    }
    let shifted = n.n0() as i128 - shift;
    if shifted < 0 {
        return Reduction::Vanishes { shifted_n0: shifted };
    }
    let mut v = n.as_slice().to_vec();
    v[0] = shifted as u64;
    let system = FunctionSystem { factors, amplitude: system.amplitude.clone() };
    // A reduced vector can be all zeros (e.g. [z^2] (z^2)^1): keep it as is.
    Reduction::Reduced { system, n: ExponentVector(v), shift: shift as u64 }
}

/// JSON form of a polynomial system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub factors: Vec<RationalPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<RationalPoly>,
    pub norm: NormSpec,
}

impl SystemDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        let d: SystemDescriptor =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("system descriptor: {e}")))?;
        d.norm.validate()?;
        d.norm.check_dim(d.factors.len() + 1)?;
        Ok(d)
    }

    /// Builds the validated system.
    pub fn build(&self) -> Result<FunctionSystem> {
        FunctionSystem::from_polys(self.factors.clone(), self.amplitude.clone())
    }

    pub fn build_unchecked(&self) -> Result<FunctionSystem> {
        FunctionSystem::new_unchecked(
            self.factors.iter().cloned().map(Factor::polynomial).collect(),
            self.amplitude.clone(),
        )
    }
}
