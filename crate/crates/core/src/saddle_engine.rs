//! Saddle-point evaluation of `[z^{n_0}] f_0 prod_j f_j^{n_j}`.
//!
//! On the circle `|z| = Z` with `Z = Z(n/|n|)` the coefficient equals
//!
//! ```text
//! Z^{-n_0} prod_j f_j(Z)^{n_j} / (2 pi) * int e^{-|n| F(theta)} A(theta) dtheta
//! ```
//!
//! over `[-pi, pi]` exactly, or over `[-eps, eps]` up to an exponentially
//! small tail. The integrand is evaluated as
//! `exp(-i n_0 theta + sum_j n_j Log(f_j(Z e^{i theta}) / f_j(Z)))`, which is
//! branch independent because the `n_j` are integers. Magnitudes are kept as
//! `(sign, ln|.|)` since the prefactor overflows any float.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::critical_locus::{solve_critical, CriticalPoint};
use crate::error::{Error, Result};
use crate::exact_series::BigCoefficient;
use crate::function_system::{direction_of, Direction, ExponentVector, Factor, FunctionSystem, NormSpec};
use crate::phase_term::{ln_one_plus, ratio_minus_one, re_F, taylor_F_at};
use crate::precision::{self, HighPrecisionReal, Precision};
use crate::quadrature;

/// `|n| Z` at or below which the small-exponent representation is used.
pub const NZ_THRESHOLD: f64 = 32.0;

/// `c_2` at or below which the Gaussian approximation is refused.
pub const C2_TOLERANCE: f64 = 1e-6;

/// Largest accepted leading cubic correction `(15/16)|c_3|^2 / (|n| c_2^3)`.
pub const CUBIC_CORRECTION_LIMIT: f64 = 0.25;

/// Quadrature tolerance on the integrand normalized by its size at `theta = 0`.
pub const QUAD_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LargeExponent,
    SmallExponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Quadrature,
    Gaussian,
    SmallLimit,
}

/// Requested evaluation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Gaussian,
    Quadrature,
    SmallLimit,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "gaussian" => Ok(MethodChoice::Gaussian),
            "quadrature" => Ok(MethodChoice::Quadrature),
            "small-limit" => Ok(MethodChoice::SmallLimit),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub z: f64,
    /// `|n| Z`.
    pub nz_product: f64,
    /// `F''(0; d) / 2`.
    pub c2: Option<f64>,
    pub epsilon: Option<f64>,
    /// Empirical ratio of the omitted arc to the retained integral. Not a
    /// certified bound.
    pub tail_bound: Option<f64>,
    pub cubic_correction: Option<f64>,
    pub quadrature_error: Option<f64>,
    pub panels: Option<usize>,
}

/// A signed log-magnitude estimate with its provenance.
#[derive(Clone, Debug)]
pub struct AsymptoticEstimate {
    pub sign: i8,
    /// `ln|estimate|`; `None` when the estimate is exactly zero.
    pub log_abs: Option<HighPrecisionReal>,
    pub regime: Regime,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl AsymptoticEstimate {
    pub fn log_abs_f64(&self) -> Option<f64> {
        self.log_abs.as_ref().map(HighPrecisionReal::to_f64)
    }

    /// The estimate as a float (may be infinite for huge values).
    pub fn to_f64(&self) -> f64 {
        match &self.log_abs {
            None => 0.0,
            Some(l) => f64::from(self.sign) * l.to_f64().exp(),
        }
    }

    /// `|estimate / exact - 1|`, evaluated in log space. `None` when the exact
    /// value is zero.
    pub fn rel_error(&self, exact: &BigCoefficient) -> Option<f64> {
        let el = exact.log_abs()?;
        let Some(l) = &self.log_abs else {
            return Some(1.0);
        };
        let ratio = l.sub(el).to_f64().exp();
        let agree = if self.sign == exact.sign() { 1.0 } else { -1.0 };
        Some((agree * ratio - 1.0).abs())
    }
}

impl Serialize for AsymptoticEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AsymptoticEstimate", 5)?;
        st.serialize_field("sign", &self.sign)?;
        st.serialize_field("log_abs", &self.log_abs.as_ref().map(HighPrecisionReal::to_decimal_string))?;
        st.serialize_field("regime", &self.regime)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("diagnostics", &self.diagnostics)?;
        st.end()
    }
}

/// Shared ingredients of every estimate for one exponent vector.
#[derive(Clone, Debug)]
pub struct SaddleSetup<'a> {
    pub system: &'a FunctionSystem,
    pub n: ExponentVector,
    pub direction: Direction,
    pub critical: CriticalPoint,
    /// `|n|` under the chosen norm.
    pub scale: f64,
    pub precision: Precision,
}

impl<'a> SaddleSetup<'a> {
    pub fn new(system: &'a FunctionSystem, n: &ExponentVector, norm: &NormSpec, precision: Precision) -> Result<Self> {
        system.check_arity(n.as_slice().len())?;
        let direction = direction_of(n, norm)?;
        let critical = solve_critical(system, &direction, None)?;
        Ok(SaddleSetup { system, n: n.clone(), direction, critical, scale: n.norm(norm), precision })
    }

    pub fn z(&self) -> f64 {
        self.critical.z
    }

    pub fn nz_product(&self) -> f64 {
        self.scale * self.z()
    }

    fn base_diagnostics(&self) -> Diagnostics {
        Diagnostics { z: self.z(), nz_product: self.nz_product(), ..Default::default() }
    }

    fn require_strict(&self) -> Result<()> {
        if !self.critical.strictly_minimal {
            return Err(Error::NotStrictlyMinimal { z: self.z(), margin: self.critical.minimality_margin });
        }
        Ok(())
    }

    /// `ln|Z^{-n_0} prod_j f_j(Z)^{n_j} / (2 pi)|` and its sign.
    pub fn log_prefactor(&self) -> Result<(i8, HighPrecisionReal)> {
        let z = self.z();
        let p = self.precision;
        let zq = precision::f64_to_rational(z)?;
        let mut acc = precision::ln_abs(&zq, p)?.mul_int(-(self.n.n0() as i128));
        let mut sign = 1i8;
        for (j, (f, &e)) in self.system.factors().iter().zip(self.n.exponents()).enumerate() {
            if e == 0 {
                continue;
            }
            let term = match f {
                Factor::Polynomial { poly, .. } => {
                    let v = poly.eval(&zq);
                    if precision::sign_of(&v) == 0 {
                        return Err(Error::Pole { factor: j + 1, z: self.critical.z_complex() });
                    }
                    if precision::sign_of(&v) < 0 && e % 2 == 1 {
                        sign = -sign;
                    }
                    precision::ln_abs(&v, p)?
                }
                Factor::Analytic(_) => {
                    let v = f.eval_real(z);
                    if v == 0.0 {
                        return Err(Error::Pole { factor: j + 1, z: self.critical.z_complex() });
                    }
                    if v < 0.0 && e % 2 == 1 {
                        sign = -sign;
                    }
                    HighPrecisionReal::from_f64(v.abs().ln(), p)
                }
            };
            acc = acc.add(&term.mul_int(e as i128));
        }
        Ok((sign, acc.add_f64(-(2.0 * PI).ln())))
    }

    /// `e^{-|n| F(theta)} A(theta)`.
    pub fn integrand(&self, theta: f64) -> Complex64 {
        let z = self.critical.z_complex();
        let mut log = Complex64::new(0.0, -(self.n.n0() as f64) * theta);
        for (f, &e) in self.system.factors().iter().zip(self.n.exponents()) {
            if e != 0 {
                log += ln_one_plus(ratio_minus_one(f, z, theta).0) * e as f64;
            }
        }
        log.exp() * self.system.eval_amplitude(z * Complex64::from_polar(1.0, theta))
    }

    /// Size of the amplitude on the contour, used to normalize tolerances.
    fn amplitude_scale(&self) -> f64 {
        let z = self.critical.z_complex();
        (0..64)
            .map(|k| self.system.eval_amplitude(z * Complex64::from_polar(1.0, PI * k as f64 / 32.0)).norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    }

    /// Rough width of the central bump of the integrand.
    fn bump_width(&self, c: &[f64; 3]) -> f64 {
        let n = self.scale;
        let [c2, c3, c4] = *c;
        let w = if c2 > C2_TOLERANCE {
            (n * c2).powf(-0.5)
        } else if c4.abs() > 0.0 && c3.abs() < 1e-300 {
            (n * c4.abs()).powf(-0.25)
        } else {
            (n * c3.abs().max(c4.abs()).max(1e-300)).powf(-1.0 / 3.0)
        };
        w.clamp(1e-12, PI)
    }

    /// `|c_2|, |c_3|, |c_4|` of the phase expansion.
    pub fn phase_coefficients(&self) -> Result<[f64; 3]> {
        if self.z() == 0.0 {
            return Ok([0.0; 3]);
        }
        let e = taylor_F_at(self.system, &self.direction, self.critical.clone(), 4, self.precision)?;
        Ok([e.c(2).re, e.c(3).norm(), e.c(4).norm()])
    }

    /// Integral of the normalized integrand over `[a, b]`, refined near the
    /// saddle.
    pub fn integrate(&self, a: f64, b: f64, coeffs: &[f64; 3], rel_tol: f64) -> Result<quadrature::QuadResult> {
        let w = self.bump_width(coeffs);
        let mut bps = vec![0.0];
        let mut s = 0.25 * w;
        while s < PI {
            bps.push(s);
            bps.push(-s);
            s *= 2.0;
        }
        let abs_tol = rel_tol * self.amplitude_scale() * w;
        quadrature::integrate(|t| self.integrand(t), a, b, &bps, abs_tol, rel_tol)
    }

    fn assemble(&self, value: Complex64, regime: Regime, method: Method, diagnostics: Diagnostics) -> Result<AsymptoticEstimate> {
        let (sign, lp) = self.log_prefactor()?;
        let re = value.re;
        if re == 0.0 {
            return Ok(AsymptoticEstimate { sign: 0, log_abs: None, regime, method, diagnostics });
        }
        let sign = if re < 0.0 { -sign } else { sign };
        Ok(AsymptoticEstimate { sign, log_abs: Some(lp.add_f64(re.abs().ln())), regime, method, diagnostics })
    }
}

fn exact_constant_term(setup: &SaddleSetup<'_>) -> Result<AsymptoticEstimate> {
    // Z = 0 means n_0 = 0: the coefficient is f_0(0) prod_j f_j(0)^{n_j}.
    let p = setup.precision;
    let mut sign = 1i8;
    let mut acc = HighPrecisionReal::zero(p);
    for (f, &e) in setup.system.factors().iter().zip(setup.n.exponents()) {
        if e == 0 {
            continue;
        }
        let term = match f.as_polynomial() {
            Some(poly) => {
                let c = poly.coeff(0);
                if precision::sign_of(&c) < 0 && e % 2 == 1 {
                    sign = -sign;
                }
                precision::ln_abs(&c, p)?
            }
            None => {
                let v = f.eval_real(0.0);
                if v < 0.0 && e % 2 == 1 {
                    sign = -sign;
                }
                HighPrecisionReal::from_f64(v.abs().ln(), p)
            }
        };
        acc = acc.add(&term.mul_int(e as i128));
    }
    let a0 = setup.system.eval_amplitude(Complex64::new(0.0, 0.0)).re;
    let diagnostics = setup.base_diagnostics();
    if a0 == 0.0 {
        return Ok(AsymptoticEstimate {
            sign: 0,
            log_abs: None,
            regime: Regime::SmallExponent,
            method: Method::Quadrature,
            diagnostics,
        });
    }
    if a0 < 0.0 {
        sign = -sign;
    }
    Ok(AsymptoticEstimate {
        sign,
        log_abs: Some(acc.add_f64(a0.abs().ln())),
        regime: Regime::SmallExponent,
        method: Method::Quadrature,
        diagnostics,
    })
}

/// Full-circle representation. This is an identity, so the result equals the
/// exact coefficient up to quadrature error; it holds on any circle, and no
/// minimality requirement is imposed.
pub fn integral_small(system: &FunctionSystem, n: &ExponentVector, norm: &NormSpec, precision: Precision) -> Result<AsymptoticEstimate> {
    let setup = SaddleSetup::new(system, n, norm, precision)?;
    integral_small_with(&setup)
}

pub fn integral_small_with(setup: &SaddleSetup<'_>) -> Result<AsymptoticEstimate> {
    if setup.z() == 0.0 {
        return exact_constant_term(setup);
    }
    let coeffs = setup.phase_coefficients()?;
    let q = setup.integrate(-PI, PI, &coeffs, QUAD_TOLERANCE)?;
    let mut diag = setup.base_diagnostics();
    diag.c2 = Some(coeffs[0]);
    diag.quadrature_error = Some(q.error);
    diag.panels = Some(q.panels);
    setup.assemble(q.value, Regime::SmallExponent, Method::Quadrature, diag)
}

/// Truncated-arc representation over `[-eps, eps]`.
pub fn integral_large(system: &FunctionSystem, n: &ExponentVector, norm: &NormSpec, epsilon: f64, precision: Precision) -> Result<AsymptoticEstimate> {
    let setup = SaddleSetup::new(system, n, norm, precision)?;
    integral_large_with(&setup, epsilon)
}

pub fn integral_large_with(setup: &SaddleSetup<'_>, epsilon: f64) -> Result<AsymptoticEstimate> {
    if setup.z() == 0.0 {
        return Err(Error::Regime("the truncated arc needs Z > 0".into()));
    }
    setup.require_strict()?;
    if !(epsilon > 0.0 && epsilon <= PI) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must lie in (0, pi]")));
    }
    for e in [epsilon, -epsilon] {
        let re = re_F(setup.system, &setup.direction, setup.z(), e);
        if !(re > 0.0) {
            return Err(Error::BadEpsilon { epsilon, re_f: re });
        }
    }
    let coeffs = setup.phase_coefficients()?;
    let q = setup.integrate(-epsilon, epsilon, &coeffs, QUAD_TOLERANCE)?;
    let tail = if epsilon < PI {
        let loose = 1e-6;
        let right = setup.integrate(epsilon, PI, &coeffs, loose)?.value;
        let left = setup.integrate(-PI, -epsilon, &coeffs, loose)?.value;
        (right + left).norm() / q.value.norm()
    } else {
        0.0
    };
    let mut diag = setup.base_diagnostics();
    diag.c2 = Some(coeffs[0]);
    diag.epsilon = Some(epsilon);
    diag.tail_bound = Some(tail);
    diag.quadrature_error = Some(q.error);
    diag.panels = Some(q.panels);
    setup.assemble(q.value, Regime::LargeExponent, Method::Quadrature, diag)
}

/// `(15/16) |c_3|^2 / (|n| c_2^3)`: relative size of the first correction to
/// the Gaussian term coming from the cubic part of the phase.
pub fn cubic_correction(scale: f64, c2: f64, c3: f64) -> f64 {
    15.0 / 16.0 * c3 * c3 / (scale * c2 * c2 * c2)
}

/// Leading Gaussian term
/// `Z^{-n_0} prod_j f_j(Z)^{n_j} A(0) / (2 pi) * sqrt(pi / (|n| c_2))`.
///
/// Refused for coalescing saddles: when `c_2 <= 1e-6` or when the cubic
/// correction exceeds [`CUBIC_CORRECTION_LIMIT`].
pub fn gaussian_leading(system: &FunctionSystem, n: &ExponentVector, norm: &NormSpec, precision: Precision) -> Result<AsymptoticEstimate> {
    let setup = SaddleSetup::new(system, n, norm, precision)?;
    gaussian_leading_with(&setup)
}

pub fn gaussian_leading_with(setup: &SaddleSetup<'_>) -> Result<AsymptoticEstimate> {
    if setup.z() == 0.0 {
        return Err(Error::Regime("the Gaussian term needs Z > 0".into()));
    }
    setup.require_strict()?;
    let [c2, c3, _] = setup.phase_coefficients()?;
    let kappa = if c2 > 0.0 { cubic_correction(setup.scale, c2, c3) } else { f64::INFINITY };
    if c2 <= C2_TOLERANCE || kappa > CUBIC_CORRECTION_LIMIT {
        return Err(Error::Coalescence { c2, cubic_correction: kappa });
    }
    let a0 = setup.system.eval_amplitude(setup.critical.z_complex()).re;
    let value = a0 * (PI / (setup.scale * c2)).sqrt();
    let mut diag = setup.base_diagnostics();
    diag.c2 = Some(c2);
    diag.cubic_correction = Some(kappa);
    setup.assemble(Complex64::new(value, 0.0), Regime::LargeExponent, Method::Gaussian, diag)
}

/// Largest `eps` in `{pi / 2^k : k = 1..8}` such that `Re F` is nondecreasing
/// in `|theta|` on a 64-point grid of `[0, eps]` and positive at `eps`.
pub fn choose_epsilon(system: &FunctionSystem, d: &Direction) -> Result<f64> {
    let cp = solve_critical(system, d, None)?;
    choose_epsilon_at(system, d, cp.z)
}

pub fn choose_epsilon_at(system: &FunctionSystem, d: &Direction, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Err(Error::NoValidEpsilon("F vanishes identically at Z = 0".into()));
    }
    'candidates: for k in 1..=8 {
        let eps = PI / f64::from(1u32 << k);
        for side in [1.0, -1.0] {
            let vals: Vec<f64> = (0..64).map(|i| re_F(system, d, z, side * eps * i as f64 / 63.0)).collect();
            let slack = 1e-14 * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if vals.windows(2).any(|w| w[1] < w[0] - slack) || !(vals[63] > 0.0) {
                continue 'candidates;
            }
        }
        return Ok(eps);
    }
    Err(Error::NoValidEpsilon(format!("Re F is not monotone near 0 for any pi/2^k (Z = {z})")))
}

/// Poisson-type limit `prod_j f_j(0)^{n_j} L^{n_0} / n_0!` with
/// `L = sum_j n_j f_j'(0)/f_j(0)`, valid when `|n| Z` stays bounded.
pub fn small_exponent_limit(system: &FunctionSystem, n: &ExponentVector, norm: &NormSpec, precision: Precision) -> Result<AsymptoticEstimate> {
    let setup = SaddleSetup::new(system, n, norm, precision)?;
    small_exponent_limit_with(&setup)
}

pub fn small_exponent_limit_with(setup: &SaddleSetup<'_>) -> Result<AsymptoticEstimate> {
    let nz = setup.nz_product();
    if nz > NZ_THRESHOLD {
        return Err(Error::Regime(format!(
            "|n| Z = {nz:.3} exceeds {NZ_THRESHOLD}; use the Gaussian or quadrature method"
        )));
    }
    let p = setup.precision;
    let zero = Complex64::new(0.0, 0.0);
    let mut sign = 1i8;
    let mut acc = HighPrecisionReal::zero(p);
    let mut lambda = 0.0;
    for (f, &e) in setup.system.factors().iter().zip(setup.n.exponents()) {
        let [v, dv, _] = f.eval_all(zero);
        lambda += e as f64 * dv.re / v.re;
        if e == 0 {
            continue;
        }
        if v.re < 0.0 && e % 2 == 1 {
            sign = -sign;
        }
        acc = acc.add(&HighPrecisionReal::from_f64(v.re.abs().ln(), p).mul_int(e as i128));
    }
    let n0 = setup.n.n0();
    let a0 = setup.system.eval_amplitude(zero).re;
    let mut diag = setup.base_diagnostics();
    diag.c2 = None;
    let degenerate = AsymptoticEstimate {
        sign: 0,
        log_abs: None,
        regime: Regime::SmallExponent,
        method: Method::SmallLimit,
        diagnostics: diag.clone(),
    };
    if a0 == 0.0 || (lambda == 0.0 && n0 > 0) {
        return Ok(degenerate);
    }
    if lambda < 0.0 && n0 % 2 == 1 {
        sign = -sign;
    }
    if a0 < 0.0 {
        sign = -sign;
    }
    let ln_fact: f64 = (2..=n0).map(|i| (i as f64).ln()).sum();
    let log = acc
        .add(&HighPrecisionReal::from_f64(lambda.abs().ln(), p).mul_int(n0 as i128))
        .add_f64(-ln_fact + a0.abs().ln());
    Ok(AsymptoticEstimate { sign, log_abs: Some(log), regime: Regime::SmallExponent, method: Method::SmallLimit, diagnostics: diag })
}

/// `(1/2pi) int_{-pi}^{pi} e^{-t(1 + i theta - e^{i theta})} dtheta`, the
/// limit kernel; equals `t^t e^{-t} / t!`.
pub fn limit_kernel_integral(t: f64) -> Result<f64> {
    let f = |th: f64| (-(Complex64::new(1.0, th) - Complex64::from_polar(1.0, th)) * t).exp();
    let q = quadrature::integrate(f, -PI, PI, &[0.0], 1e-15, 1e-14)?;
    Ok(q.value.re / (2.0 * PI))
}

/// Dispatches on `|n| Z`: the full circle when it is at most
/// [`NZ_THRESHOLD`], otherwise the Gaussian term when the saddle is simple,
/// and the truncated arc when it coalesces.
pub fn estimate(
    system: &FunctionSystem,
    n: &ExponentVector,
    norm: &NormSpec,
    method: MethodChoice,
    epsilon: Option<f64>,
    precision: Precision,
) -> Result<AsymptoticEstimate> {
    let setup = SaddleSetup::new(system, n, norm, precision)?;
    estimate_with(&setup, method, epsilon)
}

pub fn estimate_with(setup: &SaddleSetup<'_>, method: MethodChoice, epsilon: Option<f64>) -> Result<AsymptoticEstimate> {
    match method {
        MethodChoice::Gaussian => gaussian_leading_with(setup),
        MethodChoice::SmallLimit => small_exponent_limit_with(setup),
        MethodChoice::Quadrature => match epsilon {
            Some(eps) => integral_large_with(setup, eps),
            None => quadrature_auto(setup),
        },
        MethodChoice::Auto => {
            if let Some(eps) = epsilon {
                return integral_large_with(setup, eps);
            }
            if setup.z() == 0.0 || setup.nz_product() <= NZ_THRESHOLD {
                return integral_small_with(setup);
            }
            match gaussian_leading_with(setup) {
                Err(Error::Coalescence { .. }) => quadrature_auto(setup),
                other => other,
            }
        }
    }
}

fn quadrature_auto(setup: &SaddleSetup<'_>) -> Result<AsymptoticEstimate> {
    if setup.z() == 0.0 || setup.nz_product() <= NZ_THRESHOLD || !setup.critical.strictly_minimal {
        return integral_small_with(setup);
    }
    match choose_epsilon_at(setup.system, &setup.direction, setup.z()) {
        Ok(eps) => integral_large_with(setup, eps),
        Err(Error::NoValidEpsilon(_)) => integral_small_with(setup),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::{planar_norm, planar_system, trivariate_norm, trivariate_system};
    use crate::exact_series::{binomial, coeff_of_product, RationalPoly};

    fn nv(v: &[u64]) -> ExponentVector {
        ExponentVector::new(v.to_vec()).unwrap()
    }

    fn p() -> Precision {
        Precision::default()
    }

    fn oracle(system: &FunctionSystem, n: &ExponentVector) -> BigCoefficient {
        let factors: Vec<(RationalPoly, u64)> = system
            .factors()
            .iter()
            .zip(n.exponents())
            .map(|(f, &e)| (f.as_polynomial().unwrap().clone(), e))
            .collect();
        match system.amplitude() {
            None => coeff_of_product(n.n0(), &factors),
            Some(a) => {
                let mut all = factors;
                all.push((a.clone(), 1));
                coeff_of_product(n.n0(), &all)
            }
        }
    }

    #[test]
    fn small_integral_is_exact() {
        let s = trivariate_system();
        let n = nv(&[3, 4, 2]);
        let e = integral_small(&s, &n, &trivariate_norm(), p()).unwrap();
        assert!((e.to_f64() - 44.0).abs() < 44.0 * 1e-10, "{}", e.to_f64());
        let n = nv(&[0, 7, 3]);
        let e = integral_small(&s, &n, &trivariate_norm(), p()).unwrap();
        assert_eq!(e.to_f64(), 1.0);
        let n = nv(&[2, 980, 10]);
        let e = integral_small(&s, &n, &trivariate_norm(), p()).unwrap();
        assert!(e.rel_error(&oracle(&s, &n)).unwrap() < 1e-10);
    }

    #[test]
    fn planar_with_amplitude() {
        let s = planar_system().with_amplitude(Some(RationalPoly::from_integers(&[1, -2])));
        let n = nv(&[1, 9, 1]);
        let e = integral_small(&s, &n, &planar_norm(), p()).unwrap();
        assert!((e.to_f64() - 6.0).abs() < 6.0 * 1e-10, "{}", e.to_f64());
    }

    #[test]
    fn large_integral_and_contour_split() {
        let s = trivariate_system();
        let n = nv(&[300, 800, 100]);
        let exact = oracle(&s, &n);
        let d = direction_of(&n, &trivariate_norm()).unwrap();
        let eps = choose_epsilon(&s, &d).unwrap();
        let e = integral_large(&s, &n, &trivariate_norm(), eps, p()).unwrap();
        assert!(e.rel_error(&exact).unwrap() < 1e-6);
        assert!(e.diagnostics.tail_bound.unwrap() < 1e-8);
        let full = integral_large(&s, &n, &trivariate_norm(), PI, p()).unwrap();
        let small = integral_small(&s, &n, &trivariate_norm(), p()).unwrap();
        assert!((full.log_abs_f64().unwrap() - small.log_abs_f64().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn epsilon_choices() {
        let s = trivariate_system();
        let d = Direction::new(vec![3.0 / 11.0, 4.0 / 11.0, 2.0 / 11.0], trivariate_norm()).unwrap();
        let eps = choose_epsilon(&s, &d).unwrap();
        assert!(eps == PI / 2.0 || eps == PI / 4.0);
        let d = Direction::new(vec![2.0 / 9.0, 1.0, 1.0 / 9.0], planar_norm()).unwrap();
        assert!(choose_epsilon(&planar_system(), &d).unwrap() <= PI / 2.0);
        let d = Direction::new(vec![0.0, 0.5, 0.25], trivariate_norm()).unwrap();
        assert!(matches!(choose_epsilon(&s, &d), Err(Error::NoValidEpsilon(_))));
    }

    #[test]
    fn bad_epsilon_is_rejected() {
        let s = trivariate_system();
        let n = nv(&[30, 80, 10]);
        assert!(integral_large(&s, &n, &trivariate_norm(), 0.0, p()).is_err());
        assert!(integral_large(&s, &n, &trivariate_norm(), 4.0, p()).is_err());
    }

    #[test]
    fn gaussian_binomial_spot() {
        let s = trivariate_system();
        let n = nv(&[50, 100, 0]);
        let e = gaussian_leading(&s, &n, &trivariate_norm(), p()).unwrap();
        let err = e.rel_error(&binomial(100, 50)).unwrap();
        assert!((err - 0.0025031).abs() < 2e-6, "{err}");
        assert!((e.to_f64() / 1.011438842e29 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_refuses_coalescence() {
        let s = planar_system();
        // (n, k) = (300, 100): exponents (n - k, 3n, k - 1).
        let n = nv(&[200, 900, 99]);
        let r = gaussian_leading(&s, &n, &planar_norm(), p());
        assert!(matches!(r, Err(Error::Coalescence { .. })), "{r:?}");
    }

    #[test]
    fn small_limit_values() {
        let t2 = limit_kernel_integral(2.0).unwrap();
        assert!((t2 - 2.0 * (-2f64).exp()).abs() < 1e-14);
        assert!((limit_kernel_integral(0.0).unwrap() - 1.0).abs() < 1e-15);
        let s = trivariate_system();
        let n = nv(&[2, 980, 10]);
        let e = small_exponent_limit(&s, &n, &trivariate_norm(), p()).unwrap();
        assert!((e.to_f64() - 500000.0).abs() < 1e-6, "{}", e.to_f64());
        let big = nv(&[300, 800, 100]);
        assert!(matches!(small_exponent_limit(&s, &big, &trivariate_norm(), p()), Err(Error::Regime(_))));
    }

    #[test]
    fn auto_dispatch() {
        let s = trivariate_system();
        let e = estimate(&s, &nv(&[3, 4, 2]), &trivariate_norm(), MethodChoice::Auto, None, p()).unwrap();
        assert_eq!(e.method, Method::Quadrature);
        assert_eq!(e.regime, Regime::SmallExponent);
        let e = estimate(&s, &nv(&[300, 800, 100]), &trivariate_norm(), MethodChoice::Auto, None, p()).unwrap();
        assert_eq!(e.method, Method::Gaussian);
        let e = estimate(&planar_system(), &nv(&[200, 900, 99]), &planar_norm(), MethodChoice::Auto, None, p()).unwrap();
        assert_eq!(e.method, Method::Quadrature);
        assert_eq!(e.regime, Regime::LargeExponent);
    }

    #[test]
    fn json_shape() {
        let s = trivariate_system();
        let e = gaussian_leading(&s, &nv(&[50, 100, 0]), &trivariate_norm(), p()).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["sign"], 1);
        assert_eq!(v["regime"], "large-exponent");
        assert_eq!(v["method"], "gaussian");
        let la = v["log_abs"].as_str().unwrap();
        assert!((la.parse::<f64>().unwrap() - 66.786341610355).abs() < 1e-9, "{la}");
        assert!(v["diagnostics"]["c2"].as_f64().unwrap() > 0.0);
    }
}
