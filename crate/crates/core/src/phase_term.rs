//! The phase term
//! `F(theta; d) = i theta d_0 - sum_j d_j ln(f_j(Z e^{i theta}) / f_j(Z))`,
//! its rescaling `G = F / Z`, the two-variable `H(theta, z; d)`, exact Taylor
//! coefficients at `theta = 0`, and executable checks of the phase-term
//! properties.
#![allow(non_snake_case)]

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::critical_locus::{solve_critical, CriticalPoint};
use crate::error::{Error, Result};
use crate::exact_series::RationalPoly;
use crate::function_system::{Direction, Factor, FunctionSystem, POLE_TOLERANCE};
use crate::precision::{self, Precision};

/// Below this `Z` the limit formula replaces `F / Z`.
pub const Z_THRESHOLD: f64 = 1e-8;

/// Largest argument increment accepted per unwrapping step.
const MAX_ARG_STEP: f64 = 0.5;

/// `f(z e^{i theta}) / f(z) - 1`, computed without cancellation for small
/// `theta` when `f` is a polynomial.
pub(crate) fn ratio_minus_one(f: &Factor, z: Complex64, theta: f64) -> (Complex64, Complex64) {
    match f {
        Factor::Polynomial { approx, .. } => {
            // f(w) - f(z) = sum_k a_k z^k (e^{ik theta} - 1)
            let mut diff = Complex64::zero();
            let mut zk = Complex64::new(1.0, 0.0);
            let mut fz = Complex64::zero();
            for (k, &a) in approx.iter().enumerate() {
                let half = 0.5 * k as f64 * theta;
                let e = Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, half);
                diff += zk * e * a;
                fz += zk * a;
                zk *= z;
            }
            (diff / fz, fz)
        }
        Factor::Analytic(a) => {
            let fz = a.eval(z, 0);
            let fw = a.eval(z * Complex64::from_polar(1.0, theta), 0);
            ((fw - fz) / fz, fz)
        }
    }
}

pub(crate) fn ln_one_plus(delta: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * delta.re + delta.norm_sqr()).ln_1p();
    let im = delta.im.atan2(1.0 + delta.re);
    Complex64::new(re, im)
}

fn wrap(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    x - tau * ((x + std::f64::consts::PI) / tau).floor()
}

/// `ln(f(z e^{i theta}) / f(z))` on the branch that is 0 at `theta = 0` and
/// continuous along the arc from 0 to `theta`.
fn continuous_log_ratio(f: &Factor, j: usize, z: Complex64, theta: f64) -> Result<Complex64> {
    let check = |phi: f64| -> Result<Complex64> {
        let (delta, fz) = ratio_minus_one(f, z, phi);
        if fz.norm() < POLE_TOLERANCE || ((delta + 1.0) * fz).norm() < POLE_TOLERANCE {
            return Err(Error::PoleOnContour { factor: j + 1, theta: phi });
        }
        Ok(delta)
    };
    let end = check(theta)?;
    let ln_end = ln_one_plus(end);
    if theta == 0.0 {
        return Ok(Complex64::zero());
    }
    // Walk the arc, summing wrapped argument increments.
    let mut phi = 0.0;
    let mut arg = 0.0;
    let mut prev_arg = 0.0;
    let step = theta.signum() * theta.abs().min(0.1);
    while (theta - phi).abs() > 0.0 {
        let mut next = if (theta - phi).abs() <= step.abs() { theta } else { phi + step };
        loop {
            let a = ln_one_plus(check(next)?).im;
            let inc = wrap(a - prev_arg);
            if inc.abs() <= MAX_ARG_STEP || (next - phi).abs() < 1e-12 {
                arg += inc;
                prev_arg = a;
                break;
            }
            next = phi + 0.5 * (next - phi);
        }
        phi = next;
    }
    Ok(Complex64::new(ln_end.re, arg))
}

fn check_arity(system: &FunctionSystem, d: &Direction) -> Result<()> {
    system.check_arity(d.coords().len())
}

/// `H(theta, z; d) = i theta d_0 - sum_j d_j ln(f_j(z e^{i theta}) / f_j(z))`.
pub fn eval_H(system: &FunctionSystem, d: &Direction, theta: f64, z: Complex64) -> Result<Complex64> {
    check_arity(system, d)?;
    let mut acc = Complex64::new(0.0, theta * d.d0());
    for (j, (f, &dj)) in system.factors().iter().zip(d.tail()).enumerate() {
        if dj != 0.0 {
            acc -= continuous_log_ratio(f, j, z, theta)? * dj;
        }
    }
    Ok(acc)
}

/// `F(theta; d) = H(theta, Z(d); d)`.
pub fn eval_F(system: &FunctionSystem, d: &Direction, cp: &CriticalPoint, theta: f64) -> Result<Complex64> {
    if cp.z == 0.0 {
        return Ok(Complex64::zero());
    }
    eval_H(system, d, theta, cp.z_complex())
}

/// `Re F(theta; d) = -sum_j d_j ln|f_j(Z e^{i theta}) / f_j(Z)|`, which does
/// not depend on a branch choice.
pub fn re_F(system: &FunctionSystem, d: &Direction, z: f64, theta: f64) -> f64 {
    let zc = Complex64::new(z, 0.0);
    system
        .factors()
        .iter()
        .zip(d.tail())
        .filter(|(_, &dj)| dj != 0.0)
        .map(|(f, &dj)| -dj * ln_one_plus(ratio_minus_one(f, zc, theta).0).re)
        .sum()
}

/// `dH/dz (theta, z; d)`.
pub fn dH_dz(system: &FunctionSystem, d: &Direction, theta: f64, z: Complex64) -> Result<Complex64> {
    let e = Complex64::from_polar(1.0, theta);
    let w = z * e;
    let mut acc = Complex64::zero();
    for (j, (f, &dj)) in system.factors().iter().zip(d.tail()).enumerate() {
        if dj == 0.0 {
            continue;
        }
        let [fw, dfw, _] = f.eval_all(w);
        let [fz, dfz, _] = f.eval_all(z);
        if fw.norm() < POLE_TOLERANCE || fz.norm() < POLE_TOLERANCE {
            return Err(Error::PoleOnContour { factor: j + 1, theta });
        }
        acc -= (e * dfw / fw - dfz / fz) * dj;
    }
    Ok(acc)
}

/// `d^2 H / dz dtheta (theta, z; d)`.
pub fn d2H_dz_dtheta(system: &FunctionSystem, d: &Direction, theta: f64, z: Complex64) -> Result<Complex64> {
    let i = Complex64::i();
    let e = Complex64::from_polar(1.0, theta);
    let w = z * e;
    let mut acc = Complex64::zero();
    for (j, (f, &dj)) in system.factors().iter().zip(d.tail()).enumerate() {
        if dj == 0.0 {
            continue;
        }
        let [fw, d1, d2] = f.eval_all(w);
        if fw.norm() < POLE_TOLERANCE {
            return Err(Error::PoleOnContour { factor: j + 1, theta });
        }
        let q = d1 / fw;
        let dq = d2 / fw - q * q;
        acc -= (i * e * q + e * dq * i * w) * dj;
    }
    Ok(acc)
}

/// The `Z -> 0` limit `G(theta) = dH/dz(theta, 0) - theta d^2H/dz dtheta(0, 0)`.
pub fn g_limit(system: &FunctionSystem, d: &Direction, theta: f64) -> Result<Complex64> {
    let zero = Complex64::zero();
    Ok(dH_dz(system, d, theta, zero)? - d2H_dz_dtheta(system, d, 0.0, zero)? * theta)
}

/// `G = F / Z` above [`Z_THRESHOLD`], the limit formula below it.
pub fn eval_G_at(system: &FunctionSystem, d: &Direction, cp: &CriticalPoint, theta: f64) -> Result<Complex64> {
    if cp.z > Z_THRESHOLD {
        Ok(eval_F(system, d, cp, theta)? / cp.z)
    } else {
        g_limit(system, d, theta)
    }
}

pub fn eval_G(system: &FunctionSystem, d: &Direction, theta: f64) -> Result<Complex64> {
    let cp = solve_critical(system, d, None)?;
    eval_G_at(system, d, &cp, theta)
}

/// `sup_theta |F/Z - G_limit|` over a grid; measures how far `d` is from the
/// `Z = 0` limit.
pub fn g_continuity_gap(system: &FunctionSystem, d: &Direction, grid: &[f64]) -> Result<f64> {
    let cp = solve_critical(system, d, None)?;
    if cp.z == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for &t in grid {
        let g = eval_F(system, d, &cp, t)? / cp.z;
        worst = worst.max((g - g_limit(system, d, t)?).norm());
    }
    Ok(worst)
}

/// Taylor coefficients `c_k` of `F(theta; d) = sum_k c_k theta^k`.
#[derive(Clone, Debug)]
pub struct PhaseExpansion {
    pub direction: Direction,
    pub z_critical: CriticalPoint,
    /// `c_k = u_k i^k` where `u_k` are the (real) coefficients in `u = i theta`.
    u_coeffs: Vec<BigRational>,
    pub order: usize,
    pub precision: Precision,
    /// `|c_1|` before it is set to zero; the critical-equation residual at the
    /// working-precision `Z`.
    pub c1_residual: f64,
}

impl PhaseExpansion {
    /// `c_k` as a complex double; zero for `k < 2` and `k > order`.
    pub fn c(&self, k: usize) -> Complex64 {
        if k < 2 || k > self.order {
            return Complex64::zero();
        }
        let v = self.u_coeffs[k].to_f64().unwrap_or(f64::NAN);
        match k % 4 {
            0 => Complex64::new(v, 0.0),
            1 => Complex64::new(0.0, v),
            2 => Complex64::new(-v, 0.0),
            _ => Complex64::new(0.0, -v),
        }
    }

    /// `[c_2, ..., c_K]`.
    pub fn coeffs(&self) -> Vec<Complex64> {
        (2..=self.order).map(|k| self.c(k)).collect()
    }

    /// `c_k` as exact rationals `(re, im)` at the working precision.
    pub fn c_exact(&self, k: usize) -> (BigRational, BigRational) {
        if k < 2 || k > self.order {
            return (BigRational::zero(), BigRational::zero());
        }
        let v = self.u_coeffs[k].clone();
        match k % 4 {
            0 => (v, BigRational::zero()),
            1 => (BigRational::zero(), v),
            2 => (-v, BigRational::zero()),
            _ => (BigRational::zero(), -v),
        }
    }

    /// Evaluates the truncated series at `theta`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        (2..=self.order).rev().fold(Complex64::zero(), |acc, k| acc * theta + self.c(k)) * theta * theta
    }
}

impl Serialize for PhaseExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let digits = self.precision.decimal_digits();
        let coeffs: Vec<[String; 2]> = (2..=self.order)
            .map(|k| {
                let (re, im) = self.c_exact(k);
                [precision::rational_to_decimal(&re, digits), precision::rational_to_decimal(&im, digits)]
            })
            .collect();
        let mut st = s.serialize_struct("PhaseExpansion", 6)?;
        st.serialize_field("direction", &self.direction)?;
        st.serialize_field("z_critical", &self.z_critical)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("precision", &self.precision.bits())?;
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("c1_residual", &self.c1_residual)?;
        st.end()
    }
}

/// Degree of the Taylor prefix standing in for an analytic factor.
fn analytic_prefix_degree(order: usize) -> usize {
    order + 96
}

/// Exact Taylor expansion of `F` at `theta = 0` up to `theta^order`.
///
/// Works in `u = i theta`, where every coefficient is real: with
/// `w(u) = Z(e^u - 1)`, each `f_j(Z + w)/f_j(Z)` comes from the Taylor shift
/// of `f_j` at `Z`, and its logarithm from the recurrence
/// `k l_k = k R_k - sum_{i<k} i l_i R_{k-i}`. `Z` is refined by exact Newton
/// steps and rounded to the working precision.
pub fn taylor_F(system: &FunctionSystem, d: &Direction, order: usize, precision: Precision) -> Result<PhaseExpansion> {
    check_arity(system, d)?;
    if order < 2 {
        return Err(Error::InvalidInput(format!("expansion order must be >= 2, got {order}")));
    }
    let cp = solve_critical(system, d, None)?;
    taylor_F_at(system, d, cp, order, precision)
}

/// [`taylor_F`] at an already computed critical point.
pub fn taylor_F_at(
    system: &FunctionSystem,
    d: &Direction,
    cp: CriticalPoint,
    order: usize,
    precision: Precision,
) -> Result<PhaseExpansion> {
    check_arity(system, d)?;
    if order < 2 {
        return Err(Error::InvalidInput(format!("expansion order must be >= 2, got {order}")));
    }
    let mut u = vec![BigRational::zero(); order + 1];
    if cp.z == 0.0 {
        return Ok(PhaseExpansion {
            direction: d.clone(),
            z_critical: cp,
            u_coeffs: u,
            order,
            precision,
            c1_residual: 0.0,
        });
    }
    let bits = precision.bits() + 32;
    let dq: Vec<BigRational> = d.coords().iter().map(|&x| precision::f64_to_rational(x)).collect::<Result<_>>()?;
    let polys: Vec<RationalPoly> = system
        .factors()
        .iter()
        .map(|f| match f {
            Factor::Polynomial { poly, .. } => poly.clone(),
            Factor::Analytic(_) => f.taylor_prefix(analytic_prefix_degree(order)),
        })
        .collect();
    let z = refine_root(&polys, &dq, precision::f64_to_rational(cp.z)?, precision.bits());

    // w(u) = Z (e^u - 1), truncated.
    let mut w = vec![BigRational::zero(); order + 1];
    let mut fact = BigRational::one();
    for k in 1..=order {
        fact *= BigRational::from_integer(k.into());
        w[k] = &z / &fact;
    }
    let mut u1_residual = dq[0].clone();
    u[1] = dq[0].clone();
    for (j, (poly, dj)) in polys.iter().zip(&dq[1..]).enumerate() {
        if dj.is_zero() {
            continue;
        }
        let shifted = poly.taylor_shift(&z);
        let a0 = shifted.coeff(0);
        if a0.is_zero() {
            return Err(Error::Pole { factor: j + 1, z: cp.z_complex() });
        }
        // R(u) = sum_{i>=1} (a_i / a_0) w(u)^i
        let mut r = vec![BigRational::zero(); order + 1];
        let mut wp = w.clone();
        for i in 1..=order.min(shifted.degree().unwrap_or(0)) {
            let ai = precision::round_to_bits(&(shifted.coeff(i) / &a0), bits);
            if !ai.is_zero() {
                for k in i..=order {
                    r[k] += &ai * &wp[k];
                }
            }
            wp = series_mul(&wp, &w, order);
            for c in wp.iter_mut() {
                *c = precision::round_to_bits(c, bits);
            }
        }
        let l = log_one_plus_series(&r, order, bits);
        u1_residual -= dj * &l[1];
        for k in 1..=order {
            u[k] -= dj * &l[k];
        }
    }
    let c1_residual = u1_residual.to_f64().unwrap_or(f64::NAN).abs();
    u[1] = BigRational::zero();
    for c in u.iter_mut() {
        *c = precision::round_to_bits(c, precision.bits());
    }
    Ok(PhaseExpansion { direction: d.clone(), z_critical: cp, u_coeffs: u, order, precision, c1_residual })
}

fn series_mul(a: &[BigRational], b: &[BigRational], order: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); order + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `ln(1 + R)` for a series `R` with `R_0 = 0`.
fn log_one_plus_series(r: &[BigRational], order: usize, bits: usize) -> Vec<BigRational> {
    let mut l = vec![BigRational::zero(); order + 1];
    for k in 1..=order {
        let kk = BigRational::from_integer(k.into());
        let mut s = &kk * &r[k];
        for i in 1..k {
            s -= BigRational::from_integer(i.into()) * &l[i] * &r[k - i];
        }
        l[k] = precision::round_to_bits(&(s / kk), bits);
    }
    l
}

/// Newton refinement of the critical equation in exact arithmetic, rounded
/// to `bits`. Skipped near double roots, where Newton loses its footing.
fn refine_root(polys: &[RationalPoly], d: &[BigRational], z0: BigRational, bits: usize) -> BigRational {
    let derivs: Vec<(RationalPoly, RationalPoly)> = polys
        .iter()
        .map(|p| {
            let d1 = p.derivative();
            let d2 = d1.derivative();
            (d1, d2)
        })
        .collect();
    let mut z = z0;
    for _ in 0..12 {
        let mut g = -d[0].clone();
        let mut dg = BigRational::zero();
        for ((p, (p1, p2)), dj) in polys.iter().zip(&derivs).zip(&d[1..]) {
            if dj.is_zero() {
                continue;
            }
            let f = p.eval(&z);
            if f.is_zero() {
                return z;
            }
            let q = p1.eval(&z) / &f;
            let q2 = p2.eval(&z) / &f;
            g += dj * &z * &q;
            dg += dj * (&q + &z * (q2 - &q * &q));
        }
        let slope = dg.to_f64().unwrap_or(0.0).abs();
        if slope < 1e-6 {
            return z;
        }
        let step = precision::round_to_bits(&(g / dg), bits + 16);
        z = precision::round_to_bits(&(&z - &step), bits + 16);
        let rel = step.to_f64().unwrap_or(0.0).abs() / z.to_f64().unwrap_or(1.0).abs();
        if rel < 2f64.powi(-(bits as i32)) {
            break;
        }
    }
    precision::round_to_bits(&z, bits)
}

/// Outcome of [`check_theorem2`]; each failure carries a witnessing `theta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseConditionsReport {
    pub z: f64,
    /// `|F(0)|` and `|F'(0)|`.
    pub f_at_zero: f64,
    pub f_prime_at_zero: f64,
    pub a_pass: bool,
    /// True when `Z = 0`, where positivity is not asserted.
    pub b_vacuous: bool,
    pub b_pass: bool,
    pub b_witness: Option<f64>,
    pub min_re_f: f64,
    pub c_pass: bool,
    pub c_witness: Option<f64>,
    pub max_c_error: f64,
}

impl PhaseConditionsReport {
    pub fn all_pass(&self) -> bool {
        self.a_pass && self.b_pass && self.c_pass
    }
}

/// Checks `F(0) = F'(0) = 0`, `Re F > 0` away from 0, and `F = Z G` on a grid.
pub fn check_theorem2(system: &FunctionSystem, d: &Direction, grid: &[f64]) -> Result<PhaseConditionsReport> {
    let cp = solve_critical(system, d, None)?;
    let z = cp.z;
    let f0 = eval_F(system, d, &cp, 0.0)?.norm();
    // F'(0) = i (d_0 - sum_j d_j Z f_j'(Z)/f_j(Z))
    let fp0 = if z == 0.0 {
        0.0
    } else {
        let zc = cp.z_complex();
        let h: Complex64 = system
            .factors()
            .iter()
            .zip(d.tail())
            .map(|(f, &dj)| {
                let [v, dv, _] = f.eval_all(zc);
                zc * dv / v * dj
            })
            .sum();
        (d.d0() - h).norm()
    };
    let b_vacuous = z == 0.0;
    let mut b_witness = None;
    let mut min_re = f64::INFINITY;
    let mut c_witness = None;
    let mut max_c = 0.0f64;
    for &t in grid {
        if t != 0.0 && !b_vacuous {
            let re = re_F(system, d, z, t);
            min_re = min_re.min(re);
            if !(re > 0.0) && b_witness.is_none() {
                b_witness = Some(t);
            }
        }
        let f = eval_F(system, d, &cp, t)?;
        let g = eval_G_at(system, d, &cp, t)?;
        let err = (f - g * z).norm();
        max_c = max_c.max(err);
        if !(err < 1e-10) && c_witness.is_none() {
            c_witness = Some(t);
        }
    }
    Ok(PhaseConditionsReport {
        z,
        f_at_zero: f0,
        f_prime_at_zero: fp0,
        a_pass: f0 < 1e-12 && fp0 < 1e-12,
        b_vacuous,
        b_pass: b_vacuous || b_witness.is_none(),
        b_witness,
        min_re_f: min_re,
        c_pass: c_witness.is_none(),
        c_witness,
        max_c_error: max_c,
    })
}

/// `n` equispaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::{planar_norm, planar_system, trivariate_norm, trivariate_system};
    use std::f64::consts::PI;

    fn tri(d: [f64; 3]) -> Direction {
        Direction::new(d.to_vec(), trivariate_norm()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn f_basics() {
        let s = trivariate_system();
        let d = tri([3.0 / 11.0, 4.0 / 11.0, 2.0 / 11.0]);
        let cp = solve_critical(&s, &d, None).unwrap();
        assert_eq!(eval_F(&s, &d, &cp, 0.0).unwrap(), Complex64::zero());
        assert!(eval_F(&s, &d, &cp, PI).unwrap().re > 0.0);
        for t in [0.3, 1.1, 2.9] {
            let a = eval_F(&s, &d, &cp, t).unwrap();
            let b = eval_F(&s, &d, &cp, -t).unwrap();
            assert!(close(a, b.conj(), 1e-14));
            assert!((a.re - re_F(&s, &d, cp.z, t)).abs() < 1e-15);
        }
    }

    #[test]
    fn branch_is_continuous_past_the_negative_axis() {
        // 1 + 2z at |z| = 1 winds once around the origin; the continuous
        // branch of ln at theta = pi has imaginary part pi, not -pi or 0.
        let s = FunctionSystem::from_polys(vec![RationalPoly::from_integers(&[1, 2])], None).unwrap();
        let d = Direction::new(vec![0.0, 1.0], crate::function_system::NormSpec::LInf).unwrap();
        let h = eval_H(&s, &d, PI, Complex64::new(1.0, 0.0)).unwrap();
        // ln((1 - 2)/3) = ln(1/3) + i pi on the continuous branch.
        assert!(close(h, -Complex64::new((1.0f64 / 3.0).ln(), PI), 1e-12), "{h}");
        let h = eval_H(&s, &d, -PI, Complex64::new(1.0, 0.0)).unwrap();
        assert!(close(h, -Complex64::new((1.0f64 / 3.0).ln(), -PI), 1e-12), "{h}");
    }

    #[test]
    fn h_properties() {
        let s = trivariate_system();
        let d = tri([0.2, 0.4, 0.2]);
        let z = Complex64::new(0.7, 0.1);
        assert_eq!(eval_H(&s, &d, 0.0, z).unwrap(), Complex64::zero());
        let cp = solve_critical(&s, &d, None).unwrap();
        assert!(close(eval_H(&s, &d, 0.8, cp.z_complex()).unwrap(), eval_F(&s, &d, &cp, 0.8).unwrap(), 0.0));
        // Finite-difference checks of the analytic z-derivatives.
        let h = 1e-6;
        for t in [0.4, -1.3] {
            let fd = (eval_H(&s, &d, t, z + h).unwrap() - eval_H(&s, &d, t, z - h).unwrap()) / (2.0 * h);
            assert!(close(fd, dH_dz(&s, &d, t, z).unwrap(), 1e-8));
            let fd2 = (dH_dz(&s, &d, t + h, z).unwrap() - dH_dz(&s, &d, t - h, z).unwrap()) / (2.0 * h);
            assert!(close(fd2, d2H_dz_dtheta(&s, &d, t, z).unwrap(), 1e-8));
        }
    }

    #[test]
    fn g_limit_on_zero_set() {
        let s = trivariate_system();
        let d = tri([0.0, 0.5, 0.25]);
        let g = eval_G(&s, &d, PI).unwrap();
        assert!(close(g, Complex64::new(2.0, PI), 1e-14), "{g}");
        assert_eq!(eval_G(&s, &d, 0.0).unwrap(), Complex64::zero());
        let grid = linspace(-PI, PI, 101);
        let mut prev = f64::INFINITY;
        for d0 in [1e-2, 1e-3, 1e-4] {
            let d = tri([d0, 0.5 - d0, 0.25]);
            let gap = g_continuity_gap(&s, &d, &grid).unwrap();
            assert!(gap < prev, "{gap} !< {prev}");
            prev = gap;
        }
    }

    #[test]
    fn taylor_trivariate_c2() {
        let s = trivariate_system();
        let d = tri([7.0 / 25.0, 6.0 / 25.0, 6.0 / 25.0]);
        let e = taylor_F(&s, &d, 6, Precision::default()).unwrap();
        assert!(close(e.c(2), Complex64::new(17.0 / 300.0, 0.0), 1e-15), "{}", e.c(2));
        assert!(e.c1_residual < 1e-15);
        for t in [0.05, -0.1] {
            let exact = eval_F(&s, &d, &e.z_critical, t).unwrap();
            assert!(close(e.eval(t), exact, 1e-8), "{t}");
        }
    }

    #[test]
    fn taylor_planar_coalescing() {
        let d = Direction::new(vec![2.0 / 9.0, 1.0, 1.0 / 9.0], planar_norm()).unwrap();
        let e = taylor_F(&planar_system(), &d, 5, Precision::default()).unwrap();
        assert!(e.c(2).norm() < 1e-14, "{}", e.c(2));
        assert!(close(e.c(3), Complex64::new(0.0, -8.0 / 81.0), 1e-13), "{}", e.c(3));
        assert!(close(e.c(4), Complex64::new(10.0 / 81.0, 0.0), 1e-13), "{}", e.c(4));
        assert!(close(e.c(5), Complex64::new(0.0, 34.0 / 243.0), 1e-13), "{}", e.c(5));
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["coeffs"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn taylor_at_origin_is_zero() {
        let d = tri([0.0, 0.5, 0.25]);
        let e = taylor_F(&trivariate_system(), &d, 4, Precision::default()).unwrap();
        assert!(e.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn phase_conditions() {
        let s = trivariate_system();
        let grid = linspace(-PI, PI, 101);
        let r = check_theorem2(&s, &tri([3.0 / 11.0, 4.0 / 11.0, 2.0 / 11.0]), &grid).unwrap();
        assert!(r.all_pass(), "{r:?}");
        let r = check_theorem2(&s, &tri([0.0, 0.5, 0.25]), &grid).unwrap();
        assert!(r.all_pass() && r.b_vacuous);
        let d = Direction::new(vec![2.0 / 9.0, 1.0, 1.0 / 9.0], planar_norm()).unwrap();
        let r = check_theorem2(&planar_system(), &d, &linspace(-1.0, 1.0, 101)).unwrap();
        assert!(r.all_pass(), "{r:?}");
    }
}
