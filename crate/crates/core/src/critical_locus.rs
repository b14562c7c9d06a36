//! Critical points `z` of a direction `d`, i.e. real solutions of
//! `d_0 = sum_j d_j z f_j'(z)/f_j(z)`, and a numeric certificate that the
//! circle maximum of `prod_j |f_j|^{d_j}` is attained only at `z`.

use num_complex::Complex64;
use serde::Serialize;

use crate::applications::{planar_norm, planar_system, trivariate_norm, trivariate_system};
use crate::error::{Error, Result};
use crate::function_system::{Direction, Factor, FunctionSystem, NormSpec, POLE_TOLERANCE};

/// Default number of circle samples for the minimality certificate.
pub const DEFAULT_SAMPLES: usize = 720;

/// Largest residual of the critical equation accepted for a solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Relative margin (against the `theta = 0` value) required for strictness.
pub const MARGIN_THRESHOLD: f64 = 1e-12;

const MAX_ITERATIONS: usize = 200;
const SCAN_POINTS: usize = 4096;

/// A critical point with its residual and minimality certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub z: f64,
    pub residual: f64,
    /// `prod |f_j(z)|^{d_j}` minus the best competitor on the circle.
    /// Infinite at `z = 0`, where the circle degenerates to a point.
    pub minimality_margin: f64,
    pub strictly_minimal: bool,
}

impl CriticalPoint {
    pub fn z_complex(&self) -> Complex64 {
        Complex64::new(self.z, 0.0)
    }

    fn origin() -> Self {
        CriticalPoint { z: 0.0, residual: 0.0, minimality_margin: f64::INFINITY, strictly_minimal: true }
    }
}

/// Output of [`verify_strict_minimality`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinimalityCertificate {
    pub margin: f64,
    pub strictly_minimal: bool,
}

/// `sum_j d_j z f_j'(z)/f_j(z)` and its derivative in `z`, for real `z`.
fn rhs_and_slope(system: &FunctionSystem, tail: &[f64], z: f64) -> Result<(f64, f64)> {
    let zc = Complex64::new(z, 0.0);
    let mut h = 0.0;
    let mut dh = 0.0;
    for (j, (f, &dj)) in system.factors().iter().zip(tail).enumerate() {
        if dj == 0.0 {
            continue;
        }
        let [v, d1, d2] = f.eval_all(zc);
        if v.norm() < POLE_TOLERANCE {
            return Err(Error::Pole { factor: j + 1, z: zc });
        }
        let q = (d1 / v).re;
        let q2 = (d2 / v).re;
        h += dj * z * q;
        dh += dj * (q + z * (q2 - q * q));
    }
    Ok((h, dh))
}

fn check_direction(system: &FunctionSystem, d: &Direction) -> Result<()> {
    system.check_arity(d.coords().len())
}

/// Solves the critical equation for `d` on the real axis.
///
/// Nonnegative-coefficient systems have an increasing right-hand side on
/// `[0, r)`, so the search covers that whole interval. For other systems the
/// search runs over the first interval `[0, z_peak]` on which the right-hand
/// side increases and every `f_j` stays positive, unless `bracket` is given.
pub fn solve_critical(system: &FunctionSystem, d: &Direction, bracket: Option<(f64, f64)>) -> Result<CriticalPoint> {
    check_direction(system, d)?;
    let d0 = d.d0();
    let tail = d.tail();
    if d0 == 0.0 && bracket.is_none() {
        return Ok(CriticalPoint::origin());
    }
    if tail.iter().all(|&x| x == 0.0) {
        return Err(Error::NoSolution("d_1 = ... = d_m = 0 while d_0 > 0".into()));
    }
    let (lo, hi) = match bracket {
        Some((a, b)) => {
            if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
                return Err(Error::InvalidInput(format!("bad bracket [{a}, {b}]")));
            }
            (a, b)
        }
        None => (0.0, search_limit(system, tail, d0)?),
    };
    let z = bracketed_root(system, tail, d0, lo, hi)?;
    finish(system, d, z)
}

fn finish(system: &FunctionSystem, d: &Direction, z: f64) -> Result<CriticalPoint> {
    if z == 0.0 {
        return Ok(CriticalPoint::origin());
    }
    let (h, _) = rhs_and_slope(system, d.tail(), z)?;
    let residual = (d.d0() - h).abs();
    let cert = verify_strict_minimality(system, d, z, DEFAULT_SAMPLES);
    Ok(CriticalPoint { z, residual, minimality_margin: cert.margin, strictly_minimal: cert.strictly_minimal })
}

/// Upper end of the automatic search interval.
fn search_limit(system: &FunctionSystem, tail: &[f64], d0: f64) -> Result<f64> {
    let r = system.radius();
    let monotone = system.has_nonnegative_coeffs();
    let rho = if monotone { r } else { r.min(first_positive_zero(system, tail)) };
    let mut upper = if rho.is_finite() { rho * (1.0 - 1e-9) } else { 1.0 };
    if monotone && rho.is_finite() {
        upper = 0.999 * rho;
    }
    for _ in 0..64 {
        if !monotone {
            if let Some(peak) = first_peak(system, tail, upper)? {
                return Ok(peak);
            }
        }
        let (h, _) = rhs_and_slope(system, tail, upper)?;
        if h >= d0 || rho.is_finite() {
            return Ok(upper);
        }
        upper *= 2.0;
    }
    Err(Error::NoSolution(format!("right-hand side stays below d_0 = {d0} on [0, {upper:e}]")))
}

/// Smallest positive real zero of any active factor, or `+inf`.
fn first_positive_zero(system: &FunctionSystem, tail: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for (f, &dj) in system.factors().iter().zip(tail) {
        if dj == 0.0 || f.has_nonnegative_coeffs() {
            continue;
        }
        let bound = match f {
            Factor::Polynomial { approx, .. } => {
                let lead = approx.last().copied().unwrap_or(1.0).abs();
                1.0 + approx.iter().map(|c| c.abs() / lead).fold(0.0, f64::max)
            }
            Factor::Analytic(a) => a.radius().min(1e3),
        };
        let step = bound / SCAN_POINTS as f64;
        let mut prev = f.eval_real(0.0);
        for i in 1..=SCAN_POINTS {
            let x = step * i as f64;
            let v = f.eval_real(x);
            if v.abs() < POLE_TOLERANCE || v.signum() != prev.signum() {
                let (mut a, mut b) = (x - step, x);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if f.eval_real(mid).signum() == prev.signum() && f.eval_real(mid).abs() >= POLE_TOLERANCE {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                best = best.min(a);
                break;
            }
            prev = v;
        }
    }
    best
}

/// First point in `(0, upper]` where the right-hand side stops increasing.
fn first_peak(system: &FunctionSystem, tail: &[f64], upper: f64) -> Result<Option<f64>> {
    let step = upper / SCAN_POINTS as f64;
    let mut prev = 0.0;
    for i in 1..=SCAN_POINTS {
        let x = step * i as f64;
        let (_, slope) = rhs_and_slope(system, tail, x)?;
        if slope <= 0.0 {
            let (mut a, mut b) = (prev, x);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if rhs_and_slope(system, tail, mid)?.1 > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a <= f64::EPSILON * b {
                    break;
                }
            }
            return Ok(Some(a));
        }
        prev = x;
    }
    Ok(None)
}

/// Safeguarded Newton iteration for `h(z) = d0` on `[lo, hi]`.
fn bracketed_root(system: &FunctionSystem, tail: &[f64], d0: f64, lo: f64, hi: f64) -> Result<f64> {
    let scale = d0.abs().max(1.0);
    let g = |z: f64| -> Result<(f64, f64)> {
        let (h, dh) = rhs_and_slope(system, tail, z)?;
        Ok((h - d0, dh))
    };
    let (glo, _) = g(lo)?;
    let (ghi, _) = g(hi)?;
    if glo.abs() <= 1e-14 * scale {
        return Ok(lo);
    }
    // A root touching the end of the interval (a double root at a peak of
    // the right-hand side) is returned as is; bisecting would drift off it.
    if ghi.abs() <= 1e-12 * scale {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::NoSolution(format!(
            "critical equation has no sign change on [{lo}, {hi}] (d_0 = {d0})"
        )));
    }
    let increasing = ghi > 0.0;
    let (mut a, mut b) = (lo, hi);
    let mut z = 0.5 * (a + b);
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let (gz, dgz) = g(z)?;
        trace.push((z, gz));
        if gz.abs() <= 1e-15 * scale {
            return Ok(z);
        }
        if (gz > 0.0) == increasing {
            b = z;
        } else {
            a = z;
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
            return Ok(z);
        }
        let newton = z - gz / dgz;
        z = if dgz != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
    }
    Err(Error::NonConvergence { trace })
}

/// Sampled certificate that `prod |f_j(z e^{i theta})|^{d_j}` is maximal only
/// at `theta = 0`.
///
/// The central basin around `theta = 0` is found by walking down from the
/// origin. Local maxima of the samples outside it are refined by golden
/// section, and the margin is the `theta = 0` value minus the best of those
/// peaks and the basin's edge samples.
pub fn verify_strict_minimality(system: &FunctionSystem, d: &Direction, z: f64, samples: usize) -> MinimalityCertificate {
    let failed = MinimalityCertificate { margin: f64::NAN, strictly_minimal: false };
    if z == 0.0 {
        return MinimalityCertificate { margin: f64::INFINITY, strictly_minimal: true };
    }
    let tail = d.tail();
    let log_mod = |theta: f64| -> f64 {
        let w = Complex64::from_polar(z, theta);
        system
            .factors()
            .iter()
            .zip(tail)
            .filter(|(_, &dj)| dj != 0.0)
            .map(|(f, &dj)| dj * f.eval(w, 0).norm().ln())
            .sum()
    };
    let n = samples.max(8);
    let step = std::f64::consts::TAU / n as f64;
    let theta_of = |k: usize| step * k as f64;
    let vals: Vec<f64> = (0..n).map(|k| log_mod(theta_of(k))).collect();
    let v0 = vals[0];
    if !v0.is_finite() || vals.iter().any(|v| v.is_nan()) {
        return failed;
    }
    // Indices taken modulo n, so index n - k stands for theta = -k step.
    let mut right = 0;
    while right + 1 < n && vals[right + 1] < vals[right] {
        right += 1;
    }
    let mut left = n;
    while left - 1 > right && vals[(left - 1) % n] < vals[left % n] {
        left -= 1;
    }
    let mut best = f64::NEG_INFINITY;
    if right > 0 {
        best = best.max(vals[right]);
    }
    if left < n {
        best = best.max(vals[left % n]);
    }
    if right == 0 || left == n {
        // No descent on one side: the maximum is not isolated at theta = 0.
        best = best.max(v0);
    }
    for k in (right + 1)..left {
        let prev = vals[(k - 1) % n];
        let next = vals[(k + 1) % n];
        let v = vals[k % n];
        if v >= prev && v >= next {
            let peak = golden_max(&log_mod, theta_of(k) - step, theta_of(k) + step);
            best = best.max(peak.max(v));
        }
    }
    let scale = v0.exp();
    let rel = -(best - v0).exp_m1();
    let margin = scale * rel;
    let aperiodic = aperiodic_precheck(system, tail, z);
    MinimalityCertificate { margin, strictly_minimal: aperiodic || rel > MARGIN_THRESHOLD }
}

/// For nonnegative polynomial factors, an aperiodic active factor makes any
/// positive real critical point strictly minimal.
fn aperiodic_precheck(system: &FunctionSystem, tail: &[f64], z: f64) -> bool {
    if z <= 0.0 || !system.has_nonnegative_coeffs() || !system.all_polynomial() {
        return false;
    }
    system
        .factors()
        .iter()
        .zip(tail)
        .any(|(f, &dj)| dj > 0.0 && f.as_polynomial().is_some_and(|p| p.period() == 1))
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    f1.max(f2)
}

/// Closed-form critical point of the trivariate system `(1+z, 1+2z)` under
/// the weighted L1 norm `|d_0| + |d_1| + 2|d_2|`.
pub fn z_formula_trivariate(d: &Direction) -> Result<CriticalPoint> {
    d.require_norm(&trivariate_norm())?;
    let [d0, d1, d2] = [d.coords()[0], d.coords()[1], d.coords()[2]];
    if d1 + d2 <= d0 {
        return Err(Error::Domain(format!("d_1 + d_2 = {} must exceed d_0 = {d0}", d1 + d2)));
    }
    let b = d1 + 2.0 * d2 - 3.0 * d0;
    let disc = b * b + 8.0 * d0 * (d1 + d2 - d0);
    let z = 2.0 * d0 / (b + disc.sqrt());
    finish(&trivariate_system(), d, z)
}

/// Closed-form critical point of `(1+z, 1-z)` under the L-infinity norm.
pub fn z_formula_planar(d: &Direction) -> Result<CriticalPoint> {
    d.require_norm(&planar_norm())?;
    let [d0, d1, d2] = [d.coords()[0], d.coords()[1], d.coords()[2]];
    if (d1 - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("planar directions need d_1 = 1, got {d1}")));
    }
    let excluded = |a: f64, c: f64| (d0 - a).abs() < 1e-12 && (d2 - c).abs() < 1e-12;
    if excluded(0.0, 1.0) || excluded(1.0, 0.0) {
        return Err(Error::Domain(format!("direction ({d0}, 1, {d2}) is excluded")));
    }
    let disc = (d1 - d2).powi(2) - 4.0 * d0 * (d1 + d2 - d0);
    if disc < -1e-14 {
        return Err(Error::Domain(format!(
            "(d_1 - d_2)^2 < 4 d_0 (d_1 + d_2 - d_0) at ({d0}, {d1}, {d2})"
        )));
    }
    let denom = (d1 - d2) + disc.max(0.0).sqrt();
    if denom <= 0.0 {
        return Err(Error::Domain(format!("closed form undefined at ({d0}, {d1}, {d2})")));
    }
    finish(&planar_system(), d, 2.0 * d0 / denom)
}

/// The direction `(d_0(z), d_1, ..., d_m)`, normalized, for which `z` is
/// critical: `d_0(z) = sum_j d_j z f_j'(z)/f_j(z)`.
pub fn direction_of_z(system: &FunctionSystem, z: f64, tail: &[f64], norm: &NormSpec) -> Result<Direction> {
    if tail.len() != system.m() || tail.iter().any(|&x| !(x >= 0.0)) || tail.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidInput("tail must be m nonnegative reals, not all zero".into()));
    }
    if !(z >= 0.0 && z < system.radius()) {
        return Err(Error::Domain(format!("z = {z} is outside [0, r)")));
    }
    let (d0, _) = rhs_and_slope(system, tail, z)?;
    if d0 < 0.0 {
        return Err(Error::Domain(format!("d_0({z}) = {d0} is negative")));
    }
    let mut v = Vec::with_capacity(tail.len() + 1);
    v.push(d0);
    v.extend_from_slice(tail);
    Direction::normalized(&v, norm.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_series::RationalPoly;

    fn tri(d: [f64; 3]) -> Direction {
        Direction::new(d.to_vec(), trivariate_norm()).unwrap()
    }

    fn pl(d0: f64, d2: f64) -> Direction {
        Direction::new(vec![d0, 1.0, d2], planar_norm()).unwrap()
    }

    #[test]
    fn trivariate_spot_values() {
        let d = tri([7.0 / 25.0, 6.0 / 25.0, 6.0 / 25.0]);
        let cp = solve_critical(&trivariate_system(), &d, None).unwrap();
        assert!((cp.z - 1.0).abs() < 1e-12);
        assert!(cp.residual < 1e-14);
        assert!(cp.strictly_minimal);
        let cf = z_formula_trivariate(&d).unwrap();
        assert!((cf.z - 1.0).abs() < 1e-14);
        let d = tri([3.0 / 11.0, 4.0 / 11.0, 2.0 / 11.0]);
        let z = z_formula_trivariate(&d).unwrap().z;
        assert!((z - 0.7953336454431276).abs() < 1e-13, "{z}");
        assert!((solve_critical(&trivariate_system(), &d, None).unwrap().z - z).abs() < 1e-12);
    }

    #[test]
    fn origin_and_no_solution() {
        let d = tri([0.0, 0.5, 0.25]);
        assert_eq!(solve_critical(&trivariate_system(), &d, None).unwrap().z, 0.0);
        assert_eq!(z_formula_trivariate(&d).unwrap().z, 0.0);
        let d = tri([1.0, 0.0, 0.0]);
        assert!(matches!(solve_critical(&trivariate_system(), &d, None), Err(Error::NoSolution(_))));
        assert!(matches!(z_formula_trivariate(&d), Err(Error::Domain(_))));
    }

    #[test]
    fn planar_coalescing_point() {
        let d = pl(2.0 / 9.0, 1.0 / 9.0);
        let cf = z_formula_planar(&d).unwrap();
        assert!((cf.z - 0.5).abs() < 1e-12);
        assert!(cf.strictly_minimal);
        let cp = solve_critical(&planar_system(), &d, None).unwrap();
        assert!((cp.z - 0.5).abs() < 1e-12, "{}", cp.z);
        assert_eq!(z_formula_planar(&pl(0.0, 0.3)).unwrap().z, 0.0);
        assert!(matches!(z_formula_planar(&pl(0.4, 0.2)), Err(Error::Domain(_))));
    }

    #[test]
    fn period_two_factor_is_not_strict() {
        let s = FunctionSystem::from_polys(vec![RationalPoly::from_integers(&[1, 0, 1])], None).unwrap();
        let d = Direction::new(vec![0.5, 0.5], NormSpec::l1(2)).unwrap();
        let cp = solve_critical(&s, &d, None).unwrap();
        assert!((cp.z - 1.0).abs() < 1e-12);
        assert!(!cp.strictly_minimal);
        assert!(cp.minimality_margin.abs() < 1e-9);
    }

    #[test]
    fn directions_from_points() {
        let d = direction_of_z(&trivariate_system(), 1.0, &[1.0, 1.0], &trivariate_norm()).unwrap();
        for (a, b) in d.coords().iter().zip([7.0 / 25.0, 6.0 / 25.0, 6.0 / 25.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let d = direction_of_z(&planar_system(), 0.5, &[1.0, 1.0 / 9.0], &planar_norm()).unwrap();
        assert!((d.d0() - 2.0 / 9.0).abs() < 1e-15);
        let d = direction_of_z(&trivariate_system(), 0.0, &[1.0, 2.0], &trivariate_norm()).unwrap();
        assert_eq!(d.d0(), 0.0);
    }

    #[test]
    fn explicit_bracket() {
        let d = pl(0.1, 0.25);
        let auto = solve_critical(&planar_system(), &d, None).unwrap();
        let brk = solve_critical(&planar_system(), &d, Some((0.0, 1.0 / 3.0))).unwrap();
        assert!((auto.z - brk.z).abs() < 1e-13);
        assert!((auto.z - z_formula_planar(&d).unwrap().z).abs() < 1e-12);
    }
}
