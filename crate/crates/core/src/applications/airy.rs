//! The Airy function `Ai`, its derivative, and the map-Airy density
//! `2 e^{-2x^3/3} (x Ai(x^2) - Ai'(x^2))`.
//!
//! For `|x| <= 4.5` the Maclaurin series is summed directly. Beyond that,
//! positive arguments use the asymptotic expansion in `zeta = (2/3) x^{3/2}`
//! truncated at its smallest term (half of which is kept). Negative arguments
//! below `-4.5` are reached by Taylor steps of `y'' = x y` from `-4.5`, which
//! is stable on the oscillatory side.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

/// `Ai(0) = 1 / (3^{2/3} Gamma(2/3))`.
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0) = -1 / (3^{1/3} Gamma(1/3))`.
pub const AIP0: f64 = -0.258_819_403_792_806_8;

pub const SWITCH: f64 = 4.5;
pub const MIN_ARGUMENT: f64 = -10.0;

/// `(y(x0 + h), y'(x0 + h))` for the solution of `y'' = x y` with the given
/// data at `x0`, from its Taylor series about `x0`.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    if h == 0.0 {
        return (y, yp);
    }
    // c_{n+2} = (x0 c_n + c_{n-1}) / ((n+1)(n+2))
    let (mut cm1, mut c0, mut c1) = (0.0, y, yp);
    let mut hp = 1.0;
    let (mut sum, mut dsum) = (y, 0.0);
    let mut quiet = 0;
    for n in 1..400usize {
        // c1 is the coefficient of degree n.
        dsum += n as f64 * c1 * hp;
        hp *= h;
        let term = c1 * hp;
        sum += term;
        let scale = sum.abs().max(dsum.abs()).max(1e-300);
        if term.abs() < 1e-18 * scale && (n as f64 * term / h).abs() < 1e-18 * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        let next = (x0 * c0 + cm1) / ((n + 1) as f64 * (n as f64));
        // next is c_{n+1}: the recurrence with index n-1.
        cm1 = c0;
        c0 = c1;
        c1 = next;
    }
    (sum, dsum)
}

fn maclaurin(x: f64) -> (f64, f64) {
    taylor_step(0.0, AI0, AIP0, x)
}

/// `e^{zeta} Ai(x)` and `e^{zeta} Ai'(x)` for `x > 0` large, with
/// `zeta = (2/3) x^{3/2}`.
fn scaled_asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let su = truncated_sum(zeta, |_| 1.0);
    let sv = truncated_sum(zeta, |k| -(6.0 * k + 1.0) / (6.0 * k - 1.0));
    let q = x.powf(0.25);
    let base = 0.5 / PI.sqrt();
    (base * su / q, -base * q * sv)
}

/// `sum_k (-1)^k w(k) u_k zeta^{-k}`, stopped at the smallest term, half of
/// which is added. `w(0)` is taken as 1.
fn truncated_sum(zeta: f64, w: impl Fn(f64) -> f64) -> f64 {
    let mut u = 1.0;
    let mut sum: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let term = if k % 2 == 1 { -1.0 } else { 1.0 } * w(kf) * u / zeta.powi(k);
        if term.abs() >= last {
            break;
        }
        if term.abs() < 1e-17 * sum.abs() {
            sum += term;
            return sum;
        }
        let next_u = u * (6.0 * kf + 1.0) * (6.0 * kf + 3.0) * (6.0 * kf + 5.0) / ((2.0 * kf + 1.0) * 216.0 * (kf + 1.0));
        let next = w(kf + 1.0) * next_u / zeta.powi(k + 1);
        if next.abs() >= term.abs() {
            sum += 0.5 * term;
            return sum;
        }
        sum += term;
        last = term.abs();
    }
    sum
}

fn check(x: f64) -> Result<()> {
    if !x.is_finite() || x < MIN_ARGUMENT {
        return Err(Error::Domain(format!("Airy functions are implemented on [{MIN_ARGUMENT}, inf), got {x}")));
    }
    Ok(())
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair(x: f64) -> Result<(f64, f64)> {
    check(x)?;
    if x.abs() <= SWITCH {
        return Ok(maclaurin(x));
    }
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x.powf(1.5);
        let (a, ap) = scaled_asymptotic(x);
        let e = (-zeta).exp();
        return Ok((a * e, ap * e));
    }
    let (mut y, mut yp) = maclaurin(-SWITCH);
    let mut x0 = -SWITCH;
    let steps = ((x0 - x) / 0.25).ceil() as usize;
    let h = (x - x0) / steps as f64;
    for _ in 0..steps {
        (y, yp) = taylor_step(x0, y, yp, h);
        x0 += h;
    }
    Ok((y, yp))
}

pub fn airy_ai(x: f64) -> Result<f64> {
    airy_pair(x).map(|p| p.0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    airy_pair(x).map(|p| p.1)
}

/// Both branches at the switch point, for continuity checks:
/// `((Ai, Ai') from the series, (Ai, Ai') from the asymptotic expansion)`.
pub fn branch_values_at_switch() -> ((f64, f64), (f64, f64)) {
    let zeta = 2.0 / 3.0 * SWITCH.powf(1.5);
    let (a, ap) = scaled_asymptotic(SWITCH);
    let e = (-zeta).exp();
    (maclaurin(SWITCH), (a * e, ap * e))
}

/// Map-Airy density `2 e^{-2x^3/3} (x Ai(x^2) - Ai'(x^2))`.
///
/// For `x^2 > 4.5` the exponential factors are cancelled analytically. On the
/// left the two leading terms cancel as well, so the density is taken from
/// `Ai(y) = sqrt(y/3) K_{1/3}(zeta) / pi` and `Ai'(y) = -y K_{2/3}(zeta) / (pi sqrt 3)`:
///
/// ```text
/// A(x) = (4 y / (pi sqrt 3)) int_0^inf e^{-zeta (cosh u - 1)} sinh(u/2) sinh(u/6) du
/// ```
///
/// with `y = x^2`, `zeta = (2/3)|x|^3`. The integrand is positive, so the
/// `|x|^{-5/2}` tail comes out without cancellation.
pub fn map_airy_density(x: f64) -> f64 {
    let y = x * x;
    if y <= SWITCH {
        let (a, ap) = maclaurin(y);
        return 2.0 * (-2.0 * x * y / 3.0).exp() * (x * a - ap);
    }
    let zeta = 2.0 / 3.0 * x.abs() * y;
    if x > 0.0 {
        let (a, ap) = scaled_asymptotic(y);
        return 2.0 * (-2.0 * zeta).exp() * (x * a - ap);
    }
    // zeta (cosh u - 1) reaches 60 at u_max.
    let u_max = (1.0 + 60.0 / zeta).acosh();
    let f = |u: f64| Complex64::new((-zeta * 2.0 * (0.5 * u).sinh().powi(2)).exp() * (0.5 * u).sinh() * (u / 6.0).sinh(), 0.0);
    let q = quadrature::integrate(f, 0.0, u_max, &[], 0.0, 1e-14).expect("smooth integrand");
    4.0 * y / (PI * 3f64.sqrt()) * q.value.re
}

/// Tail mass `int_{-inf}^{a} A(x) dx` for `a <= -3`, from the leading
/// behaviour `A(x) ~ (1 / (4 sqrt pi)) |x|^{-5/2} (1 + ...)`, with the full
/// asymptotic series integrated term by term.
pub fn left_tail_mass(a: f64) -> f64 {
    assert!(a <= -3.0, "left tail expansion needs a <= -3");
    let b = a.abs();
    // A(x) = (b^{1/2} / sqrt pi) sum_{k>=1} s_k (3/2)^k b^{-3k},
    // s_k = (-1)^{k+1} 12k/(6k-1) u_k; integrate b^{1/2 - 3k} from b to inf.
    let mut u = 1.0;
    let mut sum = 0.0;
    for k in 1..12 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let s = if k % 2 == 1 { 1.0 } else { -1.0 } * 12.0 * kf / (6.0 * kf - 1.0) * u;
        let p = 3.0 * kf - 0.5;
        sum += s * 1.5f64.powi(k) * b.powf(1.0 - p) / (p - 1.0);
    }
    sum / PI.sqrt()
}
