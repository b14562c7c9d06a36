//! Core coefficients `[z^{n-1}] phi^n psi^{k-1} psi'` of random planar maps,
//! with `phi = (1+z)^3` and `psi = z(1-z)`.
//!
//! After removing `z^{k-1}` from `psi^{k-1}` the coefficient is
//! `[z^{n_0}] (1+z)^{n_1} (1-z)^{n_2} (1-2z)` with `(n_0, n_1, n_2) =
//! (n-k, 3n, k-1)`, i.e. the two-term combination
//! `[z^{n_0}](...) - 2 [z^{n_0-1}](...)`.

use serde::Serialize;

use super::{planar_norm, planar_system};
use crate::critical_locus::z_formula_planar;
use crate::error::{Error, Result};
use crate::exact_series::{coeff_of_product, poly_mul, poly_pow, BigCoefficient, RationalPoly};
use crate::function_system::{direction_of, ExponentVector, FunctionSystem};
use crate::phase_term::taylor_F_at;
use crate::precision::{HighPrecisionReal, Precision};
use crate::saddle_engine::{estimate_with, gaussian_leading, AsymptoticEstimate, Method, MethodChoice, SaddleSetup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PlanarCoreQuery {
    pub n: u64,
    pub k: u64,
}

impl PlanarCoreQuery {
    /// Every integer pair with `1 <= k <= n` satisfies the domain inequality
    /// `2(n-k)/3n <= (1 - sqrt((k-1)/3n))^2`, so the domain is exactly that
    /// range.
    pub fn new(n: u64, k: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Domain(format!("1 <= k <= n is required, got n = {n}, k = {k}")));
        }
        Ok(PlanarCoreQuery { n, k })
    }

    /// `(n - k, 3n, k - 1)`.
    pub fn exponents(&self) -> ExponentVector {
        ExponentVector::new(vec![self.n - self.k, 3 * self.n, self.k - 1]).expect("nonempty")
    }

    /// `(k - n/3) / n^{2/3}`.
    pub fn window_coord(&self) -> f64 {
        let n = self.n as f64;
        (self.k as f64 - n / 3.0) / n.powf(2.0 / 3.0)
    }
}

fn one_plus_z() -> RationalPoly {
    RationalPoly::from_integers(&[1, 1])
}

fn one_minus_z() -> RationalPoly {
    RationalPoly::from_integers(&[1, -1])
}

fn psi_prime() -> RationalPoly {
    RationalPoly::from_integers(&[1, -2])
}

/// `[z^{n_0}](1+z)^{3n}(1-z)^{k-1} - 2 [z^{n_0-1}](1+z)^{3n}(1-z)^{k-1}`.
pub fn decomposition(q: &PlanarCoreQuery) -> BigCoefficient {
    let factors = [(one_plus_z(), 3 * q.n), (one_minus_z(), q.k - 1)];
    let n0 = q.n - q.k;
    let first = coeff_of_product(n0, &factors);
    if n0 == 0 {
        return first;
    }
    let second = coeff_of_product(n0 - 1, &factors);
    BigCoefficient::new(first.value() - second.value() * num_rational::BigRational::from_integer(2.into()))
}

/// `[z^{n-1}] phi^n (psi^{k-1} psi')`, expanding `psi^{k-1} psi'` and removing
/// its `z^{k-1}` factor.
pub fn direct_expansion(q: &PlanarCoreQuery) -> BigCoefficient {
    let psi = RationalPoly::from_integers(&[0, 1, -1]);
    let tail = poly_mul(&poly_pow(&psi, q.k - 1, 2 * (q.k as usize - 1)), &psi_prime(), None);
    let v = tail.valuation().expect("nonzero polynomial");
    debug_assert_eq!(v as u64, q.k - 1);
    let reduced = tail.shift_down(v);
    let phi = RationalPoly::from_integers(&[1, 3, 3, 1]);
    coeff_of_product(q.n - 1 - v as u64, &[(phi, q.n), (reduced, 1)])
}

/// The exact core coefficient, computed both ways.
pub fn planar_core_exact(q: &PlanarCoreQuery) -> Result<BigCoefficient> {
    let a = decomposition(q);
    let b = direct_expansion(q);
    if a.value() != b.value() {
        return Err(Error::InternalInconsistency(format!(
            "planar core ({}, {}): decomposition gives {a}, direct expansion gives {b}",
            q.n, q.k
        )));
    }
    Ok(a)
}

/// `(1+z, 1-z)` with amplitude `1 - 2z`; integrating its kernel over a
/// circle combines both decomposition terms on that common contour.
pub fn planar_system_with_amplitude() -> FunctionSystem {
    planar_system().with_amplitude(Some(psi_prime()))
}

fn check_domain(q: &PlanarCoreQuery) -> Result<f64> {
    let d = direction_of(&q.exponents(), &planar_norm())?;
    Ok(z_formula_planar(&d)?.z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoalescenceDiagnostic {
    /// `F''(0; d) / 2` at the query direction.
    pub c2: f64,
    pub window_coord: f64,
}

pub fn coalescence_diagnostic(q: &PlanarCoreQuery, precision: Precision) -> Result<CoalescenceDiagnostic> {
    let system = planar_system();
    let setup = SaddleSetup::new(&system, &q.exponents(), &planar_norm(), precision)?;
    let c2 = if setup.z() == 0.0 {
        0.0
    } else {
        taylor_F_at(&system, &setup.direction, setup.critical.clone(), 2, precision)?.c(2).re
    };
    Ok(CoalescenceDiagnostic { c2, window_coord: q.window_coord() })
}

/// Quadrature estimate of the core coefficient on `|z| = Z(n/|n|)`. The
/// returned diagnostics carry `c_2` for the coalescence check.
pub fn planar_core_estimate(q: &PlanarCoreQuery, precision: Precision) -> Result<AsymptoticEstimate> {
    check_domain(q)?;
    let system = planar_system_with_amplitude();
    let setup = SaddleSetup::new(&system, &q.exponents(), &planar_norm(), precision)?;
    let mut e = estimate_with(&setup, MethodChoice::Quadrature, None)?;
    if e.diagnostics.c2.is_none() {
        e.diagnostics.c2 = Some(coalescence_diagnostic(q, precision)?.c2);
    }
    Ok(e)
}

/// Leading Gaussian terms of both decomposition terms, each with its own
/// `n_0` and saddle, combined as `T_1 - 2 T_2`.
pub fn planar_core_gaussian(q: &PlanarCoreQuery, precision: Precision) -> Result<AsymptoticEstimate> {
    check_domain(q)?;
    let system = planar_system();
    let n = q.exponents();
    let first = gaussian_leading(&system, &n, &planar_norm(), precision)?;
    if q.n == q.k {
        return Ok(first);
    }
    let mut shifted = n.as_slice().to_vec();
    shifted[0] -= 1;
    let second = gaussian_leading(&system, &ExponentVector::new(shifted)?, &planar_norm(), precision)?;
    let (l1, l2) = (first.log_abs.clone().expect("nonzero"), second.log_abs.clone().expect("nonzero"));
    // T_1 - 2 T_2 = T_1 (1 - 2 e^{l_2 - l_1})
    let r = 1.0 - 2.0 * l2.sub(&l1).to_f64().exp();
    let mut out = first;
    out.method = Method::Gaussian;
    if r == 0.0 {
        out.sign = 0;
        out.log_abs = None;
    } else {
        out.sign = if r > 0.0 { out.sign } else { -out.sign };
        out.log_abs = Some(l1.add(&HighPrecisionReal::from_f64(r.abs().ln(), precision)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, k: u64) -> PlanarCoreQuery {
        PlanarCoreQuery::new(n, k).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(planar_core_exact(&q(3, 2)).unwrap().to_f64(), Some(6.0));
        assert_eq!(planar_core_exact(&q(1, 1)).unwrap().to_f64(), Some(1.0));
        let big = planar_core_exact(&q(30, 10)).unwrap();
        assert!(big.log_abs_f64().unwrap() > 40.0);
        assert!(PlanarCoreQuery::new(3, 0).is_err());
        assert!(PlanarCoreQuery::new(3, 4).is_err());
    }

    #[test]
    fn window_coordinate() {
        assert_eq!(q(300, 100).window_coord(), 0.0);
        let w = q(1000, 433).window_coord();
        assert!((w - (433.0 - 1000.0 / 3.0) / 100.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_in_window() {
        let p = Precision::default();
        let qq = q(90, 30);
        let exact = planar_core_exact(&qq).unwrap();
        let e = planar_core_estimate(&qq, p).unwrap();
        assert!(e.rel_error(&exact).unwrap() < 1e-6);
        assert!(e.diagnostics.c2.is_some());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(PlanarCoreQuery::new(30, 31), Err(Error::Domain(_))));
        assert!(matches!(PlanarCoreQuery::new(30, 0), Err(Error::Domain(_))));
        for n in 1..80u64 {
            for k in 1..=n {
                check_domain(&q(n, k)).unwrap();
            }
        }
    }

    #[test]
    fn diagnostic_off_window() {
        let d = coalescence_diagnostic(&q(300, 30), Precision::default()).unwrap();
        assert!(d.c2 > 1e-3);
    }
}
