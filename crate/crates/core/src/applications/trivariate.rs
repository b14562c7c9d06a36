//! Coefficients `c(n, k, t) = [x^n y^k z^t] C(x, y, z)`, which equal
//! `[z^t] (1+z)^{k-2n} (1+2z)^n`, and their asymptotics.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{trivariate_norm, trivariate_system};
use crate::critical_locus::z_formula_trivariate;
use crate::error::{Error, Result};
use crate::exact_series::{binomial_int, coeff_of_product, BigCoefficient, RationalPoly};
use crate::function_system::{direction_of, ExponentVector};
use crate::precision::{HighPrecisionReal, Precision};
use crate::saddle_engine::{
    estimate_with, AsymptoticEstimate, Diagnostics, Method, MethodChoice, Regime, SaddleSetup,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrivariateQuery {
    pub n: u64,
    pub k: u64,
    pub t: u64,
}

impl TrivariateQuery {
    pub fn new(n: u64, k: u64, t: u64) -> Result<Self> {
        if n.checked_mul(2).is_none_or(|m| m > k) {
            return Err(Error::InvalidInput(format!("2n <= k is required, got n = {n}, k = {k}")));
        }
        Ok(TrivariateQuery { n, k, t })
    }

    /// `(t, k - 2n, n)`.
    pub fn exponents(&self) -> ExponentVector {
        ExponentVector::new(vec![self.t, self.k - 2 * self.n, self.n]).expect("nonempty")
    }
}

/// `sum_{i=0}^{n} (-1)^i C(n, i) C(k - 2i, t - 2i)`.
pub fn inclusion_exclusion(q: &TrivariateQuery) -> BigInt {
    let mut acc = BigInt::zero();
    for i in 0..=q.n {
        let term = binomial_int(q.n, i as i64) * binomial_int(q.k - 2 * i, q.t as i64 - 2 * i as i64);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `[z^t] (1+z)^{k-2n} (1+2z)^n` by series arithmetic.
pub fn generating_function_coefficient(q: &TrivariateQuery) -> BigCoefficient {
    coeff_of_product(
        q.t,
        &[
            (RationalPoly::from_integers(&[1, 1]), q.k - 2 * q.n),
            (RationalPoly::from_integers(&[1, 2]), q.n),
        ],
    )
}

/// Exact `c(n, k, t)`, computed both ways; a mismatch is reported as an
/// internal inconsistency.
pub fn trivariate_exact(q: &TrivariateQuery) -> Result<BigCoefficient> {
    let ie = inclusion_exclusion(q);
    let gf = generating_function_coefficient(q);
    if gf.value() != &BigRational::from_integer(ie.clone()) {
        return Err(Error::InternalInconsistency(format!(
            "c({}, {}, {}): inclusion-exclusion gives {ie}, series gives {gf}",
            q.n, q.k, q.t
        )));
    }
    Ok(gf)
}

/// Rejects directions outside the domain where the critical point exists,
/// which here is `t < k - n` (or `t = 0`).
fn check_domain(q: &TrivariateQuery) -> Result<()> {
    if q.t > 0 && q.t >= q.k - q.n {
        return Err(Error::Domain(format!(
            "(n, k, t) = ({}, {}, {}) needs t < k - n for a critical point",
            q.n, q.k, q.t
        )));
    }
    Ok(())
}

/// `Z = 2t / (k - 3t + sqrt((k - 3t)^2 + 8t(k - n - t)))`.
pub fn critical_z(q: &TrivariateQuery) -> Result<f64> {
    check_domain(q)?;
    let d = direction_of(&q.exponents(), &trivariate_norm())?;
    Ok(z_formula_trivariate(&d)?.z)
}

/// Saddle-point estimate of `c(n, k, t)`, using the closed-form `Z`.
pub fn trivariate_estimate(q: &TrivariateQuery, method: MethodChoice, precision: Precision) -> Result<AsymptoticEstimate> {
    check_domain(q)?;
    let system = trivariate_system();
    let n = q.exponents();
    let mut setup = SaddleSetup::new(&system, &n, &trivariate_norm(), precision)?;
    let z = critical_z(q)?;
    if (z - setup.critical.z).abs() > 1e-9 * z.max(1.0) {
        return Err(Error::InternalInconsistency(format!(
            "closed-form Z = {z} disagrees with the solver ({})",
            setup.critical.z
        )));
    }
    setup.critical.z = z;
    estimate_with(&setup, method, None)
}

fn formula_estimate(log_abs: f64, regime: Regime, method: Method, z: f64, nz: f64, precision: Precision) -> AsymptoticEstimate {
    AsymptoticEstimate {
        sign: 1,
        log_abs: Some(HighPrecisionReal::from_f64(log_abs, precision)),
        regime,
        method,
        diagnostics: Diagnostics { z, nz_product: nz, ..Default::default() },
    }
}

fn norm_of(q: &TrivariateQuery) -> f64 {
    q.exponents().norm(&trivariate_norm())
}

/// Large-exponent closed form
/// `Z^{-(t+1/2)} (1+Z)^{k-2n} (1+2Z)^n / sqrt(2 pi) * ((k-2n)/(1+Z)^2 + 2n/(1+2Z)^2)^{-1/2}`.
pub fn gaussian_formula(q: &TrivariateQuery, precision: Precision) -> Result<AsymptoticEstimate> {
    let z = critical_z(q)?;
    if z == 0.0 {
        return Err(Error::Regime("the Gaussian formula needs t > 0".into()));
    }
    let (t, a, n) = (q.t as f64, (q.k - 2 * q.n) as f64, q.n as f64);
    let curvature = a / (1.0 + z).powi(2) + 2.0 * n / (1.0 + 2.0 * z).powi(2);
    let log = -(t + 0.5) * z.ln() + a * z.ln_1p() + n * (2.0 * z).ln_1p()
        - 0.5 * (2.0 * PI).ln()
        - 0.5 * curvature.ln();
    Ok(formula_estimate(log, Regime::LargeExponent, Method::Gaussian, z, norm_of(q) * z, precision))
}

/// Bounded-`t` limit `k^t / t!`.
pub fn bounded_t_formula(q: &TrivariateQuery, precision: Precision) -> Result<AsymptoticEstimate> {
    check_domain(q)?;
    let ln_fact: f64 = (2..=q.t).map(|i| (i as f64).ln()).sum();
    let log = if q.t == 0 { 0.0 } else { q.t as f64 * (q.k as f64).ln() - ln_fact };
    let z = critical_z(q)?;
    Ok(formula_estimate(log, Regime::SmallExponent, Method::SmallLimit, z, norm_of(q) * z, precision))
}

/// Growing-`t` limit `Z^{-t} (1+Z)^{k-2n} (1+2Z)^n / sqrt(2 pi t)`.
pub fn growing_t_formula(q: &TrivariateQuery, precision: Precision) -> Result<AsymptoticEstimate> {
    let z = critical_z(q)?;
    if q.t == 0 {
        return Err(Error::Regime("the growing-t formula needs t > 0".into()));
    }
    let (t, a, n) = (q.t as f64, (q.k - 2 * q.n) as f64, q.n as f64);
    let log = -t * z.ln() + a * z.ln_1p() + n * (2.0 * z).ln_1p() - 0.5 * (2.0 * PI * t).ln();
    Ok(formula_estimate(log, Regime::LargeExponent, Method::Gaussian, z, norm_of(q) * z, precision))
}

/// Exact `c(n, k, t)` for `2n > k` is zero by definition.
pub fn coefficient_or_zero(n: u64, k: u64, t: u64) -> Result<BigCoefficient> {
    match TrivariateQuery::new(n, k, t) {
        Ok(q) => trivariate_exact(&q),
        Err(_) => Ok(BigCoefficient::new(BigRational::zero())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_series::binomial;

    fn q(n: u64, k: u64, t: u64) -> TrivariateQuery {
        TrivariateQuery::new(n, k, t).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(trivariate_exact(&q(1, 4, 2)).unwrap().to_f64(), Some(5.0));
        for (n, k) in [(0, 0), (3, 10), (5, 10)] {
            assert_eq!(trivariate_exact(&q(n, k, 0)).unwrap().to_f64(), Some(1.0));
        }
        assert_eq!(trivariate_exact(&q(10, 1000, 2)).unwrap().to_f64(), Some(499_490.0));
        assert!(TrivariateQuery::new(3, 5, 1).is_err());
        assert!(coefficient_or_zero(3, 5, 1).unwrap().is_zero());
    }

    #[test]
    fn closed_form_z() {
        let z = critical_z(&q(0, 100, 50)).unwrap();
        assert!((z - 1.0).abs() < 1e-12);
        assert!(matches!(critical_z(&q(2, 10, 8)), Err(Error::Domain(_))));
    }

    #[test]
    fn estimates() {
        let p = Precision::default();
        let e = trivariate_estimate(&q(0, 100, 50), MethodChoice::Gaussian, p).unwrap();
        let err = e.rel_error(&binomial(100, 50)).unwrap();
        assert!((err - 0.0025).abs() < 5e-4, "{err}");
        let c = gaussian_formula(&q(0, 100, 50), p).unwrap();
        assert!((c.log_abs_f64().unwrap() - e.log_abs_f64().unwrap()).abs() < 1e-10);

        let exact = trivariate_exact(&q(10, 1000, 2)).unwrap();
        let e = trivariate_estimate(&q(10, 1000, 2), MethodChoice::SmallLimit, p).unwrap();
        assert!((e.to_f64() - 500_000.0).abs() < 1e-6);
        let c = bounded_t_formula(&q(10, 1000, 2), p).unwrap();
        assert!((c.to_f64() - 500_000.0).abs() < 1e-6);
        assert!((c.rel_error(&exact).unwrap() - 0.00102).abs() < 2e-5);

        let e = trivariate_estimate(&q(1, 4, 2), MethodChoice::Auto, p).unwrap();
        assert!((e.to_f64() - 5.0).abs() < 5e-8);
    }

    #[test]
    fn general_gaussian_matches_closed_form() {
        let p = Precision::default();
        for (n, k, t) in [(100, 1000, 300), (30, 400, 50), (200, 900, 150)] {
            let a = trivariate_estimate(&q(n, k, t), MethodChoice::Gaussian, p).unwrap();
            let b = gaussian_formula(&q(n, k, t), p).unwrap();
            assert!((a.log_abs_f64().unwrap() - b.log_abs_f64().unwrap()).abs() < 1e-9, "{n} {k} {t}");
        }
    }
}
