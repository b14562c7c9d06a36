use num_rational::BigRational;

use mixedpowers::applications::planar::{
    coalescence_diagnostic, decomposition, direct_expansion, planar_core_gaussian, PlanarCoreQuery,
};
use mixedpowers::applications::trivariate::{
    generating_function_coefficient, inclusion_exclusion, trivariate_estimate, TrivariateQuery,
};
use mixedpowers::applications::{trivariate_norm, trivariate_system};
use mixedpowers::function_system::direction_of;
use mixedpowers::saddle_engine::{choose_epsilon, integral_large, integral_small};
use mixedpowers::{exact_coefficient, Error, MethodChoice, Precision};

fn p() -> Precision {
    Precision::default()
}

#[test]
fn planar_routes_agree() {
    for n in 1..=25u64 {
        for k in 1..=n {
            let q = PlanarCoreQuery::new(n, k).unwrap();
            assert_eq!(decomposition(&q).value(), direct_expansion(&q).value(), "({n},{k})");
        }
    }
}

#[test]
fn trivariate_routes_agree_beyond_acceptance_grid() {
    for n in 9..=12u64 {
        for k in (2 * n..=40).step_by(3) {
            for t in (0..=k).step_by(4) {
                let q = TrivariateQuery::new(n, k, t).unwrap();
                let ie = BigRational::from_integer(inclusion_exclusion(&q));
                assert_eq!(generating_function_coefficient(&q).value(), &ie);
                assert_eq!(exact_coefficient(&trivariate_system(), &q.exponents()).unwrap().value(), &ie);
            }
        }
    }
}

#[test]
fn small_exponent_identity_is_exact_on_bounded_t() {
    let q = TrivariateQuery::new(10, 1000, 2).unwrap();
    let n = q.exponents();
    let e = integral_small(&trivariate_system(), &n, &trivariate_norm(), p()).unwrap();
    assert!((e.to_f64() - 499_490.0).abs() < 499_490.0 * 1e-8, "{}", e.to_f64());
    let limit = trivariate_estimate(&q, MethodChoice::SmallLimit, p()).unwrap();
    assert_eq!(limit.to_f64().round(), 500_000.0);
}

#[test]
fn contour_split_recovers_full_circle() {
    let system = trivariate_system();
    for (n, k, t) in [(3, 40, 10), (8, 90, 30), (15, 120, 50)] {
        let q = TrivariateQuery::new(n, k, t).unwrap();
        let v = q.exponents();
        let eps = choose_epsilon(&system, &direction_of(&v, &trivariate_norm()).unwrap()).unwrap();
        let full = integral_small(&system, &v, &trivariate_norm(), p()).unwrap();
        let arc = integral_large(&system, &v, &trivariate_norm(), eps, p()).unwrap();
        let tail = arc.diagnostics.tail_bound.unwrap();
        let gap = (arc.to_f64() / full.to_f64() - 1.0).abs();
        assert!((gap - tail).abs() < 1e-6, "({n},{k},{t}): gap {gap:e}, tail {tail:e}");
    }
}

#[test]
fn planar_gaussian_off_window() {
    let q = PlanarCoreQuery::new(300, 30).unwrap();
    let d = coalescence_diagnostic(&q, p()).unwrap();
    assert!(d.c2 > 1e-3);
    let exact = mixedpowers::applications::planar::planar_core_exact(&q).unwrap();
    let g = planar_core_gaussian(&q, p()).unwrap();
    let r = g.rel_error(&exact).unwrap();
    assert!(r < 0.02, "per-term Gaussian relative error {r}");
}

#[test]
fn planar_gaussian_refused_in_window() {
    let q = PlanarCoreQuery::new(300, 100).unwrap();
    assert!(matches!(planar_core_gaussian(&q, p()), Err(Error::Coalescence { .. })));
}
