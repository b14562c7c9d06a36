use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use mixedpowers::exact_series::{binomial, coeff_of_product, poly_mul, poly_pow};
use mixedpowers::function_system::{reduce_vanishing, Reduction};
use mixedpowers::{exact_coefficient, ExponentVector, Factor, FunctionSystem, RationalPoly, SystemDescriptor};

fn poly_strategy(max_valuation: usize) -> impl Strategy<Value = RationalPoly> {
    (0..=max_valuation, prop::collection::vec(-4i64..=4, 1..5), 1i64..=3).prop_map(|(v, mut body, lead)| {
        if body[0] == 0 {
            body[0] = 1;
        }
        body.push(lead);
        let mut c = vec![0i64; v];
        c.extend(body);
        RationalPoly::from_integers(&c)
    })
}

fn factors_strategy(max_valuation: usize) -> impl Strategy<Value = Vec<(RationalPoly, u64)>> {
    prop::collection::vec((poly_strategy(max_valuation), 0u64..8), 1..4)
}

fn naive(n0: u64, factors: &[(RationalPoly, u64)]) -> BigRational {
    let mut acc = RationalPoly::one();
    for (f, e) in factors {
        for _ in 0..*e {
            acc = poly_mul(&acc, f, None);
        }
    }
    acc.coeff(n0 as usize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_full_expansion(factors in factors_strategy(2), n0 in 0u64..30) {
        prop_assert_eq!(coeff_of_product(n0, &factors).value().clone(), naive(n0, &factors));
    }

    #[test]
    fn permutation_invariant(factors in factors_strategy(0), n0 in 0u64..25, rot in 0usize..4) {
        let mut shuffled = factors.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        prop_assert_eq!(coeff_of_product(n0, &factors).value().clone(), coeff_of_product(n0, &shuffled).value().clone());
    }

    #[test]
    fn high_degree_terms_are_irrelevant(factors in factors_strategy(0), n0 in 0u64..8, extra in prop::collection::vec(-5i64..=5, 1..4)) {
        let base = coeff_of_product(n0, &factors);
        let truncated: Vec<_> = factors.iter().map(|(f, e)| (f.truncate(n0 as usize), *e)).collect();
        prop_assert_eq!(base.value().clone(), coeff_of_product(n0, &truncated).value().clone());
        let mut bump = vec![0i64; n0 as usize + 1];
        bump[0] = 1;
        bump.extend(extra);
        let mut padded = factors.clone();
        padded.push((RationalPoly::from_integers(&bump), 1));
        prop_assert_eq!(base.value().clone(), coeff_of_product(n0, &padded).value().clone());
    }

    #[test]
    fn reduction_preserves_coefficient(factors in factors_strategy(2), n0 in 1u64..30) {
        let direct = coeff_of_product(n0, &factors);
        let system = FunctionSystem::new_unchecked(factors.iter().map(|(f, _)| Factor::polynomial(f.clone())).collect(), None).unwrap();
        let mut v = vec![n0];
        v.extend(factors.iter().map(|(_, e)| *e));
        let n = ExponentVector::new(v).unwrap();
        match reduce_vanishing(&system, &n) {
            Reduction::Vanishes { shifted_n0 } => {
                prop_assert!(shifted_n0 < 0);
                prop_assert!(direct.is_zero());
            }
            Reduction::Reduced { system, n: reduced, shift } => {
                prop_assert_eq!(reduced.n0() + shift, n0);
                prop_assert_eq!(exact_coefficient(&system, &reduced).unwrap().value().clone(), direct.value().clone());
            }
        }
    }

    #[test]
    fn vandermonde(a in 0u64..40, b in 0u64..40, n0 in 0u64..80) {
        let one_plus = RationalPoly::from_integers(&[1, 1]);
        let c = coeff_of_product(n0, &[(one_plus.clone(), a), (one_plus, b)]);
        prop_assert_eq!(c.value().clone(), binomial(a + b, n0 as i64).value().clone());
    }

    #[test]
    fn power_truncation_agrees(f in poly_strategy(1), e in 0u64..7, cut in 0usize..12) {
        let full = poly_pow(&f, e, 64);
        let cut_pow = poly_pow(&f, e, cut);
        for i in 0..=cut {
            prop_assert_eq!(full.coeff(i), cut_pow.coeff(i));
        }
        prop_assert!(cut_pow.degree().map_or(true, |d| d <= cut));
    }

    #[test]
    fn poly_strings_round_trip(coeffs in prop::collection::vec((-50i64..50, 1i64..9), 1..6)) {
        let poly = RationalPoly::new(coeffs.iter().map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q))).collect());
        let back = RationalPoly::from_strings(&poly.to_strings()).unwrap();
        prop_assert_eq!(back, poly);
    }

    #[test]
    fn log_abs_is_consistent(factors in factors_strategy(0), n0 in 0u64..30) {
        let c = coeff_of_product(n0, &factors);
        if let (Some(l), Some(x)) = (c.log_abs_f64(), c.to_f64()) {
            if x.is_finite() && x != 0.0 {
                prop_assert!((l - x.abs().ln()).abs() <= 1e-12 * l.abs().max(1.0));
            }
        }
    }
}

#[test]
fn descriptor_round_trip() {
    let text = r#"{"factors": [["1", "1"], ["1", "2"]], "amplitude": ["1/2", "-3"], "norm": {"kind": "wl1", "weights": [1, 1, 2]}}"#;
    let d = SystemDescriptor::from_json(text).unwrap();
    let back = SystemDescriptor::from_json(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back, d);
    assert_eq!(d.build().unwrap().m(), 2);
}

#[test]
fn three_four_two_is_44() {
    let system = FunctionSystem::from_polys(
        vec![RationalPoly::from_integers(&[1, 1]), RationalPoly::from_integers(&[1, 2])],
        None,
    )
    .unwrap();
    let n = ExponentVector::new(vec![3, 4, 2]).unwrap();
    assert_eq!(exact_coefficient(&system, &n).unwrap().to_f64(), Some(44.0));
}
