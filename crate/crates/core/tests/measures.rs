mod common;

use common::{ds, BUDGET};
use fracframe::measures::*;
use fracframe::rational::{rat, Rational, RationalPoint};
use num_traits::One;
use proptest::prelude::*;

fn p1(n: i64, d: i64) -> RationalPoint {
    RationalPoint(vec![rat(n, d)])
}

fn small_measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec(((-20i64..20, 1i64..9), 1i64..6), 1..6).prop_map(|v| {
        AtomicMeasure::from_atoms(1, v.into_iter().map(|((a, b), w)| (p1(a, b), rat(w, 7))))
            .unwrap()
    })
}

fn digit_system() -> impl Strategy<Value = DigitSystem> {
    (2i64..7, prop::collection::btree_set(-3i64..8, 1..4))
        .prop_map(|(n, d)| DigitSystem::scalar(n, &d.into_iter().collect::<Vec<_>>()).unwrap())
}

#[test]
fn sixteen_adic_decomposition_up_to_level_six() {
    for n in 1..=6 {
        let lhs = convolve(
            &level_measure(&ds(16, &[0, 1]), n, BUDGET).unwrap(),
            &level_measure(&ds(16, &[0, 4]), n, BUDGET).unwrap(),
            BUDGET,
        )
        .unwrap();
        assert_eq!(
            lhs,
            level_measure(&ds(4, &[0, 1]), 2 * n, BUDGET).unwrap(),
            "level {n}"
        );
    }
}

#[test]
fn two_dimensional_level_measure() {
    let d = DigitSystem::new(
        vec![vec![2, 0], vec![0, 3]],
        vec![vec![0, 0], vec![1, 0], vec![0, 1]],
    )
    .unwrap();
    let m = level_measure(&d, 2, BUDGET).unwrap();
    assert_eq!(m.len(), 9);
    assert_eq!(
        m.weight_at(&RationalPoint(vec![rat(1, 2), rat(1, 9)])),
        rat(1, 9)
    );
}

#[test]
fn env_budget_is_read() {
    std::env::set_var(ATOM_BUDGET_ENV, "128");
    let b = AtomBudget::from_env();
    std::env::remove_var(ATOM_BUDGET_ENV);
    assert_eq!(b, AtomBudget(128));
    assert!(level_measure(&ds(4, &[0, 1]), 8, b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(a in small_measure(), b in small_measure()) {
        prop_assert_eq!(convolve(&a, &b, BUDGET).unwrap(), convolve(&b, &a, BUDGET).unwrap());
    }

    #[test]
    fn convolution_associates(a in small_measure(), b in small_measure(), c in small_measure()) {
        let l = convolve(&convolve(&a, &b, BUDGET).unwrap(), &c, BUDGET).unwrap();
        let r = convolve(&a, &convolve(&b, &c, BUDGET).unwrap(), BUDGET).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn convolution_multiplies_mass(a in small_measure(), b in small_measure()) {
        let c = convolve(&a, &b, BUDGET).unwrap();
        prop_assert_eq!(c.total(), &(a.total() * b.total()));
    }

    #[test]
    fn dirac_is_convolution_identity(a in small_measure(), s in -5i64..5) {
        let d = AtomicMeasure::dirac(p1(s, 3));
        prop_assert_eq!(convolve(&a, &d, BUDGET).unwrap(), translate(&a, &p1(s, 3)).unwrap());
    }

    #[test]
    fn level_recursion(d in digit_system(), n in 1usize..4) {
        // mu_{n+1} = mu_n * (uniform on R^{-(n+1)} B)
        let next = level_measure(&d, n + 1, BUDGET).unwrap();
        let scale = Rational::one() / Rational::from_integer(d.matrix[0][0].into()).pow((n + 1) as i32);
        let layer: Vec<RationalPoint> = d.digits.iter().map(|b| RationalPoint(vec![&scale * Rational::from_integer(b[0].into())])).collect();
        let rebuilt = convolve(&level_measure(&d, n, BUDGET).unwrap(), &AtomicMeasure::uniform(1, &layer).unwrap(), BUDGET).unwrap();
        prop_assert_eq!(next, rebuilt);
    }

    #[test]
    fn tail_radius_covers_deeper_levels(d in digit_system(), n in 1usize..4) {
        let r = tail_radius(&d, n).unwrap();
        let coarse = attractor_points(&d, n, BUDGET).unwrap().points;
        for p in attractor_points(&d, n + 2, BUDGET).unwrap().points {
            let best = coarse.iter().map(|q| p.sub(q).norm_f64()).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= r * (1.0 + 1e-12));
        }
    }

    #[test]
    fn translation_keeps_mass_and_shape(a in small_measure(), s in -9i64..9) {
        let t = translate(&a, &p1(s, 5)).unwrap();
        prop_assert_eq!(t.total(), a.total());
        prop_assert_eq!(translate(&t, &p1(-s, 5)).unwrap(), a);
    }

    #[test]
    fn json_roundtrip(a in small_measure()) {
        prop_assert_eq!(AtomicMeasure::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn addition_adds_mass(a in small_measure(), b in small_measure()) {
        let s = add(&a, &b).unwrap();
        prop_assert_eq!(s.total(), &(a.total() + b.total()));
    }
}
