mod common;

use common::{dyadic_observable, rational_poly, raw_terms};
use num_complex::Complex;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use toral_core::rng::SplitMix64;
use toral_core::{Dim, Freq, TorusPoint, TrigPoly};

fn random_point(rng: &mut SplitMix64) -> TorusPoint {
    TorusPoint::new2(rng.next_u64(), rng.next_u64())
}

#[test]
fn parseval_matches_sampled_mean_square() {
    let mut rng = SplitMix64::new(0xabc);
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = raw_terms(4, 6);
    for _ in 0..20 {
        let terms = strategy.new_tree(&mut runner).unwrap().current();
        let f = dyadic_observable(&terms);
        let exact = f.inner_product(&f).unwrap();
        assert!(exact.re >= 0.0 && exact.im.abs() < 1e-15);
        let m = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let v = f.evaluate_real(&random_point(&mut rng)).unwrap();
            s += v * v;
            s2 += v * v * v * v;
        }
        let mean = s / m as f64;
        let se = ((s2 / m as f64 - mean * mean) / m as f64).sqrt();
        assert!(
            (mean - exact.re).abs() <= 4.0 * se + 1e-12,
            "sampled {mean} vs exact {} (se {se})",
            exact.re
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pairing_bounded_by_anisotropic_and_smooth_norms(
        a in raw_terms(3, 5),
        b in raw_terms(3, 5),
    ) {
        let f = dyadic_observable(&a);
        let g = dyadic_observable(&b);
        let (p, q) = (1.0, 2.0);
        let pair = f.inner_product(&g).unwrap().norm_sqr().sqrt();
        let nf = f.pq_norm(p, q, 1e-9).unwrap();
        let bound = 2.0 * g.cr_norm_upper(q as u32) * (nf.value + nf.error_bound);
        prop_assert!(pair <= bound + 1e-12, "{} > {}", pair, bound);
    }

    #[test]
    fn anisotropic_norm_axioms(
        a in raw_terms(3, 5),
        b in raw_terms(3, 5),
        c in -4.0f64..4.0,
    ) {
        let tol = 1e-9;
        let f = dyadic_observable(&a);
        let g = dyadic_observable(&b);
        let nf = f.pq_norm(1.0, 2.0, tol).unwrap();
        let ng = g.pq_norm(1.0, 2.0, tol).unwrap();
        let ncf = f.scale(&c).pq_norm(1.0, 2.0, tol).unwrap();
        let slack = c.abs() * nf.error_bound + ncf.error_bound + tol;
        prop_assert!((ncf.value - c.abs() * nf.value).abs() <= slack);
        let nsum = f.add(&g).unwrap().pq_norm(1.0, 2.0, tol).unwrap();
        prop_assert!(nsum.value <= nf.value + nf.error_bound + ng.value + ng.error_bound + tol);
    }

    #[test]
    fn multiply_is_commutative_and_bilinear(
        a in raw_terms(3, 4),
        b in raw_terms(3, 4),
        c in raw_terms(3, 4),
        s in -5i64..=5,
    ) {
        let (f, g, h) = (rational_poly(&a), rational_poly(&b), rational_poly(&c));
        let s = common::ratio(s, 3);
        prop_assert_eq!(f.multiply(&g).unwrap(), g.multiply(&f).unwrap());
        let left = f.scale(&s).add(&h).unwrap().multiply(&g).unwrap();
        let right = f.multiply(&g).unwrap().scale(&s).add(&h.multiply(&g).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn product_evaluates_pointwise(
        a in raw_terms(4, 5),
        b in raw_terms(4, 5),
        x in any::<(u64, u64)>(),
    ) {
        let f = dyadic_observable(&a);
        let g = dyadic_observable(&b);
        let x = TorusPoint::new2(x.0, x.1);
        let fg = f.multiply(&g).unwrap().evaluate(&x).unwrap();
        let direct = f.evaluate(&x).unwrap() * g.evaluate(&x).unwrap();
        prop_assert!((fg - direct).norm_sqr().sqrt() < 1e-9);
    }
}

#[test]
fn complex_pairing_is_bilinear_not_sesquilinear() {
    let f = TrigPoly::from_terms(Dim::T2, [(Freq::new2(1, 2), Complex::new(0.0, 1.0))]);
    let g = TrigPoly::from_terms(Dim::T2, [(Freq::new2(-1, -2), Complex::new(0.0, 1.0))]);
    assert_eq!(f.inner_product(&g).unwrap(), Complex::new(-1.0, 0.0));
}
