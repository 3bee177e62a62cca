mod common;

use common::default_gens;
use proptest::prelude::*;
use toral_core::lattice::in_pinched_cone;
use toral_core::rng::SplitMix64;
use toral_core::{
    apply_map, classify_conjugate_product, compose_word, hyperbolicity_constants, ConjugacyClass,
    IntMatrix, MapWord, TorusPoint,
};

fn word(symbols: &[u8]) -> MapWord {
    MapWord::from_slice(symbols).unwrap()
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn mul_t(m: &IntMatrix, v: [f64; 2]) -> [f64; 2] {
    m.transpose().mul_f64(v)
}

proptest! {
    #[test]
    fn concatenation_composes_in_order(
        u in prop::collection::vec(0u8..2, 0..=10),
        v in prop::collection::vec(0u8..2, 0..=10),
    ) {
        let g = default_gens();
        let joined = compose_word(&word(&u).concat(&word(&v)), &g).unwrap();
        let mu = compose_word(&word(&u), &g).unwrap();
        let mv = compose_word(&word(&v), &g).unwrap();
        prop_assert_eq!(joined, mv.checked_mul(&mu).unwrap());
    }

    #[test]
    fn compositions_have_unit_determinant(w in prop::collection::vec(0u8..2, 0..=20)) {
        let m = compose_word(&word(&w), &default_gens()).unwrap();
        prop_assert_eq!(m.det(), 1);
    }
}

#[test]
fn composed_map_matches_stepwise_application() {
    let g = default_gens();
    let mut rng = SplitMix64::new(0x5eed_0001);
    for _ in 0..10_000 {
        let len = (rng.next_u64() % 21) as usize;
        let w = MapWord::from_bits(rng.next_u64(), len);
        let x0 = TorusPoint::new2(rng.next_u64(), rng.next_u64());
        let mut x = x0;
        for &s in w.symbols() {
            x = apply_map(g.get(s), &x);
        }
        let m = compose_word(&w, &g).unwrap();
        assert_eq!(apply_map(&m, &x0), x, "word {:?}", w.symbols());
    }
}

#[test]
fn adjugate_undoes_each_generator() {
    let g = default_gens();
    let mut rng = SplitMix64::new(0x5eed_0002);
    for _ in 0..1_000_000 {
        let x = TorusPoint::new2(rng.next_u64(), rng.next_u64());
        let s = (rng.next_u64() & 1) as u8;
        let m = g.get(s);
        assert_eq!(apply_map(&m.adjugate(), &apply_map(m, &x)), x);
    }
}

#[test]
fn expansion_bounds_hold_on_sampled_unstable_vectors() {
    let g = default_gens();
    let c = hyperbolicity_constants(&g);
    assert!(1.0 < c.lambda && c.lambda <= c.big_lambda && c.c0 >= 1.0 && c.beta > 1.0);
    let mut rng = SplitMix64::new(0x5eed_0003);
    for _ in 0..10_000 {
        let theta = rng.next_f64() * core::f64::consts::FRAC_PI_2;
        let v = [theta.cos(), theta.sin()];
        for m in g.maps() {
            for image in [mul_t(m, v), m.mul_f64(v)] {
                let r = norm(image) / norm(v);
                assert!(
                    r >= c.lambda - 1e-12 && r <= c.big_lambda + 1e-12,
                    "ratio {r} at {theta}"
                );
            }
        }
    }
}

#[test]
fn inverses_pinch_the_stable_cone() {
    let g = default_gens();
    let c = hyperbolicity_constants(&g);
    let mut rng = SplitMix64::new(0x5eed_0004);
    for _ in 0..10_000 {
        let theta = core::f64::consts::FRAC_PI_2 * (1.0 + rng.next_f64());
        let v = [theta.cos(), theta.sin()];
        for m in g.maps() {
            let w = m.adjugate().mul_f64(v);
            assert!(
                in_pinched_cone(w, c.beta, 1e-12),
                "{w:?} outside C_beta at {theta}"
            );
        }
    }
}

#[test]
fn cone_constants_of_the_default_pair() {
    // Closed-form candidates: boundary rays and in-sector eigenvectors of B^T B.
    let c = hyperbolicity_constants(&default_gens());
    assert!((c.lambda - 2f64.sqrt()).abs() < 1e-12);
    let big = ((15.0 + 221f64.sqrt()) / 2.0).sqrt();
    assert!((c.big_lambda - big).abs() < 1e-12);
}

#[test]
fn default_pair_product_is_parabolic() {
    let (b, class) = classify_conjugate_product(&default_gens());
    assert_eq!(class, ConjugacyClass::Parabolic);
    assert_eq!(b.trace(), 2);
}
