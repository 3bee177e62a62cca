mod common;

use common::{coboundary_anchor, default_gens, exact, raw_terms, real_zero_mean};
use proptest::prelude::*;
use toral_core::rigidity::{
    coboundary_obstruction, fixed_points, orbit_sums, RationalPoint, SearchBudget, Verdict,
};
use toral_core::variance::annealed_variance;
use toral_core::{compose_word, IntMatrix, MapWord, Rational, Scalar};

/// All `(a, b)` in `[0, q)^2` with `M (a, b) ≡ (a, b) mod q`.
fn grid_oracle(m: &IntMatrix, q: i64) -> Vec<[i64; 2]> {
    let r = m.rows();
    let q128 = q as i128;
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            let (a1, b1) = (a as i128, b as i128);
            let x = (r[0][0] as i128 * a1 + r[0][1] as i128 * b1 - a1).rem_euclid(q128);
            let y = (r[1][0] as i128 * a1 + r[1][1] as i128 * b1 - b1).rem_euclid(q128);
            if x == 0 && y == 0 {
                out.push([a, b]);
            }
        }
    }
    out
}

fn all_words(max_len: usize) -> Vec<MapWord> {
    (1..=max_len)
        .flat_map(|len| (0..1u64 << len).map(move |bits| MapWord::from_bits(bits, len)))
        .collect()
}

/// `m x mod 1` on reduced fractions, over the common denominator.
fn map_rational(m: &IntMatrix, x: &RationalPoint) -> RationalPoint {
    let l = num_integer::lcm(x.den[0], x.den[1]) as i128;
    let n = [
        x.num[0] as i128 * (l / x.den[0] as i128),
        x.num[1] as i128 * (l / x.den[1] as i128),
    ];
    let r = m.rows();
    let img = |i: usize| (r[i][0] as i128 * n[0] + r[i][1] as i128 * n[1]).rem_euclid(l);
    let reduce = |v: i128| {
        let g = num_integer::gcd(v, l);
        (v / g, l / g)
    };
    let (a, da) = reduce(img(0));
    let (b, db) = reduce(img(1));
    RationalPoint {
        num: [a as i64, b as i64],
        den: [da as i64, db as i64],
    }
}

#[test]
fn fixed_point_counts_match_the_grid_oracle() {
    let gens = default_gens();
    let words = all_words(6);
    assert_eq!(words.len(), 126);
    for w in &words {
        let fp = fixed_points(w, &gens).unwrap();
        let m = compose_word(w, &gens).unwrap();
        let q = (m.checked_sub_identity().det()).unsigned_abs() as i64;
        assert_eq!(fp.len() as i64, q);
        assert_eq!(fp.denominator, q);
        assert_eq!(fp.residues, grid_oracle(&m, q), "word {:?}", w.symbols());
        for p in fp.points() {
            assert_eq!(map_rational(&m, &p), p);
        }
    }
}

#[test]
fn single_generator_fixed_points() {
    let fp = fixed_points(&MapWord::from_bits(0, 1), &default_gens()).unwrap();
    let pts: Vec<String> = fp.points().iter().map(|p| p.to_string()).collect();
    assert_eq!(pts, ["(0/1, 0/1)", "(1/2, 0/1)"]);
}

#[test]
fn orbits_step_through_the_word() {
    let gens = default_gens();
    let f = exact(&coboundary_anchor());
    for w in all_words(5) {
        for orbit in orbit_sums(&f, &gens, &w).unwrap() {
            let k = orbit.points.len();
            assert_eq!(k, w.len());
            for (j, &s) in w.symbols().iter().enumerate() {
                assert_eq!(
                    map_rational(gens.get(s), &orbit.points[j]),
                    orbit.points[(j + 1) % k]
                );
            }
            assert!(orbit.exact_zero);
        }
    }
}

fn orbit_signature(
    f: &toral_core::TrigPoly<Rational>,
    w: &MapWord,
) -> Vec<(Vec<RationalPoint>, u64)> {
    let mut sig: Vec<_> = orbit_sums(f, &default_gens(), w)
        .unwrap()
        .into_iter()
        .map(|o| {
            let mut pts = o.points;
            pts.sort();
            (pts, o.orbit_sum.to_bits())
        })
        .collect();
    sig.sort();
    sig
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbit_sums_are_rotation_invariant(
        a in raw_terms(3, 4),
        len in 1usize..=5,
        bits in any::<u64>(),
        by in 0usize..5,
    ) {
        let f = real_zero_mean(&a);
        let w = MapWord::from_bits(bits, len);
        prop_assert_eq!(orbit_signature(&f, &w), orbit_signature(&f, &w.rotate_left(by)));
    }

    #[test]
    fn obstructions_imply_positive_variance(a in raw_terms(2, 3)) {
        let f = real_zero_mean(&a);
        prop_assume!(!f.is_zero());
        let gens = default_gens();
        let report = coboundary_obstruction(&f, &gens, 4, [true, true], SearchBudget::default()).unwrap();
        if report.verdict != Verdict::InconclusiveUpTo(4) {
            let r = annealed_variance(&f, &gens, 0.5, 1e-12, 40).unwrap();
            if r.certified {
                prop_assert!(r.sigma2 > Rational::from_f64(0.0).unwrap());
            }
        }
    }
}

#[test]
fn coboundary_anchor_has_no_obstruction() {
    let f = exact(&coboundary_anchor());
    for k in 1..=8 {
        let r = coboundary_obstruction(
            &f,
            &default_gens(),
            k,
            [true, true],
            SearchBudget::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::InconclusiveUpTo(k));
    }
}
