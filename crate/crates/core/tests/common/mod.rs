#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex;
use proptest::prelude::*;
use toral_core::{Dim, Freq, Generators, IntMatrix, Rational, TrigPoly};

pub fn default_gens() -> Generators {
    Generators::new(
        IntMatrix::new([[1, 1], [2, 3]]),
        IntMatrix::new([[1, 1], [1, 2]]),
    )
    .unwrap()
}

pub fn cosine_anchor() -> TrigPoly<f64> {
    TrigPoly::cosine(Dim::T2, Freq::new2(1, 0), 1.0)
}

pub fn coboundary_anchor() -> TrigPoly<f64> {
    let g = TrigPoly::cosine(Dim::T2, Freq::new2(1, 0), 1.0);
    g.sub(&TrigPoly::cosine(Dim::T2, Freq::new2(1, 1), 1.0))
        .unwrap()
}

pub fn exact(f: &TrigPoly<f64>) -> TrigPoly<Rational> {
    TrigPoly::from_f64(f).unwrap()
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Terms `(k1, k2, re_num, im_num, den)` on a small frequency box.
pub fn raw_terms(
    radius: i64,
    max_terms: usize,
) -> impl Strategy<Value = Vec<(i64, i64, i64, i64, i64)>> {
    prop::collection::vec(
        (
            -radius..=radius,
            -radius..=radius,
            -6i64..=6,
            -6i64..=6,
            1i64..=5,
        ),
        1..=max_terms,
    )
}

pub fn rational_poly(terms: &[(i64, i64, i64, i64, i64)]) -> TrigPoly<Rational> {
    TrigPoly::from_terms(
        Dim::T2,
        terms
            .iter()
            .map(|&(a, b, re, im, d)| (Freq::new2(a, b), Complex::new(ratio(re, d), ratio(im, d)))),
    )
}

/// Real, zero-mean version of the raw terms.
pub fn real_zero_mean(terms: &[(i64, i64, i64, i64, i64)]) -> TrigPoly<Rational> {
    let p = rational_poly(terms).real_part();
    let mean = p.mean();
    let mut out = p;
    out.add_term(Freq::ZERO, -mean);
    out
}

/// Dyadic real zero-mean observable (exact in both `f64` and rational mode).
pub fn dyadic_observable(terms: &[(i64, i64, i64, i64, i64)]) -> TrigPoly<f64> {
    let raw = TrigPoly::from_terms(
        Dim::T2,
        terms.iter().map(|&(a, b, re, im, _)| {
            (
                Freq::new2(a, b),
                Complex::new(re as f64 / 8.0, im as f64 / 8.0),
            )
        }),
    );
    let p = raw.real_part();
    let mut out = p.clone();
    out.add_term(Freq::ZERO, -p.mean());
    out
}
