//! Periodic orbits of word compositions and the closed-orbit obstruction to
//! being a simultaneous coboundary.
//!
//! Fixed points of `M_w` solve `(M_w - I) x ≡ 0 mod 1`. With the Smith form
//! `U (M_w - I) V = diag(d_1, d_2)` they are `V (a/d_1, b/d_2) mod 1`. All of
//! them share the denominator `q = d_1 d_2 = |det(M_w - I)|`, so points are
//! stored as integer numerators mod `q` and orbits are followed exactly.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::lattice::{
    classify_conjugate_product, compose_word, ConjugacyClass, Generators, IntMatrix, MapWord,
};
use crate::math;
use crate::observable::{Dim, TrigPoly};
use crate::scalar::{self, Scalar};

/// Orbit sums below this magnitude are zero candidates.
pub const ZERO_THRESHOLD: f64 = 1e-9;

/// `U m V = diag(d)` with `U`, `V` unimodular and `d_1 | d_2`, `d_i >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: [[i128; 2]; 2],
    pub v: [[i128; 2]; 2],
    pub d: [i128; 2],
}

pub fn smith_normal_form(m: [[i128; 2]; 2]) -> SmithForm {
    let mut a = m;
    let mut u = [[1, 0], [0, 1]];
    let mut v = [[1, 0], [0, 1]];
    let swap_rows = |x: &mut [[i128; 2]; 2]| x.swap(0, 1);
    let swap_cols = |x: &mut [[i128; 2]; 2]| {
        for r in x.iter_mut() {
            r.swap(0, 1);
        }
    };
    loop {
        let entries = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let pivot = entries
            .iter()
            .filter(|&&(i, j)| a[i][j] != 0)
            .min_by_key(|&&(i, j)| a[i][j].abs());
        let Some(&(pi, pj)) = pivot else { break };
        if pi == 1 {
            swap_rows(&mut a);
            swap_rows(&mut u);
        }
        if pj == 1 {
            swap_cols(&mut a);
            swap_cols(&mut v);
        }
        if a[1][0] != 0 {
            let q = a[1][0] / a[0][0];
            for c in 0..2 {
                a[1][c] -= q * a[0][c];
                u[1][c] -= q * u[0][c];
            }
            if a[1][0] != 0 {
                continue;
            }
        }
        if a[0][1] != 0 {
            let q = a[0][1] / a[0][0];
            for r in 0..2 {
                a[r][1] -= q * a[r][0];
                v[r][1] -= q * v[r][0];
            }
            if a[0][1] != 0 {
                continue;
            }
        }
        if a[1][1] % a[0][0] != 0 {
            for c in 0..2 {
                a[0][c] += a[1][c];
                u[0][c] += u[1][c];
            }
            continue;
        }
        break;
    }
    for i in 0..2 {
        if a[i][i] < 0 {
            for c in 0..2 {
                a[i][c] = -a[i][c];
                u[i][c] = -u[i][c];
            }
        }
    }
    SmithForm {
        u,
        v,
        d: [a[0][0], a[1][1]],
    }
}

/// A point of `T^2` with rational coordinates, each a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint {
    pub num: [i64; 2],
    pub den: [i64; 2],
}

impl RationalPoint {
    fn from_residues(x: [i64; 2], q: i64) -> Self {
        let reduce = |n: i64| {
            let g = gcd(n, q);
            (n / g, q / g)
        };
        let (n0, d0) = reduce(x[0]);
        let (n1, d1) = reduce(x[1]);
        RationalPoint {
            num: [n0, n1],
            den: [d0, d1],
        }
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [
            self.num[0] as f64 / self.den[0] as f64,
            self.num[1] as f64 / self.den[1] as f64,
        ]
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}/{}, {}/{})",
            self.num[0], self.den[0], self.num[1], self.den[1]
        )
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// Fixed points of `M_w` as numerators over the common denominator `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPoints {
    pub matrix: IntMatrix,
    pub denominator: i64,
    /// Numerators in `[0, q)`, sorted.
    pub residues: Vec<[i64; 2]>,
}

impl FixedPoints {
    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn points(&self) -> Vec<RationalPoint> {
        self.residues
            .iter()
            .map(|&x| RationalPoint::from_residues(x, self.denominator))
            .collect()
    }
}

fn mul_mod(m: &IntMatrix, x: [i64; 2], q: i64) -> [i64; 2] {
    let r = m.rows();
    let row = |i: usize| {
        let v = r[i][0] as i128 * x[0] as i128 + r[i][1] as i128 * x[1] as i128;
        v.rem_euclid(q as i128) as i64
    };
    [row(0), row(1)]
}

/// `{x : M x ≡ x mod 1}` for an integer matrix `m` with `det(m - I) != 0`.
pub fn fixed_points_of(m: &IntMatrix) -> Result<FixedPoints> {
    let r = m.rows();
    let a = [
        [r[0][0] as i128 - 1, r[0][1] as i128],
        [r[1][0] as i128, r[1][1] as i128 - 1],
    ];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0 {
        return Err(Error::SingularFixedPointSystem);
    }
    let q = i64::try_from(det.abs()).map_err(|_| Error::Overflow { word_len: 0 })?;
    let snf = smith_normal_form(a);
    let [d1, d2] = snf.d;
    debug_assert_eq!(d1 * d2, q as i128);
    let mut residues = Vec::with_capacity(q as usize);
    for i in 0..d1 {
        for j in 0..d2 {
            let y = [i * d2, j * d1];
            let x = [
                (snf.v[0][0] * y[0] + snf.v[0][1] * y[1]).rem_euclid(q as i128) as i64,
                (snf.v[1][0] * y[0] + snf.v[1][1] * y[1]).rem_euclid(q as i128) as i64,
            ];
            residues.push(x);
        }
    }
    residues.sort_unstable();
    for x in &residues {
        assert_eq!(
            mul_mod(m, *x, q),
            *x,
            "fixed point verification failed for {m}"
        );
    }
    Ok(FixedPoints {
        matrix: *m,
        denominator: q,
        residues,
    })
}

/// Fixed points of the composition `M_w`.
pub fn fixed_points(word: &MapWord, gens: &Generators) -> Result<FixedPoints> {
    if word.is_empty() {
        return Err(Error::SingularFixedPointSystem);
    }
    fixed_points_of(&compose_word(word, gens)?)
}

/// A closed orbit `x_0, x_1 = T_{w_1} x_0, ...` with `x_k = x_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    pub word: MapWord,
    pub points: Vec<RationalPoint>,
    pub orbit_sum: f64,
    /// Coefficients cancel exactly, grouped by phase.
    pub exact_zero: bool,
}

impl PeriodicOrbit {
    pub fn is_zero_candidate(&self) -> bool {
        self.exact_zero || self.orbit_sum.abs() < ZERO_THRESHOLD
    }
}

/// `Σ_j f(x_j)` along the orbit of every fixed point of `M_w`.
pub fn orbit_sums<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    word: &MapWord,
) -> Result<Vec<PeriodicOrbit>> {
    if f.dim() != Dim::T2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: f.dim().len(),
        });
    }
    let fps = fixed_points(word, gens)?;
    let q = fps.denominator;
    let terms: Vec<([i64; 2], &Complex<S>)> = f.terms().map(|(k, c)| (k.pair(), c)).collect();
    let mut out = Vec::with_capacity(fps.len());
    let scaled = scaled_coefficients(&terms);
    let mut phases: Vec<(i64, usize)> = Vec::with_capacity(word.len() * terms.len());
    for &x0 in &fps.residues {
        let mut x = x0;
        let mut points = Vec::with_capacity(word.len());
        phases.clear();
        for &s in word.symbols() {
            points.push(RationalPoint::from_residues(x, q));
            for (i, (k, _)) in terms.iter().enumerate() {
                let r = (k[0] as i128 * x[0] as i128 + k[1] as i128 * x[1] as i128)
                    .rem_euclid(q as i128);
                phases.push((r as i64, i));
            }
            x = mul_mod(gens.get(s), x, q);
        }
        debug_assert_eq!(x, x0);
        phases.sort_unstable();
        let (orbit_sum, exact_zero) = match &scaled {
            Some(ints) => match grouped_sum_scaled(&phases, ints, q) {
                Some(r) => r,
                None => grouped_sum(&phases, &terms, q),
            },
            None => grouped_sum(&phases, &terms, q),
        };
        out.push(PeriodicOrbit {
            word: word.clone(),
            points,
            orbit_sum,
            exact_zero,
        });
    }
    Ok(out)
}

/// Coefficients as integers over a common denominator, when they fit.
fn scaled_coefficients<S: Scalar>(
    terms: &[([i64; 2], &Complex<S>)],
) -> Option<(Vec<[i128; 2]>, f64)> {
    let mut parts = Vec::with_capacity(2 * terms.len());
    for (_, c) in terms {
        parts.push(c.re.to_rational()?);
        parts.push(c.im.to_rational()?);
    }
    let denom = parts
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Option<Vec<i128>> = parts
        .iter()
        .map(|r| (r.numer() * (&denom / r.denom())).to_i128())
        .collect();
    let ints = ints?;
    let scale = denom.to_f64()?;
    Some((ints.chunks_exact(2).map(|c| [c[0], c[1]]).collect(), scale))
}

/// Orbit sum from phase groups in exact integer arithmetic; `None` on overflow.
fn grouped_sum_scaled(
    phases: &[(i64, usize)],
    scaled: &(Vec<[i128; 2]>, f64),
    q: i64,
) -> Option<(f64, bool)> {
    let (ints, denom) = scaled;
    let mut exact_zero = true;
    let mut sum = 0.0;
    for group in phases.chunk_by(|a, b| a.0 == b.0) {
        let mut c = [0i128; 2];
        for &(_, i) in group {
            c[0] = c[0].checked_add(ints[i][0])?;
            c[1] = c[1].checked_add(ints[i][1])?;
        }
        if c == [0, 0] {
            continue;
        }
        exact_zero = false;
        let theta = math::TAU * (group[0].0 as f64 / q as f64);
        sum += (c[0] as f64 * math::cos(theta) - c[1] as f64 * math::sin(theta)) / denom;
    }
    Some((sum, exact_zero))
}

/// Orbit sum from phase groups; every group cancelling means an identically zero sum.
fn grouped_sum<S: Scalar>(
    phases: &[(i64, usize)],
    terms: &[([i64; 2], &Complex<S>)],
    q: i64,
) -> (f64, bool) {
    let mut exact_zero = true;
    let mut sum = 0.0;
    for group in phases.chunk_by(|a, b| a.0 == b.0) {
        let c = if group.len() == 1 {
            terms[group[0].1].1.clone()
        } else {
            group
                .iter()
                .fold(Complex::new(S::zero(), S::zero()), |acc, &(_, i)| {
                    acc + terms[i].1.clone()
                })
        };
        if scalar::is_zero_complex(&c) {
            continue;
        }
        exact_zero = false;
        let theta = math::TAU * (group[0].0 as f64 / q as f64);
        let c = scalar::complex_to_f64(&c);
        sum += c.re * math::cos(theta) - c.im * math::sin(theta);
    }
    (sum, exact_zero)
}

/// Limits on the orbit search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_words: u128,
    pub max_orbits: u128,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_words: 1 << 20,
            max_orbits: 1 << 27,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// `T_1 ∘ T_0^{-1}` is hyperbolic (hence ergodic) and `f ≢ 0`.
    PositiveVarianceErgodic { product: IntMatrix },
    /// The first word (by length, then lexicographically) carrying a closed
    /// orbit with a nonzero sum; every such orbit of that word is listed.
    PositiveVarianceWitness {
        word: MapWord,
        witnesses: Vec<(RationalPoint, f64)>,
    },
    /// No obstruction among words of length `<= k_max`. Never a proof of zero variance.
    InconclusiveUpTo(usize),
}

impl Verdict {
    pub fn label(&self) -> alloc::string::String {
        match self {
            Verdict::PositiveVarianceErgodic { .. } | Verdict::PositiveVarianceWitness { .. } => {
                "POSITIVE_VARIANCE".into()
            }
            Verdict::InconclusiveUpTo(k) => alloc::format!("INCONCLUSIVE_UP_TO({k})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionReport {
    pub verdict: Verdict,
    pub words_checked: u64,
    pub orbits_checked: u64,
}

/// Lexicographically least rotation: rotations share their orbits.
fn is_least_rotation(symbols: &[u8]) -> bool {
    (1..symbols.len()).all(|r| {
        let rotated = symbols[r..].iter().chain(&symbols[..r]);
        symbols.iter().le(rotated)
    })
}

/// Closed-orbit obstruction search over words built from the `admissible`
/// symbols, up to length `k_max`.
pub fn coboundary_obstruction<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    k_max: usize,
    admissible: [bool; 2],
    budget: SearchBudget,
) -> Result<ObstructionReport> {
    crate::transfer::check_correlation_input(f)?;
    let alphabet: Vec<u8> = (0..2u8).filter(|&s| admissible[s as usize]).collect();
    if alphabet.is_empty() {
        return Err(Error::InvalidParameter("no admissible generator".into()));
    }
    if admissible == [true, true] && !f.is_zero() {
        let (product, class) = classify_conjugate_product(gens);
        if class == ConjugacyClass::Hyperbolic {
            return Ok(ObstructionReport {
                verdict: Verdict::PositiveVarianceErgodic { product },
                words_checked: 0,
                orbits_checked: 0,
            });
        }
    }
    if k_max > 63 {
        return Err(Error::BudgetExceeded {
            words: u128::MAX,
            budget: budget.max_words,
        });
    }
    let total_words: u128 = (1..=k_max)
        .map(|len| (alphabet.len() as u128).pow(len as u32))
        .sum();
    if total_words > budget.max_words {
        return Err(Error::BudgetExceeded {
            words: total_words,
            budget: budget.max_words,
        });
    }
    let mut words_checked = 0u64;
    let mut orbits_checked = 0u64;
    for len in 1..=k_max {
        let count = (alphabet.len() as u64).pow(len as u32);
        for index in 0..count {
            let mut symbols = Vec::with_capacity(len);
            let mut rest = index;
            for _ in 0..len {
                symbols.push(alphabet[(rest % alphabet.len() as u64) as usize]);
                rest /= alphabet.len() as u64;
            }
            symbols.reverse();
            words_checked += 1;
            if !is_least_rotation(&symbols) {
                continue;
            }
            let word = MapWord::new(symbols)?;
            let m = compose_word(&word, gens)?;
            let det = (m.get(0, 0) as i128 - 1) * (m.get(1, 1) as i128 - 1)
                - m.get(0, 1) as i128 * m.get(1, 0) as i128;
            if det == 0 {
                continue;
            }
            orbits_checked += det.unsigned_abs() as u64;
            if orbits_checked as u128 > budget.max_orbits {
                return Err(Error::BudgetExceeded {
                    words: orbits_checked as u128,
                    budget: budget.max_orbits,
                });
            }
            let witnesses: Vec<(RationalPoint, f64)> = orbit_sums(f, gens, &word)?
                .into_iter()
                .filter(|o| !o.is_zero_candidate())
                .map(|o| (o.points[0], o.orbit_sum))
                .collect();
            if !witnesses.is_empty() {
                return Ok(ObstructionReport {
                    verdict: Verdict::PositiveVarianceWitness { word, witnesses },
                    words_checked,
                    orbits_checked,
                });
            }
        }
    }
    Ok(ObstructionReport {
        verdict: Verdict::InconclusiveUpTo(k_max),
        words_checked,
        orbits_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observable::Freq;
    use crate::scalar::Rational;

    fn gens() -> Generators {
        Generators::new(
            IntMatrix::new([[1, 1], [2, 3]]),
            IntMatrix::new([[1, 1], [1, 2]]),
        )
        .unwrap()
    }

    fn anchor<S: Scalar>() -> TrigPoly<S> {
        TrigPoly::cosine(Dim::T2, Freq::new2(1, 0), S::one())
    }

    fn coboundary<S: Scalar>() -> TrigPoly<S> {
        anchor::<S>()
            .sub(&TrigPoly::cosine(Dim::T2, Freq::new2(1, 1), S::one()))
            .unwrap()
    }

    #[test]
    fn smith_form_identity() {
        for m in [
            [[0, 1], [2, 2]],
            [[4, 6], [6, 4]],
            [[-3, 0], [0, 5]],
            [[2, 4], [6, 8]],
        ] {
            let s = smith_normal_form(m);
            let mul = |a: [[i128; 2]; 2], b: [[i128; 2]; 2]| {
                let mut c = [[0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                    }
                }
                c
            };
            assert_eq!(mul(mul(s.u, m), s.v), [[s.d[0], 0], [0, s.d[1]]]);
            assert_eq!(s.d[1] % s.d[0], 0);
            let det = |a: [[i128; 2]; 2]| a[0][0] * a[1][1] - a[0][1] * a[1][0];
            assert_eq!(det(s.u).abs(), 1);
            assert_eq!(det(s.v).abs(), 1);
        }
    }

    #[test]
    fn fixed_points_of_a0() {
        let fp = fixed_points(&MapWord::from_slice(&[0]).unwrap(), &gens()).unwrap();
        let pts = fp.points();
        assert_eq!(pts.len(), 2);
        assert!(pts.contains(&RationalPoint {
            num: [0, 0],
            den: [1, 1]
        }));
        assert!(pts.contains(&RationalPoint {
            num: [1, 0],
            den: [2, 1]
        }));
    }

    #[test]
    fn singular_system_rejected() {
        assert_eq!(
            fixed_points_of(&IntMatrix::new([[1, 0], [1, 1]])),
            Err(Error::SingularFixedPointSystem)
        );
    }

    #[test]
    fn anchor_orbit_sum() {
        let sums = orbit_sums(
            &anchor::<f64>(),
            &gens(),
            &MapWord::from_slice(&[0]).unwrap(),
        )
        .unwrap();
        let half = sums
            .iter()
            .find(|o| {
                o.points[0]
                    == RationalPoint {
                        num: [1, 0],
                        den: [2, 1],
                    }
            })
            .unwrap();
        assert_eq!(half.orbit_sum, -1.0);
    }

    #[test]
    fn coboundary_orbits_vanish_exactly() {
        for w in [&[0u8][..], &[1], &[0, 1], &[1, 1, 0]] {
            let word = MapWord::from_slice(w).unwrap();
            for o in orbit_sums(&coboundary::<Rational>(), &gens(), &word).unwrap() {
                assert!(o.exact_zero, "{word} {:?}", o.points);
            }
        }
    }

    #[test]
    fn verdicts() {
        let r = coboundary_obstruction(
            &anchor::<f64>(),
            &gens(),
            4,
            [true, true],
            SearchBudget::default(),
        )
        .unwrap();
        match r.verdict {
            Verdict::PositiveVarianceWitness { word, witnesses } => {
                assert_eq!(word.symbols(), &[0]);
                assert!(witnesses.contains(&(
                    RationalPoint {
                        num: [1, 0],
                        den: [2, 1]
                    },
                    -1.0
                )));
            }
            v => panic!("unexpected {v:?}"),
        }
        let r = coboundary_obstruction(
            &coboundary::<Rational>(),
            &gens(),
            8,
            [true, true],
            SearchBudget::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::InconclusiveUpTo(8));
        let cat = Generators::new(
            IntMatrix::new([[2, 1], [1, 1]]),
            IntMatrix::new([[5, 3], [3, 2]]),
        )
        .unwrap();
        let r = coboundary_obstruction(
            &anchor::<f64>(),
            &cat,
            8,
            [true, true],
            SearchBudget::default(),
        )
        .unwrap();
        assert_eq!(r.verdict.label(), "POSITIVE_VARIANCE");
        let tiny = SearchBudget {
            max_words: 10,
            max_orbits: 1 << 20,
        };
        assert!(matches!(
            coboundary_obstruction(&coboundary::<f64>(), &gens(), 8, [true, true], tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn least_rotation() {
        assert!(is_least_rotation(&[0, 0, 1]));
        assert!(!is_least_rotation(&[0, 1, 0]));
        assert!(is_least_rotation(&[0, 1, 0, 1]));
        assert!(!is_least_rotation(&[1, 0]));
    }
}
