//! Exact integer-matrix and torus arithmetic.
//!
//! Torus points are stored as 64-bit fixed-point fractions (`value = n / 2^64`)
//! and integer matrices act on them with wrapping arithmetic, which is exactly
//! reduction mod 1. Trajectories of hyperbolic maps are therefore exact and
//! reversible; no roundoff is amplified by the expansion.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// A 2x2 integer matrix. The 4x4 block-diagonal lift `diag(A, A)` acting on
/// `T^4` is applied implicitly by the `*_block` methods.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix {
    rows: [[i64; 2]; 2],
}

impl IntMatrix {
    pub const IDENTITY: IntMatrix = IntMatrix {
        rows: [[1, 0], [0, 1]],
    };

    pub const fn new(rows: [[i64; 2]; 2]) -> Self {
        IntMatrix { rows }
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn det(&self) -> i128 {
        let [[a, b], [c, d]] = self.rows;
        a as i128 * d as i128 - b as i128 * c as i128
    }

    pub fn trace(&self) -> i128 {
        self.rows[0][0] as i128 + self.rows[1][1] as i128
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.rows;
        IntMatrix::new([[a, c], [b, d]])
    }

    /// `adj(A)`; equals `A^{-1}` when `det A = 1`.
    pub fn adjugate(&self) -> Self {
        let [[a, b], [c, d]] = self.rows;
        IntMatrix::new([[d, -b], [-c, a]])
    }

    pub fn neg(&self) -> Self {
        let [[a, b], [c, d]] = self.rows;
        IntMatrix::new([[-a, -b], [-c, -d]])
    }

    /// `self * rhs` with 128-bit intermediates; `None` if an entry leaves `i64`.
    pub fn checked_mul(&self, rhs: &IntMatrix) -> Option<IntMatrix> {
        let mut out = [[0i64; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let v = self.rows[i][0] as i128 * rhs.rows[0][j] as i128
                    + self.rows[i][1] as i128 * rhs.rows[1][j] as i128;
                *slot = i64::try_from(v).ok()?;
            }
        }
        Some(IntMatrix::new(out))
    }

    pub fn checked_sub_identity(&self) -> IntMatrix {
        let [[a, b], [c, d]] = self.rows;
        IntMatrix::new([[a - 1, b], [c, d - 1]])
    }

    /// Integer vector product `A k`.
    #[inline]
    pub fn mul_vec(&self, k: [i64; 2]) -> [i64; 2] {
        [
            self.rows[0][0] * k[0] + self.rows[0][1] * k[1],
            self.rows[1][0] * k[0] + self.rows[1][1] * k[1],
        ]
    }

    /// `diag(A, A) k` on `Z^4`.
    #[inline]
    pub fn mul_vec_block(&self, k: [i64; 4]) -> [i64; 4] {
        let lo = self.mul_vec([k[0], k[1]]);
        let hi = self.mul_vec([k[2], k[3]]);
        [lo[0], lo[1], hi[0], hi[1]]
    }

    pub fn mul_f64(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.rows[0][0] as f64 * v[0] + self.rows[0][1] as f64 * v[1],
            self.rows[1][0] as f64 * v[0] + self.rows[1][1] as f64 * v[1],
        ]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.rows;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorDefect {
    DeterminantNotOne(i128),
    NegativeEntry { row: usize, col: usize, value: i64 },
    NotHyperbolic { trace: i128 },
}

impl fmt::Display for GeneratorDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorDefect::DeterminantNotOne(d) => write!(f, "determinant is {d}, expected 1"),
            GeneratorDefect::NegativeEntry { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} is negative")
            }
            GeneratorDefect::NotHyperbolic { trace } => {
                write!(
                    f,
                    "trace {trace} < 3 (not hyperbolic with nonnegative entries)"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub matrix: IntMatrix,
    pub det: i128,
    pub trace: i128,
    pub defects: Vec<GeneratorDefect>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}", self.matrix);
        for d in &self.defects {
            s.push_str(&format!("; {d}"));
        }
        s
    }
}

/// Accepts `m` iff `det m = 1`, all entries are nonnegative and `tr m >= 3`.
pub fn validate_generator(m: &IntMatrix) -> ValidationReport {
    let det = m.det();
    let trace = m.trace();
    let mut defects = Vec::new();
    if det != 1 {
        defects.push(GeneratorDefect::DeterminantNotOne(det));
    }
    for (row, r) in m.rows.iter().enumerate() {
        for (col, &value) in r.iter().enumerate() {
            if value < 0 {
                defects.push(GeneratorDefect::NegativeEntry { row, col, value });
            }
        }
    }
    if trace < 3 {
        defects.push(GeneratorDefect::NotHyperbolic { trace });
    }
    ValidationReport {
        matrix: *m,
        det,
        trace,
        defects,
    }
}

/// A validated generator pair `(A_0, A_1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Generators {
    maps: [IntMatrix; 2],
}

impl Generators {
    pub fn new(a0: IntMatrix, a1: IntMatrix) -> Result<Self> {
        let reports = [validate_generator(&a0), validate_generator(&a1)];
        let bad: Vec<String> = reports
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.accepted())
            .map(|(i, r)| format!("A{i} {}", r.summary()))
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidGenerator(bad.join(" | ")));
        }
        Ok(Generators { maps: [a0, a1] })
    }

    #[inline]
    pub fn get(&self, symbol: u8) -> &IntMatrix {
        &self.maps[symbol as usize]
    }

    pub fn maps(&self) -> &[IntMatrix; 2] {
        &self.maps
    }
}

/// A finite word over `{0, 1}`. Symbol `j` selects `A_j`; the first symbol is
/// applied first, so the word `(w_1, ..., w_k)` composes to `A_{w_k} ... A_{w_1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MapWord {
    symbols: Vec<u8>,
}

impl MapWord {
    pub fn empty() -> Self {
        MapWord {
            symbols: Vec::new(),
        }
    }

    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.iter().any(|&s| s > 1) {
            return Err(Error::InvalidParameter(
                "word symbols must be 0 or 1".into(),
            ));
        }
        Ok(MapWord { symbols })
    }

    pub fn from_slice(symbols: &[u8]) -> Result<Self> {
        Self::new(symbols.to_vec())
    }

    /// Word of length `len` whose `i`-th symbol is bit `len - 1 - i` of `bits`.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        let symbols = (0..len)
            .map(|i| ((bits >> (len - 1 - i)) & 1) as u8)
            .collect();
        MapWord { symbols }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn push(&mut self, symbol: u8) {
        assert!(symbol <= 1, "word symbols must be 0 or 1");
        self.symbols.push(symbol);
    }

    pub fn concat(&self, other: &MapWord) -> MapWord {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        MapWord { symbols }
    }

    pub fn rotate_left(&self, by: usize) -> MapWord {
        let mut symbols = self.symbols.clone();
        if !symbols.is_empty() {
            let n = symbols.len();
            symbols.rotate_left(by % n);
        }
        MapWord { symbols }
    }

    pub fn prefix(&self, n: usize) -> MapWord {
        MapWord {
            symbols: self.symbols[..n].to_vec(),
        }
    }
}

impl fmt::Display for MapWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return f.write_str("()");
        }
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `A_{w_k} ... A_{w_1}`, exact. Overflow reports the prefix length at which an
/// entry left the `i64` range.
pub fn compose_word(word: &MapWord, gens: &Generators) -> Result<IntMatrix> {
    let mut acc = IntMatrix::IDENTITY;
    for (i, &s) in word.symbols.iter().enumerate() {
        acc = gens
            .get(s)
            .checked_mul(&acc)
            .ok_or(Error::Overflow { word_len: i + 1 })?;
    }
    Ok(acc)
}

/// A point of `T^2` (or `T^4`) as 64-bit fixed-point fractions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct TorusPoint {
    coords: [u64; 4],
    dim: u8,
}

impl TorusPoint {
    pub const fn new2(x1: u64, x2: u64) -> Self {
        TorusPoint {
            coords: [x1, x2, 0, 0],
            dim: 2,
        }
    }

    pub const fn new4(c: [u64; 4]) -> Self {
        TorusPoint { coords: c, dim: 4 }
    }

    /// `(num_1/den_1, num_2/den_2)` rounded down to the fixed-point grid; exact
    /// when the denominators are powers of two.
    pub fn from_fractions(p: [(i64, i64); 2]) -> Self {
        let c = |(n, d): (i64, i64)| -> u64 {
            assert!(d > 0, "denominator must be positive");
            let n = n.rem_euclid(d) as u128;
            ((n << 64) / d as u128) as u64
        };
        TorusPoint::new2(c(p[0]), c(p[1]))
    }

    pub fn origin() -> Self {
        TorusPoint::new2(0, 0)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords[..self.dim as usize]
    }

    pub fn to_f64(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, &c) in out.iter_mut().zip(self.coords.iter()) {
            *o = c as f64 * math::FIXED_SCALE;
        }
        out
    }
}

#[inline]
fn wrap_row(row: [i64; 2], x: u64, y: u64) -> u64 {
    (row[0] as u64)
        .wrapping_mul(x)
        .wrapping_add((row[1] as u64).wrapping_mul(y))
}

/// `m x mod 1` (block-diagonal on `T^4`), exact in 64-bit wraparound.
#[inline]
pub fn apply_map(m: &IntMatrix, x: &TorusPoint) -> TorusPoint {
    let r = m.rows;
    let c = x.coords;
    let mut out = TorusPoint {
        coords: [wrap_row(r[0], c[0], c[1]), wrap_row(r[1], c[0], c[1]), 0, 0],
        dim: x.dim,
    };
    if x.dim == 4 {
        out.coords[2] = wrap_row(r[0], c[2], c[3]);
        out.coords[3] = wrap_row(r[1], c[2], c[3]);
    }
    out
}

/// Sharp one-step expansion constants over the invariant cones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeConstants {
    pub lambda: f64,
    pub big_lambda: f64,
    pub c0: f64,
    pub beta: f64,
}

impl ConeConstants {
    /// `Λ^p < λ^{p+q}`: the anisotropic space carries a spectral gap.
    pub fn gap_condition(&self, p: f64, q: f64) -> bool {
        math::powf(self.big_lambda, p) < math::powf(self.lambda, p + q)
    }

    /// Smallest integer `q >= 1` with `Λ^p < λ^{p+q}`.
    pub fn minimal_q(&self, p: f64) -> u32 {
        let mut q = 1;
        while !self.gap_condition(p, q as f64) {
            q += 1;
        }
        q
    }
}

/// Extremes of `|B v| / |v|` over unit `v` in the closed first quadrant.
///
/// The ratio squared is the quadratic form `v^T (B^T B) v`; on a sector its
/// extremes sit on the boundary rays or on eigendirections inside the sector.
fn quadrant_extremes(b: &IntMatrix) -> (f64, f64) {
    let g = b.transpose().checked_mul(b).expect("gram matrix overflow");
    let (a, off, c) = (g.get(0, 0) as f64, g.get(0, 1) as f64, g.get(1, 1) as f64);
    let mut lo = a.min(c);
    let mut hi = a.max(c);
    let mid = 0.5 * (a + c);
    let rad = math::sqrt(0.25 * (a - c) * (a - c) + off * off);
    for ev in [mid - rad, mid + rad] {
        // Eigenvector (off, ev - a), or (ev - c, off) when that one degenerates.
        let (mut x, mut y) = (off, ev - a);
        if x.abs() + y.abs() < 1e-12 * (1.0 + ev.abs()) {
            x = ev - c;
            y = off;
        }
        if x.abs() + y.abs() == 0.0 {
            continue;
        }
        if x * y >= 0.0 {
            lo = lo.min(ev);
            hi = hi.max(ev);
        }
    }
    (math::sqrt(lo), math::sqrt(hi))
}

/// One-step constants `λ <= |B v| / |v| <= Λ` for `v ∈ C_+`, `B ∈ {A_i, A_i^T}`,
/// and the cone-pinching `β` with `A_i^{-1} C_- ⊂ C_β`.
///
/// By `A^{-1} = J A^T J^{-1}` (with `J` the quarter rotation, which swaps
/// `C_+` and `C_-`) the same `λ, Λ` bound `A^{-1}` and `(A^T)^{-1}` on `C_-`.
pub fn hyperbolicity_constants(gens: &Generators) -> ConeConstants {
    let mut lambda = f64::INFINITY;
    let mut big_lambda = 0.0f64;
    let mut beta = 1.0f64;
    for a in gens.maps() {
        for b in [*a, a.transpose()] {
            let (lo, hi) = quadrant_extremes(&b);
            lambda = lambda.min(lo);
            big_lambda = big_lambda.max(hi);
        }
        // A^{-1} = [[d, -b], [-c, a]] sends (1,0) to (d, -c) and (0,-1) to (b, -a);
        // the slope s = -v2/v1 ranges between c/d and a/b on the image of C_-.
        let [[p, q], [r, s]] = a.rows();
        for slope in [r as f64 / s as f64, p as f64 / q as f64] {
            beta = beta.max(slope).max(1.0 / slope);
        }
    }
    assert!(lambda > 1.0, "generators lack a common expanding cone");
    ConeConstants {
        lambda,
        big_lambda,
        c0: 1.0,
        beta,
    }
}

/// `v ∈ C_β`: `β^{-1} v1^2 <= -v1 v2 <= β v1^2`, with relative slack `tol`.
pub fn in_pinched_cone(v: [f64; 2], beta: f64, tol: f64) -> bool {
    let sq = v[0] * v[0];
    let cross = -v[0] * v[1];
    let slack = tol * (sq + v[1] * v[1]);
    cross >= sq / beta - slack && cross <= beta * sq + slack
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjugacyClass {
    /// `|tr| > 2`: the product is an ergodic (Anosov) automorphism.
    Hyperbolic,
    /// `|tr| = 2`, not `±I`.
    Parabolic,
    /// `|tr| < 2` or `±I`.
    EllipticOrFinite,
}

impl ConjugacyClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConjugacyClass::Hyperbolic => "hyperbolic",
            ConjugacyClass::Parabolic => "parabolic",
            ConjugacyClass::EllipticOrFinite => "elliptic/finite-order",
        }
    }
}

/// Classifies `B = A_1 A_0^{-1}` by its trace.
pub fn classify_conjugate_product(gens: &Generators) -> (IntMatrix, ConjugacyClass) {
    let [a0, a1] = gens.maps();
    let b = a1
        .checked_mul(&a0.adjugate())
        .expect("conjugate product overflow");
    let tr = b.trace().abs();
    let class = if tr > 2 {
        ConjugacyClass::Hyperbolic
    } else if tr == 2 && b != IntMatrix::IDENTITY && b != IntMatrix::IDENTITY.neg() {
        ConjugacyClass::Parabolic
    } else {
        ConjugacyClass::EllipticOrFinite
    };
    (b, class)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A0: IntMatrix = IntMatrix::new([[1, 1], [2, 3]]);
    const A1: IntMatrix = IntMatrix::new([[1, 1], [1, 2]]);
    const CAT: IntMatrix = IntMatrix::new([[2, 1], [1, 1]]);

    fn pair() -> Generators {
        Generators::new(A0, A1).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_generator(&A0).accepted());
        let id = validate_generator(&IntMatrix::IDENTITY);
        assert!(!id.accepted());
        assert_eq!(
            id.defects,
            vec![GeneratorDefect::NotHyperbolic { trace: 2 }]
        );
        let cat = validate_generator(&CAT);
        assert!(cat.accepted());
        assert_eq!(cat.trace, 3);
        let bad = validate_generator(&IntMatrix::new([[2, -1], [1, 0]]));
        assert!(bad.defects.contains(&GeneratorDefect::NegativeEntry {
            row: 0,
            col: 1,
            value: -1
        }));
        let det2 = validate_generator(&IntMatrix::new([[2, 1], [2, 2]]));
        assert!(det2
            .defects
            .contains(&GeneratorDefect::DeterminantNotOne(2)));
        assert!(Generators::new(A0, IntMatrix::IDENTITY).is_err());
    }

    #[test]
    fn cat_map_eigenvalues() {
        // t^2 - 3t + 1 = 0
        let tr = CAT.trace() as f64;
        let disc = (tr * tr - 4.0).sqrt();
        let (hi, lo) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        assert!((hi - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((hi * lo - 1.0).abs() < 1e-14);
    }

    #[test]
    fn compose_examples() {
        let g = pair();
        assert_eq!(
            compose_word(&MapWord::empty(), &g).unwrap(),
            IntMatrix::IDENTITY
        );
        assert_eq!(
            compose_word(&MapWord::from_slice(&[0]).unwrap(), &g).unwrap(),
            A0
        );
        assert_eq!(
            compose_word(&MapWord::from_slice(&[0, 1]).unwrap(), &g).unwrap(),
            IntMatrix::new([[3, 4], [5, 7]])
        );
    }

    #[test]
    fn compose_overflow_reports_length() {
        let g = pair();
        let word = MapWord::new(alloc::vec![0; 80]).unwrap();
        match compose_word(&word, &g) {
            Err(Error::Overflow { word_len }) => assert!(word_len > 20 && word_len <= 80),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn apply_map_examples() {
        let half = 1u64 << 63;
        assert_eq!(apply_map(&A0, &TorusPoint::origin()), TorusPoint::origin());
        let x = TorusPoint::new2(half, 0);
        assert_eq!(apply_map(&A0, &x), x);
        let y = TorusPoint::new2(0x1234_5678_9abc_def0, 0xfeed_beef_cafe_babe);
        assert_eq!(apply_map(&A0.adjugate(), &apply_map(&A0, &y)), y);
    }

    #[test]
    fn fractions_to_fixed_point() {
        let p = TorusPoint::from_fractions([(1, 2), (3, 4)]);
        assert_eq!(p.coords(), &[1u64 << 63, 3u64 << 62]);
        assert_eq!(
            TorusPoint::from_fractions([(-1, 2), (0, 1)]).coords()[0],
            1u64 << 63
        );
    }

    #[test]
    fn cat_map_constants() {
        let g = Generators::new(CAT, CAT).unwrap();
        let c = hyperbolicity_constants(&g);
        assert!((c.big_lambda - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((c.lambda - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.beta, 2.0);
        assert_eq!(c.c0, 1.0);
    }

    #[test]
    fn pair_constants_by_candidate_enumeration() {
        // Oracle: enumerate boundary rays and in-sector eigendirections of
        // B^T B for B in {A_i, A_i^T}; the minimum ratio is at (1,0) for A_i^T.
        let c = hyperbolicity_constants(&pair());
        assert!((c.lambda - 2f64.sqrt()).abs() < 1e-12);
        // Largest eigenvalue of A_0 A_0^T = [[2,5],[5,13]].
        let ev = (15.0 + (11.0f64 * 11.0 + 100.0).sqrt()) / 2.0;
        assert!((c.big_lambda - ev.sqrt()).abs() < 1e-12);
        // A_1^{-1} sends (1,0) to (2,-1): slope 1/2, so β = 2.
        assert_eq!(c.beta, 2.0);
        assert!(c.gap_condition(1.0, c.minimal_q(1.0) as f64));
        assert_eq!(c.minimal_q(1.0), 3);
    }

    #[test]
    fn classification() {
        let (b, class) = classify_conjugate_product(&pair());
        assert_eq!(b, IntMatrix::new([[1, 0], [-1, 1]]));
        assert_eq!(class, ConjugacyClass::Parabolic);
        let same = Generators::new(A0, A0).unwrap();
        assert_eq!(
            classify_conjugate_product(&same).1,
            ConjugacyClass::EllipticOrFinite
        );
        let other = Generators::new(CAT, IntMatrix::new([[5, 2], [2, 1]])).unwrap();
        let (b, class) = classify_conjugate_product(&other);
        // [[5,2],[2,1]] * [[1,-1],[-1,2]] = [[3,-1],[1,0]], trace 3
        assert_eq!(b, IntMatrix::new([[3, -1], [1, 0]]));
        assert_eq!(class, ConjugacyClass::Hyperbolic);
    }

    #[test]
    fn word_helpers() {
        let w = MapWord::from_bits(0b011, 3);
        assert_eq!(w.symbols(), &[0, 1, 1]);
        assert_eq!(w.rotate_left(1).symbols(), &[1, 1, 0]);
        assert!(MapWord::from_slice(&[2]).is_err());
        assert_eq!(format!("{w}"), "011");
    }
}
