//! Sparse trigonometric polynomials on `T^2` and `T^4`.
//!
//! A [`TrigPoly`] stores finitely many Fourier coefficients
//! `f(x) = Σ_k f_k e^{2πi<k,x>}`. Index norms `|k|` are Euclidean.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::TorusPoint;
use crate::math;
use crate::scalar::{self, modulus, Scalar};

/// Torus dimension: `T^2` (d = 1) or the doubled `T^4` (d = 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    T2,
    T4,
}

impl Dim {
    pub fn len(self) -> usize {
        match self {
            Dim::T2 => 2,
            Dim::T4 => 4,
        }
    }
}

/// Frequency vector; unused trailing components are zero on `T^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Freq(pub [i64; 4]);

impl Freq {
    pub const ZERO: Freq = Freq([0; 4]);

    pub const fn new2(a: i64, b: i64) -> Self {
        Freq([a, b, 0, 0])
    }

    pub const fn new4(k: [i64; 4]) -> Self {
        Freq(k)
    }

    #[inline]
    pub fn pair(&self) -> [i64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn neg(&self) -> Self {
        Freq([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }

    pub fn add(&self, o: &Freq) -> Self {
        Freq([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq() as f64)
    }

    /// `|k|^r` for integer `r`, exact when `r` is even.
    pub fn norm_pow(&self, r: u32) -> f64 {
        let sq = self.norm_sq() as f64;
        let even = powi(sq, r / 2);
        if r.is_multiple_of(2) {
            even
        } else {
            even * math::sqrt(sq)
        }
    }

    /// Representative of `{k, -k}`: the one whose first nonzero entry is positive.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|c| **c != 0) {
            Some(c) => *c > 0,
            None => true,
        }
    }
}

fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Finitely supported Fourier series. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<S: Scalar = f64> {
    dim: Dim,
    coeffs: BTreeMap<Freq, Complex<S>>,
}

impl<S: Scalar> TrigPoly<S> {
    pub fn zero(dim: Dim) -> Self {
        TrigPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: Dim, c: S) -> Self {
        Self::from_terms(dim, [(Freq::ZERO, Complex::new(c, S::zero()))])
    }

    /// Sums duplicate frequencies and drops zeros.
    pub fn from_terms<I: IntoIterator<Item = (Freq, Complex<S>)>>(dim: Dim, terms: I) -> Self {
        let mut p = TrigPoly::zero(dim);
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    /// `amplitude · cos(2π<k,x>)`.
    pub fn cosine(dim: Dim, k: Freq, amplitude: S) -> Self {
        if k.is_zero() {
            return Self::constant(dim, amplitude);
        }
        let half = amplitude / (S::one() + S::one());
        let c = Complex::new(half, S::zero());
        Self::from_terms(dim, [(k, c.clone()), (k.neg(), c)])
    }

    /// `amplitude · sin(2π<k,x>)`.
    pub fn sine(dim: Dim, k: Freq, amplitude: S) -> Self {
        let half = amplitude / (S::one() + S::one());
        Self::from_terms(
            dim,
            [
                (k, Complex::new(S::zero(), -half.clone())),
                (k.neg(), Complex::new(S::zero(), half)),
            ],
        )
    }

    pub fn add_term(&mut self, k: Freq, c: Complex<S>) {
        debug_assert!(self.dim == Dim::T4 || (k.0[2] == 0 && k.0[3] == 0));
        let slot = self.coeffs.entry(k).or_insert_with(Complex::zero);
        *slot = slot.clone() + c;
        if scalar::is_zero_complex(slot) {
            self.coeffs.remove(&k);
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coeff(&self, k: &Freq) -> Complex<S> {
        self.coeffs.get(k).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Freq, &Complex<S>)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mean(&self) -> Complex<S> {
        self.coeff(&Freq::ZERO)
    }

    pub fn has_zero_mean(&self) -> bool {
        !self.coeffs.contains_key(&Freq::ZERO)
    }

    /// Hermitian symmetry `f_{-k} = conj(f_k)`, checked exactly.
    pub fn is_real(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(k, c)| self.coeff(&k.neg()) == c.conj())
    }

    /// The real part `(f + conj f) / 2`, which is Hermitian by construction.
    pub fn real_part(&self) -> Self {
        let two = S::one() + S::one();
        let mut out = TrigPoly::zero(self.dim);
        for (k, c) in &self.coeffs {
            let half = Complex::new(c.re.clone() / two.clone(), c.im.clone() / two.clone());
            out.add_term(*k, half.clone());
            out.add_term(k.neg(), half.conj());
        }
        out
    }

    /// Largest Euclidean index norm over the support (0 for the zero polynomial).
    pub fn support_radius(&self) -> f64 {
        self.coeffs.keys().map(|k| k.norm()).fold(0.0, f64::max)
    }

    pub fn l1_radius(&self) -> i64 {
        self.coeffs.keys().map(|k| k.l1()).max().unwrap_or(0)
    }

    /// `Σ |f_k|`, an upper bound for the sup norm.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.values().map(modulus).sum()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.values().map(modulus).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: &S) -> Self {
        let terms = self.coeffs.iter().map(|(k, c)| (*k, c.clone() * s.clone()));
        Self::from_terms(self.dim, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&(-S::one())))
    }

    /// `∫ f g dm = Σ_k f_k g_{-k}`, exact over the sparse supports.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<S>> {
        check_dims(self.dim, other.dim)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Complex::zero();
        for (k, c) in &small.coeffs {
            if let Some(d) = large.coeffs.get(&k.neg()) {
                acc = acc + c.clone() * d.clone();
            }
        }
        Ok(acc)
    }

    /// Pointwise product: coefficient convolution.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let mut out = TrigPoly::zero(self.dim);
        for (k, c) in &self.coeffs {
            for (l, d) in &other.coeffs {
                out.add_term(k.add(l), c.clone() * d.clone());
            }
        }
        Ok(out)
    }

    /// `Σ_k f_k e^{2πi<k,x>}`; the phase `<k,x> mod 1` is formed exactly in
    /// fixed point before conversion to floating point.
    pub fn evaluate(&self, x: &TorusPoint) -> Result<Complex<f64>> {
        if x.dim() != self.dim.len() {
            return Err(Error::DimensionMismatch {
                left: self.dim.len(),
                right: x.dim(),
            });
        }
        let mut acc = Complex::new(0.0, 0.0);
        for (k, c) in &self.coeffs {
            let theta = math::TAU * phase(k, x) as f64 * math::FIXED_SCALE;
            let e = Complex::new(math::cos(theta), math::sin(theta));
            acc += scalar::complex_to_f64(c) * e;
        }
        Ok(acc)
    }

    /// Real value of a real observable; panics if the imaginary part exceeds `1e-10`.
    pub fn evaluate_real(&self, x: &TorusPoint) -> Result<f64> {
        let v = self.evaluate(x)?;
        assert!(
            v.im.abs() < 1e-10,
            "imaginary part {} of a real observable",
            v.im
        );
        Ok(v.re)
    }

    /// `sup_k |g_k| (1 + |k|^r)`.
    pub fn r_seminorm(&self, r: u32) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| modulus(c) * (1.0 + k.norm_pow(r)))
            .fold(0.0, f64::max)
    }

    /// `Σ_{s<=r} Σ_k |g_k| (2π|k|)^s`, an upper bound for `Σ_s ||g^{(s)}||_∞`.
    pub fn cr_norm_upper(&self, r: u32) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let w = math::TAU * k.norm();
                let mut term = 1.0;
                let mut sum = 0.0;
                for _ in 0..=r {
                    sum += term;
                    term *= w;
                }
                modulus(c) * sum
            })
            .sum()
    }

    /// Anisotropic norm `||f||_{p,q}` on `T^2`, see [`PqNorm`].
    pub fn pq_norm(&self, p: f64, q: f64, tol: f64) -> Result<PqNorm> {
        pq_norm(self, p, q, tol)
    }

    pub fn to_f64(&self) -> TrigPoly<f64> {
        let terms = self
            .coeffs
            .iter()
            .map(|(k, c)| (*k, scalar::complex_to_f64(c)));
        TrigPoly::from_terms(self.dim, terms)
    }

    /// Exact conversion from double coefficients.
    pub fn from_f64(f: &TrigPoly<f64>) -> Result<Self> {
        let mut out = TrigPoly::zero(f.dim);
        for (k, c) in &f.coeffs {
            let c = scalar::complex_from_f64(*c)
                .ok_or_else(|| Error::InvalidParameter("non-finite coefficient".into()))?;
            out.add_term(*k, c);
        }
        Ok(out)
    }

    /// `f_2(x, y) = f(x) - f(y)` on `T^4`.
    pub fn doubled(&self) -> Result<Self> {
        check_dims(self.dim, Dim::T2)?;
        let mut out = TrigPoly::zero(Dim::T4);
        for (k, c) in &self.coeffs {
            if k.is_zero() {
                continue;
            }
            out.add_term(Freq::new4([k.0[0], k.0[1], 0, 0]), c.clone());
            out.add_term(Freq::new4([0, 0, k.0[0], k.0[1]]), -c.clone());
        }
        Ok(out)
    }

    pub(crate) fn coeff_map(&self) -> &BTreeMap<Freq, Complex<S>> {
        &self.coeffs
    }
}

/// `<k, x> mod 1` as a 64-bit fixed-point fraction.
#[inline]
pub(crate) fn phase(k: &Freq, x: &TorusPoint) -> u64 {
    let mut acc = 0u64;
    for (kc, xc) in k.0.iter().zip(x.coords()) {
        acc = acc.wrapping_add((*kc as u64).wrapping_mul(*xc));
    }
    acc
}

fn check_dims(a: Dim, b: Dim) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Result of the `(p, q)`-norm maximisation over Lagrangian directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PqNorm {
    /// Largest objective value found (a lower bound for the supremum).
    pub value: f64,
    /// Direction angle `θ* ∈ [π/2, π]` achieving `value`.
    pub theta: f64,
    /// The supremum lies in `[value, value + error_bound]`.
    pub error_bound: f64,
}

const PQ_MIN_GRID: usize = 2048;
const PQ_MAX_GRID: usize = 1 << 16;

/// `sup_θ Σ_{k≠0} |f_k| |k|^p / (1 + |<u(θ),k>|^{p+q}) + |f_0|` over
/// `u(θ) = (cos θ, sin θ)`, `θ ∈ [π/2, π]` (the lines inside `C_-`).
///
/// A uniform grid of at least 2048 points bounds the error through the
/// Lipschitz constant `(p+q) Σ |f_k| |k|^{p+1}`; the best three grid brackets
/// are then refined by golden-section search.
pub fn pq_norm<S: Scalar>(f: &TrigPoly<S>, p: f64, q: f64, tol: f64) -> Result<PqNorm> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    if f.dim != Dim::T2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: f.dim.len(),
        });
    }
    if !(p >= 0.0) || !(q > 0.0) {
        return Err(Error::InvalidParameter(
            "pq_norm needs p >= 0 and q > 0".into(),
        ));
    }
    let s = p + q;
    let mut f0 = 0.0;
    let mut terms: Vec<([f64; 2], f64)> = Vec::new();
    let mut lipschitz = 0.0;
    for (k, c) in f.terms() {
        let m = modulus(c);
        if k.is_zero() {
            f0 = m;
            continue;
        }
        let norm = k.norm();
        terms.push(([k.0[0] as f64, k.0[1] as f64], m * math::powf(norm, p)));
        lipschitz += s * m * math::powf(norm, p + 1.0);
    }
    let objective = |theta: f64| -> f64 {
        let (u1, u2) = (math::cos(theta), math::sin(theta));
        let mut acc = f0;
        for (k, w) in &terms {
            let proj = (u1 * k[0] + u2 * k[1]).abs();
            acc += w / (1.0 + math::powf(proj, s));
        }
        acc
    };
    if terms.is_empty() {
        return Ok(PqNorm {
            value: f0,
            theta: FRAC_PI_2,
            error_bound: 0.0,
        });
    }

    let span = PI - FRAC_PI_2;
    let wanted = math::ceil(lipschitz * span / (2.0 * tol));
    let n = if wanted.is_finite() {
        (wanted as usize).clamp(PQ_MIN_GRID, PQ_MAX_GRID)
    } else {
        PQ_MAX_GRID
    };
    let h = span / (n - 1) as f64;
    let values: Vec<f64> = (0..n)
        .map(|i| objective(FRAC_PI_2 + i as f64 * h))
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut best = (values[order[0]], FRAC_PI_2 + order[0] as f64 * h);
    for &i in order.iter().take(3) {
        let lo = FRAC_PI_2 + i.saturating_sub(1) as f64 * h;
        let hi = FRAC_PI_2 + (i + 1).min(n - 1) as f64 * h;
        let (theta, v) = golden_max(&objective, lo, hi);
        if v > best.0 {
            best = (v, theta);
        }
    }
    Ok(PqNorm {
        value: best.0,
        theta: best.1,
        error_bound: 0.5 * lipschitz * h,
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc > fd { (c, fc) } else { (d, fd) };
    for t in [a, b] {
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}
