//! Transfer operators on Fourier coefficients and the correlation series.
//!
//! `(L_T f)_k = f_{A^T k}`, so `L_T` moves the support of `f` by `(A^T)^{-1}`.
//! The averaged operator is `L_wp = wp L_{T_0} + (1 - wp) L_{T_1}`.
//!
//! Correlations `c_n = m(f L_wp^n f) = Σ_k f_{-k} V(n, k)` with
//! `V(n, k) = wp V(n-1, A_0^T k) + (1-wp) V(n-1, A_1^T k)`, `V(0, k) = f_k`,
//! are evaluated by pushing the weights `f_{-k}` forward through the maps
//! `k ↦ A_i^T k`, merging identical lattice vectors at each level (the
//! memo table of the recursion, level by level). A sign-definite `k` with
//! `|k|_1` above the `ℓ¹` radius of `supp f` can never return to the support
//! because nonnegative generators with all entries `>= 1` at least double
//! `|k|_1` on sign-definite vectors; such vectors are dropped. When nothing
//! survives, every later correlation is exactly zero.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::Zero;

use crate::dynamics::{uniform_point, Evaluator};
use crate::error::{Error, Result};
use crate::lattice::{apply_map, hyperbolicity_constants, ConeConstants, Generators, IntMatrix};
use crate::math;
use crate::observable::{Dim, Freq, TrigPoly};
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::{self, Scalar};

fn map_freq(m: &IntMatrix, k: &Freq, dim: Dim) -> Freq {
    match dim {
        Dim::T2 => {
            let v = m.mul_vec(k.pair());
            Freq::new2(v[0], v[1])
        }
        Dim::T4 => Freq::new4(m.mul_vec_block(k.0)),
    }
}

/// `L_T f`: coefficient at `k` is `f_{m^T k}`; the support moves by `(m^T)^{-1}`.
pub fn apply_transfer<S: Scalar>(m: &IntMatrix, f: &TrigPoly<S>) -> TrigPoly<S> {
    let inv_t = m.transpose().adjugate();
    let terms = f
        .terms()
        .map(|(k, c)| (map_freq(&inv_t, k, f.dim()), c.clone()));
    TrigPoly::from_terms(f.dim(), terms)
}

/// `g ∘ T`: coefficient `g_k` moves to `m^T k`.
pub fn compose_with<S: Scalar>(m: &IntMatrix, g: &TrigPoly<S>) -> TrigPoly<S> {
    let t = m.transpose();
    let terms = g
        .terms()
        .map(|(k, c)| (map_freq(&t, k, g.dim()), c.clone()));
    TrigPoly::from_terms(g.dim(), terms)
}

/// `L_wp f = wp L_{T_0} f + (1 - wp) L_{T_1} f`.
pub fn apply_averaged<S: Scalar>(gens: &Generators, wp: &S, f: &TrigPoly<S>) -> TrigPoly<S> {
    let w1 = S::one() - wp.clone();
    let a = apply_transfer(gens.get(0), f).scale(wp);
    let b = apply_transfer(gens.get(1), f).scale(&w1);
    a.add(&b).expect("same dimension")
}

/// Markov operator `Q_wp g = wp g∘T_0 + (1 - wp) g∘T_1`, dual to `L_wp`.
pub fn markov_average<S: Scalar>(gens: &Generators, wp: &S, g: &TrigPoly<S>) -> TrigPoly<S> {
    let w1 = S::one() - wp.clone();
    let a = compose_with(gens.get(0), g).scale(wp);
    let b = compose_with(gens.get(1), g).scale(&w1);
    a.add(&b).expect("same dimension")
}

/// Values carried through the forward recursion.
pub(crate) trait Mass: Clone {
    fn accumulate(&mut self, other: Self);
    fn is_zero(&self) -> bool;
}

impl<S: Scalar> Mass for Complex<S> {
    fn accumulate(&mut self, other: Self) {
        *self = self.clone() + other;
    }
    fn is_zero(&self) -> bool {
        scalar::is_zero_complex(self)
    }
}

#[inline]
fn sign_definite(k: [i64; 2]) -> bool {
    (k[0] >= 0 && k[1] >= 0) || (k[0] <= 0 && k[1] <= 0)
}

#[inline]
fn escapes(k: [i64; 2], radius: i64) -> bool {
    sign_definite(k) && k[0].abs() + k[1].abs() > radius
}

/// Level-by-level forward recursion over lattice vectors.
pub(crate) struct Frontier<V: Mass> {
    masses: BTreeMap<[i64; 2], V>,
    transposes: [IntMatrix; 2],
    radius: i64,
    level: usize,
}

impl<V: Mass> Frontier<V> {
    pub(crate) fn new<S: Scalar>(
        f: &TrigPoly<S>,
        gens: &Generators,
        seed: impl Fn(&Complex<S>) -> V,
    ) -> Self {
        let mut masses = BTreeMap::new();
        for (k, c) in f.terms() {
            masses.insert(k.neg().pair(), seed(c));
        }
        Frontier {
            masses,
            transposes: [gens.get(0).transpose(), gens.get(1).transpose()],
            radius: f.l1_radius(),
            level: 0,
        }
    }

    /// Pushes every mass one level forward; `branch(v, i)` weights the
    /// move through generator `i` (`None` skips an inadmissible branch).
    pub(crate) fn advance(&mut self, branch: impl Fn(&V, usize) -> Option<V>) {
        let mut next: BTreeMap<[i64; 2], V> = BTreeMap::new();
        for (k, v) in &self.masses {
            for (i, t) in self.transposes.iter().enumerate() {
                let image = t.mul_vec(*k);
                if escapes(image, self.radius) {
                    continue;
                }
                if let Some(w) = branch(v, i) {
                    match next.get_mut(&image) {
                        Some(slot) => slot.accumulate(w),
                        None => {
                            next.insert(image, w);
                        }
                    }
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        self.masses = next;
        self.level += 1;
    }

    /// `Σ_k mass(k) · f_k`, reduced by `pair`.
    pub(crate) fn pair_with<S: Scalar, T>(
        &self,
        f: &TrigPoly<S>,
        mut acc: T,
        pair: impl Fn(&mut T, &V, &Complex<S>),
    ) -> T {
        let coeffs = f.coeff_map();
        for (k, v) in &self.masses {
            if let Some(c) = coeffs.get(&Freq::new2(k[0], k[1])) {
                pair(&mut acc, v, c);
            }
        }
        acc
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub(crate) fn len(&self) -> usize {
        self.masses.len()
    }

    pub(crate) fn level(&self) -> usize {
        self.level
    }

    pub(crate) fn masses(&self) -> impl Iterator<Item = &V> {
        self.masses.values()
    }
}

pub(crate) fn check_correlation_input<S: Scalar>(f: &TrigPoly<S>) -> Result<()> {
    if f.dim() != Dim::T2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: f.dim().len(),
        });
    }
    if !f.is_real() {
        return Err(Error::NotReal);
    }
    if !f.has_zero_mean() {
        return Err(Error::NonZeroMean(f.mean().re.to_f64()));
    }
    Ok(())
}

pub(crate) fn check_wp(wp: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&wp) {
        return Err(Error::InvalidParameter(format!("wp = {wp} outside [0, 1]")));
    }
    Ok(())
}

/// Numeric correlation recursion for a fixed `wp`.
pub struct CorrelationEngine<'a, S: Scalar> {
    f: &'a TrigPoly<S>,
    frontier: Frontier<Complex<S>>,
    weights: [S; 2],
}

impl<'a, S: Scalar> CorrelationEngine<'a, S> {
    pub fn new(f: &'a TrigPoly<S>, gens: &Generators, wp: f64) -> Result<Self> {
        check_correlation_input(f)?;
        check_wp(wp)?;
        let wp_s = S::from_f64(wp).expect("finite wp");
        let weights = [wp_s.clone(), S::one() - wp_s];
        Ok(CorrelationEngine {
            f,
            frontier: Frontier::new(f, gens, |c| c.clone()),
            weights,
        })
    }

    pub fn level(&self) -> usize {
        self.frontier.level()
    }

    /// `c_n` at the current level.
    pub fn term(&self) -> S {
        self.frontier
            .pair_with(self.f, Complex::<S>::zero(), |acc, v, c| {
                *acc = acc.clone() + v.clone() * c.clone()
            })
            .re
    }

    pub fn advance(&mut self) {
        let w = &self.weights;
        self.frontier.advance(|v, i| {
            if w[i].is_zero() {
                None
            } else {
                Some(v.clone() * w[i].clone())
            }
        });
    }

    /// Nothing left to propagate: all later terms vanish.
    pub fn fully_pruned(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn frontier_size(&self) -> usize {
        self.frontier.len()
    }

    /// `Σ |mass|`; with `max |f_k|` it bounds every later `|c_n|`.
    pub fn frontier_mass(&self) -> f64 {
        self.frontier.masses().map(scalar::modulus).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correlation<S: Scalar> {
    pub value: S,
    pub exact: bool,
    /// `|c_n - value| <= error_bound`; zero when exact.
    pub error_bound: f64,
}

/// `c_n = m(f L_wp^n f)`. Levels beyond `depth_cap` are not expanded; if the
/// recursion is still alive there the value is reported as `0` with
/// `exact = false` and a rigorous bound from the surviving mass.
pub fn correlation<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    n: usize,
    wp: f64,
    depth_cap: usize,
) -> Result<Correlation<S>> {
    let mut engine = CorrelationEngine::new(f, gens, wp)?;
    while engine.level() < n {
        if engine.fully_pruned() {
            return Ok(Correlation {
                value: S::zero(),
                exact: true,
                error_bound: 0.0,
            });
        }
        if engine.level() >= depth_cap {
            let bound = engine.frontier_mass() * f.max_coefficient();
            return Ok(Correlation {
                value: S::zero(),
                exact: false,
                error_bound: bound,
            });
        }
        engine.advance();
    }
    Ok(Correlation {
        value: engine.term(),
        exact: true,
        error_bound: 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries<S: Scalar> {
    /// `c_0, ..., c_n`.
    pub terms: Vec<S>,
    pub exact: Vec<bool>,
    /// Bound on `Σ_{m > n} |c_m|`: zero when fully pruned, else a fitted estimate.
    pub tail_bound: f64,
    pub wp: f64,
    /// First level at which the recursion died out, if it did.
    pub pruned_at: Option<usize>,
}

/// `c_0 .. c_{n_max}` in one pass.
pub fn correlation_series<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    n_max: usize,
    depth_cap: usize,
) -> Result<CorrelationSeries<S>> {
    let mut engine = CorrelationEngine::new(f, gens, wp)?;
    let mut terms = Vec::with_capacity(n_max + 1);
    let mut exact = Vec::with_capacity(n_max + 1);
    let mut pruned_at = None;
    terms.push(engine.term());
    exact.push(true);
    for n in 1..=n_max {
        if pruned_at.is_some() {
            terms.push(S::zero());
            exact.push(true);
            continue;
        }
        if n > depth_cap {
            terms.push(S::zero());
            exact.push(false);
            continue;
        }
        engine.advance();
        terms.push(engine.term());
        exact.push(true);
        if engine.fully_pruned() {
            pruned_at = Some(n);
        }
    }
    let tail_bound = if pruned_at.is_some() {
        0.0
    } else {
        let abs: Vec<f64> = terms
            .iter()
            .zip(&exact)
            .skip(1)
            .filter(|(_, e)| **e)
            .map(|(t, _)| t.to_f64().abs())
            .collect();
        fitted_tail(&abs)
    };
    Ok(CorrelationSeries {
        terms,
        exact,
        tail_bound,
        wp,
        pruned_at,
    })
}

/// Geometric extrapolation of `Σ_{m > last} |c_m|` from the last five
/// absolute terms, with a safety factor of two.
pub(crate) fn fitted_tail(abs_terms: &[f64]) -> f64 {
    let start = abs_terms.len().saturating_sub(5);
    let window: Vec<(f64, f64)> = abs_terms[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| ((start + i) as f64, math::ln(*v)))
        .collect();
    if window.is_empty() {
        return 0.0;
    }
    if window.len() < 2 {
        return f64::INFINITY;
    }
    let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1).collect();
    let slope = crate::stats::ols_slope(&xs, &ys);
    let rate = math::exp(slope);
    if !(rate < 1.0) {
        return f64::INFINITY;
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let last = (abs_terms.len() - 1) as f64;
    let fitted_last = math::exp(my + slope * (last - mx));
    2.0 * fitted_last * rate / (1.0 - rate)
}

/// `m_2(f_2 [L^{(2)}_wp]^n f_2)` for `f_2(x, y) = f(x) - f(y)` on `T^4`,
/// via the separation identity `= 2 c_n`. For `n <= 3` the direct sparse
/// computation on `T^4` is carried out and must agree.
pub fn doubled_correlation<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    n: usize,
    wp: f64,
    depth_cap: usize,
) -> Result<S> {
    let c = correlation(f, gens, n, wp, depth_cap)?;
    if !c.exact {
        return Err(Error::InexactRecursion { level: depth_cap });
    }
    let two = S::one() + S::one();
    let value = two * c.value;
    if n <= 3 {
        let direct = doubled_correlation_direct(f, gens, n, wp)?;
        assert!(
            direct.approx_eq(&value, 1e-12),
            "doubled correlation mismatch: direct {direct:?} vs 2c_n {value:?}"
        );
    }
    Ok(value)
}

/// Brute-force `m_2(f_2 [L^{(2)}_wp]^n f_2)` with block-diagonal transfer operators.
pub fn doubled_correlation_direct<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    n: usize,
    wp: f64,
) -> Result<S> {
    check_wp(wp)?;
    let f2 = f.doubled()?;
    let wp_s = S::from_f64(wp).expect("finite wp");
    let mut g = f2.clone();
    for _ in 0..n {
        g = apply_averaged(gens, &wp_s, &g);
    }
    Ok(f2.inner_product(&g)?.re)
}

/// Monte Carlo estimate of `E[f(x_0) f(x_n)]` under the annealed measure.
/// Replicate `j` draws `x_0` and then the symbols from stream `j` of `seed`.
pub fn correlation_mc<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    n: usize,
    wp: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_wp(wp)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let eval = Evaluator::new(f)?;
    let mut values = Vec::with_capacity(samples);
    for j in 0..samples {
        let mut rng = SplitMix64::new(derive_seed(seed, j as u64));
        let mut x = uniform_point(&mut rng);
        let v0 = eval.eval(&x);
        for _ in 0..n {
            let s = rng.bernoulli_symbol(wp);
            x = apply_map(gens.get(s), &x);
        }
        values.push(v0 * eval.eval(&x));
    }
    let (mean, var) = crate::stats::mean_variance(&values);
    Ok((mean, math::sqrt(var / samples as f64)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyRow {
    pub observable: usize,
    pub n: usize,
    /// `||L_wp^n f||_{p,q}`
    pub iterate_norm: f64,
    /// `||f||_{p,q}`
    pub norm: f64,
    /// `||f||_{p-1,q+1}`
    pub weak_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyReport {
    pub rows: Vec<LyRow>,
    /// Empirical witness for the uniform bound `||L^n f|| <= C_1 ||f||`.
    pub sup_ratio: f64,
    pub constants: ConeConstants,
    pub gap_condition: bool,
    pub warnings: Vec<String>,
}

/// Norms of `L_wp^n f` for `n <= n_max` in the `(p, q)` and `(p-1, q+1)` norms.
pub fn lasota_yorke_report(
    fs: &[TrigPoly<f64>],
    gens: &Generators,
    p: f64,
    q: f64,
    n_max: usize,
    wp: f64,
    tol: f64,
) -> Result<LyReport> {
    check_wp(wp)?;
    if p < 1.0 {
        return Err(Error::InvalidParameter("ly-report needs p >= 1".into()));
    }
    let constants = hyperbolicity_constants(gens);
    let gap_condition = constants.gap_condition(p, q);
    let mut warnings = Vec::new();
    if !gap_condition {
        warnings.push(format!(
            "gap condition fails: Lambda^p = {} >= lambda^(p+q) = {}",
            math::powf(constants.big_lambda, p),
            math::powf(constants.lambda, p + q)
        ));
    }
    let mut rows = Vec::new();
    let mut sup_ratio: f64 = 0.0;
    for (idx, f) in fs.iter().enumerate() {
        let norm = f.pq_norm(p, q, tol)?.value;
        let weak_norm = f.pq_norm(p - 1.0, q + 1.0, tol)?.value;
        let mut g = f.clone();
        for n in 0..=n_max {
            if n > 0 {
                g = apply_averaged(gens, &wp, &g);
            }
            let iterate_norm = g.pq_norm(p, q, tol)?.value;
            let ratio = if norm > 0.0 { iterate_norm / norm } else { 0.0 };
            sup_ratio = sup_ratio.max(ratio);
            rows.push(LyRow {
                observable: idx,
                n,
                iterate_norm,
                norm,
                weak_norm,
                ratio,
            });
        }
    }
    Ok(LyReport {
        rows,
        sup_ratio,
        constants,
        gap_condition,
        warnings,
    })
}
