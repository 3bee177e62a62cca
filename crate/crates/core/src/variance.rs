//! Annealed variance `Σ²(wp) = c_0 + 2 Σ_{n>=1} c_n` and its polynomial
//! dependence on `wp`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::Generators;
use crate::observable::TrigPoly;
use crate::scalar::{self, Scalar};
use crate::transfer::{
    check_correlation_input, check_wp, fitted_tail, CorrelationEngine, CorrelationSeries, Frontier,
    Mass,
};

const MIN_TERMS_FOR_FIT: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceResult<S: Scalar> {
    pub sigma2: S,
    pub series: CorrelationSeries<S>,
    /// Index of the last correlation term included.
    pub n_used: usize,
    /// Bound on `|Σ² - sigma2|` (twice the series tail).
    pub tail_bound: f64,
    pub wp: f64,
    /// The recursion died out: `sigma2` is the exact value.
    pub certified: bool,
    /// Stopped on the tolerance test rather than by exhaustion or the depth cap.
    pub converged: bool,
}

/// Sums correlation terms until the recursion is exhausted or
/// `|c_n| + tail < tol`. Hitting `depth_cap` first returns an uncertified,
/// unconverged result.
pub fn annealed_variance<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    tol: f64,
    depth_cap: usize,
) -> Result<VarianceResult<S>> {
    if f.is_zero() {
        return Err(Error::InvalidParameter(
            "observable is identically zero".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut engine = CorrelationEngine::new(f, gens, wp)?;
    let mut terms = vec![engine.term()];
    let mut abs_terms: Vec<f64> = Vec::new();
    let mut certified = engine.fully_pruned();
    let mut converged = false;
    let mut tail = 0.0;
    while !certified && engine.level() < depth_cap {
        engine.advance();
        let c = engine.term();
        abs_terms.push(c.to_f64().abs());
        terms.push(c);
        if engine.fully_pruned() {
            certified = true;
            break;
        }
        if abs_terms.len() >= MIN_TERMS_FOR_FIT {
            tail = fitted_tail(&abs_terms);
            if abs_terms[abs_terms.len() - 1] + tail < tol {
                converged = true;
                break;
            }
        }
    }
    if certified {
        tail = 0.0;
    } else if !converged {
        tail = fitted_tail(&abs_terms);
    }
    let n_used = terms.len() - 1;
    let two = S::one() + S::one();
    let mut sigma2 = terms[0].clone();
    for c in &terms[1..] {
        sigma2 = sigma2 + two.clone() * c.clone();
    }
    let series = CorrelationSeries {
        exact: vec![true; terms.len()],
        terms,
        tail_bound: tail,
        wp,
        pruned_at: if certified { Some(n_used) } else { None },
    };
    Ok(VarianceResult {
        sigma2,
        series,
        n_used,
        tail_bound: 2.0 * tail,
        wp,
        certified,
        converged,
    })
}

/// Coefficients of `c_0 + 2 Σ_{m<=n} c_m` as a polynomial in `wp`
/// (`coefficients[j]` multiplies `wp^j`).
#[derive(Clone, Debug, PartialEq)]
pub struct VariancePolynomial<S: Scalar> {
    pub coefficients: Vec<S>,
    pub n: usize,
}

impl<S: Scalar> VariancePolynomial<S> {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn evaluate(&self, wp: &S) -> S {
        self.coefficients
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * wp.clone() + c.clone())
    }
}

/// Complex coefficients of a polynomial in `wp`.
#[derive(Clone, Debug)]
struct WpPoly<S: Scalar>(Vec<Complex<S>>);

impl<S: Scalar> WpPoly<S> {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(scalar::is_zero_complex) {
            self.0.pop();
        }
        self
    }

    /// `wp · v`
    fn times_wp(&self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(Complex::zero());
        out.extend(self.0.iter().cloned());
        WpPoly(out)
    }

    /// `(1 - wp) · v`
    fn times_complement(&self) -> Self {
        let shifted = self.times_wp();
        let mut out = self.0.clone();
        out.push(Complex::zero());
        for (o, s) in out.iter_mut().zip(shifted.0) {
            *o = o.clone() - s;
        }
        WpPoly(out).trim()
    }
}

impl<S: Scalar> Mass for WpPoly<S> {
    fn accumulate(&mut self, other: Self) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), Complex::zero());
        }
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a = a.clone() + b;
        }
        let trimmed = core::mem::take(&mut self.0);
        *self = WpPoly(trimmed).trim();
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(scalar::is_zero_complex)
    }
}

/// Carries `wp`-monomials through the correlation recursion for `n` levels.
/// Fails if the recursion is still alive past `depth_cap` before level `n`.
pub fn variance_polynomial<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    n: usize,
    depth_cap: usize,
) -> Result<VariancePolynomial<S>> {
    check_correlation_input(f)?;
    let mut frontier: Frontier<WpPoly<S>> = Frontier::new(f, gens, |c| WpPoly(vec![c.clone()]));
    let mut total: Vec<S> = Vec::new();
    let two = S::one() + S::one();
    for m in 0..=n {
        if m > 0 {
            if frontier.is_empty() {
                break;
            }
            if m > depth_cap {
                return Err(Error::InexactRecursion { level: depth_cap });
            }
            frontier.advance(|v, i| {
                Some(if i == 0 {
                    v.times_wp()
                } else {
                    v.times_complement()
                })
            });
        }
        let c_m: Vec<Complex<S>> = frontier.pair_with(f, Vec::new(), |acc, v, c| {
            if acc.len() < v.0.len() {
                acc.resize(v.0.len(), Complex::zero());
            }
            for (a, b) in acc.iter_mut().zip(&v.0) {
                *a = a.clone() + b.clone() * c.clone();
            }
        });
        let weight = if m == 0 { S::one() } else { two.clone() };
        if total.len() < c_m.len() {
            total.resize(c_m.len(), S::zero());
        }
        for (t, c) in total.iter_mut().zip(c_m) {
            *t = t.clone() + weight.clone() * c.re;
        }
    }
    while total.last().is_some_and(|c| c.is_zero()) {
        total.pop();
    }
    Ok(VariancePolynomial {
        coefficients: total,
        n,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<S: Scalar> {
    pub wp: f64,
    pub result: Result<VarianceResult<S>>,
}

/// One row per grid value; failures are kept per row.
pub fn variance_sweep<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp_grid: &[f64],
    tol: f64,
    depth_cap: usize,
) -> Vec<SweepRow<S>> {
    wp_grid
        .iter()
        .map(|&wp| SweepRow {
            wp,
            result: check_wp(wp).and_then(|_| annealed_variance(f, gens, wp, tol, depth_cap)),
        })
        .collect()
}
