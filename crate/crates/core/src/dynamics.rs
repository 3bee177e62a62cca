//! Exact-trajectory Monte Carlo for annealed and quenched statistics.
//!
//! Points live on the 64-bit fixed-point torus and move by exact integer
//! wraparound; only observable values are floating point. Streams:
//!
//! * environment of seed `s`: symbols from `SplitMix64(s)`, one per step;
//! * quenched replicate `j`: `x_0` from `SplitMix64(derive_seed(s, j))`;
//! * annealed replicate `j`: `SplitMix64(derive_seed(s, j))` gives `x_0`
//!   (two words) and then one symbol per step.
//!
//! The step rule is `x_{k+1} = T_{w_k} x_k` with `w_k` the `k`-th symbol
//! (zero-based), so `S_N` consumes `N - 1` symbols.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{apply_map, Generators, IntMatrix, MapWord, TorusPoint};
use crate::math;
use crate::observable::{Dim, TrigPoly};
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::{self, Scalar};
use crate::stats;
use crate::transfer::check_wp;

/// A materialized prefix of a random word.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub wp: f64,
    pub seed: u64,
    pub word: MapWord,
}

impl Environment {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Fraction of zero symbols.
    pub fn zero_fraction(&self) -> f64 {
        if self.word.is_empty() {
            return 0.0;
        }
        let zeros = self.word.symbols().iter().filter(|&&s| s == 0).count();
        zeros as f64 / self.word.len() as f64
    }
}

pub fn sample_environment(wp: f64, n: usize, seed: u64) -> Result<Environment> {
    check_wp(wp)?;
    let mut rng = SplitMix64::new(seed);
    let symbols = (0..n).map(|_| rng.bernoulli_symbol(wp)).collect();
    Ok(Environment {
        wp,
        seed,
        word: MapWord::new(symbols)?,
    })
}

/// Uniform point of the fixed-point torus: two raw 64-bit words.
#[inline]
pub fn uniform_point(rng: &mut SplitMix64) -> TorusPoint {
    let x1 = rng.next_u64();
    let x2 = rng.next_u64();
    TorusPoint::new2(x1, x2)
}

#[derive(Clone, Copy, Debug)]
struct Mode {
    k: [u64; 2],
    cos: f64,
    sin: f64,
}

const TABLE_BITS: u32 = 10;

/// `cos(2πt)` and `sin(2πt)` for a 64-bit fixed-point turn `t`: a table at
/// the top 10 bits plus a Taylor step of size below `2π / 1024`.
#[derive(Clone, Debug)]
struct TurnTable {
    entries: Vec<[f64; 2]>,
}

impl TurnTable {
    fn new() -> Self {
        let n = 1usize << TABLE_BITS;
        let entries = (0..n)
            .map(|i| {
                let theta = math::TAU * i as f64 / n as f64;
                [math::cos(theta), math::sin(theta)]
            })
            .collect();
        TurnTable { entries }
    }

    #[inline]
    fn cos_sin(&self, t: u64) -> (f64, f64) {
        let [c, s] = self.entries[(t >> (64 - TABLE_BITS)) as usize];
        let rest = t & ((1u64 << (64 - TABLE_BITS)) - 1);
        let d = math::TAU * rest as f64 * math::FIXED_SCALE;
        let d2 = d * d;
        let cd = 1.0 - d2 * (0.5 - d2 * (1.0 / 24.0 - d2 / 720.0));
        let sd = d * (1.0 - d2 * (1.0 / 6.0 - d2 / 120.0));
        (c * cd - s * sd, s * cd + c * sd)
    }
}

/// A real observable on `T^2` compiled to `c + Σ a cos(2π<k,x>) + b sin(2π<k,x>)`
/// over one frequency per `±k` pair.
#[derive(Clone, Debug)]
pub struct Evaluator {
    table: TurnTable,
    constant: f64,
    modes: Vec<Mode>,
    sup_bound: f64,
}

impl Evaluator {
    pub fn new<S: Scalar>(f: &TrigPoly<S>) -> Result<Self> {
        if f.dim() != Dim::T2 {
            return Err(Error::DimensionMismatch {
                left: 2,
                right: f.dim().len(),
            });
        }
        if !f.is_real() {
            return Err(Error::NotReal);
        }
        let mut modes = Vec::new();
        let mut constant = 0.0;
        for (k, c) in f.terms() {
            let c = scalar::complex_to_f64(c);
            if k.is_zero() {
                constant = c.re;
            } else if k.is_canonical() {
                let p = k.pair();
                modes.push(Mode {
                    k: [p[0] as u64, p[1] as u64],
                    cos: 2.0 * c.re,
                    sin: -2.0 * c.im,
                });
            }
        }
        Ok(Evaluator {
            table: TurnTable::new(),
            constant,
            modes,
            sup_bound: f.coefficient_l1(),
        })
    }

    #[inline]
    pub fn eval(&self, x: &TorusPoint) -> f64 {
        let c = x.coords();
        self.eval_raw(c[0], c[1])
    }

    #[inline]
    fn eval_raw(&self, x1: u64, x2: u64) -> f64 {
        let mut acc = self.constant;
        for m in &self.modes {
            let ph = m.k[0]
                .wrapping_mul(x1)
                .wrapping_add(m.k[1].wrapping_mul(x2));
            let (c, s) = self.table.cos_sin(ph);
            acc += m.cos * c + m.sin * s;
        }
        acc
    }

    /// `Σ |f_k|`, an upper bound for `sup |f|`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.modes.is_empty()
    }
}

/// `S_N = Σ_{k<N} f(x_k)` along the environment's word.
pub fn birkhoff_sum<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    env: &Environment,
    x0: &TorusPoint,
    n: usize,
) -> Result<f64> {
    if n > env.len() {
        return Err(Error::InvalidParameter(
            "N exceeds the environment length".into(),
        ));
    }
    let eval = Evaluator::new(f)?;
    let mut x = *x0;
    let mut sum = 0.0;
    for k in 0..n {
        sum += eval.eval(&x);
        if k + 1 < n {
            x = apply_map(gens.get(env.word.symbols()[k]), &x);
        }
    }
    Ok(sum)
}

fn check_horizons(horizons: &[usize]) -> Result<usize> {
    if horizons.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("horizons must be sorted".into()));
    }
    Ok(horizons.last().copied().unwrap_or(0))
}

/// Runs one path and records `S_h` for each horizon `h` (sorted ascending).
#[inline]
fn run_path(
    eval: &Evaluator,
    maps: &[[u64; 4]; 2],
    x: TorusPoint,
    horizons: &[usize],
    out: &mut [f64],
    mut symbol: impl FnMut(usize) -> u8,
) {
    let n_max = horizons.last().copied().unwrap_or(0);
    let mut next = 0;
    while next < horizons.len() && horizons[next] == 0 {
        out[next] = 0.0;
        next += 1;
    }
    let (mut x1, mut x2) = (x.coords()[0], x.coords()[1]);
    let mut sum = 0.0;
    for k in 0..n_max {
        sum += eval.eval_raw(x1, x2);
        while next < horizons.len() && horizons[next] == k + 1 {
            out[next] = sum;
            next += 1;
        }
        if k + 1 < n_max {
            let m = &maps[symbol(k) as usize];
            (x1, x2) = (
                m[0].wrapping_mul(x1).wrapping_add(m[1].wrapping_mul(x2)),
                m[2].wrapping_mul(x1).wrapping_add(m[3].wrapping_mul(x2)),
            );
        }
    }
}

/// Matrix entries in two's complement, for wrapping fixed-point products.
fn raw_maps(gens: &Generators) -> [[u64; 4]; 2] {
    let raw = |m: &IntMatrix| {
        let r = m.rows();
        [
            r[0][0] as u64,
            r[0][1] as u64,
            r[1][0] as u64,
            r[1][1] as u64,
        ]
    };
    [raw(gens.get(0)), raw(gens.get(1))]
}

/// Visits `(j, [S_h for h in horizons])` for `m` uniform starts along one word.
pub fn quenched_paths(
    eval: &Evaluator,
    gens: &Generators,
    word: &MapWord,
    horizons: &[usize],
    m: usize,
    seed: u64,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    let n_max = check_horizons(horizons)?;
    if n_max > word.len() + 1 && n_max > 0 {
        return Err(Error::InvalidParameter(
            "horizon exceeds the environment length".into(),
        ));
    }
    let symbols = word.symbols();
    let maps = raw_maps(gens);
    let mut out = vec![0.0; horizons.len()];
    for j in 0..m {
        let mut rng = SplitMix64::new(derive_seed(seed, j as u64));
        let x = uniform_point(&mut rng);
        run_path(eval, &maps, x, horizons, &mut out, |k| symbols[k]);
        visit(j, &out);
    }
    Ok(())
}

/// Visits `(j, [S_h for h in horizons])` for `m` independent (word, start) pairs.
pub fn annealed_paths(
    eval: &Evaluator,
    gens: &Generators,
    wp: f64,
    horizons: &[usize],
    m: usize,
    seed: u64,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    check_wp(wp)?;
    check_horizons(horizons)?;
    let maps = raw_maps(gens);
    let mut out = vec![0.0; horizons.len()];
    for j in 0..m {
        let mut rng = SplitMix64::new(derive_seed(seed, j as u64));
        let x = uniform_point(&mut rng);
        run_path(eval, &maps, x, horizons, &mut out, |_| {
            rng.bernoulli_symbol(wp)
        });
        visit(j, &out);
    }
    Ok(())
}

/// Sample mean of `e^{iλ S_N / sqrt(N)}` with componentwise standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharFnEstimate {
    pub value: Complex<f64>,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub count: usize,
}

impl CharFnEstimate {
    /// `sqrt(se_re² + se_im²)`
    pub fn stderr(&self) -> f64 {
        math::sqrt(self.stderr_re * self.stderr_re + self.stderr_im * self.stderr_im)
    }
}

#[derive(Clone, Debug, Default)]
struct CharFnAccumulator {
    re: f64,
    im: f64,
    re2: f64,
    im2: f64,
    count: usize,
}

impl CharFnAccumulator {
    #[inline]
    fn push(&mut self, theta: f64) {
        let (c, s) = (math::cos(theta), math::sin(theta));
        self.re += c;
        self.im += s;
        self.re2 += c * c;
        self.im2 += s * s;
        self.count += 1;
    }

    fn finish(&self) -> CharFnEstimate {
        let n = self.count as f64;
        let (mr, mi) = (self.re / n, self.im / n);
        let se = |sum2: f64, mean: f64| {
            if self.count < 2 {
                return 0.0;
            }
            let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
            math::sqrt(var / n)
        };
        CharFnEstimate {
            value: Complex::new(mr, mi),
            stderr_re: se(self.re2, mr),
            stderr_im: se(self.im2, mi),
            count: self.count,
        }
    }
}

fn check_count(m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::InvalidParameter(alloc::format!(
            "sample count must be >= {min}"
        )));
    }
    Ok(())
}

fn char_fn_grid(
    paths: impl FnOnce(&mut dyn FnMut(usize, &[f64])) -> Result<()>,
    lambdas: &[f64],
    horizons: &[usize],
) -> Result<Vec<Vec<CharFnEstimate>>> {
    let mut acc = vec![vec![CharFnAccumulator::default(); lambdas.len()]; horizons.len()];
    let scales: Vec<f64> = horizons
        .iter()
        .map(|&n| {
            if n == 0 {
                0.0
            } else {
                1.0 / math::sqrt(n as f64)
            }
        })
        .collect();
    paths(&mut |_, sums| {
        for (h, s) in sums.iter().enumerate() {
            for (l, lam) in lambdas.iter().enumerate() {
                acc[h][l].push(lam * s * scales[h]);
            }
        }
    })?;
    Ok(acc
        .iter()
        .map(|row| row.iter().map(CharFnAccumulator::finish).collect())
        .collect())
}

/// `m(e^{iλ S_N / sqrt(N)})` at fixed word, as `[horizon][lambda]`.
pub fn quenched_char_fn_grid<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    env: &Environment,
    lambdas: &[f64],
    horizons: &[usize],
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<CharFnEstimate>>> {
    check_count(m, 1)?;
    let eval = Evaluator::new(f)?;
    char_fn_grid(
        |visit| quenched_paths(&eval, gens, &env.word, horizons, m, seed, visit),
        lambdas,
        horizons,
    )
}

pub fn quenched_char_fn<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    env: &Environment,
    lambda: f64,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<CharFnEstimate> {
    Ok(quenched_char_fn_grid(f, gens, env, &[lambda], &[n], m, seed)?[0][0])
}

/// `E_wp(e^{iλ S_N / sqrt(N)})` over independent (word, start) pairs, as `[horizon][lambda]`.
pub fn annealed_char_fn_grid<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    lambdas: &[f64],
    horizons: &[usize],
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<CharFnEstimate>>> {
    check_count(m, 1)?;
    let eval = Evaluator::new(f)?;
    char_fn_grid(
        |visit| annealed_paths(&eval, gens, wp, horizons, m, seed, visit),
        lambdas,
        horizons,
    )
}

pub fn annealed_char_fn<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    lambda: f64,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<CharFnEstimate> {
    Ok(annealed_char_fn_grid(f, gens, wp, &[lambda], &[n], m, seed)?[0][0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / count)`
    pub stderr: f64,
    /// Standard error of `variance`, from the fourth central moment.
    pub variance_stderr: f64,
    pub samples: Option<Vec<f64>>,
}

impl SampleStats {
    pub fn from_samples(samples: Vec<f64>, keep: bool) -> Result<Self> {
        check_count(samples.len(), 2)?;
        let n = samples.len() as f64;
        let (mean, variance) = stats::mean_variance(&samples);
        let m4 = samples
            .iter()
            .map(|x| {
                let d2 = (x - mean) * (x - mean);
                d2 * d2
            })
            .sum::<f64>()
            / n;
        let var_of_var = ((m4 - variance * variance * (n - 3.0) / (n - 1.0)) / n).max(0.0);
        Ok(SampleStats {
            count: samples.len(),
            mean,
            variance,
            stderr: math::sqrt(variance / n),
            variance_stderr: math::sqrt(var_of_var),
            samples: if keep { Some(samples) } else { None },
        })
    }
}

/// Collects `S_N / sqrt(N)` per replicate.
fn normalized_sums(
    paths: impl FnOnce(&mut dyn FnMut(usize, &[f64])) -> Result<()>,
    n: usize,
    m: usize,
) -> Result<Vec<f64>> {
    let scale = 1.0 / math::sqrt(n as f64);
    let mut out = Vec::with_capacity(m);
    paths(&mut |_, s| out.push(s[0] * scale))?;
    Ok(out)
}

/// Statistics of `S_N / sqrt(N)` over `m` uniform starts along one word.
pub fn empirical_variance_quenched<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    env: &Environment,
    n: usize,
    m: usize,
    seed: u64,
    keep_samples: bool,
) -> Result<SampleStats> {
    check_count(m, 2)?;
    check_count(n, 1)?;
    let eval = Evaluator::new(f)?;
    let samples = normalized_sums(
        |v| quenched_paths(&eval, gens, &env.word, &[n], m, seed, v),
        n,
        m,
    )?;
    SampleStats::from_samples(samples, keep_samples)
}

/// Statistics of `S_N / sqrt(N)` over `m` independent (word, start) pairs.
pub fn empirical_variance_annealed<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    n: usize,
    m: usize,
    seed: u64,
    keep_samples: bool,
) -> Result<SampleStats> {
    check_count(m, 2)?;
    check_count(n, 1)?;
    let eval = Evaluator::new(f)?;
    let samples = normalized_sums(|v| annealed_paths(&eval, gens, wp, &[n], m, seed, v), n, m)?;
    SampleStats::from_samples(samples, keep_samples)
}

/// Empirical `P(|S_N / N| >= L)` with a 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEstimate {
    pub n: usize,
    pub hits: u64,
    pub trials: u64,
    pub probability: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Tail estimates for several horizons from shared paths.
pub fn large_deviation_tails<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    l: f64,
    horizons: &[usize],
    m: usize,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("L must be positive".into()));
    }
    if horizons.contains(&0) {
        return Err(Error::InvalidParameter("horizons must be >= 1".into()));
    }
    check_count(m, 1)?;
    let eval = Evaluator::new(f)?;
    let mut hits = vec![0u64; horizons.len()];
    // |S_N / N| <= sup |f| < L cannot be exceeded.
    if eval.sup_bound() >= l {
        let thresholds: Vec<f64> = horizons.iter().map(|&n| l * n as f64).collect();
        annealed_paths(&eval, gens, wp, horizons, m, seed, |_, sums| {
            for (i, s) in sums.iter().enumerate() {
                if s.abs() >= thresholds[i] {
                    hits[i] += 1;
                }
            }
        })?;
    }
    Ok(horizons
        .iter()
        .zip(hits)
        .map(|(&n, k)| {
            let (lower, upper) = stats::wilson_interval(k, m as u64, stats::Z95);
            TailEstimate {
                n,
                hits: k,
                trials: m as u64,
                probability: k as f64 / m as f64,
                lower,
                upper,
            }
        })
        .collect())
}

pub fn large_deviation_tail<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    l: f64,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<TailEstimate> {
    Ok(large_deviation_tails(f, gens, wp, l, &[n], m, seed)?[0])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedMoment {
    /// Debiased estimate of `E_wp |m(e^{iλ S_N / sqrt(N)})|²`.
    pub estimate: f64,
    pub stderr: f64,
    /// Plain outer mean of `|inner average|²`.
    pub raw: f64,
}

/// Outer average over `m_omega` words of the squared inner average over
/// `m_x` starts. Word `o` comes from stream `2o` of `seed`, its starts from
/// the substreams of stream `2o + 1`.
///
/// `|ĉ|²` overestimates `|c|²` by `(1 - |c|²) / m_x` in expectation; each
/// word contributes the unbiased `|ĉ|² - (1 - |ĉ|²) / (m_x - 1)`.
#[allow(clippy::too_many_arguments)]
pub fn paired_second_moment<S: Scalar>(
    f: &TrigPoly<S>,
    gens: &Generators,
    wp: f64,
    lambda: f64,
    n: usize,
    m_omega: usize,
    m_x: usize,
    seed: u64,
) -> Result<PairedMoment> {
    check_wp(wp)?;
    check_count(m_omega, 1)?;
    check_count(m_x, 1)?;
    let eval = Evaluator::new(f)?;
    let mut debiased = Vec::with_capacity(m_omega);
    let mut raw = 0.0;
    let scale = if n == 0 {
        0.0
    } else {
        lambda / math::sqrt(n as f64)
    };
    for o in 0..m_omega {
        let env = sample_environment(wp, n, derive_seed(seed, 2 * o as u64))?;
        let mut acc = CharFnAccumulator::default();
        quenched_paths(
            &eval,
            gens,
            &env.word,
            &[n],
            m_x,
            derive_seed(seed, 2 * o as u64 + 1),
            |_, s| acc.push(scale * s[0]),
        )?;
        let c = acc.finish().value;
        let sq = c.norm_sqr();
        raw += sq;
        debiased.push(if m_x > 1 {
            sq - (1.0 - sq) / (m_x as f64 - 1.0)
        } else {
            sq
        });
    }
    let (estimate, var) = stats::mean_variance(&debiased);
    let stderr = if m_omega > 1 {
        math::sqrt(var / m_omega as f64)
    } else {
        0.0
    };
    Ok(PairedMoment {
        estimate,
        stderr,
        raw: raw / m_omega as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IntMatrix;
    use crate::observable::Freq;

    fn gens() -> Generators {
        Generators::new(
            IntMatrix::new([[1, 1], [2, 3]]),
            IntMatrix::new([[1, 1], [1, 2]]),
        )
        .unwrap()
    }

    fn anchor() -> TrigPoly<f64> {
        TrigPoly::cosine(Dim::T2, Freq::new2(1, 0), 1.0)
    }

    fn coboundary() -> TrigPoly<f64> {
        anchor()
            .sub(&TrigPoly::cosine(Dim::T2, Freq::new2(1, 1), 1.0))
            .unwrap()
    }

    #[test]
    fn degenerate_environments() {
        assert!(sample_environment(1.0, 50, 3)
            .unwrap()
            .word
            .symbols()
            .iter()
            .all(|&s| s == 0));
        assert!(sample_environment(0.0, 50, 3)
            .unwrap()
            .word
            .symbols()
            .iter()
            .all(|&s| s == 1));
        let a = sample_environment(0.5, 100, 9).unwrap();
        assert_eq!(a, sample_environment(0.5, 100, 9).unwrap());
    }

    #[test]
    fn birkhoff_examples() {
        let env = sample_environment(1.0, 64, 0).unwrap();
        let half = TorusPoint::from_fractions([(1, 2), (0, 1)]);
        assert_eq!(
            birkhoff_sum(&anchor(), &gens(), &env, &half, 64).unwrap(),
            -64.0
        );
        let x = TorusPoint::new2(12345, 987654321);
        let v = anchor().evaluate_real(&x).unwrap();
        assert_eq!(birkhoff_sum(&anchor(), &gens(), &env, &x, 1).unwrap(), v);
        let zero = TrigPoly::<f64>::zero(Dim::T2);
        assert_eq!(birkhoff_sum(&zero, &gens(), &env, &x, 10).unwrap(), 0.0);
        assert!(birkhoff_sum(&zero, &gens(), &env, &x, 65).is_err());
    }

    #[test]
    fn evaluator_matches_direct_evaluation() {
        let f = coboundary()
            .add(&TrigPoly::sine(Dim::T2, Freq::new2(2, -3), 0.7))
            .unwrap();
        let eval = Evaluator::new(&f).unwrap();
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let x = uniform_point(&mut rng);
            assert!((eval.eval(&x) - f.evaluate_real(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn turn_table_accuracy() {
        let table = TurnTable::new();
        let mut rng = SplitMix64::new(17);
        for i in 0..20_000 {
            let t = if i < 4 {
                [0, 1 << 62, 1 << 63, u64::MAX][i]
            } else {
                rng.next_u64()
            };
            let theta = math::TAU * t as f64 * math::FIXED_SCALE;
            let (c, s) = table.cos_sin(t);
            assert!((c - math::cos(theta)).abs() < 2e-15, "{t}");
            assert!((s - math::sin(theta)).abs() < 2e-15, "{t}");
        }
    }

    #[test]
    fn coboundary_sums_telescope() {
        // S_N = g(x_0) - g(x_N) with g = cos(2π x_1).
        let env = sample_environment(0.5, 8, 21).unwrap();
        let g = anchor();
        let x0 = TorusPoint::new2(0x1234_5678_9abc_def0, 0x0fed_cba9_8765_4321);
        let mut x = x0;
        for k in 0..4 {
            x = apply_map(gens().get(env.word.symbols()[k]), &x);
        }
        let s5 = birkhoff_sum(&coboundary(), &gens(), &env, &x0, 5).unwrap();
        let expected = g.evaluate_real(&x0).unwrap()
            - g.evaluate_real(&apply_map(gens().get(env.word.symbols()[4]), &x))
                .unwrap();
        assert!((s5 - expected).abs() < 1e-12);
    }

    #[test]
    fn char_fn_at_zero_is_one() {
        let env = sample_environment(0.5, 64, 1).unwrap();
        let q = quenched_char_fn(&anchor(), &gens(), &env, 0.0, 64, 50, 2).unwrap();
        assert_eq!(q.value, Complex::new(1.0, 0.0));
        let a = annealed_char_fn(&anchor(), &gens(), 0.5, 0.0, 64, 50, 2).unwrap();
        assert_eq!(a.value, Complex::new(1.0, 0.0));
        let p = paired_second_moment(&anchor(), &gens(), 0.5, 0.0, 64, 5, 10, 2).unwrap();
        assert_eq!(p.estimate, 1.0);
    }

    #[test]
    fn grid_agrees_with_single_calls() {
        let grid =
            annealed_char_fn_grid(&anchor(), &gens(), 0.5, &[0.5, 1.0], &[16, 64], 200, 4).unwrap();
        let single = annealed_char_fn(&anchor(), &gens(), 0.5, 1.0, 64, 200, 4).unwrap();
        assert_eq!(grid[1][1], single);
    }

    #[test]
    fn zero_observable_has_zero_variance_and_tail() {
        let z = TrigPoly::<f64>::zero(Dim::T2);
        let s = empirical_variance_annealed(&z, &gens(), 0.5, 32, 100, 1, false).unwrap();
        assert_eq!((s.mean, s.variance), (0.0, 0.0));
        let t = large_deviation_tail(&z, &gens(), 0.5, 0.1, 32, 100, 1).unwrap();
        assert_eq!(t.hits, 0);
        let t = large_deviation_tail(&anchor(), &gens(), 0.5, 1.5, 32, 100, 1).unwrap();
        assert_eq!(t.probability, 0.0);
    }

    #[test]
    fn anchor_variance_small_run() {
        let s = empirical_variance_annealed(&anchor(), &gens(), 0.5, 256, 4000, 8, true).unwrap();
        assert!((s.variance - 0.5).abs() < 5.0 * s.variance_stderr, "{s:?}");
        assert_eq!(s.samples.as_ref().unwrap().len(), 4000);
    }
}
