//! Run configuration: TOML schema, the defaults table, overrides and validation.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toral_core::{
    hyperbolicity_constants, validate_generator, Dim, Freq, Generators, IntMatrix, TrigPoly,
};

use crate::error::{CliError, CliResult};

/// Version of the defaults table below; bump whenever a default changes.
pub const DEFAULTS_VERSION: u32 = 1;

pub mod defaults {
    pub const GENERATORS: [[[i64; 2]; 2]; 2] = [[[1, 1], [2, 3]], [[1, 1], [1, 2]]];
    pub const WP: f64 = 0.5;
    pub const P: f64 = 1.0;
    pub const N: usize = 1 << 12;
    pub const M: usize = 20_000;
    pub const DEPTH_CAP: usize = 64;
    pub const TOL: f64 = 1e-10;
    pub const K_MAX: usize = 8;
    pub const QUENCHED_SEEDS: u64 = 20;
    pub const LAMBDA_GRID: [f64; 3] = [0.5, 1.0, 2.0];
    pub const L: f64 = 0.2;
    pub const N_GRID: [usize; 7] = [256, 512, 1024, 2048, 4096, 8192, 16384];
    pub const LDP_N_GRID: [usize; 4] = [256, 512, 1024, 2048];
    pub const M_OMEGA: usize = 200;
    pub const M_X: usize = 100;
    pub const LY_N_MAX: usize = 6;
    pub const LY_TOL: f64 = 1e-6;
    pub const MAX_WORDS: u64 = 1 << 20;
    pub const MAX_ORBITS: u64 = 1 << 27;
    pub const OUTPUT: &str = "toral";
}

/// One observable term. `re`/`im` set the coefficient at `k` directly;
/// `cos`/`sin` add `a cos(2π<k,x>)` / `b sin(2π<k,x>)`, touching both `±k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub k: [i64; 2],
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

impl Term {
    pub fn cosine(k: [i64; 2], amplitude: f64) -> Self {
        Term {
            k,
            re: 0.0,
            im: 0.0,
            cos: amplitude,
            sin: 0.0,
        }
    }
}

fn default_generators() -> [[[i64; 2]; 2]; 2] {
    defaults::GENERATORS
}
fn default_observable() -> Vec<Term> {
    vec![Term::cosine([1, 0], 1.0)]
}
fn default_wp() -> f64 {
    defaults::WP
}
fn default_p() -> f64 {
    defaults::P
}
fn default_seeds() -> Vec<u64> {
    (1..=defaults::QUENCHED_SEEDS).collect()
}
fn default_n() -> usize {
    defaults::N
}
fn default_m() -> usize {
    defaults::M
}
fn default_lambda_grid() -> Vec<f64> {
    defaults::LAMBDA_GRID.to_vec()
}
fn default_wp_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}
fn default_l() -> f64 {
    defaults::L
}
fn default_k_max() -> usize {
    defaults::K_MAX
}
fn default_tol() -> f64 {
    defaults::TOL
}
fn default_depth_cap() -> usize {
    defaults::DEPTH_CAP
}
fn default_n_grid() -> Vec<usize> {
    defaults::N_GRID.to_vec()
}
fn default_ldp_n_grid() -> Vec<usize> {
    defaults::LDP_N_GRID.to_vec()
}
fn default_m_omega() -> usize {
    defaults::M_OMEGA
}
fn default_m_x() -> usize {
    defaults::M_X
}
fn default_ly_n_max() -> usize {
    defaults::LY_N_MAX
}
fn default_ly_tol() -> f64 {
    defaults::LY_TOL
}
fn default_admissible() -> [bool; 2] {
    [true, true]
}
fn default_max_words() -> u64 {
    defaults::MAX_WORDS
}
fn default_max_orbits() -> u64 {
    defaults::MAX_ORBITS
}
fn default_output() -> String {
    defaults::OUTPUT.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_generators")]
    pub generators: [[[i64; 2]; 2]; 2],
    #[serde(default = "default_observable")]
    pub observable: Vec<Term>,
    #[serde(default)]
    pub allow_nonzero_mean: bool,
    #[serde(default = "default_wp")]
    pub wp: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Unset means the smallest integer with `Λ^p < λ^(p+q)`.
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_wp_grid")]
    pub wp_grid: Vec<f64>,
    #[serde(rename = "L", default = "default_l")]
    pub l: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
    /// Rational arithmetic for `variance`, `sweep` and `coboundary`.
    #[serde(default)]
    pub exact: bool,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_ldp_n_grid")]
    pub ldp_n_grid: Vec<usize>,
    #[serde(default = "default_m_omega")]
    pub m_omega: usize,
    #[serde(default = "default_m_x")]
    pub m_x: usize,
    #[serde(default = "default_ly_n_max")]
    pub ly_n_max: usize,
    #[serde(default = "default_ly_tol")]
    pub ly_tol: f64,
    /// Generators allowed in closed-orbit words.
    #[serde(default = "default_admissible")]
    pub admissible: [bool; 2],
    #[serde(default = "default_max_words")]
    pub max_words: u64,
    #[serde(default = "default_max_orbits")]
    pub max_orbits: u64,
    #[serde(default)]
    pub dump_samples: bool,
    #[serde(default = "default_output")]
    pub output: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

/// Command-line values that replace config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seeds: Vec<u64>,
    pub output: Option<String>,
    pub wp: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub lambdas: Vec<f64>,
    pub l: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub k_max: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.seeds.is_empty() {
            self.seeds = o.seeds.clone();
        }
        if let Some(v) = &o.output {
            self.output = v.clone();
        }
        if !o.lambdas.is_empty() {
            self.lambda_grid = o.lambdas.clone();
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { self.$field = v; } )* };
        }
        set!(wp, n, m, l, p, k_max);
        if o.q.is_some() {
            self.q = o.q;
        }
    }

    pub fn generators(&self) -> CliResult<Generators> {
        let [a0, a1] = self.generators;
        Generators::new(IntMatrix::new(a0), IntMatrix::new(a1)).map_err(CliError::from)
    }

    pub fn observable(&self) -> TrigPoly<f64> {
        let mut f = TrigPoly::zero(Dim::T2);
        for t in &self.observable {
            let k = Freq::new2(t.k[0], t.k[1]);
            f.add_term(k, Complex::new(t.re, t.im));
            if t.k == [0, 0] {
                f.add_term(k, Complex::new(t.cos, 0.0));
                continue;
            }
            f.add_term(k, Complex::new(t.cos / 2.0, -t.sin / 2.0));
            f.add_term(k.neg(), Complex::new(t.cos / 2.0, t.sin / 2.0));
        }
        f
    }

    /// Resolves `q` and checks everything, collecting every problem.
    /// Returns warnings that do not prevent a run.
    pub fn validate(&mut self, needs_zero_mean: bool) -> CliResult<Vec<String>> {
        let mut problems = Vec::new();
        let mut warnings = Vec::new();
        for (i, m) in self.generators.iter().enumerate() {
            let report = validate_generator(&IntMatrix::new(*m));
            if !report.accepted() {
                problems.push(format!("generator A{i}: {}", report.summary()));
            }
        }
        let f = self.observable();
        if self
            .observable
            .iter()
            .any(|t| ![t.re, t.im, t.cos, t.sin].iter().all(|v| v.is_finite()))
        {
            problems.push("observable: non-finite coefficient".into());
        } else if !f.is_real() {
            problems.push(
                "observable: coefficients are not Hermitian (use cos/sin terms or give both ±k)"
                    .into(),
            );
        }
        if needs_zero_mean && !self.allow_nonzero_mean && !f.has_zero_mean() {
            problems.push(format!("observable: mean {} is not zero", f.mean().re));
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.wp) {
            problems.push(format!("wp = {} outside [0, 1]", self.wp));
        }
        if let Some(bad) = self.wp_grid.iter().find(|v| !unit(**v)) {
            problems.push(format!("wp_grid value {bad} outside [0, 1]"));
        }
        if !(self.p >= 1.0) {
            problems.push(format!("p = {} must be >= 1", self.p));
        }
        if let Some(q) = self.q {
            if !(q > 0.0) {
                problems.push(format!("q = {q} must be > 0"));
            }
        }
        if self.seeds.is_empty() {
            problems.push("seeds: at least one seed required".into());
        }
        if self.n == 0 {
            problems.push("N must be >= 1".into());
        }
        if self.m < 2 {
            problems.push("M must be >= 2".into());
        }
        if !(self.l > 0.0) {
            problems.push(format!("L = {} must be > 0", self.l));
        }
        if !(self.tol > 0.0) {
            problems.push(format!("tol = {} must be > 0", self.tol));
        }
        if !(self.ly_tol > 0.0) {
            problems.push(format!("ly_tol = {} must be > 0", self.ly_tol));
        }
        if self.k_max == 0 {
            problems.push("k_max must be >= 1".into());
        }
        if self.m_omega < 2 || self.m_x < 2 {
            problems.push("m_omega and m_x must be >= 2".into());
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            problems.push("n_grid must be nonempty with entries >= 1".into());
        }
        if self.ldp_n_grid.is_empty() || self.ldp_n_grid.contains(&0) {
            problems.push("ldp_n_grid must be nonempty with entries >= 1".into());
        }
        if !self.admissible.iter().any(|a| *a) {
            problems.push("admissible: at least one generator must be admissible".into());
        }
        if !problems.is_empty() {
            return Err(CliError::Validation(problems));
        }
        let constants = hyperbolicity_constants(&self.generators()?);
        let q = *self.q.get_or_insert(constants.minimal_q(self.p) as f64);
        if !constants.gap_condition(self.p, q) {
            warnings.push(format!(
                "Lambda^p < lambda^(p+q) fails for p = {}, q = {q}; the norm estimates do not apply",
                self.p
            ));
        }
        Ok(warnings)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_table() {
        let c = RunConfig::default();
        assert_eq!(c.p, 1.0);
        assert_eq!(c.n, 4096);
        assert_eq!(c.m, 20_000);
        assert_eq!(c.depth_cap, 64);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.k_max, 8);
        assert_eq!(c.seeds.len(), 20);
        assert_eq!(c.q, None);
    }

    #[test]
    fn minimal_q_resolved() {
        let mut c = RunConfig::default();
        assert!(c.validate(true).unwrap().is_empty());
        assert_eq!(c.q, Some(3.0));
    }

    #[test]
    fn terms_build_observable() {
        let c = RunConfig::default();
        assert_eq!(
            c.observable(),
            TrigPoly::cosine(Dim::T2, Freq::new2(1, 0), 1.0)
        );
        let s = Term {
            k: [0, 1],
            re: 0.0,
            im: 0.0,
            cos: 0.0,
            sin: 2.0,
        };
        let c = RunConfig {
            observable: vec![s],
            ..RunConfig::default()
        };
        assert_eq!(
            c.observable(),
            TrigPoly::sine(Dim::T2, Freq::new2(0, 1), 2.0)
        );
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut c = RunConfig::from_toml(
            "generators = [[[2, 1], [1, 2]], [[1, 1], [1, 2]]]\nwp = 1.5\nM = 1\n[[observable]]\nk = [1, 0]\nre = 1.0\n",
        )
        .unwrap();
        match c.validate(true) {
            Err(CliError::Validation(p)) => assert_eq!(p.len(), 4, "{p:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonzero_mean_rejected_unless_allowed() {
        let text = "[[observable]]\nk = [0, 0]\ncos = 1.0\n";
        let mut c = RunConfig::from_toml(text).unwrap();
        assert!(c.validate(true).is_err());
        assert!(c.validate(false).is_ok());
        let mut c = RunConfig::from_toml(&format!("allow_nonzero_mean = true\n{text}")).unwrap();
        assert!(c.validate(true).is_ok());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }
}
