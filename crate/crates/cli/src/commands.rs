//! Command dispatch. Each command returns a data table plus JSON results;
//! [`run_config`] writes them next to the metadata.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use toral_core::dynamics::{
    annealed_char_fn_grid, empirical_variance_annealed, empirical_variance_quenched,
    large_deviation_tails, paired_second_moment, sample_environment,
};
use toral_core::rigidity::{coboundary_obstruction, SearchBudget, Verdict};
use toral_core::rng::derive_seed;
use toral_core::stats::{self, ks_critical_1pct, ks_distance_to_normal, mann_kendall, Z95};
use toral_core::transfer::lasota_yorke_report;
use toral_core::variance::{annealed_variance, variance_sweep, VarianceResult};
use toral_core::{
    classify_conjugate_product, hyperbolicity_constants, validate_generator, Generators, IntMatrix,
    Rational, Scalar, TrigPoly,
};

use crate::config::{Overrides, RunConfig, DEFAULTS_VERSION};
use crate::error::{CliError, CliResult};
use crate::output::{artifact_path, write_csv, write_json, write_samples, Cell, Table};

pub const COMMANDS: [&str; 10] = [
    "constants",
    "variance",
    "sweep",
    "ly-report",
    "simulate-annealed",
    "simulate-quenched",
    "char-fn",
    "paired-moment",
    "ldp",
    "coboundary",
];

/// Files written by one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub samples: Option<PathBuf>,
}

struct Outcome {
    table: Table,
    results: Value,
    certified: Value,
    samples: Option<Vec<f64>>,
}

impl Outcome {
    fn new(table: Table, results: Value) -> Self {
        Outcome {
            table,
            results,
            certified: Value::Null,
            samples: None,
        }
    }
}

/// Loads the config (defaults when `config_path` is `None`), applies the
/// overrides and runs `command`.
pub fn run(
    command: &str,
    config_path: Option<&Path>,
    overrides: &Overrides,
) -> CliResult<Artifacts> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::UnknownCommand(command.to_string()));
    }
    let mut config = match config_path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    config.apply(overrides);
    run_config(command, config)
}

pub fn run_config(command: &str, mut config: RunConfig) -> CliResult<Artifacts> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::UnknownCommand(command.to_string()));
    }
    let needs_zero_mean = !matches!(command, "constants" | "ly-report");
    let warnings = config.validate(needs_zero_mean)?;
    let gens = config.generators()?;
    let f = config.observable();
    let outcome = match command {
        "constants" => constants(&config, &gens),
        "variance" => variance(&config, &gens, &f)?,
        "sweep" => sweep(&config, &gens, &f)?,
        "ly-report" => ly_report(&config, &gens, &f)?,
        "simulate-annealed" => simulate_annealed(&config, &gens, &f)?,
        "simulate-quenched" => simulate_quenched(&config, &gens, &f)?,
        "char-fn" => char_fn(&config, &gens, &f)?,
        "paired-moment" => paired_moment(&config, &gens, &f)?,
        "ldp" => ldp(&config, &gens, &f)?,
        "coboundary" => coboundary(&config, &gens, &f)?,
        _ => unreachable!(),
    };
    let csv = artifact_path(&config.output, &format!("{command}.csv"));
    let json_path = artifact_path(&config.output, &format!("{command}.json"));
    write_csv(&csv, &outcome.table)?;
    let samples = match (&outcome.samples, config.dump_samples) {
        (Some(s), true) => {
            let path = artifact_path(&config.output, "samples.bin");
            write_samples(&path, s)?;
            Some(path)
        }
        _ => None,
    };
    let meta = json!({
        "command": command,
        "config_hash": config.hash(),
        "seeds": config.seeds,
        "versions": {
            "toral-cli": env!("CARGO_PKG_VERSION"),
            "toral-core": toral_core::VERSION,
            "defaults": DEFAULTS_VERSION,
        },
        "certified": outcome.certified,
        "warnings": warnings,
        "results": outcome.results,
        "config": config,
    });
    write_json(&json_path, &meta)?;
    Ok(Artifacts {
        csv,
        json: json_path,
        samples,
    })
}

fn matrix_json(m: &IntMatrix) -> Value {
    json!(m.rows())
}

fn constants(config: &RunConfig, gens: &Generators) -> Outcome {
    let c = hyperbolicity_constants(gens);
    let (product, class) = classify_conjugate_product(gens);
    let q = config.q.expect("q resolved");
    let mut table = Table::new(&["quantity", "value"]);
    for (name, value) in [
        ("lambda", c.lambda),
        ("Lambda", c.big_lambda),
        ("beta", c.beta),
        ("c0", c.c0),
        ("p", config.p),
        ("q", q),
        ("minimal_q", c.minimal_q(config.p) as f64),
        ("Lambda^p", c.big_lambda.powf(config.p)),
        ("lambda^(p+q)", c.lambda.powf(config.p + q)),
    ] {
        table.push(vec![name.into(), value.into()]);
    }
    let reports: Vec<Value> = gens
        .maps()
        .iter()
        .map(|m| {
            let r = validate_generator(m);
            json!({"matrix": matrix_json(m), "det": r.det as i64, "trace": r.trace as i64, "accepted": r.accepted()})
        })
        .collect();
    let results = json!({
        "lambda": c.lambda,
        "Lambda_": c.big_lambda,
        "beta": c.beta,
        "c0": c.c0,
        "minimal_q": c.minimal_q(config.p),
        "gap_condition": c.gap_condition(config.p, q),
        "product": matrix_json(&product),
        "classification": class.as_str(),
        "generators": reports,
    });
    Outcome::new(table, results)
}

const VARIANCE_HEADER: [&str; 5] = ["wp", "sigma2", "n_used", "tail_bound", "certified"];

fn variance_row<S: Scalar>(r: &VarianceResult<S>) -> Vec<Cell> {
    vec![
        r.wp.into(),
        r.sigma2.to_f64().into(),
        r.n_used.into(),
        r.tail_bound.into(),
        r.certified.into(),
    ]
}

fn variance_json<S: Scalar>(r: &VarianceResult<S>) -> Value {
    json!({
        "wp": r.wp,
        "sigma2": r.sigma2.to_f64(),
        "sigma2_exact": r.sigma2.to_exact_string(),
        "n_used": r.n_used,
        "tail_bound": r.tail_bound,
        "certified": r.certified,
        "converged": r.converged,
        "correlations": r.series.terms.iter().map(|c| c.to_exact_string()).collect::<Vec<_>>(),
    })
}

fn rational_observable(f: &TrigPoly<f64>) -> CliResult<TrigPoly<Rational>> {
    Ok(TrigPoly::<Rational>::from_f64(f)?)
}

fn variance_outcome<S: Scalar + Send + Sync>(
    config: &RunConfig,
    gens: &Generators,
    f: &TrigPoly<S>,
) -> CliResult<Outcome> {
    let r = annealed_variance(f, gens, config.wp, config.tol, config.depth_cap)?;
    let mut table = Table::new(&VARIANCE_HEADER);
    table.push(variance_row(&r));
    let mut out = Outcome::new(table, variance_json(&r));
    out.certified = json!(r.certified);
    Ok(out)
}

fn variance(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    if config.exact {
        variance_outcome(config, gens, &rational_observable(f)?)
    } else {
        variance_outcome(config, gens, f)
    }
}

fn sweep_outcome<S: Scalar + Send + Sync>(
    config: &RunConfig,
    gens: &Generators,
    f: &TrigPoly<S>,
) -> CliResult<Outcome> {
    let rows: Vec<_> = config
        .wp_grid
        .par_iter()
        .map(|&wp| variance_sweep(f, gens, &[wp], config.tol, config.depth_cap).remove(0))
        .collect();
    let mut table = Table::new(&VARIANCE_HEADER);
    let mut results = Vec::new();
    let mut certified = Vec::new();
    for row in &rows {
        match &row.result {
            Ok(r) => {
                table.push(variance_row(r));
                results.push(variance_json(r));
                certified.push(json!(r.certified));
            }
            Err(e) => {
                table.push(vec![
                    row.wp.into(),
                    f64::NAN.into(),
                    0usize.into(),
                    f64::NAN.into(),
                    false.into(),
                ]);
                results.push(json!({"wp": row.wp, "error": e.to_string()}));
                certified.push(json!(false));
            }
        }
    }
    let mut out = Outcome::new(table, json!({ "rows": results }));
    out.certified = Value::Array(certified);
    Ok(out)
}

fn sweep(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    if config.exact {
        sweep_outcome(config, gens, &rational_observable(f)?)
    } else {
        sweep_outcome(config, gens, f)
    }
}

fn ly_report(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    let q = config.q.expect("q resolved");
    let report = lasota_yorke_report(
        std::slice::from_ref(f),
        gens,
        config.p,
        q,
        config.ly_n_max,
        config.wp,
        config.ly_tol,
    )?;
    let mut table = Table::new(&[
        "observable",
        "n",
        "iterate_norm",
        "norm",
        "weak_norm",
        "ratio",
    ]);
    for r in &report.rows {
        table.push(vec![
            r.observable.into(),
            r.n.into(),
            r.iterate_norm.into(),
            r.norm.into(),
            r.weak_norm.into(),
            r.ratio.into(),
        ]);
    }
    let results = json!({
        "p": config.p,
        "q": q,
        "sup_ratio": report.sup_ratio,
        "gap_condition": report.gap_condition,
        "lambda": report.constants.lambda,
        "Lambda_": report.constants.big_lambda,
        "warnings": report.warnings,
    });
    Ok(Outcome::new(table, results))
}

/// Certified or converged annealed variance used as a reference value.
fn reference_variance(
    config: &RunConfig,
    gens: &Generators,
    f: &TrigPoly<f64>,
) -> Option<(f64, bool)> {
    if f.is_zero() {
        return Some((0.0, true));
    }
    let r = annealed_variance(f, gens, config.wp, config.tol, config.depth_cap).ok()?;
    (r.certified || r.converged).then_some((r.sigma2, r.certified))
}

fn reference_json(reference: Option<(f64, bool)>) -> Value {
    match reference {
        Some((s, c)) => json!({"sigma2": s, "certified": c}),
        None => Value::Null,
    }
}

fn simulate_annealed(
    config: &RunConfig,
    gens: &Generators,
    f: &TrigPoly<f64>,
) -> CliResult<Outcome> {
    let seed = config.seeds[0];
    let s = empirical_variance_annealed(f, gens, config.wp, config.n, config.m, seed, true)?;
    let reference = reference_variance(config, gens, f);
    let sigma2 = reference.map_or(f64::NAN, |r| r.0);
    let samples = s.samples.clone().unwrap_or_default();
    let ks = if sigma2 > 0.0 {
        ks_distance_to_normal(&samples, sigma2)?
    } else {
        f64::NAN
    };
    let z = (s.variance - sigma2) / s.variance_stderr;
    let mut table = Table::new(&[
        "N",
        "M",
        "mean",
        "variance",
        "stderr",
        "variance_stderr",
        "sigma2",
        "z_score",
        "ks_distance",
        "ks_critical_1pct",
    ]);
    table.push(vec![
        config.n.into(),
        config.m.into(),
        s.mean.into(),
        s.variance.into(),
        s.stderr.into(),
        s.variance_stderr.into(),
        sigma2.into(),
        z.into(),
        ks.into(),
        ks_critical_1pct(s.count).into(),
    ]);
    let results = json!({
        "seed": seed,
        "mean": s.mean,
        "variance": s.variance,
        "variance_stderr": s.variance_stderr,
        "reference": reference_json(reference),
        "ks_distance": ks,
        "ks_critical_1pct": ks_critical_1pct(s.count),
    });
    let mut out = Outcome::new(table, results);
    out.certified = json!(reference.is_some_and(|r| r.1));
    out.samples = Some(samples);
    Ok(out)
}

fn simulate_quenched(
    config: &RunConfig,
    gens: &Generators,
    f: &TrigPoly<f64>,
) -> CliResult<Outcome> {
    let keep = config.dump_samples;
    let per_word: Vec<_> = config
        .seeds
        .par_iter()
        .map(|&seed| -> CliResult<_> {
            let env = sample_environment(config.wp, config.n, seed)?;
            let s = empirical_variance_quenched(
                f,
                gens,
                &env,
                config.n,
                config.m,
                derive_seed(seed, 1),
                keep,
            )?;
            Ok((seed, env.zero_fraction(), s))
        })
        .collect::<CliResult<_>>()?;
    let reference = reference_variance(config, gens, f);
    let sigma2 = reference.map_or(f64::NAN, |r| r.0);
    let mut table = Table::new(&[
        "seed",
        "zero_fraction",
        "mean",
        "variance",
        "stderr",
        "variance_stderr",
        "sigma2",
        "z_score",
    ]);
    let mut max_abs_z: f64 = 0.0;
    let mut samples = Vec::new();
    for (seed, zero_fraction, s) in &per_word {
        let z = (s.variance - sigma2) / s.variance_stderr;
        max_abs_z = max_abs_z.max(z.abs());
        table.push(vec![
            (*seed).into(),
            (*zero_fraction).into(),
            s.mean.into(),
            s.variance.into(),
            s.stderr.into(),
            s.variance_stderr.into(),
            sigma2.into(),
            z.into(),
        ]);
        if let Some(v) = &s.samples {
            samples.extend_from_slice(v);
        }
    }
    let results = json!({
        "words": per_word.len(),
        "reference": reference_json(reference),
        "max_abs_z": max_abs_z,
        "all_within_5_stderr": max_abs_z <= 5.0,
    });
    let mut out = Outcome::new(table, results);
    out.certified = json!(reference.is_some_and(|r| r.1));
    out.samples = keep.then_some(samples);
    Ok(out)
}

fn char_fn(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    let seed = config.seeds[0];
    let reference = reference_variance(config, gens, f);
    let sigma2 = reference.map_or(f64::NAN, |r| r.0);
    let grids: Vec<_> = config
        .n_grid
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            annealed_char_fn_grid(
                f,
                gens,
                config.wp,
                &config.lambda_grid,
                &[n],
                config.m,
                derive_seed(seed, i as u64),
            )
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "N",
        "lambda",
        "re",
        "im",
        "stderr_re",
        "stderr_im",
        "target",
        "scaled_error",
    ]);
    let mut scaled_max = vec![0.0f64; config.n_grid.len()];
    for (i, (&n, grid)) in config.n_grid.iter().zip(&grids).enumerate() {
        for (&lambda, est) in config.lambda_grid.iter().zip(&grid[0]) {
            let target = (-lambda * lambda * sigma2 / 2.0).exp();
            let scaled = (n as f64).sqrt() * (est.value - target).norm_sqr().sqrt();
            scaled_max[i] = scaled_max[i].max(scaled);
            table.push(vec![
                n.into(),
                lambda.into(),
                est.value.re.into(),
                est.value.im.into(),
                est.stderr_re.into(),
                est.stderr_im.into(),
                target.into(),
                scaled.into(),
            ]);
        }
    }
    let mk = mann_kendall(&scaled_max, Z95);
    let results = json!({
        "reference": reference_json(reference),
        "max_scaled_error": scaled_max,
        "mann_kendall": {"s": mk.s, "z": mk.z, "trend": format!("{:?}", mk.trend)},
    });
    let mut out = Outcome::new(table, results);
    out.certified = json!(reference.is_some_and(|r| r.1));
    Ok(out)
}

fn paired_moment(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    let seed = config.seeds[0];
    let reference = reference_variance(config, gens, f);
    let sigma2 = reference.map_or(f64::NAN, |r| r.0);
    let estimates: Vec<_> = config
        .lambda_grid
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            paired_second_moment(
                f,
                gens,
                config.wp,
                lambda,
                config.n,
                config.m_omega,
                config.m_x,
                derive_seed(seed, i as u64),
            )
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "lambda", "N", "m_omega", "m_x", "estimate", "stderr", "raw", "target", "z_score",
    ]);
    for (&lambda, e) in config.lambda_grid.iter().zip(&estimates) {
        let target = (-lambda * lambda * sigma2).exp();
        table.push(vec![
            lambda.into(),
            config.n.into(),
            config.m_omega.into(),
            config.m_x.into(),
            e.estimate.into(),
            e.stderr.into(),
            e.raw.into(),
            target.into(),
            ((e.estimate - target) / e.stderr).into(),
        ]);
    }
    let mut out = Outcome::new(table, json!({ "reference": reference_json(reference) }));
    out.certified = json!(reference.is_some_and(|r| r.1));
    Ok(out)
}

fn ldp(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    let seed = config.seeds[0];
    let tails = large_deviation_tails(
        f,
        gens,
        config.wp,
        config.l,
        &config.ldp_n_grid,
        config.m,
        seed,
    )?;
    let mut table = Table::new(&[
        "N",
        "L",
        "hits",
        "trials",
        "probability",
        "wilson_lower",
        "wilson_upper",
    ]);
    for t in &tails {
        table.push(vec![
            t.n.into(),
            config.l.into(),
            t.hits.into(),
            t.trials.into(),
            t.probability.into(),
            t.lower.into(),
            t.upper.into(),
        ]);
    }
    let xs: Vec<f64> = tails.iter().map(|t| t.n as f64).collect();
    let ys: Vec<f64> = tails.iter().map(|t| t.upper.ln()).collect();
    let slope = if tails.len() >= 2 {
        stats::ols_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let results = json!({
        "seed": seed,
        "log_upper_slope": slope,
        "decreasing": slope < 0.0,
    });
    Ok(Outcome::new(table, results))
}

fn coboundary(config: &RunConfig, gens: &Generators, f: &TrigPoly<f64>) -> CliResult<Outcome> {
    let budget = SearchBudget {
        max_words: config.max_words as u128,
        max_orbits: config.max_orbits as u128,
    };
    let report = if config.exact {
        coboundary_obstruction(
            &rational_observable(f)?,
            gens,
            config.k_max,
            config.admissible,
            budget,
        )?
    } else {
        coboundary_obstruction(f, gens, config.k_max, config.admissible, budget)?
    };
    let (product, class) = classify_conjugate_product(gens);
    let mut table = Table::new(&["word", "point", "orbit_sum"]);
    let mut witness = Value::Null;
    match &report.verdict {
        Verdict::PositiveVarianceWitness { word, witnesses } => {
            for (point, sum) in witnesses {
                table.push(vec![
                    word.to_string().into(),
                    point.to_string().into(),
                    (*sum).into(),
                ]);
            }
            witness = json!({
                "word": word.to_string(),
                "orbits": witnesses.iter().map(|(p, s)| json!({"point": p.to_string(), "orbit_sum": s})).collect::<Vec<_>>(),
            });
        }
        Verdict::PositiveVarianceErgodic { .. } | Verdict::InconclusiveUpTo(_) => {}
    }
    let results = json!({
        "verdict": report.verdict.label(),
        "reason": match &report.verdict {
            Verdict::PositiveVarianceErgodic { .. } => "hyperbolic conjugate product",
            Verdict::PositiveVarianceWitness { .. } => "closed orbit with nonzero sum",
            Verdict::InconclusiveUpTo(_) => "no obstruction found",
        },
        "witness": witness,
        "product": matrix_json(&product),
        "classification": class.as_str(),
        "k_max": config.k_max,
        "admissible": config.admissible,
        "words_checked": report.words_checked,
        "orbits_checked": report.orbits_checked,
    });
    Ok(Outcome::new(table, results))
}
