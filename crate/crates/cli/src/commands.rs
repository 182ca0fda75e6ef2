use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use sgdlab_core::checkers::{
    check_descent_inequality, check_expected_smoothness, check_grad_bound, check_variance_control,
    find_eigenvalue_threshold, grid_holder_sup, lemma4_margin, probe_radial_conditions, A6Verdict, AssumptionReport,
    RadialOptions, RadialProbe, Verdict,
};
use sgdlab_core::diagnostics::{
    classify_dichotomy, compute_stopping_times, run_ensemble, write_checkpoints_csv, write_json, DichotomyVerdict,
};
use sgdlab_core::engine::{self, run_trajectory, ScheduleReport};
use sgdlab_core::objectives::StochasticOracle;

use crate::config::{ExperimentConfig, ALL_CHECKS};
use crate::{CliError, Common};

const DEFAULT_OUTPUT: &str = "sgdlab-output";

/// Loads the configuration and folds command-line overrides into it.
fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(run) = cfg.run.as_mut() {
        if let Some(seed) = common.seed {
            run.master_seed = seed;
        }
        if let Some(jobs) = common.jobs {
            run.jobs = Some(jobs);
        }
    }
    if let Some(out) = &common.out {
        let o = cfg.output.get_or_insert(crate::config::OutputConfig {
            directory: String::new(),
            formats: None,
            force: None,
        });
        o.directory = out.display().to_string();
    }
    if common.force {
        if let Some(o) = cfg.output.as_mut() {
            o.force = Some(true);
        }
    }
    Ok(cfg)
}

fn jobs(cfg: &ExperimentConfig, common: &Common) -> Option<usize> {
    common.jobs.or(cfg.run.as_ref().and_then(|r| r.jobs))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        Some(0) => Err(CliError::Config("jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Creates the output directory, refusing to reuse one unless forced.
fn prepare_output(cfg: &ExperimentConfig, common: &Common) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(
        cfg.output
            .as_ref()
            .map(|o| o.directory.clone())
            .unwrap_or_else(|| DEFAULT_OUTPUT.into()),
    );
    let force = common.force || cfg.output.as_ref().and_then(|o| o.force).unwrap_or(false);
    if dir.exists() && !force {
        return Err(CliError::Config(format!(
            "output directory {} already exists; pass --force to write into it",
            dir.display()
        )));
    }
    std::fs::create_dir_all(&dir)?;
    write_json(&dir.join("config.json"), cfg)?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    write_json(&dir.join(name), value)?;
    Ok(())
}

pub fn run(common: &Common) -> Result<u8, CliError> {
    let cfg = load(common)?;
    let spec = cfg.ensemble_spec()?;
    spec.validate()?;
    let opts = cfg.analysis(&spec);
    let (json_out, csv_out) = cfg.formats()?;
    let dir = prepare_output(&cfg, common)?;
    let (_, report) = with_pool(jobs(&cfg, common), || run_ensemble(&spec, &opts))??;
    if json_out {
        write(&dir, "ensemble_report.json", &report)?;
    }
    if csv_out {
        write_checkpoints_csv(&dir.join("checkpoints.csv"), &report.convergence)?;
    }
    let v = report.verdict_counts;
    println!(
        "{} trajectories: {} converged-like, {} diverging-like, {} undecided; reports in {}",
        v.total(),
        v.converged_like,
        v.diverging_like,
        v.undecided,
        dir.display()
    );
    Ok(0)
}

fn alpha(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    Ok(cfg.diagnostics_block().alpha.unwrap_or(cfg.objective()?.alpha()))
}

fn radial_probe(cfg: &ExperimentConfig) -> Result<RadialProbe, CliError> {
    let oracle = cfg.oracle()?;
    let obj = *oracle.objective();
    let d = cfg.diagnostics_block();
    let r = d.r.unwrap_or(1.0);
    let radii = d.radii.unwrap_or_else(|| {
        let start = (10.0 * (obj.r0 + r)).max(10.0);
        (0..=5).map(|j| start * 10f64.powi(j)).collect()
    });
    let g = |t: &[f64]| oracle.envelope(t);
    Ok(probe_radial_conditions(
        &obj,
        g,
        alpha(cfg)?,
        r,
        &radii,
        d.b_threshold.unwrap_or(0.25),
        &RadialOptions::default(),
    )?)
}

fn inconclusive(id: &str) -> AssumptionReport {
    AssumptionReport {
        assumption_id: id.into(),
        verdict: Verdict::Inconclusive,
        worst_violation: f64::NAN,
        witness: Vec::new(),
        tolerance: f64::NAN,
    }
}

/// Norms of oracle draws at each sampled point, checked set by set; keeps the worst report.
fn variance_check(
    oracle: &StochasticOracle,
    cfg: &ExperimentConfig,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<AssumptionReport, CliError> {
    let checks = cfg.checks_block();
    let b = cfg.sampling_box(oracle.objective())?;
    let n_draws = checks.n_draws.unwrap_or(1000);
    let mut worst: Option<AssumptionReport> = None;
    for pt in b.halton(checks.n_points.unwrap_or(100)) {
        let theta = sgdlab_core::engine::ParameterVector::new(pt)?;
        let norms = (0..n_draws)
            .map(|_| oracle.sample(&theta, rng).map(|d| d.norm()))
            .collect::<Result<Vec<_>, _>>()?;
        let rep = check_variance_control(&norms, alpha)?;
        let replace = match &worst {
            None => true,
            Some(w) => (rep.failed() && !w.failed()) || (rep.failed() == w.failed() && rep.worst_violation > w.worst_violation),
        };
        if replace {
            worst = Some(rep);
        }
    }
    worst.ok_or_else(|| CliError::Config("variance check needs n_points >= 1".into()))
}

#[derive(Serialize)]
struct ScheduleCheck {
    /// `M_k` symmetric positive definite at every inspected step.
    p1_verdict: Verdict,
    p1_steps_checked: u64,
    report: ScheduleReport,
}

fn schedule_check(cfg: &ExperimentConfig) -> Result<ScheduleCheck, CliError> {
    let schedule = cfg.schedule()?;
    let horizon = cfg.checks_block().horizon.unwrap_or(100_000);
    let steps = horizon.min(1000);
    let spd = (0..steps).all(|k| schedule.matrix(k).is_symmetric_positive_definite());
    Ok(ScheduleCheck {
        p1_verdict: if spd { Verdict::Pass } else { Verdict::Fail },
        p1_steps_checked: steps,
        report: engine::validate_schedule(&schedule, alpha(cfg)?, horizon)?,
    })
}

/// Runs one named check, returning its JSON document and verdict.
fn run_check(name: &str, cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<(Value, Verdict), CliError> {
    let oracle = cfg.oracle()?;
    let obj = *oracle.objective();
    let checks = cfg.checks_block();
    let a = alpha(cfg)?;
    let assumption = |rep: AssumptionReport, params: Value| {
        let v = rep.verdict;
        (json!({ "check": name, "parameters": params, "report": rep }), v)
    };
    Ok(match name {
        "p1p2p3p4" => {
            let s = schedule_check(cfg)?;
            let v = if s.p1_verdict == Verdict::Fail || s.report.any_fail() {
                Verdict::Fail
            } else if s.report.all_pass() {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            };
            (json!({ "check": name, "report": s }), v)
        }
        "descent" => {
            let b = cfg.sampling_box(&obj)?;
            let l_tilde = match checks.l_tilde {
                Some(l) => l,
                None => 2.0 * grid_holder_sup(&obj, &b, a, 1500)?,
            };
            let n_pairs = checks.n_pairs.unwrap_or(10_000);
            let rep = check_descent_inequality(&obj, n_pairs, l_tilde, a, &b, rng)?;
            assumption(rep, json!({ "L_tilde": l_tilde, "alpha": a, "n_pairs": n_pairs, "box": b }))
        }
        "variance" => {
            let rep = variance_check(&oracle, cfg, a, rng)?;
            assumption(rep, json!({ "alpha": a }))
        }
        "gradbound" => {
            let b = cfg.sampling_box(&obj)?;
            let n_points = checks.n_points.unwrap_or(1000);
            let rep = check_grad_bound(&obj, checks.l, a, n_points, &b)?;
            assumption(rep, json!({ "L": checks.l.or(obj.l_global()), "alpha": a, "n_points": n_points, "box": b }))
        }
        "smoothness" => {
            let b = cfg.sampling_box(&obj)?;
            match cfg.smoothness_constants()? {
                Some(c) => {
                    let n_points = checks.n_points.unwrap_or(100);
                    let n_draws = checks.n_draws.unwrap_or(1000);
                    let rep = check_expected_smoothness(&oracle, c, n_points, n_draws, &b, rng)?;
                    assumption(rep, json!({ "constants": c, "n_points": n_points, "n_draws": n_draws, "box": b }))
                }
                None => assumption(inconclusive("expected-smoothness"), json!({ "constants": null })),
            }
        }
        "radial" => {
            let probe = radial_probe(cfg)?;
            let v = match probe.a6_verdict {
                A6Verdict::SatisfiedAtHorizon => Verdict::Pass,
                A6Verdict::ViolatedAtHorizon => Verdict::Fail,
                A6Verdict::Inconclusive => Verdict::Inconclusive,
            };
            (json!({ "check": name, "report": probe }), v)
        }
        "lemma4" => {
            let schedule = cfg.schedule()?;
            let c = checks.c.unwrap_or(4.0);
            let k_max = checks.k_max.unwrap_or(1_000_000);
            let threshold = find_eigenvalue_threshold(&schedule, c, a, k_max)?;
            let margin = threshold.map(|k| lemma4_margin(&schedule, k, c, a));
            let v = if threshold.is_some() { Verdict::Pass } else { Verdict::Fail };
            (
                json!({ "check": name, "parameters": { "C": c, "alpha": a, "K_max": k_max },
                        "report": { "threshold": threshold, "margin_at_threshold": margin, "verdict": v } }),
                v,
            )
        }
        other => return Err(CliError::Config(format!("unknown check {other}"))),
    })
}

pub fn check(common: &Common, which: Option<Vec<String>>) -> Result<u8, CliError> {
    let mut cfg = load(common)?;
    let which = which
        .or_else(|| cfg.checks.as_ref().and_then(|c| c.which.clone()))
        .unwrap_or_else(|| ALL_CHECKS.iter().map(|s| s.to_string()).collect());
    if let Some(bad) = which.iter().find(|w| !ALL_CHECKS.contains(&w.as_str())) {
        return Err(CliError::Config(format!("unknown check {bad}; choose from {}", ALL_CHECKS.join(","))));
    }
    cfg.checks.get_or_insert_with(Default::default).which = Some(which.clone());
    cfg.oracle()?;
    cfg.schedule()?;
    let seed = common.seed.or(cfg.checks_block().seed).unwrap_or(0);
    // compute everything before touching the file system so errors leave no partial output
    let results = with_pool(jobs(&cfg, common), || {
        which
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let mut rng = ChaCha8Rng::seed_from_u64(sgdlab_core::sampling::split_seed(seed, i as u64));
                run_check(name, &cfg, &mut rng)
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    let dir = prepare_output(&cfg, common)?;
    let mut failed = false;
    for (name, (doc, verdict)) in which.iter().zip(&results) {
        write(&dir, &format!("check_{name}.json"), doc)?;
        println!("{name}: {}", verdict_word(*verdict));
        failed |= *verdict == Verdict::Fail;
    }
    Ok(u8::from(failed))
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

pub fn probe_radial(common: &Common) -> Result<u8, CliError> {
    let cfg = load(common)?;
    let probe = radial_probe(&cfg)?;
    let dir = prepare_output(&cfg, common)?;
    write(&dir, "radial_probe.json", &probe)?;
    println!("a5_trend: {:?}; a6_verdict: {:?}", probe.a5_trend, probe.a6_verdict);
    Ok(0)
}

pub fn validate_schedule(common: &Common) -> Result<u8, CliError> {
    let cfg = load(common)?;
    let s = schedule_check(&cfg)?;
    let dir = prepare_output(&cfg, common)?;
    write(&dir, "schedule_report.json", &s)?;
    println!(
        "P1 {}, P2 {}, P3 {}, P4 {}",
        verdict_word(s.p1_verdict),
        verdict_word(s.report.p2_verdict),
        verdict_word(s.report.p3_verdict),
        verdict_word(s.report.p4_verdict)
    );
    Ok(u8::from(s.p1_verdict == Verdict::Fail || s.report.any_fail()))
}

pub fn stopping_times(common: &Common) -> Result<u8, CliError> {
    let cfg = load(common)?;
    let mut spec = cfg.ensemble_spec()?;
    spec.record_stride = 1;
    spec.capture = None;
    spec.validate()?;
    let opts = cfg.analysis(&spec);
    let dir = prepare_output(&cfg, common)?;
    let rows = with_pool(jobs(&cfg, common), || {
        (0..spec.n_trajectories)
            .into_par_iter()
            .map(|i| -> Result<Value, CliError> {
                let seed = spec.seed(i);
                let traj = run_trajectory(&spec.oracle, &spec.schedule, &spec.theta0, spec.horizon, seed)?;
                let st = compute_stopping_times(&traj)?;
                let class = classify_dichotomy(&traj, opts.window, opts.epsilon_conv, opts.r_div)?;
                Ok(json!({
                    "index": i,
                    "seed": seed,
                    "termination": traj.termination,
                    "verdict": class.verdict,
                    "stopping_times": st,
                }))
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    let diverging = rows
        .iter()
        .filter(|r| r["verdict"] == json!(DichotomyVerdict::DivergingLike))
        .count();
    write(
        &dir,
        "stopping_times.json",
        &json!({ "K": spec.horizon, "n_trajectories": spec.n_trajectories, "analysis": opts, "trajectories": rows }),
    )?;
    println!("{} trajectories, {diverging} diverging-like; stopping times in {}", rows.len(), dir.display());
    Ok(0)
}
