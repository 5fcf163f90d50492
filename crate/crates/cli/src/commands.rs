use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use drs_lip::grid::linspace;
use drs_lip::oracle::{
    integrate_at, percent_error, random_initial_conditions, NumericPhaseSolver, StatsAccumulator,
    SummaryStats,
};
use drs_lip::planner::{
    build_nlp, com_plan, feasibility_check, lower_layer, sample_plan, solve_nlp, GaitNlp,
    PlanSample, SolverReport,
};
use drs_lip::stability::sweep;
use drs_lip::{to_mathieu, MathieuBasis, PendulumState};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::BenchWorkload;
use crate::output::{row, OutputDir, Timings};
use crate::{CliError, Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Compare,
    Stability,
    Plan,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Compare => "compare",
            Command::Stability => "stability",
            Command::Plan => "plan",
            Command::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: Config,
    pub seed: u64,
    pub out: PathBuf,
}

/// Runs one command, writing its outputs and manifest under `opts.out`.
/// Returns a one-line summary.
pub fn run(command: Command, opts: &RunOptions) -> Result<String, CliError> {
    let config = opts.config.resolved();
    config.validate()?;
    let mut out = OutputDir::create(&opts.out)?;
    let mut timings = Timings::default();
    let start = Instant::now();
    let summary = match command {
        Command::Solve => cmd_solve(&config, &mut out, &mut timings),
        Command::Compare => cmd_compare(&config, opts.seed, &mut out, &mut timings),
        Command::Stability => cmd_stability(&config, &mut out, &mut timings),
        Command::Plan => cmd_plan(&config, opts.seed, &mut out, &mut timings),
        Command::Bench => cmd_bench(&config, opts.seed, &mut out, &mut timings),
    };
    timings.record("total", start);
    out.manifest(command.name(), &config, opts.seed, &timings)?;
    summary
}

fn cmd_solve(cfg: &Config, out: &mut OutputDir, timings: &mut Timings) -> Result<String, CliError> {
    let t = Instant::now();
    let model = cfg.model_params()?;
    let motion = cfg.surface.vertical()?;
    let basis = Arc::new(MathieuBasis::for_model(&model, &motion, &cfg.series)?);
    let s = &cfg.solve;
    let solution = basis.solve(s.t_start, PendulumState::new(s.x0, s.v0))?;
    let times = linspace(s.t_start, s.t_end, s.samples);
    let rows: Vec<String> = times
        .iter()
        .map(|&t| {
            let st = solution.evaluate(t);
            row(&[t, st.x, st.v, solution.second_derivative(t)])
        })
        .collect();
    timings.record("solve", t);
    out.csv("trajectory.csv", "t_s,x_m,v_m_s,a_m_s2", rows)?;
    let mu = solution.exponent();
    Ok(format!(
        "solve: {} samples over [{}, {}] s, mu = {} + {}i",
        s.samples, s.t_start, s.t_end, mu.re, mu.im
    ))
}

/// Errors and timings of one compare trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialResult {
    pub ic: PendulumState,
    pub errors: StatsAccumulator,
    /// Tabulated-basis fit and evaluation (s).
    pub analytic_time: f64,
    /// Direct series evaluation at every sample (s).
    pub direct_time: f64,
    pub numeric_time: f64,
}

/// Analytic-versus-integrator comparison over seeded random initial states.
#[derive(Debug, Clone)]
pub struct CompareRun {
    pub trials: Vec<TrialResult>,
    pub errors: SummaryStats,
    /// Basis construction and tabulation, paid once (s).
    pub setup_time: f64,
}

pub fn compare_trials(cfg: &Config, seed: u64) -> Result<CompareRun, CliError> {
    let c = &cfg.compare;
    let model = cfg.model_params()?;
    let motion = cfg.surface.vertical()?;
    let times = linspace(0.0, c.t_end, c.samples);
    let setup = Instant::now();
    let basis = Arc::new(MathieuBasis::for_model(&model, &motion, &cfg.series)?);
    let table = basis.tabulate(0.0, &times);
    let setup_time = setup.elapsed().as_secs_f64();
    let ics = random_initial_conditions(seed, c.trials, c.x_max, c.v_max);
    let trials = ics
        .par_iter()
        .map(|&ic| -> Result<TrialResult, CliError> {
            let mut analytic = vec![0.0; times.len()];
            let t = Instant::now();
            table.positions_into(ic, &mut analytic)?;
            let analytic_time = t.elapsed().as_secs_f64();

            let t = Instant::now();
            let solution = basis.solve(0.0, ic)?;
            let direct: Vec<f64> = times.iter().map(|&s| solution.position(s)).collect();
            let direct_time = t.elapsed().as_secs_f64();
            std::hint::black_box(&direct);

            let t = Instant::now();
            let numeric = integrate_at(&model, &motion, ic, 0.0, &times, &cfg.integrator)?;
            let numeric_time = t.elapsed().as_secs_f64();

            let mut errors = StatsAccumulator::default();
            for (a, n) in analytic.iter().zip(&numeric) {
                errors.push(percent_error(*a, n.x));
            }
            Ok(TrialResult {
                ic,
                errors,
                analytic_time,
                direct_time,
                numeric_time,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut all = StatsAccumulator::default();
    for t in &trials {
        all.merge(&t.errors);
    }
    Ok(CompareRun {
        trials,
        errors: all.finish(),
        setup_time,
    })
}

fn micros(samples: impl Iterator<Item = f64>) -> SummaryStats {
    let v: Vec<f64> = samples.map(|s| s * 1e6).collect();
    SummaryStats::from_samples(&v)
}

fn cmd_compare(
    cfg: &Config,
    seed: u64,
    out: &mut OutputDir,
    timings: &mut Timings,
) -> Result<String, CliError> {
    let t = Instant::now();
    let run = compare_trials(cfg, seed)?;
    timings.record("compare", t);
    let rows = run.trials.iter().enumerate().map(|(i, tr)| {
        let s = tr.errors.finish();
        format!("{i},{}", row(&[tr.ic.x, tr.ic.v, s.mean, s.max, s.std_dev]))
    });
    out.csv(
        "trials.csv",
        "trial,x0_m,v0_m_s,mean_pct,max_pct,std_pct",
        rows,
    )?;
    let analytic = micros(run.trials.iter().map(|t| t.analytic_time));
    let direct = micros(run.trials.iter().map(|t| t.direct_time));
    let numeric = micros(run.trials.iter().map(|t| t.numeric_time));
    out.json(
        "compare.json",
        &json!({
            "trials": run.trials.len(),
            "samples": cfg.compare.samples,
            "percent_error": run.errors,
            "wall_time": {
                "analytic_setup_us": run.setup_time * 1e6,
                "analytic_per_trial_us": analytic,
                "analytic_direct_per_trial_us": direct,
                "numeric_per_trial_us": numeric,
                "speedup": numeric.mean / analytic.mean,
            },
        }),
    )?;
    Ok(format!(
        "compare: {} trials, percent error mean {:.3e}% max {:.3e}% sd {:.3e}%",
        run.trials.len(),
        run.errors.mean,
        run.errors.max,
        run.errors.std_dev
    ))
}

fn cmd_stability(
    cfg: &Config,
    out: &mut OutputDir,
    timings: &mut Timings,
) -> Result<String, CliError> {
    let t = Instant::now();
    let rows = sweep(
        &cfg.stability.grid,
        cfg.model.g,
        &cfg.series,
        cfg.stability.tol,
    )?;
    timings.record("sweep", t);
    let mut failures = Vec::new();
    let mut counts = [0usize; 3];
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            let model = drs_lip::ModelParams::new(r.z0, cfg.model.g, cfg.model.mass);
            let motion = drs_lip::VerticalSinusoid::new(r.amplitude, r.omega);
            let (c0, c1) = match (model, motion) {
                (Ok(m), Ok(s)) => {
                    let p = to_mathieu(&m, &s);
                    (p.c0, p.c1)
                }
                _ => (f64::NAN, f64::NAN),
            };
            let head = row(&[r.amplitude, r.omega, r.z0, c0, c1]);
            match &r.result {
                Ok(rep) => {
                    counts[rep.classification as usize] += 1;
                    format!(
                        "{head},{},{}",
                        row(&[rep.mu2.re, rep.mu2.im, rep.mu2.re]),
                        rep.classification
                    )
                }
                Err(e) => {
                    failures.push(e.to_string());
                    format!("{head},NaN,NaN,NaN,Error")
                }
            }
        })
        .collect();
    out.csv(
        "stability.csv",
        "amplitude_m,omega_rad_s,z0_m,c0,c1,mu_re,mu_im,re_mu2,classification",
        lines,
    )?;
    if let Some(first) = failures.first() {
        return Err(CliError::Numeric(format!(
            "{} grid points failed; first: {first}",
            failures.len()
        )));
    }
    Ok(format!(
        "stability: {} points, {} unstable, {} marginal, {} stable",
        rows.len(),
        counts[1],
        counts[2],
        counts[0]
    ))
}

/// Builds the planner NLP with analytic or integrator-backed constraints.
pub fn planner_nlp(cfg: &Config, numeric: bool) -> Result<GaitNlp, CliError> {
    let gait = cfg.gait.params();
    let motion = cfg.surface.motion()?;
    let model = cfg.model_params()?;
    let nlp = build_nlp(&gait, &motion, &model, &cfg.planner)?;
    if !numeric {
        return Ok(nlp);
    }
    let solver = NumericPhaseSolver::new(*nlp.model(), nlp.timeline().clone(), cfg.integrator)?;
    Ok(nlp.with_phase_solver(Box::new(solver)))
}

fn diagnostics(report: &SolverReport) -> serde_json::Value {
    json!({
        "outer_iterations": report.outer_iterations,
        "inner_iterations": report.inner_iterations,
        "evaluations": report.evaluations,
        "max_violation": report.max_violation,
        "stationarity": report.stationarity,
        "penalty": report.penalty,
        "decision_vector": report.x,
    })
}

fn cmd_plan(
    cfg: &Config,
    seed: u64,
    out: &mut OutputDir,
    timings: &mut Timings,
) -> Result<String, CliError> {
    let gait = cfg.gait.params();
    let motion = cfg.surface.motion()?;
    let model = cfg.model_params()?;
    let t = Instant::now();
    let nlp = planner_nlp(cfg, false)?;
    timings.record("build_nlp", t);
    let t = Instant::now();
    let solved = solve_nlp(&nlp, &[0.0; 16], &cfg.planner.solver);
    timings.record("solve_nlp", t);
    let solve_ms = t.elapsed().as_secs_f64() * 1e3;
    let report = match solved {
        Ok(r) => r,
        Err(e) => {
            let (best, violation) = match &e {
                drs_lip::Error::NlpInfeasible { best, violation }
                | drs_lip::Error::NlpNotConverged {
                    best, violation, ..
                } => (best.clone(), *violation),
                _ => (Vec::new(), f64::NAN),
            };
            out.json(
                "nlp.json",
                &json!({
                    "converged": false,
                    "error": e.to_string(),
                    "max_violation": violation,
                    "decision_vector": best,
                    "wall_time": { "solve_ms": solve_ms },
                }),
            )?;
            return Err(e.into());
        }
    };
    let t = Instant::now();
    let com = com_plan(&report.x, &gait, &motion, &model, &cfg.planner)?;
    let check = feasibility_check(&com, cfg.plan.post_check_samples, seed);
    let body = lower_layer(&com, &gait, &motion, &cfg.planner)?;
    let rows = sample_plan(&body, cfg.plan.dt);
    timings.record("lower_layer", t);
    out.csv(
        "plan.csv",
        PlanSample::CSV_HEADER,
        rows.iter().map(PlanSample::csv_row),
    )?;
    let passed = check.passes(gait.friction_coefficient, cfg.planner.solver.tol);
    let mut diag = diagnostics(&report);
    let extra = json!({
        "converged": true,
        "continuity_residuals_m": com.continuity_residuals(),
        "average_velocity_m_s": com.average_velocity(),
        "four_leg_intervals_s": body.four_leg_intervals,
        "post_check": {
            "samples_per_phase": check.samples_per_phase,
            "max_friction_ratio": check.max_friction_ratio,
            "max_polygon_distance_m": check.max_polygon_distance,
            "passed": passed,
        },
        "wall_time": { "solve_ms": solve_ms },
    });
    if let (Some(d), Some(e)) = (diag.as_object_mut(), extra.as_object()) {
        d.extend(e.clone());
    }
    out.json("nlp.json", &diag)?;
    if !passed {
        return Err(CliError::Infeasible(format!(
            "post-check failed: friction ratio {:.3e}, polygon distance {:.3e} m",
            check.max_friction_ratio, check.max_polygon_distance
        )));
    }
    Ok(format!(
        "plan: violation {:.2e} after {} outer iterations, {} rows",
        report.max_violation,
        report.outer_iterations,
        rows.len()
    ))
}

/// Mean and spread of repeated timings after dropping warm-up reps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub reps: usize,
    pub warmup: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl Timing {
    /// Drops the first 5% of `samples` as warm-up.
    pub fn from_samples(samples: &[f64]) -> Self {
        let warmup = samples.len() / 20;
        let s = SummaryStats::from_samples(&samples[warmup..]);
        Self {
            reps: samples.len(),
            warmup,
            mean: s.mean,
            std_dev: s.std_dev,
        }
    }
}

/// Per-trial wall times of the solve workload (µs).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveBench {
    pub setup_us: f64,
    pub analytic_us: Timing,
    pub direct_us: Timing,
    pub numeric_us: Timing,
}

impl SolveBench {
    pub fn speedup(&self) -> f64 {
        self.numeric_us.mean / self.analytic_us.mean
    }
}

/// Times `reps` single-threaded compare trials.
pub fn solve_benchmark(cfg: &Config, seed: u64, reps: usize) -> Result<SolveBench, CliError> {
    let c = &cfg.compare;
    let model = cfg.model_params()?;
    let motion = cfg.surface.vertical()?;
    let times = linspace(0.0, c.t_end, c.samples);
    let t = Instant::now();
    let basis = Arc::new(MathieuBasis::for_model(&model, &motion, &cfg.series)?);
    let table = basis.tabulate(0.0, &times);
    let setup_us = t.elapsed().as_secs_f64() * 1e6;
    let ics = random_initial_conditions(seed, reps, c.x_max, c.v_max);
    let mut buf = vec![0.0; times.len()];
    let (mut a, mut d, mut n) = (Vec::new(), Vec::new(), Vec::new());
    for &ic in &ics {
        let t = Instant::now();
        table.positions_into(ic, &mut buf)?;
        std::hint::black_box(&buf);
        a.push(t.elapsed().as_secs_f64() * 1e6);

        let t = Instant::now();
        let s = basis.solve(0.0, ic)?;
        for (o, &ti) in buf.iter_mut().zip(&times) {
            *o = s.position(ti);
        }
        std::hint::black_box(&buf);
        d.push(t.elapsed().as_secs_f64() * 1e6);

        let t = Instant::now();
        std::hint::black_box(integrate_at(
            &model,
            &motion,
            ic,
            0.0,
            &times,
            &cfg.integrator,
        )?);
        n.push(t.elapsed().as_secs_f64() * 1e6);
    }
    Ok(SolveBench {
        setup_us,
        analytic_us: Timing::from_samples(&a),
        direct_us: Timing::from_samples(&d),
        numeric_us: Timing::from_samples(&n),
    })
}

/// Wall times of the planner NLP with both constraint back ends (ms).
#[derive(Debug, Clone, Serialize)]
pub struct PlanBench {
    pub analytic_ms: Timing,
    pub numeric_ms: Timing,
    pub analytic: SolverReport,
    pub numeric: SolverReport,
}

impl PlanBench {
    pub fn speedup(&self) -> f64 {
        self.numeric_ms.mean / self.analytic_ms.mean
    }
}

/// Builds and solves the planner NLP `reps` times per back end.
pub fn plan_benchmark(cfg: &Config, reps: usize) -> Result<PlanBench, CliError> {
    let time = |numeric: bool| -> Result<(Timing, SolverReport), CliError> {
        let mut samples = Vec::with_capacity(reps);
        let mut last = None;
        for _ in 0..reps {
            let t = Instant::now();
            let nlp = planner_nlp(cfg, numeric)?;
            let r = solve_nlp(&nlp, &[0.0; 16], &cfg.planner.solver)?;
            samples.push(t.elapsed().as_secs_f64() * 1e3);
            last = Some(r);
        }
        Ok((Timing::from_samples(&samples), last.expect("reps ≥ 1")))
    };
    let (analytic_ms, analytic) = time(false)?;
    let (numeric_ms, numeric) = time(true)?;
    Ok(PlanBench {
        analytic_ms,
        numeric_ms,
        analytic,
        numeric,
    })
}

fn timing_json(t: &Timing) -> serde_json::Value {
    json!({ "mean": t.mean, "std_dev": t.std_dev })
}

fn cmd_bench(
    cfg: &Config,
    seed: u64,
    out: &mut OutputDir,
    timings: &mut Timings,
) -> Result<String, CliError> {
    let b = &cfg.bench;
    let mut result = serde_json::Map::new();
    let mut summary = Vec::new();
    if matches!(b.workload, BenchWorkload::Solve | BenchWorkload::All) {
        let t = Instant::now();
        let s = solve_benchmark(cfg, seed, b.reps)?;
        timings.record("bench_solve", t);
        result.insert(
            "solve".into(),
            json!({
                "reps": s.analytic_us.reps,
                "warmup": s.analytic_us.warmup,
                "samples_per_trial": cfg.compare.samples,
                "wall_time": {
                    "analytic_setup_us": s.setup_us,
                    "analytic_us": timing_json(&s.analytic_us),
                    "analytic_direct_us": timing_json(&s.direct_us),
                    "numeric_us": timing_json(&s.numeric_us),
                    "speedup": s.speedup(),
                },
            }),
        );
        summary.push(format!("solve speedup {:.1}x", s.speedup()));
    }
    if matches!(b.workload, BenchWorkload::Plan | BenchWorkload::All) {
        let t = Instant::now();
        let p = plan_benchmark(cfg, b.plan_reps)?;
        timings.record("bench_plan", t);
        let residual = p
            .analytic
            .x
            .iter()
            .zip(&p.numeric.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        result.insert(
            "plan".into(),
            json!({
                "reps": p.analytic_ms.reps,
                "warmup": p.analytic_ms.warmup,
                "analytic": diagnostics(&p.analytic),
                "numeric": diagnostics(&p.numeric),
                "max_decision_difference": residual,
                "wall_time": {
                    "analytic_ms": timing_json(&p.analytic_ms),
                    "numeric_ms": timing_json(&p.numeric_ms),
                    "speedup": p.speedup(),
                },
            }),
        );
        summary.push(format!("plan speedup {:.1}x", p.speedup()));
    }
    out.json("bench.json", &serde_json::Value::Object(result))?;
    Ok(format!("bench: {}", summary.join(", ")))
}
