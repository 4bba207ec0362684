//! `stage1`, `stage1-unmodified`, `stage2` and `two-stage`.

use serde::Serialize;

use super::config::RunConfig;
use super::output::{Outputs, Table};
use super::Outcome;
use crate::error::{Error, Result};
use crate::gpm::{GpmConfig, Interval, PenaltyConfig};
use crate::quantum::{bloch_to_density, constant_incoherent_level, eigenvalues_descending, intermediate_targets, BlochState, IntermediateTargets, OpenSystemParams, Pole};
use crate::report::OptimizerReport;
use crate::stage1::{
    constant_control_state, solve_stage1, solve_stage1_timed, stage1_trajectory, unmodified_stage_duration_with, DurationSearch, Stage1Method,
    Stage1Problem, TrajectorySample,
};
use crate::stage2::{stage2_grid_search, FamilySpec, Stage2SearchSpec, Stage2Solution};

pub const CONTROL_HEADER: &[&str] = &["k", "t_start", "t_end", "a"];
pub const TRAJECTORY_HEADER: &[&str] = &["t", "x1", "x2", "x3", "v", "n"];
pub const TRACE_HEADER: &[&str] = &["iter", "g1"];
pub const PENALIZED_TRACE_HEADER: &[&str] = &["iter", "g1_plus_penalty"];
pub const TIMED_TRACE_HEADER: &[&str] = &["iter", "g_phi", "t_hat"];

/// Start, target and the intermediate target picked from its spectrum.
struct Endpoints {
    params: OpenSystemParams,
    x0: BlochState,
    x_target: BlochState,
    pole: Pole,
    n_bar: Option<f64>,
    candidates: IntermediateTargets,
    x_tilde: BlochState,
}

fn endpoints(cfg: &RunConfig) -> Result<Endpoints> {
    let params = cfg.open_params()?;
    let x0 = cfg.bloch("stage1.x0", Some(BlochState::raw(1.0, 0.0, 0.0)))?;
    let x_target = cfg.bloch("stage1.x_target", Some(BlochState::raw(0.0, 0.0, -0.5)))?;
    let pole: Pole = cfg.word("stage1.pole", "north")?.parse()?;
    let spectrum = eigenvalues_descending(&bloch_to_density(&x_target)?);
    let candidates = intermediate_targets(&spectrum);
    Ok(Endpoints {
        params,
        x0,
        x_target,
        pole,
        n_bar: constant_incoherent_level(&spectrum).ok(),
        candidates,
        x_tilde: candidates.select(pole),
    })
}

/// Everything `stage1` reads besides the endpoints.
struct Stage1Setup {
    prob: Stage1Problem,
    a0: Vec<f64>,
    eps: f64,
    method: Stage1Method,
    penalty: Option<PenaltyConfig>,
    /// Time box when the stage length is optimized too.
    free_time: Option<Interval>,
    samples_per_interval: usize,
}

fn stage1_setup(cfg: &RunConfig, ends: &Endpoints, default_method: &str) -> Result<Stage1Setup> {
    let t_hat = cfg.real("stage1.t_hat", 450.0)?;
    let intervals = cfg.count("stage1.intervals", 225)?;
    let a0 = cfg.real("stage1.a0", 0.0)?;
    let eps = cfg.real("stage1.eps", 1e-3)?;
    if !(eps > 0.0) {
        return Err(Error::Config("stage1.eps must be > 0".into()));
    }
    let threshold = eps * eps;
    let name = cfg.choice("stage1.method", default_method, &["gpm2", "gpm1", "lbfgs"])?;
    let beta = cfg.real("gpm.beta", 10.0)?;
    let lambda = cfg.real("gpm.lambda", 0.999)?;
    let max_iters = cfg.count("gpm.max_iters", 1000)?;
    let guard = cfg.flag("gpm.divergence_guard", true)?;
    let lbfgs_iters = cfg.count("lbfgs.max_iters", 1000)?;
    let method = match name.as_str() {
        "lbfgs" => Stage1Method::Lbfgs { max_iters: lbfgs_iters, threshold },
        gpm => {
            let mut g = if gpm == "gpm2" {
                GpmConfig::two_step(beta, lambda, max_iters, threshold)
            } else {
                GpmConfig::one_step(beta, max_iters, threshold)
            };
            g.divergence_guard = guard;
            g.validate()?;
            Stage1Method::Gpm(g)
        }
    };
    let penalty = match (cfg.real_opt("penalty.alpha")?, cfg.real_opt("penalty.delta_a")?) {
        (None, None) => None,
        (Some(alpha), Some(delta)) => Some(PenaltyConfig::new(alpha, delta)?),
        _ => return Err(Error::Config("penalty.alpha and penalty.delta_a go together".into())),
    };
    let free = cfg.flag("stage1.free_time", false)?;
    let p_prime = cfg.real("stage1.p_prime", 1e4)?;
    let t_min = cfg.real("stage1.t_min", 1.0)?;
    let t_max = cfg.real("stage1.t_max", t_hat)?;
    let free_time = if free {
        if penalty.is_some() || matches!(method, Stage1Method::Lbfgs { .. }) {
            return Err(Error::Config("stage1.free_time needs a gpm method and no penalty".into()));
        }
        Some(Interval::new(t_min, t_max)?)
    } else {
        None
    };
    let samples_per_interval = cfg.count("stage1.samples_per_interval", 10)?;
    let prob = Stage1Problem::new(ends.params, ends.x0, ends.x_tilde, t_hat, intervals)?.with_p_prime(p_prime);
    Ok(Stage1Setup {
        prob,
        a0: vec![a0; intervals],
        eps,
        method,
        penalty,
        free_time,
        samples_per_interval,
    })
}

#[derive(Serialize)]
struct Stage1Report {
    x0: BlochState,
    x_target: BlochState,
    pole: Pole,
    x_tilde: BlochState,
    t_hat: f64,
    intervals: usize,
    eps: f64,
    reached: bool,
    /// Bloch distance `‖x(t̂) − x̃‖`.
    distance: f64,
    g1: f64,
    final_state: BlochState,
    /// First iteration whose objective is at most `ε²`.
    first_below_threshold: Option<usize>,
    method: Stage1Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty: Option<PenaltyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_prime: Option<f64>,
    optimizer: OptimizerReport,
}

struct Stage1Run {
    report: Stage1Report,
    trajectory: Vec<TrajectorySample>,
    trace: Table,
}

fn run_stage1(ends: &Endpoints, s: &Stage1Setup) -> Result<Stage1Run> {
    let prob = &s.prob;
    let threshold = s.eps * s.eps;
    let (opt, t_hat, trace) = match (&s.free_time, &s.method) {
        (Some(tb), Stage1Method::Gpm(g)) => {
            let r = solve_stage1_timed(prob, prob.t_hat, &s.a0, *tb, g)?;
            let mut trace = Table::new(TIMED_TRACE_HEADER);
            for (i, (v, t)) in r.report.history.iter().zip(&r.times).enumerate() {
                trace.push(vec![i as f64, *v, *t]);
            }
            let t = r.report.best_time.unwrap_or(prob.t_hat);
            (r.report, t, trace)
        }
        _ => {
            let r = solve_stage1(prob, &s.a0, &s.method, s.penalty.as_ref())?;
            let mut trace = Table::new(if s.penalty.is_some() { PENALIZED_TRACE_HEADER } else { TRACE_HEADER });
            for (i, v) in r.history.iter().enumerate() {
                trace.push(vec![i as f64, *v]);
            }
            (r, prob.t_hat, trace)
        }
    };
    let trajectory = stage1_trajectory(prob, t_hat, &opt.best_point, s.samples_per_interval)?;
    let last = trajectory.last().expect("trajectory has the initial point");
    let final_state = BlochState::raw(last.x1, last.x2, last.x3);
    let g1 = final_state.distance_squared(&ends.x_tilde);
    let first_below_threshold = match (&s.free_time, &s.penalty) {
        (None, None) => opt.first_iteration(|g| g <= threshold),
        _ => None,
    };
    let report = Stage1Report {
        x0: ends.x0,
        x_target: ends.x_target,
        pole: ends.pole,
        x_tilde: ends.x_tilde,
        t_hat,
        intervals: prob.intervals,
        eps: s.eps,
        reached: g1 <= threshold,
        distance: g1.sqrt(),
        g1,
        final_state,
        first_below_threshold,
        method: s.method,
        penalty: s.penalty,
        p_prime: s.free_time.map(|_| prob.p_prime),
        optimizer: opt,
    };
    Ok(Stage1Run { report, trajectory, trace })
}

fn control_table(a: &[f64], start: f64, end: f64) -> Table {
    let dt = (end - start) / a.len() as f64;
    let mut t = Table::new(CONTROL_HEADER);
    for (k, v) in a.iter().enumerate() {
        t.push(vec![(k + 1) as f64, start + k as f64 * dt, start + (k + 1) as f64 * dt, *v]);
    }
    t
}

fn push_stage1_rows(table: &mut Table, traj: &[TrajectorySample]) {
    for p in traj {
        table.push(vec![p.t, p.x1, p.x2, p.x3, 0.0, p.n]);
    }
}

fn push_stage2_rows(table: &mut Table, sol: &Stage2Solution, skip_first: bool) {
    let skip = usize::from(skip_first);
    for (t, x) in sol.trajectory.times.iter().zip(&sol.trajectory.states).skip(skip) {
        table.push(vec![*t, x.x1, x.x2, x.x3, sol.control.value(*t), 0.0]);
    }
}

pub fn stage1(cfg: &RunConfig) -> Result<Outcome> {
    super::seed(cfg)?;
    let ends = endpoints(cfg)?;
    let setup = stage1_setup(cfg, &ends, "gpm2")?;
    cfg.finish()?;
    let run = run_stage1(&ends, &setup)?;
    let r = &run.report;
    let log = vec![format!(
        "stage1: g1 = {:.3e} (eps^2 = {:.1e}) after {} iterations, stop {:?}, reached {}",
        r.g1,
        r.eps * r.eps,
        r.optimizer.iterations,
        r.optimizer.stop,
        r.reached
    )];
    let mut outputs = Outputs::default();
    outputs.csv("stage1_control.csv", &control_table(&r.optimizer.best_point, 0.0, r.t_hat))?;
    let mut traj = Table::new(TRAJECTORY_HEADER);
    push_stage1_rows(&mut traj, &run.trajectory);
    outputs.csv("stage1_trajectory.csv", &traj)?;
    outputs.csv("stage1_trace.csv", &run.trace)?;
    outputs.json("stage1_report.json", &run.report)?;
    Ok(Outcome::ok(outputs, log))
}

fn duration_search(cfg: &RunConfig, ends: &Endpoints) -> Result<DurationSearch> {
    let d = DurationSearch::defaults(&ends.params, &ends.x0, &ends.x_tilde);
    Ok(DurationSearch {
        horizon: cfg.real("unmodified.horizon", d.horizon)?,
        step: cfg.real("unmodified.step", d.step)?,
        tol: cfg.real("unmodified.tol", d.tol)?,
    })
}

#[derive(Serialize)]
struct DurationEntry {
    eps: f64,
    t_hat: f64,
}

#[derive(Serialize)]
struct RatioEntry {
    eps: f64,
    modified_t_hat: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct UnmodifiedReport {
    x0: BlochState,
    x_target: BlochState,
    n_bar: f64,
    candidates: IntermediateTargets,
    pole: Pole,
    x_tilde: BlochState,
    durations: Vec<DurationEntry>,
    /// Entries whose accuracy the constant control never reaches.
    unreachable: Vec<f64>,
    ratios: Vec<RatioEntry>,
}

pub fn stage1_unmodified(cfg: &RunConfig) -> Result<Outcome> {
    super::seed(cfg)?;
    let ends = endpoints(cfg)?;
    let eps_list = cfg.reals("unmodified.eps", &[1e-2, 1e-3])?;
    let modified = cfg.reals("unmodified.modified_t_hat", &[450.0, 400.0])?;
    let search = duration_search(cfg, &ends)?;
    cfg.finish()?;
    let n_bar = ends.n_bar.ok_or(Error::DegenerateSpectrum)?;
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Config(format!("unmodified.eps entry {e} must be > 0")));
    }

    let mut durations = Vec::new();
    let mut unreachable = Vec::new();
    for &eps in &eps_list {
        match unmodified_stage_duration_with(&ends.params, &ends.x0, &ends.x_tilde, n_bar, eps, &search) {
            Ok(t_hat) => durations.push(DurationEntry { eps, t_hat }),
            Err(Error::UnreachableByConstantControl { .. }) => unreachable.push(eps),
            Err(e) => return Err(e),
        }
    }
    let ratios = durations
        .iter()
        .flat_map(|d| {
            modified.iter().map(move |&m| RatioEntry {
                eps: d.eps,
                modified_t_hat: m,
                ratio: d.t_hat / m,
            })
        })
        .collect();
    let mut log: Vec<String> = durations.iter().map(|d| format!("eps {:e}: t_hat = {:.4}", d.eps, d.t_hat)).collect();
    log.extend(unreachable.iter().map(|e| format!("eps {e:e}: unreachable within horizon {}", search.horizon)));
    let report = UnmodifiedReport {
        x0: ends.x0,
        x_target: ends.x_target,
        n_bar,
        candidates: ends.candidates,
        pole: ends.pole,
        x_tilde: ends.x_tilde,
        durations,
        unreachable,
        ratios,
    };
    let mut outputs = Outputs::default();
    outputs.json("stage1_unmodified_report.json", &report)?;
    let failure = (!report.unreachable.is_empty()).then(|| "accuracy unreachable by constant control".to_string());
    Ok(Outcome { outputs, log, failure })
}

/// Reads the `stage2.*` search keys for a stage starting at `start`.
fn stage2_spec(cfg: &RunConfig, start: f64) -> Result<Stage2SearchSpec> {
    let family = match cfg.choice("stage2.family", "cos", &["cos", "sin"])?.as_str() {
        "cos" => FamilySpec::Cos { omega: cfg.real("stage2.omega", 1.0)? },
        _ => {
            let d = cfg.count("stage2.max_harmonic", 3)?;
            FamilySpec::Sin {
                max_harmonic: u32::try_from(d).map_err(|_| Error::Config("stage2.max_harmonic too large".into()))?,
            }
        }
    };
    let bound = cfg.real("stage2.amplitude_bound", 100.0)?;
    let horizon = match cfg.real_opt("stage2.horizon")? {
        Some(h) => h,
        None => start + cfg.real("stage2.window", 40.0)?,
    };
    let eps = cfg.real("stage2.eps", 1e-2)?;
    let d = Stage2SearchSpec::new(family, bound, start, horizon, eps);
    let spec = Stage2SearchSpec {
        amplitude_step: cfg.real("stage2.amplitude_step", d.amplitude_step)?,
        time_step: cfg.real("stage2.time_step", d.time_step)?,
        integration_step: cfg.real("stage2.integration_step", d.integration_step)?,
        screen_step: cfg.real("stage2.screen_step", d.screen_step)?,
        screen_margin: cfg.real("stage2.screen_margin", d.screen_margin)?,
        ..d
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Serialize)]
struct Stage2Report {
    x_init: BlochState,
    x_target: BlochState,
    search: Stage2SearchSpec,
    reached: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<Stage2Summary>,
    /// Smallest distance seen on the grid when nothing passed.
    #[serde(skip_serializing_if = "Option::is_none")]
    best_distance: Option<f64>,
}

#[derive(Serialize)]
struct Stage2Summary {
    control: crate::stage2::HarmonicControl,
    final_time: f64,
    distance: f64,
    v_start: f64,
    v_end: f64,
}

impl Stage2Summary {
    fn of(s: &Stage2Solution) -> Self {
        Stage2Summary {
            control: s.control,
            final_time: s.final_time,
            distance: s.distance,
            v_start: s.v_start,
            v_end: s.v_end,
        }
    }
}

/// Runs the search and folds the unreachable case into the report.
fn run_stage2(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, spec: &Stage2SearchSpec) -> Result<(Stage2Report, Option<Stage2Solution>)> {
    let (solution, best_distance) = match stage2_grid_search(params, x_init, x_target, spec) {
        Ok(s) => (Some(s), None),
        Err(Error::UnreachableOnGrid { best_distance }) => (None, Some(best_distance)),
        Err(e) => return Err(e),
    };
    let report = Stage2Report {
        x_init: *x_init,
        x_target: *x_target,
        search: *spec,
        reached: solution.is_some(),
        solution: solution.as_ref().map(Stage2Summary::of),
        best_distance,
    };
    Ok((report, solution))
}

fn stage2_log(sol: &Stage2Solution) -> String {
    format!(
        "stage2: A = {:.4}, T = {:.4}, distance = {:.3e}, v(start) = {:.4}, v(T) = {:.4}",
        sol.control.amplitude, sol.final_time, sol.distance, sol.v_start, sol.v_end
    )
}

pub fn stage2(cfg: &RunConfig) -> Result<Outcome> {
    super::seed(cfg)?;
    let params = cfg.open_params()?;
    let x_init = cfg.bloch("stage2.x_init", None)?;
    let x_target = cfg.bloch("stage2.x_target", Some(BlochState::raw(0.0, 0.0, -0.5)))?;
    let start = cfg.real("stage2.start", 450.0)?;
    let spec = stage2_spec(cfg, start)?;
    cfg.finish()?;
    let (report, solution) = run_stage2(&params, &x_init, &x_target, &spec)?;
    let mut outputs = Outputs::default();
    outputs.json("stage2_report.json", &report)?;
    let (log, failure) = match &solution {
        Some(sol) => {
            let mut traj = Table::new(TRAJECTORY_HEADER);
            push_stage2_rows(&mut traj, sol, false);
            outputs.csv("stage2_trajectory.csv", &traj)?;
            (vec![stage2_log(sol)], None)
        }
        None => (
            vec![format!("stage2: best distance on the grid {:.3e}", report.best_distance.unwrap_or(f64::NAN))],
            Some("accuracy unreachable on grid".to_string()),
        ),
    };
    Ok(Outcome { outputs, log, failure })
}

#[derive(Serialize)]
struct FirstStageSummary {
    kind: &'static str,
    t_hat: f64,
    final_state: BlochState,
    /// Distance to the intermediate target.
    distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    constant_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage1: Option<Stage1Report>,
}

#[derive(Serialize)]
struct TwoStageReport {
    x0: BlochState,
    x_target: BlochState,
    x_tilde: BlochState,
    trivial: bool,
    reached: bool,
    total_duration: f64,
    final_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    first: Option<FirstStageSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second: Option<Stage2Report>,
}

pub fn two_stage(cfg: &RunConfig) -> Result<Outcome> {
    super::seed(cfg)?;
    let ends = endpoints(cfg)?;
    let first = cfg.choice("two_stage.first", "modified", &["modified", "unmodified"])?;
    let setup = stage1_setup(cfg, &ends, "lbfgs")?;
    let search = duration_search(cfg, &ends)?;
    // Validated up front so bad keys never wait for stage 1.
    stage2_spec(cfg, setup.prob.t_hat)?;
    cfg.finish()?;

    let mut outputs = Outputs::default();
    let mut traj = Table::new(TRAJECTORY_HEADER);
    let eps2 = cfg.real("stage2.eps", 1e-2)?;
    let d0 = ends.x0.distance(&ends.x_target);
    if d0 <= eps2 {
        traj.push(vec![0.0, ends.x0.x1, ends.x0.x2, ends.x0.x3, 0.0, 0.0]);
        let report = TwoStageReport {
            x0: ends.x0,
            x_target: ends.x_target,
            x_tilde: ends.x_tilde,
            trivial: true,
            reached: true,
            total_duration: 0.0,
            final_distance: d0,
            first: None,
            second: None,
        };
        outputs.csv("two_stage_trajectory.csv", &traj)?;
        outputs.json("two_stage_report.json", &report)?;
        return Ok(Outcome::ok(outputs, vec![format!("two-stage: start already within {eps2:e} of the target")]));
    }

    let mut log = Vec::new();
    let first_stage = if first == "modified" {
        let run = run_stage1(&ends, &setup)?;
        push_stage1_rows(&mut traj, &run.trajectory);
        outputs.csv("stage1_control.csv", &control_table(&run.report.optimizer.best_point, 0.0, run.report.t_hat))?;
        log.push(format!("stage1: t_hat = {}, distance to x_tilde = {:.3e}", run.report.t_hat, run.report.distance));
        FirstStageSummary {
            kind: "modified",
            t_hat: run.report.t_hat,
            final_state: run.report.final_state,
            distance: run.report.distance,
            constant_level: None,
            stage1: Some(run.report),
        }
    } else {
        let n_bar = ends.n_bar.ok_or(Error::DegenerateSpectrum)?;
        let t_hat = unmodified_stage_duration_with(&ends.params, &ends.x0, &ends.x_tilde, n_bar, setup.eps, &search)?;
        let prob = Stage1Problem::new(ends.params, ends.x0, ends.x_tilde, t_hat, 1)?;
        let samples = stage1_trajectory(&prob, t_hat, &[n_bar], setup.samples_per_interval.max(1) * 100)?;
        push_stage1_rows(&mut traj, &samples);
        let state = constant_control_state(&ends.params, &ends.x0, n_bar, t_hat);
        log.push(format!("unmodified stage1: n = {n_bar}, t_hat = {t_hat:.4}"));
        FirstStageSummary {
            kind: "unmodified",
            t_hat,
            final_state: state,
            distance: state.distance(&ends.x_tilde),
            constant_level: Some(n_bar),
            stage1: None,
        }
    };

    let spec = stage2_spec(cfg, first_stage.t_hat)?;
    let (second, solution) = run_stage2(&ends.params, &first_stage.final_state, &ends.x_target, &spec)?;
    let (total, final_distance, failure) = match &solution {
        Some(sol) => {
            push_stage2_rows(&mut traj, sol, true);
            log.push(stage2_log(sol));
            (sol.final_time, sol.distance, None)
        }
        None => (
            f64::NAN,
            second.best_distance.unwrap_or(f64::NAN),
            Some("accuracy unreachable on grid".to_string()),
        ),
    };
    if failure.is_none() {
        log.push(format!("two-stage: total duration {total:.4}, final distance {final_distance:.3e}"));
        outputs.csv("two_stage_trajectory.csv", &traj)?;
    }
    let report = TwoStageReport {
        x0: ends.x0,
        x_target: ends.x_target,
        x_tilde: ends.x_tilde,
        trivial: false,
        reached: failure.is_none(),
        total_duration: if total.is_finite() { total } else { first_stage.t_hat },
        final_distance,
        first: Some(first_stage),
        second: Some(second),
    };
    outputs.json("two_stage_report.json", &report)?;
    Ok(Outcome { outputs, log, failure })
}
