//! `gate-landscape` and `gate-opt`.

use std::f64::consts::PI;

use serde::Serialize;

use super::config::RunConfig;
use super::output::{Outputs, Table};
use super::{seed, Outcome};
use crate::error::{Error, Result};
use crate::gate::{self, ClosedGateProblem, GrapeOptions};
use crate::global::{
    differential_evolution, dual_annealing, landscape_sweep, AnnealingParams, BoxDomain, DeParams, GlobalSearchConfig, GridSpec, LandscapeRow,
    LandscapeSummary, SweepMethod,
};
use crate::quantum::PiecewiseConstantControl;
use crate::report::OptimizerReport;

pub const LANDSCAPE_HEADER: &[&str] = &["phi_w", "T", "jw_zero", "jw_max", "delta"];
pub const GATE_CONTROL_HEADER: &[&str] = &["k", "t_start", "t_end", "a"];

pub(crate) fn global_config(cfg: &RunConfig) -> Result<GlobalSearchConfig> {
    let de = DeParams::default();
    let da = AnnealingParams::default();
    let base = GlobalSearchConfig::default();
    let g = GlobalSearchConfig {
        seed: seed(cfg)?,
        stream: 0,
        run: 0,
        max_evaluations: cfg.count("global.max_evaluations", base.max_evaluations)?,
        de: DeParams {
            popsize: cfg.count("de.popsize", de.popsize)?,
            generations: cfg.count("de.generations", de.generations)?,
            mutation: cfg.real("de.mutation", de.mutation)?,
            crossover: cfg.real("de.crossover", de.crossover)?,
            polish: cfg.flag("de.polish", de.polish)?,
        },
        annealing: AnnealingParams {
            max_iterations: cfg.count("da.max_iterations", da.max_iterations)?,
            initial_temp: cfg.real("da.initial_temp", da.initial_temp)?,
            restart_temp_ratio: cfg.real("da.restart_temp_ratio", da.restart_temp_ratio)?,
            visit: cfg.real("da.visit", da.visit)?,
            accept: cfg.real("da.accept", da.accept)?,
            local_search: cfg.flag("da.local_search", da.local_search)?,
        },
    };
    g.validate()?;
    Ok(g)
}

fn landscape_table(rows: &[LandscapeRow]) -> Table {
    let mut t = Table::new(LANDSCAPE_HEADER);
    for r in rows {
        t.push(vec![r.phi_w, r.duration, r.jw_zero, r.jw_max, r.delta]);
    }
    t
}

#[derive(Serialize)]
struct MethodSummary {
    method: &'static str,
    summary: LandscapeSummary,
}

#[derive(Serialize)]
struct LandscapeReport {
    seed: u64,
    grid: GridSpec,
    grape_starts: usize,
    stochastic_de_runs: usize,
    stochastic_da_runs: usize,
    methods: Vec<MethodSummary>,
}

pub fn landscape(cfg: &RunConfig) -> Result<Outcome> {
    let d = GridSpec::default();
    let grid = GridSpec {
        step: cfg.real("grid.step", d.step)?,
        phi_indices: cfg.indices("grid.phi_indices", &d.phi_indices)?,
        time_indices: cfg.indices("grid.time_indices", &d.time_indices)?,
        interval_base: cfg.count("grid.interval_base", d.interval_base)?,
        amplitude_bound: cfg.real("grid.amplitude_bound", d.amplitude_bound)?,
    };
    let method = cfg.choice("landscape.method", "grape", &["grape", "stochastic", "both"])?;
    let starts = cfg.count("grape.starts", 10)?;
    let de_runs = cfg.count("stochastic.de_runs", 2)?;
    let da_runs = cfg.count("stochastic.da_runs", 2)?;
    let global = global_config(cfg)?;
    cfg.finish()?;
    if grid.phi_indices.is_empty() || grid.time_indices.is_empty() {
        return Err(Error::Config("empty landscape grid".into()));
    }
    if !(grid.amplitude_bound > 0.0) {
        return Err(Error::Config("grid.amplitude_bound must be > 0".into()));
    }

    let mut runs: Vec<(&'static str, SweepMethod)> = Vec::new();
    if method != "stochastic" {
        runs.push(("grape", SweepMethod::Grape { starts }));
    }
    if method != "grape" {
        runs.push(("stochastic", SweepMethod::Stochastic { de_runs, da_runs }));
    }
    let mut outputs = Outputs::default();
    let mut log = Vec::new();
    let mut methods = Vec::new();
    for (name, m) in runs {
        let rows = landscape_sweep(&grid, m, &global)?;
        let s = LandscapeSummary::of(&rows);
        log.push(format!(
            "{name}: {} nodes, delta min {:.4} max {:.4} mean {:.4}; jw_max min {:.4} mean {:.4}",
            s.nodes, s.delta_min, s.delta_max, s.delta_mean, s.jw_max_min, s.jw_max_mean
        ));
        outputs.csv(&format!("landscape_{name}.csv"), &landscape_table(&rows))?;
        methods.push(MethodSummary { method: name, summary: s });
    }
    let report = LandscapeReport {
        seed: global.seed,
        grid,
        grape_starts: starts,
        stochastic_de_runs: de_runs,
        stochastic_da_runs: da_runs,
        methods,
    };
    outputs.json("landscape_summary.json", &report)?;
    Ok(Outcome::ok(outputs, log))
}

#[derive(Serialize)]
struct GateReport {
    phi_w: f64,
    duration: f64,
    intervals: usize,
    method: String,
    seed: u64,
    amplitude_bound: Option<f64>,
    jw_zero: f64,
    jw_max: f64,
    delta: f64,
    /// `‖∇J_W(0)‖_∞`; the zero control is always stationary.
    zero_control_gradient: f64,
    zero_control_pmp_residual: f64,
    optimizer: OptimizerReport,
}

pub fn gate_opt(cfg: &RunConfig) -> Result<Outcome> {
    let phi_w = cfg.real("gate.phi_w", 4.0 * PI / 20.0)?;
    let duration = cfg.real("gate.duration", 6.0 * PI / 20.0)?;
    let intervals = cfg.count("gate.intervals", 10)?;
    let method = cfg.choice("gate.method", "grape", &["grape", "de", "da"])?;
    let bound = cfg.real_opt("gate.amplitude_bound")?;
    let starts = cfg.count("grape.starts", 10)?;
    let global = global_config(cfg)?;
    cfg.finish()?;

    let mut prob = ClosedGateProblem::new(phi_w, duration, intervals)?;
    if let Some(nu) = bound {
        prob = prob.with_bound(nu)?;
    }
    let report = match method.as_str() {
        "grape" => gate::grape_maximize_with(&prob, starts, global.seed, &GrapeOptions::default()),
        stochastic => {
            let domain = BoxDomain::symmetric(intervals, bound.unwrap_or(50.0))?;
            let f = |a: &[f64]| -gate::jw_of_amplitudes(&prob, a);
            let mut r = if stochastic == "de" {
                differential_evolution(&f, &domain, &global)
            } else {
                dual_annealing(&f, &domain, &global)
            };
            r.best_value = -r.best_value;
            r.history.iter_mut().for_each(|v| *v = -*v);
            r
        }
    };

    let zero = PiecewiseConstantControl::zeros(duration, intervals)?;
    let g0 = gate::gradient_jw(&prob, &zero)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pmp = gate::pmp_residual_at_zero(&prob, 200).max();
    let jw_zero = prob.zero_control_value();
    let dt = prob.dt();
    let mut control = Table::new(GATE_CONTROL_HEADER);
    for (k, a) in report.best_point.iter().enumerate() {
        control.push(vec![(k + 1) as f64, k as f64 * dt, (k + 1) as f64 * dt, *a]);
    }
    let rep = GateReport {
        phi_w,
        duration,
        intervals,
        method: method.clone(),
        seed: global.seed,
        amplitude_bound: bound,
        jw_zero,
        jw_max: report.best_value,
        delta: report.best_value - jw_zero,
        zero_control_gradient: g0,
        zero_control_pmp_residual: pmp,
        optimizer: report,
    };
    let log = vec![format!(
        "{method}: J_W(0) = {:.6}, best J_W = {:.6}, delta = {:.6}",
        rep.jw_zero, rep.jw_max, rep.delta
    )];
    let mut outputs = Outputs::default();
    outputs.csv("gate_control.csv", &control)?;
    outputs.json("gate_report.json", &rep)?;
    Ok(Outcome::ok(outputs, log))
}
