//! Command implementations shared by the binary and the integration tests.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use szego_core::contraction::{audit, ContractionAudit};
use szego_core::disk::{from_disk, integrate, invariants_disk, to_disk, DiskCoeffs, IntegratorConfig};
use szego_core::flow::{invariants_exact, FlowEngine, InvariantReport};
use szego_core::{HardyRational, SzegoError};

use crate::config::{ConfigError, RunConfig};
use crate::output::{samples_csv, svg_lines, RunContext, RunManifest};

pub const J_POINTS: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("runtime error: {0}")]
    Run(#[from] SzegoError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn diagnostic_json(&self) -> String {
        serde_json::json!({
            "error": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

/// Samples of Phi(t)u on the boundary grid, sign-aware in t.
fn line_samples(
    u: &HardyRational,
    t: f64,
    xs: &[f64],
    eta: f64,
) -> Result<Vec<(f64, f64, Complex64)>, SzegoError> {
    if t >= 0.0 {
        let engine = FlowEngine::new(u, t)?;
        xs.par_iter()
            .map(|&x| Ok((t, x, engine.sample(Complex64::new(x, eta))?.value)))
            .collect()
    } else {
        // Phi(-s)u(z) = conj(Phi(s)(Ru)(-conj z)).
        let engine = FlowEngine::new(&u.reflect(), -t)?;
        xs.par_iter()
            .map(|&x| {
                let v = engine.sample(Complex64::new(-x, eta))?.value;
                Ok((t, x, v.conj()))
            })
            .collect()
    }
}

fn svg_of_rows(rows: &[(f64, f64, Complex64)]) -> String {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for &(t, x, v) in rows {
        if series.last().map(|(label, _)| label != &format!("t = {t}")).unwrap_or(true) {
            series.push((format!("t = {t}"), Vec::new()));
        }
        series.last_mut().unwrap().1.push((x, v.norm()));
    }
    svg_lines(&series)
}

pub fn cmd_solve(config: &RunConfig, raw: &str, out: &Path) -> Result<RunManifest, CliError> {
    let mut ctx = RunContext::new(out, "solve", raw)?;
    let u = config.initial_state();
    let xs = config.grid_points();
    let mut rows = Vec::new();
    for &t in &config.sorted_times() {
        rows.extend(line_samples(&u, t, &xs, config.grid.eta)?);
    }
    if !rows.is_empty() {
        ctx.write_bytes("solve.csv", samples_csv(&rows).as_bytes())?;
        ctx.write_bytes("solve.svg", svg_of_rows(&rows).as_bytes())?;
    }
    Ok(ctx.finish()?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
}

/// Integrate to every requested time, splitting into a backward and a
/// forward leg from t = 0.
fn disk_trajectory(
    config: &RunConfig,
) -> Result<Vec<(f64, DiskCoeffs, f64, f64)>, SzegoError> {
    let u = config.initial_state();
    let f0 = to_disk(&u, config.disk.modes)?;
    let cfg = IntegratorConfig {
        modes: config.disk.modes,
        dt: config.disk.dt,
        pad: config.disk.pad,
    };
    let times = config.sorted_times();
    let backward: Vec<f64> = times.iter().rev().cloned().filter(|&t| t < 0.0).collect();
    let forward: Vec<f64> = times.iter().cloned().filter(|&t| t >= 0.0).collect();
    let mut states = Vec::new();
    for leg in [backward, forward] {
        if leg.is_empty() {
            continue;
        }
        let traj = integrate(&f0, &leg, &cfg)?;
        for ((t, state), (nd, ed)) in traj.checkpoints.into_iter().zip(traj.drifts) {
            states.push((t, state, nd, ed));
        }
    }
    states.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(states)
}

pub fn cmd_integrate(config: &RunConfig, raw: &str, out: &Path) -> Result<RunManifest, CliError> {
    let mut ctx = RunContext::new(out, "integrate", raw)?;
    if !config.times.is_empty() {
        let states = disk_trajectory(config)?;
        let xs = config.grid_points();
        let mut rows = Vec::new();
        let mut conservation = Vec::new();
        for (t, state, nd, ed) in &states {
            for &x in &xs {
                rows.push((*t, x, from_disk(state, x)));
            }
            conservation.push(ConservationRow { t: *t, norm_drift: *nd, energy_drift: *ed });
            ctx.check(&format!("norm_drift@t={t}"), *nd, 1e-8);
            ctx.check(&format!("energy_drift@t={t}"), *ed, 1e-6);
        }
        ctx.write_bytes("integrate.csv", samples_csv(&rows).as_bytes())?;
        ctx.write_json("conservation.json", &conservation)?;
        ctx.write_bytes("integrate.svg", svg_of_rows(&rows).as_bytes())?;
    }
    Ok(ctx.finish()?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub sup_abs: f64,
    pub sup_rel: f64,
    pub l2_grid: f64,
}

pub fn cmd_compare(
    config: &RunConfig,
    raw: &str,
    out: &Path,
) -> Result<(RunManifest, Vec<CompareRow>), CliError> {
    let mut ctx = RunContext::new(out, "compare", raw)?;
    let mut report = Vec::new();
    if !config.times.is_empty() {
        let u = config.initial_state();
        let xs = config.grid_points();
        let dx = (config.grid.xmax - config.grid.xmin) / (config.grid.n - 1) as f64;
        let states = disk_trajectory(config)?;
        let mut solver_rows = Vec::new();
        let mut oracle_rows = Vec::new();
        for (t, state, _, _) in &states {
            let solver = line_samples(&u, *t, &xs, config.grid.eta)?;
            let mut sup_abs: f64 = 0.0;
            let mut sup_ref: f64 = 0.0;
            let mut l2: f64 = 0.0;
            for (tt, x, v) in &solver {
                let w = from_disk(state, *x);
                let d = (v - w).norm();
                sup_abs = sup_abs.max(d);
                sup_ref = sup_ref.max(v.norm());
                l2 += d * d * dx;
                oracle_rows.push((*tt, *x, w));
            }
            solver_rows.extend(solver);
            let row = CompareRow {
                t: *t,
                sup_abs,
                sup_rel: sup_abs / sup_ref.max(f64::MIN_POSITIVE),
                l2_grid: l2.sqrt(),
            };
            ctx.check(&format!("sup_discrepancy@t={t}"), row.sup_abs, 1e-4);
            report.push(row);
        }
        ctx.write_bytes("solver.csv", samples_csv(&solver_rows).as_bytes())?;
        ctx.write_bytes("oracle.csv", samples_csv(&oracle_rows).as_bytes())?;
        ctx.write_json("compare.json", &report)?;
    }
    Ok((ctx.finish()?, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantSeries {
    pub exact: Vec<InvariantReport>,
    pub disk: Vec<InvariantReport>,
}

pub fn cmd_invariants(
    config: &RunConfig,
    raw: &str,
    out: &Path,
) -> Result<(RunManifest, InvariantSeries), CliError> {
    let mut ctx = RunContext::new(out, "invariants", raw)?;
    let mut series = InvariantSeries { exact: Vec::new(), disk: Vec::new() };
    if !config.times.is_empty() {
        let u = config.initial_state();
        let base = invariants_exact(&u, 0.0, &J_POINTS)?;
        for (t, state, _, _) in disk_trajectory(config)? {
            // The exact backend computes conserved quantities from the
            // initial datum; they carry the time label for the series.
            let mut exact_t = base.clone();
            exact_t.t = t;
            let disk_t = invariants_disk(&state, t, &J_POINTS)?;
            ctx.check(&format!("energy_invariance@t={t}"), disk_t.energy - base.energy, 1e-6);
            for ((x, jd), (_, je)) in disk_t.j_values.iter().zip(&base.j_values) {
                ctx.check(&format!("J({x})_invariance@t={t}"), jd - je, 1e-5);
            }
            series.exact.push(exact_t);
            series.disk.push(disk_t);
        }
        ctx.write_json("invariants.json", &series)?;
    }
    Ok((ctx.finish()?, series))
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub t: f64,
    #[serde(flatten)]
    pub audit: ContractionAudit,
}

pub fn cmd_audit(
    config: &RunConfig,
    raw: &str,
    out: &Path,
) -> Result<(RunManifest, Vec<AuditRow>), CliError> {
    let mut ctx = RunContext::new(out, "audit", raw)?;
    let mut rows = Vec::new();
    if !config.times.is_empty() {
        let u = config.initial_state();
        for &t in &config.sorted_times() {
            let report = audit(&u, t, config.audit.iterations)?;
            ctx.check(&format!("q_norm@t={t}"), report.q_norm - 1.0, 1e-8);
            ctx.check(&format!("isometry@t={t}"), report.isometry_defect, 1e-8);
            ctx.check(&format!("coisometry@t={t}"), report.coisometry_defect, 1e-8);
            ctx.check(&format!("gram@t={t}"), report.gram_defect, 1e-8);
            ctx.check(&format!("commutation@t={t}"), report.commutation_defect, 1e-9);
            ctx.check(&format!("plancherel@t={t}"), 1.0 - report.plancherel_ratio, 0.01);
            rows.push(AuditRow { t, audit: report });
        }
        ctx.write_json("audit.json", &rows)?;
    }
    Ok((ctx.finish()?, rows))
}
