//! The five subcommands. Each returns its results; writing files is left to
//! [`crate::output`].

use std::fs::File;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use spsolve_core::groundstate::minimize_ground_state;
use spsolve_core::instanton::{
    compactness_threshold, default_cutoff, discrete_sobolev_constant, estimate_s_and_k,
    instanton_report, s_exact,
};
use spsolve_core::pohozaev::{concentration_radius, nonexistence_probe};
use spsolve_core::spectral::principal_eigenpair;
use spsolve_core::{
    EigenPair64, Error, GroundState64, Init, InstantonReport, PhysParams64, ProbeReport64,
    RadialField64, RadialGrid64, Regime, SobolevEstimate, SolveOptions64, StepRule,
};

use crate::config::{InitSpec, LambdaSpec, RunConfig};
use crate::error::{CliError, CliResult};

const EIGEN_TOL: f64 = 1e-12;

pub fn grid(cfg: &RunConfig, intervals: usize) -> CliResult<RadialGrid64> {
    Ok(RadialGrid64::new(cfg.radius, intervals)?)
}

pub fn eigenpair(grid: &RadialGrid64) -> CliResult<EigenPair64> {
    Ok(principal_eigenpair(grid, EIGEN_TOL)?)
}

pub fn resolve_lambda(spec: LambdaSpec, lambda1: f64) -> f64 {
    match spec {
        LambdaSpec::Absolute(l) => l,
        LambdaSpec::Relative(r) => r * lambda1,
    }
}

/// Reads `r,u[,...]` with a header row; `r` must match the grid nodes.
pub fn read_init_field(path: &Path, grid: &RadialGrid64) -> CliResult<RadialField64> {
    let file =
        File::open(path).map_err(|e| CliError::Io(format!("init file {}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut values = Vec::with_capacity(grid.len());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |k: usize| -> CliResult<f64> {
            record
                .get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "init file: bad value in row {}, column {}",
                        i + 1,
                        k + 1
                    ))
                })
        };
        let r = parse(0)?;
        if i < grid.len() && (r - grid.node(i)).abs() > 1e-9 * grid.radius() {
            return Err(CliError::Config(format!(
                "init file: r = {r} in row {} does not match grid node {}",
                i + 1,
                grid.node(i)
            )));
        }
        values.push(parse(1)?);
    }
    if values.len() != grid.len() {
        return Err(CliError::Config(format!(
            "init file: {} rows, grid M = {} needs {}",
            values.len(),
            grid.intervals(),
            grid.len()
        )));
    }
    Ok(RadialField64::new(*grid, values)?)
}

pub fn solve_options(cfg: &RunConfig, grid: &RadialGrid64) -> CliResult<SolveOptions64> {
    let init = match &cfg.init {
        InitSpec::Eigenfunction => Init::Eigenfunction,
        InitSpec::Instanton(Some(eps)) => Init::Instanton { eps: *eps },
        InitSpec::Instanton(None) => Init::InstantonAtGuard,
        InitSpec::File(path) => Init::Field(read_init_field(path, grid)?),
    };
    let opts = SolveOptions64 {
        max_iters: cfg.max_iters,
        grad_tol: cfg.grad_tol,
        step_rule: StepRule::default(),
        init,
        seed: cfg.seed,
    };
    opts.validate()?;
    Ok(opts)
}

pub struct EigenRun {
    pub pair: EigenPair64,
}

pub fn run_eigen(cfg: &RunConfig) -> CliResult<EigenRun> {
    let g = grid(cfg, cfg.intervals)?;
    Ok(EigenRun {
        pair: eigenpair(&g)?,
    })
}

pub struct GroundRun {
    pub lambda: f64,
    pub params: PhysParams64,
    pub state: GroundState64,
    pub threshold: f64,
    pub s_disc: f64,
    pub concentration_radius: f64,
}

pub fn run_ground(cfg: &RunConfig) -> CliResult<GroundRun> {
    let g = grid(cfg, cfg.intervals)?;
    let lambda1 = eigenpair(&g)?.lambda1;
    let lambda = resolve_lambda(cfg.lambda, lambda1);
    let params = PhysParams64::new(lambda, cfg.q, cfg.radius)?;
    let opts = solve_options(cfg, &g)?;
    let state = minimize_ground_state(&params, &g, &opts)?;
    let s_disc = discrete_sobolev_constant(&g).value;
    Ok(GroundRun {
        lambda,
        params,
        threshold: compactness_threshold(s_disc, cfg.q),
        s_disc,
        concentration_radius: concentration_radius(&state.u, 0.5)?,
        state,
    })
}

pub struct InstantonRun {
    pub lambda: f64,
    pub estimate: SobolevEstimate<f64>,
    pub reports: Vec<InstantonReport<f64>>,
}

pub fn run_instanton(cfg: &RunConfig) -> CliResult<InstantonRun> {
    let g = grid(cfg, cfg.intervals)?;
    let lambda = resolve_lambda(cfg.lambda, eigenpair(&g)?.lambda1);
    let params = PhysParams64::new(lambda, cfg.q, cfg.radius)?;
    let cutoff = default_cutoff(cfg.radius);
    let estimate = estimate_s_and_k(&cfg.eps_schedule, &cutoff, &g)?;
    let reports = cfg
        .eps_schedule
        .iter()
        .map(|&eps| instanton_report(eps, &cutoff, &params, &g, estimate.s_est, estimate.k_est))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(InstantonRun {
        lambda,
        estimate,
        reports,
    })
}

pub struct ProbeRun {
    pub lambda: f64,
    pub report: ProbeReport64,
}

/// A relative λ is resolved against `λ₁` of the finest probe mesh, the same
/// grid the regime is classified on.
pub fn run_probe(cfg: &RunConfig) -> CliResult<ProbeRun> {
    let &finest = cfg
        .probe_schedule
        .iter()
        .max()
        .ok_or(Error::EmptySchedule)?;
    let g = grid(cfg, finest)?;
    let lambda = resolve_lambda(cfg.lambda, eigenpair(&g)?.lambda1);
    let params = PhysParams64::new(lambda, cfg.q, cfg.radius)?;
    if matches!(cfg.init, InitSpec::File(_)) {
        return Err(CliError::Config(
            "init: a file initializer fits one mesh and cannot seed a refinement schedule".into(),
        ));
    }
    let opts = solve_options(cfg, &g)?;
    let report = nonexistence_probe(&params, &cfg.probe_schedule, &opts)?;
    Ok(ProbeRun { lambda, report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda_over_lambda1: f64,
    pub q: f64,
    pub radius: f64,
    pub intervals: usize,
    pub c: f64,
    pub threshold: f64,
    pub below_threshold: bool,
    pub pde_residual: f64,
    pub pohozaev_residual: f64,
    pub concentration_radius: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time: f64,
    /// `ok`, `not_converged`, `no_fiber_max` or `error: ...`.
    pub status: String,
}

pub struct SweepPoint {
    pub row: SweepRow,
    pub solution: Option<(RadialField64, RadialField64)>,
}

pub struct PohozaevRefinement {
    pub lambda_over_lambda1: f64,
    pub q: f64,
    /// `(M, residual)`, coarse to fine.
    pub levels: Vec<(usize, f64)>,
}

pub struct SweepRun {
    pub lambda1: f64,
    pub s_disc: f64,
    pub estimate: Result<SobolevEstimate<f64>, String>,
    pub points: Vec<SweepPoint>,
    pub refinement: Option<PohozaevRefinement>,
}

fn sweep_point(
    cfg: &RunConfig,
    g: &RadialGrid64,
    base: &SolveOptions64,
    lambda1: f64,
    s_disc: f64,
    rel: f64,
    q: f64,
) -> SweepPoint {
    let start = Instant::now();
    let mut row = SweepRow {
        lambda_over_lambda1: rel,
        q,
        radius: cfg.radius,
        intervals: cfg.intervals,
        c: f64::NAN,
        threshold: compactness_threshold(s_disc, q),
        below_threshold: false,
        pde_residual: f64::NAN,
        pohozaev_residual: f64::NAN,
        concentration_radius: f64::NAN,
        converged: false,
        iterations: 0,
        wall_time: 0.0,
        status: String::new(),
    };
    let lambda = rel * lambda1;
    let mut opts = base.clone();
    if Regime::classify(lambda, lambda1) == Regime::NonPositive {
        opts.init = Init::InstantonAtGuard;
    }
    let solved = PhysParams64::new(lambda, q, cfg.radius)
        .and_then(|p| minimize_ground_state(&p, g, &opts))
        .and_then(|gs| concentration_radius(&gs.u, 0.5).map(|rho| (gs, rho)));
    let solution = match solved {
        Ok((gs, rho)) => {
            row.c = gs.level_c;
            row.below_threshold = gs.level_c < row.threshold;
            row.pde_residual = gs.pde_residual;
            row.pohozaev_residual = gs.pohozaev_residual;
            row.concentration_radius = rho;
            row.converged = gs.converged;
            row.iterations = gs.iterations;
            row.status = if gs.converged { "ok" } else { "not_converged" }.into();
            Some((gs.u, gs.phi))
        }
        Err(Error::NoFiberMax { .. }) => {
            row.status = "no_fiber_max".into();
            None
        }
        Err(e) => {
            row.status = format!("error: {e}");
            None
        }
    };
    row.wall_time = start.elapsed().as_secs_f64();
    SweepPoint { row, solution }
}

/// Pohozaev residual of the first in-window point on `M/4, M/2, M`.
fn pohozaev_refinement(cfg: &RunConfig, base: &SolveOptions64) -> Option<PohozaevRefinement> {
    let rel = *cfg.sweep_lambda_rel.iter().find(|&&r| r > 0.3 && r < 1.0)?;
    let q = cfg.sweep_q[0];
    let mut levels = Vec::new();
    for m in [cfg.intervals / 4, cfg.intervals / 2, cfg.intervals] {
        if m < 16 || !m.is_multiple_of(2) {
            continue;
        }
        let g = grid(cfg, m).ok()?;
        let lambda1 = eigenpair(&g).ok()?.lambda1;
        let mut opts = base.clone();
        if let Init::Field(_) = opts.init {
            opts.init = Init::Eigenfunction;
        }
        let p = PhysParams64::new(rel * lambda1, q, cfg.radius).ok()?;
        let gs = minimize_ground_state(&p, &g, &opts).ok()?;
        levels.push((m, gs.pohozaev_residual));
    }
    Some(PohozaevRefinement {
        lambda_over_lambda1: rel,
        q,
        levels,
    })
}

/// Points run on `cfg.workers` threads; rows come back λ-major, then q,
/// whatever the completion order.
pub fn run_sweep(cfg: &RunConfig) -> CliResult<SweepRun> {
    let g = grid(cfg, cfg.intervals)?;
    let lambda1 = eigenpair(&g)?.lambda1;
    let base = solve_options(cfg, &g)?;
    let cutoff = default_cutoff(cfg.radius);
    let estimate = estimate_s_and_k(&cfg.eps_schedule, &cutoff, &g).map_err(|e| e.to_string());
    let s_disc = match &estimate {
        Ok(est) => est.s_disc,
        Err(_) => discrete_sobolev_constant(&g).value,
    };
    let pairs: Vec<(f64, f64)> = cfg
        .sweep_lambda_rel
        .iter()
        .flat_map(|&l| cfg.sweep_q.iter().map(move |&q| (l, q)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let points = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(rel, q)| sweep_point(cfg, &g, &base, lambda1, s_disc, rel, q))
            .collect::<Vec<_>>()
    });
    let refinement = pohozaev_refinement(cfg, &base);
    Ok(SweepRun {
        lambda1,
        s_disc,
        estimate,
        points,
        refinement,
    })
}

/// Continuum threshold `(2/5)√(S³/q)` with the exact Sobolev constant.
pub fn continuum_threshold(q: f64) -> f64 {
    compactness_threshold(s_exact(), q)
}
