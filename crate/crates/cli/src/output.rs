//! CSV and Markdown emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use spsolve_core::instanton::{k_exact, s_exact};
use spsolve_core::spectral::lambda_window;
use spsolve_core::{RadialField64, Regime};

use crate::commands::{
    continuum_threshold, EigenRun, GroundRun, InstantonRun, ProbeRun, SweepRow, SweepRun,
};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SWEEP_HEADER: [&str; 16] = [
    "lambda_over_lambda1",
    "q",
    "R",
    "M",
    "c",
    "threshold",
    "below_threshold",
    "pde_residual",
    "pohozaev_residual",
    "concentration_radius",
    "converged",
    "iterations",
    "wall_time",
    "status",
    "version",
    "config_hash",
];

/// Full double precision, scientific.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

/// Creates `dir` and proves it writable before any computation starts.
pub fn preflight(dir: &Path) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("output directory {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let probe = dir.join(".spsolve-write-test");
    fs::write(&probe, b"").map_err(io)?;
    fs::remove_file(&probe).map_err(io)?;
    Ok(())
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> CliResult<PathBuf> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

fn write_text(path: &Path, text: &str) -> CliResult<PathBuf> {
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

pub fn write_solution(path: &Path, u: &RadialField64, phi: &RadialField64) -> CliResult<PathBuf> {
    let g = u.grid();
    let rows = (0..g.len()).map(|i| vec![num(g.node(i)), num(u.values()[i]), num(phi.values()[i])]);
    write_csv(path, &["r", "u", "phi"], rows)
}

fn deviation(est: f64, exact: f64) -> String {
    format!("{:+.3}%", 100.0 * (est - exact) / exact)
}

fn report_footer(out: &mut String, cfg: &RunConfig, hash: &str) {
    let _ = writeln!(
        out,
        "\n---\nspsolve {VERSION}, config hash `{hash}`, R = {}, M = {}",
        cfg.radius, cfg.intervals
    );
}

pub fn emit_eigen(cfg: &RunConfig, run: &EigenRun, hash: &str) -> CliResult<Vec<PathBuf>> {
    let e = &run.pair.e1;
    let g = e.grid();
    let csv = write_csv(
        &cfg.out.join("eigen.csv"),
        &["r", "e1"],
        (0..g.len()).map(|i| vec![num(g.node(i)), num(e.values()[i])]),
    )?;
    let (lo, hi) = run.pair.lambda_window();
    let mut md = String::from("# Principal eigenpair\n\n");
    let _ = writeln!(md, "- lambda1 (discrete): {}", num(run.pair.lambda1));
    let _ = writeln!(
        md,
        "- lambda1 (continuum, (pi/R)^2): {}",
        num((std::f64::consts::PI / cfg.radius).powi(2))
    );
    let _ = writeln!(md, "- existence window: ({}, {})", num(lo), num(hi));
    let _ = writeln!(md, "- inverse iterations: {}", run.pair.iterations);
    report_footer(&mut md, cfg, hash);
    Ok(vec![csv, write_text(&cfg.out.join("report.md"), &md)?])
}

pub fn emit_ground(cfg: &RunConfig, run: &GroundRun, hash: &str) -> CliResult<Vec<PathBuf>> {
    let gs = &run.state;
    let sol = write_solution(&cfg.out.join("solution.csv"), &gs.u, &gs.phi)?;
    let regime = Regime::classify(run.lambda, gs.lambda1);
    let mut md = String::from("# Ground state\n\n");
    let _ = writeln!(md, "{}\n", regime.banner());
    let _ = writeln!(md, "| quantity | value |\n|---|---|");
    for (name, value) in [
        ("lambda", num(run.lambda)),
        ("lambda1", num(gs.lambda1)),
        ("q", num(run.params.q)),
        ("c", num(gs.level_c)),
        ("threshold (2/5)sqrt(S_disc^3/q)", num(run.threshold)),
        (
            "continuum threshold",
            num(continuum_threshold(run.params.q)),
        ),
        ("below threshold", (gs.level_c < run.threshold).to_string()),
        ("S_disc", num(run.s_disc)),
        ("pde residual", num(gs.pde_residual)),
        ("phi residual", num(gs.phi_residual)),
        ("pohozaev residual", num(gs.pohozaev_residual)),
        ("concentration radius (1/2)", num(run.concentration_radius)),
        ("gradient norm", num(gs.grad_norm)),
        ("iterations", gs.iterations.to_string()),
        ("converged", gs.converged.to_string()),
    ] {
        let _ = writeln!(md, "| {name} | {value} |");
    }
    report_footer(&mut md, cfg, hash);
    Ok(vec![sol, write_text(&cfg.out.join("report.md"), &md)?])
}

fn estimate_lines(md: &mut String, s_est: f64, k_est: f64, s_disc: f64) {
    let _ = writeln!(
        md,
        "| constant | estimate | exact | deviation |\n|---|---|---|---|"
    );
    let _ = writeln!(
        md,
        "| S | {} | {} | {} |",
        num(s_est),
        num(s_exact()),
        deviation(s_est, s_exact())
    );
    let _ = writeln!(
        md,
        "| K | {} | {} | {} |",
        num(k_est),
        num(k_exact()),
        deviation(k_est, k_exact())
    );
    let _ = writeln!(
        md,
        "| S_disc | {} | {} | {} |",
        num(s_disc),
        num(s_exact()),
        deviation(s_disc, s_exact())
    );
}

pub fn emit_instanton(cfg: &RunConfig, run: &InstantonRun, hash: &str) -> CliResult<Vec<PathBuf>> {
    let header = [
        "eps",
        "grad_sq",
        "l6_sq",
        "l2_sq",
        "t_eps",
        "sup_j",
        "sup_j_formula",
        "a_phi",
        "s_est",
        "k_est",
        "grad_residual",
        "l6_residual",
        "threshold",
        "version",
        "config_hash",
    ];
    let threshold = spsolve_core::instanton::compactness_threshold(run.estimate.s_est, cfg.q);
    let rows = run.reports.iter().map(|r| {
        vec![
            num(r.eps),
            num(r.grad_sq),
            num(r.l6_sq),
            num(r.l2_sq),
            num(r.t_eps),
            num(r.sup_j),
            num(r.sup_j_formula),
            num(r.a_phi),
            num(r.s_est),
            num(r.k_est),
            num(r.grad_residual),
            num(r.l6_residual),
            num(threshold),
            VERSION.to_string(),
            hash.to_string(),
        ]
    });
    let csv = write_csv(&cfg.out.join("instanton.csv"), &header, rows)?;
    let est = &run.estimate;
    let mut md = String::from("# Instanton family\n\n");
    estimate_lines(&mut md, est.s_est, est.k_est, est.s_disc);
    let _ = writeln!(
        md,
        "\nfit residuals: S {:.3e}, K {:.3e}\n\nlambda = {}, threshold (2/5)sqrt(S_est^3/q) = {}\n",
        est.s_fit_residual,
        est.k_fit_residual,
        num(run.lambda),
        num(threshold)
    );
    let _ = writeln!(
        md,
        "| eps | t_eps | sup J | formula | A(phi) |\n|---|---|---|---|---|"
    );
    for r in &run.reports {
        let _ = writeln!(
            md,
            "| {:.3e} | {} | {} | {} | {} |",
            r.eps,
            num(r.t_eps),
            num(r.sup_j),
            num(r.sup_j_formula),
            num(r.a_phi)
        );
    }
    report_footer(&mut md, cfg, hash);
    Ok(vec![csv, write_text(&cfg.out.join("report.md"), &md)?])
}

pub fn emit_probe(cfg: &RunConfig, run: &ProbeRun, hash: &str) -> CliResult<Vec<PathBuf>> {
    let rep = &run.report;
    let header = [
        "M",
        "c",
        "s_disc",
        "threshold",
        "gap",
        "concentration_radius",
        "pohozaev_residual",
        "converged",
        "iterations",
        "version",
        "config_hash",
    ];
    let rows = rep.levels.iter().map(|l| {
        vec![
            l.intervals.to_string(),
            num(l.c),
            num(l.s_disc),
            num(l.threshold),
            num(l.c - l.threshold),
            num(l.concentration_radius),
            num(l.pohozaev_residual),
            l.converged.to_string(),
            l.iterations.to_string(),
            VERSION.to_string(),
            hash.to_string(),
        ]
    });
    let csv = write_csv(&cfg.out.join("probe.csv"), &header, rows)?;
    let mut md = String::from("# Nonexistence probe\n\n");
    let _ = writeln!(md, "{}\n", rep.banner);
    let _ = writeln!(
        md,
        "- lambda: {}\n- lambda1 (finest mesh): {}",
        num(run.lambda),
        num(rep.lambda1)
    );
    if let Some(alpha) = rep.obstruction {
        let _ = writeln!(md, "- a - lambda*b along e1: {}", num(alpha));
    }
    if !rep.levels.is_empty() {
        let _ = writeln!(md, "\n| M | c | threshold | c - threshold | rho(1/2) | pohozaev |\n|---|---|---|---|---|---|");
        for l in &rep.levels {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {:.3e} | {:.4e} | {:.4e} |",
                l.intervals,
                num(l.c),
                num(l.threshold),
                l.c - l.threshold,
                l.concentration_radius,
                l.pohozaev_residual
            );
        }
    }
    report_footer(&mut md, cfg, hash);
    Ok(vec![csv, write_text(&cfg.out.join("report.md"), &md)?])
}

pub fn sweep_record(row: &SweepRow, hash: &str) -> Vec<String> {
    vec![
        num(row.lambda_over_lambda1),
        num(row.q),
        num(row.radius),
        row.intervals.to_string(),
        num(row.c),
        num(row.threshold),
        row.below_threshold.to_string(),
        num(row.pde_residual),
        num(row.pohozaev_residual),
        num(row.concentration_radius),
        row.converged.to_string(),
        row.iterations.to_string(),
        num(row.wall_time),
        row.status.clone(),
        VERSION.to_string(),
        hash.to_string(),
    ]
}

pub fn emit_sweep(cfg: &RunConfig, run: &SweepRun, hash: &str) -> CliResult<Vec<PathBuf>> {
    let mut written = vec![write_csv(
        &cfg.out.join("sweep.csv"),
        &SWEEP_HEADER,
        run.points.iter().map(|p| sweep_record(&p.row, hash)),
    )?];
    let solutions = cfg.out.join("solutions");
    if run.points.iter().any(|p| p.solution.is_some()) {
        fs::create_dir_all(&solutions)?;
    }
    for (k, p) in run.points.iter().enumerate() {
        if let Some((u, phi)) = &p.solution {
            written.push(write_solution(
                &solutions.join(format!("solution_{k:03}.csv")),
                u,
                phi,
            )?);
        }
    }

    let (lo, hi) = lambda_window(run.lambda1);
    let mut md = String::from("# Sweep\n\n## Existence window\n\n");
    let _ = writeln!(
        md,
        "lambda1 = {}; window ({}, {})\n",
        num(run.lambda1),
        num(lo),
        num(hi)
    );
    md.push_str("## Sobolev constants\n\n");
    match &run.estimate {
        Ok(est) => estimate_lines(&mut md, est.s_est, est.k_est, est.s_disc),
        Err(e) => {
            let _ = writeln!(md, "estimate failed: {e}\n\nS_disc = {}", num(run.s_disc));
        }
    }
    md.push_str("\n## Level versus threshold\n\n");
    md.push_str("| lambda/lambda1 | q | c | threshold | continuum threshold | below | converged | status |\n");
    md.push_str("|---|---|---|---|---|---|---|---|\n");
    for p in &run.points {
        let r = &p.row;
        let _ = writeln!(
            md,
            "| {} | {} | {:.10} | {:.10} | {:.10} | {} | {} | {} |",
            r.lambda_over_lambda1,
            r.q,
            r.c,
            r.threshold,
            continuum_threshold(r.q),
            r.below_threshold,
            r.converged,
            r.status
        );
    }
    let mut banners: Vec<(f64, &str)> = Vec::new();
    for p in &run.points {
        let regime = Regime::classify(p.row.lambda_over_lambda1 * run.lambda1, run.lambda1);
        if regime != Regime::ExistenceWindow
            && !banners.iter().any(|b| b.0 == p.row.lambda_over_lambda1)
        {
            banners.push((p.row.lambda_over_lambda1, regime.banner()));
        }
    }
    if !banners.is_empty() {
        md.push_str("\n## Outside the window\n\n");
        for (rel, b) in banners {
            let _ = writeln!(md, "- lambda/lambda1 = {rel}: {b}");
        }
    }
    md.push_str("\n## Pohozaev residual under refinement\n\n");
    match &run.refinement {
        Some(refine) if !refine.levels.is_empty() => {
            let _ = writeln!(
                md,
                "lambda/lambda1 = {}, q = {}\n",
                refine.lambda_over_lambda1, refine.q
            );
            md.push_str("| M | residual | ratio to next finer |\n|---|---|---|\n");
            for (i, &(m, res)) in refine.levels.iter().enumerate() {
                let ratio = refine.levels.get(i + 1).map_or_else(
                    || "-".to_string(),
                    |&(_, next)| format!("{:.4}", res / next),
                );
                let _ = writeln!(md, "| {m} | {res:.6e} | {ratio} |");
            }
        }
        _ => md.push_str("no in-window point to refine\n"),
    }
    report_footer(&mut md, cfg, hash);
    written.push(write_text(&cfg.out.join("report.md"), &md)?);
    Ok(written)
}
