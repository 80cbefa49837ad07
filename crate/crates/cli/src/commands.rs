use num_complex::Complex64;
use serde::Serialize;
use shellres::checks::{run_all, select_poles, CheckResult};
use shellres::expansions::{
    alpha_extrapolate, resonance_expansion, Contour, ErrorNorms, ExpansionInput, ExpansionMode, ExpansionReport, KGrid,
};
use shellres::gamow::{antiresonance_state, gamow_state};
use shellres::jost::s_matrix;
use shellres::poles::{find_resonances, pair_antiresonance, ResonancePole, SearchRegion};
use shellres::{PotentialSpec, WaveNumber};

use crate::config::RunConfig;
use crate::output::{num, write_report, Table};
use crate::CliError;

fn report_written(path: &std::path::Path) {
    println!("wrote {}", path.display());
}

pub fn smatrix(cfg: &RunConfig, k_min: f64, k_max: f64, n: usize) -> Result<(), CliError> {
    if !(k_min > 0.0 && k_max > k_min && n >= 2) {
        return Err(CliError::Config("smatrix needs 0 < k_min < k_max and n >= 2".into()));
    }
    let mut table = Table::create(&cfg.output_dir, "smatrix.csv", &["k", "re_s", "im_s", "abs_s", "phase"])?;
    let mut last: Option<f64> = None;
    let mut offset = 0.0;
    for j in 0..n {
        let k = k_min + (k_max - k_min) * j as f64 / (n - 1) as f64;
        let s = s_matrix(WaveNumber::real(k), &cfg.potential)?;
        let raw = s.arg();
        if let Some(prev) = last {
            // Continuous unwrapping.
            let mut d = raw + offset - prev;
            while d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
                d += 2.0 * std::f64::consts::PI;
            }
        }
        let phase = raw + offset;
        last = Some(phase);
        table.row([num(k), num(s.re), num(s.im), num(s.norm()), num(phase)])?;
    }
    report_written(&table.finish()?);
    Ok(())
}

fn search(cfg: &RunConfig) -> Result<Vec<ResonancePole>, CliError> {
    Ok(find_resonances(&cfg.verify.region, &cfg.potential, cfg.newton_tol)?)
}

pub fn poles(cfg: &RunConfig, anti: bool) -> Result<(), CliError> {
    let poles = search(cfg)?;
    let mut table = Table::create(
        &cfg.output_dir,
        "poles.csv",
        &["n", "re_k", "im_k", "re_z", "im_z", "e_n", "gamma_n", "re_n_sq", "im_n_sq", "newton_error"],
    )?;
    for (i, p) in poles.iter().enumerate() {
        table.row([
            (i + 1).to_string(),
            num(p.k_n.0.re),
            num(p.k_n.0.im),
            num(p.z_n.z.re),
            num(p.z_n.z.im),
            num(p.energy()),
            num(p.width()),
            num(p.n_sq.re),
            num(p.n_sq.im),
            num(p.newton_error),
        ])?;
    }
    report_written(&table.finish()?);
    if anti {
        let mut table = Table::create(&cfg.output_dir, "antiresonances.csv", &["n", "re_k", "im_k", "re_z", "im_z", "re_m_sq", "im_m_sq"])?;
        for (i, p) in poles.iter().enumerate() {
            let a = pair_antiresonance(p, &cfg.potential)?;
            table.row([(i + 1).to_string(), num(a.k.0.re), num(a.k.0.im), num(a.z.z.re), num(a.z.z.im), num(a.m_sq.re), num(a.m_sq.im)])?;
        }
        report_written(&table.finish()?);
    }
    println!("{} poles in [{}, {}] x [{}, {}]", poles.len(), cfg.verify.region.re_min, cfg.verify.region.re_max, cfg.verify.region.im_min, cfg.verify.region.im_max);
    Ok(())
}

pub fn gamow(cfg: &RunConfig, index: usize, anti: bool, r_max: Option<f64>, n: usize) -> Result<(), CliError> {
    let pot = &cfg.potential;
    let poles = search(cfg)?;
    if index == 0 || index > poles.len() {
        return Err(CliError::Config(format!("pole index {index} out of range: {} poles found", poles.len())));
    }
    let pole = &poles[index - 1];
    let state = if anti { antiresonance_state(&pair_antiresonance(pole, pot)?, pot)? } else { gamow_state(pole, pot)? };
    let r_max = r_max.unwrap_or(3.0 * pot.b);
    if !(r_max > 0.0 && n >= 2) {
        return Err(CliError::Config("gamow needs r_max > 0 and n >= 2".into()));
    }
    let name = format!("gamow_{}{}.csv", if anti { "anti_" } else { "" }, index);
    let mut table = Table::create(&cfg.output_dir, &name, &["r", "re_u", "im_u", "abs_u"])?;
    for j in 0..n {
        let r = r_max * j as f64 / (n - 1) as f64;
        let u = state.value(r);
        table.row([num(r), num(u.re), num(u.im), num(u.norm())])?;
    }
    report_written(&table.finish()?);
    Ok(())
}

pub struct ExpandArgs {
    pub mode: String,
    pub poles: Option<usize>,
    pub alpha: Vec<f64>,
    pub kmax: Option<f64>,
    pub contour_depth: Option<f64>,
}

#[derive(Serialize)]
struct ExpandSummary<'a> {
    potential: &'a PotentialSpec,
    mode: &'static str,
    alpha: &'a [f64],
    extrapolated: bool,
    k_max: f64,
    contour_depth: f64,
    contour_nodes: usize,
    grid_nodes: usize,
    poles: Vec<[f64; 2]>,
    reconstruction_error: ErrorNorms,
    target_error: ErrorNorms,
    gamow_only_error: ErrorNorms,
    tolerance: f64,
    passed: bool,
}

pub fn expand(cfg: &RunConfig, args: &ExpandArgs, stamp: bool) -> Result<(), CliError> {
    let pot = &cfg.potential;
    let mode: ExpansionMode = args.mode.parse()?;
    if args.alpha.is_empty() {
        return Err(CliError::Config("at least one --alpha value is required".into()));
    }
    let cs = &cfg.verify.contour;
    let k_max = args.kmax.unwrap_or(cs.k_max);
    let n_poles = args.poles.unwrap_or(cs.n_poles);
    let all = if pot.is_free() {
        Vec::new()
    } else {
        find_resonances(&SearchRegion::new(0.0, k_max, -3.0, 0.0)?, pot, cfg.newton_tol)?
    };
    let (used, auto_depth) = select_poles(&all, n_poles, k_max);
    if used.len() < n_poles {
        return Err(CliError::Config(format!("asked for {n_poles} poles but only {} lie below Re k = {k_max}", used.len())));
    }
    let depth = args.contour_depth.or(cs.depth).or(auto_depth).unwrap_or(0.5);
    let test = &cfg.verify.test;
    let radii: Vec<f64> = (1..=cs.n_radii).map(|j| pot.b * j as f64 / cs.n_radii as f64).collect();
    let grid = KGrid::graded(k_max, cs.grid_nodes, pot, test.r_max().max(pot.b))?;
    let contour = Contour::rectangle(depth, k_max, pot, cs.max_panel)?;
    let contour_nodes = contour.nodes.len();
    let input = ExpansionInput::new(test.clone(), used.clone(), contour, grid.clone(), radii, pot)?;
    let mut alphas = args.alpha.clone();
    alphas.sort_by(|a, b| b.total_cmp(a));
    let reports = alphas.iter().map(|&a| resonance_expansion(&input, a, pot, mode)).collect::<Result<Vec<_>, _>>()?;
    let report: ExpansionReport = if reports.len() >= 3 { alpha_extrapolate(&reports)? } else { reports[reports.len() - 1].clone() };

    let tolerance = cfg.verify.tolerances.get("expansion");
    let passed = report.reconstruction_error.relative_l2 <= tolerance;
    let summary = ExpandSummary {
        potential: pot,
        mode: mode.label(),
        alpha: &report.alpha,
        extrapolated: report.extrapolated,
        k_max,
        contour_depth: depth,
        contour_nodes,
        grid_nodes: grid.len(),
        poles: used.iter().map(|p| [p.k_n.0.re, p.k_n.0.im]).collect(),
        reconstruction_error: report.reconstruction_error,
        target_error: report.target_error,
        gamow_only_error: report.gamow_only_error(),
        tolerance,
        passed,
    };
    report_written(&write_report(&cfg.output_dir, "expansion_report.json", &summary, stamp)?);
    let mut table = Table::create(&cfg.output_dir, "expansion.csv", &["r", "abs_phi", "abs_phi_rec", "abs_error", "abs_direct"])?;
    for i in 0..report.radii.len() {
        let phi = Complex64::new(report.target[i], 0.0);
        let rec = report.expansion[i];
        let direct = report.direct[i];
        table.row([num(report.radii[i]), num(phi.norm()), num(rec.norm()), num((rec - direct).norm()), num(direct.norm())])?;
    }
    report_written(&table.finish()?);
    println!(
        "{} poles, depth {depth:.6}: relative L2 error vs direct {:.3e} (tolerance {tolerance:.1e})",
        used.len(),
        report.reconstruction_error.relative_l2
    );
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "expansion error {:.3e} exceeds tolerance {tolerance:.1e}",
            report.reconstruction_error.relative_l2
        )))
    }
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    potential: &'a PotentialSpec,
    checks: &'a [CheckResult],
    passed: usize,
    failed: usize,
}

pub fn verify(cfg: &RunConfig, stamp: bool) -> Result<(), CliError> {
    let results = run_all(&cfg.potential, &cfg.verify)?;
    println!("{:<20} {:<42} {:>12} {:>10}  result", "check", "point", "residual", "tolerance");
    for r in &results {
        println!(
            "{:<20} {:<42} {:>12.3e} {:>10.1e}  {}",
            r.name,
            r.point,
            r.residual,
            r.tolerance,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let summary = VerifySummary { potential: &cfg.potential, checks: &results, passed: results.len() - failed, failed };
    report_written(&write_report(&cfg.output_dir, "verify_report.json", &summary, stamp)?);
    let mut table = Table::create(&cfg.output_dir, "verify.csv", &["check", "point", "residual", "tolerance", "passed"])?;
    for r in &results {
        table.row([r.name.clone(), r.point.clone(), num(r.residual), num(r.tolerance), r.passed.to_string()])?;
    }
    report_written(&table.finish()?);
    println!("{} of {} checks passed", results.len() - failed, results.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{failed} check(s) failed")))
    }
}
