//! The invariant suite behind `shellres verify`: every check returns a
//! measured residual and the tolerance it is held to.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansions::{
    error_norms, reconstruct_continuum, resonance_expansion, Contour, ExpansionInput, ExpansionMode, KGrid,
    TestFunction,
};
use crate::gamow::{antiresonance_state, gamow_state, global_phase_fit, schrodinger_residual, tail_purity};
use crate::green::{self, g_total, ls_residual, wronskian};
use crate::jost::{match_coeffs, match_coeffs_on_branch, s_matrix};
use crate::model::{inner_momentum, PotentialSpec, WaveNumber};
use crate::poles::{
    count_zeros, find_resonances, pair_antiresonance, residue_by_contour, ResonancePole, SearchRegion, RESIDUE_CIRCLE_NODES,
    RESIDUE_CIRCLE_RADIUS,
};

/// Named tolerances with their defaults.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("free_exactness", 1e-12),
    ("unitarity", 1e-10),
    ("conjugation", 1e-10),
    ("branch_independence", 1e-12),
    ("continuity", 1e-12),
    ("ls_factorization", 1e-11),
    ("ls_residual", 1e-6),
    ("wronskian", 1e-11),
    ("green_symmetry", 1e-12),
    ("pole_residual", 1e-10),
    ("residue_duality", 1e-8),
    ("pairing", 1e-8),
    ("eigen_residual", 1e-10),
    ("tail_purity", 1e-11),
    ("time_reversal", 1e-9),
    ("mode_equivalence", 1e-10),
    ("deformation", 1e-8),
    ("expansion", 1e-3),
    ("newton", 1e-12),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    /// Defaults overridden by `overrides`; unknown names are rejected.
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut t = Self::default();
        for (k, v) in overrides {
            if !t.0.contains_key(k) {
                let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|(n, _)| *n).collect();
                return Err(Error::InvalidArgument(format!("unknown tolerance '{k}' (known: {})", known.join(", "))));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance '{k}' must be positive")));
            }
            t.0.insert(k.clone(), *v);
        }
        Ok(t)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or_else(|| panic!("tolerance '{name}' has no default"))
    }
}

/// Contour and grid parameters for expansion checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSettings {
    pub k_max: f64,
    /// Contour depth; `None` picks the midpoint between the last used pole
    /// and the next one.
    pub depth: Option<f64>,
    pub n_poles: usize,
    pub grid_nodes: usize,
    pub max_panel: f64,
    pub n_radii: usize,
}

impl Default for ContourSettings {
    fn default() -> Self {
        Self { k_max: 40.0, depth: None, n_poles: 4, grid_nodes: 4000, max_panel: 0.25, n_radii: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub tolerances: Tolerances,
    pub region: SearchRegion,
    pub contour: ContourSettings,
    pub test: TestFunction,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            region: SearchRegion::default_resonance(),
            contour: ContourSettings::default(),
            test: TestFunction::GaussianBump { center: 1.5, width: 0.25, r_max: 3.5 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub point: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, point: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), point: point.into(), residual, tolerance, passed: residual <= tolerance }
    }
}

/// Evenly spaced real wave numbers in `[0.1, 20]`.
pub fn real_k_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.1 + 19.9 * j as f64 / (n - 1) as f64).collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Poles used by expansion checks and the contour depth that encloses
/// exactly them: midway between the last used pole and the next deeper one.
pub fn select_poles(all: &[ResonancePole], n: usize, k_max: f64) -> (Vec<ResonancePole>, Option<f64>) {
    let mut by_depth: Vec<ResonancePole> = all.iter().copied().filter(|p| p.k_n.0.re < k_max).collect();
    by_depth.sort_by(|a, b| b.k_n.0.im.total_cmp(&a.k_n.0.im).then(a.k_n.0.re.total_cmp(&b.k_n.0.re)));
    let used: Vec<ResonancePole> = by_depth.iter().take(n).copied().collect();
    let depth = match (used.last(), by_depth.get(n)) {
        (Some(last), Some(next)) => Some(-0.5 * (last.k_n.0.im + next.k_n.0.im)),
        (Some(last), None) => Some(-last.k_n.0.im + 0.5),
        (None, Some(next)) => Some(-0.5 * next.k_n.0.im),
        (None, None) => None,
    };
    let mut used = used;
    used.sort_by(|a, b| a.k_n.0.re.total_cmp(&b.k_n.0.re));
    (used, depth)
}

/// Runs the whole suite. A check that cannot be evaluated at all (for
/// example a Newton failure in the pole search) aborts with its error.
pub fn run_all(pot: &PotentialSpec, settings: &VerifySettings) -> Result<Vec<CheckResult>> {
    let tol = &settings.tolerances;
    let mut out = Vec::new();
    let ks = real_k_grid(200);

    // Scattering on the real axis.
    if pot.is_free() {
        let mut worst: f64 = 0.0;
        for &k in &ks {
            let c = match_coeffs(WaveNumber::real(k), pot)?;
            worst = worst.max((c.jplus - 1.0).norm()).max((c.jminus - 1.0).norm()).max((c.s_matrix()? - 1.0).norm());
        }
        out.push(CheckResult::new("free_exactness", "k in [0.1, 20], 200 points", worst, tol.get("free_exactness")));
    }
    let (mut unit, mut conj): (f64, f64) = (0.0, 0.0);
    for &k in &ks {
        let s = s_matrix(WaveNumber::real(k), pot)?;
        let s_neg = s_matrix(WaveNumber::real(-k), pot)?;
        unit = unit.max((s.norm() - 1.0).abs());
        conj = conj.max((s - s_neg.conj()).norm());
    }
    out.push(CheckResult::new("unitarity", "k in [0.1, 20], 200 points", unit, tol.get("unitarity")));
    out.push(CheckResult::new("conjugation", "k in [0.1, 20], 200 points", conj, tol.get("conjugation")));

    let probes = [Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(2.0, -0.4), Complex64::new(0.7, 0.9), Complex64::new(5.5, -1.2)];
    let (mut branch, mut cont, mut fact): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &q in &probes {
        let w = WaveNumber(q);
        let big_q = inner_momentum(w, pot);
        let p = match_coeffs_on_branch(w, big_q, pot)?;
        if big_q.norm() > 1e-8 {
            let m = match_coeffs_on_branch(w, -big_q, pot)?;
            branch = branch.max(rel(m.jplus, p.jplus)).max(rel(m.jminus, p.jminus));
            for r in [0.5, 1.5, 3.0] {
                branch = branch.max((m.value(r) - p.value(r)).norm() / p.value(r).norm().max(1.0));
            }
        }
        for r in [pot.a, pot.b] {
            let [(u0, d0), (u1, d1)] = p.one_sided(r);
            cont = cont.max((u0 - u1).norm() / u0.norm().max(1.0)).max((d0 - d1).norm() / d0.norm().max(1.0));
        }
        if let Ok(s) = p.s_matrix() {
            for r in [0.4, 1.3, 2.6] {
                let plus = p.chi_plus(r)?;
                let minus = p.chi_minus(r)?;
                fact = fact.max((plus - s * minus).norm() / (1.0 + plus.norm()));
            }
        }
    }
    let probe_label = "q in {1, 3, 2-0.4i, 0.7+0.9i, 5.5-1.2i}";
    out.push(CheckResult::new("branch_independence", probe_label, branch, tol.get("branch_independence")));
    out.push(CheckResult::new("continuity", probe_label, cont, tol.get("continuity")));
    out.push(CheckResult::new("ls_factorization", probe_label, fact, tol.get("ls_factorization")));

    // Green functions.
    for q in [WaveNumber::real(1.0), WaveNumber::real(2.5), WaveNumber::new(2.0, -0.4)] {
        let res = ls_residual(q, pot, 2000)?;
        out.push(CheckResult::new("ls_residual", format!("q = {}, 2000 nodes", q.0), res, tol.get("ls_residual")));
    }
    let (mut wr, mut sym): (f64, f64) = (0.0, 0.0);
    for q in [WaveNumber::real(2.5), WaveNumber::new(2.0, -0.4)] {
        let want = -q.0 * match_coeffs(q, pot)?.jplus;
        for r in green::residual_grid(pot, 40) {
            wr = wr.max(rel(wronskian(r, q, pot)?, want));
        }
        for (r, s) in [(0.5, 1.5), (1.2, 3.0), (1.7, 1.1)] {
            let x = g_total(r, s, q, pot)?;
            sym = sym.max(rel(g_total(s, r, q, pot)?, x));
        }
    }
    out.push(CheckResult::new("wronskian", "q in {2.5, 2-0.4i}, 40 radii", wr, tol.get("wronskian")));
    out.push(CheckResult::new("green_symmetry", "q in {2.5, 2-0.4i}", sym, tol.get("green_symmetry")));

    // Poles.
    let region = &settings.region;
    let region_label = format!("[{}, {}] x [{}, {}]", region.re_min, region.re_max, region.im_min, region.im_max);
    let poles = find_resonances(region, pot, tol.get("newton"))?;
    let count = count_zeros(region, pot, 64)?;
    out.push(CheckResult::new("pole_count", region_label.clone(), (count - poles.len() as i64).abs() as f64, 0.0));
    let (mut pres, mut dual, mut pair, mut eig, mut tail, mut tr): (f64, f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &poles {
        let c = match_coeffs(p.k_n, pot)?;
        pres = pres.max(c.jplus.norm() / c.jminus.norm());
        let circle = residue_by_contour(p.k_n, pot, RESIDUE_CIRCLE_RADIUS, RESIDUE_CIRCLE_NODES)?;
        dual = dual.max(rel(circle, p.residue_s));
        match pair_antiresonance(p, pot) {
            Ok(anti) => {
                pair = pair.max(rel(anti.m_sq, p.n_sq.conj()));
                let sr = gamow_state(p, pot)?;
                let sa = antiresonance_state(&anti, pot)?;
                eig = eig.max(schrodinger_residual(&sr, pot, 400)?).max(schrodinger_residual(&sa, pot, 400)?);
                tail = tail.max(tail_purity(&sr, 50)).max(tail_purity(&sa, 50));
                let grid: Vec<f64> = (1..=300).map(|j| 3.0 * pot.b * j as f64 / 300.0).collect();
                let reference: Vec<Complex64> = grid.iter().map(|&r| sr.value(r).conj()).collect();
                let target: Vec<Complex64> = grid.iter().map(|&r| sa.value(r)).collect();
                tr = tr.max(global_phase_fit(&reference, &target).1);
            }
            Err(_) => pair = f64::INFINITY,
        }
    }
    let n_label = format!("{} poles in {region_label}", poles.len());
    out.push(CheckResult::new("pole_residual", n_label.clone(), pres, tol.get("pole_residual")));
    out.push(CheckResult::new("residue_duality", n_label.clone(), dual, tol.get("residue_duality")));
    out.push(CheckResult::new("pairing", n_label.clone(), pair, tol.get("pairing")));
    out.push(CheckResult::new("eigen_residual", n_label.clone(), eig, tol.get("eigen_residual")));
    out.push(CheckResult::new("tail_purity", n_label.clone(), tail, tol.get("tail_purity")));
    out.push(CheckResult::new("time_reversal", n_label, tr, tol.get("time_reversal")));

    // Expansions.
    let cs = &settings.contour;
    let test = &settings.test;
    let radii: Vec<f64> = (1..=cs.n_radii).map(|j| pot.b * j as f64 / cs.n_radii as f64).collect();
    let r_extent = test.r_max().max(pot.b);
    let grid = KGrid::graded(cs.k_max, cs.grid_nodes, pot, r_extent)?;
    let recs = ExpansionMode::ALL
        .iter()
        .map(|&m| reconstruct_continuum(test, &grid, pot, m, &radii))
        .collect::<Result<Vec<_>>>()?;
    let mut modes: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            modes = modes.max(error_norms(&radii, &recs[i], &recs[j]).l2);
        }
    }
    out.push(CheckResult::new("mode_equivalence", format!("k_max = {}, {} nodes", cs.k_max, grid.len()), modes, tol.get("mode_equivalence")));

    let search_all = SearchRegion::new(0.0, cs.k_max, -3.0, 0.0)?;
    let all = if pot.is_free() { Vec::new() } else { find_resonances(&search_all, pot, tol.get("newton"))? };
    let (used, auto_depth) = select_poles(&all, cs.n_poles, cs.k_max);
    let depth = cs.depth.or(auto_depth).unwrap_or(0.5);
    let contour = Contour::rectangle(depth, cs.k_max, pot, cs.max_panel)?;
    let input = ExpansionInput::new(test.clone(), used.clone(), contour, grid.clone(), radii.clone(), pot)?;
    let alpha = 0.1;
    let a = resonance_expansion(&input, alpha, pot, ExpansionMode::OutIn)?;
    out.push(CheckResult::new(
        "expansion",
        format!("{} poles, depth {depth:.4}, alpha {alpha}", used.len()),
        a.reconstruction_error.relative_l2,
        tol.get("expansion"),
    ));
    // A second contour bending through the same gap.
    let shallow = depth - 0.2 * (depth - used.iter().map(|p| -p.k_n.0.im).fold(0.0, f64::max));
    let bent = Contour::polyline(
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, -shallow),
            Complex64::new(0.5 * cs.k_max, -depth),
            Complex64::new(cs.k_max, -shallow),
            Complex64::new(cs.k_max, 0.0),
        ],
        pot,
        cs.max_panel,
    )?;
    let b = resonance_expansion(&input.with_contour(bent, pot)?, alpha, pot, ExpansionMode::OutIn)?;
    let deform = error_norms(&radii, &a.expansion, &b.expansion).l2;
    out.push(CheckResult::new("deformation", "rectangle vs bent contour", deform, tol.get("deformation")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut m = BTreeMap::new();
        m.insert("unitarity".to_string(), 1e-9);
        assert_eq!(Tolerances::with_overrides(&m).unwrap().get("unitarity"), 1e-9);
        m.insert("made_up".to_string(), 1.0);
        assert!(Tolerances::with_overrides(&m).is_err());
    }

    #[test]
    fn pole_selection_depth() {
        let pot = PotentialSpec::reference();
        let all = find_resonances(&SearchRegion::new(0.0, 40.0, -3.0, 0.0).unwrap(), &pot, 1e-12).unwrap();
        let (used, depth) = select_poles(&all, 4, 40.0);
        assert_eq!(used.len(), 4);
        let d = depth.unwrap();
        assert!(d > 0.6787 && d < 0.7340);
    }

    #[test]
    fn free_particle_suite_passes() {
        let pot = PotentialSpec::free(1.0, 2.0).unwrap();
        let mut settings = VerifySettings::default();
        settings.contour.grid_nodes = 1024;
        let results = run_all(&pot, &settings).unwrap();
        for r in &results {
            assert!(r.passed, "{r:?}");
        }
    }
}
