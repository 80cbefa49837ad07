//! Resonance poles of the S-matrix: zeros of `J+` in the fourth quadrant,
//! their residues, Gamow normalizations and anti-resonance partners.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jost::{self, jplus_with_derivative, match_coeffs};
use crate::model::{energy_from_k, ComplexEnergy, PotentialSpec, WaveNumber};
use crate::quadrature::pairwise_sum;

/// Poles closer than this are merged into one.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// A returned pole satisfies `|J+| ≤ POLE_RESIDUAL·|J-|`.
pub const POLE_RESIDUAL: f64 = 1e-10;
/// `residue_s` refuses points with `|J+| > RESIDUE_GUARD·max(1, |J-|)`.
pub const RESIDUE_GUARD: f64 = 1e-8;
/// Radius and node count of the contour cross-check for residues.
pub const RESIDUE_CIRCLE_RADIUS: f64 = 1e-4;
pub const RESIDUE_CIRCLE_NODES: usize = 64;
/// Default boundary resolution of the argument-principle counter.
pub const DEFAULT_BOUNDARY_POINTS: usize = 64;

const MAX_NEWTON: usize = 80;
const MAX_DEPTH: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        for (name, v) in [("re_min", re_min), ("re_max", re_max), ("im_min", im_min), ("im_max", im_max)] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::InvalidArgument(format!(
                "search region needs re_min < re_max and im_min < im_max (got [{re_min}, {re_max}] x [{im_min}, {im_max}])"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// The fourth-quadrant box `[0, 8] × [−3, 0]`.
    pub fn default_resonance() -> Self {
        Self { re_min: 0.0, re_max: 8.0, im_min: -3.0, im_max: 0.0 }
    }

    pub fn is_fourth_quadrant(&self) -> bool {
        self.re_min >= 0.0 && self.im_max <= 0.0
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn grown(&self, by: f64) -> Self {
        let d = by * self.width().max(self.height());
        Self { re_min: self.re_min - d, re_max: self.re_max + d, im_min: self.im_min - d, im_max: self.im_max + d }
    }

    fn split(&self, fx: f64, fy: f64) -> [Self; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        [
            Self { re_min: self.re_min, re_max: xm, im_min: self.im_min, im_max: ym },
            Self { re_min: xm, re_max: self.re_max, im_min: self.im_min, im_max: ym },
            Self { re_min: self.re_min, re_max: xm, im_min: ym, im_max: self.im_max },
            Self { re_min: xm, re_max: self.re_max, im_min: ym, im_max: self.im_max },
        ]
    }

    fn describe(&self) -> String {
        format!("[{}, {}] x [{}, {}]", self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePole {
    pub k_n: WaveNumber,
    pub z_n: ComplexEnergy,
    pub residue_s: Complex64,
    pub n_sq: Complex64,
    pub newton_error: f64,
    /// Set when another root within the dedup distance was folded in.
    pub merged: bool,
}

impl ResonancePole {
    /// `E_n` of `z_n = E_n − iΓ_n/2`.
    pub fn energy(&self) -> f64 {
        self.z_n.z.re
    }

    pub fn width(&self) -> f64 {
        -2.0 * self.z_n.z.im
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiResonancePole {
    pub k: WaveNumber,
    pub z: ComplexEnergy,
    pub m_sq: Complex64,
    /// The resonance this one is paired with.
    pub partner: WaveNumber,
}

fn jplus(q: Complex64, pot: &PotentialSpec) -> Result<Complex64> {
    Ok(match_coeffs(WaveNumber(q), pot)?.jplus)
}

/// Sum of phase increments of `J+` from `z0` to `z1`, bisecting wherever a
/// single step turns by more than π/3.
fn phase_change(z0: Complex64, z1: Complex64, f0: Complex64, f1: Complex64, pot: &PotentialSpec, depth: usize) -> Result<f64> {
    let d = (f1 / f0).arg();
    if d.abs() <= PI / 3.0 {
        return Ok(d);
    }
    if depth == 0 {
        return Err(Error::BoundaryZero { region: format!("segment {z0} -> {z1}") });
    }
    let zm = 0.5 * (z0 + z1);
    let fm = jplus(zm, pot)?;
    if fm.norm() == 0.0 {
        return Err(Error::BoundaryZero { region: format!("J+ vanishes at {zm}") });
    }
    Ok(phase_change(z0, zm, f0, fm, pot, depth - 1)? + phase_change(zm, z1, fm, f1, pot, depth - 1)?)
}

fn boundary_points(region: &SearchRegion, per_side: usize) -> Vec<Complex64> {
    let c = region.corners();
    let mut pts = Vec::with_capacity(4 * per_side + 1);
    for side in 0..4 {
        let (z0, z1) = (c[side], c[(side + 1) % 4]);
        for j in 0..per_side {
            pts.push(z0 + (z1 - z0) * (j as f64 / per_side as f64));
        }
    }
    pts.push(c[0]);
    pts
}

/// One pass of the argument principle at fixed resolution.
fn winding(region: &SearchRegion, pot: &PotentialSpec, per_side: usize) -> Result<f64> {
    let pts = boundary_points(region, per_side);
    let vals = pts.iter().map(|&z| jplus(z, pot)).collect::<Result<Vec<_>>>()?;
    // A zero closer to the boundary than a small fraction of the cell
    // makes the count fragile.
    let guard = 1e-8_f64.max(1e-9 * region.width().max(region.height()));
    for &z in &pts {
        if jost::zero_distance_estimate(z, pot) < guard {
            return Err(Error::BoundaryZero { region: format!("{} near {z}", region.describe()) });
        }
    }
    let mut total = 0.0;
    for j in 0..pts.len() - 1 {
        total += phase_change(pts[j], pts[j + 1], vals[j], vals[j + 1], pot, MAX_DEPTH)?;
    }
    Ok(total / (2.0 * PI))
}

fn count_exact(region: &SearchRegion, pot: &PotentialSpec, n_boundary: usize) -> Result<i64> {
    let mut n = n_boundary.max(4);
    for _ in 0..6 {
        let w = winding(region, pot, n)?;
        let rounded = w.round();
        if (w - rounded).abs() <= 0.05 {
            return Ok(rounded as i64);
        }
        n *= 2;
    }
    Err(Error::BoundaryZero { region: region.describe() })
}

/// Number of zeros of `J+` inside `region` by the argument principle.
/// A zero on (or within roundoff of) the boundary triggers a small
/// outward perturbation of the rectangle.
pub fn count_zeros(region: &SearchRegion, pot: &PotentialSpec, n_boundary: usize) -> Result<i64> {
    if pot.is_free() {
        return Ok(0);
    }
    let mut last = None;
    for attempt in 0..5 {
        let r = if attempt == 0 { *region } else { region.grown(1e-7 * 10f64.powi(attempt)) };
        match count_exact(&r, pot, n_boundary) {
            Ok(n) => return Ok(n),
            Err(e @ Error::BoundaryZero { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::BoundaryZero { region: region.describe() }))
}

/// Number of zeros of `J+` enclosed by a closed counter-clockwise polygon
/// (the last vertex connects back to the first).
pub fn count_zeros_in_polygon(vertices: &[Complex64], pot: &PotentialSpec, per_side: usize) -> Result<i64> {
    if vertices.len() < 3 {
        return Err(Error::InvalidArgument("a polygon needs at least three vertices".into()));
    }
    if pot.is_free() {
        return Ok(0);
    }
    let mut n = per_side.max(4);
    for _ in 0..6 {
        let mut pts = Vec::with_capacity(vertices.len() * n + 1);
        for (j, &z0) in vertices.iter().enumerate() {
            let z1 = vertices[(j + 1) % vertices.len()];
            for i in 0..n {
                pts.push(z0 + (z1 - z0) * (i as f64 / n as f64));
            }
        }
        pts.push(vertices[0]);
        for &z in &pts {
            if jost::zero_distance_estimate(z, pot) < 1e-8 {
                return Err(Error::BoundaryZero { region: format!("polygon passes near a zero at {z}") });
            }
        }
        let vals = pts.iter().map(|&z| jplus(z, pot)).collect::<Result<Vec<_>>>()?;
        let mut total = 0.0;
        for j in 0..pts.len() - 1 {
            total += phase_change(pts[j], pts[j + 1], vals[j], vals[j + 1], pot, MAX_DEPTH)?;
        }
        let w = total / (2.0 * PI);
        if (w - w.round()).abs() <= 0.05 {
            return Ok(w.round() as i64);
        }
        n *= 2;
    }
    Err(Error::BoundaryZero { region: "polygon".into() })
}

struct Root {
    k: Complex64,
    step: f64,
}

fn newton(start: Complex64, pot: &PotentialSpec, tol: f64) -> Option<Root> {
    let mut k = start;
    for _ in 0..MAX_NEWTON {
        let (f, df) = jplus_with_derivative(WaveNumber(k), pot);
        if df.norm() == 0.0 || !f.re.is_finite() {
            return None;
        }
        let dk = f / df;
        k -= dk;
        if !(k.re.is_finite() && k.im.is_finite()) {
            return None;
        }
        if dk.norm() < tol {
            // One polishing step records the final correction.
            let (f, df) = jplus_with_derivative(WaveNumber(k), pot);
            let dk = f / df;
            let step = dk.norm();
            if step < tol {
                k -= dk;
            }
            return Some(Root { k, step });
        }
    }
    None
}

/// Child split fractions tried in order; off-centre so that split lines
/// rarely pass through a zero.
const SPLITS: [(f64, f64); 4] = [(0.5137, 0.4871), (0.4789, 0.5213), (0.5431, 0.4577), (0.4411, 0.5529)];

enum CellOutcome {
    Root(Root),
    Children(Vec<(SearchRegion, i64)>),
}

fn process_cell(cell: &SearchRegion, count: i64, pot: &PotentialSpec, tol: f64, n_boundary: usize) -> Result<CellOutcome> {
    let small = cell.width().max(cell.height()) < 1e-9;
    if count == 1 || small {
        let centre = Complex64::new(0.5 * (cell.re_min + cell.re_max), 0.5 * (cell.im_min + cell.im_max));
        if let Some(root) = newton(centre, pot, tol) {
            let margin = 1e-9 * (1.0 + centre.norm());
            if small || inside_with_margin(cell, root.k, margin) {
                return Ok(CellOutcome::Root(root));
            }
        }
        if small {
            return Err(Error::NonConvergence { cell: cell.describe(), iterations: MAX_NEWTON });
        }
    }
    for (fx, fy) in SPLITS {
        let children = cell.split(fx, fy);
        let counts: Result<Vec<i64>> = children.iter().map(|c| count_exact(c, pot, n_boundary)).collect();
        match counts {
            Ok(counts) if counts.iter().sum::<i64>() == count => {
                return Ok(CellOutcome::Children(
                    children.into_iter().zip(counts).filter(|(_, n)| *n > 0).collect(),
                ));
            }
            Ok(_) | Err(Error::BoundaryZero { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonConvergence { cell: cell.describe(), iterations: 0 })
}

fn inside_with_margin(cell: &SearchRegion, z: Complex64, margin: f64) -> bool {
    z.re >= cell.re_min - margin && z.re <= cell.re_max + margin && z.im >= cell.im_min - margin && z.im <= cell.im_max + margin
}

/// All zeros of `J+` in a fourth-quadrant `region`, sorted by `Re k`.
///
/// Cells are quadrisected until each holds one zero by the argument
/// principle, then Newton iteration with a bicomplex-step derivative runs
/// from the cell centre until the correction falls below `tol`.
pub fn find_resonances(region: &SearchRegion, pot: &PotentialSpec, tol: f64) -> Result<Vec<ResonancePole>> {
    if !(tol >= 1e-13) {
        return Err(Error::InvalidArgument(format!("Newton tolerance must be at least 1e-13 (got {tol})")));
    }
    if !region.is_fourth_quadrant() {
        return Err(Error::InvalidArgument(format!(
            "resonance search needs re_min >= 0 and im_max <= 0 (got {})",
            region.describe()
        )));
    }
    if pot.is_free() {
        return Ok(Vec::new());
    }
    let n_boundary = DEFAULT_BOUNDARY_POINTS;
    let total = count_zeros(region, pot, n_boundary)?;
    let mut roots = Vec::new();
    let mut frontier = if total > 0 { vec![(*region, total)] } else { Vec::new() };
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        if depth > 60 {
            return Err(Error::NonConvergence { cell: frontier[0].0.describe(), iterations: depth });
        }
        let outcomes: Vec<Result<CellOutcome>> = frontier
            .par_iter()
            .map(|(cell, count)| process_cell(cell, *count, pot, tol, n_boundary))
            .collect();
        let mut next = Vec::new();
        for outcome in outcomes {
            match outcome? {
                CellOutcome::Root(root) => roots.push(root),
                CellOutcome::Children(children) => next.extend(children),
            }
        }
        frontier = next;
    }

    roots.sort_by(|x, y| x.k.re.total_cmp(&y.k.re).then(x.k.im.total_cmp(&y.k.im)));
    let mut unique: Vec<(Root, bool)> = Vec::new();
    for root in roots {
        match unique.iter_mut().find(|(u, _)| (u.k - root.k).norm() < DEDUP_DISTANCE) {
            Some((_, merged)) => *merged = true,
            None => unique.push((root, false)),
        }
    }

    unique
        .into_iter()
        .map(|(root, merged)| {
            let (_, djp) = jplus_with_derivative(WaveNumber(root.k), pot);
            if djp.norm() <= 1e-10 {
                return Err(Error::NonConvergence { cell: format!("non-simple zero near {}", root.k), iterations: MAX_NEWTON });
            }
            build_pole(root.k, root.step, merged, pot)
        })
        .collect()
}

fn build_pole(k: Complex64, newton_error: f64, merged: bool, pot: &PotentialSpec) -> Result<ResonancePole> {
    let k_n = WaveNumber(k);
    let c = match_coeffs(k_n, pot)?;
    if c.jplus.norm() > POLE_RESIDUAL * c.jminus.norm() {
        return Err(Error::NonConvergence { cell: format!("Newton stalled at {k} with |J+| = {:e}", c.jplus.norm()), iterations: MAX_NEWTON });
    }
    let res = residue_s(k_n, pot)?;
    Ok(ResonancePole { k_n, z_n: energy_from_k(k_n, pot), residue_s: res, n_sq: Complex64::new(0.0, 1.0) * res, newton_error, merged })
}

/// `res S` at a zero of `J+`, as `J-(k) / J+'(k)`.
pub fn residue_s(k_pole: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    let c = match_coeffs(k_pole, pot)?;
    if c.jplus.norm() > RESIDUE_GUARD * c.jminus.norm().max(1.0) {
        return Err(Error::NotAPole { q: k_pole.0, jplus_abs: c.jplus.norm() });
    }
    let (_, djp) = jplus_with_derivative(k_pole, pot);
    Ok(c.jminus / djp)
}

/// `(1/2πi) ∮ S(q) dq` on a circle around `centre` by the trapezoid rule.
pub fn residue_by_contour(centre: WaveNumber, pot: &PotentialSpec, radius: f64, nodes: usize) -> Result<Complex64> {
    let terms = (0..nodes)
        .map(|j| {
            let e = Complex64::from_polar(radius, 2.0 * PI * j as f64 / nodes as f64);
            let s = jost::s_matrix(WaveNumber(centre.0 + e), pot)?;
            Ok(s * e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms) / nodes as f64)
}

/// The partner pole at `−conj(k_n)`, with `M²` computed there afresh and
/// checked against `conj(N²)`.
pub fn pair_antiresonance(pole: &ResonancePole, pot: &PotentialSpec) -> Result<AntiResonancePole> {
    let k = pole.k_n.reflect();
    let m_sq = Complex64::new(0.0, 1.0) * residue_s(k, pot)?;
    let expected = pole.n_sq.conj();
    if (m_sq - expected).norm() > 1e-8 * expected.norm() {
        return Err(Error::PairingViolation {
            k: k.0,
            reason: format!("M^2 = {m_sq} differs from conj(N^2) = {expected}"),
        });
    }
    let probe = jost::s_matrix(WaveNumber(k.0 + 1e-6), pot)?;
    if probe.norm() <= 1e4 {
        return Err(Error::PairingViolation { k: k.0, reason: format!("|S| = {:e} next to the reflected point", probe.norm()) });
    }
    Ok(AntiResonancePole { k, z: energy_from_k(k, pot), m_sq, partner: pole.k_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sheet;

    fn region() -> SearchRegion {
        SearchRegion::new(0.0, 6.0, -2.0, 0.0).unwrap()
    }

    #[test]
    fn free_particle_has_no_poles() {
        let free = PotentialSpec::free(1.0, 2.0).unwrap();
        assert_eq!(count_zeros(&region(), &free, 64).unwrap(), 0);
        assert!(find_resonances(&region(), &free, 1e-12).unwrap().is_empty());
        assert!(matches!(residue_s(WaveNumber::new(2.0, -0.1), &free), Err(Error::NotAPole { .. })));
    }

    #[test]
    fn no_zeros_in_upper_half_plane() {
        let pot = PotentialSpec::reference();
        let upper = SearchRegion::new(-6.0, 6.0, 0.01, 3.0).unwrap();
        assert_eq!(count_zeros(&upper, &pot, 64).unwrap(), 0);
    }

    #[test]
    fn reference_poles_are_consistent() {
        let pot = PotentialSpec::reference();
        let poles = find_resonances(&region(), &pot, 1e-12).unwrap();
        assert_eq!(poles.len() as i64, count_zeros(&region(), &pot, 64).unwrap());
        assert_eq!(poles.len(), 3);
        for p in &poles {
            let c = match_coeffs(p.k_n, &pot).unwrap();
            assert!(c.jplus.norm() <= POLE_RESIDUAL * c.jminus.norm());
            assert!(p.k_n.0.im < 0.0 && p.k_n.0.re > 0.0);
            assert_eq!(p.n_sq, Complex64::new(0.0, 1.0) * p.residue_s);
            assert!(p.width() > 0.0);
            assert_eq!(p.z_n.sheet, Sheet::Second);
            assert!(!p.merged);
        }
        assert!(poles.windows(2).all(|w| w[0].k_n.0.re < w[1].k_n.0.re));
        assert_eq!(poles, find_resonances(&region(), &pot, 1e-12).unwrap());
    }

    #[test]
    fn residues_agree_with_contour() {
        let pot = PotentialSpec::reference();
        for p in find_resonances(&region(), &pot, 1e-12).unwrap() {
            let by_contour = residue_by_contour(p.k_n, &pot, RESIDUE_CIRCLE_RADIUS, RESIDUE_CIRCLE_NODES).unwrap();
            assert!((by_contour - p.residue_s).norm() <= 1e-8 * p.residue_s.norm());
        }
    }

    #[test]
    fn antiresonances_pair() {
        let pot = PotentialSpec::reference();
        for p in find_resonances(&region(), &pot, 1e-12).unwrap() {
            let a = pair_antiresonance(&p, &pot).unwrap();
            assert_eq!(a.k.0, Complex64::new(-p.k_n.0.re, p.k_n.0.im));
            assert!((a.z.z - p.z_n.z.conj()).norm() <= 1e-13 * p.z_n.z.norm());
            assert!(a.z.z.im > 0.0);
            assert_eq!(a.z.sheet, Sheet::Second);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let pot = PotentialSpec::reference();
        assert!(SearchRegion::new(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(find_resonances(&region(), &pot, 1e-14).is_err());
        let upper = SearchRegion::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(find_resonances(&upper, &pot, 1e-12).is_err());
    }

    #[test]
    fn boundary_through_pole_is_perturbed() {
        let pot = PotentialSpec::reference();
        let p = find_resonances(&region(), &pot, 1e-12).unwrap()[0].k_n.0;
        let through = SearchRegion::new(p.re, 6.0, -2.0, 0.0).unwrap();
        let n = count_zeros(&through, &pot, 64).unwrap();
        assert!(n == 2 || n == 3);
    }
}
