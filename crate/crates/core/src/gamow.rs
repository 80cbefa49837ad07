//! Gamow eigensolutions at resonance and anti-resonance poles.
//!
//! At a zero of `J+` the regular solution is purely outgoing beyond the
//! shell, `χ = J3 e^{ikr}`, so dividing by `J3` and multiplying by the
//! normalization gives
//!
//! ```text
//!   0 < r < a :  N sin(k r) / J3
//!   a < r < b :  N (J1/J3 e^{iQr} + J2/J3 e^{-iQr})
//!   b < r     :  N e^{ikr}
//! ```
//!
//! Anti-resonances use the same formula at `−conj(k)` with inner momentum
//! `−conj(Q)`, giving a purely incoming tail.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jost::{match_coeffs_on_branch, ShellForm};
use crate::model::{inner_momentum, principal_sqrt, ComplexEnergy, PotentialSpec, WaveNumber};
use crate::poles::{AntiResonancePole, ResonancePole};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Matching radii are skipped by this much on residual grids.
pub const KINK_OFFSET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Resonance,
    AntiResonance,
}

/// Piecewise coefficients of a Gamow state, all divided by `J3` at the pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamowCoeffs {
    pub inv_j3: Complex64,
    /// `J1/J3`, `J2/J3` (or the linear-limit analogues).
    pub shell: ShellForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamowState {
    pub kind: StateKind,
    pub k: WaveNumber,
    pub inner_q: Complex64,
    pub z: ComplexEnergy,
    /// `N` (or `M`): the principal square root of `norm_sq`.
    pub norm: Complex64,
    pub norm_sq: Complex64,
    pub coeffs: GamowCoeffs,
    a: f64,
    b: f64,
}

fn build(kind: StateKind, k: WaveNumber, inner_q: Complex64, z: ComplexEnergy, norm_sq: Complex64, pot: &PotentialSpec) -> Result<GamowState> {
    let c = match_coeffs_on_branch(k, inner_q, pot)?;
    if c.j3.norm() <= 1e-12 {
        return Err(Error::J3Vanishes { k: k.0 });
    }
    let inv_j3 = 1.0 / c.j3;
    let shell = match c.shell {
        ShellForm::Oscillatory { j1, j2 } => ShellForm::Oscillatory { j1: j1 * inv_j3, j2: j2 * inv_j3 },
        ShellForm::Linear { value, slope } => ShellForm::Linear { value: value * inv_j3, slope: slope * inv_j3 },
    };
    Ok(GamowState {
        kind,
        k,
        inner_q,
        z,
        norm: principal_sqrt(norm_sq),
        norm_sq,
        coeffs: GamowCoeffs { inv_j3, shell },
        a: pot.a,
        b: pot.b,
    })
}

/// The Gamow state of a resonance, normalized by `N` with `N² = i·res S`.
pub fn gamow_state(pole: &ResonancePole, pot: &PotentialSpec) -> Result<GamowState> {
    build(StateKind::Resonance, pole.k_n, inner_momentum(pole.k_n, pot), pole.z_n, pole.n_sq, pot)
}

/// The state at `−conj(k_n)` with `M² = conj(N²)`, on inner momentum `−conj(Q_n)`.
pub fn antiresonance_state(anti: &AntiResonancePole, pot: &PotentialSpec) -> Result<GamowState> {
    let inner_q = -inner_momentum(anti.partner, pot).conj();
    build(StateKind::AntiResonance, anti.k, inner_q, anti.z, anti.m_sq, pot)
}

impl GamowState {
    /// `(u, u', u'')` at radius `r`; matching radii belong to the inner piece.
    pub fn jet(&self, r: f64) -> (Complex64, Complex64, Complex64) {
        let k = self.k.0;
        let (u, du, ddu) = if r <= self.a {
            let inv = self.coeffs.inv_j3;
            let (s, c) = ((k * r).sin(), (k * r).cos());
            (s * inv, k * c * inv, -k * k * s * inv)
        } else if r <= self.b {
            match self.coeffs.shell {
                ShellForm::Oscillatory { j1, j2 } => {
                    let p = self.inner_q;
                    let e = (I * p * r).exp();
                    let (x, y) = (j1 * e, j2 / e);
                    (x + y, I * p * (x - y), -p * p * (x + y))
                }
                ShellForm::Linear { value, slope } => (value + slope * (r - self.a), slope, Complex64::new(0.0, 0.0)),
            }
        } else {
            let e = (I * k * r).exp();
            (e, I * k * e, -k * k * e)
        };
        (self.norm * u, self.norm * du, self.norm * ddu)
    }

    pub fn value(&self, r: f64) -> Complex64 {
        self.jet(r).0
    }

    pub fn derivative(&self, r: f64) -> Complex64 {
        self.jet(r).1
    }

    /// The same state with every amplitude multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut s = *self;
        s.norm *= c;
        s.norm_sq = s.norm * s.norm;
        s
    }

    /// `(inner, outer)` one-sided values of `(u, u')` at a matching radius
    /// `r ∈ {a, b}`: the inner piece is the default evaluation there, the
    /// outer piece is the next region's formula evaluated at the same `r`.
    pub fn one_sided(&self, r: f64) -> [(Complex64, Complex64); 2] {
        let (u, du, _) = self.jet(r);
        let outer = if r == self.a {
            match self.coeffs.shell {
                ShellForm::Oscillatory { j1, j2 } => {
                    let p = self.inner_q;
                    let e = (I * p * r).exp();
                    (j1 * e + j2 / e, I * p * (j1 * e - j2 / e))
                }
                ShellForm::Linear { value, slope } => (value, slope),
            }
        } else {
            let e = (I * self.k.0 * r).exp();
            (e, I * self.k.0 * e)
        };
        [(u, du), (self.norm * outer.0, self.norm * outer.1)]
    }
}

/// Grid of `n` radii on `(0, 2b]`, nudged off the matching radii.
pub fn residual_grid(pot: &PotentialSpec, n: usize) -> Vec<f64> {
    crate::green::residual_grid(pot, n)
}

/// `max |−u''/scale + V u − z u| / max |u|` on a grid of `n_grid` radii.
pub fn schrodinger_residual(state: &GamowState, pot: &PotentialSpec, n_grid: usize) -> Result<f64> {
    if n_grid < 100 {
        return Err(Error::InvalidArgument(format!("n_grid must be at least 100 (got {n_grid})")));
    }
    let grid = residual_grid(pot, n_grid);
    let mut worst: f64 = 0.0;
    let mut biggest: f64 = 0.0;
    for &r in &grid {
        let (u, _, ddu) = state.jet(r);
        let res = -ddu / pot.scale + pot.potential_at(r) * u - state.z.z * u;
        worst = worst.max(res.norm());
        biggest = biggest.max(u.norm());
    }
    Ok(if biggest > 0.0 { worst / biggest } else { 0.0 })
}

/// `max |u(r) e^{∓ikr}/norm − 1|` over `n` points in `(b, 3b]`: purely
/// outgoing (resonance) or incoming (anti-resonance) behavior.
pub fn tail_purity(state: &GamowState, n: usize) -> f64 {
    let k = state.k.0;
    (1..=n)
        .map(|j| {
            let r = state.b + 2.0 * state.b * j as f64 / n as f64;
            let strip = (-I * k * r).exp();
            (state.value(r) * strip - state.norm).norm() / state.norm.norm()
        })
        .fold(0.0, f64::max)
}

/// Least-squares `c` minimizing `‖target − c·reference‖`, with the relative
/// residual `‖target − c·reference‖ / ‖target‖`.
pub fn global_phase_fit(reference: &[Complex64], target: &[Complex64]) -> (Complex64, f64) {
    let num: Complex64 = reference.iter().zip(target).map(|(r, t)| r.conj() * t).sum();
    let den: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    let c = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
    let resid: f64 = reference.iter().zip(target).map(|(r, t)| (t - c * r).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = target.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    (c, if scale > 0.0 { resid / scale } else { resid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poles::{find_resonances, pair_antiresonance, SearchRegion};

    fn states() -> (PotentialSpec, Vec<ResonancePole>) {
        let pot = PotentialSpec::reference();
        let region = SearchRegion::new(0.0, 6.0, -2.0, 0.0).unwrap();
        (pot, find_resonances(&region, &pot, 1e-12).unwrap())
    }

    #[test]
    fn tail_origin_and_normalization() {
        let (pot, poles) = states();
        for p in &poles {
            let s = gamow_state(p, &pot).unwrap();
            assert_eq!(s.value(0.0), Complex64::new(0.0, 0.0));
            assert!(tail_purity(&s, 50) <= 1e-11);
            assert!((s.norm * s.norm - p.n_sq).norm() <= 1e-12 * p.n_sq.norm());
            assert_eq!(s.norm_sq, p.n_sq);
        }
    }

    #[test]
    fn continuity_at_matching_radii() {
        let (pot, poles) = states();
        for p in &poles {
            let s = gamow_state(p, &pot).unwrap();
            for r in [pot.a, pot.b] {
                let [(u0, d0), (u1, d1)] = s.one_sided(r);
                assert!((u0 - u1).norm() <= 1e-11 * u0.norm().max(1e-300), "u jump at {r}");
                assert!((d0 - d1).norm() <= 1e-11 * d0.norm().max(1e-300), "u' jump at {r}");
            }
        }
    }

    #[test]
    fn eigen_residual_is_tiny_and_scale_free() {
        let (pot, poles) = states();
        for p in &poles {
            let s = gamow_state(p, &pot).unwrap();
            let r1 = schrodinger_residual(&s, &pot, 400).unwrap();
            assert!(r1 <= 1e-10);
            let r2 = schrodinger_residual(&s.scaled(Complex64::new(3.0, -2.0)), &pot, 400).unwrap();
            assert!((r1 - r2).abs() <= 1e-14);
        }
        assert!(schrodinger_residual(&gamow_state(&poles[0], &pot).unwrap(), &pot, 10).is_err());
    }

    #[test]
    fn antiresonance_states_mirror_resonances() {
        let (pot, poles) = states();
        let grid: Vec<f64> = (1..=300).map(|j| 6.0 * j as f64 / 300.0).collect();
        for p in &poles {
            let anti = pair_antiresonance(p, &pot).unwrap();
            let sa = antiresonance_state(&anti, &pot).unwrap();
            let sr = gamow_state(p, &pot).unwrap();
            assert!(tail_purity(&sa, 50) <= 1e-11);
            assert!(schrodinger_residual(&sa, &pot, 400).unwrap() <= 1e-10);
            let conj_res: Vec<_> = grid.iter().map(|&r| sr.value(r).conj()).collect();
            let anti_vals: Vec<_> = grid.iter().map(|&r| sa.value(r)).collect();
            let (c, resid) = global_phase_fit(&conj_res, &anti_vals);
            assert!(resid <= 1e-9);
            assert!((c.norm() - 1.0).abs() <= 1e-9);
            for (x, y) in conj_res.iter().zip(&anti_vals) {
                assert!((x.norm() - y.norm()).abs() <= 1e-10 * (1.0 + x.norm()));
            }
        }
    }
}
