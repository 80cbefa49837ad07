//! Free and full radial Green functions, the outgoing Jost solution, and
//! the Lippmann–Schwinger residual used as an end-to-end check.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jost::{self, match_coeffs, sin_over};
use crate::model::{inner_momentum, PotentialSpec, WaveNumber, MIN_WAVE_NUMBER};
use crate::quadrature::{pairwise_sum, GaussLegendre};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Matching radii are avoided by this much on residual grids.
pub const KINK_OFFSET: f64 = 1e-9;

/// Default number of radii on which [`ls_residual`] is evaluated.
pub const RESIDUAL_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagation {
    Retarded,
    Advanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenKind {
    FreeRetarded,
    FreeAdvanced,
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSample {
    pub r: f64,
    pub s: f64,
    pub q: WaveNumber,
    pub value: Complex64,
    pub kind: GreenKind,
}

fn check_radii(r: f64, s: f64) -> Result<()> {
    if !(r >= 0.0 && s >= 0.0 && r.is_finite() && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("radii must be finite and non-negative (got {r}, {s})")));
    }
    Ok(())
}

fn check_q(q: WaveNumber) -> Result<()> {
    if !(q.0.re.is_finite() && q.0.im.is_finite()) {
        return Err(Error::NonFinite { name: "q" });
    }
    if q.0.norm() <= MIN_WAVE_NUMBER {
        return Err(Error::InvalidArgument(format!("|q| must exceed {MIN_WAVE_NUMBER:e}")));
    }
    Ok(())
}

/// Free propagator `−scale·sin(q r<)·e^{iq r>}/q`; the advanced one is the
/// same expression at `−q`. Entire in `q` apart from the removable point 0.
pub fn g0(r: f64, s: f64, q: WaveNumber, pot: &PotentialSpec, kind: Propagation) -> Result<Complex64> {
    check_radii(r, s)?;
    check_q(q)?;
    let k = match kind {
        Propagation::Retarded => q.0,
        Propagation::Advanced => -q.0,
    };
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    Ok(-pot.scale * (k * lo).sin() * (I * k * hi).exp() / k)
}

/// `f+(r; q)` and its radial derivative: equal to `e^{iqr}` beyond the
/// shell and continued inward through the matching radii.
pub fn jost_solution_with_derivative(r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<(Complex64, Complex64)> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be non-negative (got {r})")));
    }
    check_q(q)?;
    let k = q.0;
    if r > pot.b {
        let e = (I * k * r).exp();
        return Ok((e, I * k * e));
    }
    let big_q = inner_momentum(q, pot);
    if k.norm() < MIN_WAVE_NUMBER && big_q.norm() < MIN_WAVE_NUMBER {
        return Err(Error::DegenerateMatch { q: k });
    }
    // Propagate (u, u') across a region of constant momentum p by d.
    let step = |u: Complex64, du: Complex64, p: Complex64, d: f64| {
        let c = (p * d).cos();
        let sn = sin_over(p, d);
        (u * c + du * sn, du * c - u * p * p * sn)
    };
    let eb = (I * k * pot.b).exp();
    let (ub, dub) = (eb, I * k * eb);
    if r > pot.a {
        return Ok(step(ub, dub, big_q, r - pot.b));
    }
    let (ua, dua) = step(ub, dub, big_q, pot.a - pot.b);
    Ok(step(ua, dua, k, r - pot.a))
}

pub fn jost_solution(r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    Ok(jost_solution_with_derivative(r, q, pot)?.0)
}

/// `W(χ, f+) = χ f+' − χ' f+` at radius `r`; equals `−q·J+(q)` for every r.
pub fn wronskian(r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    let c = match_coeffs(q, pot)?;
    let (f, df) = jost_solution_with_derivative(r, q, pot)?;
    Ok(c.value(r) * df - c.derivative(r) * f)
}

/// Full outgoing Green function `scale·χ(r<)·f+(r>)/W`.
pub fn g_total(r: f64, s: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    check_radii(r, s)?;
    check_q(q)?;
    let c = match_coeffs(q, pot)?;
    c.check_not_pole()?;
    let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
    let f = jost_solution(hi, q, pot)?;
    Ok(-pot.scale * c.value(lo) * f / (q.0 * c.jplus))
}

pub fn green_sample(kind: GreenKind, r: f64, s: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<GreenSample> {
    let value = match kind {
        GreenKind::FreeRetarded => g0(r, s, q, pot, Propagation::Retarded)?,
        GreenKind::FreeAdvanced => g0(r, s, q, pot, Propagation::Advanced)?,
        GreenKind::Total => g_total(r, s, q, pot)?,
    };
    Ok(GreenSample { r, s, q, value, kind })
}

/// Radii in (0, 2b] stepping evenly, nudged off the matching radii.
pub fn residual_grid(pot: &PotentialSpec, n: usize) -> Vec<f64> {
    let top = 2.0 * pot.b;
    (1..=n)
        .map(|j| {
            let r = top * j as f64 / n as f64;
            if (r - pot.a).abs() < KINK_OFFSET || (r - pot.b).abs() < KINK_OFFSET {
                r + KINK_OFFSET
            } else {
                r
            }
        })
        .collect()
}

/// Largest absolute residual of
/// `χ+(r) − √(2/π) sin(qr) − ∫ G0+(r,s) V(s) χ+(s) ds`
/// over [`residual_grid`], with `n_quad` Gauss–Legendre nodes on the shell.
pub fn ls_residual(q: WaveNumber, pot: &PotentialSpec, n_quad: usize) -> Result<f64> {
    if n_quad < 64 {
        return Err(Error::InvalidArgument(format!("n_quad must be at least 64 (got {n_quad})")));
    }
    check_q(q)?;
    let coeffs = match_coeffs(q, pot)?;
    coeffs.check_not_pole()?;
    let grid = residual_grid(pot, RESIDUAL_GRID);
    let norm = jost::sqrt_two_over_pi();
    let chi_plus = |r: f64| norm * coeffs.value(r) / coeffs.jplus;
    let full = GaussLegendre::new(n_quad);
    let half = GaussLegendre::new(n_quad.div_ceil(2));

    let residuals: Vec<f64> = grid
        .par_iter()
        .map(|&r| {
            let integrand = |s: f64| {
                let g = g0(r, s, q, pot, Propagation::Retarded).unwrap_or_default();
                g * pot.v0 * chi_plus(s)
            };
            let mut terms = Vec::with_capacity(n_quad + 1);
            if r > pot.a && r < pot.b {
                // The kernel has a kink at s = r.
                terms.extend(half.on_interval(pot.a, r).map(|(s, w)| integrand(s) * w));
                terms.extend(half.on_interval(r, pot.b).map(|(s, w)| integrand(s) * w));
            } else {
                terms.extend(full.on_interval(pot.a, pot.b).map(|(s, w)| integrand(s) * w));
            }
            let integral = pairwise_sum(&terms);
            (chi_plus(r) - norm * (q.0 * r).sin() - integral).norm()
        })
        .collect();
    Ok(residuals.into_iter().fold(0.0, f64::max))
}
