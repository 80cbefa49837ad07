//! Continuum completeness relations and their resonance expansions.
//!
//! For a compactly supported `φ`, the three continuum reconstructions
//!
//! ```text
//!   in_in   : ∫ dk  χ+(r;k) ⟨+k|φ⟩
//!   out_out : ∫ dk  χ-(r;k) ⟨-k|φ⟩
//!   out_in  : ∫ dk  χ-(r;k) S(k) ⟨+k|φ⟩
//! ```
//!
//! share one integrand, `(2/π) χ(r;q) Φ(q) / (J+ J-)` with
//! `Φ(q) = ∫ χ(s;q) φ(s) ds`, which is analytic in the lower half plane
//! apart from the zeros of `J+`. Pushing the k-integral down onto a contour
//! picks up one Gamow term per enclosed pole and leaves a background
//! integral along the contour. A regulator `e^{−iαq²/scale}` is applied
//! throughout.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamow::{gamow_state, GamowState};
use crate::jost::{self, match_coeffs, BraKind, JostCoeffs};
use crate::model::{PotentialSpec, WaveNumber};
use crate::poles::{count_zeros_in_polygon, ResonancePole};
use crate::quadrature::{graded_panels, pairwise_sum, GaussLegendre, PanelBudget};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Gauss–Legendre order on every panel of k-grids and contours.
pub const PANEL_ORDER: usize = 16;
/// Listed poles must stay this far from a contour.
pub const MIN_POLE_DISTANCE: f64 = 1e-4;
/// Bumps must extend at least this many widths past their centre.
pub const BUMP_TAIL_WIDTHS: f64 = 7.5;

/// A real, compactly supported wave function vanishing at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `r² exp(−(r − centre)²/(2 width²))` on `(0, r_max]`.
    GaussianBump { center: f64, width: f64, r_max: f64 },
    /// Natural cubic spline through samples, zero outside `[r[0], r[last]]`.
    Sampled { r: Vec<f64>, values: Vec<f64>, #[serde(skip)] second: Vec<f64> },
}

impl TestFunction {
    pub fn gaussian_bump(center: f64, width: f64, r_max: f64) -> Result<Self> {
        for (what, v) in [("center", center), ("width", width), ("r_max", r_max)] {
            if !v.is_finite() {
                return Err(Error::InvalidTestFunction(format!("{what} is not finite")));
            }
        }
        if !(center > 0.0 && width > 0.0) {
            return Err(Error::InvalidTestFunction("bump centre and width must be positive".into()));
        }
        if r_max < center + BUMP_TAIL_WIDTHS * width {
            return Err(Error::InvalidTestFunction(format!(
                "r_max = {r_max} truncates the bump; need at least {}",
                center + BUMP_TAIL_WIDTHS * width
            )));
        }
        Ok(Self::GaussianBump { center, width, r_max })
    }

    pub fn sampled(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() || r.len() < 4 {
            return Err(Error::InvalidTestFunction("need at least four (r, value) pairs of equal length".into()));
        }
        if r.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTestFunction("samples must be finite".into()));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTestFunction("radii must be non-negative and strictly increasing".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::InvalidTestFunction("samples must vanish at both ends of the support".into()));
        }
        let second = natural_spline_second_derivatives(&r, &values);
        Ok(Self::Sampled { r, values, second })
    }

    /// Identically zero on `(0, r_max]`.
    pub fn zero(r_max: f64) -> Result<Self> {
        let r: Vec<f64> = (0..8).map(|j| r_max * j as f64 / 7.0).collect();
        Self::sampled(r, vec![0.0; 8])
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::GaussianBump { center, width, r_max } => ((center - BUMP_TAIL_WIDTHS * width).max(0.0), *r_max),
            Self::Sampled { r, .. } => (r[0], r[r.len() - 1]),
        }
    }

    pub fn r_max(&self) -> f64 {
        self.support().1
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::GaussianBump { center, width, r_max } => {
                if x <= 0.0 || x > *r_max {
                    0.0
                } else {
                    let d = (x - center) / width;
                    x * x * (-0.5 * d * d).exp()
                }
            }
            Self::Sampled { r, values, second } => {
                if x < r[0] || x > r[r.len() - 1] {
                    return 0.0;
                }
                let rebuilt;
                let second = if second.len() == r.len() {
                    second.as_slice()
                } else {
                    rebuilt = natural_spline_second_derivatives(r, values);
                    rebuilt.as_slice()
                };
                let j = match r.partition_point(|&t| t <= x) {
                    0 => 0,
                    p if p >= r.len() => r.len() - 2,
                    p => p - 1,
                };
                let h = r[j + 1] - r[j];
                let a = (r[j + 1] - x) / h;
                let b = (x - r[j]) / h;
                a * values[j] + b * values[j + 1] + ((a * a * a - a) * second[j] + (b * b * b - b) * second[j + 1]) * h * h / 6.0
            }
        }
    }

    /// Knots (for samples) or the natural break points of the function.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::GaussianBump { .. } => {
                let (lo, hi) = self.support();
                vec![lo, hi]
            }
            Self::Sampled { r, .. } => r.clone(),
        }
    }

    fn min_feature(&self) -> f64 {
        match self {
            Self::GaussianBump { width, .. } => *width,
            Self::Sampled { r, .. } => r.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        }
    }

    /// `n` evenly spaced radii on `(0, r_max]`.
    pub fn default_radii(&self, n: usize) -> Vec<f64> {
        let top = self.r_max();
        (1..=n).map(|j| top * j as f64 / n as f64).collect()
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

/// Quadrature nodes on the support of a test function, with `φ·w`
/// pre-multiplied.
#[derive(Debug, Clone)]
struct SupportRule {
    nodes: Vec<f64>,
    phi_w: Vec<f64>,
}

impl SupportRule {
    /// Panels no longer than `min(feature/2, 2/q_max)`, split at the knots
    /// of the function and at the matching radii.
    fn new(test: &TestFunction, pot: &PotentialSpec, q_max: f64) -> Self {
        let (lo, hi) = test.support();
        let mut breaks = test.breakpoints();
        breaks.extend([pot.a, pot.b]);
        breaks.retain(|&x| x >= lo && x <= hi);
        breaks.extend([lo, hi]);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let h_max = (0.5 * test.min_feature()).min(2.0 / q_max.max(1.0));
        let gl = GaussLegendre::new(PANEL_ORDER);
        let mut nodes = Vec::new();
        let mut phi_w = Vec::new();
        for w in breaks.windows(2) {
            let pieces = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
            let step = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let a = w[0] + step * p as f64;
                for (x, wt) in gl.on_interval(a, a + step) {
                    nodes.push(x);
                    phi_w.push(test.eval(x) * wt);
                }
            }
        }
        Self { nodes, phi_w }
    }

    /// `Φ(q) = ∫ χ(s;q) φ(s) ds`.
    fn transform(&self, coeffs: &JostCoeffs) -> Complex64 {
        let terms: Vec<Complex64> = self.nodes.iter().zip(&self.phi_w).map(|(&s, &w)| coeffs.value(s) * w).collect();
        pairwise_sum(&terms)
    }

    fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let terms: Vec<Complex64> = self.nodes.iter().zip(&self.phi_w).map(|(&s, &w)| f(s) * w).collect();
        pairwise_sum(&terms)
    }
}

/// Which completeness relation is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionMode {
    InIn,
    OutOut,
    OutIn,
}

impl ExpansionMode {
    pub const ALL: [Self; 3] = [Self::InIn, Self::OutOut, Self::OutIn];

    pub fn label(&self) -> &'static str {
        match self {
            Self::InIn => "in-in",
            Self::OutOut => "out-out",
            Self::OutIn => "out-in",
        }
    }
}

impl FromStr for ExpansionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "in-in" => Ok(Self::InIn),
            "out-out" => Ok(Self::OutOut),
            "out-in" => Ok(Self::OutIn),
            other => Err(Error::InvalidArgument(format!("unknown expansion mode '{other}' (expected in-in, out-out or out-in)"))),
        }
    }
}

/// How bras and kets are carried off the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuation {
    /// Every eigenfunction continued from its values at `E + i0`.
    #[default]
    UpperRim,
    /// The refuted prescription: the slots that equal `conj(χ+)` on the
    /// real axis are continued as `conj(χ+(q))` instead, which is not
    /// analytic in `q`.
    Naive,
}

/// `⟨±q|φ⟩ = ∫ χ∓(s;q) φ(s) ds`.
pub fn project(test: &TestFunction, q: WaveNumber, pot: &PotentialSpec, kind: BraKind) -> Result<Complex64> {
    let coeffs = match_coeffs(q, pot)?;
    let rule = SupportRule::new(test, pot, q.0.norm());
    let phi = rule.transform(&coeffs);
    jost::check_wave_number(q)?;
    let jost = match kind {
        BraKind::In => {
            coeffs.check_not_antipole()?;
            coeffs.jminus
        }
        BraKind::Out => {
            coeffs.check_not_pole()?;
            coeffs.jplus
        }
    };
    Ok(jost::sqrt_two_over_pi() * phi / jost)
}

/// Nodes and weights on `[0, k_max]`, graded towards the real-axis shadow
/// of nearby Jost zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub k_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl KGrid {
    /// A composite Gauss–Legendre grid with `n_nodes` rounded up to a
    /// multiple of [`PANEL_ORDER`]. `r_extent` bounds the radii involved
    /// and caps panel lengths at the oscillation scale `1/r_extent`.
    pub fn graded(k_max: f64, n_nodes: usize, pot: &PotentialSpec, r_extent: f64) -> Result<Self> {
        if !(k_max > 0.0 && k_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("k_max must be positive (got {k_max})")));
        }
        if n_nodes < PANEL_ORDER {
            return Err(Error::InvalidArgument(format!("a k-grid needs at least {PANEL_ORDER} nodes")));
        }
        let osc = 1.0 / r_extent.max(1e-3);
        let panels = graded_panels(k_max, PanelBudget::Count(n_nodes.div_ceil(PANEL_ORDER)), |k| {
            (0.5 * jost::zero_distance_estimate(Complex64::new(k, 0.0), pot)).min(osc)
        });
        let gl = GaussLegendre::new(PANEL_ORDER);
        let mut nodes = Vec::with_capacity(panels.len() * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels.len() * PANEL_ORDER);
        for (lo, hi) in panels {
            for (x, w) in gl.on_interval(lo, hi) {
                nodes.push(x);
                weights.push(w);
            }
        }
        Ok(Self { k_max, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A polyline in the k-plane with a composite Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub vertices: Vec<Complex64>,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Number of nodes on each segment.
    pub segment_nodes: Vec<usize>,
}

impl Contour {
    /// Each segment is split until no panel exceeds `max_panel` or half the
    /// distance to the nearest Jost zero.
    pub fn polyline(vertices: Vec<Complex64>, pot: &PotentialSpec, max_panel: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument("a contour needs at least two vertices".into()));
        }
        if !(max_panel > 0.0) {
            return Err(Error::InvalidArgument("panel length must be positive".into()));
        }
        let gl = GaussLegendre::new(PANEL_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut segment_nodes = Vec::new();
        for seg in vertices.windows(2) {
            let (z0, z1) = (seg[0], seg[1]);
            let len = (z1 - z0).norm();
            if len == 0.0 {
                segment_nodes.push(0);
                continue;
            }
            let dir = (z1 - z0) / len;
            let panels = graded_panels(len, PanelBudget::Resolution, |t| {
                (0.5 * jost::zero_distance_estimate(z0 + dir * t, pot)).min(max_panel)
            });
            let before = nodes.len();
            for (lo, hi) in panels {
                for (z, w) in gl.on_segment(z0 + dir * lo, z0 + dir * hi) {
                    nodes.push(z);
                    weights.push(w);
                }
            }
            segment_nodes.push(nodes.len() - before);
        }
        Ok(Self { vertices, nodes, weights, segment_nodes })
    }

    /// `(0,0) → (0,−depth) → (k_max,−depth) → (k_max,0)`.
    pub fn rectangle(depth: f64, k_max: f64, pot: &PotentialSpec, max_panel: f64) -> Result<Self> {
        if !(depth > 0.0 && k_max > 0.0) {
            return Err(Error::InvalidArgument(format!("contour depth and k_max must be positive (got {depth}, {k_max})")));
        }
        let v = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -depth),
            Complex64::new(k_max, -depth),
            Complex64::new(k_max, 0.0),
        ];
        Self::polyline(v, pot, max_panel)
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        self.vertices[self.vertices.len() - 1]
    }

    /// Closed loop: along the contour, then back along the real axis.
    fn closed_loop(&self) -> Vec<Complex64> {
        self.vertices.clone()
    }

    /// Checks the contour against a pole list: endpoints on the real axis,
    /// no listed pole within [`MIN_POLE_DISTANCE`], every listed pole
    /// enclosed, and no other zero of `J+` enclosed.
    pub fn validate(&self, poles: &[ResonancePole], pot: &PotentialSpec) -> Result<()> {
        let (s, e) = (self.start(), self.end());
        if s.im != 0.0 || e.im != 0.0 || !(s.re >= 0.0 && e.re > s.re) {
            return Err(Error::InvalidArgument("contour must start and end on the positive real axis".into()));
        }
        for p in poles {
            let d = self
                .vertices
                .windows(2)
                .map(|w| distance_to_segment(p.k_n.0, w[0], w[1]))
                .chain(std::iter::once(distance_to_segment(p.k_n.0, e, s)))
                .fold(f64::INFINITY, f64::min);
            if d < MIN_POLE_DISTANCE {
                return Err(Error::ContourTooClose { pole: p.k_n.0, distance: d });
            }
        }
        let loop_ = self.closed_loop();
        for p in poles {
            if !point_in_polygon(p.k_n.0, &loop_) {
                return Err(Error::PoleSetMismatch(format!("pole {} is not enclosed by the contour", p.k_n.0)));
            }
        }
        let enclosed = count_zeros_in_polygon(&loop_, pot, 64)?;
        if enclosed != poles.len() as i64 {
            return Err(Error::PoleSetMismatch(format!(
                "contour encloses {enclosed} zeros of J+ but {} poles were listed",
                poles.len()
            )));
        }
        Ok(())
    }
}

fn distance_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn point_in_polygon(p: Complex64, poly: &[Complex64]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Everything a resonance expansion needs apart from `α` and the mode.
#[derive(Debug, Clone)]
pub struct ExpansionInput {
    pub test: TestFunction,
    pub poles: Vec<ResonancePole>,
    pub contour: Contour,
    pub grid: KGrid,
    pub radii: Vec<f64>,
    pub continuation: Continuation,
    rule: SupportRule,
    states: Vec<GamowState>,
}

impl ExpansionInput {
    pub fn new(test: TestFunction, poles: Vec<ResonancePole>, contour: Contour, grid: KGrid, radii: Vec<f64>, pot: &PotentialSpec) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidArgument("output radii must be finite, non-negative and non-empty".into()));
        }
        contour.validate(&poles, pot)?;
        let q_max = contour.nodes.iter().map(|z| z.norm()).fold(grid.k_max, f64::max);
        let rule = SupportRule::new(&test, pot, q_max);
        let states = poles.iter().map(|p| gamow_state(p, pot)).collect::<Result<Vec<_>>>()?;
        Ok(Self { test, poles, contour, grid, radii, continuation: Continuation::UpperRim, rule, states })
    }

    pub fn with_continuation(mut self, continuation: Continuation) -> Self {
        self.continuation = continuation;
        self
    }

    /// Same input on another contour (which must enclose the same poles).
    pub fn with_contour(&self, contour: Contour, pot: &PotentialSpec) -> Result<Self> {
        let mut fresh = Self::new(self.test.clone(), self.poles.clone(), contour, self.grid.clone(), self.radii.clone(), pot)?;
        fresh.continuation = self.continuation;
        Ok(fresh)
    }

    pub fn gamow_states(&self) -> &[GamowState] {
        &self.states
    }
}

/// `e^{−iαq²/scale}`.
pub fn regulator(q: Complex64, alpha: f64, pot: &PotentialSpec) -> Complex64 {
    (-I * alpha * q * q / pot.scale).exp()
}

/// The continuum integrand at one `q` for every output radius.
fn integrand(q: Complex64, rule: &SupportRule, radii: &[f64], mode: ExpansionMode, cont: Continuation, alpha: f64, pot: &PotentialSpec) -> Result<Vec<Complex64>> {
    let c = match_coeffs(WaveNumber(q), pot)?;
    let norm = jost::sqrt_two_over_pi();
    let phi = rule.transform(&c);
    let reg = regulator(q, alpha, pot);
    let naive = cont == Continuation::Naive;
    // Bra coefficient and the Jost denominator of the ket.
    let (bra, ket_den, extra) = match mode {
        ExpansionMode::InIn => {
            let bra = if naive { (norm * phi / c.jplus).conj() } else { norm * phi / c.jminus };
            (bra, c.jplus, Complex64::new(1.0, 0.0))
        }
        ExpansionMode::OutOut => (norm * phi / c.jplus, c.jminus, Complex64::new(1.0, 0.0)),
        ExpansionMode::OutIn => {
            let bra = if naive { (norm * phi / c.jplus).conj() } else { norm * phi / c.jminus };
            (bra, c.jminus, c.jminus / c.jplus)
        }
    };
    let naive_ket = naive && mode != ExpansionMode::InIn;
    let weight = bra * extra * reg;
    Ok(radii
        .iter()
        .map(|&r| {
            let ket = if naive_ket { (norm * c.value(r) / c.jplus).conj() } else { norm * c.value(r) / ket_den };
            ket * weight
        })
        .collect())
}

/// `Σ_j w_j F_j(r)` for every radius with a fixed (pairwise) summation order.
#[allow(clippy::too_many_arguments)]
fn integrate_nodes(nodes: &[Complex64], weights: &[Complex64], rule: &SupportRule, radii: &[f64], mode: ExpansionMode, cont: Continuation, alpha: f64, pot: &PotentialSpec) -> Result<Vec<Complex64>> {
    let rows = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&q, &w)| integrand(q, rule, radii, mode, cont, alpha, pot).map(|v| v.into_iter().map(|x| x * w).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let mut column = vec![Complex64::new(0.0, 0.0); rows.len()];
    Ok((0..radii.len())
        .map(|i| {
            for (slot, row) in column.iter_mut().zip(&rows) {
                *slot = row[i];
            }
            pairwise_sum(&column)
        })
        .collect())
}

/// `∫_0^{k_max} dk` of the chosen continuum integrand, without regulator.
pub fn reconstruct_continuum(test: &TestFunction, grid: &KGrid, pot: &PotentialSpec, mode: ExpansionMode, radii: &[f64]) -> Result<Vec<Complex64>> {
    reconstruct_continuum_regulated(test, grid, pot, mode, radii, 0.0)
}

pub fn reconstruct_continuum_regulated(test: &TestFunction, grid: &KGrid, pot: &PotentialSpec, mode: ExpansionMode, radii: &[f64], alpha: f64) -> Result<Vec<Complex64>> {
    if alpha < 0.0 {
        return Err(Error::AlphaNegative(alpha));
    }
    let rule = SupportRule::new(test, pot, grid.k_max);
    real_axis(&rule, grid, pot, mode, Continuation::UpperRim, radii, alpha)
}

fn real_axis(rule: &SupportRule, grid: &KGrid, pot: &PotentialSpec, mode: ExpansionMode, cont: Continuation, radii: &[f64], alpha: f64) -> Result<Vec<Complex64>> {
    let nodes: Vec<Complex64> = grid.nodes.iter().map(|&k| Complex64::new(k, 0.0)).collect();
    let weights: Vec<Complex64> = grid.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    integrate_nodes(&nodes, &weights, rule, radii, mode, cont, alpha, pot)
}

/// L², max and relative-L² size of a difference on a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub max: f64,
    pub relative_l2: f64,
}

/// Trapezoid L² norm over (possibly uneven) radii, starting from `r = 0`
/// where every admissible function vanishes.
pub fn l2_norm(radii: &[f64], values: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    let mut prev_r = 0.0;
    let mut prev_v = 0.0;
    for (&r, v) in radii.iter().zip(values) {
        let cur = v.norm_sqr();
        acc += 0.5 * (r - prev_r) * (cur + prev_v);
        prev_r = r;
        prev_v = cur;
    }
    acc.sqrt()
}

pub fn error_norms(radii: &[f64], got: &[Complex64], want: &[Complex64]) -> ErrorNorms {
    let diff: Vec<Complex64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    let l2 = l2_norm(radii, &diff);
    let reference = l2_norm(radii, want);
    ErrorNorms {
        l2,
        max: diff.iter().map(|d| d.norm()).fold(0.0, f64::max),
        relative_l2: if reference > 0.0 { l2 / reference } else { l2 },
    }
}

/// Result of one resonance expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub mode: ExpansionMode,
    pub continuation: Continuation,
    pub alpha: Vec<f64>,
    pub extrapolated: bool,
    pub radii: Vec<f64>,
    pub poles: Vec<WaveNumber>,
    /// One row per pole, one entry per radius.
    pub pole_terms: Vec<Vec<Complex64>>,
    pub gamow_sum: Vec<Complex64>,
    pub background: Vec<Complex64>,
    /// `gamow_sum + background`.
    pub expansion: Vec<Complex64>,
    /// Real-axis reconstruction with the same regulator.
    pub direct: Vec<Complex64>,
    pub target: Vec<f64>,
    /// `expansion − direct`, relative to `direct`.
    pub reconstruction_error: ErrorNorms,
    /// `expansion − φ`, relative to `φ`.
    pub target_error: ErrorNorms,
}

impl ExpansionReport {
    fn finish(mut self) -> Self {
        let target: Vec<Complex64> = self.target.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        self.reconstruction_error = error_norms(&self.radii, &self.expansion, &self.direct);
        self.target_error = error_norms(&self.radii, &self.expansion, &target);
        self
    }

    /// Error of the Gamow sum alone against `φ`.
    pub fn gamow_only_error(&self) -> ErrorNorms {
        let target: Vec<Complex64> = self.target.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        error_norms(&self.radii, &self.gamow_sum, &target)
    }
}

/// Per-pole contributions `−2πi·Res` with the regulator `e^{−iα z_n}`.
fn pole_terms(input: &ExpansionInput, mode: ExpansionMode, alpha: f64, pot: &PotentialSpec) -> Result<Vec<Vec<Complex64>>> {
    let naive = input.continuation == Continuation::Naive;
    input
        .poles
        .iter()
        .zip(&input.states)
        .map(|(pole, state)| {
            let reg = regulator(pole.k_n.0, alpha, pot);
            if naive {
                let bra_conj = matches!(mode, ExpansionMode::InIn | ExpansionMode::OutIn);
                let ket_conj = matches!(mode, ExpansionMode::OutOut | ExpansionMode::OutIn);
                let overlap = input.rule.integrate(|s| if bra_conj { state.value(s).conj() } else { state.value(s) });
                return Ok(input
                    .radii
                    .iter()
                    .map(|&r| {
                        let u = state.value(r);
                        reg * overlap * if ket_conj { u.conj() } else { u }
                    })
                    .collect());
            }
            match mode {
                // |u_n⟩⟨ũ_n|φ⟩: Gamow ket times the continued bra overlap.
                ExpansionMode::InIn => {
                    let overlap = input.rule.integrate(|s| state.value(s));
                    Ok(input.radii.iter().map(|&r| reg * state.value(r) * overlap).collect())
                }
                // −2πi · res S · χ-(r; k_n) · ⟨+k_n|φ⟩.
                ExpansionMode::OutOut | ExpansionMode::OutIn => {
                    let c = match_coeffs(pole.k_n, pot)?;
                    let norm = jost::sqrt_two_over_pi();
                    let bra = norm * input.rule.transform(&c) / c.jminus;
                    let factor = -2.0 * PI * I * pole.residue_s * reg * bra;
                    Ok(input.radii.iter().map(|&r| factor * norm * c.value(r) / c.jminus).collect())
                }
            }
        })
        .collect()
}

/// Gamow terms plus the background integral along the contour, compared
/// with the real-axis reconstruction at the same `α`.
pub fn resonance_expansion(input: &ExpansionInput, alpha: f64, pot: &PotentialSpec, mode: ExpansionMode) -> Result<ExpansionReport> {
    if !(alpha >= 0.0) {
        return Err(Error::AlphaNegative(alpha));
    }
    let terms = pole_terms(input, mode, alpha, pot)?;
    let n = input.radii.len();
    let gamow_sum: Vec<Complex64> = (0..n)
        .map(|i| {
            let column: Vec<Complex64> = terms.iter().map(|t| t[i]).collect();
            pairwise_sum(&column)
        })
        .collect();
    let background = integrate_nodes(&input.contour.nodes, &input.contour.weights, &input.rule, &input.radii, mode, input.continuation, alpha, pot)?;
    let direct = real_axis(&input.rule, &input.grid, pot, mode, input.continuation, &input.radii, alpha)?;
    let expansion = gamow_sum.iter().zip(&background).map(|(a, b)| a + b).collect();
    Ok(ExpansionReport {
        mode,
        continuation: input.continuation,
        alpha: vec![alpha],
        extrapolated: false,
        radii: input.radii.clone(),
        poles: input.poles.iter().map(|p| p.k_n).collect(),
        pole_terms: terms,
        gamow_sum,
        background,
        expansion,
        direct,
        target: input.radii.iter().map(|&r| input.test.eval(r)).collect(),
        reconstruction_error: ErrorNorms::default(),
        target_error: ErrorNorms::default(),
    }
    .finish())
}

/// Polynomial (Richardson) extrapolation of a sequence of reports to
/// `α → 0`, through all the given regulator values.
pub fn alpha_extrapolate(reports: &[ExpansionReport]) -> Result<ExpansionReport> {
    if reports.len() < 3 {
        return Err(Error::ArityTooSmall { needed: 3, got: reports.len() });
    }
    let first = &reports[0];
    if reports.iter().all(|r| r == first) {
        let mut same = first.clone();
        same.extrapolated = true;
        return Ok(same);
    }
    for r in reports {
        if r.mode != first.mode || r.radii != first.radii || r.poles != first.poles || r.continuation != first.continuation {
            return Err(Error::InvalidArgument("reports must share mode, radii, poles and continuation".into()));
        }
        if r.alpha.len() != 1 || r.extrapolated {
            return Err(Error::InvalidArgument("only single-alpha reports can be extrapolated".into()));
        }
    }
    let alphas: Vec<f64> = reports.iter().map(|r| r.alpha[0]).collect();
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(format!("alpha values must strictly decrease (got {alphas:?})")));
    }
    let errors: Vec<f64> = reports.iter().map(|r| r.target_error.l2).collect();
    if errors.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
        return Err(Error::NonMonotone(format!("target error {errors:?} does not decrease along alpha {alphas:?}")));
    }
    // Lagrange weights of the interpolating polynomial evaluated at 0.
    let weights: Vec<f64> = (0..alphas.len())
        .map(|i| {
            (0..alphas.len())
                .filter(|&j| j != i)
                .map(|j| alphas[j] / (alphas[j] - alphas[i]))
                .product()
        })
        .collect();
    let combine = |pick: &dyn Fn(&ExpansionReport) -> &Vec<Complex64>| -> Vec<Complex64> {
        (0..first.radii.len())
            .map(|i| {
                let terms: Vec<Complex64> = reports.iter().zip(&weights).map(|(r, &w)| pick(r)[i] * w).collect();
                pairwise_sum(&terms)
            })
            .collect()
    };
    let pole_terms = (0..first.pole_terms.len())
        .map(|p| combine(&|r: &ExpansionReport| &r.pole_terms[p]))
        .collect();
    Ok(ExpansionReport {
        mode: first.mode,
        continuation: first.continuation,
        alpha: alphas,
        extrapolated: true,
        radii: first.radii.clone(),
        poles: first.poles.clone(),
        pole_terms,
        gamow_sum: combine(&|r| &r.gamow_sum),
        background: combine(&|r| &r.background),
        expansion: combine(&|r| &r.expansion),
        direct: combine(&|r| &r.direct),
        target: first.target.clone(),
        reconstruction_error: ErrorNorms::default(),
        target_error: ErrorNorms::default(),
    }
    .finish())
}
