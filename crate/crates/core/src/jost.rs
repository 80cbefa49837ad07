//! Regular solution, Jost functions, S-matrix and Lippmann–Schwinger
//! eigenfunctions of the shell potential at any complex wave number.
//!
//! Region layout (`u` is the regular solution `χ(r; q)`):
//!
//! ```text
//!   0 < r < a :  sin(q r)
//!   a < r < b :  J1 e^{iQr} + J2 e^{-iQr}
//!   b < r     :  J3 e^{iqr} + J4 e^{-iqr}
//! ```
//!
//! with `J+ = -2i J4`, `J- = 2i J3` and `S = J- / J+`. The coefficients
//! are closed-form functions of `q`, so evaluating them at a complex `q`
//! *is* the analytic continuation of their values on the positive k-axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_step::{self, Bicomplex, Scalar};
use crate::error::{Error, Result};
use crate::model::{inner_momentum, PotentialSpec, WaveNumber, MIN_WAVE_NUMBER};

/// Below this value of `|Q|·(b − a)` the shell solution is taken in its
/// linear limit.
pub const DEGENERATE_SHELL: f64 = 1e-8;

/// `|J+| < POLE_GUARD · |J-|` is treated as sitting on a pole.
pub const POLE_GUARD: f64 = 1e-13;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The region-2 piece of the regular solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShellForm {
    /// `J1 e^{iQr} + J2 e^{-iQr}`.
    Oscillatory { j1: Complex64, j2: Complex64 },
    /// `value + slope·(r − a)`, used when `Q → 0`.
    Linear { value: Complex64, slope: Complex64 },
}

/// Matching coefficients and Jost functions at one wave number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostCoeffs {
    pub q: WaveNumber,
    /// The inner momentum branch the coefficients were computed on.
    pub inner_q: Complex64,
    pub shell: ShellForm,
    pub j3: Complex64,
    pub j4: Complex64,
    pub jplus: Complex64,
    pub jminus: Complex64,
    a: f64,
    b: f64,
}

struct Raw<T> {
    shell: RawShell<T>,
    j3: T,
    j4: T,
}

enum RawShell<T> {
    Oscillatory { j1: T, j2: T },
    Linear { value: T, slope: T },
}

/// `sin(x·len) / x`, finite at `x = 0`.
pub(crate) fn sin_over<T: Scalar>(x: T, len: f64) -> T {
    if (x.base() * len).norm() < 1e-3 {
        let t = x * x;
        let l = Complex64::new(len, 0.0);
        let l2 = len * len;
        // len·(1 − t l²/6 + t² l⁴/120 − t³ l⁶/5040)
        let c1 = T::from_complex(Complex64::new(l2 / 6.0, 0.0));
        let c2 = T::from_complex(Complex64::new(l2 * l2 / 120.0, 0.0));
        let c3 = T::from_complex(Complex64::new(l2 * l2 * l2 / 5040.0, 0.0));
        let one = T::from_complex(Complex64::new(1.0, 0.0));
        (one - t * c1 + t * t * c2 - t * t * t * c3).scale(l)
    } else {
        (x.scale(Complex64::new(len, 0.0))).sin() / x
    }
}

fn real<T: Scalar>(x: f64) -> T {
    T::from_complex(Complex64::new(x, 0.0))
}

/// The matching algebra. Works on `w = χ/q` (which behaves like `r` at
/// the origin) so that `q = 0` needs no special case, then rescales.
fn raw_coefficients<T: Scalar>(q: T, big_q: T, pot: &PotentialSpec) -> Raw<T> {
    let (a, b) = (pot.a, pot.b);
    let half = real::<T>(0.5);
    let w_a = sin_over(q, a);
    let dw_a = q.scale(Complex64::new(a, 0.0)).cos();

    let degenerate = big_q.base().norm() * (b - a) < DEGENERATE_SHELL;
    let (shell_w, w_b, dw_b) = if degenerate {
        let w_b = w_a + dw_a.scale(Complex64::new(b - a, 0.0));
        (RawShell::Linear { value: w_a, slope: dw_a }, w_b, dw_a)
    } else {
        let ea = big_q.scale(Complex64::new(a, 0.0)).times_i().exp();
        let ratio = dw_a.times_i() / big_q;
        let k1 = (w_a - ratio) * half / ea;
        let k2 = (w_a + ratio) * half * ea;
        let eb = big_q.scale(Complex64::new(b, 0.0)).times_i().exp();
        let w_b = k1 * eb + k2 / eb;
        let dw_b = big_q.times_i() * (k1 * eb - k2 / eb);
        (RawShell::Oscillatory { j1: k1, j2: k2 }, w_b, dw_b)
    };

    let eqb = q.scale(Complex64::new(b, 0.0)).times_i().exp();
    let j3 = (q * w_b - dw_b.times_i()) * half / eqb;
    let j4 = (q * w_b + dw_b.times_i()) * half * eqb;
    let shell = match shell_w {
        RawShell::Oscillatory { j1, j2 } => RawShell::Oscillatory { j1: q * j1, j2: q * j2 },
        RawShell::Linear { value, slope } => RawShell::Linear { value: q * value, slope: q * slope },
    };
    Raw { shell, j3, j4 }
}

fn jplus_of<T: Scalar>(raw: &Raw<T>) -> T {
    raw.j4.scale(Complex64::new(0.0, -2.0))
}

fn jminus_of<T: Scalar>(raw: &Raw<T>) -> T {
    raw.j3.scale(Complex64::new(0.0, 2.0))
}

/// Matching coefficients on the principal branch of `Q`.
pub fn match_coeffs(q: WaveNumber, pot: &PotentialSpec) -> Result<JostCoeffs> {
    match_coeffs_on_branch(q, inner_momentum(q, pot), pot)
}

/// Matching coefficients with an explicit choice of inner momentum.
///
/// `inner_q` must square to `q² − scale·v0`; passing `−Q` swaps the roles
/// of `J1` and `J2` and leaves every observable unchanged.
pub fn match_coeffs_on_branch(q: WaveNumber, inner_q: Complex64, pot: &PotentialSpec) -> Result<JostCoeffs> {
    let qq = q.0;
    if !(qq.re.is_finite() && qq.im.is_finite()) {
        return Err(Error::NonFinite { name: "q" });
    }
    let expected = qq * qq - pot.scaled_height();
    if (inner_q * inner_q - expected).norm() > 1e-10 * (1.0 + expected.norm()) {
        return Err(Error::InvalidArgument(format!(
            "inner momentum {inner_q} does not square to q^2 - scale*v0 = {expected}"
        )));
    }
    if qq.norm() < MIN_WAVE_NUMBER && inner_q.norm() < MIN_WAVE_NUMBER {
        return Err(Error::DegenerateMatch { q: qq });
    }
    let raw = raw_coefficients(qq, inner_q, pot);
    let shell = match raw.shell {
        RawShell::Oscillatory { j1, j2 } => ShellForm::Oscillatory { j1, j2 },
        RawShell::Linear { value, slope } => ShellForm::Linear { value, slope },
    };
    Ok(JostCoeffs {
        q,
        inner_q,
        shell,
        j3: raw.j3,
        j4: raw.j4,
        jplus: jplus_of(&raw),
        jminus: jminus_of(&raw),
        a: pot.a,
        b: pot.b,
    })
}

impl JostCoeffs {
    pub fn j1(&self) -> Option<Complex64> {
        match self.shell {
            ShellForm::Oscillatory { j1, .. } => Some(j1),
            ShellForm::Linear { .. } => None,
        }
    }

    pub fn j2(&self) -> Option<Complex64> {
        match self.shell {
            ShellForm::Oscillatory { j2, .. } => Some(j2),
            ShellForm::Linear { .. } => None,
        }
    }

    /// `χ(r; q)`. Matching radii belong to the inner region.
    pub fn value(&self, r: f64) -> Complex64 {
        let q = self.q.0;
        if r <= self.a {
            (q * r).sin()
        } else if r <= self.b {
            match self.shell {
                ShellForm::Oscillatory { j1, j2 } => {
                    let e = (I * self.inner_q * r).exp();
                    j1 * e + j2 / e
                }
                ShellForm::Linear { value, slope } => value + slope * (r - self.a),
            }
        } else {
            let e = (I * q * r).exp();
            self.j3 * e + self.j4 / e
        }
    }

    /// `∂χ/∂r`.
    pub fn derivative(&self, r: f64) -> Complex64 {
        let q = self.q.0;
        if r <= self.a {
            q * (q * r).cos()
        } else if r <= self.b {
            match self.shell {
                ShellForm::Oscillatory { j1, j2 } => {
                    let e = (I * self.inner_q * r).exp();
                    I * self.inner_q * (j1 * e - j2 / e)
                }
                ShellForm::Linear { slope, .. } => slope,
            }
        } else {
            let e = (I * q * r).exp();
            I * q * (self.j3 * e - self.j4 / e)
        }
    }

    /// Values on both sides of a matching radius: `(inner, outer)` limits
    /// of `(χ, χ')`.
    pub fn one_sided(&self, r: f64) -> [(Complex64, Complex64); 2] {
        let below = self.side(r, true);
        let above = self.side(r, false);
        [below, above]
    }

    fn side(&self, r: f64, inner: bool) -> (Complex64, Complex64) {
        let q = self.q.0;
        let region = if r < self.a || (r == self.a && inner) {
            1
        } else if r < self.b || (r == self.b && inner) {
            2
        } else {
            3
        };
        match region {
            1 => ((q * r).sin(), q * (q * r).cos()),
            2 => match self.shell {
                ShellForm::Oscillatory { j1, j2 } => {
                    let e = (I * self.inner_q * r).exp();
                    (j1 * e + j2 / e, I * self.inner_q * (j1 * e - j2 / e))
                }
                ShellForm::Linear { value, slope } => (value + slope * (r - self.a), slope),
            },
            _ => {
                let e = (I * q * r).exp();
                (self.j3 * e + self.j4 / e, I * q * (self.j3 * e - self.j4 / e))
            }
        }
    }

    pub fn s_matrix(&self) -> Result<Complex64> {
        self.check_not_pole()?;
        Ok(self.jminus / self.jplus)
    }

    pub(crate) fn check_not_pole(&self) -> Result<()> {
        if self.jplus.norm() < POLE_GUARD * self.jminus.norm() || self.jplus.norm() == 0.0 {
            return Err(Error::PoleAtInput { q: self.q.0 });
        }
        Ok(())
    }

    pub(crate) fn check_not_antipole(&self) -> Result<()> {
        if self.jminus.norm() < POLE_GUARD * self.jplus.norm() || self.jminus.norm() == 0.0 {
            return Err(Error::PoleAtInput { q: self.q.0 });
        }
        Ok(())
    }

    /// Prefactor of the chosen normalization at this wave number.
    pub fn normalization(&self, norm: Normalization, scale: f64) -> Complex64 {
        match norm {
            Normalization::Wavenumber => Complex64::new((2.0 / PI).sqrt(), 0.0),
            Normalization::Energy => (Complex64::new(scale / PI, 0.0) / self.q.0).sqrt(),
        }
    }

    pub fn chi_plus(&self, r: f64) -> Result<Complex64> {
        check_wave_number(self.q)?;
        self.check_not_pole()?;
        Ok(sqrt_two_over_pi() * self.value(r) / self.jplus)
    }

    pub fn chi_minus(&self, r: f64) -> Result<Complex64> {
        check_wave_number(self.q)?;
        self.check_not_antipole()?;
        Ok(sqrt_two_over_pi() * self.value(r) / self.jminus)
    }
}

/// Which δ-normalization the Lippmann–Schwinger eigenfunctions carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    /// `δ(k − k')`, prefactor `√(2/π)`.
    #[default]
    Wavenumber,
    /// `δ(E − E')`, prefactor `N(E) = √(scale / (π k))`.
    Energy,
}

pub fn sqrt_two_over_pi() -> f64 {
    (2.0 / PI).sqrt()
}

pub(crate) fn check_wave_number(q: WaveNumber) -> Result<()> {
    if q.0.norm() <= MIN_WAVE_NUMBER {
        return Err(Error::InvalidArgument(format!(
            "|q| must exceed {MIN_WAVE_NUMBER:e} for delta-normalized eigenfunctions"
        )));
    }
    Ok(())
}

/// `χ(r; q)`, the solution regular at the origin.
pub fn regular_solution(r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be non-negative (got {r})")));
    }
    Ok(match_coeffs(q, pot)?.value(r))
}

/// `S(q) = J-(q) / J+(q)`. On the positive real axis this is `S(E + i0)`.
pub fn s_matrix(q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    match_coeffs(q, pot)?.s_matrix()
}

/// `⟨r|q+⟩ = √(2/π) χ(r; q) / J+(q)`, valid for any complex `q` off poles.
pub fn chi_plus(r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    match_coeffs(q, pot)?.chi_plus(r)
}

/// `⟨r|q−⟩ = √(2/π) χ(r; q) / J−(q)`.
pub fn chi_minus(r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<Complex64> {
    match_coeffs(q, pot)?.chi_minus(r)
}

/// Energy-normalized variants, `N(E) χ / J±`.
pub fn chi_energy_normalized(r: f64, q: WaveNumber, pot: &PotentialSpec, kind: KetKind) -> Result<Complex64> {
    check_wave_number(q)?;
    let c = match_coeffs(q, pot)?;
    let n = c.normalization(Normalization::Energy, pot.scale);
    let jost = match kind {
        KetKind::In => {
            c.check_not_pole()?;
            c.jplus
        }
        KetKind::Out => {
            c.check_not_antipole()?;
            c.jminus
        }
    };
    Ok(n * c.value(r) / jost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KetKind {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BraKind {
    /// `⟨+q|`
    In,
    /// `⟨−q|`
    Out,
}

/// `⟨±q|r⟩ = χ∓(r; q)`: the bra carries the opposite Jost denominator,
/// continued from the positive k-axis like the kets are.
pub fn left_eigenfunction(r: f64, q: WaveNumber, pot: &PotentialSpec, kind: BraKind) -> Result<Complex64> {
    let c = match_coeffs(q, pot)?;
    match kind {
        BraKind::In => c.chi_minus(r),
        BraKind::Out => c.chi_plus(r),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    Regular,
    InKet,
    OutKet,
    InBra,
    OutBra,
    JostOutgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionSample {
    pub r: f64,
    pub value: Complex64,
    pub kind: EigenKind,
}

pub fn sample(kind: EigenKind, r: f64, q: WaveNumber, pot: &PotentialSpec) -> Result<EigenfunctionSample> {
    let value = match kind {
        EigenKind::Regular => regular_solution(r, q, pot)?,
        EigenKind::InKet => chi_plus(r, q, pot)?,
        EigenKind::OutKet => chi_minus(r, q, pot)?,
        EigenKind::InBra => left_eigenfunction(r, q, pot, BraKind::In)?,
        EigenKind::OutBra => left_eigenfunction(r, q, pot, BraKind::Out)?,
        EigenKind::JostOutgoing => crate::green::jost_solution(r, q, pot)?,
    };
    Ok(EigenfunctionSample { r, value, kind })
}

/// `J+` and `J-` evaluated on bicomplex input, for derivatives.
fn jost_pair_bicomplex(q: Bicomplex, pot: &PotentialSpec) -> (Bicomplex, Bicomplex) {
    let radicand = q * q - Bicomplex::from_complex(Complex64::new(pot.scaled_height(), 0.0));
    let big_q = radicand.sqrt();
    let raw = raw_coefficients(q, big_q, pot);
    (jplus_of(&raw), jminus_of(&raw))
}

/// `J+(q)` and `dJ+/dq` by a single bicomplex step.
pub fn jplus_with_derivative(q: WaveNumber, pot: &PotentialSpec) -> (Complex64, Complex64) {
    complex_step::value_and_derivative(|z| jost_pair_bicomplex(z, pot).0, q.0)
}

/// `J-(q)` and `dJ-/dq`.
pub fn jminus_with_derivative(q: WaveNumber, pot: &PotentialSpec) -> (Complex64, Complex64) {
    complex_step::value_and_derivative(|z| jost_pair_bicomplex(z, pot).1, q.0)
}

/// Newton estimate of the distance from `q` to the nearest zero of `J+`
/// or `J-`: `min(|J+/J+'|, |J-/J-'|)`. Effectively infinite for the free
/// particle.
pub fn zero_distance_estimate(q: Complex64, pot: &PotentialSpec) -> f64 {
    let h = complex_step::default_step(q);
    let (jp, jm) = jost_pair_bicomplex(Bicomplex::new(q, Complex64::new(h, 0.0)), pot);
    let dp = (jp.re / (jp.jm / h)).norm();
    let dm = (jm.re / (jm.jm / h)).norm();
    let d = dp.min(dm);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}
