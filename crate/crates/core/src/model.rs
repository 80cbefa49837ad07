//! Shell potential parameters and the k-plane conventions.
//!
//! Everything downstream is a function of the complex wave number `q`.
//! Energies are derived as `z = q² / scale` and carry a sheet tag that
//! records which half of the k-plane they came from; the tag is metadata
//! only and never changes a computed value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wave numbers smaller than this are rejected where δ-normalized
/// eigenfunctions or free propagators would divide by `q`.
pub const MIN_WAVE_NUMBER: f64 = 1e-12;

/// Spherical shell: `V = v0` for `a < r < b`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub v0: f64,
    pub a: f64,
    pub b: f64,
    /// The constant 2m/ħ², so that `E = k² / scale`.
    pub scale: f64,
}

impl PotentialSpec {
    /// Validating constructor.
    pub fn new(v0: f64, a: f64, b: f64, scale: f64) -> Result<Self> {
        for (name, value) in [("v0", v0), ("a", a), ("b", b), ("scale", scale)] {
            if !value.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        if !(scale > 0.0) {
            return Err(Error::NonPositiveScale(scale));
        }
        if !(a > 0.0 && b > a) {
            return Err(Error::OrderedRadii { a, b });
        }
        Ok(Self { v0, a, b, scale })
    }

    /// The reference barrier used throughout the tests: `v0 = 10, a = 1, b = 2`.
    pub fn reference() -> Self {
        Self { v0: 10.0, a: 1.0, b: 2.0, scale: 1.0 }
    }

    pub fn free(a: f64, b: f64) -> Result<Self> {
        Self::new(0.0, a, b, 1.0)
    }

    pub fn is_free(&self) -> bool {
        self.v0 == 0.0
    }

    pub fn potential_at(&self, r: f64) -> f64 {
        if r > self.a && r < self.b {
            self.v0
        } else {
            0.0
        }
    }

    /// `scale · v0`, the shift between outer and inner squared momenta.
    pub fn scaled_height(&self) -> f64 {
        self.scale * self.v0
    }
}

/// Free-function form of [`PotentialSpec::new`].
pub fn make_potential(v0: f64, a: f64, b: f64, scale: f64) -> Result<PotentialSpec> {
    PotentialSpec::new(v0, a, b, scale)
}

/// Complex wave number; the whole plane is admitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveNumber(pub Complex64);

impl WaveNumber {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn real(k: f64) -> Self {
        Self(Complex64::new(k, 0.0))
    }

    pub fn q(&self) -> Complex64 {
        self.0
    }

    /// `k → −k*`, the reflection through the imaginary axis that maps a
    /// resonance onto its anti-resonance.
    pub fn reflect(&self) -> Self {
        Self(-self.0.conj())
    }

    pub fn quadrant(&self) -> u8 {
        match (self.0.re >= 0.0, self.0.im >= 0.0) {
            (true, true) => 1,
            (false, true) => 2,
            (false, false) => 3,
            (true, false) => 4,
        }
    }
}

impl From<Complex64> for WaveNumber {
    fn from(q: Complex64) -> Self {
        Self(q)
    }
}

impl From<f64> for WaveNumber {
    fn from(k: f64) -> Self {
        Self::real(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub z: Complex64,
    pub sheet: Sheet,
}

/// `z = q² / scale`, tagged with the sheet the k-point belongs to: the
/// upper half k-plane (and the positive real axis, the upper rim of the
/// cut) is the first sheet, the lower half plane is the second.
pub fn energy_from_k(q: WaveNumber, pot: &PotentialSpec) -> ComplexEnergy {
    let q = q.0;
    let sheet = if q.im > 0.0 || (q.im == 0.0 && q.re > 0.0) {
        Sheet::First
    } else {
        Sheet::Second
    };
    ComplexEnergy { z: q * q / pot.scale, sheet }
}

/// Principal square root with the cut on the negative real axis and
/// `Im ≥ 0` on the cut itself (a `-0.0` imaginary part is not allowed to
/// flip the branch).
pub fn principal_sqrt(w: Complex64) -> Complex64 {
    if w.im == 0.0 {
        if w.re >= 0.0 {
            Complex64::new(w.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-w.re).sqrt())
        }
    } else {
        w.sqrt()
    }
}

/// Momentum inside the shell, `Q = √(q² − scale·v0)` on the principal branch.
/// With no potential the shell is not special and `Q = q` exactly.
pub fn inner_momentum(q: WaveNumber, pot: &PotentialSpec) -> Complex64 {
    if pot.v0 == 0.0 {
        return q.0;
    }
    principal_sqrt(q.0 * q.0 - pot.scaled_height())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn make_potential_accepts_valid_and_free() {
        let p = make_potential(10.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(p, PotentialSpec { v0: 10.0, a: 1.0, b: 2.0, scale: 1.0 });
        assert!(make_potential(0.0, 1.0, 2.0, 1.0).unwrap().is_free());
    }

    #[test]
    fn make_potential_rejects_bad_input() {
        assert_eq!(
            make_potential(10.0, 2.0, 1.0, 1.0),
            Err(Error::OrderedRadii { a: 2.0, b: 1.0 })
        );
        assert!(matches!(make_potential(10.0, 0.0, 1.0, 1.0), Err(Error::OrderedRadii { .. })));
        assert!(matches!(make_potential(10.0, 1.0, 2.0, 0.0), Err(Error::NonPositiveScale(_))));
        assert!(matches!(make_potential(10.0, 1.0, 2.0, -1.0), Err(Error::NonPositiveScale(_))));
        assert!(matches!(make_potential(f64::NAN, 1.0, 2.0, 1.0), Err(Error::NonFinite { name: "v0" })));
        assert!(matches!(make_potential(1.0, 1.0, f64::INFINITY, 1.0), Err(Error::NonFinite { name: "b" })));
    }

    #[test]
    fn energy_and_sheet() {
        let pot = PotentialSpec::reference();
        let e = energy_from_k(WaveNumber::real(2.0), &pot);
        assert_eq!(e.z, Complex64::new(4.0, 0.0));
        assert_eq!(e.sheet, Sheet::First);

        let e = energy_from_k(WaveNumber::new(0.0, 1.0), &pot);
        assert_abs_diff_eq!(e.z.re, -1.0);
        assert_abs_diff_eq!(e.z.im, 0.0);
        assert_eq!(e.sheet, Sheet::First);

        let e = energy_from_k(WaveNumber::new(1.0, -0.5), &pot);
        assert_abs_diff_eq!(e.z.re, 0.75);
        assert_abs_diff_eq!(e.z.im, -1.0);
        assert_eq!(e.sheet, Sheet::Second);
    }

    #[test]
    fn inner_momentum_examples() {
        let free = PotentialSpec::free(1.0, 2.0).unwrap();
        let q = WaveNumber::new(1.3, -0.2);
        assert_eq!(inner_momentum(q, &free), q.0);

        let pot = PotentialSpec::reference();
        let big_q = inner_momentum(WaveNumber::real(1.0), &pot);
        assert_eq!(big_q, Complex64::new(0.0, 3.0));
        let big_q = inner_momentum(WaveNumber::real(4.0), &pot);
        assert_abs_diff_eq!(big_q.re, 6f64.sqrt(), epsilon = 1e-15);
        assert_eq!(big_q.im, 0.0);
    }

    #[test]
    fn negative_zero_stays_on_upper_lip() {
        let w = Complex64::new(-9.0, -0.0);
        assert_eq!(principal_sqrt(w), Complex64::new(0.0, 3.0));
    }

    proptest! {
        #[test]
        fn energy_is_even_in_k(re in -20.0..20.0f64, im in -5.0..5.0f64) {
            let pot = PotentialSpec::reference();
            let plus = energy_from_k(WaveNumber::new(re, im), &pot);
            let minus = energy_from_k(WaveNumber::new(-re, -im), &pot);
            prop_assert!((plus.z - minus.z).norm() <= 1e-14 * (1.0 + plus.z.norm()));
            if im != 0.0 {
                prop_assert_ne!(plus.sheet, minus.sheet);
            }
        }

        #[test]
        fn inner_momentum_squares_back(re in -20.0..20.0f64, im in -5.0..5.0f64, v0 in -30.0..30.0f64) {
            let pot = PotentialSpec::new(v0, 1.0, 2.0, 1.0).unwrap();
            let q = WaveNumber::new(re, im);
            let big_q = inner_momentum(q, &pot);
            let lhs = big_q * big_q + pot.scaled_height();
            let rhs = q.0 * q.0;
            prop_assert!((lhs - rhs).norm() <= 1e-14 * (rhs.norm() + v0.abs() + 1.0));
            if v0 != 0.0 {
                prop_assert!(big_q.re >= 0.0);
                if big_q.re == 0.0 {
                    prop_assert!(big_q.im >= 0.0);
                }
            }
        }

        #[test]
        fn inner_momentum_real_above_threshold(v0 in -30.0..30.0f64, excess in 1e-6..50.0f64) {
            let pot = PotentialSpec::new(v0, 1.0, 2.0, 1.0).unwrap();
            let k = v0.abs().sqrt() + excess;
            let big_q = inner_momentum(WaveNumber::real(k), &pot);
            prop_assert_eq!(big_q.im, 0.0);
            prop_assert!(big_q.re > 0.0);
        }
    }
}
