//! Scattering off a spherical shell potential on the complex wave-number
//! plane: Jost functions, S-matrix poles, Gamow states and resonance
//! expansions of compactly supported wave functions.
//!
//! ```
//! use shellres::{PotentialSpec, WaveNumber};
//! use shellres::jost::s_matrix;
//! use shellres::poles::{find_resonances, SearchRegion};
//! use shellres::gamow::gamow_state;
//!
//! let pot = PotentialSpec::reference();
//! let s = s_matrix(WaveNumber::real(2.0), &pot)?;
//! assert!((s.norm() - 1.0).abs() < 1e-12);
//! let poles = find_resonances(&SearchRegion::default_resonance(), &pot, 1e-12)?;
//! let u = gamow_state(&poles[0], &pot)?;
//! println!("{s} {} {}", poles[0].k_n.0, u.value(3.0));
//! # Ok::<(), shellres::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod complex_step;
pub mod error;
pub mod expansions;
pub mod gamow;
pub mod green;
pub mod jost;
pub mod model;
pub mod poles;
pub mod quadrature;

pub use error::{Error, Result};
pub use model::{energy_from_k, inner_momentum, make_potential, ComplexEnergy, PotentialSpec, Sheet, WaveNumber};
