//! Rational transfer functions and rational stand-ins for fractional-order
//! operators: exact fractional responses, Oustaloup approximation of `s^a`,
//! least-squares fitting of arbitrary responses, composition and
//! realization.

mod block;
mod elements;
mod fit;
mod oustaloup;
pub mod poly;
mod rational;

pub use block::{Factor, FracBlock, Mode, PoleResidue};
pub use elements::{exact_frac_response, log_grid, ApproxConfig, FracElement, FracPI, HighOrderPlant, PredictorSplit};
pub use fit::{fit_frac_response, FitTarget};
pub use oustaloup::{band_error, oustaloup_approx, BandError};
pub use rational::{compose, to_statespace, Composition, RationalTF};
