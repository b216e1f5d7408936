//! Shared numerical kernels.
//!
//! Everything here is a pure function of its inputs. Tolerances default to
//! [`DEFAULT_TOL`] and every entry point takes the tolerance explicitly.

mod interp;
mod quadrature;
mod regression;
mod roots;
mod series;
mod special;

pub use interp::{hermite, hermite_derivative};
pub use quadrature::integrate_adaptive;
pub use regression::{linear_fit, LineFit};
pub use roots::{solve_bracketed, Bracket, MAX_ITERATIONS};
pub use series::PowerSeries;
pub use special::lower_incomplete_gamma;

/// Default absolute/relative tolerance for roots and quadrature.
pub const DEFAULT_TOL: f64 = 1e-12;
