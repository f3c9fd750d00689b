//! One-dimensional Anderson model with decaying, possibly fat-tailed disorder.
//!
//! Eigenvalues of the finite-volume operator are computed along two
//! independent routes: roots of the Pruefer phase ([`pruefer`]) and Sturm
//! bisection ([`sturm`]). [`stats`] builds the rescaled local eigenvalue point
//! process around a reference energy and the clock-spacing and tail
//! diagnostics over Monte Carlo ensembles.

pub mod error;
pub mod model;
pub mod pruefer;
pub mod stats;
pub mod sturm;

pub use error::{Error, Result};
