//! Dynamics of a nutrient-autotroph-herbivore-mixotroph chemostat.
//!
//! The crate covers the full pipeline from dimensional parameters to the
//! region map of the `(x_star, a2)` parameter plane:
//!
//! - [`model`]: parameter types, trade-off validation, nondimensionalization;
//! - [`dynamics`]: right-hand sides, structural functions, Jacobians;
//! - [`equilibria`]: closed-form equilibria and the `a2` threshold set;
//! - [`stability`]: the trace/determinant/minor stability criterion and the
//!   classification of every equilibrium;
//! - [`solver`]: adaptive Runge-Kutta integration, attractor detection, and
//!   a largest-Lyapunov-exponent estimator;
//! - [`bifurcation`]: region classification and parallel parameter sweeps;
//! - [`emit`]: the CSV/JSON output formats shared by the CLI and tests.

pub mod bifurcation;
pub mod dynamics;
pub mod emit;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod solver;
pub mod stability;

pub use dynamics::{Jacobian3, State3};
pub use error::{Error, Result};
pub use model::{ChemostatParams, ChemostatState, ScaledParams, ValidationReport};
