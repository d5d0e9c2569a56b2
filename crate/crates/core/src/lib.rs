//! Numerical tensor calculus for Finsler surfaces and low-dimensional
//! Finsler manifolds.

pub mod conditions;
pub mod conformal;
pub mod error;
pub mod families;
pub mod fd;
pub mod geometry;
pub mod harness;
pub mod jet;
pub mod metric;
pub mod params;
pub mod quadrature;
pub mod registry;
pub mod stats;
pub mod surface_class;
pub mod tensor;

pub use error::{Error, Result};
pub use jet::{Elementary, Jet, JetConfig, JetError, Var};
pub use metric::FinslerMetric;
pub use params::XFunction;
