//! Stability indices of periodic orbits of non-autonomous Lagrangian systems
//! from trivialized second-variation data (P, Q, R, A).

pub mod criterion;
pub mod error;
pub mod flow;
pub mod interp;
pub mod linalg;
pub mod linearization;
pub mod maslov;
pub mod problem;
pub mod report;
pub mod spectral;
pub mod sweep;
pub mod symplect;
pub mod verification;

pub use error::{Error, Result};
