//! Solver for the cubic Szego equation on the real line.
//!
//! The flow map is evaluated through its closed form on rational Hardy
//! functions: spectral data of the squared Hankel operator, the finite-rank
//! time-averaged operator L, and a rank-reduced dissipative resolvent solve.
//! An independent pseudospectral integrator on the unit circle provides
//! cross-validation, and the contraction/Cayley machinery behind the
//! norm-preservation argument is audited numerically in exact arithmetic.

pub mod contraction;
pub mod disk;
pub mod error;
pub mod flow;
pub mod hankel;
pub mod numerics;
pub mod rational;

pub use error::{Result, SzegoError};
pub use rational::{HardyRational, PoleSum, PoleTerm, UhpPoint};
