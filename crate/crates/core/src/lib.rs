//! Descent for Hilbert C*-modules over finite-dimensional C*-algebras.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the aliases below fix
//! `f64`.

pub mod algebra;
pub mod coalgebra;
pub mod comodule;
pub mod connection;
pub mod error;
pub mod gallery;
pub mod instance;
pub mod linalg;
pub mod module;
pub mod pair;
pub mod report;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Kind, Result};
pub use linalg::Tolerance;
pub use report::{Check, Checks, Report};
pub use scalar::Real;

pub type Algebra = algebra::FiniteCStarAlgebra<f64>;
pub type Inclusion = algebra::Inclusion<f64>;
pub type Module = module::HilbertModule<f64>;
pub type Correspondence = module::Correspondence<f64>;
pub type AdjointPair = pair::AdjointPair<f64>;
pub type Coalgebra = coalgebra::Coalgebra<f64>;
pub type Comodule = comodule::Comodule<f64>;
pub type Omega = connection::Omega<f64>;
pub type Connection = connection::Connection<f64>;
pub type Matrix = scalar::CMat<f64>;
pub type Vector = scalar::CVec<f64>;
