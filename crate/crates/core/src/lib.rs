pub mod cascade;
pub mod cli;
pub mod config;
pub mod error;
pub mod euler_poisson;
pub mod expansion;
pub mod grid;
pub mod hydro;
pub mod io;
pub mod nls;
pub mod params;
pub mod potential;
pub mod pset;
pub mod quadrature;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{ComplexField, Parity, RadialField, RadialGrid, RealField};
pub use params::{ModelParams, Real};
