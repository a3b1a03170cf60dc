//! Interaction energies of two rigid charge distributions at large
//! separation, mountain-pass paths on the resulting configuration space,
//! and numerical checks for the semirelativistic kinetic operator
//! `T = √(1 − Δ) − 1`.
//!
//! The geometric layers (densities, multipoles, rotations, surfaces and
//! path optimization) are generic over [`Real`]; `f64` aliases are
//! exported at the crate root. Matrix models and the spectral toolkit work
//! in `f64`.

pub mod coulomb;
pub mod density;
pub mod energy;
pub mod error;
pub mod io;
pub mod multipole;
pub mod pathopt;
pub mod rotations;
pub mod scalar;
pub mod seed;
pub mod semirel;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ChargeDensity = density::ChargeDensity<f64>;
pub type Configuration = density::Configuration<f64>;
pub type Rotation = rotations::Rotation<f64>;
pub type Generator = rotations::Generator<f64>;
pub type GeneratorPair = rotations::GeneratorPair<f64>;
pub type MultipoleTensor = multipole::MultipoleTensor<f64>;
pub type EnergySurface = energy::EnergySurface<f64>;
pub type PathOnConfigSpace = pathopt::PathOnConfigSpace<f64>;
