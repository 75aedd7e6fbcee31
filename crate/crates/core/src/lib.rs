//! Factorization, Riccati families and shape invariance of one-dimensional
//! Schrödinger Hamiltonians `H = −d²/dx² + V(x, a)`.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases fix the scalar to `f64`.

pub mod catalog;
pub mod error;
pub mod model;
pub mod numgrid;
pub mod real;
pub mod riccati;
pub mod shapeinv;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{
    FactorizationPair, FamilyGauge, Interval, MapKind, Order, ParamPoint, ParameterMap,
    ParametricPotential, ShapeInvarianceData, Superpotential,
};
pub use numgrid::{Grid, SampledFunction};
pub use real::Real;
pub use riccati::{FamilyConstant, PartnerFamilyMember};

pub type Grid64 = Grid<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type ParamPoint64 = ParamPoint<f64>;
pub type FactorizationPair64 = FactorizationPair<f64>;
pub type ParametricPotential64 = ParametricPotential<f64>;
pub type CatalogEntry64 = catalog::CatalogEntry<f64>;
