//! Planar charged-particle dynamics in electromagnetic fields that admit
//! Noether point symmetries.

pub mod dynamics;
pub mod error;
pub mod expr;
pub mod fields;
pub mod ode;
pub mod quadrature;
pub mod scalar;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
