//! Numerical diagnostics for candidate self-similar blowup profiles of the
//! incompressible 3D Euler equations.

pub mod axisym;
pub mod battery;
pub mod config;
pub mod criteria;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod flow;
pub mod fields;
pub mod numerics;
pub mod par;
pub mod real;
pub mod report;
pub mod selfsim;
pub mod stretching;

pub use error::{Error, Result};
pub use numerics::{Mat3, Vec3};
