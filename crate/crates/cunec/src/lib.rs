//! Street-order urban path-loss modeling for multi-AP / multi-UE layouts.
//!
//! Generates statistically realistic path-loss matrices between many
//! access points and user equipments on regular street grids:
//!
//! - [`geometry`]: grid layouts, terminal assignment and minimal-turn
//!   route enumeration;
//! - [`pathloss`]: per-segment mean path-loss models, power-domain route
//!   combining and the conventional log-distance baseline;
//! - [`params`]: published parameter statistics, positive definite
//!   projection and conditional Gaussian sampling of per-street
//!   parameters;
//! - [`shadowing`]: spatially correlated shadowing fields over UE x AP
//!   grids with anisotropic exponential correlation;
//! - [`stats`]: spread and correlation-distance estimators, linear
//!   path-loss fits and generation validation;
//! - [`scenario`]: the configuration-driven pipeline and CSV output
//!   behind the `cunec` command-line tool.

pub mod error;
pub mod geometry;
mod linalg;
pub mod params;
pub mod pathloss;
pub mod scenario;
pub mod shadowing;
pub mod stats;

pub use error::{Error, Result};
