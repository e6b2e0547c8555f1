//! Discrete-time simulator for hierarchical content caching over LEO
//! mega-constellations.

pub mod caching;
pub mod constellation;
pub mod demand;
pub mod error;
pub mod geo;
pub mod linkmodel;
pub mod routing;
pub mod scenario;
pub mod service;
pub mod topology;

pub use error::{Error, Result};
