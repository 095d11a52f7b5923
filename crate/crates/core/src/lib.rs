//! Billiards, caustics and Liouville nets on Riemannian surfaces.

pub mod billiard;
pub mod curve;
pub mod error;
pub mod experiment;
pub mod geodesic;
pub mod metric;
pub mod net;
pub mod numeric;
pub mod string;

pub use error::{Error, Result};
