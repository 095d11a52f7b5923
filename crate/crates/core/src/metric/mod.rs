//! Coordinate charts carrying Riemannian metrics.

mod chart;
pub mod elliptic;
pub mod func;
pub mod spec;

pub use chart::*;
pub use elliptic::{cartesian_from_elliptic, elliptic_from_cartesian, EllipticCoordSpec};
pub use func::{CubicSpline, Func1};
pub use spec::{ChartKindSpec, ChartSpec, DomainSpec, FuncSpec};
