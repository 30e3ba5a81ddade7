//! Low discrete spectrum of the hyperbolic Laplacian `−y²(∂ₓ² + ∂ᵧ²)` on
//! regions of the upper half-plane bounded by geodesics, by piecewise-linear
//! finite elements.

pub mod assemble;
pub mod domain;
pub mod eigen;
pub mod mesh;
pub mod report;
pub mod sparse;

pub use assemble::{assemble, AssembledSystem};
pub use domain::{BoundaryCondition, GeodesicWall, HyperbolicDomain, Truncation, TruncationBc, WallShape};
pub use eigen::{solve_lowest, EigenPairs};
pub use mesh::{build_mesh, EdgeKind, Mesh};
pub use report::{
    default_schedule, spectrum_below, EigenvalueEntry, ScheduleStep, SpectralConfig, SpectrumReport, Stability,
};
pub use sparse::CsrMatrix;
