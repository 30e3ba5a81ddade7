//! Numerical companions to the spectral theory of Kleinian circle packings.
//!
//! The crate is split along the objects it computes:
//!
//! * [`geom`]: planar inversive geometry (circles and lines as 4-vectors,
//!   reflections, Möbius maps on the upper half-plane).
//! * [`packing`]: Apollonian packings generated from a root Descartes
//!   quadruple, curvature counting `N(T)` and the growth-exponent fit.
//! * [`dimension`]: limit-set sampling for Hecke triangle groups, box-counting
//!   dimension and the Patterson–Sullivan relation `λ₀ = δ(n − δ)`.
//! * [`spectral`]: P1 finite elements for the hyperbolic Laplacian on
//!   half-plane domains bounded by geodesic walls.
//! * [`gap`]: the checks tying the above together (Neumann cuts,
//!   eigenvalue-free wall counts, Hecke and Apollonian reports).

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod gap;
pub mod geom;
pub mod packing;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
