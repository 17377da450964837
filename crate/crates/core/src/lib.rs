//! Numerical core for the obstacle problem of the linearized Monge-Ampère
//! operator `L_w u = tr(W D²u)`, where `W` is the cofactor matrix of the
//! Hessian of a convex Monge-Ampère potential `w`.
//!
//! The crate is `no_std` (with `alloc`) and carries no IO. It is organised
//! bottom-up:
//!
//! - [`geometry`]: convex domains, lattice grids with cut-cell boundary arms,
//!   sampled fields, affine maps, minimum-volume enclosing ellipsoids and
//!   John normalization.
//! - [`sparse`], [`amg`]: CSR matrices, ILU(0), smoothed-aggregation
//!   multigrid and restarted GMRES.
//! - [`ma`]: the Dirichlet problem `det D²w = f`, `w = 0` on the boundary.
//! - [`linma`]: discrete Hessians, cofactor fields and the operator `L_w`.
//! - [`obstacle`]: complementarity solvers (projected SOR, primal-dual active
//!   set, Perron dropping), free-boundary extraction and a discrete
//!   comparison harness.
//! - [`sections`]: sections of convex functions and the geometric probes built
//!   on them (section/ball inclusions, Harnack quotients, iterated
//!   normalization).
//! - [`regularity`]: rescaling around free-boundary points, growth estimates
//!   and Hölder exponent fits for the gradient.
#![no_std]

extern crate alloc;

pub mod amg;
pub mod contour;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod linma;
pub mod ma;
pub mod math;
pub mod obstacle;
pub mod regularity;
pub mod sections;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{
    AffineMap, ConvexDomain, Dim, Ellipsoid, Grid, Interpolation, NodeTag, ScalarField,
};
pub use linma::{EllipticityBounds, TensorField};
pub use math::{Mat2, Sym2, Vec2};

/// Crate version, recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
