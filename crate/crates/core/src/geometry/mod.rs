//! Convex domains, grids, sampled fields, affine maps and John normalization.

mod affine;
mod domain;
mod ellipsoid;
mod field;
mod grid;

pub use affine::{apply_affine, AffineMap};
pub use domain::ConvexDomain;
pub use ellipsoid::{
    convex_hull, inradius_about, mvee, mvee_with_stats, normalize_domain, normalize_points,
    Ellipsoid, MveeStats,
};
pub(crate) use field::second_difference_weights;
pub use field::{Interpolation, ScalarField};
pub use grid::{pairs_for_width, Arm, Grid, NodeTag, DIRS_1D, DIRS_2D};

/// Spatial dimension. Only `n ∈ {1, 2}` is supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn nf(self) -> f64 {
        self.n() as f64
    }
}
