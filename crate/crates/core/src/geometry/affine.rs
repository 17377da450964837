use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Dim, Grid, Interpolation, NodeTag, ScalarField};
use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};

/// `T(x) = A x + b`. One-dimensional maps use only `a11` and `b.x`; the
/// second coordinate is carried through unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub a: Mat2,
    pub b: Vec2,
    pub dim: Dim,
}

impl AffineMap {
    pub fn new(a: Mat2, b: Vec2) -> Result<Self> {
        Self::with_dim(a, b, Dim::Two)
    }

    pub fn with_dim(a: Mat2, b: Vec2, dim: Dim) -> Result<Self> {
        let (a, b) = match dim {
            Dim::Two => (a, b),
            Dim::One => (Mat2::diag(a.a11, 1.0), Vec2::new(b.x, 0.0)),
        };
        let t = Self { a, b, dim };
        if !(t.det().abs() > 0.0 && t.det().is_finite()) {
            return Err(Error::DegenerateInput("affine map is singular".into()));
        }
        Ok(t)
    }

    pub fn identity(dim: Dim) -> Self {
        Self {
            a: Mat2::IDENTITY,
            b: Vec2::ZERO,
            dim,
        }
    }

    pub fn translation(v: Vec2) -> Self {
        Self {
            a: Mat2::IDENTITY,
            b: v,
            dim: Dim::Two,
        }
    }

    /// Determinant of the linear part in the map's own dimension.
    pub fn det(&self) -> f64 {
        match self.dim {
            Dim::One => self.a.a11,
            Dim::Two => self.a.det(),
        }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.a.apply(p) + self.b
    }

    pub fn apply_all(&self, ps: &[Vec2]) -> Vec<Vec2> {
        ps.iter().map(|&p| self.apply(p)).collect()
    }

    pub fn inverse(&self) -> Result<Self> {
        let ai = self
            .a
            .inverse()
            .ok_or_else(|| Error::DegenerateInput("affine map is singular".into()))?;
        Ok(Self {
            a: ai,
            b: -ai.apply(self.b),
            dim: self.dim,
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> Self {
        Self {
            a: self.a.mul(&other.a),
            b: self.a.apply(other.b) + self.b,
            dim: self.dim,
        }
    }

    pub fn max_abs_diff(&self, other: &AffineMap) -> f64 {
        self.a
            .max_abs_diff(&other.a)
            .max((self.b - other.b).x.abs())
            .max((self.b - other.b).y.abs())
    }
}

/// Resamples `field` under `t`: the output at `y` is `field(t⁻¹ y)`.
///
/// The result lives on a re-tagged copy of `target`: target nodes whose
/// preimage leaves the data of `field` lose their value, and interior status
/// requires a complete one-ring of valid nodes. Arm values are interpolated
/// at the arm crossings.
pub fn apply_affine(
    t: &AffineMap,
    field: &ScalarField,
    target: &Grid,
    interp: Interpolation,
) -> Result<ScalarField> {
    let inv = t.inverse()?;
    let n = target.len();
    let mut values = alloc::vec![f64::NAN; n];
    let mut levels = alloc::vec![f64::NAN; n];
    for idx in 0..n {
        if target.tag(idx) == NodeTag::Exterior && !target.level(idx).is_finite() {
            continue;
        }
        if let Some(v) = field.sample(inv.apply(target.pos(idx)), interp) {
            values[idx] = v;
            levels[idx] = target.level(idx);
        }
    }
    let mut grid = target.relevel(levels)?;
    if let Some(d) = target.domain() {
        grid.set_domain(d.clone());
    }
    if grid.interior_count() == 0 {
        return Err(Error::EmptyImage);
    }
    for (idx, v) in values.iter_mut().enumerate() {
        if grid.tag(idx) == NodeTag::Exterior {
            *v = f64::NAN;
        }
    }
    let arm_values = grid
        .all_arms()
        .iter()
        .map(|a| field.sample(inv.apply(a.point), interp).unwrap_or(f64::NAN))
        .collect();
    ScalarField::new(Arc::new(grid), values, arm_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;

    #[test]
    fn inverse_composes_to_identity() {
        let t = AffineMap::new(Mat2::new(2.0, 0.3, -0.1, 0.7), Vec2::new(0.4, -1.0)).unwrap();
        let id = t.inverse().unwrap().compose(&t);
        assert!(id.max_abs_diff(&AffineMap::identity(Dim::Two)) < 1e-12);
    }

    #[test]
    fn identity_resample_is_exact() {
        let g = Arc::new(Grid::covering(&ConvexDomain::unit_ball(), 1.0 / 32.0).unwrap());
        let f = ScalarField::from_fn(&g, |p| p.x * p.x - p.y);
        let out = apply_affine(
            &AffineMap::identity(Dim::Two),
            &f,
            &g,
            Interpolation::Bilinear,
        )
        .unwrap();
        for idx in out.grid().interior_nodes() {
            assert_eq!(out.value(idx), f.value(idx));
        }
    }

    #[test]
    fn disjoint_image_is_empty() {
        let g = Arc::new(Grid::covering(&ConvexDomain::unit_ball(), 1.0 / 8.0).unwrap());
        let f = ScalarField::from_fn(&g, |p| p.x);
        let t = AffineMap::translation(Vec2::new(10.0, 0.0));
        assert_eq!(
            apply_affine(&t, &f, &g, Interpolation::Bilinear).unwrap_err(),
            Error::EmptyImage
        );
    }
}
