use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Dim, Grid, NodeTag};
use crate::error::{Error, Result};
use crate::math::{floor, Vec2};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    #[default]
    Bilinear,
    /// Keys cubic convolution (`a = −1/2`); reproduces quadratics.
    Cubic,
}

/// Scalar samples on a [`Grid`].
///
/// Interior and boundary nodes carry values; exterior nodes hold `NaN`.
/// Each boundary arm of the grid also carries a value, the Dirichlet datum at
/// the arm's crossing point.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    arm_values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, arm_values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || arm_values.len() != grid.all_arms().len() {
            return Err(Error::InvalidInput(
                "field length does not match grid".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            arm_values,
        })
    }

    /// Samples `f` at every non-exterior node and at every arm crossing.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(Vec2) -> f64) -> Self {
        Self::from_fn_with_boundary(grid, &f, &f)
    }

    /// `inner` at interior nodes, `boundary` at boundary nodes and arms.
    pub fn from_fn_with_boundary(
        grid: &Arc<Grid>,
        inner: impl Fn(Vec2) -> f64,
        boundary: impl Fn(Vec2) -> f64,
    ) -> Self {
        let values = (0..grid.len())
            .map(|i| match grid.tag(i) {
                NodeTag::Interior => inner(grid.pos(i)),
                NodeTag::Boundary => boundary(grid.pos(i)),
                NodeTag::Exterior => f64::NAN,
            })
            .collect();
        let arm_values = grid.all_arms().iter().map(|a| boundary(a.point)).collect();
        Self {
            grid: grid.clone(),
            values,
            arm_values,
        }
    }

    /// Interior values from `interior` (indexed by node), constant `g` on the
    /// boundary and on arms.
    pub fn from_interior(grid: &Arc<Grid>, interior: &[f64], g: f64) -> Self {
        let values = (0..grid.len())
            .map(|i| match grid.tag(i) {
                NodeTag::Interior => interior[i],
                NodeTag::Boundary => g,
                NodeTag::Exterior => f64::NAN,
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
            arm_values: alloc::vec![g; grid.all_arms().len()],
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_fn(grid, |_| 0.0)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn arm_values(&self) -> &[f64] {
        &self.arm_values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Pointwise map over node and arm values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            arm_values: self.arm_values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with a field on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && !self.grid.same_lattice(&other.grid) {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
        if self.arm_values.len() != other.arm_values.len() {
            return Err(Error::InvalidInput("fields have different masks".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            arm_values: self
                .arm_values
                .iter()
                .zip(&other.arm_values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Max of `|self − other|` over nodes where both are defined.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Max of `|value|` over nodes with a value.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Reach along direction `dir` from an interior node: `(θ, value)` where
    /// the neighbour sits at `θ` lattice steps.
    pub fn reach(&self, idx: usize, dir: usize) -> (f64, f64) {
        let g = &*self.grid;
        if let Some(m) = g.neighbor(idx, dir) {
            if g.is_interior(m) {
                return (1.0, self.values[m]);
            }
        }
        match g.arm_index(idx, dir) {
            Some(a) => (g.all_arms()[a].theta, self.arm_values[a]),
            None => (1.0, f64::NAN),
        }
    }

    /// Second difference along direction pair `pair` (directions `2·pair`
    /// and `2·pair + 1`), approximating `vᵀ D²u v` for the lattice vector `v`.
    /// Exact on quadratics, including cut arms.
    pub fn second_difference(&self, idx: usize, pair: usize) -> f64 {
        let (tp, up) = self.reach(idx, 2 * pair);
        let (tm, um) = self.reach(idx, 2 * pair + 1);
        let c = second_difference_weights(tp, tm, self.grid.spacing());
        c[0] * up + c[1] * um + c[2] * self.values[idx]
    }

    /// Gradient at an interior node by centred differences (non-uniform next
    /// to the boundary). Exact on quadratics.
    pub fn node_gradient(&self, idx: usize) -> Option<Vec2> {
        if !self.grid.is_interior(idx) {
            return None;
        }
        let h = self.grid.spacing();
        let u0 = self.values[idx];
        let d = |pair: usize| {
            let (tp, up) = self.reach(idx, 2 * pair);
            let (tm, um) = self.reach(idx, 2 * pair + 1);
            let (a, b) = (tp * h, tm * h);
            (b * b * (up - u0) + a * a * (u0 - um)) / (a * b * (a + b))
        };
        let gx = d(0);
        let gy = match self.grid.dim() {
            Dim::One => 0.0,
            Dim::Two => d(1),
        };
        Some(Vec2::new(gx, gy))
    }

    fn cell(&self, p: Vec2) -> Option<(i64, i64, f64, f64)> {
        let g = &*self.grid;
        let h = g.spacing();
        let fx = (p.x - g.origin().x) / h;
        let i = floor(fx);
        let tx = fx - i;
        let (j, ty) = match g.dim() {
            Dim::One => (0.0, 0.0),
            Dim::Two => {
                let fy = (p.y - g.origin().y) / h;
                let j = floor(fy);
                (j, fy - j)
            }
        };
        if !(i.is_finite() && j.is_finite()) {
            return None;
        }
        Some((i as i64, j as i64, tx, ty))
    }

    fn at(&self, i: i64, j: i64) -> f64 {
        let (nx, ny) = self.grid.shape();
        if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            return f64::NAN;
        }
        self.values[self.grid.index(i as usize, j as usize)]
    }

    /// Interpolated value at `p`; `None` outside the data.
    pub fn sample(&self, p: Vec2, interp: Interpolation) -> Option<f64> {
        match interp {
            Interpolation::Bilinear => self.bilinear(p),
            Interpolation::Cubic => self.cubic(p).map(|(v, _)| v).or_else(|| self.bilinear(p)),
        }
    }

    /// Gradient of the interpolant at `p`.
    pub fn sample_gradient(&self, p: Vec2, interp: Interpolation) -> Option<Vec2> {
        match interp {
            Interpolation::Bilinear => self.bilinear_gradient(p),
            Interpolation::Cubic => self
                .cubic(p)
                .map(|(_, g)| g)
                .or_else(|| self.bilinear_gradient(p)),
        }
    }

    fn bilinear(&self, p: Vec2) -> Option<f64> {
        let (i, j, tx, ty) = self.cell(p)?;
        let mut s = 0.0;
        let ys: &[(i64, f64)] = if self.grid.dim() == Dim::One {
            &[(0, 1.0)]
        } else {
            &[(0, 1.0 - ty), (1, ty)]
        };
        for &(dj, wy) in ys {
            for (di, wx) in [(0, 1.0 - tx), (1, tx)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let v = self.at(i + di, j + dj);
                if !v.is_finite() {
                    return None;
                }
                s += w * v;
            }
        }
        Some(s)
    }

    fn bilinear_gradient(&self, p: Vec2) -> Option<Vec2> {
        let (i, j, tx, ty) = self.cell(p)?;
        let h = self.grid.spacing();
        if self.grid.dim() == Dim::One {
            let (a, b) = (self.at(i, 0), self.at(i + 1, 0));
            return (a.is_finite() && b.is_finite()).then(|| Vec2::new((b - a) / h, 0.0));
        }
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        if ![v00, v10, v01, v11].iter().all(|v| v.is_finite()) {
            return None;
        }
        let gx = ((v10 - v00) * (1.0 - ty) + (v11 - v01) * ty) / h;
        let gy = ((v01 - v00) * (1.0 - tx) + (v11 - v10) * tx) / h;
        Some(Vec2::new(gx, gy))
    }

    fn cubic(&self, p: Vec2) -> Option<(f64, Vec2)> {
        let (i, j, tx, ty) = self.cell(p)?;
        let h = self.grid.spacing();
        let (wx, dx) = keys_weights(tx);
        if self.grid.dim() == Dim::One {
            let mut v = 0.0;
            let mut g = 0.0;
            for a in 0..4 {
                let s = self.at(i + a as i64 - 1, 0);
                if !s.is_finite() {
                    return None;
                }
                v += wx[a] * s;
                g += dx[a] * s;
            }
            return Some((v, Vec2::new(g / h, 0.0)));
        }
        let (wy, dy) = keys_weights(ty);
        let mut v = 0.0;
        let mut gx = 0.0;
        let mut gy = 0.0;
        for b in 0..4 {
            for a in 0..4 {
                let s = self.at(i + a as i64 - 1, j + b as i64 - 1);
                if !s.is_finite() {
                    return None;
                }
                v += wx[a] * wy[b] * s;
                gx += dx[a] * wy[b] * s;
                gy += wx[a] * dy[b] * s;
            }
        }
        Some((v, Vec2::new(gx / h, gy / h)))
    }
}

/// Coefficients `(c₊, c₋, c₀)` of the three-point second difference with
/// neighbours at `θ₊h` and `−θ₋h`.
pub(crate) fn second_difference_weights(tp: f64, tm: f64, h: f64) -> [f64; 3] {
    let s = 2.0 / (h * h * (tp + tm));
    [s / tp, s / tm, -s * (tp + tm) / (tp * tm)]
}

/// Keys cubic convolution weights and their derivatives for offsets
/// `−1, 0, 1, 2` at fractional position `t`.
fn keys_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ],
        [
            0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
            0.5 * (9.0 * t2 - 10.0 * t),
            0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
            0.5 * (3.0 * t2 - 2.0 * t),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;

    fn quad(p: Vec2) -> f64 {
        1.5 * p.x * p.x - 0.7 * p.x * p.y + 0.4 * p.y * p.y + 0.3 * p.x - p.y + 2.0
    }

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::covering(&ConvexDomain::unit_ball(), 1.0 / 16.0).unwrap())
    }

    #[test]
    fn cubic_reproduces_quadratics() {
        let g = grid();
        let f = ScalarField::from_fn(&g, quad);
        for p in [
            Vec2::new(0.113, -0.271),
            Vec2::new(-0.5, 0.31),
            Vec2::new(0.7, 0.01),
        ] {
            let v = f.sample(p, Interpolation::Cubic).unwrap();
            assert!((v - quad(p)).abs() < 1e-12);
            let gr = f.sample_gradient(p, Interpolation::Cubic).unwrap();
            assert!((gr.x - (3.0 * p.x - 0.7 * p.y + 0.3)).abs() < 1e-10);
            assert!((gr.y - (-0.7 * p.x + 0.8 * p.y - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn second_differences_exact_on_quadratics_near_boundary() {
        let g = grid();
        let f = ScalarField::from_fn(&g, quad);
        for idx in g.interior_nodes() {
            assert!((f.second_difference(idx, 0) - 3.0).abs() < 1e-9);
            assert!((f.second_difference(idx, 1) - 0.8).abs() < 1e-9);
            // v = (1,1): 3 − 1.4 + 0.8
            assert!((f.second_difference(idx, 2) - 2.4).abs() < 1e-9);
            let gr = f.node_gradient(idx).unwrap();
            let p = g.pos(idx);
            assert!((gr.x - (3.0 * p.x - 0.7 * p.y + 0.3)).abs() < 1e-10);
        }
    }

    #[test]
    fn bilinear_on_lattice_nodes_is_exact() {
        let g = grid();
        let f = ScalarField::from_fn(&g, quad);
        let idx = g.nearest(Vec2::new(0.25, 0.5)).unwrap();
        let v = f.sample(g.pos(idx), Interpolation::Bilinear).unwrap();
        assert_eq!(v, f.value(idx));
    }
}
