//! Discrete Hessians, cofactor fields and the operator `L_w u = tr(W D²u)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{pairs_for_width, second_difference_weights, Dim, Grid, ScalarField};
use crate::math::{powf, Sym2, Vec2};
use crate::sparse::CsrMatrix;

/// `0 < λ ≤ Λ < ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticityBounds {
    pub lambda: f64,
    pub big_lambda: f64,
}

impl EllipticityBounds {
    pub fn new(lambda: f64, big_lambda: f64) -> Result<Self> {
        if lambda > 0.0 && big_lambda >= lambda && big_lambda.is_finite() {
            Ok(Self { lambda, big_lambda })
        } else {
            Err(Error::InvalidInput(format!(
                "ellipticity bounds need 0 < λ ≤ Λ < ∞, got ({lambda}, {big_lambda})"
            )))
        }
    }
}

/// Symmetric matrix per node. Nodes without a value hold `None`. In 1D the
/// scalar lives in `a11`.
#[derive(Clone, Debug)]
pub struct TensorField {
    grid: Arc<Grid>,
    values: Vec<Option<Sym2>>,
}

impl TensorField {
    pub fn new(grid: Arc<Grid>, values: Vec<Option<Sym2>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(
                "tensor field length does not match grid".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// `f` at every interior and boundary node.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(Vec2) -> Sym2) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| grid.has_value(i).then(|| restrict(f(grid.pos(i)), dim)))
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Arc<Grid>, m: Sym2) -> Self {
        Self::from_fn(grid, |_| m)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> Dim {
        self.grid.dim()
    }

    pub fn get(&self, idx: usize) -> Option<Sym2> {
        self.values[idx]
    }

    pub fn values(&self) -> &[Option<Sym2>] {
        &self.values
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Interior nodes that carry no tensor (excluded from the stencil set).
    pub fn excluded_interior(&self) -> usize {
        self.grid
            .interior_nodes()
            .filter(|&i| self.values[i].is_none())
            .count()
    }

    pub fn det(&self, m: &Sym2) -> f64 {
        match self.dim() {
            Dim::One => m.a11,
            Dim::Two => m.det(),
        }
    }
}

fn restrict(m: Sym2, dim: Dim) -> Sym2 {
    match dim {
        Dim::One => Sym2::new(m.a11, 0.0, 0.0),
        Dim::Two => m,
    }
}

/// Hessian at an interior node from directional second differences: axes
/// for the diagonal, `(D₍₁,₁₎ − D₍₁,₋₁₎)/4` for the mixed entry (the four-point
/// cross away from the boundary). Exact on quadratics.
pub fn hessian_at(w: &ScalarField, idx: usize) -> Sym2 {
    match w.grid().dim() {
        Dim::One => Sym2::new(w.second_difference(idx, 0), 0.0, 0.0),
        Dim::Two => {
            let h11 = w.second_difference(idx, 0);
            let h22 = w.second_difference(idx, 1);
            let h12 = 0.25 * (w.second_difference(idx, 2) - w.second_difference(idx, 3));
            Sym2::new(h11, h12, h22)
        }
    }
}

/// Discrete Hessian at interior nodes; nodes where it is not finite are
/// left out.
pub fn discrete_hessian(w: &ScalarField) -> TensorField {
    let g = w.grid().clone();
    let values = (0..g.len())
        .map(|i| {
            if !g.is_interior(i) {
                return None;
            }
            let h = hessian_at(w, i);
            (h.a11.is_finite() && h.a12.is_finite() && h.a22.is_finite()).then_some(h)
        })
        .collect();
    TensorField { grid: g, values }
}

/// Cofactor (adjugate) field; `[1]` in 1D.
pub fn cofactor_field(h: &TensorField) -> TensorField {
    let dim = h.dim();
    let values = h
        .values
        .iter()
        .map(|v| {
            v.map(|m| match dim {
                Dim::One => Sym2::new(1.0, 0.0, 0.0),
                Dim::Two => m.adjugate(),
            })
        })
        .collect();
    TensorField {
        grid: h.grid.clone(),
        values,
    }
}

/// Max over nodes of `‖W·H − det(H)·I‖` and `|det W − det(H)^{n−1}|`.
pub fn cofactor_identity_defect(h: &TensorField, w: &TensorField) -> (f64, f64) {
    let dim = h.dim();
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for (hv, wv) in h.values.iter().zip(&w.values) {
        if let (Some(hm), Some(wm)) = (hv, wv) {
            match dim {
                Dim::One => {
                    e1 = e1.max((wm.a11 * hm.a11 - hm.a11).abs());
                    e2 = e2.max((wm.a11 - 1.0).abs());
                }
                Dim::Two => {
                    let p = wm.to_mat().mul(&hm.to_mat());
                    let d = hm.det();
                    e1 = e1
                        .max((p.a11 - d).abs())
                        .max((p.a22 - d).abs())
                        .max(p.a12.abs())
                        .max(p.a21.abs());
                    e2 = e2.max((wm.det() - d).abs());
                }
            }
        }
    }
    (e1, e2)
}

/// Coefficient target in an assembled stencil row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// Interior node index.
    Node(usize),
    /// Global arm index (boundary datum at the crossing).
    Arm(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct OperatorOptions {
    /// Widest lattice direction used by the eigenvector fallback, 1 to 3.
    pub max_width: u8,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self { max_width: 3 }
    }
}

/// Assembled monotone discretization of `L_w` over the interior nodes.
///
/// Where `|W₁₂| ≤ min(W₁₁, W₂₂)` the row is the seven-point form
/// `(W₁₁ − |W₁₂|)D₁₁ + (W₂₂ − |W₁₂|)D₂₂ + |W₁₂| D₍₁,±₁₎`; elsewhere it is
/// `Σ λₖ D_{dₖ}/|dₖ|²` over the eigenpairs of `W` with `dₖ` the nearest
/// lattice direction. Every row then has a negative centre and nonnegative
/// neighbour weights, so `−L_h` is an M-matrix. Negative eigenvalues are
/// clamped to zero and the node is recorded in `repaired`.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: Arc<Grid>,
    /// Interior node of each row.
    pub nodes: Vec<usize>,
    /// Row number of each node (`usize::MAX` off the interior).
    pub row_of: Vec<usize>,
    pub center: Vec<f64>,
    row_ptr: Vec<usize>,
    entries: Vec<(Target, f64)>,
    /// Rows that used the eigenvector fallback.
    pub fallback: Vec<usize>,
    /// Rows whose tensor was missing or not positive semidefinite.
    pub repaired: Vec<usize>,
}

impl DiscreteOperator {
    pub fn assemble(w: &TensorField, opts: OperatorOptions) -> Self {
        let g = w.grid().clone();
        let (row_of, nodes) = g.interior_numbering();
        let mut center = Vec::with_capacity(nodes.len());
        let mut row_ptr = Vec::with_capacity(nodes.len() + 1);
        let mut entries = Vec::with_capacity(nodes.len() * 7);
        let mut fallback = Vec::new();
        let mut repaired = Vec::new();
        row_ptr.push(0);
        let pairs = pairs_for_width(opts.max_width.clamp(1, 3));
        for (r, &idx) in nodes.iter().enumerate() {
            let mut c0 = 0.0;
            let mut add_pair = |pair: usize, weight: f64, entries: &mut Vec<(Target, f64)>| {
                if weight == 0.0 {
                    return;
                }
                let (tp, ap) = reach_target(&g, idx, 2 * pair);
                let (tm, am) = reach_target(&g, idx, 2 * pair + 1);
                let c = second_difference_weights(tp, tm, g.spacing());
                entries.push((ap, weight * c[0]));
                entries.push((am, weight * c[1]));
                c0 += weight * c[2];
            };
            let m = match w.get(idx) {
                Some(m) if m.a11.is_finite() && m.a12.is_finite() && m.a22.is_finite() => m,
                _ => {
                    repaired.push(r);
                    Sym2::IDENTITY
                }
            };
            match g.dim() {
                Dim::One => {
                    let a = if m.a11 < 0.0 {
                        repaired.push(r);
                        0.0
                    } else {
                        m.a11
                    };
                    add_pair(0, a, &mut entries);
                }
                Dim::Two => {
                    let b = m.a12.abs();
                    if b <= m.a11.min(m.a22) {
                        add_pair(0, m.a11 - b, &mut entries);
                        add_pair(1, m.a22 - b, &mut entries);
                        add_pair(if m.a12 >= 0.0 { 2 } else { 3 }, b, &mut entries);
                    } else {
                        fallback.push(r);
                        let ((l1, v1), (l2, v2)) = m.eigen_vectors();
                        if l2 < 0.0 {
                            repaired.push(r);
                        }
                        for (l, v) in [(l1, v1), (l2, v2)] {
                            if l <= 0.0 {
                                continue;
                            }
                            let (pair, len2) = nearest_pair(v, pairs);
                            add_pair(pair, l / len2, &mut entries);
                        }
                    }
                }
            }
            center.push(c0);
            row_ptr.push(entries.len());
        }
        Self {
            grid: g,
            nodes,
            row_of,
            center,
            row_ptr,
            entries,
            fallback,
            repaired,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn rows(&self) -> usize {
        self.nodes.len()
    }

    pub fn row(&self, r: usize) -> &[(Target, f64)] {
        &self.entries[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// `(L_h u)` at row `r` given node values and arm values.
    pub fn apply_row(&self, r: usize, values: &[f64], arm_values: &[f64]) -> f64 {
        let mut s = self.center[r] * values[self.nodes[r]];
        for &(t, c) in self.row(r) {
            s += c * match t {
                Target::Node(m) => values[m],
                Target::Arm(a) => arm_values[a],
            };
        }
        s
    }

    /// `L_h u` per row.
    pub fn apply(&self, u: &ScalarField) -> Vec<f64> {
        (0..self.rows())
            .map(|r| self.apply_row(r, u.values(), u.arm_values()))
            .collect()
    }

    /// `−L_h` restricted to interior unknowns, and the right-hand side that
    /// carries the boundary data: `−L_h u = 0` becomes `A x = b`.
    pub fn negated_system(&self, arm_values: &[f64]) -> (CsrMatrix, Vec<f64>) {
        let n = self.rows();
        let mut a = CsrMatrix::with_capacity(n, self.entries.len() + n);
        let mut b = vec![0.0; n];
        let mut row = Vec::with_capacity(16);
        for r in 0..n {
            row.push((r, -self.center[r]));
            for &(t, c) in self.row(r) {
                match t {
                    Target::Node(m) => row.push((self.row_of[m], -c)),
                    Target::Arm(k) => b[r] += c * arm_values[k],
                }
            }
            a.push_row(&mut row);
        }
        (a, b)
    }

    /// Checks the sign pattern of every row; returns a description of the
    /// first offending row.
    pub fn monotonicity_defect(&self) -> Option<String> {
        for r in 0..self.rows() {
            let off: f64 = self.row(r).iter().map(|e| e.1).sum();
            if self.row(r).iter().any(|e| e.1 < 0.0) || self.center[r] > 0.0 {
                return Some(format!(
                    "row at node {} has a wrong-signed weight",
                    self.nodes[r]
                ));
            }
            if self.center[r] + off > 1e-9 * off.abs().max(1.0) {
                return Some(format!(
                    "row at node {} is not diagonally dominant",
                    self.nodes[r]
                ));
            }
        }
        None
    }
}

/// Reach of an interior node along a direction as a stencil target.
pub fn reach_target(g: &Grid, idx: usize, dir: usize) -> (f64, Target) {
    if let Some(m) = g.neighbor(idx, dir) {
        if g.is_interior(m) {
            return (1.0, Target::Node(m));
        }
    }
    let a = g
        .arm_index(idx, dir)
        .expect("every non-interior lattice neighbour of an interior node has an arm");
    (g.all_arms()[a].theta, Target::Arm(a))
}

/// Direction pair (among the first `pairs`) closest in angle to `v`, and
/// the squared length of its lattice vector.
fn nearest_pair(v: Vec2, pairs: usize) -> (usize, f64) {
    let mut best = (0, 1.0, f64::NEG_INFINITY);
    for p in 0..pairs {
        let (a, b) = crate::geometry::DIRS_2D[2 * p];
        let d = Vec2::new(a as f64, b as f64);
        let len2 = d.norm2();
        let c = d.dot(v).abs() / crate::math::sqrt(len2);
        if c > best.2 + 1e-12 {
            best = (p, len2, c);
        }
    }
    (best.0, best.1)
}

/// `L_w u` at interior nodes (NaN elsewhere), using the monotone assembly.
pub fn apply_lw(w: &TensorField, u: &ScalarField) -> Result<ScalarField> {
    if !w.grid().same_lattice(u.grid()) {
        return Err(Error::InvalidInput(
            "W and u live on different grids".into(),
        ));
    }
    let op = DiscreteOperator::assemble(w, OperatorOptions::default());
    let lu = op.apply(u);
    let mut values = vec![f64::NAN; u.grid().len()];
    for (r, &idx) in op.nodes.iter().enumerate() {
        values[idx] = lu[r];
    }
    ScalarField::new(
        u.grid().clone(),
        values,
        vec![f64::NAN; u.grid().all_arms().len()],
    )
}

/// `max_{node, j} |Σᵢ Dᵢ W_ij|` with centred first differences, over interior
/// nodes whose axis neighbours all carry a tensor.
pub fn divergence_residual(w: &TensorField) -> f64 {
    let g = w.grid();
    let h = g.spacing();
    let mut worst: f64 = 0.0;
    for idx in g.interior_nodes() {
        let get = |dir: usize| g.neighbor(idx, dir).and_then(|m| w.get(m));
        match g.dim() {
            Dim::One => {
                if let (Some(p), Some(m)) = (get(0), get(1)) {
                    worst = worst.max(((p.a11 - m.a11) / (2.0 * h)).abs());
                }
            }
            Dim::Two => {
                if let (Some(xp), Some(xm), Some(yp), Some(ym)) = (get(0), get(1), get(2), get(3)) {
                    let d1 = (xp.a11 - xm.a11) / (2.0 * h) + (yp.a12 - ym.a12) / (2.0 * h);
                    let d2 = (xp.a12 - xm.a12) / (2.0 * h) + (yp.a22 - ym.a22) / (2.0 * h);
                    worst = worst.max(d1.abs()).max(d2.abs());
                }
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport {
    pub pass: bool,
    pub min_det: f64,
    pub max_det: f64,
    pub lower: f64,
    pub upper: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Largest eigenvalue ratio over nodes.
    pub max_ratio: f64,
    /// Set when the eigenvalue ratio exceeds 10 somewhere: `det W` is
    /// controlled but `W` itself is far from a multiple of the identity.
    pub degenerate: bool,
    pub violations: usize,
    pub nodes: usize,
}

/// Checks `λ^{n−1} ≤ det W ≤ Λ^{n−1}` with a relative `slack`.
pub fn ellipticity_check(
    w: &TensorField,
    bounds: &EllipticityBounds,
    slack: f64,
) -> EllipticityReport {
    let n = w.dim().nf();
    let lower = powf(bounds.lambda, n - 1.0);
    let upper = powf(bounds.big_lambda, n - 1.0);
    let mut r = EllipticityReport {
        pass: true,
        min_det: f64::INFINITY,
        max_det: f64::NEG_INFINITY,
        lower,
        upper,
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
        max_ratio: 1.0,
        degenerate: false,
        violations: 0,
        nodes: 0,
    };
    for m in w.values.iter().flatten() {
        let (d, l1, l2) = match w.dim() {
            Dim::One => (m.a11, m.a11, m.a11),
            Dim::Two => {
                let (l1, l2) = m.eigen();
                (m.det(), l1, l2)
            }
        };
        r.nodes += 1;
        r.min_det = r.min_det.min(d);
        r.max_det = r.max_det.max(d);
        r.min_eigenvalue = r.min_eigenvalue.min(l2);
        r.max_eigenvalue = r.max_eigenvalue.max(l1);
        if l2 > 0.0 {
            r.max_ratio = r.max_ratio.max(l1 / l2);
        } else {
            r.max_ratio = f64::INFINITY;
        }
        if d < lower * (1.0 - slack) || d > upper * (1.0 + slack) {
            r.violations += 1;
        }
    }
    r.pass = r.violations == 0 && r.nodes > 0;
    r.degenerate = r.max_ratio > 10.0;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;

    fn grid(h: f64) -> Arc<Grid> {
        Arc::new(Grid::covering(&ConvexDomain::unit_ball(), h).unwrap())
    }

    #[test]
    fn hessian_of_bilinear_is_exact() {
        let g = grid(1.0 / 16.0);
        let w = ScalarField::from_fn(&g, |p| p.x * p.y);
        let h = discrete_hessian(&w);
        for m in h.values().iter().flatten() {
            assert!(m.max_abs_diff(&Sym2::new(0.0, 1.0, 0.0)) < 1e-9);
        }
    }

    #[test]
    fn lw_of_quadratic_with_diagonal_w() {
        let g = grid(1.0 / 16.0);
        let w = TensorField::constant(&g, Sym2::diag(2.0, 1.0));
        let u = ScalarField::from_fn(&g, |p| p.norm2());
        let lu = apply_lw(&w, &u).unwrap();
        for idx in g.interior_nodes() {
            assert!((lu.value(idx) - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fallback_rows_stay_monotone() {
        let g = grid(1.0 / 16.0);
        // |W12| > min(W11, W22)
        let w = TensorField::constant(&g, Sym2::new(4.0, 1.5, 1.0));
        let op = DiscreteOperator::assemble(&w, OperatorOptions::default());
        assert_eq!(op.fallback.len(), op.rows());
        assert!(op.monotonicity_defect().is_none());
    }

    #[test]
    fn anisotropic_hessian_flags_degeneracy() {
        let g = grid(1.0 / 8.0);
        let h = TensorField::constant(&g, Sym2::diag(4.0, 0.25));
        let w = cofactor_field(&h);
        let r = ellipticity_check(&w, &EllipticityBounds::new(1.0, 1.0).unwrap(), 1e-12);
        assert!(r.pass);
        assert!(r.degenerate);
    }
}
