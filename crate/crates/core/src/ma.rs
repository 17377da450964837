//! Dirichlet problem `det D²w = f` in `Ω`, `w = 0` on `∂Ω`, and a radial
//! quadrature oracle.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{
    pairs_for_width, second_difference_weights, ConvexDomain, Dim, Grid, ScalarField, DIRS_2D,
};
use crate::linma::{
    hessian_at, reach_target, DiscreteOperator, EllipticityBounds, OperatorOptions, Target,
    TensorField,
};
use crate::math::{abs, powf, Sym2};
use crate::sparse::{self, CsrMatrix, GmresParams};

#[derive(Clone, Debug)]
pub struct MaProblem {
    pub domain: ConvexDomain,
    /// Density sampled on the solve grid.
    pub f: ScalarField,
    pub bounds: EllipticityBounds,
}

impl MaProblem {
    /// Checks `λ ≤ f ≤ Λ` at interior nodes.
    pub fn validate(&self) -> Result<()> {
        let g = self.f.grid();
        for idx in g.interior_nodes() {
            let v = self.f.value(idx);
            if !(v >= self.bounds.lambda && v <= self.bounds.big_lambda) {
                return Err(Error::InvalidInput(format!(
                    "density {v} at node {idx} outside [{}, {}]",
                    self.bounds.lambda, self.bounds.big_lambda
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MaParams {
    pub tol_ma: f64,
    pub tol_convex: f64,
    pub max_newton: usize,
    /// Stencil width used for the convexity margin, 1 to 3.
    pub stencil_width: u8,
    /// Iteration cap of the explicit pseudo-time fallback.
    pub max_pseudo_time: usize,
}

impl Default for MaParams {
    fn default() -> Self {
        Self {
            tol_ma: 1e-8,
            tol_convex: 1e-10,
            max_newton: 200,
            stencil_width: 2,
            max_pseudo_time: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaMethod {
    Newton,
    PseudoTime,
}

#[derive(Clone, Debug)]
pub struct MaSolution {
    pub w: ScalarField,
    pub iterations: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub convexity_margin: f64,
    pub method: MaMethod,
}

/// Residual statistics of a candidate solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaResidual {
    pub max: f64,
    pub mean: f64,
    /// Smallest normalized second difference `D_d w/|d|²` over interior nodes
    /// and stencil directions.
    pub convexity_margin: f64,
}

/// `det_h D²w` at an interior node.
pub fn det_h(w: &ScalarField, idx: usize) -> f64 {
    let h = hessian_at(w, idx);
    match w.grid().dim() {
        Dim::One => h.a11,
        Dim::Two => h.det(),
    }
}

pub fn convexity_margin(w: &ScalarField, width: u8) -> f64 {
    let g = w.grid();
    let pairs = match g.dim() {
        Dim::One => 1,
        Dim::Two => pairs_for_width(width),
    };
    let mut m = f64::INFINITY;
    for idx in g.interior_nodes() {
        for p in 0..pairs {
            let (a, b) = DIRS_2D[2 * p];
            let len2 = (a * a + b * b) as f64;
            m = m.min(w.second_difference(idx, p) / len2);
        }
    }
    m
}

pub fn verify_ma_residual(w: &ScalarField, f: &ScalarField, width: u8) -> MaResidual {
    let g = w.grid();
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    for idx in g.interior_nodes() {
        let r = abs(det_h(w, idx) - f.value(idx));
        max = max.max(r);
        sum += r;
        n += 1;
    }
    MaResidual {
        max,
        mean: if n > 0 { sum / n as f64 } else { 0.0 },
        convexity_margin: convexity_margin(w, width),
    }
}

/// Residual `det_h D²w − f` per interior row.
fn residual(w: &ScalarField, f: &ScalarField, nodes: &[usize]) -> Vec<f64> {
    nodes.iter().map(|&i| det_h(w, i) - f.value(i)).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(abs(*x)))
}

fn field_from_unknowns(grid: &Arc<Grid>, nodes: &[usize], x: &[f64]) -> ScalarField {
    let mut vals = vec![0.0; grid.len()];
    for (r, &i) in nodes.iter().enumerate() {
        vals[i] = x[r];
    }
    ScalarField::from_interior(grid, &vals, 0.0)
}

/// Jacobian of `w ↦ det_h D²w` at `w`: `tr(cof(H)·D²δ)` with the same
/// stencils as the residual.
fn jacobian(w: &ScalarField, nodes: &[usize], row_of: &[usize]) -> CsrMatrix {
    let g = w.grid();
    let hsp = g.spacing();
    let mut a = CsrMatrix::with_capacity(nodes.len(), nodes.len() * 9);
    let mut row = Vec::with_capacity(16);
    for (r, &idx) in nodes.iter().enumerate() {
        let weights: Vec<(usize, f64)> = match g.dim() {
            Dim::One => vec![(0, 1.0)],
            Dim::Two => {
                let h = hessian_at(w, idx);
                vec![(0, h.a22), (1, h.a11), (2, -0.5 * h.a12), (3, 0.5 * h.a12)]
            }
        };
        let mut diag = 0.0;
        for (pair, wt) in weights {
            let (tp, ap) = reach_target(g, idx, 2 * pair);
            let (tm, am) = reach_target(g, idx, 2 * pair + 1);
            let c = second_difference_weights(tp, tm, hsp);
            for (t, ci) in [(ap, c[0]), (am, c[1])] {
                if let Target::Node(m) = t {
                    row.push((row_of[m], wt * ci));
                }
            }
            diag += wt * c[2];
        }
        row.push((r, diag));
        a.push_row(&mut row);
    }
    a
}

/// Poisson initial guess `Δw = n·f^{1/n}` with zero boundary data.
fn initial_guess(f: &ScalarField, nodes: &[usize]) -> Result<Vec<f64>> {
    let g = f.grid();
    let n = g.dim().nf();
    let id = TensorField::constant(g, Sym2::IDENTITY);
    let op = DiscreteOperator::assemble(&id, OperatorOptions { max_width: 1 });
    let zeros = vec![0.0; g.all_arms().len()];
    let (a, mut b) = op.negated_system(&zeros);
    for (r, &i) in nodes.iter().enumerate() {
        b[r] -= n * powf(f.value(i), 1.0 / n);
    }
    let mut x = vec![0.0; nodes.len()];
    sparse::solve(&a, &b, &mut x, 1e-12)?;
    Ok(x)
}

/// Damped Newton with backtracking; explicit pseudo-time iteration if Newton
/// stalls.
pub fn solve_ma(p: &MaProblem, grid: &Arc<Grid>, params: &MaParams) -> Result<MaSolution> {
    if !Arc::ptr_eq(p.f.grid(), grid) && !p.f.grid().same_lattice(grid) {
        return Err(Error::InvalidInput(
            "density is not sampled on the solve grid".into(),
        ));
    }
    p.validate()?;
    let (row_of, nodes) = grid.interior_numbering();
    if nodes.is_empty() {
        return Err(Error::DegenerateInput("grid has no interior nodes".into()));
    }
    let f = &p.f;
    let mut x = initial_guess(f, &nodes)?;
    let mut w = field_from_unknowns(grid, &nodes, &x);
    let mut res = residual(&w, f, &nodes);
    let mut rnorm = max_abs(&res);
    let mut iterations = 0;
    let gm = GmresParams {
        rel_tol: 1e-12,
        ..GmresParams::default()
    };
    let mut stalled = false;
    while rnorm > params.tol_ma && iterations < params.max_newton {
        iterations += 1;
        let jac = jacobian(&w, &nodes, &row_of);
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let mut dx = vec![0.0; nodes.len()];
        let solved = sparse::preconditioner(&jac)
            .and_then(|pre| sparse::gmres(&jac, &rhs, &mut dx, Some(pre.as_ref()), &gm));
        if solved.is_err() {
            stalled = true;
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 1024.0 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            let wt = field_from_unknowns(grid, &nodes, &trial);
            let rt = residual(&wt, f, &nodes);
            let nt = max_abs(&rt);
            if nt.is_finite() && nt < (1.0 - 1e-4 * t) * rnorm {
                x = trial;
                w = wt;
                res = rt;
                rnorm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            stalled = true;
            break;
        }
    }
    let mut method = MaMethod::Newton;
    if rnorm > params.tol_ma {
        if !stalled && iterations >= params.max_newton {
            return Err(Error::NoConvergence {
                iterations,
                residual: rnorm,
            });
        }
        method = MaMethod::PseudoTime;
        let (xn, it, rn) = pseudo_time(f, grid, &nodes, x, params)?;
        x = xn;
        iterations += it;
        rnorm = rn;
        w = field_from_unknowns(grid, &nodes, &x);
    }
    let stats = verify_ma_residual(&w, f, params.stencil_width);
    debug_assert!(stats.max <= rnorm * (1.0 + 1e-12) + 1e-300);
    Ok(MaSolution {
        w,
        iterations,
        max_residual: stats.max,
        mean_residual: stats.mean,
        convexity_margin: stats.convexity_margin,
        method,
    })
}

fn pseudo_time(
    f: &ScalarField,
    grid: &Arc<Grid>,
    nodes: &[usize],
    mut x: Vec<f64>,
    params: &MaParams,
) -> Result<(Vec<f64>, usize, f64)> {
    let h = grid.spacing();
    let mut rnorm = f64::INFINITY;
    for it in 1..=params.max_pseudo_time {
        let w = field_from_unknowns(grid, nodes, &x);
        let res = residual(&w, f, nodes);
        rnorm = max_abs(&res);
        if rnorm <= params.tol_ma {
            return Ok((x, it, rnorm));
        }
        for (r, &i) in nodes.iter().enumerate() {
            let hm = hessian_at(&w, i);
            let tr = (hm.a11 + hm.a22).max(1e-3);
            let dt = 0.2 * h * h / tr;
            x[r] += dt * res[r];
        }
        if !rnorm.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: params.max_pseudo_time,
        residual: rnorm,
    })
}

/// Tabulated radial solution of `det D²w = f(|x|)` on `B_R`, `w(R) = 0`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub radius: f64,
    pub dim: Dim,
    r: Vec<f64>,
    w: Vec<f64>,
    dw: Vec<f64>,
}

impl RadialProfile {
    /// Cubic Hermite interpolation of the tabulated profile.
    pub fn w(&self, r: f64) -> f64 {
        let (k, t, dr) = self.locate(r);
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.w[k] + h10 * dr * self.dw[k] + h01 * self.w[k + 1] + h11 * dr * self.dw[k + 1]
    }

    /// `w'(r)`.
    pub fn dw(&self, r: f64) -> f64 {
        let (k, t, _) = self.locate(r);
        self.dw[k] * (1.0 - t) + self.dw[k + 1] * t
    }

    fn locate(&self, r: f64) -> (usize, f64, f64) {
        let n = self.r.len() - 1;
        let dr = self.radius / n as f64;
        let s = (abs(r) / dr).clamp(0.0, n as f64);
        let k = (s as usize).min(n - 1);
        (k, s - k as f64, dr)
    }
}

/// Solves `(w')ⁿ = n ∫₀ʳ f(s) s^{n−1} ds`, `w(R) = 0`, by adaptive Simpson
/// quadrature on a fine table.
pub fn radial_ma_oracle(f: &dyn Fn(f64) -> f64, radius: f64, dim: Dim) -> Result<RadialProfile> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("radius {radius}")));
    }
    let n = dim.nf();
    let m = 4096;
    let dr = radius / m as f64;
    let r: Vec<f64> = (0..=m).map(|k| k as f64 * dr).collect();
    let g = |s: f64| f(s) * powf(s, n - 1.0);
    let mut mass = vec![0.0; m + 1];
    for k in 1..=m {
        mass[k] = mass[k - 1] + adaptive_simpson(&g, r[k - 1], r[k], 1e-14);
    }
    if mass.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("density must be positive".into()));
    }
    let dw: Vec<f64> = mass.iter().map(|&v| powf(n * v, 1.0 / n)).collect();
    // w' between table points from the exact mass integral at midpoints
    let mut w = vec![0.0; m + 1];
    for k in (0..m).rev() {
        let slope = |s: f64| {
            let extra = adaptive_simpson(&g, r[k], s, 1e-14);
            powf(n * (mass[k] + extra), 1.0 / n)
        };
        w[k] = w[k + 1] - adaptive_simpson(&slope, r[k], r[k + 1], 1e-13);
    }
    Ok(RadialProfile {
        radius,
        dim,
        r,
        w,
        dw,
    })
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || abs(delta) <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Convenience: sample a density on a grid.
pub fn sample_density(grid: &Arc<Grid>, f: impl Fn(crate::math::Vec2) -> f64) -> ScalarField {
    ScalarField::from_fn(grid, f)
}
