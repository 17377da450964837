//! Obstacle problem for `L_w`: find `u ≥ φ` with `L_w u ≤ 0` in `Ω`,
//! `L_w u = 0` where `u > φ`, and `u = 0` on `∂Ω`.
//!
//! On the grid this is the linear complementarity problem
//! `A u − b ≥ 0, u − φ ≥ 0, (A u − b)·(u − φ) = 0` with `A = −L_h` an
//! M-matrix. Three solvers are provided (projected SOR, primal-dual active
//! set, and Perron dropping on balls) so they can be checked against each
//! other.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::contour::{marching_squares, Polyline};
use crate::error::{Error, Result};
use crate::geometry::{Dim, Grid, NodeTag, ScalarField};
use crate::linma::{DiscreteOperator, OperatorOptions, TensorField};
use crate::math::{abs, floor, sqrt, Vec2};
use crate::sparse::{self, CsrMatrix, GmresParams};

/// Non-fatal findings attached to a problem or a solution.
#[derive(Clone, Debug, PartialEq)]
pub enum ObstacleWarning {
    /// `φ ≥ 0` at this many boundary points.
    ObstacleNotNegativeOnBoundary { count: usize, max: f64 },
    /// `φ ≤ 0` at every interior node, so the solution is `u ≡ 0`.
    ObstacleNowherePositive,
    /// The assembled operator failed the sign check.
    NonMonotoneStencil(String),
    /// Rows whose tensor was missing or indefinite and had to be repaired.
    RepairedRows(usize),
}

#[derive(Clone, Debug)]
pub struct ObstacleProblem {
    pub w: TensorField,
    pub phi: ScalarField,
}

impl ObstacleProblem {
    pub fn new(w: TensorField, phi: ScalarField) -> Result<Self> {
        if !w.grid().same_lattice(phi.grid()) {
            return Err(Error::InvalidInput(
                "W and φ live on different grids".into(),
            ));
        }
        if w.grid().interior_count() == 0 {
            return Err(Error::DegenerateInput("grid has no interior nodes".into()));
        }
        Ok(Self { w, phi })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.phi.grid()
    }

    /// Checks `φ < 0` on `∂Ω` (at arm crossings and boundary nodes) and
    /// `φ > 0` somewhere inside.
    pub fn guards(&self) -> Vec<ObstacleWarning> {
        let g = self.grid();
        let mut out = Vec::new();
        let mut count = 0;
        let mut max = f64::NEG_INFINITY;
        let boundary = self.phi.arm_values().iter().copied().chain(
            (0..g.len())
                .filter(|&i| g.tag(i) == NodeTag::Boundary)
                .map(|i| self.phi.value(i)),
        );
        for v in boundary.filter(|v| v.is_finite()) {
            if v >= 0.0 {
                count += 1;
                max = max.max(v);
            }
        }
        if count > 0 {
            out.push(ObstacleWarning::ObstacleNotNegativeOnBoundary { count, max });
        }
        if g.interior_nodes().all(|i| !(self.phi.value(i) > 0.0)) {
            out.push(ObstacleWarning::ObstacleNowherePositive);
        }
        out
    }

    /// `‖φ‖_∞` over interior nodes.
    pub fn phi_scale(&self) -> f64 {
        self.grid()
            .interior_nodes()
            .map(|i| abs(self.phi.value(i)))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Psor,
    ActiveSet,
    Perron,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Psor => "psor",
            Solver::ActiveSet => "activeset",
            Solver::Perron => "perron",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ObstacleParams {
    /// Bound on the complementarity residual.
    pub tol_lcp: f64,
    /// PSOR relaxation, in `(0, 2)`.
    pub omega: f64,
    pub max_iter: usize,
    /// Contact tolerance; `None` means `1e-10·‖φ‖_∞`.
    pub tol_contact: Option<f64>,
    pub stencil: OperatorOptions,
}

impl Default for ObstacleParams {
    fn default() -> Self {
        Self {
            tol_lcp: 1e-8,
            omega: 1.5,
            max_iter: 1_000_000,
            tol_contact: None,
            stencil: OperatorOptions::default(),
        }
    }
}

impl ObstacleParams {
    pub fn contact_tol(&self, p: &ObstacleProblem) -> f64 {
        self.tol_contact.unwrap_or(1e-10 * p.phi_scale())
    }
}

#[derive(Clone, Debug)]
pub struct LcpSolution {
    pub u: ScalarField,
    /// Per grid node; `u − φ ≤ tol_contact` at an interior node.
    pub contact: Vec<bool>,
    /// `max |min(−L_h u, u − φ)|` over interior nodes.
    pub residual: f64,
    pub iterations: usize,
    pub solver: Solver,
    pub tol_contact: f64,
    pub warnings: Vec<ObstacleWarning>,
    phi: ScalarField,
}

impl LcpSolution {
    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn contact_count(&self) -> usize {
        self.contact.iter().filter(|c| **c).count()
    }

    /// Residual, contact set and warnings of an arbitrary candidate `v`,
    /// e.g. the limit of [`perron_dropping`].
    pub fn from_field(
        p: &ObstacleProblem,
        v: ScalarField,
        solver: Solver,
        iterations: usize,
        params: &ObstacleParams,
    ) -> Result<Self> {
        if !p.grid().same_lattice(v.grid()) {
            return Err(Error::InvalidInput(
                "candidate lives on another grid".into(),
            ));
        }
        let lcp = Lcp::build(p, params);
        let x: Vec<f64> = lcp.op.nodes.iter().map(|&i| v.value(i)).collect();
        Ok(lcp.finish(p, &x, iterations, solver, params))
    }
}

/// The complementarity system over interior unknowns.
struct Lcp {
    op: DiscreteOperator,
    a: CsrMatrix,
    b: Vec<f64>,
    phi: Vec<f64>,
    warnings: Vec<ObstacleWarning>,
}

impl Lcp {
    fn build(p: &ObstacleProblem, params: &ObstacleParams) -> Self {
        let op = DiscreteOperator::assemble(&p.w, params.stencil);
        let zeros = vec![0.0; p.grid().all_arms().len()];
        let (a, b) = op.negated_system(&zeros);
        let phi = op.nodes.iter().map(|&i| p.phi.value(i)).collect();
        let mut warnings = p.guards();
        if let Some(msg) = op.monotonicity_defect() {
            warnings.push(ObstacleWarning::NonMonotoneStencil(msg));
        }
        if !op.repaired.is_empty() {
            warnings.push(ObstacleWarning::RepairedRows(op.repaired.len()));
        }
        Self {
            op,
            a,
            b,
            phi,
            warnings,
        }
    }

    fn finish(
        self,
        p: &ObstacleProblem,
        x: &[f64],
        iterations: usize,
        solver: Solver,
        params: &ObstacleParams,
    ) -> LcpSolution {
        let g = p.grid();
        let residual = complementarity_residual(&self.a, &self.b, &self.phi, x);
        let mut vals = vec![0.0; g.len()];
        for (r, &i) in self.op.nodes.iter().enumerate() {
            vals[i] = x[r];
        }
        let u = ScalarField::from_interior(g, &vals, 0.0);
        let tol_contact = params.contact_tol(p);
        let mut contact = vec![false; g.len()];
        for (r, &i) in self.op.nodes.iter().enumerate() {
            contact[i] = x[r] - self.phi[r] <= tol_contact;
        }
        LcpSolution {
            u,
            contact,
            residual,
            iterations,
            solver,
            tol_contact,
            warnings: self.warnings,
            phi: p.phi.clone(),
        }
    }
}

fn complementarity_residual(a: &CsrMatrix, b: &[f64], phi: &[f64], x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    a.matvec(x, &mut ax);
    (0..x.len())
        .map(|r| abs((ax[r] - b[r]).min(x[r] - phi[r])))
        .fold(0.0, f64::max)
}

/// Projected Gauss-Seidel with over-relaxation, sweeping rows in
/// lexicographic node order.
pub fn solve_obstacle_psor(p: &ObstacleProblem, params: &ObstacleParams) -> Result<LcpSolution> {
    if !(params.omega > 0.0 && params.omega < 2.0) {
        return Err(Error::InvalidInput(format!(
            "relaxation {} outside (0, 2)",
            params.omega
        )));
    }
    let lcp = Lcp::build(p, params);
    let n = lcp.a.rows();
    let mut x: Vec<f64> = lcp.phi.iter().map(|v| v.max(0.0)).collect();
    let diag: Vec<f64> = (0..n).map(|r| lcp.a.diag(r)).collect();
    let mut sweeps = 0;
    loop {
        for _ in 0..10 {
            for r in 0..n {
                let (c, v) = lcp.a.row(r);
                let mut s = lcp.b[r];
                for k in 0..c.len() {
                    if c[k] != r {
                        s -= v[k] * x[c[k]];
                    }
                }
                let gs = s / diag[r];
                x[r] = (x[r] + params.omega * (gs - x[r])).max(lcp.phi[r]);
            }
        }
        sweeps += 10;
        let res = complementarity_residual(&lcp.a, &lcp.b, &lcp.phi, &x);
        if !res.is_finite() {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual: res,
            });
        }
        if res <= params.tol_lcp {
            break;
        }
        if sweeps >= params.max_iter {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual: res,
            });
        }
    }
    Ok(lcp.finish(p, &x, sweeps, Solver::Psor, params))
}

/// Primal-dual active set iteration on `A x − b = λ`, `λ ≥ 0`, `x ≥ φ`,
/// `λ·(x − φ) = 0`. Returns the outer iteration count.
///
/// `x` holds the initial guess and receives the solution.
fn pdas(
    a: &CsrMatrix,
    b: &[f64],
    phi: &[f64],
    x: &mut [f64],
    tol: f64,
    max_outer: usize,
) -> Result<usize> {
    let n = a.rows();
    let mut ax = vec![0.0; n];
    a.matvec(x, &mut ax);
    let mut active: Vec<bool> = (0..n)
        .map(|r| (ax[r] - b[r]) + (phi[r] - x[r]) > 0.0)
        .collect();
    let mut inactive_of = vec![usize::MAX; n];
    let mut last = f64::INFINITY;
    for outer in 1..=max_outer {
        // reduced system on the inactive rows, active rows pinned to φ
        let rows: Vec<usize> = (0..n).filter(|&r| !active[r]).collect();
        for (k, &r) in rows.iter().enumerate() {
            inactive_of[r] = k;
        }
        for r in 0..n {
            if active[r] {
                inactive_of[r] = usize::MAX;
                x[r] = phi[r];
            }
        }
        if !rows.is_empty() {
            let mut sub = CsrMatrix::with_capacity(rows.len(), rows.len() * 9);
            let mut rhs = vec![0.0; rows.len()];
            let mut entries = Vec::with_capacity(32);
            for (k, &r) in rows.iter().enumerate() {
                let (c, v) = a.row(r);
                rhs[k] = b[r];
                for q in 0..c.len() {
                    let m = inactive_of[c[q]];
                    if m == usize::MAX {
                        rhs[k] -= v[q] * phi[c[q]];
                    } else {
                        entries.push((m, v[q]));
                    }
                }
                sub.push_row(&mut entries);
            }
            let mut y: Vec<f64> = rows.iter().map(|&r| x[r]).collect();
            let pre = sparse::preconditioner(&sub)?;
            let gm = GmresParams {
                rel_tol: 0.0,
                abs_tol: 0.1 * tol,
                ..GmresParams::default()
            };
            sparse::gmres(&sub, &rhs, &mut y, Some(pre.as_ref()), &gm)?;
            for (k, &r) in rows.iter().enumerate() {
                x[r] = y[k];
            }
        }
        a.matvec(x, &mut ax);
        let next: Vec<bool> = (0..n)
            .map(|r| (ax[r] - b[r]) + (phi[r] - x[r]) > tol)
            .collect();
        let res = complementarity_residual(a, b, phi, x);
        if next == active && res <= tol {
            return Ok(outer);
        }
        if next == active {
            // partition settled but the linear solve left a residual
            if res >= last {
                return Err(Error::NoConvergence {
                    iterations: outer,
                    residual: res,
                });
            }
        }
        last = res;
        active = next;
    }
    Err(Error::NoConvergence {
        iterations: max_outer,
        residual: complementarity_residual(a, b, phi, x),
    })
}

/// Primal-dual active set method with preconditioned GMRES inner solves.
pub fn solve_obstacle_activeset(
    p: &ObstacleProblem,
    params: &ObstacleParams,
) -> Result<LcpSolution> {
    let lcp = Lcp::build(p, params);
    let mut x: Vec<f64> = lcp.phi.iter().map(|v| v.max(0.0)).collect();
    let max_outer = params.max_iter.min(lcp.a.rows() + 2);
    let it = pdas(&lcp.a, &lcp.b, &lcp.phi, &mut x, params.tol_lcp, max_outer)?;
    Ok(lcp.finish(p, &x, it, Solver::ActiveSet, params))
}

#[derive(Clone, Copy, Debug)]
pub struct PerronParams {
    /// Stop when a full sweep lowers no value by more than this.
    pub tol: f64,
    /// Complementarity tolerance of the local solves.
    pub tol_lcp: f64,
    /// Slack allowed when checking that the initial guess is a supersolution.
    pub tol_op: f64,
    pub max_sweeps: usize,
    /// Lower bound on the ball radius, in grid spacings.
    pub min_radius_cells: f64,
    pub stencil: OperatorOptions,
}

impl Default for PerronParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            tol_lcp: 1e-8,
            tol_op: 1e-8,
            max_sweeps: 5000,
            min_radius_cells: 6.0,
            stencil: OperatorOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerronResult {
    pub v: ScalarField,
    pub sweeps: usize,
    /// Largest decrease in the final sweep.
    pub last_change: f64,
    /// Largest increase seen over all sweeps (0 up to rounding).
    pub max_increase: f64,
}

/// A starting point for [`perron_dropping`]: `max(φ, 0) + Mψ` with
/// `−L_hψ = 1`, `ψ = 0` on `∂Ω` and `M = 1 + max L_h max(φ, 0)`, so that
/// `L_h v0 ≤ −1` at every interior node.
pub fn default_supersolution(p: &ObstacleProblem, stencil: OperatorOptions) -> Result<ScalarField> {
    let g = p.grid().clone();
    let op = DiscreteOperator::assemble(&p.w, stencil);
    let (a, _) = op.negated_system(&vec![0.0; g.all_arms().len()]);
    let mut psi = vec![0.0; op.rows()];
    sparse::solve(&a, &vec![1.0; op.rows()], &mut psi, 1e-13)?;
    let mut vals = vec![0.0; g.len()];
    for &i in &op.nodes {
        vals[i] = p.phi.value(i).max(0.0);
    }
    let lift = op.apply(&ScalarField::from_interior(&g, &vals, 0.0));
    let m = lift.iter().fold(0.0, |m: f64, v| m.max(*v)) + 1.0;
    for (r, &i) in op.nodes.iter().enumerate() {
        vals[i] += m * psi[r];
    }
    Ok(ScalarField::from_interior(&g, &vals, 0.0))
}

/// Perron's method by dropping: starting from a discrete supersolution
/// `v0 ≥ φ`, repeatedly replace `v` on a ball by the solution of the local
/// obstacle problem with boundary data `v`.
///
/// Balls are centred on a fixed sub-lattice of `{v > φ}` in lexicographic
/// order, then on any node of `{v > φ}` that no ball reached. The radius is
/// `min(dist to contact set, dist to ∂Ω)/2`, but never less than
/// `min_radius_cells·h`. The local problem keeps `φ` as a
/// constraint, so a ball may touch the contact set; the glued function is
/// again a supersolution above `φ`, and `min(v, V)` is kept so iterates can
/// only decrease.
pub fn perron_dropping(
    p: &ObstacleProblem,
    v0: &ScalarField,
    params: &PerronParams,
) -> Result<PerronResult> {
    let g = p.grid().clone();
    if !g.same_lattice(v0.grid()) {
        return Err(Error::InvalidInput(
            "initial guess lives on another grid".into(),
        ));
    }
    let op = DiscreteOperator::assemble(&p.w, params.stencil);
    let zeros = vec![0.0; g.all_arms().len()];
    let (a, b) = op.negated_system(&zeros);
    let n = a.rows();
    let phi: Vec<f64> = op.nodes.iter().map(|&i| p.phi.value(i)).collect();
    let mut x: Vec<f64> = op.nodes.iter().map(|&i| v0.value(i)).collect();

    // supersolution check
    if let Some(a) = v0.arm_values().iter().find(|v| abs(**v) > params.tol_op) {
        return Err(Error::InvalidInitialGuess(format!(
            "boundary value {a} is not zero"
        )));
    }
    for r in 0..n {
        if !(x[r] >= phi[r] - params.tol_op) {
            return Err(Error::InvalidInitialGuess(format!(
                "v0 < φ at node {}",
                op.nodes[r]
            )));
        }
    }
    let mut ax = vec![0.0; n];
    a.matvec(&x, &mut ax);
    for r in 0..n {
        if ax[r] - b[r] < -params.tol_op {
            return Err(Error::InvalidInitialGuess(format!(
                "L_h v0 = {:e} > 0 at node {}",
                b[r] - ax[r],
                op.nodes[r]
            )));
        }
    }

    let h = g.spacing();
    let rmin = params.min_radius_cells * h;
    // centres one minimum radius apart still cover every node
    let stride = (floor(params.min_radius_cells / core::f64::consts::SQRT_2) as usize).max(1);
    let bdist: Vec<f64> = op.nodes.iter().map(|&i| -g.level(i)).collect();
    let centers: Vec<usize> = (0..n)
        .filter(|&r| {
            let (i, j) = g.coords(op.nodes[r]);
            i % stride == 0 && (g.dim() == Dim::One || j % stride == 0)
        })
        .collect();
    let positions: Vec<Vec2> = op.nodes.iter().map(|&i| g.pos(i)).collect();

    let mut in_ball = vec![usize::MAX; n];
    let mut sweeps = 0;
    let mut last_change = f64::INFINITY;
    let mut max_increase: f64 = 0.0;
    while sweeps < params.max_sweeps {
        sweeps += 1;
        let mut change: f64 = 0.0;
        let contact: Vec<Vec2> = (0..n)
            .filter(|&r| x[r] <= phi[r])
            .map(|r| positions[r])
            .collect();
        // lattice centres first, then any node above φ that no ball reached
        let mut covered = vec![false; n];
        let (mut next, mut scan) = (0, 0);
        loop {
            let c = if next < centers.len() {
                next += 1;
                centers[next - 1]
            } else {
                while scan < n && (covered[scan] || x[scan] <= phi[scan]) {
                    scan += 1;
                }
                if scan == n {
                    break;
                }
                scan
            };
            if x[c] <= phi[c] {
                continue;
            }
            let pc = positions[c];
            let dc = contact
                .iter()
                .map(|q| q.dist(pc))
                .fold(f64::INFINITY, f64::min);
            let radius = (0.5 * dc.min(bdist[c])).max(rmin);
            let rows: Vec<usize> = (0..n)
                .filter(|&r| positions[r].dist(pc) <= radius)
                .collect();
            for (k, &r) in rows.iter().enumerate() {
                in_ball[r] = k;
            }
            // local system with Dirichlet data from the current v
            let mut sub = CsrMatrix::with_capacity(rows.len(), rows.len() * 9);
            let mut rhs = vec![0.0; rows.len()];
            let mut entries = Vec::with_capacity(32);
            for (k, &r) in rows.iter().enumerate() {
                let (cc, vv) = a.row(r);
                rhs[k] = b[r];
                for q in 0..cc.len() {
                    let m = in_ball[cc[q]];
                    if m == usize::MAX {
                        rhs[k] -= vv[q] * x[cc[q]];
                    } else {
                        entries.push((m, vv[q]));
                    }
                }
                sub.push_row(&mut entries);
            }
            let lphi: Vec<f64> = rows.iter().map(|&r| phi[r]).collect();
            let mut y: Vec<f64> = rows.iter().map(|&r| x[r]).collect();
            pdas(&sub, &rhs, &lphi, &mut y, params.tol_lcp, rows.len() + 2)?;
            for (k, &r) in rows.iter().enumerate() {
                in_ball[r] = usize::MAX;
                covered[r] = true;
                let new = y[k].max(phi[r]);
                if new > x[r] {
                    max_increase = max_increase.max(new - x[r]);
                } else {
                    change = change.max(x[r] - new);
                    x[r] = new;
                }
            }
        }
        last_change = change;
        if change <= params.tol {
            break;
        }
    }
    if last_change > params.tol {
        return Err(Error::NoConvergence {
            iterations: sweeps,
            residual: last_change,
        });
    }
    let mut vals = vec![0.0; g.len()];
    for (r, &i) in op.nodes.iter().enumerate() {
        vals[i] = x[r];
    }
    Ok(PerronResult {
        v: ScalarField::from_interior(&g, &vals, 0.0),
        sweeps,
        last_change,
        max_increase,
    })
}

/// Free boundary `∂{u > φ} ∩ Ω` as contour pieces.
#[derive(Clone, Debug)]
pub struct FreeBoundary {
    pub pieces: Vec<Polyline>,
}

impl FreeBoundary {
    /// All points, piece by piece.
    pub fn points(&self) -> Vec<Vec2> {
        self.pieces
            .iter()
            .flat_map(|p| p.points.iter().copied())
            .collect()
    }
}

/// Zero contour of `u − φ − tol_contact` over interior nodes.
///
/// Near the free boundary `u − φ` grows quadratically, so each crossing is
/// placed where `√(u − φ)`, extrapolated linearly from the two nearest
/// non-contact nodes on that line, vanishes.
pub fn free_boundary(sol: &LcpSolution) -> Result<FreeBoundary> {
    if sol.contact_count() == 0 {
        return Err(Error::EmptyFreeBoundary);
    }
    let g = sol.u.grid();
    let gap: Vec<f64> = (0..g.len())
        .map(|i| {
            if g.is_interior(i) {
                sol.u.value(i) - sol.phi.value(i) - sol.tol_contact
            } else {
                f64::NAN
            }
        })
        .collect();
    let refine = |inside: Vec2, outside: Vec2, guess: Vec2| -> Vec2 {
        let (Some(_), Some(o)) = (g.nearest(inside), g.nearest(outside)) else {
            return guess;
        };
        let step = outside - inside;
        let beyond = g
            .nearest(outside + step)
            .filter(|&m| gap.get(m).is_some_and(|v| *v > 0.0));
        let Some(m) = beyond else {
            return guess;
        };
        let (s1, s2) = (sqrt(gap[o].max(0.0)), sqrt(gap[m]));
        if !(s2 > s1) {
            return guess;
        }
        // root of the line through (1, s1) and (2, s2), in units of `step`
        let t = (1.0 - s1 / (s2 - s1)).clamp(0.0, 1.0);
        inside + step.scale(t)
    };
    Ok(FreeBoundary {
        pieces: marching_squares(g, &gap, refine),
    })
}

/// Outcome of the discrete comparison check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub holds: bool,
    /// Node with the largest `u − v` when the check fails.
    pub witness: Option<usize>,
    /// `max(u − v)` over interior nodes.
    pub max_excess: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ComparisonTol {
    /// Slack on `L_h u ≥ 0` and `L_h v ≤ 0`.
    pub op: f64,
    /// Slack on `u ≤ v`.
    pub value: f64,
}

impl Default for ComparisonTol {
    fn default() -> Self {
        Self {
            op: 1e-8,
            value: 1e-10,
        }
    }
}

/// Discrete comparison principle: for a subsolution `u` and supersolution
/// `v` of `L_h` with `u ≤ v` on `∂Ω`, checks `u ≤ v` at every interior node.
pub fn check_comparison(
    u: &ScalarField,
    v: &ScalarField,
    w: &TensorField,
    tol: ComparisonTol,
) -> Result<Comparison> {
    let g = w.grid();
    if !g.same_lattice(u.grid()) || !g.same_lattice(v.grid()) {
        return Err(Error::InvalidInput("u, v and W must share a grid".into()));
    }
    for (k, (a, b)) in u.arm_values().iter().zip(v.arm_values()).enumerate() {
        if !(a <= &(b + tol.value)) {
            return Err(Error::PreconditionViolation(format!(
                "u > v on the boundary at crossing {k}"
            )));
        }
    }
    let op = DiscreteOperator::assemble(w, OperatorOptions::default());
    let lu = op.apply(u);
    let lv = op.apply(v);
    for r in 0..op.rows() {
        if !(lu[r] >= -tol.op) {
            return Err(Error::PreconditionViolation(format!(
                "u is not a subsolution at node {}: L_h u = {:e}",
                op.nodes[r], lu[r]
            )));
        }
        if !(lv[r] <= tol.op) {
            return Err(Error::PreconditionViolation(format!(
                "v is not a supersolution at node {}: L_h v = {:e}",
                op.nodes[r], lv[r]
            )));
        }
    }
    let mut worst = (f64::NEG_INFINITY, None);
    for &i in &op.nodes {
        let d = u.value(i) - v.value(i);
        if d > worst.0 {
            worst = (d, Some(i));
        }
    }
    let holds = worst.0 <= tol.value;
    Ok(Comparison {
        holds,
        witness: if holds { None } else { worst.1 },
        max_excess: worst.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexDomain;
    use crate::math::Sym2;

    fn interval_problem(n: usize, phi: impl Fn(f64) -> f64) -> ObstacleProblem {
        let d = ConvexDomain::interval(-1.0, 1.0).unwrap();
        let g = Arc::new(Grid::covering(&d, 2.0 / n as f64).unwrap());
        let w = TensorField::constant(&g, Sym2::IDENTITY);
        ObstacleProblem::new(w, ScalarField::from_fn(&g, |p| phi(p.x))).unwrap()
    }

    #[test]
    fn negative_obstacle_gives_zero() {
        let p = interval_problem(32, |_| -1.0);
        assert!(p
            .guards()
            .contains(&ObstacleWarning::ObstacleNowherePositive));
        for s in [
            solve_obstacle_psor(&p, &ObstacleParams::default()).unwrap(),
            solve_obstacle_activeset(&p, &ObstacleParams::default()).unwrap(),
        ] {
            assert!(s.u.max_abs() < 1e-12);
            assert_eq!(s.contact_count(), 0);
            assert!(matches!(free_boundary(&s), Err(Error::EmptyFreeBoundary)));
        }
    }

    #[test]
    fn psor_and_active_set_agree_in_1d() {
        let p = interval_problem(64, |x| 0.5 - x * x);
        let params = ObstacleParams::default();
        let a = solve_obstacle_psor(&p, &params).unwrap();
        let b = solve_obstacle_activeset(&p, &params).unwrap();
        assert!(a.residual <= 1e-8 && b.residual <= 1e-8);
        assert!(a.u.max_abs_diff(&b.u) <= 1e-7);
        assert_eq!(a.contact, b.contact);
    }

    #[test]
    fn solution_is_its_own_dropping() {
        let p = interval_problem(64, |x| 0.5 - x * x);
        let s = solve_obstacle_activeset(&p, &ObstacleParams::default()).unwrap();
        let r = perron_dropping(&p, &s.u, &PerronParams::default()).unwrap();
        assert_eq!(r.sweeps, 1);
        assert!(r.v.max_abs_diff(&s.u) < 1e-9);
    }

    #[test]
    fn subsolution_below_supersolution() {
        let g = Arc::new(Grid::covering(&ConvexDomain::unit_ball(), 1.0 / 16.0).unwrap());
        let w = TensorField::constant(&g, Sym2::IDENTITY);
        let u = ScalarField::from_fn(&g, |p| 0.5 * (p.norm2() - 1.0));
        let v = ScalarField::zeros(&g);
        let c = check_comparison(&u, &v, &w, ComparisonTol::default()).unwrap();
        assert!(c.holds);
        assert!(matches!(
            check_comparison(&v, &u, &w, ComparisonTol::default()),
            Err(Error::PreconditionViolation(_))
        ));
    }
}
