//! Sections `S_h(x₀) = {w ≤ w(x₀) + ∇w(x₀)·(x − x₀) + h}` of a sampled
//! convex function, and the geometric probes built on them.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::contour::marching_squares;
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LinearFit};
use crate::geometry::{
    convex_hull, mvee_with_stats, ConvexDomain, Dim, Grid, Interpolation, ScalarField,
};
use crate::linma::{hessian_at, DiscreteOperator, OperatorOptions, TensorField};
use crate::math::{abs, ln, powf, sqrt, Mat2, Sym2, Vec2};
use crate::sparse;

#[derive(Clone, Debug)]
pub struct Section {
    pub center: Vec2,
    pub height: f64,
    /// `w(x₀)` and `∇w(x₀)` of the tangent plane.
    pub value: f64,
    pub gradient: Vec2,
    /// Interior grid nodes in the section, ascending.
    pub nodes: Vec<usize>,
    /// Boundary points: a closed counterclockwise-or-clockwise loop in 2D,
    /// the two endpoints in 1D.
    pub boundary: Vec<Vec2>,
    pub dim: Dim,
}

impl Section {
    pub fn contains_node(&self, idx: usize) -> bool {
        self.nodes.binary_search(&idx).is_ok()
    }

    /// Smallest distance from the centre to the boundary points.
    pub fn inradius(&self) -> f64 {
        self.boundary
            .iter()
            .map(|p| p.dist(self.center))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance from the centre to the boundary points.
    pub fn circumradius(&self) -> f64 {
        self.boundary
            .iter()
            .map(|p| p.dist(self.center))
            .fold(0.0, f64::max)
    }

    /// Convex hull of the boundary, counterclockwise (the two endpoints in 1D).
    pub fn hull(&self) -> Vec<Vec2> {
        match self.dim {
            Dim::One => endpoints(&self.boundary).to_vec(),
            Dim::Two => convex_hull(&self.boundary),
        }
    }

    /// Centroid of the region bounded by the hull.
    pub fn center_of_mass(&self) -> Vec2 {
        let hull = self.hull();
        if self.dim == Dim::One {
            return (hull[0] + hull[1]).scale(0.5);
        }
        let mut a = 0.0;
        let mut c = Vec2::ZERO;
        for i in 0..hull.len() {
            let (p, q) = (hull[i], hull[(i + 1) % hull.len()]);
            let cr = p.cross(q);
            a += cr;
            c = c + (p + q).scale(cr);
        }
        c.scale(1.0 / (3.0 * a))
    }
}

fn endpoints(points: &[Vec2]) -> [Vec2; 2] {
    let lo =
        points.iter().copied().fold(
            Vec2::new(f64::INFINITY, 0.0),
            |a, b| if b.x < a.x { b } else { a },
        );
    let hi = points
        .iter()
        .copied()
        .fold(Vec2::new(f64::NEG_INFINITY, 0.0), |a, b| {
            if b.x > a.x {
                b
            } else {
                a
            }
        });
    [lo, hi]
}

/// Value and gradient at `x₀`: centred differences when `x₀` is an interior
/// node, otherwise the cubic interpolant.
pub fn tangent_at(w: &ScalarField, x0: Vec2) -> Result<(f64, Vec2)> {
    let g = w.grid();
    if let Some(i) = g.nearest(x0) {
        if g.is_interior(i) && g.pos(i).dist(x0) <= 1e-12 * g.spacing() {
            let grad = w.node_gradient(i).expect("interior node");
            return Ok((w.value(i), grad));
        }
    }
    match (
        w.sample(x0, Interpolation::Cubic),
        w.sample_gradient(x0, Interpolation::Cubic),
    ) {
        (Some(v), Some(d)) => Ok((v, d)),
        _ => Err(Error::InvalidInput(format!(
            "point ({}, {}) is outside the data",
            x0.x, x0.y
        ))),
    }
}

pub fn extract_section(w: &ScalarField, x0: Vec2, h: f64) -> Result<Section> {
    let (v, d) = tangent_at(w, x0)?;
    section_with_plane(w, x0, v, d, h)
}

/// Section below the plane `value + gradient·(x − x₀) + h`.
pub fn section_with_plane(
    w: &ScalarField,
    x0: Vec2,
    value: f64,
    gradient: Vec2,
    h: f64,
) -> Result<Section> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("section height {h}")));
    }
    let g = w.grid();
    let shifted = |p: Vec2, wv: f64| wv - value - gradient.dot(p - x0) - h;
    let s: Vec<f64> = (0..g.len())
        .map(|i| {
            if g.has_value(i) {
                shifted(g.pos(i), w.value(i))
            } else {
                f64::NAN
            }
        })
        .collect();
    let nodes: Vec<usize> = g.interior_nodes().filter(|&i| s[i] <= 0.0).collect();
    if nodes.is_empty() {
        return Err(Error::InsufficientData(format!(
            "section of height {h:e} holds no grid node"
        )));
    }
    let ring = match g.dim() {
        Dim::One => 2,
        Dim::Two => 8,
    };
    for &i in &nodes {
        for dir in 0..ring {
            match g.neighbor(i, dir) {
                Some(m) if g.is_interior(m) => {}
                Some(m) if s[m] > 0.0 => {}
                _ => return Err(Error::SectionEscapes { height: h }),
            }
        }
    }
    // crossings refined on the cubic interpolant
    let f = |p: Vec2| w.sample(p, Interpolation::Cubic).map(|wv| shifted(p, wv));
    let refine = |inside: Vec2, outside: Vec2, guess: Vec2| -> Vec2 {
        match (f(inside), f(outside)) {
            (Some(a), Some(b)) if a <= 0.0 && b > 0.0 => {
                root_on_segment(&f, inside, outside, a, b).unwrap_or(guess)
            }
            _ => guess,
        }
    };
    let pieces = marching_squares(g, &s, refine);
    let boundary = match g.dim() {
        Dim::One => {
            let pts: Vec<Vec2> = pieces
                .iter()
                .flat_map(|p| p.points.iter().copied())
                .collect();
            if pts.len() != 2 {
                return Err(Error::DegenerateInput(format!(
                    "1D section has {} endpoints",
                    pts.len()
                )));
            }
            pts
        }
        Dim::Two => {
            let mut closed: Vec<_> = pieces
                .into_iter()
                .filter(|p| p.closed && p.points.len() >= 3)
                .collect();
            if closed.len() > 1 {
                closed.retain(|p| winds_around(&p.points, x0));
            }
            match closed.pop() {
                Some(p) if closed.is_empty() => p.points,
                _ => {
                    return Err(Error::DegenerateInput(
                        "section boundary is not a single closed curve".into(),
                    ))
                }
            }
        }
    };
    Ok(Section {
        center: x0,
        height: h,
        value,
        gradient,
        nodes,
        boundary,
        dim: g.dim(),
    })
}

/// Illinois false position for a sign change of `f` on `[a, b]`.
fn root_on_segment(
    f: &dyn Fn(Vec2) -> Option<f64>,
    a: Vec2,
    b: Vec2,
    fa: f64,
    fb: f64,
) -> Option<Vec2> {
    let (mut t0, mut t1, mut f0, mut f1) = (0.0, 1.0, fa, fb);
    let mut side = 0;
    let mut t = 0.0;
    for _ in 0..80 {
        t = (t0 * f1 - t1 * f0) / (f1 - f0);
        let ft = f(a + (b - a).scale(t))?;
        if ft <= 0.0 {
            t0 = t;
            f0 = ft;
            if side == -1 {
                f1 *= 0.5;
            }
            side = -1;
        } else {
            t1 = t;
            f1 = ft;
            if side == 1 {
                f0 *= 0.5;
            }
            side = 1;
        }
        if t1 - t0 < 1e-15 || ft == 0.0 {
            break;
        }
    }
    Some(a + (b - a).scale(t))
}

fn winds_around(poly: &[Vec2], p: Vec2) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Minkowski gauge of the convex hull `hull` (counterclockwise, or the two
/// endpoints in 1D) about `c`; `≤ 1` exactly on the hull.
pub fn hull_gauge(hull: &[Vec2], c: Vec2, p: Vec2, dim: Dim) -> f64 {
    let d = p - c;
    match dim {
        Dim::One => {
            let [lo, hi] = endpoints(hull);
            if d.x >= 0.0 {
                d.x / (hi.x - c.x)
            } else {
                d.x / (lo.x - c.x)
            }
        }
        Dim::Two => {
            let n = hull.len();
            let mut best: f64 = 0.0;
            for i in 0..n {
                let a = hull[i];
                let e = hull[(i + 1) % n] - a;
                let nrm = Vec2::new(e.y, -e.x);
                let den = nrm.dot(a - c);
                if den > 0.0 {
                    best = best.max(nrm.dot(d) / den);
                }
            }
            best
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionRadii {
    pub height: f64,
    pub inradius: f64,
    pub circumradius: f64,
}

#[derive(Clone, Debug)]
pub struct SectionProbeResult {
    pub records: Vec<SectionRadii>,
    /// Log-log fit of the circumradius; its slope is `σ`.
    pub outer_fit: LinearFit,
    /// Log-log fit of the inradius.
    pub inner_fit: LinearFit,
    pub sigma: f64,
    /// Largest `C₁` with `B_{C₁h} ⊂ S_h` at every tested height.
    pub c1: f64,
    /// Smallest `C₂` with `S_h ⊂ B_{C₂h^σ}` at every tested height.
    pub c2: f64,
}

/// Radii of `S_h(x₀)` about `x₀` for each height, with the constants of
/// `B_{C₁h}(x₀) ⊂ S_h(x₀) ⊂ B_{C₂h^σ}(x₀)`.
pub fn section_ball_probe(
    w: &ScalarField,
    x0: Vec2,
    heights: &[f64],
) -> Result<SectionProbeResult> {
    let mut records = Vec::with_capacity(heights.len());
    for &h in heights {
        let s = extract_section(w, x0, h)?;
        records.push(SectionRadii {
            height: h,
            inradius: s.inradius(),
            circumradius: s.circumradius(),
        });
    }
    let hs: Vec<f64> = records.iter().map(|r| r.height).collect();
    let outs: Vec<f64> = records.iter().map(|r| r.circumradius).collect();
    let ins: Vec<f64> = records.iter().map(|r| r.inradius).collect();
    let outer_fit = loglog_fit(&hs, &outs)?;
    let inner_fit = loglog_fit(&hs, &ins)?;
    let sigma = outer_fit.slope;
    let c1 = records
        .iter()
        .map(|r| r.inradius / r.height)
        .fold(f64::INFINITY, f64::min);
    let c2 = records
        .iter()
        .map(|r| r.circumradius / powf(r.height, sigma))
        .fold(0.0, f64::max);
    Ok(SectionProbeResult {
        records,
        outer_fit,
        inner_fit,
        sigma,
        c1,
        c2,
    })
}

/// Half-section inclusions about the centre of mass `x*` of `S_h`:
/// `½S_h ⊂ S_{h/2} ⊂ βS_h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Engulfing {
    /// Gauge of `½S_h` with respect to `S_{h/2}`; `≤ 1` when the first
    /// inclusion holds.
    pub half_gauge: f64,
    /// Smallest `β` with `S_{h/2} ⊂ βS_h`.
    pub beta: f64,
}

pub fn engulfing(w: &ScalarField, x0: Vec2, h: f64) -> Result<Engulfing> {
    let big = extract_section(w, x0, h)?;
    let small = extract_section(w, x0, 0.5 * h)?;
    let c = big.center_of_mass();
    let big_hull = big.hull();
    let small_hull = small.hull();
    let half_gauge = big_hull
        .iter()
        .map(|&p| hull_gauge(&small_hull, c, c + (p - c).scale(0.5), big.dim))
        .fold(0.0, f64::max);
    let beta = small_hull
        .iter()
        .map(|&p| hull_gauge(&big_hull, c, p, big.dim))
        .fold(0.0, f64::max);
    Ok(Engulfing { half_gauge, beta })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarnackQuotient {
    pub quotient: f64,
    pub sup: f64,
    pub inf: f64,
    /// Unknowns of the solve on `S_{2h}`.
    pub unknowns: usize,
}

/// Solves `L_h v = 0` on `S_{2h}(x₀)` with boundary data `data` and returns
/// `sup v / inf v` over the nodes of `S_h(x₀)`.
pub fn harnack_quotient(
    wt: &TensorField,
    w: &ScalarField,
    x0: Vec2,
    h: f64,
    data: &dyn Fn(Vec2) -> f64,
) -> Result<HarnackQuotient> {
    let g = w.grid();
    if !wt.grid().same_lattice(g) {
        return Err(Error::InvalidInput(
            "W and w live on different grids".into(),
        ));
    }
    let outer = extract_section(w, x0, 2.0 * h)?;
    let inner = section_with_plane(w, x0, outer.value, outer.gradient, h)?;
    let levels: Vec<f64> = (0..g.len())
        .map(|i| {
            if g.has_value(i) {
                w.value(i) - outer.value - outer.gradient.dot(g.pos(i) - x0) - 2.0 * h
            } else {
                f64::NAN
            }
        })
        .collect();
    let sg = Arc::new(g.relevel(levels)?);
    let tensors = TensorField::new(sg.clone(), wt.values().to_vec())?;
    let op = DiscreteOperator::assemble(&tensors, OperatorOptions::default());
    let arm_values: Vec<f64> = sg.all_arms().iter().map(|a| data(a.point)).collect();
    if let Some(v) = arm_values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "boundary datum {v} is not positive"
        )));
    }
    let (a, b) = op.negated_system(&arm_values);
    let mut x = vec![0.0; op.rows()];
    sparse::solve(&a, &b, &mut x, 1e-12)?;
    let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
    for &i in &inner.nodes {
        let r = op.row_of[i];
        if r == usize::MAX {
            continue;
        }
        sup = sup.max(x[r]);
        inf = inf.min(x[r]);
    }
    if !(inf > 0.0) {
        return Err(Error::NonMonotoneStencil(format!(
            "discrete solution with positive data reaches {inf:e}"
        )));
    }
    Ok(HarnackQuotient {
        quotient: sup / inf,
        sup,
        inf,
        unknowns: op.rows(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct IterationParams {
    /// Base height `h₀ ∈ (0, 1)`.
    pub h0: f64,
    /// Exponent parameter, in `(0, 1/5]`.
    pub theta: f64,
    /// Determinant pinch `ε`: `1 − ε ≤ det D²w/det D²w(x₀) ≤ 1 + ε`.
    pub eps: f64,
    pub k_max: usize,
    /// Constant of the admissibility condition `√ε ≤ θ·h₀·ln(1/h₀)/(2C)`.
    pub c_cfg: f64,
    /// Picture resolution: grid cells per `√(2h₀)`.
    pub picture_cells: usize,
    /// Allowance on top of `ε` when checking the pinch on the grid.
    pub pinch_slack: f64,
    /// Minimum number of original grid cells across a section.
    pub min_cells: f64,
}

impl Default for IterationParams {
    fn default() -> Self {
        Self {
            h0: 0.125,
            theta: 0.2,
            eps: 0.0,
            k_max: 4,
            c_cfg: 1.0,
            picture_cells: 40,
            pinch_slack: 1e-6,
            min_cells: 10.0,
        }
    }
}

impl IterationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0 && self.h0 < 1.0) {
            return Err(Error::InvalidInput(format!(
                "h0 = {} outside (0, 1)",
                self.h0
            )));
        }
        if !(self.theta > 0.0 && self.theta <= 0.2) {
            return Err(Error::InvalidInput(format!(
                "theta = {} outside (0, 1/5]",
                self.theta
            )));
        }
        if !(self.eps >= 0.0) || !(self.c_cfg > 0.0) {
            return Err(Error::InvalidInput(
                "eps must be nonnegative and C positive".into(),
            ));
        }
        let bound = self.theta * self.h0 * ln(1.0 / self.h0) / (2.0 * self.c_cfg);
        if sqrt(self.eps) > bound {
            return Err(Error::InvalidInput(format!(
                "sqrt(eps) = {:e} exceeds theta*h0*ln(1/h0)/(2C) = {bound:e}",
                sqrt(self.eps)
            )));
        }
        if self.k_max == 0 || self.picture_cells < 4 {
            return Err(Error::InvalidInput(
                "k_max and picture_cells must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationStep {
    pub k: usize,
    /// Symmetric positive definite factor of the accumulated map, `det = 1`.
    pub a: Sym2,
    pub delta: f64,
    pub r_in: f64,
    pub r_out: f64,
    /// Centre of the enclosing ellipse in normalized coordinates.
    pub offset: Vec2,
    /// Original grid cells across the smallest diameter of the section.
    pub cells_across: f64,
}

#[derive(Clone, Debug)]
pub struct NormalizationRun {
    pub steps: Vec<NormalizationStep>,
    /// Why the run ended before `k_max`, if it did.
    pub stopped: Option<alloc::string::String>,
    /// `det_h D²w` at the node nearest `x₀`.
    pub det0: f64,
    /// `max |det_h D²w/det0 − 1|` over the first section.
    pub pinch: f64,
}

/// Iterated normalization of the sections `S_{h₀^k}(x₀)`.
///
/// `w` is first divided by `det0^{1/n}` so that its Hessian determinant is 1
/// at `x₀`. Step `k` looks at the picture
/// `η_{k−1}(y) = h₀^{1−k}(w − ℓ)(x₀ + h₀^{(k−1)/2}B_{k−1}⁻¹y)`, whose section
/// at height `h₀` is `h₀^{(1−k)/2}B_{k−1}(S_{h₀^k} − x₀)`. The MVEE of that
/// section gives a symmetric `A` with `det A = 1`; `B_k = A·B_{k−1}`, and the
/// radii of `h₀^{−1/2}A·S` about the origin give
/// `δ_k = max(|r_out/√2 − 1|, |1 − r_in/√2|)`.
///
/// Pictures are resampled from `w` itself through the composed map (cubic
/// interpolation), never from the previous picture.
pub fn iterate_normalization(
    w: &ScalarField,
    x0: Vec2,
    params: &IterationParams,
) -> Result<NormalizationRun> {
    params.validate()?;
    let g = w.grid();
    let dim = g.dim();
    let n = dim.nf();
    let hg = g.spacing();
    let (v0, grad) = tangent_at(w, x0)?;
    let near = g
        .nearest(x0)
        .filter(|&i| g.is_interior(i))
        .ok_or_else(|| Error::InvalidInput("x0 is not an interior point".into()))?;
    let det_at = |i: usize| {
        let m = hessian_at(w, i);
        match dim {
            Dim::One => m.a11,
            Dim::Two => m.det(),
        }
    };
    let det0 = det_at(near);
    if !(det0 > 0.0) {
        return Err(Error::DegenerateInput(format!("det D²w(x0) = {det0:e}")));
    }
    let scale = powf(det0, -1.0 / n);
    let h0 = params.h0;

    let first = section_with_plane(w, x0, v0, grad, h0 / scale)?;
    let pinch = first
        .nodes
        .iter()
        .map(|&i| abs(det_at(i) / det0 - 1.0))
        .fold(0.0, f64::max);
    if pinch > params.eps + params.pinch_slack {
        return Err(Error::PreconditionViolation(format!(
            "det D²w varies by {pinch:e} > eps = {:e} on the first section",
            params.eps
        )));
    }

    let mut steps = Vec::new();
    let mut stopped = None;
    let mut b = Mat2::IDENTITY;
    for k in 1..=params.k_max {
        let shrink = powf(h0, 0.5 * (k - 1) as f64);
        let binv = b
            .inverse()
            .ok_or_else(|| Error::DegenerateInput("accumulated map is singular".into()))?;
        // boundary of the section in picture coordinates
        let ys: Vec<Vec2> = if k == 1 {
            first.boundary.iter().map(|&p| p - x0).collect()
        } else {
            let r = 3.0 * sqrt(h0);
            let hp = sqrt(2.0 * h0) / params.picture_cells as f64;
            let dom = match dim {
                Dim::One => ConvexDomain::interval(-r, r)?,
                Dim::Two => ConvexDomain::ball(Vec2::ZERO, r)?,
            };
            let pg = Arc::new(Grid::covering(&dom, hp)?);
            let to_x = |y: Vec2| x0 + binv.apply(y).scale(shrink);
            let eta = |y: Vec2| {
                let x = to_x(y);
                match w.sample(x, Interpolation::Cubic) {
                    Some(wv) => scale * (wv - v0 - grad.dot(x - x0)) / (shrink * shrink),
                    None => f64::NAN,
                }
            };
            let pic = ScalarField::from_fn(&pg, eta);
            match section_with_plane(&pic, Vec2::ZERO, 0.0, Vec2::ZERO, h0) {
                Ok(s) => s.boundary,
                Err(Error::SectionEscapes { .. }) => {
                    stopped = Some(format!("section {k} leaves the picture"));
                    break;
                }
                Err(e) => return Err(e),
            }
        };
        // resolution on the original grid
        let rx = ys
            .iter()
            .map(|&y| binv.apply(y).scale(shrink).norm())
            .fold(f64::INFINITY, f64::min);
        let cells_across = 2.0 * rx / hg;
        if cells_across < params.min_cells {
            stopped = Some(format!(
                "section {k} spans {cells_across:.1} grid cells, below {}",
                params.min_cells
            ));
            break;
        }
        let (e, _) = mvee_with_stats(&ys, dim, 1e-12)?;
        let a = match dim {
            Dim::One => Mat2::IDENTITY,
            Dim::Two => {
                let q = e.shape;
                q.sqrt().scale(powf(q.det(), -0.25)).to_mat()
            }
        };
        let zs: Vec<Vec2> = ys
            .iter()
            .map(|&y| a.apply(y).scale(1.0 / sqrt(h0)))
            .collect();
        let r_in = zs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let r_out = zs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let root2 = core::f64::consts::SQRT_2;
        let delta = abs(r_out / root2 - 1.0).max(abs(1.0 - r_in / root2));
        b = a.mul(&b);
        let a_spd = match dim {
            Dim::One => Sym2::IDENTITY,
            Dim::Two => b.polar_spd(),
        };
        steps.push(NormalizationStep {
            k,
            a: a_spd,
            delta,
            r_in,
            r_out,
            offset: a.apply(e.center).scale(1.0 / sqrt(h0)),
            cells_across,
        });
    }
    Ok(NormalizationRun {
        steps,
        stopped,
        det0,
        pinch,
    })
}

/// Least-squares fit of `δ_k = C(δ_{k−1}√h₀ + √ε/h₀)` (with `δ₀ = 0`)
/// through the origin, and the closed-form profile
/// `(C√h₀)^k + 2C√ε/h₀` at the fitted `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionFit {
    pub c: f64,
    pub profile: Vec<f64>,
    /// Every measured `δ_k` is at most the profile.
    pub dominated: bool,
    /// RMS relative misfit of the recursion.
    pub residual: f64,
}

pub fn fit_recursion(deltas: &[f64], h0: f64, eps: f64) -> Result<RecursionFit> {
    if deltas.is_empty() {
        return Err(Error::InsufficientData("no normalization steps".into()));
    }
    let sh = sqrt(h0);
    let forcing = sqrt(eps) / h0;
    let xs: Vec<f64> = (0..deltas.len())
        .map(|k| if k == 0 { 0.0 } else { deltas[k - 1] } * sh + forcing)
        .collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let c = if sxx > 0.0 {
        xs.iter().zip(deltas).map(|(x, d)| x * d).sum::<f64>() / sxx
    } else {
        0.0
    };
    let profile: Vec<f64> = (1..=deltas.len())
        .map(|k| powf(c * sh, k as f64) + 2.0 * c * forcing)
        .collect();
    let dominated = deltas.iter().zip(&profile).all(|(d, p)| d <= p);
    let residual = sqrt(
        xs.iter()
            .zip(deltas)
            .map(|(x, d)| {
                let r = (c * x - d) / d.max(1e-300);
                r * r
            })
            .sum::<f64>()
            / deltas.len() as f64,
    );
    Ok(RecursionFit {
        c,
        profile,
        dominated,
        residual,
    })
}

/// Constants of `(C_lo h₀^{θk})I ≤ A_k ≤ (C_hi h₀^{−θk/2})I` fitted over the
/// steps: `(C_lo, C_hi)`.
pub fn a_bounds(steps: &[NormalizationStep], h0: f64, theta: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for s in steps {
        let (l1, l2) = s.a.eigen();
        let k = s.k as f64;
        hi = hi.max(l1.max(l2) * powf(h0, 0.5 * theta * k));
        lo = lo.min(l1.min(l2) / powf(h0, theta * k));
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(a: f64, b: f64, h: f64) -> ScalarField {
        let g = Arc::new(Grid::covering(&ConvexDomain::unit_ball(), h).unwrap());
        ScalarField::from_fn(&g, |p| 0.5 * (a * p.x * p.x + b * p.y * p.y))
    }

    #[test]
    fn paraboloid_sections_are_balls() {
        let w = quadratic(1.0, 1.0, 1.0 / 64.0);
        let p = Vec2::new(0.1, -0.05);
        let s = extract_section(&w, p, 0.02).unwrap();
        let r = sqrt(0.04);
        assert!(abs(s.inradius() - r) < 1e-10 && abs(s.circumradius() - r) < 1e-10);
    }

    #[test]
    fn anisotropic_section_axes() {
        let w = quadratic(4.0, 1.0, 1.0 / 64.0);
        let s = extract_section(&w, Vec2::ZERO, 0.08).unwrap();
        assert!(abs(s.inradius() - sqrt(0.04)) < 1e-10);
        assert!(abs(s.circumradius() - sqrt(0.16)) < 1e-3);
    }

    #[test]
    fn escaping_section_is_reported() {
        let w = quadratic(1.0, 1.0, 1.0 / 16.0);
        assert!(matches!(
            extract_section(&w, Vec2::ZERO, 0.6),
            Err(Error::SectionEscapes { .. })
        ));
    }

    #[test]
    fn constant_data_gives_unit_quotient() {
        let w = quadratic(1.0, 1.0, 1.0 / 32.0);
        let wt = TensorField::constant(w.grid(), Sym2::IDENTITY);
        let q = harnack_quotient(&wt, &w, Vec2::ZERO, 0.1, &|_| 1.0).unwrap();
        assert!(abs(q.quotient - 1.0) < 1e-9);
    }

    #[test]
    fn admissibility_is_enforced() {
        let p = IterationParams {
            eps: 0.01,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::InvalidInput(_))));
    }
}
