//! Behaviour of the obstacle solution near the free boundary: rescaling
//! around a free-boundary point, the growth of `u − ℓ` on sections, and the
//! Hölder exponent of `Du`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LinearFit};
use crate::geometry::{
    apply_affine, normalize_points, AffineMap, ConvexDomain, Dim, Grid, Interpolation, ScalarField,
};
use crate::linma::hessian_at;
use crate::math::{abs, cos, powf, sin, Vec2};
use crate::sections::{extract_section, section_with_plane, tangent_at};

/// Guaranteed exponent `α(θ) = (1 − 5θ)/(1 + θ)`, reported beside measurements.
pub fn alpha_of_theta(theta: f64) -> f64 {
    (1.0 - 5.0 * theta) / (1.0 + theta)
}

fn det_h_at(w: &ScalarField, idx: usize) -> f64 {
    let m = hessian_at(w, idx);
    match w.grid().dim() {
        Dim::One => m.a11,
        Dim::Two => m.det(),
    }
}

/// The problem seen through the normalization `T` of `S_h(x₀)`.
#[derive(Clone, Debug)]
pub struct RescaledProblem {
    pub t: AffineMap,
    pub k: f64,
    /// `K(w − ℓ − h)∘T⁻¹`.
    pub w: ScalarField,
    pub u: ScalarField,
    pub phi: ScalarField,
    pub y0: Vec2,
    /// `min (u* − φ*)` over nodes with data.
    pub min_gap: f64,
    /// `max |det_h D²w*(y) − det_h D²w(T⁻¹y)/det_h D²w(x₀)|` over interior
    /// nodes away from the boundary.
    pub det_defect: f64,
    pub det0: f64,
}

/// Rescales `w`, `u`, `φ` around `x₀` on a grid of the given spacing over
/// `T S_h(x₀)`.
pub fn rescale_problem(
    w: &ScalarField,
    u: &ScalarField,
    phi: &ScalarField,
    x0: Vec2,
    h: f64,
    spacing: f64,
) -> Result<RescaledProblem> {
    let g = w.grid();
    if !g.same_lattice(u.grid()) || !g.same_lattice(phi.grid()) {
        return Err(Error::InvalidInput("w, u and φ must share a grid".into()));
    }
    let dim = g.dim();
    let n = dim.nf();
    let sec = extract_section(w, x0, h)?;
    let hull = sec.hull();
    let t = normalize_points(&hull, dim)?;
    let near = g
        .nearest(x0)
        .filter(|&i| g.is_interior(i))
        .ok_or_else(|| Error::InvalidInput("x0 is not an interior point".into()))?;
    let det0 = det_h_at(w, near);
    if !(det0 > 0.0) {
        return Err(Error::DegenerateInput(format!("det D²w(x0) = {det0:e}")));
    }
    let k = powf(abs(t.det()), 2.0 / n) / powf(det0, 1.0 / n);

    let plane = |p: Vec2| sec.value + sec.gradient.dot(p - x0) + h;
    let shifted_vals: Vec<f64> = (0..g.len()).map(|i| w.value(i) - plane(g.pos(i))).collect();
    let shifted_arms: Vec<f64> = g
        .all_arms()
        .iter()
        .zip(w.arm_values())
        .map(|(a, v)| v - plane(a.point))
        .collect();
    let shifted = ScalarField::new(g.clone(), shifted_vals, shifted_arms)?;

    let image = t.apply_all(&hull);
    let dom = match dim {
        Dim::One => {
            let (a, b) = (image[0].x.min(image[1].x), image[0].x.max(image[1].x));
            ConvexDomain::interval(a, b)?
        }
        Dim::Two => ConvexDomain::polygon(image)?,
    };
    let target = Grid::covering(&dom, spacing)?;
    let ws = apply_affine(&t, &shifted, &target, Interpolation::Cubic)?.map(|v| k * v);
    let gs = ws.grid().clone();
    let inv = t.inverse()?;
    let pull = |f: &ScalarField| {
        ScalarField::from_fn(&gs, |y| {
            f.sample(inv.apply(y), Interpolation::Cubic)
                .unwrap_or(f64::NAN)
        })
    };
    // u* = φ* + (u − φ)*, with the resampled gap clamped at zero: cubic
    // interpolation overshoots next to the contact set and would otherwise
    // break u* ≥ φ*
    let ps = pull(phi);
    let gap = pull(&u.zip_map(phi, |a, b| a - b)?);
    let us = ps.zip_map(&gap, |p, d| p + d.max(0.0))?;
    let min_gap = (0..gs.len())
        .filter(|&i| gs.has_value(i))
        .map(|i| us.value(i) - ps.value(i))
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);

    // determinant ratio against the original field
    let det_vals: Vec<f64> = (0..g.len())
        .map(|i| {
            if g.is_interior(i) {
                det_h_at(w, i)
            } else {
                f64::NAN
            }
        })
        .collect();
    let det_field = ScalarField::new(
        g.clone(),
        det_vals,
        alloc::vec![f64::NAN; g.all_arms().len()],
    )?;
    let mut det_defect: f64 = 0.0;
    for i in gs.interior_nodes() {
        if gs.level(i) > -2.0 * spacing {
            continue;
        }
        if let Some(d) = det_field.sample(inv.apply(gs.pos(i)), Interpolation::Bilinear) {
            det_defect = det_defect.max(abs(det_h_at(&ws, i) - d / det0));
        }
    }
    Ok(RescaledProblem {
        y0: t.apply(x0),
        t,
        k,
        w: ws,
        u: us,
        phi: ps,
        min_gap,
        det_defect,
        det0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthReport {
    pub height: f64,
    /// `sup_{S_h} |φ − ℓ|` with `ℓ` the tangent plane of `φ` at `x₀`.
    pub kappa: f64,
    /// `sup_{S_{h/2}} |u − ℓ|`.
    pub s: f64,
    /// `s/κ`; `None` when `κ < 1e-14` (affine obstacle on the section).
    pub ratio: Option<f64>,
    /// `min_{S_h} (u − ℓ)`, bounded below by `−κ` since `u ≥ φ`.
    pub lower: f64,
}

pub fn growth_check(
    u: &ScalarField,
    phi: &ScalarField,
    w: &ScalarField,
    x0: Vec2,
    heights: &[f64],
) -> Result<Vec<GrowthReport>> {
    let (p0, dp) = tangent_at(phi, x0)?;
    let ell = |p: Vec2| p0 + dp.dot(p - x0);
    let g = w.grid();
    let mut out = Vec::with_capacity(heights.len());
    for &h in heights {
        let big = extract_section(w, x0, h)?;
        let half = section_with_plane(w, x0, big.value, big.gradient, 0.5 * h)?;
        let kappa = big
            .nodes
            .iter()
            .map(|&i| abs(phi.value(i) - ell(g.pos(i))))
            .fold(0.0, f64::max);
        let lower = big
            .nodes
            .iter()
            .map(|&i| u.value(i) - ell(g.pos(i)))
            .fold(f64::INFINITY, f64::min);
        let s = half
            .nodes
            .iter()
            .map(|&i| abs(u.value(i) - ell(g.pos(i))))
            .fold(0.0, f64::max);
        out.push(GrowthReport {
            height: h,
            kappa,
            s,
            ratio: (kappa >= 1e-14).then(|| s / kappa),
            lower,
        });
    }
    Ok(out)
}

/// Gradient components at interior nodes by centred differences, NaN
/// elsewhere.
pub fn gradient_fields(u: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let g = u.grid();
    let mut gx = alloc::vec![f64::NAN; g.len()];
    let mut gy = alloc::vec![f64::NAN; g.len()];
    for i in g.interior_nodes() {
        if let Some(d) = u.node_gradient(i) {
            gx[i] = d.x;
            gy[i] = d.y;
        }
    }
    let arms = g.all_arms().len();
    Ok((
        ScalarField::new(g.clone(), gx, alloc::vec![f64::NAN; arms])?,
        ScalarField::new(g.clone(), gy, alloc::vec![f64::NAN; arms])?,
    ))
}

/// Bilinear samples of the centred-difference gradient.
pub struct GradientSampler {
    gx: ScalarField,
    gy: ScalarField,
}

impl GradientSampler {
    pub fn new(u: &ScalarField) -> Result<Self> {
        let (gx, gy) = gradient_fields(u)?;
        Ok(Self { gx, gy })
    }

    pub fn at(&self, p: Vec2) -> Option<Vec2> {
        let x = self.gx.sample(p, Interpolation::Bilinear)?;
        let y = match self.gx.grid().dim() {
            Dim::One => 0.0,
            Dim::Two => self.gy.sample(p, Interpolation::Bilinear)?,
        };
        Some(Vec2::new(x, y))
    }
}

#[derive(Clone, Debug)]
pub struct ExponentFit {
    pub anchor: Vec2,
    /// Radii that produced a value, decreasing.
    pub radii: Vec<f64>,
    /// `M(r) = max |Du(y) − Dφ(y₀)|` over non-contact samples at `|y − y₀| = r`.
    pub values: Vec<f64>,
    pub fit: LinearFit,
    pub alpha: f64,
    /// Half-width of the 95% band on `alpha` (two standard errors).
    pub band: f64,
}

/// Angular samples per radius.
pub const RING_SAMPLES: usize = 64;

/// Log-log slope of `M(r)` over the given radii around the free-boundary
/// point `y₀`. `Du(y₀)` is taken as `Dφ(y₀)`; samples with
/// `u − φ ≤ tol_contact` are skipped.
pub fn holder_exponent(
    u: &ScalarField,
    phi: &ScalarField,
    y0: Vec2,
    radii: &[f64],
    tol_contact: f64,
) -> Result<ExponentFit> {
    if !u.grid().same_lattice(phi.grid()) {
        return Err(Error::InvalidInput("u and φ must share a grid".into()));
    }
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let (_, d0) = tangent_at(phi, y0)?;
    let grad = GradientSampler::new(u)?;
    let dim = u.grid().dim();
    let mut rs = Vec::new();
    let mut ms = Vec::new();
    for &r in &sorted {
        let dirs: Vec<Vec2> = match dim {
            Dim::One => alloc::vec![Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)],
            Dim::Two => (0..RING_SAMPLES)
                .map(|k| {
                    let t = 2.0 * core::f64::consts::PI * k as f64 / RING_SAMPLES as f64;
                    Vec2::new(cos(t), sin(t))
                })
                .collect(),
        };
        let mut m: Option<f64> = None;
        for d in dirs {
            let y = y0 + d.scale(r);
            let (Some(uv), Some(pv)) = (
                u.sample(y, Interpolation::Bilinear),
                phi.sample(y, Interpolation::Bilinear),
            ) else {
                continue;
            };
            if uv - pv <= tol_contact {
                continue;
            }
            if let Some(du) = grad.at(y) {
                let v = (du - d0).norm();
                m = Some(m.map_or(v, |a| a.max(v)));
            }
        }
        if let Some(v) = m {
            rs.push(r);
            ms.push(v);
        }
    }
    if rs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable radii, need 4",
            rs.len()
        )));
    }
    let fit = loglog_fit(&rs, &ms)?;
    Ok(ExponentFit {
        anchor: y0,
        radii: rs,
        values: ms,
        alpha: fit.slope,
        band: 2.0 * fit.slope_stderr,
        fit,
    })
}

/// `|Du − Dφ|` at each free-boundary point, `Du` from the sampled gradient.
pub fn gradient_mismatch(u: &ScalarField, phi: &ScalarField, points: &[Vec2]) -> Result<f64> {
    let grad = GradientSampler::new(u)?;
    let mut worst: f64 = 0.0;
    for &p in points {
        if let (Some(du), Ok((_, dp))) = (grad.at(p), tangent_at(phi, p)) {
            worst = worst.max((du - dp).norm());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ModulusReport {
    pub gamma: f64,
    /// `max |Du(y₁) − Du(y₂)|/|y₁ − y₂|^γ` over Case 1 pairs
    /// (`|y₁ − y₂| ≤ ½ max(d₁, d₂)`).
    pub case1: f64,
    pub case1_pairs: usize,
    /// The same over the remaining pairs.
    pub case2: f64,
    pub case2_pairs: usize,
    /// Pairs with both points in the contact set.
    pub skipped: usize,
    /// `max (|y₁′ − y₂′|/|y₁ − y₂|)^γ` over Case 2 pairs, `yᵢ′` the nearest
    /// free-boundary point to `yᵢ`.
    pub route_constant: f64,
}

/// Hölder quotients of `Du` on sample pairs, split by the distance of each
/// point to the free boundary `fb`.
pub fn two_case_modulus(
    u: &ScalarField,
    phi: &ScalarField,
    fb: &[Vec2],
    pairs: &[(Vec2, Vec2)],
    gamma: f64,
    tol_contact: f64,
) -> Result<ModulusReport> {
    if fb.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let grad = GradientSampler::new(u)?;
    let nearest = |y: Vec2| {
        fb.iter()
            .copied()
            .map(|q| (q.dist(y), q))
            .fold((f64::INFINITY, y), |a, b| if b.0 < a.0 { b } else { a })
    };
    let in_contact = |y: Vec2| match (
        u.sample(y, Interpolation::Bilinear),
        phi.sample(y, Interpolation::Bilinear),
    ) {
        (Some(a), Some(b)) => a - b <= tol_contact,
        _ => false,
    };
    let mut rep = ModulusReport {
        gamma,
        ..Default::default()
    };
    for &(y1, y2) in pairs {
        if in_contact(y1) && in_contact(y2) {
            rep.skipped += 1;
            continue;
        }
        let (Some(g1), Some(g2)) = (grad.at(y1), grad.at(y2)) else {
            rep.skipped += 1;
            continue;
        };
        let dist = y1.dist(y2);
        if dist == 0.0 {
            rep.skipped += 1;
            continue;
        }
        let q = (g1 - g2).norm() / powf(dist, gamma);
        let (d1, p1) = nearest(y1);
        let (d2, p2) = nearest(y2);
        if dist <= 0.5 * d1.max(d2) {
            rep.case1 = rep.case1.max(q);
            rep.case1_pairs += 1;
        } else {
            rep.case2 = rep.case2.max(q);
            rep.case2_pairs += 1;
            rep.route_constant = rep.route_constant.max(powf(p1.dist(p2) / dist, gamma));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_grid(h: f64) -> alloc::sync::Arc<Grid> {
        alloc::sync::Arc::new(Grid::covering(&ConvexDomain::unit_ball(), h).unwrap())
    }

    #[test]
    fn paraboloid_rescales_to_unit_ball_profile() {
        let g = ball_grid(1.0 / 64.0);
        let w = ScalarField::from_fn(&g, |p| 0.5 * p.norm2());
        let u = ScalarField::zeros(&g);
        let r = rescale_problem(&w, &u, &u, Vec2::ZERO, 0.125, 1.0 / 32.0).unwrap();
        // the discrete hull is a polygon, so its John ellipse is close to but not
        // exactly the ball of radius 1/2
        assert!(abs(r.k - 4.0) < 1e-2, "{}", r.k);
        for i in r.w.grid().interior_nodes() {
            let y = r.w.grid().pos(i);
            assert!(abs(r.w.value(i) - 0.5 * (y.norm2() - 1.0)) < 5e-3);
        }
        assert!(r.det_defect < 1e-6);
    }

    #[test]
    fn linear_gradient_growth_has_unit_exponent() {
        let g = ball_grid(1.0 / 128.0);
        let y0 = Vec2::new(0.1, 0.05);
        let u = ScalarField::from_fn(&g, |p| 0.5 * (p - y0).norm2());
        let phi = ScalarField::from_fn(&g, |_| -1.0);
        let radii: Vec<f64> = (2..=6).map(|k| 0.5f64.powi(k)).collect();
        let f = holder_exponent(&u, &phi, y0, &radii, 0.0).unwrap();
        assert!(abs(f.alpha - 1.0) < 1e-9);
    }

    #[test]
    fn guaranteed_exponent() {
        assert_eq!(alpha_of_theta(0.2), 0.0);
        assert!(abs(alpha_of_theta(0.1) - 0.5 / 1.1) < 1e-15);
    }
}
