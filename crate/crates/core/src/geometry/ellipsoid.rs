use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{AffineMap, ConvexDomain, Dim};
use crate::error::{Error, Result};
use crate::math::{sqrt, Mat2, Sym2, Vec2};

/// `{x : (x − c)ᵀ M (x − c) ≤ 1}`. In 1D only `shape.a11` is meaningful and
/// `shape.a22` is kept at 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipsoid {
    pub center: Vec2,
    pub shape: Sym2,
    pub dim: Dim,
}

impl Ellipsoid {
    pub fn contains(&self, p: Vec2, slack: f64) -> bool {
        self.gauge(p) <= 1.0 + slack
    }

    /// `(p − c)ᵀ M (p − c)`.
    pub fn gauge(&self, p: Vec2) -> f64 {
        let d = p - self.center;
        match self.dim {
            Dim::One => self.shape.a11 * d.x * d.x,
            Dim::Two => self.shape.quad(d),
        }
    }

    /// Semi-axis lengths `(largest, smallest)`.
    pub fn semi_axes(&self) -> (f64, f64) {
        match self.dim {
            Dim::One => {
                let r = 1.0 / sqrt(self.shape.a11);
                (r, r)
            }
            Dim::Two => {
                let (l1, l2) = self.shape.eigen();
                (1.0 / sqrt(l2), 1.0 / sqrt(l1))
            }
        }
    }

    /// Volume up to the constant of the unit ball: `det(M)^{-1/2}`.
    pub fn relative_volume(&self) -> f64 {
        match self.dim {
            Dim::One => 1.0 / sqrt(self.shape.a11),
            Dim::Two => 1.0 / sqrt(self.shape.det()),
        }
    }

    /// Image under an affine map.
    pub fn transform(&self, t: &AffineMap) -> Result<Ellipsoid> {
        let ai =
            t.a.inverse()
                .ok_or_else(|| Error::DegenerateInput("affine map is singular".into()))?;
        // (A⁻¹(y − Ac − b))ᵀ M (…) = (y − c')ᵀ A⁻ᵀ M A⁻¹ (y − c')
        let shape = match self.dim {
            Dim::One => Sym2::diag(self.shape.a11 / (t.a.a11 * t.a.a11), 1.0),
            Dim::Two => ai.transpose().congruence(&self.shape),
        };
        Ok(Ellipsoid {
            center: t.apply(self.center),
            shape,
            dim: self.dim,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MveeStats {
    pub iterations: usize,
    /// Final `max(ε₊, ε₋)` of the Todd–Yıldırım certificate.
    pub gap: f64,
}

/// Minimum-volume enclosing ellipsoid of `points` (2D).
pub fn mvee(points: &[Vec2], tol: f64) -> Result<Ellipsoid> {
    mvee_with_stats(points, Dim::Two, tol).map(|(e, _)| e)
}

/// Khachiyan's first-order method with Todd–Yıldırım away steps.
///
/// Stops when the weighted design certifies `(1 + tol)`-optimality in the
/// dual; the ellipsoid is then rescaled so that every point is contained.
pub fn mvee_with_stats(points: &[Vec2], dim: Dim, tol: f64) -> Result<(Ellipsoid, MveeStats)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("mvee tolerance {tol}")));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    if dim == Dim::One {
        return mvee_1d(points);
    }
    let m = points.len();
    if m < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 points in the plane, got {m}"
        )));
    }
    check_rank(points)?;

    let d = 3.0;
    let lift = |p: Vec2| [p.x, p.y, 1.0];
    let mut u = vec![1.0 / m as f64; m];
    let mut g = vec![0.0; m];
    let mut iterations = 0;
    let mut gap;
    loop {
        let mut x = [0.0; 9];
        for (p, &ui) in points.iter().zip(&u) {
            if ui == 0.0 {
                continue;
            }
            let q = lift(*p);
            for r in 0..3 {
                for c in 0..3 {
                    x[3 * r + c] += ui * q[r] * q[c];
                }
            }
        }
        let xi = inv3(&x).ok_or_else(|| Error::DegenerateInput("singular design".into()))?;
        for (gi, p) in g.iter_mut().zip(points) {
            let q = lift(*p);
            let mut s = 0.0;
            for r in 0..3 {
                for c in 0..3 {
                    s += q[r] * xi[3 * r + c] * q[c];
                }
            }
            *gi = s;
        }
        let (mut jmax, mut gmax) = (0, f64::NEG_INFINITY);
        let (mut jmin, mut gmin) = (usize::MAX, f64::INFINITY);
        for i in 0..m {
            if g[i] > gmax {
                gmax = g[i];
                jmax = i;
            }
            if u[i] > 0.0 && g[i] < gmin {
                gmin = g[i];
                jmin = i;
            }
        }
        let eps_plus = gmax / d - 1.0;
        let eps_minus = 1.0 - gmin / d;
        gap = eps_plus.max(eps_minus);
        if gap <= tol || iterations >= 1_000_000 {
            break;
        }
        iterations += 1;
        if eps_plus >= eps_minus {
            let beta = (gmax - d) / (d * (gmax - 1.0));
            for ui in u.iter_mut() {
                *ui *= 1.0 - beta;
            }
            u[jmax] += beta;
        } else {
            let uj = u[jmin];
            let beta = ((d - gmin) / (d * (gmin - 1.0))).min(uj / (1.0 - uj));
            for ui in u.iter_mut() {
                *ui *= 1.0 + beta;
            }
            u[jmin] -= beta;
            if u[jmin] < 1e-300 {
                u[jmin] = 0.0;
            }
        }
    }

    let mut c = Vec2::ZERO;
    for (p, &ui) in points.iter().zip(&u) {
        c += p.scale(ui);
    }
    let mut cov = Sym2::new(0.0, 0.0, 0.0);
    for (p, &ui) in points.iter().zip(&u) {
        let v = *p - c;
        cov = cov + Sym2::new(ui * v.x * v.x, ui * v.x * v.y, ui * v.y * v.y);
    }
    let mut shape = cov
        .inverse()
        .ok_or_else(|| Error::DegenerateInput("singular covariance".into()))?
        .scale(0.5);
    let worst = points
        .iter()
        .map(|p| shape.quad(*p - c))
        .fold(0.0, f64::max);
    if worst > 1.0 {
        shape = shape.scale(1.0 / worst);
    }
    Ok((
        Ellipsoid {
            center: c,
            shape,
            dim: Dim::Two,
        },
        MveeStats { iterations, gap },
    ))
}

fn mvee_1d(points: &[Vec2]) -> Result<(Ellipsoid, MveeStats)> {
    let lo = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    if points.len() < 2 || !(hi > lo) {
        return Err(Error::DegenerateInput(
            "need two distinct points on the line".into(),
        ));
    }
    let r = 0.5 * (hi - lo);
    Ok((
        Ellipsoid {
            center: Vec2::new(0.5 * (hi + lo), 0.0),
            shape: Sym2::diag(1.0 / (r * r), 1.0),
            dim: Dim::One,
        },
        MveeStats {
            iterations: 0,
            gap: 0.0,
        },
    ))
}

fn check_rank(points: &[Vec2]) -> Result<()> {
    let m = points.len() as f64;
    let mut c = Vec2::ZERO;
    for p in points {
        c += p.scale(1.0 / m);
    }
    let mut cov = Sym2::new(0.0, 0.0, 0.0);
    for p in points {
        let v = *p - c;
        cov = cov + Sym2::new(v.x * v.x, v.x * v.y, v.y * v.y);
    }
    let (l1, l2) = cov.eigen();
    if !(l1 > 0.0) || l2 <= 1e-12 * l1 {
        return Err(Error::DegenerateInput(
            "points are affinely dependent (rank < 2)".into(),
        ));
    }
    Ok(())
}

fn inv3(a: &[f64; 9]) -> Option<[f64; 9]> {
    let c00 = a[4] * a[8] - a[5] * a[7];
    let c01 = a[5] * a[6] - a[3] * a[8];
    let c02 = a[3] * a[7] - a[4] * a[6];
    let det = a[0] * c00 + a[1] * c01 + a[2] * c02;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let id = 1.0 / det;
    Some([
        c00 * id,
        (a[2] * a[7] - a[1] * a[8]) * id,
        (a[1] * a[5] - a[2] * a[4]) * id,
        c01 * id,
        (a[0] * a[8] - a[2] * a[6]) * id,
        (a[2] * a[3] - a[0] * a[5]) * id,
        c02 * id,
        (a[1] * a[6] - a[0] * a[7]) * id,
        (a[0] * a[4] - a[1] * a[3]) * id,
    ])
}

/// Convex hull in counterclockwise order (Andrew's monotone chain).
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: alloc::boxed::Box<dyn Iterator<Item = &Vec2>> = if pass == 0 {
            alloc::boxed::Box::new(pts.iter())
        } else {
            alloc::boxed::Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - b) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Distance from `o` to the boundary of the convex polygon `hull`
/// (counterclockwise); negative if `o` is outside.
pub fn inradius_about(hull: &[Vec2], o: Vec2) -> f64 {
    let n = hull.len();
    let mut r = f64::INFINITY;
    for i in 0..n {
        let a = hull[i];
        let e = hull[(i + 1) % n] - a;
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        // inward normal of a counterclockwise edge
        let nrm = Vec2::new(-e.y / len, e.x / len);
        r = r.min(nrm.dot(o - a));
    }
    r
}

/// Tight John normalization of the convex hull of `points`.
///
/// With `E` the MVEE (centre `c`, shape `M`), returns
/// `T(x) = s·M^{1/2}(x − c)` where `s ≥ 1` is chosen so that the inradius of
/// `T(K)` about the origin is exactly 1. Since `K ⊇ c + (E − c)/n`, `s ≤ n`
/// and `B₁ ⊆ T(K) ⊆ B_s ⊆ B_n`. The linear part is symmetric positive
/// definite.
pub fn normalize_points(points: &[Vec2], dim: Dim) -> Result<AffineMap> {
    let (e, _) = mvee_with_stats(points, dim, 1e-9)?;
    match dim {
        Dim::One => {
            let r = 1.0 / sqrt(e.shape.a11);
            AffineMap::with_dim(
                Mat2::diag(1.0 / r, 1.0),
                Vec2::new(-e.center.x / r, 0.0),
                Dim::One,
            )
        }
        Dim::Two => {
            let b = e.shape.sqrt().to_mat();
            let hull = convex_hull(points);
            let img: Vec<Vec2> = hull.iter().map(|&p| b.apply(p - e.center)).collect();
            let rho = inradius_about(&img, Vec2::ZERO);
            if !(rho > 0.0) {
                return Err(Error::DegenerateInput("hull has empty interior".into()));
            }
            let s = 1.0 / rho;
            let a = b.scale(s);
            AffineMap::new(a, -a.apply(e.center))
        }
    }
}

/// Normalization map of a domain with `B₁ ⊆ T(K) ⊆ Bₙ`; identity on the unit
/// ball and a translation on translated unit balls.
pub fn normalize_domain(k: &ConvexDomain) -> Result<AffineMap> {
    k.validate()?;
    match k {
        ConvexDomain::Ball { center, radius } => {
            let s = 1.0 / radius;
            AffineMap::new(Mat2::scaled(s), -center.scale(s))
        }
        ConvexDomain::Polygon { vertices } => normalize_points(vertices, Dim::Two),
        ConvexDomain::Interval { a, b } => {
            normalize_points(&[Vec2::new(*a, 0.0), Vec2::new(*b, 0.0)], Dim::One)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};

    #[test]
    fn circle_points_give_unit_disk() {
        let pts: Vec<Vec2> = (0..64)
            .map(|i| {
                let t = 2.0 * core::f64::consts::PI * i as f64 / 64.0;
                Vec2::new(cos(t), sin(t))
            })
            .collect();
        let e = mvee(&pts, 1e-10).unwrap();
        assert!(e.center.norm() < 1e-8);
        assert!(e.shape.max_abs_diff(&Sym2::IDENTITY) < 1e-7);
    }

    #[test]
    fn square_corners_give_circumscribed_disk() {
        let pts = [
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ];
        let e = mvee(&pts, 1e-10).unwrap();
        assert!(e.center.norm() < 1e-9);
        assert!(e.shape.max_abs_diff(&Sym2::diag(0.5, 0.5)) < 1e-8);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 2.0),
        ];
        assert!(matches!(mvee(&pts, 1e-8), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn hull_drops_interior_points() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.2, 0.2),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((inradius_about(&h, Vec2::new(0.5, 0.5)) - 0.5).abs() < 1e-15);
    }
}
