use alloc::format;
use alloc::vec::Vec;

use super::Dim;
use crate::error::{Error, Result};
use crate::math::{cos, sin, Vec2};

/// Open bounded convex domain: a counterclockwise convex polygon, a disk, or
/// an interval of the real line.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexDomain {
    Polygon { vertices: Vec<Vec2> },
    Ball { center: Vec2, radius: f64 },
    Interval { a: f64, b: f64 },
}

impl ConvexDomain {
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        let d = ConvexDomain::Polygon { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec2, radius: f64) -> Result<Self> {
        let d = ConvexDomain::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = ConvexDomain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_ball() -> Self {
        ConvexDomain::Ball {
            center: Vec2::ZERO,
            radius: 1.0,
        }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::polygon(alloc::vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    /// Regular polygon with `k` vertices on the ellipse with the given semi-axes.
    pub fn ellipse(center: Vec2, semi_x: f64, semi_y: f64, k: usize) -> Result<Self> {
        let verts = (0..k)
            .map(|i| {
                let t = 2.0 * core::f64::consts::PI * i as f64 / k as f64;
                center + Vec2::new(semi_x * cos(t), semi_y * sin(t))
            })
            .collect();
        Self::polygon(verts)
    }

    pub fn dim(&self) -> Dim {
        match self {
            ConvexDomain::Interval { .. } => Dim::One,
            _ => Dim::Two,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::DegenerateInput(format!(
                        "polygon needs at least 3 vertices, got {n}"
                    )));
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if (b - a).cross(c - b) < 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "polygon is not convex and counterclockwise at vertex {}",
                            (i + 1) % n
                        )));
                    }
                }
                if self.measure() <= 0.0 {
                    return Err(Error::DegenerateInput("polygon has zero area".into()));
                }
                Ok(())
            }
            ConvexDomain::Ball { radius, .. } => {
                if *radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::DegenerateInput(format!("ball radius {radius}")))
                }
            }
            ConvexDomain::Interval { a, b } => {
                if b > a {
                    Ok(())
                } else {
                    Err(Error::DegenerateInput(format!("interval ({a}, {b})")))
                }
            }
        }
    }

    /// Area (2D) or length (1D).
    pub fn measure(&self) -> f64 {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
                    .sum::<f64>()
            }
            ConvexDomain::Ball { radius, .. } => core::f64::consts::PI * radius * radius,
            ConvexDomain::Interval { a, b } => b - a,
        }
    }

    /// Signed distance-like level function: negative inside, zero on the
    /// boundary. Exact signed distance inside for all variants.
    pub fn level(&self, p: Vec2) -> f64 {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let mut m = f64::NEG_INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let e = vertices[(i + 1) % n] - a;
                    let len = e.norm();
                    // outward normal of a counterclockwise edge
                    let nrm = Vec2::new(e.y / len, -e.x / len);
                    m = m.max(nrm.dot(p - a));
                }
                m
            }
            ConvexDomain::Ball { center, radius } => p.dist(*center) - radius,
            ConvexDomain::Interval { a, b } => (a - p.x).max(p.x - b),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.level(p) < 0.0
    }

    /// Bounding box `(min, max)`.
    pub fn bbox(&self) -> (Vec2, Vec2) {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
            ConvexDomain::Ball { center, radius } => (
                *center - Vec2::new(*radius, *radius),
                *center + Vec2::new(*radius, *radius),
            ),
            ConvexDomain::Interval { a, b } => (Vec2::new(*a, 0.0), Vec2::new(*b, 0.0)),
        }
    }

    /// Points whose convex hull is the domain (a ball is represented by `k`
    /// equally spaced boundary points; its enclosing ellipsoid is the ball).
    pub fn hull_points(&self, k: usize) -> Vec<Vec2> {
        match self {
            ConvexDomain::Polygon { vertices } => vertices.clone(),
            ConvexDomain::Ball { center, radius } => (0..k)
                .map(|i| {
                    let t = 2.0 * core::f64::consts::PI * i as f64 / k as f64;
                    *center + Vec2::new(radius * cos(t), radius * sin(t))
                })
                .collect(),
            ConvexDomain::Interval { a, b } => alloc::vec![Vec2::new(*a, 0.0), Vec2::new(*b, 0.0)],
        }
    }

    /// `k` points on the boundary, spread by arc length for polygons.
    pub fn boundary_samples(&self, k: usize) -> Vec<Vec2> {
        match self {
            ConvexDomain::Polygon { vertices } => {
                let n = vertices.len();
                let lens: Vec<f64> = (0..n)
                    .map(|i| vertices[i].dist(vertices[(i + 1) % n]))
                    .collect();
                let total: f64 = lens.iter().sum();
                let mut out = Vec::with_capacity(k);
                for s in 0..k {
                    let mut t = total * s as f64 / k as f64;
                    let mut i = 0;
                    while i + 1 < n && t > lens[i] {
                        t -= lens[i];
                        i += 1;
                    }
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    out.push(a + (b - a).scale(t / lens[i]));
                }
                out
            }
            _ => self.hull_points(k),
        }
    }
}
