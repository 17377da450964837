//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use lma_core::geometry::{ConvexDomain, Grid, ScalarField};
use lma_core::obstacle::ObstacleProblem;
use lma_core::{Sym2, TensorField};

pub fn ball_grid(h: f64) -> Arc<Grid> {
    Arc::new(Grid::covering(&ConvexDomain::unit_ball(), h).unwrap())
}

/// `(−1, 1)` with `n` cells.
pub fn interval_grid(n: usize) -> Arc<Grid> {
    let d = ConvexDomain::interval(-1.0, 1.0).unwrap();
    Arc::new(Grid::covering(&d, 2.0 / n as f64).unwrap())
}

/// Least concave majorant of the points, by an upper monotone chain.
/// Returns the hull vertices sorted by `x`.
pub fn upper_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b unless it lies strictly above the chord a-p
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

pub fn eval_piecewise_linear(hull: &[(f64, f64)], x: f64) -> f64 {
    for w in hull.windows(2) {
        if x >= w[0].0 && x <= w[1].0 {
            let t = (x - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + t * (w[1].1 - w[0].1);
        }
    }
    f64::NAN
}

/// The 1D obstacle problem `u'' ≤ 0`, `u ≥ φ`, `u(±1) = 0` is solved by the
/// concave envelope of `φ` with the boundary anchors; this evaluates it on
/// a fine sampling of `φ`.
pub fn envelope_oracle(phi: impl Fn(f64) -> f64, samples: usize) -> impl Fn(f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = (0..=samples)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / samples as f64;
            (x, phi(x))
        })
        .collect();
    pts.push((-1.0, 0.0));
    pts.push((1.0, 0.0));
    let hull = upper_hull(pts);
    move |x| eval_piecewise_linear(&hull, x)
}

/// Contact points of the envelope: the hull vertices where it leaves `φ`.
pub fn envelope_contact_ends(phi: impl Fn(f64) -> f64, samples: usize) -> (f64, f64) {
    let mut pts: Vec<(f64, f64)> = (0..=samples)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / samples as f64;
            (x, phi(x).max(-1e300))
        })
        .collect();
    pts.push((-1.0, 0.0));
    pts.push((1.0, 0.0));
    let hull = upper_hull(pts);
    let inner: Vec<f64> = hull
        .iter()
        .filter(|(x, y)| x.abs() < 1.0 && (phi(*x) - y).abs() < 1e-14)
        .map(|p| p.0)
        .collect();
    (inner[0], inner[inner.len() - 1])
}

/// Radial solution of `Δu ≤ 0`, `u ≥ 1/2 − r²` on the unit disc: contact on
/// `r ≤ a`, `u = −2a² ln r` outside, where `a` solves
/// `−2a² ln a = 1/2 − a²` (value and slope matching), found by shooting on
/// `a` with bisection.
pub struct RadialObstacle {
    pub a: f64,
}

impl RadialObstacle {
    pub fn new() -> Self {
        let g = |a: f64| -2.0 * a * a * a.ln() - (0.5 - a * a);
        let (mut lo, mut hi) = (0.1, 0.7);
        assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self { a: 0.5 * (lo + hi) }
    }

    pub fn u(&self, r: f64) -> f64 {
        if r <= self.a {
            0.5 - r * r
        } else {
            -2.0 * self.a * self.a * r.ln()
        }
    }
}

pub fn radial_obstacle_problem(h: f64) -> ObstacleProblem {
    let g = ball_grid(h);
    let w = TensorField::constant(&g, Sym2::IDENTITY);
    ObstacleProblem::new(w, ScalarField::from_fn(&g, |p| 0.5 - p.norm2())).unwrap()
}

pub fn envelope_problem(n: usize) -> ObstacleProblem {
    let g = interval_grid(n);
    let w = TensorField::constant(&g, Sym2::IDENTITY);
    ObstacleProblem::new(w, ScalarField::from_fn(&g, |p| 0.5 - p.x * p.x)).unwrap()
}

/// `w` for `det D²w = 1 + r²` on the unit disc:
/// `w'(r) = r√(1 + r²/2)`, so `w = (2/3)((1 + r²/2)^{3/2} − (3/2)^{3/2})`.
pub fn ma_one_plus_r2(r: f64) -> f64 {
    (2.0 / 3.0) * ((1.0 + 0.5 * r * r).powf(1.5) - 1.5f64.powf(1.5))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
