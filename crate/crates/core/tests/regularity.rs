mod common;

use lma_core::geometry::ScalarField;
use lma_core::ma::{solve_ma, MaParams, MaProblem};
use lma_core::obstacle::{
    free_boundary, solve_obstacle_activeset, LcpSolution, ObstacleParams, ObstacleProblem,
};
use lma_core::regularity::{
    gradient_fields, gradient_mismatch, growth_check, holder_exponent, rescale_problem,
    two_case_modulus, GradientSampler,
};
use lma_core::{EllipticityBounds, Sym2, TensorField, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{ball_grid, envelope_problem, loglog_slope, radial_obstacle_problem, RadialObstacle};

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 0.5f64.powi(k)).collect()
}

fn solve(p: &ObstacleProblem) -> LcpSolution {
    solve_obstacle_activeset(p, &ObstacleParams::default()).unwrap()
}

/// Free-boundary point of the computed solution nearest to `target`.
fn fb_point(s: &LcpSolution, target: Vec2) -> Vec2 {
    free_boundary(s)
        .unwrap()
        .points()
        .into_iter()
        .fold((f64::INFINITY, target), |a, q| {
            if q.dist(target) < a.0 {
                (q.dist(target), q)
            } else {
                a
            }
        })
        .1
}

fn half_norm2(p: &ObstacleProblem) -> ScalarField {
    ScalarField::from_fn(p.grid(), |x| 0.5 * x.norm2())
}

#[test]
fn rescaling_the_paraboloid() {
    let g = ball_grid(1.0 / 64.0);
    let w = ScalarField::from_fn(&g, |p| 0.5 * p.norm2());
    let zero = ScalarField::zeros(&g);
    for h in [0.125, 0.05] {
        let r = rescale_problem(&w, &zero, &zero, Vec2::ZERO, h, 1.0 / 32.0).unwrap();
        let k = 1.0 / (2.0 * h);
        assert!((r.k - k).abs() < 1e-2 * k, "{} vs {k}", r.k);
        assert!(r.det_defect < 1e-6);
        assert!(r.y0.norm() < 1e-2);
    }
}

#[test]
fn rescaled_unit_density_potential_has_unit_determinant() {
    let g = ball_grid(1.0 / 64.0);
    let p = MaProblem {
        domain: lma_core::geometry::ConvexDomain::unit_ball(),
        f: ScalarField::from_fn(&g, |_| 1.0),
        bounds: EllipticityBounds::new(1.0, 1.0).unwrap(),
    };
    let w = solve_ma(&p, &g, &MaParams::default()).unwrap().w;
    let zero = ScalarField::zeros(&g);
    let r = rescale_problem(&w, &zero, &zero, Vec2::new(0.2, 0.1), 0.05, 1.0 / 32.0).unwrap();
    assert!(r.det_defect < 1e-2, "{}", r.det_defect);
    assert!((r.det0 - 1.0).abs() < 1e-6);
}

#[test]
fn rescaled_obstacle_keeps_the_order() {
    let p = radial_obstacle_problem(1.0 / 64.0);
    let s = solve(&p);
    let x0 = fb_point(&s, Vec2::new(1.0, 0.0));
    let w = half_norm2(&p);
    let r = rescale_problem(&w, &s.u, &p.phi, x0, 0.05, 1.0 / 32.0).unwrap();
    assert!(r.min_gap >= 0.0, "{}", r.min_gap);
    // the rescaled solution is still u resampled, away from contact
    let inv = r.t.inverse().unwrap();
    let gs = r.u.grid();
    for i in gs.interior_nodes() {
        let x = inv.apply(gs.pos(i));
        let gap = r.u.value(i) - r.phi.value(i);
        if gap > 1e-3 {
            let direct =
                s.u.sample(x, lma_core::geometry::Interpolation::Cubic)
                    .unwrap();
            assert!((r.u.value(i) - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn full_contact_growth_ratio_is_at_most_one() {
    let g = ball_grid(1.0 / 64.0);
    let w = ScalarField::from_fn(&g, |p| 0.5 * p.norm2());
    let phi = ScalarField::from_fn(&g, |p| p.x.powi(3) + 0.5 * p.y * p.y - p.x * p.y);
    let reps = growth_check(&phi, &phi, &w, Vec2::new(0.1, 0.0), &dyadic(3, 6)).unwrap();
    for r in reps {
        assert!(r.ratio.unwrap() <= 1.0 + 1e-12, "{r:?}");
        assert!(r.lower >= -r.kappa - 1e-14);
    }
}

fn assert_stable(reps: &[lma_core::regularity::GrowthReport]) {
    let ratios: Vec<f64> = reps.iter().map(|r| r.ratio.unwrap()).collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi <= 2.0 * lo, "{ratios:?}");
    for r in reps {
        assert!(r.lower >= -r.kappa - 1e-10, "{r:?}");
    }
}

#[test]
fn envelope_growth_is_stable() {
    let p = envelope_problem(1024);
    let s = solve(&p);
    let x0 = Vec2::new(1.0 - 0.5f64.sqrt(), 0.0);
    let w = ScalarField::from_fn(p.grid(), |x| 0.5 * x.x * x.x);
    let reps = growth_check(&s.u, &p.phi, &w, x0, &dyadic(3, 7)).unwrap();
    assert_stable(&reps);
}

#[test]
fn radial_growth_is_stable() {
    let p = radial_obstacle_problem(1.0 / 128.0);
    let s = solve(&p);
    let x0 = fb_point(&s, Vec2::new(1.0, 0.0));
    let reps = growth_check(&s.u, &p.phi, &half_norm2(&p), x0, &dyadic(4, 7)).unwrap();
    assert_stable(&reps);
}

#[test]
fn synthetic_exponents() {
    let g = ball_grid(1.0 / 256.0);
    let y0 = Vec2::new(0.05, -0.1);
    let phi = ScalarField::from_fn(&g, |_| -1.0);
    let radii = dyadic(2, 6);
    let lin = ScalarField::from_fn(&g, |p| 0.5 * (p - y0).norm2());
    let f = holder_exponent(&lin, &phi, y0, &radii, 0.0).unwrap();
    assert!((f.alpha - 1.0).abs() <= 0.02, "{}", f.alpha);
    // Du − Du(y₀) = |y − y₀|^{1/2} in the radial direction
    let root = ScalarField::from_fn(&g, |p| (2.0 / 3.0) * (p - y0).norm().powf(1.5));
    let f = holder_exponent(&root, &phi, y0, &radii, 0.0).unwrap();
    assert!((f.alpha - 0.5).abs() <= 0.05, "{}", f.alpha);
}

#[test]
fn exponent_needs_four_radii() {
    let g = ball_grid(1.0 / 32.0);
    let u = ScalarField::from_fn(&g, |p| p.norm2());
    let phi = ScalarField::from_fn(&g, |_| -1.0);
    assert!(holder_exponent(&u, &phi, Vec2::ZERO, &dyadic(2, 4), 0.0).is_err());
}

#[test]
fn classical_exponent_is_stable_under_shrinking_the_window() {
    let p = radial_obstacle_problem(1.0 / 128.0);
    let s = solve(&p);
    let y0 = fb_point(&s, Vec2::new(1.0, 1.0));
    let full = holder_exponent(&s.u, &p.phi, y0, &dyadic(2, 6), s.tol_contact).unwrap();
    assert!(full.alpha >= 0.9, "{}", full.alpha);
    for window in [dyadic(2, 5), dyadic(3, 6)] {
        let part = holder_exponent(&s.u, &p.phi, y0, &window, s.tol_contact).unwrap();
        assert!(
            part.alpha >= full.alpha - full.band,
            "{} vs {} ± {}",
            part.alpha,
            full.alpha,
            full.band
        );
    }
}

#[test]
fn gradients_are_second_order() {
    let g = ball_grid(1.0 / 32.0);
    let q = ScalarField::from_fn(&g, |p| 1.5 * p.x * p.x - p.x * p.y + 0.3 * p.y);
    let (gx, gy) = gradient_fields(&q).unwrap();
    for i in g.interior_nodes() {
        let p = g.pos(i);
        assert!((gx.value(i) - (3.0 * p.x - p.y)).abs() < 1e-12);
        assert!((gy.value(i) - (0.3 - p.x)).abs() < 1e-12);
    }
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let g = ball_grid(h);
            let c = ScalarField::from_fn(&g, |p| p.x.powi(3) + p.x * p.y * p.y);
            let (gx, _) = gradient_fields(&c).unwrap();
            g.interior_nodes()
                .filter(|&i| g.pos(i).norm() <= 0.9)
                .map(|i| {
                    let p = g.pos(i);
                    (gx.value(i) - (3.0 * p.x * p.x + p.y * p.y)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let slope = loglog_slope(&hs, &errs);
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
}

#[test]
fn free_boundary_gradients_match_the_obstacle() {
    for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
        let p = radial_obstacle_problem(h);
        let s = solve(&p);
        let fb = free_boundary(&s).unwrap().points();
        let m = gradient_mismatch(&s.u, &p.phi, &fb).unwrap();
        assert!(m <= 3.0 * h, "{m} at h = {h}");
    }
    // in 1D as well
    let p = envelope_problem(512);
    let s = solve(&p);
    let fb = free_boundary(&s).unwrap().points();
    let m = gradient_mismatch(&s.u, &p.phi, &fb).unwrap();
    assert!(m <= 3.0 * 2.0 / 512.0, "{m}");
}

/// Pairs of points within `spread` of the circle of radius `a`.
fn pairs_near(a: f64, spread: f64, n: usize, seed: u64) -> Vec<(Vec2, Vec2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = a + rng.gen_range(-spread..spread);
        Vec2::new(r * t.cos(), r * t.sin())
    };
    (0..n)
        .map(|_| {
            let y1 = point(&mut rng);
            let y2 = if rng.gen_bool(0.5) {
                y1 + Vec2::new(rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02))
            } else {
                point(&mut rng)
            };
            (y1, y2)
        })
        .collect()
}

#[test]
fn two_case_modulus_on_the_classical_problem() {
    let p = radial_obstacle_problem(1.0 / 64.0);
    let s = solve(&p);
    let fb = free_boundary(&s).unwrap().points();
    let oracle = RadialObstacle::new();
    let pairs = pairs_near(oracle.a, 0.15, 400, 11);

    // γ = 0: the plain gradient difference
    let r0 = two_case_modulus(&s.u, &p.phi, &fb, &pairs, 0.0, s.tol_contact).unwrap();
    let grad = GradientSampler::new(&s.u).unwrap();
    let direct = pairs
        .iter()
        .filter_map(|&(a, b)| Some((grad.at(a)? - grad.at(b)?).norm()))
        .fold(0.0, f64::max);
    assert!(r0.case1.max(r0.case2) <= direct + 1e-15);
    assert!(r0.route_constant <= 1.0);

    let gamma = 0.9;
    let r = two_case_modulus(&s.u, &p.phi, &fb, &pairs, gamma, s.tol_contact).unwrap();
    assert!(r.case1_pairs > 0 && r.case2_pairs > 0, "{r:?}");
    assert!(r.case1.is_finite() && r.case2.is_finite());
    assert!(r.route_constant <= 3f64.powf(gamma) * 3.0, "{r:?}");
    assert_eq!(r.case1_pairs + r.case2_pairs + r.skipped, pairs.len());
}

fn cap_problem(h: f64, c: Vec2, depth: f64) -> ObstacleProblem {
    let g = ball_grid(h);
    ObstacleProblem::new(
        TensorField::constant(&g, Sym2::IDENTITY),
        ScalarField::from_fn(&g, move |x| depth - (x - c).norm2()),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn growth_lower_bound_holds(cx in -0.2f64..0.2, cy in -0.2f64..0.2, depth in 0.15f64..0.4, hexp in 3i32..6) {
        let p = cap_problem(1.0 / 32.0, Vec2::new(cx, cy), depth);
        let s = solve(&p);
        let x0 = fb_point(&s, Vec2::new(1.0, 0.3));
        let r = rescale_problem(&half_norm2(&p), &s.u, &p.phi, x0, 0.02, 1.0 / 32.0).unwrap();
        prop_assert!(r.min_gap >= 0.0);
        if let Ok(reps) = growth_check(&s.u, &p.phi, &half_norm2(&p), x0, &[0.5f64.powi(hexp)]) {
            for r in reps {
                prop_assert!(r.lower >= -r.kappa - s.tol_contact - 1e-12, "{r:?}");
            }
        }
    }
}
