//! The pipelines: each step solves or probes, writes its CSV artifacts and
//! records its results for the report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lma_core::linma::{
    cofactor_field, cofactor_identity_defect, discrete_hessian, ellipticity_check, OperatorOptions,
};
use lma_core::ma::{radial_ma_oracle, solve_ma, MaParams, MaProblem};
use lma_core::obstacle::{
    default_supersolution, free_boundary, perron_dropping, solve_obstacle_activeset,
    solve_obstacle_psor, FreeBoundary, LcpSolution, ObstacleParams, ObstacleProblem, PerronParams,
    Solver,
};
use lma_core::regularity::{
    alpha_of_theta, gradient_mismatch, growth_check, holder_exponent, two_case_modulus,
    GradientSampler,
};
use lma_core::sections::{
    a_bounds, engulfing, extract_section, fit_recursion, harnack_quotient, iterate_normalization,
    section_ball_probe, IterationParams,
};
use lma_core::{ConvexDomain, EllipticityBounds, Grid, ScalarField, Sym2, TensorField, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{DensityConfig, DomainConfig, ExperimentConfig, Pipeline, SolverKind, WSource};
use crate::error::{InModule, LabError};
use crate::expr::Expr;
use crate::output::{
    read_scalar, write_contact, write_free_boundary, write_scalar, write_tensor, Table,
};

/// Random streams, one per probe, all keyed by the run seed.
const HARNACK_STREAM: u64 = 1;
const HOLDER_STREAM: u64 = 2;

pub struct Outcome {
    pub tolerances: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

struct Obstacle {
    sol: LcpSolution,
    fb: Option<FreeBoundary>,
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    out: PathBuf,
    seed: u64,
    domain: ConvexDomain,
    grid: Arc<Grid>,
    ma_w: Option<ScalarField>,
    potential: Option<(ScalarField, TensorField)>,
    obstacle: Option<Obstacle>,
    done: Outcome,
}

pub fn execute(
    cfg: &ExperimentConfig,
    pipeline: Pipeline,
    out: &Path,
    seed: u64,
) -> Result<Outcome, LabError> {
    let domain = build_domain(&cfg.domain).in_module("geometry")?;
    let grid = Arc::new(Grid::covering(&domain, cfg.grid.h).in_module("geometry")?);
    log::info!(
        "grid: h = {:e}, {} interior nodes, {} boundary crossings",
        cfg.grid.h,
        grid.interior_count(),
        grid.all_arms().len()
    );
    let mut run = Run {
        cfg,
        out: out.to_owned(),
        seed,
        domain,
        grid,
        ma_w: None,
        potential: None,
        obstacle: None,
        done: Outcome {
            tolerances: BTreeMap::new(),
            results: BTreeMap::new(),
            warnings: Vec::new(),
            files: Vec::new(),
        },
    };
    match pipeline {
        Pipeline::SolveMa => run.ma()?,
        Pipeline::SolveObstacle => run.obstacle()?,
        Pipeline::ProbeSections => run.sections()?,
        Pipeline::ProbeHarnack => run.harnack()?,
        Pipeline::ProbeNormalization => run.normalization()?,
        Pipeline::ProbeHolder => run.holder()?,
        Pipeline::FullPipeline => {
            if cfg.w_source().is_some_and(|s| matches!(s, WSource::Ma)) {
                run.ma()?;
            }
            run.obstacle()?;
            if cfg.sections.is_some() {
                run.sections()?;
            }
            if cfg.harnack.is_some() {
                run.harnack()?;
            }
            if cfg.normalization.is_some() {
                run.normalization()?;
            }
            run.holder()?;
        }
    }
    Ok(run.done)
}

pub fn build_domain(d: &DomainConfig) -> lma_core::Result<ConvexDomain> {
    let v = |p: [f64; 2]| Vec2::new(p[0], p[1]);
    match d {
        DomainConfig::Ball { center, radius } => ConvexDomain::ball(v(*center), *radius),
        DomainConfig::Interval { a, b } => ConvexDomain::interval(*a, *b),
        DomainConfig::Rectangle { x0, x1, y0, y1 } => ConvexDomain::rectangle(*x0, *x1, *y0, *y1),
        DomainConfig::Ellipse {
            center,
            semi_x,
            semi_y,
            k,
        } => ConvexDomain::ellipse(v(*center), *semi_x, *semi_y, *k),
        DomainConfig::Polygon { vertices } => {
            ConvexDomain::polygon(vertices.iter().copied().map(v).collect())
        }
    }
}

fn vec2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

fn expr(text: &str) -> Result<Expr, LabError> {
    // validated up front; a failure here is a bug in validation
    Expr::parse(text).map_err(LabError::Data)
}

impl Run<'_> {
    fn tol(&mut self, key: &str, v: impl Into<Value>) {
        let v = v.into();
        log::info!("tolerance {key} = {v}");
        self.done.tolerances.insert(key.into(), v);
    }

    fn result(&mut self, key: &str, v: Value) {
        self.done.results.insert(key.into(), v);
    }

    fn file(&mut self, name: &str) {
        if !self.done.files.iter().any(|f| f == name) {
            self.done.files.push(name.into());
        }
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.done.warnings.push(msg);
    }

    fn density(&self) -> Result<(Box<dyn Fn(Vec2) -> f64>, Option<Expr>), LabError> {
        Ok(match self.cfg.f.as_ref().expect("validated") {
            DensityConfig::Constant { value } => {
                let c = *value;
                (Box::new(move |_| c), Expr::parse(&format!("{c:?}")).ok())
            }
            DensityConfig::Radial { expr: e } => {
                let f = expr(e)?;
                (
                    Box::new(move |p: Vec2| f.eval_radial(p.norm())),
                    Some(expr(e)?),
                )
            }
            DensityConfig::Expression { expr: e } => {
                let f = expr(e)?;
                (Box::new(move |p| f.eval(p)), None)
            }
        })
    }

    /// `det D²w = f`, `w = 0` on `∂Ω`. Writes `w.csv` and `cofactor.csv`.
    fn ma(&mut self) -> Result<(), LabError> {
        if self.ma_w.is_some() {
            return Ok(());
        }
        let s = &self.cfg.solver;
        let params = MaParams {
            tol_ma: s.tol_ma,
            tol_convex: s.tol_convex,
            max_newton: s.max_newton,
            stencil_width: s.stencil_width,
            ..MaParams::default()
        };
        self.tol("ma.tol_ma", params.tol_ma);
        self.tol("ma.tol_convex", params.tol_convex);
        self.tol("ma.max_newton", params.max_newton);
        self.tol("ma.stencil_width", params.stencil_width);
        let (f, radial) = self.density()?;
        let fs = ScalarField::from_fn(&self.grid, |p| f(p));
        let (lo, hi) = self
            .grid
            .interior_nodes()
            .map(|i| fs.value(i))
            .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
        let bounds = EllipticityBounds::new(lo, hi).in_module("ma")?;
        let problem = MaProblem {
            domain: self.domain.clone(),
            f: fs,
            bounds,
        };
        let sol = solve_ma(&problem, &self.grid, &params).in_module("ma")?;
        log::info!(
            "ma: {} iterations ({:?}), max residual {:e}",
            sol.iterations,
            sol.method,
            sol.max_residual
        );
        let mut report = json!({
            "iterations": sol.iterations,
            "method": format!("{:?}", sol.method).to_lowercase(),
            "max_residual": sol.max_residual,
            "mean_residual": sol.mean_residual,
            "convexity_margin": sol.convexity_margin,
            "lambda": lo,
            "Lambda": hi,
        });
        if let (Some(fr), DomainConfig::Ball { center, radius }) = (radial, &self.cfg.domain) {
            if *center == [0.0, 0.0] {
                let oracle = radial_ma_oracle(&|r| fr.eval_radial(r), *radius, self.grid.dim())
                    .in_module("ma")?;
                let err = self
                    .grid
                    .interior_nodes()
                    .map(|i| (sol.w.value(i) - oracle.w(self.grid.pos(i).norm())).abs())
                    .fold(0.0, f64::max);
                report["oracle_error"] = json!(err);
            }
        }
        let hess = discrete_hessian(&sol.w);
        let wt = cofactor_field(&hess);
        let (prod, det) = cofactor_identity_defect(&hess, &wt);
        let ell = ellipticity_check(&wt, &bounds, 1e-6);
        report["cofactor"] = json!({
            "product_defect": prod,
            "determinant_defect": det,
            "min_det": ell.min_det,
            "max_det": ell.max_det,
            "ellipticity_violations": ell.violations,
            "max_eigenvalue_ratio": ell.max_ratio,
        });
        write_scalar(&self.out, "w.csv", &sol.w)?;
        write_tensor(&self.out, "cofactor.csv", &wt)?;
        self.file("w.csv");
        self.file("cofactor.csv");
        self.result("ma", report);
        self.ma_w = Some(sol.w.clone());
        self.potential = Some((sol.w, wt));
        Ok(())
    }

    /// The potential `w` and its cofactor field `W`.
    fn potential(&mut self) -> Result<(ScalarField, TensorField), LabError> {
        if let Some(p) = &self.potential {
            return Ok(p.clone());
        }
        let source = self.cfg.w_source().expect("validated");
        let (w, wt, name) = match source {
            WSource::Ma => {
                self.ma()?;
                return Ok(self.potential.clone().expect("set by ma"));
            }
            WSource::Quadratic { matrix } => {
                let m = Sym2::new(matrix[0], matrix[1], matrix[2]);
                let w = ScalarField::from_fn(&self.grid, |p| 0.5 * m.quad(p));
                let adj = match self.grid.dim() {
                    lma_core::Dim::One => Sym2::IDENTITY,
                    lma_core::Dim::Two => m.adjugate(),
                };
                (w, TensorField::constant(&self.grid, adj), "quadratic")
            }
            WSource::Analytic { w } => {
                let e = expr(&w)?;
                let w = ScalarField::from_fn(&self.grid, |p| e.eval(p));
                let wt = cofactor_field(&discrete_hessian(&w));
                (w, wt, "analytic")
            }
            WSource::File { path } => {
                let w = read_scalar(Path::new(&path), &self.grid)?;
                let wt = cofactor_field(&discrete_hessian(&w));
                (w, wt, "file")
            }
        };
        let excluded = wt.excluded_interior();
        self.result(
            "potential",
            json!({ "source": name, "excluded_interior": excluded }),
        );
        self.potential = Some((w.clone(), wt.clone()));
        Ok((w, wt))
    }

    /// The obstacle problem. Writes `u.csv`, `contact_mask.csv` and
    /// `free_boundary.csv`.
    fn obstacle(&mut self) -> Result<(), LabError> {
        if self.obstacle.is_some() {
            return Ok(());
        }
        let (_, wt) = self.potential()?;
        let e = expr(self.cfg.obstacle.as_deref().expect("validated"))?;
        let phi = ScalarField::from_fn(&self.grid, |p| e.eval(p));
        let problem = ObstacleProblem::new(wt, phi).in_module("obstacle")?;
        let s = self.cfg.solver.clone();
        let params = ObstacleParams {
            tol_lcp: s.tol_lcp,
            omega: s.omega,
            max_iter: s.max_iter,
            tol_contact: s.tol_contact,
            stencil: OperatorOptions::default(),
        };
        self.tol("obstacle.tol_lcp", params.tol_lcp);
        self.tol("obstacle.tol_contact", params.contact_tol(&problem));
        self.tol("obstacle.max_iter", params.max_iter);
        let mut extra = json!({});
        let sol = match s.method {
            SolverKind::Psor => {
                self.tol("obstacle.omega", params.omega);
                solve_obstacle_psor(&problem, &params).in_module("obstacle")?
            }
            SolverKind::Activeset => {
                solve_obstacle_activeset(&problem, &params).in_module("obstacle")?
            }
            SolverKind::Perron => {
                let pp = PerronParams {
                    tol: s.tol_perron,
                    tol_lcp: s.tol_lcp,
                    max_sweeps: s.max_sweeps,
                    ..PerronParams::default()
                };
                self.tol("obstacle.tol_perron", pp.tol);
                self.tol("obstacle.max_sweeps", pp.max_sweeps);
                let v0 = default_supersolution(&problem, pp.stencil).in_module("obstacle")?;
                let res = perron_dropping(&problem, &v0, &pp).in_module("obstacle")?;
                extra = json!({
                    "sweeps": res.sweeps,
                    "last_change": res.last_change,
                    "max_increase": res.max_increase,
                });
                perron_solution(&problem, res.v, &params, res.sweeps)?
            }
        };
        for w in &sol.warnings {
            self.warn(format!("obstacle: {w:?}"));
        }
        let fb = match free_boundary(&sol) {
            Ok(fb) => Some(fb),
            Err(lma_core::Error::EmptyFreeBoundary) => {
                self.warn("obstacle: empty contact set, no free boundary".into());
                None
            }
            Err(e) => {
                return Err(LabError::Solver {
                    module: "obstacle",
                    source: e,
                })
            }
        };
        log::info!(
            "obstacle: {} in {} iterations, residual {:e}, {} contact nodes",
            sol.solver.as_str(),
            sol.iterations,
            sol.residual,
            sol.contact_count()
        );
        let mut report = json!({
            "solver": sol.solver.as_str(),
            "iterations": sol.iterations,
            "complementarity_residual": sol.residual,
            "contact_nodes": sol.contact_count(),
            "free_boundary_points": fb.as_ref().map_or(0, |f| f.points().len()),
            "free_boundary_pieces": fb.as_ref().map_or(0, |f| f.pieces.len()),
        });
        if s.method == SolverKind::Perron {
            report["perron"] = extra;
        }
        write_scalar(&self.out, "u.csv", &sol.u)?;
        write_contact(&self.out, &self.grid, &sol.contact)?;
        write_free_boundary(&self.out, fb.as_ref())?;
        for f in ["u.csv", "contact_mask.csv", "free_boundary.csv"] {
            self.file(f);
        }
        self.result("obstacle", report);
        self.obstacle = Some(Obstacle { sol, fb });
        Ok(())
    }

    /// Section radii against height. Writes `sections.csv`.
    fn sections(&mut self) -> Result<(), LabError> {
        let (w, _) = self.potential()?;
        let sc = self.cfg.sections.clone().expect("validated");
        let x0 = vec2(sc.x0);
        let probe = section_ball_probe(&w, x0, &sc.heights).in_module("sections")?;
        let top = sc.heights.iter().copied().fold(0.0, f64::max);
        let eng = engulfing(&w, x0, top).in_module("sections")?;
        let mut t = Table::create(
            &self.out,
            "sections.csv",
            &["height", "inradius", "circumradius"],
        )?;
        for r in &probe.records {
            t.nums(&[r.height, r.inradius, r.circumradius])?;
        }
        t.finish()?;
        self.file("sections.csv");
        log::info!(
            "sections: sigma = {:.4}, C1 = {:.4}, C2 = {:.4}",
            probe.sigma,
            probe.c1,
            probe.c2
        );
        self.result(
            "sections",
            json!({
                "sigma": probe.sigma,
                "c1": probe.c1,
                "c2": probe.c2,
                "outer_fit": fit_json(&probe.outer_fit),
                "inner_fit": fit_json(&probe.inner_fit),
                "engulfing": { "height": top, "half_gauge": eng.half_gauge, "beta": eng.beta },
            }),
        );
        Ok(())
    }

    /// Harnack quotients for random positive boundary data. Writes
    /// `harnack.csv`.
    fn harnack(&mut self) -> Result<(), LabError> {
        let (w, wt) = self.potential()?;
        let hc = self.cfg.harnack.clone().expect("validated");
        let x0 = vec2(hc.x0);
        let reach = extract_section(&w, x0, 2.0 * hc.height)
            .in_module("sections")?
            .circumradius();
        let one_d = self.grid.dim() == lma_core::Dim::One;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(HARNACK_STREAM);
        let mut t = Table::create(
            &self.out,
            "harnack.csv",
            &["draw", "quotient", "sup", "inf", "unknowns"],
        )?;
        let mut worst: f64 = 0.0;
        for k in 0..hc.draws {
            let bumps: Vec<(Vec2, f64)> = (0..4)
                .map(|_| {
                    let c = Vec2::new(
                        rng.gen_range(-1.0..1.0),
                        if one_d { 0.0 } else { rng.gen_range(-1.0..1.0) },
                    );
                    (x0 + c.scale(reach), rng.gen_range(0.0..1.0))
                })
                .collect();
            let width = 2.0 * (0.3 * reach).powi(2);
            let data = move |p: Vec2| {
                0.1 + bumps
                    .iter()
                    .map(|(c, a)| a * (-(p - *c).norm2() / width).exp())
                    .sum::<f64>()
            };
            let q = harnack_quotient(&wt, &w, x0, hc.height, &data).in_module("sections")?;
            worst = worst.max(q.quotient);
            t.row([
                k.to_string(),
                crate::output::num(q.quotient),
                crate::output::num(q.sup),
                crate::output::num(q.inf),
                q.unknowns.to_string(),
            ])?;
        }
        t.finish()?;
        self.file("harnack.csv");
        log::info!(
            "harnack: largest quotient {worst:.4} over {} draws",
            hc.draws
        );
        self.result(
            "harnack",
            json!({ "height": hc.height, "draws": hc.draws, "max_quotient": worst }),
        );
        Ok(())
    }

    /// Iterated normalization of nested sections. Writes
    /// `normalization.csv`.
    fn normalization(&mut self) -> Result<(), LabError> {
        let (w, _) = self.potential()?;
        let nc = self.cfg.normalization.clone().expect("validated");
        let params = IterationParams {
            h0: nc.h0,
            theta: nc.theta,
            eps: nc.eps,
            k_max: nc.k_max,
            c_cfg: nc.c_cfg,
            picture_cells: nc.picture_cells,
            ..IterationParams::default()
        };
        self.tol("normalization.pinch_slack", params.pinch_slack);
        self.tol("normalization.min_cells", params.min_cells);
        let run = iterate_normalization(&w, vec2(nc.x0), &params).in_module("sections")?;
        if let Some(why) = &run.stopped {
            self.warn(format!("normalization stopped early: {why}"));
        }
        let deltas: Vec<f64> = run.steps.iter().map(|s| s.delta).collect();
        let fit = fit_recursion(&deltas, nc.h0, nc.eps).in_module("sections")?;
        let (lo, hi) = a_bounds(&run.steps, nc.h0, nc.theta);
        let mut t = Table::create(
            &self.out,
            "normalization.csv",
            &[
                "k",
                "delta_k",
                "r_in",
                "r_out",
                "A11",
                "A12",
                "A22",
                "offset_x",
                "offset_y",
                "cells_across",
                "profile",
            ],
        )?;
        for (s, p) in run.steps.iter().zip(&fit.profile) {
            let mut row = vec![s.k.to_string()];
            row.extend(
                [
                    s.delta,
                    s.r_in,
                    s.r_out,
                    s.a.a11,
                    s.a.a12,
                    s.a.a22,
                    s.offset.x,
                    s.offset.y,
                    s.cells_across,
                    *p,
                ]
                .iter()
                .map(|v| crate::output::num(*v)),
            );
            t.row(row)?;
        }
        t.finish()?;
        self.file("normalization.csv");
        self.result(
            "normalization",
            json!({
                "steps": run.steps.len(),
                "stopped": run.stopped,
                "det0": run.det0,
                "pinch": run.pinch,
                "fit_c": fit.c,
                "dominated": fit.dominated,
                "fit_residual": fit.residual,
                "a_bounds": { "lower": lo, "upper": hi },
            }),
        );
        Ok(())
    }

    /// Gradient regularity at the free boundary. Writes `exponent_fit.csv`
    /// and `growth.csv` on top of the obstacle artifacts.
    fn holder(&mut self) -> Result<(), LabError> {
        self.obstacle()?;
        let (w, _) = self.potential()?;
        let hc = self.cfg.holder.clone().expect("validated");
        let ob = self.obstacle.as_ref().expect("solved");
        let fb_points = ob
            .fb
            .as_ref()
            .map(|f| f.points())
            .filter(|p| !p.is_empty())
            .ok_or(LabError::Solver {
                module: "regularity",
                source: lma_core::Error::EmptyFreeBoundary,
            })?;
        let target = vec2(hc.anchor);
        let anchor = *fb_points
            .iter()
            .min_by(|a, b| (**a - target).norm2().total_cmp(&(**b - target).norm2()))
            .expect("nonempty");
        let (u, phi, tol_contact) = (ob.sol.u.clone(), ob.sol.phi().clone(), ob.sol.tol_contact);

        let fit =
            holder_exponent(&u, &phi, anchor, &hc.radii, tol_contact).in_module("regularity")?;
        let mut t = Table::create(&self.out, "exponent_fit.csv", &["r", "M"])?;
        for (r, m) in fit.radii.iter().zip(&fit.values) {
            t.nums(&[*r, *m])?;
        }
        t.finish()?;

        let growth = if hc.heights.is_empty() {
            Vec::new()
        } else {
            growth_check(&u, &phi, &w, anchor, &hc.heights).in_module("regularity")?
        };
        let mut t = Table::create(&self.out, "growth.csv", &["h", "kappa", "s", "ratio"])?;
        for g in &growth {
            let ratio = g.ratio.map_or_else(String::new, crate::output::num);
            t.row([
                crate::output::num(g.height),
                crate::output::num(g.kappa),
                crate::output::num(g.s),
                ratio,
            ])?;
        }
        t.finish()?;

        let mismatch = gradient_mismatch(&u, &phi, &fb_points).in_module("regularity")?;
        let pairs = self.sample_pairs(&u, &fb_points, &hc)?;
        let modulus = two_case_modulus(&u, &phi, &fb_points, &pairs, hc.gamma, tol_contact)
            .in_module("regularity")?;
        self.file("exponent_fit.csv");
        self.file("growth.csv");
        log::info!(
            "holder: alpha_hat = {:.4} ± {:.4} at ({:.4}, {:.4})",
            fit.alpha,
            fit.band,
            anchor.x,
            anchor.y
        );
        self.result(
            "holder",
            json!({
                "anchor": [anchor.x, anchor.y],
                "alpha_hat": fit.alpha,
                "alpha_band": fit.band,
                "fit_residual": fit.fit.residual,
                "alpha_theory": alpha_of_theta(hc.theta),
                "theta": hc.theta,
                "gamma": hc.gamma,
                "free_boundary_gradient_mismatch": mismatch,
                "growth_max_ratio": growth.iter().filter_map(|g| g.ratio).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r)))),
                "seminorms": {
                    "case1": modulus.case1,
                    "case1_pairs": modulus.case1_pairs,
                    "case2": modulus.case2,
                    "case2_pairs": modulus.case2_pairs,
                    "skipped": modulus.skipped,
                    "route_constant": modulus.route_constant,
                },
            }),
        );
        Ok(())
    }

    /// Point pairs near the free boundary where the gradient can be sampled.
    fn sample_pairs(
        &self,
        u: &ScalarField,
        fb: &[Vec2],
        hc: &crate::config::HolderConfig,
    ) -> Result<Vec<(Vec2, Vec2)>, LabError> {
        let grad = GradientSampler::new(u).in_module("regularity")?;
        let one_d = self.grid.dim() == lma_core::Dim::One;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(HOLDER_STREAM);
        let jitter = |q: Vec2, rng: &mut ChaCha8Rng| {
            let d = Vec2::new(
                rng.gen_range(-1.0..1.0),
                if one_d { 0.0 } else { rng.gen_range(-1.0..1.0) },
            );
            q + d.scale(hc.pair_spread)
        };
        let mut pairs = Vec::with_capacity(hc.pairs);
        let mut attempts = 0;
        while pairs.len() < hc.pairs && attempts < 100 * hc.pairs.max(1) {
            attempts += 1;
            let q = fb[rng.gen_range(0..fb.len())];
            let (a, b) = (jitter(q, &mut rng), jitter(q, &mut rng));
            if (a - b).norm() > 0.0 && grad.at(a).is_some() && grad.at(b).is_some() {
                pairs.push((a, b));
            }
        }
        Ok(pairs)
    }
}

/// Wraps a Perron limit as a complementarity solution so the downstream
/// steps see one type.
fn perron_solution(
    problem: &ObstacleProblem,
    v: ScalarField,
    params: &ObstacleParams,
    sweeps: usize,
) -> Result<LcpSolution, LabError> {
    LcpSolution::from_field(problem, v, Solver::Perron, sweeps, params).in_module("obstacle")
}

fn fit_json(f: &lma_core::fit::LinearFit) -> Value {
    json!({ "slope": f.slope, "intercept": f.intercept, "residual": f.residual, "slope_stderr": f.slope_stderr })
}
