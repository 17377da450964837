//! Experiment configuration: JSON, unknown keys rejected.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    SolveMa,
    SolveObstacle,
    ProbeSections,
    ProbeHarnack,
    ProbeNormalization,
    ProbeHolder,
    FullPipeline,
}

impl Pipeline {
    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::SolveMa => "solve-ma",
            Pipeline::SolveObstacle => "solve-obstacle",
            Pipeline::ProbeSections => "probe-sections",
            Pipeline::ProbeHarnack => "probe-harnack",
            Pipeline::ProbeNormalization => "probe-normalization",
            Pipeline::ProbeHolder => "probe-holder",
            Pipeline::FullPipeline => "full-pipeline",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Pipeline to run. Optional when a subcommand names it; the two must
    /// agree otherwise.
    #[serde(default)]
    pub pipeline: Option<Pipeline>,
    /// Seed for every randomized sampling step.
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output_dir: Option<String>,
    pub domain: DomainConfig,
    pub grid: GridConfig,
    /// Monge-Ampère density.
    #[serde(default)]
    pub f: Option<DensityConfig>,
    /// Where the potential `w` comes from. Defaults to the Monge-Ampère
    /// solve when `f` is given.
    #[serde(default)]
    pub w_source: Option<WSource>,
    /// Obstacle `φ(x, y)`.
    #[serde(default)]
    pub obstacle: Option<String>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sections: Option<SectionsConfig>,
    #[serde(default)]
    pub harnack: Option<HarnackConfig>,
    #[serde(default)]
    pub normalization: Option<NormalizationConfig>,
    #[serde(default)]
    pub holder: Option<HolderConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    Ball {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Interval {
        a: f64,
        b: f64,
    },
    Rectangle {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    /// Polygon with `k` vertices inscribed in an axis-aligned ellipse.
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        semi_x: f64,
        semi_y: f64,
        k: usize,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Grid spacing.
    pub h: f64,
}

/// Expressions use the variables `x`, `y` and `r`. Integer literals divide
/// as integers, so write `0.5` rather than `1/2`.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityConfig {
    Constant {
        value: f64,
    },
    /// A function of `r` alone. On a ball centred at the origin the report
    /// includes the error against the radial quadrature solution.
    Radial {
        expr: String,
    },
    Expression {
        expr: String,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WSource {
    /// Solve `det D²w = f` with the density `f`.
    Ma,
    /// `w = ½xᵀMx` with `M = [m11, m12, m22]`; `W = adj M` exactly.
    Quadratic {
        #[serde(default = "identity")]
        matrix: [f64; 3],
    },
    /// Closed-form `w`; `W` is the cofactor of its discrete Hessian.
    Analytic { w: String },
    /// A `w.csv` written by an earlier run with the same domain and grid.
    File { path: String },
}

fn identity() -> [f64; 3] {
    [1.0, 0.0, 1.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Psor,
    Activeset,
    Perron,
}

/// Tolerances and iteration caps of every solver.
#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_ma: f64,
    pub tol_convex: f64,
    pub max_newton: usize,
    /// Wide-stencil width, 1 to 3.
    pub stencil_width: u8,
    /// Obstacle solver.
    pub method: SolverKind,
    /// PSOR relaxation.
    pub omega: f64,
    pub tol_lcp: f64,
    pub max_iter: usize,
    /// Contact tolerance; default `1e-10·‖φ‖∞`.
    pub tol_contact: Option<f64>,
    /// Perron stopping tolerance on the per-sweep decrease.
    pub tol_perron: f64,
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_ma: 1e-8,
            tol_convex: 1e-10,
            max_newton: 200,
            stencil_width: 2,
            method: SolverKind::Activeset,
            omega: 1.5,
            tol_lcp: 1e-8,
            max_iter: 1_000_000,
            tol_contact: None,
            tol_perron: 1e-10,
            max_sweeps: 5000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SectionsConfig {
    #[serde(default)]
    pub x0: [f64; 2],
    pub heights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HarnackConfig {
    #[serde(default)]
    pub x0: [f64; 2],
    /// Height `h`: the solve runs on `S_2h`, the quotient is taken on `S_h`.
    pub height: f64,
    /// Number of random positive boundary data.
    #[serde(default = "d_draws")]
    pub draws: usize,
}

fn d_draws() -> usize {
    10
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NormalizationConfig {
    #[serde(default)]
    pub x0: [f64; 2],
    #[serde(default = "d_h0")]
    pub h0: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "d_k_max")]
    pub k_max: usize,
    #[serde(default = "d_c_cfg")]
    pub c_cfg: f64,
    #[serde(default = "d_picture_cells")]
    pub picture_cells: usize,
}

fn d_h0() -> f64 {
    0.125
}
fn d_theta() -> f64 {
    0.2
}
fn d_k_max() -> usize {
    4
}
fn d_c_cfg() -> f64 {
    1.0
}
fn d_picture_cells() -> usize {
    40
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HolderConfig {
    /// The free-boundary point nearest to this target is the anchor `y₀`.
    #[serde(default = "d_anchor")]
    pub anchor: [f64; 2],
    pub radii: Vec<f64>,
    /// Section heights for the growth check.
    #[serde(default)]
    pub heights: Vec<f64>,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    /// Reported beside the measurement as `(1 − 5θ)/(1 + θ)`.
    #[serde(default = "d_theta")]
    pub theta: f64,
    /// Random point pairs for the two-case modulus.
    #[serde(default = "d_pairs")]
    pub pairs: usize,
    /// Pairs are drawn within this distance of the free boundary.
    #[serde(default = "d_spread")]
    pub pair_spread: f64,
}

fn d_anchor() -> [f64; 2] {
    [1.0, 0.0]
}
fn d_gamma() -> f64 {
    0.9
}
fn d_pairs() -> usize {
    200
}
fn d_spread() -> f64 {
    0.1
}

impl ExperimentConfig {
    /// Parses JSON. Errors carry the dotted path of the offending key.
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.into_inner().to_string();
            // serde reports an unknown key at its parent; name the key itself
            if let Some(key) = message
                .strip_prefix("unknown field `")
                .and_then(|s| s.split('`').next())
            {
                path = if path == "." {
                    key.to_owned()
                } else {
                    format!("{path}.{key}")
                };
            }
            LabError::Schema { path, message }
        })
    }

    /// The source of `w`, with the default applied.
    pub fn w_source(&self) -> Option<WSource> {
        self.w_source
            .clone()
            .or_else(|| self.f.as_ref().map(|_| WSource::Ma))
    }

    /// Checks that the blocks `pipeline` needs are present, that values are
    /// in range and that every expression compiles.
    pub fn validate(&self, pipeline: Pipeline) -> Result<(), LabError> {
        use Pipeline::*;
        if let Some(p) = self.pipeline {
            if p != pipeline {
                return Err(schema(
                    "pipeline",
                    format!(
                        "config names {} but {} was requested",
                        p.as_str(),
                        pipeline.as_str()
                    ),
                ));
            }
        }
        if !(self.grid.h > 0.0 && self.grid.h.is_finite()) {
            return Err(schema("grid.h", "must be positive"));
        }
        match &self.f {
            Some(DensityConfig::Constant { value }) if !(*value > 0.0) => {
                return Err(schema("f.value", "must be positive"))
            }
            Some(DensityConfig::Radial { expr } | DensityConfig::Expression { expr }) => {
                check_expr("f.expr", expr)?
            }
            _ => {}
        }
        if pipeline == SolveMa && self.f.is_none() {
            return Err(schema("f", "required by solve-ma"));
        }
        if pipeline != SolveMa {
            match self.w_source() {
                None => {
                    return Err(schema(
                        "w_source",
                        format!("required by {}", pipeline.as_str()),
                    ))
                }
                Some(WSource::Ma) if self.f.is_none() => {
                    return Err(schema("f", "required by w_source `ma`"))
                }
                Some(WSource::Analytic { w }) => check_expr("w_source.w", &w)?,
                _ => {}
            }
        }
        if let Some(phi) = &self.obstacle {
            check_expr("obstacle", phi)?;
        } else if matches!(pipeline, SolveObstacle | ProbeHolder | FullPipeline) {
            return Err(schema(
                "obstacle",
                format!("required by {}", pipeline.as_str()),
            ));
        }
        let required = match pipeline {
            ProbeSections => Some(("sections", self.sections.is_some())),
            ProbeHarnack => Some(("harnack", self.harnack.is_some())),
            ProbeNormalization => Some(("normalization", self.normalization.is_some())),
            ProbeHolder | FullPipeline => Some(("holder", self.holder.is_some())),
            _ => None,
        };
        if let Some((block, false)) = required {
            return Err(schema(block, format!("required by {}", pipeline.as_str())));
        }
        let s = &self.solver;
        if !(1..=3).contains(&s.stencil_width) {
            return Err(schema("solver.stencil_width", "must be 1, 2 or 3"));
        }
        if !(s.omega > 0.0 && s.omega < 2.0) {
            return Err(schema("solver.omega", "must lie in (0, 2)"));
        }
        for (key, v) in [
            ("solver.tol_ma", s.tol_ma),
            ("solver.tol_lcp", s.tol_lcp),
            ("solver.tol_perron", s.tol_perron),
        ] {
            if !(v > 0.0) {
                return Err(schema(key, "must be positive"));
            }
        }
        if let Some(sec) = &self.sections {
            if sec.heights.len() < 2 || sec.heights.iter().any(|h| !(*h > 0.0)) {
                return Err(schema(
                    "sections.heights",
                    "need at least two positive heights",
                ));
            }
        }
        if let Some(h) = &self.harnack {
            if !(h.height > 0.0) {
                return Err(schema("harnack.height", "must be positive"));
            }
            if h.draws == 0 {
                return Err(schema("harnack.draws", "must be positive"));
            }
        }
        if let Some(h) = &self.holder {
            if h.radii.len() < 4 || h.radii.iter().any(|r| !(*r > 0.0)) {
                return Err(schema("holder.radii", "need at least four positive radii"));
            }
            if h.heights.iter().any(|r| !(*r > 0.0)) {
                return Err(schema("holder.heights", "must be positive"));
            }
            if !(0.0..=1.0).contains(&h.gamma) {
                return Err(schema("holder.gamma", "must lie in [0, 1]"));
            }
            if !(h.theta > 0.0 && h.theta <= 0.2) {
                return Err(schema("holder.theta", "must lie in (0, 1/5]"));
            }
            if !(h.pair_spread > 0.0) {
                return Err(schema("holder.pair_spread", "must be positive"));
            }
        }
        Ok(())
    }
}

fn schema(path: &str, message: impl Into<String>) -> LabError {
    LabError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn check_expr(path: &str, text: &str) -> Result<(), LabError> {
    Expr::parse(text).map(|_| ()).map_err(|m| schema(path, m))
}

/// JSON schema of the configuration file.
pub fn json_schema() -> String {
    let s = schemars::schema_for!(ExperimentConfig);
    serde_json::to_string_pretty(&s).expect("schema serializes") + "\n"
}
