//! Experiment configuration: a TOML file with a top-level experiment
//! selector and one parameter block per experiment kind. Validation
//! collects every problem at once rather than stopping at the first.

use serde::{Deserialize, Serialize};

use infconv::bpgd::Conditioning;
use infconv::rng::RngStream;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub output_path: String,
    #[serde(default)]
    pub hj_sweep: HjSweepBlock,
    #[serde(default)]
    pub prox_point_grid: ProxPointBlock,
    #[serde(default)]
    pub rgf_compare: RgfCompareBlock,
    #[serde(default)]
    pub bpgd_compare: BpgdCompareBlock,
    #[serde(default)]
    pub oracle_convergence: OracleBlock,
    #[serde(default)]
    pub projection_demo: ProjectionBlock,
}

pub const EXPERIMENTS: [&str; 6] = [
    "hj_sweep",
    "prox_point_grid",
    "rgf_compare",
    "bpgd_compare",
    "oracle_convergence",
    "projection_demo",
];

fn default_delta_grid() -> Vec<f64> {
    // 10^-3 .. 10^0 in half-decade steps
    vec![
        1e-3,
        10f64.powf(-2.5),
        1e-2,
        10f64.powf(-1.5),
        1e-1,
        10f64.powf(-0.5),
        1.0,
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HjSweepBlock {
    pub p: f64,
    pub dim: usize,
    pub delta_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub n_eval_points: usize,
    pub reps: usize,
    pub fd_step: f64,
    pub box_half_width: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for HjSweepBlock {
    fn default() -> Self {
        Self {
            p: 2.0,
            dim: 2,
            delta_grid: default_delta_grid(),
            n_grid: vec![10, 1_000, 100_000],
            n_eval_points: 1000,
            reps: 10,
            fd_step: 0.05,
            box_half_width: 10.0,
            t_min: 0.1,
            t_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProxPointBlock {
    pub benchmarks: Vec<String>,
    pub dim: usize,
    pub n_grid: Vec<usize>,
    pub delta_grid: Vec<f64>,
    pub iters: usize,
    pub reps: usize,
    pub lambda: f64,
    pub x0_value: f64,
}

impl Default for ProxPointBlock {
    fn default() -> Self {
        Self {
            benchmarks: vec![
                "sphere".into(),
                "ellipsoidal".into(),
                "discus".into(),
                "rosenbrock".into(),
                "sharp_ridge".into(),
                "weierstrass".into(),
            ],
            dim: 10,
            n_grid: vec![10, 100, 1_000, 10_000],
            delta_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            iters: 100,
            reps: 3,
            lambda: 1.0,
            x0_value: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RgfCompareBlock {
    pub benchmarks: Vec<String>,
    pub dim: usize,
    pub n_samples: usize,
    pub iters: usize,
    pub reps: usize,
    pub lambda: f64,
    pub x0_value: f64,
    pub lpp_delta_grid: Vec<f64>,
    pub rgf_delta_grid: Vec<f64>,
    pub rgf_eta_grid: Vec<f64>,
    pub gd_eta_grid: Vec<f64>,
    pub gd_noise_grid: Vec<f64>,
}

impl Default for RgfCompareBlock {
    fn default() -> Self {
        Self {
            benchmarks: vec![
                "sphere".into(),
                "ellipsoidal".into(),
                "discus".into(),
                "rosenbrock".into(),
                "sharp_ridge".into(),
                "weierstrass".into(),
            ],
            dim: 10,
            n_samples: 1000,
            iters: 1000,
            reps: 3,
            lambda: 1.0,
            x0_value: 4.0,
            lpp_delta_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            rgf_delta_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            rgf_eta_grid: vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
            gd_eta_grid: vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
            gd_noise_grid: vec![0.0, 0.01, 0.1, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BpgdCompareBlock {
    pub n: usize,
    pub d: usize,
    pub conditioning: String,
    pub eta: f64,
    pub delta: f64,
    pub n_samples: usize,
    pub iters: usize,
    pub x0_value: f64,
    pub variants: Vec<String>,
}

impl Default for BpgdCompareBlock {
    fn default() -> Self {
        Self {
            n: 5,
            d: 5,
            conditioning: "well".into(),
            eta: 1e-5,
            delta: 2e-3,
            n_samples: 50_000,
            iters: 1000,
            x0_value: 1.0,
            variants: vec![
                "exact".into(),
                "laplace_burg".into(),
                "laplace_varmetric".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleBlock {
    /// Subset of {quartic_sin, sqrt_abs, weierstrass}.
    pub functions: Vec<String>,
    pub delta_grid: Vec<f64>,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self {
            functions: vec!["quartic_sin".into(), "sqrt_abs".into(), "weierstrass".into()],
            delta_grid: vec![1e-2, 1e-4, 1e-6],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionBlock {
    pub n_samples: usize,
    pub halfline_delta_grid: Vec<f64>,
    pub ball_delta_grid: Vec<f64>,
}

impl Default for ProjectionBlock {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            halfline_delta_grid: vec![1.0, 0.5, 0.25],
            ball_delta_grid: vec![0.016, 0.008, 0.004],
        }
    }
}

impl ExperimentConfig {
    /// Full validation without running; every error is reported.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            errs.push(format!(
                "experiment: unknown '{}' (one of {})",
                self.experiment,
                EXPERIMENTS.join(", ")
            ));
            return errs;
        }
        if self.output_path.is_empty() {
            errs.push("output_path: must be nonempty".into());
        }
        match self.experiment.as_str() {
            "hj_sweep" => {
                let b = &self.hj_sweep;
                if !(b.p > 1.0) {
                    errs.push(format!(
                        "hj_sweep.p: q undefined, require p > 1 (got {})",
                        b.p
                    ));
                }
                if b.delta_grid.is_empty() || b.delta_grid.iter().any(|d| !(*d > 0.0)) {
                    errs.push("hj_sweep.delta_grid: needs positive entries".into());
                }
                if b.n_grid.is_empty() || b.n_grid.iter().any(|n| *n == 0) {
                    errs.push("hj_sweep.n_grid: needs entries >= 1".into());
                }
                if b.reps == 0 || b.n_eval_points == 0 {
                    errs.push("hj_sweep: reps and n_eval_points must be >= 1".into());
                }
                if !(b.fd_step > 0.0) {
                    errs.push("hj_sweep.fd_step: must be positive".into());
                }
                if !(b.t_min > 0.0 && b.t_max > b.t_min + 2.0 * b.fd_step) {
                    errs.push("hj_sweep: need 0 < t_min and t_max > t_min + 2 fd_step".into());
                }
                if !(b.box_half_width > 2.0 * b.fd_step) {
                    errs.push("hj_sweep.box_half_width: too small for the stencil".into());
                }
            }
            "prox_point_grid" => {
                let b = &self.prox_point_grid;
                errs.extend(validate_benchmarks(&b.benchmarks, "prox_point_grid"));
                if b.dim < 2 {
                    errs.push("prox_point_grid.dim: must be >= 2".into());
                }
                if b.n_grid.is_empty() || b.delta_grid.is_empty() {
                    errs.push("prox_point_grid: n_grid and delta_grid must be nonempty".into());
                }
                if b.delta_grid.iter().any(|d| !(*d > 0.0)) || !(b.lambda > 0.0) {
                    errs.push("prox_point_grid: delta and lambda must be positive".into());
                }
                if b.iters == 0 || b.reps == 0 {
                    errs.push("prox_point_grid: iters and reps must be >= 1".into());
                }
            }
            "rgf_compare" => {
                let b = &self.rgf_compare;
                errs.extend(validate_benchmarks(&b.benchmarks, "rgf_compare"));
                if b.n_samples == 0 || b.iters == 0 || b.reps == 0 {
                    errs.push("rgf_compare: n_samples, iters, reps must be >= 1".into());
                }
                for (name, grid) in [
                    ("lpp_delta_grid", &b.lpp_delta_grid),
                    ("rgf_delta_grid", &b.rgf_delta_grid),
                    ("rgf_eta_grid", &b.rgf_eta_grid),
                    ("gd_eta_grid", &b.gd_eta_grid),
                ] {
                    if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0)) {
                        errs.push(format!("rgf_compare.{name}: needs positive entries"));
                    }
                }
                if b.gd_noise_grid.is_empty() || b.gd_noise_grid.iter().any(|v| *v < 0.0) {
                    errs.push("rgf_compare.gd_noise_grid: needs nonnegative entries".into());
                }
            }
            "bpgd_compare" => {
                let b = &self.bpgd_compare;
                if b.n == 0 || b.d == 0 {
                    errs.push("bpgd_compare: n and d must be >= 1".into());
                }
                let conditioning = match b.conditioning.as_str() {
                    "well" => Some(Conditioning::Well),
                    "ill" => Some(Conditioning::Ill),
                    other => {
                        errs.push(format!(
                            "bpgd_compare.conditioning: '{other}' is not 'well' or 'ill'"
                        ));
                        None
                    }
                };
                if b.conditioning == "ill" && b.n != b.d {
                    errs.push("bpgd_compare: rank-one instance needs n = d".into());
                }
                if !(b.delta > 0.0) || b.n_samples == 0 {
                    errs.push("bpgd_compare: delta must be positive, n_samples >= 1".into());
                }
                if !(b.x0_value > 0.0) {
                    errs.push("bpgd_compare.x0_value: must be strictly positive".into());
                }
                for v in &b.variants {
                    if infconv::bpgd::BpgdVariant::from_name(v).is_err() {
                        errs.push(format!("bpgd_compare.variants: unknown '{v}'"));
                    }
                }
                // The step-size constraint is checked against the actual
                // instance, which is deterministic given the seed.
                if let Some(c) = conditioning {
                    if b.n > 0 && b.d > 0 && (c == Conditioning::Well || b.n == b.d) {
                        match infconv::bpgd::gen_poisson_problem(
                            b.n,
                            b.d,
                            &RngStream::new(self.seed, 0),
                            c,
                        ) {
                            Ok((prob, _)) => {
                                if !(b.eta > 0.0) || b.eta * prob.l >= 1.0 {
                                    errs.push(format!(
                                        "bpgd_compare.eta: Bregman step size must satisfy \
                                         eta in (0, 1/L) with L = ||b||_1 = {} (got {})",
                                        prob.l, b.eta
                                    ));
                                }
                            }
                            Err(e) => errs.push(format!("bpgd_compare: {e}")),
                        }
                    }
                }
            }
            "oracle_convergence" => {
                let b = &self.oracle_convergence;
                for f in &b.functions {
                    if !["quartic_sin", "sqrt_abs", "weierstrass"].contains(&f.as_str()) {
                        errs.push(format!("oracle_convergence.functions: unknown '{f}'"));
                    }
                }
                if b.functions.is_empty() {
                    errs.push("oracle_convergence.functions: must be nonempty".into());
                }
                if b.delta_grid.is_empty() || b.delta_grid.iter().any(|d| !(*d > 0.0)) {
                    errs.push("oracle_convergence.delta_grid: needs positive entries".into());
                }
            }
            "projection_demo" => {
                let b = &self.projection_demo;
                if b.n_samples == 0 {
                    errs.push("projection_demo.n_samples: must be >= 1".into());
                }
                for (name, grid) in [
                    ("halfline_delta_grid", &b.halfline_delta_grid),
                    ("ball_delta_grid", &b.ball_delta_grid),
                ] {
                    if grid.is_empty() || grid.iter().any(|d| !(*d > 0.0)) {
                        errs.push(format!("projection_demo.{name}: needs positive entries"));
                    }
                }
            }
            _ => unreachable!(),
        }
        errs
    }
}

fn validate_benchmarks(names: &[String], block: &str) -> Vec<String> {
    let mut errs = Vec::new();
    if names.is_empty() {
        errs.push(format!("{block}.benchmarks: must be nonempty"));
    }
    for n in names {
        if infconv::benchmarks::Benchmark::from_name(n).is_err() {
            errs.push(format!("{block}.benchmarks: unknown '{n}'"));
        }
    }
    errs
}

pub fn load_config(path: &str) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config '{path}': {e}"))?;
    toml::from_str(&text).map_err(|e| format!("config parse error in '{path}': {e}"))
}
