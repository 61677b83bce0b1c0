//! Approximate Hamilton-Jacobi solutions via the sampled inf-convolution,
//! and solution-quality measurement by the PDE residual.
//!
//! For `H(v) = ||v||_p^p / p` the solution of `du/dt + H(grad u) = 0`,
//! `u(.,0) = f`, is the inf-convolution of `f` with `g_t = t H*(./t)`,
//! `H*(w) = ||w||_q^q / q`, `1/p + 1/q = 1`. The solution estimate at
//! `(x,t)` plugs the sampled argmin into `f(y) + g_t(y - x)`; the residual
//! `|du/dt + H(grad u)|` is formed from central finite differences of that
//! estimate.
//!
//! Each stencil evaluation uses its own derived substream (fresh draws).
//! Re-using one batch across the stencil looks attractive (common random
//! numbers), but a frozen batch with collapsed weights reduces the
//! estimate to `f(y*) + g_t(y* - x)` for a fixed sample `y*`, which solves
//! the PDE exactly at every point regardless of how bad the estimate is
//! (it is a Hopf-Lax cone), so the residual would report near zero for
//! the starved small-N / small-delta cells. Independent draws keep the
//! residual an honest measure of estimator quality. The finite-difference
//! step therefore also averages Monte Carlo noise; the default 0.05
//! balances that noise against stencil truncation error.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::{func, DomainBox, Objective};
use crate::prox::infconv_argmin;
use crate::rng::RngStream;
use crate::samplers::ProposalSpec;

#[derive(Debug, Clone)]
pub struct HJConfig {
    /// Hamiltonian exponent; must exceed 1 so the conjugate exponent
    /// `q = p/(p-1)` is finite.
    pub p: f64,
    pub dim: usize,
    pub delta: f64,
    pub n_samples: usize,
    pub proposal_box: DomainBox,
    pub n_eval_points: usize,
    pub t_range: (f64, f64),
    pub fd_step: f64,
}

impl HJConfig {
    pub fn new(p: f64, dim: usize, delta: f64, n_samples: usize) -> Result<Self> {
        let cfg = Self {
            p,
            dim,
            delta,
            n_samples,
            proposal_box: DomainBox::centered(dim, 10.0)?,
            n_eval_points: 1000,
            t_range: (0.1, 1.0),
            fd_step: 0.05,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "q undefined, require p > 1 (got p = {})",
                self.p
            )));
        }
        if !(self.delta > 0.0) || self.n_samples == 0 || !(self.fd_step > 0.0) {
            return Err(Error::InvalidConfig(
                "hj config needs delta > 0, n_samples >= 1, fd_step > 0".into(),
            ));
        }
        if self.proposal_box.dim() != self.dim {
            return Err(Error::InvalidConfig(
                "proposal box dimension does not match".into(),
            ));
        }
        if !(self.t_range.0 > 0.0 && self.t_range.1 > self.t_range.0) {
            return Err(Error::InvalidConfig("t range must satisfy 0 < t0 < t1".into()));
        }
        Ok(())
    }

    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// `g(v) = t H*(v/t)` with `H*(w) = ||w||_q^q / q`, `q = p/(p-1)`.
pub fn conjugate_g(p: f64, t: f64, v: &[f64]) -> f64 {
    let q = p / (p - 1.0);
    if q == 2.0 {
        // self-conjugate case, exact
        v.iter().map(|&vi| vi * vi).sum::<f64>() / (2.0 * t)
    } else {
        let s: f64 = v.iter().map(|&vi| (vi / t).abs().powf(q)).sum();
        t * s / q
    }
}

/// `H(v) = ||v||_p^p / p`.
pub fn hamiltonian(p: f64, v: &[f64]) -> f64 {
    if p == 2.0 {
        0.5 * v.iter().map(|&vi| vi * vi).sum::<f64>()
    } else {
        v.iter().map(|&vi| vi.abs().powf(p)).sum::<f64>() / p
    }
}

/// Sampled Hopf-Lax solution estimate
/// `u(x,t) = f(y) + g_t(y - x)` at the sampled inf-convolution argmin `y`,
/// with a uniform proposal over the configured box.
pub fn hj_solution(
    f: &dyn Objective,
    x: &[f64],
    t: f64,
    cfg: &HJConfig,
    rng: &RngStream,
) -> Result<f64> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::InvalidConfig(format!("t must be positive, got {t}")));
    }
    let p = cfg.p;
    let g = func(cfg.dim, move |v: &[f64]| conjugate_g(p, t, v));
    let prop = ProposalSpec::UniformBox(cfg.proposal_box.clone());
    let est = infconv_argmin(f, &g, x, cfg.delta, &prop, cfg.n_samples, rng)?;
    let diff: Vec<f64> = est.point.iter().zip(x).map(|(&y, &xi)| y - xi).collect();
    // g is even, so g(y - x) = g(x - y)
    Ok(f.eval(&est.point) + conjugate_g(p, t, &diff))
}

/// Central-difference HJ residual of an arbitrary solution field `u`:
/// `|du/dt + H(grad u)|` with step `fd_step`. Stencil order is fixed
/// (t+, t-, then x per coordinate), so stochastic `u`'s draw sequence is
/// reproducible.
pub fn hj_residual_of(
    mut u: impl FnMut(&[f64], f64) -> Result<f64>,
    p: f64,
    x: &[f64],
    t: f64,
    fd_step: f64,
) -> Result<f64> {
    let h = fd_step;
    let dt = (u(x, t + h)? - u(x, t - h)?) / (2.0 * h);
    let mut grad = vec![0.0; x.len()];
    let mut xs = x.to_vec();
    for i in 0..x.len() {
        xs[i] = x[i] + h;
        let up = u(&xs, t)?;
        xs[i] = x[i] - h;
        let um = u(&xs, t)?;
        xs[i] = x[i];
        grad[i] = (up - um) / (2.0 * h);
    }
    Ok((dt + hamiltonian(p, &grad)).abs())
}

/// HJ residual of the sampled solution at `(x, t)`.
///
/// Requires `x` at least `fd_step` interior to the proposal box and `t`
/// interior to the configured time range. Each of the `2 + 2d` stencil
/// evaluations runs on its own substream derived from `rng`; the result
/// is deterministic given `(seed, config)`.
pub fn hj_residual(
    f: &dyn Objective,
    x: &[f64],
    t: f64,
    cfg: &HJConfig,
    rng: &RngStream,
) -> Result<f64> {
    cfg.validate()?;
    let h = cfg.fd_step;
    let interior = x
        .iter()
        .zip(cfg.proposal_box.lo().iter().zip(cfg.proposal_box.hi()))
        .all(|(&xi, (&lo, &hi))| xi - h >= lo && xi + h <= hi);
    if !interior {
        return Err(Error::InvalidConfig(
            "x must be interior to the proposal box by at least fd_step".into(),
        ));
    }
    if !(t - h > 0.0) {
        return Err(Error::InvalidConfig(
            "t - fd_step must stay positive".into(),
        ));
    }
    let mut stencil_idx = 0u64;
    hj_residual_of(
        |xp, tp| {
            let sub = rng.derive(stencil_idx);
            stencil_idx += 1;
            hj_solution(f, xp, tp, cfg, &sub)
        },
        cfg.p,
        x,
        t,
        h,
    )
}

/// One row of the residual sweep: percentiles are over the residuals at
/// this repetition's evaluation points; evaluations that failed with
/// degenerate weights are excluded and counted in `missing`.
#[derive(Debug, Clone)]
pub struct HjSweepRow {
    pub p: f64,
    pub dim: usize,
    pub delta: f64,
    pub n_samples: usize,
    pub rep: usize,
    pub percentile20: f64,
    pub median: f64,
    pub percentile80: f64,
    pub mean: f64,
    pub missing: usize,
}

/// Linear-interpolation percentile of a sorted slice; `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// The shared `(x, t)` evaluation points for one repetition, drawn
/// uniformly over the box shrunk by `fd_step` (and the time range likewise)
/// so every stencil stays in-domain. Shared across sweep cells within a
/// repetition to pair the comparisons.
pub fn eval_points(cfg: &HJConfig, rep: usize, rng: &RngStream) -> Vec<(Vec<f64>, f64)> {
    let mut r = rng.derive(0x9e77).derive(rep as u64);
    let h = cfg.fd_step;
    let (t0, t1) = cfg.t_range;
    (0..cfg.n_eval_points)
        .map(|_| {
            let x: Vec<f64> = cfg
                .proposal_box
                .lo()
                .iter()
                .zip(cfg.proposal_box.hi())
                .map(|(&lo, &hi)| r.uniform(lo + h, hi - h))
                .collect();
            let t = r.uniform(t0 + h, t1 - h);
            (x, t)
        })
        .collect()
}

fn cell_residuals(
    f: &dyn Objective,
    cfg: &HJConfig,
    points: &[(Vec<f64>, f64)],
    cell_rng: &RngStream,
) -> (Vec<f64>, usize) {
    let results: Vec<Result<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(i, (x, t))| hj_residual(f, x, *t, cfg, &cell_rng.derive(i as u64)))
        .collect();
    let mut vals = Vec::with_capacity(points.len());
    let mut missing = 0usize;
    for r in results {
        match r {
            Ok(v) => vals.push(v),
            Err(Error::DegenerateWeights(_)) => missing += 1,
            Err(e) => {
                // configuration errors should not be silently dropped
                panic!("sweep cell failed: {e}");
            }
        }
    }
    (vals, missing)
}

/// Residual sweep over a `(delta, N)` grid: for each cell and repetition,
/// evaluates residuals at the repetition's shared points and aggregates
/// 20th/50th/80th percentiles and the mean.
pub fn hj_sweep(
    f: &dyn Objective,
    cfg: &HJConfig,
    delta_grid: &[f64],
    n_grid: &[usize],
    reps: usize,
    rng: &RngStream,
) -> Result<Vec<HjSweepRow>> {
    cfg.validate()?;
    if delta_grid.is_empty() || n_grid.is_empty() || reps == 0 {
        return Err(Error::InvalidConfig(
            "sweep needs nonempty delta and N grids and reps >= 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for rep in 0..reps {
        let points = eval_points(cfg, rep, rng);
        for (di, &delta) in delta_grid.iter().enumerate() {
            for (ni, &n) in n_grid.iter().enumerate() {
                let mut cell_cfg = cfg.clone();
                cell_cfg.delta = delta;
                cell_cfg.n_samples = n;
                let cell_rng = rng
                    .derive(1 + rep as u64)
                    .derive(di as u64)
                    .derive(ni as u64);
                let (mut vals, missing) = cell_residuals(f, &cell_cfg, &points, &cell_rng);
                vals.sort_by(|a, b| a.partial_cmp(b).expect("residuals are not NaN"));
                let mean = if vals.is_empty() {
                    f64::NAN
                } else {
                    vals.iter().sum::<f64>() / vals.len() as f64
                };
                rows.push(HjSweepRow {
                    p: cfg.p,
                    dim: cfg.dim,
                    delta,
                    n_samples: n,
                    rep,
                    percentile20: percentile(&vals, 0.2),
                    median: percentile(&vals, 0.5),
                    percentile80: percentile(&vals, 0.8),
                    mean,
                    missing,
                });
            }
        }
    }
    Ok(rows)
}

/// Pooled residuals for one `(delta, N)` cell across repetitions, using
/// the same point/stream layout as [`hj_sweep`]. Convenience for ordering
/// tests that compare pooled medians.
pub fn hj_cell_pooled(
    f: &dyn Objective,
    cfg: &HJConfig,
    delta_grid: &[f64],
    n_grid: &[usize],
    delta_index: usize,
    n_index: usize,
    reps: usize,
    rng: &RngStream,
) -> (Vec<f64>, usize) {
    let mut all = Vec::new();
    let mut missing = 0usize;
    for rep in 0..reps {
        let points = eval_points(cfg, rep, rng);
        let mut cell_cfg = cfg.clone();
        cell_cfg.delta = delta_grid[delta_index];
        cell_cfg.n_samples = n_grid[n_index];
        let cell_rng = rng
            .derive(1 + rep as u64)
            .derive(delta_index as u64)
            .derive(n_index as u64);
        let (vals, miss) = cell_residuals(f, &cell_cfg, &points, &cell_rng);
        all.extend(vals);
        missing += miss;
    }
    all.sort_by(|a, b| a.partial_cmp(b).expect("residuals are not NaN"));
    (all, missing)
}

/// The L1 initial condition used by the PDE experiments.
pub fn l1_norm(dim: usize) -> impl Objective {
    func(dim, |x: &[f64]| x.iter().map(|v| v.abs()).sum())
}
