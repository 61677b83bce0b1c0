//! Deterministic tensor-grid quadrature of the self-normalized ratio
//!
//! ```text
//! r(delta) = integral of h(x) exp(-phi(x)/delta) dx
//!            ------------------------------------------
//!            integral of   exp(-phi(x)/delta) dx
//! ```
//!
//! in one or two dimensions, used as ground truth for the Monte Carlo
//! estimators. The integrand is shifted by the grid minimum of `phi`
//! before exponentiation (the integral-side analogue of the softmax
//! shift); without it, `delta = 1e-6` underflows everywhere.
//!
//! The domain box stands in for an unbounded domain: choose it so that
//! `phi` at the boundary exceeds the minimum by a large multiple of
//! `delta`, which makes the truncated tail mass negligible.

use crate::error::{Error, Result};
use crate::objective::{DomainBox, Objective};

/// Successive-ratio agreement threshold for grid refinement.
pub const REFINE_TOL: f64 = 1e-9;

/// Default refinement cap (intervals per dimension).
pub const MAX_POINTS_PER_DIM: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone)]
pub struct QuadConfig {
    pub domain: DomainBox,
    /// Starting number of intervals per dimension (>= 64, even for Simpson;
    /// doubling preserves both).
    pub points_per_dim: usize,
    pub rule: QuadRule,
    /// Refinement cap. The default suits d=1; two-dimensional callers
    /// should cap far lower (the grid is squared).
    pub max_points_per_dim: usize,
}

impl QuadConfig {
    pub fn new(domain: DomainBox, points_per_dim: usize, rule: QuadRule) -> Result<Self> {
        let cfg = Self {
            domain,
            points_per_dim,
            rule,
            max_points_per_dim: MAX_POINTS_PER_DIM,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain.dim() > 2 {
            return Err(Error::InvalidConfig(
                "quadrature supports d <= 2 only; use the Monte Carlo estimators above that".into(),
            ));
        }
        if self.points_per_dim < 64 {
            return Err(Error::InvalidConfig(format!(
                "points_per_dim must be >= 64, got {}",
                self.points_per_dim
            )));
        }
        if self.rule == QuadRule::Simpson && self.points_per_dim % 2 != 0 {
            return Err(Error::InvalidConfig(
                "Simpson's rule needs an even interval count".into(),
            ));
        }
        if self.max_points_per_dim < self.points_per_dim {
            return Err(Error::InvalidConfig(
                "max_points_per_dim below points_per_dim".into(),
            ));
        }
        Ok(())
    }
}

/// Converged ratio plus the grid it was computed on.
#[derive(Debug, Clone)]
pub struct QuadEstimate {
    pub point: Vec<f64>,
    /// Intervals per dimension of the final grid.
    pub points_per_dim: usize,
}

fn rule_weight(rule: QuadRule, j: usize, n: usize, h: f64) -> f64 {
    match rule {
        QuadRule::Trapezoid => {
            if j == 0 || j == n {
                0.5 * h
            } else {
                h
            }
        }
        QuadRule::Simpson => {
            let c = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        }
    }
}

/// One tensor-grid evaluation of the ratio at `n` intervals per dim.
fn ratio_on_grid(
    phi: &dyn Objective,
    h: Option<&(dyn Fn(&[f64]) -> Vec<f64> + Sync)>,
    out_dim: usize,
    delta: f64,
    domain: &DomainBox,
    rule: QuadRule,
    n: usize,
) -> Result<Vec<f64>> {
    let d = domain.dim();
    let lo = domain.lo();
    let hi = domain.hi();
    match d {
        1 => {
            let step = (hi[0] - lo[0]) / n as f64;
            let vals: Vec<f64> = if n >= 8192 {
                use rayon::prelude::*;
                (0..n + 1)
                    .into_par_iter()
                    .with_min_len(2048)
                    .map(|j| phi.eval(&[lo[0] + j as f64 * step]))
                    .collect()
            } else {
                (0..=n)
                    .map(|j| phi.eval(&[lo[0] + j as f64 * step]))
                    .collect()
            };
            let m = vals.iter().copied().filter(|v| v.is_finite()).fold(
                f64::INFINITY,
                f64::min,
            );
            if !m.is_finite() {
                return Err(Error::DegenerateWeights(
                    "phi is infinite on the entire quadrature grid".into(),
                ));
            }
            let mut den = 0.0;
            let mut num = vec![0.0; out_dim];
            for (j, &v) in vals.iter().enumerate() {
                let e = ((m - v) / delta).exp();
                if e == 0.0 {
                    continue;
                }
                let x = lo[0] + j as f64 * step;
                let w = rule_weight(rule, j, n, step) * e;
                den += w;
                match h {
                    None => num[0] += w * x,
                    Some(hf) => {
                        for (acc, hv) in num.iter_mut().zip(hf(&[x])) {
                            *acc += w * hv;
                        }
                    }
                }
            }
            if den == 0.0 {
                return Err(Error::DegenerateWeights(
                    "quadrature denominator underflowed to zero".into(),
                ));
            }
            Ok(num.into_iter().map(|v| v / den).collect())
        }
        2 => {
            let step = [(hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64];
            let vals: Vec<f64> = if n >= 256 {
                use rayon::prelude::*;
                (0..n + 1)
                    .into_par_iter()
                    .map(|j0| {
                        let x0 = lo[0] + j0 as f64 * step[0];
                        (0..=n)
                            .map(|j1| phi.eval(&[x0, lo[1] + j1 as f64 * step[1]]))
                            .collect::<Vec<f64>>()
                    })
                    .flatten_iter()
                    .collect()
            } else {
                let mut v = Vec::with_capacity((n + 1) * (n + 1));
                for j0 in 0..=n {
                    let x0 = lo[0] + j0 as f64 * step[0];
                    for j1 in 0..=n {
                        v.push(phi.eval(&[x0, lo[1] + j1 as f64 * step[1]]));
                    }
                }
                v
            };
            let m = vals
                .iter()
                .copied()
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            if !m.is_finite() {
                return Err(Error::DegenerateWeights(
                    "phi is infinite on the entire quadrature grid".into(),
                ));
            }
            let mut den = 0.0;
            let mut num = vec![0.0; out_dim];
            for j0 in 0..=n {
                let x0 = lo[0] + j0 as f64 * step[0];
                let w0 = rule_weight(rule, j0, n, step[0]);
                for j1 in 0..=n {
                    let e = ((m - vals[j0 * (n + 1) + j1]) / delta).exp();
                    if e == 0.0 {
                        continue;
                    }
                    let x1 = lo[1] + j1 as f64 * step[1];
                    let w = w0 * rule_weight(rule, j1, n, step[1]) * e;
                    den += w;
                    match h {
                        None => {
                            num[0] += w * x0;
                            num[1] += w * x1;
                        }
                        Some(hf) => {
                            for (acc, hv) in num.iter_mut().zip(hf(&[x0, x1])) {
                                *acc += w * hv;
                            }
                        }
                    }
                }
            }
            if den == 0.0 {
                return Err(Error::DegenerateWeights(
                    "quadrature denominator underflowed to zero".into(),
                ));
            }
            Ok(num.into_iter().map(|v| v / den).collect())
        }
        _ => unreachable!("validated d <= 2"),
    }
}

/// The self-normalized ratio with grid refinement.
///
/// Doubles the interval count from `cfg.points_per_dim` until two
/// successive ratios agree to [`REFINE_TOL`] componentwise, or the cap is
/// hit, in which case the error carries the last two iterates (they are
/// grid-resolution-limited estimates, still useful to callers that accept
/// that accuracy).
pub fn quad_self_normalized(
    phi: &dyn Objective,
    h: Option<&(dyn Fn(&[f64]) -> Vec<f64> + Sync)>,
    delta: f64,
    cfg: &QuadConfig,
) -> Result<QuadEstimate> {
    cfg.validate()?;
    if delta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let out_dim = match h {
        Some(hf) => hf(cfg.domain.lo()).len(),
        None => cfg.domain.dim(),
    };
    let mut n = cfg.points_per_dim;
    let mut prev: Option<(Vec<f64>, usize)> = None;
    loop {
        let r = ratio_on_grid(phi, h, out_dim, delta, &cfg.domain, cfg.rule, n)?;
        if let Some((p, _)) = &prev {
            let diff = r
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if diff < REFINE_TOL {
                return Ok(QuadEstimate {
                    point: r,
                    points_per_dim: n,
                });
            }
        }
        if n * 2 > cfg.max_points_per_dim {
            let (p, _) = prev.unwrap_or((r.clone(), n));
            return Err(Error::QuadNonConvergence {
                last: r,
                prev: p,
                points_per_dim: n,
            });
        }
        prev = Some((r, n));
        n *= 2;
    }
}

/// Specialization to the inf-convolution integrand: the ratio with
/// `phi(y) = f(y) + g(x - y)` and `h` the identity, approximating
/// `argmin_y { f(y) + g(x - y) }`.
pub fn quad_infconv_argmin(
    f: &dyn Objective,
    g: &dyn Objective,
    x: &[f64],
    delta: f64,
    cfg: &QuadConfig,
) -> Result<QuadEstimate> {
    let d = x.len();
    if d > 2 || d != cfg.domain.dim() {
        return Err(Error::InvalidConfig(format!(
            "inf-convolution quadrature needs x and domain of equal dim <= 2 (got {d} and {})",
            cfg.domain.dim()
        )));
    }
    let x_own = x.to_vec();
    let phi = crate::objective::func(d, move |y: &[f64]| {
        let mut diff = [0.0f64; 2];
        for i in 0..d {
            diff[i] = x_own[i] - y[i];
        }
        let fv = f.eval(y);
        let gv = g.eval(&diff[..d]);
        if fv.is_infinite() || gv.is_infinite() {
            f64::INFINITY
        } else {
            fv + gv
        }
    });
    quad_self_normalized(&phi, None, delta, cfg)
}

/// Argmin of `phi` over the same grid geometry the quadrature uses
/// (`n` intervals over the domain). Ties resolve to the lowest index.
pub fn grid_argmin(phi: &dyn Objective, domain: &DomainBox, n: usize) -> Vec<f64> {
    assert!(domain.dim() <= 2, "grid argmin supports d <= 2");
    let lo = domain.lo();
    let hi = domain.hi();
    match domain.dim() {
        1 => {
            let step = (hi[0] - lo[0]) / n as f64;
            // Chunked parallel scan; chunk minima fold in index order so
            // ties resolve to the lowest index regardless of thread count.
            use rayon::prelude::*;
            let chunk = 65_536usize;
            let starts: Vec<usize> = (0..=n).step_by(chunk).collect();
            let chunk_mins: Vec<(f64, usize)> = starts
                .par_iter()
                .map(|&s| {
                    let mut best = (f64::INFINITY, s);
                    for j in s..(s + chunk).min(n + 1) {
                        let v = phi.eval(&[lo[0] + j as f64 * step]);
                        if v < best.0 {
                            best = (v, j);
                        }
                    }
                    best
                })
                .collect();
            let mut best = (f64::INFINITY, 0usize);
            for (v, j) in chunk_mins {
                if v < best.0 {
                    best = (v, j);
                }
            }
            vec![lo[0] + best.1 as f64 * step]
        }
        2 => {
            let step = [(hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64];
            let mut best = (f64::INFINITY, 0usize, 0usize);
            for j0 in 0..=n {
                for j1 in 0..=n {
                    let v = phi.eval(&[
                        lo[0] + j0 as f64 * step[0],
                        lo[1] + j1 as f64 * step[1],
                    ]);
                    if v < best.0 {
                        best = (v, j0, j1);
                    }
                }
            }
            vec![
                lo[0] + best.1 as f64 * step[0],
                lo[1] + best.2 as f64 * step[1],
            ]
        }
        _ => unreachable!(),
    }
}
