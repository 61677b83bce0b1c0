//! Self-normalized exponentially-tilted sample averages.
//!
//! Given samples `Y_1..Y_N` and unnormalized log-weights `v_i` (typically
//! `-f(Y_i)/delta` plus importance corrections), the estimator is
//!
//! ```text
//! y = sum_i w_i h(Y_i),    w = softmax(v)
//! ```
//!
//! which approximates `h` at the minimizer of the tilted objective as
//! `delta -> 0`. All exponential weighting is routed through
//! [`stable_softmax`], which shifts by the maximum exponent so that inputs
//! of any magnitude (including `-inf` for samples that hit an infinite
//! objective value) are handled without overflow.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::Objective;

/// Samples below this count are evaluated serially; chunked parallel
/// evaluation only pays off for large batches.
const PAR_THRESHOLD: usize = 8192;
const PAR_CHUNK: usize = 4096;

/// `N` points in `R^d` with one unnormalized log-weight per point.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    points: Vec<f64>,
    logw: Vec<f64>,
    dim: usize,
}

impl SampleBatch {
    /// `points` is row-major `n x dim`.
    pub fn new(points: Vec<f64>, logw: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || points.len() != logw.len() * dim || logw.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "sample batch shape mismatch: {} coordinates, {} log-weights, dim {}",
                points.len(),
                logw.len(),
                dim
            )));
        }
        Ok(Self { points, logw, dim })
    }

    /// Points only, with log-weights to be filled in later.
    pub fn from_points(points: Vec<f64>, dim: usize) -> Result<Self> {
        let n = points.len() / dim.max(1);
        Self::new(points, vec![0.0; n], dim)
    }

    pub fn len(&self) -> usize {
        self.logw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logw.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn logw(&self) -> &[f64] {
        &self.logw
    }

    pub fn set_logw(&mut self, logw: Vec<f64>) -> Result<()> {
        if logw.len() != self.len() {
            return Err(Error::InvalidConfig(
                "log-weight length does not match batch".into(),
            ));
        }
        self.logw = logw;
        Ok(())
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    /// Evaluate `f` at every point, in batch order. Large batches are
    /// evaluated in fixed-size chunks in parallel; the output order (and
    /// therefore every downstream reduction) is independent of thread count.
    pub fn eval_all(&self, f: &dyn Objective) -> Vec<f64> {
        let n = self.len();
        if n < PAR_THRESHOLD {
            (0..n).map(|i| f.eval(self.point(i))).collect()
        } else {
            self.points
                .par_chunks(PAR_CHUNK * self.dim)
                .flat_map_iter(|chunk| chunk.chunks(self.dim).map(|p| f.eval(p)))
                .collect()
        }
    }
}

/// The weighted-average output point plus weight diagnostics.
#[derive(Debug, Clone)]
pub struct LaplaceEstimate {
    /// The self-normalized weighted average (a convex combination of the
    /// batch points with nonzero weight).
    pub point: Vec<f64>,
    /// Effective sample size `1 / sum_i w_i^2`, in `(0, N]`. Values near 1
    /// signal weight collapse (sample starvation).
    pub ess: f64,
    /// Largest unnormalized log-weight, before shifting.
    pub max_logw: f64,
    /// Delta-method standard error of the self-normalized ratio per output
    /// coordinate: `sqrt(sum_i w_i^2 (h(Y_i) - point)^2)`.
    pub std_error: Vec<f64>,
}

/// Numerically stable softmax: `w_i = exp(v_i - a) / sum_j exp(v_j - a)`
/// with `a = max_i v_i`.
///
/// Entries equal to `-inf` map to exactly zero weight. Errors with
/// "degenerate weights" when every entry is `-inf` (every sample landed
/// where the objective is infinite).
pub fn stable_softmax(v: &[f64]) -> Result<Vec<f64>> {
    debug_assert!(v.iter().all(|x| !x.is_nan()), "softmax input contains NaN");
    let a = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !a.is_finite() {
        return Err(Error::DegenerateWeights(format!(
            "all {} log-weights are -inf",
            v.len()
        )));
    }
    let mut w: Vec<f64> = v.iter().map(|&x| (x - a).exp()).collect();
    let sum: f64 = w.iter().sum();
    // sum >= 1 because the maximal entry contributes exp(0) = 1.
    for wi in &mut w {
        *wi /= sum;
    }
    Ok(w)
}

/// Self-normalized weighted average `sum_i w_i h(Y_i)` with
/// `w = softmax(batch.logw)`.
///
/// `h = None` means the identity map (the estimate is the weighted average
/// of the batch points themselves). The reduction runs in fixed batch
/// order.
pub fn self_normalized_mean(
    batch: &SampleBatch,
    h: Option<&(dyn Fn(&[f64]) -> Vec<f64> + Sync)>,
) -> Result<LaplaceEstimate> {
    let w = stable_softmax(batch.logw())?;
    let max_logw = batch
        .logw()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let out_dim = match h {
        Some(hf) => hf(batch.point(0)).len(),
        None => batch.dim(),
    };
    let mut point = vec![0.0; out_dim];
    match h {
        None => {
            for (i, &wi) in w.iter().enumerate() {
                if wi == 0.0 {
                    continue;
                }
                for (acc, &y) in point.iter_mut().zip(batch.point(i)) {
                    *acc += wi * y;
                }
            }
        }
        Some(hf) => {
            for (i, &wi) in w.iter().enumerate() {
                if wi == 0.0 {
                    continue;
                }
                let hy = hf(batch.point(i));
                debug_assert_eq!(hy.len(), out_dim);
                for (acc, &y) in point.iter_mut().zip(&hy) {
                    *acc += wi * y;
                }
            }
        }
    }
    let ess = 1.0 / w.iter().map(|&wi| wi * wi).sum::<f64>();
    let mut se = vec![0.0; out_dim];
    match h {
        None => {
            for (i, &wi) in w.iter().enumerate() {
                if wi == 0.0 {
                    continue;
                }
                for (acc, (&y, &pj)) in se.iter_mut().zip(batch.point(i).iter().zip(&point)) {
                    let dev = y - pj;
                    *acc += wi * wi * dev * dev;
                }
            }
        }
        Some(hf) => {
            for (i, &wi) in w.iter().enumerate() {
                if wi == 0.0 {
                    continue;
                }
                let hy = hf(batch.point(i));
                for (acc, (&y, &pj)) in se.iter_mut().zip(hy.iter().zip(&point)) {
                    let dev = y - pj;
                    *acc += wi * wi * dev * dev;
                }
            }
        }
    }
    for s in &mut se {
        *s = s.sqrt();
    }
    Ok(LaplaceEstimate {
        point,
        ess,
        max_logw,
        std_error: se,
    })
}

/// Importance-corrected log-weights for the inf-convolution estimand at
/// `x`:
///
/// ```text
/// logw_i = (-f(Y_i) - g(x - Y_i)) / delta - log q(Y_i)
/// ```
///
/// The unknown normalizing constant of the tilted density is dropped; it
/// cancels in the self-normalized ratio. Samples where `f` or `g` is
/// `+inf` get log-weight `-inf` (weight exactly zero). A non-finite
/// proposal log-density at any sample is an error: the proposal must cover
/// its own draws.
pub fn importance_log_weights(
    f: &dyn Objective,
    g: &dyn Objective,
    x: &[f64],
    delta: f64,
    batch: &SampleBatch,
    proposal_logpdf: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Result<Vec<f64>> {
    if delta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let dim = batch.dim();
    let compute = |p: &[f64]| -> Result<f64> {
        let lq = proposal_logpdf(p);
        if !lq.is_finite() {
            // index fixed up by the caller below
            return Err(Error::ProposalSupport { index: 0, logpdf: lq });
        }
        let fv = f.eval(p);
        let mut diff = vec![0.0; dim];
        for (d, (&xi, &yi)) in diff.iter_mut().zip(x.iter().zip(p)) {
            *d = xi - yi;
        }
        let gv = g.eval(&diff);
        Ok(if fv.is_infinite() || gv.is_infinite() {
            f64::NEG_INFINITY
        } else {
            (-fv - gv) / delta - lq
        })
    };

    let n = batch.len();
    let results: Vec<Result<f64>> = if n < PAR_THRESHOLD {
        (0..n).map(|i| compute(batch.point(i))).collect()
    } else {
        (0..n)
            .into_par_iter()
            .with_min_len(PAR_CHUNK)
            .map(|i| compute(batch.point(i)))
            .collect()
    };
    let mut logw = Vec::with_capacity(n);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => logw.push(v),
            Err(Error::ProposalSupport { logpdf, .. }) => {
                return Err(Error::ProposalSupport { index: i, logpdf })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(logw)
}
