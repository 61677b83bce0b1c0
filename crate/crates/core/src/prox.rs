//! Sampled proximal operator, Moreau envelope, inf-convolution argmin,
//! and smoothed set projection.

use crate::error::{Error, Result};
use crate::laplace::{self_normalized_mean, LaplaceEstimate};
use crate::objective::{DomainBox, Objective};
use crate::rng::RngStream;
use crate::samplers::{logpdf, sample, ProposalSpec};

/// Parameters of the sampled proximal operator.
#[derive(Debug, Clone)]
pub struct ProxConfig {
    /// Moreau level (the quadratic is `||.||^2 / (2 lambda)`).
    pub lambda: f64,
    /// Tilting temperature; smaller values concentrate harder on the
    /// minimizer but starve the weights sooner.
    pub delta: f64,
    pub n_samples: usize,
    pub rng: RngStream,
}

impl ProxConfig {
    pub fn new(lambda: f64, delta: f64, n_samples: usize, rng: RngStream) -> Result<Self> {
        let cfg = Self {
            lambda,
            delta,
            n_samples,
            rng,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !(self.delta > 0.0) || self.n_samples == 0 {
            return Err(Error::InvalidConfig(format!(
                "prox config needs lambda > 0, delta > 0, n_samples >= 1 (got {}, {}, {})",
                self.lambda, self.delta, self.n_samples
            )));
        }
        Ok(())
    }
}

/// A set `K` given by a membership test plus a bounding box for
/// sampling-free checks.
pub struct SetIndicator {
    contains: Box<dyn Fn(&[f64]) -> bool + Sync + Send>,
    bounding_box: DomainBox,
}

impl SetIndicator {
    pub fn new(
        bounding_box: DomainBox,
        contains: impl Fn(&[f64]) -> bool + Sync + Send + 'static,
    ) -> Self {
        Self {
            contains: Box::new(contains),
            bounding_box,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.contains)(x)
    }

    pub fn bounding_box(&self) -> &DomainBox {
        &self.bounding_box
    }

    /// The Euclidean unit ball in `R^d`.
    pub fn unit_ball(dim: usize) -> Self {
        Self::new(DomainBox::centered(dim, 1.0).unwrap(), |x: &[f64]| {
            x.iter().map(|v| v * v).sum::<f64>() <= 1.0
        })
    }

    /// The nonnegative orthant, boxed at `half_width` for the bounding box.
    pub fn positive_orthant(dim: usize, half_width: f64) -> Self {
        Self::new(
            DomainBox::new(vec![0.0; dim], vec![half_width; dim]).unwrap(),
            |x: &[f64]| x.iter().all(|&v| v >= 0.0),
        )
    }
}

/// Sampled proximal operator of `lambda * f` at `x`: draws
/// `Y_i ~ N(x, delta*lambda I)` and returns the softmax-weighted average
/// with log-weights `-f(Y_i)/delta`.
pub fn prox_laplace(f: &dyn Objective, x: &[f64], cfg: &ProxConfig) -> Result<LaplaceEstimate> {
    cfg.validate()?;
    let spec = ProposalSpec::Gaussian {
        mean: x.to_vec(),
        var: cfg.delta * cfg.lambda,
    };
    let mut rng = cfg.rng.clone();
    let mut batch = sample(&spec, cfg.n_samples, &mut rng)?;
    let fv = batch.eval_all(f);
    let logw = fv
        .iter()
        .map(|&v| {
            if v.is_infinite() {
                f64::NEG_INFINITY
            } else {
                -v / cfg.delta
            }
        })
        .collect();
    batch.set_logw(logw)?;
    self_normalized_mean(&batch, None)
}

/// Moreau envelope value estimate `f(y) + ||x - y||^2 / (2 lambda)` at the
/// sampled proximal point `y`.
pub fn moreau_envelope_estimate(f: &dyn Objective, x: &[f64], cfg: &ProxConfig) -> Result<f64> {
    let est = prox_laplace(f, x, cfg)?;
    let sq: f64 = x
        .iter()
        .zip(&est.point)
        .map(|(&xi, &yi)| (xi - yi) * (xi - yi))
        .sum();
    Ok(f.eval(&est.point) + sq / (2.0 * cfg.lambda))
}

/// Smoothed projection onto `K`: the conditional mean `E[Y | Y in K]` for
/// `Y ~ N(x, delta I)`, estimated by rejection (samples outside `K` get
/// weight zero, retained samples weight one).
///
/// For convex `K` the estimate is a convex combination of points of `K`,
/// hence itself in `K`, for every `delta` and sample count.
pub fn project_laplace(
    k: &SetIndicator,
    x: &[f64],
    delta: f64,
    n_samples: usize,
    rng: &RngStream,
) -> Result<LaplaceEstimate> {
    if !(delta > 0.0) || n_samples == 0 {
        return Err(Error::InvalidConfig(
            "projection needs delta > 0 and n_samples >= 1".into(),
        ));
    }
    let spec = ProposalSpec::Gaussian {
        mean: x.to_vec(),
        var: delta,
    };
    let mut rng = rng.clone();
    let batch = sample(&spec, n_samples, &mut rng)?;
    let d = batch.dim();
    let mut kept: Vec<usize> = Vec::new();
    let mut mean = vec![0.0; d];
    for i in 0..batch.len() {
        let p = batch.point(i);
        if k.contains(p) {
            kept.push(i);
            for (acc, &v) in mean.iter_mut().zip(p) {
                *acc += v;
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::DegenerateWeights(format!(
            "projection retained 0 of {n_samples} samples (delta {delta}); \
             increase delta or n_samples"
        )));
    }
    let nk = kept.len() as f64;
    for m in &mut mean {
        *m /= nk;
    }
    let mut se = vec![0.0; d];
    for &i in &kept {
        for (acc, (&v, &mj)) in se.iter_mut().zip(batch.point(i).iter().zip(&mean)) {
            let dev = v - mj;
            *acc += dev * dev;
        }
    }
    for s in &mut se {
        *s = (*s).sqrt() / nk;
    }
    Ok(LaplaceEstimate {
        point: mean,
        // Uniform weights over the retained samples.
        ess: nk,
        max_logw: 0.0,
        std_error: se,
    })
}

/// Importance-weighted self-normalized estimate of
/// `argmin_y { f(y) + g(x - y) }`.
///
/// When the minimizer is not unique the estimate is the weighted
/// barycenter of the near-optimal region; the envelope value
/// `f(y) + g(x-y)` is then the stable quantity, not the point itself.
pub fn infconv_argmin(
    f: &dyn Objective,
    g: &dyn Objective,
    x: &[f64],
    delta: f64,
    proposal: &ProposalSpec,
    n_samples: usize,
    rng: &RngStream,
) -> Result<LaplaceEstimate> {
    let mut rng = rng.clone();
    let mut batch = sample(proposal, n_samples, &mut rng)?;
    let q = |p: &[f64]| logpdf(proposal, p);
    let logw = crate::laplace::importance_log_weights(f, g, x, delta, &batch, &q)?;
    batch.set_logw(logw)?;
    self_normalized_mean(&batch, None)
}
