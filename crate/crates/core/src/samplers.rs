//! Proposal distributions for the Monte Carlo estimators.
//!
//! Each proposal can both draw i.i.d. samples and report its exact
//! log-density, so the same spec serves plain sampling and importance
//! weighting.

use crate::error::{Error, Result};
use crate::laplace::SampleBatch;
use crate::objective::DomainBox;
use crate::rng::RngStream;

/// A samplable proposal density on `R^d` with evaluable log-pdf.
#[derive(Debug, Clone)]
pub enum ProposalSpec {
    /// Isotropic Gaussian `N(mean, var * I)`. For the tilted density
    /// induced by `g = ||.||^2 / (2 lambda)` at temperature `delta`, the
    /// variance scale is `delta * lambda`.
    Gaussian { mean: Vec<f64>, var: f64 },
    /// Product of per-coordinate Laplace densities with common `scale`,
    /// the tilted density induced by `g = ||.||_1` (scale = delta).
    ProductLaplace { center: Vec<f64>, scale: f64 },
    /// Uniform over an axis-aligned box.
    UniformBox(DomainBox),
    /// Product of per-coordinate exponentials on the positive orthant.
    ExponentialOrthant { rates: Vec<f64> },
}

impl ProposalSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProposalSpec::Gaussian { mean, .. } => mean.len(),
            ProposalSpec::ProductLaplace { center, .. } => center.len(),
            ProposalSpec::UniformBox(b) => b.dim(),
            ProposalSpec::ExponentialOrthant { rates } => rates.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProposalSpec::Gaussian { mean, var } => {
                if mean.is_empty() || !var.is_finite() || *var <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "gaussian proposal needs nonempty mean and positive variance (got var {var})"
                    )));
                }
            }
            ProposalSpec::ProductLaplace { center, scale } => {
                if center.is_empty() || !scale.is_finite() || *scale <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "laplace proposal needs nonempty center and positive scale (got {scale})"
                    )));
                }
            }
            ProposalSpec::UniformBox(_) => {}
            ProposalSpec::ExponentialOrthant { rates } => {
                if rates.is_empty() || rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
                    return Err(Error::InvalidConfig(
                        "exponential proposal needs strictly positive rates".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Draw `n` i.i.d. points; deterministic given the stream.
pub fn sample(spec: &ProposalSpec, n: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be >= 1".into()));
    }
    let dim = spec.dim();
    let mut points = Vec::with_capacity(n * dim);
    match spec {
        ProposalSpec::Gaussian { mean, var } => {
            let sd = var.sqrt();
            for _ in 0..n {
                for &m in mean {
                    points.push(m + sd * rng.standard_normal());
                }
            }
        }
        ProposalSpec::ProductLaplace { center, scale } => {
            for _ in 0..n {
                for &c in center {
                    // Inverse CDF: u in (-1/2, 1/2), x = c - b sgn(u) ln(1 - 2|u|).
                    let u = rng.unit() - 0.5;
                    let mag = -scale * (1.0 - 2.0 * u.abs()).ln();
                    points.push(c + if u < 0.0 { -mag } else { mag });
                }
            }
        }
        ProposalSpec::UniformBox(b) => {
            for _ in 0..n {
                for (&lo, &hi) in b.lo().iter().zip(b.hi()) {
                    points.push(rng.uniform(lo, hi));
                }
            }
        }
        ProposalSpec::ExponentialOrthant { rates } => {
            for _ in 0..n {
                for &r in rates {
                    points.push(-(1.0 - rng.unit()).ln() / r);
                }
            }
        }
    }
    SampleBatch::from_points(points, dim)
}

/// Exact log-density at `y`; `-inf` outside the support.
pub fn logpdf(spec: &ProposalSpec, y: &[f64]) -> f64 {
    match spec {
        ProposalSpec::Gaussian { mean, var } => {
            let d = mean.len() as f64;
            let sq: f64 = y
                .iter()
                .zip(mean)
                .map(|(&yi, &mi)| (yi - mi) * (yi - mi))
                .sum();
            -0.5 * d * (2.0 * std::f64::consts::PI * var).ln() - sq / (2.0 * var)
        }
        ProposalSpec::ProductLaplace { center, scale } => {
            let l1: f64 = y.iter().zip(center).map(|(&yi, &ci)| (yi - ci).abs()).sum();
            -(center.len() as f64) * (2.0 * scale).ln() - l1 / scale
        }
        ProposalSpec::UniformBox(b) => {
            if b.contains(y) {
                -b.volume().ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        ProposalSpec::ExponentialOrthant { rates } => {
            if y.iter().any(|&v| v < 0.0) {
                return f64::NEG_INFINITY;
            }
            y.iter()
                .zip(rates)
                .map(|(&yi, &ri)| ri.ln() - ri * yi)
                .sum()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(batch: &SampleBatch, coord: usize) -> f64 {
        (0..batch.len()).map(|i| batch.point(i)[coord]).sum::<f64>() / batch.len() as f64
    }

    #[test]
    fn gaussian_mean_clt_bound() {
        let spec = ProposalSpec::Gaussian {
            mean: vec![0.0, 0.0],
            var: 1.0,
        };
        let mut rng = RngStream::new(11, 0);
        let b = sample(&spec, 100_000, &mut rng).unwrap();
        let bound = 3.0 / (100_000f64).sqrt();
        assert!(mean_of(&b, 0).abs() < bound);
        assert!(mean_of(&b, 1).abs() < bound);
    }

    #[test]
    fn gaussian_variance_within_five_percent() {
        let var = 0.37;
        let spec = ProposalSpec::Gaussian {
            mean: vec![1.0],
            var,
        };
        let mut rng = RngStream::new(5, 0);
        let b = sample(&spec, 1_000_000, &mut rng).unwrap();
        let m = mean_of(&b, 0);
        let v = (0..b.len())
            .map(|i| {
                let d = b.point(i)[0] - m;
                d * d
            })
            .sum::<f64>()
            / (b.len() - 1) as f64;
        assert!((v - var).abs() / var < 0.05, "empirical var {v} vs {var}");
    }

    #[test]
    fn uniform_box_support() {
        let bx = DomainBox::centered(3, 1.0).unwrap();
        let spec = ProposalSpec::UniformBox(bx.clone());
        let mut rng = RngStream::new(2, 7);
        let b = sample(&spec, 5_000, &mut rng).unwrap();
        for i in 0..b.len() {
            assert!(bx.contains(b.point(i)));
        }
    }

    #[test]
    fn exponential_mean_clt_bound() {
        let spec = ProposalSpec::ExponentialOrthant { rates: vec![1.0] };
        let mut rng = RngStream::new(3, 0);
        let b = sample(&spec, 100_000, &mut rng).unwrap();
        // mean 1, sd 1
        assert!((mean_of(&b, 0) - 1.0).abs() < 3.0 / (100_000f64).sqrt());
    }

    #[test]
    fn logpdf_reference_values() {
        let bx = DomainBox::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(logpdf(&ProposalSpec::UniformBox(bx), &[0.5]), 0.0);
        let g = ProposalSpec::Gaussian {
            mean: vec![0.0],
            var: 1.0,
        };
        assert!((logpdf(&g, &[0.0]) + 0.9189385332046727).abs() < 1e-12);
        let e = ProposalSpec::ExponentialOrthant { rates: vec![1.0] };
        assert_eq!(logpdf(&e, &[-0.1]), f64::NEG_INFINITY);
        assert_eq!(logpdf(&e, &[0.0]), 0.0);
    }

    /// In d=1, the quadrature of exp(logpdf) over the support must be 1.
    #[test]
    fn densities_integrate_to_one() {
        // simple composite Simpson on a wide interval
        fn integrate(spec: &ProposalSpec, lo: f64, hi: f64) -> f64 {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut s = 0.0;
            for j in 0..=n {
                let x = lo + j as f64 * h;
                let w = if j == 0 || j == n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let lp = logpdf(spec, &[x]);
                if lp.is_finite() {
                    s += w * lp.exp();
                }
            }
            s * h / 3.0
        }
        let cases = [
            (
                ProposalSpec::Gaussian {
                    mean: vec![0.3],
                    var: 0.5,
                },
                -15.0,
                15.0,
            ),
            (
                ProposalSpec::ProductLaplace {
                    center: vec![-0.2],
                    scale: 0.7,
                },
                -25.0,
                25.0,
            ),
            (
                ProposalSpec::UniformBox(DomainBox::new(vec![-2.0], vec![3.0]).unwrap()),
                -2.0,
                3.0,
            ),
            (
                ProposalSpec::ExponentialOrthant { rates: vec![1.3] },
                0.0,
                40.0,
            ),
        ];
        for (spec, lo, hi) in cases {
            let z = integrate(&spec, lo, hi);
            assert!((z - 1.0).abs() < 1e-6, "{spec:?} integrates to {z}");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(sample(
            &ProposalSpec::Gaussian {
                mean: vec![0.0],
                var: 0.0
            },
            10,
            &mut RngStream::new(0, 0)
        )
        .is_err());
        assert!(sample(
            &ProposalSpec::ExponentialOrthant {
                rates: vec![1.0, -1.0]
            },
            10,
            &mut RngStream::new(0, 0)
        )
        .is_err());
    }
}
