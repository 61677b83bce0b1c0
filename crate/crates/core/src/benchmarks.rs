//! Benchmark criterion functions in the style of the BBOB suite, shifted
//! so every function has global minimum value 0 at the origin. Raw
//! (untransformed) definitions; no rotation/asymmetry/oscillation layers.

use crate::error::{Error, Result};
use crate::objective::Objective;

pub const WEIERSTRASS_TERMS: usize = 12; // k = 0..=11

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Sphere,
    Ellipsoidal,
    Discus,
    Rosenbrock,
    SharpRidge,
    Weierstrass,
}

impl Benchmark {
    pub fn all() -> [Benchmark; 6] {
        [
            Benchmark::Sphere,
            Benchmark::Ellipsoidal,
            Benchmark::Discus,
            Benchmark::Rosenbrock,
            Benchmark::SharpRidge,
            Benchmark::Weierstrass,
        ]
    }

    /// Stable CLI identifier.
    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Sphere => "sphere",
            Benchmark::Ellipsoidal => "ellipsoidal",
            Benchmark::Discus => "discus",
            Benchmark::Rosenbrock => "rosenbrock",
            Benchmark::SharpRidge => "sharp_ridge",
            Benchmark::Weierstrass => "weierstrass",
        }
    }

    pub fn from_name(name: &str) -> Result<Benchmark> {
        Benchmark::all()
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown benchmark '{name}'")))
    }
}

/// A benchmark criterion fixed to a dimension.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkFn {
    pub which: Benchmark,
    pub dim: usize,
}

/// Construct a benchmark function (dimension 10 in the experiments).
pub fn benchmark(which: Benchmark, dim: usize) -> BenchmarkFn {
    BenchmarkFn { which, dim }
}

fn ellipsoidal_coeff(i: usize, d: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        10f64.powf(6.0 * i as f64 / (d - 1) as f64)
    }
}

/// Per-coordinate Weierstrass sum `sum_k (1/2)^k cos(2 pi 3^k (t + 1/2))`,
/// truncated at k = 11.
fn weierstrass_coord(t: f64) -> f64 {
    let mut s = 0.0;
    let mut half_pow = 1.0;
    let mut three_pow = 1.0;
    for _ in 0..WEIERSTRASS_TERMS {
        s += half_pow * (2.0 * std::f64::consts::PI * three_pow * (t + 0.5)).cos();
        half_pow *= 0.5;
        three_pow *= 3.0;
    }
    s
}

/// Value of the per-coordinate sum at 0; subtracting it puts the global
/// minimum (value 0) at the origin. Equals -(2 - 2^-11) since cos(pi 3^k)
/// = -1 for every k.
fn weierstrass_c0() -> f64 {
    -(2.0 - 0.5f64.powi(WEIERSTRASS_TERMS as i32 - 1))
}

impl Objective for BenchmarkFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let d = self.dim;
        match self.which {
            Benchmark::Sphere => x.iter().map(|v| v * v).sum(),
            Benchmark::Ellipsoidal => x
                .iter()
                .enumerate()
                .map(|(i, v)| ellipsoidal_coeff(i, d) * v * v)
                .sum(),
            Benchmark::Discus => {
                1e6 * x[0] * x[0] + x[1..].iter().map(|v| v * v).sum::<f64>()
            }
            Benchmark::Rosenbrock => {
                // Origin-shifted: minimum 0 at x = 0 (classic minimum at 1
                // moved by the +1 inside).
                let mut s = 0.0;
                for i in 0..d - 1 {
                    let a = (x[i] + 1.0) * (x[i] + 1.0) - (x[i + 1] + 1.0);
                    s += 100.0 * a * a + x[i] * x[i];
                }
                s
            }
            Benchmark::SharpRidge => {
                let tail: f64 = x[1..].iter().map(|v| v * v).sum();
                x[0] * x[0] + 100.0 * tail.sqrt()
            }
            Benchmark::Weierstrass => {
                let s: f64 = x.iter().map(|&t| weierstrass_coord(t)).sum();
                s / d as f64 - weierstrass_c0()
            }
        }
    }
}

impl BenchmarkFn {
    /// Analytic gradient; subgradient convention at the sharp ridge's
    /// nonsmooth set (ridge term contributes zero there). The weierstrass
    /// gradient is a central finite difference of the truncated series
    /// (step 1e-6), which is what the gradient-descent baseline consumes.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        match self.which {
            Benchmark::Sphere => x.iter().map(|v| 2.0 * v).collect(),
            Benchmark::Ellipsoidal => x
                .iter()
                .enumerate()
                .map(|(i, v)| 2.0 * ellipsoidal_coeff(i, d) * v)
                .collect(),
            Benchmark::Discus => {
                let mut g: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
                g[0] *= 1e6;
                g
            }
            Benchmark::Rosenbrock => {
                let mut g = vec![0.0; d];
                for i in 0..d - 1 {
                    let a = (x[i] + 1.0) * (x[i] + 1.0) - (x[i + 1] + 1.0);
                    g[i] += 400.0 * a * (x[i] + 1.0) + 2.0 * x[i];
                    g[i + 1] += -200.0 * a;
                }
                g
            }
            Benchmark::SharpRidge => {
                let tail: f64 = x[1..].iter().map(|v| v * v).sum();
                let mut g = vec![0.0; d];
                g[0] = 2.0 * x[0];
                if tail > 0.0 {
                    let r = tail.sqrt();
                    for i in 1..d {
                        g[i] = 100.0 * x[i] / r;
                    }
                }
                g
            }
            Benchmark::Weierstrass => {
                let h = 1e-6;
                let mut g = vec![0.0; d];
                let mut xp = x.to_vec();
                for i in 0..d {
                    let xi = x[i];
                    xp[i] = xi + h;
                    let fp = self.eval(&xp);
                    xp[i] = xi - h;
                    let fm = self.eval(&xp);
                    xp[i] = xi;
                    g[i] = (fp - fm) / (2.0 * h);
                }
                g
            }
        }
    }
}
