//! Zeroth-order optimization loops: the sampled proximal-point method
//! (LPP), the random gradient-free oracle (RGF), and a noisy
//! gradient-descent baseline, plus grid tuning over their parameters.

use crate::error::{Error, Result};
use crate::objective::{with_counter, Objective};
use crate::prox::{prox_laplace, ProxConfig};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct OptConfig {
    pub max_iters: usize,
    /// LPP Moreau level.
    pub lambda: f64,
    /// LPP tilting temperature / RGF perturbation variance.
    pub delta: f64,
    /// Samples per iteration (LPP, RGF).
    pub n_samples: usize,
    /// Step size (RGF, GD).
    pub eta: f64,
    /// Standard deviation of Gaussian noise added to GD gradients.
    pub noise_sd: f64,
    pub x0: Vec<f64>,
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0)
            || !(self.delta > 0.0)
            || self.n_samples == 0
            || !(self.eta >= 0.0)
            || !(self.noise_sd >= 0.0)
            || self.x0.is_empty()
        {
            return Err(Error::InvalidConfig(
                "optimizer config needs lambda, delta > 0; n_samples >= 1; eta, noise_sd >= 0; nonempty x0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-iteration history. `values[k] = f(iterates[k])` (recorded outside
/// the evaluation budget); `evals[k]` is the cumulative number of
/// objective evaluations the algorithm itself spent through iteration `k`.
#[derive(Debug, Clone)]
pub struct OptTrace {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub evals: Vec<u64>,
    pub seed: u64,
    pub stream_id: u64,
    /// Set when the run stopped early (weight degeneracy or the divergence
    /// guard); the trace holds everything up to that point.
    pub aborted: Option<String>,
}

impl OptTrace {
    fn new(x0: &[f64], v0: f64, rng: &RngStream) -> Self {
        Self {
            iterates: vec![x0.to_vec()],
            values: vec![v0],
            evals: vec![0],
            seed: rng.seed(),
            stream_id: rng.stream_id(),
            aborted: None,
        }
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace holds at least x0")
    }
}

pub enum Algorithm<'a> {
    /// Proximal point with the sampled proximal operator.
    Lpp,
    /// Nesterov-style random gradient-free oracle.
    Rgf,
    /// Gradient descent with optional Gaussian gradient noise.
    Gd {
        grad: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync),
    },
}

impl Algorithm<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lpp => "lpp",
            Algorithm::Rgf => "rgf",
            Algorithm::Gd { .. } => "gd",
        }
    }
}

/// One proximal-point step: `x_next = prox_laplace(f, x_prev)` with the
/// configured `(lambda, delta, N)`.
pub fn lpp_step(
    f: &dyn Objective,
    x_prev: &[f64],
    cfg: &OptConfig,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    let pc = ProxConfig {
        lambda: cfg.lambda,
        delta: cfg.delta,
        n_samples: cfg.n_samples,
        rng: rng.clone(),
    };
    Ok(prox_laplace(f, x_prev, &pc)?.point)
}

/// One RGF step: draws `Y_i ~ N(x, delta I)` and moves along the averaged
/// finite-difference direction
///
/// ```text
/// x - (eta/N) sum_i [(f(Y_i) - f(x)) / delta] (Y_i - x)
/// ```
pub fn rgf_step(
    f: &dyn Objective,
    x_prev: &[f64],
    cfg: &OptConfig,
    rng: &mut RngStream,
) -> Vec<f64> {
    let d = x_prev.len();
    let n = cfg.n_samples;
    let fx = f.eval(x_prev);
    let sd = cfg.delta.sqrt();
    let mut accum = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut z = vec![0.0; d];
    for _ in 0..n {
        for i in 0..d {
            z[i] = rng.standard_normal();
            y[i] = x_prev[i] + sd * z[i];
        }
        let diff = (f.eval(&y) - fx) / cfg.delta;
        for i in 0..d {
            accum[i] += diff * (y[i] - x_prev[i]);
        }
    }
    let scale = cfg.eta / n as f64;
    x_prev
        .iter()
        .zip(&accum)
        .map(|(&xi, &ai)| xi - scale * ai)
        .collect()
}

const DIVERGENCE_GUARD: f64 = 1e8;

/// Gradient descent `x_k = x_{k-1} - eta (grad f(x_{k-1}) + xi_k)` with
/// `xi_k ~ N(0, noise_sd^2 I)`; aborts via the divergence guard when the
/// iterate norm exceeds 1e8.
pub fn gd_run(
    f: &dyn Objective,
    grad: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    cfg: &OptConfig,
    rng: &RngStream,
) -> OptTrace {
    let mut rng = rng.clone();
    let mut trace = OptTrace::new(&cfg.x0, f.eval(&cfg.x0), &rng);
    let mut x = cfg.x0.clone();
    for k in 1..=cfg.max_iters {
        let g = grad(&x);
        for (xi, gi) in x.iter_mut().zip(&g) {
            let noise = if cfg.noise_sd > 0.0 {
                cfg.noise_sd * rng.standard_normal()
            } else {
                0.0
            };
            *xi -= cfg.eta * (gi + noise);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_GUARD {
            trace.aborted = Some(format!("divergence guard at iteration {k} (|x| = {norm:e})"));
            break;
        }
        trace.iterates.push(x.clone());
        trace.values.push(f.eval(&x));
        // one gradient per iteration
        trace.evals.push(k as u64);
    }
    trace
}

/// Run `algorithm` for `cfg.max_iters` iterations, recording iterates,
/// criterion values, and the cumulative evaluation budget (LPP: N per
/// iteration; RGF: N+1; GD: one gradient).
///
/// A weight-degeneracy failure inside LPP aborts with the trace so far.
pub fn run(algorithm: &Algorithm, f: &dyn Objective, cfg: &OptConfig, rng: &RngStream) -> OptTrace {
    if let Algorithm::Gd { grad } = algorithm {
        return gd_run(f, *grad, cfg, rng);
    }
    let counted = with_counter(f);
    let mut trace = OptTrace::new(&cfg.x0, f.eval(&cfg.x0), rng);
    let mut x = cfg.x0.clone();
    for k in 1..=cfg.max_iters {
        let step_rng = rng.derive(k as u64);
        match algorithm {
            Algorithm::Lpp => match lpp_step(&counted, &x, cfg, &step_rng) {
                Ok(next) => x = next,
                Err(e) => {
                    trace.aborted = Some(format!("iteration {k}: {e}"));
                    break;
                }
            },
            Algorithm::Rgf => {
                let mut step_rng = step_rng;
                x = rgf_step(&counted, &x, cfg, &mut step_rng);
            }
            Algorithm::Gd { .. } => unreachable!(),
        }
        trace.iterates.push(x.clone());
        trace.values.push(f.eval(&x));
        trace.evals.push(counted.count());
    }
    trace
}

/// Outcome of a grid tune: the winning configuration and its trace.
pub struct TuneResult {
    pub best_index: usize,
    pub config: OptConfig,
    pub trace: OptTrace,
}

/// Run every configuration in `grid` for `budget_iters` iterations and
/// return the one with the smallest final criterion value; ties break
/// toward the earliest grid entry. Each combination runs on its own
/// derived stream.
pub fn tune_grid(
    algorithm: &Algorithm,
    f: &dyn Objective,
    grid: &[OptConfig],
    budget_iters: usize,
    rng: &RngStream,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("tuning grid is empty".into()));
    }
    let mut best: Option<TuneResult> = None;
    for (i, base) in grid.iter().enumerate() {
        base.validate()?;
        let mut cfg = base.clone();
        cfg.max_iters = budget_iters;
        let trace = run(algorithm, f, &cfg, &rng.derive(i as u64));
        let v = trace.final_value();
        let better = match &best {
            None => true,
            Some(b) => v < b.trace.final_value(),
        };
        if better {
            best = Some(TuneResult {
                best_index: i,
                config: cfg,
                trace,
            });
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Mean criterion value per iteration across repetitions (the benchmark
/// protocol averages 3 repetitions). Traces shorter than the longest one
/// (aborted runs) contribute their final value to later iterations.
pub fn average_values(traces: &[OptTrace]) -> Vec<f64> {
    let len = traces.iter().map(|t| t.values.len()).max().unwrap_or(0);
    let mut out = vec![0.0; len];
    for t in traces {
        for (k, slot) in out.iter_mut().enumerate() {
            let v = if k < t.values.len() {
                t.values[k]
            } else {
                t.final_value()
            };
            *slot += v;
        }
    }
    for v in &mut out {
        *v /= traces.len() as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::func;

    fn half_sq(d: usize) -> impl Objective {
        func(d, |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>())
    }

    #[test]
    fn lpp_step_halves_quadratic() {
        // prox of ||y||^2/2 at lambda=1 is x/2; quadratic exactness means
        // any delta is unbiased, but the Gaussian cloud must reach x/2,
        // which bounds delta from below (in d=2, |x - x/2| = 2.8 needs
        // delta ~ 1).
        let d = 2;
        let f = half_sq(d);
        let cfg = OptConfig {
            max_iters: 1,
            lambda: 1.0,
            delta: 2.0,
            n_samples: 200_000,
            eta: 0.0,
            noise_sd: 0.0,
            x0: vec![4.0; d],
        };
        let x = lpp_step(&f, &cfg.x0, &cfg, &RngStream::new(9, 0)).unwrap();
        for xi in &x {
            assert!((xi - 2.0).abs() < 0.05, "{x:?}");
        }
    }

    #[test]
    fn lpp_flat_objective_stays_put() {
        let f = func(3, |_: &[f64]| 1.0);
        let cfg = OptConfig {
            max_iters: 1,
            lambda: 1.0,
            delta: 1e-2,
            n_samples: 100_000,
            eta: 0.0,
            noise_sd: 0.0,
            x0: vec![1.0, -2.0, 0.5],
        };
        let x = lpp_step(&f, &cfg.x0, &cfg, &RngStream::new(10, 0)).unwrap();
        for (a, b) in x.iter().zip(&cfg.x0) {
            assert!((a - b).abs() < 5e-3);
        }
    }

    #[test]
    fn lpp_geometric_decay_on_quadratic() {
        let d = 2;
        let f = half_sq(d);
        let cfg = OptConfig {
            max_iters: 5,
            lambda: 1.0,
            delta: 2.0,
            n_samples: 200_000,
            eta: 0.0,
            noise_sd: 0.0,
            x0: vec![4.0; d],
        };
        let trace = run(&Algorithm::Lpp, &f, &cfg, &RngStream::new(11, 0));
        for (k, x) in trace.iterates.iter().enumerate() {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let want = 4.0 * (d as f64).sqrt() * 0.5f64.powi(k as i32);
            assert!(
                (norm - want).abs() < 0.12 * want.max(1.5),
                "k={k}: |x| = {norm}, expected ~{want}"
            );
        }
        // N evals per iteration
        assert_eq!(trace.evals[5], 5 * 200_000);
    }

    #[test]
    fn rgf_constant_objective_is_fixed_point() {
        let f = func(2, |_: &[f64]| 3.0);
        let cfg = OptConfig {
            max_iters: 1,
            lambda: 1.0,
            delta: 0.01,
            n_samples: 50,
            eta: 0.5,
            noise_sd: 0.0,
            x0: vec![1.0, 2.0],
        };
        let mut rng = RngStream::new(12, 0);
        let x = rgf_step(&f, &cfg.x0, &cfg, &mut rng);
        assert_eq!(x, cfg.x0);
    }

    #[test]
    fn rgf_linear_objective_mean_step() {
        // f(y) = c y in d=1: E[step] = -eta c.
        let c = 2.5;
        let f = func(1, move |y: &[f64]| c * y[0]);
        let cfg = OptConfig {
            max_iters: 1,
            lambda: 1.0,
            delta: 0.01,
            n_samples: 100_000,
            eta: 0.1,
            noise_sd: 0.0,
            x0: vec![0.7],
        };
        let mut rng = RngStream::new(13, 0);
        let x = rgf_step(&f, &cfg.x0, &cfg, &mut rng);
        let step = x[0] - cfg.x0[0];
        let want = -cfg.eta * c;
        assert!(
            (step - want).abs() < 0.05 * want.abs(),
            "step {step} vs {want}"
        );
    }

    #[test]
    fn gd_plain_converges_on_sphere() {
        let d = 10;
        let f = func(d, |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>());
        let grad = |x: &[f64]| x.iter().map(|v| 2.0 * v).collect::<Vec<f64>>();
        let cfg = OptConfig {
            max_iters: 10_000,
            lambda: 1.0,
            delta: 1.0,
            n_samples: 1,
            eta: 0.1,
            noise_sd: 0.0,
            x0: vec![4.0; d],
        };
        let trace = gd_run(&f, &grad, &cfg, &RngStream::new(14, 0));
        assert!(trace.final_value() < 1e-10);
        assert!(trace.aborted.is_none());
    }

    #[test]
    fn gd_zero_step_constant_trace() {
        let f = half_sq(2);
        let grad = |x: &[f64]| x.to_vec();
        let cfg = OptConfig {
            max_iters: 5,
            lambda: 1.0,
            delta: 1.0,
            n_samples: 1,
            eta: 0.0,
            noise_sd: 0.0,
            x0: vec![1.0, 2.0],
        };
        let trace = gd_run(&f, &grad, &cfg, &RngStream::new(15, 0));
        assert!(trace
            .iterates
            .iter()
            .all(|x| x == &cfg.x0));
    }

    #[test]
    fn gd_divergence_guard_triggers() {
        // f = ||x||^2/2 has L = 1; eta = 2.5 > 2/L diverges.
        let f = half_sq(1);
        let grad = |x: &[f64]| x.to_vec();
        let cfg = OptConfig {
            max_iters: 1000,
            lambda: 1.0,
            delta: 1.0,
            n_samples: 1,
            eta: 2.5,
            noise_sd: 0.0,
            x0: vec![1.0],
        };
        let trace = gd_run(&f, &grad, &cfg, &RngStream::new(16, 0));
        assert!(trace.aborted.is_some());
    }

    #[test]
    fn traces_are_bitwise_reproducible() {
        let f = half_sq(3);
        let cfg = OptConfig {
            max_iters: 5,
            lambda: 1.0,
            delta: 0.01,
            n_samples: 500,
            eta: 0.05,
            noise_sd: 0.0,
            x0: vec![2.0; 3],
        };
        for alg in [Algorithm::Lpp, Algorithm::Rgf] {
            let a = run(&alg, &f, &cfg, &RngStream::new(99, 5));
            let b = run(&alg, &f, &cfg, &RngStream::new(99, 5));
            assert_eq!(a.iterates, b.iterates, "{} not reproducible", alg.name());
            assert_eq!(
                a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn tune_grid_selects_faster_gd_step() {
        let d = 10;
        let f = func(d, |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>());
        let grad = |x: &[f64]| x.iter().map(|v| 2.0 * v).collect::<Vec<f64>>();
        let base = OptConfig {
            max_iters: 100,
            lambda: 1.0,
            delta: 1.0,
            n_samples: 1,
            eta: 1e-3,
            noise_sd: 0.0,
            x0: vec![4.0; d],
        };
        let mut fast = base.clone();
        fast.eta = 1e-1;
        let grid = [base, fast];
        let alg = Algorithm::Gd { grad: &grad };
        let result = tune_grid(&alg, &f, &grid, 100, &RngStream::new(44, 0)).unwrap();
        assert_eq!(result.best_index, 1);
    }

    #[test]
    fn tune_grid_single_combination_matches_run() {
        let f = half_sq(2);
        let cfg = OptConfig {
            max_iters: 3,
            lambda: 1.0,
            delta: 0.01,
            n_samples: 200,
            eta: 0.0,
            noise_sd: 0.0,
            x0: vec![1.0, 1.0],
        };
        let rng = RngStream::new(50, 0);
        let tuned = tune_grid(&Algorithm::Lpp, &f, &[cfg.clone()], 3, &rng).unwrap();
        let direct = run(&Algorithm::Lpp, &f, &cfg, &rng.derive(0));
        assert_eq!(tuned.trace.iterates, direct.iterates);
    }

    #[test]
    fn empty_grid_is_config_error() {
        let f = half_sq(1);
        assert!(matches!(
            tune_grid(&Algorithm::Lpp, &f, &[], 5, &RngStream::new(0, 0)),
            Err(Error::InvalidConfig(_))
        ));
    }
}
