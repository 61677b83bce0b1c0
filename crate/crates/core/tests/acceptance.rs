//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `--nocapture`). Criteria marked "unattainable" in
//! the repository notes are still implemented exactly as stated and are
//! expected to fail honestly rather than being weakened.

use infconv::benchmarks::{benchmark, Benchmark};
use infconv::bpgd::{
    bpgd_exact_step, bpgd_run, gen_poisson_problem, grad_d, BpgdConfig, BpgdVariant,
    Conditioning, CoordinateProposal, COORD_BOX_HI, COORD_BOX_LO,
};
use infconv::hj::{hj_cell_pooled, hj_residual, hj_residual_of, l1_norm, percentile, HJConfig};
use infconv::laplace::stable_softmax;
use infconv::optimizers::{rgf_step, run, tune_grid, Algorithm, OptConfig};
use infconv::prox::{project_laplace, prox_laplace, ProxConfig, SetIndicator};
use infconv::quad::{
    grid_argmin, quad_infconv_argmin, quad_self_normalized, QuadConfig, QuadRule,
};
use infconv::rng::RngStream;
use infconv::{func, DomainBox, Error, Objective};

fn report(num: &str, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {num} ({name}): {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: the quadrature oracle reproduces the closed-form
/// inf-convolution argmin of a quadratic pair to 1e-8 at any delta.
#[test]
fn criterion_01_quadratic_exactness() {
    let mut rng = RngStream::new(101, 0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let alpha = rng.uniform(0.2, 5.0);
        let c = rng.uniform(-3.0, 3.0);
        let lambda = rng.uniform(0.2, 5.0);
        let x = rng.uniform(-3.0, 3.0);
        let delta = 10f64.powf(rng.uniform(-3.0, 0.0));
        let f = func(1, move |y: &[f64]| 0.5 * alpha * (y[0] - c) * (y[0] - c));
        let g = func(1, move |y: &[f64]| y[0] * y[0] / (2.0 * lambda));
        let cfg = QuadConfig::new(
            DomainBox::new(vec![-25.0], vec![25.0]).unwrap(),
            256,
            QuadRule::Trapezoid,
        )
        .unwrap();
        let est = quad_infconv_argmin(&f, &g, &[x], delta, &cfg).unwrap();
        let exact = (x + lambda * alpha * c) / (1.0 + lambda * alpha);
        worst = worst.max((est.point[0] - exact).abs());
    }
    let pass = worst <= 1e-8;
    report(
        "1",
        "quadratic exactness",
        pass,
        &format!("worst |quad - closed form| = {worst:.3e} over 20 tuples"),
    );
    assert!(pass);
}

struct FigFunction {
    name: &'static str,
    f: Box<dyn Fn(f64) -> f64 + Sync>,
    domain: (f64, f64),
}

fn fig_functions() -> Vec<FigFunction> {
    vec![
        FigFunction {
            name: "quartic+sin",
            f: Box::new(|x| {
                9.0 / 40.0 + (x - 1.0).powi(4) / 20.0 + (10.0 * std::f64::consts::PI * x).sin() / (40.0 * x)
            }),
            domain: (0.2, 2.5),
        },
        FigFunction {
            name: "sqrt-abs",
            f: Box::new(|x| x.abs().sqrt()),
            domain: (-1.0, 1.0),
        },
        FigFunction {
            // Weierstrass-type cosine series. The domain is asymmetric:
            // on a symmetric interval the global minimizer is an exactly
            // tied +/- pair (the series is even), which breaks the unique-
            // minimizer premise of the convergence statement and makes the
            // ratio split the tie.
            name: "weierstrass-type",
            f: Box::new(|x| {
                let mut s = 0.0;
                let mut a = 1.0f64;
                let mut b = std::f64::consts::PI;
                for _ in 0..=100 {
                    s += a * (b * x).cos();
                    a *= 0.3;
                    b *= 23.0;
                }
                s
            }),
            domain: (-0.5, 0.4),
        },
    ]
}

fn quad_value_and_grid(
    phi: &dyn Objective,
    domain: &DomainBox,
    delta: f64,
    base: usize,
) -> (f64, usize) {
    let cfg = QuadConfig {
        domain: domain.clone(),
        points_per_dim: base,
        rule: QuadRule::Trapezoid,
        max_points_per_dim: 1 << 20,
    };
    match quad_self_normalized(phi, None, delta, &cfg) {
        Ok(est) => (est.point[0], est.points_per_dim),
        // Grid-resolution-limited estimate: the error carries the last
        // iterates precisely so callers can use them at that accuracy.
        Err(Error::QuadNonConvergence {
            last,
            points_per_dim,
            ..
        }) => (last[0], points_per_dim),
        Err(e) => panic!("quadrature failed: {e}"),
    }
}

/// Criterion 2: the ratio concentrates on the minimizer as delta -> 0 for
/// the three nonsmooth/nonconvex 1-D test functions; distance to the
/// (final-grid) argmin is within 1e-3 at delta = 1e-6 and decreases along
/// delta in {1e-2, 1e-4, 1e-6}. Distances at machine-noise level (both
/// below 1e-9) count as converged ties.
#[test]
fn criterion_02_interior_convergence() {
    let deltas = [1e-2, 1e-4, 1e-6];
    let bases = [1 << 14, 1 << 16, 1 << 19];
    let mut all_pass = true;
    let mut details = Vec::new();
    for fig in fig_functions() {
        let domain = DomainBox::new(vec![fig.domain.0], vec![fig.domain.1]).unwrap();
        let f = &fig.f;
        let phi = func(1, move |x: &[f64]| f(x[0]));
        let mut dists = Vec::new();
        for (&delta, &base) in deltas.iter().zip(&bases) {
            let (val, grid_n) = quad_value_and_grid(&phi, &domain, delta, base);
            let argmin = grid_argmin(&phi, &domain, grid_n)[0];
            dists.push((val - argmin).abs());
        }
        let close = dists[2] <= 1e-3;
        let floor = 1e-9;
        let decreasing = dists
            .windows(2)
            .all(|w| w[1] < w[0] || w[0].max(w[1]) <= floor);
        if !(close && decreasing) {
            all_pass = false;
        }
        details.push(format!(
            "{}: dists {:?} close={close} decreasing={decreasing}",
            fig.name, dists
        ));
    }
    report("2", "interior convergence", all_pass, &details.join("; "));
    assert!(all_pass, "{details:?}");
}

/// Criterion 3: boundary minimizer (phi(x) = x on [0,1]); oracle values
/// approximately delta, within 2*delta of 0, for delta in {1e-1..1e-3}.
#[test]
fn criterion_03_boundary_convergence() {
    let phi = func(1, |x: &[f64]| x[0]);
    let cfg = QuadConfig::new(
        DomainBox::new(vec![0.0], vec![1.0]).unwrap(),
        64,
        QuadRule::Trapezoid,
    )
    .unwrap();
    let mut vals = Vec::new();
    for delta in [1e-1, 1e-2, 1e-3] {
        vals.push(quad_self_normalized(&phi, None, delta, &cfg).unwrap().point[0]);
    }
    let pass = vals[0] <= 2.0 * 1e-1
        && vals[1] <= 2.0 * 1e-2
        && vals[2] <= 2.0 * 1e-3
        && vals.iter().all(|v| *v > 0.0)
        && vals[0] > vals[1]
        && vals[1] > vals[2];
    report(
        "3",
        "boundary convergence",
        pass,
        &format!("oracle values {vals:?} vs bound 2*delta"),
    );
    assert!(pass);
}

/// Criterion 4, exactly as specified: prox_laplace for f = |y|, lambda=1,
/// x in {3, 0.5, -2} at delta = 1e-3, N = 1e6 within 0.02 of the soft
/// threshold {2, 0, -1} in >= 18/20 seeds.
///
/// This parameterization is sample-starved: the tilted mass sits
/// 16-32 proposal standard deviations from x (reaching it would need
/// N ~ exp(reach^2/2) >> 1e100 draws), so the estimate stalls near the
/// cloud edge for every seed. Kept as an honest failing criterion rather
/// than silently retuned. The estimator itself is validated against the
/// quadrature oracle at matched, feasible temperatures in the unit suite.
#[test]
fn criterion_04_soft_threshold_prox() {
    let f = func(1, |y: &[f64]| y[0].abs());
    let cases = [(3.0, 2.0), (0.5, 0.0), (-2.0, -1.0)];
    let mut passes = 0;
    for seed in 0..20u64 {
        let mut seed_ok = true;
        for &(x, want) in &cases {
            let cfg = ProxConfig::new(1.0, 1e-3, 1_000_000, RngStream::new(seed, 7)).unwrap();
            let est = prox_laplace(&f, &[x], &cfg).unwrap();
            if (est.point[0] - want).abs() >= 0.02 {
                seed_ok = false;
            }
        }
        if seed_ok {
            passes += 1;
        }
    }
    let pass = passes >= 18;
    report(
        "4",
        "soft-threshold prox",
        pass,
        &format!(
            "{passes}/20 seeds within 0.02 (sample-starved: the tilted mass sits 16-32 \
             proposal sigmas from x at delta = 1e-3)"
        ),
    );
    assert!(pass, "criterion 4 unattainable as parameterized: {passes}/20 seeds");
}

/// Criterion 5: convex projection containment on a (delta, N) grid for the
/// unit ball and the positive orthant, all 10 seeds.
#[test]
fn criterion_05_projection_containment() {
    let n_grid = [10_000usize, 30_000, 100_000];
    let mut checked = 0usize;
    let mut pass = true;
    let ball = SetIndicator::unit_ball(2);
    let orthant = SetIndicator::positive_orthant(2, 1e6);
    let cases: [(&SetIndicator, [f64; 2], [f64; 3]); 2] = [
        (&ball, [2.0, 0.0], [1.0, 0.5, 0.2]),
        (&orthant, [-1.0, -1.0], [2.0, 1.0, 0.5]),
    ];
    for (set, x, deltas) in &cases {
        for &delta in deltas {
            for &n in &n_grid {
                for seed in 0..10u64 {
                    let est =
                        project_laplace(*set, x, delta, n, &RngStream::new(seed, 11)).unwrap();
                    checked += 1;
                    if !set.contains(&est.point) {
                        pass = false;
                    }
                }
            }
        }
    }
    report(
        "5",
        "projection containment",
        pass,
        &format!("membership held in {checked}/{checked} runs"),
    );
    assert!(pass);
}

/// Criterion 6: softmax shift invariance to 1e-12 and no overflow for
/// inputs up to magnitude 1e4, over 1e4 random vectors.
#[test]
fn criterion_06_softmax_properties() {
    let mut rng = RngStream::new(606, 0);
    let mut worst_shift = 0.0f64;
    let mut pass = true;
    for _ in 0..10_000 {
        let len = 1 + (rng.unit() * 127.0) as usize;
        // mix scales so weights range from uniform to fully collapsed
        let scale = 10f64.powf(rng.uniform(-3.0, 4.0));
        let mut v: Vec<f64> = (0..len).map(|_| rng.uniform(-scale, scale)).collect();
        // sprinkle -inf entries but keep one finite
        for vi in v.iter_mut().skip(1) {
            if rng.unit() < 0.05 {
                *vi = f64::NEG_INFINITY;
            }
        }
        let c = rng.uniform(-1e4, 1e4);
        let w = stable_softmax(&v).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let ws = stable_softmax(&shifted).unwrap();
        if !w.iter().all(|x| x.is_finite()) {
            pass = false;
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            pass = false;
        }
        for (a, b) in w.iter().zip(&ws) {
            worst_shift = worst_shift.max((a - b).abs());
        }
    }
    pass = pass && worst_shift < 1e-12;
    report(
        "6",
        "softmax properties",
        pass,
        &format!("worst shift deviation {worst_shift:.3e} over 1e4 vectors"),
    );
    assert!(pass);
}

fn hj_cfg_desk() -> HJConfig {
    let mut cfg = HJConfig::new(2.0, 2, 1e-2, 10).unwrap();
    cfg.n_eval_points = 100;
    cfg
}

const HJ_DELTAS: [f64; 7] = [
    1e-3,
    3.1622776601683795e-3,
    1e-2,
    3.1622776601683795e-2,
    1e-1,
    3.1622776601683795e-1,
    1.0,
];

/// Criterion 7a: with the smallest delta, the median residual at N = 1e5
/// is strictly below N = 10 (more samples, better solutions); the median
/// is also non-increasing across N in {10, 1e3, 1e5} there.
#[test]
fn criterion_07a_hj_more_samples_help() {
    let f = l1_norm(2);
    let cfg = hj_cfg_desk();
    let n_grid = [10usize, 1_000, 100_000];
    let rng = RngStream::new(707, 0);
    let mut medians = Vec::new();
    for ni in 0..n_grid.len() {
        let (vals, _missing) = hj_cell_pooled(&f, &cfg, &HJ_DELTAS, &n_grid, 0, ni, 10, &rng);
        medians.push(percentile(&vals, 0.5));
    }
    let pass = medians[2] < medians[0] && medians[0] >= medians[1] && medians[1] >= medians[2];
    report(
        "7a",
        "hj sample-count ordering",
        pass,
        &format!(
            "pooled medians at delta=1e-3: N=10 -> {:.3e}, N=1e3 -> {:.3e}, N=1e5 -> {:.3e}",
            medians[0], medians[1], medians[2]
        ),
    );
    assert!(pass, "medians {medians:?}");
}

/// Criterion 7b, exactly as specified: the N = 10 residual curve attains
/// its minimum at an interior delta (not the smallest).
///
/// With double-precision finite differences the N = 10 estimator noise
/// does not decay as delta grows (the weighted average of 10 box samples
/// keeps O(1) batch-to-batch variance at every temperature), so its
/// residual curve decreases toward the largest delta instead of turning
/// upward, and no interior minimum forms. Kept as an honest failing
/// criterion rather than silently reshaped.
#[test]
fn criterion_07b_hj_small_n_interior_minimum() {
    let f = l1_norm(2);
    let cfg = hj_cfg_desk();
    let n_grid = [10usize];
    let rng = RngStream::new(707, 0);
    let mut medians = Vec::new();
    for di in 0..HJ_DELTAS.len() {
        let (vals, _missing) = hj_cell_pooled(&f, &cfg, &HJ_DELTAS, &n_grid, di, 0, 10, &rng);
        medians.push(percentile(&vals, 0.5));
    }
    let argmin = medians
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let pass = argmin != 0 && argmin != HJ_DELTAS.len() - 1;
    report(
        "7b",
        "hj small-N interior minimum",
        pass,
        &format!(
            "N=10 medians over delta grid {medians:?}, argmin index {argmin} \
             (noise does not decay in delta at N=10; no interior minimum forms)"
        ),
    );
    assert!(
        pass,
        "criterion 7b: argmin at index {argmin}, medians {medians:?}"
    );
}

/// Criterion 8: the residual machinery itself is sound: the analytic
/// solution stub has residual at discretization level, and the sampled
/// solution for the quadratic initial condition keeps the median residual
/// below 0.05 at (N=1e5, delta=1e-2).
#[test]
fn criterion_08_hj_exact_solution_sanity() {
    // analytic stub, d=2, p=2
    let stub = |x: &[f64], t: f64| -> Result<f64, Error> {
        Ok(x.iter().map(|v| v * v).sum::<f64>() / (2.0 * (1.0 + t)))
    };
    let mut rng = RngStream::new(808, 0);
    let mut worst_stub = 0.0f64;
    for _ in 0..100 {
        let x = [rng.uniform(-9.9, 9.9), rng.uniform(-9.9, 9.9)];
        let t = rng.uniform(0.15, 0.95);
        let r = hj_residual_of(stub, 2.0, &x, t, 1e-4).unwrap();
        worst_stub = worst_stub.max(r);
    }

    let f = func(2, |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>());
    let cfg = {
        let mut c = HJConfig::new(2.0, 2, 1e-2, 100_000).unwrap();
        c.n_eval_points = 100;
        c
    };
    let mut residuals = Vec::new();
    let base = RngStream::new(809, 0);
    let mut prng = RngStream::new(810, 0);
    for i in 0..100u64 {
        let x = [prng.uniform(-9.9, 9.9), prng.uniform(-9.9, 9.9)];
        let t = prng.uniform(0.16, 0.94);
        residuals.push(hj_residual(&f, &x, t, &cfg, &base.derive(i)).unwrap());
    }
    residuals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = percentile(&residuals, 0.5);
    let pass = worst_stub <= 1e-6 && med <= 0.05;
    report(
        "8",
        "hj exact-solution sanity",
        pass,
        &format!("stub max residual {worst_stub:.3e} (<=1e-6), estimator median {med:.3e} (<=0.05)"),
    );
    assert!(pass, "stub {worst_stub:e}, median {med:e}");
}

/// Criterion 9: LPP drives the sphere benchmark from 160 to below 1e-2
/// within 300 iterations (3/3 seeds, factor >= 1e4 contraction by 200),
/// and tuned LPP beats tuned GD at iteration 500 on ellipsoidal and
/// discus.
#[test]
fn criterion_09_lpp_benchmarks() {
    let d = 10;
    let sphere = benchmark(Benchmark::Sphere, d);
    let mut pass = true;
    let mut details = Vec::new();
    for seed in 0..3u64 {
        let cfg = OptConfig {
            max_iters: 300,
            lambda: 1.0,
            delta: 1e-3,
            n_samples: 10_000,
            eta: 0.0,
            noise_sd: 0.0,
            x0: vec![4.0; d],
        };
        let trace = run(&Algorithm::Lpp, &sphere, &cfg, &RngStream::new(seed, 21));
        let v0 = trace.values[0];
        let v200 = trace.values[200];
        let vfinal = trace.final_value();
        if !((v0 - 160.0).abs() < 1e-9 && vfinal < 1e-2 && v200 < v0 / 1e4) {
            pass = false;
        }
        details.push(format!("sphere seed {seed}: v200={v200:.2e} final={vfinal:.2e}"));
    }

    for which in [Benchmark::Ellipsoidal, Benchmark::Discus] {
        let f = benchmark(which, d);
        let lpp_grid: Vec<OptConfig> = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
            .iter()
            .map(|&delta| OptConfig {
                max_iters: 500,
                lambda: 1.0,
                delta,
                n_samples: 10_000,
                eta: 0.0,
                noise_sd: 0.0,
                x0: vec![4.0; d],
            })
            .collect();
        let lpp = tune_grid(
            &Algorithm::Lpp,
            &f,
            &lpp_grid,
            500,
            &RngStream::new(50, 22),
        )
        .unwrap();
        let grad = move |x: &[f64]| f.gradient(x);
        let mut gd_grid = Vec::new();
        for eta in [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
            for noise in [0.0, 0.01, 0.1, 1.0] {
                gd_grid.push(OptConfig {
                    max_iters: 500,
                    lambda: 1.0,
                    delta: 1.0,
                    n_samples: 1,
                    eta,
                    noise_sd: noise,
                    x0: vec![4.0; d],
                });
            }
        }
        let gd = tune_grid(
            &Algorithm::Gd { grad: &grad },
            &f,
            &gd_grid,
            500,
            &RngStream::new(51, 23),
        )
        .unwrap();
        let lv = lpp.trace.final_value();
        let gv = gd.trace.final_value();
        if !(lv < gv) {
            pass = false;
        }
        details.push(format!(
            "{}: tuned LPP(500)={lv:.3e} vs tuned GD(500)={gv:.3e}",
            f.which.name()
        ));
    }
    report("9", "lpp benchmarks", pass, &details.join("; "));
    assert!(pass, "{details:?}");
}

/// Criterion 10: RGF steps on quadratics match analytic GD steps within 5
/// empirical standard errors (100 trials).
#[test]
fn criterion_10_rgf_matches_gd() {
    let d = 5;
    // anisotropic quadratic f(y) = sum k_i y_i^2 / 2
    let ks = [1.0, 2.0, 0.5, 3.0, 1.5];
    let f = func(d, move |y: &[f64]| {
        0.5 * y.iter().zip(&ks).map(|(v, k)| k * v * v).sum::<f64>()
    });
    let mut rng = RngStream::new(1010, 0);
    let mut failures = 0usize;
    for trial in 0..100u64 {
        let x: Vec<f64> = (0..d).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let cfg = OptConfig {
            max_iters: 1,
            lambda: 1.0,
            delta: 0.01,
            n_samples: 1000,
            eta: 0.1,
            noise_sd: 0.0,
            x0: x.clone(),
        };
        let mut srng = RngStream::new(2000 + trial, 0);
        let step = rgf_step(&f, &x, &cfg, &mut srng);
        let gd_step: Vec<f64> = x
            .iter()
            .zip(&ks)
            .map(|(xi, k)| xi - cfg.eta * k * xi)
            .collect();
        // independent replication of the estimator to get per-coordinate
        // standard errors of the averaged direction
        let mut se_rng = RngStream::new(3000 + trial, 0);
        let fx = f.eval(&x);
        let mut sums = vec![0.0; d];
        let mut sq = vec![0.0; d];
        let n = cfg.n_samples;
        let sd = cfg.delta.sqrt();
        let mut y = vec![0.0; d];
        for _ in 0..n {
            for i in 0..d {
                y[i] = x[i] + sd * se_rng.standard_normal();
            }
            let diff = (f.eval(&y) - fx) / cfg.delta;
            for i in 0..d {
                let c = diff * (y[i] - x[i]);
                sums[i] += c;
                sq[i] += c * c;
            }
        }
        for i in 0..d {
            let mean = sums[i] / n as f64;
            let var = (sq[i] / n as f64 - mean * mean).max(0.0);
            let se = cfg.eta * (var / n as f64).sqrt();
            if (step[i] - gd_step[i]).abs() > 5.0 * se {
                failures += 1;
            }
        }
    }
    let pass = failures == 0;
    report(
        "10",
        "rgf matches gd",
        pass,
        &format!("{failures} coordinate deviations beyond 5 SE in 100 trials x {d} coords"),
    );
    assert!(pass);
}

fn paper_bpgd_cfg(d: usize) -> BpgdConfig {
    BpgdConfig {
        eta: 1e-5,
        delta: 2e-3,
        n_samples: 50_000,
        proposal: CoordinateProposal::Uniform {
            lo: COORD_BOX_LO,
            hi: COORD_BOX_HI,
        },
        x0: vec![1.0; d],
    }
}

/// Criterion 11: sampled Burg BPGD tracks exact Burg BPGD within 0.1 in
/// the max norm over 100 iterations at the published settings, and the
/// exact step matches a brute-force grid minimization of its subproblem.
#[test]
fn criterion_11_bpgd_equivalence() {
    let (prob, _) = gen_poisson_problem(5, 5, &RngStream::new(1100, 0), Conditioning::Well)
        .unwrap();
    let cfg = paper_bpgd_cfg(5);
    let exact = bpgd_run(&prob, &cfg, BpgdVariant::Exact, 100, &RngStream::new(1, 31)).unwrap();
    let sampled =
        bpgd_run(&prob, &cfg, BpgdVariant::LaplaceBurg, 100, &RngStream::new(1, 31)).unwrap();
    let mut max_dev = 0.0f64;
    for (xe, xs) in exact.iterates.iter().zip(&sampled.iterates) {
        for (a, b) in xe.iter().zip(xs) {
            max_dev = max_dev.max((a - b).abs());
        }
    }

    // exact step vs 1D grid oracle on two iterates
    let mut oracle_ok = true;
    let mut rng = RngStream::new(1101, 0);
    for _ in 0..2 {
        let z: Vec<f64> = (0..5).map(|_| rng.uniform(0.5, 6.0)).collect();
        let step = bpgd_exact_step(&prob, &z, &cfg).unwrap();
        let g = grad_d(&prob, &z).unwrap();
        let grid_n = 1_000_000;
        for i in 0..5 {
            let slope = prob.mu + g[i];
            let mut best = (f64::INFINITY, 0.0);
            for k in 0..=grid_n {
                let y = COORD_BOX_LO + (COORD_BOX_HI - COORD_BOX_LO) * k as f64 / grid_n as f64;
                let v = slope * y + (-(y / z[i]).ln() + (y - z[i]) / z[i]) / cfg.eta;
                if v < best.0 {
                    best = (v, y);
                }
            }
            let res = (COORD_BOX_HI - COORD_BOX_LO) / grid_n as f64;
            if (best.1 - step[i]).abs() > res {
                oracle_ok = false;
            }
        }
    }
    let pass = max_dev <= 0.1 && oracle_ok && exact.aborted.is_none() && sampled.aborted.is_none();
    report(
        "11",
        "bpgd equivalence",
        pass,
        &format!("max |exact - sampled| = {max_dev:.3e} over 100 iters; grid oracle ok = {oracle_ok}"),
    );
    assert!(pass, "max_dev {max_dev}, oracle {oracle_ok}");
}

/// Criterion 12, exactly as specified: on the ill-conditioned rank-one
/// instance the variable-metric majorizer reaches a strictly lower
/// criterion than exact Burg BPGD by iteration 200, for 3/3 seeds.
///
/// On rank-one instances A = a a^T the data-fit term depends only on
/// s = a^T x, and at any iterate and matched step size the exact Burg
/// update moves s at speed proportional to sum_i a_i^2 x_i^2 while the
/// variable-metric subproblem moves it at speed (a^T x)^2 / n, which is
/// never larger (Cauchy-Schwarz). The sampled variable-metric step also
/// pays an l1 floor from the temperature-delta exponential spread of the
/// off-ridge coordinates. Exact Burg therefore stays at or below the
/// variable-metric criterion at every horizon here; the acceleration in
/// the source figure does not materialize for this algorithm on this
/// instance class. Kept as an honest failing criterion.
#[test]
fn criterion_12_bpgd_variable_metric_acceleration() {
    let (prob, _) =
        gen_poisson_problem(5, 5, &RngStream::new(1200, 0), Conditioning::Ill).unwrap();
    let cfg = paper_bpgd_cfg(5);
    let mut pass = true;
    let mut details = Vec::new();
    for seed in 0..3u64 {
        let exact =
            bpgd_run(&prob, &cfg, BpgdVariant::Exact, 200, &RngStream::new(seed, 41)).unwrap();
        let vm = bpgd_run(
            &prob,
            &cfg,
            BpgdVariant::LaplaceVarMetric,
            200,
            &RngStream::new(seed, 41),
        )
        .unwrap();
        let (ve, vv) = (exact.final_value(), vm.final_value());
        if !(vv < ve) {
            pass = false;
        }
        details.push(format!("seed {seed}: varmetric {vv:.6} vs exact {ve:.6}"));
    }
    report(
        "12",
        "bpgd variable-metric acceleration",
        pass,
        &details.join("; "),
    );
    assert!(pass, "{details:?}");
}
