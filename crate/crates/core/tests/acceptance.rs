//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured quantities and wall-clock time (run with `--nocapture` to
//! see them on success).

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use once_cell::sync::Lazy;

use dynreg::analysis::{
    bound_optimal_pl, comparator_rkhs_norm, dynamic_regret, effective_dimension, logdet_sum_check,
    path_length, spline_closed_forms,
};
use dynreg::environments::{
    gen_expconcave, gen_linear_piecewise, gen_regression, EnvConfig, EnvKind,
};
use dynreg::hilbert::{dot, norm, sum_norm_sq, GramState};
use dynreg::kernels::{build_ti_table, density_mass, gram, KernelSpec, SpectralDensity};
use dynreg::learners::{KonsLearner, PfLearner, VawLearner};
use dynreg::reduction::{clip_gradient, run_reduction, ClipHint, RoundTrace, Wrappers};
use dynreg::verify::{
    c_of_t_bound, c_of_t_cap, check_discrete_pl, dirac_equivalence, sinc_l2_derivative_sq,
    sinc_l2_squared_path_bound, EquivalenceLearner, Interpolant,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shared horizon-free kernel for the long-horizon criteria.
static HORIZON_FREE_2048: Lazy<KernelSpec> =
    Lazy::new(|| KernelSpec::horizon_free(2048, 1e-8).expect("table builds"));

fn finish(name: &str, detail: String, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("ACCEPTANCE {name}: PASS ({detail}; {elapsed:.2?})");
    assert!(
        elapsed < budget,
        "{name} exceeded its runtime budget: {elapsed:.2?} > {budget:.2?}"
    );
}

#[test]
fn c01_spline_inverse_exactness() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for t_max in [2usize, 6, 64] {
        let rounds: Vec<u32> = (1..=t_max as u32).collect();
        let k = gram(&KernelSpec::Spline, &rounds).unwrap();
        let ki = k.try_inverse().expect("invertible");
        let (closed, _) = spline_closed_forms(t_max);
        for i in 0..t_max {
            for j in 0..t_max {
                let diff = (ki[(i, j)] - closed[(i, j)]).abs();
                worst = worst.max(diff);
                assert!(diff < 1e-10, "T={t_max} ({i},{j}): diff {diff:.2e}");
            }
        }
    }
    finish("c01 spline-inverse", format!("max entry diff {worst:.2e}"), started, Duration::from_secs(1));
}

#[test]
fn c02_spline_eigenvalue_closed_form() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for t_max in [8usize, 32] {
        let rounds: Vec<u32> = (1..=t_max as u32).collect();
        let k = gram(&KernelSpec::Spline, &rounds).unwrap();
        let ki = k.try_inverse().expect("invertible");
        let mut numeric: Vec<f64> = ki.symmetric_eigenvalues().iter().cloned().collect();
        numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (_, mut closed) = spline_closed_forms(t_max);
        closed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (n, c) in numeric.iter().zip(&closed) {
            let diff = (n - c).abs();
            worst = worst.max(diff);
            assert!(diff < 1e-10, "T={t_max}: eigenvalue diff {diff:.2e}");
        }
    }
    finish("c02 spline-eigenvalues", format!("max eig diff {worst:.2e}"), started, Duration::from_secs(1));
}

#[test]
fn c03_effective_dimension_bound() {
    let started = Instant::now();
    let mut worst_margin = f64::INFINITY;
    for t_max in [10usize, 100, 1000] {
        let rounds: Vec<u32> = (1..=t_max as u32).collect();
        let k = gram(&KernelSpec::Spline, &rounds).unwrap();
        for lambda in [0.1, 1.0, 10.0, 100.0] {
            let deff = effective_dimension(&k, lambda).unwrap();
            let bound = PI * t_max as f64 / (2.0 * lambda.sqrt());
            assert!(deff <= bound, "T={t_max} lambda={lambda}: {deff} > {bound}");
            worst_margin = worst_margin.min(bound / deff);
        }
    }
    finish(
        "c03 effective-dimension",
        format!("tightest bound/deff ratio {worst_margin:.3}"),
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn c04_horizon_free_mass_and_table_stability() {
    let started = Instant::now();
    let density = SpectralDensity::horizon_free();
    let mass = density_mass(&density, 1e-8).unwrap();
    assert!(mass <= 8.0 * PI * PI, "mass {mass} exceeds 8 pi^2");
    let coarse = build_ti_table(&density, 64, 1e-8).unwrap();
    let fine = build_ti_table(&density, 64, 0.5e-8).unwrap();
    let mut worst: f64 = 0.0;
    for tau in 0..=64usize {
        let rel = (coarse.values[tau] - fine.values[tau]).abs() / fine.values[tau].abs();
        worst = worst.max(rel);
        assert!(rel < 1e-6, "lag {tau}: halving rel diff {rel:.2e}");
    }
    finish(
        "c04 horizon-free-mass",
        format!("mass {mass:.6} <= 8pi^2 {:.4}, worst halving diff {worst:.2e}", 8.0 * PI * PI),
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn c05_dirac_equivalence() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for (t_max, d) in [(8u32, 2usize), (16, 4)] {
        for learner in [EquivalenceLearner::Pf, EquivalenceLearner::Ftrl] {
            let r = dirac_equivalence(t_max, d, 1234, learner).unwrap();
            assert!(r.pass, "(T={t_max}, d={d}, {learner:?}): {r:?}");
            worst = worst.max(r.max_play_deviation).max(r.regret_deviation);
        }
    }
    finish("c05 dirac-equivalence", format!("max deviation {worst:.2e}"), started, Duration::from_secs(5));
}

#[test]
fn c06_gram_identities() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let t_max = rng.gen_range(1..=32u32);
        let d = rng.gen_range(1..=4usize);
        let kernel = if i % 2 == 0 { KernelSpec::Dirac } else { KernelSpec::Spline };
        let mut state = GramState::new(kernel.clone(), 1.0).unwrap();
        let mut grads: Vec<(u32, Vec<f64>)> = Vec::new();
        for t in 1..=t_max {
            let g: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            state.push(t, g.clone()).unwrap();
            grads.push((t, g));
        }
        let direct = sum_norm_sq(&grads, &kernel).unwrap();
        // explicit finite features: identity embedding for dirac, cumulative
        // ones for the spline kernel
        let feat_dim = t_max as usize * d;
        let mut dense = vec![0.0; feat_dim];
        for (t, g) in &grads {
            for col in 0..t_max as usize {
                let active = match kernel {
                    KernelSpec::Dirac => col + 1 == *t as usize,
                    KernelSpec::Spline => col + 1 <= *t as usize,
                    _ => unreachable!(),
                };
                if active {
                    for j in 0..d {
                        dense[col * d + j] += g[j];
                    }
                }
            }
        }
        let oracle: f64 = dense.iter().map(|x| x * x).sum();
        let scale = direct.abs().max(1e-12);
        let e1 = (state.s_sq - direct).abs() / scale;
        let e2 = (oracle - direct).abs() / scale;
        worst = worst.max(e1).max(e2);
        assert!(e1 <= 1e-9, "instance {i}: incremental vs direct {e1:.2e}");
        assert!(e2 <= 1e-9, "instance {i}: feature oracle vs direct {e2:.2e}");
    }
    finish("c06 gram-identities", format!("worst rel error {worst:.2e}"), started, Duration::from_secs(5));
}

#[test]
fn c07_logdet_inequality() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let kernels =
        [KernelSpec::Dirac, KernelSpec::Spline, KernelSpec::gaussian(2.0).unwrap()];
    let mut tightest = f64::INFINITY;
    for i in 0..100 {
        let kernel = &kernels[i % kernels.len()];
        let t_max = rng.gen_range(1..=32u32);
        let d = rng.gen_range(1..=3usize);
        let grads: Vec<(u32, Vec<f64>)> = (1..=t_max)
            .map(|t| (t, (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        for lambda in [0.1, 1.0, 10.0] {
            let (lhs, rhs) = logdet_sum_check(&grads, kernel, lambda).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-9), "instance {i} lambda {lambda}: {lhs} > {rhs}");
            if lhs > 0.0 {
                tightest = tightest.min(rhs / lhs);
            }
        }
    }
    finish("c07 logdet-inequality", format!("tightest rhs/lhs {tightest:.3}"), started, Duration::from_secs(30));
}

fn pf_piecewise_run(t_max: u32, switches: u32, seed: u64) -> (f64, Vec<RoundTrace>) {
    let cfg = EnvConfig {
        kind: EnvKind::LinearPiecewise,
        dim: 2,
        horizon: t_max,
        switches,
        magnitude: 1.0,
        noise: 0.25,
        seed,
    };
    let mut env = gen_linear_piecewise(&cfg).unwrap();
    let kernel = HORIZON_FREE_2048.clone();
    let mut pf = PfLearner::new(kernel.clone(), 2, 1.0, 1.0, kernel.diag(1)).unwrap();
    let traces = run_reduction(&mut pf, &mut env, t_max, Wrappers::default()).unwrap();
    (dynamic_regret(&traces), traces)
}

#[test]
fn c08_dynamic_regret_scaling() {
    let started = Instant::now();
    let horizons = [128u32, 256, 512, 1024, 2048];
    let seeds = [1u64, 2, 3];
    let mut mean_regrets = Vec::new();
    let mut ratios = Vec::new();
    for &t_max in &horizons {
        let mut acc = 0.0;
        let mut ratio_acc = 0.0;
        for &seed in &seeds {
            let (regret, traces) = pf_piecewise_run(t_max, 4, seed);
            acc += regret;
            let comps: Vec<Vec<f64>> = traces.iter().map(|tr| tr.u.clone()).collect();
            let (p_t, _, m) = path_length(&comps);
            let grad_sq: f64 = traces.iter().map(|tr| dot(&tr.g, &tr.g)).sum();
            let bound =
                bound_optimal_pl(m, p_t, grad_sq, HORIZON_FREE_2048.diag(1), t_max).unwrap();
            ratio_acc += regret / bound;
        }
        mean_regrets.push(acc / seeds.len() as f64);
        ratios.push(ratio_acc / seeds.len() as f64);
    }
    // least-squares slope on the log-log points
    let xs: Vec<f64> = horizons.iter().map(|t| (*t as f64).ln()).collect();
    let ys: Vec<f64> = mean_regrets.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    assert!(
        (0.35..=0.80).contains(&slope),
        "log-log slope {slope:.3} outside [0.35, 0.80]; regrets {mean_regrets:?}"
    );
    let rmax = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        rmax / rmin <= 3.0,
        "regret/bound ratio varies {:.2}x > 3x across the range (ratios {ratios:?})",
        rmax / rmin
    );
    finish(
        "c08 regret-scaling",
        format!("slope {slope:.3}, ratio spread {:.2}x", rmax / rmin),
        started,
        Duration::from_secs(900),
    );
}

#[test]
fn c09_path_length_sensitivity() {
    let started = Instant::now();
    let mut means = Vec::new();
    for &switches in &[0u32, 2, 8, 32] {
        let mut acc = 0.0;
        for seed in 0..5u64 {
            let (regret, _) = pf_piecewise_run(1024, switches, seed);
            acc += regret;
        }
        means.push(acc / 5.0);
    }
    for i in 1..means.len() {
        assert!(
            means[i] >= means[i - 1] * 0.95,
            "regret not monotone in switches: {means:?}"
        );
    }
    finish(
        "c09 switch-monotonicity",
        format!("mean regrets {:?}", means.iter().map(|m| (m * 10.0).round() / 10.0).collect::<Vec<_>>()),
        started,
        Duration::from_secs(600),
    );
}

#[test]
fn c10_curvature_regime() {
    let started = Instant::now();
    // KONS on fixed-comparator exp-concave streams: the ratio of cumulative
    // regrets at 2T vs T stays below 1.6 (logarithmic-growth signature)
    let kernel = HORIZON_FREE_2048.clone();
    let seeds = [0u64, 1, 2];
    let mut checkpoints = vec![0.0f64; 3]; // mean regret at 512, 1024, 2048
    for &seed in &seeds {
        let cfg = EnvConfig {
            kind: EnvKind::ExpConcave,
            dim: 2,
            horizon: 2048,
            switches: 0,
            magnitude: 1.0,
            noise: 0.1,
            seed,
        };
        let mut env = gen_expconcave(&cfg).unwrap();
        let beta = dynreg::environments::Environment::beta(&env).unwrap();
        let mut kons = KonsLearner::new(kernel.clone(), 2, beta, 1.0, None).unwrap();
        let traces = run_reduction(&mut kons, &mut env, 2048, Wrappers::default()).unwrap();
        let mut cum = 0.0;
        for tr in &traces {
            cum += tr.loss_play - tr.loss_comp;
            match tr.t {
                512 => checkpoints[0] += cum,
                1024 => checkpoints[1] += cum,
                2048 => checkpoints[2] += cum,
                _ => {}
            }
        }
    }
    let ratio_a = checkpoints[1] / checkpoints[0];
    let ratio_b = checkpoints[2] / checkpoints[1];
    assert!(ratio_a <= 1.6, "KONS regret(1024)/regret(512) = {ratio_a:.3} > 1.6");
    assert!(ratio_b <= 1.6, "KONS regret(2048)/regret(1024) = {ratio_b:.3} > 1.6");

    // VAW with the spline kernel on drifting regression streams: measured
    // regret under the effective-dimension bound on every tested instance
    let mut vaw_margin = f64::INFINITY;
    for &t_max in &[64u32, 256, 512] {
        for seed in 0..2u64 {
            let cfg = EnvConfig {
                kind: EnvKind::Regression,
                dim: 1,
                horizon: t_max,
                switches: 1,
                magnitude: 1.0,
                noise: 0.1,
                seed,
            };
            let mut env = gen_regression(&cfg).unwrap();
            let lambda = 1.0;
            let y_max_sq =
                env.labels().iter().map(|y| y * y).fold(0.0, f64::max);
            let benchmark: Vec<Vec<f64>> =
                env.benchmark().iter().map(|b| vec![*b]).collect();
            let mut vaw = VawLearner::new(KernelSpec::Spline, lambda).unwrap();
            let traces = run_reduction(&mut vaw, &mut env, t_max, Wrappers::default()).unwrap();
            let regret = dynamic_regret(&traces);
            let rounds: Vec<u32> = (1..=t_max).collect();
            let k = gram(&KernelSpec::Spline, &rounds).unwrap();
            let deff = effective_dimension(&k, lambda).unwrap();
            let u_norm = comparator_rkhs_norm(&benchmark, &KernelSpec::Spline).unwrap();
            let kappa_max = t_max as f64;
            let e = std::f64::consts::E;
            let bound = lambda * u_norm * u_norm
                + deff * y_max_sq * (e + e * t_max as f64 * kappa_max * kappa_max / lambda).ln();
            assert!(
                regret <= bound,
                "VAW T={t_max} seed={seed}: regret {regret:.3} > bound {bound:.3}"
            );
            vaw_margin = vaw_margin.min(bound / regret.max(1e-9));
        }
    }
    finish(
        "c10 curvature-regime",
        format!("KONS ratios {ratio_a:.3}/{ratio_b:.3}, VAW tightest bound/regret {vaw_margin:.1}"),
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn c11_appendix_constructions() {
    let started = Instant::now();
    // interpolation checks on 20 random instances
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst_residual: f64 = 0.0;
    for i in 0..20 {
        let t_max = rng.gen_range(4..=12usize);
        let values: Vec<Vec<f64>> =
            (0..t_max).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
        let interp = Interpolant::new(values.clone(), 1, 1.0 / 256.0).unwrap();
        let report = check_discrete_pl(&interp).unwrap();
        assert!(report.pass, "instance {i}: {report:?}");
        assert!(report.interp_residual <= 1e-8);
        worst_residual = worst_residual.max(report.interp_residual);

        // squared path length of the pure sinc interpolant
        let l2 = sinc_l2_derivative_sq(&values, 1.0 / 256.0, 1024.0);
        let bound = sinc_l2_squared_path_bound(&values);
        assert!(l2 <= bound, "instance {i}: {l2} > {bound}");
    }
    // c(T) bound for the horizon-free density
    let density = SpectralDensity::horizon_free();
    let c10 = c_of_t_bound(&density, 10, 0.1).unwrap();
    assert!(c10 <= c_of_t_cap(10), "c(10) = {c10} above cap {}", c_of_t_cap(10));
    finish(
        "c11 appendix-constructions",
        format!("worst interp residual {worst_residual:.2e}, c(10) {c10:.1} <= cap {:.1}", c_of_t_cap(10)),
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn c12_scale_free_wrapper() {
    let started = Instant::now();
    let t_max = 512u32;
    let kernel = HORIZON_FREE_2048.clone();
    let mut worst_ratio: f64 = 1.0;
    for seed in [1u64, 2, 3] {
        let cfg = EnvConfig {
            kind: EnvKind::LinearPiecewise,
            dim: 2,
            horizon: t_max,
            switches: 4,
            magnitude: 1.0,
            noise: 0.25,
            seed,
        };
        // wrapped learner on the stream whose gradients jump 100x at T/8
        let mut env_jump = gen_linear_piecewise(&cfg).unwrap();
        env_jump.scale_gradients_from(t_max / 8, 100.0);
        let mut wrapped = PfLearner::new(kernel.clone(), 2, 1.0, 1.0, kernel.diag(1)).unwrap();
        let traces_wrapped = run_reduction(
            &mut wrapped,
            &mut env_jump,
            t_max,
            Wrappers { clip: true, project: Some(1.0) },
        )
        .unwrap();

        // exact clipped telescoping on the same gradient stream
        let mut hint = ClipHint::default();
        let mut gap = 0.0;
        let mut max_norm: f64 = 0.0;
        for tr in &traces_wrapped {
            let n = norm(&tr.g);
            let (clipped, next) = clip_gradient(&tr.g, hint);
            gap += n - norm(&clipped);
            max_norm = max_norm.max(n);
            hint = next;
        }
        assert!(gap <= max_norm * (1.0 + 1e-12), "telescoping violated: {gap} > {max_norm}");

        // unwrapped learner with the matched Lipschitz bound on the
        // pre-scaled stream (100x from the start)
        let mut env_pre = gen_linear_piecewise(&cfg).unwrap();
        env_pre.scale_gradients_from(1, 100.0);
        let mut unwrapped =
            PfLearner::new(kernel.clone(), 2, 1.0, 100.0, kernel.diag(1)).unwrap();
        let traces_plain =
            run_reduction(&mut unwrapped, &mut env_pre, t_max, Wrappers::default()).unwrap();

        let r_wrapped = dynamic_regret(&traces_wrapped);
        let r_plain = dynamic_regret(&traces_plain);
        let ratio = (r_wrapped / r_plain).max(r_plain / r_wrapped);
        worst_ratio = worst_ratio.max(ratio);
        assert!(
            ratio <= 3.0,
            "seed {seed}: wrapped {r_wrapped:.2} vs unwrapped {r_plain:.2} (ratio {ratio:.2})"
        );
    }
    finish(
        "c12 scale-free-wrapper",
        format!("worst wrapped/unwrapped ratio {worst_ratio:.2}"),
        started,
        Duration::from_secs(120),
    );
}

// keep Arc in the public surface exercised
#[test]
fn shared_table_is_reusable() {
    let spec = HORIZON_FREE_2048.clone();
    if let KernelSpec::TranslationInvariant { table } = &spec {
        let t: Arc<_> = table.clone();
        assert_eq!(t.t_max(), 2048);
    } else {
        panic!("expected translation-invariant kernel");
    }
}
