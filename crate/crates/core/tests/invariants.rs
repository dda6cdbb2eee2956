//! Cross-module invariants: the parameter-free regret bound with its exact
//! constants, the RKHS-norm chain for the horizon-free kernel, and the
//! regret equality of the reduction.

use dynreg::analysis::{comparator_rkhs_norm, dynamic_regret, path_length};
use dynreg::environments::{build_env, EnvConfig, EnvKind};
use dynreg::hilbert::dot;
use dynreg::kernels::KernelSpec;
use dynreg::learners::{OnlineLearner, PfLearner};
use dynreg::reduction::{run_reduction, Wrappers};
use dynreg::verify::{check_discrete_pl, plateau_constant, Interpolant};

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static HF_128: Lazy<KernelSpec> =
    Lazy::new(|| KernelSpec::horizon_free(128, 1e-8).expect("table builds"));

fn rand_unit_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = dot(&v, &v).sqrt();
        if n <= 1.0 && n > 1e-9 {
            return v.iter().map(|x| x * radius / 1.0).collect();
        }
    }
}

/// Prop-style parameter-free bound with its printed constants:
/// R <= 4 G0 eps + 6 ||U|| max(sqrt(V_{T+1} log(||U||/alpha+1)),
///                             G log(||U||/alpha+1)).
#[test]
fn pf_regret_bound_holds_with_exact_constants() {
    let kernels: Vec<(KernelSpec, f64)> = vec![
        (KernelSpec::Spline, 64.0),
        (KernelSpec::gaussian(2.0).unwrap(), 1.0),
        (HF_128.clone(), HF_128.diag(1)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (kernel, diag_max) in &kernels {
        for trial in 0..5 {
            let t_max = 64u32;
            let d = 2usize;
            let g_lip = 1.0;
            let eps = 1.0;
            let grads: Vec<Vec<f64>> = (0..t_max)
                .map(|_| {
                    let v = rand_unit_ball(&mut rng, d, 1.0);
                    let n = dot(&v, &v).sqrt().max(1e-12);
                    let scale = rng.gen_range(0.1..1.0) / n;
                    v.iter().map(|x| x * scale).collect()
                })
                .collect();
            let comps: Vec<Vec<f64>> =
                (0..t_max).map(|_| rand_unit_ball(&mut rng, d, 0.5)).collect();

            let mut pf = PfLearner::new(kernel.clone(), d, eps, g_lip, *diag_max).unwrap();
            let mut regret = 0.0;
            for t in 1..=t_max {
                let w = pf.play(t).unwrap();
                let g = &grads[(t - 1) as usize];
                let u = &comps[(t - 1) as usize];
                regret += dot(g, &w) - dot(g, u);
                pf.observe(t, g).unwrap();
            }
            let g0 = g_lip * diag_max.sqrt();
            let v_final = pf.gram().v;
            let alpha = eps * g0 / (v_final.sqrt() * (v_final / (g0 * g0)).ln().powi(2));
            let u_norm = comparator_rkhs_norm(&comps, kernel).unwrap();
            let lg = (u_norm / alpha + 1.0).ln();
            let bound =
                4.0 * g0 * eps + 6.0 * u_norm * (v_final * lg).sqrt().max(g_lip * lg);
            assert!(
                regret <= bound,
                "{} trial {trial}: regret {regret} > bound {bound}",
                kernel.name()
            );
        }
    }
}

/// The horizon-free RKHS norm of a piecewise-constant comparator is capped
/// by the theorem chain c^2 ||du||_L1 ||u - u''||_inf (ln(1+T) lnln(1+T))^2,
/// with the numerator quantities measured on the verify interpolant.
#[test]
fn hf_rkhs_norm_capped_by_path_length_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let t_max = 24usize;
    let mut comps: Vec<Vec<f64>> = Vec::new();
    let mut value = rng.gen_range(-1.0..1.0);
    for t in 0..t_max {
        if t % 6 == 0 {
            value = rng.gen_range(-1.0f64..1.0);
        }
        comps.push(vec![value]);
    }
    let kernel = KernelSpec::horizon_free(t_max as u32, 1e-8).unwrap();
    let norm = comparator_rkhs_norm(&comps, &kernel).unwrap();

    let interp = Interpolant::new(comps.clone(), 1, 1.0 / 256.0).unwrap();
    let report = check_discrete_pl(&interp).unwrap();
    assert!(report.pass);
    let (p_t, _, m) = path_length(&comps);
    // measured factors, then the theorem constants of the discrete chain
    let du_l1 = 2.0 * plateau_constant(1, 1) * (comps[0][0].abs() + p_t);
    let sup = 12.0 * (1.0 + plateau_constant(2, 1)) * m;
    let c_sq = (2.0 * std::f64::consts::PI * std::f64::consts::E).powi(4);
    let t1 = (1.0 + t_max as f64).ln();
    let cap = c_sq * du_l1 * sup * (t1 * t1.ln()).powi(2);
    assert!(
        norm * norm <= cap,
        "norm^2 {} exceeds the path-length cap {cap}",
        norm * norm
    );
}

/// Thm regret-equality: for linear losses the dynamic regret measured on
/// the trace equals the static regret of the auxiliary sequence computed
/// independently in span representation.
#[test]
fn trace_regret_matches_span_static_regret() {
    let cfg = EnvConfig {
        kind: EnvKind::LinearPiecewise,
        dim: 2,
        horizon: 48,
        switches: 2,
        magnitude: 1.0,
        noise: 0.3,
        seed: 11,
    };
    let mut env = build_env(&cfg).unwrap();
    let mut pf = PfLearner::new(KernelSpec::Spline, 2, 1.0, 1.0, 48.0).unwrap();
    let traces = run_reduction(&mut pf, env.as_mut(), 48, Wrappers::default()).unwrap();
    let dynamic = dynamic_regret(&traces);

    // static regret in operator space: sum <G_t, W_t - U>_HS computed via
    // kernel sums; <G_t, W_t> = <g_t, w_t> and <G_t, U> = <g_t, u_t> by the
    // reproducing property, evaluated term by term
    let spanwise: f64 = traces
        .iter()
        .map(|tr| dot(&tr.g, &tr.w) - dot(&tr.g, &tr.u))
        .sum();
    assert!((dynamic - spanwise).abs() <= 1e-10 * dynamic.abs().max(1.0));
}
