//! Monte-Carlo checks of the noisy gate and trajectory ensembles. Every test
//! uses a fixed seed chosen before the test was first run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qnoise::bounds::{epsilon_p_bound, BoundInputs};
use qnoise::experiments::{exact_series, loglog_slope};
use qnoise::linalg::{
    append_ancilla_ground, partial_trace_ancilla_raw, trace_distance_raw, ComplexMatrix, DensityMatrix, C64,
};
use qnoise::model::{presets, LindbladModel};
use qnoise::noise_gate::NoiseGatePlan;
use qnoise::propagator::TrotterMode;
use qnoise::trajectory::{reset_ancilla_measure, run_ensemble, Observable, RunConfig, SimulationMode};

const SEED: u64 = 0x5eed_2024;

/// Mean and standard error of a sample.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn spin_gamma(gamma: f64) -> LindbladModel {
    presets::single_spin(presets::SPIN_OMEGA, gamma).unwrap()
}

#[test]
fn sk_entries_have_zero_mean() {
    let m = presets::single_spin_default().unwrap();
    let plan = NoiseGatePlan::build(&m, 1e-6, TrotterMode::Exact, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 100_000;
    for c in 0..plan.channels.len() {
        let samples: Vec<ComplexMatrix> = (0..n).map(|_| plan.sample_sk(c, &mut rng).unwrap().0).collect();
        for idx in 0..16 {
            let (i, j) = (idx / 4, idx % 4);
            for part in [|z: C64| z.re, |z: C64| z.im] {
                let xs: Vec<f64> = samples.iter().map(|s| part(s[(i, j)])).collect();
                let (mu, se) = mean_se(&xs);
                if se == 0.0 {
                    assert_eq!(mu, 0.0);
                } else {
                    assert!(mu.abs() <= 4.0 * se, "channel {c} entry ({i},{j}): {mu} vs se {se}");
                }
            }
        }
    }
}

#[test]
fn constant_integrand_variance() {
    // H = 0: S = J W(dt), so Var S_ij = |J_ij|^2 dt.
    let dt = 0.01;
    let m = presets::dephasing(1.0, 0.0).unwrap();
    let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 8).unwrap();
    let j = &plan.channels[0].j_nodes[0];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let samples: Vec<ComplexMatrix> = (0..100_000).map(|_| plan.sample_sk(0, &mut rng).unwrap().0).collect();
    for i in 0..4 {
        for k in 0..4 {
            let want = j[(i, k)].norm_sqr() * dt;
            let sq: Vec<f64> = samples.iter().map(|s| s[(i, k)].norm_sqr()).collect();
            let (v, se) = mean_se(&sq);
            assert!(
                (v - want).abs() <= 3.0 * se.max(1e-300),
                "({i},{k}): {v} vs {want} (se {se})"
            );
        }
    }
}

#[test]
fn rotating_integrand_covariance() {
    // H = (Ω/2) X, L = Z: L(s) = cos(Ωs) Z + sin(Ωs) Y. With the ancilla last,
    // S[(1,0)] = ∫cos dW, S[(3,0)] = i ∫sin dW.
    let omega = presets::SPIN_OMEGA;
    let dt = 1e-6;
    let x: qnoise::model::PauliString = "X".parse().unwrap();
    let z: qnoise::model::PauliString = "Z".parse().unwrap();
    let m = LindbladModel::new(
        1,
        vec![qnoise::model::HamiltonianTerm::pauli(omega / 2.0, &x).unwrap()],
        vec![qnoise::model::LindbladTerm::pauli(1.0, &z).unwrap()],
    )
    .unwrap();
    let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let samples: Vec<ComplexMatrix> = (0..100_000).map(|_| plan.sample_sk(0, &mut rng).unwrap().0).collect();

    let w = omega * dt;
    let cc = dt / 2.0 + (2.0 * w).sin() / (4.0 * omega);
    let ss = dt / 2.0 - (2.0 * w).sin() / (4.0 * omega);
    let cs = w.sin().powi(2) / (2.0 * omega);
    type Moment = Box<dyn Fn(&ComplexMatrix) -> f64>;
    let checks: [(&str, Moment, f64); 3] = [
        ("cos^2", Box::new(|s| s[(1, 0)].re * s[(1, 0)].re), cc),
        ("sin^2", Box::new(|s| s[(3, 0)].im * s[(3, 0)].im), ss),
        ("cos sin", Box::new(|s| s[(1, 0)].re * s[(3, 0)].im), cs),
    ];
    for (name, f, want) in checks {
        let xs: Vec<f64> = samples.iter().map(&f).collect();
        let (got, se) = mean_se(&xs);
        assert!(
            (got - want).abs() <= 3.0 * se,
            "{name}: {got:e} vs {want:e} (se {se:e})"
        );
    }
}

fn gate_average(plan: &NoiseGatePlan, rho: &ComplexMatrix, n: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    let full = append_ancilla_ground(rho);
    (0..n)
        .map(|_| {
            let g = plan.sample_gate(rng).unwrap().matrix;
            partial_trace_ancilla_raw(&full.conjugate_by(&g), plan.system_dim()).unwrap()
        })
        .collect()
}

fn plus_y() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, s)])
        .unwrap()
        .into_matrix()
}

#[test]
fn gate_average_matches_expected_channel() {
    // γΔt = 1e-3: the O((γΔt)^2) gap between the gate average and the
    // first-order channel sits well below the sampling error here.
    let dt = 1e-6;
    let m = spin_gamma(1e-3 / dt);
    let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 8).unwrap();
    let rho = plus_y();
    let want = plan.expected_channel().apply_raw(&rho);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let outs = gate_average(&plan, &rho, 100_000, &mut rng);
    for i in 0..2 {
        for j in 0..2 {
            for (part, w) in [(0, want[(i, j)].re), (1, want[(i, j)].im)] {
                let xs: Vec<f64> = outs
                    .iter()
                    .map(|o| if part == 0 { o[(i, j)].re } else { o[(i, j)].im })
                    .collect();
                let (mu, se) = mean_se(&xs);
                assert!(
                    (mu - w).abs() <= 3.0 * se.max(1e-15),
                    "({i},{j}) part {part}: {mu} vs {w} (se {se:e})"
                );
            }
        }
    }
}

fn mean_gap(gamma_dt: f64, n: usize, seed: u64) -> f64 {
    let dt = 1e-6;
    let m = spin_gamma(gamma_dt / dt);
    let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 8).unwrap();
    let rho = plus_y();
    let want = plan.expected_channel().apply_raw(&rho);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = ComplexMatrix::zeros(2, 2);
    for o in gate_average(&plan, &rho, n, &mut rng) {
        acc.add_scaled_real(&o, 1.0 / n as f64);
    }
    acc.max_abs_diff(&want)
}

#[test]
fn gate_average_bias_is_second_order() {
    // At larger γΔt the gap is dominated by the neglected second-order terms
    // and quarters when γΔt halves.
    let big = mean_gap(4e-2, 100_000, SEED + 10);
    let small = mean_gap(2e-2, 100_000, SEED + 11);
    let ratio = big / small;
    assert!((2.8..5.5).contains(&ratio), "{big:e} / {small:e} = {ratio}");
}

#[test]
fn gate_average_converges_at_inverse_sqrt_rate() {
    let dt = 1e-6;
    let m = spin_gamma(1e-3 / dt);
    let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 8).unwrap();
    let rho = plus_y();
    let want = plan.expected_channel().apply_raw(&rho);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let sizes = [100usize, 1_000, 10_000];
    let reps = 20;
    let errs: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            (0..reps)
                .map(|_| {
                    let outs = gate_average(&plan, &rho, n, &mut rng);
                    let mut acc = ComplexMatrix::zeros(2, 2);
                    for o in &outs {
                        acc.add_scaled_real(o, 1.0 / n as f64);
                    }
                    acc.max_abs_diff(&want)
                })
                .sum::<f64>()
                / reps as f64
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &errs).unwrap();
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}, errors {errs:?}");
}

#[test]
fn dephasing_flip_probability() {
    // H = 0, L = Z: the ancilla flips with probability sin^2(√γ W), whose
    // mean is (1 - e^{-2γΔt}) / 2 ≈ γΔt.
    let (gamma, dt) = (1.0, 1e-3);
    let m = presets::dephasing(gamma, 0.0).unwrap();
    let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 8).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let p1: Vec<f64> = (0..100_000)
        .map(|_| {
            let g = plan.sample_gate(&mut rng).unwrap().matrix;
            g.matvec(&psi).iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum()
        })
        .collect();
    let (mu, se) = mean_se(&p1);
    let want = (1.0 - (-2.0 * gamma * dt).exp()) / 2.0;
    assert!((mu - want).abs() <= 3.0 * se, "{mu} vs {want} (se {se:e})");
    assert!((want - gamma * dt).abs() < (gamma * dt).powi(2) * 1.01);
}

#[test]
fn born_rule_frequency() {
    // (|ψ0>|0> + |ψ1>|1>) with ‖ψ0‖² = 0.3.
    let a = 0.3f64.sqrt();
    let b = 0.7f64.sqrt();
    let state = [
        C64::new(a * 0.6, 0.0),
        C64::new(0.0, b),
        C64::new(0.0, a * 0.8),
        C64::new(0.0, 0.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let n = 100_000;
    let zeros = (0..n)
        .filter(|_| {
            let r = reset_ancilla_measure(&state, &mut rng).unwrap();
            let norm: f64 = r.state.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(r.state.iter().skip(1).step_by(2).all(|z| *z == C64::new(0.0, 0.0)));
            r.outcome == 0
        })
        .count();
    let f = zeros as f64 / n as f64;
    let sigma = (0.3 * 0.7 / n as f64).sqrt();
    assert!((f - 0.3).abs() <= 3.0 * sigma, "frequency {f}");
}

fn spin_config(m: &LindbladModel, n_r: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::new(m, 1e-6, 30, n_r, seed);
    cfg.observables = ["Z", "X", "Y"]
        .iter()
        .map(|p| Observable::pauli(&p.parse().unwrap()))
        .collect();
    cfg
}

#[test]
fn measure_reset_and_partial_trace_agree() {
    let m = spin_gamma(1e4);
    let mut cfg = spin_config(&m, 1000, SEED + 7);
    cfg.record_rho = true;
    let mr = run_ensemble(&m, &cfg).unwrap();
    cfg.mode = SimulationMode::PartialTrace;
    let pt = run_ensemble(&m, &cfg).unwrap();
    for (a, b) in mr.observables.iter().zip(&pt.observables) {
        for s in 0..=30 {
            let tol = 3.0 * (a.stderr[s].powi(2) + b.stderr[s].powi(2)).sqrt();
            assert!((a.mean[s] - b.mean[s]).abs() <= tol.max(1e-12), "{} step {s}", a.label);
        }
    }
    for s in 0..=30 {
        mr.density(s).unwrap();
        pt.density(s).unwrap();
    }
}

#[test]
fn noiseless_modes_follow_rabi_rotation() {
    let m = spin_gamma(0.0);
    let mut cfg = spin_config(&m, 3, SEED + 8);
    cfg.record_rho = true;
    let exact = qnoise::exact::ExactPropagator::new(&m, 1e-6).unwrap();
    for mode in [SimulationMode::MeasureReset, SimulationMode::PartialTrace] {
        cfg.mode = mode;
        let res = run_ensemble(&m, &cfg).unwrap();
        let mut rho = DensityMatrix::basis(2, 0).unwrap().into_matrix();
        for s in 0..=30 {
            let got = res.rho_mean.as_ref().unwrap()[s].clone();
            assert!(trace_distance_raw(&got, &rho).unwrap() <= 1e-9, "{mode} step {s}");
            rho = exact.apply_raw(&rho).unwrap();
        }
    }
}

#[test]
fn final_z_coverage() {
    let m = presets::single_spin_default().unwrap();
    let base = spin_config(&m, 1000, 0);
    let exact = exact_series(&m, &base).unwrap()[0][30];
    let runs = 40;
    let covered = (0..runs)
        .filter(|&r| {
            let cfg = spin_config(&m, 1000, SEED + 100 + r);
            let res = run_ensemble(&m, &cfg).unwrap();
            let z = &res.observables[0];
            (z.mean[30] - exact).abs() <= 4.0 * z.stderr[30]
        })
        .count();
    assert!(covered as f64 >= 0.95 * runs as f64, "{covered}/{runs}");
}

#[test]
fn thread_count_does_not_change_results() {
    let m = presets::two_molecule().unwrap();
    let mut cfg = RunConfig::new(&m, 0.05, 10, 300, SEED + 9);
    cfg.observables = Observable::populations(2);
    cfg.record_rho = true;
    cfg.initial_state = vec![C64::new(0.0, 0.0); 4];
    cfg.initial_state[2] = C64::new(1.0, 0.0);
    let runs: Vec<_> = [1, 3, 8]
        .iter()
        .map(|&t| {
            cfg.threads = Some(t);
            run_ensemble(&m, &cfg).unwrap()
        })
        .collect();
    for r in &runs[1..] {
        for (a, b) in runs[0].observables.iter().zip(&r.observables) {
            assert!(a.mean.iter().zip(&b.mean).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a.stderr.iter().zip(&b.stderr).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(runs[0].rho_mean, r.rho_mean);
    }
}

fn channel_output_gap(m: &LindbladModel, dt: f64, m1: usize, m2: usize) -> f64 {
    let a = NoiseGatePlan::build(m, dt, TrotterMode::Exact, m1).unwrap();
    let b = NoiseGatePlan::build(m, dt, TrotterMode::Exact, m2).unwrap();
    let states = [
        DensityMatrix::basis(2, 0).unwrap().into_matrix(),
        DensityMatrix::basis(2, 1).unwrap().into_matrix(),
        plus_y(),
    ];
    states
        .iter()
        .map(|r| trace_distance_raw(&a.expected_channel().apply_raw(r), &b.expected_channel().apply_raw(r)).unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn substep_doubling_within_per_step_bound() {
    // Spin at γΔt = 1e-4 with M >= 64, and a slowly driven spin at M = 8.
    let m = presets::single_spin_default().unwrap();
    let eps = epsilon_p_bound(&BoundInputs::from_model(&m, 1e-6, 1, TrotterMode::Exact).unwrap());
    for sub in [64, 128] {
        let gap = channel_output_gap(&m, 1e-6, sub, 2 * sub);
        assert!(gap < eps, "M = {sub}: {gap:e} vs {eps:e}");
    }
    let slow = presets::single_spin(presets::SPIN_OMEGA / 20.0, presets::SPIN_GAMMA).unwrap();
    let gap = channel_output_gap(&slow, 1e-6, 8, 16);
    assert!(gap < eps, "slow drive: {gap:e} vs {eps:e}");
    // The gap halves with each doubling (left-endpoint rule is first order).
    let g1 = channel_output_gap(&m, 1e-6, 8, 16);
    let g2 = channel_output_gap(&m, 1e-6, 16, 32);
    assert!((g1 / g2 - 2.0).abs() < 0.2, "{g1:e} {g2:e}");
}
