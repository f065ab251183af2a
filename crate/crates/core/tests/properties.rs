use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qnoise::bounds::{epsilon_global_bound, epsilon_p_bound, epsilon_t_bound, BoundInputs};
use qnoise::linalg::{
    append_ancilla_ground, kron, matexp, partial_trace_ancilla_raw, spectral_norm, trace_distance_raw, unvectorize,
    vectorize, ComplexMatrix, C64,
};
use qnoise::model::{HamiltonianTerm, LindbladModel, LindbladTerm, Pauli, PauliString};
use qnoise::noise_gate::{exp_coupling, NoiseGatePlan};
use qnoise::propagator::TrotterMode;
use qnoise::rng::{derive_seed, trajectory_seed};

fn complex_matrix(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
        ComplexMatrix::from_vec(d, d, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap()
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(d).prop_map(|a| a.hermitian_part())
}

fn density(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(d).prop_map(|a| {
        let p = a.matmul(&a.adjoint());
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    })
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(prop::sample::select(vec![Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]), n)
        .prop_map(|letters| PauliString::new(letters).unwrap())
}

fn model(n: usize) -> impl Strategy<Value = LindbladModel> {
    (
        prop::collection::vec((pauli_string(n), -2.0f64..2.0), 1..4),
        prop::collection::vec((pauli_string(n), 0.0f64..0.5), 1..4),
    )
        .prop_map(move |(h, l)| {
            let h = h.iter().map(|(p, c)| HamiltonianTerm::pauli(*c, p).unwrap()).collect();
            let l = l.iter().map(|(p, r)| LindbladTerm::pauli(*r, p).unwrap()).collect();
            LindbladModel::new(n, h, l).unwrap()
        })
}

fn bound_inputs() -> impl Strategy<Value = BoundInputs> {
    (
        (1u32..4, 1u32..3, 1u32..5),
        (1e-3f64..10.0, 1e-3f64..10.0, 0.1f64..2.0, 0.1f64..2.0),
        (1e-4f64..1e-1, 1u64..100, prop::option::of(1u32..3)),
    )
        .prop_map(
            |((k, m, j), (gamma, omega, h, l), (dt, n_steps, trotter_order))| BoundInputs {
                k: k as f64,
                m,
                n: 4,
                gamma,
                omega,
                j: j as f64,
                max_h_norm: h,
                max_l_norm: l,
                dt,
                n_steps,
                trotter_order,
            },
        )
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matexp_of_anti_hermitian_is_unitary(h in hermitian(16)) {
        let u = matexp(&h.scale(C64::new(0.0, -1.0))).unwrap();
        prop_assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn kron_mixed_product(a in complex_matrix(2), b in complex_matrix(3), c in complex_matrix(2), d in complex_matrix(3)) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(r in density(4), s in density(4), t in density(4)) {
        let d = |a: &ComplexMatrix, b: &ComplexMatrix| trace_distance_raw(a, b).unwrap();
        prop_assert!(d(&r, &r) < 1e-12);
        prop_assert!((d(&r, &s) - d(&s, &r)).abs() < 1e-12);
        prop_assert!(d(&r, &s) <= 1.0 + 1e-12);
        prop_assert!(d(&r, &s) <= d(&r, &t) + d(&t, &s) + 1e-12);
    }

    #[test]
    fn partial_trace_undoes_ancilla(r in density(4)) {
        let back = partial_trace_ancilla_raw(&append_ancilla_ground(&r), 4).unwrap();
        prop_assert!(back.max_abs_diff(&r) < 1e-15);
    }

    #[test]
    fn vectorize_round_trip(a in complex_matrix(3)) {
        let v = vectorize(&a);
        prop_assert_eq!(v[3 + 2], a[(2, 1)]);
        prop_assert_eq!(unvectorize(&v, 3), a);
    }

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(m in model(2), r in density(4)) {
        let out = unvectorize(&m.liouvillian().matvec(&vectorize(&r)), 4);
        prop_assert!(out.trace().norm() < 1e-12);
        prop_assert!(out.is_hermitian(1e-12));
        let direct = m.rhs(&m.total_hamiltonian(), &r);
        prop_assert!(out.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn pauli_strings_square_to_identity(p in pauli_string(3)) {
        let m = p.matrix();
        prop_assert!(m.matmul(&m).max_abs_diff(&ComplexMatrix::identity(8)) < 1e-15);
        prop_assert!(m.is_hermitian(0.0));
        prop_assert!(rel_close(spectral_norm(&m), 1.0, 1e-12));
        let back: PauliString = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn exp_coupling_matches_matexp(a in complex_matrix(2), scale in 1e-4f64..3.0) {
        let a = a.scale_real(scale);
        let sp = qnoise::model::sigma_plus();
        let sm = qnoise::model::sigma_minus();
        let gen = &kron(&a, &sp) - &kron(&a.adjoint(), &sm);
        let want = matexp(&gen).unwrap();
        let got = exp_coupling(&a).unwrap();
        prop_assert!(got.max_abs_diff(&want) < 1e-11, "diff {}", got.max_abs_diff(&want));
        prop_assert!(got.is_unitary(1e-11));
    }

    #[test]
    fn expected_channel_is_trace_preserving(m in model(2), r in density(4), dt in 1e-3f64..0.1) {
        let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Exact, 4).unwrap();
        let out = plan.expected_channel().apply_raw(&r);
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.is_hermitian(1e-12));
    }

    #[test]
    fn sampled_gates_unitary_and_generators_anti_hermitian(m in model(2), seed in any::<u64>(), dt in 1e-3f64..0.5) {
        let plan = NoiseGatePlan::build(&m, dt, TrotterMode::Order2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in 0..plan.channels.len() {
            let (s, _) = plan.sample_sk(c, &mut rng).unwrap();
            prop_assert!(s.is_anti_hermitian(1e-10));
        }
        let g = plan.sample_gate(&mut rng).unwrap();
        prop_assert!(g.matrix.is_unitary(1e-9));
    }

    #[test]
    fn bounds_nonnegative_and_monotone(i in bound_inputs(), f in 1.0f64..3.0) {
        let all = |i: &BoundInputs| [epsilon_p_bound(i), epsilon_t_bound(i), epsilon_global_bound(i)];
        let base = all(&i);
        prop_assert!(base.iter().all(|&v| v >= 0.0));
        let bumps: [fn(&mut BoundInputs, f64); 5] = [
            |i, f| i.gamma *= f,
            |i, f| i.omega *= f,
            |i, f| i.dt *= f,
            |i, f| i.k *= f,
            |i, _| i.m += 1,
        ];
        for bump in bumps {
            let mut j = i.clone();
            bump(&mut j, f);
            let grown = all(&j);
            for (a, b) in base.iter().zip(&grown) {
                prop_assert!(*b >= *a * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn bounds_invariant_under_unit_change(i in bound_inputs(), c in 1e-3f64..1e3) {
        let mut j = i.clone();
        j.gamma *= c;
        j.omega *= c;
        j.dt /= c;
        for (a, b) in [
            (epsilon_p_bound(&i), epsilon_p_bound(&j)),
            (epsilon_t_bound(&i), epsilon_t_bound(&j)),
            (epsilon_global_bound(&i), epsilon_global_bound(&j)),
        ] {
            prop_assert!(rel_close(a, b, 1e-10), "{a} vs {b}");
        }
    }

    #[test]
    fn seeds_are_deterministic_and_spread(master in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        prop_assert_eq!(trajectory_seed(master, a), trajectory_seed(master, a));
        prop_assert_eq!(derive_seed(master, &[a, b]), derive_seed(master, &[a, b]));
        if a != b {
            prop_assert_ne!(trajectory_seed(master, a), trajectory_seed(master, b));
        }
    }
}
