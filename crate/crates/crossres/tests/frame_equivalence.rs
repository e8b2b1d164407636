//! The propagation module's master property: lab-frame time-ordered
//! evolution agrees with static drive-frame evolution after conjugation by
//! the drive-frame unitary, with second-order improvement under step
//! halving. Oracles here are independent routes to the same propagator,
//! never the same code path twice.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crossres::fock::{dagger, identity, max_abs_diff, unitarity_error};
use crossres::hamiltonian::{build_drive_frame, build_lab, SystemSpec};
use crossres::interaction::{signed_resonance, solve_frame_integers, InteractionTerm};
use crossres::propagation::{
    default_dt, frame_unitaries, propagate_static, propagate_time_ordered, sampled_evolution,
    to_interaction_picture, PropagationConfig, EvolutionPath,
};
use crossres::HilbertSpec;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A random weak-drive system whose drive frame is time independent: one
/// or two modes, one net-raising term per system on a single mode so the
/// frame fraction is exactly one.
fn random_static_frame_system(rng: &mut ChaCha8Rng) -> (SystemSpec, HilbertSpec) {
    let n_modes = rng.gen_range(1..=2usize);
    let mode_freqs: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(0.6..1.6)).collect();
    let mode_dims: Vec<usize> = (0..n_modes).map(|_| rng.gen_range(3..=5usize)).collect();
    let active = rng.gen_range(0..n_modes);
    let m2 = rng.gen_range(0..=1u32);
    let net = rng.gen_range(1..=2u32);
    let mut exps = vec![(0u32, 0u32); n_modes];
    exps[active] = (m2 + net, m2);
    let g = rng.gen_range(0.002..0.01);
    let term = InteractionTerm::new(c(g, 0.0), exps).unwrap();

    let resonant = signed_resonance(&term, &mode_freqs).unwrap();
    let drive_freq = resonant + rng.gen_range(-0.02..0.02);
    let qubit_freq = drive_freq + rng.gen_range(-0.05..0.05);
    let drive_strength = rng.gen_range(0.015..0.04);
    let spec = SystemSpec::new(qubit_freq, mode_freqs, vec![term], drive_strength, drive_freq)
        .unwrap();
    let h = HilbertSpec::new(mode_dims).unwrap();
    (spec, h)
}

#[test]
fn lab_stepping_matches_static_drive_frame_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..20 {
        let (spec, h) = random_static_frame_system(&mut rng);
        let frame = solve_frame_integers(spec.terms()).unwrap();
        let t_final = rng.gen_range(0.4..0.8);
        let dt = default_dt(&spec);

        let cfg = PropagationConfig {
            t_final,
            dt,
            samples: 1,
            truncation_tail: 1,
            tail_tolerance: 1e-6,
            refine_check: None,
        };
        let u_stepped = propagate_time_ordered(|t| build_lab(&spec, &h, t), &cfg).unwrap();
        let (ud, _) = frame_unitaries(&spec, &frame, &h, t_final).unwrap();
        let into_frame = dagger(ud.matrix()).dot(u_stepped.matrix());

        let hd = build_drive_frame(&spec, &frame, &h, 0.0).unwrap();
        let u_frame = propagate_static(&hd, t_final).unwrap();

        let err = max_abs_diff(&into_frame, u_frame.matrix());
        assert!(
            err <= 1e-6,
            "trial {trial}: frame equivalence error {err:.3e} at default dt"
        );

        let cfg_half = PropagationConfig { dt: dt / 2.0, ..cfg };
        let u_half = propagate_time_ordered(|t| build_lab(&spec, &h, t), &cfg_half).unwrap();
        let into_frame_half = dagger(ud.matrix()).dot(u_half.matrix());
        let err_half = max_abs_diff(&into_frame_half, u_frame.matrix());
        assert!(
            err_half * 3.5 <= err || err < 1e-10,
            "trial {trial}: halving improved {err:.3e} only to {err_half:.3e}"
        );

        assert!(unitarity_error(u_stepped.matrix()) < 1e-9);
    }
}

#[test]
fn stepped_self_convergence_is_second_order() {
    // distance between successive dt-halvings shrinks at least 3.5-fold,
    // over randomized small systems including time-dependent frames
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        let n_modes = rng.gen_range(1..=2usize);
        let mode_freqs: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(0.7..1.5)).collect();
        let mode_dims: Vec<usize> = (0..n_modes).map(|_| 3).collect();
        let mut exps = vec![(0u32, 0u32); n_modes];
        exps[0] = (1, 0);
        let term = InteractionTerm::new(c(rng.gen_range(0.01..0.05), 0.0), exps).unwrap();
        let spec = SystemSpec::new(
            rng.gen_range(0.8..1.4),
            mode_freqs,
            vec![term],
            rng.gen_range(0.05..0.2),
            rng.gen_range(0.8..1.4),
        )
        .unwrap();
        let h = HilbertSpec::new(mode_dims).unwrap();
        let t_final = 1.1;
        let dt = default_dt(&spec);

        let at = |dt: f64| {
            let cfg = PropagationConfig {
                t_final,
                dt,
                samples: 1,
                truncation_tail: 1,
                tail_tolerance: 1e-6,
                refine_check: None,
            };
            propagate_time_ordered(|t| build_lab(&spec, &h, t), &cfg).unwrap()
        };
        let u0 = at(dt);
        let u1 = at(dt / 2.0);
        let u2 = at(dt / 4.0);
        let d01 = max_abs_diff(u0.matrix(), u1.matrix());
        let d12 = max_abs_diff(u1.matrix(), u2.matrix());
        if d01 > 1e-11 {
            assert!(
                d12 * 3.5 <= d01,
                "refinement distances {d01:.3e} → {d12:.3e} not second order"
            );
        }
    }
}

#[test]
fn interaction_picture_cancels_free_evolution_exactly() {
    // with zero coupling the interaction picture is the identity even for
    // detuned, driven systems
    let term = InteractionTerm::new(c(0.0, 0.0), vec![(1, 0)]).unwrap();
    let spec = SystemSpec::new(1.3, vec![0.9], vec![term], 0.12, 1.05).unwrap();
    let frame = solve_frame_integers(spec.terms()).unwrap();
    let h = HilbertSpec::new(vec![5]).unwrap();
    let t_final = 2.7;
    let cfg = PropagationConfig {
        t_final,
        dt: default_dt(&spec),
        samples: 3,
        truncation_tail: 1,
        tail_tolerance: 1e-6,
        refine_check: None,
    };
    let times = [0.0, 1.0, t_final];
    let ev = sampled_evolution(&spec, &frame, &h, &cfg, &times).unwrap();
    for u in &ev.interaction {
        assert!(max_abs_diff(u, &identity(h.total_dim())) < 1e-8);
    }
}

#[test]
fn to_interaction_picture_is_frame_product() {
    // U^(I) = U_0† U_d† U_lab as a plain operator identity
    let term = InteractionTerm::new(c(0.02, 0.0), vec![(1, 0)]).unwrap();
    let spec = SystemSpec::new(1.0, vec![1.0], vec![term], 0.1, 1.0).unwrap();
    let frame = solve_frame_integers(spec.terms()).unwrap();
    let h = HilbertSpec::new(vec![6]).unwrap();
    let t = 3.3;
    let hd = build_drive_frame(&spec, &frame, &h, 0.0).unwrap();
    let (ud, u0) = frame_unitaries(&spec, &frame, &h, t).unwrap();
    let u_lab_m = ud.matrix().dot(propagate_static(&hd, t).unwrap().matrix());
    let u_lab = crossres::Operator::new(u_lab_m.clone(), h.clone()).unwrap();
    let u_int = to_interaction_picture(&u_lab, &spec, &frame, &h, t).unwrap();
    let direct = dagger(u0.matrix()).dot(&dagger(ud.matrix())).dot(&u_lab_m);
    assert!(max_abs_diff(u_int.matrix(), &direct) < 1e-13);
    assert!(unitarity_error(u_int.matrix()) < 1e-10);
}

#[test]
fn periodic_lab_path_serves_time_dependent_frames() {
    // pair-creation term: default frame integers leave the drive frame
    // rotating, so the sampled evolution must take the periodic lab path
    // and still satisfy frame equivalence against direct stepping
    let term = InteractionTerm::new(c(0.01, 0.0), vec![(1, 0), (1, 0)]).unwrap();
    let spec = SystemSpec::new(2.1, vec![0.9, 1.2], vec![term.clone()], 0.1, 2.1).unwrap();
    let frame = solve_frame_integers(&[term]).unwrap();
    let h = HilbertSpec::new(vec![3, 3]).unwrap();
    let t_final = 2.4;
    let cfg = PropagationConfig {
        t_final,
        dt: default_dt(&spec),
        samples: 2,
        truncation_tail: 1,
        tail_tolerance: 1e-6,
        refine_check: None,
    };
    let times = [0.0, t_final];
    let ev = sampled_evolution(&spec, &frame, &h, &cfg, &times).unwrap();
    assert_eq!(ev.path, EvolutionPath::PeriodicLab);

    let t_snap = ev.times[1];
    let cfg2 = PropagationConfig { t_final: t_snap, dt: ev.dt_used, ..cfg };
    let direct = propagate_time_ordered(|t| build_lab(&spec, &h, t), &cfg2).unwrap();
    assert!(max_abs_diff(direct.matrix(), &ev.lab[1]) < 1e-8);
}

#[test]
fn refine_check_passes_at_sane_steps() {
    let term = InteractionTerm::new(c(0.01, 0.0), vec![(1, 0)]).unwrap();
    let spec = SystemSpec::new(1.0, vec![1.0], vec![term], 0.08, 1.0).unwrap();
    let h = HilbertSpec::new(vec![4]).unwrap();
    let cfg = PropagationConfig {
        t_final: 1.0,
        dt: default_dt(&spec),
        samples: 1,
        truncation_tail: 1,
        tail_tolerance: 1e-6,
        refine_check: Some(1e-5),
    };
    let u = propagate_time_ordered(|t| build_lab(&spec, &h, t), &cfg).unwrap();
    assert!(unitarity_error(u.matrix()) < 1e-9);
}

#[test]
fn dressed_projector_completeness_under_evolution() {
    // conditioning structure: evolving |±̄⟩⊗vac under the static drive
    // frame keeps the two branches orthogonal at all sampled times
    let g = 0.004;
    let term = InteractionTerm::new(c(g, 0.0), vec![(1, 0)]).unwrap();
    let spec = SystemSpec::new(1.0, vec![1.0], vec![term], 0.2, 1.0).unwrap();
    let frame = solve_frame_integers(spec.terms()).unwrap();
    let h = HilbertSpec::new(vec![12]).unwrap();
    let dressed = crossres::hamiltonian::dressed_qubit(0.2, 0.0).unwrap();
    let plus: Array1<C64> = dressed.product_state(true, &h, &[0]);
    let minus: Array1<C64> = dressed.product_state(false, &h, &[0]);

    let cfg = PropagationConfig {
        t_final: 0.4 / g,
        dt: default_dt(&spec),
        samples: 4,
        truncation_tail: 2,
        tail_tolerance: 1e-6,
        refine_check: None,
    };
    let times: Vec<f64> = (0..=4).map(|i| cfg.t_final * i as f64 / 4.0).collect();
    let ev = sampled_evolution(&spec, &frame, &h, &cfg, &times).unwrap();
    for u in &ev.interaction {
        let a = u.dot(&plus);
        let b = u.dot(&minus);
        let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
        assert!(overlap.norm() < 1e-10);
    }
}
