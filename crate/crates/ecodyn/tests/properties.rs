//! Property tests: analytic identities, oracle cross-checks and integrator
//! invariants over randomized parameter sets drawn from the tabulated ranges.

use proptest::prelude::*;

use ecodyn::dynamics::{check_boundedness, integrate, IntegratorOptions, Trajectory};
use ecodyn::equilibria::{enumerate_equilibria, interior_polynomial, e5_polynomial, e6_polynomial};
use ecodyn::model::{jacobian, rhs, ModelParams, PopulationState};
use ecodyn::roots::{cubic_roots, Polynomial};
use ecodyn::stability::{average_lyapunov_pi, eigenvalues};

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

prop_compose! {
    fn arb_params()(
        a1 in log_range(4.0, 5.0),
        a2 in log_range(3.8, 7.8),
        a3 in log_range(0.005, 1.5),
        b1 in log_range(0.0005, 0.075),
        k1 in log_range(50.0, 100.0),
        k2 in log_range(20.0, 200.0),
        c1 in log_range(0.08, 2.8),
        c2 in log_range(0.7, 1.97),
        c3 in log_range(0.005, 1.95),
        theta in log_range(0.002537, 0.0937),
        p in log_range(0.047, 0.93),
    ) -> ModelParams {
        ModelParams::new(a1, a2, a3, b1, k1, k2, c1, c2, c3, theta, p)
            .expect("sampled ranges satisfy the invariants")
    }
}

prop_compose! {
    fn arb_state()(x in 0.0..2000.0f64, y in 0.0..2000.0f64, z in 0.0..2000.0f64)
        -> PopulationState
    {
        PopulationState::new(x, y, z)
    }
}

fn fd_jacobian(state: &PopulationState, p: &ModelParams, h: f64) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut plus = state.as_array();
        let mut minus = state.as_array();
        plus[j] += h;
        minus[j] -= h;
        let fp = rhs(&PopulationState::from_array(plus), p).as_array();
        let fm = rhs(&PopulationState::from_array(minus), p).as_array();
        for i in 0..3 {
            out[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    out
}

proptest! {
    #[test]
    fn jacobian_matches_finite_differences(p in arb_params(), st in arb_state()) {
        let j = jacobian(&st, &p).m;
        let fd = fd_jacobian(&st, &p, 1e-6);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                num += (j[i][k] - fd[i][k]).powi(2);
                den += j[i][k].powi(2);
            }
        }
        let rel = (num / den).sqrt();
        prop_assert!(rel <= 1e-5, "relative FD deviation {rel}");
    }

    #[test]
    fn coordinate_planes_are_invariant(p in arb_params(), st in arb_state(), axis in 0usize..3) {
        let mut coords = st.as_array();
        coords[axis] = 0.0;
        let f = rhs(&PopulationState::from_array(coords), &p).as_array();
        prop_assert_eq!(f[axis], 0.0);
    }

    #[test]
    fn rhs_and_jacobian_are_pure(p in arb_params(), st in arb_state()) {
        prop_assert_eq!(rhs(&st, &p), rhs(&st, &p));
        prop_assert_eq!(jacobian(&st, &p), jacobian(&st, &p));
    }

    #[test]
    fn constructed_quartics_are_recovered(
        lead in prop::sample::select(vec![1e-6f64, 1.0, 250.0]),
        r0 in -50.0..50.0f64,
        gaps in [0.5..40.0f64, 0.5..40.0f64, 0.5..40.0f64],
    ) {
        // four distinct ordered roots built from positive gaps
        let roots = [r0, r0 + gaps[0], r0 + gaps[0] + gaps[1], r0 + gaps[0] + gaps[1] + gaps[2]];
        // expand lead * prod (x - r)
        let mut coeffs = vec![lead];
        for r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            coeffs = next;
        }
        let poly = Polynomial::new(coeffs).unwrap();
        let found = poly.real_roots().unwrap();
        prop_assert_eq!(found.len(), 4, "found {:?} vs {:?}", &found, &roots);
        for (f, r) in found.iter().zip(roots) {
            prop_assert!((f - r).abs() <= 1e-8 * (1.0 + r.abs()), "{f} vs {r}");
        }
    }

    #[test]
    fn closed_form_cubic_agrees_with_companion_route(
        b in -20.0..20.0f64,
        c in -20.0..20.0f64,
        d in -20.0..20.0f64,
    ) {
        let closed = cubic_roots(b, c, d);
        let poly = Polynomial::new(vec![1.0, b, c, d]).unwrap();
        let companion = poly.complex_roots().unwrap();
        // pair by proximity: the two routes may order a conjugate pair differently
        for x in &closed {
            let dist = companion
                .iter()
                .map(|y| (x - y).norm())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(dist <= 1e-6 * (1.0 + x.norm()), "{x} unmatched (dist {dist})");
        }
        // root sum and product match the coefficients
        let sum: num_complex::Complex64 = closed.iter().sum();
        let prod: num_complex::Complex64 = closed.iter().product();
        prop_assert!((sum.re + b).abs() <= 1e-9 * (1.0 + b.abs()));
        prop_assert!((prod.re + d).abs() <= 1e-9 * (1.0 + d.abs()));
    }

    #[test]
    fn equilibrium_root_counts_and_realness(p in arb_params()) {
        let quartic = interior_polynomial(&p).real_roots().unwrap();
        prop_assert!(quartic.len() <= 4);
        let e5 = e5_polynomial(&p).real_roots().unwrap();
        let e6 = e6_polynomial(&p).real_roots().unwrap();
        prop_assert!((1..=3).contains(&e5.len()));
        prop_assert!((1..=3).contains(&e6.len()));
        // a nonnegative branch always exists for both planar families
        prop_assert!(e5.iter().any(|x| *x > 0.0));
        prop_assert!(e6.iter().any(|x| *x > 0.0));
    }

    #[test]
    fn enumeration_is_deterministic_and_residual_bounded(p in arb_params()) {
        let a = enumerate_equilibria(&p).unwrap();
        let b = enumerate_equilibria(&p).unwrap();
        prop_assert_eq!(&a, &b);
        for eq in &a.equilibria {
            prop_assert!(
                eq.residual <= 1e-8 * (1.0 + eq.state.norm()),
                "{}: residual {}", eq.label(), eq.residual
            );
        }
        // trivial families are always present and feasible
        use ecodyn::equilibria::FamilyTag::*;
        for tag in [E0, E1, E2, E4] {
            let found = a.find(tag, 1);
            prop_assert!(found.is_some_and(|e| e.feasible));
        }
    }

    #[test]
    fn eigenvalue_identities_hold(p in arb_params(), st in arb_state()) {
        let j = jacobian(&st, &p);
        let eigs = eigenvalues(&j).unwrap();
        let sum: num_complex::Complex64 = eigs.iter().sum();
        let prod: num_complex::Complex64 = eigs.iter().product();
        let scale = 1.0 + j.trace().abs();
        prop_assert!((sum.re - j.trace()).abs() <= 1e-9 * scale);
        let dscale = 1.0 + j.det().abs();
        prop_assert!((prod.re - j.det()).abs() <= 1e-9 * dscale);
    }

    #[test]
    fn pi_is_additive_in_the_weights(
        p in arb_params(),
        st in arb_state(),
        g1 in 0.1..5.0f64,
        g2 in 0.1..5.0f64,
        g3 in 0.1..5.0f64,
    ) {
        let g = [g1, g2, g3];
        let doubled = [2.0 * g1, 2.0 * g2, 2.0 * g3];
        let a = average_lyapunov_pi(&st, &p, g);
        prop_assert_eq!(2.0 * a, average_lyapunov_pi(&st, &p, doubled));
        // general additivity up to rounding
        let h = [0.7, 1.3, 2.9];
        let sum_w = [g[0] + h[0], g[1] + h[1], g[2] + h[2]];
        let lhs = average_lyapunov_pi(&st, &p, sum_w);
        let rhs_ = a + average_lyapunov_pi(&st, &p, h);
        prop_assert!((lhs - rhs_).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs_.abs())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn short_integrations_stay_nonnegative_and_deterministic(
        p in arb_params(),
        x in 0.0..500.0f64,
        y in 0.0..500.0f64,
        zero_axis in prop::option::of(0usize..3),
    ) {
        let mut init = [x, y, 150.0];
        if let Some(axis) = zero_axis {
            init[axis] = 0.0;
        }
        let opts = IntegratorOptions::new(10.0).unwrap();
        let init = PopulationState::from_array(init);
        let a = integrate(&p, &init, &opts).unwrap();
        let b = integrate(&p, &init, &opts).unwrap();
        prop_assert_eq!(&a, &b);
        for s in &a.states {
            prop_assert!(s.is_nonnegative());
            if let Some(axis) = zero_axis {
                prop_assert_eq!(s.as_array()[axis], 0.0);
            }
        }
        prop_assert!(a.min_component >= -1e-9);
        let bounded = check_boundedness(&a, 1.0);
        prop_assert!(bounded.bound >= 0.0);
    }

    #[test]
    fn boundedness_detector_flags_injected_growth(slope in 0.1..20.0f64) {
        let times: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let states: Vec<PopulationState> = times
            .iter()
            .map(|t| PopulationState::new(slope * t, 0.0, 0.0))
            .collect();
        let sup = states.last().unwrap().total();
        let traj = Trajectory {
            times,
            states,
            accepted_steps: 199,
            rejected_steps: 0,
            min_component: 0.0,
            sup_omega: sup,
        };
        prop_assert!(!check_boundedness(&traj, 1.0).holds_eventually);
    }
}
