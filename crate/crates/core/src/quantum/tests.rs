use super::*;
use crate::symbolic::parse_expr;

fn e(s: &str) -> PhaseExpr {
    parse_expr(s).unwrap()
}

fn rep_a(points: usize) -> Representation {
    Representation::new(&PhaseSpace::canonical(&["x"]), &[("x", 20.0, points)], 1.0).unwrap()
}

fn rep_cawley(points: usize) -> Representation {
    let space = PhaseSpace::canonical(&["x", "z"]);
    Representation::new(&space, &[("x", 20.0, points), ("p_z", 20.0, points)], 1.0).unwrap()
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn representation_validation() {
    let space = PhaseSpace::canonical(&["x", "z"]);
    assert!(Representation::new(&space, &[("x", 20.0, 64)], 1.0).is_err());
    assert!(Representation::new(&space, &[("x", 20.0, 64), ("p_x", 20.0, 64)], 1.0).is_err());
    assert!(Representation::new(&space, &[("x", 20.0, 4), ("z", 20.0, 64)], 1.0).is_err());
    assert!(Representation::new(&space, &[("x", 20.0, 64), ("z", 20.0, 64)], 0.0).is_err());
    let rep = rep_cawley(16);
    assert_eq!(rep.axes[1].derivative, "z");
    assert_eq!(rep.axes[1].sign, 1.0);
    assert_eq!(rep.axes[0].coordinate(8), 0.0);
    assert_eq!(rep.indices(17), vec![1, 1]);
}

#[test]
fn constant_hamiltonian_is_identity() {
    let rep = rep_cawley(8);
    let op = build_operator(&PhaseExpr::one(), &rep, OrderingRule::SymmetricHalf).unwrap();
    assert_eq!(op.to_dense(), DMatrix::identity(64, 64));
}

#[test]
fn symmetric_half_matches_explicit_form() {
    let rep = rep_a(16);
    let op = build_operator(&e("1/2*exp(-2*x)*p_x^2"), &rep, OrderingRule::SymmetricHalf)
        .unwrap()
        .to_dense();
    let p = build_operator(&e("p_x"), &rep, OrderingRule::Left).unwrap().to_dense();
    let m = DMatrix::from_diagonal(&DVector::from_fn(16, |j, _| {
        Complex64::new((-2.0 * rep.axes[0].coordinate(j)).exp(), 0.0)
    }));
    let quarter = Complex64::new(0.25, 0.0);
    let want = (&m * &p * &p + &p * &p * &m) * quarter;
    assert!(max_diff(&op, &want) < 1e-12 * want.norm());
    let sandwich = build_operator(&e("1/2*exp(-2*x)*p_x^2"), &rep, OrderingRule::Sandwich)
        .unwrap()
        .to_dense();
    let want = &p * &m * &p * Complex64::new(0.5, 0.0);
    assert!(max_diff(&sandwich, &want) < 1e-12 * want.norm());
}

#[test]
fn orderings_are_hermitian() {
    for a in ["1", "-3/2", "2/7"] {
        let h = e(&format!("1/2*exp(-({a})*x)*p_x^2"));
        for rule in [OrderingRule::SymmetricHalf, OrderingRule::Sandwich] {
            let op = build_operator(&h, &rep_a(64), rule).unwrap();
            assert!(op.hermiticity_defect() < 1e-12, "{a} {rule}");
        }
    }
    for (al, be) in [("2", "-1"), ("-1/3", "5/4"), ("0", "1")] {
        let h = e(&format!("p_x*p_z - 1/2*({al}*x + {be}*p_z)*z^2"));
        for rule in [OrderingRule::SymmetricHalf, OrderingRule::Sandwich] {
            let op = build_operator(&h, &rep_cawley(16), rule).unwrap();
            assert!(op.hermiticity_defect() < 1e-12, "{al} {be} {rule}");
        }
    }
    let left = build_operator(&e("x*p_x"), &rep_a(16), OrderingRule::Left).unwrap();
    assert!(left.hermiticity_defect() > 1e-3);
}

#[test]
fn unsupported_terms() {
    let rep = rep_a(16);
    assert!(matches!(
        build_operator(&e("p_x^3"), &rep, OrderingRule::SymmetricHalf),
        Err(QuantumError::Unsupported(_))
    ));
    assert!(matches!(
        build_operator(&e("exp(p_x)"), &rep, OrderingRule::SymmetricHalf),
        Err(QuantumError::Unsupported(_))
    ));
    assert!(matches!(
        build_operator(&e("y*p_x"), &rep, OrderingRule::SymmetricHalf),
        Err(QuantumError::Unsupported(_))
    ));
}

#[test]
fn physical_states_are_constant() {
    let rep = rep_a(128);
    let psi = prepare_initial(&rep, &[e("p_x")], None).unwrap();
    assert!((psi.norm(&rep) - 1.0).abs() < 1e-14);
    let c = psi.amplitudes[0];
    assert!(psi.amplitudes.iter().all(|v| *v == c));
    let p = build_operator(&e("p_x"), &rep, OrderingRule::Left).unwrap();
    assert_eq!(residual_norm(&p, &rep, &psi), 0.0);

    let rep = rep_cawley(16);
    let psi = prepare_initial(&rep, &[e("p_x"), e("z")], None).unwrap();
    let c = psi.amplitudes[0];
    assert!(psi.amplitudes.iter().all(|v| *v == c));
    assert!((psi.norm(&rep) - 1.0).abs() < 1e-14);
}

#[test]
fn multiplicative_condition_gives_a_delta() {
    let rep = rep_a(16);
    let psi = prepare_initial(&rep, &[e("x")], None).unwrap();
    for (j, v) in psi.amplitudes.iter().enumerate() {
        if j == 8 {
            assert!((v.norm() - 1.0 / rep.axes[0].spacing().sqrt()).abs() < 1e-12);
        } else {
            assert!(v.norm() < 1e-12);
        }
    }
    assert!(matches!(
        prepare_initial(&rep, &[e("x + 1/3")], None),
        Err(QuantumError::NoPhysicalState(_))
    ));
    assert!(matches!(
        prepare_initial(&rep_cawley(8), &[e("x*z")], None),
        Err(QuantumError::Unsupported(_))
    ));
}

#[test]
fn counterexample_a_state_is_stationary() {
    let rep = rep_a(128);
    let psi0 = prepare_initial(&rep, &[e("p_x")], None).unwrap();
    let p = build_operator(&e("p_x"), &rep, OrderingRule::Left).unwrap();
    for a in ["1", "-2/3"] {
        let h = build_operator(&e(&format!("1/2*exp(-({a})*x)*p_x^2")), &rep, OrderingRule::Sandwich).unwrap();
        let dt = EvolveOptions::default_dt(&rep);
        let ev = evolve(&h, &rep, &psi0, EvolveOptions::new(dt, 1000).recording(100)).unwrap();
        let obs = observables(&h, &rep, &ev.state, Some(&psi0));
        assert!(obs.energy.abs() < 1e-10);
        assert!(obs.defect.unwrap() < 1e-10);
        assert!((ev.final_norm - ev.initial_norm).abs() < 1e-8);
        assert!(ev.trace.iter().all(|s| residual_norm(&p, &rep, s) < 1e-9));
    }
}

#[test]
fn symmetric_half_has_zero_energy_but_moves_the_constant() {
    let rep = rep_a(64);
    let psi0 = prepare_initial(&rep, &[e("p_x")], None).unwrap();
    let h = build_operator(&e("1/2*exp(-x)*p_x^2"), &rep, OrderingRule::SymmetricHalf).unwrap();
    let obs = observables(&h, &rep, &psi0, None);
    assert!(obs.energy.abs() < 1e-10 * h.max_abs());
    assert!(residual_norm(&h, &rep, &psi0) > 1e-3);
}

#[test]
fn cawley_state_is_stationary() {
    let rep = rep_cawley(32);
    let psi0 = prepare_initial(&rep, &[e("p_x"), e("z")], None).unwrap();
    let px = build_operator(&e("p_x"), &rep, OrderingRule::Left).unwrap();
    let z = build_operator(&e("z"), &rep, OrderingRule::Left).unwrap();
    let h = build_operator(&e("p_x*p_z - 1/2*(2*x - p_z)*z^2"), &rep, OrderingRule::Sandwich).unwrap();
    let ev = evolve(&h, &rep, &psi0, EvolveOptions::new(1e-3, 200).recording(50)).unwrap();
    let obs = observables(&h, &rep, &ev.state, Some(&psi0));
    assert!(obs.energy.abs() < 1e-10);
    assert!(obs.defect.unwrap() < 1e-10);
    for s in &ev.trace {
        assert!(residual_norm(&px, &rep, s) < 1e-9);
        assert!(residual_norm(&z, &rep, s) < 1e-9);
    }
}

fn gaussian(rep: &Representation, x0: f64, k0: f64, sigma: f64) -> WaveState {
    WaveState::from_fn(rep, |x| {
        let d = x[0] - x0;
        Complex64::from_polar((-d * d / (2.0 * sigma * sigma)).exp(), k0 * x[0])
    })
    .normalized(rep)
}

#[test]
fn crank_nicolson_is_unitary() {
    let rep = rep_a(128);
    let h = build_operator(&e("1/2*p_x^2 + 1/2*x^2"), &rep, OrderingRule::SymmetricHalf).unwrap();
    let psi = gaussian(&rep, 1.0, 0.3, 1.0);
    let ev = evolve(&h, &rep, &psi, EvolveOptions::new(1e-2, 500)).unwrap();
    assert!(ev.max_step_norm_change < 1e-12);
    assert!((ev.final_norm - 1.0).abs() < 1e-8);
}

#[test]
fn free_packet_follows_ehrenfest() {
    let space = PhaseSpace::canonical(&["x"]);
    let rep = Representation::new(&space, &[("x", 40.0, 1024)], 1.0).unwrap();
    let h = build_operator(&e("1/2*p_x^2"), &rep, OrderingRule::SymmetricHalf).unwrap();
    let x = build_operator(&e("x"), &rep, OrderingRule::Left).unwrap();
    let p = build_operator(&e("p_x"), &rep, OrderingRule::Left).unwrap();
    let psi = gaussian(&rep, 0.0, 0.5, 1.0);
    let horizon = 1.0;
    let ev = evolve(&h, &rep, &psi, EvolveOptions::new(1e-3, 1000)).unwrap();
    let x0 = observables(&x, &rep, &psi, None).energy;
    let x1 = observables(&x, &rep, &ev.state, None).energy;
    let p0 = observables(&p, &rep, &psi, None).energy;
    assert!((x1 - x0 - p0 * horizon).abs() < 1e-3, "{x0} {x1} {p0}");
}

#[test]
fn oscillator_ground_state_energy() {
    let rep = rep_a(128);
    let h = build_operator(&e("1/2*p_x^2 + 1/2*x^2"), &rep, OrderingRule::SymmetricHalf).unwrap();
    let analytic = gaussian(&rep, 0.0, 0.0, 1.0);
    let en = observables(&h, &rep, &analytic, None).energy;
    assert!((en - 0.5).abs() < 0.01, "{en}");
    let lowest = h.to_dense().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((lowest - 0.5).abs() < 0.01, "{lowest}");
}

#[test]
fn reference_defect_and_csv() {
    let rep = rep_a(8);
    let psi = prepare_initial(&rep, &[e("p_x")], None).unwrap();
    let h = build_operator(&e("p_x^2"), &rep, OrderingRule::SymmetricHalf).unwrap();
    assert_eq!(observables(&h, &rep, &psi, Some(&psi)).defect, Some(0.0));
    let csv = psi.to_csv(&rep);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,re,im"));
    assert!(lines.next().unwrap().starts_with("-1.0000000000000000e1,"));
    assert_eq!(csv.lines().count(), 9);
}
