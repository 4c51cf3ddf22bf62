use proptest::prelude::*;
use wlns::counterexample::{claim1_terms, DyadicSchedule};
use wlns::gronwall::{
    implicit_check, psi_tail, psi_tail_ln, psi_tail_lower, read_forcing_csv, solve_bound, solve_masses,
    write_solution_csv, BoundProblem, Forcing, Growth,
};

#[test]
fn constant_forcing_benchmark() {
    let p = BoundProblem::new(Forcing::constant(1.0f64), 1.0, 1.0, 0.0, 1.0).unwrap();
    let sol = solve_bound(&p, 1e-2).unwrap();
    assert!(sol.overflow.is_none());
    assert!(implicit_check(&sol, &p) <= 1e-6, "{}", implicit_check(&sol, &p));
    assert!(sol.h.windows(2).all(|w| w[1] > w[0]));
    // the same problem as a single step piece is advanced exactly
    let steps = BoundProblem::new(Forcing::steps(vec![0.0, 1.0], vec![1.0]).unwrap(), 1.0, 1.0, 0.0, 1.0).unwrap();
    let exact = solve_bound(&steps, 1e-2).unwrap();
    let (a, b) = (*exact.h.last().unwrap(), *sol.h.last().unwrap());
    assert!((a - b).abs() <= 1e-5 * a, "{a} {b}");
}

#[test]
fn identity_growth_is_exponential() {
    let f = Forcing::Function(Box::new(|t: f64| 1.0 + t.sin()));
    let p = BoundProblem::new(f, 0.5, 2.0, 0.0, 3.0).unwrap().with_growth(Growth::Identity);
    let sol = solve_bound(&p, 1e-2).unwrap();
    for (t, h) in sol.times.iter().zip(&sol.h) {
        let want = 2.0 * (0.5 * (t + 1.0 - t.cos())).exp();
        assert!((h - want).abs() <= 1e-8 * want);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let dev = |dt: f64| {
        let f = Forcing::Function(Box::new(|t: f64| 1.0 + 0.5 * (3.0 * t).cos()));
        let p = BoundProblem::new(f, 1.0, 1.0, 0.0, 0.5).unwrap();
        implicit_check(&solve_bound(&p, dt).unwrap(), &p)
    };
    let errs: Vec<f64> = [0.05, 0.025, 0.0125].iter().map(|&dt| dev(dt)).collect();
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 3.7, "{errs:?}");
    }
}

#[test]
fn counterexample_signal_keeps_the_bound_finite() {
    // interval endpoints collapse in double precision beyond n = 3, so the
    // signal enters through its exact per-interval masses
    let s = DyadicSchedule::new(6.0, 1.0).unwrap();
    let masses: Vec<f64> = claim1_terms(&s, 1000).unwrap().iter().map(|t| t.exact).collect();
    let h = solve_masses(Growth::Log, 1.0, 1.0, &masses).unwrap();
    assert!(h.iter().all(|x| x.is_finite()));
    assert!(h.windows(2).all(|w| w[1] >= w[0]));
    let total: f64 = masses.iter().sum();
    assert!((Growth::Log.phi(1.0, *h.last().unwrap()) - total).abs() <= 1e-9 * total);
}

#[test]
fn overflow_is_reported_not_propagated() {
    let p = BoundProblem::new(Forcing::steps(vec![0.0f64, 1.0], vec![1e4]).unwrap(), 1.0, 1.0, 0.0, 1.0).unwrap();
    let sol = solve_bound(&p, 1e-3).unwrap();
    assert!(sol.overflow.is_some());
    assert!(sol.h.iter().all(|h| h.is_finite()));
}

#[test]
fn psi_tail_grows_without_bound() {
    let mut prev = 0.0;
    for i in 1..=60 {
        let ln_m = 10.0 * i as f64;
        let v = psi_tail_ln(ln_m);
        assert!(v > prev);
        assert!(v >= psi_tail_lower(ln_m) - 1e-12);
        prev = v;
    }
    // far past f64 range
    assert!(psi_tail_ln(1e6) > psi_tail_ln(1e5));
    assert!((psi_tail(1.0f64).unwrap()).abs() < 1e-15);
    assert!(psi_tail(0.5f64).is_err());
}

#[test]
fn forcing_csv_round_trip_and_errors() {
    let (t, b): (Vec<f64>, Vec<f64>) = read_forcing_csv("t,B\n0,1\n0.5,2\n1,1\n".as_bytes()).unwrap();
    assert_eq!(t, vec![0.0, 0.5, 1.0]);
    let p = BoundProblem::over_data(Forcing::linear(t, b).unwrap(), 1.0, 1.0).unwrap();
    let sol = solve_bound(&p, 0.1).unwrap();
    let mut out = Vec::new();
    write_solution_csv(&sol, &wlns::gronwall::implicit_deviation(&sol, &p), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("t,H,deviation\n"));
    assert_eq!(text.lines().count(), sol.times.len() + 1);

    let e = read_forcing_csv::<f64, _>("0,1\n1,x\n".as_bytes()).unwrap_err().to_string();
    assert!(e.contains("line 2"), "{e}");
    assert!(Forcing::linear(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larger_forcing_gives_larger_bound(
        base in prop::collection::vec(0.0f64..3.0, 1..8),
        extra in prop::collection::vec(0.0f64..2.0, 8),
        c in 0.1f64..2.0,
        h0 in 0.1f64..10.0,
    ) {
        let n = base.len();
        let edges: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let more: Vec<f64> = base.iter().zip(&extra).map(|(a, b)| a + b).collect();
        let lo = BoundProblem::over_data(Forcing::steps(edges.clone(), base).unwrap(), c, h0).unwrap();
        let hi = BoundProblem::over_data(Forcing::steps(edges, more).unwrap(), c, h0).unwrap();
        let (a, b) = (solve_bound(&lo, 0.05).unwrap(), solve_bound(&hi, 0.05).unwrap());
        prop_assume!(a.overflow.is_none() && b.overflow.is_none());
        for (x, y) in a.h.iter().zip(&b.h) {
            prop_assert!(x <= y);
        }
        prop_assert!(implicit_check(&a, &lo) <= 1e-9 * (1.0 + a.integral.last().unwrap()));
    }

    #[test]
    fn log_growth_dominates_linear_growth(m in 0.0f64..4.0, h0 in 0.5f64..5.0) {
        let log = solve_masses(Growth::Log, 1.0, h0, &[m]).unwrap()[1];
        let lin = solve_masses(Growth::Identity, 1.0, h0, &[m]).unwrap()[1];
        // Ψ(r) ≥ r, hence the log ODE grows at least as fast
        prop_assert!(log >= lin * (1.0 - 1e-12));
        prop_assert!(log >= h0);
    }
}
