use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wlns::degiorgi::{
    dissipation_density, energy_budget, fit_beta, level_energy, level_radius, level_threshold, recursive_sequence,
    truncate, CylinderScheme, FitOutcome,
};
use wlns::field::{Grid, ScalarField, VectorField};
use wlns::nse::{energy_terms, Frame, InitialCondition, PolynomialBump, Solver, SolverConfig, Trajectory};

fn steady(u: &VectorField<f64>, times: impl Iterator<Item = f64>) -> Trajectory<f64> {
    Trajectory::new(times.map(|t| Frame::new(t, u.clone())).collect()).unwrap()
}

fn box_center(g: &Grid<f64>) -> [f64; 3] {
    [g.length() / 2.0; 3]
}

#[test]
fn constant_field_level_energies_match_ball_volumes() {
    let g = Grid::periodic(48).unwrap();
    let u = VectorField::constant(g, [0.0, 0.4, 0.0]);
    // at scale 3 the smallest ball still spans 11 cells; reference
    // velocity is 3·0.4 = 1.2 and the window [−1, 1] is [0, 18]
    let scheme = CylinderScheme::new(5, box_center(&g), 3.0, 9.0).unwrap();
    let traj = steady(&u, (0..=20).map(|j| 0.9 * j as f64));
    let table = level_energy(&traj, &scheme).unwrap();
    for row in &table.rows {
        let v = (1.2 - level_threshold::<f64>(row.k)).max(0.0);
        let vol = 4.0 / 3.0 * std::f64::consts::PI * level_radius::<f64>(row.k as i32).powi(3);
        let want = 0.5 * v * v * vol;
        assert!(row.diss_term.abs() <= 1e-20);
        assert!((row.sup_term - want).abs() <= 0.02 * want, "k={} {} vs {want}", row.k, row.sup_term);
        assert!((row.ball_measure - vol).abs() <= row.surface_bracket);
    }

    // unit scale: |u| = 0.6 is below every threshold from k = 2 on
    let g = Grid::periodic(16).unwrap();
    let u = VectorField::constant(g, [0.0, 0.6, 0.0]);
    let unit = CylinderScheme::new(4, box_center(&g), 1.0, 1.0).unwrap();
    let t = level_energy(&steady(&u, (0..=40).map(|j| 0.05 * j as f64)), &unit).unwrap();
    assert!(t.rows[0].u_k > 0.0 && t.rows[1].u_k > 0.0);
    assert!(t.rows[2..].iter().all(|r| r.u_k == 0.0));
}

#[test]
fn zero_field_has_zero_energies_and_budget() {
    let g = Grid::periodic(16).unwrap();
    let scheme = CylinderScheme::new(3, box_center(&g), 0.5, 0.25).unwrap();
    let traj = steady(&VectorField::zeros(g), (0..=30).map(|j| j as f64 * 0.02));
    assert!(level_energy(&traj, &scheme).unwrap().rows.iter().all(|r| r.u_k == 0.0));
    let eta = PolynomialBump::new(&g, box_center(&g), 1.0).unwrap();
    let b = energy_budget(&traj, &eta, &scheme, 1.0).unwrap();
    assert!(b.slack.iter().all(|&s| s == 0.0));
}

#[test]
fn cadence_and_geometry_are_enforced() {
    let g = Grid::periodic(16).unwrap();
    let u = VectorField::constant(g, [0.5, 0.0, 0.0]);
    let scheme = CylinderScheme::new(3, box_center(&g), 1.0, 1.0).unwrap();
    let sparse = steady(&u, (0..=5).map(|j| 0.4 * j as f64));
    let err = level_energy(&sparse, &scheme).unwrap_err().to_string();
    assert!(err.contains("snapshot spacing"), "{err}");
    let short = steady(&u, (0..=20).map(|j| 0.05 * j as f64));
    assert!(level_energy(&short, &scheme).is_err());
    // B_{−1} has radius 4.5 and does not fit the 2π box at unit scale
    let eta = PolynomialBump::new(&g, box_center(&g), 1.5).unwrap();
    assert!(energy_budget(&steady(&u, (0..=40).map(|j| 0.05 * j as f64)), &eta, &scheme, 1.0).is_err());
}

#[test]
fn budget_rejects_cutoff_with_wrong_support() {
    let g = Grid::periodic(16).unwrap();
    let u = VectorField::constant(g, [0.5, 0.0, 0.0]);
    let scheme = CylinderScheme::new(2, box_center(&g), 0.5, 0.25).unwrap();
    let traj = steady(&u, (0..=30).map(|j| j as f64 * 0.02));
    // plateau of radius 0.2 < s = 0.5
    let narrow = PolynomialBump::new(&g, box_center(&g), 0.4).unwrap();
    let err = energy_budget(&traj, &narrow, &scheme, 1.0).unwrap_err().to_string();
    assert!(err.contains("cell ("), "{err}");
}

#[test]
fn dissipation_density_matches_pointwise_formula() {
    // u = c(x)(cos y, sin y, 0) with |u| = c(x) = 1 + sin(x)/2, so every
    // spectral derivative is exact on n = 8
    let g = Grid::periodic(8).unwrap();
    let u = VectorField::from_fn(g, |x: [f64; 3]| {
        let c = 1.0 + 0.5 * x[0].sin();
        [c * x[1].cos(), c * x[1].sin(), 0.0]
    })
    .unwrap();
    for k in 0..4 {
        let d = dissipation_density(&u, k);
        let v = truncate(&u, k);
        let th = level_threshold::<f64>(k);
        for i in 0..g.len() {
            let x = g.point(i);
            let c = 1.0 + 0.5 * x[0].sin();
            let dc = 0.5 * x[0].cos();
            let vk = (c - th).max(0.0);
            assert!((v.values()[i] - vk).abs() < 1e-14);
            let want = if vk > 0.0 {
                vk * (dc * dc + c * c) / c + th * dc * dc / c
            } else {
                0.0
            };
            assert!((d.values()[i] - want).abs() < 1e-10, "k={k} i={i}: {} vs {want}", d.values()[i]);
        }
    }
}

#[test]
fn truncations_are_nested() {
    let g = Grid::periodic(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = VectorField::new([0; 3].map(|_| {
        ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.5..1.5)).collect()).unwrap()
    }))
    .unwrap();
    for k in 1..6 {
        let (a, b) = (truncate(&u, k), truncate(&u, k - 1));
        let (da, db) = (dissipation_density(&u, k), dissipation_density(&u, k - 1));
        for i in 0..g.len() {
            assert!(a.values()[i] <= b.values()[i]);
            assert!(da.values()[i] >= 0.0);
            if a.values()[i] == 0.0 {
                assert_eq!(da.values()[i], 0.0);
            }
            if db.values()[i] == 0.0 {
                assert_eq!(da.values()[i], 0.0);
            }
        }
    }
}

fn tg_run(n: usize, amplitude: f64, viscosity: f64, dt: f64, t_end: f64, every: usize) -> Trajectory<f64> {
    let cfg = SolverConfig {
        n,
        dt,
        t_end,
        viscosity,
        snapshot_every: every,
        initial_condition: InitialCondition::TaylorGreen { amplitude },
        ..Default::default()
    };
    Solver::new(cfg).unwrap().run().unwrap().0
}

#[test]
fn sub_unit_flow_vanishes_beyond_threshold_crossing() {
    let traj = tg_run(16, 0.8, 0.01, 0.01, 2.0, 5);
    let pi = std::f64::consts::PI;
    // |u| peaks at the cylinder centre
    let scheme = CylinderScheme::new(6, [pi / 2.0, pi, pi], 1.0, 1.0).unwrap();
    let t = level_energy(&traj, &scheme).unwrap();
    // sup|u| ≤ 0.8 so U_k = 0 once 1 − 2^{−k} ≥ 0.8, i.e. k ≥ 3
    assert!(t.rows[..3].iter().all(|r| r.u_k > 0.0), "{:?}", t.u());
    assert!(t.rows[3..].iter().all(|r| r.u_k == 0.0), "{:?}", t.u());
    assert!(t.u().windows(2).all(|w| w[1] <= w[0]));
}

fn tg_budget(n: usize, s: f64, bump: f64) -> (Trajectory<f64>, PolynomialBump<f64>, wlns::degiorgi::BudgetReport<f64>) {
    let traj = tg_run(n, 1.0, 1.0, 1e-3, 2.5 * s * s, 1);
    let g = *traj.grid().unwrap();
    let c = box_center(&g);
    let scheme = CylinderScheme::new(2, c, s, 1.5 * s * s).unwrap();
    let eta = PolynomialBump::new(&g, c, bump * s).unwrap();
    let b = energy_budget(&traj, &eta, &scheme, 1.0).unwrap();
    (traj, eta, b)
}

fn worst(b: &wlns::degiorgi::BudgetReport<f64>) -> f64 {
    b.slack.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[test]
fn taylor_green_budget_is_balanced() {
    // η falls from 1 on B_0 to 0 at the edge of B_{−1}
    let (traj, eta, b) = tg_budget(32, 0.6, 4.5);
    assert!(b.min_slack() >= -1e-4, "{}", b.min_slack());
    assert!(worst(&b) <= 1e-3 * b.kinetic[0], "{}", worst(&b));
    assert!(b.kinetic.iter().all(|&k| k > 0.0));
    // the same terms through the public single-frame entry point
    let j = b.times.len() / 2;
    let frame = traj.frames().iter().find(|f| f.time == b.times[j]).unwrap();
    let t = energy_terms(frame, &eta, 1.0);
    assert!((t.local_energy - b.kinetic[j]).abs() <= 1e-12 * b.kinetic[j]);
    assert!((t.flux - b.flux[j]).abs() <= 1e-12 * (1.0 + b.flux[j].abs()));
}

#[test]
fn budget_slack_shrinks_with_resolution() {
    // a steep cutoff is under-resolved at n = 32
    let coarse = worst(&tg_budget(32, 0.4, 2.0).2);
    let fine = worst(&tg_budget(48, 0.4, 2.0).2);
    assert!(fine < coarse / 4.0, "{coarse} {fine}");
}

#[test]
fn recursive_examples() {
    let r = recursive_sequence(2.0f64, 2.0, 1.0, 30).unwrap();
    assert!(!r.converged);
    assert!(r.log_w.last().unwrap() > &0.0);
    for (c, b) in [(2.0f64, 2.0), (10.0, 1.5), (1.1, 3.0)] {
        assert!(recursive_sequence(c, b, 1e-250, 100).unwrap().converged);
    }
}

#[test]
fn noisy_fit_recovers_beta() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut u = vec![2f64.powi(-4)];
    for k in 1..8 {
        let prev = *u.last().unwrap();
        u.push(2f64.powi(k) * prev * prev);
    }
    let noisy: Vec<f64> = u.iter().map(|x| x * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))).collect();
    match fit_beta(&noisy).unwrap() {
        FitOutcome::Fit(f) => {
            assert!((f.beta - 2.0).abs() <= 0.1, "{f:?}");
            assert!(f.r2 > 0.99);
        }
        other => panic!("{other:?}"),
    }
}
