use gp_acquire::*;

fn brownian(sigma: f64, sigma0: f64) -> BrownianParams64 {
    BrownianParams::new(0.0, sigma, sigma0).unwrap()
}

/// Discounted objective of the policy that drives the posterior variance
/// down to `target` whenever the residual exceeds it.
fn constant_target_objective(params: &BrownianParams64, grid: &TimeGrid64, cost: &CostParams64, target: f64) -> f64 {
    let dt = grid.times()[1] - grid.times()[0];
    let s2 = params.sigma() * params.sigma();
    let mut r = params.variance(grid.times()[0]);
    let precisions: Vec<f64> = grid
        .times()
        .iter()
        .map(|_| {
            let post = r.min(target);
            let p = 1.0 / post - 1.0 / r;
            r = post + s2 * dt;
            p
        })
        .collect();
    let tr = fixed_trajectory(&ProcessSpec::Brownian(*params), grid, &precisions, cost.c()).unwrap();
    discounted_objective(&tr, cost.delta(), 0).unwrap()
}

#[test]
fn half_step_grid_recovers_rescaled_root() {
    let params = brownian(1.0, 1.0);
    let cost = CostParams::new(0.25, 0.9).unwrap();
    let grid = TimeGrid::uniform(0.0, 0.5, 40).unwrap();
    let best = golden_section(|v| constant_target_objective(&params, &grid, &cost, v), 0.2, 0.5, 1e-9);
    let rescaled = planning_for_step(1.0, 0.5, &cost).unwrap().v;
    assert!((best.argmin - rescaled).abs() < 1e-5, "{} vs {rescaled}", best.argmin);

    // the other candidate scaling, sigma^2 / dt, lands somewhere else
    let divided = solve_planning_v((1.0f64 / 0.5).sqrt(), 0.25, 0.9f64.powf(0.5))
        .unwrap()
        .v;
    assert!((best.argmin - divided).abs() > 1e-3);

    let fwd = forward_looking_trajectory(&params, &grid, &cost).unwrap();
    let psi_fwd = discounted_objective(&fwd, 0.9, 0).unwrap();
    assert!(psi_fwd <= best.min_value + 1e-10);
}

#[test]
fn zero_discount_planning_is_myopic() {
    let params = brownian(0.8, 0.6);
    let grid = TimeGrid::uniform(0.0, 1.0, 20).unwrap();
    let fwd = forward_looking_trajectory(&params, &grid, &CostParams::myopic(0.3).unwrap()).unwrap();
    let my = brownian_myopic_trajectory(&params, &grid, 0.3).unwrap();
    for (a, b) in fwd.steps.iter().zip(&my.steps) {
        assert!((a.precision - b.precision).abs() < 1e-12);
    }
}

#[test]
fn waiting_threshold_matches_first_purchase() {
    // sigma0^2 below V: the forward-looking buyer waits until R reaches V
    let params = brownian(0.2, 0.1);
    let cost = CostParams::new(0.25, 0.5).unwrap();
    let plan = solve_planning_v(0.2f64, 0.25, 0.5).unwrap();
    let t_bar = plan.waiting_threshold(0.1);
    assert!(t_bar > 0.0);
    let grid = TimeGrid::uniform(0.0, 1.0, 40).unwrap();
    let fwd = forward_looking_trajectory(&params, &grid, &cost).unwrap();
    let first = fwd.steps.iter().position(|s| s.precision > 0.0).unwrap();
    assert_eq!(first, t_bar.ceil() as usize);
    assert!(fwd.steps[first..].iter().all(|s| s.precision > 0.0));
}

#[test]
fn no_volatility_means_one_purchase() {
    let params = BrownianParams::new(0.0f64, 0.0, 2.0).unwrap();
    let grid = TimeGrid::uniform(0.0, 1.0, 10).unwrap();
    let tr = brownian_myopic_trajectory(&params, &grid, 0.25).unwrap();
    assert!((tr.steps[0].precision - (2.0 - 0.25)).abs() < 1e-12);
    assert!(tr.steps[1..]
        .iter()
        .all(|s| s.precision == 0.0 && (s.posterior_var - 0.5).abs() < 1e-12));
}

#[test]
fn value_iteration_contracts_and_cuts_off_at_root() {
    let cost = CostParams::new(0.25, 0.6).unwrap();
    let grid = RGridSpec::covering(1.0, 1.0, 1.0, &cost, 400);
    let vi = value_iterate(1.0, &cost, &grid).unwrap();
    for w in vi.sweep_deltas.windows(2).skip(3) {
        if w[0] > 1e-8 {
            assert!(w[1] / w[0] <= 0.6 + 1e-6, "ratio {}", w[1] / w[0]);
        }
    }
    let v = solve_planning_v(1.0, 0.25, 0.6).unwrap().v;
    let step = (grid.hi - grid.lo) / (grid.points - 1) as f64;
    assert!(
        (vi.purchase_cutoff() - v).abs() <= 2.0 * step,
        "{} vs {v}",
        vi.purchase_cutoff()
    );
}

#[test]
fn steady_formulas_match_long_run_for_several_parameters() {
    for &(sigma, dt, c) in &[(0.3, 2.0, 0.05), (1.5, 0.1, 0.8)] {
        let params = brownian(sigma, 0.4);
        let grid = TimeGrid::uniform(0.0, dt, 60).unwrap();
        let tr = brownian_myopic_trajectory(&params, &grid, c).unwrap();
        let (p, payoff): (f64, f64) = steady_state_myopic(sigma, dt, c).unwrap();
        let last = tr.steps[59];
        assert!((last.precision - p).abs() < 1e-10);
        assert!((last.payoff - payoff).abs() < 1e-10);
    }
}

#[test]
fn f32_matches_f64() {
    let p32 = BrownianParams::new(0.0f32, 1.0, 1.0).unwrap();
    let g32 = TimeGrid::uniform(0.0f32, 1.0, 10).unwrap();
    let p64 = brownian(1.0, 1.0);
    let g64 = TimeGrid::uniform(0.0, 1.0, 10).unwrap();
    let a = brownian_myopic_trajectory(&p32, &g32, 0.25).unwrap();
    let b = brownian_myopic_trajectory(&p64, &g64, 0.25).unwrap();
    for (x, y) in a.steps.iter().zip(&b.steps) {
        assert!((x.precision as f64 - y.precision).abs() < 1e-5);
    }
    let v32 = solve_planning_v(1.0f32, 0.25, 0.9).unwrap().v;
    assert!((v32 as f64 - solve_planning_v(1.0, 0.25, 0.9).unwrap().v).abs() < 1e-5);
}
