mod common;

use common::{reference_config, reference_data, reference_settings};
use mfg_core::estimates::{full_report, second_order_integrands};
use mfg_core::grid::{gaussian, heat_solve, GridSpec, ScalarField};
use mfg_core::mfg::{solve_mfg, MfgConfig};
use mfg_core::model::{HamiltonianModel, Nonlinearity};

#[test]
fn over_iterated_fixed_point_has_round_off_residuals() {
    let mut cfg = reference_config(32, 0.5, 0.5);
    cfg.grid = GridSpec::new(1, 4.0, 32, 0.5, 0.4).unwrap();
    cfg.tol = 1e-15;
    cfg.max_iter = 500;
    let (m0, u_t) = reference_data(cfg.grid);
    let sol = solve_mfg(&cfg, &m0, &u_t).unwrap();
    assert!(sol.pde_residuals.hjb <= 1e-8, "{:?}", sol.pde_residuals);
    assert!(sol.pde_residuals.fp <= 1e-8, "{:?}", sol.pde_residuals);
}

#[test]
fn reference_run_contracts_and_keeps_densities() {
    let cfg = reference_config(256, 1.0, 0.1);
    let (m0, u_t) = reference_data(cfg.grid);
    let sol = solve_mfg(&cfg, &m0, &u_t).unwrap();
    let r = &sol.fixpoint_residuals;
    assert!(r.len() > 3);
    for k in 2..r.len() {
        assert!(r[k] < r[k - 1], "residual rose at iteration {}: {:?}", k + 1, r);
    }
    assert_eq!(sol.m.frames[0], m0);
    for f in &sol.m.frames {
        assert!((f.integral() - 1.0).abs() <= 1e-12);
        assert!(f.min() >= -1e-12);
    }
    assert_eq!(sol.u.last(), &u_t);
}

#[test]
fn decoupled_problem_is_exact() {
    let mut cfg = reference_config(128, 0.5, 0.1);
    cfg.coupling = false;
    let (m0, _) = reference_data(cfg.grid);
    let sol = solve_mfg(&cfg, &m0, &ScalarField::zeros(cfg.grid)).unwrap();
    assert_eq!(sol.iterations, 1);
    assert!(sol.pde_residuals.hjb <= 1e-12);
    assert!(sol.u.frames.iter().all(|f| f.max_abs() == 0.0));
    let heat = heat_solve(&m0, 0.5).unwrap();
    assert!(sol.m.last().l1_distance(&heat) <= 1e-3);
}

#[test]
fn shrinking_the_mollifier_changes_less_and_less() {
    let runs: Vec<_> = [0.8, 0.4, 0.2, 0.1]
        .into_iter()
        .map(|eps| {
            let cfg = reference_config(256, 1.0, eps);
            let (m0, u_t) = reference_data(cfg.grid);
            solve_mfg(&cfg, &m0, &u_t).unwrap().m
        })
        .collect();
    let gaps: Vec<f64> = runs.windows(2).map(|w| w[0].sup_l1_distance(&w[1])).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0], "{gaps:?}");
    }
}

#[test]
fn constants_scaling_with_the_horizon_move_monotonically() {
    let ids = ["heat_duality_m0", "heat_duality_ball", "first_order_energy"];
    let mut table = vec![Vec::new(); ids.len()];
    for t in [0.25, 0.5, 1.0] {
        let cfg = reference_config(256, t, 0.1);
        let (m0, u_t) = reference_data(cfg.grid);
        let sol = solve_mfg(&cfg, &m0, &u_t).unwrap();
        let full = full_report(&sol, &cfg, &reference_settings(1), 1.0).unwrap();
        for (row, id) in table.iter_mut().zip(ids) {
            row.push(full.report.get(id).unwrap().constant("C").unwrap());
        }
    }
    for (row, id) in table.iter().zip(ids) {
        let up = row.windows(2).all(|w| w[1] >= w[0]);
        let down = row.windows(2).all(|w| w[1] <= w[0]);
        assert!(up || down, "{id}: {row:?}");
    }
}

#[test]
fn quadratic_value_transport_term_closed_form() {
    let grid = GridSpec::new(2, 6.0, 96, 0.1, 0.4).unwrap();
    let cfg = MfgConfig {
        grid,
        model: HamiltonianModel::new(2.0, 0.0).unwrap(),
        nl: Nonlinearity::new(0.5).unwrap(),
        epsilon: 0.1,
        omega: 0.5,
        tol: 1e-8,
        max_iter: 10,
        coupling: true,
    };
    let (c1, c2) = (0.7, -1.3);
    let u = ScalarField::from_fn(grid, |x| 0.5 * (c1 * x[0] * x[0] + c2 * x[1] * x[1]));
    let m = gaussian(grid, &[0.0, 0.0], 1.0, 0.8);
    let (_, transport) = second_order_integrands(&cfg, &u, &m);
    let expected = 2.0 * (c1 * c1 + c2 * c2) * m.integral();
    let got = transport.integral();
    assert!((got - expected).abs() <= 1e-8 * expected, "{got} vs {expected}");
}
