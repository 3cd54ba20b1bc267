#![allow(dead_code)]

use mfg_core::exponents::rational;
use mfg_core::estimates::EstimateSettings;
use mfg_core::grid::{bump, gaussian, GridSpec, ScalarField};
use mfg_core::mfg::MfgConfig;
use mfg_core::model::{HamiltonianModel, Nonlinearity};

/// The one-dimensional reference setup with horizon `t`, `n` points and mollifier `eps`.
pub fn reference_config(n: usize, t: f64, eps: f64) -> MfgConfig {
    MfgConfig {
        grid: GridSpec::new(1, 8.0, n, t, 0.4).unwrap(),
        model: HamiltonianModel::new(2.0, 0.0).unwrap(),
        nl: Nonlinearity::new(0.5).unwrap(),
        epsilon: eps,
        omega: 0.5,
        tol: 1e-8,
        max_iter: 200,
        coupling: true,
    }
}

/// Unit-mass bump of radius 1 and a unit Gaussian terminal cost, both centred at 0.
pub fn reference_data(grid: GridSpec) -> (ScalarField, ScalarField) {
    let center = vec![0.0; grid.d];
    let m0 = bump(grid, &center, 1.0);
    let m0 = m0.scaled(1.0 / m0.integral());
    (m0, gaussian(grid, &center, 1.0, 1.0))
}

pub fn reference_settings(d: usize) -> EstimateSettings {
    EstimateSettings {
        radius: 2.0,
        tau: 0.0,
        p_target: None,
        phi_center: vec![0.0; d],
        phi_radius: 1.0,
        alpha: rational(1, 2),
        exponent_dim: 3,
    }
}

pub fn order(e_coarse: f64, e_fine: f64, step_coarse: f64, step_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (step_coarse / step_fine).ln()
}
