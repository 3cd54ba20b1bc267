//! Backward explicit solver for `-u_t + H(x, Du) = Lap u + g`.

use crate::error::{Error, Result};
use crate::grid::{fill, gradient, laplacian, FieldSeries, GridSpec, ScalarField, VectorField};
use crate::model::HamiltonianModel;

/// Values above this magnitude count as blow-up.
pub const BLOWUP: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct HjbResult {
    pub u: FieldSeries,
    /// `max |grad_h u|` per frame, indexed like `u`.
    pub du_max: Vec<f64>,
    /// `max_n max |D_pH(x, grad_h u^{n+1})| dt / h`.
    pub cfl_effective: f64,
}

/// `a(x)` sampled at every grid point.
pub fn weight_field(model: &HamiltonianModel, grid: &GridSpec) -> Vec<f64> {
    fill(grid.len(), |i| model.weight(&grid.point(i)[..grid.d]))
}

fn grad_sq(grad: &VectorField, i: usize) -> f64 {
    grad.components.iter().map(|c| c[i] * c[i]).sum()
}

/// `H(x, grad)` pointwise, given the sampled weight.
pub fn hamiltonian_field(model: &HamiltonianModel, weight: &[f64], grad: &VectorField) -> ScalarField {
    let g = grad.grid;
    let values = fill(g.len(), |i| weight[i] * model.radial_excess(grad_sq(grad, i)));
    ScalarField { grid: g, values }
}

/// `D_pH(x, grad)` pointwise, given the sampled weight.
pub fn drift_from_gradient(model: &HamiltonianModel, weight: &[f64], grad: &VectorField) -> VectorField {
    let g = grad.grid;
    let coef = fill(g.len(), |i| weight[i] * model.radial_slope(grad_sq(grad, i)));
    let components = grad
        .components
        .iter()
        .map(|c| fill(g.len(), |i| coef[i] * c[i]))
        .collect();
    VectorField { grid: g, components }
}

/// Transport velocity `D_pH(x, grad_h u)`.
pub fn drift(model: &HamiltonianModel, u_frame: &ScalarField) -> VectorField {
    let w = weight_field(model, &u_frame.grid);
    drift_from_gradient(model, &w, &gradient(u_frame))
}

/// One backward step `u + dt (Lap u + g - H(x, grad u))`; also returns the
/// gradient of the input frame.
pub fn backward_step(
    model: &HamiltonianModel,
    weight: &[f64],
    u_next: &ScalarField,
    g_next: &ScalarField,
) -> (ScalarField, VectorField) {
    let grid = u_next.grid;
    let dt = grid.dt;
    let grad = gradient(u_next);
    let lap = laplacian(u_next);
    let values = fill(grid.len(), |i| {
        let h = weight[i] * model.radial_excess(grad_sq(&grad, i));
        u_next.values[i] + dt * (lap.values[i] + g_next.values[i] - h)
    });
    (ScalarField { grid, values }, grad)
}

/// The HJB step linearized around a frozen drift: `u + dt (Lap u - b . grad u)`.
pub fn linearized_step(b: &VectorField, u: &ScalarField) -> ScalarField {
    let grid = u.grid;
    let dt = grid.dt;
    let grad = gradient(u);
    let lap = laplacian(u);
    let values = fill(grid.len(), |i| {
        let transport: f64 = b.components.iter().zip(&grad.components).map(|(bc, gc)| bc[i] * gc[i]).sum();
        u.values[i] + dt * (lap.values[i] - transport)
    });
    ScalarField { grid, values }
}

/// Marches `u` from `u_T` at step `n_steps` back to step 0.
///
/// `g_series` must hold one frame per step `0..=n_steps`; frame `n+1` is the
/// source for the step `n+1 -> n`.
pub fn solve_backward(model: &HamiltonianModel, g_series: &FieldSeries, u_t: &ScalarField) -> Result<HjbResult> {
    let grid = g_series.grid;
    if u_t.grid != grid {
        return Err(Error::Config("terminal data and source live on different grids".into()));
    }
    if g_series.start_step != 0 || g_series.len() != grid.n_steps + 1 {
        return Err(Error::Config(format!(
            "source series needs {} frames from step 0, got {} from step {}",
            grid.n_steps + 1,
            g_series.len(),
            g_series.start_step
        )));
    }
    if !g_series.is_finite() || !u_t.is_finite() {
        return Err(Error::Config("source series or terminal data not finite".into()));
    }
    let weight = weight_field(model, &grid);
    let h = grid.h();
    let n = grid.n_steps;
    let mut frames = vec![ScalarField::zeros(grid); n + 1];
    let mut du_max = vec![0.0; n + 1];
    let mut cfl = 0.0f64;
    frames[n] = u_t.clone();
    for step in (0..n).rev() {
        let (next, grad) = backward_step(model, &weight, &frames[step + 1], &g_series.frames[step + 1]);
        let mut gmax = 0.0f64;
        let mut bmax = 0.0f64;
        for i in 0..grid.len() {
            let s = grad_sq(&grad, i);
            gmax = gmax.max(s);
            bmax = bmax.max(weight[i] * model.radial_slope(s) * s.sqrt());
        }
        du_max[step + 1] = gmax.sqrt();
        cfl = cfl.max(bmax * grid.dt / h);
        if next.values.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return Err(Error::Divergence { stage: "hjb", step });
        }
        frames[step] = next;
    }
    du_max[0] = gradient(&frames[0]).max_norm();
    Ok(HjbResult {
        u: FieldSeries::new(grid, 0, frames),
        du_max,
        cfl_effective: cfl,
    })
}
