//! Forward conservative solver for `rho_t - sign div(b rho) = Lap rho`.
//!
//! The drift term uses the centered divergence, i.e. face fluxes averaged from
//! the two neighbouring cells, so one step is the exact transpose of
//! [`crate::hjb::linearized_step`] when `sign = +1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{fill, FieldSeries, GridSpec, ScalarField, VectorField};
use crate::hjb::{linearized_step, BLOWUP};

/// Largest admissible `max |b| dt / h`.
pub const ADVECTIVE_CFL: f64 = 0.5;

/// Most negative value tolerated when the initial frame is nonnegative.
pub const POSITIVITY_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftSign {
    /// `rho_t - div(b rho) = Lap rho`, the density equation.
    Plus,
    /// `rho_t + div(b rho) = Lap rho`.
    Minus,
}

impl DriftSign {
    pub fn value(self) -> f64 {
        match self {
            DriftSign::Plus => 1.0,
            DriftSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FpResult {
    pub rho: FieldSeries,
    /// `max_t |int rho(t) - int rho(start)|`.
    pub mass_drift: f64,
    pub min_value: f64,
}

/// One explicit step `rho + dt (Lap rho + sign div(b rho))`.
pub fn forward_step(b: &VectorField, rho: &ScalarField, sign: DriftSign) -> ScalarField {
    let g = rho.grid;
    let dt = g.dt;
    let inv_h2 = 1.0 / (g.h() * g.h());
    let inv_2h = 0.5 / g.h();
    let s = sign.value();
    let r = &rho.values;
    let nb = g.neighbour_table();
    let values = fill(g.len(), |i| {
        let mut lap = 0.0;
        let mut div = 0.0;
        for (axis, &[im, ip]) in nb[i].iter().enumerate().take(g.d) {
            let (im, ip) = (im as usize, ip as usize);
            lap += r[ip] - 2.0 * r[i] + r[im];
            let c = &b.components[axis];
            div += c[ip] * r[ip] - c[im] * r[im];
        }
        r[i] + dt * (lap * inv_h2 + s * div * inv_2h)
    });
    ScalarField { grid: g, values }
}

/// Marches from `start_step` to `n_steps`; `b_series[k]` drives the step
/// `start_step + k -> start_step + k + 1`.
pub fn solve_forward(b_series: &[VectorField], rho0: &ScalarField, sign: DriftSign, start_step: usize) -> Result<FpResult> {
    let grid = rho0.grid;
    let needed = grid.n_steps.saturating_sub(start_step);
    if b_series.len() != needed {
        return Err(Error::Config(format!(
            "drift series needs {needed} frames from step {start_step}, got {}",
            b_series.len()
        )));
    }
    solve_forward_with(rho0, sign, start_step, |step| Ok(b_series[step - start_step].clone()))
}

/// As [`solve_forward`], with the drift of each step produced on demand.
pub fn solve_forward_with<F>(rho0: &ScalarField, sign: DriftSign, start_step: usize, mut drift_at: F) -> Result<FpResult>
where
    F: FnMut(usize) -> Result<VectorField>,
{
    let grid = rho0.grid;
    if start_step > grid.n_steps {
        return Err(Error::Config(format!("start step {start_step} beyond n_steps = {}", grid.n_steps)));
    }
    if !rho0.is_finite() {
        return Err(Error::Config("initial frame not finite".into()));
    }
    let check_sign = rho0.min() >= 0.0;
    let mass0 = rho0.integral();
    let h = grid.h();
    let mut frames = Vec::with_capacity(grid.n_steps - start_step + 1);
    frames.push(rho0.clone());
    let mut mass_drift = 0.0f64;
    let mut min_value = rho0.min();
    for step in start_step..grid.n_steps {
        let b = drift_at(step)?;
        if b.grid != grid {
            return Err(Error::Config(format!("drift at step {step} lives on another grid")));
        }
        let courant = b.max_norm() * grid.dt / h;
        if courant > ADVECTIVE_CFL {
            return Err(Error::StepSize {
                stage: "fp",
                step,
                detail: format!("max|b| dt/h = {courant:.4} exceeds {ADVECTIVE_CFL}"),
            });
        }
        let next = forward_step(&b, frames.last().unwrap(), sign);
        if next.values.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return Err(Error::Divergence { stage: "fp", step });
        }
        let m = next.min();
        min_value = min_value.min(m);
        if check_sign && m < POSITIVITY_FLOOR {
            return Err(Error::Positivity {
                stage: "fp",
                frame: step + 1,
                min: m,
            });
        }
        mass_drift = mass_drift.max((next.integral() - mass0).abs());
        frames.push(next);
    }
    Ok(FpResult {
        rho: FieldSeries::new(grid, start_step, frames),
        mass_drift,
        min_value,
    })
}

/// `max |<A u, z> - <u, A^T z>| / (|u| |z|)` over seeded random pairs, where
/// `A` is the linearized HJB step and `A^T` the forward step with the same
/// frozen drift.
pub fn adjoint_pairing_matrix_check(b_frame: &VectorField) -> f64 {
    let grid: GridSpec = b_frame.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(0xad70);
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let u = ScalarField {
            grid,
            values: (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let z = ScalarField {
            grid,
            values: (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let lhs = linearized_step(b_frame, &u).inner(&z);
        let rhs = u.inner(&forward_step(b_frame, &z, DriftSign::Plus));
        let scale = (u.inner(&u) * z.inner(&z)).sqrt();
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    worst
}
