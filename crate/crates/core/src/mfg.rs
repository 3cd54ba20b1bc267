//! Damped Picard iteration for the mollified forward-backward system.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fp::{solve_forward_with, DriftSign};
use crate::grid::{compensated_sum, convolve, divergence, fill, gradient, laplacian, FieldSeries, GridSpec, Kernel, ScalarField, VectorField};
use crate::hjb::{drift_from_gradient, solve_backward, weight_field};
use crate::model::{HamiltonianModel, Nonlinearity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MfgConfig {
    pub grid: GridSpec,
    pub model: HamiltonianModel,
    pub nl: Nonlinearity,
    /// Mollification radius; `0` uses `g` pointwise.
    pub epsilon: f64,
    /// Damping in `(0, 1]`.
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `false` replaces the coupling by zero.
    pub coupling: bool,
}

impl MfgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < self.grid.half_width / 4.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in [0, L/4) = [0, {}), got {}",
                self.grid.half_width / 4.0,
                self.epsilon
            )));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::Config(format!("omega must lie in (0, 1], got {}", self.omega)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// `eta * g(eta * m)` with a prebuilt kernel. Slightly negative densities are
/// clamped to zero before `g` is applied.
#[derive(Debug, Clone)]
pub struct Regularizer {
    nl: Nonlinearity,
    kernel: Option<Kernel>,
}

impl Regularizer {
    pub fn new(grid: &GridSpec, nl: Nonlinearity, epsilon: f64) -> Result<Self> {
        let kernel = if epsilon > 0.0 {
            Some(Kernel::mollifier(grid, epsilon)?)
        } else {
            None
        };
        Ok(Self { nl, kernel })
    }

    pub fn apply(&self, m: &ScalarField) -> Result<ScalarField> {
        let nl = self.nl;
        match &self.kernel {
            None => Ok(m.map(move |v| nl.g(v.max(0.0)))),
            Some(k) => {
                let inner = convolve(m, k)?.map(move |v| nl.g(v.max(0.0)));
                convolve(&inner, k)
            }
        }
    }
}

pub fn regularize_g(m_frame: &ScalarField, nl: &Nonlinearity, epsilon: f64) -> Result<ScalarField> {
    if !(epsilon >= 0.0) {
        return Err(Error::Config(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Regularizer::new(&m_frame.grid, *nl, epsilon)?.apply(m_frame)
}

/// Space-time `L^2` norms of the two discrete equations evaluated on `(u, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeResiduals {
    pub hjb: f64,
    pub fp: f64,
}

#[derive(Debug, Clone)]
pub struct MfgSolution {
    pub u: FieldSeries,
    pub m: FieldSeries,
    /// Coupling source the last HJB solve used.
    pub coupling: FieldSeries,
    pub iterations: usize,
    pub fixpoint_residuals: Vec<f64>,
    pub pde_residuals: PdeResiduals,
    pub cfl_effective: f64,
    pub mass_drift: f64,
    pub min_value: f64,
}

impl MfgSolution {
    /// Drift for the step `n -> n+1`, `D_pH(x, grad_h u^{n+1})`.
    pub fn drift_at(&self, model: &HamiltonianModel, step: usize) -> VectorField {
        let w = weight_field(model, &self.u.grid);
        drift_from_gradient(model, &w, &gradient(&self.u.frames[step + 1]))
    }
}

fn coupling_series(reg: &Regularizer, m: &FieldSeries, on: bool) -> Result<FieldSeries> {
    let frames = if on {
        m.frames.iter().map(|f| reg.apply(f)).collect::<Result<Vec<_>>>()?
    } else {
        vec![ScalarField::zeros(m.grid); m.len()]
    };
    Ok(FieldSeries::new(m.grid, m.start_step, frames))
}

fn density_run(model: &HamiltonianModel, u: &FieldSeries, m0: &ScalarField) -> Result<crate::fp::FpResult> {
    let w = weight_field(model, &u.grid);
    solve_forward_with(m0, DriftSign::Plus, 0, |step| {
        Ok(drift_from_gradient(model, &w, &gradient(&u.frames[step + 1])))
    })
}

/// Runs the Picard loop from the zero-drift density flow.
///
/// Iteration `k` builds the coupling from `m^k`, solves HJB backward, solves
/// FP forward with the resulting drift and damps:
/// `m^{k+1} = (1 - omega) m^k + omega FP`. The returned `m` is the undamped
/// FP output of the last iteration, paired with the `u` that produced it.
pub fn solve_mfg(cfg: &MfgConfig, m0: &ScalarField, u_t: &ScalarField) -> Result<MfgSolution> {
    cfg.validate()?;
    let grid = cfg.grid;
    if m0.grid != grid || u_t.grid != grid {
        return Err(Error::Config("initial or terminal data on a different grid".into()));
    }
    if m0.min() < 0.0 {
        return Err(Error::Config(format!("m0 must be nonnegative, min = {:e}", m0.min())));
    }
    if (m0.integral() - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!("m0 must have unit mass, got {}", m0.integral())));
    }
    let reg = Regularizer::new(&grid, cfg.nl, cfg.epsilon)?;
    let mut m_k = solve_forward_with(m0, DriftSign::Plus, 0, |_| Ok(VectorField::zeros(grid)))?.rho;
    let mut history = Vec::new();
    for iter in 1..=cfg.max_iter {
        let g = coupling_series(&reg, &m_k, cfg.coupling)?;
        let hjb = solve_backward(&cfg.model, &g, u_t)?;
        let fp = density_run(&cfg.model, &hjb.u, m0)?;
        let res = cfg.omega * fp.rho.sup_l1_distance(&m_k);
        history.push(res);
        if res < cfg.tol {
            let mut sol = MfgSolution {
                u: hjb.u,
                m: fp.rho,
                coupling: g,
                iterations: iter,
                fixpoint_residuals: history,
                pde_residuals: PdeResiduals { hjb: 0.0, fp: 0.0 },
                cfl_effective: hjb.cfl_effective,
                mass_drift: fp.mass_drift,
                min_value: fp.min_value,
            };
            sol.pde_residuals = residuals(&sol, cfg)?;
            return Ok(sol);
        }
        let om = cfg.omega;
        for (mk, new) in m_k.frames.iter_mut().zip(&fp.rho.frames) {
            let blended = fill(grid.len(), |i| (1.0 - om) * mk.values[i] + om * new.values[i]);
            mk.values = blended;
        }
    }
    Err(Error::NonConvergence { residuals: history })
}

/// Both discrete equations evaluated on the returned pair, divided through by
/// `dt`, as space-time `L^2` norms.
pub fn residuals(sol: &MfgSolution, cfg: &MfgConfig) -> Result<PdeResiduals> {
    let grid = sol.u.grid;
    let dt = grid.dt;
    let vol = grid.cell_volume();
    let reg = Regularizer::new(&grid, cfg.nl, cfg.epsilon)?;
    let w = weight_field(&cfg.model, &grid);
    let mut hjb_sq = Vec::with_capacity(grid.n_steps);
    let mut fp_sq = Vec::with_capacity(grid.n_steps);
    for n in 0..grid.n_steps {
        let u1 = &sol.u.frames[n + 1];
        let u0 = &sol.u.frames[n];
        let m1 = &sol.m.frames[n + 1];
        let m0 = &sol.m.frames[n];
        let g = if cfg.coupling {
            reg.apply(m1)?
        } else {
            ScalarField::zeros(grid)
        };
        let grad = gradient(u1);
        let lap_u = laplacian(u1);
        let hjb_r = fill(grid.len(), |i| {
            let s: f64 = grad.components.iter().map(|c| c[i] * c[i]).sum();
            let h = w[i] * cfg.model.radial_excess(s);
            (u0.values[i] - u1.values[i]) / dt - (lap_u.values[i] + g.values[i] - h)
        });
        hjb_sq.push(dt * vol * compensated_sum(hjb_r.iter().map(|r| r * r)));

        let b = drift_from_gradient(&cfg.model, &w, &grad);
        let flux = VectorField {
            grid,
            components: b.components.iter().map(|c| fill(grid.len(), |i| c[i] * m0.values[i])).collect(),
        };
        let div = divergence(&flux);
        let lap_m = laplacian(m0);
        let fp_r = fill(grid.len(), |i| (m1.values[i] - m0.values[i]) / dt - lap_m.values[i] - div.values[i]);
        fp_sq.push(dt * vol * compensated_sum(fp_r.iter().map(|r| r * r)));
    }
    Ok(PdeResiduals {
        hjb: compensated_sum(hjb_sq).sqrt(),
        fp: compensated_sum(fp_sq).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::bump;

    fn cfg(grid: GridSpec) -> MfgConfig {
        MfgConfig {
            grid,
            model: HamiltonianModel::new(2.0, 0.0).unwrap(),
            nl: Nonlinearity::new(0.5).unwrap(),
            epsilon: 0.1,
            omega: 0.5,
            tol: 1e-8,
            max_iter: 200,
            coupling: true,
        }
    }

    fn unit_bump(g: GridSpec) -> ScalarField {
        let b = bump(g, &[0.0], 1.0);
        b.scaled(1.0 / b.integral())
    }

    #[test]
    fn regularize_examples() {
        let g = GridSpec::new(1, 4.0, 64, 0.1, 0.4).unwrap();
        let nl = Nonlinearity::new(0.5).unwrap();
        let m = unit_bump(g);
        let pointwise = regularize_g(&m, &nl, 0.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(pointwise.values[i], nl.g(m.values[i]));
        }
        let c = regularize_g(&ScalarField::constant(g, 2.0), &nl, 0.4).unwrap();
        assert!(c.max_distance(&ScalarField::constant(g, nl.g(2.0))) < 1e-13);
        let k = Kernel::mollifier(&g, 0.4).unwrap();
        let inner = convolve(&m, &k).unwrap().map(|v| nl.g(v.max(0.0)));
        let out = regularize_g(&m, &nl, 0.4).unwrap();
        assert!((out.integral() - inner.integral()).abs() < 1e-13);
    }

    #[test]
    fn config_validation() {
        let g = GridSpec::new(1, 4.0, 32, 0.1, 0.4).unwrap();
        let mut c = cfg(g);
        c.epsilon = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg(g);
        c.omega = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg(g);
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn decoupled_converges_immediately() {
        let g = GridSpec::new(1, 4.0, 64, 0.2, 0.4).unwrap();
        let mut c = cfg(g);
        c.coupling = false;
        let sol = solve_mfg(&c, &unit_bump(g), &ScalarField::zeros(g)).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.u.frames.iter().all(|f| f.max_abs() == 0.0));
        assert!(sol.pde_residuals.hjb <= 1e-12);
        assert!(sol.pde_residuals.fp <= 1e-8);
    }

    #[test]
    fn coupled_run_keeps_probability_densities() {
        let g = GridSpec::new(1, 4.0, 32, 0.2, 0.4).unwrap();
        let m0 = unit_bump(g);
        let sol = solve_mfg(&cfg(g), &m0, &ScalarField::zeros(g)).unwrap();
        assert_eq!(sol.m.frames[0], m0);
        for f in &sol.m.frames {
            assert!((f.integral() - 1.0).abs() <= 1e-12);
            assert!(f.min() >= -1e-12);
        }
    }

    #[test]
    fn non_convergence_carries_history() {
        let g = GridSpec::new(1, 4.0, 32, 0.2, 0.4).unwrap();
        let mut c = cfg(g);
        c.max_iter = 2;
        c.tol = 1e-300;
        let u_t = ScalarField::from_fn(g, |x| 0.5 * (x[0]).cos());
        match solve_mfg(&c, &unit_bump(g), &u_t) {
            Err(Error::NonConvergence { residuals }) => assert_eq!(residuals.len(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
