//! Subcommand pipelines and file emission.

use std::fs;
use std::path::{Path, PathBuf};

use mfg_core::estimates::{full_report, FullReport, ESTIMATE_IDS};
use mfg_core::exponents::{certify, format_rational, verify_witness, ExponentWitness, FeasibilityCertificate, Rational};
use mfg_core::grid::{bump, gaussian, gradient, FieldSeries, ScalarField};
use mfg_core::mfg::{solve_mfg, MfgSolution};
use mfg_core::model::{verify_assumptions, AssumptionInputs, AssumptionReport, SampleRegion};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Adjoint,
    Estimates,
    CheckAssumptions,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Adjoint => "adjoint",
            Command::Estimates => "estimates",
            Command::CheckAssumptions => "check-assumptions",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: mfg_core::Error,
    },
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for bad input, 3 for numerical breakdown, 4 for a violated invariant.
    pub fn exit_code(&self) -> i32 {
        use mfg_core::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Io { .. } => 1,
            RunError::Stage { source, .. } => match source {
                E::Domain(_) | E::Config(_) | E::Precondition(_) | E::Infeasible(_) => 2,
                E::StepSize { .. } | E::Divergence { .. } | E::NonConvergence { .. } | E::Numeric(_) => 3,
                E::Positivity { .. } => 4,
            },
        }
    }
}

fn stage(name: &'static str) -> impl Fn(mfg_core::Error) -> RunError {
    move |source| RunError::Stage { stage: name, source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub config: Value,
    pub versions: Value,
    pub grid_tags: Vec<String>,
    pub files: Vec<FileDigest>,
    /// Ids of estimate or assumption entries that did not pass.
    pub failed: Vec<String>,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes into one directory and can undo everything it wrote.
struct Emitter {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<FileDigest>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self, RunError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        if name != MANIFEST {
            self.files.push(FileDigest {
                name: name.to_string(),
                bytes: contents.len(),
                sha256: hex::encode(Sha256::digest(contents)),
            });
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn cleanup(&self) {
        for f in &self.files {
            let _ = fs::remove_file(self.dir.join(&f.name));
        }
        let _ = fs::remove_file(self.dir.join(MANIFEST));
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn versions() -> Value {
    json!({
        "mfg-cli": env!("CARGO_PKG_VERSION"),
        "mfg-core": mfg_core::VERSION,
    })
}

/// Unit-mass bump `m0` and Gaussian `u_T` from the config.
pub fn initial_data(cfg: &RunConfig) -> (ScalarField, ScalarField) {
    let grid = cfg.grid();
    let m0 = bump(grid, &cfg.m0_center, cfg.m0_radius);
    let m0 = m0.scaled(1.0 / m0.integral());
    let u_t = gaussian(grid, &vec![0.0; cfg.d], cfg.ut_amplitude, cfg.ut_width);
    (m0, u_t)
}

fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| csv_number(*v)).collect::<Vec<_>>().join(",")
}

fn stride_frames(len: usize, stride: usize) -> Vec<usize> {
    let mut k: Vec<usize> = (0..len).step_by(stride).collect();
    if k.last() != Some(&(len - 1)) {
        k.push(len - 1);
    }
    k
}

/// `t,mass,m_min,m_max,u_min,u_max,du_max` per emitted frame.
pub fn solve_series_csv(sol: &MfgSolution, stride: usize) -> String {
    let mut out = String::from("t,mass,m_min,m_max,u_min,u_max,du_max\n");
    for k in stride_frames(sol.m.len(), stride) {
        let m = &sol.m.frames[k];
        let u = &sol.u.frames[k];
        let du = gradient(u).max_norm();
        out.push_str(&csv_row(&[sol.m.time(k), m.integral(), m.min(), m.max(), u.min(), u.max(), du]));
        out.push('\n');
    }
    out
}

/// `t,mass,entropy,moment,dissipation_residual`; the residual column is empty
/// where the identity is not evaluated.
pub fn adjoint_series_csv(full: &FullReport, stride: usize) -> String {
    let s = &full.adjoint;
    let mut out = String::from("t,mass,entropy,moment,dissipation_residual\n");
    for k in stride_frames(s.t.len(), stride) {
        let r = s.dissipation_residual[k].unwrap_or(f64::NAN);
        out.push_str(&csv_row(&[s.t[k], s.mass[k], s.entropy[k], s.moment[k], r]));
        out.push('\n');
    }
    out
}

/// Row-major values, one line per last-axis row, plus the JSON sidecar.
pub fn field_csv(f: &ScalarField, name: &str, t: f64) -> (String, Value) {
    let g = f.grid;
    let mut out = String::new();
    for row in f.values.chunks(g.n) {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    let sidecar = json!({
        "name": name,
        "t": t,
        "d": g.d,
        "N": g.n,
        "L": g.half_width,
        "h": g.h(),
        "layout": "row-major, last axis fastest; one CSV line per last-axis row",
        "origin": -g.half_width,
    });
    (out, sidecar)
}

fn solve_report(sol: &MfgSolution) -> Value {
    json!({
        "grid": sol.u.grid,
        "grid_tag": sol.u.grid.tag(),
        "iterations": sol.iterations,
        "fixpoint_residuals": sol.fixpoint_residuals,
        "pde_residuals": sol.pde_residuals,
        "cfl_effective": sol.cfl_effective,
        "mass_drift": sol.mass_drift,
        "min_value": sol.min_value,
    })
}

fn assumptions(cfg: &RunConfig, m0: &ScalarField, u_t: &ScalarField) -> AssumptionReport {
    let inputs = AssumptionInputs {
        sample: SampleRegion {
            d: cfg.d,
            half_width: cfg.half_width,
            points_per_axis: cfg.sample_points,
        },
        p_max: cfg.p_max,
        m0: Some(m0),
        u_t: Some(u_t),
        alpha: cfg.alpha.clone(),
        exponent_dim: cfg.exponent_dim,
    };
    verify_assumptions(&cfg.model(), &cfg.nonlinearity(), &inputs)
}

fn emit_field(em: &mut Emitter, series: &FieldSeries, k: usize, name: &str) -> Result<(), RunError> {
    let (csv, sidecar) = field_csv(&series.frames[k], name, series.time(k));
    em.write(&format!("{name}.csv"), csv.as_bytes())?;
    em.json(&format!("{name}.json"), &sidecar)
}

fn pipeline(cmd: Command, cfg: &RunConfig, em: &mut Emitter) -> Result<Vec<String>, RunError> {
    let (m0, u_t) = initial_data(cfg);
    let mut failed = Vec::new();
    if cmd == Command::CheckAssumptions {
        let report = assumptions(cfg, &m0, &u_t);
        failed.extend(report.entries.iter().filter(|e| !e.holds).map(|e| e.id.to_string()));
        em.json("assumptions.json", &report)?;
        return Ok(failed);
    }

    let mcfg = cfg.mfg();
    let sol = solve_mfg(&mcfg, &m0, &u_t).map_err(stage("solve"))?;
    em.json("solve_report.json", &solve_report(&sol))?;
    em.write("solve_series.csv", solve_series_csv(&sol, cfg.stride).as_bytes())?;
    if cfg.fields {
        emit_field(em, &sol.m, 0, "m_initial")?;
        emit_field(em, &sol.m, sol.m.len() - 1, "m_final")?;
        emit_field(em, &sol.u, 0, "u_initial")?;
    }
    if cmd == Command::Solve {
        return Ok(failed);
    }

    let report = assumptions(cfg, &m0, &u_t);
    let c_fit = report
        .get("A4")
        .and_then(|e| e.fitted_constants.get("c").copied())
        .filter(|c| c.is_finite() && *c > 0.0)
        .unwrap_or(1.0);
    let stage_name = if cmd == Command::Adjoint { "adjoint" } else { "estimates" };
    let full = full_report(&sol, &mcfg, &cfg.estimate_settings(), c_fit).map_err(stage(stage_name))?;
    em.write("adjoint_series.csv", adjoint_series_csv(&full, cfg.stride).as_bytes())?;
    em.json(
        "adjoint_report.json",
        &json!({
            "tau": cfg.tau,
            "duality": full.duality,
            "exponents": full.exponents,
            "identity": full.report.get("entropy_dissipation_identity"),
            "mass": full.report.get("adjoint_moment").map(|e| e.fitted_constants.clone()),
        }),
    )?;
    if cmd == Command::Adjoint {
        return Ok(failed);
    }

    em.json("assumptions.json", &report)?;
    let missing: Vec<&str> = ESTIMATE_IDS.iter().copied().filter(|id| full.report.get(id).is_none()).collect();
    failed.extend(full.report.entries.iter().filter(|e| !e.pass).map(|e| e.id.to_string()));
    failed.extend(missing.iter().map(|id| format!("missing:{id}")));
    em.json(
        "estimates.json",
        &json!({
            "entries": full.report.entries,
            "warnings": full.report.warnings,
            "missing_ids": missing,
            "exponents": full.exponents,
            "c_fit": c_fit,
        }),
    )?;
    Ok(failed)
}

/// Runs `cmd` and writes its outputs plus `manifest.json` into
/// `cfg.output_dir`. On error every file written by this call is removed.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<RunManifest, RunError> {
    let mut em = Emitter::new(&cfg.output_dir)?;
    let result = pipeline(cmd, cfg, &mut em).and_then(|failed| {
        em.write("config.txt", cfg.to_text().as_bytes())?;
        let manifest = RunManifest {
            command: cmd.name(),
            config: cfg.echo(),
            versions: versions(),
            grid_tags: vec![cfg.grid().tag()],
            files: em.files.clone(),
            failed,
        };
        em.json(MANIFEST, &manifest)?;
        Ok(manifest)
    });
    if result.is_err() {
        em.cleanup();
    }
    result
}

fn witness_json(w: &ExponentWitness) -> Value {
    let r = format_rational;
    json!({
        "a": r(&w.a),
        "c": r(&w.c),
        "a_conj": r(&w.a_conj),
        "c_conj": r(&w.c_conj),
        "young": {
            "p": r(&w.young.p),
            "p_conj": r(&w.young.p_conj),
            "q": r(&w.young.q),
            "q_conj": r(&w.young.q_conj),
        },
        "interpolation": {
            "s_tilde": r(&w.interpolation.s_tilde),
            "b": r(&w.interpolation.b),
            "lambda": r(&w.interpolation.lambda),
        },
        "splitting": {
            "P": r(&w.splitting.big_p),
            "Q": r(&w.splitting.big_q),
            "M": r(&w.splitting.big_m),
            "beta": r(&w.splitting.beta),
            "kappa": r(&w.splitting.kappa),
        },
        "theta1": r(&w.thetas.theta1),
        "theta2": r(&w.thetas.theta2),
    })
}

/// Certificate for `(d, alpha)` with the independent re-verification result.
pub fn exponents_report(d: u32, alpha: &Rational) -> Result<(FeasibilityCertificate, Value), RunError> {
    let cert = certify(d, alpha).map_err(stage("exponents"))?;
    let verified = cert.witness.as_ref().map(|w| verify_witness(w).is_feasible());
    let value = json!({
        "d": d,
        "alpha": format_rational(alpha),
        "status": cert.status,
        "alpha_strict": cert.alpha_strict,
        "violations": cert.violations,
        "witness": cert.witness.as_ref().map(witness_json),
        "verified": verified,
    });
    Ok((cert, value))
}
