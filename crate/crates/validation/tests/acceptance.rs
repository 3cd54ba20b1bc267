//! Numbered acceptance criteria; prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use mfg_cli::run::initial_data;
use mfg_cli::{parse_config, run, Command, RunConfig};
use mfg_core::estimates::{adjoint_initial_data, adjoint_run, exponent_context, full_report, FullReport};
use mfg_core::exponents::{certify, rational, scan_sobolev_pair, verify_witness, Rational};
use mfg_core::fp::{forward_step, solve_forward_with, DriftSign};
use mfg_core::grid::{heat_solve, GridSpec, ScalarField, VectorField};
use mfg_core::hjb::{drift, linearized_step};
use mfg_core::mfg::{solve_mfg, MfgSolution};
use mfg_core::model::{verify_assumptions, AssumptionInputs, HamiltonianModel, Nonlinearity, SampleRegion};
use mfg_validation::{empirical_order, relative_variation, Checks, Verdict};

struct Run {
    cfg: RunConfig,
    sol: MfgSolution,
    full: FullReport,
    seconds: f64,
}

impl Run {
    fn new(text: &str) -> Run {
        let t0 = Instant::now();
        let cfg = parse_config(text).expect("acceptance configs parse");
        let (m0, u_t) = initial_data(&cfg);
        let mcfg = cfg.mfg();
        let sol = solve_mfg(&mcfg, &m0, &u_t).expect("acceptance runs converge");
        let full = full_report(&sol, &mcfg, &cfg.estimate_settings(), 1.0).expect("report builds");
        Run {
            cfg,
            sol,
            full,
            seconds: t0.elapsed().as_secs_f64(),
        }
    }

    fn lhs(&self, id: &str) -> f64 {
        self.full.report.get(id).unwrap_or_else(|| panic!("missing entry {id}")).lhs_value
    }

    fn constant(&self, id: &str, key: &str) -> f64 {
        self.full
            .report
            .get(id)
            .and_then(|e| e.constant(key))
            .unwrap_or_else(|| panic!("missing constant {id}.{key}"))
    }

    fn dt(&self) -> f64 {
        self.cfg.grid().dt
    }

    fn all_constants_finite(&self) -> bool {
        self.full
            .report
            .entries
            .iter()
            .all(|e| e.fitted_constants.values().all(|v| v.is_finite()))
    }
}

/// Lazily built runs shared between criteria, keyed by config text.
#[derive(Default)]
struct Runs {
    cache: BTreeMap<String, Run>,
}

impl Runs {
    fn get(&mut self, text: &str) -> &Run {
        self.cache.entry(text.to_string()).or_insert_with(|| Run::new(text))
    }
}

fn d1(n: usize) -> String {
    format!("N = {n}\n")
}

fn d1_cfl(n: usize, cfl: f64) -> String {
    format!("N = {n}\ncfl_factor = {cfl}\n")
}

fn d3(n: usize) -> String {
    format!("d = 3\nL = 4\nT = 0.5\nN = {n}\n")
}

fn exponent_certification() -> Verdict {
    let mut c = Checks::new();
    let mut tested = 0;
    let mut bad = Vec::new();
    for d in 3u32..=6 {
        let bound = rational(1, d as i64 - 1);
        for j in 1..=12i64 {
            for i in 1..=j {
                let alpha = rational(i, j);
                if alpha > bound {
                    continue;
                }
                tested += 1;
                let ok = match certify(d, &alpha) {
                    Ok(cert) => {
                        cert.is_feasible()
                            && cert.violations.is_empty()
                            && cert.witness.as_ref().is_some_and(|w| verify_witness(w).is_feasible())
                    }
                    Err(_) => false,
                };
                if !ok {
                    bad.push(format!("d={d} alpha={i}/{j}"));
                }
            }
        }
    }
    c.check(bad.is_empty(), format!("{tested} feasible (d, alpha) verified exactly, failures {bad:?}"));
    for d in 3u32..=6 {
        let alpha = rational(1, d as i64 - 1) + rational(1, 1000);
        let infeasible = certify(d, &alpha).map(|cert| !cert.is_feasible()).unwrap_or(false);
        let scan = scan_sobolev_pair(d, &alpha, 64).expect("scan runs");
        c.check(
            infeasible && scan.first_feasible.is_none(),
            format!(
                "d={d} alpha=1/{}+1/1000 infeasible, scan of {} candidates agrees",
                d - 1,
                scan.candidates_tested
            ),
        );
    }
    let spot = |d: u32, alpha: Rational, a: i64, cc: i64, t1: Rational, t2: Rational| {
        let w = certify(d, &alpha).ok().and_then(|cert| cert.witness);
        w.is_some_and(|w| w.a == rational(a, 1) && w.c == rational(cc, 1) && w.thetas.theta1 == t1 && w.thetas.theta2 == t2)
    };
    c.check(
        spot(3, rational(1, 2), 9, 3, rational(6, 5), rational(9, 5)),
        "(3, 1/2) -> a=9 c=3 theta=(6/5, 9/5)",
    );
    c.check(
        spot(4, rational(1, 3), 8, 4, rational(4, 3), rational(2, 1)),
        "(4, 1/3) -> a=8 c=4 theta=(4/3, 2)",
    );
    let secs = c.elapsed();
    c.check(secs < 5.0, format!("runtime {secs:.2} s < 5 s"));
    c.finish(1, "exponent certification")
}

fn conservation(runs: &mut Runs) -> Verdict {
    let mut c = Checks::new();
    let r = runs.get(&d1(256));
    let m_mass = r.sol.m.frames[0].integral();
    c.check(
        r.sol.mass_drift / m_mass <= 1e-12,
        format!("d=1 N=256 density relative drift {:.2e}", r.sol.mass_drift / m_mass),
    );
    let s = &r.full.adjoint;
    let z_drift = s.mass.iter().map(|m| (m - s.mass[0]).abs()).fold(0.0, f64::max) / s.mass[0];
    c.check(z_drift <= 1e-12, format!("d=1 N=256 adjoint relative drift {z_drift:.2e}"));

    let cfg = parse_config("d = 2\nN = 64\n").unwrap();
    let (m0, u_t) = initial_data(&cfg);
    let mcfg = cfg.mfg();
    let sol = solve_mfg(&mcfg, &m0, &u_t).expect("d=2 run converges");
    let rel = sol.mass_drift / m0.integral();
    c.check(rel <= 1e-12, format!("d=2 N=64 density relative drift {rel:.2e}"));
    let settings = cfg.estimate_settings();
    let ctx = exponent_context(&settings.alpha, settings.exponent_dim, 2).unwrap();
    let phi = adjoint_initial_data(mcfg.grid, &settings, &ctx).unwrap();
    let zeta = adjoint_run(&mcfg.model, &sol.u, &phi, 0).expect("adjoint runs");
    let rel = zeta.mass_drift / phi.integral();
    c.check(rel <= 1e-12, format!("d=2 N=64 adjoint relative drift {rel:.2e}"));
    c.finish(2, "conservation")
}

/// Exact heat flow of `exp(-x^2/w^2)` on the period `2L`, summed over images.
fn periodized_gaussian(x: f64, t: f64, w: f64, half_width: f64) -> f64 {
    let s = w * w + 4.0 * t;
    let amp = (w * w / s).sqrt();
    (-6..=6)
        .map(|k| {
            let y = x + 2.0 * half_width * k as f64;
            amp * (-y * y / s).exp()
        })
        .sum()
}

fn heat_flow_oracle() -> Verdict {
    let mut c = Checks::new();
    let (l, t, w) = (8.0, 1.0, 1.0);
    let mut errors = Vec::new();
    for n in [128usize, 256, 512] {
        let grid = GridSpec::new(1, l, n, t, 0.4).unwrap();
        let rho0 = ScalarField::from_fn(grid, |x| periodized_gaussian(x[0], 0.0, w, l));
        let zero = VectorField::zeros(grid);
        let res = solve_forward_with(&rho0, DriftSign::Plus, 0, |_| Ok(zero.clone())).unwrap();
        let exact = ScalarField::from_fn(grid, |x| periodized_gaussian(x[0], t, w, l));
        errors.push((grid.h(), res.rho.last().l1_distance(&exact)));
    }
    let o1 = empirical_order(errors[0].1, errors[1].1, errors[0].0, errors[1].0);
    let o2 = empirical_order(errors[1].1, errors[2].1, errors[1].0, errors[2].0);
    c.note(format!(
        "L1 errors {:.3e}, {:.3e}, {:.3e}",
        errors[0].1, errors[1].1, errors[2].1
    ));
    c.check(o1 >= 1.9 && o2 >= 1.9, format!("orders {o1:.3}, {o2:.3} >= 1.9"));
    c.check(errors[2].1 <= 1e-3, format!("N=512 error {:.3e} <= 1e-3", errors[2].1));
    let secs = c.elapsed();
    c.check(secs < 30.0, format!("runtime {secs:.1} s < 30 s"));
    c.finish(3, "heat-flow oracle")
}

fn dense_columns(grid: GridSpec, apply: impl Fn(&ScalarField) -> ScalarField) -> Vec<Vec<f64>> {
    (0..grid.len())
        .map(|j| {
            let mut e = ScalarField::zeros(grid);
            e.values[j] = 1.0;
            apply(&e).values
        })
        .collect()
}

fn transpose_duality(runs: &mut Runs) -> Verdict {
    let mut c = Checks::new();
    let grid = GridSpec::new(1, 8.0, 64, 1.0, 0.4).unwrap();
    let model = HamiltonianModel::new(1.5, 0.5).unwrap();
    let u = ScalarField::from_fn(grid, |x| (-(x[0] * x[0]) / 4.0).exp() + 0.3 * (x[0] * 0.5).sin());
    let b = drift(&model, &u);
    // columns of A (linearized HJB step) and F (forward step)
    let a = dense_columns(grid, |e| linearized_step(&b, e));
    let f = dense_columns(grid, |e| forward_step(&b, e, DriftSign::Plus));
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            // A[i][j] = a[j][i], F[j][i] = f[i][j]
            worst = worst.max((a[j][i] - f[i][j]).abs());
        }
    }
    c.check(worst <= 1e-12, format!("dense |A^T - F| max {worst:.2e} at N=64"));

    let coarse = runs.get(&d1(256));
    let r1 = coarse.lhs("duality_identity");
    let q1 = coarse.constant("duality_identity", "quadrature_residual");
    c.check(r1 <= 1e-6, format!("default residual {r1:.3e} <= 1e-6"));
    let fine = runs.get(&d1_cfl(256, 0.2));
    let r2 = fine.lhs("duality_identity");
    let q2 = fine.constant("duality_identity", "quadrature_residual");
    let ratio = r1 / r2;
    c.check(
        (ratio / 2.0 - 1.0).abs() <= 0.2,
        format!("residual ratio under dt halving {ratio:.3} (residuals {r1:.2e} -> {r2:.2e}), want 2 +- 20%"),
    );
    c.note(format!(
        "same-time quadrature residual {q1:.3e} -> {q2:.3e}, ratio {:.3}",
        q1 / q2
    ));
    c.finish(4, "transpose duality")
}

fn entropy_dissipation(runs: &mut Runs) -> Verdict {
    let mut c = Checks::new();
    let ns = [128usize, 256, 512];
    let mut late = Vec::new();
    let mut full = Vec::new();
    let mut dts = Vec::new();
    for &n in &ns {
        let r = runs.get(&d1(n));
        late.push(r.constant("entropy_dissipation_identity", "l1_after_initial_layer"));
        full.push(r.lhs("entropy_dissipation_identity"));
        dts.push(r.dt());
    }
    let o = |e: &[f64], k: usize| empirical_order(e[k], e[k + 1], dts[k], dts[k + 1]);
    c.check(
        late[0] > late[1] && late[1] > late[2] && o(&late, 0) >= 0.9 && o(&late, 1) >= 0.9,
        format!(
            "late-window L1 residual {:.3e}, {:.3e}, {:.3e}; dt orders {:.3}, {:.3} >= 0.9",
            late[0],
            late[1],
            late[2],
            o(&late, 0),
            o(&late, 1)
        ),
    );
    c.note(format!(
        "full-window L1 residual {:.3e}, {:.3e}, {:.3e}; dt orders {:.3}, {:.3}",
        full[0],
        full[1],
        full[2],
        o(&full, 0),
        o(&full, 1)
    ));
    for id in ["adjoint_entropy", "adjoint_moment"] {
        let a = runs.get(&d1(256)).full.report.get(id).unwrap().clone();
        let fine = runs.get(&d1(512)).full.report.get(id).unwrap().clone();
        let (ca, cf) = (a.constant("C").unwrap(), fine.constant("C").unwrap());
        let v = relative_variation(ca, cf);
        c.check(
            a.pass && fine.pass && v < 0.2,
            format!("{id} passes, C {ca:.4} -> {cf:.4} varies {:.2}%", 100.0 * v),
        );
    }
    c.finish(5, "entropy dissipation identity")
}

fn decoupled_exactness() -> Verdict {
    let mut c = Checks::new();
    let run = Run::new("coupling = false\na0 = 0\nuT_amplitude = 0\n");
    let u_max = run.sol.u.frames.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    c.check(u_max <= 1e-14, format!("max |u| {u_max:.1e}"));
    let m0 = &run.sol.m.frames[0];
    let heat = heat_solve(m0, run.cfg.horizon).unwrap();
    let err = run.sol.m.last().l1_distance(&heat);
    c.check(err <= 1e-3, format!("|m(T) - heat_solve| L1 {err:.3e} <= 1e-3"));
    let x = run.lhs("gradient_lp_bound");
    c.check(x == 0.0, format!("gradient bound lhs {x:e}"));
    c.check(run.sol.iterations == 1, format!("{} Picard iteration(s)", run.sol.iterations));
    c.finish(6, "decoupled exactness")
}

fn estimate_stability(runs: &mut Runs) -> Verdict {
    let mut c = Checks::new();
    let quantities = |r: &Run, with_mixed: bool| {
        let mut q = vec![
            ("density_energy", r.lhs("density_energy")),
            ("second_order_lhs", r.constant("second_order_energy", "lhs")),
            ("gradient_lp_bound", r.lhs("gradient_lp_bound")),
        ];
        if with_mixed {
            q.push(("density_mixed_norm", r.lhs("density_mixed_norm")));
        }
        q
    };
    let mut seconds = 0.0;
    for (label, coarse, fine, mixed) in [("d=1 N=256/512", d1(256), d1(512), false), ("d=3 N=32/48", d3(32), d3(48), true)] {
        let (qa, fa, sa) = {
            let r = runs.get(&coarse);
            (quantities(r, mixed), r.all_constants_finite(), r.seconds)
        };
        let (qb, fb, sb) = {
            let r = runs.get(&fine);
            (quantities(r, mixed), r.all_constants_finite(), r.seconds)
        };
        seconds += sa + sb;
        for ((name, a), (_, b)) in qa.iter().zip(&qb) {
            let v = relative_variation(*a, *b);
            c.check(v < 0.1, format!("{label} {name} {a:.4} -> {b:.4} ({:.2}%)", 100.0 * v));
        }
        c.check(fa && fb, format!("{label} all fitted constants finite"));
    }
    c.check(seconds < 600.0, format!("solver time {seconds:.0} s < 600 s"));
    c.finish(7, "estimate stability")
}

fn assumption_verification() -> Verdict {
    let mut c = Checks::new();
    let cfg = RunConfig::default();
    let (m0, u_t) = initial_data(&cfg);
    let inputs = AssumptionInputs {
        sample: SampleRegion {
            d: 1,
            half_width: cfg.half_width,
            points_per_axis: cfg.sample_points,
        },
        p_max: cfg.p_max,
        m0: Some(&m0),
        u_t: Some(&u_t),
        alpha: cfg.alpha.clone(),
        exponent_dim: 3,
    };
    let nl = Nonlinearity::new(0.5).unwrap();
    let quad = verify_assumptions(&HamiltonianModel::new(2.0, 0.0).unwrap(), &nl, &inputs);
    let k = |id: &str, key: &str| quad.get(id).and_then(|e| e.fitted_constants.get(key).copied()).unwrap_or(f64::NAN);
    c.check(
        (k("A4", "c") - 1.0).abs() <= 1e-12 && k("A4", "C").abs() <= 1e-12,
        format!("quadratic A4 (c, C) = ({}, {})", k("A4", "c"), k("A4", "C")),
    );
    c.check((k("A7", "C") - 4.0).abs() <= 1e-12, format!("quadratic A7 C = {}", k("A7", "C")));
    c.check(k("A8", "C").abs() <= 1e-12, format!("quadratic A8 C = {}", k("A8", "C")));
    let failing: Vec<_> = quad.entries.iter().filter(|e| !e.holds).map(|e| e.id).collect();
    c.check(quad.entries.len() == 9 && failing.is_empty(), format!("A1-A9 hold, failing {failing:?}"));

    let general = verify_assumptions(&HamiltonianModel::new(1.5, 0.5).unwrap(), &nl, &inputs);
    let finite = general.entries.iter().all(|e| e.fitted_constants.values().all(|v| v.is_finite()));
    c.check(finite, "gamma=3/2 a0=1/2 fitted constants finite");
    let eig = general
        .get("A1")
        .and_then(|e| e.fitted_constants.get("min_hessian_eigenvalue").copied())
        .unwrap_or(f64::NAN);
    c.check(eig > 0.0, format!("gamma=3/2 a0=1/2 A1 min eigenvalue {eig:.4e} > 0"));
    c.finish(8, "assumption verification")
}

fn reproducibility() -> Verdict {
    let mut c = Checks::new();
    for cmd in [Command::Solve, Command::Estimates] {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let manifests: Vec<_> = dirs
            .iter()
            .map(|dir| {
                let mut cfg = parse_config("N = 128\nfields = true\n").unwrap();
                cfg.output_dir = dir.path().join("out");
                run(cmd, &cfg).expect("run succeeds")
            })
            .collect();
        let same_digests = manifests[0].files == manifests[1].files;
        let same_bytes = manifests[0].files.iter().all(|f| {
            let a = fs::read(dirs[0].path().join("out").join(&f.name)).unwrap();
            let b = fs::read(dirs[1].path().join("out").join(&f.name)).unwrap();
            a == b
        });
        c.check(
            same_digests && same_bytes,
            format!("{} x2: {} files byte-identical", cmd.name(), manifests[0].files.len()),
        );
    }
    c.finish(9, "reproducibility")
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut runs = Runs::default();
    let mut verdicts = Vec::new();
    let mut report = |v: Verdict| {
        println!("{}", v.line());
        verdicts.push(v);
    };
    report(exponent_certification());
    report(conservation(&mut runs));
    report(heat_flow_oracle());
    report(transpose_duality(&mut runs));
    report(entropy_dissipation(&mut runs));
    report(decoupled_exactness());
    report(estimate_stability(&mut runs));
    report(assumption_verification());
    report(reproducibility());
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.pass).map(|v| v.number).collect();
    println!(
        "acceptance: {}/{} criteria pass in {:.0} s{}",
        verdicts.len() - failed.len(),
        verdicts.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!(", failing {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
