//! Model Hamiltonian `H(x, p) = a(x) ((1 + |p|^2)^{gamma/2} - 1)` with
//! `a(x) = 1 + a0 exp(-|x|^2)`, its Legendre transform, the coupling `g`,
//! and sampled checks of the structural assumptions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exponents::{self, Rational, Status};
use crate::grid::{compensated_sum, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianModel {
    pub gamma: f64,
    pub a0: f64,
}

/// Analytic derivatives of `H` at one `(x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianDerivatives {
    pub dp: Vec<f64>,
    pub dx: Vec<f64>,
    /// `D^2_pp H`, row-major `d x d`.
    pub dpp: Vec<Vec<f64>>,
    /// `D^2_xp H`, entry `[j][k] = d_{x_j} d_{p_k} H`.
    pub dxp: Vec<Vec<f64>>,
}

impl HamiltonianModel {
    pub fn new(gamma: f64, a0: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma <= 2.0) {
            return Err(Error::Config(format!("gamma must lie in (1, 2], got {gamma}")));
        }
        if !(a0 >= 0.0 && a0.is_finite()) {
            return Err(Error::Config(format!("a0 must be >= 0, got {a0}")));
        }
        Ok(Self { gamma, a0 })
    }

    fn is_quadratic(&self) -> bool {
        self.gamma == 2.0
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        1.0 + self.a0 * (-x.iter().map(|v| v * v).sum::<f64>()).exp()
    }

    /// `grad a(x) = -2 a0 x exp(-|x|^2)`.
    pub fn weight_gradient(&self, x: &[f64]) -> Vec<f64> {
        let e = self.a0 * (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        x.iter().map(|v| -2.0 * v * e).collect()
    }

    /// `(1 + s)^{gamma/2} - 1` for `s = |p|^2`, without cancellation near 0.
    pub fn radial_excess(&self, s: f64) -> f64 {
        if self.is_quadratic() {
            s
        } else {
            (0.5 * self.gamma * s.ln_1p()).exp_m1()
        }
    }

    /// `gamma (1 + s)^{gamma/2 - 1}`, so that `D_p H = a(x) * slope * p`.
    pub fn radial_slope(&self, s: f64) -> f64 {
        if self.is_quadratic() {
            2.0
        } else {
            self.gamma * ((0.5 * self.gamma - 1.0) * s.ln_1p()).exp()
        }
    }

    pub fn eval_h(&self, x: &[f64], p: &[f64]) -> f64 {
        let s = p.iter().map(|v| v * v).sum::<f64>();
        self.weight(x) * self.radial_excess(s)
    }

    pub fn eval_dp_h(&self, x: &[f64], p: &[f64]) -> Vec<f64> {
        let s = p.iter().map(|v| v * v).sum::<f64>();
        let k = self.weight(x) * self.radial_slope(s);
        p.iter().map(|v| k * v).collect()
    }

    pub fn eval_derivatives(&self, x: &[f64], p: &[f64]) -> HamiltonianDerivatives {
        let d = p.len();
        let s = p.iter().map(|v| v * v).sum::<f64>();
        let a = self.weight(x);
        let slope = self.radial_slope(s);
        let excess = self.radial_excess(s);
        let grad_a = self.weight_gradient(x);
        let dp = p.iter().map(|v| a * slope * v).collect();
        let dx = grad_a.iter().map(|g| g * excess).collect();
        let curvature = (self.gamma - 2.0) / (1.0 + s);
        let dpp = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| {
                        let delta = if j == k { 1.0 } else { 0.0 };
                        a * slope * (delta + curvature * p[j] * p[k])
                    })
                    .collect()
            })
            .collect();
        let dxp = (0..d)
            .map(|j| (0..d).map(|k| grad_a[j] * slope * p[k]).collect())
            .collect();
        HamiltonianDerivatives { dp, dx, dpp, dxp }
    }

    /// Legendre transform `L(x, v) = sup_p -p.v - H(x, p)`.
    pub fn eval_l(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        self.legendre(x, v).map(|(value, _)| value)
    }

    /// `L(x, v)` together with the maximizing covector.
    ///
    /// `H` is radial in `p`, so the maximizer is `p = -t v/|v|` with `t >= 0`
    /// solving `|v| = a slope(t^2) t`; the root is bracketed by doubling and
    /// refined by bisection.
    pub fn legendre(&self, x: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let a = self.weight(x);
        if w == 0.0 {
            return Ok((0.0, vec![0.0; v.len()]));
        }
        let t = if self.is_quadratic() {
            w / (2.0 * a)
        } else {
            let dphi = |t: f64| w - a * self.radial_slope(t * t) * t;
            let mut hi = 1.0f64;
            let mut doublings = 0;
            while dphi(hi) > 0.0 {
                hi *= 2.0;
                doublings += 1;
                if doublings > 200 || !hi.is_finite() {
                    return Err(Error::Numeric(format!("no maximizer bracket for |v| = {w}")));
                }
            }
            let mut lo = 0.0f64;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if dphi(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi.max(1.0) {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        let value = if self.is_quadratic() {
            w * w / (4.0 * a)
        } else {
            t * w - a * self.radial_excess(t * t)
        };
        let p = v.iter().map(|c| -t * c / w).collect();
        Ok((value, p))
    }
}

/// Coupling `g(m) = 2^{1-alpha} m (1 + m)^{alpha - 1}`: linear near zero,
/// `m^alpha`-like at infinity, increasing, `g(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nonlinearity {
    pub alpha: f64,
}

impl Nonlinearity {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// The constant `2^{1-alpha}` in both growth regimes.
    pub fn scale(&self) -> f64 {
        (2.0f64).powf(1.0 - self.alpha)
    }

    /// `g(m)` for `m >= 0`; no domain check.
    pub fn g(&self, m: f64) -> f64 {
        self.scale() * m * ((self.alpha - 1.0) * m.ln_1p()).exp()
    }

    /// `g'(m) = 2^{1-alpha} (1+m)^{alpha-2} (1 + alpha m)`.
    pub fn g_prime(&self, m: f64) -> f64 {
        self.scale() * ((self.alpha - 2.0) * m.ln_1p()).exp() * (1.0 + self.alpha * m)
    }

    pub fn eval_g(&self, m: f64) -> Result<(f64, f64)> {
        if !(m >= 0.0) {
            return Err(Error::Domain(format!("g needs m >= 0, got {m}")));
        }
        Ok((self.g(m), self.g_prime(m)))
    }

    /// `G(z) = int_0^z g` by adaptive Simpson.
    #[allow(non_snake_case)]
    pub fn eval_G(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("G needs finite z >= 0, got {z}")));
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        adaptive_simpson(|s| self.g(s), 0.0, z, 1e-10)
    }

    /// Closed form of `G`:
    /// `2^{1-alpha} [((1+z)^{alpha+1} - 1)/(alpha+1) - ((1+z)^alpha - 1)/alpha]`.
    pub fn antiderivative(&self, z: f64) -> f64 {
        let l = z.ln_1p();
        let a = self.alpha;
        self.scale() * (((a + 1.0) * l).exp_m1() / (a + 1.0) - (a * l).exp_m1() / a)
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson with the usual `|S2 - S1| <= 15 tol` acceptance. The
/// tolerance is absolute, floored at a few ulps of the running estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        let floor = 8.0 * f64::EPSILON * (left + right).abs();
        if delta.abs() <= 15.0 * tol.max(floor) {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::Numeric(format!("adaptive Simpson did not converge on [{a}, {b}]")));
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mat: &[Vec<f64>]) -> Vec<f64> {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Sample lattice for the `x` variable: `points_per_axis^d` points in `[-L, L]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRegion {
    pub d: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl SampleRegion {
    fn points(&self) -> Vec<Vec<f64>> {
        let k = self.points_per_axis.max(1);
        let coord = |i: usize| {
            if k == 1 {
                0.0
            } else {
                -self.half_width + 2.0 * self.half_width * i as f64 / (k - 1) as f64
            }
        };
        let total = k.pow(self.d as u32);
        (0..total)
            .map(|idx| {
                (0..self.d)
                    .map(|axis| coord((idx / k.pow((self.d - 1 - axis) as u32)) % k))
                    .collect()
            })
            .collect()
    }
}

/// Data for the checks that are not sampled over `(x, p)`.
#[derive(Debug, Clone)]
pub struct AssumptionInputs<'a> {
    pub sample: SampleRegion,
    pub p_max: f64,
    pub m0: Option<&'a ScalarField>,
    pub u_t: Option<&'a ScalarField>,
    pub alpha: Rational,
    /// Dimension used for the exponent-range check (at least 3).
    pub exponent_dim: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionEntry {
    pub id: &'static str,
    pub holds: bool,
    pub fitted_constants: BTreeMap<String, f64>,
    pub worst_point: Option<WorstPoint>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn get(&self, id: &str) -> Option<&AssumptionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    pub fn by_id(&self) -> BTreeMap<&'static str, &AssumptionEntry> {
        self.entries.iter().map(|e| (e.id, e)).collect()
    }
}

fn covector_samples(d: usize, p_max: f64) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    if d > 1 {
        let diag = 1.0 / (d as f64).sqrt();
        dirs.push(vec![diag; d]);
        let skew: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 0.6 } else { -0.8 }).collect();
        let n = skew.iter().map(|v| v * v).sum::<f64>().sqrt();
        dirs.push(skew.iter().map(|v| v / n).collect());
    }
    const MAGNITUDES: usize = 96;
    let mut out = vec![vec![0.0; d]];
    for dir in &dirs {
        for k in 1..=MAGNITUDES {
            let r = p_max * (k as f64 / MAGNITUDES as f64).powi(2);
            out.push(dir.iter().map(|c| r * c).collect());
            out.push(dir.iter().map(|c| -r * c).collect());
        }
    }
    out
}

/// Tracks the supremum of a ratio and where it was attained.
struct Sup {
    value: f64,
    at: Option<WorstPoint>,
}

impl Sup {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            at: None,
        }
    }

    fn offer(&mut self, v: f64, x: &[f64], p: &[f64]) {
        if v > self.value {
            self.value = v;
            self.at = Some(WorstPoint {
                x: x.to_vec(),
                p: p.to_vec(),
            });
        }
    }

    fn or_zero(&self) -> f64 {
        if self.value.is_finite() {
            self.value
        } else {
            0.0
        }
    }
}

/// Fits `lhs <= C + C h` as `C = max(slope, intercept)` with
/// `slope = sup lhs/h` over `h > 0` and `intercept = sup (lhs - slope h)^+`.
fn fit_affine(samples: &[(f64, f64, usize, usize)], xs: &[Vec<f64>], ps: &[Vec<f64>]) -> (f64, f64, Option<WorstPoint>) {
    let mut slope = Sup::new();
    for &(lhs, h, ix, ip) in samples {
        if h > 0.0 {
            slope.offer(lhs / h, &xs[ix], &ps[ip]);
        }
    }
    let s = slope.or_zero().max(0.0);
    let mut intercept = 0.0f64;
    for &(lhs, h, _, _) in samples {
        intercept = intercept.max(lhs - s * h);
    }
    (s, intercept, slope.at)
}

fn constants(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Samples every structural assumption and fits its constants.
pub fn verify_assumptions(model: &HamiltonianModel, nl: &Nonlinearity, inputs: &AssumptionInputs<'_>) -> AssumptionReport {
    let d = inputs.sample.d;
    let xs = inputs.sample.points();
    let ps = covector_samples(d, inputs.p_max);
    let mut entries = Vec::new();

    // one pass collecting every sampled quantity
    let mut min_h = f64::INFINITY;
    let mut min_eig = Sup::new();
    let mut conv_a4 = Vec::new();
    let mut dpsq = Vec::new();
    let mut dxh = Vec::new();
    let mut dxp_ratio = Sup::new();
    let mut dpp_ratio = Sup::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (ix, x) in xs.iter().enumerate() {
        for (ip, p) in ps.iter().enumerate() {
            let h = model.eval_h(x, p);
            let der = model.eval_derivatives(x, p);
            min_h = min_h.min(h);
            let lam = symmetric_eigenvalues(&der.dpp).into_iter().fold(f64::INFINITY, f64::min);
            min_eig.offer(-lam, x, p);
            let dp_dot_p: f64 = der.dp.iter().zip(p).map(|(a, b)| a * b).sum();
            conv_a4.push((dp_dot_p - h, h, ix, ip));
            dpsq.push((der.dp.iter().map(|v| v * v).sum::<f64>(), h, ix, ip));
            dxh.push((der.dx.iter().map(|v| v * v).sum::<f64>().sqrt(), h, ix, ip));
            let dxp_sq: f64 = der.dxp.iter().flatten().map(|v| v * v).sum();
            if h > 0.0 {
                dxp_ratio.offer(dxp_sq / h, x, p);
            }
            for _ in 0..4 {
                let mut m = vec![vec![0.0; d]; d];
                for j in 0..d {
                    for k in j..d {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        m[j][k] = v;
                        m[k][j] = v;
                    }
                }
                let am = matmul(&der.dpp, &m);
                let amm = matmul(&am, &m);
                let lhs: f64 = am.iter().flatten().map(|v| v * v).sum();
                let tr: f64 = (0..d).map(|i| amm[i][i]).sum();
                if tr > 0.0 {
                    dpp_ratio.offer(lhs / tr, x, p);
                }
            }
        }
    }

    // A1: nonnegative, strictly convex, superlinear
    let min_eigenvalue = -min_eig.value;
    let coercive = xs.iter().all(|x| {
        (0..d).all(|k| {
            let e: Vec<f64> = (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
            let at = |r: f64| model.eval_h(x, &e.iter().map(|c| r * c).collect::<Vec<_>>()) / r;
            at(inputs.p_max) > at(0.5 * inputs.p_max) && at(0.5 * inputs.p_max) > at(0.25 * inputs.p_max)
        })
    });
    let ratio_at_max = model.eval_h(&vec![0.0; d], &{
        let mut e = vec![0.0; d];
        e[0] = inputs.p_max;
        e
    }) / inputs.p_max;
    entries.push(AssumptionEntry {
        id: "A1",
        holds: min_h >= 0.0 && min_eigenvalue > 0.0 && coercive,
        fitted_constants: constants(&[
            ("min_h", min_h),
            ("min_hessian_eigenvalue", min_eigenvalue),
            ("h_over_p_at_pmax", ratio_at_max),
        ]),
        worst_point: min_eig.at.clone(),
        note: if coercive {
            "H/|p| increasing along every axis up to p_max".into()
        } else {
            "H/|p| not increasing at large |p|".into()
        },
    });

    entries.push(check_initial_data(inputs));

    // A3: L(x, 0) >= 0, bounded, integrable over the sample box
    let mut l0_min = f64::INFINITY;
    let mut l0_max = f64::NEG_INFINITY;
    let mut l0_err = None;
    let mut l0_values = Vec::with_capacity(xs.len());
    for x in &xs {
        match model.eval_l(x, &vec![0.0; d]) {
            Ok(v) => {
                l0_min = l0_min.min(v);
                l0_max = l0_max.max(v);
                l0_values.push(v.abs());
            }
            Err(e) => l0_err = Some(e.to_string()),
        }
    }
    let cell = if inputs.sample.points_per_axis > 1 {
        (2.0 * inputs.sample.half_width / (inputs.sample.points_per_axis - 1) as f64).powi(d as i32)
    } else {
        1.0
    };
    let l0_integral = cell * compensated_sum(l0_values);
    entries.push(AssumptionEntry {
        id: "A3",
        holds: l0_err.is_none() && l0_min >= 0.0 && l0_max.is_finite(),
        fitted_constants: constants(&[("min_l0", l0_min), ("sup_l0", l0_max), ("l1_l0", l0_integral)]),
        worst_point: None,
        note: l0_err.unwrap_or_else(|| "L(x,0) = -inf_p H(x,p) on the sample".into()),
    });

    // A4: D_pH.p - H >= c H - C
    let mut c_inf = f64::INFINITY;
    let mut c_at = None;
    for &(lhs, h, ix, ip) in &conv_a4 {
        if h > 0.0 && lhs / h < c_inf {
            c_inf = lhs / h;
            c_at = Some(WorstPoint {
                x: xs[ix].clone(),
                p: ps[ip].clone(),
            });
        }
    }
    let c_big = conv_a4
        .iter()
        .fold(0.0f64, |m, &(lhs, h, _, _)| m.max(c_inf * h - lhs));
    entries.push(AssumptionEntry {
        id: "A4",
        holds: c_inf > 0.0 && c_big.is_finite(),
        fitted_constants: constants(&[("c", c_inf), ("C", c_big)]),
        worst_point: c_at,
        note: "c = inf (D_pH.p - H)/H, C = sup (cH - D_pH.p + H)^+".into(),
    });

    entries.push(check_coupling(nl));

    // A6: |D2_xp H|^2 <= C H and |D2_pp H M|^2 <= C Tr(D2_pp H M M)
    let c_xp = dxp_ratio.or_zero();
    let c_pp = dpp_ratio.or_zero();
    entries.push(AssumptionEntry {
        id: "A6",
        holds: c_xp.is_finite() && c_pp.is_finite() && c_pp > 0.0,
        fitted_constants: constants(&[("C_xp", c_xp), ("C_pp", c_pp)]),
        worst_point: dpp_ratio.at,
        note: "suprema over the sample and 4 random symmetric M per point".into(),
    });

    // A7: |D_pH|^2 <= C + C H
    let (slope, icpt, at) = fit_affine(&dpsq, &xs, &ps);
    entries.push(AssumptionEntry {
        id: "A7",
        holds: slope.is_finite() && icpt.is_finite(),
        fitted_constants: constants(&[("C", slope.max(icpt)), ("slope", slope), ("intercept", icpt)]),
        worst_point: at,
        note: "C = max(sup |D_pH|^2/H, sup (|D_pH|^2 - slope H)^+)".into(),
    });

    // A8: |D_xH| <= C + C H
    let (slope, icpt, at) = fit_affine(&dxh, &xs, &ps);
    entries.push(AssumptionEntry {
        id: "A8",
        holds: slope.is_finite() && icpt.is_finite(),
        fitted_constants: constants(&[("C", slope.max(icpt)), ("slope", slope), ("intercept", icpt)]),
        worst_point: at,
        note: "C = max(sup |D_xH|/H, sup (|D_xH| - slope H)^+)".into(),
    });

    entries.push(check_alpha_range(inputs));

    AssumptionReport { entries }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn check_initial_data(inputs: &AssumptionInputs<'_>) -> AssumptionEntry {
    let (Some(m0), Some(u_t)) = (inputs.m0, inputs.u_t) else {
        return AssumptionEntry {
            id: "A2",
            holds: false,
            fitted_constants: BTreeMap::new(),
            worst_point: None,
            note: "m0 / u_T not supplied".into(),
        };
    };
    let g = m0.grid;
    let mass = m0.integral();
    let min = m0.min();
    let half = 0.5 * g.half_width;
    let outside = (0..g.len())
        .filter(|&i| g.point(i)[..g.d].iter().any(|c| c.abs() > half))
        .fold(0.0f64, |m, i| m.max(m0.values[i].abs()));
    let u_l1 = u_t.map(f64::abs).integral();
    let holds = min >= 0.0 && (mass - 1.0).abs() <= 1e-12 && outside == 0.0 && u_t.is_finite() && u_l1.is_finite();
    AssumptionEntry {
        id: "A2",
        holds,
        fitted_constants: constants(&[
            ("m0_mass", mass),
            ("m0_min", min),
            ("m0_max_outside_half_box", outside),
            ("u_t_l1", u_l1),
        ]),
        worst_point: None,
        note: "m0 >= 0, unit mass, supported in the inner half box; u_T finite and integrable".into(),
    }
}

fn check_coupling(nl: &Nonlinearity) -> AssumptionEntry {
    const SAMPLES: usize = 4000;
    let z_max: f64 = 1e6;
    let mut increasing = true;
    let mut c_small = 0.0f64;
    let mut c_large = 0.0f64;
    let mut prev_m = 0.0f64;
    let mut prev = nl.g(0.0);
    // m on [0, 1] linearly, then geometrically up to z_max
    for k in 1..=SAMPLES {
        let m = if k <= SAMPLES / 2 {
            k as f64 / (SAMPLES / 2) as f64
        } else {
            z_max.powf((k - SAMPLES / 2) as f64 / (SAMPLES / 2) as f64)
        };
        let g = nl.g(m);
        if m > prev_m && g <= prev {
            increasing = false;
        }
        prev_m = m;
        prev = g;
        if m <= 1.0 {
            c_small = c_small.max(g / m);
        } else {
            c_large = c_large.max(g / m.powf(nl.alpha));
        }
    }
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    for k in 0..=SAMPLES {
        let z = z_max.powf(k as f64 / SAMPLES as f64);
        let r = nl.antiderivative(z) / z.powf(nl.alpha + 1.0);
        c1 = c1.min(r);
        c2 = c2.max(r);
    }
    let holds = nl.g(0.0) == 0.0 && increasing && c_small.is_finite() && c_large.is_finite() && c1 > 0.0 && c2.is_finite();
    AssumptionEntry {
        id: "A5",
        holds,
        fitted_constants: constants(&[
            ("C", c_small.max(c_large)),
            ("C_small_m", c_small),
            ("C_large_m", c_large),
            ("C1", c1),
            ("C2", c2),
        ]),
        worst_point: None,
        note: "G sandwich sampled on z in [1, 1e6]".into(),
    }
}

fn check_alpha_range(inputs: &AssumptionInputs<'_>) -> AssumptionEntry {
    let d = inputs.exponent_dim;
    let alpha_f = exponents::to_f64(&inputs.alpha);
    match exponents::solve_sobolev_pair(d, &inputs.alpha) {
        Ok(pair) => {
            let feasible = pair.status == Status::Feasible;
            let note = if feasible && !pair.alpha_strict {
                format!("alpha = 1/(d-1) at d = {d}: admissible, strict inequality fails")
            } else if feasible {
                format!("0 < alpha < 1/(d-1) at d = {d}")
            } else {
                format!("alpha > 1/(d-1) at d = {d}")
            };
            AssumptionEntry {
                id: "A9",
                holds: feasible,
                fitted_constants: constants(&[
                    ("alpha", alpha_f),
                    ("threshold", 1.0 / (d as f64 - 1.0)),
                    ("strict", if pair.alpha_strict { 1.0 } else { 0.0 }),
                ]),
                worst_point: None,
                note,
            }
        }
        Err(e) => AssumptionEntry {
            id: "A9",
            holds: false,
            fitted_constants: constants(&[("alpha", alpha_f)]),
            worst_point: None,
            note: e.to_string(),
        },
    }
}
