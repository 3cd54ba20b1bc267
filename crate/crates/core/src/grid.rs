//! Uniform periodic box `[-L, L)^d` standing in for the whole space.
//!
//! Fields are stored row-major (last axis fastest). All stencils are
//! periodic and second order; the centered divergence is the exact negative
//! transpose of the centered gradient under `<f, g> = h^d sum f g`, which
//! every duality check downstream relies on.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Below this many points stencils run serially.
const PAR_THRESHOLD: usize = 4096;

/// Fraction of the half-width beyond which a cell counts as the outer shell.
pub const SHELL_START: f64 = 0.9;

/// Shell mass fractions above this attach a warning to downstream reports.
pub const SHELL_MASS_WARNING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub d: usize,
    /// Box half-width `L`.
    pub half_width: f64,
    /// Points per axis.
    pub n: usize,
    /// Time horizon `T`.
    pub horizon: f64,
    pub cfl_factor: f64,
    /// Uniform time step, `T / n_steps`.
    pub dt: f64,
    pub n_steps: usize,
}

impl GridSpec {
    /// Builds the grid with the largest uniform step satisfying
    /// `dt <= cfl_factor * h^2 / (2d)`.
    pub fn new(d: usize, half_width: f64, n: usize, horizon: f64, cfl_factor: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Config(format!("N must be even and at least 4, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("L must be positive, got {half_width}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {horizon}")));
        }
        if !(cfl_factor > 0.0 && cfl_factor <= 1.0) {
            return Err(Error::Config(format!("cfl_factor must lie in (0, 1], got {cfl_factor}")));
        }
        let h = 2.0 * half_width / n as f64;
        let dt_max = cfl_factor * h * h / (2.0 * d as f64);
        let n_steps = (horizon / dt_max).ceil().max(1.0) as usize;
        Ok(Self {
            d,
            half_width,
            n,
            horizon,
            cfl_factor,
            dt: horizon / n_steps as f64,
            n_steps,
        })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.d as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    /// Coordinates of grid point `idx`; unused trailing entries are zero.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (axis, xk) in x.iter_mut().enumerate().take(self.d) {
            *xk = self.coordinate((idx / self.stride(axis)) % self.n);
        }
        x
    }

    /// Index of the periodic neighbour of `idx` shifted by `offset` along `axis`.
    pub fn shift(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let s = self.stride(axis);
        let c = (idx / s) % self.n;
        let n = self.n as isize;
        let c2 = (c as isize + offset).rem_euclid(n) as usize;
        idx - c * s + c2 * s
    }

    /// Per-axis coordinates of `idx`; unused trailing entries are zero.
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n as u32;
        let mut q = idx as u32;
        let mut c = [0usize; 3];
        for axis in (0..self.d).rev() {
            c[axis] = (q % n) as usize;
            q /= n;
        }
        c
    }

    /// Periodic `(minus, plus)` neighbours of `idx` along every axis.
    pub fn neighbours(&self, idx: usize) -> [[usize; 2]; 3] {
        let c = self.coords(idx);
        let n = self.n;
        let mut out = [[idx; 2]; 3];
        let mut s = 1;
        for axis in (0..self.d).rev() {
            let ca = c[axis];
            out[axis][0] = if ca == 0 { idx + (n - 1) * s } else { idx - s };
            out[axis][1] = if ca + 1 == n { idx - ca * s } else { idx + s };
            s *= n;
        }
        out
    }

    /// [`GridSpec::neighbours`] for every point, built once per `(d, N)`.
    pub fn neighbour_table(&self) -> Arc<Vec<[[u32; 2]; 3]>> {
        static TABLES: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<[[u32; 2]; 3]>>>>> = OnceLock::new();
        let mut cache = TABLES.get_or_init(Default::default).lock().unwrap();
        cache
            .entry((self.d, self.n))
            .or_insert_with(|| {
                Arc::new(
                    (0..self.len())
                        .map(|i| self.neighbours(i).map(|pair| pair.map(|j| j as u32)))
                        .collect(),
                )
            })
            .clone()
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Same box and horizon with a different CFL factor.
    pub fn with_cfl(&self, cfl_factor: f64) -> Result<Self> {
        Self::new(self.d, self.half_width, self.n, self.horizon, cfl_factor)
    }

    /// Short tag used to label results by resolution.
    pub fn tag(&self) -> String {
        format!("d{}-N{}-L{}-T{}-nt{}", self.d, self.n, self.half_width, self.horizon, self.n_steps)
    }
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn fill<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if len >= PAR_THRESHOLD {
        (0..len).into_par_iter().map(f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = fill(grid.len(), |i| {
            let x = grid.point(i);
            f(&x[..grid.d])
        });
        Self { grid, values }
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let values = fill(self.values.len(), |i| f(self.values[i]));
        Self { grid: self.grid, values }
    }

    /// `h^d * sum(values)`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * compensated_sum(self.values.iter().copied())
    }

    /// Discrete inner product `h^d * sum f g`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.grid.cell_volume() * compensated_sum(self.values.iter().zip(&other.values).map(|(a, b)| a * b))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `h^d * sum |f - g|`.
    pub fn l1_distance(&self, other: &ScalarField) -> f64 {
        self.grid.cell_volume() * compensated_sum(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()))
    }

    pub fn max_distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    /// Mass fraction sitting where some coordinate exceeds `0.9 L` in modulus.
    pub fn shell_mass_fraction(&self) -> f64 {
        let lim = SHELL_START * self.grid.half_width;
        let g = self.grid;
        let total = compensated_sum(self.values.iter().map(|v| v.abs()));
        if total == 0.0 {
            return 0.0;
        }
        let shell = compensated_sum(self.values.iter().enumerate().map(|(i, v)| {
            let x = g.point(i);
            if x[..g.d].iter().any(|c| c.abs() > lim) {
                v.abs()
            } else {
                0.0
            }
        }));
        shell / total
    }
}

/// One array per spatial component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            components: vec![vec![0.0; grid.len()]; grid.d],
        }
    }

    pub fn norm_sq_at(&self, i: usize) -> f64 {
        self.components.iter().map(|c| c[i] * c[i]).sum()
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).fold(0.0f64, |m, i| m.max(self.norm_sq_at(i).sqrt()))
    }

    /// Discrete inner product `h^d * sum F . G`.
    pub fn inner(&self, other: &VectorField) -> f64 {
        let g = self.grid;
        g.cell_volume()
            * compensated_sum((0..g.len()).map(|i| {
                self.components
                    .iter()
                    .zip(&other.components)
                    .map(|(a, b)| a[i] * b[i])
                    .sum::<f64>()
            }))
    }

    pub fn magnitude(&self) -> ScalarField {
        let values = fill(self.grid.len(), |i| self.norm_sq_at(i).sqrt());
        ScalarField { grid: self.grid, values }
    }
}

/// Time-indexed frames on a common grid, starting at step `start_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub grid: GridSpec,
    pub start_step: usize,
    pub frames: Vec<ScalarField>,
}

impl FieldSeries {
    pub fn new(grid: GridSpec, start_step: usize, frames: Vec<ScalarField>) -> Self {
        Self {
            grid,
            start_step,
            frames,
        }
    }

    /// Every step from `0` to `n_steps` holding the same frame.
    pub fn constant_in_time(frame: &ScalarField) -> Self {
        Self::new(frame.grid, 0, vec![frame.clone(); frame.grid.n_steps + 1])
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.grid.time(self.start_step + k)
    }

    pub fn last(&self) -> &ScalarField {
        self.frames.last().expect("series has at least one frame")
    }

    pub fn is_finite(&self) -> bool {
        self.frames.iter().all(|f| f.is_finite())
    }

    /// Trapezoidal time weights over the stored frames.
    pub fn time_weights(&self) -> Vec<f64> {
        let dt = self.grid.dt;
        let k = self.frames.len();
        match k {
            0 => Vec::new(),
            1 => vec![dt],
            _ => (0..k)
                .map(|i| if i == 0 || i == k - 1 { 0.5 * dt } else { dt })
                .collect(),
        }
    }

    /// `int int f dx dt` with trapezoidal weights in time.
    pub fn space_time_integral(&self) -> f64 {
        let w = self.time_weights();
        compensated_sum(self.frames.iter().zip(w).map(|(f, wt)| wt * f.integral()))
    }

    /// `sup_t ||f(t) - g(t)||_{L^1}`.
    pub fn sup_l1_distance(&self, other: &FieldSeries) -> f64 {
        self.frames
            .iter()
            .zip(&other.frames)
            .fold(0.0f64, |m, (a, b)| m.max(a.l1_distance(b)))
    }

    /// Pointwise `|f(t)|^q` for every frame.
    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync + Send + Copy,
    {
        Self::new(self.grid, self.start_step, self.frames.iter().map(|fr| fr.map(f)).collect())
    }
}

/// Centered gradient `(f[i+1] - f[i-1]) / 2h` on each axis.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = f.grid;
    let inv = 0.5 / g.h();
    let nb = g.neighbour_table();
    let components = (0..g.d)
        .map(|axis| {
            fill(g.len(), |i| {
                let [m, p] = nb[i][axis];
                (f.values[p as usize] - f.values[m as usize]) * inv
            })
        })
        .collect();
    VectorField { grid: g, components }
}

/// Centered divergence; the exact negative transpose of [`gradient`].
pub fn divergence(v: &VectorField) -> ScalarField {
    let g = v.grid;
    let inv = 0.5 / g.h();
    let nb = g.neighbour_table();
    let values = fill(g.len(), |i| {
        let mut acc = 0.0;
        for (c, [m, p]) in v.components.iter().zip(nb[i].iter()) {
            acc += c[*p as usize] - c[*m as usize];
        }
        acc * inv
    });
    ScalarField { grid: g, values }
}

/// Compact `2d + 1`-point Laplacian (forward difference of backward difference).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid;
    let inv = 1.0 / (g.h() * g.h());
    let nb = g.neighbour_table();
    let values = fill(g.len(), |i| {
        let mut acc = 0.0;
        let c = f.values[i];
        for [m, p] in nb[i].iter().take(g.d) {
            acc += f.values[*p as usize] - 2.0 * c + f.values[*m as usize];
        }
        acc * inv
    });
    ScalarField { grid: g, values }
}

/// Centered second differences; entry `[j][k]` holds `d_j d_k f`.
pub fn hessian(f: &ScalarField) -> Vec<Vec<Vec<f64>>> {
    let g = f.grid;
    let h = g.h();
    let v = &f.values;
    (0..g.d)
        .map(|j| {
            (0..g.d)
                .map(|k| {
                    if j == k {
                        fill(g.len(), |i| {
                            (v[g.shift(i, j, 1)] - 2.0 * v[i] + v[g.shift(i, j, -1)]) / (h * h)
                        })
                    } else {
                        fill(g.len(), |i| {
                            let pp = v[g.shift(g.shift(i, j, 1), k, 1)];
                            let pm = v[g.shift(g.shift(i, j, 1), k, -1)];
                            let mp = v[g.shift(g.shift(i, j, -1), k, 1)];
                            let mm = v[g.shift(g.shift(i, j, -1), k, -1)];
                            (pp - pm - mp + mm) / (4.0 * h * h)
                        })
                    }
                })
                .collect()
        })
        .collect()
}

/// Symmetric nonnegative stencil with unit discrete mass `h^d sum w = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    /// Largest offset along any axis, in grid points.
    pub radius: usize,
    pub offsets: Vec<[isize; 3]>,
    pub weights: Vec<f64>,
}

impl Kernel {
    /// Discrete delta: convolution with it is the identity.
    pub fn identity(grid: &GridSpec) -> Self {
        Self {
            radius: 0,
            offsets: vec![[0; 3]],
            weights: vec![1.0 / grid.cell_volume()],
        }
    }

    /// Standard bump `exp(1/((|x|/eps)^2 - 1))` on `|x| < eps`, renormalized
    /// to unit discrete mass. Radii below one cell collapse to the identity.
    pub fn mollifier(grid: &GridSpec, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("mollifier radius must be >= 0, got {eps}")));
        }
        let h = grid.h();
        let radius = (eps / h).ceil() as isize;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let span = |axis: usize| if axis < grid.d { -radius..=radius } else { 0..=0 };
        for o0 in span(0) {
            for o1 in span(1) {
                for o2 in span(2) {
                    let r2 = ((o0 * o0 + o1 * o1 + o2 * o2) as f64) * h * h / (eps * eps);
                    if r2 < 1.0 {
                        offsets.push([o0, o1, o2]);
                        weights.push((1.0 / (r2 - 1.0)).exp());
                    }
                }
            }
        }
        if offsets.is_empty() {
            return Ok(Self::identity(grid));
        }
        let mass = grid.cell_volume() * compensated_sum(weights.iter().copied());
        for w in &mut weights {
            *w /= mass;
        }
        let radius = offsets
            .iter()
            .flat_map(|o| o.iter().map(|c| c.unsigned_abs()))
            .max()
            .unwrap_or(0);
        Ok(Self {
            radius,
            offsets,
            weights,
        })
    }

    pub fn mass(&self, grid: &GridSpec) -> f64 {
        grid.cell_volume() * compensated_sum(self.weights.iter().copied())
    }
}

/// Periodic discrete convolution `(f * k)_i = h^d sum_j k_j f_{i - j}`.
pub fn convolve(f: &ScalarField, k: &Kernel) -> Result<ScalarField> {
    let g = f.grid;
    if 2 * k.radius >= g.n {
        return Err(Error::Config(format!(
            "kernel radius {} needs fewer than N/2 = {} points",
            k.radius,
            g.n / 2
        )));
    }
    let vol = g.cell_volume();
    if k.radius == 0 {
        let w = vol * k.weights[0];
        return Ok(f.map(|v| w * v));
    }
    let n = g.n as isize;
    let strides: Vec<usize> = (0..g.d).map(|a| g.stride(a)).collect();
    let values = fill(g.len(), |i| {
        let c = g.coords(i);
        let mut acc = 0.0;
        for (o, w) in k.offsets.iter().zip(&k.weights) {
            let mut j = 0;
            for axis in 0..g.d {
                let mut v = c[axis] as isize - o[axis];
                if v < 0 {
                    v += n;
                } else if v >= n {
                    v -= n;
                }
                j += v as usize * strides[axis];
            }
            acc += w * f.values[j];
        }
        vol * acc
    });
    Ok(ScalarField { grid: g, values })
}

/// Periodized 1-D heat kernel at offsets `0..n` (offset `o` and `o - n`
/// coincide), renormalized so that `h * sum = 1`.
fn heat_kernel_1d(grid: &GridSpec, t: f64) -> Vec<f64> {
    let n = grid.n as isize;
    let h = grid.h();
    let period = 2.0 * grid.half_width;
    let spread = (4.0 * t).sqrt();
    let images = (8.0 * spread / period).ceil() as isize + 1;
    let mut w: Vec<f64> = (0..n)
        .map(|o| {
            let o = if o >= n / 2 { o - n } else { o };
            let x = o as f64 * h;
            (-images..=images)
                .map(|k| {
                    let y = x + k as f64 * period;
                    (-(y * y) / (4.0 * t)).exp()
                })
                .sum::<f64>()
                / (4.0 * std::f64::consts::PI * t).sqrt()
        })
        .collect();
    let mass = h * compensated_sum(w.iter().copied());
    for v in &mut w {
        *v /= mass;
    }
    w
}

/// Periodic heat flow of `f0` at time `t`: separable convolution with the
/// periodized Gaussian `(4 pi t)^{-d/2} exp(-|x|^2 / 4t)`, renormalized to
/// unit discrete mass.
pub fn heat_solve(f0: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("heat flow time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f0.clone());
    }
    let g = f0.grid;
    let kernel = heat_kernel_1d(&g, t);
    let h = g.h();
    let mut cur = f0.values.clone();
    for axis in 0..g.d {
        let src = cur;
        cur = fill(g.len(), |i| {
            let acc = compensated_sum(
                kernel
                    .iter()
                    .enumerate()
                    .map(|(o, w)| w * src[g.shift(i, axis, -(o as isize))]),
            );
            h * acc
        });
    }
    Ok(ScalarField { grid: g, values: cur })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(Error::Domain(format!("Lebesgue exponent must be >= 1, got {p}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Full,
    /// Cells whose center satisfies `|x| <= R`.
    Ball(f64),
}

/// `(h^d sum_{x in region} |f|^p)^{1/p}`, or the max over the region for `p = inf`.
pub fn lp_norm(f: &ScalarField, p: Exponent, region: Region) -> Result<f64> {
    let g = f.grid;
    let inside: Box<dyn Fn(usize) -> bool + Sync> = match region {
        Region::Full => Box::new(|_| true),
        Region::Ball(r) => {
            if r > g.half_width {
                return Err(Error::Config(format!(
                    "ball radius {r} exceeds box half-width {}",
                    g.half_width
                )));
            }
            Box::new(move |i| {
                let x = g.point(i);
                x[..g.d].iter().map(|c| c * c).sum::<f64>() <= r * r
            })
        }
    };
    let peak = (0..g.len())
        .filter(|&i| inside(i))
        .fold(0.0f64, |m, i| m.max(f.values[i].abs()));
    match p {
        Exponent::Infinity => Ok(peak),
        Exponent::Finite(p) => {
            if peak == 0.0 {
                return Ok(0.0);
            }
            // scale by the peak so large p cannot overflow
            let s = compensated_sum(
                (0..g.len())
                    .filter(|&i| inside(i))
                    .map(|i| (f.values[i].abs() / peak).powf(p)),
            );
            Ok(peak * (g.cell_volume() * s).powf(1.0 / p))
        }
    }
}

/// Bochner norm `L^c(t0, T; L^a)`: trapezoidal in time over the stored frames.
pub fn mixed_norm(s: &FieldSeries, c: Exponent, a: Exponent) -> Result<f64> {
    let norms = s
        .frames
        .iter()
        .map(|f| lp_norm(f, a, Region::Full))
        .collect::<Result<Vec<f64>>>()?;
    match c {
        Exponent::Infinity => Ok(norms.iter().copied().fold(0.0, f64::max)),
        Exponent::Finite(c) => {
            let peak = norms.iter().copied().fold(0.0, f64::max);
            if peak == 0.0 {
                return Ok(0.0);
            }
            let w = s.time_weights();
            let acc = compensated_sum(norms.iter().zip(w).map(|(n, wt)| wt * (n / peak).powf(c)));
            Ok(peak * acc.powf(1.0 / c))
        }
    }
}

/// Unnormalized bump `exp(1/((|x-c|/r)^2 - 1))` on `|x - c| < r`.
pub fn bump(grid: GridSpec, center: &[f64], radius: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        let r2 = x
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (radius * radius);
        if r2 < 1.0 {
            (1.0 / (r2 - 1.0)).exp()
        } else {
            0.0
        }
    })
}

/// `amplitude * exp(-|x - c|^2 / width^2)`.
pub fn gaussian(grid: GridSpec, center: &[f64], amplitude: f64, width: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        let r2 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        amplitude * (-r2 / (width * width)).exp()
    })
}
