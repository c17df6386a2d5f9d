//! Radial finite-volume discretization of `ℝ^N` (N = 1, 2, 3).
//!
//! The interval `[0, R]` is split into `n` cells of width `h = R/n`. Unknowns
//! sit at cell centres `r_i = (i + ½)h`; fluxes `r^{N-1} u'` live on the
//! faces `f_i = i h`. The face at the origin carries no flux (even
//! reflection), the face at `R` is Dirichlet. Quadrature weights are the
//! exact shell volumes `ω_{N-1}(f_{i+1}^N − f_i^N)/N`, so `Σ w_i = |B_R|`.
//! For `N = 1`, `ω_0 = 2` gives the symmetric full-line convention.
//!
//! With `W = diag(w)` and the stiffness matrix `K`, the discrete `−Δ` is
//! `W⁻¹K`; it is self-adjoint in the `W` inner product and
//! `⟨u, W⁻¹K u⟩_W = uᵀK u` is exactly the discrete `|∇u|₂²`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 64;

/// Surface measure of the unit sphere `S^{N-1}`.
pub fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    sphere_measure(dim) * radius.powi(dim as i32) / dim as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `ω f_i^{N-1}` for faces `i = 0..=n`.
    face_areas: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("N must be 1, 2 or 3, got {dim}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("R must be positive, got {radius}")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("need n >= {MIN_NODES}, got {n}")));
        }
        let h = radius / n as f64;
        let omega = sphere_measure(dim);
        let nodes = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let face_areas: Vec<f64> = (0..=n)
            .map(|i| omega * (i as f64 * h).powi(dim as i32 - 1))
            .collect();
        let weights = (0..n)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                omega * (b.powi(dim as i32) - a.powi(dim as i32)) / dim as f64
            })
            .collect();
        Ok(Self {
            dim,
            radius,
            h,
            nodes,
            weights,
            face_areas,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.dim, spec.radius, spec.n)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            radius: self.radius,
            n: self.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn fingerprint(&self) -> String {
        format!("N={},R={},n={}", self.dim, self.radius, self.len())
    }

    /// Stiffness matrix `K` (symmetric tridiagonal): `uᵀKu` = discrete `|∇u|₂²`.
    pub fn stiffness(&self) -> SymTridiagonal {
        let n = self.len();
        let h = self.h;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 1..n {
            let c = self.face_areas[i] / h;
            diag[i - 1] += c;
            diag[i] += c;
            off[i - 1] = -c;
        }
        // Dirichlet face at R, half a cell away from the last centre.
        diag[n - 1] += 2.0 * self.face_areas[n] / h;
        SymTridiagonal { diag, off }
    }

    fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let h = self.h;
        let mut out = vec![0.0; n];
        for i in 1..n {
            let flux = self.face_areas[i] * (u[i] - u[i - 1]) / h;
            out[i] += flux;
            out[i - 1] -= flux;
        }
        out[n - 1] += 2.0 * self.face_areas[n] * u[n - 1] / h;
        out
    }

    fn gradient_energy(&self, u: &[f64]) -> f64 {
        let n = self.len();
        let h = self.h;
        let mut acc = 0.0;
        for i in 1..n {
            let d = u[i] - u[i - 1];
            acc += self.face_areas[i] * d * d / h;
        }
        acc + 2.0 * self.face_areas[n] * u[n - 1] * u[n - 1] / h
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Thomas elimination for a positive definite system. A non-positive
    /// pivot reports [`Error::Breakdown`].
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut x = rhs.to_vec();
        let mut pivot = self.diag[0];
        if !(pivot > 0.0) {
            return Err(Error::Breakdown { row: 0, pivot });
        }
        x[0] /= pivot;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / pivot;
            pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            if !(pivot > 0.0) {
                return Err(Error::Breakdown { row: i, pivot });
            }
            x[i] = (x[i] - self.off[i - 1] * x[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }
}

/// Nodal values on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &u)| f(r, u))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mass(&self) -> f64 {
        mass(self)
    }

    /// Rescale to the prescribed mass.
    pub fn normalized_to(&self, target: f64) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::ZeroField);
        }
        Ok(self.scaled((target / m).sqrt()))
    }

    /// Cubic interpolation at radius `r`, honouring the even reflection at
    /// the origin and the odd reflection (Dirichlet) at `R`.
    pub fn sample(&self, r: f64) -> f64 {
        let r = r.abs();
        let g = &self.grid;
        let n = g.len() as isize;
        if r >= g.radius() {
            return 0.0;
        }
        let x = r / g.h() - 0.5;
        let base = x.floor() as isize - 1;
        let t = x - (base as f64 + 1.0);
        let v = |k: isize| -> f64 {
            if k < 0 {
                self.values[(-k - 1) as usize]
            } else if k < n {
                self.values[k as usize]
            } else if k < 2 * n {
                -self.values[(2 * n - k - 1) as usize]
            } else {
                0.0
            }
        };
        let (p0, p1, p2, p3) = (v(base), v(base + 1), v(base + 2), v(base + 3));
        // Lagrange basis on nodes -1, 0, 1, 2 evaluated at t ∈ [0, 1).
        let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        p0 * l0 + p1 * l1 + p2 * l2 + p3 * l3
    }

    /// Largest `|u|` over nodes with `r ≥ r_min`.
    pub fn max_abs_beyond(&self, r_min: f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .filter(|(&r, _)| r >= r_min)
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Write `r,u` CSV plus a `{N, R, n}` JSON sidecar next to it.
    pub fn write_csv(&self, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
        std::fs::write(csv_path, self.to_csv_string())?;
        let meta = serde_json::to_string_pretty(&self.grid.spec())?;
        std::fs::write(sidecar_path, meta + "\n")?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("r,u\n");
        for (r, u) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt12(*r), fmt12(*u));
        }
        out
    }

    pub fn read_csv(csv_path: &Path, sidecar_path: &Path) -> Result<Self> {
        let spec: GridSpec = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        let grid = Arc::new(RadialGrid::from_spec(spec)?);
        let mut reader = csv::Reader::from_path(csv_path)?;
        let mut values = Vec::with_capacity(grid.len());
        for rec in reader.records() {
            let rec = rec?;
            let u = rec
                .get(1)
                .ok_or_else(|| Error::Csv("missing u column".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Csv(e.to_string()))?;
            values.push(u);
        }
        Self::new(grid, values)
    }
}

/// Fixed 12-significant-digit rendering used by every CSV writer.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Discrete `−Δu`.
pub fn laplacian_apply(u: &GridFunction) -> GridFunction {
    let g = u.grid();
    let ku = g.stiffness_apply(u.values());
    let values = ku.iter().zip(g.weights()).map(|(k, w)| k / w).collect();
    GridFunction {
        grid: g.clone(),
        values,
    }
}

/// `|u|₂² = Σ w_i u_i²`.
pub fn mass(u: &GridFunction) -> f64 {
    u.values()
        .iter()
        .zip(u.grid().weights())
        .map(|(v, w)| w * v * v)
        .sum()
}

/// `|∇u|₂²` from one-sided differences across cell faces.
pub fn kinetic(u: &GridFunction) -> f64 {
    u.grid().gradient_energy(u.values())
}

/// `∫ f dx` by the grid quadrature.
pub fn integrate(f: &GridFunction) -> f64 {
    integrate_values(f.grid(), f.values()).expect("grid function matches its grid")
}

pub fn integrate_values(grid: &RadialGrid, f: &[f64]) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    Ok(f.iter().zip(grid.weights()).map(|(v, w)| v * w).sum())
}

/// Weighted inner product `Σ w_i u_i v_i`.
pub fn inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    Ok(u
        .values()
        .iter()
        .zip(v.values())
        .zip(u.grid().weights())
        .map(|((a, b), w)| a * b * w)
        .sum())
}

/// Default Gagliardo–Nirenberg constants for
/// `|u|_{2+4/N}^{2+4/N} ≤ C(N) |∇u|₂² |u|₂^{4/N}`: the sharp values
/// `(1 + 2/N)/|Q|₂^{4/N}` rounded up, `Q` the mass-critical ground state.
pub fn default_gn_constant(dim: usize) -> f64 {
    match dim {
        1 => 0.40529,
        2 => 0.17093,
        3 => 0.10441,
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub exceeds: bool,
}

/// Compare `|u|_{2+4/N}^{2+4/N}` against `C |∇u|₂² |u|₂^{4/N}`.
pub fn gn_check(u: &GridFunction, constant: f64) -> Result<GnCheck> {
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    if u.max_abs() == 0.0 {
        return Err(Error::ZeroField);
    }
    let dim = u.grid().dim() as f64;
    let q = 2.0 + 4.0 / dim;
    let lhs: f64 = u
        .values()
        .iter()
        .zip(u.grid().weights())
        .map(|(v, w)| w * v.abs().powf(q))
        .sum();
    let rhs = constant * kinetic(u) * mass(u).powf(2.0 / dim);
    let ratio = lhs / rhs;
    Ok(GnCheck {
        lhs,
        rhs,
        ratio,
        exceeds: ratio > 1.0,
    })
}
