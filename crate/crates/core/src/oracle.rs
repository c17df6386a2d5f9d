//! Reference solutions of the homogeneous problem `−ΔU + λU = |U|^{p−1}U`
//! obtained by shooting on the radial ODE, plus the exact scaling laws
//! `U_λ(r) = λ^{1/(p−1)} U(√λ r)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{sphere_measure, GridFunction, RadialGrid};
use crate::error::{Error, Result};

/// Radius where the series start takes over from the singular ODE.
const SERIES_RADIUS: f64 = 1e-3;
const ALPHA_TOL: f64 = 1e-12;
const R_LIMIT: f64 = 200.0;
/// Caps the knot spacing of the interpolated profile.
const MAX_STEP: f64 = 0.05;

/// `p̄ = 1 + 4/N`.
pub fn mass_critical_exponent(dim: usize) -> f64 {
    1.0 + 4.0 / dim as f64
}

/// Upper end of the admissible range, `2* − 1` (infinite for `N ≤ 2`).
pub fn sobolev_exponent_bound(dim: usize) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        (dim as f64 + 2.0) / (dim as f64 - 2.0)
    }
}

fn check_exponent(p: f64, dim: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::OutOfRange(format!("dimension {dim} not in 1..=3")));
    }
    if !(p > 1.0 && p < sobolev_exponent_bound(dim)) || !p.is_finite() {
        return Err(Error::Bracket(format!(
            "p = {p} outside (1, {}) for N = {dim}",
            sobolev_exponent_bound(dim)
        )));
    }
    Ok(())
}

/// Mass exponent `(4 − (p−1)N) / (2(p−1))` in `|U_λ|² = λ^e |U|²`.
pub fn mass_exponent(p: f64, dim: usize) -> f64 {
    (4.0 - (p - 1.0) * dim as f64) / (2.0 * (p - 1.0))
}

/// `γ = (2(p+1) − N(p−1)) / (4 − (p−1)N)`, the exponent in `E_a = E_1 a^γ`.
pub fn energy_exponent(p: f64, dim: usize) -> f64 {
    let n = dim as f64;
    (2.0 * (p + 1.0) - n * (p - 1.0)) / (4.0 - (p - 1.0) * n)
}

// Dormand–Prince 5(4) with FSAL for y' = f(r, y), y = (U, U').

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, PartialEq)]
enum Fate {
    /// `U` crossed zero: initial value too large.
    Overshoot,
    /// `U'` turned positive while `U > 0`: initial value too small.
    Undershoot,
}

struct Trajectory {
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    ddu: Vec<f64>,
    fate: Fate,
}

fn rhs(p: f64, n1: f64, r: f64, y: [f64; 2]) -> [f64; 2] {
    let u = y[0];
    [y[1], -n1 / r * y[1] + u - u.abs().powf(p - 1.0) * u]
}

fn shoot(alpha: f64, p: f64, dim: usize) -> Trajectory {
    let n = dim as f64;
    let n1 = n - 1.0;
    let r0 = SERIES_RADIUS;
    let curv = (alpha - alpha.powf(p)) / n;
    let mut r = r0;
    let mut y = [alpha + 0.5 * r0 * r0 * curv, r0 * curv];
    let mut out = Trajectory {
        r: vec![0.0, r],
        u: vec![alpha, y[0]],
        du: vec![0.0, y[1]],
        ddu: vec![curv, second_derivative(p, dim, r, y[0], y[1])],
        fate: Fate::Undershoot,
    };
    let (rtol, atol) = (1e-12, 1e-15);
    let mut h = 1e-3;
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(p, n1, r, y);
    while r < R_LIMIT {
        let mut stages = k;
        for s in 1..7 {
            let mut ys = y;
            for (j, a) in A[s].iter().enumerate().take(s) {
                ys[0] += h * a * stages[j][0];
                ys[1] += h * a * stages[j][1];
            }
            stages[s] = rhs(p, n1, r + C[s] * h, ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * stages[s][i];
                d4 += B4[s] * stages[s][i];
            }
            y5[i] += h * d5;
            let scale = atol + rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if err <= 1.0 || h < 1e-14 {
            r += h;
            y = y5;
            k[0] = stages[6];
            out.r.push(r);
            out.u.push(y[0]);
            out.du.push(y[1]);
            out.ddu.push(k[0][1]);
            if y[0] < 0.0 {
                out.fate = Fate::Overshoot;
                return out;
            }
            if y[1] > 0.0 {
                out.fate = Fate::Undershoot;
                return out;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(MAX_STEP);
    }
    out
}

/// `U''` from the ODE, with the `r → 0` limit `(U − |U|^{p−1}U)/N`.
fn second_derivative(p: f64, dim: usize, r: f64, u: f64, du: f64) -> f64 {
    let src = u - u.abs().powf(p - 1.0) * u;
    if r == 0.0 {
        src / dim as f64
    } else {
        -(dim as f64 - 1.0) / r * du + src
    }
}

/// Quintic Hermite interpolant through values and first and second
/// derivatives; returns `(y, y')`.
fn hermite(r: &[f64], u: &[f64], du: &[f64], ddu: &[f64], x: f64) -> (f64, f64) {
    let i = match r.partition_point(|&ri| ri <= x) {
        0 => 0,
        k if k >= r.len() => r.len() - 2,
        k => k - 1,
    };
    let h = r[i + 1] - r[i];
    let t = (x - r[i]) / h;
    let (t2, t3, t4, t5) = (t * t, t.powi(3), t.powi(4), t.powi(5));
    let b = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        0.5 * t3 - t4 + 0.5 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ];
    let db = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
    ];
    let c = [
        u[i],
        h * du[i],
        h * h * ddu[i],
        h * h * ddu[i + 1],
        h * du[i + 1],
        u[i + 1],
    ];
    let val = b.iter().zip(&c).map(|(b, c)| b * c).sum();
    let der = db.iter().zip(&c).map(|(b, c)| b * c).sum::<f64>() / h;
    (val, der)
}

/// Continuous `λ = 1` profile: Hermite data up to `r_cut`, then the linear
/// decay `A r^{-(N−1)/2} e^{-r}`.
#[derive(Debug, Clone, PartialEq)]
struct Shape {
    dim: usize,
    p: f64,
    alpha: f64,
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    ddu: Vec<f64>,
    r_cut: f64,
    tail_amp: f64,
}

impl Shape {
    fn solve(p: f64, dim: usize) -> Result<Self> {
        check_exponent(p, dim)?;
        let mut lo = 1.0;
        let mut hi = 2.0;
        let mut tries = 0;
        while shoot(hi, p, dim).fate != Fate::Overshoot {
            lo = hi;
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(Error::Bracket(format!(
                    "no overshooting initial value found for p = {p}, N = {dim}"
                )));
            }
        }
        while hi - lo > ALPHA_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match shoot(mid, p, dim).fate {
                Fate::Overshoot => hi = mid,
                Fate::Undershoot => lo = mid,
            }
        }
        let t_lo = shoot(lo, p, dim);
        let t_hi = shoot(hi, p, dim);
        if t_lo.fate != Fate::Undershoot || t_hi.fate != Fate::Overshoot {
            return Err(Error::Bracket(format!("shooting bracket collapsed for p = {p}, N = {dim}")));
        }

        let mut r = Vec::new();
        let mut u = Vec::new();
        let mut du = Vec::new();
        let mut ddu = Vec::new();
        let r_end = t_lo.r.last().copied().unwrap_or(0.0).min(*t_hi.r.last().unwrap_or(&0.0));
        for i in 0..t_lo.r.len() {
            let x = t_lo.r[i];
            if x > r_end {
                break;
            }
            let (uh, dh) = hermite(&t_hi.r, &t_hi.u, &t_hi.du, &t_hi.ddu, x);
            let um = 0.5 * (t_lo.u[i] + uh);
            if i > 4 && ((uh - t_lo.u[i]).abs() > 1e-3 * um.abs() || um <= 0.0) {
                break;
            }
            r.push(x);
            u.push(um);
            let dm = 0.5 * (t_lo.du[i] + dh);
            du.push(dm);
            ddu.push(second_derivative(p, dim, x, um, dm));
        }
        if r.len() < 4 {
            return Err(Error::Bracket(format!("separatrix not resolved for p = {p}, N = {dim}")));
        }
        let r_cut = *r.last().unwrap();
        let u_cut = *u.last().unwrap();
        let tail_amp = u_cut / Self::tail_shape(dim, r_cut);
        Ok(Self {
            dim,
            p,
            alpha: 0.5 * (lo + hi),
            r,
            u,
            du,
            ddu,
            r_cut,
            tail_amp,
        })
    }

    fn tail_shape(dim: usize, r: f64) -> f64 {
        r.powf(-(dim as f64 - 1.0) / 2.0) * (-r).exp()
    }

    /// `(U(r), U'(r))` at `λ = 1`.
    fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        if r <= self.r_cut {
            hermite(&self.r, &self.u, &self.du, &self.ddu, r)
        } else {
            let v = self.tail_amp * Self::tail_shape(self.dim, r);
            let k = -1.0 - (self.dim as f64 - 1.0) / (2.0 * r);
            (v, k * v)
        }
    }

    /// `(U_λ(r), U_λ'(r))`.
    fn eval_scaled(&self, lambda: f64, r: f64) -> (f64, f64) {
        let amp = lambda.powf(1.0 / (self.p - 1.0));
        let s = lambda.sqrt();
        let (v, d) = self.eval(s * r);
        (amp * v, amp * s * d)
    }

    /// Composite Simpson quadrature of `∫ f(U_λ, U_λ') |x|^{N−1}` over
    /// `[0, r_end/√λ]` with the sharp integrand peak resolved.
    fn quad(&self, lambda: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        let r_end = 60.0 / lambda.sqrt();
        let m = 40_000;
        let h = r_end / m as f64;
        let n1 = self.dim as i32 - 1;
        let term = |x: f64| {
            let (v, d) = self.eval_scaled(lambda, x);
            f(v, d) * x.powi(n1)
        };
        let mut acc = term(0.0) + term(r_end);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * term(i as f64 * h);
        }
        sphere_measure(self.dim) * acc * h / 3.0
    }

    fn mass(&self, lambda: f64) -> f64 {
        self.quad(lambda, |v, _| v * v)
    }

    /// `I[U_λ] = ½|∇U_λ|² − ∫|U_λ|^{p+1}/(p+1)`.
    fn energy(&self, lambda: f64) -> f64 {
        let p = self.p;
        self.quad(lambda, |v, d| 0.5 * d * d - v.abs().powf(p + 1.0) / (p + 1.0))
    }
}

/// Radial ground state of `−ΔU + λU = |U|^{p−1}U` sampled on a grid.
#[derive(Debug, Clone)]
pub struct PowerSolution {
    pub p: f64,
    pub dim: usize,
    pub lambda: f64,
    pub profile: GridFunction,
    /// `|U_λ|₂²` by quadrature of the continuous profile.
    pub mass: f64,
    /// `I[U_λ]` by quadrature of the continuous profile.
    pub energy_i: f64,
    shape: Arc<Shape>,
}

/// Sidecar view for export next to the profile CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSolutionSummary {
    pub p: f64,
    #[serde(rename = "N")]
    pub dim: usize,
    pub lambda: f64,
    pub mass: f64,
    pub energy_i: f64,
    pub u0: f64,
}

impl PowerSolution {
    fn build(shape: Arc<Shape>, lambda: f64, grid: Arc<RadialGrid>) -> Result<Self> {
        if grid.dim() != shape.dim {
            return Err(Error::InvalidGrid(format!(
                "grid has N = {}, shape has N = {}",
                grid.dim(),
                shape.dim
            )));
        }
        let peak = shape.eval_scaled(lambda, 0.0).0;
        let edge = shape.eval_scaled(lambda, 0.95 * grid.radius()).0;
        if edge > 1e-6 * peak {
            return Err(Error::SupportOverflow(format!(
                "U_λ with λ = {lambda} does not decay within R = {}",
                grid.radius()
            )));
        }
        let profile = GridFunction::from_fn(grid, |r| shape.eval_scaled(lambda, r).0);
        Ok(Self {
            p: shape.p,
            dim: shape.dim,
            lambda,
            profile,
            mass: shape.mass(lambda),
            energy_i: shape.energy(lambda),
            shape,
        })
    }

    /// `U_λ(0)`.
    pub fn u0(&self) -> f64 {
        self.shape.eval_scaled(self.lambda, 0.0).0
    }

    /// Continuous profile value `U_λ(r)`.
    pub fn value(&self, r: f64) -> f64 {
        self.shape.eval_scaled(self.lambda, r).0
    }

    pub fn summary(&self) -> PowerSolutionSummary {
        PowerSolutionSummary {
            p: self.p,
            dim: self.dim,
            lambda: self.lambda,
            mass: self.mass,
            energy_i: self.energy_i,
            u0: self.u0(),
        }
    }
}

/// Shooting solve for `U_p` (λ = 1) sampled on `grid` (`grid.dim() = N`).
#[allow(non_snake_case)]
pub fn shoot_Up(p: f64, dim: usize, grid: Arc<RadialGrid>) -> Result<PowerSolution> {
    let shape = Arc::new(Shape::solve(p, dim)?);
    PowerSolution::build(shape, 1.0, grid)
}

/// `λ^{1/(p−1)} U(√λ ·)` relative to the `λ = 1` profile, so scalings
/// compose multiplicatively.
pub fn scale_solution(sol: &PowerSolution, lambda: f64) -> Result<PowerSolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::OutOfRange(format!("lambda must be positive, got {lambda}")));
    }
    PowerSolution::build(sol.shape.clone(), sol.lambda * lambda, sol.profile.grid().clone())
}

/// `|U_p|₂²` at `λ = 1`.
pub fn base_mass(p: f64, dim: usize) -> Result<f64> {
    Ok(Shape::solve(p, dim)?.mass(1.0))
}

/// Unique `λ_a` with `|U_{λ_a}|₂² = a`.
pub fn lambda_for_mass(p: f64, dim: usize, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::OutOfRange(format!("mass must be positive, got {a}")));
    }
    check_exponent(p, dim)?;
    let e = mass_exponent(p, dim);
    if e.abs() < 1e-12 {
        return Err(Error::MassCritical { p });
    }
    Ok((a / base_mass(p, dim)?).powf(1.0 / e))
}

/// `E_a = I[U_{λ_a}]`, the homogeneous ground energy at mass `a`.
pub fn power_ground_energy(p: f64, dim: usize, a: f64) -> Result<f64> {
    let shape = Shape::solve(p, dim)?;
    let e = mass_exponent(p, dim);
    if e.abs() < 1e-12 {
        return Err(Error::MassCritical { p });
    }
    let lambda = (a / shape.mass(1.0)).powf(1.0 / e);
    Ok(shape.energy(lambda))
}

/// Measured `log(E_{a1}/E_{a2}) / log(a1/a2)` against the closed-form `γ`.
pub fn energy_scaling_check(p: f64, dim: usize, a1: f64, a2: f64) -> Result<(f64, f64)> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::OutOfRange("masses must be positive".into()));
    }
    if (a1 - a2).abs() <= 1e-12 * a1.max(a2) {
        return Err(Error::OutOfRange("energy exponent needs a1 != a2".into()));
    }
    check_exponent(p, dim)?;
    if p >= mass_critical_exponent(dim) - 1e-12 {
        return Err(Error::OutOfRange(format!(
            "p = {p} is not mass-subcritical for N = {dim}"
        )));
    }
    let shape = Shape::solve(p, dim)?;
    let e = mass_exponent(p, dim);
    let m1 = shape.mass(1.0);
    let e1 = shape.energy((a1 / m1).powf(1.0 / e));
    let e2 = shape.energy((a2 / m1).powf(1.0 / e));
    if !(e1 < 0.0 && e2 < 0.0) {
        return Err(Error::OutOfRange(format!(
            "oracle energies must be negative, got {e1} and {e2}"
        )));
    }
    Ok(((e1 / e2).ln() / (a1 / a2).ln(), energy_exponent(p, dim)))
}

/// `|Q|₂²` for the mass-critical profile `p̄ = 1 + 4/N`: the threshold mass of
/// the free critical problem.
pub fn critical_mass(dim: usize) -> Result<f64> {
    base_mass(mass_critical_exponent(dim), dim)
}

/// Sharp constant in `∫|u|^{2+4/N} ≤ C |∇u|₂² |u|₂^{4/N}`, from `Q`.
pub fn sharp_gn_constant(dim: usize) -> Result<f64> {
    let n = dim as f64;
    Ok((1.0 + 2.0 / n) / critical_mass(dim)?.powf(2.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{default_gn_constant, mass};
    use crate::domain::{Model, Nonlinearity, Potential};
    use crate::energy::{euler_lagrange_residual, identity_residuals, pohozaev_residual};
    use std::f64::consts::PI;

    fn grid(dim: usize, r: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, r, n).unwrap())
    }

    fn power_model(p: f64, dim: usize) -> Model {
        Model::new(dim, Nonlinearity::power(1.0, p - 1.0, dim).unwrap(), Potential::Zero).unwrap()
    }

    #[test]
    fn cubic_line_matches_sech() {
        let sol = shoot_Up(3.0, 1, grid(1, 30.0, 3000)).unwrap();
        assert!((sol.u0() - 2f64.sqrt()).abs() < 1e-4, "{}", sol.u0());
        assert!((sol.mass - 4.0).abs() < 1e-3);
        assert!((sol.energy_i + 2.0 / 3.0).abs() < 1e-3, "{}", sol.energy_i);
        for r in [0.5, 2.0, 5.0, 9.0, 14.0] {
            let exact = 2f64.sqrt() / f64::cosh(r);
            assert!((sol.value(r) - exact).abs() < 1e-6 * 2f64.sqrt(), "r={r}");
        }
    }

    #[test]
    fn quadratic_line_matches_sech_squared() {
        let sol = shoot_Up(2.0, 1, grid(1, 40.0, 2000)).unwrap();
        assert!((sol.u0() - 1.5).abs() < 1e-4);
        assert!((sol.mass - 6.0).abs() < 1e-3);
    }

    #[test]
    fn three_dimensional_cubic_satisfies_identities() {
        let sol = shoot_Up(3.0, 3, grid(3, 12.0, 12000)).unwrap();
        let v = sol.profile.values();
        assert!(v.iter().all(|&x| x > 0.0));
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
        let model = power_model(3.0, 3);
        assert!(pohozaev_residual(&sol.profile, &model).unwrap().abs() <= 1e-4);
        let ids = identity_residuals(&sol.profile, &model).unwrap();
        assert!((ids.lagrange_lambda - 1.0).abs() < 1e-4);
    }

    #[test]
    fn oracle_profiles_are_discrete_solutions() {
        for (p, dim) in [(3.0, 1), (2.0, 1), (3.0, 2), (2.0, 3), (3.0, 3)] {
            // the discrete residual is O(h²) with a larger constant for peaked profiles
            let n = if dim == 3 { 180_000 } else { 60_000 };
            let g = grid(dim, 30.0, n);
            let sol = shoot_Up(p, dim, g).unwrap();
            let res = euler_lagrange_residual(&sol.profile, &power_model(p, dim), 1.0).unwrap();
            assert!(res <= 1e-6, "p={p} N={dim}: {res}");
            assert!((mass(&sol.profile) - sol.mass).abs() < 1e-6 * sol.mass);
        }
    }

    #[test]
    fn scaling_laws() {
        let g = grid(1, 30.0, 3000);
        let sol = shoot_Up(3.0, 1, g.clone()).unwrap();
        let s4 = scale_solution(&sol, 4.0).unwrap();
        assert!((s4.mass - 8.0).abs() < 1e-3);
        assert!((lambda_for_mass(3.0, 1, 4.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((lambda_for_mass(3.0, 1, 8.0).unwrap() - 4.0).abs() < 1e-5);
        let id = scale_solution(&sol, 1.0).unwrap();
        assert_eq!(id.profile.values(), sol.profile.values());
        assert!(scale_solution(&sol, 1e-3).is_err());
        assert!(scale_solution(&sol, -1.0).is_err());
    }

    #[test]
    fn critical_mass_is_scale_invariant() {
        let p = mass_critical_exponent(1);
        let sol = shoot_Up(p, 1, grid(1, 40.0, 4000)).unwrap();
        for lambda in [0.5, 2.0, 5.0] {
            let s = scale_solution(&sol, lambda).unwrap();
            assert!((s.mass - sol.mass).abs() < 1e-9 * sol.mass);
        }
        // Q = 3^{1/4} sech^{1/2}(2x) has mass √3·π/2.
        assert!((sol.mass - 3f64.sqrt() * PI / 2.0).abs() < 1e-6);
        assert!(matches!(lambda_for_mass(p, 1, 1.0), Err(Error::MassCritical { .. })));
    }

    #[test]
    fn energy_exponent_matches_scaling() {
        let (measured, expected) = energy_scaling_check(3.0, 1, 1.0, 4.0).unwrap();
        assert_eq!(expected, 3.0);
        assert!((measured - expected).abs() < 1e-2);
        assert!(energy_scaling_check(3.0, 1, 2.0, 2.0).is_err());
        let e2 = power_ground_energy(3.0, 1, 2.0).unwrap();
        let e4 = power_ground_energy(3.0, 1, 4.0).unwrap();
        assert!(e4 < 2.0 * e2);
        assert!((e4 + 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn exponents_outside_the_range_fail() {
        let g = grid(3, 20.0, 500);
        assert!(matches!(shoot_Up(5.0, 3, g.clone()), Err(Error::Bracket(_))));
        assert!(matches!(shoot_Up(1.0, 3, g), Err(Error::Bracket(_))));
    }

    #[test]
    fn default_gn_constants_are_sharp() {
        for dim in 1..=3 {
            let c = sharp_gn_constant(dim).unwrap();
            let d = default_gn_constant(dim);
            assert!(d >= c && d - c < 1e-5 * c + 1e-5, "N={dim}: sharp {c}, default {d}");
        }
        assert!((sharp_gn_constant(1).unwrap() - 4.0 / (PI * PI)).abs() < 1e-6);
    }
}
