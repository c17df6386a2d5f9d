//! Energy functionals and the identities satisfied by constrained critical
//! points: `J`, `I`, the Euler–Lagrange residual, the Lagrange multiplier,
//! the Nehari and Pohozaev identities, the mass-preserving fiber map
//! `u_t = t^{N/2} u(t·)` and the mass-multiplying dilation `u(τ^{-1/N}·)`.

use serde::{Deserialize, Serialize};

use crate::discretization::{kinetic, laplacian_apply, mass, GridFunction};
use crate::domain::Model;
use crate::error::{Error, Result};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `½|∇u|₂²`
    pub kinetic: f64,
    /// `½∫V u²`
    pub potential_term: f64,
    /// `∫G(u)`
    pub nonlinear_term: f64,
    pub J: f64,
    pub I: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub nehari: f64,
    pub pohozaev: f64,
    #[serde(rename = "lambda")]
    pub lagrange_lambda: f64,
}

fn check_field(u: &GridFunction, model: &Model) -> Result<()> {
    if model.dim != u.grid().dim() {
        return Err(Error::InvalidModel(format!(
            "model has N = {}, grid has N = {}",
            model.dim,
            u.grid().dim()
        )));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn weighted_sum(u: &GridFunction, f: impl Fn(f64, f64) -> f64) -> f64 {
    let g = u.grid();
    g.nodes()
        .iter()
        .zip(u.values())
        .zip(g.weights())
        .map(|((&r, &v), &w)| w * f(r, v))
        .sum()
}

pub fn evaluate(u: &GridFunction, model: &Model) -> Result<EnergyReport> {
    check_field(u, model)?;
    let kin = 0.5 * kinetic(u);
    let potential_term = 0.5 * weighted_sum(u, |r, v| model.potential.value(r) * v * v);
    let nonlinear_term = weighted_sum(u, |_, v| model.nonlinearity.G(v));
    let i = kin - nonlinear_term;
    Ok(EnergyReport {
        kinetic: kin,
        potential_term,
        nonlinear_term,
        J: i + potential_term,
        I: i,
        mass: mass(u),
    })
}

/// Node-wise `−Δu + (V + λ)u − g(u)`.
pub fn euler_lagrange_vector(u: &GridFunction, model: &Model, lambda: f64) -> Result<GridFunction> {
    check_field(u, model)?;
    let lu = laplacian_apply(u);
    let nodes = u.grid().nodes();
    let values = lu
        .values()
        .iter()
        .zip(u.values())
        .zip(nodes)
        .map(|((l, &v), &r)| l + (model.potential.value(r) + lambda) * v - model.nonlinearity.g(v))
        .collect();
    u.with_values(values)
}

/// `‖−Δu + (V+λ)u − g(u)‖₂ / ‖u‖₂`.
pub fn euler_lagrange_residual(u: &GridFunction, model: &Model, lambda: f64) -> Result<f64> {
    let m = mass(u);
    if !(m > 0.0) {
        return Err(Error::ZeroField);
    }
    let res = euler_lagrange_vector(u, model, lambda)?;
    Ok((mass(&res) / m).sqrt())
}

/// `λ = (∫g(u)u − |∇u|₂² − ∫V u²) / |u|₂²`, the multiplier that makes the
/// Nehari identity hold.
pub fn lagrange_multiplier(u: &GridFunction, model: &Model) -> Result<f64> {
    check_field(u, model)?;
    let m = mass(u);
    if !(m > 0.0) {
        return Err(Error::ZeroField);
    }
    let gu = weighted_sum(u, |_, v| model.nonlinearity.g(v) * v);
    let vu = weighted_sum(u, |r, v| model.potential.value(r) * v * v);
    Ok((gu - kinetic(u) - vu) / m)
}

/// `|∇u|₂² + ∫(V+λ)u² − ∫g(u)u`.
pub fn nehari_residual(u: &GridFunction, model: &Model, lambda: f64) -> Result<f64> {
    check_field(u, model)?;
    let rest = weighted_sum(u, |r, v| {
        (model.potential.value(r) + lambda) * v * v - model.nonlinearity.g(v) * v
    });
    Ok(kinetic(u) + rest)
}

/// λ-free identity `|∇u|₂² − ½∫⟨∇V,x⟩u² + N∫[G(u) − ½g(u)u]`, zero on
/// solutions.
pub fn pohozaev_residual(u: &GridFunction, model: &Model) -> Result<f64> {
    check_field(u, model)?;
    let dim = model.dim as f64;
    let rest = weighted_sum(u, |r, v| {
        let g = &model.nonlinearity;
        -0.5 * model.potential.dv_dot_x(r) * v * v + dim * (g.G(v) - 0.5 * g.g(v) * v)
    });
    Ok(kinetic(u) + rest)
}

/// Pohozaev tolerance for `model`: tabulated potentials carry a 10× widening
/// because `⟨∇V, x⟩` comes from one-sided differences.
pub fn pohozaev_tolerance(model: &Model, base: f64) -> f64 {
    if model.potential.is_tabulated() {
        10.0 * base
    } else {
        base
    }
}

pub fn identity_residuals(u: &GridFunction, model: &Model) -> Result<IdentityResiduals> {
    let lambda = lagrange_multiplier(u, model)?;
    Ok(IdentityResiduals {
        nehari: nehari_residual(u, model, lambda)?,
        pohozaev: pohozaev_residual(u, model)?,
        lagrange_lambda: lambda,
    })
}

/// Search configuration for the fiber map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub bracket_points: usize,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-2,
            t_max: 1e2,
            bracket_points: 41,
        }
    }
}

fn check_t(t: f64, cfg: &FiberConfig) -> Result<()> {
    if !(t >= cfg.t_min && t <= cfg.t_max) {
        return Err(Error::OutOfRange(format!(
            "t = {t} outside [{}, {}]",
            cfg.t_min, cfg.t_max
        )));
    }
    Ok(())
}

/// `J[u_t] = ½t²|∇u|₂² + ½∫V(x/t)u² − t^{-N}∫G(t^{N/2}u)`, evaluated on the
/// grid of `u` (no resampling).
pub fn fiber_energy(u: &GridFunction, t: f64, model: &Model) -> Result<f64> {
    fiber_energy_with(u, t, model, &FiberConfig::default())
}

pub fn fiber_energy_with(u: &GridFunction, t: f64, model: &Model, cfg: &FiberConfig) -> Result<f64> {
    check_t(t, cfg)?;
    check_field(u, model)?;
    Ok(fiber_energy_unchecked(u, t, model, kinetic(u)))
}

fn fiber_energy_unchecked(u: &GridFunction, t: f64, model: &Model, grad2: f64) -> f64 {
    let dim = model.dim as f64;
    let amp = t.powf(dim / 2.0);
    let scale = t.powf(-dim);
    let rest = weighted_sum(u, |r, v| {
        0.5 * model.potential.value(r / t) * v * v - scale * model.nonlinearity.G(amp * v)
    });
    0.5 * t * t * grad2 + rest
}

/// `d/dt J[u_t]`; equals `P(u_t)/t` with `P` the Pohozaev functional.
pub fn fiber_energy_derivative(u: &GridFunction, t: f64, model: &Model) -> Result<f64> {
    check_field(u, model)?;
    Ok(fiber_derivative_unchecked(u, t, model, kinetic(u)))
}

fn fiber_derivative_unchecked(u: &GridFunction, t: f64, model: &Model, grad2: f64) -> f64 {
    let dim = model.dim as f64;
    let amp = t.powf(dim / 2.0);
    let scale = t.powf(-dim);
    let g = &model.nonlinearity;
    let rest = weighted_sum(u, |r, v| {
        let s = amp * v;
        -0.5 / t * model.potential.dv_dot_x(r / t) * v * v
            + dim / t * scale * (g.G(s) - 0.5 * g.g(s) * s)
    });
    t * grad2 + rest
}

/// Resampled `u_t(r) = t^{N/2} u(t r)` with its mass restored to `|u|₂²`.
pub fn fiber_map(u: &GridFunction, t: f64) -> Result<GridFunction> {
    fiber_map_with(u, t, &FiberConfig::default())
}

pub fn fiber_map_with(u: &GridFunction, t: f64, cfg: &FiberConfig) -> Result<GridFunction> {
    check_t(t, cfg)?;
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let target = mass(u);
    if !(target > 0.0) {
        return Err(Error::ZeroField);
    }
    let dim = u.grid().dim() as f64;
    let amp = t.powf(dim / 2.0);
    let ut = GridFunction::from_fn(u.grid().clone(), |r| amp * u.sample(t * r));
    // edge values perturb mass and energy only at second order
    let edge = ut.max_abs_beyond(0.95 * u.grid().radius());
    if edge > 1e-4 * ut.max_abs() {
        return Err(Error::SupportOverflow(format!(
            "u_t with t = {t} does not vanish near R (edge/max = {:.2e})",
            edge / ut.max_abs()
        )));
    }
    ut.normalized_to(target)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberMinimum {
    pub t0: f64,
    pub energy: f64,
    /// `d/dt J[u_t]` at `t0`.
    pub derivative: f64,
}

/// Local minimizer of `t ↦ J[u_t]`: coarse scan on a log grid, golden
/// section on the bracketing cell, then bisection on the analytic
/// derivative.
pub fn fiber_minimize(u: &GridFunction, model: &Model) -> Result<FiberMinimum> {
    fiber_minimize_with(u, model, &FiberConfig::default())
}

pub fn fiber_minimize_with(u: &GridFunction, model: &Model, cfg: &FiberConfig) -> Result<FiberMinimum> {
    check_field(u, model)?;
    if !(mass(u) > 0.0) {
        return Err(Error::ZeroField);
    }
    let grad2 = kinetic(u);
    let f = |t: f64| fiber_energy_unchecked(u, t, model, grad2);
    let df = |t: f64| fiber_derivative_unchecked(u, t, model, grad2);

    let m = cfg.bracket_points.max(3);
    let (lo, hi) = (cfg.t_min.ln(), cfg.t_max.ln());
    let ts: Vec<f64> = (0..m)
        .map(|k| (lo + (hi - lo) * k as f64 / (m - 1) as f64).exp())
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut best = 0;
    for k in 1..m {
        // strict comparison breaks ties toward smaller t
        if vals[k] < vals[best] {
            best = k;
        }
    }
    if best == 0 || best == m - 1 {
        return Err(Error::NoInteriorMinimum {
            t_min: cfg.t_min,
            t_max: cfg.t_max,
        });
    }

    // Golden section in log t.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (ts[best - 1].ln(), ts[best + 1].ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    while b - a > 1e-12 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp());
        }
    }
    let mut t0 = (0.5 * (a + b)).exp();

    // Polish on the derivative when a sign change is within reach.
    let mut step = 1e-6;
    for _ in 0..30 {
        let (l, r) = (t0 * (1.0 - step), t0 * (1.0 + step));
        let (dl, dr) = (df(l), df(r));
        if dl <= 0.0 && dr >= 0.0 {
            let (mut l, mut r) = (l, r);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                if df(mid) < 0.0 {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            let cand = 0.5 * (l + r);
            if f(cand) <= f(t0) + 1e-14 * f(t0).abs().max(1.0) {
                t0 = cand;
            }
            break;
        }
        step *= 2.0;
        if step > 0.1 {
            break;
        }
    }
    Ok(FiberMinimum {
        t0,
        energy: f(t0),
        derivative: df(t0),
    })
}

/// `ũ(τ, r) = u(τ^{-1/N} r)` for `τ ≥ 1`, renormalized to mass `τ|u|₂²`.
pub fn dilate(u: &GridFunction, tau: f64) -> Result<GridFunction> {
    if !(tau >= 1.0) || !tau.is_finite() {
        return Err(Error::OutOfRange(format!("dilation requires tau >= 1, got {tau}")));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let m = mass(u);
    if !(m > 0.0) {
        return Err(Error::ZeroField);
    }
    let dim = u.grid().dim() as f64;
    let shrink = tau.powf(-1.0 / dim);
    let limit = u.grid().radius() * shrink;
    if u.max_abs_beyond(limit) > 1e-8 * u.max_abs() {
        return Err(Error::SupportOverflow(format!(
            "u must vanish beyond R/tau^(1/N) = {limit:.4} to be dilated by {tau}"
        )));
    }
    let out = GridFunction::from_fn(u.grid().clone(), |r| u.sample(shrink * r));
    out.normalized_to(tau * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::RadialGrid;
    use crate::domain::{Nonlinearity, Potential};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid1(r: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(1, r, n).unwrap())
    }

    fn unit_gaussian(g: &Arc<RadialGrid>) -> GridFunction {
        GridFunction::from_fn(g.clone(), |r| PI.powf(-0.25) * (-r * r / 2.0).exp())
    }

    fn sech_solution(g: &Arc<RadialGrid>) -> GridFunction {
        GridFunction::from_fn(g.clone(), |r| 2f64.sqrt() / r.cosh())
    }

    fn cubic_free() -> Model {
        Model::new(1, Nonlinearity::power(1.0, 2.0, 1).unwrap(), Potential::Zero).unwrap()
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = grid1(10.0, 256);
        let r = evaluate(&GridFunction::zeros(g), &cubic_free()).unwrap();
        assert_eq!((r.kinetic, r.potential_term, r.nonlinear_term, r.J, r.I, r.mass), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn gaussian_energies() {
        let g = grid1(12.0, 2048);
        let u = unit_gaussian(&g);
        let free = Model::new(1, Nonlinearity::zero(1), Potential::Zero).unwrap();
        let r = evaluate(&u, &free).unwrap();
        assert!((r.J - 0.25).abs() < 1e-4 && (r.I - 0.25).abs() < 1e-4);
        let harm = Model::new(1, Nonlinearity::zero(1), Potential::Harmonic { k: 1.0 }).unwrap();
        let r = evaluate(&u, &harm).unwrap();
        assert!((r.potential_term - 0.25).abs() < 1e-4);
        assert!((r.J - 0.5).abs() < 1e-4);
        assert_eq!(r.J, r.I + r.potential_term);
    }

    #[test]
    fn nan_fields_are_rejected() {
        let g = grid1(10.0, 128);
        let mut v = vec![0.0; 128];
        v[3] = f64::NAN;
        let u = GridFunction::new(g, v).unwrap();
        assert!(matches!(evaluate(&u, &cubic_free()), Err(Error::NonFinite)));
    }

    #[test]
    fn sech_is_an_exact_solution() {
        let g = grid1(20.0, 4000);
        let u = sech_solution(&g);
        let model = cubic_free();
        assert!(euler_lagrange_residual(&u, &model, 1.0).unwrap() <= 1e-3);
        let lam = lagrange_multiplier(&u, &model).unwrap();
        assert!((lam - 1.0).abs() < 1e-3, "{lam}");
        assert!(pohozaev_residual(&u, &model).unwrap().abs() <= 1e-3);
    }

    #[test]
    fn shifted_multiplier_adds_the_mass_gap() {
        let g = grid1(20.0, 2000);
        let u = sech_solution(&g);
        let model = cubic_free();
        let r0 = euler_lagrange_residual(&u, &model, 1.0).unwrap();
        let r1 = euler_lagrange_residual(&u, &model, 2.0).unwrap();
        // residual vector picks up +u, whose normalized norm is 1
        assert!(r1 >= 1.0 - r0);
    }

    #[test]
    fn harmonic_ground_state_eigenpair() {
        let g = grid1(12.0, 2400);
        let u = GridFunction::from_fn(g.clone(), |r| (-r * r / 2.0).exp());
        let model = Model::new(1, Nonlinearity::zero(1), Potential::Harmonic { k: 1.0 }).unwrap();
        assert!(euler_lagrange_residual(&u, &model, -1.0).unwrap() <= 1e-3);
        let lam = lagrange_multiplier(&u, &model).unwrap();
        assert!((lam + 1.0).abs() < 1e-3);
        let lam3 = lagrange_multiplier(&u.scaled(3.0), &model).unwrap();
        assert!((lam - lam3).abs() < 1e-12);
    }

    #[test]
    fn pohozaev_of_generic_gaussian_is_nonzero() {
        let g = grid1(20.0, 2000);
        let u = unit_gaussian(&g).scaled(2.0);
        assert!(pohozaev_residual(&u, &cubic_free()).unwrap().abs() > 1e-2);
        let free = Model::new(1, Nonlinearity::zero(1), Potential::Zero).unwrap();
        let p = pohozaev_residual(&u, &free).unwrap();
        assert!((p - kinetic(&u)).abs() < 1e-14);
    }

    #[test]
    fn multiplier_minimizes_the_residual() {
        let g = grid1(20.0, 1000);
        let u = unit_gaussian(&g).scaled(1.5);
        let model = Model::new(1, Nonlinearity::power(1.0, 2.0, 1).unwrap(), Potential::GaussianWell { depth: 1.0, width: 1.0 }).unwrap();
        let lam = lagrange_multiplier(&u, &model).unwrap();
        let r = euler_lagrange_residual(&u, &model, lam).unwrap();
        for d in [1e-3, 1e-2, 0.1] {
            assert!(euler_lagrange_residual(&u, &model, lam + d).unwrap() > r);
            assert!(euler_lagrange_residual(&u, &model, lam - d).unwrap() > r);
        }
        assert!(nehari_residual(&u, &model, lam).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fiber_energy_limits() {
        let g = grid1(20.0, 2000);
        let u = unit_gaussian(&g);
        let well = Model::new(1, Nonlinearity::power(1.0, 2.0, 1).unwrap(), Potential::GaussianWell { depth: 1.0, width: 1.0 }).unwrap();
        let j = evaluate(&u, &well).unwrap().J;
        assert!((fiber_energy(&u, 1.0, &well).unwrap() - j).abs() < 1e-13);
        assert!(fiber_energy(&u, 1e-2, &well).unwrap().abs() <= 1e-2);
        assert!(fiber_energy(&u, 8.0, &well).unwrap() > j);
        assert!(fiber_energy(&u, 1e3, &well).is_err());
    }

    #[test]
    fn fiber_derivative_matches_finite_difference_and_pohozaev() {
        let g = grid1(20.0, 2000);
        let u = unit_gaussian(&g).scaled(2.0);
        let model = Model::new(1, Nonlinearity::power(1.0, 2.0, 1).unwrap(), Potential::GaussianWell { depth: 1.0, width: 1.0 }).unwrap();
        for t in [0.5, 1.0, 1.7] {
            let d = 1e-5;
            let fd = (fiber_energy(&u, t + d, &model).unwrap() - fiber_energy(&u, t - d, &model).unwrap()) / (2.0 * d);
            let an = fiber_energy_derivative(&u, t, &model).unwrap();
            assert!((fd - an).abs() < 1e-6, "t = {t}: {fd} vs {an}");
        }
        let p = pohozaev_residual(&u, &model).unwrap();
        assert!((p - fiber_energy_derivative(&u, 1.0, &model).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fiber_minimum_lowers_energy_and_lands_on_pohozaev_set() {
        let g = grid1(20.0, 2000);
        let u = unit_gaussian(&g).scaled(2.0); // mass 4
        let model = cubic_free();
        let j = evaluate(&u, &model).unwrap().J;
        let fm = fiber_minimize(&u, &model).unwrap();
        assert!(fm.energy <= j);
        assert!(fm.derivative.abs() <= 1e-6);
        let ut = fiber_map(&u, fm.t0).unwrap();
        assert!(pohozaev_residual(&ut, &model).unwrap().abs() < 1e-3);
        // u_t0 is already stationary along its own fiber
        let again = fiber_minimize(&ut, &model).unwrap();
        assert!((again.t0 - 1.0).abs() < 1e-3, "{}", again.t0);
    }

    #[test]
    fn fiber_minimizer_transforms_under_the_fiber_map() {
        let g = grid1(20.0, 2000);
        let u = unit_gaussian(&g).scaled(2.0);
        let model = cubic_free();
        let t0 = fiber_minimize(&u, &model).unwrap().t0;
        let u2 = fiber_map(&u, 2.0).unwrap();
        let t1 = fiber_minimize(&u2, &model).unwrap().t0;
        assert!((t1 - t0 / 2.0).abs() < 1e-3 * t0, "{t1} vs {}", t0 / 2.0);
    }

    #[test]
    fn no_interior_minimum_is_reported() {
        let g = grid1(20.0, 1000);
        let u = unit_gaussian(&g);
        // g = 0, V = 0: J[u_t] = t²|∇u|²/2 decreases toward t → 0.
        let free = Model::new(1, Nonlinearity::zero(1), Potential::Zero).unwrap();
        assert!(matches!(fiber_minimize(&u, &free), Err(Error::NoInteriorMinimum { .. })));
    }

    #[test]
    fn fiber_map_preserves_mass_exactly() {
        let g = grid1(20.0, 2000);
        let u = unit_gaussian(&g).scaled(1.3);
        for t in [0.7, 1.0, 2.5] {
            let ut = fiber_map(&u, t).unwrap();
            assert!((mass(&ut) - mass(&u)).abs() < 1e-12 * mass(&u));
        }
        assert!(matches!(fiber_map(&u, 0.05), Err(Error::SupportOverflow(_))));
    }

    #[test]
    fn dilation_scales_mass_and_kinetic() {
        for dim in 1..=3 {
            let g = Arc::new(RadialGrid::new(dim, 40.0, 4000).unwrap());
            let u = GridFunction::from_fn(g.clone(), |r| (-r * r / 2.0).exp()).normalized_to(1.0).unwrap();
            assert_eq!(dilate(&u, 1.0).unwrap().values().len(), u.values().len());
            for tau in [2.0, 4.0] {
                let d = dilate(&u, tau).unwrap();
                assert!((mass(&d) - tau).abs() < 1e-6 * tau);
                let expect = tau.powf((dim as f64 - 2.0) / dim as f64) * kinetic(&u);
                assert!((kinetic(&d) - expect).abs() < 1e-4 * expect, "N={dim} tau={tau}");
            }
        }
    }

    #[test]
    fn dilation_rejects_overflow_and_contraction() {
        let g = grid1(10.0, 500);
        let u = GridFunction::from_fn(g.clone(), |r| (-r * r / 8.0).exp());
        assert!(matches!(dilate(&u, 4.0), Err(Error::SupportOverflow(_))));
        assert!(dilate(&u, 0.5).is_err());
    }

    #[test]
    fn potential_bound_holds() {
        let g = grid1(20.0, 800);
        let u = unit_gaussian(&g).scaled(1.2);
        let model = Model::new(1, Nonlinearity::power(1.0, 2.0, 1).unwrap(), Potential::GaussianWell { depth: 2.0, width: 1.0 }).unwrap();
        let r = evaluate(&u, &model).unwrap();
        assert!(r.J >= r.I + model.potential.c_ell() * r.mass / 2.0);
    }
}
