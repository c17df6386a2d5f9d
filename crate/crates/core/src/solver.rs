//! Minimization of `J` on the mass sphere `S_a` by a normalized gradient
//! flow.
//!
//! One step from `u` (mass `a`) with `λ = λ(u)` the Lagrange multiplier and
//! `σ = max(0, −(c_ℓ + λ))` solves
//!
//! ```text
//! (I + dt(−Δ + V + λ + σ)) u⁺ = u + dt(g(u) + σu)
//! ```
//!
//! and rescales `u⁺` to mass `a`. Equivalently `u⁺ ∝ u − dt P⁻¹ r(u)` with
//! `r(u) = −Δu + (V + λ)u − g(u)` and `P` the implicit operator, so fixed
//! points are exactly the discrete Euler–Lagrange solutions. The operator is
//! a Stieltjes matrix (positive definite, non-positive off-diagonal), so
//! positive iterates stay positive when `g ≥ 0` on `[0, ∞)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::vanishing_diagnostic;
use crate::discretization::{RadialGrid, SymTridiagonal, GridFunction};
use crate::domain::{Model, SmallSRegime};
use crate::energy::{identity_residuals, IdentityResiduals};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub tol_grad: f64,
    pub tol_energy: f64,
    pub max_iters: usize,
    pub starts: usize,
    pub seed: u64,
    pub initial_width_scale: f64,
    /// Consecutive sub-`tol_energy` steps that count as a stall.
    pub stall_window: usize,
    /// Record every `trace_stride`-th energy (the first and last always).
    pub trace_stride: usize,
    /// Stop as soon as `J` drops below this value.
    pub target_energy: Option<f64>,
    /// `|J − ½V_∞a|` below this counts as the zero-energy plateau.
    pub plateau_tol: f64,
    /// Local-mass fraction below which a finite-`V_∞` result is suspected
    /// of vanishing.
    pub vanishing_delta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            tol_grad: 1e-8,
            tol_energy: 1e-12,
            max_iters: 200_000,
            starts: 3,
            seed: 0,
            initial_width_scale: 1.0,
            stall_window: 500,
            trace_stride: 10,
            target_energy: None,
            plateau_tol: 1e-6,
            vanishing_delta: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::OutOfRange(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.tol_grad > 0.0 && self.tol_energy > 0.0 && self.plateau_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.starts < 1 {
            return bad("starts must be at least 1");
        }
        if !(self.initial_width_scale > 0.0 && self.initial_width_scale.is_finite()) {
            return bad("initial_width_scale must be positive");
        }
        if self.max_iters == 0 || self.stall_window == 0 || self.trace_stride == 0 {
            return bad("max_iters, stall_window and trace_stride must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    /// Energy stalled without the residual reaching `tol_grad`.
    Stalled,
    MaxIters,
    /// `J` rose after the transient; the run was aborted.
    EnergyIncrease,
    /// `J` dropped below `target_energy`.
    TargetReached,
    /// Zero-energy plateau in the finite-limsup regime: `C_a = 0`, not attained.
    NoMinimizerRegime,
    VanishingSuspected,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::NoMinimizerRegime => 2,
            Outcome::VanishingSuspected => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub index: usize,
    /// Initial Gaussian width; `None` for user-supplied starts.
    pub width: Option<f64>,
    #[serde(rename = "J")]
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub u: GridFunction,
    pub a: f64,
    pub lambda: f64,
    /// `λ + V_∞` (equal to `λ` for coercive `V`).
    pub lambda_normalized: f64,
    /// `J[u]`.
    pub c_a_estimate: f64,
    /// `J[u] − ½V_∞a` (equal to `J[u]` for coercive `V`).
    pub c_a_normalized: f64,
    pub residuals: IdentityResiduals,
    /// Euler–Lagrange residual of the returned state.
    pub residual: f64,
    pub energy_trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub outcome: Outcome,
    pub start_index: usize,
    pub iterations: usize,
    pub vanishing: f64,
    pub starts: Vec<StartSummary>,
    /// `max J − min J` over converged starts.
    pub multistart_spread: f64,
    pub warnings: Vec<String>,
}

/// JSON view of [`GroundStateResult`]; the profile goes to CSV.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub a: f64,
    pub lambda: f64,
    pub lambda_normalized: f64,
    pub C_a_estimate: f64,
    pub C_a_normalized: f64,
    pub residuals: IdentityResiduals,
    pub residual: f64,
    pub converged: bool,
    pub outcome: Outcome,
    pub start_index: usize,
    pub iterations: usize,
    pub vanishing: f64,
    pub starts: Vec<StartSummary>,
    pub multistart_spread: f64,
    pub warnings: Vec<String>,
    pub energy_trace: Vec<(usize, f64)>,
}

impl GroundStateResult {
    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            a: self.a,
            lambda: self.lambda,
            lambda_normalized: self.lambda_normalized,
            C_a_estimate: self.c_a_estimate,
            C_a_normalized: self.c_a_normalized,
            residuals: self.residuals,
            residual: self.residual,
            converged: self.converged,
            outcome: self.outcome,
            start_index: self.start_index,
            iterations: self.iterations,
            vanishing: self.vanishing,
            starts: self.starts.clone(),
            multistart_spread: self.multistart_spread,
            warnings: self.warnings.clone(),
            energy_trace: self.energy_trace.clone(),
        }
    }

    /// Energy trace as `iter,J` CSV.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iter,J\n");
        for (k, j) in &self.energy_trace {
            s.push_str(&format!("{k},{}\n", crate::discretization::fmt12(*j)));
        }
        s
    }
}

/// Precomputed operator data for one model on one grid.
struct Flow<'a> {
    model: &'a Model,
    weights: &'a [f64],
    v: Vec<f64>,
    k: SymTridiagonal,
    c_ell: f64,
}

/// Quantities of one iterate.
struct State {
    lambda: f64,
    energy: f64,
    residual: f64,
    g: Vec<f64>,
}

impl<'a> Flow<'a> {
    fn new(model: &'a Model, grid: &'a RadialGrid) -> Self {
        let v = grid.nodes().iter().map(|&r| model.potential.value(r)).collect();
        let c_ell = model.potential.c_ell();
        Self {
            model,
            weights: grid.weights(),
            v,
            k: grid.stiffness(),
            c_ell,
        }
    }

    fn state(&self, u: &[f64], a: f64) -> State {
        let ku = self.k.apply(u);
        let nl = &self.model.nonlinearity;
        let mut g = Vec::with_capacity(u.len());
        let mut kin = 0.0;
        let mut gu = 0.0;
        let mut vu = 0.0;
        let mut big_g = 0.0;
        for i in 0..u.len() {
            let w = self.weights[i];
            let (gi, big_gi) = nl.g_and_G(u[i]);
            g.push(gi);
            kin += u[i] * ku[i];
            gu += w * gi * u[i];
            vu += w * self.v[i] * u[i] * u[i];
            big_g += w * big_gi;
        }
        let lambda = (gu - kin - vu) / a;
        let mut res = 0.0;
        for i in 0..u.len() {
            let w = self.weights[i];
            let r = ku[i] / w + (self.v[i] + lambda) * u[i] - g[i];
            res += w * r * r;
        }
        State {
            lambda,
            energy: 0.5 * kin + 0.5 * vu - big_g,
            residual: (res / a).sqrt(),
            g,
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn step(&self, u: &[f64], st: &State, dt: f64, a: f64) -> Result<Vec<f64>> {
        let shift = (-(self.c_ell + st.lambda)).max(0.0);
        let n = u.len();
        let mut diag = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for i in 0..n {
            let w = self.weights[i];
            diag.push(dt * self.k.diag[i] + w * (1.0 + dt * (self.v[i] + st.lambda + shift)));
            rhs.push(w * (u[i] + dt * (st.g[i] + shift * u[i])));
        }
        let m = SymTridiagonal {
            diag,
            off: self.k.off.iter().map(|o| dt * o).collect(),
        };
        let mut next = m.solve(&rhs)?;
        renormalize(&mut next, self.weights, a)?;
        Ok(next)
    }
}

fn renormalize(u: &mut [f64], weights: &[f64], a: f64) -> Result<()> {
    let m: f64 = u.iter().zip(weights).map(|(v, w)| w * v * v).sum();
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(m > 0.0) {
        return Err(Error::ZeroField);
    }
    let c = (a / m).sqrt();
    u.iter_mut().for_each(|v| *v *= c);
    Ok(())
}

/// One flow step `u ↦ u⁺` at the mass of `u`.
pub fn flow_step(u: &GridFunction, model: &Model, dt: f64) -> Result<GridFunction> {
    if !(dt > 0.0) {
        return Err(Error::OutOfRange(format!("dt must be positive, got {dt}")));
    }
    check_model(u.grid(), model)?;
    let a = u.mass();
    if !(a > 0.0) {
        return Err(Error::ZeroField);
    }
    let flow = Flow::new(model, u.grid());
    let st = flow.state(u.values(), a);
    u.with_values(flow.step(u.values(), &st, dt, a)?)
}

fn check_model(grid: &RadialGrid, model: &Model) -> Result<()> {
    if grid.dim() != model.dim {
        return Err(Error::InvalidModel(format!(
            "model has N = {}, grid has N = {}",
            model.dim,
            grid.dim()
        )));
    }
    Ok(())
}

struct Run {
    u: Vec<f64>,
    lambda: f64,
    energy: f64,
    residual: f64,
    trace: Vec<(usize, f64)>,
    outcome: Outcome,
    iterations: usize,
}

fn run_flow(flow: &Flow, mut u: Vec<f64>, a: f64, cfg: &SolverConfig) -> Result<Run> {
    renormalize(&mut u, flow.weights, a)?;
    let mut trace = Vec::new();
    let mut prev_energy = f64::INFINITY;
    let mut stall_count = 0usize;
    let mut stall_anchor = f64::INFINITY;
    let mut k = 0usize;
    loop {
        let st = flow.state(&u, a);
        if !st.energy.is_finite() || !st.residual.is_finite() {
            return Err(Error::NonFinite);
        }
        let finish = |outcome: Outcome, u: Vec<f64>, mut trace: Vec<(usize, f64)>| {
            if trace.last().map(|t: &(usize, f64)| t.0) != Some(k) {
                trace.push((k, st.energy));
            }
            Run {
                u,
                lambda: st.lambda,
                energy: st.energy,
                residual: st.residual,
                trace,
                outcome,
                iterations: k,
            }
        };
        if k.is_multiple_of(cfg.trace_stride) {
            trace.push((k, st.energy));
        }
        if st.residual <= cfg.tol_grad {
            return Ok(finish(Outcome::Converged, u, trace));
        }
        if let Some(target) = cfg.target_energy {
            if st.energy < target {
                return Ok(finish(Outcome::TargetReached, u, trace));
            }
        }
        if k > 10 && st.energy > prev_energy + 1e-9 * prev_energy.abs().max(1.0) {
            return Ok(finish(Outcome::EnergyIncrease, u, trace));
        }
        if (st.energy - prev_energy).abs() < cfg.tol_energy {
            stall_count += 1;
            if stall_count >= cfg.stall_window {
                // a stall only counts while the residual has stopped improving
                if st.residual > 0.99 * stall_anchor {
                    return Ok(finish(Outcome::Stalled, u, trace));
                }
                stall_anchor = st.residual;
                stall_count = 0;
            }
        } else {
            stall_count = 0;
            stall_anchor = st.residual;
        }
        if k >= cfg.max_iters {
            return Ok(finish(Outcome::MaxIters, u, trace));
        }
        prev_energy = st.energy;
        u = flow.step(&u, &st, cfg.dt, a)?;
        k += 1;
    }
}

/// Gaussian widths of the starts: `{1, 2, ½}·scale`, then seeded random
/// widths in `[scale/3, 3·scale]`.
pub fn start_widths(cfg: &SolverConfig) -> Vec<f64> {
    let base = [1.0, 2.0, 0.5];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.starts)
        .map(|i| {
            let f = if i < base.len() {
                base[i]
            } else {
                rng.gen_range(-(3f64.ln())..3f64.ln()).exp()
            };
            f * cfg.initial_width_scale
        })
        .collect()
}

pub fn gaussian_start(grid: &Arc<RadialGrid>, width: f64, a: f64) -> Result<GridFunction> {
    GridFunction::from_fn(grid.clone(), |r| (-r * r / (2.0 * width * width)).exp()).normalized_to(a)
}

/// Best-of-starts minimizer of `J` on `S_a` from the configured Gaussian
/// starts.
pub fn minimize(a: f64, model: &Model, grid: &Arc<RadialGrid>, cfg: &SolverConfig) -> Result<GroundStateResult> {
    minimize_with_starts(a, model, grid, cfg, &[])
}

/// As [`minimize`], with `extra` initial profiles tried before the Gaussians.
pub fn minimize_with_starts(
    a: f64,
    model: &Model,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    extra: &[GridFunction],
) -> Result<GroundStateResult> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::OutOfRange(format!("mass must be positive, got {a}")));
    }
    cfg.validate()?;
    check_model(grid, model)?;
    let flow = Flow::new(model, grid);

    let mut inits: Vec<(Option<f64>, Vec<f64>)> = Vec::new();
    for e in extra {
        if e.grid().as_ref() != grid.as_ref() {
            return Err(Error::GridMismatch);
        }
        inits.push((None, e.values().to_vec()));
    }
    for w in start_widths(cfg) {
        inits.push((Some(w), gaussian_start(grid, w, a)?.into_values()));
    }

    let mut runs = Vec::with_capacity(inits.len());
    let mut summaries = Vec::with_capacity(inits.len());
    for (index, (width, u0)) in inits.into_iter().enumerate() {
        let run = run_flow(&flow, u0, a, cfg)?;
        summaries.push(StartSummary {
            index,
            width,
            energy: run.energy,
            residual: run.residual,
            iterations: run.iterations,
            outcome: run.outcome,
        });
        runs.push(run);
    }

    let converged: Vec<f64> = runs
        .iter()
        .filter(|r| r.outcome == Outcome::Converged)
        .map(|r| r.energy)
        .collect();
    let spread = if converged.len() > 1 {
        converged.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - converged.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    let any_converged = !converged.is_empty();
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| !any_converged || r.outcome == Outcome::Converged)
        .min_by(|x, y| x.1.energy.total_cmp(&y.1.energy))
        .map(|(i, _)| i)
        .expect("at least one start");
    let run = runs.swap_remove(best);

    let u = GridFunction::new(grid.clone(), run.u)?;
    let residuals = identity_residuals(&u, model)?;
    let v_inf = model.potential.v_inf();
    let finite = v_inf.is_finite();
    let (lambda_normalized, c_a_normalized) = if finite {
        (run.lambda + v_inf, run.energy - 0.5 * v_inf * a)
    } else {
        (run.lambda, run.energy)
    };
    let vanishing = vanishing_diagnostic(&u);

    let mut warnings = Vec::new();
    if spread > 1e-6 {
        warnings.push(format!("starts disagree: converged energies spread by {spread:.3e}"));
    }
    let edge = u.max_abs_beyond(0.95 * grid.radius());
    if edge > 1e-6 * u.max_abs() {
        warnings.push(format!(
            "profile does not decay within R: |u| near R is {:.3e} of its maximum",
            edge / u.max_abs()
        ));
    }
    if grid.h() > 0.05 {
        warnings.push(format!("vanishing diagnostic is coarse: h = {:.3} > 0.05", grid.h()));
    }

    let mut outcome = run.outcome;
    if finite && matches!(outcome, Outcome::Converged | Outcome::Stalled | Outcome::MaxIters) {
        let superfast = model.classify_g()?.small_s_regime == SmallSRegime::Superfast;
        if c_a_normalized > -cfg.plateau_tol {
            outcome = if superfast {
                Outcome::VanishingSuspected
            } else {
                Outcome::NoMinimizerRegime
            };
        } else if vanishing < cfg.vanishing_delta * a {
            outcome = Outcome::VanishingSuspected;
        }
    }

    Ok(GroundStateResult {
        u,
        a,
        lambda: run.lambda,
        lambda_normalized,
        c_a_estimate: run.energy,
        c_a_normalized,
        residuals,
        residual: run.residual,
        energy_trace: run.trace,
        converged: outcome == Outcome::Converged,
        outcome,
        start_index: best,
        iterations: run.iterations,
        vanishing,
        starts: summaries,
        multistart_spread: spread,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{inner, mass};
    use crate::domain::{Nonlinearity, Potential};
    use crate::energy::{euler_lagrange_residual, evaluate};

    fn grid1(r: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(1, r, n).unwrap())
    }

    fn cubic(potential: Potential) -> Model {
        Model::new(1, Nonlinearity::power(1.0, 2.0, 1).unwrap(), potential).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        for bad in [
            SolverConfig { dt: 0.0, ..Default::default() },
            SolverConfig { tol_grad: -1.0, ..Default::default() },
            SolverConfig { starts: 0, ..Default::default() },
            SolverConfig { initial_width_scale: 0.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn start_widths_are_seeded() {
        let cfg = SolverConfig { starts: 6, seed: 7, ..Default::default() };
        let w = start_widths(&cfg);
        assert_eq!(&w[..3], &[1.0, 2.0, 0.5]);
        assert_eq!(w, start_widths(&cfg));
        assert_ne!(w, start_widths(&SolverConfig { seed: 8, ..cfg }));
        assert!(w.iter().all(|&x| (1.0 / 3.0..=3.0).contains(&x)));
    }

    #[test]
    fn flow_step_preserves_mass_and_positivity() {
        let g = grid1(20.0, 1000);
        let model = cubic(Potential::GaussianWell { depth: 2.0, width: 1.0 });
        let u = gaussian_start(&g, 1.5, 3.0).unwrap();
        let next = flow_step(&u, &model, 1e-2).unwrap();
        assert!((mass(&next) - 3.0).abs() < 1e-12 * 3.0);
        assert!(next.values().iter().all(|&v| v > 0.0));
        let big = flow_step(&u, &model, 10.0).unwrap();
        assert!(big.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn fixed_point_of_the_flow_is_an_euler_lagrange_solution() {
        let g = grid1(20.0, 1000);
        let model = cubic(Potential::Zero);
        let r = minimize(4.0, &model, &g, &SolverConfig { starts: 1, ..Default::default() }).unwrap();
        assert!(r.converged);
        let next = flow_step(&r.u, &model, 1e-2).unwrap();
        let diff = next.values().iter().zip(r.u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{diff}");
        assert!(euler_lagrange_residual(&r.u, &model, r.lambda).unwrap() <= 1e-8);
    }

    #[test]
    fn linear_harmonic_limit_is_the_ground_eigenpair() {
        let g = grid1(10.0, 1000);
        let model = Model::new(1, Nonlinearity::zero(1), Potential::Harmonic { k: 1.0 }).unwrap();
        let r = minimize(1.0, &model, &g, &SolverConfig::default()).unwrap();
        assert!(r.converged, "{:?}", r.outcome);
        assert!((r.lambda + 1.0).abs() < 1e-3);
        assert!((r.c_a_estimate - 0.5).abs() < 1e-3);
        let exact = GridFunction::from_fn(g.clone(), |x| (-x * x / 2.0).exp()).normalized_to(1.0).unwrap();
        assert!(inner(&exact, &r.u).unwrap() > 1.0 - 1e-5);
    }

    #[test]
    fn cubic_line_reproduces_sech() {
        let g = grid1(20.0, 2000);
        let r = minimize(4.0, &cubic(Potential::Zero), &g, &SolverConfig::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Converged);
        assert!((r.lambda - 1.0).abs() < 1e-3);
        let exact = GridFunction::from_fn(g.clone(), |x| 2f64.sqrt() / x.cosh());
        let d = r.u.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect();
        assert!(mass(&r.u.with_values(d).unwrap()).sqrt() <= 1e-3);
        assert!((r.c_a_estimate + 2.0 / 3.0).abs() < 1e-3 * 2.0 / 3.0);
        assert!(r.multistart_spread <= 1e-6);
        assert!((mass(&r.u) - 4.0).abs() < 1e-12 * 4.0);
    }

    #[test]
    fn trace_is_nonincreasing_after_transient() {
        let g = grid1(20.0, 1000);
        let model = cubic(Potential::GaussianWell { depth: 1.0, width: 1.0 });
        let r = minimize(2.0, &model, &g, &SolverConfig::default()).unwrap();
        assert!(r.converged, "{:?}", r.outcome);
        for w in r.energy_trace.windows(2).filter(|w| w[0].0 >= 10) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "{w:?}");
        }
        assert!(r.lambda_normalized > 0.0);
    }

    #[test]
    fn doubling_mass_lowers_energy() {
        let g = grid1(20.0, 1000);
        let model = cubic(Potential::GaussianWell { depth: 1.0, width: 1.0 });
        let cfg = SolverConfig::default();
        let c1 = minimize(1.5, &model, &g, &cfg).unwrap();
        let c2 = minimize(3.0, &model, &g, &cfg).unwrap();
        assert!(c2.c_a_estimate <= c1.c_a_estimate);
        let j = evaluate(&c2.u, &model).unwrap().J;
        assert!((j - c2.c_a_estimate).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_critical_power_reports_no_minimizer() {
        let g = grid1(20.0, 1000);
        let model = Model::new(1, Nonlinearity::power(1.0, 4.0, 1).unwrap(), Potential::Zero).unwrap();
        let r = minimize(1.0, &model, &g, &SolverConfig { starts: 1, ..Default::default() }).unwrap();
        assert_eq!(r.outcome, Outcome::NoMinimizerRegime);
        assert!(!r.converged);
        assert!(r.c_a_estimate.abs() < 1e-2);
        assert_eq!(r.outcome.exit_code(), 2);
    }

    #[test]
    fn target_energy_stops_early() {
        let g = grid1(20.0, 1000);
        let cfg = SolverConfig { starts: 1, target_energy: Some(-0.1), ..Default::default() };
        let r = minimize(4.0, &cubic(Potential::Zero), &g, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::TargetReached);
        assert!(r.c_a_estimate < -0.1);
    }

    #[test]
    fn rejects_bad_input() {
        let g = grid1(20.0, 500);
        let model = cubic(Potential::Zero);
        assert!(minimize(0.0, &model, &g, &SolverConfig::default()).is_err());
        let g3 = Arc::new(RadialGrid::new(3, 20.0, 500).unwrap());
        assert!(minimize(1.0, &model, &g3, &SolverConfig::default()).is_err());
    }
}
