//! Energy-curve analysis: scans of `a ↦ C_a`, sub-additivity gaps, the
//! threshold `a_0`, the bottom of the spectrum of `−Δ + V` and the local-mass
//! vanishing diagnostic.
//!
//! Monotonicity and sub-additivity are statements about the normalized curve
//! `C_a − ½V_∞a`; all checks below use that curve.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{fmt12, GridFunction, RadialGrid, SymTridiagonal};
use crate::domain::{sha256_hex, Model};
use crate::energy::{evaluate, IdentityResiduals};
use crate::error::{Error, Result};
use crate::solver::{minimize, minimize_with_starts, GroundStateResult, Outcome, SolverConfig};

/// Largest mass in a radial window `[max(0, z−1), z+1]` over node centres `z`.
pub fn vanishing_diagnostic(u: &GridFunction) -> f64 {
    let g = u.grid();
    let r = g.nodes();
    let dens: Vec<f64> = u.values().iter().zip(g.weights()).map(|(v, w)| w * v * v).collect();
    let mut prefix = Vec::with_capacity(dens.len() + 1);
    prefix.push(0.0);
    for d in &dens {
        prefix.push(prefix.last().unwrap() + d);
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut best = 0.0f64;
    for &z in r {
        while lo < r.len() && r[lo] < z - 1.0 {
            lo += 1;
        }
        while hi < r.len() && r[hi] <= z + 1.0 {
            hi += 1;
        }
        best = best.max(prefix[hi] - prefix[lo]);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    /// Sequential; each point also starts from the previous profile rescaled
    /// by `√(a_{i+1}/a_i)`.
    WarmStart,
    /// Independent points on the rayon pool.
    Parallel,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub a: f64,
    pub C_a: f64,
    pub lambda: f64,
    /// `C_a − ½V_∞a` (`C_a` for coercive `V`).
    pub C_a_normalized: f64,
    pub lambda_normalized: f64,
    pub converged: bool,
    pub outcome: Outcome,
    pub residuals: IdentityResiduals,
}

impl CurvePoint {
    fn from_result(r: &GroundStateResult) -> Self {
        Self {
            a: r.a,
            C_a: r.c_a_estimate,
            lambda: r.lambda,
            C_a_normalized: r.c_a_normalized,
            lambda_normalized: r.lambda_normalized,
            converged: r.converged,
            outcome: r.outcome,
            residuals: r.residuals,
        }
    }

    /// Whether the point is a legitimate outcome (attained or a certified
    /// zero plateau) rather than a solver failure.
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, Outcome::Converged | Outcome::NoMinimizerRegime)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub points: Vec<CurvePoint>,
    pub model_fingerprint: String,
    pub grid_fingerprint: String,
    /// Hash of the solver configuration and the scan mode.
    pub config_fingerprint: String,
    pub mode: ScanMode,
    /// Masses whose point is neither attained nor a zero plateau.
    pub failed: Vec<f64>,
}

impl EnergyCurve {
    pub fn is_partial(&self) -> bool {
        !self.failed.is_empty()
    }

    /// Largest increase `C_{a_{i+1}} − C_{a_i}` of the normalized curve.
    pub fn max_increase(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].C_a_normalized - w[0].C_a_normalized)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.max_increase() <= slack
    }

    /// `a,C_a,lambda,converged,nehari,pohozaev`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,C_a,lambda,converged,nehari,pohozaev\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt12(p.a),
                fmt12(p.C_a),
                fmt12(p.lambda),
                p.converged,
                fmt12(p.residuals.nehari),
                fmt12(p.residuals.pohozaev)
            ));
        }
        s
    }

    pub fn point(&self, a: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| same_mass(p.a, a))
    }
}

fn same_mass(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-9 * x.abs().max(y.abs())
}

fn config_fingerprint(cfg: &SolverConfig, mode: ScanMode) -> String {
    let text = serde_json::to_string(&(cfg, mode)).expect("config serializes");
    sha256_hex(text.as_bytes())
}

/// `C_a` at every mass of `a_grid` (strictly increasing, at least 3 points).
pub fn scan(
    a_grid: &[f64],
    model: &Model,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    mode: ScanMode,
) -> Result<EnergyCurve> {
    Ok(scan_with_results(a_grid, model, grid, cfg, mode)?.0)
}

/// [`scan`] plus the full per-point results.
pub fn scan_with_results(
    a_grid: &[f64],
    model: &Model,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    mode: ScanMode,
) -> Result<(EnergyCurve, Vec<GroundStateResult>)> {
    if a_grid.len() < 3 {
        return Err(Error::OutOfRange("a scan needs at least 3 masses".into()));
    }
    if a_grid.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::OutOfRange("scan masses must be positive".into()));
    }
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::OutOfRange("scan masses must be strictly increasing".into()));
    }
    let results: Vec<GroundStateResult> = match mode {
        ScanMode::Parallel => a_grid
            .par_iter()
            .map(|&a| minimize(a, model, grid, cfg))
            .collect::<Result<_>>()?,
        ScanMode::WarmStart => {
            let mut out: Vec<GroundStateResult> = Vec::with_capacity(a_grid.len());
            for &a in a_grid {
                let warm: Vec<GridFunction> = match out.last() {
                    Some(prev) => vec![prev.u.scaled((a / prev.a).sqrt())],
                    None => Vec::new(),
                };
                out.push(minimize_with_starts(a, model, grid, cfg, &warm)?);
            }
            out
        }
    };
    let points: Vec<CurvePoint> = results.iter().map(CurvePoint::from_result).collect();
    let failed = points.iter().filter(|p| !p.is_ok()).map(|p| p.a).collect();
    Ok((
        EnergyCurve {
            points,
            model_fingerprint: model.fingerprint(),
            grid_fingerprint: grid.fingerprint(),
            config_fingerprint: config_fingerprint(cfg, mode),
            mode,
            failed,
        },
        results,
    ))
}

/// The potential-free curve `E_a`, through the same pipeline with `V := 0`.
pub fn potential_free_scan(
    a_grid: &[f64],
    model: &Model,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    mode: ScanMode,
) -> Result<EnergyCurve> {
    scan(a_grid, &model.without_potential(), grid, cfg, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGap {
    pub a: f64,
    pub b: f64,
    /// `C_{a+b} − (C_a + C_b)` on the normalized curve.
    pub gap: f64,
    /// Both summands are attained minimizers.
    pub attained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub pairs: Vec<PairGap>,
    /// Pairs with `gap > slack`.
    pub violations: Vec<PairGap>,
    /// Attained pairs whose gap is not strictly negative.
    pub non_strict: Vec<PairGap>,
    pub slack: f64,
}

impl SubadditivityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn strict_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.attained && p.gap < 0.0).count()
    }

    /// `a,b,gap`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,gap\n");
        for p in &self.pairs {
            s.push_str(&format!("{},{},{}\n", fmt12(p.a), fmt12(p.b), fmt12(p.gap)));
        }
        s
    }
}

pub const SUBADDITIVITY_SLACK: f64 = 1e-6;

/// Every pair `a_i ≤ a_j` of the curve whose sum is also on the curve.
pub fn subadditivity_check(curve: &EnergyCurve) -> SubadditivityReport {
    let pts = &curve.points;
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in i..pts.len() {
            if let Some(sum) = curve.point(pts[i].a + pts[j].a) {
                pairs.push(PairGap {
                    a: pts[i].a,
                    b: pts[j].a,
                    gap: sum.C_a_normalized - pts[i].C_a_normalized - pts[j].C_a_normalized,
                    attained: pts[i].outcome == Outcome::Converged && pts[j].outcome == Outcome::Converged,
                });
            }
        }
    }
    let violations = pairs.iter().filter(|p| p.gap > SUBADDITIVITY_SLACK).cloned().collect();
    let non_strict = pairs.iter().filter(|p| p.attained && p.gap >= 0.0).cloned().collect();
    SubadditivityReport {
        pairs,
        violations,
        non_strict,
        slack: SUBADDITIVITY_SLACK,
    }
}

pub const THRESHOLD_TOL: f64 = 1e-6;
pub const THRESHOLD_REL_WIDTH: f64 = 1e-2;

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProbe {
    pub a: f64,
    /// Normalized `C_a` estimate (an upper bound when the run stopped early).
    pub C_a: f64,
    pub negative: bool,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// Midpoint of the final bracket (`upper` when `below_bracket`).
    pub a0: f64,
    pub lower: f64,
    pub upper: f64,
    /// `C` is already negative at `a_lo`: only `a0 ≤ a_lo` is known.
    pub below_bracket: bool,
    pub tol: f64,
    pub audit: Vec<ThresholdProbe>,
    pub caveat: String,
}

fn probe(a: f64, model: &Model, grid: &Arc<RadialGrid>, cfg: &SolverConfig) -> Result<ThresholdProbe> {
    let shift = if model.potential.is_coercive() {
        0.0
    } else {
        0.5 * model.potential.v_inf() * a
    };
    let cfg = SolverConfig {
        target_energy: Some(shift - 10.0 * THRESHOLD_TOL),
        ..*cfg
    };
    let r = minimize(a, model, grid, &cfg)?;
    Ok(ThresholdProbe {
        a,
        C_a: r.c_a_normalized,
        negative: r.c_a_normalized < -THRESHOLD_TOL,
        outcome: r.outcome,
    })
}

/// Sign-change point of the computed `C_a` inside `[a_lo, a_hi]`.
pub fn threshold_a0(
    model: &Model,
    grid: &Arc<RadialGrid>,
    cfg: &SolverConfig,
    a_lo: f64,
    a_hi: f64,
) -> Result<ThresholdReport> {
    if !(a_lo > 0.0 && a_hi > a_lo && a_hi.is_finite()) {
        return Err(Error::OutOfRange(format!("need 0 < a_lo < a_hi, got [{a_lo}, {a_hi}]")));
    }
    let caveat = format!(
        "operational a0: sign change of the computed C_a with dead-band {THRESHOLD_TOL:e} on grid {}; \
         box truncation raises C_a by O(R^-2)",
        grid.fingerprint()
    );
    let mut audit = Vec::new();
    let top = probe(a_hi, model, grid, cfg)?;
    audit.push(top.clone());
    if !(top.C_a < -10.0 * THRESHOLD_TOL) {
        return Err(Error::Bracket(format!(
            "C at a_hi = {a_hi} is {:.3e}, not below -10*tol; C_a < 0 for sufficiently large a, so enlarge a_hi",
            top.C_a
        )));
    }
    let bottom = probe(a_lo, model, grid, cfg)?;
    audit.push(bottom.clone());
    if bottom.negative {
        return Ok(ThresholdReport {
            a0: a_lo,
            lower: 0.0,
            upper: a_lo,
            below_bracket: true,
            tol: THRESHOLD_TOL,
            audit,
            caveat,
        });
    }
    let (mut lo, mut hi) = (a_lo, a_hi);
    while (hi - lo) / hi > THRESHOLD_REL_WIDTH {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let p = probe(mid, model, grid, cfg)?;
        if p.negative {
            hi = mid;
        } else {
            lo = mid;
        }
        audit.push(p);
    }
    Ok(ThresholdReport {
        a0: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        below_bracket: false,
        tol: THRESHOLD_TOL,
        audit,
        caveat,
    })
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Smallest discrete eigenvalue of `−Δ + V`.
    pub eigenvalue: f64,
    pub iterations: usize,
    /// Mass-normalized, positive eigenvector.
    pub eigenvector: GridFunction,
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub eigenvalue: f64,
    pub iterations: usize,
    pub c_ell: f64,
    pub caveat: Option<String>,
}

impl SpectrumReport {
    pub fn summary(&self, model: &Model) -> SpectrumSummary {
        SpectrumSummary {
            eigenvalue: self.eigenvalue,
            iterations: self.iterations,
            c_ell: model.potential.c_ell(),
            caveat: self.caveat.clone(),
        }
    }
}

pub const SPECTRUM_MAX_ITERS: usize = 10_000;

/// `inf_{|φ|₂=1} ∫|∇φ|² + Vφ²` on the grid, by inverse iteration shifted to
/// `c_ℓ − 1`.
pub fn quadratic_form_infimum(model: &Model, grid: &Arc<RadialGrid>) -> Result<SpectrumReport> {
    if model.dim != grid.dim() {
        return Err(Error::InvalidModel("model and grid dimensions differ".into()));
    }
    let w = grid.weights();
    let v: Vec<f64> = grid.nodes().iter().map(|&r| model.potential.value(r)).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let shift = model.potential.c_ell() - 1.0;
    let k = grid.stiffness();
    let shifted = SymTridiagonal {
        diag: k.diag.iter().zip(w).zip(&v).map(|((d, w), v)| d + w * (v - shift)).collect(),
        off: k.off.clone(),
    };
    let rayleigh = |x: &[f64]| {
        let kx = k.apply(x);
        let num: f64 = (0..x.len()).map(|i| x[i] * kx[i] + w[i] * v[i] * x[i] * x[i]).sum();
        let den: f64 = (0..x.len()).map(|i| w[i] * x[i] * x[i]).sum();
        num / den
    };
    let mut x: Vec<f64> = grid.nodes().iter().map(|&r| (-r * r / 2.0).exp()).collect();
    let mut mu = rayleigh(&x);
    for it in 1..=SPECTRUM_MAX_ITERS {
        let rhs: Vec<f64> = x.iter().zip(w).map(|(x, w)| x * w).collect();
        let mut y = shifted.solve(&rhs)?;
        let norm = y.iter().zip(w).map(|(y, w)| w * y * y).sum::<f64>().sqrt();
        y.iter_mut().for_each(|y| *y /= norm);
        let next = rayleigh(&y);
        let done = (next - mu).abs() <= 1e-14 * next.abs().max(1.0);
        x = y;
        mu = next;
        if done {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            let caveat = (!model.potential.is_coercive()).then(|| {
                format!(
                    "Dirichlet truncation at R = {}: the discrete bottom of the continuous spectrum sits at V_inf + O((pi/2R)^2)",
                    grid.radius()
                )
            });
            return Ok(SpectrumReport {
                eigenvalue: mu,
                iterations: it,
                eigenvector: GridFunction::new(grid.clone(), x)?,
                caveat,
            });
        }
    }
    Err(Error::Stagnation(SPECTRUM_MAX_ITERS))
}

/// Gnuplot script plotting `C_a` (and `E_a` when given) from curve CSVs.
/// Smallest `|∇u|₂²` and `∫G(u)` observed over converged points. These are
/// empirical bounds on the computed Pohozaev points, not proven constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBounds {
    pub points: usize,
    pub grad_sq_min: f64,
    pub nonlinear_min: f64,
}

pub fn empirical_bounds(results: &[GroundStateResult], model: &Model) -> Result<Option<EmpiricalBounds>> {
    let mut out: Option<EmpiricalBounds> = None;
    for r in results.iter().filter(|r| r.converged) {
        let e = evaluate(&r.u, model)?;
        let (g, n) = (2.0 * e.kinetic, e.nonlinear_term);
        out = Some(match out {
            None => EmpiricalBounds {
                points: 1,
                grad_sq_min: g,
                nonlinear_min: n,
            },
            Some(b) => EmpiricalBounds {
                points: b.points + 1,
                grad_sq_min: b.grad_sq_min.min(g),
                nonlinear_min: b.nonlinear_min.min(n),
            },
        });
    }
    Ok(out)
}

pub fn gnuplot_script(curve_csv: &str, free_csv: Option<&str>, title: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{}'\n", title.replace('\'', "")));
    s.push_str("set xlabel 'a'\nset ylabel 'C_a'\nset grid\n");
    s.push_str(&format!("plot '{curve_csv}' using 1:2 with linespoints title 'C_a'"));
    if let Some(f) = free_csv {
        s.push_str(&format!(", \\\n     '{f}' using 1:2 with linespoints title 'E_a'"));
    }
    s.push('\n');
    s
}
