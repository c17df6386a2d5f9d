//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line with the measured quantities.

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use ngs::analysis::{
    potential_free_scan, quadratic_form_infimum, scan, subadditivity_check, threshold_a0, EnergyCurve, ScanMode,
};
use ngs::discretization::{mass, GridFunction, RadialGrid};
use ngs::domain::{Model, Nonlinearity, PowerTerm, Potential};
use ngs::energy::{evaluate, fiber_map, fiber_minimize, pohozaev_residual};
use ngs::oracle::{mass_critical_exponent, mass_exponent, power_ground_energy, scale_solution, shoot_Up};
use ngs::solver::{minimize, GroundStateResult, Outcome, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R: f64 = 20.0;
const N_NODES: usize = 2000;

/// Writes past the test harness capture so the lines show in plain
/// `cargo test` output.
fn report(id: u32, name: &str, pass: bool, detail: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
}

fn grid(dim: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(dim, R, N_NODES).unwrap())
}

fn bundled(name: &str) -> Model {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(name);
    Model::from_path(&path).unwrap()
}

fn cubic() -> Nonlinearity {
    Nonlinearity::power(1.0, 2.0, 1).unwrap()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let g = grid(1);
    let r = minimize(4.0, &bundled("power3_free.json"), &g, &SolverConfig::default()).unwrap();
    let exact = GridFunction::from_fn(g.clone(), |x| 2f64.sqrt() / x.cosh());
    let diff = r.u.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect();
    let l2 = mass(&r.u.with_values(diff).unwrap()).sqrt();
    let e = power_ground_energy(3.0, 1, 4.0).unwrap();
    let rel = ((r.c_a_estimate - e) / e).abs();
    let pass = r.converged && (r.lambda - 1.0).abs() <= 1e-3 && l2 <= 1e-3 && rel <= 1e-3;
    report(
        1,
        "oracle equivalence",
        pass,
        &format!(
            "lambda = {:.6}, |u - sqrt2 sech| = {l2:.2e}, C_4 = {:.8} vs oracle {e:.8} (rel {rel:.2e})",
            r.lambda, r.c_a_estimate
        ),
    );
    assert!(pass);
}

fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn measured_mass_slope(p: f64, dim: usize) -> f64 {
    let base = shoot_Up(p, dim, grid(dim)).unwrap();
    let lambdas = [1.0, 2.0, 4.0, 8.0];
    let logs: Vec<f64> = lambdas.iter().map(|l: &f64| l.ln()).collect();
    let masses: Vec<f64> = lambdas
        .iter()
        .map(|&l| mass(&scale_solution(&base, l).unwrap().profile).ln())
        .collect();
    fitted_slope(&logs, &masses)
}

#[test]
fn criterion_2_scaling_law() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (dim, p) in [(1, 3.0), (1, 2.0), (3, 3.0)] {
        let s = measured_mass_slope(p, dim);
        let e = mass_exponent(p, dim);
        pass &= (s - e).abs() <= 1e-2;
        detail.push(format!("(N={dim},p={p}) slope {s:.5} vs {e:.5}"));
    }
    for dim in 1..=3 {
        let p = mass_critical_exponent(dim);
        let s = measured_mass_slope(p, dim);
        pass &= s.abs() <= 1e-3;
        detail.push(format!("critical N={dim} slope {s:.2e}"));
    }
    report(2, "scaling law", pass, &detail.join("; "));
    assert!(pass);
}

fn matrix_models() -> Vec<(String, Model)> {
    let potentials = [
        ("zero", Potential::Zero),
        ("harmonic", Potential::Harmonic { k: 1.0 }),
        ("gaussian_well", Potential::GaussianWell { depth: 1.0, width: 1.0 }),
    ];
    let nonlinearities = [
        ("sigma2", cubic()),
        ("sigma1", Nonlinearity::power(1.0, 1.0, 1).unwrap()),
        (
            "mixed",
            Nonlinearity::power_sum(
                vec![
                    PowerTerm { coef: 0.5, sigma: 1.0 },
                    PowerTerm { coef: 0.5, sigma: 2.0 },
                ],
                1,
            )
            .unwrap(),
        ),
    ];
    let mut out = Vec::new();
    for (pn, pot) in &potentials {
        for (gn, nl) in &nonlinearities {
            out.push((format!("{pn}/{gn}"), Model::new(1, nl.clone(), pot.clone()).unwrap()));
        }
    }
    out
}

/// Shared by criteria 3 and 8.
fn matrix_results() -> &'static [(String, Model, GroundStateResult)] {
    static CELL: OnceLock<Vec<(String, Model, GroundStateResult)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = grid(1);
        let cfg = SolverConfig::default();
        let mut out = Vec::new();
        for (name, model) in matrix_models() {
            for a in [1.0, 2.0, 4.0] {
                let r = minimize(a, &model, &g, &cfg).unwrap();
                out.push((format!("{name}/a={a}"), model.clone(), r));
            }
        }
        out
    })
}

fn well_masses() -> Vec<f64> {
    (1..=12).map(|k| 0.5 * k as f64).collect()
}

/// Gaussian-well scan shared by criteria 4 and 8.
fn well_curve() -> &'static EnergyCurve {
    static CELL: OnceLock<EnergyCurve> = OnceLock::new();
    CELL.get_or_init(|| {
        scan(&well_masses(), &bundled("gaussian_well.json"), &grid(1), &SolverConfig::default(), ScanMode::WarmStart)
            .unwrap()
    })
}

#[test]
fn criterion_3_identity_suite() {
    let g = grid(1);
    let poh_tol = 1e-4f64.max(10.0 * g.h() * g.h());
    let results = matrix_results();
    let mut worst_nehari = 0.0f64;
    let mut worst_poh = 0.0f64;
    let mut worst_mass = 0.0f64;
    let mut unconverged = Vec::new();
    for (name, _, r) in results {
        if !r.converged {
            unconverged.push(format!("{name}:{:?}", r.outcome));
            continue;
        }
        worst_nehari = worst_nehari.max(r.residuals.nehari.abs());
        worst_poh = worst_poh.max(r.residuals.pohozaev.abs());
        worst_mass = worst_mass.max(((mass(&r.u) - r.a) / r.a).abs());
    }
    let pass = unconverged.is_empty() && worst_nehari <= 1e-4 && worst_poh <= poh_tol && worst_mass <= 1e-12;
    report(
        3,
        "identity suite",
        pass,
        &format!(
            "{} of {} converged; max |nehari| {worst_nehari:.2e}, max |pohozaev| {worst_poh:.2e} (tol {poh_tol:.0e}), max mass error {worst_mass:.1e}{}",
            results.len() - unconverged.len(),
            results.len(),
            if unconverged.is_empty() { String::new() } else { format!("; not converged: {}", unconverged.join(", ")) }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_curve_structure() {
    let g = grid(1);
    let model = bundled("gaussian_well.json");
    let curve = well_curve();
    let free = potential_free_scan(&well_masses(), &model, &g, &SolverConfig::default(), ScanMode::WarmStart).unwrap();
    let sub = subadditivity_check(curve);
    let rise = curve.max_increase();
    let attained_pairs = sub.pairs.iter().filter(|p| p.attained).count();
    let mut below_free = 0;
    let mut compared = 0;
    for (c, e) in curve.points.iter().zip(&free.points) {
        if e.converged {
            compared += 1;
            if c.C_a < e.C_a {
                below_free += 1;
            }
        }
    }
    let pass = !curve.is_partial()
        && rise <= 1e-8
        && sub.holds()
        && sub.non_strict.is_empty()
        && attained_pairs > 0
        && compared > 0
        && below_free == compared;
    report(
        4,
        "curve structure",
        pass,
        &format!(
            "max rise {rise:.2e}; {} pairs, max gap {:.3e}, {} strict of {attained_pairs} attained; C_a < E_a at {below_free}/{compared} attained E_a points",
            sub.pairs.len(),
            sub.pairs.iter().map(|p| p.gap).fold(f64::NEG_INFINITY, f64::max),
            sub.strict_pairs(),
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_threshold() {
    let g = grid(1);
    let cfg = SolverConfig::default();
    let crit = threshold_a0(&bundled("critical_free.json"), &g, &cfg, 0.5, 6.0).unwrap();
    let fast = threshold_a0(&bundled("superfast_free.json"), &g, &cfg, 1e-3, 1.0).unwrap();
    let well_model = bundled("gaussian_well.json");
    let inf = quadratic_form_infimum(&well_model, &g).unwrap().eigenvalue;
    let well = threshold_a0(&well_model, &g, &cfg, 1e-3, 1.0).unwrap();
    let pass = !crit.below_bracket
        && crit.lower > 0.0
        && fast.a0 <= 1e-3
        && inf < 0.0
        && well.a0 <= 1e-3;
    report(
        5,
        "threshold",
        pass,
        &format!(
            "finite-limsup a0 = {:.4} in [{:.4}, {:.4}] ({} probes); superfast a0 <= {:.0e} (C = {:.3e}); well infimum {inf:.4}, a0 <= {:.0e} (C = {:.3e})",
            crit.a0,
            crit.lower,
            crit.upper,
            crit.audit.len(),
            fast.upper,
            fast.audit[1].C_a,
            well.upper,
            well.audit[1].C_a
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_coercive_compactness() {
    let g = grid(1);
    let model = bundled("harmonic_cubic.json");
    let cfg = SolverConfig::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for a in [0.1, 1.0, 10.0] {
        let r = minimize(a, &model, &g, &cfg).unwrap();
        let all = r.starts.iter().all(|s| s.outcome == Outcome::Converged);
        let ok = r.converged && all && r.multistart_spread <= 1e-6;
        pass &= ok;
        detail.push(format!("a={a}: C_a = {:.8}, spread {:.1e}, all starts converged: {all}", r.c_a_estimate, r.multistart_spread));
    }
    let lin = bundled("harmonic.json");
    let ev = quadratic_form_infimum(&lin, &g).unwrap().eigenvalue;
    let flow = minimize(1.0, &lin, &g, &cfg).unwrap();
    let ok = (ev - 1.0).abs() <= 1e-3 && (flow.lambda + 1.0).abs() <= 1e-3;
    pass &= ok;
    detail.push(format!("linear limit eigenvalue {ev:.6}, flow -lambda {:.6}", -flow.lambda));
    report(6, "coercive compactness", pass, &detail.join("; "));
    assert!(pass);
}

fn random_bump(g: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> GridFunction {
    let k = rng.gen_range(1..=3);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(0.2..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.5..1.5)))
        .collect();
    let a = rng.gen_range(1.0..5.0);
    GridFunction::from_fn(g.clone(), |r| {
        // even in r, so the profile is smooth through the origin
        let bump = |c: f64, m: f64, s: f64, x: f64| c * (-(x - m) * (x - m) / (2.0 * s * s)).exp();
        bumps.iter().map(|&(c, m, s)| bump(c, m, s, r) + bump(c, m, s, -r)).sum()
    })
    .normalized_to(a)
    .unwrap()
}

#[test]
fn criterion_7_fiber_geometry() {
    let g = grid(1);
    let model = bundled("gaussian_well.json");
    let v_inf = model.potential.v_inf();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut tested, mut good, mut drawn) = (0, 0, 0);
    let (mut worst_d, mut worst_p) = (0.0f64, 0.0f64);
    while tested < 50 && drawn < 10_000 {
        drawn += 1;
        let u = random_bump(&g, &mut rng);
        let a = mass(&u);
        if evaluate(&u, &model).unwrap().J >= 0.5 * v_inf * a {
            continue;
        }
        tested += 1;
        let Ok(fm) = fiber_minimize(&u, &model) else { continue };
        let Ok(ut) = fiber_map(&u, fm.t0) else { continue };
        let p = pohozaev_residual(&ut, &model).unwrap().abs();
        worst_d = worst_d.max(fm.derivative.abs());
        worst_p = worst_p.max(p);
        if fm.derivative.abs() <= 1e-6 && p <= 1e-3 {
            good += 1;
        }
    }
    let pass = tested == 50 && good == 50;
    report(
        7,
        "fiber geometry",
        pass,
        &format!("{good}/{tested} profiles ({drawn} drawn); max |dJ/dt| {worst_d:.2e}, max |P(u_t0)| {worst_p:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_8_multiplier_sign() {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (name, model, r) in matrix_results() {
        if model.potential.is_coercive() || !model.classify_g().unwrap().g5 {
            continue;
        }
        if r.converged && r.c_a_normalized < 0.0 {
            checked += 1;
            if r.lambda_normalized.is_nan() || r.lambda_normalized <= 0.0 {
                bad.push(name.clone());
            }
        }
    }
    for p in &well_curve().points {
        if p.converged && p.C_a_normalized < 0.0 {
            checked += 1;
            if p.lambda_normalized.is_nan() || p.lambda_normalized <= 0.0 {
                bad.push(format!("gaussian_well scan a={}", p.a));
            }
        }
    }
    let pass = checked > 0 && bad.is_empty();
    report(
        8,
        "multiplier sign",
        pass,
        &format!("{checked} attained minimizers with C_a < 0; lambda <= 0 at: [{}]", bad.join(", ")),
    );
    assert!(pass);
}

#[test]
fn criterion_9_refinement_order() {
    let model = bundled("power3_free.json");
    let cfg = SolverConfig { starts: 1, ..Default::default() };
    let exact = -2.0 / 3.0;
    let c = |n: usize| {
        let g = Arc::new(RadialGrid::new(1, R, n).unwrap());
        let r = minimize(4.0, &model, &g, &cfg).unwrap();
        assert!(r.converged);
        r.c_a_estimate
    };
    let (c1, c2, c4) = (c(N_NODES), c(2 * N_NODES), c(4 * N_NODES));
    let order_exact = ((c1 - exact) / (c2 - exact)).abs().log2();
    let order_three = ((c1 - c2) / (c2 - c4)).abs().log2();
    let pass = (1.8..=2.2).contains(&order_exact) && (1.8..=2.2).contains(&order_three);
    report(
        9,
        "refinement",
        pass,
        &format!(
            "C_4 at n={N_NODES}: {c1:.10}, 2n: {c2:.10}, 4n: {c4:.10}; order vs exact {order_exact:.3}, three-grid order {order_three:.3}"
        ),
    );
    assert!(pass);
}
