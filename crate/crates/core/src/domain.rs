//! Physical model: the nonlinearity `g`, the radial potential `V`, and
//! classifiers that decide the structural hypotheses on both.
//!
//! Nonlinearities are power sums `g(s) = Σ c_i |s|^{σ_i} s` with positive
//! coefficients, so every limit the classifiers need is decided exactly from
//! the exponents. Potentials are radial; their classification is sampled on a
//! grid.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discretization::RadialGrid;
use crate::error::{Error, Result};

/// Exponents closer than this to `4/N` are treated as mass-critical.
const CRITICAL_EPS: f64 = 1e-12;

/// Minimum number of rows in a tabulated potential.
pub const MIN_TABLE_SAMPLES: usize = 8;

/// Tolerance for the declared tail of a tabulated potential.
pub const TABLE_TAIL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    PowerSum,
    Zero,
}

/// `g(s) = Σ coef_i |s|^{σ_i} s` together with its antiderivative
/// `G(s) = Σ coef_i |s|^{σ_i+2} / (σ_i+2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    terms: Vec<PowerTerm>,
    dim_hint: usize,
}

/// `a^σ` for `a ≥ 0`, exact for the common small exponents.
fn pow_abs(a: f64, sigma: f64) -> f64 {
    if sigma == 2.0 {
        a * a
    } else if sigma == 1.0 {
        a
    } else if sigma == 4.0 {
        (a * a) * (a * a)
    } else if sigma == 0.5 {
        a.sqrt()
    } else {
        a.powf(sigma)
    }
}

impl Nonlinearity {
    pub fn power_sum(terms: Vec<PowerTerm>, dim: usize) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("power_sum needs at least one term".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        for t in &terms {
            if !(t.sigma > 0.0) || !t.sigma.is_finite() {
                return Err(Error::InvalidModel(format!("sigma must be > 0, got {}", t.sigma)));
            }
            if !(t.coef > 0.0) || !t.coef.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "coefficients must be positive, got {}",
                    t.coef
                )));
            }
            if dim >= 3 && t.sigma >= 4.0 / (dim as f64 - 2.0) {
                return Err(Error::InvalidModel(format!(
                    "sigma = {} is not Sobolev-subcritical in N = {}",
                    t.sigma, dim
                )));
            }
        }
        Ok(Self {
            kind: NonlinearityKind::PowerSum,
            terms,
            dim_hint: dim,
        })
    }

    pub fn power(coef: f64, sigma: f64, dim: usize) -> Result<Self> {
        Self::power_sum(vec![PowerTerm { coef, sigma }], dim)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            terms: Vec::new(),
            dim_hint: dim,
        }
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn dim_hint(&self) -> usize {
        self.dim_hint
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NonlinearityKind::Zero
    }

    pub fn g(&self, s: f64) -> f64 {
        let a = s.abs();
        self.terms.iter().map(|t| t.coef * pow_abs(a, t.sigma) * s).sum()
    }

    #[allow(non_snake_case)]
    pub fn G(&self, s: f64) -> f64 {
        self.g_and_G(s).1
    }

    /// `(g(s), G(s))` with one power evaluation per term.
    #[allow(non_snake_case)]
    pub fn g_and_G(&self, s: f64) -> (f64, f64) {
        let a = s.abs();
        let mut g = 0.0;
        let mut big = 0.0;
        for t in &self.terms {
            let q = t.coef * pow_abs(a, t.sigma);
            g += q * s;
            big += q * a * a / (t.sigma + 2.0);
        }
        (g, big)
    }

    /// `g(s)/s` evaluated without dividing, so it is finite at `s = 0`.
    pub fn g_over_s(&self, s: f64) -> f64 {
        let a = s.abs();
        self.terms.iter().map(|t| t.coef * pow_abs(a, t.sigma)).sum()
    }

    pub fn min_sigma(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.sigma).reduce(f64::min)
    }

    pub fn max_sigma(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.sigma).reduce(f64::max)
    }

    /// Same exponents, every coefficient multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|t| PowerTerm {
                coef: t.coef * factor,
                sigma: t.sigma,
            })
            .collect();
        Self::power_sum(terms, self.dim_hint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallSRegime {
    /// `g(s)/|s|^{1+4/N} → ∞` as `s → 0`.
    Superfast,
    /// `limsup g(s)/|s|^{1+4/N} < ∞` as `s → 0`.
    FiniteLimsup,
    /// Not decidable from the model; never produced for power sums.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GClassification {
    pub g1: bool,
    pub g2: bool,
    pub g3: bool,
    pub g4: bool,
    pub g5: bool,
    /// Largest `α` with `g(s)s ≥ αG(s)`; `None` when `g ≡ 0` (any `α` works).
    pub alpha: Option<f64>,
    pub small_s_regime: SmallSRegime,
    pub mass_critical_exponent: f64,
}

/// Decide the growth hypotheses on `g` for dimension `dim`.
pub fn classify_g(model: &Nonlinearity, dim: usize) -> Result<GClassification> {
    if dim == 0 {
        return Err(Error::InvalidModel("dimension must be positive".into()));
    }
    let critical = 4.0 / dim as f64;
    if model.is_zero() {
        return Ok(GClassification {
            g1: true,
            g2: true,
            g3: true,
            g4: false,
            g5: true,
            alpha: None,
            small_s_regime: SmallSRegime::FiniteLimsup,
            mass_critical_exponent: critical,
        });
    }
    if model.terms.is_empty() {
        return Err(Error::InvalidModel("power_sum needs at least one term".into()));
    }
    if let Some(t) = model.terms.iter().find(|t| !(t.sigma > 0.0)) {
        return Err(Error::InvalidModel(format!("sigma must be > 0, got {}", t.sigma)));
    }
    let min_sigma = model.min_sigma().unwrap_or(0.0);
    let max_sigma = model.max_sigma().unwrap_or(0.0);

    // g(s)/|s|^{1+4/N} ~ c |s|^{σ_min - 4/N} as s → 0.
    let small_s_regime = if min_sigma < critical - CRITICAL_EPS {
        SmallSRegime::Superfast
    } else {
        SmallSRegime::FiniteLimsup
    };

    Ok(GClassification {
        g1: true,
        g2: true,
        g3: max_sigma < critical - CRITICAL_EPS,
        g4: model.terms.iter().all(|t| t.coef > 0.0),
        g5: true,
        alpha: Some(2.0 + min_sigma),
        small_s_regime,
        mass_critical_exponent: critical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    Harmonic,
    GaussianWell,
    PowerCoercive,
    Tabulated,
}

/// Tabulated radial potential, linearly interpolated in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    r: Vec<f64>,
    v: Vec<f64>,
    v_inf: f64,
    tail_spread: f64,
}

impl TabulatedPotential {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() {
            return Err(Error::InvalidModel("r and V columns differ in length".into()));
        }
        if r.len() < MIN_TABLE_SAMPLES {
            return Err(Error::InvalidModel(format!(
                "tabulated potential needs at least {} samples, got {}",
                MIN_TABLE_SAMPLES,
                r.len()
            )));
        }
        if r[0] != 0.0 {
            return Err(Error::InvalidModel("tabulated r must start at 0".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("tabulated r must be strictly increasing".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("tabulated V must be finite".into()));
        }
        let tail_len = (r.len() / 10).max(1);
        let tail = &v[v.len() - tail_len..];
        let v_inf = tail.iter().sum::<f64>() / tail_len as f64;
        let tail_spread = tail.iter().map(|x| (x - v_inf).abs()).fold(0.0, f64::max);
        Ok(Self {
            r,
            v,
            v_inf,
            tail_spread,
        })
    }

    /// Read a CSV with header `r,V`.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["r", "V"] {
            return Err(Error::Csv(format!(
                "{}: expected header \"r,V\", got {:?}",
                path.display(),
                cols
            )));
        }
        let mut r = Vec::new();
        let mut v = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Csv("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(e.to_string()))
            };
            r.push(parse(0)?);
            v.push(parse(1)?);
        }
        Self::new(r, v)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn tail_ok(&self) -> bool {
        self.tail_spread <= TABLE_TAIL_TOL
            && (self.v.last().unwrap() - self.v_inf).abs() <= TABLE_TAIL_TOL
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.r, &self.v)
    }

    fn interval(&self, r: f64) -> Option<usize> {
        if r >= self.r_max() {
            return None;
        }
        Some(self.r.partition_point(|&x| x <= r).saturating_sub(1))
    }

    fn value(&self, r: f64) -> f64 {
        match self.interval(r) {
            None => *self.v.last().unwrap(),
            Some(k) => {
                let s = (r - self.r[k]) / (self.r[k + 1] - self.r[k]);
                self.v[k] + s * (self.v[k + 1] - self.v[k])
            }
        }
    }

    fn dv_dot_x(&self, r: f64) -> f64 {
        match self.interval(r) {
            None => 0.0,
            Some(k) => r * (self.v[k + 1] - self.v[k]) / (self.r[k + 1] - self.r[k]),
        }
    }
}

/// Radial potential `V(|x|)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// `V = k r²`.
    Harmonic { k: f64 },
    /// `V = -d exp(-r²/w²)`.
    GaussianWell { depth: f64, width: f64 },
    /// `V = k r^q`.
    PowerCoercive { k: f64, q: f64 },
    Tabulated(TabulatedPotential),
}

impl Potential {
    /// Build a built-in potential from its kind and parameter list.
    pub fn from_params(kind: PotentialKind, params: &[f64]) -> Result<Self> {
        let positive = |x: f64, what: &str| -> Result<f64> {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::InvalidModel(format!("{what} must be positive, got {x}")))
            }
        };
        let p = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        match kind {
            PotentialKind::Zero => Ok(Potential::Zero),
            PotentialKind::Harmonic => Ok(Potential::Harmonic {
                k: positive(p(0, 1.0), "harmonic k")?,
            }),
            PotentialKind::GaussianWell => Ok(Potential::GaussianWell {
                depth: positive(p(0, 1.0), "well depth")?,
                width: positive(p(1, 1.0), "well width")?,
            }),
            PotentialKind::PowerCoercive => Ok(Potential::PowerCoercive {
                k: positive(p(0, 1.0), "power k")?,
                q: positive(p(1, 2.0), "power q")?,
            }),
            PotentialKind::Tabulated => Err(Error::InvalidModel(
                "tabulated potential needs a table, not params".into(),
            )),
        }
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Zero => PotentialKind::Zero,
            Potential::Harmonic { .. } => PotentialKind::Harmonic,
            Potential::GaussianWell { .. } => PotentialKind::GaussianWell,
            Potential::PowerCoercive { .. } => PotentialKind::PowerCoercive,
            Potential::Tabulated(_) => PotentialKind::Tabulated,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Potential::Zero | Potential::Tabulated(_) => Vec::new(),
            Potential::Harmonic { k } => vec![*k],
            Potential::GaussianWell { depth, width } => vec![*depth, *width],
            Potential::PowerCoercive { k, q } => vec![*k, *q],
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { k } => k * r * r,
            Potential::GaussianWell { depth, width } => {
                let s = r / width;
                -depth * (-s * s).exp()
            }
            Potential::PowerCoercive { k, q } => k * r.powf(*q),
            Potential::Tabulated(t) => t.value(r),
        }
    }

    /// `⟨∇V(x), x⟩` at `|x| = r`, i.e. `r V'(r)`.
    pub fn dv_dot_x(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { k } => 2.0 * k * r * r,
            Potential::GaussianWell { depth, width } => {
                let s = r / width;
                2.0 * depth * s * s * (-s * s).exp()
            }
            Potential::PowerCoercive { k, q } => q * k * r.powf(*q),
            Potential::Tabulated(t) => t.dv_dot_x(r),
        }
    }

    /// `V_∞`; `f64::INFINITY` for coercive potentials.
    pub fn v_inf(&self) -> f64 {
        match self {
            Potential::Zero | Potential::GaussianWell { .. } => 0.0,
            Potential::Harmonic { .. } | Potential::PowerCoercive { .. } => f64::INFINITY,
            Potential::Tabulated(t) => t.v_inf,
        }
    }

    /// Global minimum `c_ℓ`.
    pub fn c_ell(&self) -> f64 {
        match self {
            Potential::Zero | Potential::Harmonic { .. } | Potential::PowerCoercive { .. } => 0.0,
            Potential::GaussianWell { depth, .. } => -depth,
            Potential::Tabulated(t) => t.v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_coercive(&self) -> bool {
        self.v_inf().is_infinite()
    }

    /// Whether `⟨∇V, x⟩` comes from a table rather than a closed form.
    pub fn is_tabulated(&self) -> bool {
        matches!(self, Potential::Tabulated(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VClassification {
    pub v1: bool,
    pub v2: bool,
    pub decay_of_dvx: bool,
    pub coercive: bool,
    /// `None` encodes `V_∞ = +∞`.
    pub v_inf: Option<f64>,
    pub c_ell: f64,
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub max_tail_dvx: f64,
}

/// Tolerances for potential classification.
#[derive(Debug, Clone, Copy)]
pub struct VClassifyTolerances {
    pub dvx_decay: f64,
    pub bounds: f64,
}

impl Default for VClassifyTolerances {
    fn default() -> Self {
        Self {
            dvx_decay: 1e-6,
            bounds: 1e-9,
        }
    }
}

pub fn classify_v(model: &Potential, grid: &RadialGrid) -> Result<VClassification> {
    classify_v_with(model, grid, VClassifyTolerances::default())
}

pub fn classify_v_with(
    model: &Potential,
    grid: &RadialGrid,
    tol: VClassifyTolerances,
) -> Result<VClassification> {
    if let Potential::Tabulated(t) = model {
        if t.len() < MIN_TABLE_SAMPLES {
            return Err(Error::InvalidModel("tabulated potential has too few samples".into()));
        }
    }
    let nodes = grid.nodes();
    let values: Vec<f64> = nodes.iter().map(|&r| model.value(r)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidModel("potential is not finite on the grid".into()));
    }
    let sampled_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sampled_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v0 = model.value(0.0);
    let c_ell = model.c_ell();
    let v_inf = model.v_inf();
    let coercive = model.is_coercive();

    let tail_start = nodes.len() - (nodes.len() / 10).max(1);
    let max_tail_dvx = nodes[tail_start..]
        .iter()
        .map(|&r| model.dv_dot_x(r).abs())
        .fold(0.0, f64::max);

    let v1 = if coercive {
        // The sampled tail must be the running maximum and still increasing.
        let last = values[values.len() - 1];
        last >= sampled_max - tol.bounds && last > values[tail_start]
    } else {
        let bounded = sampled_max <= v_inf + tol.bounds;
        let tail_ok = match model {
            Potential::Tabulated(t) => t.tail_ok(),
            _ => (values[values.len() - 1] - v_inf).abs() <= TABLE_TAIL_TOL,
        };
        bounded && tail_ok
    };
    let v2 = (v0 - c_ell).abs() <= tol.bounds && sampled_min >= c_ell - tol.bounds;

    Ok(VClassification {
        v1,
        v2,
        decay_of_dvx: max_tail_dvx <= tol.dvx_decay,
        coercive,
        v_inf: if coercive { None } else { Some(v_inf) },
        c_ell,
        sampled_min,
        sampled_max,
        max_tail_dvx,
    })
}

/// A full model: spatial dimension, nonlinearity and potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub dim: usize,
    pub nonlinearity: Nonlinearity,
    pub potential: Potential,
}

impl Model {
    pub fn new(dim: usize, nonlinearity: Nonlinearity, potential: Potential) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidModel(format!(
                "radial solver supports N in 1..=3, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            nonlinearity,
            potential,
        })
    }

    /// Same model with `V := 0`.
    pub fn without_potential(&self) -> Self {
        Self {
            dim: self.dim,
            nonlinearity: self.nonlinearity.clone(),
            potential: Potential::Zero,
        }
    }

    pub fn with_nonlinearity(&self, nonlinearity: Nonlinearity) -> Self {
        Self {
            dim: self.dim,
            nonlinearity,
            potential: self.potential.clone(),
        }
    }

    pub fn classify_g(&self) -> Result<GClassification> {
        classify_g(&self.nonlinearity, self.dim)
    }

    /// Parse the JSON model schema. Relative table paths resolve against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.into_model(base_dir)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.parent())
    }

    pub fn to_spec(&self) -> ModelSpec {
        let (kind, params, table) = match &self.potential {
            Potential::Tabulated(t) => (
                PotentialKind::Tabulated,
                Vec::new(),
                Some(TableSpec {
                    r: t.r.clone(),
                    v: t.v.clone(),
                }),
            ),
            p => (p.kind(), p.params(), None),
        };
        ModelSpec {
            dim: self.dim,
            nonlinearity: NonlinearitySpec {
                kind: self.nonlinearity.kind(),
                terms: self.nonlinearity.terms().to_vec(),
            },
            potential: PotentialSpec {
                kind,
                params,
                path: None,
                table,
            },
        }
    }

    /// Content hash of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(&self.to_spec()).expect("model spec serializes");
        sha256_hex(json.as_bytes())
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// On-disk model schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "N")]
    pub dim: usize,
    pub nonlinearity: NonlinearitySpec,
    pub potential: PotentialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    #[serde(default)]
    pub terms: Vec<PowerTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default)]
    pub params: Vec<f64>,
    /// CSV file with header `r,V` (tabulated kind).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Inline table (tabulated kind); written when a model is re-serialized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub r: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
}

impl ModelSpec {
    pub fn into_model(self, base_dir: Option<&Path>) -> Result<Model> {
        let nonlinearity = match self.nonlinearity.kind {
            NonlinearityKind::Zero => {
                if !self.nonlinearity.terms.is_empty() {
                    return Err(Error::InvalidModel("kind \"zero\" takes no terms".into()));
                }
                Nonlinearity::zero(self.dim)
            }
            NonlinearityKind::PowerSum => Nonlinearity::power_sum(self.nonlinearity.terms, self.dim)?,
        };
        let potential = match self.potential.kind {
            PotentialKind::Tabulated => {
                let table = match (self.potential.table, self.potential.path) {
                    (Some(t), _) => TabulatedPotential::new(t.r, t.v)?,
                    (None, Some(p)) => {
                        let path = match base_dir {
                            Some(dir) if Path::new(&p).is_relative() => dir.join(p),
                            _ => Path::new(&p).to_path_buf(),
                        };
                        TabulatedPotential::from_csv_path(&path)?
                    }
                    (None, None) => {
                        return Err(Error::InvalidModel(
                            "tabulated potential needs \"path\" or \"table\"".into(),
                        ))
                    }
                };
                Potential::Tabulated(table)
            }
            kind => Potential::from_params(kind, &self.potential.params)?,
        };
        Model::new(self.dim, nonlinearity, potential)
    }
}
