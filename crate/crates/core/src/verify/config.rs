//! Experiment configuration (TOML). Unknown keys are rejected everywhere.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::kernel::{Estimator, SmallJumpMode};
use crate::levy::{AtomDocument, MeasureDocument, StableLevyMeasure};
use crate::operator::CoefficientField;
use crate::solver::{SolveConfig, SolveScheme};
use crate::verify::gate::{check_parameter_gate, GateDecision};

/// Key reference printed by the command-line help.
pub const SCHEMA: &str = "\
top level:
  name = string                      report name (default \"experiment\")
  seed = integer ≥ 0                 RNG seed (default 0)
[params]
  alpha = real in (0, 2)             stability index
  beta = real ≥ 0                    Hölder index of f (default 0)
  gamma = real in (0, 1]             Hölder index of σ (default 1)
[measure]
  kind = standard | cylindrical | uniform | atomic
  dim = 1 | 2
  alpha = real in (0, 2)             defaults to params.alpha
  total_mass = real > 0              uniform only
  atoms = [{ theta = [x, y], weight = w }, …]   atomic only
[coefficients]                       catalog expressions
  kappa = one | const(c) | osc(eps) | angular(eps) | shell(eps)
  sigma = identity | scalar(c) | diag(a, b) | rotation(angle) | diag_cos(eps) | diag_abs_sin(eps, gamma) | time_linear(rate)
  drift = zero | const(v1, v2) | linear | sin | holder(beta)
  source = zero | const(c) | cos(k) | cos_time(k, w) | weierstrass(s, jmax) | clamp_identity(c)
[grid]
  n = power of two ≥ 2               points per axis
  half_period = real > 0             domain [−L, L)^d (default π)
[solver]
  t_final = real > 0
  dt = real > 0
  scheme = duhamel_spectral | splitting   (default splitting)
  cfl_safety = real in (0, 1]        (default 0.9)
  integrating_factor = bool          (default true)
  nonlocal = bool                    (default true)
  checkpoints = integer ≥ 1          (default 4)
  window = real > 0                  trust window (default L/2)
[schauder]
  ladder = [n, …]                    refinement ladder (default [128, 256, 512] in d = 1, [64, 128, 256] in d = 2)
  scales = [λ, …]                    forcing scales for the linearity check (default [0.5, 10])
  stability_factor = real ≥ 1        (default 2)
  linearity_tolerance = real > 0     (default 1e-8)
[cru]
  betas = [β, …]                     (default [params.beta])
  t = real > 0                       end time (default 1)
  samples = integer ≥ 10000          paths per s-node (default 100000)
  nodes = integer ≥ 2                geometric τ = t − s nodes (default 32)
  depth = real > 0                   smallest τ is t·2^(−depth) (default 16)
  jump_cutoff_factor = real > 0      ε = factor·τ^(1/α) (default 0.05)
  half_period = real > 0             density grid (default 4π)
  n = power of two                   density grid points (default 8192)
  threshold = real ≥ 0               ECF threshold in units of 1/√n (default 4)
  blocks = [j_lo, j_hi]              fitted blocks (default [2, 6])
  bootstrap = integer ≥ 0            bootstrap replicates (default 20)
  slope_tolerance = real > 0         (default 0.15)
  small_jump_mode = drop | gaussian  (default by α)
[kernel]
  s = real, t = real > s             time window (default 0, 1)
  samples = integer ≥ 1000           (default 100000)
  jump_cutoff = real in (0, 1)       (default 0.05)
  time_steps = integer ≥ 1           (default 1)
  small_jump_mode = drop | gaussian
  estimator = ecf | kde              (default ecf)
  bandwidth = real > 0               taper b (ecf) or kernel width h (kde)
  threshold = real ≥ 0               (default 0)
  half_period = real > 0, n = power of two   density grid (default 64, 4096)
  min_coverage = real in [0, 1]      (default 0.999)
[symbol]
  frequencies = [[ξ1, ξ2], …]        (default [[1, 0]])
[lp]
  function = source catalog expression
  exponents = [s, …]                 Hölder/Besov indices (default [0.5])
[apply]
  function = source catalog expression
  t = real                           (default 0)
[regularity]
  case_count = integer ≥ 100         (default 200)
[mollify]
  ns = [n, …]                        (default [4, 8, 16, 32])
[output]
  dir = path                         (default \"out\")
";

/// The top-level keys and the named sections of [`SCHEMA`], in schema order.
pub fn schema_sections(sections: &[&str]) -> String {
    let mut out = String::new();
    let mut keep = true;
    for line in SCHEMA.lines() {
        if line == "top level:" {
            keep = true;
        } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            keep = sections.contains(&name);
        }
        if keep {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub total_mass: Option<f64>,
    #[serde(default)]
    pub atoms: Vec<AtomDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(default = "one_name")]
    pub kappa: String,
    #[serde(default = "identity_name")]
    pub sigma: String,
    #[serde(default = "zero_name")]
    pub drift: String,
    #[serde(default = "zero_name")]
    pub source: String,
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self { kappa: one_name(), sigma: identity_name(), drift: zero_name(), source: zero_name() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    #[serde(default = "pi")]
    pub half_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "splitting")]
    pub scheme: SolveScheme,
    #[serde(default = "cfl")]
    pub cfl_safety: f64,
    #[serde(default = "yes")]
    pub integrating_factor: bool,
    #[serde(default = "yes")]
    pub nonlocal: bool,
    #[serde(default = "four")]
    pub checkpoints: usize,
    #[serde(default)]
    pub window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SchauderSpec {
    #[serde(default)]
    pub ladder: Option<Vec<usize>>,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub stability_factor: Option<f64>,
    #[serde(default)]
    pub linearity_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CruSpec {
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "hundred_thousand")]
    pub samples: usize,
    #[serde(default = "thirty_two")]
    pub nodes: usize,
    #[serde(default = "sixteen")]
    pub depth: f64,
    #[serde(default = "cutoff_factor")]
    pub jump_cutoff_factor: f64,
    #[serde(default = "four_pi")]
    pub half_period: f64,
    #[serde(default = "cru_points")]
    pub n: usize,
    #[serde(default = "four_f")]
    pub threshold: f64,
    #[serde(default = "blocks")]
    pub blocks: [usize; 2],
    #[serde(default = "twenty")]
    pub bootstrap: usize,
    #[serde(default = "slope_tol")]
    pub slope_tolerance: f64,
    #[serde(default)]
    pub small_jump_mode: Option<SmallJumpMode>,
}

impl Default for CruSpec {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default)]
    pub s: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "hundred_thousand")]
    pub samples: usize,
    #[serde(default = "cutoff_factor")]
    pub jump_cutoff: f64,
    #[serde(default = "one_usize")]
    pub time_steps: usize,
    #[serde(default)]
    pub small_jump_mode: Option<SmallJumpMode>,
    #[serde(default = "ecf")]
    pub estimator: Estimator,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "sixty_four")]
    pub half_period: f64,
    #[serde(default = "kernel_points")]
    pub n: usize,
    #[serde(default = "coverage")]
    pub min_coverage: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    #[serde(default = "unit_frequency")]
    pub frequencies: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSpec {
    pub function: String,
    #[serde(default = "half")]
    pub exponents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplySpec {
    pub function: String,
    #[serde(default)]
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularitySpec {
    #[serde(default = "two_hundred")]
    pub case_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifySpec {
    #[serde(default = "mollify_ns")]
    pub ns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "out_dir")]
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: out_dir() }
    }
}

/// One configuration format for every experiment and subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "experiment_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Option<Params>,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub solver: Option<SolverSpec>,
    #[serde(default)]
    pub schauder: Option<SchauderSpec>,
    #[serde(default)]
    pub cru: Option<CruSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub symbol: Option<SymbolSpec>,
    #[serde(default)]
    pub lp: Option<LpSpec>,
    #[serde(default)]
    pub apply: Option<ApplySpec>,
    #[serde(default)]
    pub regularity: Option<RegularitySpec>,
    #[serde(default)]
    pub mollify: Option<MollifySpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }

    fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| Error::config(format!("config `{}` needs a [{name}] section", self.name)))
    }

    pub fn params(&self) -> Result<&Params> {
        self.section(&self.params, "params")
    }

    pub fn alpha(&self) -> Result<f64> {
        if let Some(a) = self.measure.as_ref().and_then(|m| m.alpha) {
            return Ok(a);
        }
        Ok(self.params()?.alpha)
    }

    pub fn gate(&self) -> Result<GateDecision> {
        let p = self.params()?;
        Ok(check_parameter_gate(p.alpha, p.beta, p.gamma))
    }

    pub fn measure(&self) -> Result<StableLevyMeasure> {
        let m = self.section(&self.measure, "measure")?;
        let alpha = self.alpha()?;
        match m.kind.as_str() {
            "standard" => StableLevyMeasure::standard(m.dim, alpha),
            "cylindrical" => StableLevyMeasure::cylindrical(m.dim, alpha),
            "uniform" | "atomic" => StableLevyMeasure::from_document(&MeasureDocument {
                alpha,
                dimension: m.dim,
                kind: m.kind.clone(),
                atoms: m.atoms.clone(),
                total_mass: m.total_mass,
            }),
            other => Err(Error::config(format!("unknown measure kind `{other}`"))),
        }
        .map_err(|e| Error::config(format!("[measure]: {e}")))
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.section(&self.measure, "measure")?.dim)
    }

    pub fn grid_with(&self, n: usize) -> Result<TorusGrid> {
        let g = self.section(&self.grid, "grid")?;
        TorusGrid::new(self.dim()?, g.half_period, n)
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        self.grid_with(self.section(&self.grid, "grid")?.n)
    }

    pub fn coefficients(&self) -> Result<CoefficientField> {
        let c = &self.coefficients;
        let field = CoefficientField::from_catalog(self.dim()?, &c.kappa, &c.sigma, &c.drift, &c.source)
            .map_err(|e| Error::config(format!("[coefficients]: {e}")))?;
        Ok(match &self.params {
            Some(p) => field.with_regularity(p.beta, p.gamma),
            None => field,
        })
    }

    pub fn solve_config(&self, grid: TorusGrid) -> Result<SolveConfig> {
        let s = self.section(&self.solver, "solver")?;
        let mut cfg = SolveConfig::new(grid, self.measure()?, self.coefficients()?, s.t_final, s.dt, s.scheme)?;
        cfg.cfl_safety = s.cfl_safety;
        cfg.integrating_factor = s.integrating_factor;
        cfg.nonlocal = s.nonlocal;
        cfg.checkpoints = s.checkpoints;
        cfg.window = s.window;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn four() -> usize {
    4
}
fn four_f() -> f64 {
    4.0
}
fn yes() -> bool {
    true
}
fn pi() -> f64 {
    PI
}
fn four_pi() -> f64 {
    4.0 * PI
}
fn cfl() -> f64 {
    0.9
}
fn splitting() -> SolveScheme {
    SolveScheme::Splitting
}
fn one_name() -> String {
    "one".into()
}
fn identity_name() -> String {
    "identity".into()
}
fn zero_name() -> String {
    "zero".into()
}
fn experiment_name() -> String {
    "experiment".into()
}
fn out_dir() -> String {
    "out".into()
}
fn hundred_thousand() -> usize {
    100_000
}
fn thirty_two() -> usize {
    32
}
fn sixteen() -> f64 {
    16.0
}
fn cutoff_factor() -> f64 {
    0.05
}
fn cru_points() -> usize {
    8192
}
fn blocks() -> [usize; 2] {
    [2, 6]
}
fn twenty() -> usize {
    20
}
fn slope_tol() -> f64 {
    0.15
}
fn ecf() -> Estimator {
    Estimator::Ecf
}
fn sixty_four() -> f64 {
    64.0
}
fn kernel_points() -> usize {
    4096
}
fn coverage() -> f64 {
    0.999
}
fn unit_frequency() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}
fn half() -> Vec<f64> {
    vec![0.5]
}
fn two_hundred() -> usize {
    200
}
fn mollify_ns() -> Vec<usize> {
    vec![4, 8, 16, 32]
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUHAMEL: &str = r#"
name = "duhamel_cos"
[params]
alpha = 1.0
beta = 0.5
[measure]
kind = "standard"
dim = 1
[coefficients]
source = "cos(1)"
[grid]
n = 64
[solver]
t_final = 1.0
dt = 0.01
scheme = "duhamel_spectral"
"#;

    #[test]
    fn parses_and_builds() {
        let c = ExperimentConfig::from_toml_str(DUHAMEL).unwrap();
        assert_eq!(c.measure().unwrap().alpha(), 1.0);
        let s = c.solve_config(c.grid().unwrap()).unwrap();
        assert_eq!(s.scheme, SolveScheme::DuhamelSpectral);
        assert_eq!(s.checkpoints, 4);
        assert_eq!(c.coefficients().unwrap().kappa.name, "one");
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = DUHAMEL.replace("dt = 0.01", "dt = 0.01\ndtt = 2");
        assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(Error::Config(_))));
        let bad = format!("{DUHAMEL}\n[typo]\nx = 1\n");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn schema_subsets() {
        let text = schema_sections(&["cru"]);
        assert!(text.starts_with("top level:") && text.contains("[cru]") && text.contains("slope_tolerance"));
        assert!(!text.contains("[kernel]"));
        for key in ["alpha", "kind", "kappa", "half_period", "t_final", "ladder", "case_count", "ns", "dir"] {
            assert!(SCHEMA.contains(&format!("  {key}")), "{key}");
        }
    }

    #[test]
    fn section_defaults() {
        let cru = CruSpec::default();
        assert_eq!((cru.nodes, cru.samples, cru.blocks), (32, 100_000, [2, 6]));
        assert_eq!(KernelSpec::default().estimator, Estimator::Ecf);
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert!(matches!(c.measure(), Err(Error::Config(_))));
    }
}
