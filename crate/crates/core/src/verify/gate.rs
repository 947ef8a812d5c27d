use serde::Serialize;

/// Tolerance of the α + β ∈ ℕ test.
pub const INTEGER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "parameter", rename_all = "snake_case")]
pub enum GateViolation {
    /// α ∉ (1/2, 2).
    Alpha { alpha: f64 },
    /// γ ∉ ((1 − α)/α ∨ 0, 1].
    Gamma { gamma: f64, lower: f64 },
    /// β ∉ ((1 − α) ∨ 0, (α ∧ 1)γ).
    Beta { beta: f64, lower: f64, upper: f64 },
    /// α + β is an integer.
    IntegerOrder { order: f64 },
}

impl std::fmt::Display for GateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GateViolation::Alpha { alpha } => write!(f, "α = {alpha} must lie in (1/2, 2)"),
            GateViolation::Gamma { gamma, lower } => write!(f, "γ = {gamma} must lie in ({lower}, 1]"),
            GateViolation::Beta { beta, lower, upper } => write!(f, "β = {beta} must lie in ({lower}, {upper})"),
            GateViolation::IntegerOrder { order } => write!(f, "α + β = {order} must not be an integer"),
        }
    }
}

/// Outcome of [`check_parameter_gate`]; valid iff there are no violations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateDecision {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub violations: Vec<GateViolation>,
}

impl GateDecision {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.is_valid() {
            return "valid".into();
        }
        self.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
    }
}

/// Checks α ∈ (1/2, 2), γ ∈ ((1−α)/α ∨ 0, 1], β ∈ ((1−α) ∨ 0, (α∧1)γ) and
/// α + β ∉ ℕ, collecting every violation. NaN inputs fail every condition
/// they enter.
pub fn check_parameter_gate(alpha: f64, beta: f64, gamma: f64) -> GateDecision {
    let mut violations = Vec::new();
    if !(alpha > 0.5 && alpha < 2.0) {
        violations.push(GateViolation::Alpha { alpha });
    }
    let gamma_lower = ((1.0 - alpha) / alpha).max(0.0);
    if !(gamma > gamma_lower && gamma <= 1.0) {
        violations.push(GateViolation::Gamma { gamma, lower: gamma_lower });
    }
    let beta_lower = (1.0 - alpha).max(0.0);
    let beta_upper = alpha.min(1.0) * gamma;
    if !(beta > beta_lower && beta < beta_upper) {
        violations.push(GateViolation::Beta { beta, lower: beta_lower, upper: beta_upper });
    }
    let order = alpha + beta;
    if !order.is_finite() || (order - order.round()).abs() <= INTEGER_TOLERANCE {
        violations.push(GateViolation::IntegerOrder { order });
    }
    GateDecision { alpha, beta, gamma, violations }
}
