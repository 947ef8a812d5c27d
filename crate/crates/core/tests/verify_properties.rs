use proptest::prelude::*;

use stablelab::verify::{check_parameter_gate, run_cru_experiment, run_regularity_suite, run_schauder_experiment, ExperimentConfig};

/// Gate conditions restated as products, avoiding the divisions of the implementation.
fn gate_oracle(alpha: f64, beta: f64, gamma: f64) -> bool {
    let order = alpha + beta;
    alpha > 0.5
        && alpha < 2.0
        && gamma <= 1.0
        && gamma > 0.0
        && alpha * gamma > 1.0 - alpha
        && beta > 0.0
        && beta > 1.0 - alpha
        && beta < alpha.min(1.0) * gamma
        && (order - order.round()).abs() > 1e-9
}

#[test]
fn gate_is_total_on_the_parameter_lattice() {
    let steps = 50;
    let mut valid = 0;
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let alpha = 2.0 * (i as f64 + 0.5) / steps as f64;
                let beta = (j as f64 + 0.5) / steps as f64;
                let gamma = (k as f64 + 1.0) / steps as f64;
                let decision = check_parameter_gate(alpha, beta, gamma);
                assert_eq!(decision.is_valid(), decision.violations.is_empty());
                assert!(!decision.summary().is_empty());
                // skip lattice points sitting on a boundary up to rounding
                let near_edge = (alpha * gamma - (1.0 - alpha)).abs() < 1e-12 || (beta - alpha.min(1.0) * gamma).abs() < 1e-12;
                if !near_edge {
                    assert_eq!(decision.is_valid(), gate_oracle(alpha, beta, gamma), "({alpha}, {beta}, {gamma})");
                }
                valid += decision.is_valid() as usize;
            }
        }
    }
    assert!(valid > 0 && valid < steps * steps * steps);
}

const SMALL_CRU: &str = "[params]\nalpha = 1.5\nbeta = 0.3\n[measure]\nkind = \"standard\"\ndim = 1\n[cru]\nsamples = 10000\nnodes = 6\ndepth = 8\nn = 2048\nbootstrap = 3\n";

const COSINE_SCHAUDER: &str = r#"
[params]
alpha = 1.0
beta = 0.5
[measure]
kind = "standard"
dim = 1
[coefficients]
source = "cos(1)"
[grid]
n = 32
[solver]
t_final = 1.0
dt = 0.01
scheme = "duhamel_spectral"
[schauder]
ladder = [32]
"#;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn gate_never_panics(alpha in prop::num::f64::ANY, beta in prop::num::f64::ANY, gamma in prop::num::f64::ANY) {
        let d = check_parameter_gate(alpha, beta, gamma);
        prop_assert_eq!(d.is_valid(), d.violations.is_empty());
    }

    #[test]
    fn reports_are_reproducible(seed in any::<u64>()) {
        let mut cru = ExperimentConfig::from_toml_str(SMALL_CRU).unwrap();
        cru.seed = seed;
        let (a, b) = (run_cru_experiment(&cru).unwrap(), run_cru_experiment(&cru).unwrap());
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        prop_assert_eq!(&a.tables, &b.tables);
        let (a, b) = (run_regularity_suite(seed, 100).unwrap(), run_regularity_suite(seed, 100).unwrap());
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn schauder_ratio_is_scale_invariant(lambda in 1e-3..1e3f64) {
        let mut config = ExperimentConfig::from_toml_str(COSINE_SCHAUDER).unwrap();
        config.schauder.as_mut().unwrap().scales = Some(vec![lambda]);
        let report = run_schauder_experiment(&config).unwrap();
        let check = report.checks.iter().find(|c| c.name.starts_with("linearity_lambda_")).unwrap();
        prop_assert!(check.value <= 1e-8, "{}", check.value);
    }
}
