//! Study-level behavior on small grids.

use qhdrelax::experiments::{self, tau0_heuristic, ExperimentConfig, RateFit};

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

const SMALL: &str = "n = 32\ndt = 1e-4\nt_final = 0.01\nsamples = 10\n";

const CONSTANT: &str = "[initial]\nprofile = \"constant\"\nvalue = 1.0\n";

const CENTERED: &str = "[eos]\nfamily = \"centered_power\"\nn = 1\nm0 = 1.0\n[doping]\nprofile = \"uniform\"\n";

const BUMP: &str = "[initial]\nprofile = \"cosine_perturbation\"\namplitude = 0.1\n";

#[test]
fn sweep_taus_must_decrease_and_number_three() {
    for taus in ["[0.1, 0.2, 0.05]", "[0.1, 0.1, 0.05]", "[0.2, 0.1]", "[0.2, -0.1, -0.2]"] {
        let text = format!("experiment = \"sweep\"\ntaus = {taus}\n{SMALL}{BUMP}");
        assert!(ExperimentConfig::from_toml(&text).is_err(), "accepted {taus}");
    }
    let ok = format!("experiment = \"sweep\"\ntaus = [0.2, 0.1, 0.05]\n{SMALL}{BUMP}");
    assert!(ExperimentConfig::from_toml(&ok).is_ok());
    let qdd = format!("experiment = \"sweep\"\nsolver = \"qdd\"\ntaus = [0.2, 0.1, 0.05]\n{SMALL}{BUMP}");
    assert!(ExperimentConfig::from_toml(&qdd).is_err());
}

#[test]
fn bad_grid_and_steps_are_rejected() {
    for head in ["n = 7\ndt = 1e-4\nt_final = 0.01\n", "n = 32\ndt = 0.0\nt_final = 0.01\n", "n = 32\ndt = 1e-4\nt_final = -1.0\n"] {
        let text = format!("experiment = \"simulate\"\n{head}{BUMP}");
        assert!(ExperimentConfig::from_toml(&text).is_err(), "accepted {head}");
    }
}

#[test]
fn hash_ignores_output_and_parallelism() {
    let base = format!("experiment = \"simulate\"\n{SMALL}{BUMP}");
    let a = cfg(&base);
    let b = cfg(&format!("output = \"/tmp/elsewhere\"\nparallelism = 4\n{base}"));
    assert_eq!(a.hash().unwrap(), b.hash().unwrap());
    let c = cfg(&base.replace("dt = 1e-4", "dt = 5e-5"));
    assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    assert_eq!(a.hash().unwrap().len(), 64);
}

#[test]
fn tau0_threshold_values() {
    // delta = 1, c1 = 5e-3: the c1 branch is the smallest.
    assert_eq!(tau0_heuristic(5e-3, 0.0, 1.0), 5e-3);
    // Large c1 makes the square-root branch active.
    let c1 = 0.5f64;
    let delta = 1.0 - (2.0f64 * 0.01).sqrt();
    let expected = (c1.sqrt() / 4.0).min((2.0 * c1 * delta / (8.0 + delta)).sqrt());
    assert!((tau0_heuristic(c1, 0.01, 1.0) - expected).abs() < 1e-15);
    // Energy too large for a positive floor.
    assert_eq!(tau0_heuristic(5e-3, 0.5, 1.0), 0.0);
    assert_eq!(tau0_heuristic(5e-3, 2.0, 1.0), 0.0);
}

#[test]
fn rate_fit_recovers_power_laws() {
    let taus = [0.2, 0.1, 0.05, 0.025];
    for (c, p) in [(3.0, 1.0), (3.0, 2.0), (0.7, 1.5)] {
        let errors: Vec<f64> = taus.iter().map(|t: &f64| c * t.powf(p)).collect();
        let fit = RateFit::fit(&taus, &errors).unwrap();
        assert!((fit.slope - p).abs() <= 1e-9, "{} vs {p}", fit.slope);
        assert!((fit.intercept - f64::ln(c)).abs() <= 1e-9);
    }
    assert!(RateFit::fit(&[0.2, 0.1], &[1.0, 0.5]).is_err());
}

#[test]
fn constant_data_layer_has_zero_gap() {
    let out = experiments::run(&cfg(&format!("experiment = \"layer\"\ntau = 0.1\n{SMALL}{CENTERED}{CONSTANT}"))).unwrap();
    let s = &out.summary;
    assert_eq!(s.number("ill_gap_initial").unwrap(), 0.0);
    assert!(s.number("well_gap_max").unwrap() <= 1e-14);
    assert!(s.pass_flags["mass_conserved"]);
}

#[test]
fn constant_data_validate_has_zero_distance() {
    let text = format!(
        "experiment = \"validate\"\ntau = 0.5\n{SMALL}{CENTERED}{CONSTANT}\
         [validate]\nlevels = [{{ n = 16, dt = 2e-4 }}, {{ n = 32, dt = 1e-4 }}]\n"
    );
    let out = experiments::run(&cfg(&text)).unwrap();
    assert!(out.summary.number("finest_distance").unwrap() <= 1e-14);
    assert!(out.summary.pass_flags["distance_within_tol"]);
    assert!(out.summary.pass_flags["polar_identity"]);
}

#[test]
fn constant_data_decay_is_identically_zero() {
    let out = experiments::run(&cfg(&format!("experiment = \"decay\"\ntau = 0.05\n{SMALL}{CENTERED}{CONSTANT}"))).unwrap();
    assert_eq!(out.summary.metrics["identically_zero"], serde_json::Value::Bool(true));
    let lyap = out.file("lyapunov.dat").unwrap();
    for line in lyap.lines().filter(|l| !l.starts_with('#')) {
        let f: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(f.abs() <= 1e-14, "{line}");
    }
}

#[test]
fn ill_prepared_gap_starts_at_limiting_current() {
    let out = experiments::run(&cfg(&format!("experiment = \"layer\"\ntau = 0.1\n{SMALL}{CENTERED}{BUMP}"))).unwrap();
    let s = &out.summary;
    let g0 = s.number("ill_gap_initial").unwrap();
    let j0 = s.number("constitutive_current_initial_norm").unwrap();
    assert!(j0 > 0.0);
    assert!((g0 - j0).abs() <= 1e-12 * j0);
}

#[test]
fn large_tau_decay_reports_without_asserting() {
    let out = experiments::run(&cfg(&format!("experiment = \"decay\"\ntau = 10.0\n{SMALL}{CENTERED}{BUMP}"))).unwrap();
    let s = &out.summary;
    assert!(s.metrics.contains_key("small_tau_regime"));
    assert_eq!(s.metrics["small_tau_regime"], serde_json::Value::Bool(false));
    assert!(!s.pass_flags.contains_key("monotone_after_transient"));
    assert!(!s.pass_flags.contains_key("tail_rate_negative"));
    assert!(s.pass_flags.contains_key("mass_conserved"));
}

#[test]
fn written_run_directory_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(&format!("experiment = \"simulate\"\ntau = 1.0\n{SMALL}{CENTERED}{BUMP}"));
    let out = experiments::run(&c).unwrap();
    out.write(dir.path()).unwrap();
    for name in ["config.toml", "run.csv", "summary.json"] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    let echoed = ExperimentConfig::from_toml(&std::fs::read_to_string(dir.path().join("config.toml")).unwrap()).unwrap();
    assert_eq!(echoed.hash().unwrap(), c.hash().unwrap());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    for key in ["experiment", "config_hash", "metrics", "fitted_rate", "pass_flags"] {
        assert!(summary.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(summary["config_hash"], c.hash().unwrap());
}

#[test]
fn sweep_output_does_not_depend_on_parallelism() {
    let base = format!(
        "experiment = \"sweep\"\ntaus = [0.2, 0.1, 0.05]\nrescaled = true\n{SMALL}{CENTERED}{BUMP}"
    );
    let serial = experiments::run(&cfg(&base)).unwrap();
    let parallel = experiments::run(&cfg(&format!("parallelism = 3\n{base}"))).unwrap();
    assert_eq!(serial, parallel);
    assert!(serial.summary.fitted_rate.is_some());
}
