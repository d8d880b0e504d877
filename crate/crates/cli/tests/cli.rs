use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levy_survival_cli::config::Tolerances;
use levy_survival_cli::pipeline::plan;
use levy_survival_cli::report::{compare, McSide, SpectralSide};
use levy_survival_cli::{execute, CliError, Problem, RunConfig, Stage, Target};
use levy_survival::levy::LevyTriplet;
use levy_survival::montecarlo::{estimate_survival, PathScheme};
use levy_survival::operator::Domain;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-survival"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg("2")
        .output()
        .unwrap()
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap()
}

const BROWNIAN_SPECTRAL: &str = r#"
domain = [[-1.0, 1.0]]
resolution = 100
[process]
a = 1.0
family = { name = "brownian" }
[reference]
lambda1 = 0.8105694691387022
"#;

#[test]
fn brownian_reference_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("brownian.toml");
    let out = cli(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["pass"], true);
    let lambda1 = s["eigen"]["lambda1"].as_f64().unwrap();
    assert!((lambda1 - 0.81057).abs() < 1e-4, "{lambda1}");
    assert_eq!(s["units"]["lambda1"], "time");
    for file in ["eigen.json", "survival.csv", "laplace.csv", "mc_survival.csv", "mc_occupation.csv", "comparison.json", "manifest.json"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let header = std::fs::read_to_string(dir.path().join("mc_survival.csv")).unwrap();
    assert!(header.starts_with("t,p_hat,ci_lo,ci_hi\n"));
}

#[test]
fn type_one_eigen_is_gated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("poisson.toml");
    let out = cli(&["eigen", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Type II gate"));
    let s = summary(dir.path());
    assert!(s["eigen"].is_null());
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failed_stage"], "eigen");
}

#[test]
fn type_one_run_skips_spectral_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("poisson.toml");
    let out = cli(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["classify"]["process_type"], "TypeI");
    for key in ["eigen", "survival", "laplace", "mc", "comparison"] {
        assert!(s[key].is_null(), "{key}");
    }
}

#[test]
fn missing_seed_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("noseed.toml");
    std::fs::write(&cfg, format!("{BROWNIAN_SPECTRAL}\n[mc]\nn_paths = 2000\ndt = 1e-3\n")).unwrap();
    let out = cli(&["mc-survival", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    // the flag supplies it
    let out = cli(
        &["mc-survival", "--config", cfg.to_str().unwrap(), "--seed", "3"],
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_configs_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("unknown.toml", format!("{BROWNIAN_SPECTRAL}\nbogus = 1\n")),
        ("outside.toml", BROWNIAN_SPECTRAL.replace("resolution = 100", "resolution = 100\nx0 = 3.0")),
        ("both.toml", BROWNIAN_SPECTRAL.replace("family =", "atoms = [{ position = 1.0, mass = 1.0 }]\nfamily =")),
    ] {
        let cfg = dir.path().join(name);
        std::fs::write(&cfg, text).unwrap();
        let out = cli(&["classify", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
}

#[test]
fn kernel_table_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cauchy.toml");
    std::fs::write(
        &cfg,
        "domain = [[-1.0, 1.0]]\n[process]\nfamily = { name = \"stable\", alpha = 1.0, scale = 1.0, skew = 0.0 }\n[kernel]\nh = 1e-2\nradius = 30.0\n",
    )
    .unwrap();
    let out = cli(&["kernel-table", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("kernel_table.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("u_left,u_right,cell_avg"));
    assert!(lines.count() > 1000);
}

#[test]
fn stage_plans_include_prerequisites() {
    let problem = Problem::new(RunConfig::from_toml(BROWNIAN_SPECTRAL).unwrap(), None).unwrap();
    assert_eq!(
        plan(&problem, Target::Stage(Stage::Laplace)),
        vec![Stage::Classify, Stage::Assemble, Stage::Survival, Stage::Laplace]
    );
    // without an [mc] section the run has nothing to compare
    let run = plan(&problem, Target::Run);
    assert!(!run.contains(&Stage::Mc) && !run.contains(&Stage::Compare));
    assert!(run.contains(&Stage::Laplace));
}

#[test]
fn disabled_stages_are_null_in_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{BROWNIAN_SPECTRAL}\n[stages]\nkernel = false\nlaplace = false\n");
    let problem = Problem::new(RunConfig::from_toml(&text).unwrap(), None).unwrap();
    let outcome = execute(&problem, Target::Run, dir.path()).unwrap();
    assert!(outcome.summary.pass);
    let s = summary(dir.path());
    assert!(s["kernel"].is_null() && s["laplace"].is_null() && s["mc"].is_null());
    assert!(s["survival"]["fit"]["rate"].as_f64().unwrap() > 1.2);
}

#[test]
fn comparison_rejects_mismatched_problems() {
    let t = LevyTriplet::brownian(1.0, 0.0).unwrap();
    let d = Domain::interval(-1.0, 1.0).unwrap();
    let scheme = PathScheme::new(&t, 1e-3, 1e-2, 1).unwrap();
    let estimate = estimate_survival(&scheme, 0.0, &d, &[0.0, 0.5, 1.0], 1000).unwrap();
    let mc = McSide {
        problem_hash: levy_survival_cli::config::problem_hash(&t, &d, 0.0),
        estimate,
        fit: None,
    };
    let other = Domain::interval(-1.0, 2.0).unwrap();
    let spectral = SpectralSide {
        problem_hash: levy_survival_cli::config::problem_hash(&t, &other, 0.0),
        lambda1: 1.0,
        c1: 1.0,
        occupation: Vec::new(),
        bins: Vec::new(),
    };
    let err = compare(&spectral, &mc, &Tolerances::default()).unwrap_err();
    assert!(matches!(err, CliError::Stage { .. }));
    assert!(err.to_string().contains("mismatch"));
}
