//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use levy_survival::kernel::{default_anchor, kernel_property_report};
use levy_survival::levy::{validate_problem, LevyFamily, LevyMeasureSpec, LevyTriplet};
use levy_survival::operator::{apply_generator, assemble_generator, assemble_s, build_grid, table_for_grid, Domain, OperatorSet};
use levy_survival::spectral::{analyze_spectrum, asymptotics, integrate_curve, laplace_survival, survival_curve};
use levy_survival_cli::{execute, Problem, RunConfig, Target};

type Verdict = Result<(bool, String), String>;

struct Line {
    number: usize,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
}

fn criterion(number: usize, title: &'static str, budget: Option<u64>, f: impl FnOnce() -> Verdict) -> Line {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    let (mut pass, mut detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail.push_str(&format!("; over the {} s budget", b.as_secs()));
        }
    }
    let line = Line {
        number,
        title,
        pass,
        detail,
        elapsed,
        budget,
    };
    let budget = line.budget.map(|b| format!(" / {} s", b.as_secs())).unwrap_or_default();
    println!(
        "{} {:>2} {}: {} [{:.2} s{}]",
        if line.pass { "PASS" } else { "FAIL" },
        line.number,
        line.title,
        line.detail,
        line.elapsed.as_secs_f64(),
        budget
    );
    line
}

fn rel(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn e<E: ToString>(err: E) -> String {
    err.to_string()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn unit() -> Domain {
    Domain::interval(-1.0, 1.0).unwrap()
}

fn times(t_max: f64, step: f64) -> Vec<f64> {
    (0..=(t_max / step).round() as usize).map(|k| k as f64 * step).collect()
}

fn family(a: f64, gamma: f64, f: LevyFamily) -> LevyTriplet {
    LevyTriplet::new(a, gamma, LevyMeasureSpec::Family(f)).unwrap()
}

/// Leading spectrum inside the disk; symmetric problems also need real spectra and symmetric `B`.
fn structure(ops: &OperatorSet, symmetric: bool) -> Result<(bool, f64, f64, f64), String> {
    let eig = analyze_spectrum(&ops.b, 10).map_err(e)?;
    let margin = eig.disk_margin() / eig.lambda1;
    let imag = eig.max_imaginary() / eig.lambda1;
    let asym = ops.diagnostics.asymmetry;
    let mut ok = margin >= -1e-6;
    if symmetric {
        ok &= imag <= 1e-8 && asym <= 1e-8;
    }
    Ok((ok, margin, imag, asym))
}

fn main() {
    let mut lines = Vec::new();
    let brownian = LevyTriplet::brownian(1.0, 0.0).unwrap();
    let mut brownian_ops = None;

    lines.push(criterion(1, "Brownian eigenvalue", Some(10), || {
        let ops = OperatorSet::build(&brownian, &unit(), 200.0, None).map_err(e)?;
        let eig = analyze_spectrum(&ops.b, 10).map_err(e)?;
        let oracle = 8.0 / (PI * PI);
        let err = rel(eig.lambda1, oracle);
        brownian_ops = Some((ops, eig));
        Ok((err <= 1e-2, format!("lambda1 = {:.6}, oracle {oracle:.6}, rel err {err:.2e} (tol 1e-2)", brownian_ops.as_ref().unwrap().1.lambda1)))
    }));

    lines.push(criterion(2, "Brownian asymptotic coefficient and slope", Some(30), || {
        let (ops, eig) = brownian_ops.as_ref().ok_or("criterion 1 produced no operators")?;
        let c1 = asymptotics(eig, &ops.grid, 0.0, None).map_err(e)?.c1;
        let c1_err = rel(c1, 4.0 / PI);
        let mut curve = survival_curve(&ops.l, &ops.grid, 0.0, &times(10.0, 0.05)).map_err(e)?;
        let fit = curve.fit().map_err(e)?;
        let slope_err = rel(fit.rate, PI * PI / 8.0);
        Ok((
            c1_err <= 2e-2 && slope_err <= 5e-3,
            format!("c1 = {c1:.5} (rel err {c1_err:.2e}, tol 2e-2); slope -{:.6} (rel err {slope_err:.2e}, tol 5e-3)", fit.rate),
        ))
    }));

    lines.push(criterion(3, "Brownian quasi-potential kernel", None, || {
        let (ops, _) = brownian_ops.as_ref().ok_or("criterion 1 produced no operators")?;
        let x = ops.grid.interior_nodes();
        let h = ops.grid.pieces()[0].h;
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                let g = (1.0 + x[i].min(x[j])) * (1.0 - x[i].max(x[j]));
                worst = worst.max(rel(ops.b[(i, j)] / h, g));
            }
        }
        let i0 = ops.grid.locate(0.0).map_err(e)?.ok_or("0 is not a node")?;
        let exit = ops.mean_exit_times()[i0];
        let exit_err = (exit - 1.0).abs();
        Ok((
            worst <= 1e-2 && exit_err <= 1e-2,
            format!("max rel err {worst:.2e} (tol 1e-2); (B1)(0) = {exit:.6} (tol 1e-2)"),
        ))
    }));

    lines.push(criterion(4, "Poisson generator identity", Some(5), || {
        let poisson = LevyTriplet::poisson(1.0, -1.0).map_err(e)?;
        let d = Domain::interval(-3.0, 3.0).map_err(e)?;
        let f = |x: f64| (-4.0 * x * x).exp();
        let exact = |x: f64| 8.0 * x * f(x) + f(x + 1.0) - f(x);
        let mut errors = Vec::new();
        for res in [20.0, 40.0, 80.0] {
            let grid = build_grid(&d, res).map_err(e)?;
            let table = table_for_grid(&poisson, &grid, default_anchor(&d)).map_err(e)?;
            let l = assemble_generator(&grid, &assemble_s(&grid, &table, 0.0).map_err(e)?);
            let lf = apply_generator(&l, &grid, f);
            let err = grid
                .interior_nodes()
                .iter()
                .zip(&lf)
                .map(|(x, v)| (v - exact(*x)).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
        Ok((
            ratios.iter().all(|r| *r >= 1.6),
            format!(
                "sup errors {:.3e}, {:.3e}, {:.3e} at h = 0.05, 0.025, 0.0125; ratios {:.2}, {:.2} (need ≥ 1.6)",
                errors[0], errors[1], errors[2], ratios[0], ratios[1]
            ),
        ))
    }));

    lines.push(criterion(5, "Kernel property suite", Some(60), || {
        use LevyFamily::*;
        let zoo = [
            (1.0, Brownian),
            (0.0, Stable { alpha: 0.5, scale: 1.0, skew: 0.0 }),
            (0.0, Stable { alpha: 0.8, scale: 1.0, skew: 0.3 }),
            (0.0, Stable { alpha: 1.0, scale: 1.0, skew: 0.0 }),
            (0.0, Stable { alpha: 1.0, scale: 0.5, skew: 0.6 }),
            (0.0, Stable { alpha: 1.5, scale: 1.0, skew: 0.5 }),
            (0.0, Stable { alpha: 1.9, scale: 1.0, skew: -0.4 }),
            (0.0, Gamma { shape: 2.0, rate: 3.0 }),
            (0.0, Cgmy { c: 1.0, g: 2.0, m: 3.0, y: 0.5 }),
            (0.0, Cgmy { c: 0.5, g: 1.0, m: 4.0, y: 1.5 }),
            (0.5, Poisson { rate: 1.0 }),
        ];
        let mut failures = Vec::new();
        let (mut worst_res, mut worst_pos) = (0.0f64, f64::INFINITY);
        for (a, f) in zoo {
            let t = family(a, 0.2, f);
            let report = kernel_property_report(&t, 2.0, 1e-3, 50.0).map_err(e)?;
            worst_res = worst_res.max(report.symbol.max_residual);
            worst_pos = worst_pos.min(report.symbol.positivity_margin);
            if !report.passes(1e-3, 1e-8) || report.symbol.frequencies.len() != 20 {
                failures.push(format!("{f:?}"));
            }
        }
        Ok((
            failures.is_empty(),
            format!(
                "{} Type II triplets, worst symbol residual {worst_res:.2e} (tol 1e-3), worst Re margin {worst_pos:.2e} (tol -1e-8){}",
                zoo.len(),
                if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
            ),
        ))
    }));

    let mut cauchy_ops = None;
    lines.push(criterion(6, "Cauchy cross-oracle", Some(300), || {
        let dir = tempfile::tempdir().map_err(e)?;
        let config = RunConfig::load(&configs().join("cauchy.toml")).map_err(e)?;
        let problem = Problem::new(config, None).map_err(e)?;
        let outcome = execute(&problem, Target::Run, dir.path()).map_err(e)?;
        let c = outcome.summary.comparison.as_ref().ok_or("no comparison produced")?;
        let mc = outcome.summary.mc.as_ref().ok_or("no Monte Carlo summary")?;
        let rate_ok = (c.rate_mc - c.rate_spectral).abs() <= 2.0 * c.rate_stderr;
        let occ_ok = c.max_occupation_sigma <= 2.0;
        let mut detail = format!(
            "1/lambda1 = {:.5}, MC rate {:.5} ± {:.5} ({:.2} sigma, tol 2); occupation max {:.2} sigma over {} bins (tol 2); {} paths, dt {}, seed {}",
            c.rate_spectral,
            c.rate_mc,
            c.rate_stderr,
            (c.rate_mc - c.rate_spectral).abs() / c.rate_stderr,
            c.max_occupation_sigma,
            c.occupation.len(),
            mc.n_paths,
            mc.dt,
            mc.seed
        );
        if let Some(a) = &c.asymptotic {
            detail.push_str(&format!(
                "; info: c1 e^(-t/lambda1) at t = {} is {:.5} vs MC [{:.5}, {:.5}]",
                a.t, a.model, a.ci.0, a.ci.1
            ));
        }
        cauchy_ops = Some(OperatorSet::build(&problem.triplet, &problem.domain, 200.0, None).map_err(e)?);
        Ok((rate_ok && occ_ok, detail))
    }));

    lines.push(criterion(7, "Erlang Monte Carlo oracle", Some(60), || {
        let dir = tempfile::tempdir().map_err(e)?;
        let config = RunConfig::load(&configs().join("erlang.toml")).map_err(e)?;
        let problem = Problem::new(config, None).map_err(e)?;
        execute(&problem, Target::Run, dir.path()).map_err(e)?;
        let text = std::fs::read_to_string(dir.path().join("mc_survival.csv")).map_err(e)?;
        let row: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .find(|r| (r[0] - 1.0).abs() < 1e-12)
            .ok_or("t = 1 missing from the curve")?;
        let oracle = 2.0 / std::f64::consts::E;
        Ok((
            row[2] <= oracle && oracle <= row[3],
            format!("p(1) = {:.5}, 95% CI [{:.5}, {:.5}], oracle 2/e = {oracle:.5}", row[1], row[2], row[3]),
        ))
    }));

    lines.push(criterion(8, "Spectral structure", None, || {
        use LevyFamily::*;
        let mut runs: Vec<(String, OperatorSet, bool)> = Vec::new();
        if let Some((ops, _)) = brownian_ops.as_ref() {
            runs.push(("Brownian res 200".into(), ops.clone(), true));
        }
        if let Some(ops) = cauchy_ops.as_ref() {
            runs.push(("Cauchy res 200".into(), ops.clone(), true));
        }
        let zoo = [
            (0.0, 0.0, Stable { alpha: 1.5, scale: 1.0, skew: 0.0 }),
            (0.0, 0.0, Stable { alpha: 0.5, scale: 1.0, skew: 0.0 }),
            (0.0, 0.0, Cgmy { c: 1.0, g: 2.0, m: 2.0, y: 0.5 }),
            (1.0, 0.5, Brownian),
            (0.0, 0.2, Stable { alpha: 0.8, scale: 1.0, skew: 0.3 }),
            (0.0, 0.0, Stable { alpha: 1.5, scale: 1.0, skew: 0.5 }),
            (0.0, 0.2, Gamma { shape: 2.0, rate: 3.0 }),
            (0.0, 0.1, Cgmy { c: 1.0, g: 2.0, m: 3.0, y: 1.5 }),
            (0.5, 0.0, Poisson { rate: 1.0 }),
        ];
        let mut skipped = 0;
        for (a, gamma, f) in zoo {
            let t = family(a, gamma, f);
            let report = validate_problem(&t, &unit());
            if !report.spectral_ready {
                skipped += 1;
                continue;
            }
            let ops = OperatorSet::build(&t, &unit(), 100.0, None).map_err(e)?;
            runs.push((format!("{f:?} res 100"), ops, report.symmetric));
        }
        let mut failures = Vec::new();
        let (mut margin, mut imag, mut asym) = (f64::INFINITY, 0.0f64, 0.0f64);
        let symmetric_runs = runs.iter().filter(|r| r.2).count();
        for (name, ops, symmetric) in &runs {
            let (ok, m, i, s) = structure(ops, *symmetric)?;
            margin = margin.min(m);
            if *symmetric {
                imag = imag.max(i);
                asym = asym.max(s);
            }
            if !ok {
                failures.push(name.clone());
            }
        }
        Ok((
            failures.is_empty() && skipped == 0,
            format!(
                "{} Type II runs ({symmetric_runs} symmetric): min disk margin {margin:.2e}·lambda1 (tol -1e-6); symmetric max imag {imag:.2e}, max asymmetry {asym:.2e} (tol 1e-8){}",
                runs.len(),
                if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
            ),
        ))
    }));

    lines.push(criterion(9, "Laplace consistency", None, || {
        let mut worst: f64 = 0.0;
        let mut exact_rows = true;
        let mut cases = Vec::new();
        if let Some((ops, _)) = brownian_ops.as_ref() {
            cases.push((ops, 10.0));
        }
        if let Some(ops) = cauchy_ops.as_ref() {
            cases.push((ops, 20.0));
        }
        if cases.len() < 2 {
            return Err("operators from criteria 1 and 6 are missing".into());
        }
        for (ops, t_max) in cases {
            let curve = survival_curve(&ops.l, &ops.grid, 0.0, &times(t_max, 0.05)).map_err(e)?;
            for s in [0.0, 0.5, 1.0, 2.0] {
                let value = laplace_survival(&ops.b, &ops.grid, 0.0, s).map_err(e)?;
                worst = worst.max(rel(integrate_curve(&curve, s), value));
                if s == 0.0 {
                    let i0 = ops.grid.locate(0.0).map_err(e)?.ok_or("0 is not a node")?;
                    exact_rows &= value == ops.mean_exit_times()[i0];
                }
            }
        }
        Ok((
            worst <= 1e-3 && exact_rows,
            format!("Brownian and Cauchy, s in {{0, 0.5, 1, 2}}: max rel gap {worst:.2e} (tol 1e-3); s = 0 equals the B row sum exactly: {exact_rows}"),
        ))
    }));

    lines.push(criterion(10, "Determinism", None, || {
        let dir = tempfile::tempdir().map_err(e)?;
        let config = configs().join("brownian.toml");
        let run = |name: &str| -> Result<PathBuf, String> {
            let out = dir.path().join(name);
            let status = Command::new(env!("CARGO_BIN_EXE_levy-survival"))
                .args(["run", "--threads", "3", "--seed", "99", "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(e)?;
            if status.status.code() != Some(0) {
                return Err(format!("run exited with {:?}", status.status.code()));
            }
            Ok(out)
        };
        let (a, b) = (run("a")?, run("b")?);
        let mut names: Vec<String> = std::fs::read_dir(&a)
            .map_err(e)?
            .map(|f| f.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        let mut differing = Vec::new();
        for name in &names {
            if std::fs::read(a.join(name)).map_err(e)? != std::fs::read(b.join(name)).map_err(e)? {
                differing.push(name.clone());
            }
        }
        let same_count = std::fs::read_dir(&b).map_err(e)?.count() == names.len();
        Ok((
            differing.is_empty() && same_count,
            format!(
                "{} artifacts from two runs (seed 99, 3 threads) {}",
                names.len(),
                if differing.is_empty() { "identical byte for byte".to_string() } else { format!("differ: {}", differing.join(", ")) }
            ),
        ))
    }));

    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
