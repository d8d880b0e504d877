use std::path::{Path, PathBuf};
use std::sync::Arc;

use levy_survival::kernel::{kernel_property_report, tabulate_kernel, KernelPropertyReport, UnifiedKernel};
use levy_survival::levy::{validate_problem, ValidationReport};
use levy_survival::montecarlo::{
    fit_decay_rate, fit_decay_rate_bootstrap, simulate, survival_from_stats, uniform_bins, PathScheme, SurvivalEstimate,
};
use levy_survival::operator::{OperatorSet, QuasiPotentialDiagnostics};
use levy_survival::spectral::{
    analyze_spectrum, asymptotics, integrate_curve, laplace_survival, sectoriality_check, survival_curve, LeadingEigenvalue,
    RateFit, SectorialityReport, SurvivalCurve, FIT_WINDOW,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Problem;
use crate::error::CliError;
use crate::report::{compare, spectral_occupation, Check, ComparisonReport, McSide, SpectralSide};

pub const SUMMARY_SCHEMA: &str = "levy-survival.summary.v1";

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Classify,
    Kernel,
    Assemble,
    Eigen,
    Survival,
    Laplace,
    Mc,
    Compare,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Classify,
        Stage::Kernel,
        Stage::Assemble,
        Stage::Eigen,
        Stage::Survival,
        Stage::Laplace,
        Stage::Mc,
        Stage::Compare,
    ];

    fn name(self) -> &'static str {
        match self {
            Stage::Classify => "classify",
            Stage::Kernel => "kernel",
            Stage::Assemble => "assemble",
            Stage::Eigen => "eigen",
            Stage::Survival => "survival",
            Stage::Laplace => "laplace",
            Stage::Mc => "mc",
            Stage::Compare => "compare",
        }
    }

    fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Classify => &[],
            Stage::Kernel | Stage::Assemble | Stage::Mc => &[Stage::Classify],
            Stage::Eigen | Stage::Survival => &[Stage::Assemble],
            Stage::Laplace => &[Stage::Survival],
            Stage::Compare => &[Stage::Eigen, Stage::Mc],
        }
    }

    fn spectral(self) -> bool {
        matches!(self, Stage::Eigen | Stage::Survival | Stage::Laplace | Stage::Compare)
    }
}

/// What a command asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// One stage and its prerequisites.
    Stage(Stage),
    /// Every stage enabled in the configuration.
    Run,
}

/// Stages to execute, closed under prerequisites.
pub fn plan(problem: &Problem, target: Target) -> Vec<Stage> {
    let mut wanted = [false; 8];
    match target {
        Target::Stage(s) => wanted[s as usize] = true,
        Target::Run => {
            let st = problem.config.stages;
            let mc = st.mc && problem.config.mc.is_some();
            for (s, on) in [
                (Stage::Classify, true),
                (Stage::Kernel, st.kernel),
                (Stage::Assemble, st.assemble),
                (Stage::Eigen, st.eigen),
                (Stage::Survival, st.survival),
                (Stage::Laplace, st.laplace),
                (Stage::Mc, mc),
                (Stage::Compare, st.compare && mc && st.eigen),
            ] {
                wanted[s as usize] |= on;
            }
        }
    }
    // prerequisites always come earlier, so one backward sweep closes the set
    for s in Stage::ALL.iter().rev() {
        if wanted[*s as usize] {
            for r in s.requires() {
                wanted[*r as usize] = true;
            }
        }
    }
    Stage::ALL.into_iter().filter(|s| wanted[*s as usize]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Units {
    pub time: &'static str,
    pub lambda1: &'static str,
    pub rate: &'static str,
    pub c1: &'static str,
    pub survival: &'static str,
    pub laplace: &'static str,
    pub occupation: &'static str,
}

const UNITS: Units = Units {
    time: "model time",
    lambda1: "time",
    rate: "1/time",
    c1: "dimensionless",
    survival: "probability",
    laplace: "time",
    occupation: "time",
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInfo {
    pub hash: String,
    pub process: String,
    pub domain: Vec<(f64, f64)>,
    pub x0: f64,
    pub resolution: f64,
    pub anchor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: &'static str,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub h: f64,
    pub radius: f64,
    pub anchor: f64,
    pub report: KernelPropertyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssembleSummary {
    pub unknowns: usize,
    pub anchor: f64,
    pub artificial_diffusion: f64,
    pub diagnostics: QuasiPotentialDiagnostics,
    pub mean_exit_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub lambda1: f64,
    pub rate: f64,
    pub c1: f64,
    pub disk_margin: f64,
    pub disk_contained: bool,
    pub sector_angle: f64,
    pub max_imaginary: f64,
    pub residual: f64,
    pub iterations: usize,
    pub index_overlap: f64,
    /// `min g₁ / max g₁`.
    pub g1_min_ratio: f64,
    pub leading: Vec<LeadingEigenvalue>,
    pub sectoriality: SectorialityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalSummary {
    pub points: usize,
    pub t_max: f64,
    pub fit: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceRow {
    pub s: f64,
    pub value: f64,
    pub quadrature: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub small_jump_cutoff: f64,
    pub substituted: bool,
    pub horizon: f64,
    pub censored: usize,
    pub mean_exit_time: f64,
    pub mean_exit_ci: f64,
    pub fit: Option<RateFit>,
}

/// Machine-readable record of a run; disabled stages are `null`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub units: Units,
    pub problem: ProblemInfo,
    pub stages: Vec<StageRecord>,
    pub classify: Option<ValidationReport>,
    pub kernel: Option<KernelSummary>,
    pub assemble: Option<AssembleSummary>,
    pub eigen: Option<EigenSummary>,
    pub survival: Option<SurvivalSummary>,
    pub laplace: Option<Vec<LaplaceRow>>,
    pub mc: Option<McSummary>,
    pub comparison: Option<ComparisonReport>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub problem_hash: String,
    pub pass: bool,
    pub failed_stage: Option<Stage>,
    pub artifacts: Vec<ManifestEntry>,
}

/// Writes artifacts into one directory and remembers their digests.
struct Artifacts {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

fn num(v: f64) -> String {
    v.to_string()
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), &bytes)?;
        self.entries.push(ManifestEntry {
            file: name.into(),
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, bytes)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.into_iter().map(num))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.write(name, bytes)
    }
}

/// Result of executing a plan.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.pass {
            0
        } else {
            1
        }
    }
}

/// In-memory products shared between stages.
#[derive(Default)]
struct State {
    ops: Option<OperatorSet>,
    curve: Option<SurvivalCurve>,
    spectral: Option<SpectralSide>,
    mc: Option<McSide>,
}

fn stage_error(stage: Stage, e: impl ToString) -> CliError {
    CliError::Stage {
        stage: stage.name().into(),
        message: e.to_string(),
    }
}

struct Runner<'a> {
    problem: &'a Problem,
    out: Artifacts,
    summary: Summary,
    state: State,
    kernel_table: bool,
}

/// Runs the planned stages, writing artifacts, `summary.json` and `manifest.json` to `out`.
/// A failing stage stops the run; everything written before it is kept.
pub fn execute(problem: &Problem, target: Target, out: &Path) -> Result<Outcome, CliError> {
    let stages = plan(problem, target);
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        units: UNITS,
        problem: ProblemInfo {
            hash: problem.hash.clone(),
            process: problem.triplet.describe(),
            domain: problem.domain.intervals().to_vec(),
            x0: problem.config.x0,
            resolution: problem.config.resolution,
            anchor: problem.anchor(),
        },
        stages: Vec::new(),
        classify: None,
        kernel: None,
        assemble: None,
        eigen: None,
        survival: None,
        laplace: None,
        mc: None,
        comparison: None,
        checks: Vec::new(),
        pass: true,
    };
    let mut runner = Runner {
        problem,
        out: Artifacts::new(out)?,
        summary,
        state: State::default(),
        kernel_table: target == Target::Stage(Stage::Kernel),
    };
    let mut failed = None;
    for stage in stages {
        if failed.is_some() {
            runner.summary.stages.push(StageRecord {
                stage,
                status: "skipped",
                message: None,
            });
            continue;
        }
        match runner.run(stage) {
            Ok(()) => runner.summary.stages.push(StageRecord {
                stage,
                status: "ok",
                message: None,
            }),
            Err(CliError::Stage { message, .. }) => {
                runner.summary.stages.push(StageRecord {
                    stage,
                    status: "failed",
                    message: Some(message),
                });
                failed = Some(stage);
            }
            Err(e) => return Err(e),
        }
    }
    let Runner { mut out, mut summary, .. } = runner;
    summary.pass = failed.is_none() && summary.checks.iter().all(|c| c.pass);
    out.json("summary.json", &summary)?;
    let manifest = Manifest {
        schema: "levy-survival.manifest.v1",
        problem_hash: problem.hash.clone(),
        pass: summary.pass,
        failed_stage: failed,
        artifacts: out.entries.clone(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(Outcome { summary, manifest })
}

impl Runner<'_> {
    fn run(&mut self, stage: Stage) -> Result<(), CliError> {
        if stage.spectral() {
            let report = self.summary.classify.as_ref().expect("classify runs first");
            if !report.spectral_ready {
                return Err(stage_error(stage, report.messages.join("; ")));
            }
        }
        match stage {
            Stage::Classify => self.classify(),
            Stage::Kernel => self.kernel(),
            Stage::Assemble => self.assemble(),
            Stage::Eigen => self.eigen(),
            Stage::Survival => self.survival(),
            Stage::Laplace => self.laplace(),
            Stage::Mc => self.mc(),
            Stage::Compare => self.compare(),
        }
    }

    fn classify(&mut self) -> Result<(), CliError> {
        let report = validate_problem(&self.problem.triplet, &self.problem.domain);
        self.out.json("classify.json", &report)?;
        self.summary.classify = Some(report);
        Ok(())
    }

    fn kernel(&mut self) -> Result<(), CliError> {
        let p = self.problem;
        let (h, radius, anchor) = (p.config.kernel.h, p.config.kernel.radius, p.anchor());
        let err = |e| stage_error(Stage::Kernel, e);
        let report = kernel_property_report(&p.triplet, anchor, h, radius).map_err(err)?;
        let tol = &p.config.tolerances;
        let checks = &mut self.summary.checks;
        checks.push(Check::flag("kernel.tails_signed_monotone", report.tail_signs_monotone));
        checks.push(Check::flag("kernel.tails_vanish", report.tails_vanish));
        checks.push(Check::flag("kernel.tail_limit", report.tail_limit));
        checks.push(Check::flag("kernel.kernel_limit", report.kernel_limit));
        checks.push(Check::flag("kernel.kernel_signed_monotone", report.kernel_signs_monotone));
        checks.push(Check::flag("kernel.integrable", report.kernel_integrable));
        checks.push(Check::at_most("kernel.symbol_residual", report.symbol.max_residual, tol.symbol_residual));
        checks.push(Check::at_least_neg(
            "kernel.symbol_positivity",
            report.symbol.positivity_margin,
            tol.symbol_positivity,
        ));
        let summary = KernelSummary { h, radius, anchor, report };
        self.out.json("kernel.json", &summary)?;
        if self.kernel_table {
            let kernel = UnifiedKernel::from_triplet(&p.triplet, anchor).map_err(err)?;
            let table = tabulate_kernel(Arc::new(kernel), h, radius).map_err(err)?;
            self.out.csv(
                "kernel_table.csv",
                &["u_left", "u_right", "cell_avg"],
                table.rows().map(|(l, r, v)| vec![l, r, v]),
            )?;
        }
        self.summary.kernel = Some(summary);
        Ok(())
    }

    fn assemble(&mut self) -> Result<(), CliError> {
        let p = self.problem;
        let ops = OperatorSet::build(&p.triplet, &p.domain, p.config.resolution, p.config.anchor)
            .map_err(|e| stage_error(Stage::Assemble, e))?;
        let tol = &p.config.tolerances;
        let d = ops.diagnostics;
        self.summary
            .checks
            .push(Check::at_most("assemble.quasipotential_residual", d.residual, tol.quasipotential_residual));
        self.summary.checks.push(Check::at_least_neg(
            "assemble.quasipotential_min_ratio",
            d.min_entry_ratio,
            tol.quasipotential_negativity,
        ));
        let exit = ops.mean_exit_times();
        let nodes = ops.grid.interior_nodes();
        self.out.csv(
            "mean_exit_time.csv",
            &["x", "mean_exit_time"],
            nodes.iter().zip(&exit).map(|(x, t)| vec![*x, *t]),
        )?;
        let i = ops
            .grid
            .locate(p.config.x0)
            .map_err(|e| stage_error(Stage::Assemble, e))?
            .ok_or_else(|| stage_error(Stage::Assemble, "x0 is not an interior node"))?;
        let summary = AssembleSummary {
            unknowns: ops.grid.unknowns(),
            anchor: ops.anchor,
            artificial_diffusion: ops.artificial_diffusion,
            diagnostics: d,
            mean_exit_time: exit[i],
        };
        self.out.json("assemble.json", &summary)?;
        self.summary.assemble = Some(summary);
        self.state.ops = Some(ops);
        Ok(())
    }

    fn eigen(&mut self) -> Result<(), CliError> {
        let p = self.problem;
        let cfg = &p.config;
        let ops = self.state.ops.as_ref().expect("assemble runs first");
        let err = |e| stage_error(Stage::Eigen, e);
        let eig = analyze_spectrum(&ops.b, cfg.spectrum.leading).map_err(err)?;
        let asym = asymptotics(&eig, &ops.grid, cfg.x0, None).map_err(err)?;
        let sect = sectoriality_check(&ops.s_mid, cfg.spectrum.sectoriality_trials, cfg.spectrum.seed);
        let gmax = eig.g1.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gmin = eig.g1.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = &cfg.tolerances;
        let checks = &mut self.summary.checks;
        checks.push(Check::flag("eigen.lambda1_positive", eig.lambda1 > 0.0));
        checks.push(Check::at_least_neg("eigen.g1_min_ratio", gmin / gmax, 1e-10));
        checks.push(Check::at_least_neg(
            "eigen.disk_margin",
            eig.disk_margin() / eig.lambda1,
            tol.disk_slack,
        ));
        checks.push(Check::flag("eigen.strongly_sectorial", sect.strongly_sectorial));
        if self.summary.classify.as_ref().is_some_and(|c| c.symmetric) {
            checks.push(Check::at_most("eigen.symmetric_imaginary", eig.max_imaginary() / eig.lambda1, tol.symmetric));
            checks.push(Check::at_most("eigen.symmetric_b", ops.diagnostics.asymmetry, tol.symmetric));
        }
        if let Some(r) = &cfg.reference {
            if let Some(l) = r.lambda1 {
                checks.push(Check::relative("reference.lambda1", eig.lambda1, l, r.lambda1_rel));
            }
            if let Some(c) = r.c1 {
                checks.push(Check::relative("reference.c1", asym.c1, c, r.c1_rel));
            }
        }
        let summary = EigenSummary {
            lambda1: eig.lambda1,
            rate: eig.rate(),
            c1: asym.c1,
            disk_margin: eig.disk_margin(),
            disk_contained: eig.disk_margin() >= -tol.disk_slack * eig.lambda1,
            sector_angle: eig.sector_angle(),
            max_imaginary: eig.max_imaginary(),
            residual: eig.residual,
            iterations: eig.iterations,
            index_overlap: eig.index_overlap,
            g1_min_ratio: gmin / gmax,
            leading: eig.leading.clone(),
            sectoriality: sect,
        };
        self.out.json("eigen.json", &summary)?;
        let bins = match &cfg.mc {
            Some(mc) => uniform_bins(&p.domain, mc.bins),
            None => Vec::new(),
        };
        self.state.spectral = Some(SpectralSide {
            problem_hash: p.hash.clone(),
            lambda1: eig.lambda1,
            c1: asym.c1,
            occupation: spectral_occupation(ops, cfg.x0, &bins).map_err(err)?,
            bins,
        });
        self.summary.eigen = Some(summary);
        Ok(())
    }

    fn survival(&mut self) -> Result<(), CliError> {
        let p = self.problem;
        let ops = self.state.ops.as_ref().expect("assemble runs first");
        let mut curve =
            survival_curve(&ops.l, &ops.grid, p.config.x0, &p.t_grid).map_err(|e| stage_error(Stage::Survival, e))?;
        let fit = curve.fit().ok();
        if let Some(eig) = &self.summary.eigen {
            let check = match fit {
                Some(f) => Check::relative("survival.rate_vs_lambda1", f.rate, eig.rate, p.config.tolerances.survival_rate),
                None => Check::flag("survival.rate_vs_lambda1", false),
            };
            self.summary.checks.push(check);
        }
        self.out.csv(
            "survival.csv",
            &["t", "p"],
            curve.times.iter().zip(&curve.values).map(|(t, v)| vec![*t, *v]),
        )?;
        self.summary.survival = Some(SurvivalSummary {
            points: curve.times.len(),
            t_max: *curve.times.last().unwrap_or(&0.0),
            fit,
        });
        self.state.curve = Some(curve);
        Ok(())
    }

    fn laplace(&mut self) -> Result<(), CliError> {
        let p = self.problem;
        let ops = self.state.ops.as_ref().expect("assemble runs first");
        let curve = self.state.curve.as_ref().expect("survival runs first");
        let mean_exit = self.summary.assemble.as_ref().map(|a| a.mean_exit_time);
        let mut rows = Vec::new();
        for &s in &p.config.laplace {
            let value = laplace_survival(&ops.b, &ops.grid, p.config.x0, s).map_err(|e| stage_error(Stage::Laplace, e))?;
            let quadrature = integrate_curve(curve, s);
            let relative_gap = (value - quadrature).abs() / value.abs();
            self.summary.checks.push(Check::relative(
                &format!("laplace.quadrature[s={s}]"),
                quadrature,
                value,
                p.config.tolerances.laplace,
            ));
            if s == 0.0 {
                if let Some(m) = mean_exit {
                    self.summary
                        .checks
                        .push(Check::relative("laplace.s0_mean_exit_time", value, m, 1e-12));
                }
            }
            rows.push(LaplaceRow {
                s,
                value,
                quadrature,
                relative_gap,
            });
        }
        self.out.csv(
            "laplace.csv",
            &["s", "value", "quadrature"],
            rows.iter().map(|r| vec![r.s, r.value, r.quadrature]),
        )?;
        self.summary.laplace = Some(rows);
        Ok(())
    }

    fn mc(&mut self) -> Result<(), CliError> {
        let p = self.problem;
        let cfg = p.config.mc.as_ref().ok_or_else(|| stage_error(Stage::Mc, "no [mc] section in the configuration"))?;
        let seed = p.seed.or(cfg.seed).ok_or_else(|| CliError::Config("Monte Carlo needs a seed".into()))?;
        let err = |e| stage_error(Stage::Mc, e);
        let scheme = PathScheme::new(&p.triplet, cfg.dt, cfg.small_jump_cutoff, seed).map_err(err)?;
        let horizon = cfg.horizon.unwrap_or(p.config.time.t_max);
        let bins = uniform_bins(&p.domain, cfg.bins);
        let stats = simulate(&scheme, p.config.x0, &p.domain, horizon, cfg.n_paths, &bins).map_err(err)?;
        let t_grid: Vec<f64> = p.t_grid.iter().copied().filter(|t| *t <= horizon * (1.0 + 1e-12)).collect();
        let estimate = SurvivalEstimate {
            curve: survival_from_stats(&stats, p.config.x0, &t_grid),
            stats,
        };
        // the bootstrap draws its own streams, kept apart from the path streams
        let fit = if cfg.bootstrap > 0 {
            fit_decay_rate_bootstrap(&estimate, FIT_WINDOW, cfg.bootstrap, seed ^ 0x9e37_79b9_7f4a_7c15).ok()
        } else {
            fit_decay_rate(&estimate.curve, FIT_WINDOW).ok()
        };
        let curve = &estimate.curve;
        let ci = curve.ci.as_ref().expect("Monte Carlo curves carry intervals");
        if let Some(r) = &p.config.reference {
            for &[t, expected] in &r.mc_survival {
                let k = curve
                    .times
                    .iter()
                    .position(|s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
                    .ok_or_else(|| CliError::Config(format!("reference time {t} is not on the time grid")))?;
                let (lo, hi) = ci[k];
                self.summary.checks.push(Check {
                    name: format!("reference.mc_survival[t={t}]"),
                    value: curve.values[k],
                    reference: Some(expected),
                    tolerance: (hi - lo) / 2.0,
                    pass: lo <= expected && expected <= hi,
                });
            }
        }
        self.out.csv(
            "mc_survival.csv",
            &["t", "p_hat", "ci_lo", "ci_hi"],
            curve.times.iter().zip(&curve.values).zip(ci).map(|((t, v), (lo, hi))| vec![*t, *v, *lo, *hi]),
        )?;
        let stats = &estimate.stats;
        self.out.csv(
            "mc_occupation.csv",
            &["bin_left", "bin_right", "occupation", "ci_half_width"],
            stats.bins.iter().zip(&stats.occupation).zip(&stats.occupation_ci).map(|(((l, r), o), c)| vec![*l, *r, *o, *c]),
        )?;
        let summary = McSummary {
            n_paths: stats.n_paths,
            dt: cfg.dt,
            seed,
            small_jump_cutoff: cfg.small_jump_cutoff,
            substituted: scheme.is_substituted(),
            horizon,
            censored: stats.censored(),
            mean_exit_time: stats.mean_exit_time,
            mean_exit_ci: stats.mean_exit_ci,
            fit,
        };
        self.out.json("mc.json", &summary)?;
        self.summary.mc = Some(summary);
        self.state.mc = Some(McSide {
            problem_hash: p.hash.clone(),
            estimate,
            fit,
        });
        Ok(())
    }

    fn compare(&mut self) -> Result<(), CliError> {
        let spectral = self.state.spectral.as_ref().expect("eigen runs first");
        let mc = self.state.mc.as_ref().expect("mc runs first");
        let report = compare(spectral, mc, &self.problem.config.tolerances)?;
        self.summary.checks.extend(report.checks.iter().cloned());
        self.out.json("comparison.json", &report)?;
        self.summary.comparison = Some(report);
        Ok(())
    }
}
