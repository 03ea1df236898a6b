use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ResolvedTolerances, ScenarioConfig, Task};
use crate::ffop::{
    analytic_eigenvalues, assemble, diagnose, eigendecompose, match_eigenvalues, tail_limit,
    FarFieldMatrix, DEFAULT_TAIL_BAND,
};
use crate::forward::{farfield_kernel, FarFieldKernel, ScattererSpec, Shape};
use crate::geometry::{CurveShape, DirectionRule};
use crate::phaseless::{compare_datasets, retrieve, synth_dataset, PairScheme};
use crate::{Dimension, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_TASK_FAILURE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, relation: Relation, bound: f64) -> Self {
        let passed = value.is_finite()
            && match relation {
                Relation::AtMost => value <= bound,
                Relation::AtLeast => value >= bound,
            };
        Self {
            name: name.into(),
            // non-finite values would not survive JSON
            value: if value.is_finite() { value } else { f64::MAX },
            relation,
            bound,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    pub status: Status,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_s: f64,
    /// Paths relative to the scenario output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub status: Status,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub config_errors: Vec<String>,
    pub tasks: Vec<TaskReport>,
    pub wall_time_s: f64,
    pub output_dir: String,
}

#[derive(Default)]
struct TaskOutput {
    checks: Vec<Check>,
    metrics: BTreeMap<String, f64>,
    labels: BTreeMap<String, String>,
    artifacts: Vec<String>,
}

impl TaskOutput {
    fn metric(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(name.into(), value);
        }
    }

    fn check(&mut self, name: &str, value: f64, relation: Relation, bound: f64) {
        self.metric(name, value);
        self.checks.push(Check::new(name, value, relation, bound));
    }
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    specs: Vec<ScattererSpec>,
    rule: DirectionRule,
    tol: ResolvedTolerances,
    dir: PathBuf,
    kernel: Option<FarFieldKernel>,
}

impl Context<'_> {
    fn kernel(&mut self) -> Result<FarFieldKernel> {
        if let Some(k) = &self.kernel {
            return Ok(k.clone());
        }
        let k = farfield_kernel(&self.specs[0], &self.rule, self.cfg.truncation)?;
        self.kernel = Some(k.clone());
        Ok(k)
    }

    fn create(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        fs::File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Error::io(path, e))
    }

    fn write_with(
        &self,
        out: &mut TaskOutput,
        name: &str,
        f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    ) -> Result<()> {
        let mut w = self.create(name)?;
        f(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(self.dir.join(name), e))?;
        out.artifacts.push(name.into());
        Ok(())
    }

    fn write_json<T: Serialize>(&self, out: &mut TaskOutput, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write_with(out, name, |w| writeln!(w, "{text}"))
    }
}

/// Default output directory for a scenario.
pub fn default_output_dir(cfg: &ScenarioConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("ffspec-out").join(&cfg.name))
}

/// Runs every task of `cfg`, writing artifacts and `report.json` into `dir`.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport {
        scenario: cfg.name.clone(),
        status: Status::Pass,
        exit_code: EXIT_OK,
        config_errors: Vec::new(),
        tasks: Vec::new(),
        wall_time_s: 0.0,
        output_dir: dir.display().to_string(),
    };
    let violations = cfg.violations();
    if !violations.is_empty() {
        report.status = Status::Error;
        report.exit_code = EXIT_CONFIG;
        report.config_errors = violations;
        return report;
    }
    if let Err(e) = fs::create_dir_all(dir) {
        report.status = Status::Error;
        report.exit_code = EXIT_TASK_FAILURE;
        report.config_errors = vec![format!("cannot create {}: {e}", dir.display())];
        return report;
    }
    let specs = cfg.specs();
    let rule = cfg.rule.build().expect("validated");
    let mut ctx = Context {
        cfg,
        tol: cfg.tolerances.resolved(rule.dimension()),
        specs,
        rule,
        dir: dir.to_path_buf(),
        kernel: None,
    };
    for task in cfg.parsed_tasks() {
        let t0 = Instant::now();
        let mut out = TaskOutput::default();
        let result = match task {
            Task::Forward => forward(&mut ctx, &mut out),
            Task::Spectrum => spectrum(&mut ctx, &mut out),
            Task::Translation => translation(&mut ctx, &mut out),
            Task::Retrieve => retrieval(&mut ctx, &mut out),
            Task::Compare => compare(&mut ctx, &mut out),
        };
        let (status, error) = match result {
            Err(e) => (Status::Error, Some(e.to_string())),
            Ok(()) if out.checks.iter().all(|c| c.passed) => (Status::Pass, None),
            Ok(()) => (Status::Fail, None),
        };
        if status != Status::Pass {
            report.status = Status::Fail;
            report.exit_code = EXIT_TASK_FAILURE;
        }
        report.tasks.push(TaskReport {
            task,
            status,
            checks: out.checks,
            metrics: out.metrics,
            labels: out.labels,
            error,
            wall_time_s: t0.elapsed().as_secs_f64(),
            artifacts: out.artifacts,
        });
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    let path = dir.join("report.json");
    let written = serde_json::to_string_pretty(&report)
        .map_err(Error::from)
        .and_then(|text| fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e)));
    if let Err(e) = written {
        report.status = Status::Error;
        report.exit_code = EXIT_TASK_FAILURE;
        report.config_errors.push(e.to_string());
    }
    report
}

fn forward(ctx: &mut Context, out: &mut TaskOutput) -> Result<()> {
    let kernel = ctx.kernel()?;
    let spec = ctx.specs[0].clone();
    let scale = kernel.max_abs();
    out.metric("max_abs", scale);
    let rel = if scale > 0.0 {
        kernel.reciprocity_residual() / scale
    } else {
        0.0
    };
    out.check(
        "reciprocity_residual",
        rel,
        Relation::AtMost,
        ctx.tol.reciprocity,
    );

    if let Shape::Curve {
        curve,
        boundary_points,
    } = &spec.shape
    {
        match curve {
            CurveShape::Circle { radius } => {
                let disk = ScattererSpec {
                    shape: Shape::Disk { radius: *radius },
                    ..spec.clone()
                };
                let oracle = farfield_kernel(&disk, &ctx.rule, ctx.cfg.truncation)?;
                out.check(
                    "nystrom_oracle_error",
                    kernel.max_diff(&oracle),
                    Relation::AtMost,
                    ctx.tol.nystrom_oracle,
                );
            }
            CurveShape::Kite => {
                let finer = ScattererSpec {
                    shape: Shape::Curve {
                        curve: *curve,
                        boundary_points: 2 * boundary_points,
                    },
                    ..spec.clone()
                };
                let reference = farfield_kernel(&finer, &ctx.rule, ctx.cfg.truncation)?;
                out.check(
                    "self_convergence_error",
                    kernel.max_diff(&reference),
                    Relation::AtMost,
                    ctx.tol.self_convergence,
                );
            }
        }
    }
    ctx.write_with(out, "kernel.csv", |w| kernel.write_csv(w))?;
    ctx.write_json(out, "kernel.json", &kernel.header(Some(&spec)))?;
    ctx.write_with(out, "rule.csv", |w| ctx.rule.write_csv(w))?;
    Ok(())
}

/// `|v* F̃ v|` for `v = W^{1/2}·1 / ‖W^{1/2}·1‖`, the eigenvalue of the
/// constant mode when the kernel depends on `x̂·d` only.
fn constant_mode_modulus(f: &FarFieldMatrix) -> f64 {
    let s = &f.sqrt_weights;
    let norm2: f64 = s.iter().map(|v| v * v).sum();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..f.len() {
        for j in 0..f.len() {
            acc += s[i] * f.entries[(i, j)] * s[j];
        }
    }
    acc.norm() / norm2
}

fn spectrum(ctx: &mut Context, out: &mut TaskOutput) -> Result<()> {
    let kernel = ctx.kernel()?;
    let spec = ctx.specs[0].clone();
    let class = spec.class();
    let tol = ctx.tol;
    let f = assemble(&kernel)?;
    let s = eigendecompose(&f, false)?;
    let d = diagnose(&f, &s, class, DEFAULT_TAIL_BAND)?;
    out.check(
        "normality_residual",
        d.normality_residual,
        Relation::AtMost,
        tol.normality,
    );
    out.check(
        "relation_residual",
        d.relation_residual,
        Relation::AtMost,
        tol.relation,
    );
    out.check(
        "unitarity_residual",
        d.unitarity_residual,
        Relation::AtMost,
        tol.unitarity,
    );
    out.check(
        "max_circle_residual",
        d.max_circle_residual,
        Relation::AtMost,
        tol.circle,
    );
    out.check("min_imag", d.min_imag, Relation::AtLeast, tol.min_imag);
    out.check(
        "tail_alignment",
        d.tail_estimate.re * class.limit(),
        Relation::AtLeast,
        tol.tail,
    );
    out.metric("tail_estimate_re", d.tail_estimate.re);
    out.metric("tail_estimate_im", d.tail_estimate.im);
    out.metric("band_count", d.band_count as f64);
    out.metric("wrong_sign_count", d.wrong_sign_count as f64);
    out.metric("floored_in_count", d.circle_residuals.len() as f64);
    out.metric("max_modulus", s.max_modulus());
    out.labels.insert("class".into(), format!("{class:?}"));

    let closed_form = !matches!(spec.shape, Shape::Curve { .. });
    if closed_form {
        let expected = analytic_eigenvalues(&spec, ctx.cfg.options.oracle_max_order)?;
        let errors = match_eigenvalues(&s, &expected);
        let scale = expected.iter().map(|e| e.0.norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        let mut worst_componentwise: f64 = 0.0;
        for (e, err) in expected.iter().zip(&errors) {
            let err = err.unwrap_or(f64::INFINITY);
            worst = worst.max(err);
            if e.0.norm() > 0.0 {
                worst_componentwise = worst_componentwise.max(err / e.0.norm());
            }
        }
        let rel = if scale > 0.0 { worst / scale } else { worst };
        out.check(
            "eigen_oracle_error",
            rel,
            Relation::AtMost,
            tol.eigen_oracle,
        );
        out.metric("eigen_oracle_componentwise_error", worst_componentwise);
    }
    if ctx.cfg.options.expect_interior_zero {
        if !closed_form {
            return Err(Error::InvalidInput(
                "the interior-eigenvalue check needs a sphere or disk".into(),
            ));
        }
        out.check(
            "constant_mode_modulus",
            constant_mode_modulus(&f),
            Relation::AtMost,
            tol.interior_zero,
        );
    }
    if let Some(refined) = &ctx.cfg.options.refined_rule {
        let rule = refined.build()?;
        let fine = assemble(&farfield_kernel(&spec, &rule, ctx.cfg.truncation)?)?;
        let sf = eigendecompose(&fine, false)?;
        let tf = tail_limit(&sf, rule.dimension(), DEFAULT_TAIL_BAND, class)?;
        out.metric("refined_tail_estimate_re", tf.estimate.re);
        out.check(
            "refined_wrong_sign_count",
            tf.wrong_sign_count as f64,
            Relation::AtMost,
            d.wrong_sign_count as f64,
        );
    }
    let frame = crate::ffop::EigenCircle::new(kernel.dimension(), kernel.wavenumber);
    ctx.write_with(out, "eigenvalues.csv", |w| {
        writeln!(w, "index,re,im,modulus,circle_residual")?;
        for (n, l) in s.eigenvalues.iter().enumerate() {
            writeln!(
                w,
                "{n},{:.17e},{:.17e},{:.17e},{:.17e}",
                l.re,
                l.im,
                l.norm(),
                frame.residual(*l)
            )?;
        }
        Ok(())
    })?;
    ctx.write_json(out, "diagnostics.json", &d)?;
    Ok(())
}

fn random_shift(rng: &mut ChaCha8Rng, dim: Dimension, lo: f64, hi: f64) -> Vec<f64> {
    let len = rng.gen_range(lo..=hi);
    let phi = rng.gen_range(0.0..TAU);
    match dim {
        Dimension::Two => vec![len * phi.cos(), len * phi.sin()],
        Dimension::Three => {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let rho = (1.0 - z * z).sqrt();
            vec![len * rho * phi.cos(), len * rho * phi.sin(), len * z]
        }
    }
}

fn translation(ctx: &mut Context, out: &mut TaskOutput) -> Result<()> {
    let spec = ctx.specs[0].clone();
    let o = &ctx.cfg.options;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut rows = Vec::new();
    let (mut max_r, mut min_m) = (0.0_f64, f64::INFINITY);
    for _ in 0..o.translation_shifts {
        let shift = random_shift(&mut rng, spec.dimension(), o.shift_min, o.shift_max);
        let base = spec.offset_vector();
        let moved = ScattererSpec {
            offset: base.iter().zip(&shift).map(|(a, b)| a + b).collect(),
            ..spec.clone()
        };
        let c = compare_datasets(&spec, &moved, &ctx.rule, o.pair_scheme, ctx.cfg.truncation)?;
        max_r = max_r.max(c.max_r_diff);
        min_m = min_m.min(c.max_m_diff);
        rows.push((shift, c));
    }
    out.check("max_r_diff", max_r, Relation::AtMost, ctx.tol.translation_r);
    out.check(
        "min_max_m_diff",
        min_m,
        Relation::AtLeast,
        ctx.tol.translation_m_min,
    );
    out.metric("shifts", rows.len() as f64);
    ctx.write_with(out, "translation.csv", |w| {
        writeln!(w, "shift,lx,ly,lz,norm,max_r_diff,max_m_diff")?;
        for (n, (l, c)) in rows.iter().enumerate() {
            let norm = l.iter().map(|v| v * v).sum::<f64>().sqrt();
            let z = l.get(2).copied().unwrap_or(0.0);
            writeln!(
                w,
                "{n},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                l[0], l[1], z, norm, c.max_r_diff, c.max_m_diff
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

fn retrieval(ctx: &mut Context, out: &mut TaskOutput) -> Result<()> {
    let spec = ctx.specs[0].clone();
    let rule = match &ctx.cfg.options.retrieval_rule {
        Some(r) => r.build()?,
        None => ctx.rule.clone(),
    };
    let truth = if ctx.cfg.options.retrieval_rule.is_none() {
        ctx.kernel()?
    } else {
        farfield_kernel(&spec, &rule, ctx.cfg.truncation)?
    };
    let data = synth_dataset(&truth, PairScheme::FullPairs)?;
    data.write_dir(&ctx.dir.join("dataset"))?;
    for f in ["r.csv", "M.csv", "meta.json"] {
        out.artifacts.push(format!("dataset/{f}"));
    }
    let o = &ctx.cfg.options;
    let class = o.class_hint.unwrap_or_else(|| spec.class());
    out.labels.insert("class_hint".into(), format!("{class:?}"));
    let outcome = retrieve(&data, class);
    if o.expect_disambiguation_failure {
        let raised = matches!(outcome, Err(Error::DisambiguationFailed { .. }));
        out.check(
            "disambiguation_failed",
            if raised { 1.0 } else { 0.0 },
            Relation::AtLeast,
            1.0,
        );
        match outcome {
            Err(Error::DisambiguationFailed { direct, conjugate }) => {
                ctx.write_json(out, "retrieval.json", &[direct, conjugate])?;
                return Ok(());
            }
            Err(e) => return Err(e),
            Ok(_) => {}
        }
    }
    let got = outcome?;
    let scale = truth.max_abs();
    let err = if scale > 0.0 {
        got.kernel.max_diff(&truth) / scale
    } else {
        got.kernel.max_abs()
    };
    out.check("retrieval_error", err, Relation::AtMost, ctx.tol.retrieval);
    let d = &got.diagnostics;
    if let Some(r) = d.data_residual {
        out.metric("data_residual", r);
    }
    if let Some(a) = d.alignment {
        out.metric("worst_link_residual", a.worst_link_residual);
        out.metric("zero_rows", a.zero_rows as f64);
        out.metric("weakly_placed_rows", a.weakly_placed as f64);
    }
    out.metric("reciprocity_residual", d.reciprocity_residual);
    out.metric("circle_fit_residual", d.circle_fit_residual);
    out.metric("global_phase", got.global_phase);
    out.metric("ambiguous_rows", d.ambiguous_rows as f64);
    out.metric("nodes", rule.len() as f64);
    out.labels
        .insert("branch".into(), format!("{:?}", got.branch).to_lowercase());
    ctx.write_with(out, "retrieved_kernel.csv", |w| got.kernel.write_csv(w))?;
    ctx.write_json(
        out,
        "retrieval.json",
        &RetrievalSummary {
            branch: got.branch,
            global_phase: got.global_phase,
            error_vs_truth: err,
            diagnostics: d.clone(),
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct RetrievalSummary {
    branch: crate::phaseless::Branch,
    global_phase: f64,
    error_vs_truth: f64,
    diagnostics: crate::phaseless::RetrievalDiagnostics,
}

fn compare(ctx: &mut Context, out: &mut TaskOutput) -> Result<()> {
    let c = compare_datasets(
        &ctx.specs[0],
        &ctx.specs[1],
        &ctx.rule,
        ctx.cfg.options.pair_scheme,
        ctx.cfg.truncation,
    )?;
    let t = &ctx.cfg.tolerances;
    out.metric("max_r_diff", c.max_r_diff);
    out.metric("max_m_diff", c.max_m_diff);
    if let Some(b) = t.compare_max_r_diff {
        out.check("max_r_diff", c.max_r_diff, Relation::AtMost, b);
    }
    if let Some(b) = t.compare_min_r_diff {
        out.check("max_r_diff", c.max_r_diff, Relation::AtLeast, b);
    }
    if let Some(b) = t.compare_max_m_diff {
        out.check("max_m_diff", c.max_m_diff, Relation::AtMost, b);
    }
    if let Some(b) = t.compare_min_m_diff {
        out.check("max_m_diff", c.max_m_diff, Relation::AtLeast, b);
    }
    ctx.write_json(out, "comparison.json", &c)?;
    Ok(())
}

/// Loads a config file and runs it. Config problems give exit code 1
/// without touching the output directory.
pub fn run_config_file(
    path: &Path,
    output_dir: Option<&Path>,
) -> (i32, Option<RunReport>, Vec<String>) {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return (
                EXIT_CONFIG,
                None,
                vec![format!("cannot read {}: {e}", path.display())],
            )
        }
    };
    let cfg = match ScenarioConfig::from_json(&text) {
        Ok(c) => c,
        Err(Error::Config(v)) => return (EXIT_CONFIG, None, v),
        Err(e) => return (EXIT_CONFIG, None, vec![e.to_string()]),
    };
    let violations = cfg.violations();
    if !violations.is_empty() {
        return (EXIT_CONFIG, None, violations);
    }
    let dir = output_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_output_dir(&cfg));
    let report = run_scenario(&cfg, &dir);
    (report.exit_code, Some(report), Vec::new())
}

/// Runs every corpus scenario into `root/<name>`; the exit code is the
/// worst over scenarios.
pub fn run_corpus(root: &Path) -> (i32, Vec<RunReport>) {
    let mut code = EXIT_OK;
    let mut reports = Vec::new();
    for cfg in super::corpus() {
        let report = run_scenario(&cfg, &root.join(&cfg.name));
        code = code.max(report.exit_code);
        reports.push(report);
    }
    (code, reports)
}
