//! Config-driven experiment runner behind the `kernelint` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::catalog::{self, make_kernel, KernelSpec, MeasureSpec, PsiSpec};
use crate::error::{Error, Result};
use crate::gaussian::{self, LevelStats, ModelSpec, MomentDiagnostics};
use crate::interval::Interval;
use crate::kernels::SecondOrderKernel;
use crate::riemann::{PartitionScheme, RiemannSystem, TagRule};
use crate::selfint::{self, EstimateOptions, SelfIntegralReport, Verdict};
use crate::tensorprod::{self, FubiniEstimate, IndicatorDemo, TagDependence, TensorProductModel};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TAG_DEPENDENT: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_FACTORIZATION: i32 = 4;

pub const OUT_DIR_ENV: &str = "KERNELINT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "kernelint",
    version,
    about = "Self-integrals of function-measure kernels and Gaussian stochastic-integral checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,
    /// Overrides every seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the finest refinement level
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Suppresses the summary line on stdout
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Self-integral verdict over an ensemble of Riemann systems.
    Selfint,
    /// Quasi-self-integral verdict from double sums of the second-order kernel.
    Quasi,
    /// Monte Carlo of stochastic Riemann sums on a Gaussian model.
    Simulate,
    /// Tensor-product means, covariances and iterated integrals.
    Tensor,
    /// Lists the kernel families.
    Catalog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub schemes: Vec<PartitionScheme>,
    pub tags: Vec<TagRule>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default = "default_mc_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_mc_tags")]
    pub tags: [TagRule; 2],
    #[serde(default)]
    pub moment_check: bool,
    #[serde(default = "default_quad_n")]
    pub quad_n: usize,
}

fn default_mc_levels() -> Vec<usize> {
    vec![32, 64, 128, 256, 512]
}

fn default_mc_tags() -> [TagRule; 2] {
    [TagRule::Left, TagRule::Midpoint]
}

fn default_quad_n() -> usize {
    1024
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensorModelSpec {
    WhiteNoiseSelfPair,
    IndependentWhiteNoise,
    OrthogonalSelfPair { nu: MeasureSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    pub model: TensorModelSpec,
    #[serde(default)]
    pub psi: Vec<PsiSpec>,
    #[serde(default = "default_tensor_n")]
    pub n: usize,
    #[serde(default)]
    pub indicator_demo: bool,
}

fn default_tensor_n() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub traces_dir: Option<String>,
    #[serde(default)]
    pub diagnostics: Option<String>,
    /// Write CSV files next to the JSON report.
    #[serde(default = "yes")]
    pub csv: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { report: None, traces_dir: None, diagnostics: None, csv: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Seed for random schemes and tags in ensembles.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mc: Option<McSpec>,
    #[serde(default)]
    pub tensor: Option<TensorSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(catalog::parse_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn apply_overrides(&mut self, seed: Option<u64>, n_max: Option<usize>) {
        if let Some(s) = seed {
            self.seed = Some(s);
            if let Some(mc) = self.mc.as_mut() {
                mc.seed = s;
            }
        }
        if n_max.is_some() {
            self.n_max = n_max;
        }
    }

    fn kernel_spec(&self) -> Result<&KernelSpec> {
        self.kernel.as_ref().ok_or_else(|| Error::Config("`kernel` is required".into()))
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kernelint: {e}");
            match e {
                Error::Factorization { .. } => EXIT_FACTORIZATION,
                _ => EXIT_ERROR,
            }
        }
    }
}

pub fn verdict_exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Converged { .. } => EXIT_CONVERGED,
        Verdict::TagDependent { .. } => EXIT_TAG_DEPENDENT,
        Verdict::Unbounded { .. } => EXIT_UNBOUNDED,
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    if cli.command == Command::Catalog {
        for e in catalog::catalog() {
            println!("{:<12} {:<55} domain {:<18} {}", e.name, e.params, e.domain, e.summary);
        }
        return Ok(EXIT_CONVERGED);
    }
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply_overrides(cli.seed, cli.n_max);
    fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Selfint => cmd_selfint(&cfg, &cli.out, cli.quiet),
        Command::Quasi => cmd_quasi(&cfg, &cli.out, cli.quiet),
        Command::Simulate => cmd_simulate(&cfg, &cli.out, cli.quiet),
        Command::Tensor => cmd_tensor(&cfg, &cli.out, cli.quiet),
        Command::Catalog => unreachable!("handled above"),
    }
}

fn domain_of(cfg: &ExperimentConfig, fallback: Interval) -> Result<Interval> {
    match cfg.domain {
        Some([lo, hi]) => Interval::closed(lo, hi),
        None => Ok(fallback),
    }
}

fn ensemble_of(
    cfg: &ExperimentConfig,
    domain: Interval,
    default: fn(Interval, u64) -> Vec<RiemannSystem>,
) -> Vec<RiemannSystem> {
    match &cfg.ensemble {
        Some(e) => {
            e.schemes.iter().flat_map(|&s| e.tags.iter().map(move |&t| RiemannSystem::new(domain, s, t))).collect()
        }
        None => default(domain, cfg.seed.unwrap_or(1)),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn write_traces(report: &SelfIntegralReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for t in &report.traces {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", file_stem(&t.system))))?;
        w.write_record(["n", "sum"])?;
        for (n, s) in &t.points {
            w.serialize((n, s))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn emit_report(cfg: &ExperimentConfig, out: &Path, report: &SelfIntegralReport, quiet: bool) -> Result<i32> {
    write_json(&out.join(cfg.outputs.report.as_deref().unwrap_or("report.json")), report)?;
    if cfg.outputs.csv {
        write_traces(report, &out.join(cfg.outputs.traces_dir.as_deref().unwrap_or("traces")))?;
    }
    if !quiet {
        match &report.verdict {
            Verdict::Converged { value } => println!("{}: converged to {value:.6}", report.kernel),
            Verdict::TagDependent { values } => {
                println!("{}: tag-dependent", report.kernel);
                for (k, v) in values {
                    println!("  {k:<40} {v:.6}");
                }
            }
            Verdict::Unbounded { system, growth } => {
                println!(
                    "{}: unbounded along {system}, last sum {:.6}",
                    report.kernel,
                    growth.last().copied().unwrap_or(f64::NAN)
                )
            }
        }
    }
    Ok(verdict_exit_code(&report.verdict))
}

fn cmd_selfint(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> Result<i32> {
    let k = make_kernel(cfg.kernel_spec()?)?;
    let d = domain_of(cfg, k.domain())?;
    let ensemble = ensemble_of(cfg, d, selfint::default_ensemble);
    let report = selfint::estimate_self_integral(
        &k,
        &d,
        &ensemble,
        cfg.n_max.unwrap_or(4096),
        cfg.tol.unwrap_or(selfint::DEFAULT_TOL),
    )?;
    emit_report(cfg, out, &report, quiet)
}

fn cmd_quasi(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> Result<i32> {
    let k = make_kernel(cfg.kernel_spec()?)?;
    let d = domain_of(cfg, k.domain())?;
    let ensemble = ensemble_of(cfg, d, selfint::default_quasi_ensemble);
    let report = selfint::estimate_quasi_self_integral(
        &SecondOrderKernel::new(k),
        &d,
        &d,
        &ensemble,
        &ensemble,
        cfg.n_max.unwrap_or(1024),
        cfg.tol.unwrap_or(selfint::DEFAULT_DOUBLE_TOL),
        EstimateOptions::default(),
    )?;
    emit_report(cfg, out, &report, quiet)
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    model: &'a ModelSpec,
    samples: usize,
    seed: u64,
    tags: [String; 2],
    levels: Vec<LevelStats>,
    moments: Option<MomentDiagnostics>,
    moments_skipped: Option<String>,
}

fn model_from(cfg: &ExperimentConfig, mc: &McSpec) -> Result<ModelSpec> {
    if let Some(m) = &mc.model {
        return Ok(m.clone());
    }
    match cfg.kernel.as_ref() {
        Some(KernelSpec::BrownianWn) => Ok(ModelSpec::BrownianWn),
        Some(KernelSpec::Fbm { hurst }) => Ok(ModelSpec::Fbm { hurst: *hurst }),
        _ => Err(Error::Config("`mc.model` is required unless the kernel is brownian_wn or fbm".into())),
    }
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> Result<i32> {
    let mc = cfg.mc.as_ref().ok_or_else(|| Error::Config("`mc` section is required".into()))?;
    let spec = model_from(cfg, mc)?;
    if mc.levels.is_empty() {
        return Err(Error::Config("`mc.levels` must not be empty".into()));
    }
    let mut rows = Vec::new();
    let mut last = None;
    for &n in &mc.levels {
        let exp = gaussian::run_uniform_experiment(&spec, n, mc.tags[0], mc.tags[1], mc.samples, mc.seed)?;
        rows.push(exp.stats()?);
        last = Some(exp);
    }
    let last = last.expect("levels non-empty");
    let (moments, moments_skipped) = if mc.moment_check {
        let k = spec.kernel()?;
        let d = k.domain();
        let seed = cfg.seed.unwrap_or(1);
        let si = selfint::estimate_self_integral(
            &k,
            &d,
            &selfint::default_ensemble(d, seed),
            cfg.n_max.unwrap_or(4096),
            cfg.tol.unwrap_or(selfint::DEFAULT_TOL),
        )?;
        let qe = selfint::default_quasi_ensemble(d, seed);
        let qi = selfint::estimate_quasi_self_integral(
            &SecondOrderKernel::new(k),
            &d,
            &d,
            &qe,
            &qe,
            1024,
            selfint::DEFAULT_DOUBLE_TOL,
            EstimateOptions::default(),
        )?;
        match gaussian::moment_checks(&last.model, &last.level_a, &last.sums_a, &last.sums_half, &si, &qi, mc.quad_n) {
            Ok(m) => (Some(m), None),
            Err(Error::NotConverged(why)) => (None, Some(why)),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    let output = SimulationOutput {
        model: &spec,
        samples: mc.samples,
        seed: mc.seed,
        tags: [mc.tags[0].to_string(), mc.tags[1].to_string()],
        levels: rows.clone(),
        moments,
        moments_skipped,
    };
    write_json(&out.join(cfg.outputs.report.as_deref().unwrap_or("diagnostics.json")), &output)?;
    if cfg.outputs.csv {
        let mut w = csv::Writer::from_path(out.join(cfg.outputs.diagnostics.as_deref().unwrap_or("diagnostics.csv")))?;
        w.write_record(["n", "mean", "se_mean", "var", "l2_gap"])?;
        for r in &rows {
            w.serialize((r.n, r.mean, r.se_mean, r.var, r.l2_gap))?;
        }
        w.flush()?;
    }
    if !quiet {
        for r in &rows {
            println!("n={:<6} mean={:+.5} (se {:.5}) var={:.5} l2_gap={:.6}", r.n, r.mean, r.se_mean, r.var, r.l2_gap);
        }
        if let Some(m) = &output.moments {
            println!(
                "moments: z_mean={:+.2} z_var={:+.2} mean_ok={} var_ok={}",
                m.z_scores.mean, m.z_scores.var, m.mean_ok, m.var_ok
            );
        }
        if let Some(why) = &output.moments_skipped {
            println!("moments skipped: {why}");
        }
    }
    Ok(EXIT_CONVERGED)
}

#[derive(Serialize)]
struct TensorRow {
    psi: String,
    order_a: Option<f64>,
    order_b: Option<f64>,
    analytic: f64,
    se: Option<f64>,
    slack: Option<f64>,
    agree: Option<bool>,
}

#[derive(Serialize)]
struct TensorOutput {
    rows: Vec<TensorRow>,
    indicator: Option<IndicatorDemo>,
    tag_dependence: Option<TagDependence>,
}

fn cmd_tensor(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> Result<i32> {
    let ts = cfg.tensor.as_ref().ok_or_else(|| Error::Config("`tensor` section is required".into()))?;
    let d = domain_of(cfg, Interval::unit())?;
    let (model, nu) = match &ts.model {
        TensorModelSpec::WhiteNoiseSelfPair => {
            (TensorProductModel::white_noise_self_pair(d), crate::Measure1D::lebesgue())
        }
        TensorModelSpec::IndependentWhiteNoise => {
            (TensorProductModel::independent_white_noise(d, d), crate::Measure1D::lebesgue())
        }
        TensorModelSpec::OrthogonalSelfPair { nu } => {
            let nu = nu.build()?;
            (TensorProductModel::orthogonal_self_pair(nu.clone(), d), nu)
        }
    };
    let mut rows = Vec::new();
    for p in &ts.psi {
        let psi = p.build();
        let row = match &cfg.mc {
            Some(mc) => {
                let FubiniEstimate { psi, order_a, order_b, se, analytic, slack, agree } =
                    tensorprod::fubini_mc_check(&model, &psi, ts.n, mc.samples, mc.seed)?;
                TensorRow {
                    psi,
                    order_a: Some(order_a),
                    order_b: Some(order_b),
                    analytic,
                    se: Some(se),
                    slack: Some(slack),
                    agree: Some(agree),
                }
            }
            None => TensorRow {
                psi: psi.label.clone(),
                order_a: None,
                order_b: None,
                analytic: tensorprod::tensor_mean(&model, &psi, ts.n),
                se: None,
                slack: None,
                agree: None,
            },
        };
        rows.push(row);
    }
    let indicator = ts.indicator_demo.then(|| tensorprod::indicator_demo(nu, d, ts.n));
    let tag_dependence = match (&cfg.mc, ts.indicator_demo) {
        (Some(mc), true) => {
            Some(tensorprod::tag_dependence_mc(d, ts.n, TagRule::Left, TagRule::near_right(), mc.samples, mc.seed)?)
        }
        _ => None,
    };
    let output = TensorOutput { rows, indicator, tag_dependence };
    write_json(&out.join(cfg.outputs.report.as_deref().unwrap_or("tensor.json")), &output)?;
    if !quiet {
        for r in &output.rows {
            match (r.order_a, r.order_b, r.se, r.slack) {
                (Some(a), Some(b), Some(se), Some(slack)) => println!(
                    "{:<22} analytic={:.6} order_a={a:.6} order_b={b:.6} se={se:.2e} slack={slack:.2e} agree={}",
                    r.psi,
                    r.analytic,
                    r.agree == Some(true)
                ),
                _ => println!("{:<22} analytic={:.6}", r.psi, r.analytic),
            }
        }
        if let Some(demo) = &output.indicator {
            println!("indicator means: closed={} open={} gap {}", demo.closed, demo.open, demo.gap);
        }
    }
    Ok(EXIT_CONVERGED)
}
