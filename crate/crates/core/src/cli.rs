//! Command-line driver: argument parsing, TOML configs and report output.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::experiments::{
    build_default_corpus, csv_string, default_poincare_configs, default_poincare_profiles, estimate_stability_constant,
    fmt_f64, perturbed_extremal_corpus, poincare_campaign, verify_identities, PoincareConfig, PoincareDomain, Tabular,
};
use crate::manifold::{counterexample_search, double_bump, CounterexampleReport, OptConfig};
use crate::params::{hydrogen, theorem_preset, thm1_family, thm5_family, CknParams, TheoremId};
use crate::radial::QuadratureScheme;
use crate::vectorineq::{estimate_cp, scan_vector_inequalities, VectorScanReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ckn", version, about = "Numerical checks of weighted L^p interpolation inequalities")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Named parameter preset, e.g. thm1-default.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Quadrature relative tolerance.
    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,
    /// Omit the `# generated` header line.
    #[arg(long = "no-timestamp", global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    VerifyIdentities,
    VectorScan,
    EstimateConstant,
    Counterexample,
    Poincare,
    CorpusDump,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residuals of both deficit identities over the default corpus.
    VerifyIdentities,
    /// Random-sample checks of the pointwise vector inequalities.
    VectorScan(VectorScanArgs),
    /// Empirical stability constant on the perturbed-extremal corpus.
    EstimateConstant(EstimateArgs),
    /// Certified scaling counterexample.
    Counterexample(CounterexampleArgs),
    /// Weighted Poincaré checks on radial domains.
    Poincare(PoincareArgs),
    /// Writes the default corpus.
    CorpusDump,
}

impl Command {
    fn name(&self) -> CommandName {
        match self {
            Command::VerifyIdentities => CommandName::VerifyIdentities,
            Command::VectorScan(_) => CommandName::VectorScan,
            Command::EstimateConstant(_) => CommandName::EstimateConstant,
            Command::Counterexample(_) => CommandName::Counterexample,
            Command::Poincare(_) => CommandName::Poincare,
            Command::CorpusDump => CommandName::CorpusDump,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct VectorScanArgs {
    /// Exponent; repeat for several.
    #[arg(long)]
    pub p: Vec<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Exponents γ of the lower bound; repeat for several.
    #[arg(long)]
    pub gamma: Vec<f64>,
}

#[derive(Debug, Args, Default)]
pub struct EstimateArgs {
    #[arg(long)]
    pub theorem: Option<TheoremId>,
}

#[derive(Debug, Args, Default)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct PoincareArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub lam: Option<f64>,
    /// `all` or annuli like `1,2;2.5,3`.
    #[arg(long)]
    pub domain: Option<String>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub preset: Option<String>,
    pub params: Vec<CknParams>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub no_timestamp: Option<bool>,
    pub scheme: Option<QuadratureScheme>,
    pub optimizer: Option<OptConfig>,
    pub vector_scan: VectorScanSection,
    pub estimate: EstimateSection,
    pub counterexample: CounterexampleSection,
    pub poincare: PoincareSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorScanSection {
    pub p: Vec<f64>,
    pub samples: Option<usize>,
    pub dim: Option<usize>,
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    pub theorem: Option<TheoremId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleSection {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareSection {
    pub n: Option<u32>,
    /// Explicit checks; the default campaign runs when empty.
    pub checks: Vec<PoincareConfig>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| CknError::Config(e.to_string()))
}

fn parse_domain(s: &str) -> Result<PoincareDomain> {
    if s.trim() == "all" {
        return Ok(PoincareDomain::All);
    }
    let mut out = Vec::new();
    for piece in s.split(';') {
        let bounds: Vec<&str> = piece.split(',').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| CknError::Config(format!("bad domain bound '{t}' in '{s}'")));
        match bounds.as_slice() {
            [a, b] => out.push((num(a)?, num(b)?)),
            _ => return Err(CknError::Config(format!("domain piece '{piece}' must be 'lo,hi'"))),
        }
    }
    Ok(PoincareDomain::Annuli(out))
}

/// Fully resolved settings after merging config and flags.
struct Settings {
    command: CommandName,
    params: Vec<CknParams>,
    preset_given: bool,
    output: Option<PathBuf>,
    format: Format,
    seed: u64,
    jobs: Option<usize>,
    timestamp: Option<u64>,
    scheme: QuadratureScheme,
    optimizer: OptConfig,
    config: RunConfig,
}

/// Parameter sets of the default identity campaign.
pub fn default_identity_params() -> Vec<CknParams> {
    vec![thm1_family(3, 1.5), hydrogen(3), thm5_family(4, 2.0)]
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let config = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CknError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| CknError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let command = match (&cli.command, config.command) {
        (Some(c), _) => c.name(),
        (None, Some(c)) => c,
        (None, None) => return Err(CknError::Config("no command given".into())),
    };
    let preset = cli.global.preset.clone().or_else(|| config.preset.clone());
    let mut params = config.params.clone();
    if let Some(name) = &preset {
        params = vec![CknParams::preset(name)?];
    }
    for p in &params {
        p.validate().map_err(|e| CknError::Config(e.to_string()))?;
    }
    let mut scheme = config.scheme.clone().unwrap_or_default();
    if let Some(t) = cli.global.rel_tol {
        scheme.rel_tol = t;
    }
    scheme.validate()?;
    let optimizer = config.optimizer.clone().unwrap_or_default();
    optimizer.validate()?;
    let no_timestamp = cli.global.no_timestamp || config.no_timestamp.unwrap_or(false);
    let timestamp = if no_timestamp {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    };
    let jobs = cli.global.jobs.or(config.jobs);
    if jobs == Some(0) {
        return Err(CknError::Config("--jobs must be at least 1".into()));
    }
    Ok(Settings {
        command,
        params,
        preset_given: preset.is_some(),
        output: cli.global.output.clone().or_else(|| config.output.clone()),
        format: cli.global.format.or(config.format).unwrap_or(Format::Csv),
        seed: cli.global.seed.or(config.seed).unwrap_or(0),
        jobs,
        timestamp,
        scheme,
        optimizer,
        config,
    })
}

/// A finished campaign: output text, a one-line summary and the verdict.
struct Outcome {
    text: String,
    summary: String,
    passed: bool,
}

fn render<T: Tabular + Serialize, S: Serialize>(
    rows: &[T],
    summary: &S,
    settings: &Settings,
) -> Result<String> {
    match settings.format {
        Format::Csv => csv_string(rows, settings.timestamp),
        Format::Json => {
            let mut doc = serde_json::json!({ "summary": summary, "rows": rows });
            if let Some(t) = settings.timestamp {
                doc["generated"] = t.into();
            }
            serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| CknError::Io(e.to_string()))
        }
    }
}

fn run_identities(s: &Settings) -> Result<Outcome> {
    let params = if s.params.is_empty() { default_identity_params() } else { s.params.clone() };
    let corpus = build_default_corpus(&params, s.seed)?;
    let report = verify_identities(&corpus, &s.scheme);
    Ok(Outcome {
        text: render(&report.rows, &report.summary, s)?,
        summary: format!(
            "verify-identities: {} pass, {} fail, {} skipped, max residual {:e}",
            report.summary.pass_count, report.summary.fail_count, report.summary.excluded_count, report.max_residual
        ),
        passed: report.all_pass(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct VectorScanRow {
    c_p: f64,
    c_p_witness: crate::vectorineq::Witness,
    #[serde(flatten)]
    scan: VectorScanReport,
}

impl Tabular for VectorScanRow {
    fn header() -> Vec<&'static str> {
        vec!["p", "dim", "samples", "seed", "c_p", "gp_negative", "fz_violations", "cp_violations", "min_ratio"]
    }

    fn record(&self) -> Vec<String> {
        let fz: usize = self.scan.fz.iter().map(|b| b.violations).sum();
        vec![
            fmt_f64(self.scan.p),
            self.scan.dim.to_string(),
            self.scan.sample_count.to_string(),
            self.scan.seed.to_string(),
            fmt_f64(self.c_p),
            self.scan.gp_negative.to_string(),
            fz.to_string(),
            self.scan.cp_violations.to_string(),
            fmt_f64(self.scan.min_ratio),
        ]
    }
}

fn run_vector_scan(s: &Settings, args: &VectorScanArgs) -> Result<Outcome> {
    let sec = &s.config.vector_scan;
    let ps = if !args.p.is_empty() {
        args.p.clone()
    } else if !sec.p.is_empty() {
        sec.p.clone()
    } else {
        vec![1.1, 1.5, 1.9, 2.0, 2.5, 3.0, 4.0]
    };
    let samples = args.samples.or(sec.samples).unwrap_or(100_000);
    let dim = args.dim.or(sec.dim).unwrap_or(3);
    let gammas = if !args.gamma.is_empty() {
        args.gamma.clone()
    } else if !sec.gammas.is_empty() {
        sec.gammas.clone()
    } else {
        vec![0.25, 0.5, 1.0]
    };
    let mut rows = Vec::new();
    for &p in &ps {
        let cp = estimate_cp(p, samples, s.seed)?;
        // fresh samples for the check
        let scan = scan_vector_inequalities(p, samples, s.seed.wrapping_add(1), dim, &gammas, Some(cp.value))?;
        rows.push(VectorScanRow { c_p: cp.value, c_p_witness: cp.worst_witness, scan });
    }
    let violations: usize = rows.iter().map(|r| r.scan.violations()).sum();
    let cps: Vec<String> = rows.iter().map(|r| format!("p={} c_p={}", r.scan.p, fmt_f64(r.c_p))).collect();
    let summary = serde_json::json!({ "violations": violations, "samples": samples });
    Ok(Outcome {
        text: render(&rows, &summary, s)?,
        summary: format!("vector-scan: {violations} violations; {}", cps.join(", ")),
        passed: violations == 0,
    })
}

fn run_estimate(s: &Settings, args: &EstimateArgs) -> Result<Outcome> {
    let theorem = args.theorem.or(s.config.estimate.theorem).unwrap_or(TheoremId::Thm1);
    let params = if s.preset_given || !s.params.is_empty() { s.params[0] } else { theorem_preset(theorem) };
    let corpus = perturbed_extremal_corpus(&params, s.seed)?;
    let est = estimate_stability_constant(&corpus, &params, theorem, &s.scheme, &s.optimizer)?;
    let summary = est.summary();
    let doc = serde_json::json!({
        "theorem": theorem,
        "params": params,
        "constant": est.constant,
        "pass_count": summary.pass_count,
        "fail_count": summary.fail_count,
        "min_ratio": summary.min_ratio,
        "excluded_count": summary.excluded_count,
    });
    Ok(Outcome {
        text: render(&est.rows, &doc, s)?,
        summary: format!(
            "estimate-constant: {theorem} at {params}: C >= {} over {} profiles ({} excluded)",
            fmt_f64(est.constant.value),
            est.constant.sample_count,
            est.excluded
        ),
        passed: summary.all_pass() && est.constant.value > 0.0,
    })
}

impl Tabular for CounterexampleReport {
    fn header() -> Vec<&'static str> {
        vec![
            "label", "c1", "c2", "side", "lam", "deficit", "deficit_scaled", "term", "term_scaled", "norm_ratio",
            "projected_distance", "slack_deficit", "slack_projection", "certified",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            fmt_f64(self.c1),
            fmt_f64(self.c2),
            format!("{:?}", self.side).to_lowercase(),
            fmt_f64(self.lam),
            fmt_f64(self.deficit),
            fmt_f64(self.deficit_scaled),
            fmt_f64(self.term),
            fmt_f64(self.term_scaled),
            fmt_f64(self.norm_ratio),
            fmt_f64(self.projection.distance),
            fmt_f64(self.slack_deficit),
            fmt_f64(self.slack_projection),
            self.certified.to_string(),
        ]
    }
}

fn run_counterexample(s: &Settings, args: &CounterexampleArgs) -> Result<Outcome> {
    let params = s.params.first().copied().unwrap_or_else(|| theorem_preset(TheoremId::Thm6));
    let c1 = args.c1.or(s.config.counterexample.c1);
    let c2 = args.c2.or(s.config.counterexample.c2);
    let pairs = match (c1, c2) {
        (None, None) => vec![(1.0, 0.0), (0.0, 1.0)],
        (a, b) => vec![(a.unwrap_or(0.0), b.unwrap_or(0.0))],
    };
    let u = double_bump();
    let reports = pairs
        .into_iter()
        .map(|(a, b)| counterexample_search(&u, &params, a, b, &s.scheme, &s.optimizer))
        .collect::<Result<Vec<_>>>()?;
    let certified = reports.iter().filter(|r| r.certified).count();
    let summary = serde_json::json!({ "certified": certified, "total": reports.len() });
    Ok(Outcome {
        text: render(&reports, &summary, s)?,
        summary: format!("counterexample: {certified}/{} certified at {params}", reports.len()),
        passed: certified == reports.len(),
    })
}

fn run_poincare(s: &Settings, args: &PoincareArgs) -> Result<Outcome> {
    let sec = &s.config.poincare;
    let n = args.n.or(sec.n).unwrap_or(3);
    let explicit = [args.p, args.rho, args.sigma, args.theta, args.lam].iter().any(Option::is_some) || args.domain.is_some();
    let configs = if explicit {
        let domain = match &args.domain {
            Some(d) => parse_domain(d)?,
            None => PoincareDomain::All,
        };
        vec![PoincareConfig {
            p: args.p.unwrap_or(2.0),
            rho: args.rho.unwrap_or(0.0),
            sigma: args.sigma.unwrap_or(1.0),
            theta: args.theta.unwrap_or(1.0),
            lam: args.lam.unwrap_or(1.0),
            domain,
        }]
    } else if !sec.checks.is_empty() {
        sec.checks.clone()
    } else {
        default_poincare_configs()
    };
    for c in &configs {
        c.validate(n).map_err(|e| CknError::Config(e.to_string()))?;
    }
    let rows = poincare_campaign(&default_poincare_profiles(), &configs, n, &s.scheme)?;
    let passed = rows.iter().filter(|r| r.passed()).count();
    let min_ratio = rows.iter().map(|r| r.report.ratio).fold(f64::INFINITY, f64::min);
    let summary = crate::experiments::Summary {
        pass_count: passed,
        fail_count: rows.len() - passed,
        min_ratio: Some(min_ratio),
        excluded_count: 0,
    };
    Ok(Outcome {
        text: render(&rows, &summary, s)?,
        summary: format!("poincare: {passed}/{} pass, min ratio {}", rows.len(), fmt_f64(min_ratio)),
        passed: passed == rows.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct CorpusRow {
    label: String,
    params_index: Option<usize>,
    family: crate::experiments::ProfileFamily,
    shape: String,
}

impl Tabular for CorpusRow {
    fn header() -> Vec<&'static str> {
        vec!["label", "params_index", "family", "shape"]
    }

    fn record(&self) -> Vec<String> {
        let family = serde_json::to_value(self.family).ok().and_then(|v| v["family"].as_str().map(String::from));
        vec![
            self.label.clone(),
            self.params_index.map(|i| i.to_string()).unwrap_or_default(),
            family.unwrap_or_default(),
            self.shape.clone(),
        ]
    }
}

fn run_corpus_dump(s: &Settings) -> Result<Outcome> {
    let params = if s.params.is_empty() { default_identity_params() } else { s.params.clone() };
    let corpus = build_default_corpus(&params, s.seed)?;
    corpus.check_integrability(&s.scheme)?;
    let text = match s.format {
        Format::Json => {
            let mut doc = serde_json::to_value(&corpus).map_err(|e| CknError::Io(e.to_string()))?;
            if let Some(t) = s.timestamp {
                doc["generated"] = t.into();
            }
            serde_json::to_string_pretty(&doc).map_err(|e| CknError::Io(e.to_string()))? + "\n"
        }
        Format::Csv => {
            let rows: Vec<CorpusRow> = corpus
                .entries
                .iter()
                .map(|e| CorpusRow {
                    label: e.profile.label.clone(),
                    params_index: e.params_index,
                    family: e.family,
                    shape: serde_json::to_string(&e.profile.shape).unwrap_or_default(),
                })
                .collect();
            csv_string(&rows, s.timestamp)?
        }
    };
    Ok(Outcome {
        text,
        summary: format!("corpus-dump: {} profiles over {} parameter sets", corpus.len(), params.len()),
        passed: true,
    })
}

fn execute(cli: &Cli, settings: &Settings) -> Result<Outcome> {
    let empty_scan = VectorScanArgs::default();
    let empty_est = EstimateArgs::default();
    let empty_ce = CounterexampleArgs::default();
    let empty_pc = PoincareArgs::default();
    match settings.command {
        CommandName::VerifyIdentities => run_identities(settings),
        CommandName::VectorScan => {
            let a = match &cli.command {
                Some(Command::VectorScan(a)) => a,
                _ => &empty_scan,
            };
            run_vector_scan(settings, a)
        }
        CommandName::EstimateConstant => {
            let a = match &cli.command {
                Some(Command::EstimateConstant(a)) => a,
                _ => &empty_est,
            };
            run_estimate(settings, a)
        }
        CommandName::Counterexample => {
            let a = match &cli.command {
                Some(Command::Counterexample(a)) => a,
                _ => &empty_ce,
            };
            run_counterexample(settings, a)
        }
        CommandName::Poincare => {
            let a = match &cli.command {
                Some(Command::Poincare(a)) => a,
                _ => &empty_pc,
            };
            run_poincare(settings, a)
        }
        CommandName::CorpusDump => run_corpus_dump(settings),
    }
}

fn exit_code(e: &CknError) -> i32 {
    match e {
        CknError::Config(_) => EXIT_CONFIG,
        _ => EXIT_VIOLATION,
    }
}

/// Runs a parsed command line, writing the report and a summary line.
pub fn run_with<W: Write, E: Write>(cli: &Cli, stdout: &mut W, stderr: &mut E) -> i32 {
    let settings = match resolve(cli) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match settings.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli, &settings)),
            Err(e) => Err(CknError::Config(format!("cannot start {n} workers: {e}"))),
        },
        None => execute(cli, &settings),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &settings.output {
        Some(path) => fs::write(path, &outcome.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(outcome.text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_VIOLATION;
    }
    let _ = writeln!(stderr, "{}", outcome.summary);
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

/// Parses `args` (program name first) and runs.
pub fn run_args<I, T, W: Write, E: Write>(args: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_with(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(stderr, "{}", e.render());
            code
        }
    }
}
