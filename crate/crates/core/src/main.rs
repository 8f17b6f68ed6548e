use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use sepscan::estimator::{
    absolute_separability_probability, ansatz_dispersion, curve_based_probability, detect_jumps, estimate_curve,
    fit_segment, separability_probability, SamplerConfig, SeparabilityCurve, DEFAULT_BINS, DEFAULT_GROUP_SAMPLES,
    DEFAULT_SPECTRA_PER_BIN, DEFAULT_Z_THRESHOLD,
};
use sepscan::io::{read_curve_csv, render_svg, write_curve_csv, Series};
use sepscan::measures::{MeasureSpec, Metric};
use sepscan::sampling::{SequenceKind, DEFAULT_MAX_REJECTS};
use sepscan::{validate, Ensemble, Error, Result};

const SEED_ENV: &str = "SEPSCAN_SEED";
const DEFAULT_SEED: u64 = 42;
const DEFAULT_N_LAMBDA: usize = 20_000;
const DEFAULT_PROB_GROUP_SAMPLES: usize = 100;

#[derive(Parser)]
#[command(name = "sepscan", version, about = "Two-qubit separability over spectral orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate sigma(C) on a bin grid; writes CSV and an SVG plot beside it.
    Curve(CurveArgs),
    /// Separability probability by direct Haar averaging.
    Prob(ProbArgs),
    /// Separability probability read off a stored curve.
    Curveprob(CurveProbArgs),
    /// Absolute-separability probability.
    Absep(AbsepArgs),
    /// Detect discontinuities in a stored curve.
    Jumps(JumpsArgs),
    /// Weighted linear fit of a curve segment.
    Fit(FitArgs),
    /// Spread of per-spectrum separable fractions on one fixed-C slice.
    Dispersion(DispersionArgs),
    /// Run the invariant suite.
    Validate,
}

#[derive(Args, Clone)]
struct SamplingArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = one per core). Never changes results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// sobol or random.
    #[arg(long, default_value = "sobol")]
    sequence: SequenceKind,
    #[arg(long, default_value_t = DEFAULT_MAX_REJECTS)]
    max_rejects: u64,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    ensemble: Ensemble,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_SPECTRA_PER_BIN)]
    spectra_per_bin: usize,
    #[arg(long, default_value_t = DEFAULT_GROUP_SAMPLES)]
    group_samples: usize,
    #[arg(long)]
    out: PathBuf,
    /// Second curve CSV drawn in the same plot.
    #[arg(long)]
    overlay: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args)]
struct ProbArgs {
    #[arg(long)]
    metric: Metric,
    #[arg(long)]
    ensemble: Ensemble,
    #[arg(long, default_value_t = DEFAULT_N_LAMBDA)]
    n_lambda: usize,
    #[arg(long, default_value_t = DEFAULT_PROB_GROUP_SAMPLES)]
    group_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args)]
struct CurveProbArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    metric: Metric,
    #[arg(long)]
    ensemble: Ensemble,
    #[arg(long, default_value_t = DEFAULT_N_LAMBDA)]
    n_lambda: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args)]
struct AbsepArgs {
    #[arg(long)]
    metric: Metric,
    #[arg(long)]
    ensemble: Ensemble,
    #[arg(long, default_value_t = DEFAULT_N_LAMBDA)]
    n_lambda: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args)]
struct JumpsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    z_threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// C values whose nearest bin is left out; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DispersionArgs {
    #[arg(long)]
    ensemble: Ensemble,
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_SPECTRA_PER_BIN)]
    spectra_per_bin: usize,
    #[arg(long, default_value_t = DEFAULT_GROUP_SAMPLES)]
    group_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

/// Reproducibility record embedded in every JSON output.
#[derive(Serialize, Default)]
struct RunConfig {
    command: &'static str,
    ensemble: Option<Ensemble>,
    metric: Option<Metric>,
    bins: Option<usize>,
    spectra_per_bin: Option<usize>,
    group_samples: Option<usize>,
    n_lambda: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    sequence: Option<SequenceKind>,
    max_rejects: Option<u64>,
    output_path: Option<PathBuf>,
    input_path: Option<PathBuf>,
}

fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(Error::Config(format!("{SEED_ENV}: {e}"))),
    }
}

fn sampler(args: &SamplingArgs) -> Result<SamplerConfig> {
    if args.max_rejects == 0 {
        return Err(Error::Config("--max-rejects must be positive".into()));
    }
    Ok(SamplerConfig {
        sequence: args.sequence,
        seed: effective_seed(args.seed)?,
        workers: args.workers,
        max_rejects: args.max_rejects,
    })
}

fn positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::Config(format!("--{name} must be positive")));
    }
    Ok(())
}

fn with_sampler(mut rc: RunConfig, cfg: &SamplerConfig) -> RunConfig {
    rc.seed = Some(cfg.seed);
    rc.workers = Some(cfg.workers);
    rc.sequence = Some(cfg.sequence);
    rc.max_rejects = Some(cfg.max_rejects);
    rc
}

fn load_curve(path: &Path) -> Result<SeparabilityCurve> {
    let file = File::open(path).map_err(|e| Error::Io(format!("cannot open {}: {e}", path.display())))?;
    read_curve_csv(BufReader::new(file))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

/// Merges the run record and `result` into one flat object and prints it.
fn emit(rc: &RunConfig, result: impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut object = Map::new();
    let mut merge = |v: Value| {
        if let Value::Object(m) = v {
            object.extend(m);
        }
    };
    merge(serde_json::to_value(rc).map_err(|e| Error::Numerical(e.to_string()))?);
    merge(serde_json::to_value(result).map_err(|e| Error::Numerical(e.to_string()))?);
    let text = serde_json::to_string_pretty(&Value::Object(object)).map_err(|e| Error::Numerical(e.to_string()))?;
    println!("{text}");
    if let Some(path) = out {
        write_text(path, &(text + "\n"))?;
    }
    Ok(())
}

fn run_curve(a: CurveArgs) -> Result<()> {
    positive("bins", a.bins)?;
    positive("spectra-per-bin", a.spectra_per_bin)?;
    positive("group-samples", a.group_samples)?;
    let cfg = sampler(&a.sampling)?;
    let overlay = a.overlay.as_deref().map(load_curve).transpose()?;
    let curve = estimate_curve(a.ensemble, a.bins, a.spectra_per_bin, a.group_samples, &cfg)?;

    let file = File::create(&a.out).map_err(|e| Error::Io(format!("cannot create {}: {e}", a.out.display())))?;
    let mut writer = BufWriter::new(file);
    write_curve_csv(&curve, &mut writer)?;
    writer.flush().map_err(|e| Error::Io(format!("cannot write {}: {e}", a.out.display())))?;

    let label = a.ensemble.to_string();
    let overlay_label = a
        .overlay
        .as_deref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut series = vec![Series { label: &label, curve: &curve, color: "#1f4e9c" }];
    if let Some(other) = &overlay {
        series.push(Series { label: &overlay_label, curve: other, color: "#c0392b" });
    }
    let svg_path = a.out.with_extension("svg");
    write_text(&svg_path, &render_svg("Separability against maximal concurrence", &series))?;

    let rc = with_sampler(
        RunConfig {
            command: "curve",
            ensemble: Some(a.ensemble),
            bins: Some(a.bins),
            spectra_per_bin: Some(a.spectra_per_bin),
            group_samples: Some(a.group_samples),
            output_path: Some(a.out.clone()),
            input_path: a.overlay.clone(),
            ..Default::default()
        },
        &cfg,
    );
    #[derive(Serialize)]
    struct Summary {
        rows: usize,
        svg_path: PathBuf,
    }
    emit(&rc, Summary { rows: curve.bins.len(), svg_path }, None)
}

fn run_prob(a: ProbArgs) -> Result<()> {
    positive("n-lambda", a.n_lambda)?;
    positive("group-samples", a.group_samples)?;
    let cfg = sampler(&a.sampling)?;
    let spec = MeasureSpec::two_qubit(a.metric, a.ensemble);
    let est = separability_probability(&spec, a.ensemble, a.n_lambda, a.group_samples, &cfg)?;
    let rc = with_sampler(
        RunConfig {
            command: "prob",
            ensemble: Some(a.ensemble),
            metric: Some(a.metric),
            group_samples: Some(a.group_samples),
            n_lambda: Some(a.n_lambda),
            output_path: a.out.clone(),
            ..Default::default()
        },
        &cfg,
    );
    emit(&rc, est, a.out.as_deref())
}

fn run_curveprob(a: CurveProbArgs) -> Result<()> {
    positive("n-lambda", a.n_lambda)?;
    let cfg = sampler(&a.sampling)?;
    let curve = load_curve(&a.input)?.with_ensemble(a.ensemble);
    let spec = MeasureSpec::two_qubit(a.metric, a.ensemble);
    let est = curve_based_probability(&curve, &spec, a.n_lambda, &cfg)?;
    let rc = with_sampler(
        RunConfig {
            command: "curveprob",
            ensemble: Some(a.ensemble),
            metric: Some(a.metric),
            bins: Some(curve.bin_count()),
            n_lambda: Some(a.n_lambda),
            output_path: a.out.clone(),
            input_path: Some(a.input.clone()),
            ..Default::default()
        },
        &cfg,
    );
    emit(&rc, est, a.out.as_deref())
}

fn run_absep(a: AbsepArgs) -> Result<()> {
    positive("n-lambda", a.n_lambda)?;
    let cfg = sampler(&a.sampling)?;
    let spec = MeasureSpec::two_qubit(a.metric, a.ensemble);
    let est = absolute_separability_probability(&spec, a.n_lambda, &cfg)?;
    let rc = with_sampler(
        RunConfig {
            command: "absep",
            ensemble: Some(a.ensemble),
            metric: Some(a.metric),
            n_lambda: Some(a.n_lambda),
            output_path: a.out.clone(),
            ..Default::default()
        },
        &cfg,
    );
    emit(&rc, est, a.out.as_deref())
}

fn run_jumps(a: JumpsArgs) -> Result<()> {
    let curve = load_curve(&a.input)?;
    let report = detect_jumps(&curve, a.z_threshold)?;
    let rc = RunConfig {
        command: "jumps",
        bins: Some(curve.bin_count()),
        output_path: a.out.clone(),
        input_path: Some(a.input.clone()),
        ..Default::default()
    };
    emit(&rc, report, a.out.as_deref())
}

fn run_fit(a: FitArgs) -> Result<()> {
    let curve = load_curve(&a.input)?;
    let fit = fit_segment(&curve, a.from, a.to, &a.exclude)?;
    let rc = RunConfig {
        command: "fit",
        bins: Some(curve.bin_count()),
        output_path: a.out.clone(),
        input_path: Some(a.input.clone()),
        ..Default::default()
    };
    emit(&rc, fit, a.out.as_deref())
}

fn run_dispersion(a: DispersionArgs) -> Result<()> {
    let cfg = sampler(&a.sampling)?;
    let d = ansatz_dispersion(a.ensemble, a.c, a.spectra_per_bin, a.group_samples, &cfg)?;
    let rc = with_sampler(
        RunConfig {
            command: "dispersion",
            ensemble: Some(a.ensemble),
            spectra_per_bin: Some(a.spectra_per_bin),
            group_samples: Some(a.group_samples),
            output_path: a.out.clone(),
            ..Default::default()
        },
        &cfg,
    );
    emit(&rc, d, a.out.as_deref())
}

fn run_validate() -> Result<()> {
    let checks = validate::run_all();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        return Err(Error::Numerical(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve(a) => run_curve(a),
        Command::Prob(a) => run_prob(a),
        Command::Curveprob(a) => run_curveprob(a),
        Command::Absep(a) => run_absep(a),
        Command::Jumps(a) => run_jumps(a),
        Command::Fit(a) => run_fit(a),
        Command::Dispersion(a) => run_dispersion(a),
        Command::Validate => run_validate(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sepscan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
