//! Command-line front end for the `faceagg` library.
//!
//! Every subcommand follows the same shape: load (or generate) a dataset,
//! run one analysis, and emit a report to stdout or `--out`. Reports carry a
//! provenance block — tool version, exact command, input fingerprints — so a
//! result can always be traced back to what produced it. Warnings and
//! provenance for non-embedding formats go to stderr; stdout stays clean for
//! piping.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags or values), 2 for
//! data errors (missing or malformed inputs, impossible splits).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use faceagg::aggregation::AggregationStrategy;
use faceagg::analysis::{
    greedy_select, plateau_curve_with_metric, rolling_template_curve, subsample_every_nth,
    CurvePoint, CurveSeries, PlateauMetric,
};
use faceagg::embedding::Embedding;
use faceagg::evaluation::{
    evaluate_strategies, split_gallery, EvaluationConfig, EvaluationError, NonmatchSampling,
    SplitSpec,
};
use faceagg::io::dataset::{
    export_delimited, import_delimited, load_dataset, save_dataset, DatasetIoError,
    LoadedDataset, TagsColumn, MATRIX_FILE,
};
use faceagg::io::report::{
    CurveReport, GreedyReport, PersonTrace, Provenance, ReportDocument, ReportFormat,
    ReportPayload,
};
use faceagg::io::sha256_hex;
use faceagg::synthgen::{generate_dataset, SemanticVariation, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Environment variable capping the worker thread pool (same as `--workers`).
pub const WORKERS_ENV: &str = "FACEAGG_WORKERS";

#[derive(Parser)]
#[command(
    name = "faceagg",
    version,
    about = "Aggregate face-embedding sets into templates and evaluate matching strategies"
)]
struct Cli {
    /// Worker threads (overrides FACEAGG_WORKERS; default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known per-person centers
    Synth(SynthArgs),
    /// Compare aggregation strategies by match / non-match distance
    Evaluate(EvaluateArgs),
    /// Distance from the running mean template to each incoming image
    Plateau(PlateauArgs),
    /// Match error against held-out images as the template grows
    Rolling(RollingArgs),
    /// Greedily pick the template images that lower match error most
    Greedy(GreedyArgs),
    /// Convert between the dataset format and delimited text
    Convert(ConvertArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write manifest.json and embeddings.f32le into
    #[arg(long)]
    out: PathBuf,
    /// Dataset name recorded in the manifest
    #[arg(long, default_value = "synthetic")]
    name: String,
    #[arg(long, default_value_t = 50)]
    persons: usize,
    /// Images per person
    #[arg(long, default_value_t = 30)]
    images: usize,
    /// Embedding dimensionality
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Radius of the sphere person centers are drawn on
    #[arg(long, default_value_t = 1.0)]
    center_scale: f64,
    /// Per-coordinate standard deviation of image noise
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Split each person into this many tagged sub-clusters
    #[arg(long)]
    semantic_clusters: Option<usize>,
    /// Per-coordinate scale of each sub-cluster's offset (default 0.1)
    #[arg(long, requires = "semantic_clusters")]
    semantic_offset: Option<f64>,
}

#[derive(Args)]
struct TemplateArgs {
    /// How many leading images form the template pool
    #[arg(long, default_value_t = 10)]
    n_template: usize,
    /// Comma-separated tags; only pool images carrying one stay eligible
    #[arg(long)]
    template_tags: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Report format: table, csv, or json
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset manifest to evaluate
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated strategy names, or "all"
    #[arg(long, default_value = "all")]
    strategies: String,
    #[command(flatten)]
    template: TemplateArgs,
    /// Which eligible template image the baseline strategy uses
    #[arg(long, default_value_t = 0)]
    baseline_index: usize,
    /// Non-match probes: auto, full, or sampled:<count>
    #[arg(long, default_value = "auto", value_parser = parse_nonmatch)]
    nonmatch: NonmatchSampling,
    /// Seed for non-match probe sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PlateauArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Distance metric: l2 or l1
    #[arg(long, default_value = "l2")]
    metric: PlateauMetric,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RollingArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Use the first N images as the template sequence
    #[arg(long, conflicts_with = "n_test")]
    n_template: Option<usize>,
    /// Hold out the last N images as tests (default when neither flag given: 10)
    #[arg(long)]
    n_test: Option<usize>,
    /// Keep every n-th template image before folding
    #[arg(long, default_value = "1")]
    every_nth: NonZeroUsize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Maximum number of images to pick per person
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[command(flatten)]
    template: TemplateArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("direction").required(true).args(["csv", "manifest"]))]
struct ConvertArgs {
    /// Import this delimited file into a dataset directory
    #[arg(long, requires = "out")]
    csv: Option<PathBuf>,
    /// Dataset directory to write on import
    #[arg(long, conflicts_with = "manifest")]
    out: Option<PathBuf>,
    /// Dataset name recorded on import
    #[arg(long, default_value = "imported")]
    name: String,
    /// Export this dataset to delimited text
    #[arg(long, requires = "csv_out")]
    manifest: Option<PathBuf>,
    /// Delimited file to write on export
    #[arg(long, conflicts_with = "csv")]
    csv_out: Option<PathBuf>,
    /// Field delimiter (single ASCII character)
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Whether the third input column holds tags: auto, yes, or no
    #[arg(long, default_value = "auto")]
    tags: TagsColumn,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<DatasetIoError> for CliError {
    fn from(e: DatasetIoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Split-spec and strategy-list problems are the caller's flags, not the
/// data's fault; everything else from evaluation is a data error.
fn eval_error(e: EvaluationError) -> CliError {
    match e {
        EvaluationError::InvalidSplitSpec(_) | EvaluationError::NoStrategies => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Data(e.to_string()),
    }
}

/// Parses argv and runs one command, returning the process exit code.
///
/// Kept separate from `main` so tests can call it in-process.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests arrive here too; only real parse
            // failures are usage errors.
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    if let Err(message) = configure_workers(cli.workers) {
        eprintln!("error: {message}");
        return EXIT_USAGE;
    }
    let command_line = argv.join(" ");
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args, &command_line),
        Command::Evaluate(args) => cmd_evaluate(args, &command_line),
        Command::Plateau(args) => cmd_plateau(args, &command_line),
        Command::Rolling(args) => cmd_rolling(args, &command_line),
        Command::Greedy(args) => cmd_greedy(args, &command_line),
        Command::Convert(args) => cmd_convert(args, &command_line),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            EXIT_USAGE
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            EXIT_DATA
        }
    }
}

/// Sizes the global worker pool from `--workers` or the environment.
///
/// Results do not depend on the pool size — this is purely a resource cap.
/// Repeated in-process calls keep the first pool; that only affects thread
/// count, never output.
fn configure_workers(flag: Option<usize>) -> Result<(), String> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(value) => Some(value.trim().parse::<usize>().map_err(|_| {
                format!("{WORKERS_ENV} must be a positive integer, got '{value}'")
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err("worker count must be at least 1".into());
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn parse_strategies(spec: &str) -> Result<Vec<AggregationStrategy>, CliError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(AggregationStrategy::ALL.to_vec());
    }
    let mut strategies = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        strategies.push(part.parse().map_err(CliError::Usage)?);
    }
    if strategies.is_empty() {
        return Err(CliError::Usage("no strategies given".into()));
    }
    Ok(strategies)
}

fn parse_nonmatch(spec: &str) -> Result<NonmatchSampling, String> {
    let lower = spec.to_ascii_lowercase();
    match lower.as_str() {
        "auto" => Ok(NonmatchSampling::Auto),
        "full" => Ok(NonmatchSampling::Full),
        other => match other.strip_prefix("sampled:") {
            Some(count) => {
                let probes_per_person: usize = count
                    .parse()
                    .map_err(|_| format!("expected sampled:<count>, got '{spec}'"))?;
                if probes_per_person == 0 {
                    return Err("sampled probe count must be at least 1".into());
                }
                Ok(NonmatchSampling::SampledPerPerson { probes_per_person })
            }
            None => Err(format!(
                "expected auto, full, or sampled:<count>; got '{spec}'"
            )),
        },
    }
}

fn parse_tags(spec: &str) -> Result<BTreeSet<String>, CliError> {
    let tags: BTreeSet<String> = spec
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    if tags.is_empty() {
        return Err(CliError::Usage("tag filter must name at least one tag".into()));
    }
    Ok(tags)
}

fn delimiter_byte(c: char) -> Result<u8, CliError> {
    u8::try_from(c)
        .map_err(|_| CliError::Usage(format!("delimiter must be a single ASCII character, got '{c}'")))
}

fn dataset_provenance(loaded: &LoadedDataset, command_line: &str) -> Provenance {
    let mut provenance = Provenance::new(command_line);
    provenance.manifest_path = Some(loaded.manifest_path.display().to_string());
    provenance.manifest_sha256 = Some(loaded.manifest_sha256.clone());
    provenance.matrix_sha256 = Some(loaded.matrix_sha256.clone());
    provenance
}

fn flag_map<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Renders and delivers a report. CSV strips the provenance comments and
/// `--out` hides them from the terminal, so both cases echo the block to
/// stderr; stdout/file content stays machine-clean.
fn emit(doc: &ReportDocument, output: &OutputArgs) -> Result<(), CliError> {
    let text = doc.render(output.format);
    if output.format == ReportFormat::Csv || output.out.is_some() {
        eprint!("{}", doc.provenance.comment_lines());
    }
    match &output.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => write_text_atomic(path, &text),
    }
}

fn write_text_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(())
}

fn cmd_synth(args: SynthArgs, command_line: &str) -> Result<(), CliError> {
    let semantic = args.semantic_clusters.map(|clusters| SemanticVariation {
        clusters,
        offset_scale: args.semantic_offset.unwrap_or(0.1),
    });
    let spec = SynthSpec {
        n_persons: args.persons,
        images_per_person: args.images,
        dim: args.dim,
        center_scale: args.center_scale,
        intra_noise: args.noise,
        seed: args.seed,
        semantic,
    };
    let dataset = generate_dataset(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let manifest_path = save_dataset(&dataset.galleries, &args.name, &args.out)?;

    let mut provenance = Provenance::new(command_line);
    provenance.manifest_path = Some(manifest_path.display().to_string());
    provenance.manifest_sha256 = Some(sha256_hex(&std::fs::read(&manifest_path)?));
    provenance.matrix_sha256 = Some(sha256_hex(&std::fs::read(args.out.join(MATRIX_FILE))?));
    provenance.flags = flag_map([
        ("center-scale", args.center_scale.to_string()),
        ("dim", args.dim.to_string()),
        ("images", args.images.to_string()),
        ("noise", args.noise.to_string()),
        ("persons", args.persons.to_string()),
        ("seed", args.seed.to_string()),
    ]);
    if let Some(semantic) = &spec.semantic {
        provenance
            .flags
            .insert("semantic-clusters".into(), semantic.clusters.to_string());
        provenance
            .flags
            .insert("semantic-offset".into(), semantic.offset_scale.to_string());
    }
    eprint!("{}", provenance.comment_lines());
    eprintln!(
        "# wrote {} persons x {} images (dim {})",
        args.persons, args.images, args.dim
    );
    // The manifest path on stdout is the command's one machine-readable
    // output, ready for $(...) in scripts.
    println!("{}", manifest_path.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, command_line: &str) -> Result<(), CliError> {
    let strategies = parse_strategies(&args.strategies)?;
    let template_tag_filter = args
        .template
        .template_tags
        .as_deref()
        .map(parse_tags)
        .transpose()?;
    let loaded = load_dataset(&args.manifest)?;
    let config = EvaluationConfig {
        dataset_name: loaded.manifest.dataset_name.clone(),
        strategies,
        split: SplitSpec {
            n_template: args.template.n_template,
            template_tag_filter,
            baseline_index: args.baseline_index,
        },
        sampling: args.nonmatch,
        seed: args.seed,
    };
    let report = evaluate_strategies(&loaded.galleries, &config).map_err(eval_error)?;
    for skipped in &report.metadata.persons_skipped {
        eprintln!("warning: skipped {}: {}", skipped.person_id, skipped.reason);
    }

    let mut provenance = dataset_provenance(&loaded, command_line);
    provenance.flags = flag_map([
        ("baseline-index", args.baseline_index.to_string()),
        ("n-template", args.template.n_template.to_string()),
        ("seed", args.seed.to_string()),
        ("strategies", args.strategies.clone()),
    ]);
    if let Some(tags) = &args.template.template_tags {
        provenance.flags.insert("template-tags".into(), tags.clone());
    }
    let doc = ReportDocument {
        provenance,
        payload: ReportPayload::Evaluation(report),
    };
    emit(&doc, &args.output)
}

/// Mean value at each index across the series that reach it. `None` when
/// there is only one series (it would just repeat it).
fn average_series(series: &[CurveSeries]) -> Option<CurveSeries> {
    if series.len() < 2 {
        return None;
    }
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for s in series {
        for point in &s.points {
            let entry = sums.entry(point.index).or_insert((0.0, 0));
            entry.0 += point.value;
            entry.1 += 1;
        }
    }
    Some(CurveSeries {
        label: "average".into(),
        points: sums
            .into_iter()
            .map(|(index, (sum, count))| CurvePoint {
                index,
                value: sum / count as f64,
            })
            .collect(),
    })
}

fn cmd_plateau(args: PlateauArgs, command_line: &str) -> Result<(), CliError> {
    let loaded = load_dataset(&args.manifest)?;
    let mut series = Vec::new();
    for gallery in &loaded.galleries {
        if gallery.images.len() < 2 {
            eprintln!(
                "warning: skipping {}: needs at least 2 images, has {}",
                gallery.person_id,
                gallery.images.len()
            );
            continue;
        }
        let embeddings: Vec<Embedding> = gallery
            .images
            .iter()
            .map(|image| image.embedding.clone())
            .collect();
        let curve = plateau_curve_with_metric(&embeddings, args.metric)
            .map_err(|e| CliError::Data(format!("{}: {e}", gallery.person_id)))?;
        series.push(curve.relabeled(gallery.person_id.clone()));
    }
    if series.is_empty() {
        return Err(CliError::Data("no person has at least 2 images".into()));
    }

    let average = average_series(&series);
    let mut provenance = dataset_provenance(&loaded, command_line);
    provenance.flags = flag_map([("metric", args.metric.to_string())]);
    let doc = ReportDocument {
        provenance,
        payload: ReportPayload::Curves(CurveReport { series, average }),
    };
    emit(&doc, &args.output)
}

fn cmd_rolling(args: RollingArgs, command_line: &str) -> Result<(), CliError> {
    let loaded = load_dataset(&args.manifest)?;
    let mut series = Vec::new();
    for gallery in &loaded.galleries {
        let total = gallery.images.len();
        let template_len = match (args.n_template, args.n_test) {
            (Some(n), None) => n,
            (None, Some(held_out)) => total.saturating_sub(held_out),
            (None, None) => total.saturating_sub(10),
            (Some(_), Some(_)) => unreachable!("flags conflict"),
        };
        if template_len == 0 || template_len >= total {
            eprintln!(
                "warning: skipping {}: cannot split {total} images into {template_len} template + {} test",
                gallery.person_id,
                total.saturating_sub(template_len)
            );
            continue;
        }
        let template: Vec<Embedding> = gallery.images[..template_len]
            .iter()
            .map(|image| image.embedding.clone())
            .collect();
        let tests: Vec<Embedding> = gallery.images[template_len..]
            .iter()
            .map(|image| image.embedding.clone())
            .collect();
        let template = subsample_every_nth(&template, args.every_nth);
        let curve = rolling_template_curve(&template, &tests)
            .map_err(|e| CliError::Data(format!("{}: {e}", gallery.person_id)))?;
        series.push(curve.relabeled(gallery.person_id.clone()));
    }
    if series.is_empty() {
        return Err(CliError::Data(
            "no person can be split into template and test images".into(),
        ));
    }

    let average = average_series(&series);
    let mut provenance = dataset_provenance(&loaded, command_line);
    provenance.flags = flag_map([("every-nth", args.every_nth.to_string())]);
    match (args.n_template, args.n_test) {
        (Some(n), _) => {
            provenance.flags.insert("n-template".into(), n.to_string());
        }
        (None, held_out) => {
            provenance
                .flags
                .insert("n-test".into(), held_out.unwrap_or(10).to_string());
        }
    }
    let doc = ReportDocument {
        provenance,
        payload: ReportPayload::Curves(CurveReport { series, average }),
    };
    emit(&doc, &args.output)
}

fn cmd_greedy(args: GreedyArgs, command_line: &str) -> Result<(), CliError> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let template_tag_filter = args
        .template
        .template_tags
        .as_deref()
        .map(parse_tags)
        .transpose()?;
    let loaded = load_dataset(&args.manifest)?;
    let spec = SplitSpec {
        n_template: args.template.n_template,
        template_tag_filter,
        baseline_index: 0,
    };

    let mut per_person = Vec::new();
    for gallery in &loaded.galleries {
        let split = match split_gallery(gallery, &spec) {
            Ok(split) => split,
            Err(
                e @ (EvaluationError::TooFewImages { .. }
                | EvaluationError::EmptyTemplateAfterFilter { .. }),
            ) => {
                eprintln!("warning: skipping: {e}");
                continue;
            }
            Err(e) => return Err(eval_error(e)),
        };
        let candidates: Vec<Embedding> = split
            .template
            .iter()
            .map(|image| image.embedding.clone())
            .collect();
        let tests: Vec<Embedding> = split
            .test
            .iter()
            .map(|image| image.embedding.clone())
            .collect();
        // Persons with fewer eligible images than k still contribute a
        // shorter trace; the report shows how far each one got.
        let k = args.k.min(candidates.len());
        let trace = greedy_select(&candidates, &tests, k)
            .map_err(|e| CliError::Data(format!("{}: {e}", gallery.person_id)))?;
        per_person.push(PersonTrace {
            person_id: gallery.person_id.clone(),
            selected: trace
                .selected
                .iter()
                .map(|&i| split.template[i].source_name.clone())
                .collect(),
            distances: trace.distances,
            stopped_early: trace.stopped_early,
        });
    }
    if per_person.is_empty() {
        return Err(CliError::Data(
            "no person can be split into template and test images".into(),
        ));
    }

    let max_steps = per_person
        .iter()
        .map(|trace| trace.distances.len())
        .max()
        .unwrap_or(0);
    // Persons whose selection ended early keep their final distance in later
    // steps: their template simply stops changing.
    let average_after_step: Vec<f64> = (0..max_steps)
        .map(|step| {
            per_person
                .iter()
                .map(|trace| trace.distances[step.min(trace.distances.len() - 1)])
                .sum::<f64>()
                / per_person.len() as f64
        })
        .collect();

    let mut provenance = dataset_provenance(&loaded, command_line);
    provenance.flags = flag_map([
        ("k", args.k.to_string()),
        ("n-template", args.template.n_template.to_string()),
    ]);
    if let Some(tags) = &args.template.template_tags {
        provenance.flags.insert("template-tags".into(), tags.clone());
    }
    let doc = ReportDocument {
        provenance,
        payload: ReportPayload::Greedy(GreedyReport {
            per_person,
            average_after_step,
        }),
    };
    emit(&doc, &args.output)
}

fn cmd_convert(args: ConvertArgs, _command_line: &str) -> Result<(), CliError> {
    let delimiter = delimiter_byte(args.delimiter)?;
    if let Some(csv_path) = &args.csv {
        let out_dir = args
            .out
            .as_ref()
            .expect("clap enforces --out with --csv");
        let galleries = import_delimited(csv_path, delimiter, args.tags)?;
        let images: usize = galleries.iter().map(|g| g.images.len()).sum();
        let manifest_path = save_dataset(&galleries, &args.name, out_dir)?;
        eprintln!(
            "# imported {} persons ({images} images) from {}",
            galleries.len(),
            csv_path.display()
        );
        println!("{}", manifest_path.display());
    } else {
        let manifest_path = args.manifest.as_ref().expect("clap requires a direction");
        let csv_out = args
            .csv_out
            .as_ref()
            .expect("clap enforces --csv-out with --manifest");
        let loaded = load_dataset(manifest_path)?;
        let images: usize = loaded.galleries.iter().map(|g| g.images.len()).sum();
        export_delimited(&loaded.galleries, csv_out, delimiter)?;
        eprintln!(
            "# exported {} persons ({images} images) to {}",
            loaded.galleries.len(),
            csv_out.display()
        );
    }
    Ok(())
}
