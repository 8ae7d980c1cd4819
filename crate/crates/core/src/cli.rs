//! Command-line front end. [`run`] parses arguments, executes one pipeline
//! stage and maps errors to a single `error[<code>]: <message>` line on
//! stderr plus a non-zero exit status.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::datamodel::{
    read_cube, read_gram, read_labels, read_sequences, write_atomic, write_cube, write_gram,
    write_labels, write_sequences, FeatureSequence, GramMatrix, SequenceRecord,
};
use crate::error::{Error, Result};
use crate::eval::{
    compute_metrics, cross_validate_with, run_experiment, split_indices, CvGrid, CvOptions,
    ExperimentConfig, KernelRoute, Method, SplitSpec,
};
use crate::hierarchy::{
    import_hierarchy, segment, segment_standardized, Hierarchy, SequenceExtractor, Standardizer,
};
use crate::kernel::{gram, stacked_gram, KernelConfig, Weighting};
use crate::svm::{self, SvmModel};
use crate::synth::{synth, SynthSpec};

/// Exit status for I/O failures such as a missing input file.
pub const EXIT_IO: i32 = 2;
/// Exit status for every other failure.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "hsk", version, about = "Hierarchical spectrum kernels for hyperspectral pixel classification")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "HSK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cube and label raster.
    Synth(SynthArgs),
    /// Build a region hierarchy by best-merge region growing.
    Segment(SegmentArgs),
    /// Assemble a hierarchy from externally computed label maps (fine to coarse).
    ImportHierarchy(ImportArgs),
    /// Extract the ancestor feature sequence of every labeled pixel.
    Sequences(SequencesArgs),
    /// Draw a per-class random training set from a sequence file.
    Split(SplitArgs),
    /// Compute a spectrum (or stacked Gaussian) kernel matrix.
    Gram(GramArgs),
    /// Train a one-against-one SVM on a precomputed kernel.
    Train(TrainArgs),
    /// Classify the rows of a test-vs-train kernel.
    Predict(PredictArgs),
    /// Score predictions against the labels of a sequence file.
    Score(ScoreArgs),
    /// Grid search by stratified k-fold cross-validation.
    Cv(CvArgs),
    /// Run the repeated split / cross-validate / train / test protocol.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 32)]
    rows: usize,
    #[arg(long, default_value_t = 32)]
    cols: usize,
    #[arg(long, default_value_t = 8)]
    bands: usize,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    /// Standard deviation of the per-pixel Gaussian noise.
    #[arg(long, default_value_t = 1.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output cube (HSC1).
    #[arg(long)]
    cube: PathBuf,
    /// Output label raster (HSL1).
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    cube: PathBuf,
    /// Merge thresholds: `2^-2..2^8` or a comma-separated list.
    #[arg(long, default_value = "2^-2..2^8")]
    alphas: String,
    /// Merge on raw band values instead of per-band z-scores.
    #[arg(long)]
    raw: bool,
    /// Output directory for the level maps and manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ImportArgs {
    /// Label maps (HSL1 or HSH1), finest first.
    #[arg(long, num_args = 1.., required = true)]
    maps: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SequencesArgs {
    #[arg(long)]
    cube: PathBuf,
    /// Hierarchy directory written by `segment` or `import-hierarchy`.
    #[arg(long)]
    hierarchy: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Coarse levels dropped from the top of every sequence.
    #[arg(long, default_value_t = 0)]
    discard: usize,
    /// Also emit unlabeled pixels (class 0).
    #[arg(long)]
    all: bool,
    /// Output sequence file (HSQ1).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    sequences: PathBuf,
    /// Training samples per class.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Always keep n per class, even for classes smaller than 2n.
    #[arg(long)]
    no_half_rule: bool,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Debug, Args)]
struct GramArgs {
    /// Row samples (HSQ1).
    #[arg(long)]
    sequences: PathBuf,
    /// Column samples; the rows themselves when omitted. Pass the training
    /// set here to build a test-vs-train kernel.
    #[arg(long)]
    columns: Option<PathBuf>,
    #[arg(long)]
    gamma: f64,
    /// `q=<k>`, `const` or `decay=<lambda>`.
    #[arg(long, default_value = "const")]
    weighting: Weighting,
    #[arg(long)]
    no_normalize: bool,
    /// Gaussian kernel on stacked vectors instead of the spectrum kernel.
    #[arg(long)]
    stacked: bool,
    /// Skip feature standardization (otherwise fitted on the column samples).
    #[arg(long)]
    no_standardize: bool,
    /// Keep only the first `depth` levels of every sequence.
    #[arg(long)]
    depth: Option<usize>,
    /// Output kernel (HSG1 for a self kernel, HSR1 otherwise).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    gram: PathBuf,
    /// Sequence file supplying the class of every kernel row, matched by ID.
    #[arg(long)]
    labels_from_sequences: PathBuf,
    #[arg(long = "C", alias = "c")]
    c: f64,
    #[arg(long, default_value_t = svm::DEFAULT_TOL)]
    tol: f64,
    /// Output model (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Test-vs-train kernel whose columns follow the model's training IDs.
    #[arg(long)]
    gram: PathBuf,
    /// Output CSV of `sample_id,predicted_class`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// CSV written by `predict`.
    #[arg(long)]
    predictions: PathBuf,
    /// Sequence file holding the true classes.
    #[arg(long)]
    sequences: PathBuf,
    /// Output CSV with OA, AA, kappa and per-class accuracies.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Kernel widths: `2^-6..2^4` or a comma-separated list.
    #[arg(long, default_value = "2^-6..2^4")]
    gammas: String,
    /// SVM penalties: `2^-2..2^10` or a comma-separated list.
    #[arg(long, default_value = "2^-2..2^10")]
    cs: String,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = svm::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct CvArgs {
    /// Training samples (HSQ1), standardized before the search.
    #[arg(long)]
    sequences: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Comma-separated weightings, e.g. `const,q=2,decay=0.5`.
    #[arg(long, default_value = "const")]
    weightings: String,
    #[arg(long)]
    stacked: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV with one row per grid point.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    cube: PathBuf,
    #[arg(long)]
    hierarchy: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Training samples per class.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of pixel, stacked, spectrum-c, spectrum-q,
    /// spectrum-lambda.
    #[arg(long, default_value = "pixel,stacked,spectrum-c,spectrum-q,spectrum-lambda")]
    methods: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Decay factors tried by spectrum-lambda.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    lambdas: String,
    /// q values tried by spectrum-q; every length up to the depth when omitted.
    #[arg(long)]
    q_values: Option<String>,
    #[arg(long, default_value_t = 0)]
    discard: usize,
    #[arg(long)]
    no_half_rule: bool,
    /// Per-repetition results CSV.
    #[arg(long)]
    results: PathBuf,
    /// Mean and standard deviation per method.
    #[arg(long)]
    summary: PathBuf,
}

/// Parses `2^a..2^b` (every integer power in between) or a comma-separated
/// list of numbers.
pub fn parse_number_list(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("cannot parse number list {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let power = |s: &str| -> Result<(f64, i32)> {
            let (base, exp) = s.trim().split_once('^').ok_or_else(bad)?;
            Ok((base.parse().map_err(|_| bad())?, exp.parse().map_err(|_| bad())?))
        };
        let ((b0, e0), (b1, e1)) = (power(lo)?, power(hi)?);
        if b0 != b1 || b0 <= 0.0 || e0 > e1 {
            return Err(bad());
        }
        return Ok((e0..=e1).map(|e| b0.powi(e)).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn parse_items<T: std::str::FromStr<Err = Error>>(text: &str) -> Result<Vec<T>> {
    text.split(',').map(|s| s.trim().parse()).collect()
}

fn pixel_id(row: usize, col: usize) -> String {
    format!("r{row}c{col}")
}

fn sequences_of(records: &[SequenceRecord]) -> Vec<FeatureSequence> {
    records.iter().map(|r| r.sequence.clone()).collect()
}

fn require_labeled(records: &[SequenceRecord], path: &Path) -> Result<Vec<u16>> {
    if let Some(r) = records.iter().find(|r| r.label == 0) {
        return Err(Error::invalid(format!(
            "{}: sample {} is unlabeled",
            path.display(),
            r.id
        )));
    }
    Ok(records.iter().map(|r| r.label).collect())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))
}

fn run_synth(a: SynthArgs) -> Result<()> {
    let (cube, labels) = synth(&SynthSpec {
        rows: a.rows,
        cols: a.cols,
        bands: a.bands,
        classes: a.classes,
        noise_std: a.noise,
        seed: a.seed,
    })?;
    write_cube(&cube, &a.cube)?;
    write_labels(&labels, &a.labels)
}

fn run_segment(a: SegmentArgs) -> Result<()> {
    let alphas = parse_number_list(&a.alphas)?;
    let cube = read_cube(&a.cube)?;
    let h = if a.raw {
        segment(&cube, &alphas)?
    } else {
        segment_standardized(&cube, &alphas)?
    };
    log::info!(
        "{} levels, region counts {:?}",
        h.num_levels(),
        (0..h.num_levels()).map(|l| h.region_count(l)).collect::<Vec<_>>()
    );
    h.write_dir(&a.out)
}

fn run_sequences(a: SequencesArgs) -> Result<()> {
    let cube = read_cube(&a.cube)?;
    let labels = read_labels(&a.labels)?;
    let h = Hierarchy::read_dir(&a.hierarchy)?;
    if (labels.rows(), labels.cols()) != (cube.rows(), cube.cols())
        || (h.rows(), h.cols()) != (cube.rows(), cube.cols())
    {
        return Err(Error::invalid(format!(
            "cube is {}x{}, labels {}x{}, hierarchy {}x{}",
            cube.rows(),
            cube.cols(),
            labels.rows(),
            labels.cols(),
            h.rows(),
            h.cols()
        )));
    }
    let extractor = SequenceExtractor::new(&h, &cube, a.discard)?;
    let pixels: Vec<(usize, usize)> = (0..cube.rows())
        .flat_map(|r| (0..cube.cols()).map(move |c| (r, c)))
        .filter(|&(r, c)| a.all || labels.get(r, c) != 0)
        .collect();
    let records = extractor
        .extract_many(&pixels)?
        .into_iter()
        .zip(&pixels)
        .map(|(sequence, &(r, c))| SequenceRecord {
            id: pixel_id(r, c),
            label: labels.get(r, c),
            sequence,
        })
        .collect::<Vec<_>>();
    write_sequences(&records, &a.out)
}

fn run_split(a: SplitArgs) -> Result<()> {
    let records = read_sequences(&a.sequences)?;
    let labels: Vec<u16> = records.iter().map(|r| r.label).collect();
    let spec = SplitSpec {
        n_per_class: a.n,
        seed: a.seed,
        half_class_rule: !a.no_half_rule,
    };
    let (train, test) = split_indices(&labels, &spec)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    write_sequences(&pick(&train), &a.train)?;
    write_sequences(&pick(&test), &a.test)
}

fn run_gram(a: GramArgs) -> Result<()> {
    let truncate = |recs: Vec<SequenceRecord>| -> Vec<SequenceRecord> {
        match a.depth {
            Some(d) => recs
                .into_iter()
                .map(|r| SequenceRecord { sequence: r.sequence.truncated(d), ..r })
                .collect(),
            None => recs,
        }
    };
    let rows = truncate(read_sequences(&a.sequences)?);
    let cols = a.columns.as_ref().map(read_sequences).transpose()?.map(truncate);
    let mut row_seqs = sequences_of(&rows);
    let mut col_seqs = cols.as_deref().map(sequences_of);
    if !a.no_standardize {
        let s = Standardizer::fit(col_seqs.as_deref().unwrap_or(&row_seqs))?;
        row_seqs = s.apply_all(&row_seqs)?;
        col_seqs = col_seqs.map(|c| s.apply_all(&c)).transpose()?;
    }
    let entries = if a.stacked {
        stacked_gram(&row_seqs, col_seqs.as_deref(), a.gamma)?
    } else {
        let config = KernelConfig {
            gamma: a.gamma,
            weighting: a.weighting,
            normalize: !a.no_normalize,
        };
        gram(&row_seqs, col_seqs.as_deref(), &config)?
    };
    let ids = |recs: &[SequenceRecord]| recs.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
    let matrix = match &cols {
        None => GramMatrix::square(entries, ids(&rows))?,
        Some(cols) => GramMatrix::new(entries, ids(&rows), ids(cols))?,
    };
    write_gram(&matrix, &a.out)
}

fn run_train(a: TrainArgs) -> Result<()> {
    let k = read_gram(&a.gram)?;
    let records = read_sequences(&a.labels_from_sequences)?;
    let by_id: std::collections::HashMap<&str, u16> =
        records.iter().map(|r| (r.id.as_str(), r.label)).collect();
    let labels = k
        .row_ids()
        .iter()
        .map(|id| match by_id.get(id.as_str()) {
            Some(0) => Err(Error::invalid(format!("training sample {id} is unlabeled"))),
            Some(&l) => Ok(l),
            None => Err(Error::invalid(format!(
                "kernel row {id} has no entry in {}",
                a.labels_from_sequences.display()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    svm::train(&k, &labels, a.c, a.tol)?.save(&a.out)
}

fn run_predict(a: PredictArgs) -> Result<()> {
    let model = SvmModel::load(&a.model)?;
    let k = read_gram(&a.gram)?;
    let predicted = svm::predict(&model, &k)?;
    let rows = k
        .row_ids()
        .iter()
        .zip(&predicted)
        .map(|(id, p)| vec![id.clone(), p.to_string()]);
    write_atomic(&a.out, &csv_bytes(&["sample_id", "predicted_class"], rows)?)
}

fn run_score(a: ScoreArgs) -> Result<()> {
    let text = std::fs::read(&a.predictions).map_err(|e| Error::io(&a.predictions, e))?;
    let mut reader = csv::Reader::from_reader(text.as_slice());
    let fmt = |m: String| Error::format(&a.predictions, m);
    let mut predicted = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| fmt(e.to_string()))?;
        let (Some(id), Some(class)) = (row.get(0), row.get(1)) else {
            return Err(fmt("expected sample_id,predicted_class".into()));
        };
        let class: u16 = class.parse().map_err(|_| fmt(format!("bad class {class:?}")))?;
        predicted.push((id.to_string(), class));
    }
    let records = read_sequences(&a.sequences)?;
    let truth_of: std::collections::HashMap<&str, u16> =
        records.iter().map(|r| (r.id.as_str(), r.label)).collect();
    let mut truth = Vec::with_capacity(predicted.len());
    for (id, _) in &predicted {
        match truth_of.get(id.as_str()) {
            Some(&l) if l != 0 => truth.push(l),
            _ => return Err(Error::invalid(format!("no labeled sample {id} in {}", a.sequences.display()))),
        }
    }
    let pred: Vec<u16> = predicted.iter().map(|p| p.1).collect();
    let m = compute_metrics(&pred, &truth)?;
    let mut rows = vec![
        vec!["OA".to_string(), m.overall_accuracy.to_string()],
        vec!["AA".to_string(), m.average_accuracy.to_string()],
        vec!["kappa".to_string(), m.kappa.to_string()],
    ];
    for (class, acc) in m.classes.iter().zip(&m.per_class_accuracy) {
        if let Some(acc) = acc {
            rows.push(vec![format!("class_{class}"), acc.to_string()]);
        }
    }
    println!("OA {:.4} AA {:.4} kappa {:.4}", m.overall_accuracy, m.average_accuracy, m.kappa);
    write_atomic(&a.out, &csv_bytes(&["metric", "value"], rows)?)
}

fn run_cv(a: CvArgs) -> Result<()> {
    let records = read_sequences(&a.sequences)?;
    let labels = require_labeled(&records, &a.sequences)?;
    let (seqs, _) = crate::hierarchy::standardize_features(&sequences_of(&records))?;
    let grid = CvGrid {
        gammas: parse_number_list(&a.grid.gammas)?,
        cs: parse_number_list(&a.grid.cs)?,
        weightings: parse_items(&a.weightings)?,
    };
    let options = CvOptions {
        folds: a.grid.folds,
        seed: a.seed,
        tol: a.grid.tol,
        route: if a.stacked { KernelRoute::Stacked } else { KernelRoute::Spectrum },
    };
    let out = cross_validate_with(&seqs, &labels, &grid, &options)?;
    let rows = out.scores.iter().map(|s| {
        vec![
            s.gamma.to_string(),
            s.c.to_string(),
            s.weighting.to_string(),
            s.mean_accuracy.to_string(),
        ]
    });
    println!(
        "best gamma {} C {} weighting {} accuracy {:.4}",
        out.best.gamma, out.best.c, out.best.weighting, out.best.mean_accuracy
    );
    write_atomic(&a.out, &csv_bytes(&["gamma", "C", "weighting", "mean_accuracy"], rows)?)
}

fn run_evaluate(a: EvaluateArgs) -> Result<()> {
    let config = ExperimentConfig {
        n_per_class: a.n,
        repetitions: a.repetitions,
        seed: a.seed,
        folds: a.grid.folds,
        half_class_rule: !a.no_half_rule,
        top_levels_discarded: a.discard,
        gammas: parse_number_list(&a.grid.gammas)?,
        cs: parse_number_list(&a.grid.cs)?,
        lambdas: parse_number_list(&a.lambdas)?,
        q_values: a
            .q_values
            .as_deref()
            .map(|t| {
                t.split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| Error::invalid(format!("bad q value {s:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?,
        methods: parse_items::<Method>(&a.methods)?,
        tol: a.grid.tol,
    };
    let cube = read_cube(&a.cube)?;
    let labels = read_labels(&a.labels)?;
    let h = Hierarchy::read_dir(&a.hierarchy)?;
    let report = run_experiment(&cube, &h, &labels, &config)?;
    for s in &report.summaries {
        println!(
            "{:<16} OA {:6.2} ({:.2})  AA {:6.2} ({:.2})  kappa {:.4} ({:.4})",
            s.method.name(),
            100.0 * s.overall_accuracy.mean,
            100.0 * s.overall_accuracy.std,
            100.0 * s.average_accuracy.mean,
            100.0 * s.average_accuracy.std,
            s.kappa.mean,
            s.kappa.std
        );
    }
    report.write_csv(&a.results, &a.summary)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => run_synth(a),
        Command::Segment(a) => run_segment(a),
        Command::ImportHierarchy(a) => import_hierarchy(&a.maps)?.write_dir(&a.out),
        Command::Sequences(a) => run_sequences(a),
        Command::Split(a) => run_split(a),
        Command::Gram(a) => run_gram(a),
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a),
        Command::Score(a) => run_score(a),
        Command::Cv(a) => run_cv(a),
        Command::Evaluate(a) => run_evaluate(a),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Repetition { source, .. } => exit_code(source),
        _ => EXIT_FAILURE,
    }
}

/// Runs one subcommand; `args` includes the program name.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error[invalid-input]: --threads must be at least 1");
            return EXIT_FAILURE;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error[invalid-input]: cannot start thread pool: {e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.code());
            exit_code(&e)
        }
    }
}
