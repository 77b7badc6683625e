use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use deobf_core::analysis::{cdf_csv, meteor_cdf, pca_project, top_k_features};
use deobf_core::corpus::{
    load_corpus, select_subset, split_train_test, write_atomic, CorpusFormat, DocumentSet,
    LoadOptions, ObfuscatorId,
};
use deobf_core::error::ErrorKind;
use deobf_core::forest::ForestModel;
use deobf_core::harness::{
    self, compose, merged_confusion, prepare, run_all_prepared, run_scenario, ArenaConfig,
    ArenaReport, Composition, ScenarioId, ScenarioSpec, TEST_SETS,
};
use deobf_core::metrics::Meteor;
use deobf_core::obfuscators::{
    obfuscate_dspan, obfuscate_mutantx, DspanRuleSet, MutantXParams, ObfuscationResult,
};
use deobf_core::rng::derive_seed;
use deobf_core::textproc::SynonymLexicon;
use deobf_core::{Error, Result, SCHEMA_VERSION};

const AFTER_HELP: &str = "\
Scenarios:
  S0   no obfuscation: trained and tested on original documents
  S1   unaware attacker: trained on originals, tested on DS-PAN and MutantX output
  S2   obfuscation detector routes flagged documents to a DS-PAN+MutantX attributor
  S3   obfuscator detector routes each document to the matching per-obfuscator attributor
  S2i  obfuscation detector error: original documents wrongly routed as obfuscated
  S3i  obfuscator detector error: routed to the obfuscator the defender did not use
  S4   one attributor trained on originals plus both obfuscators

Exit status: 0 ok, 2 usage, 3 configuration error, 4 data error, 5 internal error.";

#[derive(Parser)]
#[command(name = "deobf-arena", version, about = "Attack-scenario arena for adversarial authorship attribution", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Arena configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; overrides the configuration.
    #[arg(long, global = true, env = "DEOBF_ARENA_SEED")]
    seed: Option<u64>,
    /// Worker threads; defaults to available cores. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Obfuscator {
    Dspan,
    Mutantx,
}

impl From<Obfuscator> for ObfuscatorId {
    fn from(o: Obfuscator) -> Self {
        match o {
            Obfuscator::Dspan => ObfuscatorId::Dspan,
            Obfuscator::Mutantx => ObfuscatorId::MutantX,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    #[value(name = "S0")]
    S0,
    #[value(name = "S1")]
    S1,
    #[value(name = "S2")]
    S2,
    #[value(name = "S3")]
    S3,
    #[value(name = "S2i")]
    S2i,
    #[value(name = "S3i")]
    S3i,
    #[value(name = "S4")]
    S4,
}

impl From<Scenario> for ScenarioId {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::S0 => ScenarioId::S0,
            Scenario::S1 => ScenarioId::S1,
            Scenario::S2 => ScenarioId::S2,
            Scenario::S3 => ScenarioId::S3,
            Scenario::S2i => ScenarioId::S2i,
            Scenario::S3i => ScenarioId::S3i,
            Scenario::S4 => ScenarioId::S4,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Training {
    Original,
    Dspan,
    Mutantx,
    #[value(name = "dspan+mutantx")]
    DspanMutantx,
    #[value(name = "dspan+mutantx+original")]
    All,
}

impl From<Training> for Composition {
    fn from(t: Training) -> Self {
        match t {
            Training::Original => Composition::Original,
            Training::Dspan => Composition::Dspan,
            Training::Mutantx => Composition::MutantX,
            Training::DspanMutantx => Composition::DspanMutantX,
            Training::All => Composition::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load the corpus, select the author subset and write the split manifest.
    Ingest {
        #[command(flatten)]
        common: Common,
    },
    /// Obfuscate documents, one JSON-lines record per input document.
    Obfuscate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        obfuscator: Obfuscator,
        /// Corpus directory (one subdirectory per author) or manifest file;
        /// without it the configured split is obfuscated.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Internal attributor for MutantX when obfuscating `--in` documents.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Train an attributor on one training composition.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Training::Original)]
        training: Training,
    },
    /// Run one attack scenario.
    Scenario {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, ignore_case = true)]
        id: Scenario,
    },
    /// Run every scenario and the full training-by-test grid.
    Arena {
        #[command(flatten)]
        common: Common,
    },
    /// Feature importance, PCA projections, METEOR CDFs and confusion data.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Print the grid and deltas of a finished arena run.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ingest { common }
            | Command::Obfuscate { common, .. }
            | Command::Train { common, .. }
            | Command::Scenario { common, .. }
            | Command::Arena { common }
            | Command::Analyze { common }
            | Command::Report { common } => common,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = match e.kind() {
                ErrorKind::Config => (3, "config"),
                ErrorKind::Data => (4, "data"),
                ErrorKind::Internal => (5, "internal"),
            };
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{kind}]: {message}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<()> {
    let common = command.common().clone();
    let jobs = common.jobs.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    match command {
        Command::Ingest { .. } => ingest(&common),
        Command::Obfuscate {
            obfuscator,
            input,
            model,
            ..
        } => obfuscate(&common, obfuscator.into(), input.as_deref(), model.as_deref()),
        Command::Train { training, .. } => train(&common, training.into()),
        Command::Scenario { id, .. } => scenario(&common, id.into()),
        Command::Arena { .. } => arena(&common),
        Command::Analyze { .. } => analyze(&common),
        Command::Report { .. } => report(&common),
    }
}

fn load_config(common: &Common) -> Result<ArenaConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::config("--config is required"))?;
    let mut config = ArenaConfig::load(path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = std::env::current_dir()
            .map_err(|e| Error::io(".", e))?
            .join(out);
    }
    Ok(config)
}

/// Add `schema_version` and `config_digest` to a JSON object.
fn stamp(mut value: Value, config_digest: &str) -> Value {
    if let Some(map) = value.as_object_mut() {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
        map.insert("config_digest".into(), json!(config_digest));
    }
    value
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(value)?.as_bytes())
}

fn stdout_line(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", text.trim_end()).map_err(|e| Error::io("<stdout>", e))
}

fn ingest(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let corpus = load_corpus(
        &config.resolve(&config.corpus.path),
        config.corpus.format,
        LoadOptions {
            skip_bad_files: config.corpus.skip_bad_files,
        },
    )?;
    let subset_seed = config
        .subset
        .seed
        .unwrap_or_else(|| derive_seed(config.seed, &["subset"]));
    let manifest = select_subset(
        &corpus,
        config.subset.n_authors,
        config.subset.docs_per_author,
        subset_seed,
    )?;
    let manifest = split_train_test(&manifest, config.split.train_fraction)?;
    let path = config.output_path().join("manifest.json");
    let value = stamp(serde_json::to_value(&manifest)?, &config.digest());
    write_json(&path, &value)?;
    info!("wrote {}", path.display());
    stdout_line(&manifest.hash())
}

fn write_records(path: &Path, records: &[ObfuscationResult], digest: &str) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        let value = stamp(serde_json::to_value(r)?, digest);
        serde_json::to_writer(&mut out, &value)?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

fn obfuscate(
    common: &Common,
    id: ObfuscatorId,
    input: Option<&Path>,
    model: Option<&Path>,
) -> Result<()> {
    let Some(input) = input else {
        let config = load_config(common)?;
        let env = prepare(&config)?;
        let path = config
            .output_path()
            .join(format!("obfuscated-{}.jsonl", id.as_str()));
        write_records(&path, &env.results[&id], &env.config_digest)?;
        return stdout_line(&path.display().to_string());
    };
    let config = common.config.as_ref().map(|_| load_config(common)).transpose()?;
    let digest = config.as_ref().map(|c| c.digest()).unwrap_or_default();
    let seed = common
        .seed
        .or(config.as_ref().map(|c| c.seed))
        .unwrap_or(0);
    let format = if input.is_file() {
        CorpusFormat::ManifestFile
    } else {
        CorpusFormat::DirPerAuthor
    };
    let docs: DocumentSet = load_corpus(input, format, LoadOptions::default())?;
    let (related, meteor) = match &config {
        Some(c) => {
            let related = match &c.lexicon {
                Some(p) => SynonymLexicon::load(&c.resolve(p))?,
                None => SynonymLexicon::bundled_related(),
            };
            (related, harness::meteor_scorer(c)?)
        }
        None => (
            SynonymLexicon::bundled_related(),
            Meteor::new(Default::default(), Some(SynonymLexicon::bundled_strict())),
        ),
    };
    let records: Vec<ObfuscationResult> = match id {
        ObfuscatorId::Dspan => {
            let mut rules = DspanRuleSet::default();
            if let Some(c) = &config {
                if let Some(p) = &c.obfuscators.dspan.rules {
                    rules = DspanRuleSet::load(&c.resolve(p))?;
                }
                if let Some(rate) = c.obfuscators.dspan.lexical_sub_rate {
                    rules.lexical_sub_rate = rate;
                }
            }
            let s = derive_seed(seed, &["dspan"]);
            docs.iter()
                .map(|d| obfuscate_dspan(d, &rules, &related, &meteor, s))
                .collect()
        }
        ObfuscatorId::MutantX => {
            let model_path =
                model.ok_or_else(|| Error::config("mutantx on --in documents needs --model"))?;
            let internal = ForestModel::load(model_path)?;
            let mut params = config
                .as_ref()
                .map(|c| c.obfuscators.mutantx.params.clone())
                .unwrap_or_else(MutantXParams::default);
            params.seed = derive_seed(seed, &["mutantx"]);
            docs.iter()
                .map(|d| obfuscate_mutantx(d, &internal, &d.author, &related, &meteor, &params))
                .collect::<Result<_>>()?
        }
    };
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = out.join(format!("obfuscated-{}.jsonl", id.as_str()));
    write_records(&path, &records, &digest)?;
    stdout_line(&path.display().to_string())
}

fn train(common: &Common, composition: Composition) -> Result<()> {
    let config = load_config(common)?;
    let env = prepare(&config)?;
    let set = compose(&env, composition)?;
    let mut params = config.forest.clone();
    params.seed = derive_seed(env.seed, &["attributor", composition.as_str()]);
    let x = env.feature_rows(&set);
    let y: Vec<String> = set.iter().map(|d| d.author.clone()).collect();
    let model = deobf_core::forest::train(&x, &y, &params)?;
    let mut value: Value = serde_json::from_str(&model.to_json()?)?;
    value = stamp(value, &env.config_digest);
    if let Some(map) = value.as_object_mut() {
        map.insert("training".into(), json!(composition.as_str()));
    }
    let path = config
        .output_path()
        .join("models")
        .join(format!("{}.json", composition.as_str()));
    write_json(&path, &value)?;
    stdout_line(&model.digest())
}

fn scenario(common: &Common, id: ScenarioId) -> Result<()> {
    let config = load_config(common)?;
    let env = prepare(&config)?;
    let spec = ScenarioSpec::standard(id, config.detectors.mode, env.seed);
    let report = run_scenario(&spec, &env)?;
    harness::write_scenario(&report, &config.output_path())?;
    match common.format {
        Format::Json => stdout_line(&serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let mut out = String::from("scenario,test_set,correct,total,accuracy\n");
            for (test, cell) in &report.cells {
                out.push_str(&format!(
                    "{},{test},{},{},{:.6}\n",
                    report.scenario, cell.correct, cell.total, cell.accuracy
                ));
            }
            stdout_line(&out)
        }
    }
}

fn arena(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let env = prepare(&config)?;
    let (report, _) = run_all_prepared(&env)?;
    harness::write_arena(&report, &config.output_path())?;
    print_arena(&report, common.format)
}

fn print_arena(report: &ArenaReport, format: Format) -> Result<()> {
    match format {
        Format::Csv => stdout_line(&report.grid_csv()),
        Format::Json => stdout_line(&serde_json::to_string(&json!({
            "digest": report.digest,
            "config_digest": report.config_digest,
            "seed": report.seed,
        }))?),
    }
}

fn analyze(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let env = prepare(&config)?;
    let (report, models) = run_all_prepared(&env)?;
    let dir = config.output_path().join("analysis");
    let digest = &env.config_digest;
    let attributor = &models.attributors[&Composition::Original];
    let top = top_k_features(attributor, 25)?;
    let names: Vec<&str> = top
        .iter()
        .map(|&i| deobf_core::features::registry().entries[i].name.as_str())
        .collect();
    write_json(
        &dir.join("top_features.json"),
        &stamp(json!({ "indices": top, "names": names }), digest),
    )?;
    for t in TEST_SETS {
        let set = env.test_set(t);
        let vectors = env.feature_rows(set);
        let correct = vectors
            .iter()
            .zip(set.iter())
            .map(|(v, d)| Ok(attributor.predict(v)?.label == d.author))
            .collect::<Result<Vec<bool>>>()?;
        let projection = pca_project(&vectors, &top, 3, &correct)?;
        let name = t.label();
        write_atomic(
            &dir.join(format!("pca-{name}.csv")),
            projection.to_csv().as_bytes(),
        )?;
        write_json(
            &dir.join(format!("pca-{name}-variance.json")),
            &projection.variance_json(digest),
        )?;
    }
    for id in ObfuscatorId::ALL {
        let scores: Vec<f64> = env.test_results(id).iter().map(|r| r.meteor).collect();
        let cdf = meteor_cdf(&scores)?;
        write_atomic(
            &dir.join(format!("meteor-cdf-{}.csv", id.as_str())),
            cdf_csv(&cdf).as_bytes(),
        )?;
    }
    for id in [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3] {
        if let Some(s) = report.scenario(id) {
            write_atomic(
                &dir.join(format!("heatmap-{id}.csv")),
                merged_confusion(s).to_csv().as_bytes(),
            )?;
        }
    }
    if let Some(shares) = &report.error_shares {
        write_atomic(&dir.join("error_shares.csv"), shares.to_csv().as_bytes())?;
    }
    stdout_line(&dir.display().to_string())
}

fn report(common: &Common) -> Result<()> {
    let dir = match (&common.out, &common.config) {
        (Some(out), _) => out.clone(),
        (None, Some(_)) => load_config(common)?.output_path(),
        (None, None) => return Err(Error::config("--out or --config is required")),
    };
    let path = dir.join("arena.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let report: ArenaReport = serde_json::from_str(&text)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::UnsupportedVersion {
            found: report.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let computed = report.compute_digest();
    if computed != report.digest {
        return Err(Error::Digest {
            stored: report.digest,
            computed,
        });
    }
    match common.format {
        Format::Csv => {
            let mut out = report.grid_csv();
            out.push_str("\ntest_set,delta_cross,delta_matched\n");
            for (test, d) in &report.disentangle.per_test_set {
                out.push_str(&format!(
                    "{test},{:.2},{:.2}\n",
                    100.0 * d.cross,
                    100.0 * d.matched
                ));
            }
            stdout_line(&out)
        }
        Format::Json => stdout_line(&serde_json::to_string_pretty(&json!({
            "schema_version": report.schema_version,
            "config_digest": report.config_digest,
            "digest": report.digest,
            "grid": report.grid,
            "disentangle": report.disentangle,
            "meteor": report.meteor,
            "mutantx": report.mutantx,
        }))?),
    }
}
