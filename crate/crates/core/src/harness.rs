//! Attack-scenario harness: prepares the corpus split and obfuscated sets,
//! trains attributors per training composition, routes test documents
//! through detectors and fills the scenario and arena reports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    compose_training_set, load_corpus, select_subset, split_train_test, write_atomic,
    CorpusFormat, Document, DocumentSet, LoadOptions, ObfuscatorId, Provenance, SubsetManifest,
};
use crate::detectors::{
    train_obfuscation_detector, train_obfuscator_detector, Detector, DetectorKind, DetectorMode,
    OBFUSCATED,
};
use crate::error::{Error, Result};
use crate::features::{FeatureCache, FeatureVector, REGISTRY_VERSION};
use crate::forest::{train, ForestModel, ForestParams};
use crate::metrics::{
    confusion, correct_total, error_shares, ConfusionMatrix, ErrorShareTable, Meteor,
    MeteorParams,
};
use crate::obfuscators::{
    obfuscate_dspan, obfuscate_mutantx, read_jsonl, write_jsonl, DspanRuleSet, MutantXParams,
    ObfuscationResult,
};
use crate::rng::{derive_seed, sha256_hex, stream};
use crate::textproc::SynonymLexicon;
use crate::SCHEMA_VERSION;

/// Bump when anything that feeds cached obfuscations changes meaning.
const CACHE_FORMAT: u32 = 2;

fn one() -> u32 {
    SCHEMA_VERSION
}

fn yes() -> bool {
    true
}

fn four() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    S0,
    S1,
    S2,
    S3,
    S2i,
    S3i,
    S4,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::S0,
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S2i,
        ScenarioId::S3i,
        ScenarioId::S4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::S0 => "S0",
            ScenarioId::S1 => "S1",
            ScenarioId::S2 => "S2",
            ScenarioId::S3 => "S3",
            ScenarioId::S2i => "S2i",
            ScenarioId::S3i => "S3i",
            ScenarioId::S4 => "S4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioId::S0 => "no obfuscation: attributor trained and tested on originals",
            ScenarioId::S1 => "unaware attacker: trained on originals, tested on obfuscated text",
            ScenarioId::S2 => {
                "obfuscation detector routes flagged text to an attributor trained on DS-PAN+MutantX"
            }
            ScenarioId::S3 => {
                "obfuscator detector routes text to the attributor trained on that obfuscator"
            }
            ScenarioId::S2i => "obfuscation detector wrongly flags original text as obfuscated",
            ScenarioId::S3i => "obfuscator detector names the obfuscator the defender did not use",
            ScenarioId::S4 => "one attributor trained on originals plus both obfuscators",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown scenario '{s}'")))
    }
}

/// Test sets are named by provenance: original, dspan, mutantx.
pub const TEST_SETS: [Provenance; 3] = [
    Provenance::Original,
    Provenance::Obfuscated(ObfuscatorId::Dspan),
    Provenance::Obfuscated(ObfuscatorId::MutantX),
];

/// Training compositions, one attributor each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Composition {
    #[serde(rename = "original")]
    Original,
    #[serde(rename = "dspan")]
    Dspan,
    #[serde(rename = "mutantx")]
    MutantX,
    #[serde(rename = "dspan+mutantx")]
    DspanMutantX,
    #[serde(rename = "dspan+mutantx+original")]
    All,
}

impl Composition {
    pub const ALL: [Composition; 5] = [
        Composition::Original,
        Composition::Dspan,
        Composition::MutantX,
        Composition::DspanMutantX,
        Composition::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Composition::Original => "original",
            Composition::Dspan => "dspan",
            Composition::MutantX => "mutantx",
            Composition::DspanMutantX => "dspan+mutantx",
            Composition::All => "dspan+mutantx+original",
        }
    }

    /// Row label in the arena grid.
    pub fn display_name(self) -> &'static str {
        match self {
            Composition::Original => "Original",
            Composition::Dspan => "DS-PAN",
            Composition::MutantX => "MutantX",
            Composition::DspanMutantX => "DS-PAN+MutantX",
            Composition::All => "DS-PAN+MutantX+Original",
        }
    }

    pub fn sources(self) -> Vec<Provenance> {
        let dspan = Provenance::Obfuscated(ObfuscatorId::Dspan);
        let mutantx = Provenance::Obfuscated(ObfuscatorId::MutantX);
        match self {
            Composition::Original => vec![Provenance::Original],
            Composition::Dspan => vec![dspan],
            Composition::MutantX => vec![mutantx],
            Composition::DspanMutantX => vec![dspan, mutantx],
            Composition::All => vec![dspan, mutantx, Provenance::Original],
        }
    }

    pub fn single(id: ObfuscatorId) -> Composition {
        match id {
            ObfuscatorId::Dspan => Composition::Dspan,
            ObfuscatorId::MutantX => Composition::MutantX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub path: PathBuf,
    #[serde(default = "dir_per_author")]
    pub format: CorpusFormat,
    #[serde(default)]
    pub skip_bad_files: bool,
}

fn dir_per_author() -> CorpusFormat {
    CorpusFormat::DirPerAuthor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetConfig {
    pub n_authors: usize,
    pub docs_per_author: usize,
    /// Derived from the run seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeteorConfig {
    pub params: MeteorParams,
    /// Synonym lexicon for the synonym stage; the bundled strict lexicon
    /// when absent.
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspanConfig {
    /// Rule file; the bundled rules when absent.
    pub rules: Option<PathBuf>,
    pub lexical_sub_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutantXConfig {
    pub params: MutantXParams,
    /// Internal attributor settings; the attacker's forest settings when
    /// absent.
    pub internal_forest: Option<ForestParams>,
    /// Internal attributor trains on the attacker's training documents.
    #[serde(default = "yes")]
    pub share_training: bool,
    /// Training documents are obfuscated fold by fold against internal
    /// models that did not see them.
    #[serde(default = "four")]
    pub cross_fit_folds: usize,
}

impl Default for MutantXConfig {
    fn default() -> Self {
        MutantXConfig {
            params: MutantXParams::default(),
            internal_forest: None,
            share_training: true,
            cross_fit_folds: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObfuscatorsConfig {
    pub dspan: DspanConfig,
    pub mutantx: MutantXConfig,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorSetting {
    Learned,
    #[default]
    OracleCorrect,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorsConfig {
    pub mode: DetectorSetting,
    pub forest: Option<ForestParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaConfig {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub corpus: CorpusConfig,
    pub subset: SubsetConfig,
    pub split: SplitConfig,
    /// Size of every composed attacker training set; the training split
    /// size when absent.
    #[serde(default)]
    pub training_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub forest: ForestParams,
    /// Related-word lexicon for the obfuscators; bundled when absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub meteor: MeteorConfig,
    #[serde(default)]
    pub obfuscators: ObfuscatorsConfig,
    #[serde(default)]
    pub detectors: DetectorsConfig,
    #[serde(default = "all_scenarios")]
    pub scenarios: Vec<ScenarioId>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn all_scenarios() -> Vec<ScenarioId> {
    ScenarioId::ALL.to_vec()
}

fn default_output() -> PathBuf {
    PathBuf::from("arena-out")
}

impl ArenaConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: ArenaConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                found: config.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        self.meteor.params.validate()?;
        self.obfuscators.mutantx.params.validate()?;
        if let Some(p) = &self.obfuscators.mutantx.internal_forest {
            p.validate()?;
        }
        if let Some(p) = &self.detectors.forest {
            p.validate()?;
        }
        if self.obfuscators.mutantx.cross_fit_folds < 2 {
            return Err(Error::config("mutantx.cross_fit_folds must be at least 2"));
        }
        if let Some(rate) = self.obfuscators.dspan.lexical_sub_rate {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config("dspan.lexical_sub_rate must lie in [0, 1]"));
            }
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::config("split.train_fraction must lie in (0, 1)"));
        }
        if self.scenarios.is_empty() {
            return Err(Error::config("no scenarios listed"));
        }
        let mut paths = vec![&self.corpus.path];
        paths.extend(self.lexicon.iter());
        paths.extend(self.meteor.lexicon.iter());
        paths.extend(self.obfuscators.dspan.rules.iter());
        for p in paths {
            let full = self.resolve(p);
            if !full.exists() {
                return Err(Error::config(format!("path {} does not exist", full.display())));
            }
        }
        Ok(())
    }

    /// Digest of everything that influences results. The output location
    /// is left out so relocated runs compare equal.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        sha256_hex(value.to_string())
    }
}

/// Everything the scenarios draw on: the split, the obfuscated variants of
/// every document and all feature vectors.
pub struct Env {
    pub config: ArenaConfig,
    pub seed: u64,
    pub config_digest: String,
    pub manifest: SubsetManifest,
    pub train: DocumentSet,
    pub test: DocumentSet,
    pub obfuscated_train: BTreeMap<ObfuscatorId, DocumentSet>,
    pub obfuscated_test: BTreeMap<ObfuscatorId, DocumentSet>,
    /// Obfuscation records for train and test documents, per obfuscator.
    pub results: BTreeMap<ObfuscatorId, Vec<ObfuscationResult>>,
    features: HashMap<String, FeatureVector>,
}

impl Env {
    pub fn training_source(&self, p: Provenance) -> &DocumentSet {
        match p {
            Provenance::Original => &self.train,
            Provenance::Obfuscated(id) => &self.obfuscated_train[&id],
        }
    }

    pub fn test_set(&self, p: Provenance) -> &DocumentSet {
        match p {
            Provenance::Original => &self.test,
            Provenance::Obfuscated(id) => &self.obfuscated_test[&id],
        }
    }

    pub fn features(&self, doc: &Document) -> &FeatureVector {
        &self.features[&doc.doc_id]
    }

    pub fn feature_rows(&self, set: &DocumentSet) -> Vec<FeatureVector> {
        set.iter().map(|d| self.features(d).clone()).collect()
    }

    /// Obfuscation records restricted to test documents.
    pub fn test_results(&self, id: ObfuscatorId) -> Vec<&ObfuscationResult> {
        self.results[&id]
            .iter()
            .filter(|r| self.test.get(&r.original_doc_id).is_some())
            .collect()
    }

    pub fn training_size(&self) -> usize {
        self.config.training_size.unwrap_or(self.train.len())
    }
}

fn lexicons(config: &ArenaConfig) -> Result<(SynonymLexicon, SynonymLexicon)> {
    let related = match &config.lexicon {
        Some(p) => SynonymLexicon::load(&config.resolve(p))?,
        None => SynonymLexicon::bundled_related(),
    };
    let strict = match &config.meteor.lexicon {
        Some(p) => SynonymLexicon::load(&config.resolve(p))?,
        None => SynonymLexicon::bundled_strict(),
    };
    Ok((related, strict))
}

fn dspan_rules(config: &ArenaConfig) -> Result<DspanRuleSet> {
    let mut rules = match &config.obfuscators.dspan.rules {
        Some(p) => DspanRuleSet::load(&config.resolve(p))?,
        None => DspanRuleSet::default(),
    };
    if let Some(rate) = config.obfuscators.dspan.lexical_sub_rate {
        rules.lexical_sub_rate = rate;
    }
    rules.validate()?;
    Ok(rules)
}

pub fn meteor_scorer(config: &ArenaConfig) -> Result<Meteor> {
    let (_, strict) = lexicons(config)?;
    Ok(Meteor::new(config.meteor.params.clone(), Some(strict)))
}

/// Load, select, split, obfuscate and featurize. Obfuscations and features
/// are cached under `<output_dir>/cache`.
pub fn prepare(config: &ArenaConfig) -> Result<Env> {
    let seed = config.seed;
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
        .unwrap_or_else(|| derive_seed(seed, &["subset"]));
    let manifest = select_subset(
        &corpus,
        config.subset.n_authors,
        config.subset.docs_per_author,
        subset_seed,
    )?;
    let manifest = split_train_test(&manifest, config.split.train_fraction)?;
    let (train, test) = manifest.materialize(&corpus)?;
    info!(
        "split: {} train / {} test documents over {} authors",
        train.len(),
        test.len(),
        manifest.n_authors
    );
    let (related, strict) = lexicons(config)?;
    let meteor = Meteor::new(config.meteor.params.clone(), Some(strict.clone()));
    let cache_dir = config.output_path().join("cache");

    let all_docs: Vec<&Document> = train.iter().chain(test.iter()).collect();
    let key_base = serde_json::json!({
        "format": CACHE_FORMAT,
        "seed": seed,
        "train": train.manifest_hash(),
        "test": test.manifest_hash(),
        "related": sha256_hex(serde_json::to_vec(&related)?),
        "strict": sha256_hex(serde_json::to_vec(&strict)?),
        "meteor": config.meteor.params,
    });

    let rules = dspan_rules(config)?;
    let dspan_key = sha256_hex(format!("{key_base}|{}", serde_json::to_string(&rules)?));
    let dspan_results = cached(&cache_dir, "dspan", &dspan_key, &all_docs, || {
        let dspan_seed = derive_seed(seed, &["dspan"]);
        Ok(all_docs
            .par_iter()
            .map(|d| obfuscate_dspan(d, &rules, &related, &meteor, dspan_seed))
            .collect())
    })?;

    let mx = &config.obfuscators.mutantx;
    let mx_key = sha256_hex(format!(
        "{key_base}|{}|{}",
        serde_json::to_string(mx)?,
        serde_json::to_string(&config.forest)?
    ));
    let mutantx_results = cached(&cache_dir, "mutantx", &mx_key, &all_docs, || {
        run_mutantx(config, &train, &test, &related, &meteor)
    })?;

    let mut results = BTreeMap::new();
    results.insert(ObfuscatorId::Dspan, dspan_results);
    results.insert(ObfuscatorId::MutantX, mutantx_results);
    let (mut obfuscated_train, mut obfuscated_test) = (BTreeMap::new(), BTreeMap::new());
    for (&id, records) in &results {
        let by_id: HashMap<&str, &ObfuscationResult> = records
            .iter()
            .map(|r| (r.original_doc_id.as_str(), r))
            .collect();
        let variant = |set: &DocumentSet| -> Result<DocumentSet> {
            DocumentSet::new(
                set.iter()
                    .map(|d| by_id[d.doc_id.as_str()].to_document(d))
                    .collect(),
            )
        };
        obfuscated_train.insert(id, variant(&train)?);
        obfuscated_test.insert(id, variant(&test)?);
    }

    let mut every: Vec<Document> = train.iter().chain(test.iter()).cloned().collect();
    for set in obfuscated_train.values().chain(obfuscated_test.values()) {
        every.extend(set.iter().cloned());
    }
    let every = DocumentSet::new(every)?;
    let cache_file = cache_dir.join(format!("features-{}.jsonl", &every.manifest_hash()[..16]));
    let vectors = FeatureCache::extract_set(&cache_file, &every)?;
    let features = vectors.into_iter().map(|v| (v.doc_id.clone(), v)).collect();

    Ok(Env {
        config: config.clone(),
        seed,
        config_digest: config.digest(),
        manifest,
        train,
        test,
        obfuscated_train,
        obfuscated_test,
        results,
        features,
    })
}

/// Reuse `<dir>/obfuscated-<name>-<key>.jsonl` when it covers every document.
fn cached(
    dir: &Path,
    name: &str,
    key: &str,
    docs: &[&Document],
    compute: impl FnOnce() -> Result<Vec<ObfuscationResult>>,
) -> Result<Vec<ObfuscationResult>> {
    let path = dir.join(format!("obfuscated-{name}-{}.jsonl", &key[..16]));
    if path.exists() {
        match read_jsonl(&path) {
            Ok(records)
                if records.len() == docs.len()
                    && records
                        .iter()
                        .zip(docs)
                        .all(|(r, d)| r.original_doc_id == d.doc_id) =>
            {
                info!("{name}: reusing {}", path.display());
                return Ok(records);
            }
            _ => warn!("{name}: ignoring stale cache {}", path.display()),
        }
    }
    info!("{name}: obfuscating {} documents", docs.len());
    let records = compute()?;
    write_jsonl(&path, &records)?;
    Ok(records)
}

/// Per-author stratified fold assignment of the training documents.
fn folds(train: &DocumentSet, k: usize, seed: u64) -> HashMap<String, usize> {
    let mut by_author: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for d in train {
        by_author.entry(&d.author).or_default().push(&d.doc_id);
    }
    let mut out = HashMap::new();
    for (author, mut ids) in by_author {
        ids.shuffle(&mut stream(seed, &["folds", author]));
        for (i, id) in ids.into_iter().enumerate() {
            out.insert(id.to_string(), i % k);
        }
    }
    out
}

fn train_on(docs: &[&Document], params: &ForestParams) -> Result<ForestModel> {
    let x: Vec<FeatureVector> = docs.par_iter().map(|d| crate::features::extract(d)).collect();
    let y: Vec<String> = docs.iter().map(|d| d.author.clone()).collect();
    train(&x, &y, params)
}

/// Test documents are obfuscated against an internal attributor trained on
/// the training split; training documents against cross-fitted internal
/// models that never saw them.
fn run_mutantx(
    config: &ArenaConfig,
    train_set: &DocumentSet,
    test: &DocumentSet,
    lexicon: &SynonymLexicon,
    meteor: &Meteor,
) -> Result<Vec<ObfuscationResult>> {
    let mx = &config.obfuscators.mutantx;
    let seed = config.seed;
    let mut internal = mx
        .internal_forest
        .clone()
        .unwrap_or_else(|| config.forest.clone());
    let mut params = mx.params.clone();
    params.seed = derive_seed(seed, &["mutantx"]);

    let fold_of = folds(train_set, mx.cross_fit_folds, derive_seed(seed, &["mutantx", "folds"]));
    let pool: Vec<&Document> = if mx.share_training {
        train_set.iter().collect()
    } else {
        // Disjoint internal data: every other fold.
        train_set
            .iter()
            .filter(|d| fold_of[&d.doc_id].is_multiple_of(2))
            .collect()
    };

    internal.seed = derive_seed(seed, &["mutantx", "internal", "test"]);
    let full_model = train_on(&pool, &internal)?;
    let mut models = vec![full_model];
    for f in 0..mx.cross_fit_folds {
        internal.seed = derive_seed(seed, &["mutantx", "internal", &f.to_string()]);
        let rest: Vec<&Document> = pool
            .iter()
            .copied()
            .filter(|d| fold_of[&d.doc_id] != f)
            .collect();
        models.push(train_on(&rest, &internal)?);
    }

    let jobs: Vec<(&Document, &ForestModel)> = train_set
        .iter()
        .map(|d| (d, &models[1 + fold_of[&d.doc_id]]))
        .chain(test.iter().map(|d| (d, &models[0])))
        .collect();
    jobs.par_iter()
        .map(|(doc, model)| obfuscate_mutantx(doc, model, &doc.author, lexicon, meteor, &params))
        .collect()
}

/// Attributors trained on each composition, plus learned detectors when
/// the configuration asks for them.
pub struct Models {
    pub attributors: BTreeMap<Composition, ForestModel>,
    pub training: BTreeMap<Composition, DocumentSet>,
    pub obfuscation_detector: Option<Detector>,
    pub obfuscator_detector: Option<Detector>,
}

fn composition_size(env: &Env, c: Composition) -> usize {
    let n = env.training_size();
    let k = c.sources().len();
    n - n % k
}

pub fn compose(env: &Env, c: Composition) -> Result<DocumentSet> {
    let sources: Vec<&DocumentSet> = c.sources().into_iter().map(|p| env.training_source(p)).collect();
    let size = composition_size(env, c);
    if size != env.training_size() {
        warn!(
            "{}: training size {} rounded down to {size} for {} equal shares",
            c.as_str(),
            env.training_size(),
            sources.len()
        );
    }
    compose_training_set(&sources, size, derive_seed(env.seed, &["compose", c.as_str()]))
}

impl Models {
    pub fn train(env: &Env, compositions: &[Composition], learned_detectors: bool) -> Result<Self> {
        let trained: Vec<(Composition, DocumentSet, ForestModel)> = compositions
            .par_iter()
            .map(|&c| {
                let set = compose(env, c)?;
                let mut params = env.config.forest.clone();
                params.seed = derive_seed(env.seed, &["attributor", c.as_str()]);
                let x = env.feature_rows(&set);
                let y: Vec<String> = set.iter().map(|d| d.author.clone()).collect();
                let model = train(&x, &y, &params)?;
                Ok((c, set, model))
            })
            .collect::<Result<_>>()?;
        let mut models = Models {
            attributors: BTreeMap::new(),
            training: BTreeMap::new(),
            obfuscation_detector: None,
            obfuscator_detector: None,
        };
        for (c, set, model) in trained {
            models.training.insert(c, set);
            models.attributors.insert(c, model);
        }
        if learned_detectors {
            let mut params = env
                .config
                .detectors
                .forest
                .clone()
                .unwrap_or_else(|| env.config.forest.clone());
            params.seed = derive_seed(env.seed, &["detector", "obfuscation"]);
            let obfuscated = compose(env, Composition::DspanMutantX)?;
            let model = train_obfuscation_detector(&env.train, &obfuscated, &params)?;
            models.obfuscation_detector = Some(Detector::learned(model));
            params.seed = derive_seed(env.seed, &["detector", "obfuscator"]);
            let model = train_obfuscator_detector(&env.obfuscated_train, &params)?;
            models.obfuscator_detector = Some(Detector::learned(model));
        }
        Ok(models)
    }

    fn detector(&self, kind: DetectorKind) -> Option<&Detector> {
        match kind {
            DetectorKind::Obfuscation => self.obfuscation_detector.as_ref(),
            DetectorKind::Obfuscator => self.obfuscator_detector.as_ref(),
        }
    }
}

/// How one test set is evaluated inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub test_set: Provenance,
    /// `None`: every document goes to the default attributor.
    pub detector: Option<(DetectorKind, DetectorMode)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// Attributor used when no detector is consulted.
    pub default_training: Composition,
    /// Detector label -> attributor.
    pub routes: BTreeMap<String, Composition>,
    pub cells: Vec<CellSpec>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn standard(id: ScenarioId, detectors: DetectorSetting, seed: u64) -> Self {
        let dspan = Provenance::Obfuscated(ObfuscatorId::Dspan);
        let mutantx = Provenance::Obfuscated(ObfuscatorId::MutantX);
        let routine = match detectors {
            DetectorSetting::Learned => DetectorMode::Learned,
            DetectorSetting::OracleCorrect => DetectorMode::OracleCorrect,
        };
        let plain = |t| CellSpec {
            test_set: t,
            detector: None,
        };
        let with = |t, kind, mode: DetectorMode| CellSpec {
            test_set: t,
            detector: Some((kind, mode)),
        };
        let obfuscation_routes = BTreeMap::from([
            ("original".to_string(), Composition::Original),
            (OBFUSCATED.to_string(), Composition::DspanMutantX),
        ]);
        let obfuscator_routes = BTreeMap::from([
            ("original".to_string(), Composition::Original),
            ("dspan".to_string(), Composition::Dspan),
            ("mutantx".to_string(), Composition::MutantX),
        ]);
        let (default_training, routes, cells) = match id {
            ScenarioId::S0 => (Composition::Original, BTreeMap::new(), vec![plain(Provenance::Original)]),
            ScenarioId::S1 => (Composition::Original, BTreeMap::new(), vec![plain(dspan), plain(mutantx)]),
            ScenarioId::S2 => (
                Composition::DspanMutantX,
                obfuscation_routes,
                vec![
                    with(dspan, DetectorKind::Obfuscation, routine.clone()),
                    with(mutantx, DetectorKind::Obfuscation, routine),
                ],
            ),
            ScenarioId::S3 => (
                Composition::Original,
                obfuscator_routes,
                vec![
                    with(dspan, DetectorKind::Obfuscator, routine.clone()),
                    with(mutantx, DetectorKind::Obfuscator, routine),
                ],
            ),
            ScenarioId::S2i => (
                Composition::DspanMutantX,
                obfuscation_routes,
                vec![with(
                    Provenance::Original,
                    DetectorKind::Obfuscation,
                    DetectorMode::Forced(OBFUSCATED.to_string()),
                )],
            ),
            ScenarioId::S3i => (
                Composition::Original,
                obfuscator_routes,
                vec![
                    with(dspan, DetectorKind::Obfuscator, DetectorMode::Forced("mutantx".into())),
                    with(mutantx, DetectorKind::Obfuscator, DetectorMode::Forced("dspan".into())),
                ],
            ),
            ScenarioId::S4 => (
                Composition::All,
                BTreeMap::new(),
                vec![plain(Provenance::Original), plain(dspan), plain(mutantx)],
            ),
        };
        ScenarioSpec {
            id,
            default_training,
            routes,
            cells,
            seed,
        }
    }

    /// Attributors this scenario may consult.
    pub fn compositions(&self) -> Vec<Composition> {
        let mut set: BTreeSet<Composition> = BTreeSet::new();
        let uses_detector = self.cells.iter().any(|c| c.detector.is_some());
        if uses_detector {
            set.extend(self.routes.values().copied());
        }
        if self.cells.iter().any(|c| c.detector.is_none()) || !uses_detector {
            set.insert(self.default_training);
        }
        set.into_iter().collect()
    }

    fn needs_learned_detectors(&self) -> bool {
        self.cells
            .iter()
            .any(|c| matches!(c.detector, Some((_, DetectorMode::Learned))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// Attributor -> number of documents routed to it.
    pub routed: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub size: usize,
    pub provenance_counts: BTreeMap<String, usize>,
    pub model_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetadata {
    pub seed: u64,
    pub config_digest: String,
    pub registry_version: String,
    /// Test set -> detector description.
    pub detectors: BTreeMap<String, String>,
    pub training: BTreeMap<String, TrainingInfo>,
    /// Every test document's original was absent from all training sets.
    pub leakage_checked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: ScenarioId,
    pub description: String,
    pub cells: BTreeMap<String, Cell>,
    /// Unweighted mean over all cells.
    pub average: f64,
    /// Unweighted mean over the obfuscated cells, when there are any.
    pub average_obfuscated: Option<f64>,
    pub metadata: ScenarioMetadata,
}

impl ScenarioReport {
    pub fn accuracy(&self, test_set: &str) -> Option<f64> {
        self.cells.get(test_set).map(|c| c.accuracy)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Test lineages must not appear in any training set.
pub fn check_leakage(env: &Env, models: &Models) -> Result<()> {
    let test_ids: BTreeSet<&str> = env.test.iter().map(|d| d.lineage_original()).collect();
    for (c, set) in &models.training {
        if let Some(doc) = set.iter().find(|d| test_ids.contains(d.lineage_original())) {
            return Err(Error::data(format!(
                "test document {} leaks into the {} training set",
                doc.lineage_original(),
                c.as_str()
            )));
        }
    }
    Ok(())
}

fn training_info(models: &Models, c: Composition) -> TrainingInfo {
    let set = &models.training[&c];
    let mut provenance_counts = BTreeMap::new();
    for d in set {
        *provenance_counts
            .entry(d.provenance.label().to_string())
            .or_insert(0) += 1;
    }
    TrainingInfo {
        size: set.len(),
        provenance_counts,
        model_digest: models.attributors[&c].digest(),
    }
}

pub fn run_scenario_with(spec: &ScenarioSpec, env: &Env, models: &Models) -> Result<ScenarioReport> {
    check_leakage(env, models)?;
    let classes: Vec<String> = env.manifest.author_list.clone();
    let mut cells = BTreeMap::new();
    let mut detectors = BTreeMap::new();
    let mut used: BTreeSet<Composition> = BTreeSet::new();
    for cell in &spec.cells {
        let set = env.test_set(cell.test_set);
        if set.is_empty() {
            return Err(Error::data(format!(
                "{}: test set {} is empty",
                spec.id,
                cell.test_set.label()
            )));
        }
        let detector = match &cell.detector {
            None => None,
            Some((kind, DetectorMode::Learned)) => Some(
                models
                    .detector(*kind)
                    .ok_or_else(|| Error::config("learned detectors were not trained"))?
                    .clone(),
            ),
            Some((kind, mode)) => {
                let d = Detector {
                    kind: *kind,
                    mode: mode.clone(),
                    model: None,
                };
                d.validate()?;
                Some(d)
            }
        };
        detectors.insert(
            cell.test_set.label().to_string(),
            match &detector {
                None => "none".to_string(),
                Some(d) => format!("{} detector, {}", d.kind.as_str(), d.mode),
            },
        );
        let mut predictions = Vec::with_capacity(set.len());
        let mut routed: BTreeMap<String, usize> = BTreeMap::new();
        for doc in set {
            let target = match &detector {
                None => spec.default_training,
                Some(d) => {
                    let label = d.detect(doc)?;
                    *spec.routes.get(&label).ok_or_else(|| {
                        Error::data(format!("{}: no attributor for detector label '{label}'", spec.id))
                    })?
                }
            };
            used.insert(target);
            *routed.entry(target.as_str().to_string()).or_insert(0) += 1;
            let model = models.attributors.get(&target).ok_or_else(|| {
                Error::data(format!("{}: attributor {} not trained", spec.id, target.as_str()))
            })?;
            predictions.push(model.predict(env.features(doc))?.label);
        }
        let truth: Vec<String> = set.iter().map(|d| d.author.clone()).collect();
        let (correct, total) = correct_total(&predictions, &truth)?;
        let matrix = confusion(&predictions, &truth, &classes)?;
        cells.insert(
            cell.test_set.label().to_string(),
            Cell {
                correct,
                total,
                accuracy: correct as f64 / total as f64,
                confusion: matrix,
                routed,
            },
        );
    }
    let all: Vec<f64> = cells.values().map(|c| c.accuracy).collect();
    let obf: Vec<f64> = cells
        .iter()
        .filter(|(k, _)| k.as_str() != "original")
        .map(|(_, c)| c.accuracy)
        .collect();
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        scenario: spec.id,
        description: spec.id.description().to_string(),
        average: mean(&all),
        average_obfuscated: (!obf.is_empty()).then(|| mean(&obf)),
        cells,
        metadata: ScenarioMetadata {
            seed: spec.seed,
            config_digest: env.config_digest.clone(),
            registry_version: REGISTRY_VERSION.to_string(),
            detectors,
            training: used
                .into_iter()
                .map(|c| (c.as_str().to_string(), training_info(models, c)))
                .collect(),
            leakage_checked: true,
        },
    })
}

pub fn run_scenario(spec: &ScenarioSpec, env: &Env) -> Result<ScenarioReport> {
    let models = Models::train(env, &spec.compositions(), spec.needs_learned_detectors())?;
    run_scenario_with(spec, env, &models)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub training: Composition,
    pub label: String,
    /// Test set -> cell.
    pub cells: BTreeMap<String, GridCell>,
    /// Mean of the DS-PAN and MutantX cells.
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorSummary {
    pub documents: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantXSummary {
    pub evaded_fraction: f64,
    pub mean_generations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    /// Trained on the other obfuscator minus trained on originals.
    pub cross: f64,
    /// Trained on the matching obfuscator minus trained on originals.
    pub matched: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisentangleSummary {
    /// Obfuscated test set -> accuracy deltas, in accuracy points (0-1).
    pub per_test_set: BTreeMap<String, Deltas>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaReport {
    pub schema_version: u32,
    pub config_digest: String,
    pub seed: u64,
    pub subset_hash: String,
    pub registry_version: String,
    pub grid: Vec<GridRow>,
    pub scenarios: BTreeMap<String, ScenarioReport>,
    /// Obfuscator -> METEOR over test-document outputs.
    pub meteor: BTreeMap<String, MeteorSummary>,
    pub mutantx: MutantXSummary,
    pub disentangle: DisentangleSummary,
    /// Error shares over S1, S2 and S3 combined.
    pub error_shares: Option<ErrorShareTable>,
    /// SHA-256 of this report serialized with an empty digest.
    pub digest: String,
}

impl ArenaReport {
    pub fn row(&self, c: Composition) -> Option<&GridRow> {
        self.grid.iter().find(|r| r.training == c)
    }

    pub fn scenario(&self, id: ScenarioId) -> Option<&ScenarioReport> {
        self.scenarios.get(id.as_str())
    }

    pub fn compute_digest(&self) -> String {
        let mut copy = self.clone();
        copy.digest = String::new();
        let value = serde_json::to_value(&copy).expect("report serializes");
        sha256_hex(value.to_string())
    }

    /// Table-style grid with accuracies in percent.
    pub fn grid_csv(&self) -> String {
        let mut out = String::from("training,original,dspan,mutantx,average_dspan_mutantx\n");
        for row in &self.grid {
            let pct = |k: &str| 100.0 * row.cells[k].accuracy;
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{:.2}\n",
                row.label,
                pct("original"),
                pct("dspan"),
                pct("mutantx"),
                100.0 * row.average
            ));
        }
        out
    }
}

pub fn disentangle_report(arena: &ArenaReport) -> Result<DisentangleSummary> {
    let row = |c: Composition| {
        arena
            .row(c)
            .ok_or_else(|| Error::data(format!("arena lacks the {} row", c.display_name())))
    };
    let base = row(Composition::Original)?;
    let mut per_test_set = BTreeMap::new();
    for id in ObfuscatorId::ALL {
        let key = id.as_str();
        let acc = |r: &GridRow| {
            r.cells
                .get(key)
                .map(|c| c.accuracy)
                .ok_or_else(|| Error::data(format!("arena lacks the {key} column")))
        };
        let b = acc(base)?;
        per_test_set.insert(
            key.to_string(),
            Deltas {
                cross: acc(row(Composition::single(id.other()))?)? - b,
                matched: acc(row(Composition::single(id))?)? - b,
            },
        );
    }
    Ok(DisentangleSummary { per_test_set })
}

fn meteor_summary(results: &[&ObfuscationResult]) -> MeteorSummary {
    let scores: Vec<f64> = results.iter().map(|r| r.meteor).collect();
    MeteorSummary {
        documents: scores.len(),
        mean: if scores.is_empty() { 0.0 } else { mean(&scores) },
        min: scores.iter().copied().fold(f64::INFINITY, f64::min),
        max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Every scenario over one shared set of attributors, plus the full grid.
pub fn run_all_prepared(env: &Env) -> Result<(ArenaReport, Models)> {
    let learned = env.config.detectors.mode == DetectorSetting::Learned;
    let models = Models::train(env, &Composition::ALL, learned)?;
    check_leakage(env, &models)?;

    let mut grid = Vec::new();
    for c in Composition::ALL {
        let model = &models.attributors[&c];
        let mut cells = BTreeMap::new();
        for t in TEST_SETS {
            let set = env.test_set(t);
            let predictions: Vec<String> = set
                .iter()
                .map(|d| model.predict(env.features(d)).map(|p| p.label))
                .collect::<Result<_>>()?;
            let truth: Vec<String> = set.iter().map(|d| d.author.clone()).collect();
            let (correct, total) = correct_total(&predictions, &truth)?;
            cells.insert(
                t.label().to_string(),
                GridCell {
                    correct,
                    total,
                    accuracy: correct as f64 / total as f64,
                },
            );
        }
        let average = (cells["dspan"].accuracy + cells["mutantx"].accuracy) / 2.0;
        grid.push(GridRow {
            training: c,
            label: c.display_name().to_string(),
            cells,
            average,
        });
    }

    let mut scenarios = BTreeMap::new();
    for &id in &env.config.scenarios {
        let spec = ScenarioSpec::standard(id, env.config.detectors.mode, env.seed);
        scenarios.insert(id.as_str().to_string(), run_scenario_with(&spec, env, &models)?);
    }

    let mut matrices = BTreeMap::new();
    for id in [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3] {
        if let Some(report) = scenarios.get(id.as_str()) {
            matrices.insert(id.as_str().to_string(), merged_confusion(report));
        }
    }
    let error_shares = if matrices.is_empty() {
        None
    } else {
        error_shares(&matrices).ok()
    };

    let mx_results = env.test_results(ObfuscatorId::MutantX);
    let mutantx = MutantXSummary {
        evaded_fraction: mx_results
            .iter()
            .filter(|r| r.evaded == Some(true))
            .count() as f64
            / mx_results.len().max(1) as f64,
        mean_generations: mx_results
            .iter()
            .map(|r| r.generations_used.unwrap_or(0) as f64)
            .sum::<f64>()
            / mx_results.len().max(1) as f64,
    };
    let meteor = ObfuscatorId::ALL
        .iter()
        .map(|&id| (id.as_str().to_string(), meteor_summary(&env.test_results(id))))
        .collect();

    let mut report = ArenaReport {
        schema_version: SCHEMA_VERSION,
        config_digest: env.config_digest.clone(),
        seed: env.seed,
        subset_hash: env.manifest.hash(),
        registry_version: REGISTRY_VERSION.to_string(),
        grid,
        scenarios,
        meteor,
        mutantx,
        disentangle: DisentangleSummary {
            per_test_set: BTreeMap::new(),
        },
        error_shares,
        digest: String::new(),
    };
    report.disentangle = disentangle_report(&report)?;
    report.digest = report.compute_digest();
    Ok((report, models))
}

pub fn run_all(config: &ArenaConfig) -> Result<ArenaReport> {
    let env = prepare(config)?;
    Ok(run_all_prepared(&env)?.0)
}

/// Sum of a scenario's per-cell confusion matrices.
pub fn merged_confusion(report: &ScenarioReport) -> ConfusionMatrix {
    let mut cells = report.cells.values();
    let first = cells.next().expect("scenario has cells").confusion.clone();
    let mut counts = first.counts.clone();
    for cell in cells {
        for (row, other) in counts.iter_mut().zip(&cell.confusion.counts) {
            for (a, b) in row.iter_mut().zip(other) {
                *a += b;
            }
        }
    }
    ConfusionMatrix::from_counts(first.classes, counts)
}

/// Write `arena.json`, `grid.csv`, one JSON per scenario and confusion CSVs.
pub fn write_arena(report: &ArenaReport, dir: &Path) -> Result<()> {
    write_atomic(
        &dir.join("arena.json"),
        serde_json::to_string_pretty(report)?.as_bytes(),
    )?;
    write_atomic(&dir.join("grid.csv"), report.grid_csv().as_bytes())?;
    for (id, scenario) in &report.scenarios {
        write_scenario(scenario, dir)?;
        for (test, cell) in &scenario.cells {
            write_atomic(
                &dir.join("confusion").join(format!("{id}-{test}.csv")),
                cell.confusion.to_csv().as_bytes(),
            )?;
        }
    }
    if let Some(shares) = &report.error_shares {
        write_atomic(&dir.join("error_shares.csv"), shares.to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn write_scenario(report: &ScenarioReport, dir: &Path) -> Result<()> {
    write_atomic(
        &dir.join("scenarios").join(format!("{}.json", report.scenario)),
        serde_json::to_string_pretty(report)?.as_bytes(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_ids_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
        assert!("S5".parse::<ScenarioId>().is_err());
    }

    #[test]
    fn scenario_shapes() {
        let spec = |id| ScenarioSpec::standard(id, DetectorSetting::OracleCorrect, 1);
        assert_eq!(spec(ScenarioId::S0).compositions(), [Composition::Original]);
        assert_eq!(spec(ScenarioId::S1).compositions(), [Composition::Original]);
        let s2 = spec(ScenarioId::S2);
        assert!(s2.compositions().contains(&Composition::DspanMutantX));
        let s3i = spec(ScenarioId::S3i);
        for cell in &s3i.cells {
            let Provenance::Obfuscated(used) = cell.test_set else {
                panic!("S3i tests obfuscated text only")
            };
            let Some((DetectorKind::Obfuscator, DetectorMode::Forced(label))) = &cell.detector
            else {
                panic!("S3i forces the obfuscator detector")
            };
            assert_eq!(label, used.other().as_str());
        }
        let s2i = spec(ScenarioId::S2i);
        assert_eq!(s2i.cells.len(), 1);
        assert_eq!(s2i.cells[0].test_set, Provenance::Original);
        assert_eq!(spec(ScenarioId::S4).cells.len(), 3);
        assert_eq!(spec(ScenarioId::S4).compositions(), [Composition::All]);
    }

    #[test]
    fn compositions_and_sources() {
        assert_eq!(Composition::All.sources().len(), 3);
        assert_eq!(
            Composition::DspanMutantX.sources(),
            [
                Provenance::Obfuscated(ObfuscatorId::Dspan),
                Provenance::Obfuscated(ObfuscatorId::MutantX)
            ]
        );
        let json = serde_json::to_string(&Composition::All).unwrap();
        assert_eq!(json, "\"dspan+mutantx+original\"");
    }

    fn flat_arena(acc: f64) -> ArenaReport {
        let grid = Composition::ALL
            .iter()
            .map(|&c| GridRow {
                training: c,
                label: c.display_name().into(),
                cells: ["original", "dspan", "mutantx"]
                    .iter()
                    .map(|k| {
                        (
                            k.to_string(),
                            GridCell {
                                correct: 0,
                                total: 1,
                                accuracy: acc,
                            },
                        )
                    })
                    .collect(),
                average: acc,
            })
            .collect();
        ArenaReport {
            schema_version: 1,
            config_digest: String::new(),
            seed: 0,
            subset_hash: String::new(),
            registry_version: REGISTRY_VERSION.into(),
            grid,
            scenarios: BTreeMap::new(),
            meteor: BTreeMap::new(),
            mutantx: MutantXSummary {
                evaded_fraction: 0.0,
                mean_generations: 0.0,
            },
            disentangle: DisentangleSummary {
                per_test_set: BTreeMap::new(),
            },
            error_shares: None,
            digest: String::new(),
        }
    }

    #[test]
    fn equal_rows_give_zero_deltas() {
        let summary = disentangle_report(&flat_arena(0.6)).unwrap();
        for d in summary.per_test_set.values() {
            assert_eq!(d.cross, 0.0);
            assert_eq!(d.matched, 0.0);
        }
    }

    #[test]
    fn deltas_follow_rows() {
        let mut arena = flat_arena(0.5);
        let set = |arena: &mut ArenaReport, c: Composition, k: &str, v: f64| {
            let row = arena.grid.iter_mut().find(|r| r.training == c).unwrap();
            row.cells.get_mut(k).unwrap().accuracy = v;
        };
        // Mutant-X column with a 13-point cross and 31-point matched gain
        set(&mut arena, Composition::Original, "mutantx", 0.443);
        set(&mut arena, Composition::Dspan, "mutantx", 0.573);
        set(&mut arena, Composition::MutantX, "mutantx", 0.757);
        let d = &disentangle_report(&arena).unwrap().per_test_set["mutantx"];
        assert!((d.cross - 0.13).abs() < 1e-9);
        assert!((d.matched - 0.314).abs() < 1e-9);
        arena.grid.retain(|r| r.training != Composition::Dspan);
        assert!(disentangle_report(&arena).is_err());
    }

    #[test]
    fn digest_ignores_digest_field() {
        let mut a = flat_arena(0.4);
        let d1 = a.compute_digest();
        a.digest = "anything".into();
        assert_eq!(a.compute_digest(), d1);
        a.seed = 9;
        assert_ne!(a.compute_digest(), d1);
    }

    #[test]
    fn config_digest_ignores_output_dir() {
        let text = r#"{"corpus":{"path":"."},"subset":{"n_authors":1,"docs_per_author":1},
            "split":{"train_fraction":0.5},"output_dir":"a"}"#;
        let a = ArenaConfig::from_json(text, Path::new(".")).unwrap();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.digest(), b.digest());
        b.seed = 3;
        assert_ne!(a.digest(), b.digest());
        assert!(ArenaConfig::from_json(r#"{"corpus":{}}"#, Path::new(".")).is_err());
        let bad = text.replace("0.5", "1.5");
        assert!(ArenaConfig::from_json(&bad, Path::new(".")).is_err());
    }
}
