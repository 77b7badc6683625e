//! Corpus ingestion, author/document subset selection, stratified
//! train/test splits and equal-share composition of adversarial training
//! sets.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rand::seq::index;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, sha256_hex};
use crate::SCHEMA_VERSION;

/// Registered obfuscators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObfuscatorId {
    #[serde(rename = "dspan")]
    Dspan,
    #[serde(rename = "mutantx")]
    MutantX,
}

impl ObfuscatorId {
    pub const ALL: [ObfuscatorId; 2] = [ObfuscatorId::Dspan, ObfuscatorId::MutantX];

    pub fn as_str(self) -> &'static str {
        match self {
            ObfuscatorId::Dspan => "dspan",
            ObfuscatorId::MutantX => "mutantx",
        }
    }

    /// The other registered obfuscator.
    pub fn other(self) -> ObfuscatorId {
        match self {
            ObfuscatorId::Dspan => ObfuscatorId::MutantX,
            ObfuscatorId::MutantX => ObfuscatorId::Dspan,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ObfuscatorId::Dspan => "DS-PAN",
            ObfuscatorId::MutantX => "MutantX",
        }
    }
}

impl fmt::Display for ObfuscatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObfuscatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dspan" => Ok(ObfuscatorId::Dspan),
            "mutantx" => Ok(ObfuscatorId::MutantX),
            other => Err(Error::data(format!("unregistered obfuscator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Provenance {
    Original,
    Obfuscated(ObfuscatorId),
}

impl Provenance {
    /// Label used by detectors: "original" or the obfuscator id.
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Obfuscated(id) => id.as_str(),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => f.write_str("original"),
            Provenance::Obfuscated(id) => write!(f, "obfuscated:{id}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Provenance::Original),
            _ => match s.strip_prefix("obfuscated:") {
                Some(id) => Ok(Provenance::Obfuscated(id.parse()?)),
                None => Err(Error::data(format!("bad provenance '{s}'"))),
            },
        }
    }
}

impl TryFrom<String> for Provenance {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Provenance> for String {
    fn from(p: Provenance) -> String {
        p.to_string()
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    #[default]
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub author: String,
    pub text: String,
    pub provenance: Provenance,
    pub split: Split,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        author: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self> {
        let doc = Document {
            doc_id: doc_id.into(),
            author: author.into(),
            text: text.into(),
            provenance: Provenance::Original,
            split: Split::Unassigned,
        };
        if doc.text.trim().is_empty() {
            return Err(Error::data(format!("document '{}' is empty", doc.doc_id)));
        }
        Ok(doc)
    }

    /// Obfuscated copy; the id becomes `<original id>#<obfuscator>`.
    pub fn obfuscated(&self, by: ObfuscatorId, text: impl Into<String>) -> Document {
        Document {
            doc_id: format!("{}#{}", self.lineage_original(), by),
            author: self.author.clone(),
            text: text.into(),
            provenance: Provenance::Obfuscated(by),
            split: self.split,
        }
    }

    /// Id of the original document this one descends from.
    pub fn lineage_original(&self) -> &str {
        self.doc_id.split('#').next().unwrap_or(&self.doc_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSet {
    docs: Vec<Document>,
    manifest_hash: String,
}

impl DocumentSet {
    /// Sorts by doc id and rejects duplicate ids.
    pub fn new(mut docs: Vec<Document>) -> Result<Self> {
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        if let Some(pair) = docs.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
            return Err(Error::data(format!(
                "duplicate doc_id '{}'",
                pair[0].doc_id
            )));
        }
        let manifest_hash = sha256_hex(serde_json::to_vec(&docs)?);
        Ok(DocumentSet {
            docs,
            manifest_hash,
        })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn manifest_hash(&self) -> &str {
        &self.manifest_hash
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn authors(&self) -> BTreeSet<&str> {
        self.docs.iter().map(|d| d.author.as_str()).collect()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.docs
            .binary_search_by(|d| d.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.docs[i])
    }

    pub fn into_docs(self) -> Vec<Document> {
        self.docs
    }

    /// Write the manifest JSON with inline texts.
    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        let entries: Vec<ManifestEntry> = self
            .docs
            .iter()
            .map(|d| ManifestEntry {
                doc_id: d.doc_id.clone(),
                author: d.author.clone(),
                path: None,
                inline_text: Some(d.text.clone()),
                provenance: d.provenance,
                split: d.split,
            })
            .collect();
        let manifest = CorpusManifest {
            schema_version: SCHEMA_VERSION,
            docs: entries,
        };
        write_atomic(path, &serde_json::to_vec_pretty(&manifest)?)
    }
}

impl<'a> IntoIterator for &'a DocumentSet {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    DirPerAuthor,
    ManifestFile,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dir-per-author" | "dir" => Ok(CorpusFormat::DirPerAuthor),
            "manifest-file" | "manifest" => Ok(CorpusFormat::ManifestFile),
            other => Err(Error::config(format!("unknown corpus format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Skip unreadable (non-UTF-8 or blank) files instead of failing.
    pub skip_bad_files: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusManifest {
    schema_version: u32,
    docs: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    doc_id: String,
    author: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inline_text: Option<String>,
    #[serde(default = "original")]
    provenance: Provenance,
    #[serde(default)]
    split: Split,
}

fn original() -> Provenance {
    Provenance::Original
}

pub fn load_corpus(root: &Path, format: CorpusFormat, options: LoadOptions) -> Result<DocumentSet> {
    if !root.exists() {
        return Err(Error::data(format!(
            "corpus path {} does not exist",
            root.display()
        )));
    }
    match format {
        CorpusFormat::DirPerAuthor => load_dir_per_author(root, options),
        CorpusFormat::ManifestFile => load_manifest(root, options),
    }
}

fn read_text(path: &Path, options: LoadOptions) -> Result<Option<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let problem = match String::from_utf8(bytes) {
        Ok(text) if !text.trim().is_empty() => return Ok(Some(text)),
        Ok(_) => "blank document",
        Err(_) => "not valid UTF-8",
    };
    if options.skip_bad_files {
        warn!("skipping {}: {problem}", path.display());
        Ok(None)
    } else {
        Err(Error::data(format!("{}: {problem}", path.display())))
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        paths.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    paths.sort();
    Ok(paths)
}

fn load_dir_per_author(root: &Path, options: LoadOptions) -> Result<DocumentSet> {
    let mut docs = Vec::new();
    let mut authors = 0;
    for author_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let author = author_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::data(format!("bad author directory {}", author_dir.display())))?
            .to_string();
        authors += 1;
        let before = docs.len();
        for file in sorted_entries(&author_dir)? {
            if !file.is_file() || file.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let stem = file
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default();
            if let Some(text) = read_text(&file, options)? {
                docs.push(Document::new(
                    format!("{author}/{stem}"),
                    author.clone(),
                    text,
                )?);
            }
        }
        if docs.len() == before {
            return Err(Error::data(format!("author '{author}' has no documents")));
        }
    }
    if authors == 0 {
        return Err(Error::data(format!(
            "no authors found under {}",
            root.display()
        )));
    }
    DocumentSet::new(docs)
}

fn load_manifest(path: &Path, options: LoadOptions) -> Result<DocumentSet> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: CorpusManifest = serde_json::from_str(&raw)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::UnsupportedVersion {
            found: manifest.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut docs = Vec::new();
    for entry in manifest.docs {
        let text = match (entry.inline_text, entry.path) {
            (Some(text), _) => Some(text),
            (None, Some(rel)) => read_text(&base.join(rel), options)?,
            (None, None) => {
                return Err(Error::data(format!(
                    "doc '{}' has neither path nor inline_text",
                    entry.doc_id
                )))
            }
        };
        let Some(text) = text else { continue };
        let mut doc = Document::new(entry.doc_id, entry.author, text)?;
        doc.provenance = entry.provenance;
        doc.split = entry.split;
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(Error::data("no authors found in manifest"));
    }
    DocumentSet::new(docs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub author: String,
    pub split: Split,
}

/// Which documents of which authors take part in an experiment, and in
/// which split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetManifest {
    pub schema_version: u32,
    pub n_authors: usize,
    pub docs_per_author: usize,
    pub seed: u64,
    pub author_list: Vec<String>,
    pub doc_assignments: BTreeMap<String, Assignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
}

impl SubsetManifest {
    /// SHA-256 over the sorted-key JSON serialization.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        sha256_hex(value.to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::to_value(self)?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: SubsetManifest = serde_json::from_str(text)?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                found: manifest.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(manifest)
    }

    /// Materialize the assigned documents of `corpus` as (train, test) sets.
    pub fn materialize(&self, corpus: &DocumentSet) -> Result<(DocumentSet, DocumentSet)> {
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (doc_id, assignment) in &self.doc_assignments {
            let doc = corpus.get(doc_id).ok_or_else(|| {
                Error::data(format!("manifest doc '{doc_id}' missing from corpus"))
            })?;
            let mut doc = doc.clone();
            doc.split = assignment.split;
            match assignment.split {
                Split::Train => train.push(doc),
                Split::Test => test.push(doc),
                Split::Unassigned => {
                    return Err(Error::data(
                        "manifest has unassigned documents; split it first",
                    ))
                }
            }
        }
        Ok((DocumentSet::new(train)?, DocumentSet::new(test)?))
    }
}

/// Pick the `n_authors` authors with the most documents (ties by label),
/// then sample `docs_per_author` of each author's documents.
pub fn select_subset(
    corpus: &DocumentSet,
    n_authors: usize,
    docs_per_author: usize,
    seed: u64,
) -> Result<SubsetManifest> {
    if n_authors == 0 || docs_per_author == 0 {
        return Err(Error::config(
            "n_authors and docs_per_author must be positive",
        ));
    }
    let mut by_author: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for doc in corpus {
        by_author.entry(&doc.author).or_default().push(&doc.doc_id);
    }
    let mut eligible: Vec<(&str, &Vec<&str>)> = by_author
        .iter()
        .filter(|(_, ids)| ids.len() >= docs_per_author)
        .map(|(a, ids)| (*a, ids))
        .collect();
    if eligible.len() < n_authors {
        return Err(Error::data(format!(
            "need {n_authors} authors with at least {docs_per_author} documents, found {}",
            eligible.len()
        )));
    }
    eligible.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    eligible.truncate(n_authors);
    eligible.sort_by(|a, b| a.0.cmp(b.0));

    let mut doc_assignments = BTreeMap::new();
    for (author, ids) in &eligible {
        let mut rng = rng::stream(seed, &["subset", author]);
        let mut picked: Vec<usize> = index::sample(&mut rng, ids.len(), docs_per_author).into_vec();
        picked.sort_unstable();
        for i in picked {
            doc_assignments.insert(
                ids[i].to_string(),
                Assignment {
                    author: author.to_string(),
                    split: Split::Unassigned,
                },
            );
        }
    }
    Ok(SubsetManifest {
        schema_version: SCHEMA_VERSION,
        n_authors,
        docs_per_author,
        seed,
        author_list: eligible.iter().map(|(a, _)| a.to_string()).collect(),
        doc_assignments,
        train_fraction: None,
    })
}

/// Per-author stratified split; `train_fraction * docs_per_author` must be
/// an integer.
pub fn split_train_test(manifest: &SubsetManifest, train_fraction: f64) -> Result<SubsetManifest> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train_fraction {train_fraction} not in (0, 1)"
        )));
    }
    let exact = train_fraction * manifest.docs_per_author as f64;
    let per_author = exact.round();
    if (exact - per_author).abs() > 1e-9 {
        return Err(Error::data(format!(
            "non-integer split: {train_fraction} x {} = {exact}",
            manifest.docs_per_author
        )));
    }
    let per_author = per_author as usize;
    let mut out = manifest.clone();
    out.train_fraction = Some(train_fraction);
    for author in &manifest.author_list {
        let mut ids: Vec<&String> = manifest
            .doc_assignments
            .iter()
            .filter(|(_, a)| &a.author == author)
            .map(|(id, _)| id)
            .collect();
        if ids.len() != manifest.docs_per_author {
            return Err(Error::data(format!(
                "author '{author}' has {} assignments, expected {}",
                ids.len(),
                manifest.docs_per_author
            )));
        }
        let mut rng = rng::stream(manifest.seed, &["split", author]);
        ids.shuffle(&mut rng);
        for (k, id) in ids.into_iter().enumerate() {
            let split = if k < per_author {
                Split::Train
            } else {
                Split::Test
            };
            out.doc_assignments.get_mut(id).expect("known id").split = split;
        }
    }
    Ok(out)
}

/// Sample `total_size / sources.len()` documents from every source without
/// replacement. Provenance is kept per document.
pub fn compose_training_set(
    sources: &[&DocumentSet],
    total_size: usize,
    seed: u64,
) -> Result<DocumentSet> {
    if sources.is_empty() {
        return Err(Error::config(
            "compose_training_set needs at least one source",
        ));
    }
    if !total_size.is_multiple_of(sources.len()) {
        return Err(Error::config(format!(
            "total_size {total_size} is not divisible by {} sources",
            sources.len()
        )));
    }
    let share = total_size / sources.len();
    let mut docs = Vec::with_capacity(total_size);
    let mut seen = HashSet::new();
    for (i, source) in sources.iter().enumerate() {
        if source.len() < share {
            return Err(Error::data(format!(
                "source {i} has {} documents, needs {share}",
                source.len()
            )));
        }
        let mut rng = rng::stream(seed, &["compose", &i.to_string(), source.manifest_hash()]);
        let mut picked = index::sample(&mut rng, source.len(), share).into_vec();
        picked.sort_unstable();
        for k in picked {
            let doc = &source.docs()[k];
            if !seen.insert(doc.doc_id.clone()) {
                return Err(Error::data(format!(
                    "doc '{}' appears in two sources",
                    doc.doc_id
                )));
            }
            docs.push(doc.clone());
        }
    }
    DocumentSet::new(docs)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn synthetic(authors: usize, per_author: usize) -> DocumentSet {
        let mut docs = Vec::new();
        for a in 0..authors {
            for d in 0..per_author {
                docs.push(
                    Document::new(
                        format!("a{a:02}/{d:03}"),
                        format!("a{a:02}"),
                        format!("text {a} {d}"),
                    )
                    .unwrap(),
                );
            }
        }
        DocumentSet::new(docs).unwrap()
    }

    fn write_dir(root: &Path, layout: &[(&str, &[&str])]) {
        for (author, files) in layout {
            let dir = root.join(author);
            fs::create_dir_all(&dir).unwrap();
            for (i, text) in files.iter().enumerate() {
                fs::write(dir.join(format!("d{i}.txt")), text).unwrap();
            }
        }
    }

    #[test]
    fn loads_dir_per_author() {
        let tmp = TempDir::new().unwrap();
        write_dir(
            tmp.path(),
            &[("a", &["one", "two"]), ("b", &["three", "four"])],
        );
        let set = load_corpus(
            tmp.path(),
            CorpusFormat::DirPerAuthor,
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.authors().len(), 2);
        assert!(set
            .iter()
            .all(|d| d.provenance == Provenance::Original && d.split == Split::Unassigned));
        assert_eq!(set.docs()[0].doc_id, "a/d0");
    }

    #[test]
    fn empty_dir_has_no_authors() {
        let tmp = TempDir::new().unwrap();
        let err = load_corpus(
            tmp.path(),
            CorpusFormat::DirPerAuthor,
            LoadOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("no authors found"), "{err}");
    }

    #[test]
    fn missing_path() {
        let err = load_corpus(
            Path::new("/nonexistent/corpus"),
            CorpusFormat::DirPerAuthor,
            LoadOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not exist"));
    }

    #[test]
    fn author_without_documents() {
        let tmp = TempDir::new().unwrap();
        write_dir(tmp.path(), &[("a", &["one"])]);
        fs::create_dir_all(tmp.path().join("b")).unwrap();
        let err = load_corpus(
            tmp.path(),
            CorpusFormat::DirPerAuthor,
            LoadOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("'b' has no documents"), "{err}");
    }

    #[test]
    fn non_utf8_abort_or_skip() {
        let tmp = TempDir::new().unwrap();
        write_dir(tmp.path(), &[("a", &["fine"])]);
        fs::write(tmp.path().join("a/bad.txt"), [0xff, 0xfe, 0x00]).unwrap();
        let err = load_corpus(
            tmp.path(),
            CorpusFormat::DirPerAuthor,
            LoadOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("UTF-8"));
        let set = load_corpus(
            tmp.path(),
            CorpusFormat::DirPerAuthor,
            LoadOptions {
                skip_bad_files: true,
            },
        )
        .unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn manifest_with_inline_text_and_paths() {
        let tmp = TempDir::new().unwrap();
        fs::write(tmp.path().join("x.txt"), "from a file").unwrap();
        let manifest = r#"{"schema_version":1,"docs":[
            {"doc_id":"b/1","author":"b","inline_text":"inline"},
            {"doc_id":"a/1","author":"a","path":"x.txt","provenance":"original","split":"train"},
            {"doc_id":"a/1#dspan","author":"a","inline_text":"obf","provenance":"obfuscated:dspan","split":"train"}]}"#;
        let path = tmp.path().join("m.json");
        fs::write(&path, manifest).unwrap();
        let set = load_corpus(&path, CorpusFormat::ManifestFile, LoadOptions::default()).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.get("a/1").unwrap().text, "from a file");
        assert_eq!(
            set.get("a/1#dspan").unwrap().provenance,
            Provenance::Obfuscated(ObfuscatorId::Dspan)
        );
        assert_eq!(set.get("a/1#dspan").unwrap().lineage_original(), "a/1");

        let out = tmp.path().join("round.json");
        set.write_manifest(&out).unwrap();
        let again = load_corpus(&out, CorpusFormat::ManifestFile, LoadOptions::default()).unwrap();
        assert_eq!(again, set);
    }

    #[test]
    fn manifest_rejects_unregistered_obfuscator() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("m.json");
        fs::write(&path, r#"{"schema_version":1,"docs":[{"doc_id":"a","author":"a","inline_text":"t","provenance":"obfuscated:rot13"}]}"#).unwrap();
        assert!(load_corpus(&path, CorpusFormat::ManifestFile, LoadOptions::default()).is_err());
    }

    #[test]
    fn manifest_of_fifteen_hundred_docs() {
        let set = synthetic(15, 100);
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("m.json");
        set.write_manifest(&path).unwrap();
        let loaded =
            load_corpus(&path, CorpusFormat::ManifestFile, LoadOptions::default()).unwrap();
        assert_eq!(loaded.len(), 1500);
        assert_eq!(loaded.authors().len(), 15);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let d = Document::new("x", "a", "t").unwrap();
        assert!(DocumentSet::new(vec![d.clone(), d]).is_err());
        assert!(Document::new("x", "a", "  \n").is_err());
    }

    #[test]
    fn subset_sizes_and_determinism() {
        let corpus = synthetic(20, 120);
        let m = select_subset(&corpus, 15, 100, 3).unwrap();
        assert_eq!(m.doc_assignments.len(), 1500);
        assert_eq!(m.author_list.len(), 15);
        let again = select_subset(&corpus, 15, 100, 3).unwrap();
        assert_eq!(m.to_json().unwrap(), again.to_json().unwrap());
        assert_eq!(m.hash(), again.hash());
        assert_ne!(m.hash(), select_subset(&corpus, 15, 100, 4).unwrap().hash());

        let one = select_subset(&corpus, 1, 1, 0).unwrap();
        assert_eq!(one.doc_assignments.len(), 1);
    }

    #[test]
    fn subset_prefers_prolific_authors() {
        let mut docs = synthetic(3, 5).into_docs();
        docs.push(Document::new("a02/extra", "a02", "more").unwrap());
        let corpus = DocumentSet::new(docs).unwrap();
        let m = select_subset(&corpus, 1, 5, 0).unwrap();
        assert_eq!(m.author_list, vec!["a02"]);
        let m = select_subset(&corpus, 2, 5, 0).unwrap();
        assert_eq!(m.author_list, vec!["a00", "a02"]);
    }

    #[test]
    fn subset_shortfall_is_named() {
        let corpus = synthetic(3, 5);
        let err = select_subset(&corpus, 4, 5, 0).unwrap_err();
        assert!(err.to_string().contains("need 4 authors"), "{err}");
        assert!(select_subset(&corpus, 2, 6, 0).is_err());
    }

    #[test]
    fn stratified_split() {
        let corpus = synthetic(15, 100);
        let m = split_train_test(&select_subset(&corpus, 15, 100, 9).unwrap(), 0.8).unwrap();
        let (train, test) = m.materialize(&corpus).unwrap();
        assert_eq!((train.len(), test.len()), (1200, 300));
        for author in &m.author_list {
            assert_eq!(train.iter().filter(|d| &d.author == author).count(), 80);
            assert_eq!(test.iter().filter(|d| &d.author == author).count(), 20);
        }
        let train_ids: HashSet<_> = train.iter().map(|d| &d.doc_id).collect();
        assert!(test.iter().all(|d| !train_ids.contains(&d.doc_id)));

        let small = synthetic(2, 10);
        let m = split_train_test(&select_subset(&small, 2, 10, 1).unwrap(), 0.5).unwrap();
        let (train, test) = m.materialize(&small).unwrap();
        assert_eq!((train.len(), test.len()), (10, 10));
    }

    #[test]
    fn non_integer_split_is_an_error() {
        let corpus = synthetic(2, 7);
        let m = select_subset(&corpus, 2, 7, 1).unwrap();
        let err = split_train_test(&m, 0.8).unwrap_err();
        assert!(err.to_string().contains("non-integer split"));
        assert!(split_train_test(&m, 1.0).is_err());
    }

    fn obfuscated_copy(set: &DocumentSet, by: ObfuscatorId) -> DocumentSet {
        DocumentSet::new(
            set.iter()
                .map(|d| d.obfuscated(by, d.text.clone()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn compose_equal_shares() {
        let originals = synthetic(15, 80);
        let ds = obfuscated_copy(&originals, ObfuscatorId::Dspan);
        let mx = obfuscated_copy(&originals, ObfuscatorId::MutantX);
        let two = compose_training_set(&[&ds, &mx], 1200, 5).unwrap();
        assert_eq!(two.len(), 1200);
        let count =
            |set: &DocumentSet, p: Provenance| set.iter().filter(|d| d.provenance == p).count();
        assert_eq!(
            count(&two, Provenance::Obfuscated(ObfuscatorId::Dspan)),
            600
        );

        let three = compose_training_set(&[&originals, &ds, &mx], 1200, 5).unwrap();
        assert_eq!(count(&three, Provenance::Original), 400);
        assert_eq!(
            count(&three, Provenance::Obfuscated(ObfuscatorId::Dspan)),
            400
        );
        assert_eq!(
            count(&three, Provenance::Obfuscated(ObfuscatorId::MutantX)),
            400
        );

        let identity = compose_training_set(&[&originals], originals.len(), 1).unwrap();
        assert_eq!(identity, originals);
        assert_eq!(compose_training_set(&[&ds, &mx], 1200, 5).unwrap(), two);
    }

    #[test]
    fn compose_errors() {
        let a = synthetic(2, 5);
        let b = obfuscated_copy(&a, ObfuscatorId::Dspan);
        assert!(compose_training_set(&[&a, &b], 7, 0).is_err());
        assert!(compose_training_set(&[&a, &b], 22, 0).is_err());
        assert!(compose_training_set(&[], 0, 0).is_err());
    }
}
