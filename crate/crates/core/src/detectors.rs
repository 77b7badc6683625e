//! Obfuscation and obfuscator detectors, with oracle and forced modes used to
//! stage the detector-error scenarios.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, DocumentSet, ObfuscatorId, Provenance};
use crate::error::{Error, Result};
use crate::features::{extract, extract_batch, FeatureVector};
use crate::forest::{train, ForestModel, ForestParams};

pub const ORIGINAL: &str = "original";
pub const OBFUSCATED: &str = "obfuscated";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// original vs obfuscated
    Obfuscation,
    /// which obfuscator produced the text
    Obfuscator,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Obfuscation => "obfuscation",
            DetectorKind::Obfuscator => "obfuscator",
        }
    }

    /// The label an always-right detector gives a document.
    pub fn truth(self, doc: &Document) -> &'static str {
        match (self, doc.provenance) {
            (DetectorKind::Obfuscation, Provenance::Original) => ORIGINAL,
            (DetectorKind::Obfuscation, Provenance::Obfuscated(_)) => OBFUSCATED,
            (DetectorKind::Obfuscator, p) => p.label(),
        }
    }

    fn accepts(self, label: &str) -> bool {
        match self {
            DetectorKind::Obfuscation => label == ORIGINAL || label == OBFUSCATED,
            DetectorKind::Obfuscator => label.parse::<ObfuscatorId>().is_ok(),
        }
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obfuscation" => Ok(DetectorKind::Obfuscation),
            "obfuscator" => Ok(DetectorKind::Obfuscator),
            other => Err(Error::data(format!("unknown detector kind '{other}'"))),
        }
    }
}

/// A detector is a forest whose `kind` field records what it detects.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub forest: ForestModel,
}

impl DetectorModel {
    pub fn from_forest(forest: ForestModel) -> Result<Self> {
        let kind: DetectorKind = forest
            .kind
            .as_deref()
            .ok_or_else(|| Error::data("forest model has no detector kind"))?
            .parse()?;
        if let Some(bad) = forest.classes.iter().find(|c| !kind.accepts(c)) {
            return Err(Error::data(format!(
                "{} detector has foreign class '{bad}'",
                kind.as_str()
            )));
        }
        if kind == DetectorKind::Obfuscation && forest.classes.len() != 2 {
            return Err(Error::data("obfuscation detector must have two classes"));
        }
        Ok(DetectorModel { kind, forest })
    }

    pub fn classes(&self) -> &[String] {
        &self.forest.classes
    }

    pub fn predict(&self, doc: &Document) -> Result<String> {
        Ok(self.forest.predict(&extract(doc))?.label)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.forest.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_forest(ForestModel::load(path)?)
    }
}

fn fit(
    kind: DetectorKind,
    x: Vec<FeatureVector>,
    y: Vec<String>,
    params: &ForestParams,
) -> Result<DetectorModel> {
    let mut forest = train(&x, &y, params)?;
    forest.kind = Some(kind.as_str().to_string());
    DetectorModel::from_forest(forest)
}

pub fn train_obfuscation_detector(
    originals: &DocumentSet,
    obfuscated: &DocumentSet,
    params: &ForestParams,
) -> Result<DetectorModel> {
    if originals.is_empty() || obfuscated.is_empty() {
        return Err(Error::data(
            "obfuscation detector needs original and obfuscated documents",
        ));
    }
    let mut x = extract_batch(originals);
    x.extend(extract_batch(obfuscated));
    let mut y = vec![ORIGINAL.to_string(); originals.len()];
    y.extend(std::iter::repeat_n(OBFUSCATED.to_string(), obfuscated.len()));
    fit(DetectorKind::Obfuscation, x, y, params)
}

pub fn train_obfuscator_detector(
    sets: &BTreeMap<ObfuscatorId, DocumentSet>,
    params: &ForestParams,
) -> Result<DetectorModel> {
    let populated = sets.values().filter(|s| !s.is_empty()).count();
    if populated < 2 {
        return Err(Error::data(
            "obfuscator detector needs at least two non-empty obfuscator classes",
        ));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (id, set) in sets {
        x.extend(extract_batch(set));
        y.extend(std::iter::repeat_n(id.as_str().to_string(), set.len()));
    }
    fit(DetectorKind::Obfuscator, x, y, params)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "label")]
pub enum DetectorMode {
    Learned,
    #[default]
    OracleCorrect,
    Forced(String),
}

impl fmt::Display for DetectorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorMode::Learned => f.write_str("learned"),
            DetectorMode::OracleCorrect => f.write_str("oracle-correct"),
            DetectorMode::Forced(label) => write!(f, "forced:{label}"),
        }
    }
}

/// A detector of a given kind operating in a given mode. Only learned mode
/// needs a model.
#[derive(Debug, Clone)]
pub struct Detector {
    pub kind: DetectorKind,
    pub mode: DetectorMode,
    pub model: Option<DetectorModel>,
}

impl Detector {
    pub fn oracle(kind: DetectorKind) -> Self {
        Detector {
            kind,
            mode: DetectorMode::OracleCorrect,
            model: None,
        }
    }

    pub fn forced(kind: DetectorKind, label: &str) -> Result<Self> {
        let detector = Detector {
            kind,
            mode: DetectorMode::Forced(label.to_string()),
            model: None,
        };
        detector.validate()?;
        Ok(detector)
    }

    pub fn learned(model: DetectorModel) -> Self {
        Detector {
            kind: model.kind,
            mode: DetectorMode::Learned,
            model: Some(model),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.mode {
            DetectorMode::Learned => match &self.model {
                Some(m) if m.kind == self.kind => Ok(()),
                Some(_) => Err(Error::config("detector model kind does not match")),
                None => Err(Error::config("learned detector mode needs a trained model")),
            },
            DetectorMode::OracleCorrect => Ok(()),
            DetectorMode::Forced(label) if self.kind.accepts(label) => Ok(()),
            DetectorMode::Forced(label) => Err(Error::config(format!(
                "'{label}' is not a valid {} detector label",
                self.kind.as_str()
            ))),
        }
    }

    pub fn detect(&self, doc: &Document) -> Result<String> {
        match &self.mode {
            DetectorMode::OracleCorrect => Ok(self.kind.truth(doc).to_string()),
            DetectorMode::Forced(label) => Ok(label.clone()),
            DetectorMode::Learned => self
                .model
                .as_ref()
                .ok_or_else(|| Error::config("learned detector mode needs a trained model"))?
                .predict(doc),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(prefix: &str, texts: &[&str]) -> DocumentSet {
        DocumentSet::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document::new(format!("{prefix}{i}"), "a", *t).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn shouty(set: &DocumentSet, id: ObfuscatorId) -> DocumentSet {
        DocumentSet::new(
            set.iter()
                .map(|d| d.obfuscated(id, d.text.to_uppercase() + "!!"))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn oracle_projects_provenance() {
        let doc = Document::new("d1", "a", "Some text here.").unwrap();
        let obf = doc.obfuscated(ObfuscatorId::Dspan, "Some text.");
        let by = Detector::oracle(DetectorKind::Obfuscator);
        assert_eq!(by.detect(&obf).unwrap(), "dspan");
        assert_eq!(by.detect(&doc).unwrap(), "original");
        let whether = Detector::oracle(DetectorKind::Obfuscation);
        assert_eq!(whether.detect(&obf).unwrap(), OBFUSCATED);
        assert_eq!(whether.detect(&doc).unwrap(), ORIGINAL);
    }

    #[test]
    fn forced_ignores_content() {
        let doc = Document::new("d1", "a", "An original sentence.").unwrap();
        let det = Detector::forced(DetectorKind::Obfuscation, OBFUSCATED).unwrap();
        assert_eq!(det.detect(&doc).unwrap(), OBFUSCATED);
        let dspan_doc = doc.obfuscated(ObfuscatorId::Dspan, "A sentence.");
        let det = Detector::forced(DetectorKind::Obfuscator, "mutantx").unwrap();
        assert_eq!(det.detect(&dspan_doc).unwrap(), "mutantx");
        assert!(Detector::forced(DetectorKind::Obfuscator, "obfuscated").is_err());
        assert!(Detector::forced(DetectorKind::Obfuscation, "dspan").is_err());
    }

    #[test]
    fn learned_obfuscation_detector_separates_easy_classes() {
        let originals = docs(
            "o",
            &[
                "the cat sat on the mat.",
                "we went out for a walk.",
                "it rained all day long.",
                "she read a book in bed.",
            ],
        );
        let obf = shouty(&originals, ObfuscatorId::Dspan);
        let params = ForestParams {
            n_trees: 10,
            ..ForestParams::default()
        };
        let model = train_obfuscation_detector(&originals, &obf, &params).unwrap();
        assert_eq!(model.classes(), ["obfuscated", "original"]);
        let again = train_obfuscation_detector(&originals, &obf, &params).unwrap();
        assert_eq!(model.forest.digest(), again.forest.digest());
        let det = Detector::learned(model);
        let probe = Document::new("p", "a", "a dog ran to the park.").unwrap();
        assert_eq!(det.detect(&probe).unwrap(), ORIGINAL);
        let probe = probe.obfuscated(ObfuscatorId::Dspan, "A DOG RAN TO THE PARK.!!");
        assert_eq!(det.detect(&probe).unwrap(), OBFUSCATED);
    }

    #[test]
    fn single_doc_per_class_trains() {
        let originals = docs("o", &["just one document."]);
        let obf = shouty(&originals, ObfuscatorId::MutantX);
        let model =
            train_obfuscation_detector(&originals, &obf, &ForestParams::default()).unwrap();
        assert_eq!(model.kind, DetectorKind::Obfuscation);
        let empty = DocumentSet::new(vec![]).unwrap();
        assert!(train_obfuscation_detector(&originals, &empty, &ForestParams::default()).is_err());
    }

    #[test]
    fn obfuscator_detector_needs_two_classes() {
        let base = docs("o", &["one text.", "two texts."]);
        let mut sets = BTreeMap::new();
        sets.insert(ObfuscatorId::Dspan, shouty(&base, ObfuscatorId::Dspan));
        assert!(train_obfuscator_detector(&sets, &ForestParams::default()).is_err());
        sets.insert(ObfuscatorId::MutantX, shouty(&base, ObfuscatorId::MutantX));
        let model = train_obfuscator_detector(&sets, &ForestParams::default()).unwrap();
        assert_eq!(model.classes(), ["dspan", "mutantx"]);
    }

    #[test]
    fn detector_file_round_trip_keeps_kind() {
        let base = docs("o", &["one text.", "two texts."]);
        let mut sets = BTreeMap::new();
        sets.insert(ObfuscatorId::Dspan, shouty(&base, ObfuscatorId::Dspan));
        sets.insert(ObfuscatorId::MutantX, shouty(&base, ObfuscatorId::MutantX));
        let model = train_obfuscator_detector(&sets, &ForestParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("det.json");
        model.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"kind\": \"obfuscator\"") || text.contains("\"kind\":\"obfuscator\""));
        let back = DetectorModel::load(&path).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn identical_classes_are_a_coin_flip() {
        let texts: Vec<String> = (0..40)
            .map(|i| format!("text number {} has {} words in it.", i % 10, i % 7))
            .collect();
        let texts: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
        let (fit_part, held) = texts.split_at(30);
        let base = docs("o", fit_part);
        let mut sets = BTreeMap::new();
        for id in [ObfuscatorId::Dspan, ObfuscatorId::MutantX] {
            let set = base.iter().map(|d| d.obfuscated(id, d.text.clone())).collect();
            sets.insert(id, DocumentSet::new(set).unwrap());
        }
        let det = Detector::learned(train_obfuscator_detector(&sets, &ForestParams::default()).unwrap());
        let held = docs("h", held);
        let mut correct = 0;
        let mut total = 0;
        for id in [ObfuscatorId::Dspan, ObfuscatorId::MutantX] {
            for d in held.iter() {
                let probe = d.obfuscated(id, d.text.clone());
                correct += usize::from(det.detect(&probe).unwrap() == id.as_str());
                total += 1;
            }
        }
        let acc = correct as f64 / total as f64;
        assert!((acc - 0.5).abs() <= 0.1, "accuracy {acc}");
    }

    #[test]
    fn learned_mode_without_model_is_a_config_error() {
        let det = Detector {
            kind: DetectorKind::Obfuscation,
            mode: DetectorMode::Learned,
            model: None,
        };
        assert!(det.validate().is_err());
    }
}
