//! Writeprints-Static style stylometric features: a fixed, versioned
//! registry of 555 count and frequency features.
//!
//! Every feature is a bag-of-counts statistic, so extraction is insensitive
//! to sentence order. "Chars" are non-whitespace characters; per-word and
//! per-char features divide a count by the word or char total (0/0 = 0).

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, Document, DocumentSet};
use crate::error::{Error, Result};
use crate::rng::sha256_hex;
use crate::textproc::{pos_tag, tokenize, TokenKind, TAGSET};

pub const REGISTRY_VERSION: &str = "wps-1";
pub const FEATURE_COUNT: usize = 555;

const FUNCTION_WORDS: &str = include_str!("../data/function_words.txt");
const NGRAMS: &str = include_str!("../data/ngrams.txt");

/// Writeprints special characters (parentheses replace `^` and `\`).
pub const SPECIAL_CHARS: [char; 21] = [
    '~', '@', '#', '$', '%', '&', '*', '-', '_', '=', '+', '>', '<', '[', ']', '{', '}', '(', ')',
    '/', '|',
];
pub const PUNCTUATION_CHARS: [char; 8] = ['.', ',', '!', '?', ';', ':', '\'', '"'];
const MAX_WORD_LEN_BIN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureGroup {
    WordLexical,
    CharLexical,
    LetterFreq,
    DigitFreq,
    SpecialChar,
    Punctuation,
    Bigram,
    Trigram,
    FunctionWord,
    PosTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    PerWord,
    PerChar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub index: usize,
    pub name: String,
    pub group: FeatureGroup,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRegistry {
    pub version: String,
    pub entries: Vec<FeatureEntry>,
}

impl FeatureRegistry {
    pub fn group_len(&self, group: FeatureGroup) -> usize {
        self.entries.iter().filter(|e| e.group == group).count()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Layout {
    registry: FeatureRegistry,
    function_words: HashMap<String, usize>,
    bigrams: HashMap<[u8; 2], usize>,
    trigrams: HashMap<[u8; 3], usize>,
    word_len: usize,
    capitalized: usize,
    all_caps: usize,
    char_count: usize,
    letters: usize,
    special: usize,
    punct: usize,
    pos: usize,
}

fn parse_ngrams() -> (Vec<String>, Vec<String>) {
    let (mut bigrams, mut trigrams) = (Vec::new(), Vec::new());
    let mut section = None;
    for line in NGRAMS.lines().map(str::trim) {
        match line {
            "" => {}
            l if l.starts_with('#') => {}
            "[bigrams]" => section = Some(2),
            "[trigrams]" => section = Some(3),
            l => {
                let target = match section {
                    Some(2) => &mut bigrams,
                    Some(3) => &mut trigrams,
                    _ => panic!("n-gram outside a section"),
                };
                target.extend(l.split_whitespace().map(str::to_string));
            }
        }
    }
    (bigrams, trigrams)
}

fn layout() -> &'static Layout {
    static LAYOUT: OnceLock<Layout> = OnceLock::new();
    LAYOUT.get_or_init(|| {
        let mut entries = Vec::with_capacity(FEATURE_COUNT);
        let mut push = |name: String, group, normalization| {
            let index = entries.len();
            entries.push(FeatureEntry {
                index,
                name,
                group,
                normalization,
            });
            index
        };
        use FeatureGroup as G;
        use Normalization as N;

        push("word_count".into(), G::WordLexical, N::Raw);
        let word_len = push("word_len_01".into(), G::WordLexical, N::PerWord);
        for len in 2..MAX_WORD_LEN_BIN {
            push(format!("word_len_{len:02}"), G::WordLexical, N::PerWord);
        }
        push(
            format!("word_len_{MAX_WORD_LEN_BIN}_plus"),
            G::WordLexical,
            N::PerWord,
        );
        let capitalized = push("capitalized_words".into(), G::WordLexical, N::PerWord);
        let all_caps = push("all_caps_words".into(), G::WordLexical, N::PerWord);

        let char_count = push("char_count".into(), G::CharLexical, N::Raw);
        push("letter_ratio".into(), G::CharLexical, N::PerChar);
        push("uppercase_ratio".into(), G::CharLexical, N::PerChar);
        push("digit_ratio".into(), G::CharLexical, N::PerChar);
        push("non_alphanumeric_ratio".into(), G::CharLexical, N::PerChar);

        let letters = ('a'..='z')
            .map(|c| push(format!("letter_{c}"), G::LetterFreq, N::PerChar))
            .min()
            .unwrap();
        for d in '0'..='9' {
            push(format!("digit_{d}"), G::DigitFreq, N::PerChar);
        }
        let special = SPECIAL_CHARS
            .iter()
            .map(|c| push(format!("special_{c}"), G::SpecialChar, N::PerChar))
            .min()
            .unwrap();
        let punct = PUNCTUATION_CHARS
            .iter()
            .map(|c| push(format!("punct_{c}"), G::Punctuation, N::PerChar))
            .min()
            .unwrap();

        let (bigram_list, trigram_list) = parse_ngrams();
        let mut bigrams = HashMap::new();
        for g in &bigram_list {
            let b = g.as_bytes();
            bigrams.insert(
                [b[0], b[1]],
                push(format!("bigram_{g}"), G::Bigram, N::PerChar),
            );
        }
        let mut trigrams = HashMap::new();
        for g in &trigram_list {
            let b = g.as_bytes();
            trigrams.insert(
                [b[0], b[1], b[2]],
                push(format!("trigram_{g}"), G::Trigram, N::PerChar),
            );
        }

        let mut function_words = HashMap::new();
        for word in FUNCTION_WORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let idx = push(format!("fw_{word}"), G::FunctionWord, N::PerWord);
            function_words.insert(word.to_string(), idx);
        }

        let pos = TAGSET
            .iter()
            .map(|tag| push(format!("pos_{tag}"), G::PosTag, N::PerWord))
            .min()
            .unwrap();

        assert_eq!(
            entries.len(),
            FEATURE_COUNT,
            "registry must have {FEATURE_COUNT} entries"
        );
        Layout {
            registry: FeatureRegistry {
                version: REGISTRY_VERSION.to_string(),
                entries,
            },
            function_words,
            bigrams,
            trigrams,
            word_len,
            capitalized,
            all_caps,
            char_count,
            letters,
            special,
            punct,
            pos,
        }
    })
}

/// The canonical `wps-1` registry.
pub fn registry() -> &'static FeatureRegistry {
    &layout().registry
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub doc_id: String,
    pub registry_version: String,
    pub values: Vec<f64>,
}

pub fn extract(doc: &Document) -> FeatureVector {
    extract_text(&doc.doc_id, &doc.text)
}

pub fn extract_text(doc_id: &str, text: &str) -> FeatureVector {
    FeatureVector {
        doc_id: doc_id.to_string(),
        registry_version: REGISTRY_VERSION.to_string(),
        values: feature_values(text),
    }
}

fn feature_values(text: &str) -> Vec<f64> {
    let l = layout();
    let mut counts = vec![0.0f64; FEATURE_COUNT];
    let tokens = tokenize(text);

    let mut words = 0usize;
    for token in tokens.tokens.iter().filter(|t| t.kind == TokenKind::Word) {
        words += 1;
        let len = token.surface.chars().count().min(MAX_WORD_LEN_BIN);
        counts[l.word_len + len - 1] += 1.0;
        if token.surface.chars().next().is_some_and(char::is_uppercase) {
            counts[l.capitalized] += 1.0;
        }
        let letters: Vec<char> = token
            .surface
            .chars()
            .filter(|c| c.is_alphabetic())
            .collect();
        if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
            counts[l.all_caps] += 1.0;
        }
        let lower = token.surface.to_lowercase().replace('\u{2019}', "'");
        if let Some(&idx) = l.function_words.get(&lower) {
            counts[idx] += 1.0;
        }
        for run in lower.as_bytes().split(|b| !b.is_ascii_lowercase()) {
            for w in run.windows(2) {
                if let Some(&idx) = l.bigrams.get(&[w[0], w[1]]) {
                    counts[idx] += 1.0;
                }
            }
            for w in run.windows(3) {
                if let Some(&idx) = l.trigrams.get(&[w[0], w[1], w[2]]) {
                    counts[idx] += 1.0;
                }
            }
        }
    }
    for tag in pos_tag(&tokens).tags {
        counts[l.pos + tag.index()] += 1.0;
    }

    let mut chars = 0usize;
    let (mut alpha, mut upper, mut digits, mut other) = (0usize, 0usize, 0usize, 0usize);
    for c in text.chars().filter(|c| !c.is_whitespace()) {
        chars += 1;
        if c.is_alphabetic() {
            alpha += 1;
            if c.is_uppercase() {
                upper += 1;
            }
        } else if c.is_numeric() {
            digits += 1;
        } else {
            other += 1;
        }
        if c.is_ascii_alphabetic() {
            counts[l.letters + (c.to_ascii_lowercase() as u8 - b'a') as usize] += 1.0;
        } else if c.is_ascii_digit() {
            counts[l.letters + 26 + (c as u8 - b'0') as usize] += 1.0;
        } else if let Some(k) = SPECIAL_CHARS.iter().position(|&s| s == c) {
            counts[l.special + k] += 1.0;
        } else if let Some(k) = PUNCTUATION_CHARS.iter().position(|&s| s == c) {
            counts[l.punct + k] += 1.0;
        }
    }
    counts[0] = words as f64;
    counts[l.char_count] = chars as f64;
    counts[l.char_count + 1] = alpha as f64;
    counts[l.char_count + 2] = upper as f64;
    counts[l.char_count + 3] = digits as f64;
    counts[l.char_count + 4] = other as f64;

    let ratio = |x: f64, n: usize| if n == 0 { 0.0 } else { x / n as f64 };
    for (value, entry) in counts.iter_mut().zip(&l.registry.entries) {
        *value = match entry.normalization {
            Normalization::Raw => *value,
            Normalization::PerWord => ratio(*value, words),
            Normalization::PerChar => ratio(*value, chars),
        };
    }
    counts
}

/// Order-preserving parallel extraction.
pub fn extract_batch(docs: &DocumentSet) -> Vec<FeatureVector> {
    docs.docs().par_iter().map(extract).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    doc_id: String,
    content_hash: String,
    registry_version: String,
    values: Vec<f64>,
}

/// Feature vectors persisted as JSON lines, keyed by (content hash,
/// registry version).
#[derive(Debug, Default)]
pub struct FeatureCache {
    by_key: HashMap<(String, String), Vec<f64>>,
}

impl FeatureCache {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cache = FeatureCache::default();
        if !path.exists() {
            return Ok(cache);
        }
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: CacheLine = serde_json::from_str(&line)?;
            if entry.values.len() == FEATURE_COUNT {
                cache
                    .by_key
                    .insert((entry.content_hash, entry.registry_version), entry.values);
            }
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    /// Extract every document, reusing cached vectors, and rewrite the cache
    /// file for this set atomically when anything was computed.
    pub fn extract_set(path: &Path, docs: &DocumentSet) -> Result<Vec<FeatureVector>> {
        let cache = Self::load(path)?;
        let keyed: Vec<(String, Option<&Vec<f64>>)> = docs
            .iter()
            .map(|d| {
                let key = sha256_hex(&d.text);
                let hit = cache
                    .by_key
                    .get(&(key.clone(), REGISTRY_VERSION.to_string()));
                (key, hit)
            })
            .collect();
        let misses = keyed.iter().filter(|(_, hit)| hit.is_none()).count();
        let vectors: Vec<FeatureVector> = docs
            .docs()
            .par_iter()
            .zip(keyed.par_iter())
            .map(|(doc, (_, hit))| match hit {
                Some(values) => FeatureVector {
                    doc_id: doc.doc_id.clone(),
                    registry_version: REGISTRY_VERSION.to_string(),
                    values: (*values).clone(),
                },
                None => extract(doc),
            })
            .collect();
        if misses > 0 || cache.len() != docs.len() {
            let mut out = Vec::new();
            for (v, (key, _)) in vectors.iter().zip(&keyed) {
                let line = CacheLine {
                    doc_id: v.doc_id.clone(),
                    content_hash: key.clone(),
                    registry_version: v.registry_version.clone(),
                    values: v.values.clone(),
                };
                serde_json::to_writer(&mut out, &line)?;
                out.push(b'\n');
            }
            write_atomic(path, &out)?;
        }
        Ok(vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(v: &FeatureVector, name: &str) -> f64 {
        v.values[registry()
            .index_of(name)
            .unwrap_or_else(|| panic!("no feature {name}"))]
    }

    #[test]
    fn registry_shape() {
        let r = registry();
        assert_eq!(r.entries.len(), 555);
        assert_eq!(r.version, "wps-1");
        assert!(r.entries.iter().enumerate().all(|(i, e)| e.index == i));
        let names: std::collections::HashSet<_> = r.entries.iter().map(|e| &e.name).collect();
        assert_eq!(names.len(), 555);
        use FeatureGroup::*;
        let groups = [
            (WordLexical, 23),
            (CharLexical, 5),
            (LetterFreq, 26),
            (DigitFreq, 10),
            (SpecialChar, 21),
            (Punctuation, 8),
            (Bigram, 50),
            (Trigram, 50),
            (FunctionWord, 340),
            (PosTag, 22),
        ];
        for (g, n) in groups {
            assert_eq!(r.group_len(g), n, "{g:?}");
        }
        assert_eq!(groups.iter().map(|g| g.1).sum::<usize>(), 555);
    }

    #[test]
    fn shipped_registry_json_matches() {
        let shipped: FeatureRegistry =
            serde_json::from_str(include_str!("../data/registry-wps-1.json")).unwrap();
        assert_eq!(&shipped, registry());
    }

    #[test]
    fn simple_counts() {
        let v = extract_text("d", "aaa bbb aaa");
        assert_eq!(value(&v, "word_count"), 3.0);
        assert_eq!(value(&v, "letter_a"), 6.0 / 9.0);
        assert_eq!(value(&v, "letter_b"), 3.0 / 9.0);
        assert_eq!(value(&v, "char_count"), 9.0);
    }

    #[test]
    fn empty_is_zero() {
        let v = extract_text("d", "");
        assert!(v.values.iter().all(|&x| x == 0.0));
        assert_eq!(v.values.len(), 555);
    }

    #[test]
    fn function_words_fire() {
        let v = extract_text("d", "I'm not an expert");
        assert!(value(&v, "fw_not") > 0.0);
        assert!(value(&v, "fw_an") > 0.0);
        assert!(value(&v, "fw_i'm") > 0.0);
    }

    #[test]
    fn batch_matches_single() {
        let docs = DocumentSet::new(vec![
            Document::new("b", "x", "Second doc here.").unwrap(),
            Document::new("a", "x", "First one!").unwrap(),
        ])
        .unwrap();
        let batch = extract_batch(&docs);
        assert_eq!(batch.len(), 2);
        for (v, d) in batch.iter().zip(docs.iter()) {
            assert_eq!(v, &extract(d));
        }
        assert_eq!(batch[0].doc_id, "a");
    }

    #[test]
    fn cache_round_trip() {
        let tmp = tempfile::TempDir::new().unwrap();
        let path = tmp.path().join("features.jsonl");
        let docs = DocumentSet::new(vec![
            Document::new("a", "x", "The cat sat on the mat.").unwrap(),
            Document::new("b", "y", "Dogs bark (loudly) at night!").unwrap(),
        ])
        .unwrap();
        let first = FeatureCache::extract_set(&path, &docs).unwrap();
        assert_eq!(FeatureCache::load(&path).unwrap().len(), 2);
        let second = FeatureCache::extract_set(&path, &docs).unwrap();
        assert_eq!(first, second);
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"registry_version\":\"wps-1\""));
    }
}
