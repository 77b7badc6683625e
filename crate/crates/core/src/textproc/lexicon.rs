use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open-class part of speech used to key synonym entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarsePos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl FromStr for CoarsePos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noun" | "n" => Ok(CoarsePos::Noun),
            "verb" | "v" => Ok(CoarsePos::Verb),
            "adj" | "a" | "adjective" => Ok(CoarsePos::Adj),
            "adv" | "r" | "adverb" => Ok(CoarsePos::Adv),
            other => Err(Error::data(format!("unknown part of speech '{other}'"))),
        }
    }
}

impl fmt::Display for CoarsePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoarsePos::Noun => "noun",
            CoarsePos::Verb => "verb",
            CoarsePos::Adj => "adj",
            CoarsePos::Adv => "adv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymEntry {
    pub word: String,
    pub pos: CoarsePos,
}

/// Directional synonym table: `lemma -> [(synonym, pos)]`.
///
/// Symmetry is not implied; `a -> b` says nothing about `b -> a`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymLexicon {
    pub version: String,
    entries: BTreeMap<String, Vec<SynonymEntry>>,
}

impl SynonymLexicon {
    /// Parse `lemma<TAB>pos<TAB>syn1,syn2,...` lines. `#` starts a comment;
    /// a `# version: <v>` comment sets the lexicon version.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lexicon = SynonymLexicon {
            version: "unversioned".to_string(),
            entries: BTreeMap::new(),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if let Some(comment) = line.trim_start().strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    lexicon.version = v.trim().to_string();
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::data(format!(
                    "lexicon line {}: expected 3 tab-separated fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let pos: CoarsePos = fields[1].parse()?;
            for syn in fields[2].split(',') {
                lexicon.insert(fields[0], syn, pos);
            }
        }
        Ok(lexicon)
    }

    /// Broad related-word lexicon driving word substitution in the
    /// obfuscators.
    pub fn bundled_related() -> Self {
        Self::parse(include_str!("../../data/lexicon_related.tsv"))
            .expect("bundled related lexicon parses")
    }

    /// Strict synonym pairs for the METEOR synonym stage.
    pub fn bundled_strict() -> Self {
        Self::parse(include_str!("../../data/lexicon_strict.tsv"))
            .expect("bundled strict lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Add one directed pair. Self-maps and duplicates are dropped.
    pub fn insert(&mut self, lemma: &str, synonym: &str, pos: CoarsePos) {
        let lemma = lemma.trim().to_lowercase();
        let word = synonym.trim().to_lowercase();
        if lemma.is_empty() || word.is_empty() || lemma == word {
            return;
        }
        let list = self.entries.entry(lemma).or_default();
        if !list.iter().any(|e| e.word == word && e.pos == pos) {
            list.push(SynonymEntry { word, pos });
        }
    }

    /// Synonyms of `token` (case-insensitive), restricted to `pos` when given.
    pub fn synonyms(&self, token: &str, pos: Option<CoarsePos>) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        if let Some(list) = self.entries.get(&token.to_lowercase()) {
            for entry in list {
                if pos.is_none_or(|p| p == entry.pos) && !out.contains(&entry.word.as_str()) {
                    out.push(&entry.word);
                }
            }
        }
        out
    }

    /// True when either word lists the other, for any part of speech.
    pub fn related(&self, a: &str, b: &str) -> bool {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        let lists = |x: &str, y: &str| {
            self.entries
                .get(x)
                .is_some_and(|list| list.iter().any(|e| e.word == y))
        };
        lists(&a, &b) || lists(&b, &a)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# version: test-1\n\
        student\tnoun\tpupil,scholar,pupil\n\
        street\tnoun\tsidewalk,road\n\
        run\tverb\tsprint\n\
        run\tnoun\tjog,run\n";

    #[test]
    fn lookup_by_pos() {
        let lex = SynonymLexicon::parse(SAMPLE).unwrap();
        assert_eq!(lex.version, "test-1");
        assert!(lex
            .synonyms("student", Some(CoarsePos::Noun))
            .contains(&"pupil"));
        assert!(lex
            .synonyms("Street", Some(CoarsePos::Noun))
            .contains(&"sidewalk"));
        assert_eq!(lex.synonyms("run", Some(CoarsePos::Verb)), vec!["sprint"]);
        assert_eq!(lex.synonyms("run", None), vec!["sprint", "jog"]);
        assert!(lex.synonyms("zzxqy", None).is_empty());
    }

    #[test]
    fn dedup_and_no_self_map() {
        let lex = SynonymLexicon::parse(SAMPLE).unwrap();
        assert_eq!(lex.synonyms("student", None), vec!["pupil", "scholar"]);
        assert!(!lex.synonyms("run", None).contains(&"run"));
    }

    #[test]
    fn directional() {
        let lex = SynonymLexicon::parse(SAMPLE).unwrap();
        assert!(lex.synonyms("pupil", None).is_empty());
        assert!(lex.related("pupil", "student"));
    }

    #[test]
    fn bundled_lexicons() {
        let related = SynonymLexicon::bundled_related();
        let noun = Some(CoarsePos::Noun);
        assert!(related.synonyms("student", noun).contains(&"pupil"));
        assert!(related.synonyms("street", noun).contains(&"sidewalk"));
        assert!(related.synonyms("layout", noun).contains(&"makeover"));
        assert!(related
            .synonyms("remain", Some(CoarsePos::Verb))
            .contains(&"stay"));
        assert!(related
            .synonyms("original", Some(CoarsePos::Adj))
            .contains(&"manifest"));
        let strict = SynonymLexicon::bundled_strict();
        assert!(strict.related("student", "pupil"));
        assert!(!strict.related("street", "sidewalk"));
        for lemma in strict.lemmas() {
            for syn in strict.synonyms(lemma, None) {
                assert!(related.related(lemma, syn), "{lemma} -> {syn}");
            }
        }
    }

    #[test]
    fn malformed_line() {
        assert!(SynonymLexicon::parse("student noun pupil").is_err());
        assert!(SynonymLexicon::parse("student\tthing\tpupil").is_err());
    }
}
