//! The two defenders: rule-based simplification (DS-PAN) and genetic
//! word-replacement search (Mutant-X).

mod dspan;
mod mutantx;

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dspan::{
    obfuscate_dspan, remove_discourse_markers, remove_parentheticals, simplify, substitute_words,
    toggle_contractions, DspanRuleSet,
};
pub use mutantx::{
    crossover, mutate, obfuscate_mutantx, Crossover, GaTrace, Individual, MutantXParams,
};

use crate::corpus::{write_atomic, Document, ObfuscatorId};
use crate::error::{Error, Result};
use crate::textproc::{match_case, pos_tag, tokenize, SynonymLexicon, Token, TokenizedText};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationResult {
    pub original_doc_id: String,
    pub obfuscator_id: ObfuscatorId,
    pub text: String,
    pub meteor: f64,
    /// Internal attributor misclassifies the output (Mutant-X only).
    pub evaded: Option<bool>,
    pub generations_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fitness_trace: Vec<f64>,
}

impl ObfuscationResult {
    /// The obfuscated text as a document derived from `original`.
    pub fn to_document(&self, original: &Document) -> Document {
        original.obfuscated(self.obfuscator_id, self.text.clone())
    }
}

pub fn write_jsonl(path: &Path, results: &[ObfuscationResult]) -> Result<()> {
    let mut out = Vec::new();
    for r in results {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ObfuscationResult>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut results = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            results.push(serde_json::from_str(&line)?);
        }
    }
    Ok(results)
}

/// Word tokens tagged as open-class that have at least one same-POS
/// synonym: (token index, synonyms).
fn replaceable<'a>(
    text: &TokenizedText,
    lexicon: &'a SynonymLexicon,
) -> Vec<(usize, Vec<&'a str>)> {
    let tags = pos_tag(text).tags;
    let word_positions = text
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind == crate::textproc::TokenKind::Word)
        .map(|(i, _)| i);
    word_positions
        .zip(tags)
        .filter_map(|(i, tag)| {
            let pos = tag.coarse()?;
            let syns = lexicon.synonyms(&text.tokens[i].surface, Some(pos));
            (!syns.is_empty()).then_some((i, syns))
        })
        .collect()
}

fn choose_synonym(original: &str, synonyms: &[&str], rng: &mut impl Rng) -> String {
    let pick = synonyms.choose(rng).expect("non-empty synonym list");
    match_case(original, pick)
}

/// Rebuild text from tokens, keeping each token's leading whitespace.
fn join_tokens<'a>(tokens: impl IntoIterator<Item = &'a Token>, trailing_ws: &str) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&t.leading_ws);
        out.push_str(&t.surface);
    }
    out.push_str(trailing_ws);
    out
}

/// Replace chosen word tokens in place.
fn replace_words(text: &str, replacements: &[(usize, String)]) -> String {
    let mut tokens = tokenize(text);
    for (i, w) in replacements {
        tokens.tokens[*i].surface = w.clone();
    }
    tokens.detokenize()
}
