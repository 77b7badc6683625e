//! Rule-based sentence simplification.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{choose_synonym, join_tokens, replaceable, ObfuscationResult};
use crate::corpus::{Document, ObfuscatorId};
use crate::error::{Error, Result};
use crate::metrics::Meteor;
use crate::rng::{stream, StreamRng};
use crate::textproc::{
    capitalize, match_case, tokenize, ContractionTable, SynonymLexicon, Token, TokenKind,
};
use crate::SCHEMA_VERSION;

const DEFAULT_RULES: &str = include_str!("../../data/dspan_rules.json");

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DspanRuleSet {
    pub schema_version: u32,
    pub discourse_markers: Vec<String>,
    /// (contracted, expanded) pairs.
    pub contraction_pairs: Vec<(String, String)>,
    pub lexical_sub_rate: f64,
    #[serde(default = "yes")]
    pub parenthetical_removal: bool,
}

impl Default for DspanRuleSet {
    fn default() -> Self {
        Self::from_json(DEFAULT_RULES).expect("bundled rule file parses")
    }
}

impl DspanRuleSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let rules: DspanRuleSet = serde_json::from_str(text)?;
        if rules.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                found: rules.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        rules.validate()?;
        Ok(rules)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lexical_sub_rate) {
            return Err(Error::config("lexical_sub_rate must lie in [0, 1]"));
        }
        if self
            .discourse_markers
            .iter()
            .any(|m| m.split_whitespace().next().is_none())
        {
            return Err(Error::config("empty discourse marker"));
        }
        Ok(())
    }

    pub fn contraction_table(&self) -> ContractionTable {
        ContractionTable::new(self.contraction_pairs.iter().cloned())
    }
}

pub fn obfuscate_dspan(
    doc: &Document,
    rules: &DspanRuleSet,
    lexicon: &SynonymLexicon,
    meteor: &Meteor,
    seed: u64,
) -> ObfuscationResult {
    let mut rng = stream(seed, &["dspan", &doc.doc_id]);
    let text = simplify(&doc.text, rules, lexicon, &mut rng);
    ObfuscationResult {
        original_doc_id: doc.doc_id.clone(),
        obfuscator_id: ObfuscatorId::Dspan,
        meteor: meteor.score(&text, &doc.text).score,
        text,
        evaded: None,
        generations_used: None,
        fitness_trace: Vec::new(),
    }
}

/// Parenthetical removal, discourse-marker removal, contraction toggling and
/// lexical substitution, in that order. Never returns blank text.
pub fn simplify(
    text: &str,
    rules: &DspanRuleSet,
    lexicon: &SynonymLexicon,
    rng: &mut StreamRng,
) -> String {
    let mut out = text.to_string();
    if rules.parenthetical_removal {
        out = non_blank(remove_parentheticals(&out), out);
    }
    out = non_blank(
        remove_discourse_markers(&out, &rules.discourse_markers),
        out,
    );
    out = toggle_contractions(&out, &rules.contraction_table());
    substitute_words(&out, lexicon, rules.lexical_sub_rate, rng)
}

fn non_blank(new: String, old: String) -> String {
    if new.trim().is_empty() {
        old
    } else {
        new
    }
}

/// Drop balanced `( ... )` spans together with the whitespace before them.
pub fn remove_parentheticals(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '(' {
            if let Some(close) = matching_paren(&chars, i) {
                while out.ends_with(|c: char| c.is_whitespace()) {
                    out.pop();
                }
                i = close + 1;
                if out.is_empty() {
                    while i < chars.len() && chars[i].is_whitespace() {
                        i += 1;
                    }
                } else if i < chars.len() && chars[i].is_alphanumeric() {
                    out.push(' ');
                }
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

fn matching_paren(chars: &[char], open: usize) -> Option<usize> {
    let mut depth = 0;
    for (k, &c) in chars.iter().enumerate().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            _ => {}
        }
    }
    None
}

fn marker_len(tokens: &[Token], at: usize, markers: &[Vec<String>]) -> Option<usize> {
    markers
        .iter()
        .filter(|m| {
            m.len() <= tokens.len().saturating_sub(at)
                && m.iter().zip(&tokens[at..]).enumerate().all(|(k, (w, t))| {
                    t.kind == TokenKind::Word
                        && t.surface.to_lowercase() == *w
                        && (k == 0 || !t.leading_ws.is_empty())
                })
        })
        .map(Vec::len)
        .max()
}

fn is_comma(t: Option<&Token>) -> bool {
    t.is_some_and(|t| t.surface == ",")
}

fn is_terminal(t: Option<&Token>) -> bool {
    t.is_some_and(|t| matches!(t.surface.as_str(), "." | "!" | "?" | ";"))
}

/// Remove discourse markers that open a sentence ("However, ...") or sit
/// between commas (", in fact,").
pub fn remove_discourse_markers(text: &str, markers: &[String]) -> String {
    let markers: Vec<Vec<String>> = markers
        .iter()
        .map(|m| m.split_whitespace().map(str::to_lowercase).collect())
        .collect();
    let tt = tokenize(text);
    let mut tokens = tt.tokens.clone();
    let mut keep = vec![true; tokens.len()];

    for &(lo, hi) in &tt.sentences {
        let sent = &tt.tokens[lo..hi];
        let mut i = 0;
        while i < sent.len() {
            let start = i == 0 || (i == 1 && matches!(sent[0].surface.as_str(), "\"" | "'"));
            if start {
                if let Some(n) = marker_len(sent, i, &markers) {
                    let mut end = i + n;
                    if is_comma(sent.get(end)) {
                        end += 1;
                    }
                    let next_is_word = sent.get(end).is_some_and(|t| t.kind == TokenKind::Word);
                    if end > i + n || next_is_word {
                        let first = lo + i;
                        let next = lo + end;
                        (first..next).for_each(|k| keep[k] = false);
                        if next < lo + sent.len() {
                            tokens[next].leading_ws = tt.tokens[first].leading_ws.clone();
                            if sent[i].surface.starts_with(char::is_uppercase) {
                                tokens[next].surface = capitalize(&tokens[next].surface);
                            }
                        }
                        i = end;
                        continue;
                    }
                }
            }
            if is_comma(sent.get(i)) {
                if let Some(n) = marker_len(sent, i + 1, &markers) {
                    let after = i + 1 + n;
                    if is_comma(sent.get(after)) {
                        (lo + i..=lo + after).for_each(|k| keep[k] = false);
                        i = after + 1;
                        continue;
                    }
                    if is_terminal(sent.get(after)) {
                        (lo + i..lo + after).for_each(|k| keep[k] = false);
                        tokens[lo + after].leading_ws.clear();
                        i = after;
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
    let kept = tokens.iter().zip(&keep).filter(|(_, &k)| k).map(|(t, _)| t);
    let mut out = join_tokens(kept, &tt.trailing_ws);
    let trimmed = out.trim_start().len();
    out.drain(..out.len() - trimmed);
    out
}

fn fix_pronoun_i(phrase: &str) -> String {
    let mut words: Vec<String> = phrase.split(' ').map(str::to_string).collect();
    if let Some(first) = words.first_mut() {
        if first == "i" || first.starts_with("i'") {
            first.replace_range(0..1, "I");
        }
    }
    words.join(" ")
}

/// Expand every known contraction and contract every known expansion, in a
/// single left-to-right pass.
pub fn toggle_contractions(text: &str, table: &ContractionTable) -> String {
    let tt = tokenize(text);
    let tokens = &tt.tokens;
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if t.kind == TokenKind::Word {
            if let Some(expansion) = table.expand(&t.surface) {
                let phrase = fix_pronoun_i(&expansion.join(" "));
                let mut token = t.clone();
                token.surface = match_case(&t.surface, &phrase);
                out.push(token);
                i += 1;
                continue;
            }
            let mut words = vec![t.surface.as_str()];
            let mut k = i + 1;
            while k < tokens.len()
                && words.len() < 4
                && tokens[k].kind == TokenKind::Word
                && tokens[k].leading_ws == " "
            {
                words.push(&tokens[k].surface);
                k += 1;
            }
            if let Some((n, contracted)) = table.contract_prefix(&words) {
                let mut token = t.clone();
                token.surface = fix_pronoun_i(&match_case(&t.surface, contracted));
                out.push(token);
                i += n;
                continue;
            }
        }
        out.push(t.clone());
        i += 1;
    }
    join_tokens(&out, &tt.trailing_ws)
}

/// Replace each replaceable word with probability `rate`.
pub fn substitute_words(
    text: &str,
    lexicon: &SynonymLexicon,
    rate: f64,
    rng: &mut StreamRng,
) -> String {
    let mut tt = tokenize(text);
    for (i, syns) in replaceable(&tt, lexicon) {
        if rng.gen::<f64>() < rate {
            let new = choose_synonym(&tt.tokens[i].surface, &syns, rng);
            tt.tokens[i].surface = new;
        }
    }
    tt.detokenize()
}
