//! Linguistic substrate: tokenization, sentence segmentation, a rule and
//! lexicon POS tagger, a Porter-style stemmer, synonym lexicons and the
//! contraction table.

mod contractions;
mod lexicon;
mod pos;
mod stem;
mod tokenize;

pub use contractions::{ContractionTable, DEFAULT_CONTRACTIONS};
pub use lexicon::{CoarsePos, SynonymLexicon};
pub use pos::{pos_tag, PosTag, PosTagging, TAGSET};
pub use stem::stem;
pub use tokenize::{tokenize, Token, TokenKind, TokenizedText};

/// Copy the capitalization pattern of `model` onto `word`.
///
/// All-caps models (two or more letters) produce all-caps output; a leading
/// capital produces a leading capital; anything else yields `word` unchanged.
pub fn match_case(model: &str, word: &str) -> String {
    let letters: Vec<char> = model.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
        return word.to_uppercase();
    }
    match model.chars().next() {
        Some(first) if first.is_uppercase() => capitalize(word),
        _ => word.to_string(),
    }
}

pub fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
