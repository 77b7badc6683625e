use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    /// Byte offsets into the source text.
    pub start: usize,
    pub end: usize,
    /// Whitespace between the previous token (or text start) and this one.
    pub leading_ws: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedText {
    pub tokens: Vec<Token>,
    /// Half-open token index ranges, one per sentence.
    pub sentences: Vec<(usize, usize)>,
    pub trailing_ws: String,
}

impl TokenizedText {
    /// Rebuild the source text; byte-identical to the tokenizer input.
    pub fn detokenize(&self) -> String {
        let mut out = String::new();
        for token in &self.tokens {
            out.push_str(&token.leading_ws);
            out.push_str(&token.surface);
        }
        out.push_str(&self.trailing_ws);
        out
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.kind == TokenKind::Word)
    }

    /// Text of sentence `i`, without the whitespace that precedes it.
    pub fn sentence_text(&self, i: usize) -> String {
        let (lo, hi) = self.sentences[i];
        let mut out = String::new();
        for (k, token) in self.tokens[lo..hi].iter().enumerate() {
            if k > 0 {
                out.push_str(&token.leading_ws);
            }
            out.push_str(&token.surface);
        }
        out
    }
}

const PUNCTUATION: &[char] = &[
    '.', ',', ';', ':', '!', '?', '\'', '"', '(', ')', '[', ']', '{', '}', '-', '\u{2013}',
    '\u{2014}', '\u{2026}', '\u{2018}', '\u{2019}', '\u{201c}', '\u{201d}',
];

const TERMINAL: &[char] = &['.', '!', '?', '\u{2026}'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{2019}', '\u{201d}'];

fn is_word_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_word_body(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

pub fn tokenize(text: &str) -> TokenizedText {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut ws_start = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if is_word_start(c) || c.is_ascii_digit() || c.is_numeric() {
            let numeric = !is_word_start(c);
            i += 1;
            loop {
                match chars.get(i).map(|&(_, ch)| ch) {
                    Some(ch) if is_word_body(ch) => i += 1,
                    Some(ch)
                        if numeric
                            && matches!(ch, '.' | ',')
                            && chars.get(i + 1).is_some_and(|&(_, n)| n.is_ascii_digit()) =>
                    {
                        i += 2
                    }
                    Some(ch)
                        if !numeric
                            && is_joiner(ch)
                            && chars.get(i + 1).is_some_and(|&(_, n)| is_word_body(n)) =>
                    {
                        i += 2
                    }
                    _ => break,
                }
            }
            if numeric {
                TokenKind::Number
            } else {
                TokenKind::Word
            }
        } else if PUNCTUATION.contains(&c) {
            i += 1;
            TokenKind::Punctuation
        } else {
            i += 1;
            TokenKind::Symbol
        };
        let (b0, b1) = (byte_at(start), byte_at(i));
        tokens.push(Token {
            surface: text[b0..b1].to_string(),
            kind,
            start: b0,
            end: b1,
            leading_ws: text[ws_start..b0].to_string(),
        });
        ws_start = b1;
    }
    let sentences = segment(&tokens);
    TokenizedText {
        tokens,
        sentences,
        trailing_ws: text[ws_start..].to_string(),
    }
}

fn is_terminal(token: &Token) -> bool {
    token.kind == TokenKind::Punctuation && token.surface.chars().all(|c| TERMINAL.contains(&c))
}

fn is_closer(token: &Token) -> bool {
    token.kind == TokenKind::Punctuation && token.surface.chars().all(|c| CLOSERS.contains(&c))
}

/// A sentence ends after a run of terminal punctuation (plus closing quotes
/// or brackets) when the next token starts with an uppercase letter or a
/// digit, or when the text ends.
fn segment(tokens: &[Token]) -> Vec<(usize, usize)> {
    let mut sentences = Vec::new();
    let mut begin = 0;
    let mut i = 0;
    while i < tokens.len() {
        if !is_terminal(&tokens[i]) {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < tokens.len() && (is_terminal(&tokens[end]) || is_closer(&tokens[end])) {
            end += 1;
        }
        let boundary = match tokens.get(end) {
            None => true,
            Some(next) => next
                .surface
                .chars()
                .find(|c| c.is_alphanumeric())
                .is_some_and(|c| c.is_uppercase() || c.is_numeric()),
        };
        if boundary {
            sentences.push((begin, end));
            begin = end;
        }
        i = end;
    }
    if begin < tokens.len() {
        sentences.push((begin, tokens.len()));
    }
    sentences
}
