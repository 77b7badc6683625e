/// Contracted form and its expansion. Shared by the simplification
/// obfuscator and analysis code.
pub const DEFAULT_CONTRACTIONS: &[(&str, &str)] = &[
    ("i'm", "i am"),
    ("i've", "i have"),
    ("i'll", "i will"),
    ("i'd", "i would"),
    ("you're", "you are"),
    ("you've", "you have"),
    ("you'll", "you will"),
    ("he's", "he is"),
    ("she's", "she is"),
    ("it's", "it is"),
    ("we're", "we are"),
    ("we've", "we have"),
    ("we'll", "we will"),
    ("they're", "they are"),
    ("they've", "they have"),
    ("they'll", "they will"),
    ("that's", "that is"),
    ("there's", "there is"),
    ("what's", "what is"),
    ("let's", "let us"),
    ("to've", "to have"),
    ("isn't", "is not"),
    ("aren't", "are not"),
    ("wasn't", "was not"),
    ("weren't", "were not"),
    ("don't", "do not"),
    ("doesn't", "does not"),
    ("didn't", "did not"),
    ("haven't", "have not"),
    ("hasn't", "has not"),
    ("hadn't", "had not"),
    ("can't", "cannot"),
    ("couldn't", "could not"),
    ("won't", "will not"),
    ("wouldn't", "would not"),
    ("shouldn't", "should not"),
];

/// Bidirectional contraction table over lowercase forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionTable {
    pairs: Vec<(String, Vec<String>)>,
}

impl Default for ContractionTable {
    fn default() -> Self {
        Self::new(
            DEFAULT_CONTRACTIONS
                .iter()
                .map(|&(c, e)| (c.to_string(), e.to_string())),
        )
    }
}

impl ContractionTable {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let pairs = pairs
            .into_iter()
            .map(|(c, e)| {
                let words = e.split_whitespace().map(str::to_lowercase).collect();
                (c.to_lowercase().replace('\u{2019}', "'"), words)
            })
            .collect();
        ContractionTable { pairs }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, String)> {
        self.pairs.iter().map(|(c, e)| (c.as_str(), e.join(" ")))
    }

    /// Expansion words for a contracted token.
    pub fn expand(&self, word: &str) -> Option<&[String]> {
        let key = word.to_lowercase().replace('\u{2019}', "'");
        self.pairs
            .iter()
            .find(|(c, _)| *c == key)
            .map(|(_, e)| e.as_slice())
    }

    /// Longest expansion that is a prefix of `words`; returns its length and
    /// the contracted form.
    pub fn contract_prefix(&self, words: &[&str]) -> Option<(usize, &str)> {
        self.pairs
            .iter()
            .filter(|(_, e)| {
                e.len() <= words.len()
                    && e.iter().zip(words).all(|(a, b)| a.eq_ignore_ascii_case(b))
            })
            .max_by_key(|(_, e)| e.len())
            .map(|(c, e)| (e.len(), c.as_str()))
    }
}
