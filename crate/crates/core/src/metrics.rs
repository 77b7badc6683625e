//! Accuracy, confusion matrices, per-author error shares and METEOR.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{stem, tokenize, SynonymLexicon, TokenKind};

/// Fraction of positions where prediction equals truth.
pub fn accuracy<S: AsRef<str>>(predictions: &[S], truth: &[S]) -> Result<f64> {
    let (correct, total) = correct_total(predictions, truth)?;
    Ok(correct as f64 / total as f64)
}

pub fn correct_total<S: AsRef<str>>(predictions: &[S], truth: &[S]) -> Result<(usize, usize)> {
    if predictions.len() != truth.len() {
        return Err(Error::data(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::data("accuracy of an empty evaluation"));
    }
    let correct = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p.as_ref() == t.as_ref())
        .count();
    Ok((correct, truth.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// Rows are true labels, columns predicted labels.
    pub counts: Vec<Vec<u64>>,
    pub row_percentages: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        let row_percentages = counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            0.0
                        } else {
                            100.0 * c as f64 / total as f64
                        }
                    })
                    .collect()
            })
            .collect();
        ConfusionMatrix {
            classes,
            counts,
            row_percentages,
        }
    }
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn errors_for(&self, row: usize) -> u64 {
        self.counts[row].iter().sum::<u64>() - self.counts[row][row]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in &self.classes {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for (class, row) in self.classes.iter().zip(&self.row_percentages) {
            out.push_str(class);
            for v in row {
                write!(out, ",{v:.4}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion<S: AsRef<str>>(
    predictions: &[S],
    truth: &[S],
    classes: &[String],
) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::data("prediction and truth lengths differ"));
    }
    let index: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let lookup = |label: &str| {
        index
            .get(label)
            .copied()
            .ok_or_else(|| Error::data(format!("label {label:?} not among classes")))
    };
    let n = classes.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (p, t) in predictions.iter().zip(truth) {
        counts[lookup(t.as_ref())?][lookup(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix::from_counts(classes.to_vec(), counts))
}

/// Scenario -> author -> percentage of all errors across the included
/// scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorShareTable {
    pub shares: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ErrorShareTable {
    pub fn total(&self) -> f64 {
        self.shares.values().flat_map(|m| m.values()).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,author,share\n");
        for (scenario, row) in &self.shares {
            for (author, share) in row {
                writeln!(out, "{scenario},{author},{share:.6}").unwrap();
            }
        }
        out
    }
}

pub fn error_shares(matrices: &BTreeMap<String, ConfusionMatrix>) -> Result<ErrorShareTable> {
    let first = matrices
        .values()
        .next()
        .ok_or_else(|| Error::data("no confusion matrices"))?;
    if matrices.values().any(|m| m.classes != first.classes) {
        return Err(Error::data("confusion matrices disagree on classes"));
    }
    let total: u64 = matrices
        .values()
        .map(|m| (0..m.classes.len()).map(|r| m.errors_for(r)).sum::<u64>())
        .sum();
    if total == 0 {
        return Err(Error::data("no errors: shares are undefined"));
    }
    let shares = matrices
        .iter()
        .map(|(scenario, m)| {
            let row = m
                .classes
                .iter()
                .enumerate()
                .map(|(r, author)| {
                    (
                        author.clone(),
                        100.0 * m.errors_for(r) as f64 / total as f64,
                    )
                })
                .collect();
            (scenario.clone(), row)
        })
        .collect();
    Ok(ErrorShareTable { shares })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStage {
    Exact,
    Stem,
    Synonym,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeteorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub stages: Vec<MatchStage>,
    /// Search-node cap for exact chunk minimization.
    pub chunk_search_budget: usize,
}

impl Default for MeteorParams {
    fn default() -> Self {
        MeteorParams {
            alpha: 0.9,
            beta: 3.0,
            gamma: 0.5,
            stages: vec![MatchStage::Exact, MatchStage::Stem, MatchStage::Synonym],
            chunk_search_budget: 50_000,
        }
    }
}

impl MeteorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha)
            || !(0.0..=1.0).contains(&self.gamma)
            || self.beta <= 0.0
        {
            return Err(Error::config(
                "METEOR needs alpha, gamma in [0,1] and beta > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChunkSearch {
    /// Fewest chunks proven by exhaustive search.
    Exact,
    /// Greedy tiling: too many matches, or the search budget ran out.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorBreakdown {
    #[serde(rename = "matches_m")]
    pub matches: usize,
    pub exact_matches: usize,
    pub stem_matches: usize,
    pub synonym_matches: usize,
    pub candidate_len: usize,
    pub reference_len: usize,
    #[serde(rename = "precision_P")]
    pub precision: f64,
    #[serde(rename = "recall_R")]
    pub recall: f64,
    pub f_mean: f64,
    #[serde(rename = "chunks_ch")]
    pub chunks: usize,
    pub penalty: f64,
    pub score: f64,
    pub chunk_search: ChunkSearch,
}

/// METEOR parameters bundled with the synonym lexicon used by the synonym
/// stage.
#[derive(Debug, Clone, Default)]
pub struct Meteor {
    pub params: MeteorParams,
    pub lexicon: Option<SynonymLexicon>,
}

impl Meteor {
    pub fn new(params: MeteorParams, lexicon: Option<SynonymLexicon>) -> Self {
        Meteor { params, lexicon }
    }

    pub fn score(&self, candidate: &str, reference: &str) -> MeteorBreakdown {
        meteor(candidate, reference, &self.params, self.lexicon.as_ref())
    }

    pub fn score_tokens(&self, candidate: &[String], reference: &[String]) -> MeteorBreakdown {
        meteor_tokenized(candidate, reference, &self.params, self.lexicon.as_ref())
    }
}

/// Lower-cased word and number tokens; punctuation does not take part.
pub fn meteor_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .tokens
        .iter()
        .filter(|t| matches!(t.kind, TokenKind::Word | TokenKind::Number))
        .map(|t| t.surface.to_lowercase().replace('\u{2019}', "'"))
        .collect()
}

pub fn meteor(
    candidate: &str,
    reference: &str,
    params: &MeteorParams,
    lexicon: Option<&SynonymLexicon>,
) -> MeteorBreakdown {
    meteor_tokenized(
        &meteor_tokens(candidate),
        &meteor_tokens(reference),
        params,
        lexicon,
    )
}

pub fn meteor_tokenized(
    candidate: &[String],
    reference: &[String],
    params: &MeteorParams,
    lexicon: Option<&SynonymLexicon>,
) -> MeteorBreakdown {
    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for w in candidate.iter().chain(reference) {
        let next = vocab.len();
        vocab.entry(w.as_str()).or_insert(next);
    }
    let words: Vec<&str> = {
        let mut v = vec![""; vocab.len()];
        for (w, &i) in &vocab {
            v[i] = w;
        }
        v
    };
    let cand: Vec<usize> = candidate.iter().map(|w| vocab[w.as_str()]).collect();
    let refr: Vec<usize> = reference.iter().map(|w| vocab[w.as_str()]).collect();

    let flows = stage_flows(&cand, &refr, &words, params, lexicon);
    let mut stage_counts = [0usize; 3];
    for (&(_, _, stage), &n) in &flows {
        stage_counts[stage as usize] += n;
    }
    let pair_flows: HashMap<(usize, usize), usize> =
        flows
            .iter()
            .fold(HashMap::new(), |mut acc, (&(c, r, _), &n)| {
                *acc.entry((c, r)).or_default() += n;
                acc
            });
    let matches: usize = stage_counts.iter().sum();

    let (chunks, chunk_search) = if matches == 0 {
        (0, ChunkSearch::Exact)
    } else {
        let greedy = greedy_chunks(&cand, &refr, &pair_flows);
        if matches <= 64 {
            match exact_chunks(
                &cand,
                &refr,
                &pair_flows,
                greedy,
                params.chunk_search_budget,
            ) {
                Some(ch) => (ch, ChunkSearch::Exact),
                None => (greedy, ChunkSearch::Greedy),
            }
        } else {
            (greedy, ChunkSearch::Greedy)
        }
    };

    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(matches, cand.len());
    let recall = ratio(matches, refr.len());
    let (f_mean, penalty) = if matches > 0 {
        let f = precision * recall / (params.alpha * precision + (1.0 - params.alpha) * recall);
        let pen = params.gamma * (chunks as f64 / matches as f64).powf(params.beta);
        (f, pen)
    } else {
        (0.0, 0.0)
    };
    MeteorBreakdown {
        matches,
        exact_matches: stage_counts[0],
        stem_matches: stage_counts[1],
        synonym_matches: stage_counts[2],
        candidate_len: cand.len(),
        reference_len: refr.len(),
        precision,
        recall,
        f_mean,
        chunks,
        penalty,
        score: (f_mean * (1.0 - penalty)).clamp(0.0, 1.0),
        chunk_search,
    }
}

/// Type-level matching per stage: (candidate type, reference type, stage) ->
/// number of token pairs. Each stage only sees tokens left unmatched by the
/// earlier ones and takes a maximum matching among them.
fn stage_flows(
    cand: &[usize],
    refr: &[usize],
    words: &[&str],
    params: &MeteorParams,
    lexicon: Option<&SynonymLexicon>,
) -> BTreeMap<(usize, usize, MatchStage), usize> {
    let mut rem_c: BTreeMap<usize, usize> = BTreeMap::new();
    let mut rem_r: BTreeMap<usize, usize> = BTreeMap::new();
    cand.iter().for_each(|&t| *rem_c.entry(t).or_default() += 1);
    refr.iter().for_each(|&t| *rem_r.entry(t).or_default() += 1);
    let mut flows = BTreeMap::new();
    let add = |flows: &mut BTreeMap<_, usize>,
               c,
               r,
               stage,
               n,
               rem_c: &mut BTreeMap<usize, usize>,
               rem_r: &mut BTreeMap<usize, usize>| {
        if n > 0 {
            *flows.entry((c, r, stage)).or_default() += n;
            *rem_c.get_mut(&c).unwrap() -= n;
            *rem_r.get_mut(&r).unwrap() -= n;
        }
    };

    for &stage in &params.stages {
        match stage {
            MatchStage::Exact => {
                let types: Vec<usize> = rem_c.keys().copied().collect();
                for t in types {
                    let n = rem_c[&t].min(rem_r.get(&t).copied().unwrap_or(0));
                    add(&mut flows, t, t, stage, n, &mut rem_c, &mut rem_r);
                }
            }
            MatchStage::Stem => {
                let stems: HashMap<usize, String> = rem_c
                    .keys()
                    .chain(rem_r.keys())
                    .map(|&t| (t, stem(words[t])))
                    .collect();
                let ctypes: Vec<usize> = sorted_by_word(rem_c.keys().copied(), words);
                let rtypes: Vec<usize> = sorted_by_word(rem_r.keys().copied(), words);
                for &c in &ctypes {
                    for &r in &rtypes {
                        if c != r && stems[&c] == stems[&r] {
                            let n = rem_c[&c].min(rem_r[&r]);
                            add(&mut flows, c, r, stage, n, &mut rem_c, &mut rem_r);
                        }
                    }
                }
            }
            MatchStage::Synonym => {
                let Some(lex) = lexicon else { continue };
                let ctoks: Vec<usize> = sorted_by_word(rem_c.keys().copied(), words)
                    .into_iter()
                    .flat_map(|t| std::iter::repeat_n(t, rem_c[&t]))
                    .collect();
                let rtoks: Vec<usize> = sorted_by_word(rem_r.keys().copied(), words)
                    .into_iter()
                    .flat_map(|t| std::iter::repeat_n(t, rem_r[&t]))
                    .collect();
                let mut related: HashMap<(usize, usize), bool> = HashMap::new();
                let adj: Vec<Vec<usize>> = ctoks
                    .iter()
                    .map(|&c| {
                        (0..rtoks.len())
                            .filter(|&j| {
                                let r = rtoks[j];
                                *related
                                    .entry((c, r))
                                    .or_insert_with(|| c != r && lex.related(words[c], words[r]))
                            })
                            .collect()
                    })
                    .collect();
                let owner = max_bipartite(&adj, rtoks.len());
                for (j, o) in owner.iter().enumerate() {
                    if let Some(i) = *o {
                        add(
                            &mut flows, ctoks[i], rtoks[j], stage, 1, &mut rem_c, &mut rem_r,
                        );
                    }
                }
            }
        }
    }
    flows
}

fn sorted_by_word(types: impl Iterator<Item = usize>, words: &[&str]) -> Vec<usize> {
    let mut v: Vec<usize> = types.collect();
    v.sort_by_key(|&t| words[t]);
    v
}

/// Kuhn's augmenting-path matching; returns the left owner of each right node.
fn max_bipartite(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    for u in 0..adj.len() {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut seen, &mut owner);
    }
    owner
}

/// Greedy string tiling: repeatedly fix the longest run of adjacent
/// matchable pairs (earliest candidate, then reference position on ties).
fn greedy_chunks(cand: &[usize], refr: &[usize], flows: &HashMap<(usize, usize), usize>) -> usize {
    let mut flows = flows.clone();
    let mut positions: HashMap<usize, Vec<usize>> = HashMap::new();
    for (j, &t) in refr.iter().enumerate() {
        positions.entry(t).or_default().push(j);
    }
    let mut partners: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(c, r) in flows.keys() {
        partners.entry(c).or_default().push(r);
    }
    let compatible = |i: usize, j: usize| flows.contains_key(&(cand[i], refr[j]));

    let mut heap = BinaryHeap::new();
    for (i, &c) in cand.iter().enumerate() {
        for r in partners.get(&c).into_iter().flatten() {
            for &j in &positions[r] {
                if i > 0 && j > 0 && compatible(i - 1, j - 1) {
                    continue;
                }
                let mut len = 1;
                while i + len < cand.len() && j + len < refr.len() && compatible(i + len, j + len) {
                    len += 1;
                }
                heap.push((len, Reverse(i), Reverse(j)));
            }
        }
    }

    let mut used_c = vec![false; cand.len()];
    let mut used_r = vec![false; refr.len()];
    let mut chunks = 0;
    while let Some((len, Reverse(i), Reverse(j))) = heap.pop() {
        let ok = |k: usize, flows: &HashMap<(usize, usize), usize>| {
            !used_c[i + k] && !used_r[j + k] && flows[&(cand[i + k], refr[j + k])] > 0
        };
        let mut pieces = Vec::new();
        let mut start = None;
        for k in 0..len {
            match (ok(k, &flows), start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    pieces.push((s, k - s));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            pieces.push((s, len - s));
        }
        if pieces != [(0, len)] {
            for (s, l) in pieces {
                heap.push((l, Reverse(i + s), Reverse(j + s)));
            }
            continue;
        }
        let mut k = 0;
        while k < len {
            let f = flows.get_mut(&(cand[i + k], refr[j + k])).unwrap();
            if *f == 0 {
                break;
            }
            *f -= 1;
            used_c[i + k] = true;
            used_r[j + k] = true;
            k += 1;
        }
        chunks += 1;
        if k < len {
            heap.push((len - k, Reverse(i + k), Reverse(j + k)));
        }
    }
    chunks
}

/// Branch and bound over which tokens realize the flows, looking for fewer
/// than `bound` chunks. `None` when the node budget runs out.
fn exact_chunks(
    cand: &[usize],
    refr: &[usize],
    flows: &HashMap<(usize, usize), usize>,
    bound: usize,
    budget: usize,
) -> Option<usize> {
    let mut out_flow: HashMap<usize, usize> = HashMap::new();
    for (&(c, _), &n) in flows {
        *out_flow.entry(c).or_default() += n;
    }
    let mut skips: HashMap<usize, usize> = HashMap::new();
    for &c in cand {
        *skips.entry(c).or_default() += 1;
    }
    for (c, s) in skips.iter_mut() {
        *s -= out_flow.get(c).copied().unwrap_or(0);
    }
    let mut positions: HashMap<usize, Vec<usize>> = HashMap::new();
    for (j, &t) in refr.iter().enumerate() {
        positions.entry(t).or_default().push(j);
    }
    let mut options: Vec<Vec<usize>> = vec![Vec::new(); cand.len()];
    for (i, &c) in cand.iter().enumerate() {
        for &(fc, r) in flows.keys() {
            if fc == c {
                options[i].extend(&positions[&r]);
            }
        }
        options[i].sort_unstable();
    }

    struct Search<'a> {
        cand: &'a [usize],
        refr: &'a [usize],
        options: Vec<Vec<usize>>,
        flows: HashMap<(usize, usize), usize>,
        skips: HashMap<usize, usize>,
        used: Vec<bool>,
        best: usize,
        nodes: usize,
        budget: usize,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, prev: Option<usize>, chunks: usize) -> bool {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            if chunks >= self.best {
                return true;
            }
            if i == self.cand.len() {
                self.best = chunks;
                return true;
            }
            let c = self.cand[i];
            let next = prev.map(|p| p + 1).filter(|&j| j < self.refr.len());
            if let Some(j) = next {
                if !self.go_align(i, j, chunks) {
                    return false;
                }
            }
            for k in 0..self.options[i].len() {
                let j = self.options[i][k];
                if Some(j) != next && !self.go_align(i, j, chunks + 1) {
                    return false;
                }
            }
            if self.skips[&c] > 0 {
                *self.skips.get_mut(&c).unwrap() -= 1;
                let ok = self.go(i + 1, None, chunks);
                *self.skips.get_mut(&c).unwrap() += 1;
                return ok;
            }
            true
        }

        fn go_align(&mut self, i: usize, j: usize, chunks: usize) -> bool {
            let key = (self.cand[i], self.refr[j]);
            if self.used[j] || self.flows.get(&key).is_none_or(|&f| f == 0) {
                return true;
            }
            self.used[j] = true;
            *self.flows.get_mut(&key).unwrap() -= 1;
            let ok = self.go(i + 1, Some(j), chunks);
            *self.flows.get_mut(&key).unwrap() += 1;
            self.used[j] = false;
            ok
        }
    }

    let mut search = Search {
        cand,
        refr,
        options,
        flows: flows.clone(),
        skips,
        used: vec![false; refr.len()],
        best: bound,
        nodes: 0,
        budget,
    };
    search.go(0, None, 0).then_some(search.best)
}
