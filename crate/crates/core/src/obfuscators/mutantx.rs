//! Genetic search over word replacements, guided by an internal attributor
//! and METEOR similarity to the original.

use std::collections::HashMap;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{choose_synonym, replace_words, replaceable, ObfuscationResult};
use crate::corpus::{Document, ObfuscatorId};
use crate::error::{Error, Result};
use crate::features::{extract_text, REGISTRY_VERSION};
use crate::forest::ForestModel;
use crate::metrics::{meteor_tokens, Meteor};
use crate::rng::{stream, StreamRng};
use crate::textproc::{tokenize, SynonymLexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Crossover {
    SentenceSinglePoint,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutantXParams {
    pub population_size: usize,
    pub max_generations: usize,
    /// Fraction of replaceable words changed by one mutation.
    pub mutation_rate: f64,
    pub crossover: Crossover,
    pub elitism: usize,
    /// Weight on evasion, 1 - p(true author).
    pub alpha: f64,
    /// Weight on METEOR against the original.
    pub beta: f64,
    /// Search stops once an individual is misattributed with at least this
    /// METEOR.
    pub meteor_floor: f64,
    /// Search also requires the true author's probability to be at most
    /// this; 1 accepts any misclassification.
    pub success_p_true: f64,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for MutantXParams {
    fn default() -> Self {
        MutantXParams {
            population_size: 5,
            max_generations: 25,
            mutation_rate: 0.05,
            crossover: Crossover::SentenceSinglePoint,
            elitism: 1,
            alpha: 1.0,
            beta: 1.0,
            meteor_floor: 0.3,
            success_p_true: 1.0,
            tournament_size: 2,
            seed: 0,
        }
    }
}

impl MutantXParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::config(format!("mutantx: {m}")));
        if self.population_size == 0 || self.max_generations == 0 {
            return fail("population_size and max_generations must be positive");
        }
        if self.crossover != Crossover::Off && self.population_size < 2 {
            return fail("crossover needs population_size >= 2");
        }
        if self.elitism >= self.population_size {
            return fail("elitism must be below population_size");
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.mutation_rate) || !unit(self.meteor_floor) || !unit(self.success_p_true) {
            return fail("mutation_rate, meteor_floor and success_p_true must lie in [0, 1]");
        }
        if self.alpha < 0.0 || self.beta < 0.0 || self.alpha + self.beta == 0.0 {
            return fail("alpha and beta must be nonnegative and not both zero");
        }
        if self.tournament_size == 0 {
            return fail("tournament_size must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub text: String,
    pub fitness: f64,
    pub p_true: f64,
    pub meteor: f64,
    pub evaded: bool,
}

/// Best fitness of each evaluated generation.
pub type GaTrace = Vec<f64>;

/// Replace ceil(rate * replaceable) distinct replaceable words, each with a
/// uniformly chosen same-POS synonym.
pub fn mutate(text: &str, lexicon: &SynonymLexicon, rate: f64, rng: &mut StreamRng) -> String {
    let tt = tokenize(text);
    let candidates = replaceable(&tt, lexicon);
    let n = ((rate * candidates.len() as f64).ceil() as usize).min(candidates.len());
    if n == 0 {
        return text.to_string();
    }
    let mut picks = index::sample(rng, candidates.len(), n).into_vec();
    picks.sort_unstable();
    let replacements: Vec<(usize, String)> = picks
        .into_iter()
        .map(|k| {
            let (i, syns) = &candidates[k];
            (*i, choose_synonym(&tt.tokens[*i].surface, syns, rng))
        })
        .collect();
    replace_words(text, &replacements)
}

/// Single-point crossover at a sentence boundary: the leading sentences of
/// `a` followed by the remaining sentences of `b`.
pub fn crossover(a: &str, b: &str, rng: &mut StreamRng) -> String {
    let (ta, tb) = (tokenize(a), tokenize(b));
    let (na, nb) = (ta.sentences.len(), tb.sentences.len());
    if na < 2 || nb < 2 {
        return a.to_string();
    }
    let k = rng.gen_range(1..na.min(nb));
    let head_end = ta.tokens[ta.sentences[k - 1].1 - 1].end;
    let tail_start = tb.tokens[tb.sentences[k].0].start;
    let gap = &ta.tokens[ta.sentences[k].0].leading_ws;
    format!("{}{}{}", &a[..head_end], gap, &b[tail_start..])
}

struct Search<'a> {
    internal: &'a ForestModel,
    true_index: usize,
    meteor: &'a Meteor,
    reference: Vec<String>,
    params: &'a MutantXParams,
    doc_id: &'a str,
}

impl Search<'_> {
    fn evaluate(&self, text: &str) -> Result<Individual> {
        let features = extract_text(self.doc_id, text);
        let prediction = self.internal.predict(&features)?;
        let p_true = prediction.probabilities[self.true_index];
        let meteor = self
            .meteor
            .score_tokens(&meteor_tokens(text), &self.reference)
            .score;
        Ok(Individual {
            text: text.to_string(),
            fitness: self.params.alpha * (1.0 - p_true) + self.params.beta * meteor,
            p_true,
            meteor,
            evaded: prediction.label != self.internal.classes[self.true_index],
        })
    }

    /// Misattributed while still similar enough to the original.
    fn success(&self, ind: &Individual) -> bool {
        ind.evaded
            && ind.meteor >= self.params.meteor_floor
            && ind.p_true <= self.params.success_p_true
    }

    /// Tournament selection; ties go to the earlier (fitter-sorted) entry.
    fn select<'p>(&self, population: &'p [Individual], rng: &mut StreamRng) -> &'p Individual {
        let mut best = rng.gen_range(0..population.len());
        for _ in 1..self.params.tournament_size {
            let other = rng.gen_range(0..population.len());
            if population[other].fitness > population[best].fitness
                || (population[other].fitness == population[best].fitness && other < best)
            {
                best = other;
            }
        }
        &population[best]
    }
}

pub fn obfuscate_mutantx(
    doc: &Document,
    internal: &ForestModel,
    true_author: &str,
    lexicon: &SynonymLexicon,
    meteor: &Meteor,
    params: &MutantXParams,
) -> Result<ObfuscationResult> {
    params.validate()?;
    if internal.registry_version != REGISTRY_VERSION {
        return Err(Error::RegistryMismatch {
            expected: REGISTRY_VERSION.to_string(),
            found: internal.registry_version.clone(),
        });
    }
    let true_index = internal
        .classes
        .iter()
        .position(|c| c == true_author)
        .ok_or_else(|| {
            Error::data(format!(
                "internal model does not know author {true_author:?}"
            ))
        })?;
    let search = Search {
        internal,
        true_index,
        meteor,
        reference: meteor_tokens(&doc.text),
        params,
        doc_id: &doc.doc_id,
    };
    let mut rng = stream(params.seed, &["mutantx", &doc.doc_id]);
    let mut cache: HashMap<String, Individual> = HashMap::new();
    // Every evaluated individual, in evaluation order.
    let mut archive: Vec<Individual> = Vec::new();
    let mut trace = Vec::new();

    let original = search.evaluate(&doc.text)?;
    cache.insert(original.text.clone(), original.clone());
    let mut texts = Vec::with_capacity(params.population_size);
    while texts.len() < params.population_size {
        texts.push(mutate(&doc.text, lexicon, params.mutation_rate, &mut rng));
    }
    let mut generations = 0;
    loop {
        let fresh: Vec<&String> = {
            let mut seen = std::collections::HashSet::new();
            texts
                .iter()
                .filter(|t| !cache.contains_key(*t) && seen.insert(*t))
                .collect()
        };
        let evaluated: Vec<Individual> = fresh
            .par_iter()
            .map(|t| search.evaluate(t))
            .collect::<Result<_>>()?;
        for ind in evaluated {
            archive.push(ind.clone());
            cache.insert(ind.text.clone(), ind);
        }
        let mut population: Vec<Individual> = texts.iter().map(|t| cache[t].clone()).collect();
        population.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
        generations += 1;
        trace.push(population[0].fitness);

        if search.success(&population[0]) || generations == params.max_generations {
            break;
        }
        let mut next: Vec<String> = population[..params.elitism]
            .iter()
            .map(|i| i.text.clone())
            .collect();
        while next.len() < params.population_size {
            let first = search.select(&population, &mut rng).text.clone();
            let child = match params.crossover {
                Crossover::SentenceSinglePoint => {
                    let second = search.select(&population, &mut rng);
                    crossover(&first, &second.text, &mut rng)
                }
                Crossover::Off => first,
            };
            next.push(mutate(&child, lexicon, params.mutation_rate, &mut rng));
        }
        texts = next;
    }

    // Fittest of the original and every candidate that evades or keeps
    // the METEOR floor; earlier wins ties.
    let mut best = &original;
    for ind in archive
        .iter()
        .filter(|i| i.evaded || i.meteor >= params.meteor_floor)
    {
        if ind.fitness > best.fitness {
            best = ind;
        }
    }
    Ok(ObfuscationResult {
        original_doc_id: doc.doc_id.clone(),
        obfuscator_id: ObfuscatorId::MutantX,
        text: best.text.clone(),
        meteor: best.meteor,
        evaded: Some(best.evaded),
        generations_used: Some(generations),
        fitness_trace: trace,
    })
}
