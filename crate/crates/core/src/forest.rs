//! Random-forest classifier (CART trees, Gini splits, bagging).
//!
//! Split quality is compared exactly in integer arithmetic, so the chosen
//! split never depends on floating-point summation order. Each tree draws
//! from its own RNG stream keyed by (seed, tree index), so parallel and
//! serial training build the same forest.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::write_atomic;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::rng::{sha256_hex, stream, StreamRng};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeaturesPerSplit {
    Sqrt,
    Log2,
    All,
    Fixed(usize),
}

impl FeaturesPerSplit {
    pub fn count(self, n_features: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Sqrt => (n_features as f64).sqrt().floor() as usize,
            FeaturesPerSplit::Log2 => (n_features as f64).log2().floor() as usize,
            FeaturesPerSplit::All => n_features,
            FeaturesPerSplit::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

impl FromStr for FeaturesPerSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(Self::Sqrt),
            "log2" => Ok(Self::Log2),
            "all" => Ok(Self::All),
            other => other
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .map(Self::Fixed)
                .ok_or_else(|| Error::config(format!("bad features_per_split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::config("n_trees must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::config("min_samples_leaf must be at least 1"));
        }
        if self.features_per_split == FeaturesPerSplit::Fixed(0) {
            return Err(Error::config("features_per_split must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    /// Aligned with the model's class list.
    pub probabilities: Vec<f64>,
}

impl Prediction {
    pub fn probability_of(&self, classes: &[String], label: &str) -> f64 {
        classes
            .iter()
            .position(|c| c == label)
            .map_or(0.0, |i| self.probabilities[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub params: ForestParams,
    pub classes: Vec<String>,
    pub registry_version: String,
    pub n_features: usize,
    pub trees: Vec<Tree>,
    pub importances: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(flatten)]
    model: ForestModel,
    digest: String,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

impl ForestModel {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// SHA-256 of the canonical JSON form (which excludes the digest itself).
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_vec(self).expect("model serializes"))
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<Prediction> {
        if v.registry_version != self.registry_version {
            return Err(Error::RegistryMismatch {
                expected: self.registry_version.clone(),
                found: v.registry_version.clone(),
            });
        }
        self.predict_values(&v.values)
    }

    pub fn predict_values(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.n_features {
            return Err(Error::data(format!(
                "vector has {} features, model expects {}",
                x.len(),
                self.n_features
            )));
        }
        let mut probabilities = vec![0.0; self.classes.len()];
        for tree in &self.trees {
            let counts = tree.leaf_counts(x);
            let total: u32 = counts.iter().sum();
            for (p, &c) in probabilities.iter_mut().zip(counts) {
                *p += c as f64 / total as f64;
            }
        }
        let n = self.trees.len() as f64;
        probabilities.iter_mut().for_each(|p| *p /= n);
        let best = argmax(&probabilities);
        Ok(Prediction {
            label: self.classes[best].clone(),
            probabilities,
        })
    }

    pub fn predict_batch(&self, vs: &[FeatureVector]) -> Result<Vec<Prediction>> {
        vs.par_iter().map(|v| self.predict(v)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            model: self.clone(),
            digest: self.digest(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                found: probe.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        let computed = file.model.digest();
        if computed != file.digest {
            return Err(Error::Digest {
                stored: file.digest,
                computed,
            });
        }
        file.model.check()?;
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::data(format!("malformed model: {m}")));
        if self.trees.is_empty() || self.classes.is_empty() {
            return bad("no trees or classes");
        }
        if self.importances.len() != self.n_features {
            return bad("importance length");
        }
        for tree in &self.trees {
            for (i, node) in tree.nodes.iter().enumerate() {
                match node {
                    Node::Split {
                        feature,
                        left,
                        right,
                        ..
                    } => {
                        if *feature >= self.n_features
                            || *left <= i
                            || *right <= i
                            || *left >= tree.nodes.len()
                            || *right >= tree.nodes.len()
                        {
                            return bad("split node");
                        }
                    }
                    Node::Leaf { counts } => {
                        if counts.len() != self.classes.len() || counts.iter().all(|&c| c == 0) {
                            return bad("leaf histogram");
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ForestModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "forest({} trees, {} classes, {} features)",
            self.trees.len(),
            self.classes.len(),
            self.n_features
        )
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn train(x: &[FeatureVector], y: &[String], params: &ForestParams) -> Result<ForestModel> {
    let version = match x.first() {
        Some(v) => v.registry_version.clone(),
        None => return Err(Error::data("cannot train on an empty set")),
    };
    if let Some(v) = x.iter().find(|v| v.registry_version != version) {
        return Err(Error::RegistryMismatch {
            expected: version,
            found: v.registry_version.clone(),
        });
    }
    let rows: Vec<&[f64]> = x.iter().map(|v| v.values.as_slice()).collect();
    train_rows(&rows, y, &version, params)
}

/// Train on raw rows. Classes are the sorted distinct labels.
pub fn train_rows(
    rows: &[&[f64]],
    y: &[String],
    registry_version: &str,
    params: &ForestParams,
) -> Result<ForestModel> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::data("cannot train on an empty set"));
    }
    if rows.len() != y.len() {
        return Err(Error::data(format!(
            "{} vectors but {} labels",
            rows.len(),
            y.len()
        )));
    }
    let n_features = rows[0].len();
    if rows.iter().any(|r| r.len() != n_features) {
        return Err(Error::data("vectors differ in length"));
    }
    if rows.iter().flat_map(|r| r.iter()).any(|v| !v.is_finite()) {
        return Err(Error::data("non-finite feature value"));
    }
    let mut classes: Vec<String> = y.to_vec();
    classes.sort();
    classes.dedup();
    let labels: Vec<usize> = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();

    let data = Data {
        rows,
        labels: &labels,
        n_classes: classes.len(),
        n_features,
    };
    let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(params.seed, &["forest", "tree", &t.to_string()]);
            grow_tree(&data, params, &mut rng)
        })
        .collect();

    let mut importances = vec![0.0; n_features];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&imp) {
                *acc += v / total;
            }
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }

    Ok(ForestModel {
        schema_version: SCHEMA_VERSION,
        kind: None,
        params: params.clone(),
        classes,
        registry_version: registry_version.to_string(),
        n_features,
        trees,
        importances,
    })
}

struct Data<'a> {
    rows: &'a [&'a [f64]],
    labels: &'a [usize],
    n_classes: usize,
    n_features: usize,
}

/// A candidate split score `num / den` equal to the sum over both children
/// of (sum of squared class weights) / (child weight). Higher is purer.
#[derive(Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn cmp(self, other: Score) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    score: Score,
    split_at: usize,
    order: Vec<usize>,
}

fn grow_tree(data: &Data, params: &ForestParams, rng: &mut StreamRng) -> (Tree, Vec<f64>) {
    let n = data.rows.len();
    let mut weights = vec![0u64; n];
    if params.bootstrap {
        for _ in 0..n {
            weights[rng.gen_range(0..n)] += 1;
        }
    } else {
        weights.iter_mut().for_each(|w| *w = 1);
    }
    let samples: Vec<usize> = (0..n).filter(|&i| weights[i] > 0).collect();
    let k = params.features_per_split.count(data.n_features);
    let mut builder = Builder {
        data,
        params,
        weights: &weights,
        k,
        nodes: Vec::new(),
        importances: vec![0.0; data.n_features],
        root_weight: samples.iter().map(|&i| weights[i]).sum::<u64>() as f64,
    };
    builder.build(samples, 0, rng);
    (
        Tree {
            nodes: builder.nodes,
        },
        builder.importances,
    )
}

struct Builder<'a> {
    data: &'a Data<'a>,
    params: &'a ForestParams,
    weights: &'a [u64],
    k: usize,
    nodes: Vec<Node>,
    importances: Vec<f64>,
    root_weight: f64,
}

impl Builder<'_> {
    fn histogram(&self, samples: &[usize]) -> Vec<u64> {
        let mut h = vec![0u64; self.data.n_classes];
        for &i in samples {
            h[self.data.labels[i]] += self.weights[i];
        }
        h
    }

    fn build(&mut self, samples: Vec<usize>, depth: usize, rng: &mut StreamRng) -> usize {
        let at = self.nodes.len();
        let hist = self.histogram(&samples);
        self.nodes.push(Node::Leaf {
            counts: hist.iter().map(|&c| c as u32).collect(),
        });
        let total: u64 = hist.iter().sum();
        let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || total < 2 * self.params.min_samples_leaf as u64 {
            return at;
        }
        let Some(best) = self.best_split(&samples, &hist, rng) else {
            return at;
        };

        let sq = |h: &[u64]| h.iter().map(|&c| (c * c) as f64).sum::<f64>();
        let parent_imp = 1.0 - sq(&hist) / (total * total) as f64;
        let child_imp = 1.0 - (best.score.num as f64 / best.score.den as f64) / total as f64;
        self.importances[best.feature] +=
            total as f64 / self.root_weight * (parent_imp - child_imp).max(0.0);

        let (left, right) = best.order.split_at(best.split_at);
        let (left, right) = (left.to_vec(), right.to_vec());
        let l = self.build(left, depth + 1, rng);
        let r = self.build(right, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        at
    }

    fn best_split(&self, samples: &[usize], hist: &[u64], rng: &mut StreamRng) -> Option<Best> {
        let total: u64 = hist.iter().sum();
        let parent = Score {
            num: hist.iter().map(|&c| (c as u128) * (c as u128)).sum(),
            den: total as u128,
        };
        let min_leaf = self.params.min_samples_leaf as u64;
        let mut features: Vec<usize> = (0..self.data.n_features).collect();
        features.shuffle(rng);

        let mut best: Option<Best> = None;
        let mut visited = 0;
        let mut order = samples.to_vec();
        for &f in &features {
            if visited == self.k {
                break;
            }
            let value = |i: usize| self.data.rows[i][f];
            order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
            if value(order[0]) == value(order[order.len() - 1]) {
                continue;
            }
            visited += 1;

            let mut left = vec![0u64; self.data.n_classes];
            let mut left_w = 0u64;
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                left[self.data.labels[i]] += self.weights[i];
                left_w += self.weights[i];
                let (lo, hi) = (value(i), value(order[pos + 1]));
                if lo == hi || left_w < min_leaf || total - left_w < min_leaf {
                    continue;
                }
                let right_w = total - left_w;
                let sum_sq = |side: &mut dyn Iterator<Item = u64>| {
                    side.map(|c| (c as u128) * (c as u128)).sum::<u128>()
                };
                let a = sum_sq(&mut left.iter().copied());
                let b = sum_sq(&mut left.iter().zip(hist).map(|(&l, &h)| h - l));
                let score = Score {
                    num: a * right_w as u128 + b * left_w as u128,
                    den: left_w as u128 * right_w as u128,
                };
                if score.cmp(parent) != Ordering::Greater {
                    continue;
                }
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                let better = match &best {
                    None => true,
                    Some(b) => match score.cmp(b.score) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => (f, threshold) < (b.feature, b.threshold),
                    },
                };
                if better {
                    best = Some(Best {
                        feature: f,
                        threshold,
                        score,
                        split_at: pos + 1,
                        order: order.clone(),
                    });
                }
            }
        }
        best
    }
}
