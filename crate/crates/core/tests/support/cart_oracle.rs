//! Reference CART built by brute force: every (feature, threshold) pair is
//! scored by weighted Gini impurity held as an exact fraction.

#![allow(dead_code)]

use std::cmp::Ordering;

#[derive(Clone, Copy, Debug)]
pub struct Frac {
    num: i128,
    den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Frac {
    pub fn new(num: i128, den: i128) -> Frac {
        let g = gcd(num, den).max(1);
        Frac {
            num: num / g,
            den: den / g,
        }
    }
    fn add(self, o: Frac) -> Frac {
        Frac::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }
    fn sub(self, o: Frac) -> Frac {
        Frac::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.num * o.num, self.den * o.den)
    }
    fn cmp(self, o: Frac) -> Ordering {
        (self.num * o.den).cmp(&(o.num * self.den))
    }
}

fn gini(counts: &[i128]) -> Frac {
    let n: i128 = counts.iter().sum();
    let mut g = Frac::new(1, 1);
    for &c in counts {
        g = g.sub(Frac::new(c * c, n * n));
    }
    g
}

pub enum OracleNode {
    Leaf(Vec<u32>),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<OracleNode>,
        right: Box<OracleNode>,
    },
}

impl OracleNode {
    pub fn counts(&self, x: &[f64]) -> &[u32] {
        match self {
            OracleNode::Leaf(c) => c,
            OracleNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.counts(x)
                } else {
                    right.counts(x)
                }
            }
        }
    }

    /// Normalized leaf distribution, computed the way a one-tree forest does.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let c = self.counts(x);
        let total: u32 = c.iter().sum();
        c.iter().map(|&v| v as f64 / total as f64).collect()
    }
}

/// `labels` are class indices into `0..n_classes`.
pub fn build(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    max_depth: Option<usize>,
) -> OracleNode {
    let idx: Vec<usize> = (0..rows.len()).collect();
    grow(rows, labels, n_classes, &idx, 0, max_depth)
}

fn grow(
    rows: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    idx: &[usize],
    depth: usize,
    max_depth: Option<usize>,
) -> OracleNode {
    let mut counts = vec![0i128; n_classes];
    for &i in idx {
        counts[labels[i]] += 1;
    }
    let leaf = OracleNode::Leaf(counts.iter().map(|&c| c as u32).collect());
    let classes_present = counts.iter().filter(|&&c| c > 0).count();
    if classes_present <= 1 || max_depth.is_some_and(|d| depth >= d) {
        return leaf;
    }
    let n = idx.len() as i128;
    let parent = gini(&counts);

    let mut best: Option<(Frac, usize, f64)> = None;
    for f in 0..rows[0].len() {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let mut t = w[0] + (w[1] - w[0]) / 2.0;
            if t >= w[1] {
                t = w[0];
            }
            let mut lc = vec![0i128; n_classes];
            let mut rc = vec![0i128; n_classes];
            for &i in idx {
                if rows[i][f] <= t {
                    lc[labels[i]] += 1;
                } else {
                    rc[labels[i]] += 1;
                }
            }
            let (nl, nr): (i128, i128) = (lc.iter().sum(), rc.iter().sum());
            let child = Frac::new(nl, n)
                .mul(gini(&lc))
                .add(Frac::new(nr, n).mul(gini(&rc)));
            let gain = parent.sub(child);
            if gain.cmp(Frac::new(0, 1)) != Ordering::Greater {
                continue;
            }
            let better = match best {
                None => true,
                Some((g, bf, bt)) => match gain.cmp(g) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => (f, t) < (bf, bt),
                },
            };
            if better {
                best = Some((gain, f, t));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) =
        idx.iter().partition(|&&i| rows[i][feature] <= threshold);
    OracleNode::Split {
        feature,
        threshold,
        left: Box::new(grow(rows, labels, n_classes, &l, depth + 1, max_depth)),
        right: Box::new(grow(rows, labels, n_classes, &r, depth + 1, max_depth)),
    }
}
