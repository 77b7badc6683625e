//! Post-hoc analyses: importance-ranked features, PCA projections and
//! METEOR distributions.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_COUNT};
use crate::forest::ForestModel;
use crate::SCHEMA_VERSION;

const JACOBI_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Indices of the `k` most important features, ties broken by lower index.
pub fn top_k_features(model: &ForestModel, k: usize) -> Result<Vec<usize>> {
    if model.trees.is_empty() || model.importances.len() != model.n_features {
        return Err(Error::data("model is untrained"));
    }
    if k > model.n_features.min(FEATURE_COUNT) {
        return Err(Error::config(format!(
            "k = {k} exceeds the {} available features",
            model.n_features
        )));
    }
    let mut order: Vec<usize> = (0..model.n_features).collect();
    order.sort_by(|&a, &b| {
        model.importances[b]
            .total_cmp(&model.importances[a])
            .then(a.cmp(&b))
    });
    order.truncate(k);
    Ok(order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub doc_id: String,
    pub coords: Vec<f64>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub coordinates: Vec<ProjectedPoint>,
    /// Variance along each kept component, nonincreasing.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub total_variance: f64,
    /// Unit principal axes over the selected features, one row per component.
    pub components: Vec<Vec<f64>>,
    pub selected_features: Vec<usize>,
}

impl PcaProjection {
    /// `doc_id,x,y,z,correct`; missing axes are written as zero.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id,x,y,z,correct\n");
        for p in &self.coordinates {
            let axis = |i: usize| p.coords.get(i).copied().unwrap_or(0.0);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.doc_id,
                axis(0),
                axis(1),
                axis(2),
                p.correct
            ));
        }
        out
    }

    pub fn variance_json(&self, config_digest: &str) -> serde_json::Value {
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "config_digest": config_digest,
            "explained_variance": self.explained_variance,
            "explained_variance_ratio": self.explained_variance_ratio,
            "total_variance": self.total_variance,
            "selected_features": self.selected_features,
        })
    }
}

/// Eigenvalues and column eigenvectors of a symmetric matrix by cyclic
/// Jacobi rotations, sorted by decreasing eigenvalue.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Project the selected feature columns onto their leading principal axes
/// of the covariance matrix. Each axis is signed so its largest-magnitude
/// loading is positive.
pub fn pca_project(
    vectors: &[FeatureVector],
    selected: &[usize],
    dims: usize,
    correct: &[bool],
) -> Result<PcaProjection> {
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.values.as_slice()).collect();
    let ids: Vec<&str> = vectors.iter().map(|v| v.doc_id.as_str()).collect();
    pca_rows(&rows, &ids, selected, dims, correct)
}

pub fn pca_rows(
    rows: &[&[f64]],
    ids: &[&str],
    selected: &[usize],
    dims: usize,
    correct: &[bool],
) -> Result<PcaProjection> {
    let m = selected.len();
    if dims == 0 || dims > m {
        return Err(Error::config(format!(
            "cannot keep {dims} components of {m} selected features"
        )));
    }
    if rows.len() < dims + 1 {
        return Err(Error::data(format!(
            "{} vectors are too few for {dims} components",
            rows.len()
        )));
    }
    if correct.len() != rows.len() || ids.len() != rows.len() {
        return Err(Error::data("one correctness flag and id per vector required"));
    }
    if let Some(&bad) = selected.iter().find(|&&i| rows.iter().any(|r| i >= r.len())) {
        return Err(Error::data(format!("feature index {bad} out of range")));
    }
    let n = rows.len() as f64;
    let means: Vec<f64> = selected
        .iter()
        .map(|&j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| selected.iter().zip(&means).map(|(&j, mu)| r[j] - mu).collect())
        .collect();
    let mut cov = vec![vec![0.0; m]; m];
    for row in &centered {
        for a in 0..m {
            for b in a..m {
                cov[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in a..m {
            cov[a][b] /= n - 1.0;
            cov[b][a] = cov[a][b];
        }
    }
    let total_variance: f64 = (0..m).map(|i| cov[i][i]).sum();
    let (values, mut axes) = symmetric_eigen(&cov);
    let floor = 1e-10 * total_variance.max(f64::MIN_POSITIVE);
    let rank = values.iter().filter(|&&l| l > floor).count();
    let keep = if rank < dims {
        warn!("input has rank {rank} < {dims}; keeping {rank} components");
        rank
    } else {
        dims
    };
    axes.truncate(keep);
    for axis in axes.iter_mut() {
        let lead = axis
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.abs().total_cmp(&b.abs()).then(j.cmp(i)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if axis[lead] < 0.0 {
            axis.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let explained_variance: Vec<f64> = values[..keep].iter().map(|l| l.max(0.0)).collect();
    let explained_variance_ratio = explained_variance
        .iter()
        .map(|l| {
            if total_variance > 0.0 {
                l / total_variance
            } else {
                0.0
            }
        })
        .collect();
    let coordinates = centered
        .iter()
        .zip(ids)
        .zip(correct)
        .map(|((row, id), &ok)| ProjectedPoint {
            doc_id: id.to_string(),
            coords: axes
                .iter()
                .map(|axis| axis.iter().zip(row).map(|(a, x)| a * x).sum())
                .collect(),
            correct: ok,
        })
        .collect();
    Ok(PcaProjection {
        coordinates,
        explained_variance,
        explained_variance_ratio,
        total_variance,
        components: axes,
        selected_features: selected.to_vec(),
    })
}

/// Sorted `(score, cumulative fraction)` pairs; tied scores share the
/// fraction of their last occurrence.
pub fn meteor_cdf(scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    if scores.is_empty() {
        return Err(Error::data("no scores"));
    }
    if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::data(format!("score {bad} outside [0, 1]")));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out = Vec::with_capacity(n);
    for (i, &s) in sorted.iter().enumerate() {
        let last = sorted[i..].iter().take_while(|&&t| t == s).count() + i;
        out.push((s, last as f64 / n as f64));
    }
    Ok(out)
}

pub fn cdf_csv(cdf: &[(f64, f64)]) -> String {
    let mut out = String::from("score,cumulative\n");
    for (s, f) in cdf {
        out.push_str(&format!("{s},{f}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{train, ForestParams};

    #[test]
    fn cdf_examples() {
        assert_eq!(meteor_cdf(&[0.5]).unwrap(), vec![(0.5, 1.0)]);
        let fr: Vec<f64> = meteor_cdf(&[0.4, 0.2, 0.8, 0.4])
            .unwrap()
            .iter()
            .map(|p| p.1)
            .collect();
        assert_eq!(fr, vec![0.25, 0.75, 0.75, 1.0]);
        assert!(meteor_cdf(&[]).is_err());
        assert!(meteor_cdf(&[1.2]).is_err());
    }

    #[test]
    fn eigen_of_diagonal_and_rotated() {
        let (vals, vecs) = symmetric_eigen(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(vals, vec![3.0, 1.0]);
        assert!((vecs[0][1].abs() - 1.0).abs() < 1e-12);
        let (vals, _) = symmetric_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }

    fn fv(id: &str, values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            doc_id: id.into(),
            registry_version: "wps-1".into(),
            values,
        }
    }

    #[test]
    fn identical_vectors_collapse() {
        let vs: Vec<FeatureVector> = (0..5).map(|i| fv(&i.to_string(), vec![1.0; 4])).collect();
        let p = pca_project(&vs, &[0, 1, 2, 3], 3, &[true; 5]).unwrap();
        assert_eq!(p.total_variance, 0.0);
        assert!(p.explained_variance.iter().all(|&v| v == 0.0));
        let first = &p.coordinates[0].coords;
        assert!(p.coordinates.iter().all(|c| &c.coords == first));
    }

    #[test]
    fn precondition_errors() {
        let vs: Vec<FeatureVector> = (0..3).map(|i| fv(&i.to_string(), vec![i as f64; 4])).collect();
        assert!(pca_project(&vs, &[0, 1], 3, &[true; 3]).is_err());
        assert!(pca_project(&vs, &[0, 1, 2], 3, &[true; 3]).is_err());
        assert!(pca_project(&vs, &[0, 1, 2], 2, &[true; 2]).is_err());
    }

    #[test]
    fn top_k_follows_importance() {
        // only feature 1 separates the classes
        let x: Vec<FeatureVector> = (0..20)
            .map(|i| fv(&i.to_string(), vec![0.5, (i % 2) as f64, 0.25]))
            .collect();
        let y: Vec<String> = (0..20).map(|i| format!("a{}", i % 2)).collect();
        let model = train(&x, &y, &ForestParams::default()).unwrap();
        assert_eq!(top_k_features(&model, 1).unwrap(), vec![1]);
        assert_eq!(top_k_features(&model, 3).unwrap(), vec![1, 0, 2]);
        assert_eq!(top_k_features(&model, 3).unwrap(), top_k_features(&model, 3).unwrap());
        assert!(top_k_features(&model, 4).is_err());
        let mut empty = model.clone();
        empty.trees.clear();
        assert!(top_k_features(&empty, 1).is_err());
    }
}
