//! Per-parameter (monomer) similarity matrices, their weighted geometric
//! hybridization, and Euclidean dissimilarity for coordinate data.

use crate::accum::LogSum;
use crate::dataset::{Dataset, MetricKind, ParameterSpec};
use crate::error::{Error, Result};
use crate::matrix::{MatrixKind, SimilarityMatrix};
use crate::scalar::Real;

/// Similarity of two values under one parameter's metric.
///
/// R returns min/max (with 0/0 := 1); XR returns `base^(-|v_i - v_j|)`.
pub fn pairwise_metric<T: Real>(v_i: T, v_j: T, spec: &ParameterSpec<T>) -> Result<T> {
    match spec.metric {
        MetricKind::R => {
            if v_i < T::zero() || v_j < T::zero() {
                return Err(Error::Domain(format!(
                    "R metric needs nonnegative values, got ({v_i}, {v_j}) for `{}`",
                    spec.name
                )));
            }
            Ok(ratio_similarity(v_i, v_j))
        }
        MetricKind::Xr { base } => {
            if !(base > T::one()) {
                return Err(Error::Config(format!(
                    "XR base must be > 1, got {base} for `{}`",
                    spec.name
                )));
            }
            Ok(base.powf(-(v_i - v_j).abs()))
        }
        MetricKind::EuclideanCoordinate => Err(Error::UnsupportedMetric(format!(
            "`{}` is a Euclidean coordinate; build a dissimilarity matrix instead",
            spec.name
        ))),
    }
}

#[inline]
fn ratio_similarity<T: Real>(a: T, b: T) -> T {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == T::zero() {
        T::one() // 0/0 := 1 — identical values are maximally similar
    } else {
        lo / hi
    }
}

/// Similarity matrix from a single parameter column.
pub fn monomer_matrix<T: Real>(dataset: &Dataset<T>, param_index: usize) -> Result<SimilarityMatrix<T>> {
    let spec = dataset
        .parameters()
        .get(param_index)
        .ok_or_else(|| Error::Validation(format!("parameter index {param_index} out of range")))?;
    let n = dataset.n_objects();
    let mut entries = vec![T::one(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = pairwise_metric(dataset.value(i, param_index), dataset.value(j, param_index), spec)?;
            entries[i * n + j] = s;
            entries[j * n + i] = s;
        }
    }
    Ok(SimilarityMatrix::new_unchecked(
        MatrixKind::Similarity,
        dataset.object_ids().to_vec(),
        entries,
    ))
}

/// Fuse monomer matrices into one hybrid similarity matrix.
///
/// Weights are normalized to sum 1 and applied as exponents, so the result
/// is the weighted geometric mean of the monomers. Zero entries carrying
/// positive weight force the hybrid entry to zero; everything else is
/// accumulated in log space.
pub fn hybridize<T: Real>(
    monomers: &[SimilarityMatrix<T>],
    weights: &[T],
) -> Result<SimilarityMatrix<T>> {
    if monomers.is_empty() {
        return Err(Error::Validation("hybridize needs at least one monomer".into()));
    }
    if monomers.len() != weights.len() {
        return Err(Error::Validation(format!(
            "{} monomers but {} weights",
            monomers.len(),
            weights.len()
        )));
    }
    let first = &monomers[0];
    for m in monomers {
        if m.kind() != MatrixKind::Similarity {
            return Err(Error::Validation("monomers must be similarity matrices".into()));
        }
        if m.n() != first.n() || m.labels() != first.labels() {
            return Err(Error::Validation(
                "monomers must share dimensions and object labels".into(),
            ));
        }
    }
    let w = normalize_weights(weights)?;

    let n = first.n();
    let mut entries = vec![T::one(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = hybrid_entry((0..monomers.len()).map(|p| (monomers[p].get(i, j), w[p])));
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(SimilarityMatrix::new_unchecked(
        MatrixKind::Similarity,
        first.labels().to_vec(),
        entries,
    ))
}

fn normalize_weights<T: Real>(weights: &[T]) -> Result<Vec<T>> {
    let mut sum = T::zero();
    for &w in weights {
        if !(w >= T::zero()) || !w.is_finite() {
            return Err(Error::Config(format!("weights must be finite and ≥ 0, got {w}")));
        }
        sum = sum + w;
    }
    if !(sum > T::zero()) {
        return Err(Error::Config("weights must not all be zero".into()));
    }
    Ok(weights.iter().map(|&w| w / sum).collect())
}

/// Weighted geometric mean of `(value, normalized_weight)` pairs.
fn hybrid_entry<T: Real>(terms: impl Iterator<Item = (T, T)>) -> T {
    let mut acc = LogSum::new();
    for (v, w) in terms {
        if w == T::zero() {
            continue;
        }
        if v == T::zero() {
            return T::zero();
        }
        acc.push(w * v.ln());
    }
    acc.exp_sum()
}

/// Straight-line distance matrix over coordinate parameters.
pub fn euclidean_dissimilarity<T: Real>(dataset: &Dataset<T>) -> Result<SimilarityMatrix<T>> {
    if dataset
        .parameters()
        .iter()
        .any(|s| s.metric != MetricKind::EuclideanCoordinate)
    {
        return Err(Error::Config(
            "euclidean_dissimilarity requires every parameter to be a EUCLIDEAN coordinate".into(),
        ));
    }
    let n = dataset.n_objects();
    let p = dataset.n_params();
    let mut entries = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sq = T::zero();
            for k in 0..p {
                let d = dataset.value(i, k) - dataset.value(j, k);
                sq = sq + d * d;
            }
            let d = sq.sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(SimilarityMatrix::new_unchecked(
        MatrixKind::Dissimilarity,
        dataset.object_ids().to_vec(),
        entries,
    ))
}

/// Route a dataset to its matrix: Euclidean coordinates become a
/// dissimilarity matrix, R/XR parameters become a weighted hybrid of
/// monomer similarities. Mixing the two families is rejected.
pub fn similarity_matrix<T: Real>(dataset: &Dataset<T>) -> Result<SimilarityMatrix<T>> {
    let coords = dataset
        .parameters()
        .iter()
        .filter(|s| s.metric == MetricKind::EuclideanCoordinate)
        .count();
    if coords == dataset.n_params() {
        return euclidean_dissimilarity(dataset);
    }
    if coords > 0 {
        return Err(Error::Config(
            "cannot mix EUCLIDEAN coordinates with R/XR parameters in one dataset".into(),
        ));
    }
    hybrid_of_dataset(dataset)
}

/// Hybrid matrix computed directly from the dataset, without materializing
/// the monomer matrices. Entry-for-entry identical to
/// `hybridize(monomers, weights)`.
fn hybrid_of_dataset<T: Real>(dataset: &Dataset<T>) -> Result<SimilarityMatrix<T>> {
    let weights: Vec<T> = dataset.parameters().iter().map(|s| s.weight).collect();
    let w = normalize_weights(&weights)?;
    let n = dataset.n_objects();
    let p = dataset.n_params();
    let mut entries = vec![T::one(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc_err = None;
            let v = hybrid_entry((0..p).filter_map(|k| {
                match pairwise_metric(dataset.value(i, k), dataset.value(j, k), &dataset.parameters()[k]) {
                    Ok(s) => Some((s, w[k])),
                    Err(e) => {
                        acc_err = Some(e);
                        None
                    }
                }
            }));
            if let Some(e) = acc_err {
                return Err(e);
            }
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(SimilarityMatrix::new_unchecked(
        MatrixKind::Similarity,
        dataset.object_ids().to_vec(),
        entries,
    ))
}
