//! Shared helpers for integration tests.

use etsm_core::{MatrixKind, SimilarityMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random symmetric similarity matrix (uniform off-diagonals, unit
/// diagonal) with n drawn from [min_n, max_n].
pub fn random_similarity_strategy(
    min_n: usize,
    max_n: usize,
) -> impl Strategy<Value = SimilarityMatrix<f64>> {
    (min_n..=max_n, any::<u64>()).prop_map(|(n, seed)| random_similarity(n, seed))
}

pub fn random_similarity(n: usize, seed: u64) -> SimilarityMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = vec![1.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random();
            e[i * n + j] = v;
            e[j * n + i] = v;
        }
    }
    SimilarityMatrix::from_entries(
        MatrixKind::Similarity,
        (0..n).map(|i| format!("o{i}")).collect(),
        e,
    )
    .unwrap()
}

/// Exact two-block matrix (intra 1, inter ω) plus its block sizes.
pub fn two_block_strategy(
    min_n: usize,
    max_n: usize,
) -> impl Strategy<Value = (SimilarityMatrix<f64>, usize, f64)> {
    (min_n..=max_n, 1e-6f64..=0.999999, any::<u64>()).prop_map(|(n, omega, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n1 = rng.random_range(1..n);
        let mut e = vec![1.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                if (i < n1) != (j < n1) {
                    e[i * n + j] = omega;
                }
            }
        }
        let m = SimilarityMatrix::from_entries(
            MatrixKind::Similarity,
            (0..n).map(|i| format!("o{i}")).collect(),
            e,
        )
        .unwrap();
        (m, n1, omega)
    })
}

/// Seed-deterministic permutation of 0..n.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Relabel objects: entry (perm[i], perm[j]) of the result equals
/// entry (i, j) of the input.
pub fn apply_permutation(m: &SimilarityMatrix<f64>, perm: &[usize]) -> SimilarityMatrix<f64> {
    let n = m.n();
    let mut e = vec![0.0f64; n * n];
    let mut labels = vec![String::new(); n];
    for i in 0..n {
        labels[perm[i]] = m.labels()[i].clone();
        for j in 0..n {
            e[perm[i] * n + perm[j]] = m.get(i, j);
        }
    }
    SimilarityMatrix::from_entries(m.kind(), labels, e).unwrap()
}
