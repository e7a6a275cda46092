//! The iteration engine: one averaging transform of a similarity matrix,
//! the convergence loop, the contrast function, and two-way partition
//! extraction with its inter-group constant Ω.

use rayon::prelude::*;

use crate::accum::{LogSum, RatioMean};
use crate::error::{Error, Result};
use crate::matrix::{MatrixKind, SimilarityMatrix};
use crate::scalar::Real;

/// Averaging mode of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMode {
    Arithmetic,
    Geometric,
}

/// Whether the per-pair average over k includes k = i and k = j.
/// Excluding them is a non-default experimental variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfTerms {
    #[default]
    Include,
    Exclude,
}

/// Engine settings. `contrast_c` must stay within [0, 200]; values above
/// that exceed what double precision can evaluate meaningfully.
#[derive(Debug, Clone)]
pub struct EtsmConfig<T> {
    pub mean_mode: MeanMode,
    pub contrast_c: T,
    pub converge_eps: T,
    pub t_max: usize,
    pub homogeneity_tol: T,
    pub partition_threshold: T,
    pub self_terms: SelfTerms,
}

impl<T: Real> Default for EtsmConfig<T> {
    fn default() -> Self {
        let f = T::from_f64_lossy;
        EtsmConfig {
            mean_mode: MeanMode::Geometric,
            contrast_c: f(80.0),
            converge_eps: f(1e-12),
            t_max: 10_000,
            homogeneity_tol: f(1e-9),
            partition_threshold: f(0.5),
            self_terms: SelfTerms::Include,
        }
    }
}

impl<T: Real> EtsmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let f = T::from_f64_lossy;
        if !(self.contrast_c >= T::zero() && self.contrast_c <= f(200.0)) {
            return Err(Error::Config(format!(
                "contrast C must lie in [0, 200], got {}",
                self.contrast_c
            )));
        }
        if !(self.converge_eps > T::zero()) {
            return Err(Error::Config("converge_eps must be > 0".into()));
        }
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be ≥ 1".into()));
        }
        if !(self.homogeneity_tol >= T::zero()) {
            return Err(Error::Config("homogeneity_tol must be ≥ 0".into()));
        }
        if !(self.partition_threshold > T::zero() && self.partition_threshold < T::one()) {
            return Err(Error::Config(format!(
                "partition_threshold must lie in (0, 1), got {}",
                self.partition_threshold
            )));
        }
        Ok(())
    }
}

/// A two-way split of object indices. Both sides are non-empty, disjoint,
/// sorted, and jointly cover 0..n; `left` contains index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Result of partition extraction on a converged matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extraction {
    Homogeneous,
    Split(Partition),
}

/// Outcome of the full iteration loop.
#[derive(Debug, Clone)]
pub enum Split<T> {
    /// One connected component: the cluster does not separate at this
    /// contrast level.
    Homogeneous,
    /// The obligatory two-way split with its inter-group constant.
    Two {
        partition: Partition,
        omega: T,
        /// max − min over the inter-group entries of the final matrix.
        omega_spread: T,
    },
}

/// Per-iteration record: values of the tracked pairs after the step, and
/// the largest entry change the step produced.
#[derive(Debug, Clone)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub values: Vec<T>,
    pub max_delta: T,
}

/// Iteration history for a set of tracked index pairs.
#[derive(Debug, Clone, Default)]
pub struct Trace<T> {
    pub pairs: Vec<(usize, usize)>,
    pub rows: Vec<TraceRow<T>>,
}

/// Everything `iterate` produces.
#[derive(Debug, Clone)]
pub struct EtsmOutcome<T> {
    pub final_matrix: SimilarityMatrix<T>,
    pub t_used: usize,
    pub split: Split<T>,
    pub trace: Trace<T>,
    /// `(iteration, matrix)` snapshots when requested via options.
    pub snapshots: Vec<(usize, SimilarityMatrix<T>)>,
}

impl<T: Real> EtsmOutcome<T> {
    /// Ω of the two-way split, if one was found.
    pub fn omega(&self) -> Option<T> {
        match &self.split {
            Split::Homogeneous => None,
            Split::Two { omega, .. } => Some(*omega),
        }
    }

    pub fn partition(&self) -> Option<&Partition> {
        match &self.split {
            Split::Homogeneous => None,
            Split::Two { partition, .. } => Some(partition),
        }
    }
}

/// Extra knobs for [`iterate_with`].
#[derive(Debug, Clone, Default)]
pub struct IterateOptions {
    /// Index pairs whose values are recorded every iteration.
    pub tracked_pairs: Vec<(usize, usize)>,
    /// Keep a snapshot of the matrix every k iterations.
    pub snapshot_every: Option<usize>,
}

// Inter-group entries must agree on a single limit value to this tolerance.
const OMEGA_SPREAD_TOL: f64 = 1e-6;

/// One averaging transform (the core update rule).
///
/// Entry (i, j) becomes the mean over k of min(S_ik, S_jk)/max(S_ik, S_jk)
/// with 0/0 := 1, i.e. objects are compared through their relations to the
/// whole set rather than directly. The output is a similarity matrix with
/// unit diagonal regardless of the input kind.
pub fn transform_step<T: Real>(
    matrix: &SimilarityMatrix<T>,
    mean_mode: MeanMode,
) -> Result<SimilarityMatrix<T>> {
    transform_step_with(matrix, mean_mode, SelfTerms::Include)
}

/// [`transform_step`] with control over the self-term convention.
pub fn transform_step_with<T: Real>(
    matrix: &SimilarityMatrix<T>,
    mean_mode: MeanMode,
    self_terms: SelfTerms,
) -> Result<SimilarityMatrix<T>> {
    let n = matrix.n();
    if matrix.entries().iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("matrix contains NaN or infinite entries".into()));
    }
    if self_terms == SelfTerms::Exclude && n < 3 {
        return Err(Error::Config(
            "excluding self terms needs at least 3 objects".into(),
        ));
    }
    let entries = step_entries(matrix, mean_mode, self_terms);
    Ok(SimilarityMatrix::new_unchecked(
        MatrixKind::Similarity,
        matrix.labels().to_vec(),
        entries,
    ))
}

/// Row-parallel kernel. Per-pair results are accumulated on a fixed-point
/// grid, so entries are bit-identical under object relabeling and under any
/// parallel schedule.
fn step_entries<T: Real>(matrix: &SimilarityMatrix<T>, mode: MeanMode, self_terms: SelfTerms) -> Vec<T> {
    let n = matrix.n();
    let e = matrix.entries();
    // For the geometric mean, ln(min/max) = -|ln a - ln b|; precomputing
    // logs once removes the ln from the O(n^3) inner loop. Zero entries map
    // to -inf and short-circuit the product to zero.
    let logs: Option<Vec<T>> = match mode {
        MeanMode::Geometric => Some(e.iter().map(|v| v.ln()).collect()),
        MeanMode::Arithmetic => None,
    };

    let row_task = |i: usize, out_row: &mut [T]| {
        for j in (i + 1)..n {
            out_row[j] = match mode {
                MeanMode::Arithmetic => {
                    let ri = &e[i * n..(i + 1) * n];
                    let rj = &e[j * n..(j + 1) * n];
                    let mut acc = RatioMean::new();
                    for k in 0..n {
                        if self_terms == SelfTerms::Exclude && (k == i || k == j) {
                            continue;
                        }
                        let a = ri[k];
                        let b = rj[k];
                        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                        acc.push(if hi == T::zero() { T::one() } else { lo / hi });
                    }
                    acc.mean()
                }
                MeanMode::Geometric => {
                    let logs = logs.as_deref().expect("precomputed for GM");
                    let li = &logs[i * n..(i + 1) * n];
                    let lj = &logs[j * n..(j + 1) * n];
                    let mut acc = LogSum::new();
                    let mut zero = false;
                    for k in 0..n {
                        if self_terms == SelfTerms::Exclude && (k == i || k == j) {
                            continue;
                        }
                        let a = li[k];
                        let b = lj[k];
                        if a.is_infinite() || b.is_infinite() {
                            if a == b {
                                acc.push_unit(); // 0/0 := 1 contributes ln 1
                            } else {
                                zero = true;
                                break;
                            }
                        } else {
                            acc.push(-(a - b).abs());
                        }
                    }
                    if zero {
                        T::zero()
                    } else {
                        acc.geometric_mean()
                    }
                }
            };
        }
        out_row[i] = T::one();
    };

    let mut out = vec![T::zero(); n * n];
    if n >= 48 {
        out.par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| row_task(i, row));
    } else {
        for (i, row) in out.chunks_mut(n).enumerate() {
            row_task(i, row);
        }
    }
    // mirror the upper triangle
    for i in 0..n {
        for j in (i + 1)..n {
            out[j * n + i] = out[i * n + j];
        }
    }
    out
}

/// The contrast function: a monotone attenuation of [0, 1] that fixes 0
/// and 1 and, at large C, separates values near 1 from everything else.
///
/// Evaluates (exp((e^s − 1)^k) − 1) / (exp((e − 1)^k) − 1) with k = 0.082·C,
/// switching to exp(a^k − b^k) once the denominator would overflow (the
/// dropped −1 terms are then negligible). C = 0 is degenerate: every s > 0
/// maps to 1.
pub fn contrast<T: Real>(s: T, c: T) -> Result<T> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::Domain(format!("contrast input s must lie in [0, 1], got {s}")));
    }
    let f = T::from_f64_lossy;
    if !(c >= T::zero() && c <= f(200.0)) {
        return Err(Error::Domain(format!("contrast C must lie in [0, 200], got {c}")));
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    if s == T::one() {
        return Ok(T::one());
    }
    let k = f(0.082) * c;
    let a = s.exp_m1();
    let b = T::one().exp_m1();
    let ak = a.powf(k);
    let bk = b.powf(k);
    // exp overflows past ln(MAX); 700 is the double-precision switch point.
    let limit = f(700.0).min(T::max_value().ln() - T::one());
    if bk <= limit {
        Ok(ak.exp_m1() / bk.exp_m1())
    } else {
        Ok((ak - bk).exp())
    }
}

/// Threshold the contrasted matrix and read off its connected components:
/// one component is a homogeneous cluster, two are the obligatory split,
/// and anything else is a dichotomy violation.
pub fn extract_partition<T: Real>(
    matrix: &SimilarityMatrix<T>,
    config: &EtsmConfig<T>,
) -> Result<Extraction> {
    if matrix.kind() != MatrixKind::Similarity {
        return Err(Error::Validation(
            "partition extraction requires a similarity matrix".into(),
        ));
    }
    config.validate()?;
    if !(config.contrast_c > T::zero()) {
        return Err(Error::Config(
            "partition extraction requires contrast C > 0 (C = 0 maps everything to 1)".into(),
        ));
    }
    let n = matrix.n();
    let mut contrasted = vec![T::one(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = contrast(matrix.get(i, j), config.contrast_c)?;
            contrasted[i * n + j] = v;
            contrasted[j * n + i] = v;
        }
    }

    let components = connected_components(n, |i, j| contrasted[i * n + j] >= config.partition_threshold);
    let groups = components.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    match groups {
        1 => Ok(Extraction::Homogeneous),
        2 => {
            let left: Vec<usize> = (0..n).filter(|&i| components[i] == components[0]).collect();
            let right: Vec<usize> = (0..n).filter(|&i| components[i] != components[0]).collect();
            Ok(Extraction::Split(Partition { left, right }))
        }
        _ => Err(Error::DichotomyViolation {
            components: groups,
            histogram: contrast_histogram(&contrasted, n),
        }),
    }
}

fn connected_components(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if label[u] == usize::MAX && adjacent(v, u) {
                    label[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    label
}

fn contrast_histogram<T: Real>(contrasted: &[T], n: usize) -> [usize; 10] {
    let mut hist = [0usize; 10];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = contrasted[i * n + j].to_f64().unwrap_or(0.0);
            let bucket = ((v * 10.0).floor() as usize).min(9);
            hist[bucket] += 1;
        }
    }
    hist
}

/// Run the averaging transform to convergence and extract the split.
///
/// A dissimilarity input forces the first step to the arithmetic mean (its
/// zero diagonal would annihilate a geometric first step); all later steps
/// use the configured mode. Iteration stops when the largest entry change
/// drops below `converge_eps` or `t_max` is reached.
pub fn iterate<T: Real>(
    matrix: &SimilarityMatrix<T>,
    config: &EtsmConfig<T>,
    tracked_pairs: Option<&[(usize, usize)]>,
) -> Result<EtsmOutcome<T>> {
    let opts = IterateOptions {
        tracked_pairs: tracked_pairs.map(<[_]>::to_vec).unwrap_or_default(),
        snapshot_every: None,
    };
    iterate_with(matrix, config, &opts)
}

/// [`iterate`] with tracing and snapshot options.
pub fn iterate_with<T: Real>(
    matrix: &SimilarityMatrix<T>,
    config: &EtsmConfig<T>,
    opts: &IterateOptions,
) -> Result<EtsmOutcome<T>> {
    config.validate()?;
    let n = matrix.n();
    for &(a, b) in &opts.tracked_pairs {
        if a >= n || b >= n {
            return Err(Error::Validation(format!(
                "tracked pair ({a}, {b}) out of range for {n} objects"
            )));
        }
    }

    let dissimilarity_input = matrix.kind() == MatrixKind::Dissimilarity;
    let mut current = matrix.clone();
    let mut trace = Trace { pairs: opts.tracked_pairs.clone(), rows: Vec::new() };
    let mut snapshots = Vec::new();
    let mut t_used = config.t_max;
    let mut last_delta = T::infinity();

    for t in 1..=config.t_max {
        let mode = if t == 1 && dissimilarity_input {
            MeanMode::Arithmetic
        } else {
            config.mean_mode
        };
        let next = transform_step_with(&current, mode, config.self_terms)?;
        let delta = next.max_abs_diff(&current);
        current = next;

        trace.rows.push(TraceRow {
            iteration: t,
            values: trace.pairs.iter().map(|&(a, b)| current.get(a, b)).collect(),
            max_delta: delta,
        });
        if let Some(every) = opts.snapshot_every {
            if every > 0 && t % every == 0 {
                snapshots.push((t, current.clone()));
            }
        }

        // The first step on a dissimilarity input changes the matrix kind;
        // its delta is not an entry change in the converging sense.
        let comparable = !(t == 1 && dissimilarity_input);
        if comparable {
            last_delta = delta;
            if delta < config.converge_eps {
                t_used = t;
                break;
            }
        }
    }

    let extraction = extract_partition(&current, config).map_err(|e| match e {
        Error::DichotomyViolation { components, histogram } => Error::Unresolved {
            components,
            histogram,
            t_used,
            max_delta: last_delta.to_f64().unwrap_or(f64::NAN),
        },
        other => other,
    })?;

    let split = match extraction {
        Extraction::Homogeneous => Split::Homogeneous,
        Extraction::Split(partition) => {
            let (omega, spread) = inter_group_stats(&current, &partition);
            if spread.to_f64().unwrap_or(f64::NAN) >= OMEGA_SPREAD_TOL {
                return Err(Error::OmegaSpread {
                    spread: spread.to_f64().unwrap_or(f64::NAN),
                    t_used,
                });
            }
            if omega >= T::one() - config.homogeneity_tol {
                Split::Homogeneous
            } else {
                Split::Two { partition, omega, omega_spread: spread }
            }
        }
    };

    Ok(EtsmOutcome { final_matrix: current, t_used, split, trace, snapshots })
}

/// Mean and spread (max − min) of the inter-group entries.
fn inter_group_stats<T: Real>(m: &SimilarityMatrix<T>, p: &Partition) -> (T, T) {
    let mut sum = T::zero();
    let mut comp = T::zero(); // Kahan correction
    let mut count = 0usize;
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for &i in &p.left {
        for &j in &p.right {
            let v = m.get(i, j);
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            count += 1;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (sum / T::from_usize(count).unwrap(), hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixKind;

    fn sim(labels: usize, entries: Vec<f64>) -> SimilarityMatrix<f64> {
        let labels = (1..=labels).map(|i| format!("o{i}")).collect();
        SimilarityMatrix::from_entries(MatrixKind::Similarity, labels, entries).unwrap()
    }

    fn hand_matrix() -> SimilarityMatrix<f64> {
        sim(3, vec![1.0, 0.8, 0.2, 0.8, 1.0, 0.3, 0.2, 0.3, 1.0])
    }

    /// Straightforward per-definition evaluation, kept independent of the
    /// fixed-point kernel it checks.
    fn naive_step(m: &SimilarityMatrix<f64>, gm: bool) -> Vec<f64> {
        let n = m.n();
        let mut out = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut ratios = Vec::new();
                for k in 0..n {
                    let (a, b) = (m.get(i, k), m.get(j, k));
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    ratios.push(if hi == 0.0 { 1.0 } else { lo / hi });
                }
                out[i * n + j] = if gm {
                    if ratios.iter().any(|&r| r == 0.0) {
                        0.0
                    } else {
                        (ratios.iter().map(|r| r.ln()).sum::<f64>() / n as f64).exp()
                    }
                } else {
                    ratios.iter().sum::<f64>() / n as f64
                };
            }
        }
        out
    }

    #[test]
    fn hand_example_geometric() {
        let out = transform_step(&hand_matrix(), MeanMode::Geometric).unwrap();
        assert!((out.get(0, 1) - 0.7529).abs() < 1e-4);
        assert!((out.get(0, 2) - 0.2466).abs() < 1e-4);
        assert!((out.get(1, 2) - 0.2823).abs() < 1e-4);
        // cross-check against the independent evaluation
        let naive = naive_step(&hand_matrix(), true);
        for (a, b) in out.entries().iter().zip(&naive) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_example_arithmetic() {
        let out = transform_step(&hand_matrix(), MeanMode::Arithmetic).unwrap();
        assert!((out.get(0, 1) - 0.75556).abs() < 1e-5);
        let naive = naive_step(&hand_matrix(), false);
        for (a, b) in out.entries().iter().zip(&naive) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn two_block(n1: usize, n2: usize, omega: f64) -> SimilarityMatrix<f64> {
        let n = n1 + n2;
        let mut e = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if (i < n1) != (j < n1) {
                    e[i * n + j] = omega;
                }
            }
        }
        sim(n, e)
    }

    #[test]
    fn two_block_matrices_are_fixed_points() {
        for &(a, b, w) in &[(2usize, 2usize, 0.6f64), (3, 5, 0.123456), (1, 7, 0.999)] {
            let m = two_block(a, b, w);
            for mode in [MeanMode::Arithmetic, MeanMode::Geometric] {
                let out = transform_step(&m, mode).unwrap();
                assert!(out.max_abs_diff(&m) <= 1e-15, "{a}/{b}/{w} {mode:?}");
            }
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut e = vec![1.0, 0.5, 0.5, 1.0];
        e[1] = f64::NAN;
        e[2] = f64::NAN;
        let m = SimilarityMatrix::new_unchecked(
            MatrixKind::Similarity,
            vec!["a".into(), "b".into()],
            e,
        );
        assert!(matches!(
            transform_step(&m, MeanMode::Geometric),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn geometric_on_zero_diagonal_annihilates() {
        // why the arithmetic first step is mandatory for distance input
        let labels = vec!["a".into(), "b".into(), "c".into()];
        let e = vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.5, 2.0, 1.5, 0.0];
        let m = SimilarityMatrix::from_entries(MatrixKind::Dissimilarity, labels, e).unwrap();
        let out = transform_step(&m, MeanMode::Geometric).unwrap();
        assert_eq!(out.get(0, 1), 0.0);
        assert_eq!(out.get(0, 2), 0.0);
        assert_eq!(out.get(1, 2), 0.0);
        // while the arithmetic step produces a usable similarity matrix
        let am = transform_step(&m, MeanMode::Arithmetic).unwrap();
        assert!(am.entries().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(am.get(0, 0), 1.0);
    }

    #[test]
    fn contrast_fixed_points_and_pinned_values() {
        for c in [0.0, 0.1, 1.0, 10.0, 80.0, 200.0] {
            assert_eq!(contrast(0.0, c).unwrap(), 0.0);
            assert_eq!(contrast(1.0, c).unwrap(), 1.0);
        }
        // k = 1 exactly at C = 1/0.082
        let v: f64 = contrast(0.5, 1.0 / 0.082).unwrap();
        assert!((v - 0.19958).abs() < 1e-4, "{v}");
        assert!((v - 0.199586).abs() < 1e-5, "{v}");
        // the published Ω of the scattered-point example, crushed at C = 80
        let v: f64 = contrast(0.89459, 80.0).unwrap();
        assert!(v < 1e-9, "{v}");
        assert!(v > 1e-12, "{v}");
        // no overflow anywhere at the C ceiling
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert!(contrast(s, 200.0).unwrap().is_finite());
        }
    }

    #[test]
    fn contrast_is_degenerate_at_c_zero() {
        assert_eq!(contrast(0.3, 0.0).unwrap(), 1.0);
        assert_eq!(contrast(0.9999, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn contrast_rejects_out_of_domain() {
        assert!(matches!(contrast(-0.1, 80.0), Err(Error::Domain(_))));
        assert!(matches!(contrast(1.1, 80.0), Err(Error::Domain(_))));
        assert!(matches!(contrast(0.5, 201.0), Err(Error::Domain(_))));
    }

    #[test]
    fn extract_two_block_partition() {
        let m = two_block(2, 2, 0.6);
        let cfg = EtsmConfig::default();
        match extract_partition(&m, &cfg).unwrap() {
            Extraction::Split(p) => {
                assert_eq!(p.left, vec![0, 1]);
                assert_eq!(p.right, vec![2, 3]);
            }
            other => panic!("expected split, got {other:?}"),
        }
        // Ω = 0.89459 still separates at C = 80
        let m = two_block(3, 2, 0.89459);
        assert!(matches!(
            extract_partition(&m, &cfg).unwrap(),
            Extraction::Split(_)
        ));
    }

    #[test]
    fn extract_all_ones_is_homogeneous() {
        let m = sim(3, vec![1.0; 9]);
        assert_eq!(
            extract_partition(&m, &EtsmConfig::default()).unwrap(),
            Extraction::Homogeneous
        );
    }

    #[test]
    fn extract_rejects_c_zero_and_reports_three_blocks() {
        let m = sim(3, vec![1.0; 9]);
        let cfg = EtsmConfig { contrast_c: 0.0, ..Default::default() };
        assert!(matches!(extract_partition(&m, &cfg), Err(Error::Config(_))));

        // three blocks of two objects with mutual similarity 0.1
        let n = 6;
        let mut e = vec![0.1; n * n];
        for b in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    e[(2 * b + i) * n + (2 * b + j)] = 1.0;
                }
            }
        }
        let m = sim(n, e);
        match extract_partition(&m, &EtsmConfig::default()) {
            Err(Error::DichotomyViolation { components, histogram }) => {
                assert_eq!(components, 3);
                assert_eq!(histogram.iter().sum::<usize>(), n * (n - 1) / 2);
            }
            other => panic!("expected dichotomy violation, got {other:?}"),
        }
    }

    #[test]
    fn iterate_two_block_is_immediate_fixed_point() {
        let m = two_block(2, 2, 0.6);
        let out = iterate(&m, &EtsmConfig::default(), None).unwrap();
        assert_eq!(out.t_used, 1);
        let p = out.partition().expect("splits");
        assert_eq!(p.left, vec![0, 1]);
        assert_eq!(p.right, vec![2, 3]);
        assert!((out.omega().unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(out.trace.rows.len(), 1);
    }

    #[test]
    fn iterate_hand_matrix_reaches_frozen_limit() {
        // brute-force oracle: the dominant 0.8 pair coheres and Ω = 0.375
        let out = iterate(&hand_matrix(), &EtsmConfig::default(), Some(&[(0, 1), (0, 2)])).unwrap();
        let p = out.partition().expect("splits");
        assert_eq!(p.left, vec![0, 1]);
        assert_eq!(p.right, vec![2]);
        assert!((out.omega().unwrap() - 0.375).abs() < 1e-6);
        assert!(out.t_used < 200, "t_used = {}", out.t_used);
        assert!(out.final_matrix.get(0, 1) > 1.0 - 1e-9);
        assert_eq!(out.trace.rows.len(), out.t_used);
    }

    #[test]
    fn iterate_single_object_is_homogeneous() {
        let m = sim(1, vec![1.0]);
        let out = iterate(&m, &EtsmConfig::default(), None).unwrap();
        assert!(matches!(out.split, Split::Homogeneous));
        assert_eq!(out.t_used, 1);
    }

    #[test]
    fn iterate_pair_splits_via_extraction() {
        let m = sim(2, vec![1.0, 0.3, 0.3, 1.0]);
        let out = iterate(&m, &EtsmConfig::default(), None).unwrap();
        assert_eq!(out.t_used, 1);
        let p = out.partition().expect("splits");
        assert_eq!((p.left.as_slice(), p.right.as_slice()), (&[0][..], &[1][..]));
        assert!((out.omega().unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn iterate_applies_arithmetic_first_step_to_distances() {
        // two tight point pairs far apart, as raw distances
        let labels: Vec<String> = (1..=4).map(|i| format!("o{i}")).collect();
        let pts = [0.0f64, 0.1, 10.0, 10.1];
        let mut e = vec![0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                e[i * 4 + j] = (pts[i] - pts[j]).abs();
            }
        }
        let m = SimilarityMatrix::from_entries(MatrixKind::Dissimilarity, labels, e).unwrap();
        let out = iterate(&m, &EtsmConfig::default(), None).unwrap();
        let p = out.partition().expect("splits");
        assert_eq!(p.left, vec![0, 1]);
        assert_eq!(p.right, vec![2, 3]);
        assert!(out.final_matrix.get(0, 1) > 1.0 - 1e-7);
    }

    #[test]
    fn snapshots_are_recorded_on_schedule() {
        let opts = IterateOptions { tracked_pairs: vec![], snapshot_every: Some(2) };
        let out = iterate_with(&hand_matrix(), &EtsmConfig::default(), &opts).unwrap();
        assert!(!out.snapshots.is_empty());
        assert!(out.snapshots.iter().all(|(t, _)| t % 2 == 0));
    }
}
