//! Symmetric similarity / dissimilarity matrices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Whether entries measure likeness (diagonal 1, range [0,1]) or distance
/// (diagonal 0, nonnegative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Similarity,
    Dissimilarity,
}

impl MatrixKind {
    fn tag(self) -> &'static str {
        match self {
            MatrixKind::Similarity => "similarity",
            MatrixKind::Dissimilarity => "dissimilarity",
        }
    }
}

/// A dense symmetric matrix over labeled objects.
///
/// Construction validates symmetry (exact), the diagonal, entry ranges, and
/// finiteness; instances are immutable afterwards.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix<T> {
    n: usize,
    kind: MatrixKind,
    labels: Vec<String>,
    entries: Vec<T>,
}

impl<T: Real> SimilarityMatrix<T> {
    /// Build from row-major entries, enforcing all structural invariants.
    pub fn from_entries(kind: MatrixKind, labels: Vec<String>, entries: Vec<T>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Validation("matrix must have at least one object".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for {} objects, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        let m = SimilarityMatrix { n, kind, labels, entries };
        m.validate()?;
        Ok(m)
    }

    /// Internal constructor for matrices that are valid by construction.
    pub(crate) fn new_unchecked(kind: MatrixKind, labels: Vec<String>, entries: Vec<T>) -> Self {
        let n = labels.len();
        debug_assert_eq!(entries.len(), n * n);
        SimilarityMatrix { n, kind, labels, entries }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let v = self.entries[i * n + j];
                if !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "non-finite entry at ({}, {})",
                        self.labels[i], self.labels[j]
                    )));
                }
                if self.entries[j * n + i] != v {
                    return Err(Error::Validation(format!(
                        "asymmetric entries at ({}, {})",
                        self.labels[i], self.labels[j]
                    )));
                }
                let ok = match self.kind {
                    MatrixKind::Similarity => {
                        if i == j {
                            v == T::one()
                        } else {
                            v >= T::zero() && v <= T::one()
                        }
                    }
                    MatrixKind::Dissimilarity => {
                        if i == j {
                            v == T::zero()
                        } else {
                            v >= T::zero()
                        }
                    }
                };
                if !ok {
                    return Err(Error::Validation(format!(
                        "entry {v} at ({}, {}) violates the {} range",
                        self.labels[i],
                        self.labels[j],
                        self.kind.tag()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    /// Principal submatrix over `indices` (kind and label order preserved).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let m = indices.len();
        let mut entries = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                entries.push(self.get(i, j));
            }
        }
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        SimilarityMatrix::new_unchecked(self.kind, labels, entries)
    }

    /// Largest absolute entry difference against a same-shape matrix.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        debug_assert_eq!(self.n, other.n);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    /// Smallest off-diagonal entry (the matrix must have n ≥ 2).
    pub fn min_off_diagonal(&self) -> T {
        self.fold_off_diagonal(T::infinity(), T::min)
    }

    /// Largest off-diagonal entry (the matrix must have n ≥ 2).
    pub fn max_off_diagonal(&self) -> T {
        self.fold_off_diagonal(T::neg_infinity(), T::max)
    }

    fn fold_off_diagonal(&self, init: T, f: fn(T, T) -> T) -> T {
        let mut acc = init;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                acc = f(acc, self.get(i, j));
            }
        }
        acc
    }

    /// Serialize to the matrix CSV dialect: a `# kind:` comment line, a
    /// header of object ids, then one labeled row per object. Values use
    /// the shortest representation that parses back to the same scalar, so
    /// a dump/load cycle is exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind: {}", self.kind.tag());
        let _ = writeln!(out, "id,{}", self.labels.join(","));
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self.get(i, j))).collect();
            let _ = writeln!(out, "{},{}", self.labels[i], row.join(","));
        }
        out
    }

    /// Parse the format written by [`SimilarityMatrix::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let kind_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let kind = match kind_line.trim_start_matches('#').trim() {
            s if s.eq_ignore_ascii_case("kind: similarity") => MatrixKind::Similarity,
            s if s.eq_ignore_ascii_case("kind: dissimilarity") => MatrixKind::Dissimilarity,
            _ => {
                return Err(Error::Parse(format!(
                    "expected a `# kind: similarity|dissimilarity` comment, got `{kind_line}`"
                )))
            }
        };
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing matrix header row".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("id") {
            return Err(Error::Parse("matrix header must start with `id`".into()));
        }
        let labels: Vec<String> = cols.map(str::to_string).collect();
        let n = labels.len();
        if n == 0 {
            return Err(Error::Parse("matrix header names no objects".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (r, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let mut fields = line.split(',');
            let row_label = fields.next().unwrap_or("");
            if r >= n {
                return Err(Error::Parse(format!("more rows than header columns ({n})")));
            }
            if row_label != labels[r] {
                return Err(Error::Parse(format!(
                    "row {} is labeled `{row_label}` but the header says `{}`",
                    r + 1,
                    labels[r]
                )));
            }
            for (c, field) in fields.enumerate() {
                let v: T = field.parse().map_err(|_| {
                    Error::Parse(format!(
                        "row {}, column `{}`: invalid number `{field}`",
                        r + 1,
                        labels.get(c).map(String::as_str).unwrap_or("?")
                    ))
                })?;
                entries.push(v);
            }
            if entries.len() != (r + 1) * n {
                return Err(Error::Parse(format!(
                    "row {} has {} values, expected {n}",
                    r + 1,
                    entries.len() - r * n
                )));
            }
        }
        if entries.len() != n * n {
            return Err(Error::Parse(format!(
                "expected {n} rows, got {}",
                entries.len() / n
            )));
        }
        SimilarityMatrix::from_entries(kind, labels, entries)
    }
}
