//! Diagnostic CSV curves: iteration traces and contrast-function sweeps.

use std::fmt::Write as _;

use etsm_core::{contrast, Error, Real, Result, Trace};

/// Payload for [`emit_curves`].
pub enum CurvePayload<'a, T> {
    /// Recorded iteration history plus the object labels for the header.
    Trace { trace: &'a Trace<T>, labels: &'a [String] },
    /// Contrast sweep: one column per s value, one row per C.
    ContrastCurve { s_values: &'a [T], c_values: &'a [T] },
}

/// Emit one of the diagnostic curves as CSV text.
pub fn emit_curves<T: Real>(payload: CurvePayload<'_, T>) -> Result<String> {
    match payload {
        CurvePayload::Trace { trace, labels } => trace_csv(trace, labels),
        CurvePayload::ContrastCurve { s_values, c_values } => contrast_curve_csv(s_values, c_values),
    }
}

/// Columns: `iteration`, one per tracked pair (labeled `a:b`), `max_delta`.
pub fn trace_csv<T: Real>(trace: &Trace<T>, labels: &[String]) -> Result<String> {
    if trace.rows.is_empty() {
        return Err(Error::Validation("trace is empty".into()));
    }
    let mut out = String::from("iteration");
    for &(a, b) in &trace.pairs {
        let name = |i: usize| labels.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
        let _ = write!(out, ",{}:{}", name(a), name(b));
    }
    out.push_str(",max_delta\n");
    for row in &trace.rows {
        let _ = write!(out, "{}", row.iteration);
        for v in &row.values {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", row.max_delta);
    }
    Ok(out)
}

/// Columns: `C`, then one column per s value; cells are `contrast(s, C)`.
pub fn contrast_curve_csv<T: Real>(s_values: &[T], c_values: &[T]) -> Result<String> {
    if s_values.is_empty() || c_values.is_empty() {
        return Err(Error::Validation("contrast curve needs s values and a C grid".into()));
    }
    let mut out = String::from("C");
    for s in s_values {
        let _ = write!(out, ",s={s}");
    }
    out.push('\n');
    for &c in c_values {
        let _ = write!(out, "{c}");
        for &s in s_values {
            let _ = write!(out, ",{}", contrast(s, c)?);
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use etsm_core::{iterate, EtsmConfig, MatrixKind, SimilarityMatrix};

    #[test]
    fn contrast_curve_matches_engine_values() {
        let s = vec![0.5f64, 1.0];
        let c = vec![1.0 / 0.082];
        let csv = contrast_curve_csv(&s, &c).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "C,s=0.5,s=1");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        let cell: f64 = row[1].parse().unwrap();
        assert!((cell - 0.19958).abs() < 1e-4);
        assert_eq!(row[2], "1");
    }

    #[test]
    fn trace_of_fixed_point_run_has_one_row() {
        let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let mut e = vec![1.0f64; 16];
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            e[i * 4 + j] = 0.6;
            e[j * 4 + i] = 0.6;
        }
        let m = SimilarityMatrix::from_entries(MatrixKind::Similarity, labels.clone(), e).unwrap();
        let out = iterate(&m, &EtsmConfig::default(), Some(&[(0, 1), (0, 2)])).unwrap();
        let csv = trace_csv(&out.trace, &labels).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2, "{csv}");
        assert_eq!(lines[0], "iteration,a:b,a:c,max_delta");
        assert!(lines[1].starts_with("1,1,0.6,"));
    }

    #[test]
    fn empty_payloads_are_rejected() {
        assert!(trace_csv::<f64>(&Trace::default(), &[]).is_err());
        assert!(contrast_curve_csv::<f64>(&[], &[80.0]).is_err());
        assert!(contrast_curve_csv::<f64>(&[0.5], &[]).is_err());
    }
}
