//! Deterministic numeric formatting at a fixed number of significant digits.

use crate::scalar::Real;

/// Format `v` with `digits` significant digits, decimal where the exponent
/// is small and scientific otherwise. Re-parsing and re-formatting the
/// output reproduces it exactly (digits ≤ 15 for f64).
pub fn format_sig<T: Real>(v: T, digits: usize) -> String {
    let digits = digits.max(1);
    if v == T::zero() {
        return "0".to_string();
    }
    if v < T::zero() {
        return format!("-{}", format_sig(-v, digits));
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp always emits an exponent");
    let exp10: i32 = exp.parse().expect("exponent is an integer");
    let digit_run: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    if exp10 >= 0 && exp10 < digits as i32 {
        let split = exp10 as usize + 1;
        let int_part = &digit_run[..split];
        let frac = trim_zeros(&digit_run[split..]);
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    } else if (-4..0).contains(&exp10) {
        let leading = "0".repeat((-exp10 - 1) as usize);
        let frac = trim_zeros(&digit_run);
        format!("0.{leading}{frac}")
    } else {
        let head = &digit_run[..1];
        let tail = trim_zeros(&digit_run[1..]);
        if tail.is_empty() {
            format!("{head}e{exp10}")
        } else {
            format!("{head}.{tail}e{exp10}")
        }
    }
}

fn trim_zeros(s: &str) -> &str {
    s.trim_end_matches('0')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values() {
        assert_eq!(format_sig(0.0f64, 12), "0");
        assert_eq!(format_sig(1.5f64, 12), "1.5");
        assert_eq!(format_sig(-2.0f64, 12), "-2");
        assert_eq!(format_sig(500.0f64, 12), "500");
        assert_eq!(format_sig(0.000123f64, 12), "0.000123");
    }

    #[test]
    fn rounds_to_significant_digits() {
        assert_eq!(format_sig(1.0 / 3.0f64, 12), "0.333333333333");
        assert_eq!(format_sig(123456789012345.0f64, 12), "1.23456789012e14");
    }

    #[test]
    fn reparse_is_idempotent() {
        for &v in &[1.5, 0.1, 123.456789, 1e-7, 987654321.123456, 3.0f64.sqrt()] {
            let s1 = format_sig(v, 12);
            let back: f64 = s1.parse().unwrap();
            assert_eq!(s1, format_sig(back, 12));
        }
    }
}
