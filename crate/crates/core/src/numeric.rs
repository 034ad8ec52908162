//! Small numeric helpers shared across modules.

/// `ln Σ exp(v)`, stable for large negative inputs. Empty input gives `-inf`.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Negative log-likelihood of `k` ones among `n` Bernoulli draws at the
/// empirical frequency `k/n`, with `0 ln 0 = 0`.
pub(crate) fn bernoulli_nll_at_mle(k: u64, n: u64) -> f64 {
    debug_assert!(k <= n);
    if n == 0 || k == 0 || k == n {
        return 0.0;
    }
    let n_f = n as f64;
    let k_f = k as f64;
    let zeros = n_f - k_f;
    -(k_f * (k_f / n_f).ln() + zeros * (zeros / n_f).ln())
}

/// Ordinary least squares `y = a + b x`, returning `(a, b)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    (my - slope * mx, slope)
}

/// Formats `v` with 12 significant digits in the style of C's `%.12g`.
pub(crate) fn format_sig12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, v);
        trim_zeros(&fixed)
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_direct_sum() {
        let v = [0.1, -2.0, 1.5];
        let direct: f64 = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-14);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(2f64.ln()), "0.69314718056");
        assert_eq!(format_sig12(10.0), "10");
        assert_eq!(format_sig12(-2.5), "-2.5");
        assert_eq!(format_sig12(1.0e-7), "1e-07");
        assert_eq!(format_sig12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_sig12(0.0), "0");
    }

    #[test]
    fn nll_convention() {
        assert_eq!(bernoulli_nll_at_mle(0, 0), 0.0);
        assert_eq!(bernoulli_nll_at_mle(3, 3), 0.0);
        assert!((bernoulli_nll_at_mle(1, 2) - 2.0 * 2f64.ln()).abs() < 1e-15);
    }
}
