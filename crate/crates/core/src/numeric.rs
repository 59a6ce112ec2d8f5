//! Log-space arithmetic helpers.

/// `ln(e^a + e^b)` without overflow. Handles `-inf` operands.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}` anchored at the largest entry. Empty input and all-`-inf`
/// input both give `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `ln Σ e^{a_i + b_i}`, the weighted form used for mixtures and risks.
pub fn log_sum_exp_weighted(log_weights: &[f64], xs: &[f64]) -> f64 {
    debug_assert_eq!(log_weights.len(), xs.len());
    let mut max = f64::NEG_INFINITY;
    for (w, x) in log_weights.iter().zip(xs) {
        max = max.max(w + x);
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = log_weights
        .iter()
        .zip(xs)
        .map(|(w, x)| (w + x - max).exp())
        .sum();
    max + sum.ln()
}

/// Natural log that maps 0 to `-inf` instead of panicking on negative input.
#[inline]
pub fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}
