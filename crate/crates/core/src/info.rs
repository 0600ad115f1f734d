//! Shannon-type helpers shared by the classical and tracial modules.

/// `-x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn neg_xlogx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy in nats of a (not necessarily normalised) weight vector,
/// treating the weights as probabilities.
pub fn shannon(probs: &[f64]) -> f64 {
    probs.iter().copied().map(neg_xlogx).sum()
}

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;
