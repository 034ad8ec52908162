//! Evaluator for the perturbed-leader regret bound
//!
//! ```text
//! n ln(1/α) + αT + T √(ln(1/α)/(σn))
//!   + T · inf_{m ≤ n} { (1/α)·Rad(F_α, n/m) + n(1−σ)^m ln(1/α)/m + e^{−n/8} }
//! ```
//!
//! Constants are taken literally; use the output for shape, not level.

use serde::Serialize;

use crate::error::{Error, Result};

/// Log-spaced block sizes tried in the inner minimisation.
pub const BLOCK_GRID_POINTS: usize = 32;

pub struct BoundInputs<'a> {
    pub n_rate: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub horizon: f64,
    /// Rademacher complexity of the truncated class as a function of
    /// sample size.
    pub rad: &'a dyn Fn(f64) -> f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub total: f64,
    pub perturbation: f64,
    pub truncation: f64,
    pub stability: f64,
    /// `T ·` the minimised bracket.
    pub generalization: f64,
    pub best_block: f64,
}

/// The bracketed term at block size `m`.
pub fn bound_bracket(inputs: &BoundInputs<'_>, m: f64) -> f64 {
    let log_inv_alpha = (1.0 / inputs.alpha).ln();
    let n = inputs.n_rate;
    (inputs.rad)(n / m) / inputs.alpha
        + n * (1.0 - inputs.sigma).powf(m) * log_inv_alpha / m
        + (-n / 8.0).exp()
}

pub fn theorem_bound(inputs: &BoundInputs<'_>) -> Result<BoundReport> {
    let BoundInputs {
        n_rate: n,
        alpha,
        sigma,
        horizon: t,
        ..
    } = *inputs;
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::invalid(format!(
            "n_rate must be at least 1, got {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::invalid(format!(
            "sigma must lie in (0, 1], got {sigma}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("horizon must be positive, got {t}")));
    }
    let log_inv_alpha = (1.0 / alpha).ln();
    let (mut best_block, mut best) = (1.0, f64::INFINITY);
    for i in 0..BLOCK_GRID_POINTS {
        let m = (n.ln() * i as f64 / (BLOCK_GRID_POINTS - 1) as f64)
            .exp()
            .min(n);
        let v = bound_bracket(inputs, m);
        if v < best {
            best = v;
            best_block = m;
        }
    }
    let perturbation = n * log_inv_alpha;
    let truncation = alpha * t;
    let stability = t * (log_inv_alpha / (sigma * n)).sqrt();
    let generalization = t * best;
    Ok(BoundReport {
        total: perturbation + truncation + stability + generalization,
        perturbation,
        truncation,
        stability,
        generalization,
        best_block,
    })
}
