//! Exact Bayesian mixture over an ε-cover of regions.
//!
//! Each cover element `g_i` carries a uniform prior on `(θ0, θ1)`, so its
//! marginal likelihood factorises into two Beta integrals
//!
//! ```text
//! ∫₀¹ θ^k (1−θ)^{n−k} dθ = 1 / ((n+1)·C(n,k))
//! ```
//!
//! and the joint assignment is `q(y_{1:t} ‖ x_{1:t}) = (1/m) Σ_i B_i`. The
//! one-step predictive of each element is the Laplace rule `(k+1)/(n+2)` on
//! the side of `x`, and the mixture predictive is the posterior-weighted
//! average of those. All weights are kept in the log domain.

use std::sync::Arc;

use statrs::function::factorial::ln_binomial;

use super::epsilon_cover;
use crate::error::{Error, Result};
use crate::game::{GameRng, Label, Learner, Prediction};
use crate::hypotheses::{RegionCounts, RegionFamily};
use crate::numeric::log_sum_exp;

/// `ln ∫₀¹ t^k (1−t)^{n−k} dt = −ln(n+1) − ln C(n,k)`.
pub fn laplace_integral_log(k: u64, n: u64) -> Result<f64> {
    if k > n {
        return Err(Error::invalid(format!(
            "laplace integral needs k ≤ n, got k={k}, n={n}"
        )));
    }
    Ok(-((n + 1) as f64).ln() - ln_binomial(n, k))
}

/// Log marginal likelihood of one cover element from its counts.
pub fn mixture_log_marginal(counts: &RegionCounts) -> f64 {
    laplace_integral_log(counts.k0, counts.n0).expect("k0 ≤ n0")
        + laplace_integral_log(counts.k1, counts.n1).expect("k1 ≤ n1")
}

/// Laplace-rule probability of `y` on one side after `k` ones in `n`.
#[inline]
fn laplace_prob(k: u64, n: u64, y: Label) -> f64 {
    let ones = if y == 1 { k } else { n - k };
    (ones + 1) as f64 / (n + 2) as f64
}

/// The mixture learner and its sufficient statistics.
#[derive(Debug, Clone)]
pub struct VcMixture {
    family: Arc<RegionFamily>,
    cover: Vec<usize>,
    counts: Vec<RegionCounts>,
    log_marginals: Vec<f64>,
    /// Normalised posterior weights, refreshed on every update.
    weights: Vec<f64>,
    log_normalizer: f64,
    rounds: u64,
}

impl VcMixture {
    /// Mixture over an `eps`-cover of `family`.
    pub fn new(family: Arc<RegionFamily>, eps: f64) -> Result<Self> {
        let cover = epsilon_cover(&family, eps)?;
        Self::with_cover(family, cover)
    }

    pub fn with_cover(family: Arc<RegionFamily>, cover: Vec<usize>) -> Result<Self> {
        if cover.is_empty() {
            return Err(Error::invalid("mixture cover must be non-empty"));
        }
        if let Some(&bad) = cover.iter().find(|&&r| r >= family.len()) {
            return Err(Error::invalid(format!(
                "cover index {bad} outside family of {} regions",
                family.len()
            )));
        }
        let m = cover.len();
        Ok(Self {
            family,
            counts: vec![RegionCounts::default(); m],
            log_marginals: vec![0.0; m],
            weights: vec![1.0 / m as f64; m],
            log_normalizer: 0.0,
            cover,
            rounds: 0,
        })
    }

    pub fn cover(&self) -> &[usize] {
        &self.cover
    }

    pub fn counts(&self) -> &[RegionCounts] {
        &self.counts
    }

    pub fn log_marginals(&self) -> &[f64] {
        &self.log_marginals
    }

    /// `ln q(y_{1:t} ‖ x_{1:t})` for everything observed so far.
    pub fn log_joint(&self) -> f64 {
        self.log_normalizer
    }

    /// Posterior-weighted Laplace predictive at `x`; always in `(0, 1)`.
    pub fn predict_prob(&self, x: usize) -> f64 {
        let mut q = 0.0;
        for ((&r, c), w) in self.cover.iter().zip(&self.counts).zip(&self.weights) {
            let (k, n) = c.side(self.family.side(r, x));
            q += w * laplace_prob(k, n, 1);
        }
        q.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    }

    /// Adds `(x, y)` to every element's counts on the side of `x`.
    pub fn observe(&mut self, x: usize, y: Label) {
        for ((&r, c), lm) in self
            .cover
            .iter()
            .zip(self.counts.iter_mut())
            .zip(self.log_marginals.iter_mut())
        {
            let side = self.family.side(r, x);
            let (k, n) = c.side(side);
            *lm += laplace_prob(k, n, y).ln();
            c.add(side, y);
        }
        self.rounds += 1;
        self.refresh_weights();
    }

    fn refresh_weights(&mut self) {
        let lse = log_sum_exp(&self.log_marginals);
        self.log_normalizer = lse - (self.cover.len() as f64).ln();
        for (w, lm) in self.weights.iter_mut().zip(&self.log_marginals) {
            *w = (lm - lse).exp();
        }
    }
}

impl Learner for VcMixture {
    fn id(&self) -> String {
        format!("vc_mixture[m={}]", self.cover.len())
    }

    fn predict(&mut self, x: usize, _rng: &mut GameRng) -> Prediction {
        Prediction::from_unchecked(self.predict_prob(x))
    }

    fn update(&mut self, x: usize, y: Label) {
        self.observe(x, y);
    }

    fn probe(&self, x: usize) -> Option<f64> {
        Some(self.predict_prob(x))
    }
}
