use std::sync::Arc;

use rand::Rng;

use super::poisson;
use crate::error::{Error, Result};
use crate::game::{GameRng, Label, Learner, Prediction};
use crate::hypotheses::{fit_counts, ContextCounts, Hypothesis, RegionFamily};

/// Rate of hallucinated samples per step and truncation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtplConfig {
    pub n: f64,
    pub alpha: f64,
}

impl FtplConfig {
    pub fn new(n: f64, alpha: f64) -> Result<Self> {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::invalid(format!(
                "hallucination rate n must be finite and non-negative, got {n}"
            )));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::invalid(format!(
                "truncation alpha must lie in (0, 1/2), got {alpha}"
            )));
        }
        Ok(Self { n, alpha })
    }

    /// Predictions are confined to `[lo, hi]`.
    pub fn truncation_range(&self) -> (f64, f64) {
        let d = 1.0 + 2.0 * self.alpha;
        (self.alpha / d, (1.0 + self.alpha) / d)
    }
}

/// `(q + α)/(1 + 2α)`.
pub fn truncate(q: f64, alpha: f64) -> Prediction {
    Prediction::from_unchecked((q + alpha) / (1.0 + 2.0 * alpha))
}

/// A member of the truncated class `F_α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedHypothesis {
    pub alpha: f64,
    pub hypothesis: Hypothesis,
}

impl TruncatedHypothesis {
    pub fn evaluate(&self, family: &RegionFamily, x: usize) -> Prediction {
        truncate(self.hypothesis.evaluate(family, x).q1(), self.alpha)
    }
}

/// One perturbed-leader step.
///
/// Draws `N ∼ Poisson(n)` hallucinated examples with uniform context and
/// uniform label, fits the MLE on hallucinated ∪ history, and returns the
/// truncated leader's prediction at `x`.
pub fn ftpl_step<R: Rng + ?Sized>(
    history: &ContextCounts,
    config: &FtplConfig,
    family: &RegionFamily,
    rng: &mut R,
    x: usize,
) -> Prediction {
    let hallucinated = poisson(config.n, rng);
    let mut counts = history.clone();
    let u = counts.n.len();
    for _ in 0..hallucinated {
        let hx = rng.gen_range(0..u);
        let hy = Label::from(rng.gen::<bool>());
        counts.add(hx, hy);
    }
    let leader = fit_counts(&counts, family).hypothesis;
    TruncatedHypothesis {
        alpha: config.alpha,
        hypothesis: leader,
    }
    .evaluate(family, x)
}

#[derive(Debug, Clone)]
pub struct FtplLearner {
    config: FtplConfig,
    family: Arc<RegionFamily>,
    history: ContextCounts,
    /// Unperturbed leader on the history, served to adaptive adversaries.
    leader: Hypothesis,
}

impl FtplLearner {
    pub fn new(config: FtplConfig, family: Arc<RegionFamily>) -> Self {
        let history = ContextCounts::new(family.universe());
        let leader = fit_counts(&history, &family).hypothesis;
        Self {
            config,
            family,
            history,
            leader,
        }
    }

    pub fn config(&self) -> &FtplConfig {
        &self.config
    }
}

impl Learner for FtplLearner {
    fn id(&self) -> String {
        format!("ftpl[n={},alpha={}]", self.config.n, self.config.alpha)
    }

    fn predict(&mut self, x: usize, rng: &mut GameRng) -> Prediction {
        ftpl_step(&self.history, &self.config, &self.family, rng, x)
    }

    fn update(&mut self, x: usize, y: Label) {
        self.history.add(x, y);
        self.leader = fit_counts(&self.history, &self.family).hypothesis;
    }

    fn probe(&self, x: usize) -> Option<f64> {
        Some(
            truncate(
                self.leader.evaluate(&self.family, x).q1(),
                self.config.alpha,
            )
            .q1(),
        )
    }
}
