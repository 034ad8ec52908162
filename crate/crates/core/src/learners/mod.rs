//! Probability assignment strategies.
//!
//! - [`FtplLearner`]: perturbed leader with Poissonised hallucinated samples
//!   and an MLE oracle, truncated into `[α/(1+2α), (1+α)/(1+2α)]`.
//! - [`VcMixture`]: exact uniform mixture over an ε-cover of regions with a
//!   uniform prior on `(θ0, θ1)` per region.
//! - [`KtLearner`]: context-free add-β rule.
//! - [`UniformLearner`]: always 1/2.

mod cover;
mod ftpl;
mod kt;
mod mixture;
mod poisson;

pub use cover::{cover_radius, epsilon_cover};
pub use ftpl::{ftpl_step, truncate, FtplConfig, FtplLearner, TruncatedHypothesis};
pub use kt::{kt_predict, KtLearner};
pub use mixture::{laplace_integral_log, mixture_log_marginal, VcMixture};
pub use poisson::poisson;

use crate::game::{GameRng, Label, Learner, Prediction};

/// Predicts 1/2 everywhere; pays exactly `ln 2` per round.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformLearner;

impl Learner for UniformLearner {
    fn id(&self) -> String {
        "uniform".into()
    }

    fn predict(&mut self, _x: usize, _rng: &mut GameRng) -> Prediction {
        Prediction::uniform()
    }

    fn update(&mut self, _x: usize, _y: Label) {}

    fn probe(&self, _x: usize) -> Option<f64> {
        Some(0.5)
    }
}
