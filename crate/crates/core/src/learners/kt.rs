use crate::error::{Error, Result};
use crate::game::{GameRng, Label, Learner, Prediction};

/// Add-β rule `(Σy + β)/(t − 1 + 2β)`; β = 1/2 is Krichevsky–Trofimov.
pub fn kt_predict(history: &[Label], beta: f64) -> Prediction {
    let ones = history.iter().filter(|&&y| y == 1).count() as f64;
    Prediction::from_unchecked((ones + beta) / (history.len() as f64 + 2.0 * beta))
}

/// Context-free add-β learner.
#[derive(Debug, Clone)]
pub struct KtLearner {
    beta: f64,
    ones: u64,
    total: u64,
}

impl KtLearner {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            beta,
            ones: 0,
            total: 0,
        })
    }

    fn q1(&self) -> f64 {
        (self.ones as f64 + self.beta) / (self.total as f64 + 2.0 * self.beta)
    }
}

impl Learner for KtLearner {
    fn id(&self) -> String {
        format!("kt[beta={}]", self.beta)
    }

    fn predict(&mut self, _x: usize, _rng: &mut GameRng) -> Prediction {
        Prediction::from_unchecked(self.q1())
    }

    fn update(&mut self, _x: usize, y: Label) {
        self.total += 1;
        self.ones += u64::from(y);
    }

    fn probe(&self, _x: usize) -> Option<f64> {
        Some(self.q1())
    }
}
