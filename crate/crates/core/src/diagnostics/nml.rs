//! NML log-normaliser on fixed contexts and exhaustive worst-case regret.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameRng, Label, Learner};
use crate::hypotheses::{Hypothesis, RegionFamily};

pub const MAX_NML_HORIZON: usize = 22;
pub const MAX_NML_HYPOTHESES: usize = 10_000;

/// A finite class given by each hypothesis' `p_f(1 | x)` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteClass {
    pub hypotheses: Vec<Vec<f64>>,
}

impl FiniteClass {
    pub fn new(hypotheses: Vec<Vec<f64>>) -> Result<Self> {
        let width = hypotheses
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("class needs at least one hypothesis"))?;
        for (i, h) in hypotheses.iter().enumerate() {
            if h.len() != width {
                return Err(Error::invalid(format!(
                    "hypothesis {i} has {} entries, expected {width}",
                    h.len()
                )));
            }
            if let Some(p) = h.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::invalid(format!(
                    "hypothesis {i} has probability {p}"
                )));
            }
        }
        Ok(Self { hypotheses })
    }

    pub fn from_hypotheses(family: &RegionFamily, hs: &[Hypothesis]) -> Result<Self> {
        let u = family.universe().size();
        Self::new(
            hs.iter()
                .map(|h| (0..u).map(|x| h.evaluate(family, x).q1()).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn universe_size(&self) -> usize {
        self.hypotheses[0].len()
    }

    fn log_prob(&self, h: usize, x: usize, y: Label) -> f64 {
        let p = self.hypotheses[h][x];
        if y == 1 {
            p.ln()
        } else {
            (1.0 - p).ln()
        }
    }

    fn check(&self, contexts: &[usize]) -> Result<()> {
        if contexts.len() > MAX_NML_HORIZON {
            return Err(Error::TooLarge(format!(
                "{} contexts, at most {MAX_NML_HORIZON} enumerable",
                contexts.len()
            )));
        }
        if self.len() > MAX_NML_HYPOTHESES {
            return Err(Error::TooLarge(format!(
                "{} hypotheses, at most {MAX_NML_HYPOTHESES}",
                self.len()
            )));
        }
        if let Some(x) = contexts.iter().find(|&&x| x >= self.universe_size()) {
            return Err(Error::invalid(format!(
                "context {x} outside class tables of width {}",
                self.universe_size()
            )));
        }
        Ok(())
    }
}

/// Streaming log-sum-exp.
#[derive(Default)]
struct LogSum {
    max: f64,
    scaled: f64,
    any: bool,
}

impl LogSum {
    fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if !self.any {
            self.max = v;
            self.scaled = 1.0;
            self.any = true;
        } else if v > self.max {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.scaled += (v - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.any {
            self.max + self.scaled.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `ln Σ_{y ∈ {0,1}^T} max_f Π_t p_f(y_t | x_t)` by enumerating all label
/// sequences.
pub fn nml_value(class: &FiniteClass, contexts: &[usize]) -> Result<f64> {
    class.check(contexts)?;
    let mut levels = vec![vec![0.0; class.len()]; contexts.len() + 1];
    let mut acc = LogSum::default();
    nml_walk(class, contexts, 0, &mut levels, &mut acc);
    Ok(acc.value())
}

fn nml_walk(
    class: &FiniteClass,
    contexts: &[usize],
    depth: usize,
    levels: &mut [Vec<f64>],
    acc: &mut LogSum,
) {
    if depth == contexts.len() {
        acc.push(
            levels[depth]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        );
        return;
    }
    let x = contexts[depth];
    for y in 0..=1 {
        let (head, tail) = levels.split_at_mut(depth + 1);
        for (h, (next, prev)) in tail[0].iter_mut().zip(&head[depth]).enumerate() {
            *next = prev + class.log_prob(h, x, y);
        }
        nml_walk(class, contexts, depth + 1, levels, acc);
    }
}

/// `max_{y ∈ {0,1}^T} [ Σ_t −ln q(y_t | ·) − min_f Σ_t −ln p_f(y_t | x_t) ]`
/// for a learner whose predictions do not depend on its RNG.
pub fn exhaustive_worst_regret<L: Learner + Clone>(
    learner: &L,
    class: &FiniteClass,
    contexts: &[usize],
) -> Result<f64> {
    class.check(contexts)?;
    let mut best = f64::NEG_INFINITY;
    let start = vec![0.0; class.len()];
    regret_walk(learner.clone(), class, contexts, 0, 0.0, &start, &mut best);
    Ok(best)
}

fn regret_walk<L: Learner + Clone>(
    learner: L,
    class: &FiniteClass,
    contexts: &[usize],
    depth: usize,
    learner_loss: f64,
    log_liks: &[f64],
    best: &mut f64,
) {
    if depth == contexts.len() {
        let best_fit = log_liks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        *best = best.max(learner_loss + best_fit);
        return;
    }
    let x = contexts[depth];
    let mut probe = learner.clone();
    let q = probe.predict(x, &mut GameRng::seed_from_u64(0));
    for y in 0..=1 {
        let mut next = learner.clone();
        next.update(x, y);
        let lls: Vec<f64> = log_liks
            .iter()
            .enumerate()
            .map(|(h, ll)| ll + class.log_prob(h, x, y))
            .collect();
        regret_walk(
            next,
            class,
            contexts,
            depth + 1,
            learner_loss - q.prob(y).ln(),
            &lls,
            best,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ContextUniverse;
    use crate::learners::{UniformLearner, VcMixture};
    use std::sync::Arc;

    #[test]
    fn half_class_normalises_to_zero() {
        let class = FiniteClass::new(vec![vec![0.5; 3]]).unwrap();
        assert!(nml_value(&class, &[0, 1, 2, 0, 1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_constants_give_ln2() {
        let class = FiniteClass::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let v = nml_value(&class, &[0, 1]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn permutation_invariance() {
        let class = FiniteClass::new(vec![
            vec![0.1, 0.7, 0.4],
            vec![0.8, 0.2, 0.5],
            vec![0.3, 0.3, 0.9],
        ])
        .unwrap();
        let a = nml_value(&class, &[0, 1, 2, 2, 1, 0, 0]).unwrap();
        let b = nml_value(&class, &[2, 0, 1, 0, 0, 2, 1]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn uniform_learner_regret_equals_nml_for_half_class() {
        let class = FiniteClass::new(vec![vec![0.5; 2]]).unwrap();
        let r = exhaustive_worst_regret(&UniformLearner, &class, &[0, 1, 1]).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn mixture_regret_above_nml() {
        let u = ContextUniverse::new(3).unwrap();
        let family = Arc::new(RegionFamily::threshold_grid(u));
        let hs = [
            Hypothesis::new(0, 0.2, 0.9).unwrap(),
            Hypothesis::new(1, 0.7, 0.1).unwrap(),
            Hypothesis::new(2, 0.5, 0.5).unwrap(),
        ];
        let class = FiniteClass::from_hypotheses(&family, &hs).unwrap();
        let mix = VcMixture::with_cover(family, vec![0, 1, 2]).unwrap();
        let contexts = [0, 2, 1, 1, 0, 2];
        let nml = nml_value(&class, &contexts).unwrap();
        let worst = exhaustive_worst_regret(&mix, &class, &contexts).unwrap();
        assert!(worst >= nml - 1e-9, "{worst} < {nml}");
    }

    #[test]
    fn rejects_oversize() {
        let class = FiniteClass::new(vec![vec![0.5; 2]]).unwrap();
        assert!(matches!(
            nml_value(&class, &[0; 23]),
            Err(Error::TooLarge(_))
        ));
        assert!(nml_value(&class, &[2]).is_err());
        assert!(FiniteClass::new(vec![vec![0.5], vec![0.5, 0.5]]).is_err());
        assert!(FiniteClass::new(vec![vec![1.5]]).is_err());
        assert!(FiniteClass::new(vec![]).is_err());
    }
}
