//! Context universe, log-loss, the interaction loop and regret bookkeeping.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{validate_smooth, SmoothDistribution};
use crate::error::{Error, Result};

/// Random source used by every seeded component. ChaCha output is stable
/// across platforms and crate versions, which the determinism contract needs.
pub type GameRng = ChaCha8Rng;

/// Binary label, always 0 or 1.
pub type Label = u8;

/// Finite context space `{0, …, U−1}` with the uniform base measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextUniverse {
    size: usize,
}

impl ContextUniverse {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("universe size must be at least 1"));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Base measure of a single context.
    pub fn base_mass(&self) -> f64 {
        1.0 / self.size as f64
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub x: usize,
    pub y: Label,
}

impl Example {
    pub fn new(universe: &ContextUniverse, x: usize, y: Label) -> Result<Self> {
        if !universe.contains(x) {
            return Err(Error::invalid(format!(
                "context {x} outside universe of size {}",
                universe.size()
            )));
        }
        if y > 1 {
            return Err(Error::invalid(format!("label must be 0 or 1, got {y}")));
        }
        Ok(Self { x, y })
    }
}

/// Probability assigned to label 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Prediction {
    q1: f64,
}

impl Prediction {
    pub fn new(q1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q1) {
            return Err(Error::invalid(format!("prediction {q1} outside [0, 1]")));
        }
        Ok(Self { q1 })
    }

    /// Constructs without validation; callers guarantee `q1 ∈ [0, 1]`.
    pub(crate) fn from_unchecked(q1: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&q1), "prediction {q1} out of range");
        Self { q1 }
    }

    pub fn uniform() -> Self {
        Self { q1: 0.5 }
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    /// Probability assigned to `y`.
    pub fn prob(&self, y: Label) -> f64 {
        if y == 1 {
            self.q1
        } else {
            1.0 - self.q1
        }
    }
}

/// `−ln q(y)` in nats.
///
/// A deterministic prediction contradicted by the label is reported as
/// [`Error::InfiniteLoss`] instead of returning `+inf`.
pub fn log_loss(q: Prediction, y: Label) -> Result<f64> {
    let p = q.prob(y);
    if p <= 0.0 {
        return Err(Error::InfiniteLoss { q1: q.q1, label: y });
    }
    Ok(-p.ln())
}

/// A sequential probability assignment strategy.
pub trait Learner {
    fn id(&self) -> String;

    /// Probability of label 1 at context `x` given everything passed to
    /// [`Learner::update`] so far. `rng` is the learner's private stream.
    fn predict(&mut self, x: usize, rng: &mut GameRng) -> Prediction;

    fn update(&mut self, x: usize, y: Label);

    /// Deterministic view of the learner's current belief at `x`, used by
    /// adaptive adversaries. Randomised learners may report their
    /// unperturbed leader; `None` means no view is available.
    fn probe(&self, _x: usize) -> Option<f64> {
        None
    }
}

/// A σ-smooth adaptive adversary: a context rule and a label rule.
pub trait Adversary {
    fn id(&self) -> String;

    fn sigma(&self) -> f64;

    fn context_distribution(
        &mut self,
        history: &[Example],
        learner: &dyn Learner,
    ) -> Result<SmoothDistribution>;

    /// Chooses `y_t` after seeing the learner's prediction at `x`.
    fn label(
        &mut self,
        history: &[Example],
        x: usize,
        prediction: Prediction,
        rng: &mut GameRng,
    ) -> Label;
}

/// One round of a trajectory, with running totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub run_id: String,
    pub seed: u64,
    pub t: usize,
    pub learner_loss: f64,
    pub cum_learner_loss: f64,
    pub cum_comparator_loss: f64,
    pub cum_regret: f64,
    pub learner: Arc<str>,
    pub adversary: Arc<str>,
}

pub const CSV_HEADER: &str =
    "run_id,seed,t,learner_loss,cum_learner_loss,cum_comparator_loss,cum_regret";

impl RegretRecord {
    pub fn csv_row(&self) -> String {
        use crate::numeric::format_sig12 as g;
        format!(
            "{},{},{},{},{},{},{}",
            self.run_id,
            self.seed,
            self.t,
            g(self.learner_loss),
            g(self.cum_learner_loss),
            g(self.cum_comparator_loss),
            g(self.cum_regret)
        )
    }
}

/// Everything a single trajectory produced.
#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub records: Vec<RegretRecord>,
    pub examples: Vec<Example>,
    pub predictions: Vec<Prediction>,
    pub distributions_checked: usize,
}

impl GameOutcome {
    pub fn total_learner_loss(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_learner_loss)
    }
}

const CONTEXT_STREAM: u64 = 0;
const LEARNER_STREAM: u64 = 1;
const ADVERSARY_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> GameRng {
    let mut rng = GameRng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Plays `horizon` rounds. Context draws, learner randomness and adversary
/// randomness use separate ChaCha streams derived from `seed`.
///
/// Every emitted distribution is re-validated against the adversary's σ;
/// a failure aborts with [`Error::NumericalAssertion`]. Comparator columns
/// are left at zero; see [`fill_comparator`].
pub fn play_game(
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    universe: &ContextUniverse,
    horizon: usize,
    seed: u64,
) -> Result<GameOutcome> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut context_rng = stream(seed, CONTEXT_STREAM);
    let mut learner_rng = stream(seed, LEARNER_STREAM);
    let mut adversary_rng = stream(seed, ADVERSARY_STREAM);

    let learner_id: Arc<str> = learner.id().into();
    let adversary_id: Arc<str> = adversary.id().into();
    let sigma = adversary.sigma();

    let mut examples = Vec::with_capacity(horizon);
    let mut predictions = Vec::with_capacity(horizon);
    let mut records = Vec::with_capacity(horizon);
    let mut cum = 0.0;

    for t in 1..=horizon {
        let dist = adversary.context_distribution(&examples, &*learner)?;
        if dist.len() != universe.size() {
            return Err(Error::NumericalAssertion(format!(
                "round {t}: distribution over {} contexts, universe has {}",
                dist.len(),
                universe.size()
            )));
        }
        validate_smooth(dist.pmf(), sigma).map_err(|e| {
            Error::NumericalAssertion(format!(
                "round {t}: adversary emitted a non-smooth distribution: {e}"
            ))
        })?;
        let x = dist.sample(&mut context_rng);
        let q = learner.predict(x, &mut learner_rng);
        let y = adversary.label(&examples, x, q, &mut adversary_rng);
        let loss = log_loss(q, y)?;
        learner.update(x, y);
        cum += loss;
        examples.push(Example { x, y });
        predictions.push(q);
        records.push(RegretRecord {
            run_id: seed.to_string(),
            seed,
            t,
            learner_loss: loss,
            cum_learner_loss: cum,
            cum_comparator_loss: 0.0,
            cum_regret: cum,
            learner: learner_id.clone(),
            adversary: adversary_id.clone(),
        });
    }

    Ok(GameOutcome {
        records,
        examples,
        predictions,
        distributions_checked: horizon,
    })
}

/// `Σ learner losses − comparator_loss`.
pub fn regret_against(records: &[RegretRecord], comparator_loss: f64) -> f64 {
    let learner: f64 = records.iter().map(|r| r.learner_loss).sum();
    learner - comparator_loss
}

/// Writes per-round comparator losses into the cumulative columns.
///
/// `per_round` must have one entry per record, typically the losses of the
/// offline best hypothesis on the realized sequence.
pub fn fill_comparator(records: &mut [RegretRecord], per_round: &[f64]) -> Result<()> {
    if records.len() != per_round.len() {
        return Err(Error::invalid(format!(
            "{} records but {} comparator losses",
            records.len(),
            per_round.len()
        )));
    }
    let mut cum = 0.0;
    for (r, c) in records.iter_mut().zip(per_round) {
        cum += c;
        r.cum_comparator_loss = cum;
        r.cum_regret = r.cum_learner_loss - cum;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{LabelRule, SubsetRule, SubsetSmoothAdversary};
    use crate::learners::UniformLearner;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn log_loss_examples() {
        let half = Prediction::new(0.5).unwrap();
        assert!((log_loss(half, 1).unwrap() - LN2).abs() < 1e-15);
        assert_eq!(log_loss(Prediction::new(1.0).unwrap(), 1).unwrap(), 0.0);
        // −ln(0.75)
        let v = log_loss(Prediction::new(0.25).unwrap(), 0).unwrap();
        assert!((v - 0.287_682_072_451_780_9).abs() < 1e-15);
    }

    #[test]
    fn log_loss_rejects_contradicted_certainty() {
        assert!(matches!(
            log_loss(Prediction::new(1.0).unwrap(), 0),
            Err(Error::InfiniteLoss { label: 0, .. })
        ));
        assert!(matches!(
            log_loss(Prediction::new(0.0).unwrap(), 1),
            Err(Error::InfiniteLoss { .. })
        ));
        assert_eq!(log_loss(Prediction::new(0.0).unwrap(), 0).unwrap(), 0.0);
    }

    #[test]
    fn prediction_range_checked() {
        assert!(Prediction::new(1.1).is_err());
        assert!(Prediction::new(-0.1).is_err());
        assert!(Prediction::new(f64::NAN).is_err());
    }

    #[test]
    fn universe_and_example_validation() {
        assert!(ContextUniverse::new(0).is_err());
        let u = ContextUniverse::new(4).unwrap();
        assert_eq!(u.base_mass(), 0.25);
        assert!(Example::new(&u, 4, 0).is_err());
        assert!(Example::new(&u, 3, 2).is_err());
        assert!(Example::new(&u, 3, 1).is_ok());
    }

    fn greedy_static(u: &ContextUniverse, sigma: f64) -> SubsetSmoothAdversary {
        SubsetSmoothAdversary::new(*u, sigma, SubsetRule::Static(None), LabelRule::Greedy).unwrap()
    }

    #[test]
    fn uniform_learner_pays_ln2_every_round() {
        let u = ContextUniverse::new(8).unwrap();
        let mut learner = UniformLearner;
        let mut adv = greedy_static(&u, 0.5);
        let out = play_game(&mut learner, &mut adv, &u, 10, 7).unwrap();
        assert_eq!(out.records.len(), 10);
        for r in &out.records {
            assert!((r.learner_loss - LN2).abs() < 1e-15);
        }
        assert!((out.total_learner_loss() - 10.0 * LN2).abs() < 1e-12);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let u = ContextUniverse::new(16).unwrap();
        let family = std::sync::Arc::new(crate::hypotheses::RegionFamily::threshold_grid(u));
        let run = |seed| {
            let mut learner = crate::learners::FtplLearner::new(
                crate::learners::FtplConfig::new(20.0, 0.05).unwrap(),
                family.clone(),
            );
            let mut adv =
                SubsetSmoothAdversary::new(u, 0.25, SubsetRule::Adaptive, LabelRule::Greedy)
                    .unwrap();
            play_game(&mut learner, &mut adv, &u, 50, seed)
                .unwrap()
                .records
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    struct Fixed(f64);
    impl Learner for Fixed {
        fn id(&self) -> String {
            "fixed".into()
        }
        fn predict(&mut self, _x: usize, _rng: &mut GameRng) -> Prediction {
            Prediction::new(self.0).unwrap()
        }
        fn update(&mut self, _x: usize, _y: Label) {}
    }

    #[test]
    fn greedy_adversary_picks_unlikely_label() {
        let u = ContextUniverse::new(4).unwrap();
        let mut adv = greedy_static(&u, 1.0);
        let out = play_game(&mut Fixed(0.9), &mut adv, &u, 1, 0).unwrap();
        assert_eq!(out.examples[0].y, 0);
        // −ln(0.1)
        assert!((out.records[0].learner_loss - std::f64::consts::LN_10).abs() < 1e-12);
    }

    #[test]
    fn certain_wrong_learner_propagates_infinite_loss() {
        let u = ContextUniverse::new(4).unwrap();
        let mut adv = greedy_static(&u, 1.0);
        assert!(matches!(
            play_game(&mut Fixed(1.0), &mut adv, &u, 3, 0),
            Err(Error::InfiniteLoss { .. })
        ));
        assert!(play_game(&mut Fixed(0.5), &mut adv, &u, 0, 0).is_err());
    }

    #[test]
    fn regret_subtraction() {
        let mk = |loss: f64| RegretRecord {
            run_id: String::new(),
            seed: 0,
            t: 1,
            learner_loss: loss,
            cum_learner_loss: loss,
            cum_comparator_loss: 0.0,
            cum_regret: loss,
            learner: "a".into(),
            adversary: "b".into(),
        };
        let recs = vec![mk(4.0), mk(6.0)];
        assert_eq!(regret_against(&recs, 7.5), 2.5);
        assert_eq!(regret_against(&recs, 10.0), 0.0);
    }

    #[test]
    fn regret_against_brute_force_threshold_comparator() {
        use crate::hypotheses::{offline_best_loss, RegionFamily};
        let u = ContextUniverse::new(4).unwrap();
        let family = RegionFamily::threshold_grid(u);
        let mut adv = greedy_static(&u, 1.0);
        let out = play_game(&mut Fixed(0.7), &mut adv, &u, 3, 11).unwrap();

        // Brute force: every threshold and θ on a fine grid.
        let mut best = f64::INFINITY;
        for a in 0..4 {
            for i in 0..=1000 {
                for j in 0..=1000 {
                    let (t0, t1) = (i as f64 / 1000.0, j as f64 / 1000.0);
                    let mut loss = 0.0;
                    for e in &out.examples {
                        let p = if e.x <= a { t0 } else { t1 };
                        let pe = if e.y == 1 { p } else { 1.0 - p };
                        loss -= pe.ln();
                    }
                    best = best.min(loss);
                }
            }
        }
        let exact = offline_best_loss(&out.examples, &family);
        assert!(exact <= best + 1e-12);
        assert!(best - exact < 1e-3);
        let r = regret_against(&out.records, exact);
        assert!((r - (out.total_learner_loss() - exact)).abs() < 1e-12);
    }

    #[test]
    fn fill_comparator_keeps_bookkeeping_identity() {
        let u = ContextUniverse::new(8).unwrap();
        let mut adv = greedy_static(&u, 0.5);
        let mut out = play_game(&mut UniformLearner, &mut adv, &u, 20, 1).unwrap();
        let per_round = vec![0.1; 20];
        fill_comparator(&mut out.records, &per_round).unwrap();
        let last = out.records.last().unwrap();
        assert!((last.cum_comparator_loss - 2.0).abs() < 1e-12);
        assert!(
            (last.cum_learner_loss - (last.cum_regret + last.cum_comparator_loss)).abs() < 1e-12
        );
        assert!(fill_comparator(&mut out.records, &[0.0]).is_err());
    }
}
