//! σ-smooth context distributions and the built-in adaptive adversaries.
//!
//! On a finite universe with uniform base measure, `D(A) ≤ μ(A)/σ` for all
//! sets holds iff it holds for singletons, so smoothness is checked as
//! `max_x D(x) ≤ 1/(σU)`.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{Adversary, ContextUniverse, Example, GameRng, Label, Learner, Prediction};
use crate::hypotheses::{Hypothesis, RegionFamily};

/// Absolute slack on both the normalisation and the singleton cap.
pub const SMOOTH_TOLERANCE: f64 = 1e-12;

/// Checks that `pmf` is a probability vector and σ-smooth w.r.t. uniform.
/// Reports the first offending coordinate.
pub fn validate_smooth(pmf: &[f64], sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::invalid(format!("sigma = {sigma} outside (0, 1]")));
    }
    if pmf.is_empty() {
        return Err(Error::InvalidDistribution("empty pmf".into()));
    }
    let cap = 1.0 / (sigma * pmf.len() as f64);
    let mut total = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {p} is not a probability"
            )));
        }
        if p > cap + SMOOTH_TOLERANCE {
            return Err(Error::NotSmooth {
                index: i,
                mass: p,
                cap,
                sigma,
            });
        }
        total += p;
    }
    if (total - 1.0).abs() > SMOOTH_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
    }
    Ok(())
}

/// Smallest support size a uniform-on-subset distribution may have.
pub fn min_support(universe: &ContextUniverse, sigma: f64) -> usize {
    let raw = sigma * universe.size() as f64;
    ((raw - 1e-9).ceil() as usize).clamp(1, universe.size())
}

/// A pmf over the universe certified σ-smooth at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothDistribution {
    pmf: Vec<f64>,
    sigma: f64,
}

impl SmoothDistribution {
    pub fn new(pmf: Vec<f64>, sigma: f64) -> Result<Self> {
        validate_smooth(&pmf, sigma)?;
        Ok(Self { pmf, sigma })
    }

    pub fn uniform(universe: &ContextUniverse) -> Self {
        Self {
            pmf: vec![universe.base_mass(); universe.size()],
            sigma: 1.0,
        }
    }

    /// Uniform on `support`; duplicates are rejected.
    pub fn uniform_on(universe: &ContextUniverse, support: &[usize], sigma: f64) -> Result<Self> {
        let mut pmf = vec![0.0; universe.size()];
        let mass = 1.0 / support.len() as f64;
        for &x in support {
            if !universe.contains(x) {
                return Err(Error::invalid(format!(
                    "support context {x} outside universe"
                )));
            }
            if pmf[x] != 0.0 {
                return Err(Error::invalid(format!("support lists context {x} twice")));
            }
            pmf[x] = mass;
        }
        Self::new(pmf, sigma)
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (x, &p) in self.pmf.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_positive = x;
                if u < acc {
                    return x;
                }
            }
        }
        last_positive
    }
}

/// How the support `S` of a subset-uniform adversary evolves.
#[derive(Debug, Clone, PartialEq)]
pub enum SubsetRule {
    /// Fixed support; `None` uses the first `⌈σU⌉` contexts.
    Static(Option<Vec<usize>>),
    /// Each round, the `⌈σU⌉` contexts where the learner's probe is most
    /// extreme (`|q − 1/2|` largest, ties to the lower index). Falls back to
    /// the least-visited contexts when the learner offers no probe.
    Adaptive,
}

#[derive(Debug, Clone)]
pub enum LabelRule {
    Greedy,
    Realizable {
        family: Arc<RegionFamily>,
        target: Hypothesis,
    },
    /// Replays the sequence cyclically.
    FixedSequence(Vec<Label>),
}

/// The label that maximises the instantaneous log-loss; ties go to 0.
pub fn greedy_label(q: Prediction) -> Label {
    if q.q1() >= 0.5 {
        0
    } else {
        1
    }
}

/// A `Bernoulli(f*(x))` draw.
pub fn realizable_label<R: Rng + ?Sized>(
    target: &Hypothesis,
    family: &RegionFamily,
    x: usize,
    rng: &mut R,
) -> Label {
    let p = target.evaluate(family, x).q1();
    Label::from(rng.gen::<f64>() < p)
}

/// Uniform on a subset of size at least `⌈σU⌉`, which is the most
/// concentrated shape a σ-smooth distribution can take.
#[derive(Debug, Clone)]
pub struct SubsetSmoothAdversary {
    universe: ContextUniverse,
    sigma: f64,
    support_size: usize,
    rule: SubsetRule,
    labels: LabelRule,
    visits: Vec<u64>,
}

impl SubsetSmoothAdversary {
    pub fn new(
        universe: ContextUniverse,
        sigma: f64,
        rule: SubsetRule,
        labels: LabelRule,
    ) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::invalid(format!("sigma = {sigma} outside (0, 1]")));
        }
        let support_size = min_support(&universe, sigma);
        let rule = match rule {
            SubsetRule::Static(Some(set)) => {
                if set.len() < support_size {
                    return Err(Error::invalid(format!(
                        "static support has {} contexts, σ = {sigma} on U = {} needs at least {support_size}",
                        set.len(),
                        universe.size()
                    )));
                }
                // Validates membership and duplicates.
                SmoothDistribution::uniform_on(&universe, &set, sigma)?;
                SubsetRule::Static(Some(set))
            }
            SubsetRule::Static(None) => SubsetRule::Static(Some((0..support_size).collect())),
            SubsetRule::Adaptive => SubsetRule::Adaptive,
        };
        if let LabelRule::FixedSequence(seq) = &labels {
            if seq.is_empty() || seq.iter().any(|&y| y > 1) {
                return Err(Error::invalid(
                    "fixed label sequence must be non-empty and binary",
                ));
            }
        }
        Ok(Self {
            universe,
            sigma,
            support_size,
            rule,
            labels,
            visits: vec![0; universe.size()],
        })
    }

    pub fn support_size(&self) -> usize {
        self.support_size
    }

    fn adaptive_support(&self, learner: &dyn Learner) -> Vec<usize> {
        let u = self.universe.size();
        let probes: Option<Vec<f64>> = (0..u).map(|x| learner.probe(x)).collect();
        let mut order: Vec<usize> = (0..u).collect();
        match probes {
            Some(q) => {
                let score: Vec<f64> = q.iter().map(|p| (p - 0.5).abs()).collect();
                order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
            }
            None => order.sort_by(|&a, &b| self.visits[a].cmp(&self.visits[b]).then(a.cmp(&b))),
        }
        order.truncate(self.support_size);
        order.sort_unstable();
        order
    }
}

impl Adversary for SubsetSmoothAdversary {
    fn id(&self) -> String {
        let rule = match self.rule {
            SubsetRule::Static(_) => "static",
            SubsetRule::Adaptive => "adaptive",
        };
        let labels = match self.labels {
            LabelRule::Greedy => "greedy",
            LabelRule::Realizable { .. } => "realizable",
            LabelRule::FixedSequence(_) => "fixed_sequence",
        };
        format!("subset_uniform[{rule},sigma={}]/{labels}", self.sigma)
    }

    fn sigma(&self) -> f64 {
        self.sigma
    }

    fn context_distribution(
        &mut self,
        history: &[Example],
        learner: &dyn Learner,
    ) -> Result<SmoothDistribution> {
        if let Some(last) = history.last() {
            self.visits[last.x] += 1;
        }
        match &self.rule {
            SubsetRule::Static(Some(set)) => {
                SmoothDistribution::uniform_on(&self.universe, set, self.sigma)
            }
            SubsetRule::Static(None) => unreachable!("resolved in constructor"),
            SubsetRule::Adaptive => {
                let support = self.adaptive_support(learner);
                SmoothDistribution::uniform_on(&self.universe, &support, self.sigma)
            }
        }
    }

    fn label(
        &mut self,
        history: &[Example],
        x: usize,
        prediction: Prediction,
        rng: &mut GameRng,
    ) -> Label {
        match &self.labels {
            LabelRule::Greedy => greedy_label(prediction),
            LabelRule::Realizable { family, target } => realizable_label(target, family, x, rng),
            LabelRule::FixedSequence(seq) => seq[history.len() % seq.len()],
        }
    }
}
