//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "universe": 64,
//!   "family": {"kind": "threshold_grid", "size": 64},
//!   "learners": [{"vc_mixture": {}}, {"ftpl": {"n": {"t_exponent": 0.8, "round": true}, "alpha": 0.01}}],
//!   "adversary": {"context": "subset_uniform", "rule": "adaptive"},
//!   "labels": {"label": "greedy"},
//!   "horizon": 1024,
//!   "sigma": 0.1,
//!   "repetitions": 5,
//!   "seed": 7,
//!   "sweep": {"horizon": [256, 512, 1024], "sigma": [0.05, 0.2]}
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{FamilySpec, Hypothesis};

/// A parameter that is either a constant or `scale · T^a · σ^b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Fixed(f64),
    Power {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        t_exponent: f64,
        #[serde(default)]
        sigma_exponent: f64,
        #[serde(default)]
        round: bool,
    },
}

fn one() -> f64 {
    1.0
}

impl Schedule {
    pub fn eval(&self, horizon: usize, sigma: f64) -> f64 {
        match *self {
            Schedule::Fixed(v) => v,
            Schedule::Power {
                scale,
                t_exponent,
                sigma_exponent,
                round,
            } => {
                let v = scale * (horizon as f64).powf(t_exponent) * sigma.powf(sigma_exponent);
                if round {
                    v.round()
                } else {
                    v
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    Ftpl {
        n: Schedule,
        alpha: Schedule,
    },
    VcMixture {
        /// Defaults to `σ/T²`.
        #[serde(default)]
        eps: Option<Schedule>,
    },
    Kt {
        #[serde(default = "half")]
        beta: f64,
    },
    Uniform {},
}

fn half() -> f64 {
    0.5
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Ftpl { .. } => "ftpl",
            LearnerSpec::VcMixture { .. } => "vc_mixture",
            LearnerSpec::Kt { .. } => "kt",
            LearnerSpec::Uniform {} => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    SubsetUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Static,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub context: ContextKind,
    /// Overrides the top-level σ when no σ sweep is configured.
    #[serde(default)]
    pub sigma: Option<f64>,
    pub rule: RuleKind,
    /// Support for the static rule; defaults to the first `⌈σU⌉` contexts.
    #[serde(default)]
    pub set: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "snake_case", deny_unknown_fields)]
pub enum LabelSpec {
    #[default]
    Greedy,
    Realizable {
        target: Hypothesis,
    },
    FixedSequence {
        sequence: Vec<u8>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub horizon: Option<Vec<usize>>,
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub universe: usize,
    /// Defaults to the threshold grid on the universe.
    #[serde(default)]
    pub family: Option<FamilySpec>,
    pub learners: Vec<LearnerSpec>,
    pub adversary: AdversarySpec,
    #[serde(default)]
    pub labels: LabelSpec,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default = "one_rep")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sweep: SweepAxes,
}

fn one_rep() -> usize {
    1
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the JSON path of the culprit.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path.is_empty() { "." } else { &path },
                e.into_inner().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn horizons(&self) -> Vec<usize> {
        match (&self.sweep.horizon, self.horizon) {
            (Some(h), _) => h.clone(),
            (None, Some(h)) => vec![h],
            (None, None) => Vec::new(),
        }
    }

    pub fn sigmas(&self) -> Vec<f64> {
        match (&self.sweep.sigma, self.sigma, self.adversary.sigma) {
            (Some(s), _, _) => s.clone(),
            (None, Some(s), _) => vec![s],
            (None, None, Some(s)) => vec![s],
            (None, None, None) => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.universe == 0 {
            return Err(Error::config("universe", "must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        if self.learners.is_empty() {
            return Err(Error::config(
                "learners",
                "at least one learner is required",
            ));
        }
        if let Some(spec) = &self.family {
            let fam = crate::hypotheses::RegionFamily::from_spec(spec)
                .map_err(|e| Error::config("family", e.to_string()))?;
            if fam.universe().size() != self.universe {
                return Err(Error::config(
                    "family",
                    format!(
                        "family universe {} differs from universe {}",
                        fam.universe().size(),
                        self.universe
                    ),
                ));
            }
        }
        let horizons = self.horizons();
        if horizons.is_empty() {
            return Err(Error::config("horizon", "set horizon or sweep.horizon"));
        }
        let hpath = if self.sweep.horizon.is_some() {
            "sweep.horizon"
        } else {
            "horizon"
        };
        for (i, &t) in horizons.iter().enumerate() {
            if t == 0 {
                return Err(Error::config(
                    format!("{hpath}[{i}]"),
                    "horizon must be at least 1",
                ));
            }
        }
        if self.sweep.sigma.is_some() && (self.adversary.sigma.is_some() || self.sigma.is_some()) {
            return Err(Error::config("sweep.sigma", "conflicts with a fixed sigma"));
        }
        if let (Some(a), Some(b)) = (self.sigma, self.adversary.sigma) {
            if a != b {
                return Err(Error::config(
                    "adversary.sigma",
                    format!("{b} differs from sigma = {a}"),
                ));
            }
        }
        let sigmas = self.sigmas();
        if sigmas.is_empty() {
            return Err(Error::config(
                "sigma",
                "set sigma, adversary.sigma or sweep.sigma",
            ));
        }
        let spath = if self.sweep.sigma.is_some() {
            "sweep.sigma"
        } else if self.sigma.is_some() {
            "sigma"
        } else {
            "adversary.sigma"
        };
        for (i, &s) in sigmas.iter().enumerate() {
            if !(s > 0.0 && s <= 1.0) {
                let path = if self.sweep.sigma.is_some() {
                    format!("{spath}[{i}]")
                } else {
                    spath.to_string()
                };
                return Err(Error::config(path, format!("{s} outside (0, 1]")));
            }
        }
        if let LabelSpec::FixedSequence { sequence } = &self.labels {
            if sequence.is_empty() || sequence.iter().any(|&y| y > 1) {
                return Err(Error::config(
                    "labels.sequence",
                    "must be a non-empty list of 0/1",
                ));
            }
        }
        if let LabelSpec::Realizable { target } = &self.labels {
            if !(0.0..=1.0).contains(&target.theta0) || !(0.0..=1.0).contains(&target.theta1) {
                return Err(Error::config("labels.target", "thetas must lie in [0, 1]"));
            }
        }
        for (i, l) in self.learners.iter().enumerate() {
            if let LearnerSpec::Kt { beta } = l {
                if beta.is_nan() || *beta <= 0.0 {
                    return Err(Error::config(
                        format!("learners[{i}].kt.beta"),
                        "must be positive",
                    ));
                }
            }
            // Schedules are checked on every cell they will be evaluated at.
            for &t in &horizons {
                for &s in &sigmas {
                    check_learner_cell(l, t, s)
                        .map_err(|m| Error::config(format!("learners[{i}].{}", m.0), m.1))?;
                }
            }
        }
        Ok(())
    }
}

fn check_learner_cell(
    l: &LearnerSpec,
    t: usize,
    s: f64,
) -> std::result::Result<(), (String, String)> {
    match l {
        LearnerSpec::Ftpl { n, alpha } => {
            let nv = n.eval(t, s);
            if !(nv >= 0.0 && nv.is_finite()) {
                return Err((
                    "ftpl.n".into(),
                    format!("evaluates to {nv} at T={t}, σ={s}"),
                ));
            }
            let av = alpha.eval(t, s);
            if !(av > 0.0 && av < 0.5) {
                return Err((
                    "ftpl.alpha".into(),
                    format!("evaluates to {av} at T={t}, σ={s}; need (0, 1/2)"),
                ));
            }
        }
        LearnerSpec::VcMixture { eps: Some(e) } => {
            let ev = e.eval(t, s);
            if ev.is_nan() || ev <= 0.0 {
                return Err((
                    "vc_mixture.eps".into(),
                    format!("evaluates to {ev} at T={t}, σ={s}"),
                ));
            }
        }
        _ => {}
    }
    Ok(())
}
