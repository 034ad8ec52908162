//! Sequential probability assignment under the logarithmic loss against
//! σ-smooth adaptive adversaries on a finite context universe.
//!
//! The crate is organised around the interaction loop in [`game`]:
//! an adversary emits a smooth context distribution, a context is drawn,
//! the learner assigns a probability to label 1 and the adversary then
//! picks the label. Learners live in [`learners`] (perturbed-leader with an
//! MLE oracle, the exact Beta mixture over an ε-cover of regions, KT and the
//! uniform baseline). [`hypotheses`] holds the region-indexed class and its
//! MLE oracle, [`coupling`] the rejection coupling for smooth distributions,
//! [`diagnostics`] the χ², Rademacher, bound and NML quantities, and
//! [`harness`] the seeded sweep runner behind the `smoothpa` CLI.

pub mod adversary;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod game;
pub mod harness;
pub mod hypotheses;
pub mod learners;
mod numeric;

pub use error::{Error, Result};
pub use game::{ContextUniverse, Example, Label, Prediction, RegretRecord};
