//! Quantities from the regret analysis, made executable: the χ² stability
//! term, Rademacher complexity of the truncated class, the perturbed-leader
//! regret bound, and the NML value on fixed contexts.

mod bound;
mod chi_square;
mod nml;
mod rademacher;

pub use bound::{bound_bracket, theorem_bound, BoundInputs, BoundReport, BLOCK_GRID_POINTS};
pub use chi_square::{
    chi_square_bruteforce, chi_square_closed_form, BruteForceChiSquare, ChiSquareReport,
    MAX_BRUTE_RATE, MAX_BRUTE_UNIVERSE,
};
pub use nml::{
    exhaustive_worst_regret, nml_value, FiniteClass, MAX_NML_HORIZON, MAX_NML_HYPOTHESES,
};
pub use rademacher::{
    rademacher_estimate, rademacher_on_sample, RademacherEstimate, RANDOM_CANDIDATES,
};
