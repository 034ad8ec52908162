//! Monte Carlo Rademacher complexity of the truncated class `F_α`.
//!
//! For fixed signs the inner supremum is exact: the objective is linear in
//! `(θ0, θ1)`, so each side picks θ ∈ {0, 1} and a region scores
//! `max(0, S_in) + max(0, S_out)`. Truncation is affine, giving
//! `sup_{F_α} = (sup_F + α·Σε)/(1+2α)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypotheses::{FamilyKind, RegionFamily};

/// Random context sequences tried in addition to the round-robin pattern.
pub const RANDOM_CANDIDATES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub sample_size: usize,
    /// 0 is the round-robin pattern, `1..` the random candidates.
    pub worst_candidate: usize,
}

/// `E_ε[ sup_{F_α} (1/T) Σ ε_i f(x_i) ]` on a fixed sample, estimated from
/// `sign_draws` sign vectors. Returns `(mean, standard error)`.
pub fn rademacher_on_sample<R: Rng + ?Sized>(
    family: &RegionFamily,
    alpha: f64,
    xs: &[usize],
    sign_draws: usize,
    rng: &mut R,
) -> (f64, f64) {
    let u = family.universe().size();
    let t = xs.len() as f64;
    let mut per_context = vec![0i64; u];
    let mut values = Vec::with_capacity(sign_draws);
    for _ in 0..sign_draws {
        per_context.iter_mut().for_each(|s| *s = 0);
        let mut total = 0i64;
        for &x in xs {
            let e = if rng.gen::<bool>() { 1 } else { -1 };
            per_context[x] += e;
            total += e;
        }
        let sup = sup_over_regions(family, &per_context, total) as f64;
        values.push((sup + alpha * total as f64) / (1.0 + 2.0 * alpha) / t);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

fn sup_over_regions(family: &RegionFamily, per_context: &[i64], total: i64) -> i64 {
    let score = |inside: i64| inside.max(0) + (total - inside).max(0);
    match family.kind() {
        FamilyKind::ThresholdGrid => {
            let mut inside = 0;
            let mut best = i64::MIN;
            for &s in per_context {
                inside += s;
                best = best.max(score(inside));
            }
            best
        }
        FamilyKind::Explicit => (0..family.len())
            .map(|r| {
                let inside: i64 = per_context
                    .iter()
                    .enumerate()
                    .filter(|(x, _)| family.contains(r, *x))
                    .map(|(_, s)| s)
                    .sum();
                score(inside)
            })
            .max()
            .expect("family is non-empty"),
    }
}

/// Approximates the worst-case sample by trying the round-robin pattern
/// `x_i = i mod U` and [`RANDOM_CANDIDATES`] uniform sequences, with
/// `mc_rounds` sign draws each. Reports the largest estimate.
pub fn rademacher_estimate<R: Rng + ?Sized>(
    family: &RegionFamily,
    alpha: f64,
    sample_size: usize,
    mc_rounds: usize,
    rng: &mut R,
) -> Result<RademacherEstimate> {
    if sample_size == 0 {
        return Err(Error::invalid("rademacher sample size must be at least 1"));
    }
    if mc_rounds == 0 {
        return Err(Error::invalid("rademacher needs at least one sign draw"));
    }
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0, 1/2), got {alpha}"
        )));
    }
    let u = family.universe().size();
    let round_robin: Vec<usize> = (0..sample_size).map(|i| i % u).collect();
    let mut best = {
        let (mean, se) = rademacher_on_sample(family, alpha, &round_robin, mc_rounds, rng);
        RademacherEstimate {
            mean,
            std_error: se,
            sample_size,
            worst_candidate: 0,
        }
    };
    for c in 1..=RANDOM_CANDIDATES {
        let xs: Vec<usize> = (0..sample_size).map(|_| rng.gen_range(0..u)).collect();
        let (mean, se) = rademacher_on_sample(family, alpha, &xs, mc_rounds, rng);
        if mean > best.mean {
            best = RademacherEstimate {
                mean,
                std_error: se,
                sample_size,
                worst_candidate: c,
            };
        }
    }
    Ok(best)
}
