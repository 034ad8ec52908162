//! χ² divergence between the count-vector law of the hallucinated sample
//! before and after one adversarial example.
//!
//! Under Poissonisation the label-`y` counts at each context are i.i.d.
//! `Poisson(n/2U)`. The adversary draws `x* ∼ D` and adds one to the count
//! at `(x*, y(x*))`, so the shifted law is a mixture and Ingster's identity
//! gives `χ² = (2U/n)·Σ_x D(x)²`, which σ-smoothness caps at `2/(σn)`.

use serde::Serialize;

use crate::adversary::SmoothDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub closed_form: f64,
    pub brute_force: Option<f64>,
    pub bound: f64,
    /// Probability mass the brute-force enumeration did not visit.
    pub discarded_mass: Option<f64>,
}

/// `(2U/n)·Σ D(x)²` together with the smoothness bound `2/(σn)`.
pub fn chi_square_closed_form(d: &SmoothDistribution, n_rate: f64) -> Result<ChiSquareReport> {
    if !(n_rate > 0.0 && n_rate.is_finite()) {
        return Err(Error::invalid(format!(
            "n_rate must be positive, got {n_rate}"
        )));
    }
    let u = d.len() as f64;
    let collision: f64 = d.pmf().iter().map(|p| p * p).sum();
    Ok(ChiSquareReport {
        closed_form: 2.0 * u / n_rate * collision,
        brute_force: None,
        bound: 2.0 / (d.sigma() * n_rate),
        discarded_mass: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForceChiSquare {
    /// `Σ Q²/P − 1` over the enumerated support.
    pub value: f64,
    pub discarded_mass: f64,
    pub support_points: usize,
}

pub const MAX_BRUTE_UNIVERSE: usize = 4;
pub const MAX_BRUTE_RATE: f64 = 10.0;
const MAX_BRUTE_POINTS: usize = 20_000_000;

/// Enumerates count vectors and sums `Q²/P` directly.
///
/// The adversary's label rule is fixed to `y(x) ≡ 1`. The label-0 counts
/// are never shifted, so `P` and `Q` share the same product factor over
/// them; that factor sums to one and is left out of the enumeration. Each
/// label-1 coordinate ranges over the counts whose Poisson mass exceeds
/// `cutoff`.
pub fn chi_square_bruteforce(
    d: &SmoothDistribution,
    n_rate: f64,
    cutoff: f64,
) -> Result<BruteForceChiSquare> {
    let u = d.len();
    if u > MAX_BRUTE_UNIVERSE {
        return Err(Error::TooLarge(format!(
            "brute-force χ² needs U ≤ {MAX_BRUTE_UNIVERSE}, got {u}"
        )));
    }
    if !(n_rate > 0.0 && n_rate <= MAX_BRUTE_RATE) {
        return Err(Error::TooLarge(format!(
            "brute-force χ² needs 0 < n ≤ {MAX_BRUTE_RATE}, got {n_rate}"
        )));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::invalid(format!(
            "cutoff must lie in (0, 1), got {cutoff}"
        )));
    }
    let lambda = n_rate / (2.0 * u as f64);
    let pmf = poisson_pmf_above(lambda, cutoff);
    let (lo, width) = (pmf.0, pmf.1.len());
    let points = width
        .checked_pow(u as u32)
        .filter(|&p| p <= MAX_BRUTE_POINTS)
        .ok_or_else(|| Error::TooLarge(format!("{width}^{u} count vectors")))?;

    // Mass at count c (absolute), zero outside the kept window.
    let mass = |c: i64| -> f64 {
        let i = c - lo as i64;
        if i < 0 || i as usize >= width {
            0.0
        } else {
            pmf.1[i as usize]
        }
    };
    let full_mass = |c: i64| -> f64 {
        if c < 0 {
            0.0
        } else {
            poisson_pmf(lambda, c as u64)
        }
    };

    let mut counts = vec![0i64; u];
    let (mut sum_ratio, mut p_total, mut q_total) = (0.0, 0.0, 0.0);
    for idx in 0..points {
        let mut rest = idx;
        for c in counts.iter_mut() {
            *c = lo as i64 + (rest % width) as i64;
            rest /= width;
        }
        let p: f64 = counts.iter().map(|&c| mass(c)).product();
        // Q = Σ_x D(x)·pmf(c_x − 1)·Π_{x'≠x} pmf(c_x').
        let mut q = 0.0;
        for (x, &dx) in d.pmf().iter().enumerate() {
            if dx == 0.0 {
                continue;
            }
            let mut term = dx;
            for (x2, &c) in counts.iter().enumerate() {
                term *= if x2 == x { full_mass(c - 1) } else { mass(c) };
            }
            q += term;
        }
        p_total += p;
        q_total += q;
        if p > 0.0 {
            sum_ratio += q * q / p;
        }
    }
    Ok(BruteForceChiSquare {
        value: sum_ratio - 1.0,
        discarded_mass: (1.0 - p_total).max(1.0 - q_total).max(0.0),
        support_points: points,
    })
}

fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    let ln = -lambda + k as f64 * lambda.ln() - statrs::function::factorial::ln_factorial(k);
    ln.exp()
}

/// Contiguous window `[lo, lo + len)` of counts with mass above `cutoff`.
fn poisson_pmf_above(lambda: f64, cutoff: f64) -> (u64, Vec<f64>) {
    let mode = lambda.floor() as u64;
    let mut lo = mode;
    while lo > 0 && poisson_pmf(lambda, lo - 1) > cutoff {
        lo -= 1;
    }
    let mut hi = mode;
    while poisson_pmf(lambda, hi + 1) > cutoff {
        hi += 1;
    }
    (lo, (lo..=hi).map(|k| poisson_pmf(lambda, k)).collect())
}
