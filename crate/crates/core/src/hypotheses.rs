//! Region-indexed hypothesis classes `f_{A,θ0,θ1}`, the MLE oracle and the
//! offline comparator.
//!
//! A hypothesis predicts `θ0` inside its region `A` and `θ1` outside. Side
//! `j = 0` is "inside" and side `j = 1` is "outside" throughout, so the
//! binary function `g(x) = 1{x ∉ A}` names the side directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ContextUniverse, Example, Label, Prediction};
use crate::numeric::bernoulli_nll_at_mle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    ThresholdGrid,
    Explicit,
}

/// JSON form of a [`RegionFamily`].
///
/// `{"kind":"threshold_grid","size":U}` or
/// `{"kind":"explicit","regions":[[ids...],...]}`. Explicit families may
/// carry an optional `"size"`; otherwise the universe is the smallest one
/// containing every listed id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    ThresholdGrid {
        size: usize,
    },
    Explicit {
        regions: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Regions {
    /// Region `a` is `{x : x ≤ a}` for `a ∈ [0, U)`.
    Thresholds,
    /// One membership bitmap per region.
    Bitmaps(Vec<Vec<bool>>),
}

/// Finite list of subsets of the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFamily {
    universe: ContextUniverse,
    regions: Regions,
}

impl RegionFamily {
    /// All one-sided thresholds `{x ≤ a}`, `a = 0..U−1`, ordered by inclusion.
    pub fn threshold_grid(universe: ContextUniverse) -> Self {
        Self {
            universe,
            regions: Regions::Thresholds,
        }
    }

    pub fn explicit(universe: ContextUniverse, regions: Vec<Vec<usize>>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid("explicit family needs at least one region"));
        }
        let mut bitmaps = Vec::with_capacity(regions.len());
        for (i, region) in regions.iter().enumerate() {
            let mut bits = vec![false; universe.size()];
            for &x in region {
                if !universe.contains(x) {
                    return Err(Error::invalid(format!(
                        "region {i} contains context {x} outside universe of size {}",
                        universe.size()
                    )));
                }
                bits[x] = true;
            }
            bitmaps.push(bits);
        }
        Ok(Self {
            universe,
            regions: Regions::Bitmaps(bitmaps),
        })
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        match spec {
            FamilySpec::ThresholdGrid { size } => {
                Ok(Self::threshold_grid(ContextUniverse::new(*size)?))
            }
            FamilySpec::Explicit { regions, size } => {
                let inferred = regions.iter().flatten().map(|x| x + 1).max().unwrap_or(1);
                let universe = ContextUniverse::new(size.unwrap_or(inferred))?;
                Self::explicit(universe, regions.clone())
            }
        }
    }

    pub fn to_spec(&self) -> FamilySpec {
        match &self.regions {
            Regions::Thresholds => FamilySpec::ThresholdGrid {
                size: self.universe.size(),
            },
            Regions::Bitmaps(maps) => FamilySpec::Explicit {
                regions: maps
                    .iter()
                    .map(|m| {
                        m.iter()
                            .enumerate()
                            .filter(|(_, &b)| b)
                            .map(|(x, _)| x)
                            .collect()
                    })
                    .collect(),
                size: Some(self.universe.size()),
            },
        }
    }

    pub fn universe(&self) -> &ContextUniverse {
        &self.universe
    }

    pub fn kind(&self) -> FamilyKind {
        match self.regions {
            Regions::Thresholds => FamilyKind::ThresholdGrid,
            Regions::Bitmaps(_) => FamilyKind::Explicit,
        }
    }

    pub fn len(&self) -> usize {
        match &self.regions {
            Regions::Thresholds => self.universe.size(),
            Regions::Bitmaps(maps) => maps.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn contains(&self, region: usize, x: usize) -> bool {
        match &self.regions {
            Regions::Thresholds => x <= region,
            Regions::Bitmaps(maps) => maps[region][x],
        }
    }

    /// Side of `x` under region `region`: 0 inside, 1 outside.
    #[inline]
    pub fn side(&self, region: usize, x: usize) -> usize {
        usize::from(!self.contains(region, x))
    }

    /// Disagreement probability `Pr_{x∼μ}(x ∈ A_i △ A_j)` under the uniform base.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let u = self.universe.size();
        let diff = match &self.regions {
            Regions::Thresholds => i.abs_diff(j),
            Regions::Bitmaps(maps) => maps[i].iter().zip(&maps[j]).filter(|(a, b)| a != b).count(),
        };
        diff as f64 / u as f64
    }
}

/// `(region, θ0, θ1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub region_index: usize,
    pub theta0: f64,
    pub theta1: f64,
}

impl Hypothesis {
    pub fn new(region_index: usize, theta0: f64, theta1: f64) -> Result<Self> {
        for (name, v) in [("theta0", theta0), ("theta1", theta1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(Self {
            region_index,
            theta0,
            theta1,
        })
    }

    /// `θ0` if `x ∈ A`, else `θ1`.
    pub fn evaluate(&self, family: &RegionFamily, x: usize) -> Prediction {
        let q = if family.contains(self.region_index, x) {
            self.theta0
        } else {
            self.theta1
        };
        Prediction::from_unchecked(q)
    }

    /// Cumulative log-loss on `data`; `+inf` if some label has probability 0.
    pub fn loss(&self, family: &RegionFamily, data: &[Example]) -> f64 {
        data.iter()
            .map(|e| -self.evaluate(family, e.x).prob(e.y).ln())
            .sum()
    }
}

/// Sample and positive-label counts inside (`0`) and outside (`1`) a region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub n0: u64,
    pub k0: u64,
    pub n1: u64,
    pub k1: u64,
}

impl RegionCounts {
    pub fn side(&self, j: usize) -> (u64, u64) {
        if j == 0 {
            (self.k0, self.n0)
        } else {
            (self.k1, self.n1)
        }
    }

    pub fn add(&mut self, side: usize, y: Label) {
        let y = u64::from(y);
        if side == 0 {
            self.n0 += 1;
            self.k0 += y;
        } else {
            self.n1 += 1;
            self.k1 += y;
        }
    }

    pub fn total(&self) -> u64 {
        self.n0 + self.n1
    }

    /// Minimised negative log-likelihood over `(θ0, θ1)`.
    pub fn mle_loss(&self) -> f64 {
        bernoulli_nll_at_mle(self.k0, self.n0) + bernoulli_nll_at_mle(self.k1, self.n1)
    }
}

/// Counts for one region, by a direct pass over `data`.
pub fn count_regions(family: &RegionFamily, region: usize, data: &[Example]) -> RegionCounts {
    let mut c = RegionCounts::default();
    for e in data {
        c.add(family.side(region, e.x), e.y);
    }
    c
}

/// Per-context sample counts. Everything the MLE oracle needs is a function
/// of this table, so learners keep it instead of the raw history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextCounts {
    pub n: Vec<u64>,
    pub k: Vec<u64>,
}

impl ContextCounts {
    pub fn new(universe: &ContextUniverse) -> Self {
        Self {
            n: vec![0; universe.size()],
            k: vec![0; universe.size()],
        }
    }

    pub fn from_examples(universe: &ContextUniverse, data: &[Example]) -> Self {
        let mut c = Self::new(universe);
        for e in data {
            c.add(e.x, e.y);
        }
        c
    }

    #[inline]
    pub fn add(&mut self, x: usize, y: Label) {
        self.n[x] += 1;
        self.k[x] += u64::from(y);
    }

    pub fn total(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn region_counts(&self, family: &RegionFamily, region: usize) -> RegionCounts {
        let (mut n0, mut k0) = (0, 0);
        for x in 0..self.n.len() {
            if family.contains(region, x) {
                n0 += self.n[x];
                k0 += self.k[x];
            }
        }
        let n = self.total();
        let k: u64 = self.k.iter().sum();
        RegionCounts {
            n0,
            k0,
            n1: n - n0,
            k1: k - k0,
        }
    }
}

/// Output of the MLE oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub hypothesis: Hypothesis,
    pub counts: RegionCounts,
    pub loss: f64,
}

fn fit_from_region_counts(region_index: usize, counts: RegionCounts) -> MleFit {
    let theta = |k: u64, n: u64| if n == 0 { 0.5 } else { k as f64 / n as f64 };
    MleFit {
        hypothesis: Hypothesis {
            region_index,
            theta0: theta(counts.k0, counts.n0),
            theta1: theta(counts.k1, counts.n1),
        },
        counts,
        loss: counts.mle_loss(),
    }
}

/// MLE over the family from per-context counts.
///
/// Threshold grids use one prefix-sum pass (`O(U)`); explicit families scan
/// every region (`O(U·|regions|)`). Ties go to the lowest region index.
pub fn fit_counts(counts: &ContextCounts, family: &RegionFamily) -> MleFit {
    match family.kind() {
        FamilyKind::ThresholdGrid => fit_thresholds(counts),
        FamilyKind::Explicit => fit_scan(counts, family),
    }
}

fn fit_thresholds(counts: &ContextCounts) -> MleFit {
    let n_total = counts.total();
    let k_total: u64 = counts.k.iter().sum();
    let (mut n0, mut k0) = (0u64, 0u64);
    let mut best: Option<MleFit> = None;
    for a in 0..counts.n.len() {
        n0 += counts.n[a];
        k0 += counts.k[a];
        let rc = RegionCounts {
            n0,
            k0,
            n1: n_total - n0,
            k1: k_total - k0,
        };
        let loss = rc.mle_loss();
        if best.is_none_or(|b| loss < b.loss) {
            best = Some(fit_from_region_counts(a, rc));
        }
    }
    best.expect("universe is non-empty")
}

/// Per-region scan, valid for any family kind.
pub fn fit_scan(counts: &ContextCounts, family: &RegionFamily) -> MleFit {
    let mut best: Option<MleFit> = None;
    for r in 0..family.len() {
        let rc = counts.region_counts(family, r);
        let loss = rc.mle_loss();
        if best.is_none_or(|b| loss < b.loss) {
            best = Some(fit_from_region_counts(r, rc));
        }
    }
    best.expect("family is non-empty")
}

/// The MLE oracle: argmin over `(A, θ0, θ1)` of cumulative log-loss.
///
/// Optimal `θ_j = k_j/n_j`, or `1/2` on an empty side. The returned θ may be
/// 0 or 1; bounding predictions away from the boundary is the caller's job.
pub fn mle_oracle(data: &[Example], family: &RegionFamily) -> Hypothesis {
    mle_fit(data, family).hypothesis
}

pub fn mle_fit(data: &[Example], family: &RegionFamily) -> MleFit {
    fit_counts(
        &ContextCounts::from_examples(family.universe(), data),
        family,
    )
}

/// `inf_f Σ −ln p_f(y_t | x_t)` over the whole class.
pub fn offline_best_loss(data: &[Example], family: &RegionFamily) -> f64 {
    mle_fit(data, family).loss
}

/// Per-round losses of the offline best hypothesis; they sum to
/// [`offline_best_loss`] up to rounding.
pub fn comparator_losses(data: &[Example], family: &RegionFamily) -> Vec<f64> {
    let h = mle_oracle(data, family);
    data.iter()
        .map(|e| {
            let p = h.evaluate(family, e.x).prob(e.y);
            if p >= 1.0 {
                0.0
            } else {
                -p.ln()
            }
        })
        .collect()
}
