//! Scaling fits of final regret against the horizon.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameRng;
use crate::numeric::least_squares;

pub const MIN_FIT_POINTS: usize = 4;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 0x05ee_df17;

/// Final regrets of every repetition at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub horizon: usize,
    pub regrets: Vec<f64>,
}

impl FitPoint {
    pub fn mean(&self) -> f64 {
        self.regrets.iter().sum::<f64>() / self.regrets.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub horizons: Vec<usize>,
    pub mean_regrets: Vec<f64>,
    /// Slope of `ln(mean regret)` on `ln T`; absent if some mean is not positive.
    pub loglog_slope: Option<f64>,
    pub loglog_ci: Option<Interval>,
    /// Slope of mean regret on `ln T`.
    pub log_t_slope: f64,
    pub log_t_intercept: f64,
    pub log_t_ci: Interval,
}

fn slopes(horizons: &[usize], means: &[f64]) -> (Option<f64>, f64, f64) {
    let lt: Vec<f64> = horizons.iter().map(|&t| (t as f64).ln()).collect();
    let (b, a) = least_squares(&lt, means);
    let loglog = if means.iter().all(|&m| m > 0.0) {
        let lr: Vec<f64> = means.iter().map(|m| m.ln()).collect();
        Some(least_squares(&lt, &lr).1)
    } else {
        None
    };
    (loglog, a, b)
}

fn percentile_interval(mut v: Vec<f64>) -> Interval {
    v.sort_by(f64::total_cmp);
    let at = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
    Interval {
        lo: at(0.025),
        hi: at(0.975),
    }
}

/// Least-squares fits with a percentile bootstrap over repetitions.
///
/// Needs at least [`MIN_FIT_POINTS`] distinct horizons. The bootstrap uses a
/// fixed seed, so the output is a pure function of the input.
pub fn fit_scaling(points: &[FitPoint]) -> Result<ScalingFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.horizon).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < MIN_FIT_POINTS || distinct.len() != points.len() {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            got: distinct.len(),
        });
    }
    if let Some(p) = points
        .iter()
        .find(|p| p.regrets.is_empty() || p.horizon == 0)
    {
        return Err(Error::invalid(format!(
            "fit point at T = {} has no usable data",
            p.horizon
        )));
    }
    let horizons: Vec<usize> = points.iter().map(|p| p.horizon).collect();
    let means: Vec<f64> = points.iter().map(FitPoint::mean).collect();
    let (loglog, slope, intercept) = slopes(&horizons, &means);

    let mut rng = GameRng::seed_from_u64(BOOTSTRAP_SEED);
    let mut boot_loglog = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut boot_lin = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut all_positive = true;
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let m: Vec<f64> = points
            .iter()
            .map(|p| {
                let r = &p.regrets;
                (0..r.len())
                    .map(|_| r[rng.gen_range(0..r.len())])
                    .sum::<f64>()
                    / r.len() as f64
            })
            .collect();
        let (ll, a, _) = slopes(&horizons, &m);
        match ll {
            Some(s) => boot_loglog.push(s),
            None => all_positive = false,
        }
        boot_lin.push(a);
    }
    let loglog_ci = (loglog.is_some() && all_positive).then(|| percentile_interval(boot_loglog));
    Ok(ScalingFit {
        horizons,
        mean_regrets: means,
        loglog_slope: loglog,
        loglog_ci,
        log_t_slope: slope,
        log_t_intercept: intercept,
        log_t_ci: percentile_interval(boot_lin),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(f: impl Fn(f64) -> f64) -> Vec<FitPoint> {
        [64usize, 128, 256, 512, 1024]
            .iter()
            .map(|&t| FitPoint {
                horizon: t,
                regrets: vec![f(t as f64); 3],
            })
            .collect()
    }

    #[test]
    fn recovers_power_law() {
        let fit = fit_scaling(&pts(|t| 3.0 * t.powf(0.4))).unwrap();
        assert!((fit.loglog_slope.unwrap() - 0.4).abs() < 1e-10);
        let ci = fit.loglog_ci.unwrap();
        assert!((ci.lo - 0.4).abs() < 1e-10 && (ci.hi - 0.4).abs() < 1e-10);
    }

    #[test]
    fn recovers_log_growth() {
        let fit = fit_scaling(&pts(|t| 2.0 + 1.5 * t.ln())).unwrap();
        assert!((fit.log_t_slope - 1.5).abs() < 1e-10);
        assert!((fit.log_t_intercept - 2.0).abs() < 1e-10);
    }

    #[test]
    fn nonpositive_means_drop_loglog() {
        let fit = fit_scaling(&pts(|t| 5.0 - t.ln())).unwrap();
        assert!(fit.loglog_slope.is_none());
        assert!(fit.loglog_ci.is_none());
    }

    #[test]
    fn too_few_points() {
        let p = pts(|t| t);
        match fit_scaling(&p[..3]) {
            Err(Error::InsufficientPoints { needed: 4, got: 3 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bootstrap_is_deterministic_and_covers() {
        let p: Vec<FitPoint> = [64usize, 128, 256, 512]
            .iter()
            .map(|&t| FitPoint {
                horizon: t,
                regrets: (0..10)
                    .map(|i| (t as f64).sqrt() * (0.8 + 0.04 * i as f64))
                    .collect(),
            })
            .collect();
        let a = fit_scaling(&p).unwrap();
        let b = fit_scaling(&p).unwrap();
        assert_eq!(a, b);
        let ci = a.loglog_ci.unwrap();
        assert!(ci.lo <= a.loglog_slope.unwrap() && a.loglog_slope.unwrap() <= ci.hi);
    }
}
