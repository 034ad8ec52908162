//! Seeded sweeps: one cell per (learner, σ, T), many repetitions per cell.
//!
//! Each cell writes `cell_NNN.csv` (all repetitions, one row per round) and
//! the run finishes with `summary.json`. Files are written to a temporary
//! name and renamed, so a crash never leaves a half-written artifact.

mod config;
mod fit;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    AdversarySpec, ContextKind, ExperimentConfig, LabelSpec, LearnerSpec, RuleKind, Schedule,
    SweepAxes,
};
pub use fit::{fit_scaling, FitPoint, Interval, ScalingFit, BOOTSTRAP_RESAMPLES, MIN_FIT_POINTS};

use crate::adversary::{LabelRule, SubsetRule, SubsetSmoothAdversary};
use crate::error::{Error, Result};
use crate::game::{fill_comparator, play_game, ContextUniverse, Learner, RegretRecord, CSV_HEADER};
use crate::hypotheses::{comparator_losses, RegionFamily};
use crate::learners::{FtplConfig, FtplLearner, KtLearner, UniformLearner, VcMixture};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SMOOTHPA_THREADS";

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-run seed; independent of thread scheduling.
pub fn derive_seed(base: u64, cell: usize, rep: usize) -> u64 {
    mix(mix(mix(base) ^ cell as u64) ^ rep as u64)
}

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub learner_index: usize,
    pub learner: LearnerSpec,
    pub sigma: f64,
    pub horizon: usize,
}

/// Cells in deterministic order: learner, then σ, then T.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for (li, l) in config.learners.iter().enumerate() {
        for &sigma in &config.sigmas() {
            for &horizon in &config.horizons() {
                out.push(Cell {
                    index: out.len(),
                    learner_index: li,
                    learner: l.clone(),
                    sigma,
                    horizon,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(flatten)]
    pub cell: Cell,
    pub learner_id: String,
    pub adversary_id: String,
    pub seeds: Vec<u64>,
    pub final_regrets: Vec<f64>,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_learner_loss: f64,
    pub mean_comparator_loss: f64,
    /// FTPL only: predictions checked against `[α/(1+2α), (1+α)/(1+2α)]`.
    pub predictions_checked: usize,
    pub truncation_violations: usize,
    pub distributions_checked: usize,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFit {
    pub learner_index: usize,
    pub learner: String,
    pub sigma: f64,
    pub fit: ScalingFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub repetitions: usize,
    pub universe: usize,
    pub cells: Vec<CellSummary>,
    /// One fit per (learner, σ) with at least four horizons.
    pub fits: Vec<GroupFit>,
}

impl SweepSummary {
    pub fn total_truncation_violations(&self) -> usize {
        self.cells.iter().map(|c| c.truncation_violations).sum()
    }

    pub fn cell(&self, learner_index: usize, sigma: f64, horizon: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| {
            c.cell.learner_index == learner_index
                && c.cell.sigma == sigma
                && c.cell.horizon == horizon
        })
    }

    pub fn fit_for(&self, learner_index: usize, sigma: f64) -> Option<&ScalingFit> {
        self.fits
            .iter()
            .find(|f| f.learner_index == learner_index && f.sigma == sigma)
            .map(|f| &f.fit)
    }
}

/// Groups cells by (learner, σ) and fits those with enough horizons.
pub fn group_fits(cells: &[CellSummary]) -> Result<Vec<GroupFit>> {
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for c in cells {
        let k = (c.cell.learner_index, c.cell.sigma);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut fits = Vec::new();
    for (li, sigma) in keys {
        let mut points: Vec<FitPoint> = cells
            .iter()
            .filter(|c| c.cell.learner_index == li && c.cell.sigma == sigma)
            .map(|c| FitPoint {
                horizon: c.cell.horizon,
                regrets: c.final_regrets.clone(),
            })
            .collect();
        points.sort_by_key(|p| p.horizon);
        match fit_scaling(&points) {
            Ok(fit) => fits.push(GroupFit {
                learner_index: li,
                learner: cells
                    .iter()
                    .find(|c| c.cell.learner_index == li)
                    .unwrap()
                    .cell
                    .learner
                    .name()
                    .into(),
                sigma,
                fit,
            }),
            Err(Error::InsufficientPoints { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(fits)
}

struct RunResult {
    seed: u64,
    records: Vec<RegretRecord>,
    learner_id: String,
    adversary_id: String,
    comparator: f64,
    predictions_checked: usize,
    violations: usize,
    distributions_checked: usize,
}

struct Setup {
    universe: ContextUniverse,
    family: Arc<RegionFamily>,
}

fn build_learner(
    spec: &LearnerSpec,
    setup: &Setup,
    horizon: usize,
    sigma: f64,
) -> Result<Box<dyn Learner>> {
    Ok(match spec {
        LearnerSpec::Ftpl { n, alpha } => Box::new(FtplLearner::new(
            FtplConfig::new(n.eval(horizon, sigma), alpha.eval(horizon, sigma))?,
            setup.family.clone(),
        )),
        LearnerSpec::VcMixture { eps } => {
            let eps = eps.map_or(sigma / (horizon as f64).powi(2), |e| e.eval(horizon, sigma));
            Box::new(VcMixture::new(setup.family.clone(), eps)?)
        }
        LearnerSpec::Kt { beta } => Box::new(KtLearner::new(*beta)?),
        LearnerSpec::Uniform {} => Box::new(UniformLearner),
    })
}

fn build_adversary(
    config: &ExperimentConfig,
    setup: &Setup,
    sigma: f64,
) -> Result<SubsetSmoothAdversary> {
    let ContextKind::SubsetUniform = config.adversary.context;
    let rule = match config.adversary.rule {
        RuleKind::Static => SubsetRule::Static(config.adversary.set.clone()),
        RuleKind::Adaptive => SubsetRule::Adaptive,
    };
    let labels = match &config.labels {
        LabelSpec::Greedy => LabelRule::Greedy,
        LabelSpec::Realizable { target } => {
            if target.region_index >= setup.family.len() {
                return Err(Error::config(
                    "labels.target.region_index",
                    format!(
                        "{} out of range for {} regions",
                        target.region_index,
                        setup.family.len()
                    ),
                ));
            }
            LabelRule::Realizable {
                family: setup.family.clone(),
                target: *target,
            }
        }
        LabelSpec::FixedSequence { sequence } => LabelRule::FixedSequence(sequence.clone()),
    };
    SubsetSmoothAdversary::new(setup.universe, sigma, rule, labels).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::config("adversary", m),
        other => other,
    })
}

fn run_one(config: &ExperimentConfig, setup: &Setup, cell: &Cell, rep: usize) -> Result<RunResult> {
    let seed = derive_seed(config.seed, cell.index, rep);
    let mut learner = build_learner(&cell.learner, setup, cell.horizon, cell.sigma)?;
    let mut adversary = build_adversary(config, setup, cell.sigma)?;
    let out = play_game(
        learner.as_mut(),
        &mut adversary,
        &setup.universe,
        cell.horizon,
        seed,
    )?;

    let (predictions_checked, violations) = match &cell.learner {
        LearnerSpec::Ftpl { n, alpha } => {
            let (lo, hi) = FtplConfig::new(
                n.eval(cell.horizon, cell.sigma),
                alpha.eval(cell.horizon, cell.sigma),
            )?
            .truncation_range();
            let bad = out
                .predictions
                .iter()
                .filter(|q| q.q1() < lo - 1e-15 || q.q1() > hi + 1e-15)
                .count();
            (out.predictions.len(), bad)
        }
        _ => (0, 0),
    };

    let per_round = comparator_losses(&out.examples, &setup.family);
    let mut records = out.records;
    fill_comparator(&mut records, &per_round)?;
    let run_id = format!("c{:03}-r{:03}", cell.index, rep);
    for r in &mut records {
        r.run_id.clone_from(&run_id);
    }
    Ok(RunResult {
        seed,
        comparator: records.last().map_or(0.0, |r| r.cum_comparator_loss),
        learner_id: learner.id(),
        adversary_id: crate::game::Adversary::id(&adversary),
        records,
        predictions_checked,
        violations,
        distributions_checked: out.distributions_checked,
    })
}

/// Writes `contents` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn run_cell(
    config: &ExperimentConfig,
    setup: &Setup,
    cell: &Cell,
    out_dir: Option<&Path>,
) -> Result<CellSummary> {
    let runs: Vec<RunResult> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_one(config, setup, cell, rep))
        .collect::<Result<_>>()?;

    let csv = match out_dir {
        Some(dir) => {
            let name = format!("cell_{:03}.csv", cell.index);
            let mut body = String::with_capacity(runs.iter().map(|r| r.records.len() * 64).sum());
            body.push_str(CSV_HEADER);
            body.push('\n');
            for r in &runs {
                for rec in &r.records {
                    body.push_str(&rec.csv_row());
                    body.push('\n');
                }
            }
            write_atomic(&dir.join(&name), body.as_bytes())?;
            Some(name)
        }
        None => None,
    };

    let final_regrets: Vec<f64> = runs
        .iter()
        .map(|r| r.records.last().map_or(0.0, |x| x.cum_regret))
        .collect();
    let losses: Vec<f64> = runs
        .iter()
        .map(|r| r.records.last().map_or(0.0, |x| x.cum_learner_loss))
        .collect();
    let comps: Vec<f64> = runs.iter().map(|r| r.comparator).collect();
    let (mean_regret, std_regret) = mean_std(&final_regrets);
    let violations: usize = runs.iter().map(|r| r.violations).sum();
    Ok(CellSummary {
        cell: cell.clone(),
        learner_id: runs[0].learner_id.clone(),
        adversary_id: runs[0].adversary_id.clone(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        mean_regret,
        std_regret,
        final_regrets,
        mean_learner_loss: mean_std(&losses).0,
        mean_comparator_loss: mean_std(&comps).0,
        predictions_checked: runs.iter().map(|r| r.predictions_checked).sum(),
        truncation_violations: violations,
        distributions_checked: runs.iter().map(|r| r.distributions_checked).sum(),
        csv,
    })
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::config(THREADS_ENV, format!("{v:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Runs the sweep. With `out_dir` set, per-cell CSVs and `summary.json` are
/// written there; a cell's CSV lands as soon as all its repetitions finish.
///
/// Fails with [`Error::NumericalAssertion`] if any FTPL prediction left its
/// truncation range.
pub fn run(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<SweepSummary> {
    config.validate()?;
    let universe = ContextUniverse::new(config.universe)?;
    let family = match &config.family {
        Some(spec) => RegionFamily::from_spec(spec)?,
        None => RegionFamily::threshold_grid(universe),
    };
    let setup = Setup {
        universe,
        family: Arc::new(family),
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let grid = cells(config);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let cell_summaries: Vec<CellSummary> = pool.install(|| {
        grid.par_iter()
            .map(|c| run_cell(config, &setup, c, out_dir))
            .collect::<Result<_>>()
    })?;

    let summary = SweepSummary {
        seed: config.seed,
        repetitions: config.repetitions,
        universe: config.universe,
        fits: group_fits(&cell_summaries)?,
        cells: cell_summaries,
    };
    if let Some(dir) = out_dir {
        let mut json = serde_json::to_string_pretty(&summary)?;
        json.push('\n');
        write_atomic(&dir.join("summary.json"), json.as_bytes())?;
    }
    let bad = summary.total_truncation_violations();
    if bad > 0 {
        return Err(Error::NumericalAssertion(format!(
            "{bad} FTPL predictions fell outside the truncation range"
        )));
    }
    Ok(summary)
}

/// Resolves the output directory: explicit override, then `config.output`.
pub fn output_dir(config: &ExperimentConfig, cli_override: Option<PathBuf>) -> Option<PathBuf> {
    cli_override.or_else(|| config.output.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(learners: &str) -> ExperimentConfig {
        ExperimentConfig::from_json_str(&format!(
            r#"{{"universe": 16, "learners": {learners},
                "adversary": {{"context": "subset_uniform", "rule": "adaptive"}},
                "sigma": 0.25, "repetitions": 3, "seed": 11,
                "sweep": {{"horizon": [8, 16, 32, 64]}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(1, 0, 0);
        assert_eq!(a, derive_seed(1, 0, 0));
        let mut all: Vec<u64> = (0..10)
            .flat_map(|c| (0..10).map(move |r| derive_seed(1, c, r)))
            .collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 100);
        assert_ne!(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
    }

    #[test]
    fn cell_order() {
        let cfg = small(r#"[{"uniform": {}}, {"kt": {}}]"#);
        let g = cells(&cfg);
        assert_eq!(g.len(), 8);
        assert_eq!(g[0].horizon, 8);
        assert_eq!(g[3].horizon, 64);
        assert_eq!(g[4].learner_index, 1);
    }

    #[test]
    fn uniform_learner_regret_matches_bookkeeping() {
        let cfg = small(r#"[{"uniform": {}}]"#);
        let s = run(&cfg, None).unwrap();
        for c in &s.cells {
            let t = c.cell.horizon as f64;
            assert!((c.mean_learner_loss - t * std::f64::consts::LN_2).abs() < 1e-9);
            assert!((c.mean_regret - (c.mean_learner_loss - c.mean_comparator_loss)).abs() < 1e-9);
        }
        assert_eq!(s.fits.len(), 1);
    }

    #[test]
    fn ftpl_never_violates_truncation() {
        let cfg = small(
            r#"[{"ftpl": {"n": {"t_exponent": 0.8, "sigma_exponent": -0.5, "round": true}, "alpha": {"t_exponent": -1}}}]"#,
        );
        let s = run(&cfg, None).unwrap();
        assert_eq!(s.total_truncation_violations(), 0);
        assert_eq!(
            s.cells.iter().map(|c| c.predictions_checked).sum::<usize>(),
            3 * (8 + 16 + 32 + 64)
        );
    }

    #[test]
    fn writes_identical_artifacts() {
        let cfg = small(r#"[{"vc_mixture": {}}, {"ftpl": {"n": 10, "alpha": 0.05}}]"#);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(&cfg, Some(a.path())).unwrap();
        run(&cfg, Some(b.path())).unwrap();
        let mut names: Vec<_> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert_eq!(names.len(), 9);
        for n in names {
            assert_eq!(
                fs::read(a.path().join(&n)).unwrap(),
                fs::read(b.path().join(&n)).unwrap()
            );
        }
        let csv = fs::read_to_string(a.path().join("cell_000.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), 1 + 3 * 8);
    }

    #[test]
    fn bad_realizable_target_is_config_error() {
        let mut cfg = small(r#"[{"uniform": {}}]"#);
        cfg.labels = LabelSpec::Realizable {
            target: crate::hypotheses::Hypothesis::new(0, 0.1, 0.9).unwrap(),
        };
        cfg.labels = match cfg.labels {
            LabelSpec::Realizable { mut target } => {
                target.region_index = 99;
                LabelSpec::Realizable { target }
            }
            l => l,
        };
        assert!(matches!(run(&cfg, None), Err(Error::Config { .. })));
    }
}
