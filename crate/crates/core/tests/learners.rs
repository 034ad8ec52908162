use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;

use smoothpa::adversary::{LabelRule, SubsetRule, SubsetSmoothAdversary};
use smoothpa::diagnostics::{exhaustive_worst_regret, nml_value, FiniteClass};
use smoothpa::game::{play_game, GameRng, Learner};
use smoothpa::hypotheses::{offline_best_loss, Hypothesis, RegionFamily};
use smoothpa::learners::{FtplConfig, FtplLearner, KtLearner, UniformLearner, VcMixture};
use smoothpa::ContextUniverse;

#[test]
fn mixture_beats_uniform_against_greedy_adversary() {
    let u = ContextUniverse::new(64).unwrap();
    let family = Arc::new(RegionFamily::threshold_grid(u));
    let mut mix = VcMixture::new(family.clone(), 0.01).unwrap();
    let mut adv =
        SubsetSmoothAdversary::new(u, 0.1, SubsetRule::Adaptive, LabelRule::Greedy).unwrap();
    let a = play_game(&mut mix, &mut adv, &u, 2000, 1).unwrap();
    let best = offline_best_loss(&a.examples, &family);
    let regret = a.total_learner_loss() - best;
    assert!(regret < 30.0, "mixture regret {regret}");
}

#[test]
fn ftpl_is_reproducible_through_play_game() {
    let u = ContextUniverse::new(32).unwrap();
    let family = Arc::new(RegionFamily::threshold_grid(u));
    let run = || {
        let mut l = FtplLearner::new(FtplConfig::new(50.0, 0.01).unwrap(), family.clone());
        let mut adv =
            SubsetSmoothAdversary::new(u, 0.25, SubsetRule::Adaptive, LabelRule::Greedy).unwrap();
        play_game(&mut l, &mut adv, &u, 300, 99)
            .unwrap()
            .predictions
    };
    assert_eq!(run(), run());
}

#[test]
fn realizable_labels_give_small_regret_to_the_mixture() {
    let u = ContextUniverse::new(32).unwrap();
    let family = Arc::new(RegionFamily::threshold_grid(u));
    let target = Hypothesis::new(10, 0.9, 0.2).unwrap();
    let mut adv = SubsetSmoothAdversary::new(
        u,
        0.5,
        SubsetRule::Static(None),
        LabelRule::Realizable {
            family: family.clone(),
            target,
        },
    )
    .unwrap();
    let mut mix = VcMixture::new(family.clone(), 0.01).unwrap();
    let out = play_game(&mut mix, &mut adv, &u, 3000, 5).unwrap();
    let regret = out.total_learner_loss() - offline_best_loss(&out.examples, &family);
    assert!(regret > 0.0 && regret < 20.0, "{regret}");
}

#[test]
fn every_learner_respects_the_nml_floor() {
    let u = ContextUniverse::new(3).unwrap();
    let family = RegionFamily::threshold_grid(u);
    let hs = [
        Hypothesis::new(0, 0.9, 0.1).unwrap(),
        Hypothesis::new(1, 0.2, 0.7).unwrap(),
        Hypothesis::new(2, 0.5, 0.5).unwrap(),
    ];
    let class = FiniteClass::from_hypotheses(&family, &hs).unwrap();
    let xs = [0, 2, 1, 1, 0, 2, 2, 1];
    let floor = nml_value(&class, &xs).unwrap();
    let mix = VcMixture::new(Arc::new(family.clone()), 0.01).unwrap();
    assert!(exhaustive_worst_regret(&mix, &class, &xs).unwrap() >= floor - 1e-9);
    assert!(
        exhaustive_worst_regret(&KtLearner::new(0.5).unwrap(), &class, &xs).unwrap()
            >= floor - 1e-9
    );
    assert!(exhaustive_worst_regret(&UniformLearner, &class, &xs).unwrap() >= floor - 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ftpl_predictions_stay_truncated(n in 0.0f64..200.0, alpha in 1e-4f64..0.49, seed in any::<u64>()) {
        let u = ContextUniverse::new(16).unwrap();
        let family = Arc::new(RegionFamily::threshold_grid(u));
        let cfg = FtplConfig::new(n, alpha).unwrap();
        let (lo, hi) = cfg.truncation_range();
        let mut l = FtplLearner::new(cfg, family);
        let mut rng = GameRng::seed_from_u64(seed);
        for t in 0..40usize {
            let x = (t * 7 + seed as usize) % 16;
            let q = l.predict(x, &mut rng).q1();
            prop_assert!(q >= lo - 1e-15 && q <= hi + 1e-15);
            l.update(x, u8::from(t % 3 == 0));
        }
    }

    #[test]
    fn regret_bookkeeping_is_consistent(seed in any::<u64>(), sigma in 0.05f64..1.0) {
        let u = ContextUniverse::new(16).unwrap();
        let family = Arc::new(RegionFamily::threshold_grid(u));
        let mut mix = VcMixture::new(family.clone(), 0.1).unwrap();
        let mut adv = SubsetSmoothAdversary::new(u, sigma, SubsetRule::Adaptive, LabelRule::Greedy).unwrap();
        let out = play_game(&mut mix, &mut adv, &u, 50, seed).unwrap();
        let sum: f64 = out.records.iter().map(|r| r.learner_loss).sum();
        prop_assert!((sum - out.total_learner_loss()).abs() < 1e-9);
    }
}
