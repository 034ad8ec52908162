use crate::error::{Error, Result};
use crate::hypotheses::{FamilyKind, RegionFamily};

/// Subset of region indices such that every region lies within disagreement
/// probability `eps` (under the uniform base) of some member.
///
/// Threshold grids take every `⌈eps·U⌉`-th threshold plus the last one,
/// giving at most `⌈1/eps⌉ + 1` elements. Explicit families use a greedy
/// farthest-point cover started at region 0. `eps ≥ 1` returns `[0]`.
pub fn epsilon_cover(family: &RegionFamily, eps: f64) -> Result<Vec<usize>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!(
            "cover radius must be positive, got {eps}"
        )));
    }
    if eps >= 1.0 {
        return Ok(vec![0]);
    }
    Ok(match family.kind() {
        FamilyKind::ThresholdGrid => threshold_cover(family.len(), eps),
        FamilyKind::Explicit => greedy_cover(family, eps),
    })
}

fn threshold_cover(size: usize, eps: f64) -> Vec<usize> {
    let step = ((eps * size as f64 - 1e-9).ceil() as usize).max(1);
    let mut cover: Vec<usize> = (0..size).step_by(step).collect();
    if cover.last() != Some(&(size - 1)) {
        cover.push(size - 1);
    }
    cover
}

fn greedy_cover(family: &RegionFamily, eps: f64) -> Vec<usize> {
    let mut cover = vec![0];
    let mut nearest: Vec<f64> = (0..family.len()).map(|r| family.distance(r, 0)).collect();
    loop {
        let (far, dist) =
            nearest
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (r, &d)| if d > acc.1 { (r, d) } else { acc },
                );
        if dist <= eps {
            return cover;
        }
        cover.push(far);
        for (r, slot) in nearest.iter_mut().enumerate() {
            *slot = slot.min(family.distance(r, far));
        }
    }
}

/// `max_r min_{c ∈ cover} δ(r, c)`, by exhaustive pairwise check.
pub fn cover_radius(family: &RegionFamily, cover: &[usize]) -> f64 {
    (0..family.len())
        .map(|r| {
            cover
                .iter()
                .map(|&c| family.distance(r, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ContextUniverse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> RegionFamily {
        RegionFamily::threshold_grid(ContextUniverse::new(n).unwrap())
    }

    #[test]
    fn large_radius_single_element() {
        assert_eq!(epsilon_cover(&grid(10), 1.0).unwrap(), vec![0]);
        assert_eq!(epsilon_cover(&grid(10), 3.0).unwrap(), vec![0]);
        assert!(cover_radius(&grid(10), &[0]) <= 1.0);
        assert!(epsilon_cover(&grid(10), 0.0).is_err());
        assert!(epsilon_cover(&grid(10), f64::NAN).is_err());
    }

    #[test]
    fn hundred_thresholds_at_tenth() {
        let fam = grid(100);
        let cover = epsilon_cover(&fam, 0.1).unwrap();
        assert!(cover.len() <= 11);
        assert_eq!(&cover[..10], &[0, 10, 20, 30, 40, 50, 60, 70, 80, 90]);
        // Exhaustive pairwise verification.
        for r in 0..100 {
            let best = cover
                .iter()
                .map(|&c| fam.distance(r, c))
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 0.1 + 1e-12, "region {r} at {best}");
        }
    }

    #[test]
    fn threshold_cover_size_scales_inverse_eps() {
        let fam = grid(1000);
        for eps in [0.5, 0.2, 0.1, 0.05, 0.01, 0.003] {
            let cover = epsilon_cover(&fam, eps).unwrap();
            assert!(
                cover.len() <= (1.0 / eps).ceil() as usize + 1,
                "eps={eps}: {}",
                cover.len()
            );
            assert!(cover_radius(&fam, &cover) <= eps + 1e-12);
        }
        // Below 1/U every threshold is kept.
        assert_eq!(epsilon_cover(&fam, 1e-4).unwrap().len(), 1000);
    }

    #[test]
    fn greedy_cover_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = ContextUniverse::new(20).unwrap();
        let regions: Vec<Vec<usize>> = (0..40)
            .map(|_| (0..20).filter(|_| rng.gen_bool(0.4)).collect())
            .collect();
        let fam = RegionFamily::explicit(u, regions).unwrap();
        for eps in [0.05, 0.2, 0.4] {
            let cover = epsilon_cover(&fam, eps).unwrap();
            assert!(cover_radius(&fam, &cover) <= eps + 1e-12);
            assert_eq!(cover[0], 0);
        }
        assert_eq!(epsilon_cover(&fam, 0.01).unwrap().len(), {
            // Distinct bitmaps all need their own element at this radius.
            let spec = fam.to_spec();
            match spec {
                crate::hypotheses::FamilySpec::Explicit { regions, .. } => {
                    let mut r = regions.clone();
                    r.sort();
                    r.dedup();
                    r.len()
                }
                _ => unreachable!(),
            }
        });
    }
}
