//! Monte-Carlo estimation of the simple-random-walk escape probability
//! `alpha_d`, with a diffusive long-jump accelerator for large
//! confinement radii.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::PotentialError;

#[derive(Debug, Clone, PartialEq)]
pub struct McAlpha {
    pub d: usize,
    pub radius: f64,
    pub trials: u64,
    pub escaped: u64,
    pub estimate: f64,
    /// Binomial standard error.
    pub std_error: f64,
    pub seed: u64,
}

/// Below this distance to the origin or the confinement sphere the walk
/// is stepped exactly, one move at a time.
const FINE_BAND: f64 = 16.0;

/// Estimates the escape probability: the fraction of walks from the
/// origin that exit `B_radius` before revisiting the origin. Exact
/// single steps near the origin and the sphere; in the far field the
/// walk is advanced `k = (dist/4)^2` steps at once by sampling the
/// Gaussian endpoint (`dist` = distance to the nearer stopping set, so
/// mid-jump stops are negligible). Deterministic for a fixed seed.
pub fn mc_alpha(
    d: usize,
    trials: u64,
    radius: f64,
    seed: u64,
) -> Result<McAlpha, PotentialError> {
    if d < 3 {
        return Err(PotentialError::RecurrentDimension(d));
    }
    if radius < 10.0 {
        return Err(PotentialError::RadiusTooSmall(radius, 10.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_sq = radius * radius;
    let mut escaped = 0u64;
    let mut pos = vec![0i64; d];
    for _ in 0..trials {
        pos.iter_mut().for_each(|c| *c = 0);
        loop {
            let dist_sq: f64 = pos.iter().map(|&c| (c as f64).powi(2)).sum();
            if dist_sq >= r_sq {
                escaped += 1;
                break;
            }
            let dist = dist_sq.sqrt();
            if dist == 0.0 && pos.iter().any(|&c| c != 0) {
                unreachable!();
            }
            let gap = (dist - 2.0).min(radius - dist);
            if gap < FINE_BAND {
                let dir = rng.gen_range(0..2 * d);
                pos[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
                if pos.iter().all(|&c| c == 0) {
                    break; // returned
                }
            } else {
                let k = (gap / 4.0).powi(2);
                let sigma = (k / d as f64).sqrt();
                for c in pos.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *c += (z * sigma).round() as i64;
                }
                if pos.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
    }
    let estimate = escaped as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(McAlpha {
        d,
        radius,
        trials,
        escaped,
        estimate,
        std_error,
        seed,
    })
}

/// Chi-square statistic of `draws` uniform 2d-direction draws against
/// the uniform null (2d - 1 degrees of freedom).
pub fn direction_chi_square(d: usize, draws: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; 2 * d];
    for _ in 0..draws {
        counts[rng.gen_range(0..2 * d)] += 1;
    }
    let expect = draws as f64 / (2 * d) as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_dimensions_are_rejected() {
        assert!(matches!(
            mc_alpha(2, 10, 100.0, 1),
            Err(PotentialError::RecurrentDimension(2))
        ));
        assert!(matches!(
            mc_alpha(3, 10, 5.0, 1),
            Err(PotentialError::RadiusTooSmall(..))
        ));
    }

    #[test]
    fn single_trial_is_zero_or_one() {
        let res = mc_alpha(3, 1, 100.0, 42).unwrap();
        assert!(res.estimate == 0.0 || res.estimate == 1.0);
    }

    #[test]
    fn same_seed_reproduces_exactly() {
        let a = mc_alpha(3, 2000, 200.0, 7).unwrap();
        let b = mc_alpha(3, 2000, 200.0, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn estimate_is_near_the_known_escape_probability() {
        // alpha_3 ~ 0.6595 (1 / G(0,0), Watson's integral).
        let res = mc_alpha(3, 40_000, 1000.0, 11).unwrap();
        assert!(
            (res.estimate - 0.6595).abs() < 4.0 * res.std_error + 0.005,
            "estimate {} +- {}",
            res.estimate,
            res.std_error
        );
    }

    #[test]
    fn truncation_inflates_escape_counts() {
        let near = mc_alpha(3, 20_000, 100.0, 3).unwrap();
        let far = mc_alpha(3, 20_000, 10_000.0, 3).unwrap();
        assert!(near.estimate >= far.estimate - 3.0 * near.std_error);
    }

    #[test]
    fn direction_draws_pass_chi_square() {
        // Critical value at p = 0.001: df 5 -> 20.515, df 7 -> 24.322.
        assert!(direction_chi_square(3, 200_000, 5) < 20.515);
        assert!(direction_chi_square(4, 200_000, 5) < 24.322);
    }
}
