//! Seeded block-parallel sampling.
//!
//! Replications are cut into fixed blocks; block `b` draws from the ChaCha
//! stream `b` of the configured seed, so results do not depend on the
//! number of threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use super::McConfig;

pub const BLOCK: usize = 4096;

pub(crate) fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `config.replications` draws sorted ascending. `fill(rng, out, n)` must
/// push exactly `n` values.
pub(crate) fn sorted_sample<F>(config: &McConfig, fill: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<f64>, usize) + Sync,
{
    let total = config.replications;
    let blocks = total.div_ceil(BLOCK);
    let mut out: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = BLOCK.min(total - b * BLOCK);
            let mut rng = block_rng(config.seed, b as u64);
            let mut v = Vec::with_capacity(n);
            fill(&mut rng, &mut v, n);
            debug_assert_eq!(v.len(), n);
            v
        })
        .flatten()
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn uniform_open(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Draws of `Σ λ_i E_i`. With `antithetic`, each uniform vector `U` yields
/// the pair built from `U` and `1 − U`.
pub(crate) fn fill_hypoexp(rng: &mut ChaCha8Rng, rates: &[f64], antithetic: bool, out: &mut Vec<f64>, n: usize) {
    if antithetic {
        let start = out.len();
        while out.len() - start < n {
            let (mut a, mut b) = (0.0, 0.0);
            for r in rates {
                let u = uniform_open(rng);
                a -= r * u.ln();
                b -= r * (1.0 - u).max(f64::MIN_POSITIVE).ln();
            }
            out.push(a);
            if out.len() - start < n {
                out.push(b);
            }
        }
    } else {
        for _ in 0..n {
            out.push(rates.iter().map(|r| r * <Exp1 as Distribution<f64>>::sample(&Exp1, rng)).sum::<f64>());
        }
    }
}

/// One draw of `½ Σ λ_ℓ Z_ℓ²`.
pub(crate) fn draw_theta(rng: &mut impl Rng, rates: &[f64]) -> f64 {
    0.5 * rates
        .iter()
        .map(|r| {
            let z: f64 = StandardNormal.sample(rng);
            r * z * z
        })
        .sum::<f64>()
}

/// `λ_max(X Xᵀ) / 2` for a `p × dof` standard Gaussian `X`.
pub(crate) fn draw_wishart_half_maxeig(rng: &mut impl Rng, p: usize, dof: usize) -> f64 {
    let x = DMatrix::<f64>::from_fn(p, dof, |_, _| StandardNormal.sample(rng));
    let top = match p {
        1 => x.norm_squared(),
        2 => {
            let a = x.row(0).norm_squared();
            let c = x.row(1).norm_squared();
            let b = x.row(0).dot(&x.row(1));
            let half = 0.5 * (a + c);
            half + (0.25 * (a - c) * (a - c) + b * b).sqrt()
        }
        _ => {
            let w = &x * x.transpose();
            w.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }
    };
    0.5 * top
}

/// Type-1 empirical `(1 − alpha)`-quantile of a sorted sample.
pub(crate) fn upper_quantile(sorted: &[f64], alpha: f64) -> f64 {
    let r = sorted.len();
    let idx = ((1.0 - alpha) * r as f64).ceil() as usize;
    sorted[idx.clamp(1, r) - 1]
}

/// Standard error of the empirical quantile, `sqrt(α(1−α)/R) / f(q)`, with
/// the density estimated from neighbouring order statistics.
pub(crate) fn quantile_se(sorted: &[f64], alpha: f64) -> f64 {
    let r = sorted.len();
    let m = ((r as f64).sqrt() as usize).max(1);
    let lo = upper_quantile(sorted, (alpha + m as f64 / r as f64).min(1.0 - 1.0 / r as f64));
    let hi = upper_quantile(sorted, (alpha - m as f64 / r as f64).max(1.0 / r as f64));
    let width = hi - lo;
    if width <= 0.0 {
        return 0.0;
    }
    let density = 2.0 * m as f64 / r as f64 / width;
    (alpha * (1.0 - alpha) / r as f64).sqrt() / density
}

/// Monte Carlo p-value `(#{X ≥ stat} + 1) / (R + 1)`.
pub(crate) fn upper_p_value(sorted: &[f64], stat: f64) -> f64 {
    let below = sorted.partition_point(|&v| v < stat);
    let exceed = sorted.len() - below;
    (exceed as f64 + 1.0) / (sorted.len() as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_are_deterministic_and_distinct() {
        let cfg = McConfig { replications: 3 * BLOCK + 17, seed: 9, antithetic: false };
        let fill = |rng: &mut ChaCha8Rng, out: &mut Vec<f64>, n: usize| {
            for _ in 0..n {
                out.push(rng.random::<f64>());
            }
        };
        let a = sorted_sample(&cfg, fill);
        let b = sorted_sample(&cfg, fill);
        assert_eq!(a.len(), 3 * BLOCK + 17);
        assert_eq!(a, b);
        let mut x = block_rng(9, 0);
        let mut y = block_rng(9, 1);
        assert_ne!(x.random::<u64>(), y.random::<u64>());
    }

    #[test]
    fn antithetic_pairs_have_right_mean() {
        let mut rng = block_rng(1, 0);
        let mut out = Vec::new();
        fill_hypoexp(&mut rng, &[2.0, 0.5], true, &mut out, 40_001);
        assert_eq!(out.len(), 40_001);
        let mean = out.iter().sum::<f64>() / out.len() as f64;
        assert!((mean - 2.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn quantile_and_p_value_on_known_sample() {
        let s: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(upper_quantile(&s, 0.05), 95.0);
        assert_eq!(upper_p_value(&s, 100.0), 2.0 / 101.0);
        assert_eq!(upper_p_value(&s, 1000.0), 1.0 / 101.0);
        assert_eq!(upper_p_value(&s, -1.0), 1.0);
        assert!(quantile_se(&s, 0.05) > 0.0);
    }
}
