use fperiod::estimators::HypoExpSpec;
use fperiod::fdata::{FunctionalSample, Grid};
use fperiod::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn sample(n: usize, g: usize, seed: u64) -> FunctionalSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = DMatrix::from_fn(n, g, |_, _| StandardNormal.sample(&mut rng));
    FunctionalSample::new(values, Grid::uniform(g).unwrap()).unwrap()
}

fn cal() -> Calibrator {
    Calibrator::new(McConfig { replications: 10_000, ..McConfig::default() })
}

fn statistics(s: &FunctionalSample, d: usize) -> Vec<f64> {
    let c = cal();
    let mut out = Vec::new();
    for mode in [Mode::Single, Mode::AllSeasonal] {
        out.push(test_ftr(s, &TestConfig::new(d, Family::FunctionalTr, mode).with_alpha(1.0), &c).unwrap().statistic);
        let cfg = TestConfig::new(d, Family::MultivariateEv, mode).with_projection(Projection::fpca(2)).with_alpha(1.0);
        let pair = run_multivariate(s, &cfg, &c).unwrap();
        out.push(pair.ev.statistic);
        out.push(pair.tr.statistic);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Adding the same curve to every observation changes nothing.
    #[test]
    fn shift_invariance(seed in 0u64..1000, d in 3usize..9, n in 3usize..7, shift in -5.0f64..5.0) {
        let s = sample(d * n, 9, seed);
        let shifted = s.with_values(s.values().map(|v| v + shift)).unwrap();
        for (a, b) in statistics(&s, d).iter().zip(statistics(&shifted, d)) {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    /// Functional statistics scale with c², whitened ones do not move.
    #[test]
    fn scale_equivariance(seed in 0u64..1000, d in 3usize..9, c in 0.1f64..10.0) {
        let s = sample(d * 4, 8, seed);
        let scaled = s.with_values(s.values() * c).unwrap();
        let (a, b) = (statistics(&s, d), statistics(&scaled, d));
        for i in [0, 3] {
            prop_assert!((b[i] / (c * c * a[i]) - 1.0).abs() < 1e-9);
        }
        for i in [1, 2, 4, 5] {
            prop_assert!((b[i] / a[i] - 1.0).abs() < 1e-7, "{} vs {}", a[i], b[i]);
        }
    }

    /// The null law is a distribution function: within [0, 1] and non-decreasing.
    #[test]
    fn hypoexp_cdf_is_monotone(rates in proptest::collection::vec(0.05f64..3.0, 1..6), xs in proptest::collection::vec(0.0f64..20.0, 2..8)) {
        let spec = HypoExpSpec::new(rates).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let mut last = 0.0;
        for x in xs {
            let f = hypoexp_cdf(&spec, x).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f >= last - 1e-12, "cdf fell from {last} to {f} at {x}");
            last = f;
        }
    }

    /// Critical values invert the CDF.
    #[test]
    fn quantile_inverts_cdf(rates in proptest::collection::vec(0.05f64..3.0, 1..5), alpha in 0.01f64..0.5) {
        let spec = HypoExpSpec::new(rates).unwrap();
        let q = Calibrator::default().critical_value(&NullLaw::HypoExp(spec.clone()), alpha).unwrap();
        let f = hypoexp_cdf(&spec, q.value).unwrap();
        prop_assert!((1.0 - f - alpha).abs() < 1e-7, "alpha {alpha}: tail {}", 1.0 - f);
    }
}

#[test]
fn period_must_divide_sample() {
    let s = sample(20, 5, 1);
    let r = test_ftr(&s, &TestConfig::new(7, Family::FunctionalTr, Mode::Single), &cal());
    assert!(r.is_err());
}

#[test]
fn even_period_theta_law_in_dependent_mode() {
    let s = sample(6 * 20, 7, 4);
    let cfg = TestConfig::new(6, Family::FunctionalTr, Mode::AllSeasonal)
        .with_noise(Noise::Dependent(fperiod::estimators::KernelSpec::default_for(120)));
    let r = test_ftr(&s, &cfg, &cal()).unwrap();
    assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    assert!(matches!(r.law, Some(NullLaw::Mixture(ref m)) if m.chi_part().is_some()));
}
