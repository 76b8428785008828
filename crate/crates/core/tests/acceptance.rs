//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use fperiod::estimators::{HypoExpSpec, KernelSpec};
use fperiod::fdata::{FunctionalSample, Grid};
use fperiod::sim::{config_label, write_power_csv, write_rates_csv, RateRow};
use fperiod::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const ALPHA: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn binomial_se(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

/// Asymptotic Kolmogorov tail `P(K > x)`.
fn kolmogorov_tail(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS p-value against `cdf`.
fn ks_p_value(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let d = sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    (d, kolmogorov_tail(d * n.sqrt()))
}

/// Hypoexponential CDF for distinct rates by partial fractions.
fn distinct_rates_cdf(rates: &[f64], x: f64) -> f64 {
    1.0 - rates
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let c: f64 = rates.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &lj)| li / (li - lj)).product();
            c * (-x / li).exp()
        })
        .sum::<f64>()
}

fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let cal = Calibrator::default();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..100 {
        let d = rng.random_range(3..=12);
        let n = rng.random_range(3..=10);
        let g = rng.random_range(6..=30);
        let p = rng.random_range(1..=4);
        let grid = Grid::uniform(g).unwrap();
        let pattern = DMatrix::from_fn(d, g, |_, _| 0.5 * normal(&mut rng));
        let values = DMatrix::from_fn(d * n, g, |t, j| pattern[(t % d, j)] + normal(&mut rng));
        let sample = FunctionalSample::new(values, grid).unwrap();
        let run = |cfg: TestConfig| run_test(&sample, &cfg, &cal).map(|r| r.statistic);
        let proj = Projection::fpca(p);
        let pairs = [
            (
                run(TestConfig::new(d, Family::Anova, Mode::AllSeasonal)),
                run(TestConfig::new(d, Family::FunctionalTr, Mode::AllSeasonal)),
            ),
            (
                run(TestConfig::new(d, Family::Anova, Mode::AllSeasonal).with_projection(proj.clone())),
                run(TestConfig::new(d, Family::MultivariateTr, Mode::AllSeasonal).with_projection(proj)),
            ),
        ];
        for (anova, trace) in pairs {
            match (anova, trace) {
                (Ok(a), Ok(t)) => worst = worst.max((a / (2.0 / d as f64 * t) - 1.0).abs()),
                _ => errors += 1,
            }
        }
    }
    outcome(
        worst <= 1e-9 && errors == 0,
        format!("FAV = (2/d) FTR2 and MAV = (2/d) MTR2 on 100 random inputs: max rel err {worst:.2e}, errors {errors}"),
    )
}

fn null_laws() -> Outcome {
    let rates = [1.0, 0.5, 0.25];
    let d = 7;
    let mut spec = DgpSpec::new(DgpKind::ModelS { signal: Signal::Cosine, loading: Loading::First }, d, 14 * d, 202).with_scale(0.0);
    spec.noise_eigenvalues = rates.to_vec();
    let dgp = Dgp::new(spec).unwrap();
    let known = Noise::Known(dgp.known_noise().unwrap());
    let cal = Calibrator::default();
    let mut single = Vec::new();
    let mut all = Vec::new();
    for rep in 0..2000 {
        let s = dgp.sample(rep).unwrap();
        let c1 = TestConfig::new(d, Family::FunctionalTr, Mode::Single).with_noise(known.clone()).with_alpha(1.0);
        single.push(test_ftr(&s, &c1, &cal).unwrap().statistic);
        all.push(test_ftr(&s, &TestConfig { mode: Mode::AllSeasonal, ..c1 }, &cal).unwrap().statistic);
    }
    let (d1, p1) = ks_p_value(single, |x| distinct_rates_cdf(&rates, x));
    let q = (d - 1) / 2;
    let folded = HypoExpSpec::new(rates.iter().flat_map(|&r| std::iter::repeat_n(r, q)).collect()).unwrap();
    let (d2, p2) = ks_p_value(all, |x| hypoexp_cdf(&folded, x).unwrap());
    outcome(
        p1 > 0.01 && p2 > 0.01,
        format!("KS vs HExp(1, 1/2, 1/4): FTR1 D = {d1:.4} p = {p1:.3}; FTR2 vs {q}-fold sum D = {d2:.4} p = {p2:.3}"),
    )
}

fn quantile_oracles() -> Outcome {
    let erlang = erlang_quantile(1, 0.05).unwrap();
    let spec = HypoExpSpec::new(vec![2.0, 1.0]).unwrap();
    let cdf = hypoexp_cdf(&spec, 2.0).unwrap();
    let w = wishart_maxeig_quantile(1, 2, 0.05, &McConfig::default()).unwrap();
    let ok = (erlang - 2.995732).abs() <= 1e-6 && (cdf - 0.399576).abs() <= 1e-6 && (w.value - 2.9957).abs() <= 3.0 * w.se;
    outcome(
        ok,
        format!("erlang(1,.05) = {erlang:.6}; HExp(2,1) cdf(2) = {cdf:.6}; wishart(1,2,.05) = {:.4} (se {:.4})", w.value, w.se),
    )
}

fn dependent_suite(n: usize) -> Vec<TestConfig> {
    standard_suite(7, &[1, 2, 3], Noise::Dependent(KernelSpec::default_for(n)), ALPHA)
}

fn empirical_size() -> Outcome {
    let n = 210;
    let dgp = Dgp::new(DgpSpec::new(DgpKind::Ma5Null, 7, n, 42)).unwrap();
    let cfgs = dependent_suite(n);
    let rates = rejection_rates(&dgp, &cfgs, 1000, &Calibrator::default()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (cfg, e) in cfgs.iter().zip(&rates) {
        let (lo, hi) = if cfg.projection.is_none() { (0.035, 0.070) } else { (0.03, 0.08) };
        ok &= e.failures == 0 && e.rate >= lo && e.rate <= hi;
        parts.push(format!("{} {:.1}%", config_label(cfg), 100.0 * e.rate));
    }
    outcome(ok, format!("MA(5) null, N = 210, 1000 reps: {}", parts.join(", ")))
}

fn power_ordering() -> Outcome {
    let cal = Calibrator::default();
    let mut rates = Vec::new();
    for n in [210, 420] {
        let dgp = Dgp::new(DgpSpec::new(DgpKind::Ma5PlusMeans, 7, n, 42)).unwrap();
        let noise = Noise::Dependent(KernelSpec::default_for(n));
        let cfgs: Vec<TestConfig> = [Mode::Single, Mode::AllSeasonal]
            .into_iter()
            .map(|m| TestConfig::new(7, Family::FunctionalTr, m).with_noise(noise.clone()))
            .collect();
        let r = rejection_rates(&dgp, &cfgs, 1000, &cal).unwrap();
        rates.push((r[0].rate, r[1].rate));
    }
    let (f1, f2) = rates[0];
    let (g1, g2) = rates[1];
    outcome(
        f2 - f1 >= 0.15 && g1 > f1 && g2 > f2,
        format!(
            "weekday means, MSS 0.1: N = 210 FTR1 {:.1}% FTR2 {:.1}%; N = 420 FTR1 {:.1}% FTR2 {:.1}%",
            100.0 * f1,
            100.0 * f2,
            100.0 * g1,
            100.0 * g2
        ),
    )
}

fn lp_configs(d: usize, dgp: &Dgp) -> Vec<TestConfig> {
    let known = Noise::Known(dgp.known_noise().unwrap());
    let proj = Projection { dim: 5, source: BasisSource::User(dgp.basis().rows(0, 5).into_owned()) };
    let mut out = Vec::new();
    for mode in [Mode::Single, Mode::AllSeasonal] {
        for family in [Family::MultivariateEv, Family::MultivariateTr] {
            out.push(TestConfig::new(d, family, mode).with_noise(known.clone()).with_projection(proj.clone()));
        }
        out.push(TestConfig::new(d, Family::FunctionalTr, mode).with_noise(known.clone()));
    }
    out
}

fn lp_curve(signal: Signal, d: usize, xs: &[f64], reps: usize, cal: &Calibrator) -> PowerCurve {
    let spec = DgpSpec::new(DgpKind::ModelS { signal, loading: Loading::Decaying }, d, 10 * d, 7);
    let dgp = Dgp::new(spec.clone()).unwrap();
    local_power_curve(&spec, &lp_configs(d, &dgp), xs, reps, cal).unwrap()
}

fn local_power() -> Outcome {
    let reps = 2000;
    let cal = Calibrator::default();
    // step-signal curves saturate by x = 4, the random signal needs twice the range
    let step_xs: Vec<f64> = (0..=16).map(|i| i as f64 * 0.25).collect();
    let wide_xs: Vec<f64> = (0..=16).map(|i| i as f64 * 0.5).collect();
    let step7 = lp_curve(Signal::Step, 7, &step_xs, reps, &cal);
    let step31 = lp_curve(Signal::Step, 31, &step_xs, reps, &cal);
    let random7 = lp_curve(Signal::Random, 7, &wide_xs, reps, &cal);

    let band = 2.0 * binomial_se(ALPHA, reps);
    let mut worst_null: f64 = 0.0;
    for curve in [&step7, &step31, &random7] {
        for e in &curve.rates[0] {
            worst_null = worst_null.max((e.rate - ALPHA).abs());
        }
    }
    let a = worst_null <= band;

    let max_gap = |c: &PowerCurve| {
        let ev = c.column("MEV2 p=5").unwrap();
        let tr = c.column("MTR2 p=5").unwrap();
        ev.iter().zip(&tr).map(|(e, t)| e.rate - t.rate).fold(f64::NEG_INFINITY, f64::max)
    };
    let (gap31, gap7) = (max_gap(&step31), max_gap(&step7));
    let b = gap31 > gap7;

    let mid = |c: &PowerCurve, label: &str| c.column(label).unwrap()[c.xs.len() / 2];
    let (ev2, ev1) = (mid(&random7, "MEV2 p=5"), mid(&random7, "MEV1 p=5"));
    let c = ev2.rate - ev1.rate > 2.0 * (ev1.se * ev1.se + ev2.se * ev2.se).sqrt();
    let (sev1, sev2) = (mid(&step7, "MEV1 p=5"), mid(&step7, "MEV2 p=5"));
    let dd = sev1.rate >= sev2.rate;

    outcome(
        a && b && c && dd,
        format!(
            "(a) max |LP(0) - a| = {:.4} vs 2se {:.4} [{}]; (b) max(MEV2-MTR2) d=31 {:.3} > d=7 {:.3} [{}]; \
             (c) s3 x={}: MEV2 {:.3} vs MEV1 {:.3} [{}]; (d) s2 x={}: MEV1 {:.3} vs MEV2 {:.3} [{}]",
            worst_null,
            band,
            a,
            gap31,
            gap7,
            b,
            random7.xs[random7.xs.len() / 2],
            ev2.rate,
            ev1.rate,
            c,
            step7.xs[step7.xs.len() / 2],
            sev1.rate,
            sev2.rate,
            dd
        ),
    )
}

fn consistency() -> Outcome {
    let (d, n) = (7, 200);
    let rho: f64 = 1.0;
    let cal = Calibrator::default();
    let kind = DgpKind::ModelS { signal: Signal::Cosine, loading: Loading::First };
    let noisy = gen(&DgpSpec::new(kind.clone(), d, n * d, 303).with_scale(rho)).unwrap();
    let cfg = TestConfig::new(d, Family::FunctionalTr, Mode::Single);
    let ratio = test_ftr(&noisy, &cfg, &cal).unwrap().statistic / n as f64 / (d as f64 / 4.0 * rho * rho);

    // signal only: cos(2πt/d) on a constant unit curve
    let grid = Grid::uniform(32).unwrap();
    let rows: Vec<Vec<f64>> = (1..=n * d).map(|t| vec![(2.0 * PI * t as f64 / d as f64).cos(); 32]).collect();
    let clean = FunctionalSample::from_rows(&rows, grid).unwrap();
    let exact = test_ftr(&clean, &cfg, &cal).unwrap().statistic / n as f64;
    let exact_err = (exact / (d as f64 / 4.0) - 1.0).abs();
    outcome(
        (ratio - 1.0).abs() <= 0.10 && exact_err <= 1e-9,
        format!("FTR1/n over (d/4)rho^2 at n = 200: {ratio:.4}; signal-only rel err {exact_err:.1e}"),
    )
}

fn scenario_spot_checks() -> Outcome {
    let (d, n, reps) = (31, 20, 1000);
    let cal = Calibrator::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for n_rho2 in [50.0, 0.01] {
        let spec = DgpSpec::new(DgpKind::Scenario { kind: Scenario::A, rho2: n_rho2 / n as f64 }, d, n * d, 808);
        let dgp = Dgp::new(spec).unwrap();
        let known = Noise::Known(dgp.known_noise().unwrap());
        let cfgs = [
            TestConfig::new(d, Family::FunctionalTr, Mode::Single).with_noise(known.clone()),
            TestConfig::new(d, Family::Anova, Mode::AllSeasonal).with_noise(known),
        ];
        let r = rejection_rates(&dgp, &cfgs, reps, &cal).unwrap();
        let se = binomial_se(ALPHA, reps);
        for (cfg, e) in cfgs.iter().zip(&r) {
            let pass = if n_rho2 > 1.0 { e.rate >= 0.95 } else { e.rate >= ALPHA - 2.0 * se && e.rate <= ALPHA + 3.0 * se };
            ok &= pass && e.failures == 0;
            parts.push(format!("n rho2 = {n_rho2} {} {:.1}%", cfg.id(), 100.0 * e.rate));
        }
    }
    outcome(ok, format!("scenario A, d = 31: {}", parts.join(", ")))
}

fn determinism() -> Outcome {
    let render = || {
        let cal = Calibrator::new(McConfig { replications: 20_000, ..McConfig::default() });
        let spec = DgpSpec::new(DgpKind::ModelS { signal: Signal::Step, loading: Loading::Decaying }, 7, 70, 909);
        let dgp = Dgp::new(spec.clone()).unwrap();
        let cfgs = lp_configs(7, &dgp);
        let curve = local_power_curve(&spec, &cfgs, &[0.0, 1.5, 3.0], 200, &cal).unwrap();
        let mut lp = Vec::new();
        write_power_csv(&mut lp, &curve).unwrap();
        let null = Dgp::new(DgpSpec::new(DgpKind::Ma5Null, 7, 210, 909)).unwrap();
        let sim_cfgs = dependent_suite(210);
        let est = rejection_rates(&null, &sim_cfgs, 200, &cal).unwrap();
        let mut rates = Vec::new();
        write_rates_csv(&mut rates, &RateRow::collect(null.spec(), &sim_cfgs, &est)).unwrap();
        (lp, rates)
    };
    let (a, b) = (render(), render());
    outcome(a == b, format!("repeated simulate/localpower runs: {} + {} bytes, identical = {}", a.1.len(), a.0.len(), a == b))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, identities),
        (2, null_laws),
        (3, quantile_oracles),
        (4, empirical_size),
        (5, power_ordering),
        (6, local_power),
        (7, consistency),
        (8, scenario_spot_checks),
        (9, determinism),
    ];
    let mut failed = 0;
    for (id, check) in criteria {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {tag}  {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
