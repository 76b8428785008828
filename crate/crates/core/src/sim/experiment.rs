//! Rejection-rate and local-power experiments.

use std::io::Write;

use rayon::prelude::*;

use super::{Dgp, DgpSpec};
use crate::error::{Error, Result};
use crate::fdata::FunctionalSample;
use crate::hypothesis::{run_multivariate, run_test, Family, MultivariatePair, TestConfig};
use crate::nulldist::Calibrator;

pub const MIN_REPS: usize = 200;

/// Share of rejections over the replications that produced a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    /// Binomial standard error.
    pub se: f64,
    pub reps: usize,
    pub rejections: usize,
    /// Replications whose test returned an error.
    pub failures: usize,
}

impl RateEstimate {
    fn from_counts(reps: usize, rejections: usize, failures: usize) -> Self {
        let used = reps - failures;
        let rate = if used > 0 { rejections as f64 / used as f64 } else { f64::NAN };
        let se = if used > 0 { (rate * (1.0 - rate) / used as f64).sqrt() } else { f64::NAN };
        Self { rate, se, reps, rejections, failures }
    }
}

/// Decisions of every configuration on one sample. EV and TR statistics
/// sharing a projection are computed once.
fn decisions(sample: &FunctionalSample, configs: &[TestConfig], cal: &Calibrator) -> Vec<Option<bool>> {
    let mut pairs: Vec<(TestConfig, Option<MultivariatePair>)> = Vec::new();
    configs
        .iter()
        .map(|cfg| match cfg.family {
            Family::MultivariateEv | Family::MultivariateTr => {
                let key = TestConfig { family: Family::MultivariateEv, ..cfg.clone() };
                let pair = match pairs.iter().find(|(k, _)| *k == key) {
                    Some((_, p)) => p.clone(),
                    None => {
                        let p = run_multivariate(sample, cfg, cal).ok();
                        pairs.push((key, p.clone()));
                        p
                    }
                };
                pair.map(|p| if cfg.family == Family::MultivariateEv { p.ev.reject } else { p.tr.reject })
            }
            _ => run_test(sample, cfg, cal).ok().map(|r| r.reject),
        })
        .collect()
}

/// Rejection rates of several tests on common replications of `dgp`.
pub fn rejection_rates(dgp: &Dgp, configs: &[TestConfig], reps: usize, cal: &Calibrator) -> Result<Vec<RateEstimate>> {
    if reps < MIN_REPS {
        return Err(Error::TooFew { what: "replications", required: MIN_REPS, found: reps });
    }
    let per_rep: Vec<Vec<Option<bool>>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| match dgp.sample(rep) {
            Ok(s) => decisions(&s, configs, cal),
            Err(_) => vec![None; configs.len()],
        })
        .collect();
    Ok((0..configs.len())
        .map(|c| {
            let rejections = per_rep.iter().filter(|r| r[c] == Some(true)).count();
            let failures = per_rep.iter().filter(|r| r[c].is_none()).count();
            RateEstimate::from_counts(reps, rejections, failures)
        })
        .collect())
}

pub fn rejection_rate(dgp: &Dgp, config: &TestConfig, reps: usize, cal: &Calibrator) -> Result<RateEstimate> {
    Ok(rejection_rates(dgp, std::slice::from_ref(config), reps, cal)?.remove(0))
}

/// Local power `LP(x)` of several tests: the signal is scaled by `x/√N`
/// and the replications are shared across `x` (common random numbers).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub xs: Vec<f64>,
    pub labels: Vec<String>,
    /// `rates[i][c]` is test `c` at `xs[i]`.
    pub rates: Vec<Vec<RateEstimate>>,
    pub reps: usize,
    pub seed: u64,
}

impl PowerCurve {
    pub fn column(&self, label: &str) -> Option<Vec<RateEstimate>> {
        let c = self.labels.iter().position(|l| l == label)?;
        Some(self.rates.iter().map(|row| row[c]).collect())
    }
}

/// `TEST` or `TEST p=k` for a projected configuration.
pub fn config_label(cfg: &TestConfig) -> String {
    match &cfg.projection {
        Some(p) => format!("{} p={}", cfg.id(), p.dim),
        None => cfg.id().to_string(),
    }
}

pub fn local_power_curve(
    base: &DgpSpec,
    configs: &[TestConfig],
    xs: &[f64],
    reps: usize,
    cal: &Calibrator,
) -> Result<PowerCurve> {
    let mut rates = Vec::with_capacity(xs.len());
    for &x in xs {
        let dgp = Dgp::new(base.clone().with_local_scale(x))?;
        rates.push(rejection_rates(&dgp, configs, reps, cal)?);
    }
    Ok(PowerCurve { xs: xs.to_vec(), labels: configs.iter().map(config_label).collect(), rates, reps, seed: base.seed })
}

/// One line of a size/power table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub dgp: String,
    pub n_obs: usize,
    pub test: String,
    pub alpha: f64,
    pub estimate: RateEstimate,
    pub seed: u64,
}

impl RateRow {
    pub fn collect(spec: &DgpSpec, configs: &[TestConfig], estimates: &[RateEstimate]) -> Vec<RateRow> {
        configs
            .iter()
            .zip(estimates)
            .map(|(cfg, e)| RateRow {
                dgp: spec.kind.label(),
                n_obs: spec.n_obs,
                test: config_label(cfg),
                alpha: cfg.alpha,
                estimate: *e,
                seed: spec.seed,
            })
            .collect()
    }
}

/// Columns: `dgp,N,test,alpha,rate,se,reps,failures,seed`.
pub fn write_rates_csv<W: Write>(out: &mut W, rows: &[RateRow]) -> std::io::Result<()> {
    writeln!(out, "dgp,N,test,alpha,rate,se,reps,failures,seed")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{},{},{}",
            r.dgp, r.n_obs, r.test, r.alpha, r.estimate.rate, r.estimate.se, r.estimate.reps, r.estimate.failures, r.seed
        )?;
    }
    Ok(())
}

/// Columns: `x,test,rate,se,reps,failures,seed`.
pub fn write_power_csv<W: Write>(out: &mut W, curve: &PowerCurve) -> std::io::Result<()> {
    writeln!(out, "x,test,rate,se,reps,failures,seed")?;
    for (x, row) in curve.xs.iter().zip(&curve.rates) {
        for (label, e) in curve.labels.iter().zip(row) {
            writeln!(out, "{x},{label},{:.6},{:.6},{},{},{}", e.rate, e.se, e.reps, e.failures, curve.seed)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{Mode, Noise, Projection};
    use crate::nulldist::McConfig;
    use crate::sim::{DgpKind, Loading, Signal};

    #[test]
    fn alpha_one_always_rejects() {
        let spec = DgpSpec::new(DgpKind::ModelS { signal: Signal::Cosine, loading: Loading::First }, 7, 21, 3).with_scale(0.0);
        let dgp = Dgp::new(spec).unwrap();
        let cfg = TestConfig::new(7, Family::FunctionalTr, Mode::Single).with_alpha(1.0);
        let r = rejection_rate(&dgp, &cfg, 200, &Calibrator::default()).unwrap();
        assert_eq!(r.rate, 1.0);
        assert!(rejection_rate(&dgp, &cfg, 10, &Calibrator::default()).is_err());
    }

    #[test]
    fn curve_is_reproducible() {
        let spec = DgpSpec::new(DgpKind::ModelS { signal: Signal::Step, loading: Loading::Decaying }, 7, 70, 11);
        let dgp = Dgp::new(spec.clone()).unwrap();
        let known = Noise::Known(dgp.known_noise().unwrap());
        let configs = vec![
            TestConfig::new(7, Family::MultivariateEv, Mode::AllSeasonal)
                .with_noise(known.clone())
                .with_projection(Projection { dim: 3, source: crate::hypothesis::BasisSource::User(dgp.basis().clone()) }),
            TestConfig::new(7, Family::FunctionalTr, Mode::Single).with_noise(known),
        ];
        let cal = Calibrator::new(McConfig { replications: 20_000, ..McConfig::default() });
        let a = local_power_curve(&spec, &configs, &[0.0, 3.0], 200, &cal).unwrap();
        let b = local_power_curve(&spec, &configs, &[0.0, 3.0], 200, &cal).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.labels, vec!["MEV2 p=3".to_string(), "FTR1".to_string()]);
        let mut buf = Vec::new();
        write_power_csv(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,test,rate,se,reps,failures,seed\n0,MEV2 p=3,"));
        assert!(a.rates[1][0].rate > a.rates[0][0].rate);
    }
}
