//! The eight periodicity tests.
//!
//! Multivariate tests work on projected scores and compare the largest
//! eigenvalue (EV) or the trace (TR) of the whitened DFT Gram matrix with
//! Wishart and Gamma laws. The functional trace test (FTR) uses the
//! unwhitened Gram matrix on the curve space with a hypoexponential law.
//! The ANOVA statistics are rescaled TR statistics and share their laws.
//!
//! Nuisance covariances are always estimated from the residuals after the
//! periodic group means are removed, so they stay consistent under the
//! alternative.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimators::{
    functional_spectra, inv_sqrt, inv_sqrt_real, multivariate_spectra, truncate_rates, HypoExpSpec, KernelSpec,
    SpectralDensity, DEFAULT_FLOOR,
};
use crate::fdata::{fpca, group_means, project, Centering, Fpca, FunctionalSample, MultivariateSeries, PeriodSpec};
use crate::freq::{dft, gram, seasonal_frequencies, FrequencySet, Metric, Whitening};
use crate::linalg::symmetric_part;
use crate::nulldist::{even_d_theta_law, Calibrator, MixtureLaw, NullLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    MultivariateEv,
    MultivariateTr,
    FunctionalTr,
    /// Functional ANOVA without a projection, multivariate ANOVA with one.
    Anova,
}

/// Which seasonal frequencies enter the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Only the first seasonal frequency `2π/d`.
    Single,
    /// Every seasonal frequency (plus `π` for an even period).
    AllSeasonal,
}

/// Noise covariance given rather than estimated (local power studies).
#[derive(Debug, Clone, PartialEq)]
pub enum KnownNoise {
    /// Covariance operator `Σ λ_j e_j ⊗ e_j`; rows of `eigencurves` are the
    /// `e_j` on the sample grid.
    Functional { eigenvalues: Vec<f64>, eigencurves: DMatrix<f64> },
    /// Covariance of the multivariate scores.
    Matrix(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    IidGaussian,
    /// Long-run covariance from lag-window spectral estimates.
    Dependent(KernelSpec),
    Known(KnownNoise),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSource {
    /// Leading principal curves of the residual covariance.
    Fpca,
    /// Caller-supplied curves, one per row.
    User(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub dim: usize,
    pub source: BasisSource,
}

impl Projection {
    pub fn fpca(dim: usize) -> Self {
        Self { dim, source: BasisSource::Fpca }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub period: usize,
    pub family: Family,
    pub mode: Mode,
    pub noise: Noise,
    pub projection: Option<Projection>,
    pub alpha: f64,
}

impl TestConfig {
    pub fn new(period: usize, family: Family, mode: Mode) -> Self {
        Self { period, family, mode, noise: Noise::IidGaussian, projection: None, alpha: 0.05 }
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = Some(projection);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn id(&self) -> TestId {
        match (self.family, self.mode) {
            (Family::MultivariateEv, Mode::Single) => TestId::Mev1,
            (Family::MultivariateEv, Mode::AllSeasonal) => TestId::Mev2,
            (Family::MultivariateTr, Mode::Single) => TestId::Mtr1,
            (Family::MultivariateTr, Mode::AllSeasonal) => TestId::Mtr2,
            (Family::FunctionalTr, Mode::Single) => TestId::Ftr1,
            (Family::FunctionalTr, Mode::AllSeasonal) => TestId::Ftr2,
            (Family::Anova, _) if self.projection.is_some() => TestId::Mav,
            (Family::Anova, _) => TestId::Fav,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.period == 2 {
            return Err(Error::Unsupported(
                "period 2 has no seasonal frequency besides pi; difference the series and test for a zero mean".into(),
            ));
        }
        if let Some(p) = &self.projection {
            if p.dim == 0 {
                return Err(Error::InvalidSpec("projection dimension must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestId {
    Mev1,
    Mtr1,
    Mev2,
    Mtr2,
    Ftr1,
    Ftr2,
    Fav,
    Mav,
}

impl TestId {
    pub const ALL: [TestId; 8] =
        [TestId::Mev1, TestId::Mtr1, TestId::Mev2, TestId::Mtr2, TestId::Ftr1, TestId::Ftr2, TestId::Fav, TestId::Mav];

    pub fn name(self) -> &'static str {
        match self {
            TestId::Mev1 => "MEV1",
            TestId::Mtr1 => "MTR1",
            TestId::Mev2 => "MEV2",
            TestId::Mtr2 => "MTR2",
            TestId::Ftr1 => "FTR1",
            TestId::Ftr2 => "FTR2",
            TestId::Fav => "FAV",
            TestId::Mav => "MAV",
        }
    }

    pub fn is_functional(self) -> bool {
        matches!(self, TestId::Ftr1 | TestId::Ftr2 | TestId::Fav)
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown test '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test: TestId,
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    /// Monte Carlo standard error of the critical value, if simulated.
    pub mc_se: Option<f64>,
    /// Null law; `None` when the noise estimate vanishes and the law is a
    /// point mass at zero.
    pub law: Option<NullLaw>,
    /// Eigenvalues raised to the floor while whitening.
    pub floored_modes: usize,
    /// Share of variance captured by the projection, if any.
    pub explained_variance: Option<f64>,
    pub reject: bool,
}

impl TestResult {
    fn from_law(test: TestId, statistic: f64, law: NullLaw, alpha: f64, cal: &Calibrator) -> Result<Self> {
        let (critical_value, mc_se) = if alpha >= 1.0 {
            (0.0, None)
        } else {
            let q = cal.critical_value(&law, alpha)?;
            (q.value, (q.se > 0.0).then_some(q.se))
        };
        let p_value = cal.p_value(&law, statistic)?.value.clamp(0.0, 1.0);
        Ok(Self {
            test,
            statistic,
            critical_value,
            p_value,
            mc_se,
            law: Some(law),
            floored_modes: 0,
            explained_variance: None,
            reject: statistic > critical_value,
        })
    }

    fn degenerate(test: TestId, statistic: f64) -> Self {
        Self {
            test,
            statistic,
            critical_value: 0.0,
            p_value: if statistic > 0.0 { 0.0 } else { 1.0 },
            mc_se: None,
            law: None,
            floored_modes: 0,
            explained_variance: None,
            reject: statistic > 0.0,
        }
    }
}

/// EV and TR results computed from one whitened Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariatePair {
    pub ev: TestResult,
    pub tr: TestResult,
}

fn frequencies(period: &PeriodSpec, mode: Mode) -> FrequencySet {
    let all = seasonal_frequencies(period);
    match mode {
        Mode::Single => all.leading(1),
        Mode::AllSeasonal => all,
    }
}

fn residual_covariance(residuals: &DMatrix<f64>) -> DMatrix<f64> {
    symmetric_part(&(residuals.transpose() * residuals / residuals.nrows() as f64))
}

/// Spectral estimates at the main frequencies and, for an even period, at `π`.
fn split_spectra(
    spectra: Vec<SpectralDensity>,
    freqs: &FrequencySet,
) -> (Vec<SpectralDensity>, Option<SpectralDensity>) {
    let mut spectra = spectra;
    let nyq = freqs.has_nyquist().then(|| spectra.pop()).flatten();
    (spectra, nyq)
}

fn spectral_thetas(freqs: &FrequencySet) -> Vec<f64> {
    let mut thetas = freqs.thetas();
    if freqs.has_nyquist() {
        thetas.push(std::f64::consts::PI);
    }
    thetas
}

/// MEV and MTR tests on multivariate scores.
pub fn test_multivariate(series: &MultivariateSeries, cfg: &TestConfig, cal: &Calibrator) -> Result<MultivariatePair> {
    cfg.validate()?;
    let period = PeriodSpec::new(cfg.period, series.n_obs())?;
    let means = series.group_means(&period)?;
    let freqs = frequencies(&period, cfg.mode);
    let block = dft(series, &freqs)?;
    let p = series.dim();

    let (entries, floored) = match &cfg.noise {
        Noise::IidGaussian => {
            let sigma = residual_covariance(&means.residuals(series.scores()));
            let w = inv_sqrt_real(&sigma, DEFAULT_FLOOR)?;
            (gram(&block, Metric::Identity, Whitening::Matrix(&w.matrix))?, w.floored)
        }
        Noise::Known(KnownNoise::Matrix(sigma)) => {
            let w = inv_sqrt_real(sigma, DEFAULT_FLOOR)?;
            (gram(&block, Metric::Identity, Whitening::Matrix(&w.matrix))?, w.floored)
        }
        Noise::Known(KnownNoise::Functional { .. }) => {
            return Err(Error::InvalidSpec(
                "functional noise needs the projection basis; use run_test on the curves".into(),
            ))
        }
        Noise::Dependent(kernel) => {
            let spectra = multivariate_spectra(series, &means, &spectral_thetas(&freqs), kernel)?;
            let (main, nyq) = split_spectra(spectra, &freqs);
            let mut floored = 0;
            let mut whiteners = Vec::with_capacity(main.len());
            for s in &main {
                let w = inv_sqrt(&s.matrix, DEFAULT_FLOOR)?;
                floored += w.floored;
                whiteners.push(w.matrix);
            }
            let nyq_w = match nyq {
                Some(s) => {
                    let w = inv_sqrt_real(&s.matrix.map(|z| z.re), DEFAULT_FLOOR)?;
                    floored += w.floored;
                    Some(w.matrix)
                }
                None => None,
            };
            let g = gram(&block, Metric::Identity, Whitening::PerFrequency { main: &whiteners, nyquist: nyq_w.as_ref() })?;
            (g, floored)
        }
    };

    let rows = entries.dim();
    let (ev_id, tr_id, tr_shape) = match cfg.mode {
        Mode::Single => (TestId::Mev1, TestId::Mtr1, p as f64),
        Mode::AllSeasonal => (TestId::Mev2, TestId::Mtr2, (p * rows) as f64 / 2.0),
    };
    let ev_law = NullLaw::WishartMaxEig { p, dof: rows };
    let tr_law = NullLaw::Gamma { shape: tr_shape };
    let mut ev = TestResult::from_law(ev_id, entries.largest_eigenvalue()?, ev_law, cfg.alpha, cal)?;
    let mut tr = TestResult::from_law(tr_id, entries.trace(), tr_law, cfg.alpha, cal)?;
    ev.floored_modes = floored;
    tr.floored_modes = floored;
    Ok(MultivariatePair { ev, tr })
}

/// Hypoexponential law of the functional trace statistic, one summand per
/// frequency plus the Nyquist term for an even period.
fn functional_law(
    sample: &FunctionalSample,
    means: &crate::fdata::GroupMeans,
    freqs: &FrequencySet,
    noise: &Noise,
) -> Result<Option<NullLaw>> {
    let (main, nyq): (Vec<Vec<f64>>, Option<Vec<f64>>) = match noise {
        Noise::IidGaussian => {
            let eig = fpca(sample, Centering::Periodic(means))?.eigenvalues;
            (vec![eig.clone(); freqs.len()], freqs.has_nyquist().then_some(eig))
        }
        Noise::Known(KnownNoise::Functional { eigenvalues, .. }) => {
            let eig = eigenvalues.clone();
            (vec![eig.clone(); freqs.len()], freqs.has_nyquist().then_some(eig))
        }
        Noise::Known(KnownNoise::Matrix(_)) => {
            return Err(Error::InvalidSpec("functional tests need a functional noise law".into()))
        }
        Noise::Dependent(kernel) => {
            let spectra = functional_spectra(sample, means, &spectral_thetas(freqs), kernel)?;
            let (main, nyq) = split_spectra(spectra, freqs);
            (main.into_iter().map(|s| s.eigenvalues).collect(), nyq.map(|s| s.eigenvalues))
        }
    };
    let truncate = |eig: &[f64]| -> Option<HypoExpSpec> {
        let total: f64 = eig.iter().filter(|&&l| l > 0.0).sum();
        truncate_rates(eig, total, None).ok()
    };
    let specs: Vec<HypoExpSpec> = main.iter().filter_map(|e| truncate(e)).collect();
    let theta = match nyq.as_deref().and_then(truncate) {
        Some(spec) => Some(even_d_theta_law(spec.rates())?),
        None => None,
    };
    if specs.is_empty() && theta.is_none() {
        return Ok(None);
    }
    if specs.len() == 1 && theta.is_none() {
        return Ok(Some(NullLaw::HypoExp(specs.into_iter().next().expect("one spec"))));
    }
    Ok(Some(NullLaw::Mixture(MixtureLaw::new(specs, theta)?)))
}

/// Functional trace test (FTR1 or FTR2 by `cfg.mode`).
pub fn test_ftr(sample: &FunctionalSample, cfg: &TestConfig, cal: &Calibrator) -> Result<TestResult> {
    cfg.validate()?;
    let period = PeriodSpec::new(cfg.period, sample.n_obs())?;
    let means = group_means(sample.values(), &period)?;
    let freqs = frequencies(&period, cfg.mode);
    let block = dft(sample, &freqs)?;
    let statistic = gram(&block, Metric::Quadrature(sample.grid()), Whitening::None)?.trace();
    let id = match cfg.mode {
        Mode::Single => TestId::Ftr1,
        Mode::AllSeasonal => TestId::Ftr2,
    };
    match functional_law(sample, &means, &freqs, &cfg.noise)? {
        Some(law) => TestResult::from_law(id, statistic, law, cfg.alpha, cal),
        None => Ok(TestResult::degenerate(id, statistic)),
    }
}

/// `(1/d) Σ_k n ‖Ȳ_k − Ȳ‖²` in the given metric.
fn anova_statistic(values: &DMatrix<f64>, period: &PeriodSpec, weights: Option<&[f64]>) -> Result<f64> {
    let means = group_means(values, period)?;
    let n = period.cycles() as f64;
    let d = period.period() as f64;
    let mut total = 0.0;
    for k in 0..period.period() {
        for g in 0..values.ncols() {
            let dev = means.wk_means[(k, g)];
            total += weights.map_or(1.0, |w| w[g]) * dev * dev;
        }
    }
    Ok(n * total / d)
}

/// Functional ANOVA test (FAV) on curves, or multivariate ANOVA (MAV) when
/// `cfg.projection` is set. The law is that of the matching TR test,
/// rescaled by `2/d`.
pub fn test_anova(sample: &FunctionalSample, cfg: &TestConfig, cal: &Calibrator) -> Result<TestResult> {
    cfg.validate()?;
    if cfg.projection.is_some() {
        let prepared = prepare_projection(sample, cfg)?;
        let mut r = test_anova_scores(&prepared.series, &prepared.config, cal)?;
        r.explained_variance = prepared.explained;
        return Ok(r);
    }
    let period = PeriodSpec::new(cfg.period, sample.n_obs())?;
    let statistic = anova_statistic(sample.values(), &period, Some(sample.grid().weights()))?;
    let tr_cfg = TestConfig { family: Family::FunctionalTr, mode: Mode::AllSeasonal, ..cfg.clone() };
    let means = group_means(sample.values(), &period)?;
    let freqs = seasonal_frequencies(&period);
    let factor = 2.0 / period.period() as f64;
    match functional_law(sample, &means, &freqs, &tr_cfg.noise)? {
        Some(law) => TestResult::from_law(TestId::Fav, statistic, law.scaled(factor), cfg.alpha, cal),
        None => Ok(TestResult::degenerate(TestId::Fav, statistic)),
    }
}

/// Multivariate ANOVA (MAV) on scores.
pub fn test_anova_scores(series: &MultivariateSeries, cfg: &TestConfig, cal: &Calibrator) -> Result<TestResult> {
    cfg.validate()?;
    let period = PeriodSpec::new(cfg.period, series.n_obs())?;
    let tr_cfg = TestConfig { family: Family::MultivariateTr, mode: Mode::AllSeasonal, ..cfg.clone() };
    let pair = test_multivariate(series, &tr_cfg, cal)?;
    let factor = 2.0 / period.period() as f64;
    let whitener = match &cfg.noise {
        Noise::IidGaussian => {
            let means = series.group_means(&period)?;
            Some(residual_covariance(&means.residuals(series.scores())))
        }
        Noise::Known(KnownNoise::Matrix(sigma)) => Some(sigma.clone()),
        _ => None,
    };
    let statistic = match whitener {
        Some(sigma) => {
            let w = inv_sqrt_real(&sigma, DEFAULT_FLOOR)?.matrix;
            anova_statistic(&(series.scores() * w.transpose()), &period, None)?
        }
        // With frequency-dependent whitening the group-mean form has no
        // single metric; use the rescaled trace statistic.
        None => factor * pair.tr.statistic,
    };
    let law = pair.tr.law.expect("multivariate laws are never degenerate").scaled(factor);
    let mut r = TestResult::from_law(TestId::Mav, statistic, law, cfg.alpha, cal)?;
    r.floored_modes = pair.tr.floored_modes;
    Ok(r)
}

struct PreparedProjection {
    series: MultivariateSeries,
    config: TestConfig,
    explained: Option<f64>,
}

/// Project the curves as requested and translate a functional noise law
/// into the covariance of the scores.
fn prepare_projection(sample: &FunctionalSample, cfg: &TestConfig) -> Result<PreparedProjection> {
    let proj = cfg
        .projection
        .as_ref()
        .ok_or_else(|| Error::InvalidSpec("multivariate tests need a projection".into()))?;
    let period = PeriodSpec::new(cfg.period, sample.n_obs())?;
    let (basis, explained) = match &proj.source {
        BasisSource::Fpca => {
            let means = group_means(sample.values(), &period)?;
            let pc: Fpca = fpca(sample, Centering::Periodic(&means))?;
            if proj.dim > pc.eigencurves.nrows() {
                return Err(Error::TooFew { what: "principal curves", required: proj.dim, found: pc.eigencurves.nrows() });
            }
            (pc.basis(proj.dim), Some(pc.explained_fraction(proj.dim)))
        }
        BasisSource::User(b) => {
            if b.nrows() < proj.dim {
                return Err(Error::TooFew { what: "basis curves", required: proj.dim, found: b.nrows() });
            }
            (b.rows(0, proj.dim).into_owned(), None)
        }
    };
    let series = project(sample, &basis)?;
    let noise = match &cfg.noise {
        Noise::Known(KnownNoise::Functional { eigenvalues, eigencurves }) => {
            // Cov(B W Y) = M diag(λ) M' with M = B W E'.
            let m = sample.grid().row_gram(&basis, eigencurves);
            if m.ncols() != eigenvalues.len() {
                return Err(Error::LengthMismatch { expected: m.ncols(), found: eigenvalues.len() });
            }
            let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * eigenvalues[j]);
            Noise::Known(KnownNoise::Matrix(symmetric_part(&(scaled * m.transpose()))))
        }
        other => other.clone(),
    };
    Ok(PreparedProjection { series, config: TestConfig { noise, ..cfg.clone() }, explained })
}

/// Run any configured test on functional data.
pub fn run_test(sample: &FunctionalSample, cfg: &TestConfig, cal: &Calibrator) -> Result<TestResult> {
    match cfg.family {
        Family::FunctionalTr => test_ftr(sample, cfg, cal),
        Family::Anova => test_anova(sample, cfg, cal),
        Family::MultivariateEv | Family::MultivariateTr => {
            cfg.validate()?;
            let prepared = prepare_projection(sample, cfg)?;
            let pair = test_multivariate(&prepared.series, &prepared.config, cal)?;
            let mut r = if cfg.family == Family::MultivariateEv { pair.ev } else { pair.tr };
            r.explained_variance = prepared.explained;
            Ok(r)
        }
    }
}

/// Both multivariate statistics for one projected configuration.
pub fn run_multivariate(sample: &FunctionalSample, cfg: &TestConfig, cal: &Calibrator) -> Result<MultivariatePair> {
    cfg.validate()?;
    let prepared = prepare_projection(sample, cfg)?;
    let mut pair = test_multivariate(&prepared.series, &prepared.config, cal)?;
    pair.ev.explained_variance = prepared.explained;
    pair.tr.explained_variance = prepared.explained;
    Ok(pair)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub config: TestConfig,
    pub outcome: std::result::Result<TestResult, String>,
}

/// Results of a list of configurations; failures are kept per row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

/// One line of the p-value table: `FF` for the functional tests or the
/// projection dimension for the multivariate ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLine {
    pub label: String,
    pub explained_variance: Option<f64>,
    /// p-values in [`SuiteReport::COLUMNS`] order; `Err` holds the failure
    /// reason, `Ok(None)` a test that does not apply to the line.
    pub cells: Vec<std::result::Result<Option<f64>, String>>,
}

impl SuiteReport {
    pub const COLUMNS: [TestId; 6] = [TestId::Mev1, TestId::Mtr1, TestId::Mev2, TestId::Mtr2, TestId::Ftr1, TestId::Ftr2];

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// p-value table with a line per projection level (and `FF` first).
    pub fn table(&self) -> Vec<TableLine> {
        let mut lines: Vec<TableLine> = Vec::new();
        for row in &self.rows {
            let label = match &row.config.projection {
                Some(p) => p.dim.to_string(),
                None => "FF".to_string(),
            };
            let id = row.config.id();
            let Some(col) = Self::COLUMNS.iter().position(|&c| c == id) else { continue };
            let idx = match lines.iter().position(|l| l.label == label) {
                Some(i) => i,
                None => {
                    lines.push(TableLine { label: label.clone(), explained_variance: None, cells: vec![Ok(None); 6] });
                    lines.len() - 1
                }
            };
            let line = &mut lines[idx];
            line.cells[col] = match &row.outcome {
                Ok(r) => {
                    if r.explained_variance.is_some() {
                        line.explained_variance = r.explained_variance;
                    }
                    Ok(Some(r.p_value))
                }
                Err(e) => Err(e.clone()),
            };
        }
        lines.sort_by_key(|l| (l.label != "FF", l.label.parse::<usize>().unwrap_or(0)));
        lines
    }
}

/// Run every configuration on the same sample.
pub fn run_suite(sample: &FunctionalSample, configs: &[TestConfig], cal: &Calibrator) -> SuiteReport {
    SuiteReport {
        rows: configs
            .iter()
            .map(|cfg| SuiteRow { config: cfg.clone(), outcome: run_test(sample, cfg, cal).map_err(|e| e.to_string()) })
            .collect(),
    }
}

/// The six-column layout: FTR1 and FTR2 on the curves, and the four
/// multivariate tests at every projection level.
pub fn standard_suite(period: usize, levels: &[usize], noise: Noise, alpha: f64) -> Vec<TestConfig> {
    let mut out = Vec::new();
    for mode in [Mode::Single, Mode::AllSeasonal] {
        out.push(TestConfig::new(period, Family::FunctionalTr, mode).with_noise(noise.clone()).with_alpha(alpha));
    }
    for &p in levels {
        for mode in [Mode::Single, Mode::AllSeasonal] {
            for family in [Family::MultivariateEv, Family::MultivariateTr] {
                out.push(
                    TestConfig::new(period, family, mode)
                        .with_noise(noise.clone())
                        .with_projection(Projection::fpca(p))
                        .with_alpha(alpha),
                );
            }
        }
    }
    out
}
