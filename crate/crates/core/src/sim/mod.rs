//! Data-generating processes and seeded Monte Carlo experiments: size and
//! power tables, local power curves and the local-alternative scenarios.
//!
//! Every replication `r` draws from ChaCha stream `r` of the experiment
//! seed, so results are bit-identical across runs and thread counts.

mod experiment;
mod signals;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fdata::{FunctionalSample, Grid, PeriodSpec};
use crate::hypothesis::KnownNoise;

pub use experiment::{
    config_label, local_power_curve, rejection_rate, rejection_rates, write_power_csv, write_rates_csv, PowerCurve, RateEstimate,
    RateRow,
};
pub use signals::{
    legendre_basis, mean_squared_signal, scenario_abc, Loading, Scenario, Signal, PUBLISHED_RANDOM_SIGNAL,
};

pub const DEFAULT_GRID: usize = 96;
/// Number of orthonormal curves carrying the noise.
pub const NOISE_DIM: usize = 9;
/// Moving-average weights `a_k = e^{-k}`, `k = 1..5`.
pub const MA_ORDER: usize = 5;
/// Target `E‖Z‖²` of the moving-average noise.
pub const MA_NOISE_ENERGY: f64 = 3.1;
/// Target mean squared signal of the synthetic weekday means.
pub const WEEKDAY_MSS: f64 = 0.1;

pub fn ma_coefficients() -> [f64; MA_ORDER] {
    std::array::from_fn(|k| (-(k as f64 + 1.0)).exp())
}

/// Variances `1, 1/2, …, 2^{-8}` of the noise scores.
pub fn default_noise_eigenvalues() -> Vec<f64> {
    (0..NOISE_DIM).map(|j| 2f64.powi(-(j as i32))).collect()
}

/// Innovation eigenvalues scaled so that the moving average has
/// `E‖Z‖² = energy`.
pub fn ma_innovation_eigenvalues(energy: f64) -> Vec<f64> {
    let shape = default_noise_eigenvalues();
    let gain = 1.0 + ma_coefficients().iter().map(|a| a * a).sum::<f64>();
    let c = energy / (gain * shape.iter().sum::<f64>());
    shape.into_iter().map(|l| l * c).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum DgpKind {
    /// `Y_t = scale · s_t w + Σ_k z_{t,k} v_k` with i.i.d. Gaussian scores.
    ModelS { signal: Signal, loading: Loading },
    /// Moving average of order five of i.i.d. Gaussian curves.
    Ma5Null,
    /// The moving average plus frozen weekday means.
    Ma5PlusMeans,
    /// `Y_t = scale · w_t + Σ_k z_{t,k} v_k` for a local-alternative scenario.
    Scenario { kind: Scenario, rho2: f64 },
}

impl DgpKind {
    pub fn label(&self) -> String {
        match self {
            DgpKind::ModelS { signal, loading } => format!("model-s-i{}-j{}", signal.index(), loading.index()),
            DgpKind::Ma5Null => "ma5-null".into(),
            DgpKind::Ma5PlusMeans => "ma5-plus-means".into(),
            DgpKind::Scenario { kind, rho2 } => format!("scenario-{kind:?}-rho2-{rho2}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub period: usize,
    pub n_obs: usize,
    /// Signal multiplier (`x/√N` for local power, 1 otherwise).
    pub scale: f64,
    /// Score variances of the noise (innovations for the moving average).
    pub noise_eigenvalues: Vec<f64>,
    pub grid_size: usize,
    pub seed: u64,
    /// Seed of everything drawn once per design (random signal, weekday means).
    pub design_seed: u64,
}

impl DgpSpec {
    pub fn new(kind: DgpKind, period: usize, n_obs: usize, seed: u64) -> Self {
        let noise_eigenvalues = match kind {
            DgpKind::Ma5Null | DgpKind::Ma5PlusMeans => ma_innovation_eigenvalues(MA_NOISE_ENERGY),
            _ => default_noise_eigenvalues(),
        };
        Self {
            kind,
            period,
            n_obs,
            scale: 1.0,
            noise_eigenvalues,
            grid_size: DEFAULT_GRID,
            seed,
            design_seed: 20_190_601,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Local scale `x/√N`.
    pub fn with_local_scale(self, x: f64) -> Self {
        let n = self.n_obs as f64;
        self.with_scale(x / n.sqrt())
    }
}

/// A realised design: grid, orthonormal curves and the periodic signal.
#[derive(Debug, Clone)]
pub struct Dgp {
    spec: DgpSpec,
    grid: Grid,
    /// Noise directions (rows).
    basis: DMatrix<f64>,
    /// `d × G` periodic signal before scaling; row `k` is added at times
    /// `t ≡ k + 1 (mod d)`, 1-based.
    signal: DMatrix<f64>,
}

impl Dgp {
    pub fn new(spec: DgpSpec) -> Result<Self> {
        PeriodSpec::new(spec.period, spec.n_obs)?;
        if spec.period < 3 {
            return Err(Error::InvalidPeriod(spec.period));
        }
        if spec.noise_eigenvalues.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidSpec("noise eigenvalues must be finite and non-negative".into()));
        }
        if !spec.scale.is_finite() {
            return Err(Error::InvalidSpec("signal scale must be finite".into()));
        }
        let grid = Grid::uniform(spec.grid_size)?;
        let dirs_needed = match spec.kind {
            DgpKind::Scenario { kind: Scenario::A | Scenario::C, .. } => spec.period.max(spec.noise_eigenvalues.len()),
            _ => spec.noise_eigenvalues.len().max(NOISE_DIM),
        };
        let directions = legendre_basis(&grid, dirs_needed)?;
        let basis = directions.rows(0, spec.noise_eigenvalues.len()).into_owned();
        let d = spec.period;
        let signal = match &spec.kind {
            DgpKind::ModelS { signal, loading } => {
                let s = signal.values(d, spec.design_seed);
                let psi = loading.coefficients(NOISE_DIM);
                let curve = psi.transpose() * directions.rows(0, NOISE_DIM);
                DMatrix::from_fn(d, grid.len(), |t, g| s[t] * curve[g])
            }
            DgpKind::Ma5Null => DMatrix::zeros(d, grid.len()),
            DgpKind::Ma5PlusMeans => weekday_signal(&grid, &directions, d, spec.design_seed, WEEKDAY_MSS)?,
            DgpKind::Scenario { kind, rho2 } => scenario_abc(*kind, d, *rho2, &directions)?,
        };
        Ok(Self { spec, grid, basis, signal })
    }

    pub fn spec(&self) -> &DgpSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Noise directions, one curve per row.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Unscaled periodic signal, `d × G`.
    pub fn signal(&self) -> &DMatrix<f64> {
        &self.signal
    }

    /// Mean squared signal after scaling.
    pub fn mss_signal(&self) -> f64 {
        self.spec.scale * self.spec.scale * mean_squared_signal(&self.grid, &self.signal)
    }

    /// `E‖Z_t‖²` of the noise.
    pub fn noise_energy(&self) -> f64 {
        let total: f64 = self.spec.noise_eigenvalues.iter().sum();
        match self.spec.kind {
            DgpKind::Ma5Null | DgpKind::Ma5PlusMeans => {
                total * (1.0 + ma_coefficients().iter().map(|a| a * a).sum::<f64>())
            }
            _ => total,
        }
    }

    /// Covariance of the i.i.d. noise, for known-covariance experiments.
    pub fn known_noise(&self) -> Result<KnownNoise> {
        if matches!(self.spec.kind, DgpKind::Ma5Null | DgpKind::Ma5PlusMeans) {
            return Err(Error::Unsupported("the moving-average noise has no single covariance law".into()));
        }
        Ok(KnownNoise::Functional { eigenvalues: self.spec.noise_eigenvalues.clone(), eigencurves: self.basis.clone() })
    }

    /// The sample of replication `rep`.
    pub fn sample(&self, rep: u64) -> Result<FunctionalSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(rep);
        self.sample_with(&mut rng)
    }

    pub fn sample_with(&self, rng: &mut impl Rng) -> Result<FunctionalSample> {
        let n = self.spec.n_obs;
        let sd: DVector<f64> = DVector::from_iterator(
            self.spec.noise_eigenvalues.len(),
            self.spec.noise_eigenvalues.iter().map(|l| l.sqrt()),
        );
        let k = sd.len();
        let scores = match self.spec.kind {
            DgpKind::Ma5Null | DgpKind::Ma5PlusMeans => {
                let a = ma_coefficients();
                let eps = DMatrix::from_fn(n + MA_ORDER, k, |_, j| sd[j] * { let z: f64 = StandardNormal.sample(rng); z });
                DMatrix::from_fn(n, k, |t, j| {
                    eps[(t + MA_ORDER, j)] + (1..=MA_ORDER).map(|l| a[l - 1] * eps[(t + MA_ORDER - l, j)]).sum::<f64>()
                })
            }
            _ => DMatrix::from_fn(n, k, |_, j| sd[j] * { let z: f64 = StandardNormal.sample(rng); z }),
        };
        let mut values = scores * &self.basis;
        let d = self.spec.period;
        if self.spec.scale != 0.0 {
            for t in 0..n {
                let mut row = values.row_mut(t);
                row += self.signal.row(t % d) * self.spec.scale;
            }
        }
        FunctionalSample::new(values, self.grid.clone())
    }
}

/// One-shot generation of replication 0.
pub fn gen(spec: &DgpSpec) -> Result<FunctionalSample> {
    Dgp::new(spec.clone())?.sample(0)
}

/// Frozen weekday means: scores drawn with the noise variance profile,
/// centred across days and scaled to the target mean squared signal.
fn weekday_signal(grid: &Grid, directions: &DMatrix<f64>, d: usize, seed: u64, mss: f64) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = default_noise_eigenvalues();
    let coef = DMatrix::from_fn(d, NOISE_DIM, |_, j| shape[j].sqrt() * { let z: f64 = StandardNormal.sample(&mut rng); z });
    let mut curves = coef * directions.rows(0, NOISE_DIM);
    let mean = curves.row_mean();
    for mut row in curves.row_iter_mut() {
        row -= &mean;
    }
    let current = mean_squared_signal(grid, &curves);
    if !(current > 0.0) {
        return Err(Error::InvalidSpec("weekday means vanished".into()));
    }
    Ok(curves * (mss / current).sqrt())
}
