//! Nuisance estimation: lag autocovariance operators, lag-window spectral
//! density estimates, matrix inverse square roots and rate truncation.
//!
//! All second-order quantities are computed from the residuals
//! `Y_t − ŵ_t − Ȳ`, which stay consistent whether or not a periodic
//! component is present.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fdata::{FunctionalSample, GroupMeans, MultivariateSeries};
use crate::linalg::{clamp_psd, eigen_desc, eigenvalues_desc, hermitian_part, to_complex};

/// Relative tolerance below which negative spectral eigenvalues are clamped.
pub const SPECTRAL_CLAMP_TOL: f64 = 1e-8;
/// Default relative eigenvalue floor of [`inv_sqrt`].
pub const DEFAULT_FLOOR: f64 = 1e-8;

/// Lag-`h` autocovariance kernel `K_h(u_g, u_g')`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovOperator {
    pub lag: i64,
    pub kernel: DMatrix<f64>,
}

pub fn autocov(sample: &FunctionalSample, means: &GroupMeans, h: i64) -> Result<AutocovOperator> {
    let n = sample.n_obs();
    if h.unsigned_abs() as usize >= n {
        return Err(Error::LagOutOfRange { lag: h, n_obs: n });
    }
    check_means(means, n, sample.grid_len())?;
    let x = means.residuals(sample.values());
    let k = lag_covariance(&x, h.unsigned_abs() as usize);
    Ok(AutocovOperator {
        lag: h,
        kernel: if h < 0 { k.transpose() } else { k },
    })
}

fn check_means(means: &GroupMeans, n_obs: usize, cols: usize) -> Result<()> {
    let d = means.period();
    if d == 0 || n_obs % d != 0 {
        return Err(Error::NotMultiple { n_obs, period: d });
    }
    if means.wk_means.ncols() != cols {
        return Err(Error::LengthMismatch {
            expected: cols,
            found: means.wk_means.ncols(),
        });
    }
    Ok(())
}

/// `(1/N) Σ_{t=1}^{N-h} X_{t+h} X_t'` for `h ≥ 0`.
pub(crate) fn lag_covariance(x: &DMatrix<f64>, h: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let lead = x.rows(h, n - h);
    let lagged = x.rows(0, n - h);
    lead.transpose() * lagged / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `1 − |x|`
    Bartlett,
    /// 1 on `|x| ≤ 1/2`, linear down to 0 at `|x| = 1`.
    FlatTop,
    /// 1 on `|x| ≤ 1`.
    Truncated,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Bartlett => "bartlett",
            KernelKind::FlatTop => "flat-top",
            KernelKind::Truncated => "truncated",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bartlett" => Ok(KernelKind::Bartlett),
            "flat-top" | "flattop" | "flat_top" => Ok(KernelKind::FlatTop),
            "truncated" | "rectangular" => Ok(KernelKind::Truncated),
            other => Err(Error::InvalidKernel(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Lag window `γ` with bandwidth `b_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: usize,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, bandwidth: usize) -> Result<Self> {
        if bandwidth < 1 {
            return Err(Error::InvalidKernel("bandwidth must be at least 1".into()));
        }
        Ok(Self { kind, bandwidth })
    }

    /// Bartlett window with `b_N = ⌊N^{1/3}⌋`.
    pub fn default_for(n_obs: usize) -> Self {
        Self {
            kind: KernelKind::Bartlett,
            bandwidth: default_bandwidth(n_obs),
        }
    }

    pub fn weight(&self, x: f64) -> f64 {
        let a = x.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self.kind {
            KernelKind::Bartlett => 1.0 - a,
            KernelKind::FlatTop => {
                if a <= 0.5 {
                    1.0
                } else {
                    2.0 * (1.0 - a)
                }
            }
            KernelKind::Truncated => 1.0,
        }
    }

    pub(crate) fn check(&self, n_obs: usize) -> Result<()> {
        if self.bandwidth < 1 || self.bandwidth >= n_obs {
            return Err(Error::InvalidKernel(format!(
                "bandwidth {} must satisfy 1 <= b < N = {n_obs}",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// `⌊N^{1/3}⌋`, at least 1.
pub fn default_bandwidth(n_obs: usize) -> usize {
    let mut b = (n_obs as f64).cbrt().floor() as usize;
    while (b + 1).pow(3) <= n_obs {
        b += 1;
    }
    while b > 0 && b.pow(3) > n_obs {
        b -= 1;
    }
    b.max(1)
}

/// Estimated spectral density at one frequency with its eigenvalues.
///
/// For functional data `matrix` lives in weighted coordinates
/// `W^{1/2} F W^{1/2}`, so `eigenvalues` are those of the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub theta: f64,
    pub matrix: DMatrix<Complex64>,
    /// Descending, negatives within tolerance clamped to zero.
    pub eigenvalues: Vec<f64>,
}

impl SpectralDensity {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

pub fn spectral_density(
    sample: &FunctionalSample,
    means: &GroupMeans,
    theta: f64,
    kernel: &KernelSpec,
) -> Result<SpectralDensity> {
    Ok(functional_spectra(sample, means, &[theta], kernel)?.remove(0))
}

/// Spectral density estimates at several frequencies sharing one set of
/// lag covariances.
pub fn functional_spectra(
    sample: &FunctionalSample,
    means: &GroupMeans,
    thetas: &[f64],
    kernel: &KernelSpec,
) -> Result<Vec<SpectralDensity>> {
    check_means(means, sample.n_obs(), sample.grid_len())?;
    let x = means.residuals(sample.values());
    let grid = sample.grid();
    lag_window(&x, thetas, kernel)?
        .into_iter()
        .zip(thetas)
        .map(|(m, &theta)| finish(theta, grid.to_weighted(&m)))
        .collect()
}

pub fn projected_spectral(
    series: &MultivariateSeries,
    means: &GroupMeans,
    theta: f64,
    kernel: &KernelSpec,
) -> Result<SpectralDensity> {
    Ok(multivariate_spectra(series, means, &[theta], kernel)?.remove(0))
}

pub fn multivariate_spectra(
    series: &MultivariateSeries,
    means: &GroupMeans,
    thetas: &[f64],
    kernel: &KernelSpec,
) -> Result<Vec<SpectralDensity>> {
    check_means(means, series.n_obs(), series.dim())?;
    let x = means.residuals(series.scores());
    lag_window(&x, thetas, kernel)?
        .into_iter()
        .zip(thetas)
        .map(|(m, &theta)| finish(theta, m))
        .collect()
}

/// `Σ_{|h| ≤ b} γ(h/b) Ĉ_h e^{-ihθ}` for every `θ`.
fn lag_window(x: &DMatrix<f64>, thetas: &[f64], kernel: &KernelSpec) -> Result<Vec<DMatrix<Complex64>>> {
    kernel.check(x.nrows())?;
    let b = kernel.bandwidth;
    let lags: Vec<(usize, f64, DMatrix<f64>)> = (0..=b)
        .map(|h| (h, kernel.weight(h as f64 / b as f64)))
        .filter(|&(_, w)| w != 0.0)
        .map(|(h, w)| (h, w, lag_covariance(x, h)))
        .collect();
    Ok(thetas
        .iter()
        .map(|&theta| {
            let mut acc = DMatrix::<Complex64>::zeros(x.ncols(), x.ncols());
            for (h, w, c) in &lags {
                if *h == 0 {
                    acc += to_complex(c) * Complex64::new(*w, 0.0);
                } else {
                    let phase = Complex64::from_polar(*w, -(*h as f64) * theta);
                    acc += to_complex(c) * phase + to_complex(&c.transpose()) * phase.conj();
                }
            }
            acc
        })
        .collect())
}

fn finish(theta: f64, matrix: DMatrix<Complex64>) -> Result<SpectralDensity> {
    let matrix = hermitian_part(&matrix);
    let mut eigenvalues = eigenvalues_desc(&matrix)?;
    clamp_psd(&mut eigenvalues, SPECTRAL_CLAMP_TOL)?;
    Ok(SpectralDensity {
        theta,
        matrix,
        eigenvalues,
    })
}

/// `M^{-1/2}` with the number of eigenvalues that were raised to the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct InvSqrt<T: nalgebra::Scalar> {
    pub matrix: DMatrix<T>,
    pub floored: usize,
}

/// Inverse square root of a Hermitian PSD matrix. Eigenvalues below
/// `floor · λ_max` are replaced by `floor · λ_max`.
pub fn inv_sqrt(matrix: &DMatrix<Complex64>, floor: f64) -> Result<InvSqrt<Complex64>> {
    let dim = matrix.nrows();
    if dim == 0 || matrix.ncols() != dim {
        return Err(Error::Singular("inverse square root needs a non-empty square matrix".into()));
    }
    let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asym = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidSpec(format!("matrix is not Hermitian (asymmetry {asym:e})")));
    }
    let eig = eigen_desc(&hermitian_part(matrix))?;
    let top = eig.values[0];
    if !(top > 0.0) {
        return Err(Error::Singular("zero matrix".into()));
    }
    let level = floor * top;
    let mut floored = 0;
    let scales: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| {
            if l < level {
                floored += 1;
                1.0 / level.sqrt()
            } else {
                1.0 / l.sqrt()
            }
        })
        .collect();
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for (mut col, &s) in scaled.column_iter_mut().zip(&scales) {
        col *= Complex64::new(s, 0.0);
    }
    Ok(InvSqrt {
        matrix: scaled * v.adjoint(),
        floored,
    })
}

/// Real symmetric variant of [`inv_sqrt`].
pub fn inv_sqrt_real(matrix: &DMatrix<f64>, floor: f64) -> Result<InvSqrt<f64>> {
    let r = inv_sqrt(&to_complex(matrix), floor)?;
    Ok(InvSqrt {
        matrix: r.matrix.map(|z| z.re),
        floored: r.floored,
    })
}

/// Rates `λ_1 ≥ λ_2 ≥ … ≥ 0` of `HExp(λ_1, λ_2, …) = Σ λ_i E_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoExpSpec {
    rates: Vec<f64>,
}

impl HypoExpSpec {
    pub fn new(mut rates: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidSpec(format!("rate {bad} must be finite and non-negative")));
        }
        rates.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.rates.iter().any(|&r| r > 0.0)
    }

    /// Every rate multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.rates.iter().map(|r| r * c).collect())
    }

    /// The law of a sum of independent variables with these specs.
    pub fn merged<'a>(specs: impl IntoIterator<Item = &'a HypoExpSpec>) -> Result<Self> {
        Self::new(specs.into_iter().flat_map(|s| s.rates.iter().copied()).collect())
    }
}

/// Shortest prefix of `eigenvalues` whose neglected mass
/// `trace_total − Σ_{i≤k} λ_i` is at most `epsilon` (default
/// `1e-6 · trace_total`).
pub fn truncate_rates(eigenvalues: &[f64], trace_total: f64, epsilon: Option<f64>) -> Result<HypoExpSpec> {
    if !eigenvalues.iter().any(|&l| l > 0.0) {
        return Err(Error::ZeroRates);
    }
    let eps = epsilon.unwrap_or(1e-6 * trace_total);
    let mut kept = 0.0;
    let mut k = eigenvalues.len();
    for (i, &l) in eigenvalues.iter().enumerate() {
        kept += l;
        if trace_total - kept <= eps {
            k = i + 1;
            break;
        }
    }
    HypoExpSpec::new(eigenvalues[..k].iter().map(|l| l.max(0.0)).collect())
}
