//! Discrete Fourier transforms at fundamental and seasonal frequencies.
//!
//! The DFT is `D(θ) = N^{-1/2} Σ_{t=1}^N Y_t e^{-itθ} = R(θ) + i C(θ)`,
//! evaluated by direct summation. Every frequency must be a fundamental
//! frequency `2πj/N`; the phase `tθ` is reduced exactly as `2π (tj mod N)/N`
//! so the orthogonality of the trigonometric vectors holds to roundoff.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fdata::{FunctionalSample, Grid, MultivariateSeries, PeriodSpec};
use crate::linalg::{eigenvalues_desc, symmetric_part};

const MEMBERSHIP_TOL: f64 = 1e-12;

/// Anything with one observation per row.
pub trait Observations {
    fn observations(&self) -> &DMatrix<f64>;
}

impl Observations for FunctionalSample {
    fn observations(&self) -> &DMatrix<f64> {
        self.values()
    }
}

impl Observations for MultivariateSeries {
    fn observations(&self) -> &DMatrix<f64> {
        self.scores()
    }
}

impl Observations for DMatrix<f64> {
    fn observations(&self) -> &DMatrix<f64> {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyKind {
    Fundamental,
    Seasonal,
}

/// A strictly increasing set of fundamental frequencies `2πj/N` in `(0, π]`.
///
/// For seasonal sets of an even period the Nyquist frequency `π` is kept
/// apart in `nyquist` rather than in the main list.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    n_obs: usize,
    indices: Vec<usize>,
    nyquist: bool,
    kind: FrequencyKind,
}

impl FrequencySet {
    pub fn fundamental(n_obs: usize, indices: Vec<usize>) -> Result<Self> {
        if n_obs < 2 {
            return Err(Error::TooFew {
                what: "observations",
                required: 2,
                found: n_obs,
            });
        }
        for (pos, &j) in indices.iter().enumerate() {
            if j == 0 || 2 * j > n_obs {
                return Err(Error::NotFundamental {
                    theta: 2.0 * PI * j as f64 / n_obs as f64,
                    n_obs,
                });
            }
            if pos > 0 && indices[pos - 1] >= j {
                return Err(Error::InvalidSpec("frequencies must be strictly increasing".into()));
            }
        }
        Ok(Self {
            n_obs,
            indices,
            nyquist: false,
            kind: FrequencyKind::Fundamental,
        })
    }

    /// Build from raw angles, each of which must equal some `2πj/N`.
    pub fn from_thetas(n_obs: usize, thetas: &[f64]) -> Result<Self> {
        let indices = thetas
            .iter()
            .map(|&theta| {
                let j = (theta * n_obs as f64 / (2.0 * PI)).round();
                let exact = 2.0 * PI * j / n_obs as f64;
                if j < 1.0 || (theta - exact).abs() > MEMBERSHIP_TOL * theta.abs().max(1.0) {
                    Err(Error::NotFundamental { theta, n_obs })
                } else {
                    Ok(j as usize)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::fundamental(n_obs, indices)
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn kind(&self) -> FrequencyKind {
        self.kind
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.indices.iter().map(|&j| self.theta_of(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty() && !self.nyquist
    }

    pub fn has_nyquist(&self) -> bool {
        self.nyquist
    }

    /// The first `count` frequencies, without the Nyquist term.
    pub fn leading(&self, count: usize) -> Self {
        Self {
            n_obs: self.n_obs,
            indices: self.indices.iter().copied().take(count).collect(),
            nyquist: false,
            kind: self.kind,
        }
    }

    fn theta_of(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_obs as f64
    }
}

/// Seasonal frequencies `ϑ_k = 2πk/d = θ_{nk}`, `k = 1..q` (odd `d`) or
/// `k = 1..r` plus the Nyquist frequency (even `d`).
pub fn seasonal_frequencies(period: &PeriodSpec) -> FrequencySet {
    let n = period.cycles();
    FrequencySet {
        n_obs: period.n_obs(),
        indices: (1..=period.seasonal_count()).map(|k| n * k).collect(),
        nyquist: period.period() % 2 == 0,
        kind: FrequencyKind::Seasonal,
    }
}

/// Real and imaginary DFT parts; row `k` of `real`/`imag` belongs to
/// frequency `k` of `freqs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DftBlock {
    pub real: DMatrix<f64>,
    pub imag: DMatrix<f64>,
    /// `R(π)` when the frequency set carries the Nyquist term (`C(π) = 0`).
    pub nyquist_real: Option<DVector<f64>>,
    pub freqs: FrequencySet,
}

impl DftBlock {
    pub fn len(&self) -> usize {
        self.real.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.real.nrows() == 0 && self.nyquist_real.is_none()
    }

    pub fn dim(&self) -> usize {
        self.real.ncols()
    }

    /// `D(θ_k) = R(θ_k) + i C(θ_k)` as a complex vector.
    pub fn complex(&self, k: usize) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim(),
            self.real
                .row(k)
                .iter()
                .zip(self.imag.row(k).iter())
                .map(|(&re, &im)| Complex64::new(re, im)),
        )
    }
}

pub fn dft<S: Observations + ?Sized>(series: &S, freqs: &FrequencySet) -> Result<DftBlock> {
    let y = series.observations();
    let n_obs = y.nrows();
    if n_obs != freqs.n_obs() {
        return Err(Error::LengthMismatch {
            expected: freqs.n_obs(),
            found: n_obs,
        });
    }
    let cols = y.ncols();
    let scale = 1.0 / (n_obs as f64).sqrt();
    let k = freqs.len();
    let mut real = DMatrix::zeros(k, cols);
    let mut imag = DMatrix::zeros(k, cols);
    for (row, &j) in freqs.indices().iter().enumerate() {
        for t in 1..=n_obs {
            let phase = 2.0 * PI * ((t * j) % n_obs) as f64 / n_obs as f64;
            let (sin, cos) = phase.sin_cos();
            for g in 0..cols {
                let v = y[(t - 1, g)];
                real[(row, g)] += v * cos;
                imag[(row, g)] -= v * sin;
            }
        }
    }
    real *= scale;
    imag *= scale;
    let nyquist_real = freqs.has_nyquist().then(|| {
        let mut acc = DVector::zeros(cols);
        for t in 1..=n_obs {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            for g in 0..cols {
                acc[g] += sign * y[(t - 1, g)];
            }
        }
        acc * scale
    });
    Ok(DftBlock {
        real,
        imag,
        nyquist_real,
        freqs: freqs.clone(),
    })
}

/// Inner product used between DFT components.
#[derive(Debug, Clone, Copy)]
pub enum Metric<'a> {
    Quadrature(&'a Grid),
    Identity,
}

/// Optional rescaling applied to every DFT component before the Gram matrix
/// is formed.
#[derive(Debug, Clone, Copy)]
pub enum Whitening<'a> {
    None,
    /// A fixed `Σ^{-1/2}` applied to every real and imaginary part.
    Matrix(&'a DMatrix<f64>),
    /// `F_{ϑ_k}^{-1/2}` applied to the complex `D(ϑ_k)`, one per frequency,
    /// with an optional real `F_π^{-1/2}` for the Nyquist term.
    PerFrequency {
        main: &'a [DMatrix<Complex64>],
        nyquist: Option<&'a DMatrix<f64>>,
    },
}

/// Symmetric matrix of inner products `⟨A_i, A_j⟩` of the stacked DFT
/// components `[R_1..R_k, C_1..C_k]`, with `R(π)/√2` appended for an even
/// period. The `1/√2` puts the Nyquist coordinate on the same variance
/// scale as the others, which makes the trace equal the ANOVA sum of
/// squares for every period.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn largest_eigenvalue(&self) -> Result<f64> {
        Ok(eigenvalues_desc(&self.entries)?.first().copied().unwrap_or(0.0).max(0.0))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn gram(block: &DftBlock, metric: Metric<'_>, whitening: Whitening<'_>) -> Result<GramMatrix> {
    let rows = component_rows(block, whitening)?;
    let entries = match metric {
        Metric::Identity => &rows * rows.transpose(),
        Metric::Quadrature(grid) => grid.row_gram(&rows, &rows),
    };
    Ok(GramMatrix {
        entries: symmetric_part(&entries),
    })
}

fn component_rows(block: &DftBlock, whitening: Whitening<'_>) -> Result<DMatrix<f64>> {
    let k = block.len();
    let dim = block.dim();
    let extra = usize::from(block.nyquist_real.is_some());
    let mut rows = DMatrix::zeros(2 * k + extra, dim);
    let nyq_scale = std::f64::consts::FRAC_1_SQRT_2;
    match whitening {
        Whitening::None => {
            rows.rows_mut(0, k).copy_from(&block.real);
            rows.rows_mut(k, k).copy_from(&block.imag);
            if let Some(r) = &block.nyquist_real {
                rows.row_mut(2 * k).copy_from(&(r.transpose() * nyq_scale));
            }
        }
        Whitening::Matrix(w) => {
            check_square(w.nrows(), w.ncols(), dim)?;
            check_finite_matrix(w.iter().copied())?;
            rows.rows_mut(0, k).copy_from(&(&block.real * w.transpose()));
            rows.rows_mut(k, k).copy_from(&(&block.imag * w.transpose()));
            if let Some(r) = &block.nyquist_real {
                rows.row_mut(2 * k).copy_from(&((w * r).transpose() * nyq_scale));
            }
        }
        Whitening::PerFrequency { main, nyquist } => {
            if main.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    found: main.len(),
                });
            }
            for (i, w) in main.iter().enumerate() {
                check_square(w.nrows(), w.ncols(), dim)?;
                check_finite_matrix(w.iter().flat_map(|z| [z.re, z.im]))?;
                let h = w * block.complex(i);
                for g in 0..dim {
                    rows[(i, g)] = h[g].re;
                    rows[(k + i, g)] = h[g].im;
                }
            }
            if let Some(r) = &block.nyquist_real {
                let w = nyquist.ok_or_else(|| {
                    Error::InvalidSpec("Nyquist whitening matrix missing".into())
                })?;
                check_square(w.nrows(), w.ncols(), dim)?;
                check_finite_matrix(w.iter().copied())?;
                rows.row_mut(2 * k).copy_from(&((w * r).transpose() * nyq_scale));
            }
        }
    }
    Ok(rows)
}

fn check_square(rows: usize, cols: usize, dim: usize) -> Result<()> {
    if rows != dim || cols != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            found: if rows != dim { rows } else { cols },
        });
    }
    Ok(())
}

fn check_finite_matrix(mut values: impl Iterator<Item = f64>) -> Result<()> {
    if values.any(|v| !v.is_finite()) {
        return Err(Error::Singular("whitening matrix has non-finite entries".into()));
    }
    Ok(())
}
