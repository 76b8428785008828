//! Functional data model.
//!
//! Curves live on a common grid of points in `[0, 1]`. The inner product of
//! two curves is the composite trapezoid rule on that grid, so every operator
//! on curves becomes an ordinary matrix. Eigenproblems are solved in the
//! weighted coordinates `W^{1/2} K W^{1/2}` (with `W = diag(weights)`) and
//! mapped back, which keeps eigencurves orthonormal under the quadrature
//! metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{clamp_psd, eigen_desc, eigenvalues_desc, symmetric_part};

/// Evaluation points together with their trapezoid quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFew {
                what: "grid points",
                required: 2,
                found: points.len(),
            });
        }
        for (index, &value) in points.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::GridOutOfRange { index, value });
            }
        }
        if let Some(index) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::GridNotIncreasing { index: index + 1 });
        }
        let g = points.len();
        let weights = (0..g)
            .map(|i| {
                let left = if i > 0 { points[i] - points[i - 1] } else { 0.0 };
                let right = if i + 1 < g { points[i + 1] - points[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect();
        Ok(Self { points, weights })
    }

    /// `size` equispaced points covering `[0, 1]`.
    pub fn uniform(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::TooFew {
                what: "grid points",
                required: 2,
                found: size,
            });
        }
        let step = 1.0 / (size - 1) as f64;
        let mut points: Vec<f64> = (0..size).map(|i| i as f64 * step).collect();
        points[size - 1] = 1.0;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫ f g du` by the trapezoid rule.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        self.check_len(g.len())?;
        Ok(weighted_dot(&self.weights, f.iter(), g.iter()))
    }

    pub fn norm_sq(&self, f: &[f64]) -> Result<f64> {
        self.inner(f, f)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    pub(crate) fn sqrt_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.weights.iter().map(|w| w.sqrt()))
    }

    /// Gram matrix `M W N'` of the rows of `a` and `b`.
    pub(crate) fn row_gram(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut weighted = b.clone();
        for (mut col, &w) in weighted.column_iter_mut().zip(&self.weights) {
            col *= w;
        }
        a * weighted.transpose()
    }

    /// Conjugate a kernel matrix into weighted coordinates `W^{1/2} K W^{1/2}`.
    pub(crate) fn to_weighted<T>(&self, kernel: &DMatrix<T>) -> DMatrix<T>
    where
        T: nalgebra::ComplexField<RealField = f64>,
    {
        let s = self.sqrt_weights();
        DMatrix::from_fn(kernel.nrows(), kernel.ncols(), |i, j| {
            kernel[(i, j)].clone().scale(s[i] * s[j])
        })
    }
}

pub(crate) fn weighted_dot<'a>(
    weights: &[f64],
    f: impl Iterator<Item = &'a f64>,
    g: impl Iterator<Item = &'a f64>,
) -> f64 {
    weights.iter().zip(f.zip(g)).map(|(w, (a, b))| w * a * b).sum()
}

/// `∫ f g du` on the sample's grid.
pub fn inner_product(grid: &Grid, f: &[f64], g: &[f64]) -> Result<f64> {
    grid.inner(f, g)
}

/// `N` curves evaluated on a shared grid; row `t` holds curve `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    values: DMatrix<f64>,
    grid: Grid,
}

/// Validate `values` (N×G) against `grid_points` and build a sample.
pub fn make_sample(values: DMatrix<f64>, grid_points: Vec<f64>) -> Result<FunctionalSample> {
    FunctionalSample::new(values, Grid::new(grid_points)?)
}

impl FunctionalSample {
    pub fn new(values: DMatrix<f64>, grid: Grid) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::TooFew {
                what: "curves",
                required: 2,
                found: values.nrows(),
            });
        }
        grid.check_len(values.ncols())?;
        check_finite(&values)?;
        Ok(Self { values, grid })
    }

    pub fn from_rows(rows: &[Vec<f64>], grid: Grid) -> Result<Self> {
        let g = grid.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != g) {
            return Err(Error::LengthMismatch {
                expected: g,
                found: bad.len(),
            });
        }
        let values = DMatrix::from_fn(rows.len(), g, |t, j| rows[t][j]);
        Self::new(values, grid)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    pub fn grid_len(&self) -> usize {
        self.values.ncols()
    }

    pub fn curve(&self, t: usize) -> Vec<f64> {
        self.values.row(t).iter().copied().collect()
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        Self::new(values, self.grid.clone())
    }

    /// Keep the first `n` curves.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let n = n.min(self.n_obs());
        self.with_values(self.values.rows(0, n).into_owned())
    }

    pub fn grand_mean(&self) -> DVector<f64> {
        column_means(&self.values)
    }
}

/// Projection scores `⟨Y_t, v_j⟩`; row `t` is the time-`t` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    scores: DMatrix<f64>,
    basis_id: String,
}

impl MultivariateSeries {
    pub fn new(scores: DMatrix<f64>, basis_id: impl Into<String>) -> Result<Self> {
        if scores.ncols() < 1 {
            return Err(Error::TooFew {
                what: "components",
                required: 1,
                found: 0,
            });
        }
        if scores.nrows() < 2 {
            return Err(Error::TooFew {
                what: "observations",
                required: 2,
                found: scores.nrows(),
            });
        }
        check_finite(&scores)?;
        Ok(Self {
            scores,
            basis_id: basis_id.into(),
        })
    }

    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    pub fn n_obs(&self) -> usize {
        self.scores.nrows()
    }

    pub fn dim(&self) -> usize {
        self.scores.ncols()
    }

    pub fn group_means(&self, period: &PeriodSpec) -> Result<GroupMeans> {
        group_means(&self.scores, period)
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for row in 0..values.nrows() {
        for col in 0..values.ncols() {
            if !values[(row, col)].is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

/// Project every curve onto the rows of `basis` (p×G).
pub fn project(sample: &FunctionalSample, basis: &DMatrix<f64>) -> Result<MultivariateSeries> {
    let grid = sample.grid();
    grid.check_len(basis.ncols())?;
    if basis.nrows() == 0 {
        return Err(Error::TooFew {
            what: "basis curves",
            required: 1,
            found: 0,
        });
    }
    let gram = symmetric_part(&grid.row_gram(basis, basis));
    let eig = eigenvalues_desc(&gram)?;
    let (top, bottom) = (eig[0], eig[eig.len() - 1]);
    let condition = if bottom > 0.0 { top / bottom } else { f64::INFINITY };
    if condition.is_nan() || condition >= 1e12 {
        return Err(Error::SingularBasis { condition });
    }
    let scores = grid.row_gram(sample.values(), basis);
    MultivariateSeries::new(scores, "user")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Period `d` and number of complete cycles `n`, so that `N = d n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodSpec {
    period: usize,
    cycles: usize,
}

impl PeriodSpec {
    pub fn new(period: usize, n_obs: usize) -> Result<Self> {
        if period < 2 {
            return Err(Error::InvalidPeriod(period));
        }
        if n_obs == 0 || n_obs % period != 0 {
            return Err(Error::NotMultiple { n_obs, period });
        }
        Ok(Self {
            period,
            cycles: n_obs / period,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn n_obs(&self) -> usize {
        self.period * self.cycles
    }

    pub fn parity(&self) -> Parity {
        if self.period % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Number of seasonal frequencies strictly inside `(0, π)`:
    /// `q = (d-1)/2` for odd `d`, `r = (d-2)/2` for even `d`.
    pub fn seasonal_count(&self) -> usize {
        (self.period - 1) / 2
    }

    pub fn q(&self) -> Option<usize> {
        (self.parity() == Parity::Odd).then(|| self.seasonal_count())
    }

    pub fn r(&self) -> Option<usize> {
        (self.parity() == Parity::Even).then(|| self.seasonal_count())
    }
}

/// Periodic mean estimates `ŵ_k = Ȳ_k − Ȳ` and the grand mean `Ȳ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeans {
    /// d×G, row `k` is the group of time indices `t ≡ k (mod d)` (0-based).
    pub wk_means: DMatrix<f64>,
    pub grand_mean: DVector<f64>,
}

impl GroupMeans {
    pub fn period(&self) -> usize {
        self.wk_means.nrows()
    }

    /// Residuals `Y_t − ŵ_t − Ȳ`.
    pub fn residuals(&self, values: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.period();
        DMatrix::from_fn(values.nrows(), values.ncols(), |t, g| {
            values[(t, g)] - self.wk_means[(t % d, g)] - self.grand_mean[g]
        })
    }
}

pub fn weekday_means(sample: &FunctionalSample, period: &PeriodSpec) -> Result<GroupMeans> {
    group_means(sample.values(), period)
}

pub(crate) fn group_means(values: &DMatrix<f64>, period: &PeriodSpec) -> Result<GroupMeans> {
    let d = period.period();
    if values.nrows() != period.n_obs() {
        return Err(Error::NotMultiple {
            n_obs: values.nrows(),
            period: d,
        });
    }
    let n = period.cycles() as f64;
    let cols = values.ncols();
    let mut sums = DMatrix::zeros(d, cols);
    for t in 0..values.nrows() {
        let mut row = sums.row_mut(t % d);
        row += values.row(t);
    }
    let group = sums / n;
    let grand = column_means(&group);
    let wk_means = DMatrix::from_fn(d, cols, |k, g| group[(k, g)] - grand[g]);
    Ok(GroupMeans {
        wk_means,
        grand_mean: grand,
    })
}

fn column_means(values: &DMatrix<f64>) -> DVector<f64> {
    let n = values.nrows() as f64;
    DVector::from_iterator(
        values.ncols(),
        values.column_iter().map(|c| c.iter().sum::<f64>() / n),
    )
}

/// How curves are centred before the covariance is formed.
#[derive(Debug, Clone, Copy)]
pub enum Centering<'a> {
    None,
    GrandMean,
    Periodic(&'a GroupMeans),
}

/// Functional principal components of the empirical covariance operator.
#[derive(Debug, Clone)]
pub struct Fpca {
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Row `j` is eigencurve `j` on the sample grid.
    pub eigencurves: DMatrix<f64>,
    /// Per-component share of the total variance.
    pub explained: Vec<f64>,
}

impl Fpca {
    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Cumulative share of variance of the first `p` components.
    pub fn explained_fraction(&self, p: usize) -> f64 {
        self.explained.iter().take(p).sum()
    }

    /// First `p` eigencurves as a p×G basis matrix.
    pub fn basis(&self, p: usize) -> DMatrix<f64> {
        let p = p.min(self.eigencurves.nrows());
        self.eigencurves.rows(0, p).into_owned()
    }
}

pub fn fpca(sample: &FunctionalSample, centering: Centering<'_>) -> Result<Fpca> {
    let values = sample.values();
    let centred = match centering {
        Centering::None => values.clone(),
        Centering::GrandMean => {
            let mean = sample.grand_mean();
            DMatrix::from_fn(values.nrows(), values.ncols(), |t, g| values[(t, g)] - mean[g])
        }
        Centering::Periodic(means) => {
            if means.period() == 0 || values.nrows() % means.period() != 0 {
                return Err(Error::NotMultiple {
                    n_obs: values.nrows(),
                    period: means.period(),
                });
            }
            means.residuals(values)
        }
    };
    let grid = sample.grid();
    let s = grid.sqrt_weights();
    let mut scaled = centred;
    for (mut col, &sw) in scaled.column_iter_mut().zip(s.iter()) {
        col *= sw;
    }
    let n = values.nrows() as f64;
    let cov = symmetric_part(&(scaled.transpose() * &scaled / n));
    let eig = eigen_desc(&cov)?;
    let mut eigenvalues = eig.values;
    clamp_psd(&mut eigenvalues, 1e-10)?;
    let g = grid.len();
    let eigencurves = DMatrix::from_fn(g, g, |j, i| eig.vectors[(i, j)] / s[i]);
    let total: f64 = eigenvalues.iter().sum();
    let explained = eigenvalues
        .iter()
        .map(|&l| if total > 0.0 { l / total } else { 0.0 })
        .collect();
    Ok(Fpca {
        eigenvalues,
        eigencurves,
        explained,
    })
}
