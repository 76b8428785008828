//! Orthonormal curve systems, periodic signals, loadings and the
//! local-alternative scenarios.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fdata::Grid;

/// The first `count` shifted Legendre polynomials on `[0, 1]`, evaluated
/// on `grid` and orthonormalised in the grid's quadrature inner product
/// (two passes of modified Gram–Schmidt). Rows are the curves.
pub fn legendre_basis(grid: &Grid, count: usize) -> Result<DMatrix<f64>> {
    let g = grid.len();
    if count == 0 || count > g / 2 {
        return Err(Error::TooFew { what: "grid points for the orthonormal system", required: 2 * count.max(1), found: g });
    }
    let w = grid.weights();
    let mut rows = DMatrix::zeros(count, g);
    for (j, &u) in grid.points().iter().enumerate() {
        let x = 2.0 * u - 1.0;
        let (mut prev, mut cur) = (1.0, x);
        rows[(0, j)] = 1.0;
        if count > 1 {
            rows[(1, j)] = x;
        }
        for k in 2..count {
            let next = ((2 * k - 1) as f64 * x * cur - (k - 1) as f64 * prev) / k as f64;
            prev = cur;
            cur = next;
            rows[(k, j)] = next;
        }
    }
    let dot = |a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, k: usize| -> f64 {
        (0..g).map(|j| w[j] * a[(i, j)] * b[(k, j)]).sum()
    };
    for _ in 0..2 {
        for i in 0..count {
            for k in 0..i {
                let c = dot(&rows, i, &rows, k);
                for j in 0..g {
                    rows[(i, j)] -= c * rows[(k, j)];
                }
            }
            let norm = dot(&rows, i, &rows, i).sqrt();
            if !(norm > 1e-10) {
                return Err(Error::SingularBasis { condition: f64::INFINITY });
            }
            for j in 0..g {
                rows[(i, j)] /= norm;
            }
        }
    }
    Ok(rows)
}

/// Periodic signal shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    /// `cos(2πt/d)`.
    Cosine,
    /// Two-level step: `+1` for `t ≤ 2(d−1)/3`, `−2` for `t > (2d−1)/3 + 1`,
    /// zero in between, then centred (a no-op for `d = 7` or `31`).
    Step,
    /// Centred i.i.d. normal values, frozen per design seed. For `d = 7`
    /// the published realisation is used.
    Random,
}

/// Realisation of the random signal used in the published `d = 7` figures.
pub const PUBLISHED_RANDOM_SIGNAL: [f64; 7] = [-0.24, 0.42, -1.69, 0.37, 0.07, 1.12, -0.05];

impl Signal {
    pub fn index(self) -> usize {
        match self {
            Signal::Cosine => 1,
            Signal::Step => 2,
            Signal::Random => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Signal::Cosine),
            2 => Ok(Signal::Step),
            3 => Ok(Signal::Random),
            _ => Err(Error::InvalidSpec(format!("signal index {i} must be 1, 2 or 3"))),
        }
    }

    /// Values `s_1, …, s_d`, summing to zero.
    pub fn values(self, period: usize, design_seed: u64) -> Vec<f64> {
        let d = period;
        let raw: Vec<f64> = match self {
            Signal::Cosine => (1..=d).map(|t| (2.0 * PI * t as f64 / d as f64).cos()).collect(),
            Signal::Step => (1..=d)
                .map(|t| {
                    // compare 3t with the integer numerators to stay exact
                    if 3 * t <= 2 * (d - 1) {
                        1.0
                    } else if 3 * t > 2 * d + 2 {
                        -2.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Signal::Random if d == PUBLISHED_RANDOM_SIGNAL.len() => PUBLISHED_RANDOM_SIGNAL.to_vec(),
            Signal::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(design_seed);
                (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
            }
        };
        let mean = raw.iter().sum::<f64>() / d as f64;
        raw.into_iter().map(|v| v - mean).collect()
    }
}

/// Coefficient vectors of the signal curve in the orthonormal system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loading {
    /// First direction only.
    First,
    /// All nine directions with weights `2^{-(k-1)/2}`, unit length.
    Decaying,
    /// Fourth direction only.
    Fourth,
}

impl Loading {
    pub fn index(self) -> usize {
        match self {
            Loading::First => 1,
            Loading::Decaying => 2,
            Loading::Fourth => 3,
        }
    }

    pub fn from_index(j: usize) -> Result<Self> {
        match j {
            1 => Ok(Loading::First),
            2 => Ok(Loading::Decaying),
            3 => Ok(Loading::Fourth),
            _ => Err(Error::InvalidSpec(format!("loading index {j} must be 1, 2 or 3"))),
        }
    }

    pub fn coefficients(self, dim: usize) -> DVector<f64> {
        let mut v = DVector::zeros(dim);
        match self {
            Loading::First => v[0] = 1.0,
            Loading::Fourth => v[3.min(dim - 1)] = 1.0,
            Loading::Decaying => {
                for k in 0..dim {
                    v[k] = 2f64.powf(-(k as f64) / 2.0);
                }
                let n = v.norm();
                v /= n;
            }
        }
        v
    }
}

/// Local-alternative scenarios for the functional tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Mutually orthogonal day curves: no sinusoidal structure.
    A,
    /// One sinusoid at the first seasonal frequency.
    B,
    /// Smooth random-walk-like bridge through orthogonal increments.
    C,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Scenario::A),
            "B" => Ok(Scenario::B),
            "C" => Ok(Scenario::C),
            _ => Err(Error::InvalidSpec(format!("unknown scenario '{s}'"))),
        }
    }
}

/// Signal curves `w_1, …, w_d` (rows) for a scenario with mean squared
/// signal `(1/d) Σ ‖w_t‖² = rho2`, built from the rows of `directions`
/// (orthonormal in the grid metric).
pub fn scenario_abc(kind: Scenario, period: usize, rho2: f64, directions: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = period;
    if d < 3 {
        return Err(Error::InvalidPeriod(d));
    }
    if !(rho2 > 0.0 && rho2.is_finite()) {
        return Err(Error::InvalidSpec(format!("rho2 = {rho2} must be positive")));
    }
    let needed = match kind {
        Scenario::B => 1,
        Scenario::A | Scenario::C => d,
    };
    if directions.nrows() < needed {
        return Err(Error::TooFew { what: "orthonormal directions", required: needed, found: directions.nrows() });
    }
    let g = directions.ncols();
    let mut omega = DMatrix::zeros(d, g);
    match kind {
        Scenario::A => {
            let c = (d as f64 / (d as f64 - 1.0) * rho2).sqrt();
            for t in 0..d {
                omega.row_mut(t).copy_from(&(directions.row(t) * c));
            }
        }
        Scenario::B => {
            let base = directions.row(0) * rho2.sqrt();
            for t in 1..=d {
                let a = 2.0 * PI * t as f64 / d as f64;
                omega.row_mut(t - 1).copy_from(&(&base * (a.cos() + a.sin())));
            }
        }
        Scenario::C => {
            let df = d as f64;
            let c = (12.0 * df * df / (df * df - 1.0) * rho2).sqrt();
            let total = directions.rows(0, d).row_sum() * c;
            let mut partial = nalgebra::RowDVector::zeros(g);
            for t in 1..=d {
                partial += directions.row(t - 1) * c;
                let row = (&partial - &total * (t as f64 / df)) / df.sqrt();
                omega.row_mut(t - 1).copy_from(&row);
            }
        }
    }
    let mean = omega.row_mean();
    for mut row in omega.row_iter_mut() {
        row -= &mean;
    }
    Ok(omega)
}

/// `(1/d) Σ_t ‖w_t‖²` in the grid metric.
pub fn mean_squared_signal(grid: &Grid, signals: &DMatrix<f64>) -> f64 {
    let w = grid.weights();
    let total: f64 = signals.row_iter().map(|r| r.iter().zip(w).map(|(v, wi)| wi * v * v).sum::<f64>()).sum();
    total / signals.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rows_are_orthonormal() {
        let grid = Grid::uniform(96).unwrap();
        let b = legendre_basis(&grid, 40).unwrap();
        let gram = grid.row_gram(&b, &b);
        assert!((gram - DMatrix::identity(40, 40)).amax() < 1e-10);
        assert!(legendre_basis(&grid, 60).is_err());
        // first curve is the constant 1
        assert!(b.row(0).iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn signals_are_centred() {
        for s in [Signal::Cosine, Signal::Step, Signal::Random] {
            for d in [5, 7, 31] {
                let v = s.values(d, 11);
                assert_eq!(v.len(), d);
                assert!(v.iter().sum::<f64>().abs() < 1e-10);
            }
        }
        let p = Signal::Random.values(7, 0);
        assert!((p[2] + 1.69).abs() < 1e-12);
        assert_eq!(Signal::Step.values(7, 0), vec![1.0, 1.0, 1.0, 1.0, 0.0, -2.0, -2.0]);
        let s31 = Signal::Step.values(31, 0);
        assert_eq!((s31[19], s31[20], s31[21]), (1.0, 0.0, -2.0));
    }

    #[test]
    fn loadings_have_unit_length() {
        for l in [Loading::First, Loading::Decaying, Loading::Fourth] {
            assert!((l.coefficients(9).norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(Loading::Fourth.coefficients(9)[3], 1.0);
    }

    #[test]
    fn scenarios_have_target_mss() {
        let grid = Grid::uniform(96).unwrap();
        let dirs = legendre_basis(&grid, 31).unwrap();
        for kind in [Scenario::A, Scenario::B, Scenario::C] {
            for d in [7, 31] {
                let w = scenario_abc(kind, d, 0.37, &dirs).unwrap();
                assert!((mean_squared_signal(&grid, &w) - 0.37).abs() < 1e-8, "{kind:?} d = {d}");
                assert!(w.row_sum().amax() < 1e-10);
            }
        }
        assert!(scenario_abc(Scenario::A, 40, 1.0, &dirs).is_err());
    }
}
