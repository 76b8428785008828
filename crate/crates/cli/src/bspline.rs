//! Clamped B-splines with equispaced knots and per-curve least squares.

use anyhow::{bail, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsplineSpec {
    pub num_basis: usize,
    pub order: usize,
}

impl BsplineSpec {
    pub fn new(num_basis: usize, order: usize) -> Result<Self> {
        if order < 1 || num_basis < order {
            bail!("B-spline needs num_basis >= order >= 1, got {num_basis}:{order}");
        }
        Ok(Self { num_basis, order })
    }

    /// Parses `num_basis:order`, e.g. `9:4`.
    pub fn parse(s: &str) -> Result<Self> {
        let Some((a, b)) = s.split_once(':') else { bail!("B-spline spec '{s}' must look like 9:4") };
        Self::new(a.trim().parse()?, b.trim().parse()?)
    }

    /// Clamped knot vector on `[lo, hi]`: `order` copies at each end and
    /// `num_basis − order` equispaced interior knots.
    pub fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let interior = self.num_basis - self.order;
        let mut k = vec![lo; self.order];
        k.extend((1..=interior).map(|i| lo + (hi - lo) * i as f64 / (interior + 1) as f64));
        k.extend(std::iter::repeat_n(hi, self.order));
        k
    }
}

/// Basis values at `x` by the Cox–de Boor recursion.
pub fn basis_values(spec: &BsplineSpec, knots: &[f64], x: f64) -> Vec<f64> {
    let (m, k) = (spec.num_basis, spec.order);
    let hi = knots[knots.len() - 1];
    // order-1 indicators; the right end belongs to the last non-empty span
    let mut b: Vec<f64> = (0..m + k - 1)
        .map(|i| {
            let inside = knots[i] <= x && x < knots[i + 1];
            let at_end = x >= hi && knots[i] < knots[i + 1] && knots[i + 1] >= hi;
            if inside || at_end {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for r in 2..=k {
        let next: Vec<f64> = (0..m + k - r)
            .map(|i| {
                let mut v = 0.0;
                let left = knots[i + r - 1] - knots[i];
                if left > 0.0 {
                    v += (x - knots[i]) / left * b[i];
                }
                let right = knots[i + r] - knots[i + 1];
                if right > 0.0 {
                    v += (knots[i + r] - x) / right * b[i + 1];
                }
                v
            })
            .collect();
        b = next;
    }
    b
}

/// `len(points) × num_basis` design matrix.
pub fn design_matrix(spec: &BsplineSpec, points: &[f64]) -> DMatrix<f64> {
    let (lo, hi) = (points[0], points[points.len() - 1]);
    let knots = spec.knots(lo, hi);
    let mut x = DMatrix::zeros(points.len(), spec.num_basis);
    for (r, &p) in points.iter().enumerate() {
        for (c, v) in basis_values(spec, &knots, p).into_iter().enumerate() {
            x[(r, c)] = v;
        }
    }
    x
}

/// Least-squares smoother: maps raw values on `points` to fitted values on
/// the same points.
pub struct Smoother {
    design: DMatrix<f64>,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Smoother {
    pub fn new(spec: &BsplineSpec, points: &[f64]) -> Result<Self> {
        if points.len() < spec.num_basis {
            bail!("{} grid points cannot support {} B-spline functions", points.len(), spec.num_basis);
        }
        let design = design_matrix(spec, points);
        let svd = design.clone().svd(true, true);
        Ok(Self { design, svd })
    }

    pub fn fit(&self, values: &[f64]) -> Result<Vec<f64>> {
        let y = DVector::from_column_slice(values);
        let coef = self.svd.solve(&y, 1e-12).map_err(|e| anyhow::anyhow!(e))?;
        Ok((&self.design * coef).iter().copied().collect())
    }
}
