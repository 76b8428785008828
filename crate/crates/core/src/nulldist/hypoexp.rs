//! Deterministic CDFs and quantiles: hypoexponential sums and Gamma laws.

use nalgebra::DMatrix;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};
use crate::estimators::HypoExpSpec;

/// Relative gap under which two rates count as equal for the closed form.
pub const NEAR_EQUAL_GAP: f64 = 1e-6;

/// Phase counts above this go to Monte Carlo instead of a matrix exponential.
pub const PHASE_LIMIT: usize = 256;

/// Reject the closed form when cancellation could lose more than this.
const CANCELLATION_BUDGET: f64 = 1e-10;

pub(crate) fn positive_rates(spec: &HypoExpSpec) -> Result<Vec<f64>> {
    let rates: Vec<f64> = spec.rates().iter().copied().filter(|&r| r > 0.0).collect();
    if rates.is_empty() {
        return Err(Error::ZeroRates);
    }
    Ok(rates)
}

/// `P(S > x)` by `1 − Σ c_i e^{−x/λ_i}`, or `None` when rates are too close
/// for the partial-fraction coefficients to be trusted.
pub(crate) fn closed_form_survival(rates: &[f64], x: f64) -> Option<f64> {
    let k = rates.len();
    let mut coeffs = Vec::with_capacity(k);
    for i in 0..k {
        let mut c = 1.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let gap = rates[i] - rates[j];
            if gap.abs() <= NEAR_EQUAL_GAP * rates[i].max(rates[j]) {
                return None;
            }
            c *= rates[i] / gap;
        }
        coeffs.push(c);
    }
    let size: f64 = coeffs.iter().map(|c| c.abs()).sum();
    if !size.is_finite() || size * f64::EPSILON > CANCELLATION_BUDGET {
        return None;
    }
    let s: f64 = coeffs.iter().zip(rates).map(|(c, r)| c * (-x / r).exp()).sum();
    Some(s.clamp(0.0, 1.0))
}

/// Survival of the phase-type chain `1 → 2 → … → k → absorbed` with exit
/// intensities `1/λ_i`, i.e. the first row sum of `exp(Qx)`.
pub(crate) fn phase_type_survival(rates: &[f64], x: f64) -> f64 {
    let k = rates.len();
    let mut q = DMatrix::<f64>::zeros(k, k);
    for (i, r) in rates.iter().enumerate() {
        let mu = x / r;
        q[(i, i)] = -mu;
        if i + 1 < k {
            q[(i, i + 1)] = mu;
        }
    }
    let e = q.exp();
    e.row(0).sum().clamp(0.0, 1.0)
}

/// Work limit (steps × phases) for [`uniformized_survival`].
const UNIFORMIZATION_BUDGET: f64 = 2e7;

/// Same survival by uniformization: with `Λ = max 1/λ_i`, the chain jumps at
/// Poisson(`Λx`) epochs and `P(S > x) = Σ_j Pois(j; Λx) · P(not absorbed
/// after j jumps)`. Every term is non-negative, so this stays accurate for
/// repeated rates where the partial fractions break down.
pub(crate) fn uniformized_survival(rates: &[f64], x: f64) -> Option<f64> {
    let k = rates.len();
    let top = rates.iter().map(|r| 1.0 / r).fold(0.0, f64::max);
    let m = top * x;
    let steps = (m + 12.0 * m.sqrt() + 40.0).ceil();
    if steps * k as f64 > UNIFORMIZATION_BUDGET {
        return None;
    }
    let advance: Vec<f64> = rates.iter().map(|r| 1.0 / (r * top)).collect();
    let mut state = vec![0.0; k];
    state[0] = 1.0;
    let ln_m = m.ln();
    let mut log_weight = -m;
    let mut total = 0.0;
    for step in 0..steps as usize {
        let alive: f64 = state.iter().sum();
        if alive < 1e-300 {
            break;
        }
        if log_weight > -745.0 {
            total += log_weight.exp() * alive;
        } else if step as f64 > m {
            break;
        }
        for i in (0..k).rev() {
            let inflow = if i > 0 { state[i - 1] * advance[i - 1] } else { 0.0 };
            state[i] = state[i] * (1.0 - advance[i]) + inflow;
        }
        log_weight += ln_m - ((step + 1) as f64).ln();
    }
    Some(total.clamp(0.0, 1.0))
}

/// Exact survival for specs small enough to avoid Monte Carlo.
pub(crate) fn exact_survival(rates: &[f64], x: f64) -> Option<f64> {
    if x <= 0.0 {
        return Some(1.0);
    }
    if rates.len() == 1 {
        return Some((-x / rates[0]).exp());
    }
    if let Some(s) = closed_form_survival(rates, x) {
        return Some(s);
    }
    if let Some(s) = uniformized_survival(rates, x) {
        return Some(s);
    }
    if rates.len() <= PHASE_LIMIT {
        return Some(phase_type_survival(rates, x));
    }
    None
}

/// Safeguarded Brent root of an increasing `f` on `[lo, hi]`, `f(lo) ≤ 0 ≤ f(hi)`.
pub(crate) fn solve_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        // secant step, bisection if it leaves the bracket or stalls
        let secant = lo - flo * (hi - lo) / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        x = if secant > lo + 0.05 * (hi - lo) && secant < hi - 0.05 * (hi - lo) { secant } else { mid };
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
    }
    let _ = x;
    0.5 * (lo + hi)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Upper bracket for a survival root: doubles until the survival drops below `alpha`.
fn bracket(survival: &impl Fn(f64) -> f64, start: f64, alpha: f64) -> f64 {
    let mut hi = start.max(f64::MIN_POSITIVE);
    while survival(hi) > alpha && hi < 1e300 {
        hi *= 2.0;
    }
    hi
}

/// `(1 − alpha)`-quantile of `Gamma(shape, 1)` to relative accuracy 1e-10.
/// `shape` may be fractional (the even-period trace law uses half-integers).
pub fn gamma_quantile(shape: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::InvalidSpec(format!("gamma shape {shape} must be positive")));
    }
    let surv = |x: f64| if x <= 0.0 { 1.0 } else { gamma_ur(shape, x) };
    let hi = bracket(&surv, shape + 10.0 * shape.sqrt() + 10.0, alpha);
    Ok(solve_increasing(|x| alpha - surv(x), 0.0, hi, 1e-13))
}

/// `(1 − alpha)`-quantile of `Erlang(k, 1)`.
pub fn erlang_quantile(k: usize, alpha: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidSpec("Erlang shape must be at least 1".into()));
    }
    gamma_quantile(k as f64, alpha)
}

/// `P(Gamma(shape, 1) ≤ x)`.
pub fn gamma_cdf(shape: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(shape, x)
    }
}

/// `P(Σ λ_i E_i ≤ x)` with `E_i` i.i.d. standard exponential.
///
/// Distinct rates use the partial-fraction form. Repeated or nearly equal
/// rates use exact phase-type evaluations (uniformization, or a matrix
/// exponential when that is cheaper). Very long rate lists
/// fall back to seeded Monte Carlo with the default configuration.
pub fn hypoexp_cdf(spec: &HypoExpSpec, x: f64) -> Result<f64> {
    let rates = positive_rates(spec)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    match exact_survival(&rates, x) {
        Some(s) => Ok(1.0 - s),
        None => {
            let mc = super::McConfig::default();
            let sample = super::montecarlo::sorted_sample(&mc, |rng, out, n| {
                super::montecarlo::fill_hypoexp(rng, &rates, mc.antithetic, out, n)
            });
            let below = sample.partition_point(|&v| v <= x);
            Ok(below as f64 / sample.len() as f64)
        }
    }
}

/// Exact `(1 − alpha)`-quantile of a hypoexponential law, or `None` when
/// the rate list is too long for the deterministic path.
pub(crate) fn hypoexp_quantile_exact(rates: &[f64], alpha: f64) -> Result<Option<f64>> {
    check_alpha(alpha)?;
    let total: f64 = rates.iter().sum();
    let start = 2.0 * total + 3.0 * rates[0];
    if exact_survival(rates, 4.0 * start).is_none() {
        return Ok(None);
    }
    let surv = |x: f64| exact_survival(rates, x).unwrap_or(0.0);
    let hi = bracket(&surv, start, alpha);
    Ok(Some(solve_increasing(|x| alpha - surv(x), 0.0, hi, 1e-12)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(r: &[f64]) -> HypoExpSpec {
        HypoExpSpec::new(r.to_vec()).unwrap()
    }

    #[test]
    fn single_rate_exponential() {
        let lam = 1.7;
        let x = lam * 20f64.ln();
        assert!((hypoexp_cdf(&spec(&[lam]), x).unwrap() - 0.95).abs() < 1e-14);
    }

    #[test]
    fn two_rates_closed_form() {
        let want = 1.0 - 2.0 * (-1f64).exp() + (-2f64).exp();
        let got = hypoexp_cdf(&spec(&[2.0, 1.0]), 2.0).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.399576).abs() < 1e-6);
    }

    #[test]
    fn repeated_rates_match_gamma() {
        let got = hypoexp_cdf(&spec(&[1.0, 1.0, 1.0]), 2.0).unwrap();
        // Erlang(3) at 2: 1 - e^{-2}(1 + 2 + 2)
        let want = 1.0 - (-2f64).exp() * 5.0;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        assert!((got - 0.323324).abs() < 1e-6);
    }

    #[test]
    fn near_equal_rates_are_continuous() {
        let a = hypoexp_cdf(&spec(&[1.0, 1.0 + 1e-8, 0.5]), 1.5).unwrap();
        let b = hypoexp_cdf(&spec(&[1.0, 1.0 + 1e-3, 0.5]), 1.5).unwrap();
        assert!((a - b).abs() < 1e-3);
        let c = phase_type_survival(&[1.0, 0.7, 0.5], 1.5);
        let d = closed_form_survival(&[1.0, 0.7, 0.5], 1.5).unwrap();
        assert!((c - d).abs() < 1e-12);
    }

    #[test]
    fn uniformization_matches_matrix_exponential() {
        let mut rates = Vec::new();
        for _ in 0..5 {
            rates.extend([1.0, 0.5, 0.25, 0.01]);
        }
        for x in [0.5, 3.0, 8.0, 20.0] {
            let u = uniformized_survival(&rates, x).unwrap();
            let e = phase_type_survival(&rates, x);
            assert!((u - e).abs() < 1e-10, "x = {x}: {u} vs {e}");
        }
        let g = uniformized_survival(&[1.0; 4], 2.5).unwrap();
        assert!((g - statrs::function::gamma::gamma_ur(4.0, 2.5)).abs() < 1e-12);
    }

    #[test]
    fn cdf_edges_and_errors() {
        assert_eq!(hypoexp_cdf(&spec(&[1.0]), -1.0).unwrap(), 0.0);
        assert_eq!(hypoexp_cdf(&spec(&[0.0, 0.0]), 1.0), Err(Error::ZeroRates));
        assert!(hypoexp_cdf(&spec(&[1.0, 0.5]), 100.0).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn erlang_quantiles() {
        assert!((erlang_quantile(1, 0.05).unwrap() - 2.995732).abs() < 1e-6);
        assert!((erlang_quantile(2, 0.05).unwrap() - 4.743865).abs() < 1e-6);
        assert!((erlang_quantile(1, 0.5).unwrap() - 2f64.ln()).abs() < 1e-10);
        let q = erlang_quantile(7, 0.01).unwrap();
        assert!((gamma_cdf(7.0, q) - 0.99).abs() < 1e-10);
        assert!(erlang_quantile(0, 0.05).is_err());
        assert!(erlang_quantile(1, 1.5).is_err());
    }

    #[test]
    fn exact_quantile_scales() {
        let r = [3.0, 1.0, 0.25];
        let q1 = hypoexp_quantile_exact(&r, 0.05).unwrap().unwrap();
        let r2: Vec<f64> = r.iter().map(|v| v * 2.5).collect();
        let q2 = hypoexp_quantile_exact(&r2, 0.05).unwrap().unwrap();
        assert!((q2 - 2.5 * q1).abs() < 1e-9 * q2);
        assert!((1.0 - hypoexp_cdf(&spec(&r), q1).unwrap() - 0.05).abs() < 1e-10);
    }
}
