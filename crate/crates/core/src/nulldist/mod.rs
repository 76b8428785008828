//! Null laws of the test statistics: hypoexponential sums, Gamma/Erlang,
//! the halved largest Wishart eigenvalue and the even-period mixture.
//!
//! Exact laws are evaluated deterministically. Laws without a usable
//! closed form are simulated with seeded block streams and cached by
//! [`Calibrator`], so that one simulated sample serves every statistic
//! that shares the law.

mod hypoexp;
pub(crate) mod montecarlo;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::estimators::HypoExpSpec;

pub use hypoexp::{erlang_quantile, gamma_cdf, gamma_quantile, hypoexp_cdf, NEAR_EQUAL_GAP, PHASE_LIMIT};
use hypoexp::{exact_survival, hypoexp_quantile_exact, positive_rates};
use montecarlo::{draw_theta, draw_wishart_half_maxeig, fill_hypoexp, quantile_se, sorted_sample, upper_p_value, upper_quantile};

/// Minimum replication count accepted for quantiles.
pub const MIN_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct McConfig {
    pub replications: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { replications: 200_000, seed: 0x5eed_2019, antithetic: false }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn check(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::TooFew {
                what: "Monte Carlo replications",
                required: MIN_REPLICATIONS,
                found: self.replications,
            });
        }
        Ok(())
    }
}

/// A quantile (or p-value) with its Monte Carlo standard error; `se` is 0
/// for exact evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McQuantile {
    pub value: f64,
    pub se: f64,
}

impl McQuantile {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }
}

/// `Θ = ½ Σ λ_ℓ X_ℓ` with `X_ℓ` i.i.d. χ² on one degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaLaw {
    rates: Vec<f64>,
}

impl ThetaLaw {
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn mean(&self) -> f64 {
        0.5 * self.rates.iter().sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        0.5 * self.rates.iter().map(|r| r * r).sum::<f64>()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.rates.iter().any(|&r| r > 0.0)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        draw_theta(rng, &self.rates)
    }
}

/// Law of the Nyquist term for an even period.
pub fn even_d_theta_law(rates: &[f64]) -> Result<ThetaLaw> {
    if let Some(&bad) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::InvalidSpec(format!("rate {bad} must be finite and non-negative")));
    }
    Ok(ThetaLaw { rates: rates.iter().copied().filter(|&r| r > 0.0).collect() })
}

/// Sum of independent hypoexponential summands plus an optional `Θ` term.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureLaw {
    specs: Vec<HypoExpSpec>,
    chi_part: Option<ThetaLaw>,
}

impl MixtureLaw {
    pub fn new(specs: Vec<HypoExpSpec>, chi_part: Option<ThetaLaw>) -> Result<Self> {
        let law = Self { specs, chi_part };
        if law.total_rate() <= 0.0 {
            return Err(Error::ZeroRates);
        }
        Ok(law)
    }

    pub fn specs(&self) -> &[HypoExpSpec] {
        &self.specs
    }

    pub fn chi_part(&self) -> Option<&ThetaLaw> {
        self.chi_part.as_ref()
    }

    fn total_rate(&self) -> f64 {
        self.specs.iter().map(HypoExpSpec::total).sum::<f64>()
            + self.chi_part.as_ref().map_or(0.0, |t| t.rates.iter().sum())
    }

    /// The hypoexponential part as one spec (concatenated rates).
    pub fn merged(&self) -> Result<HypoExpSpec> {
        HypoExpSpec::merged(&self.specs)
    }

    pub fn mean(&self) -> f64 {
        self.specs.iter().map(HypoExpSpec::total).sum::<f64>() + self.chi_part.as_ref().map_or(0.0, ThetaLaw::mean)
    }

    fn merged_rates(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.specs.iter().flat_map(|s| s.rates().iter().copied()).filter(|&v| v > 0.0).collect();
        r.sort_by(|a, b| b.total_cmp(a));
        r
    }

    fn fill(&self, rates: &[f64], rng: &mut ChaCha8Rng, out: &mut Vec<f64>, n: usize, antithetic: bool) {
        let start = out.len();
        fill_hypoexp(rng, rates, antithetic, out, n);
        if let Some(theta) = &self.chi_part {
            if !theta.is_degenerate() {
                for v in &mut out[start..] {
                    *v += theta.sample(rng);
                }
            }
        }
    }

    fn sorted_draws(&self, mc: &McConfig) -> Vec<f64> {
        let rates = self.merged_rates();
        sorted_sample(mc, |rng, out, n| self.fill(&rates, rng, out, n, mc.antithetic))
    }
}

/// Monte Carlo `(1 − alpha)`-quantile of a mixture law.
pub fn mixture_quantile(law: &MixtureLaw, alpha: f64, mc: &McConfig) -> Result<McQuantile> {
    check_alpha(alpha)?;
    mc.check()?;
    let draws = law.sorted_draws(mc);
    Ok(McQuantile { value: upper_quantile(&draws, alpha), se: quantile_se(&draws, alpha) })
}

fn wishart_draws(p: usize, dof: usize, mc: &McConfig) -> Vec<f64> {
    sorted_sample(mc, |rng, out, n| {
        for _ in 0..n {
            out.push(draw_wishart_half_maxeig(rng, p, dof));
        }
    })
}

/// Monte Carlo `(1 − alpha)`-quantile of `λ_max(W_p(dof)) / 2`.
pub fn wishart_maxeig_quantile(p: usize, dof: usize, alpha: f64, mc: &McConfig) -> Result<McQuantile> {
    check_alpha(alpha)?;
    check_wishart(p, dof)?;
    mc.check()?;
    let draws = wishart_draws(p, dof, mc);
    Ok(McQuantile { value: upper_quantile(&draws, alpha), se: quantile_se(&draws, alpha) })
}

fn check_wishart(p: usize, dof: usize) -> Result<()> {
    if p == 0 || dof == 0 {
        return Err(Error::InvalidSpec(format!("Wishart dimension {p} and dof {dof} must be positive")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Null law of one test statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum NullLaw {
    HypoExp(HypoExpSpec),
    /// `Gamma(shape, 1)`; Erlang for integer shapes, `χ²_{2·shape}/2` otherwise.
    Gamma { shape: f64 },
    /// `λ_max(W_p(dof)) / 2`.
    WishartMaxEig { p: usize, dof: usize },
    Mixture(MixtureLaw),
    /// Law of `factor · X` with `X` following `inner`.
    Scaled { factor: f64, inner: Box<NullLaw> },
}

impl NullLaw {
    pub fn scaled(self, factor: f64) -> Self {
        NullLaw::Scaled { factor, inner: Box::new(self) }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            NullLaw::HypoExp(s) => format!("HExp({} rates, total {:.6})", s.rates().len(), s.total()),
            NullLaw::Gamma { shape } => format!("Gamma({shape})"),
            NullLaw::WishartMaxEig { p, dof } => format!("lambda_max(W_{p}({dof}))/2"),
            NullLaw::Mixture(m) => format!(
                "HExp sum ({} summands{})",
                m.specs.len(),
                if m.chi_part.is_some() { " + Theta" } else { "" }
            ),
            NullLaw::Scaled { factor, inner } => format!("{factor} * {}", inner.describe()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum LawKey {
    Wishart(usize, usize),
    Mixture(Vec<u64>, Vec<u64>),
}

const CACHE_CAPACITY: usize = 64;

/// Evaluates critical values and p-values, simulating (and caching) the
/// laws that have no deterministic path.
#[derive(Debug)]
pub struct Calibrator {
    config: McConfig,
    cache: Mutex<HashMap<LawKey, Arc<Vec<f64>>>>,
    quantiles: Mutex<HashMap<(Vec<u64>, u64), f64>>,
}

impl Default for Calibrator {
    fn default() -> Self {
        Self::new(McConfig::default())
    }
}

impl Calibrator {
    pub fn new(config: McConfig) -> Self {
        Self { config, cache: Mutex::new(HashMap::new()), quantiles: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &McConfig {
        &self.config
    }

    fn cached(&self, key: LawKey, make: impl FnOnce() -> Vec<f64>) -> Result<Arc<Vec<f64>>> {
        self.config.check()?;
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let draws = Arc::new(make());
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() >= CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, draws.clone());
        Ok(draws)
    }

    fn mixture_draws(&self, law: &MixtureLaw, rates: &[f64]) -> Result<Arc<Vec<f64>>> {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let theta = law.chi_part.as_ref().map_or_else(Vec::new, |t| bits(&t.rates));
        let key = LawKey::Mixture(bits(rates), theta);
        let mc = self.config;
        self.cached(key, || sorted_sample(&mc, |rng, out, n| law.fill(rates, rng, out, n, mc.antithetic)))
    }

    /// A mixture without the `Θ` term is a single hypoexponential law.
    fn pure_rates(law: &MixtureLaw) -> Option<Vec<f64>> {
        match &law.chi_part {
            Some(t) if !t.is_degenerate() => None,
            _ => Some(law.merged_rates()),
        }
    }

    /// `(1 − alpha)`-quantile of `law`.
    pub fn critical_value(&self, law: &NullLaw, alpha: f64) -> Result<McQuantile> {
        check_alpha(alpha)?;
        match law {
            NullLaw::Gamma { shape } => Ok(McQuantile::exact(gamma_quantile(*shape, alpha)?)),
            NullLaw::HypoExp(spec) => self.hypoexp_quantile(positive_rates(spec)?, None, alpha),
            NullLaw::Mixture(m) => match Self::pure_rates(m) {
                Some(rates) if !rates.is_empty() => self.hypoexp_quantile(rates, Some(m), alpha),
                Some(_) => Err(Error::ZeroRates),
                None => {
                    let draws = self.mixture_draws(m, &m.merged_rates())?;
                    Ok(McQuantile { value: upper_quantile(&draws, alpha), se: quantile_se(&draws, alpha) })
                }
            },
            NullLaw::WishartMaxEig { p, dof } => {
                check_wishart(*p, *dof)?;
                let mc = self.config;
                let draws = self.cached(LawKey::Wishart(*p, *dof), || wishart_draws(*p, *dof, &mc))?;
                Ok(McQuantile { value: upper_quantile(&draws, alpha), se: quantile_se(&draws, alpha) })
            }
            NullLaw::Scaled { factor, inner } => {
                check_factor(*factor)?;
                let q = self.critical_value(inner, alpha)?;
                Ok(McQuantile { value: factor * q.value, se: factor * q.se })
            }
        }
    }

    fn hypoexp_quantile(&self, rates: Vec<f64>, law: Option<&MixtureLaw>, alpha: f64) -> Result<McQuantile> {
        let key = (rates.iter().map(|r| r.to_bits()).collect::<Vec<_>>(), alpha.to_bits());
        if let Some(&q) = self.quantiles.lock().expect("cache poisoned").get(&key) {
            return Ok(McQuantile::exact(q));
        }
        if let Some(q) = hypoexp_quantile_exact(&rates, alpha)? {
            let mut cache = self.quantiles.lock().expect("cache poisoned");
            if cache.len() >= 4 * CACHE_CAPACITY {
                cache.clear();
            }
            cache.insert(key, q);
            return Ok(McQuantile::exact(q));
        }
        let owned;
        let law = match law {
            Some(l) => l,
            None => {
                owned = MixtureLaw::new(vec![HypoExpSpec::new(rates.clone())?], None)?;
                &owned
            }
        };
        let draws = self.mixture_draws(law, &rates)?;
        Ok(McQuantile { value: upper_quantile(&draws, alpha), se: quantile_se(&draws, alpha) })
    }

    /// Upper-tail probability `P(X ≥ stat)` under `law`.
    pub fn p_value(&self, law: &NullLaw, stat: f64) -> Result<McQuantile> {
        match law {
            NullLaw::Gamma { shape } => {
                if !(*shape > 0.0) {
                    return Err(Error::InvalidSpec(format!("gamma shape {shape} must be positive")));
                }
                Ok(McQuantile::exact(if stat <= 0.0 { 1.0 } else { gamma_ur(*shape, stat) }))
            }
            NullLaw::HypoExp(spec) => self.hypoexp_p_value(positive_rates(spec)?, None, stat),
            NullLaw::Mixture(m) => match Self::pure_rates(m) {
                Some(rates) if !rates.is_empty() => self.hypoexp_p_value(rates, Some(m), stat),
                Some(_) => Err(Error::ZeroRates),
                None => {
                    let draws = self.mixture_draws(m, &m.merged_rates())?;
                    Ok(mc_p_value(&draws, stat))
                }
            },
            NullLaw::WishartMaxEig { p, dof } => {
                check_wishart(*p, *dof)?;
                let mc = self.config;
                let draws = self.cached(LawKey::Wishart(*p, *dof), || wishart_draws(*p, *dof, &mc))?;
                Ok(mc_p_value(&draws, stat))
            }
            NullLaw::Scaled { factor, inner } => {
                check_factor(*factor)?;
                self.p_value(inner, stat / factor)
            }
        }
    }

    fn hypoexp_p_value(&self, rates: Vec<f64>, law: Option<&MixtureLaw>, stat: f64) -> Result<McQuantile> {
        if let Some(s) = exact_survival(&rates, stat) {
            return Ok(McQuantile::exact(s));
        }
        let owned;
        let law = match law {
            Some(l) => l,
            None => {
                owned = MixtureLaw::new(vec![HypoExpSpec::new(rates.clone())?], None)?;
                &owned
            }
        };
        let draws = self.mixture_draws(law, &rates)?;
        Ok(mc_p_value(&draws, stat))
    }
}

fn mc_p_value(draws: &[f64], stat: f64) -> McQuantile {
    let p = upper_p_value(draws, stat);
    McQuantile { value: p, se: (p * (1.0 - p) / draws.len() as f64).sqrt() }
}

fn check_factor(factor: f64) -> Result<()> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidSpec(format!("scale factor {factor} must be positive")));
    }
    Ok(())
}
