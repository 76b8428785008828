//! Frequency-domain tests for periodic components of known period in
//! functional and multivariate time series.
//!
//! The crate is organised bottom-up:
//!
//! - [`fdata`]: curves on a shared grid, quadrature inner products,
//!   projections, principal components and periodic group means.
//! - [`freq`]: discrete Fourier transforms at seasonal frequencies and the
//!   Gram matrices of the resulting blocks.
//! - [`estimators`]: autocovariance operators, lag-window spectral density
//!   estimates and the eigenvalue lists that parameterise the null laws.
//! - [`nulldist`]: hypoexponential, Gamma, Wishart and mixture null laws.
//! - [`hypothesis`]: the eight test statistics with their critical values
//!   and p-values.
//! - [`sim`]: data-generating processes and Monte Carlo size, power and
//!   local-power experiments.

pub mod error;
pub mod estimators;
pub mod fdata;
pub mod freq;
pub mod hypothesis;
mod linalg;
pub mod nulldist;
pub mod sim;

pub use error::{Error, Result};
pub use estimators::{
    autocov, inv_sqrt, projected_spectral, spectral_density, truncate_rates, AutocovOperator,
    HypoExpSpec, InvSqrt, KernelKind, KernelSpec, SpectralDensity,
};
pub use fdata::{
    fpca, inner_product, make_sample, project, weekday_means, Centering, Fpca, FunctionalSample,
    Grid, GroupMeans, MultivariateSeries, Parity, PeriodSpec,
};
pub use freq::{dft, gram, seasonal_frequencies, DftBlock, FrequencySet, GramMatrix, Metric, Whitening};
pub use hypothesis::{
    run_multivariate, run_suite, run_test, standard_suite, test_anova, test_anova_scores, test_ftr,
    test_multivariate, BasisSource, Family, KnownNoise, Mode, MultivariatePair, Noise, Projection,
    SuiteReport, SuiteRow, TableLine, TestConfig, TestId, TestResult,
};
pub use nulldist::{
    erlang_quantile, even_d_theta_law, gamma_quantile, hypoexp_cdf, mixture_quantile,
    wishart_maxeig_quantile, Calibrator, McConfig, McQuantile, MixtureLaw, NullLaw, ThetaLaw,
};
pub use sim::{
    gen, local_power_curve, rejection_rate, rejection_rates, scenario_abc, Dgp, DgpKind, DgpSpec,
    Loading, PowerCurve, RateEstimate, Scenario, Signal,
};
