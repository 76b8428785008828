//! Pipeline configuration: built-in defaults, then an INI-style file, then
//! command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fperiod::estimators::{KernelKind, KernelSpec};
use fperiod::Noise;

use crate::bspline::BsplineSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseChoice {
    Iid,
    Dependent,
    /// True covariance of a simulated design.
    Known,
}

impl NoiseChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" => Ok(NoiseChoice::Iid),
            "dependent" => Ok(NoiseChoice::Dependent),
            "known" => Ok(NoiseChoice::Known),
            other => bail!("unknown noise mode '{other}' (iid, dependent or known)"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseChoice::Iid => "iid",
            NoiseChoice::Dependent => "dependent",
            NoiseChoice::Known => "known",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub period: usize,
    pub sqrt: bool,
    pub bspline: Option<BsplineSpec>,
    /// `None` selects `⌊N^{1/3}⌋`.
    pub bandwidth: Option<usize>,
    pub kernel: KernelKind,
    /// `None` lets each command pick its usual mode.
    pub noise: Option<NoiseChoice>,
    pub alpha: f64,
    pub proj: Vec<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub reps: usize,
    pub mc_reps: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            period: 7,
            sqrt: false,
            bspline: None,
            bandwidth: None,
            kernel: KernelKind::Bartlett,
            noise: None,
            alpha: 0.05,
            proj: vec![1, 2, 3],
            out: PathBuf::from("out"),
            seed: 20_190_601,
            reps: 1000,
            mc_reps: 200_000,
        }
    }
}

/// Flag values; `None` leaves the file or default value in place.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// INI-style key = value file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub period: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Lag-window bandwidth (default floor(N^(1/3)))
    #[arg(long, global = true)]
    pub bandwidth: Option<usize>,
    /// bartlett, flat-top or truncated
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    /// iid, dependent or known
    #[arg(long, global = true)]
    pub noise: Option<String>,
    /// Projection levels, e.g. 1,2,3
    #[arg(long, global = true)]
    pub proj: Option<String>,
    /// Square-root transform before smoothing
    #[arg(long, global = true)]
    pub sqrt: bool,
    /// B-spline smoothing as num_basis:order, e.g. 9:4
    #[arg(long, global = true)]
    pub bspline: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo draws for simulated null quantiles
    #[arg(long = "mc-reps", global = true)]
    pub mc_reps: Option<usize>,
}

fn parse_levels(s: &str) -> Result<Vec<usize>> {
    let levels: Vec<usize> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad projection level '{t}'")))
        .collect::<Result<_>>()?;
    if levels.iter().any(|&p| p == 0) {
        bail!("projection levels must be positive");
    }
    Ok(levels)
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("key '{key}': expected a boolean, got '{s}'"),
    }
}

fn parse_bspline(s: &str) -> Result<Option<BsplineSpec>> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        BsplineSpec::parse(s).map(Some)
    }
}

impl PipelineConfig {
    /// Applies `key = value` pairs from an INI file. Section headers are
    /// ignored so the file may be flat or grouped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let ini = ini::Ini::load_from_file(path).with_context(|| format!("reading config {}", path.display()))?;
        for (_, props) in ini.iter() {
            for (key, value) in props.iter() {
                self.apply_key(key, value.trim()).with_context(|| format!("config {}", path.display()))?;
            }
        }
        Ok(())
    }

    pub fn apply_key(&mut self, key: &str, v: &str) -> Result<()> {
        match key.trim().replace('-', "_").as_str() {
            "period" => self.period = v.parse().context("period")?,
            "alpha" => self.alpha = v.parse().context("alpha")?,
            "bandwidth" => self.bandwidth = if v == "auto" { None } else { Some(v.parse().context("bandwidth")?) },
            "kernel" => self.kernel = v.parse()?,
            "noise" => self.noise = Some(NoiseChoice::parse(v)?),
            "proj" => self.proj = parse_levels(v)?,
            "sqrt" => self.sqrt = parse_bool(key, v)?,
            "bspline" => self.bspline = parse_bspline(v)?,
            "seed" => self.seed = v.parse().context("seed")?,
            "reps" => self.reps = v.parse().context("reps")?,
            "out" => self.out = PathBuf::from(v),
            "mc_reps" => self.mc_reps = v.parse().context("mc_reps")?,
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = Self::default();
        if let Some(path) = &o.config {
            c.apply_file(path)?;
        }
        if let Some(v) = o.period {
            c.period = v;
        }
        if let Some(v) = o.alpha {
            c.alpha = v;
        }
        if let Some(v) = o.bandwidth {
            c.bandwidth = Some(v);
        }
        if let Some(v) = &o.kernel {
            c.kernel = v.parse()?;
        }
        if let Some(v) = &o.noise {
            c.noise = Some(NoiseChoice::parse(v)?);
        }
        if let Some(v) = &o.proj {
            c.proj = parse_levels(v)?;
        }
        if o.sqrt {
            c.sqrt = true;
        }
        if let Some(v) = &o.bspline {
            c.bspline = parse_bspline(v)?;
        }
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(v) = o.reps {
            c.reps = v;
        }
        if let Some(v) = &o.out {
            c.out = v.clone();
        }
        if let Some(v) = o.mc_reps {
            c.mc_reps = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.period < 2 {
            bail!("period must exceed 1, got {}", self.period);
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.alpha);
        }
        if self.bandwidth == Some(0) {
            bail!("bandwidth must be at least 1");
        }
        Ok(())
    }

    pub fn kernel_for(&self, n_obs: usize) -> Result<KernelSpec> {
        let b = self.bandwidth.unwrap_or(KernelSpec::default_for(n_obs).bandwidth);
        Ok(KernelSpec::new(self.kernel, b)?)
    }

    /// Noise mode for data without a known covariance.
    pub fn estimated_noise(&self, choice: NoiseChoice, n_obs: usize) -> Result<Noise> {
        match choice {
            NoiseChoice::Iid => Ok(Noise::IidGaussian),
            NoiseChoice::Dependent => Ok(Noise::Dependent(self.kernel_for(n_obs)?)),
            NoiseChoice::Known => bail!("noise = known needs a simulated design"),
        }
    }

    /// Every setting as `key = value`, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let proj: Vec<String> = self.proj.iter().map(|p| p.to_string()).collect();
        vec![
            ("config.period".into(), self.period.to_string()),
            ("config.alpha".into(), self.alpha.to_string()),
            ("config.kernel".into(), self.kernel.name().into()),
            ("config.bandwidth".into(), self.bandwidth.map_or("auto".into(), |b| b.to_string())),
            ("config.noise".into(), self.noise.map_or("auto", |n| n.name()).into()),
            ("config.proj".into(), proj.join(",")),
            ("config.sqrt".into(), self.sqrt.to_string()),
            (
                "config.bspline".into(),
                self.bspline.map_or("none".into(), |b| format!("{}:{}", b.num_basis, b.order)),
            ),
            ("config.seed".into(), self.seed.to_string()),
            ("config.reps".into(), self.reps.to_string()),
            ("config.mc_reps".into(), self.mc_reps.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "# comment\nperiod = 5\nalpha = 0.1\n[smoothing]\nbspline = 9:4\nsqrt = yes\n").unwrap();
        let o = Overrides { config: Some(path), alpha: Some(0.01), ..Default::default() };
        let c = PipelineConfig::resolve(&o).unwrap();
        assert_eq!(c.period, 5);
        assert_eq!(c.alpha, 0.01);
        assert!(c.sqrt);
        assert_eq!(c.bspline, Some(BsplineSpec { num_basis: 9, order: 4 }));
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut c = PipelineConfig::default();
        assert!(c.apply_key("colour", "red").is_err());
        assert!(c.apply_key("proj", "1,0").is_err());
        assert!(c.apply_key("kernel", "parzen").is_err());
        c.period = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn auto_bandwidth_follows_sample_size() {
        let c = PipelineConfig::default();
        assert_eq!(c.kernel_for(210).unwrap().bandwidth, 5);
        assert_eq!(c.kernel_for(1000).unwrap().bandwidth, 10);
    }
}
