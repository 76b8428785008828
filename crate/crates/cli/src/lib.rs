//! Command implementations behind the `fperiod` binary.

pub mod bspline;
pub mod config;
pub mod ingest;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fperiod::sim::{config_label, write_power_csv, write_rates_csv, RateRow};
use fperiod::{
    local_power_curve, rejection_rates, run_suite, standard_suite, BasisSource, Calibrator, Dgp, DgpKind, DgpSpec, Family,
    Loading, McConfig, Mode, Noise, Projection, RateEstimate, Scenario, Signal, SuiteReport, TestConfig,
};

use config::{NoiseChoice, PipelineConfig};
use report::{write_key_values, write_pvalue_table};

pub fn calibrator(cfg: &PipelineConfig) -> Result<Calibrator> {
    let mc = McConfig { replications: cfg.mc_reps, ..McConfig::with_seed(cfg.seed) };
    mc.check()?;
    Ok(Calibrator::new(mc))
}

fn create_out(cfg: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// `test`: p-value table, diagnostics and weekday means for one data file.
pub fn cmd_test(cfg: &PipelineConfig, data: &Path, svg: bool) -> Result<SuiteReport> {
    let ing = ingest::ingest(data, cfg)?;
    for w in &ing.warnings {
        eprintln!("warning: {w}");
    }
    let n = ing.sample.n_obs();
    let noise = cfg.estimated_noise(cfg.noise.unwrap_or(NoiseChoice::Dependent), n)?;
    let cal = calibrator(cfg)?;
    let report = run_suite(&ing.sample, &standard_suite(cfg.period, &cfg.proj, noise.clone(), cfg.alpha), &cal);

    create_out(cfg)?;
    let mut table = Vec::new();
    write_pvalue_table(&mut table, &report)?;
    write_file(&cfg.out.join("pvalues.csv"), &table)?;

    let mut diag = cfg.echo();
    diag.push(("data.file".into(), data.display().to_string()));
    diag.push(("data.days".into(), n.to_string()));
    diag.push(("data.slots".into(), ing.slots.to_string()));
    diag.push(("data.imputed_slots".into(), ing.imputed.to_string()));
    diag.push(("data.trimmed_days".into(), ing.trimmed.to_string()));
    if let Noise::Dependent(k) = &noise {
        diag.push(("noise.kernel".into(), k.kind.name().into()));
        diag.push(("noise.bandwidth".into(), k.bandwidth.to_string()));
    }
    diag.push(("mc.seed".into(), cal.config().seed.to_string()));
    diag.push(("mc.replications".into(), cal.config().replications.to_string()));
    diag.extend(report::suite_diagnostics(&report));
    let mut text = Vec::new();
    write_key_values(&mut text, &diag)?;
    write_file(&cfg.out.join("diagnostics.txt"), &text)?;

    let mut means = Vec::new();
    report::write_weekday_means(&mut means, &ing.sample, cfg.period)?;
    write_file(&cfg.out.join("weekday_means.csv"), &means)?;
    if svg {
        write_file(&cfg.out.join("weekday_means.svg"), report::weekday_means_svg(&ing.sample, cfg.period)?.as_bytes())?;
    }
    std::io::stdout().write_all(&table)?;
    Ok(report)
}

/// `ingest-check`: validates and summarises a data file, optionally writing
/// the preprocessed curves as wide CSV.
pub fn cmd_ingest_check(cfg: &PipelineConfig, data: &Path, emit: Option<&Path>) -> Result<String> {
    let ing = ingest::ingest(data, cfg)?;
    let mut s = String::new();
    s += &format!("days = {}\n", ing.sample.n_obs());
    s += &format!("slots = {}\n", ing.slots);
    s += &format!("cycles = {}\n", ing.sample.n_obs() / cfg.period);
    s += &format!("imputed_slots = {}\n", ing.imputed);
    s += &format!("trimmed_days = {}\n", ing.trimmed);
    for w in &ing.warnings {
        s += &format!("warning = {w}\n");
    }
    if let Some(path) = emit {
        let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        ingest::write_wide(f, &ing.dates, &ing.sample)?;
    }
    Ok(s)
}

/// Parses `ma5-null`, `ma5-plus-means`, `model-s:I:J` or `scenario:K:RHO2`.
pub fn parse_dgp(s: &str) -> Result<DgpKind> {
    let parts: Vec<&str> = s.split(':').collect();
    Ok(match parts.as_slice() {
        ["ma5-null"] => DgpKind::Ma5Null,
        ["ma5-plus-means"] => DgpKind::Ma5PlusMeans,
        ["model-s", i, j] => DgpKind::ModelS { signal: Signal::from_index(i.parse()?)?, loading: Loading::from_index(j.parse()?)? },
        ["scenario", k, rho2] => DgpKind::Scenario { kind: k.parse::<Scenario>()?, rho2: rho2.parse()? },
        _ => bail!("unknown design '{s}' (ma5-null, ma5-plus-means, model-s:I:J, scenario:K:RHO2)"),
    })
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad {what} '{t}': {e}")))
        .collect()
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()?;
    let [a, b, h] = v.as_slice() else { bail!("range '{s}' must be start:stop:step") };
    if !(*h > 0.0) || b < a {
        bail!("range '{s}' needs step > 0 and stop >= start");
    }
    let count = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| a + i as f64 * h).collect())
}

fn noise_for_design(cfg: &PipelineConfig, dgp: &Dgp, default: NoiseChoice) -> Result<Noise> {
    match cfg.noise.unwrap_or(default) {
        NoiseChoice::Known => Ok(Noise::Known(dgp.known_noise()?)),
        other => cfg.estimated_noise(other, dgp.spec().n_obs),
    }
}

pub struct SimulateArgs {
    pub dgp: DgpKind,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl SimulateArgs {
    pub fn parse(dgp: &str, sizes: &str, alphas: Option<&str>, cfg: &PipelineConfig) -> Result<Self> {
        let alphas = match alphas {
            Some(a) => parse_list(a, "alpha")?,
            None => vec![cfg.alpha],
        };
        if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            bail!("every alpha must lie in (0, 1)");
        }
        Ok(Self { dgp: parse_dgp(dgp)?, sizes: parse_list(sizes, "sample size")?, alphas })
    }
}

/// `simulate`: rejection rates per sample size, as a long CSV and as the
/// size/power table layout.
pub fn cmd_simulate(cfg: &PipelineConfig, args: &SimulateArgs) -> Result<()> {
    let cal = calibrator(cfg)?;
    let default_noise = match args.dgp {
        DgpKind::Ma5Null | DgpKind::Ma5PlusMeans => NoiseChoice::Dependent,
        _ => NoiseChoice::Iid,
    };
    let mut rows: Vec<RateRow> = Vec::new();
    let mut grid: Vec<(usize, Vec<TestConfig>, Vec<RateEstimate>)> = Vec::new();
    let mut diag = cfg.echo();
    diag.push(("sim.design".into(), args.dgp.label()));
    for &n in &args.sizes {
        let spec = DgpSpec::new(args.dgp.clone(), cfg.period, n, cfg.seed);
        let dgp = Dgp::new(spec.clone())?;
        let noise = noise_for_design(cfg, &dgp, default_noise)?;
        let configs: Vec<TestConfig> =
            args.alphas.iter().flat_map(|&a| standard_suite(cfg.period, &cfg.proj, noise.clone(), a)).collect();
        let est = rejection_rates(&dgp, &configs, cfg.reps, &cal)?;
        diag.push((format!("sim.N{n}.mss_signal"), format!("{:.6}", dgp.mss_signal())));
        diag.push((format!("sim.N{n}.noise_energy"), format!("{:.6}", dgp.noise_energy())));
        if let Noise::Dependent(k) = &noise {
            diag.push((format!("sim.N{n}.bandwidth"), k.bandwidth.to_string()));
        }
        diag.push((format!("sim.N{n}.failures"), est.iter().map(|e| e.failures).sum::<usize>().to_string()));
        rows.extend(RateRow::collect(&spec, &configs, &est));
        grid.push((n, configs, est));
    }
    diag.push(("mc.seed".into(), cal.config().seed.to_string()));
    diag.push(("mc.replications".into(), cal.config().replications.to_string()));

    create_out(cfg)?;
    let mut long = Vec::new();
    write_rates_csv(&mut long, &rows)?;
    write_file(&cfg.out.join("rates.csv"), &long)?;
    let table = rate_table(&grid, &args.alphas, &cfg.proj)?;
    write_file(&cfg.out.join("table.csv"), table.as_bytes())?;
    let mut text = Vec::new();
    write_key_values(&mut text, &diag)?;
    write_file(&cfg.out.join("diagnostics.txt"), &text)?;
    print!("{table}");
    Ok(())
}

/// Rows `FF` then each projection level, one line per sample size; a block
/// of six test columns per alpha, rates in percent.
fn rate_table(grid: &[(usize, Vec<TestConfig>, Vec<RateEstimate>)], alphas: &[f64], levels: &[usize]) -> Result<String> {
    let mut header = vec!["row".to_string(), "N".to_string()];
    for a in alphas {
        header.extend(SuiteReport::COLUMNS.iter().map(|c| format!("{}@{a}", c.name())));
    }
    let mut out = header.join(",") + "\n";
    let labels: Vec<Option<usize>> = std::iter::once(None).chain(levels.iter().map(|&p| Some(p))).collect();
    for label in labels {
        for (n, configs, est) in grid {
            let mut cells = vec![label.map_or("FF".to_string(), |p| format!("p={p}")), n.to_string()];
            for &a in alphas {
                for col in SuiteReport::COLUMNS {
                    let hit = configs.iter().zip(est).find(|(c, _)| {
                        c.alpha == a && c.id() == col && c.projection.as_ref().map(|p| p.dim) == label
                    });
                    cells.push(hit.map_or(String::new(), |(_, e)| format!("{:.1}", 100.0 * e.rate)));
                }
            }
            out += &(cells.join(",") + "\n");
        }
    }
    Ok(out)
}

pub struct LocalPowerArgs {
    pub signal: Signal,
    pub loading: Loading,
    pub xs: Vec<f64>,
    pub cycles: usize,
}

/// `localpower`: `LP(x)` curves of the EV/TR tests on the first `p` noise
/// directions and of the functional tests.
pub fn cmd_localpower(cfg: &PipelineConfig, args: &LocalPowerArgs, svg: bool) -> Result<()> {
    let cal = calibrator(cfg)?;
    let d = cfg.period;
    let spec = DgpSpec::new(DgpKind::ModelS { signal: args.signal, loading: args.loading }, d, args.cycles * d, cfg.seed);
    let dgp = Dgp::new(spec.clone())?;
    let noise = noise_for_design(cfg, &dgp, NoiseChoice::Known)?;
    let mut configs = Vec::new();
    for mode in [Mode::Single, Mode::AllSeasonal] {
        for &p in &cfg.proj {
            if p > dgp.basis().nrows() {
                bail!("projection level {p} exceeds the {} noise directions", dgp.basis().nrows());
            }
            let proj = Projection { dim: p, source: BasisSource::User(dgp.basis().rows(0, p).into_owned()) };
            for family in [Family::MultivariateEv, Family::MultivariateTr] {
                configs.push(
                    TestConfig::new(d, family, mode).with_noise(noise.clone()).with_projection(proj.clone()).with_alpha(cfg.alpha),
                );
            }
        }
        configs.push(TestConfig::new(d, Family::FunctionalTr, mode).with_noise(noise.clone()).with_alpha(cfg.alpha));
    }
    let curve = local_power_curve(&spec, &configs, &args.xs, cfg.reps, &cal)?;

    create_out(cfg)?;
    let mut csv = Vec::new();
    write_power_csv(&mut csv, &curve)?;
    write_file(&cfg.out.join("localpower.csv"), &csv)?;
    if svg {
        write_file(&cfg.out.join("localpower.svg"), report::power_curve_svg(&curve).as_bytes())?;
    }
    let mut diag = cfg.echo();
    diag.push(("lp.design".into(), spec.kind.label()));
    diag.push(("lp.N".into(), spec.n_obs.to_string()));
    diag.push(("lp.tests".into(), configs.iter().map(config_label).collect::<Vec<_>>().join(";")));
    diag.push(("mc.seed".into(), cal.config().seed.to_string()));
    diag.push(("mc.replications".into(), cal.config().replications.to_string()));
    let mut text = Vec::new();
    write_key_values(&mut text, &diag)?;
    write_file(&cfg.out.join("diagnostics.txt"), &text)?;
    std::io::stdout().write_all(&csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_designs_parse() {
        assert_eq!(parse_range("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_range("1:0:0.5").is_err());
        assert_eq!(parse_dgp("ma5-null").unwrap(), DgpKind::Ma5Null);
        assert!(matches!(parse_dgp("model-s:2:3").unwrap(), DgpKind::ModelS { signal: Signal::Step, loading: Loading::Fourth }));
        assert!(matches!(parse_dgp("scenario:b:0.5").unwrap(), DgpKind::Scenario { kind: Scenario::B, .. }));
        assert!(parse_dgp("garch").is_err());
    }
}
