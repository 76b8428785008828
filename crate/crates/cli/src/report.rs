//! Report files: p-value table, diagnostics, plot data and SVG charts.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Result;
use fperiod::fdata::{weekday_means, FunctionalSample, PeriodSpec};
use fperiod::{NullLaw, PowerCurve, SuiteReport, TestResult};

/// Eigenvalues that parameterise a hypoexponential-type null law.
fn law_rates(law: &NullLaw) -> Option<Vec<f64>> {
    match law {
        NullLaw::HypoExp(s) => Some(s.rates().to_vec()),
        NullLaw::Mixture(m) => {
            let mut r: Vec<f64> = m.specs().iter().flat_map(|s| s.rates().iter().copied()).collect();
            if let Some(t) = m.chi_part() {
                r.extend(t.rates());
            }
            Some(r)
        }
        NullLaw::Scaled { factor, inner } => law_rates(inner).map(|r| r.into_iter().map(|v| v * factor).collect()),
        _ => None,
    }
}

/// Columns: `row,MEV1,MTR1,MEV2,MTR2,FTR1,FTR2,explained_variance`.
/// Failed cells read `NA`; cells that do not apply are empty.
pub fn write_pvalue_table<W: Write>(out: &mut W, report: &SuiteReport) -> Result<()> {
    let names: Vec<&str> = SuiteReport::COLUMNS.iter().map(|c| c.name()).collect();
    writeln!(out, "row,{},explained_variance", names.join(","))?;
    for line in report.table() {
        let cells: Vec<String> = line
            .cells
            .iter()
            .map(|c| match c {
                Ok(Some(p)) => format!("{p:.6}"),
                Ok(None) => String::new(),
                Err(_) => "NA".into(),
            })
            .collect();
        let ev = line.explained_variance.map_or(String::new(), |v| format!("{v:.4}"));
        writeln!(out, "{},{},{}", line.label, cells.join(","), ev)?;
    }
    Ok(())
}

fn result_keys(prefix: &str, r: &TestResult, out: &mut Vec<(String, String)>) {
    out.push((format!("{prefix}.statistic"), format!("{:.10e}", r.statistic)));
    out.push((format!("{prefix}.critical_value"), format!("{:.10e}", r.critical_value)));
    out.push((format!("{prefix}.p_value"), format!("{:.6}", r.p_value)));
    out.push((format!("{prefix}.mc_se"), r.mc_se.map_or("exact".into(), |s| format!("{s:.3e}"))));
    out.push((format!("{prefix}.floored_modes"), r.floored_modes.to_string()));
    out.push((format!("{prefix}.null_law"), r.law.as_ref().map_or("point mass at 0".into(), |l| l.describe())));
    if let Some(rates) = r.law.as_ref().and_then(law_rates) {
        let txt: Vec<String> = rates.iter().map(|v| format!("{v:.6e}")).collect();
        out.push((format!("{prefix}.eigenvalues"), txt.join(" ")));
    }
    if let Some(ev) = r.explained_variance {
        out.push((format!("{prefix}.explained_variance"), format!("{ev:.6}")));
    }
}

/// Per-test diagnostics, keyed `test.<row>.<TEST>.<field>`.
pub fn suite_diagnostics(report: &SuiteReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for row in &report.rows {
        let level = row.config.projection.as_ref().map_or("FF".to_string(), |p| format!("p{}", p.dim));
        let prefix = format!("test.{level}.{}", row.config.id());
        match &row.outcome {
            Ok(r) => result_keys(&prefix, r, &mut out),
            Err(e) => out.push((format!("{prefix}.error"), e.replace('\n', " "))),
        }
    }
    out
}

pub fn write_key_values<W: Write>(out: &mut W, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(())
}

/// Columns: `u,mean,day1,...,dayd` with the day curves `mean + deviation`.
pub fn write_weekday_means<W: Write>(out: &mut W, sample: &FunctionalSample, period: usize) -> Result<()> {
    let spec = PeriodSpec::new(period, sample.n_obs())?;
    let means = weekday_means(sample, &spec)?;
    let days: Vec<String> = (1..=period).map(|k| format!("day{k}")).collect();
    writeln!(out, "u,mean,{}", days.join(","))?;
    for (g, u) in sample.grid().points().iter().enumerate() {
        let m = means.grand_mean[g];
        let vals: Vec<String> = (0..period).map(|k| format!("{:.8}", m + means.wk_means[(k, g)])).collect();
        writeln!(out, "{u},{m:.8},{}", vals.join(","))?;
    }
    Ok(())
}

/// Minimal line chart: one polyline per series over shared x values.
pub fn svg_lines(title: &str, xs: &[f64], series: &[(String, Vec<f64>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let (x0, x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let all = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
    let (mut y0, mut y1) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| M + (x - x0) / xspan * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * M, H - 2.0 * M);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(s, r#"<text x="{M}" y="{}" font-size="11">{x0:.3}</text>"#, H - M + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{x1:.3}</text>"#, W - M, H - M + 15.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y0:.3}</text>"#, M - 4.0, H - M);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{y1:.3}</text>"#, M - 4.0, M + 10.0);
    for (i, (label, ys)) in series.iter().enumerate() {
        let colour = palette[i % palette.len()];
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = M + 14.0 + 14.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" font-size="11" text-anchor="end" fill="{colour}">{label}</text>"#, W - M - 4.0);
    }
    s.push_str("</svg>\n");
    s
}

pub fn weekday_means_svg(sample: &FunctionalSample, period: usize) -> Result<String> {
    let spec = PeriodSpec::new(period, sample.n_obs())?;
    let means = weekday_means(sample, &spec)?;
    let series: Vec<(String, Vec<f64>)> = (0..period)
        .map(|k| {
            let ys = (0..sample.grid_len()).map(|g| means.grand_mean[g] + means.wk_means[(k, g)]).collect();
            (format!("day {}", k + 1), ys)
        })
        .collect();
    Ok(svg_lines("weekday mean curves", sample.grid().points(), &series))
}

pub fn power_curve_svg(curve: &PowerCurve) -> String {
    let series: Vec<(String, Vec<f64>)> = curve
        .labels
        .iter()
        .enumerate()
        .map(|(c, l)| (l.clone(), curve.rates.iter().map(|row| row[c].rate).collect()))
        .collect();
    svg_lines("local power", &curve.xs, &series)
}
