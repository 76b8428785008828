//! CSV ingestion: one curve per day, observed at `S` intraday slots.
//!
//! Long form has the header `date,slot,value` with slots `0..S-1`; any
//! other header is read as wide form, a date column followed by one column
//! per slot. Empty cells and `NA`/`NaN` count as missing.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use fperiod::fdata::{FunctionalSample, Grid};
use nalgebra::DMatrix;

use crate::bspline::Smoother;
use crate::config::PipelineConfig;

/// Share of missing slots above which a day is rejected.
pub const MAX_MISSING_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecords {
    pub dates: Vec<String>,
    /// `days × S` values, `None` where missing.
    pub values: Vec<Vec<Option<f64>>>,
    /// CSV line of every cell, for error messages.
    pub lines: Vec<Vec<u64>>,
}

impl RawRecords {
    pub fn slots(&self) -> usize {
        self.values.first().map_or(0, |d| d.len())
    }
}

fn parse_cell(s: &str, line: u64) -> Result<Option<f64>> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    let v: f64 = t.parse().with_context(|| format!("line {line}: cannot parse '{t}' as a number"))?;
    if !v.is_finite() {
        bail!("line {line}: non-finite value '{t}'");
    }
    Ok(Some(v))
}

pub fn read_records<R: Read>(input: R) -> Result<RawRecords> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let long = headers == ["date", "slot", "value"];
    if !long && headers.len() < 3 {
        bail!("wide CSV needs a date column and at least two slot columns");
    }
    let mut dates: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<(usize, Option<f64>, u64)>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let date = rec[0].trim().to_string();
        if long {
            let slot: usize = rec[1].trim().parse().with_context(|| format!("line {line}: bad slot '{}'", &rec[1]))?;
            let value = parse_cell(&rec[2], line)?;
            let day = match dates.iter().rposition(|d| *d == date) {
                Some(i) => i,
                None => {
                    dates.push(date);
                    cells.push(Vec::new());
                    dates.len() - 1
                }
            };
            if cells[day].iter().any(|(s, _, _)| *s == slot) {
                bail!("line {line}: duplicate slot {slot} for date {}", dates[day]);
            }
            cells[day].push((slot, value, line));
        } else {
            let row = (1..rec.len()).map(|j| parse_cell(&rec[j], line).map(|v| (j - 1, v, line))).collect::<Result<_>>()?;
            dates.push(date);
            cells.push(row);
        }
    }
    if dates.is_empty() {
        bail!("no data rows");
    }
    let slots = cells.iter().flat_map(|c| c.iter().map(|(s, _, _)| s + 1)).max().unwrap_or(0);
    if slots < 2 {
        bail!("need at least two intraday slots, found {slots}");
    }
    let mut values = vec![vec![None; slots]; dates.len()];
    let mut lines = vec![vec![0; slots]; dates.len()];
    for (day, row) in cells.into_iter().enumerate() {
        for (s, v, l) in row {
            values[day][s] = v;
            lines[day][s] = l;
        }
    }
    Ok(RawRecords { dates, values, lines })
}

pub fn read_records_from_path(path: &Path) -> Result<RawRecords> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_records(f).with_context(|| format!("reading {}", path.display()))
}

/// Linear interpolation between observed neighbours, endpoints carried.
/// Returns the number of filled slots.
fn fill_day(day: &mut [Option<f64>]) -> usize {
    let observed: Vec<usize> = (0..day.len()).filter(|&i| day[i].is_some()).collect();
    let mut filled = 0;
    for i in 0..day.len() {
        if day[i].is_some() {
            continue;
        }
        let next = observed.iter().position(|&o| o > i);
        let v = match next {
            None => day[*observed.last().unwrap()].unwrap(),
            Some(0) => day[observed[0]].unwrap(),
            Some(k) => {
                let (a, b) = (observed[k - 1], observed[k]);
                let (ya, yb) = (day[a].unwrap(), day[b].unwrap());
                ya + (yb - ya) * (i - a) as f64 / (b - a) as f64
            }
        };
        day[i] = Some(v);
        filled += 1;
    }
    filled
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: FunctionalSample,
    /// Dates of the retained days.
    pub dates: Vec<String>,
    pub slots: usize,
    pub imputed: usize,
    pub trimmed: usize,
    pub warnings: Vec<String>,
}

/// Imputation, optional square root and smoothing, then trimming to whole
/// periods.
pub fn preprocess(mut raw: RawRecords, cfg: &PipelineConfig) -> Result<Ingested> {
    let slots = raw.slots();
    let d = cfg.period;
    let rejected: Vec<String> = raw
        .dates
        .iter()
        .zip(&raw.values)
        .filter_map(|(date, day)| {
            let missing = day.iter().filter(|v| v.is_none()).count();
            (missing as f64 > MAX_MISSING_SHARE * slots as f64).then(|| format!("{date} ({missing} of {slots} missing)"))
        })
        .collect();
    if !rejected.is_empty() {
        bail!("more than 20% of slots missing on: {}", rejected.join(", "));
    }
    if cfg.sqrt {
        for (day, (date, row)) in raw.dates.iter().zip(&raw.values).enumerate() {
            if let Some(s) = row.iter().position(|v| v.is_some_and(|x| x < 0.0)) {
                bail!(
                    "line {}: negative value {} (date {date}, slot {s}) cannot be square-root transformed",
                    raw.lines[day][s],
                    row[s].unwrap()
                );
            }
        }
    }
    let imputed: usize = raw.values.iter_mut().map(|day| fill_day(day)).sum();

    let points: Vec<f64> = (0..slots).map(|s| s as f64 / (slots - 1) as f64).collect();
    let smoother = cfg.bspline.map(|b| Smoother::new(&b, &points)).transpose()?;
    let n_days = raw.dates.len();
    let keep = n_days - n_days % d;
    if keep < 2 * d {
        bail!("need at least {} complete days (two periods), found {n_days}", 2 * d);
    }
    let mut warnings = Vec::new();
    let trimmed = n_days - keep;
    if trimmed > 0 {
        warnings.push(format!("dropped {trimmed} trailing day(s) to make the sample a multiple of the period {d}"));
    }
    let mut values = DMatrix::zeros(keep, slots);
    for t in 0..keep {
        let mut row: Vec<f64> = raw.values[t].iter().map(|v| v.expect("imputed")).collect();
        if cfg.sqrt {
            row.iter_mut().for_each(|v| *v = v.sqrt());
        }
        if let Some(s) = &smoother {
            row = s.fit(&row)?;
        }
        for (g, v) in row.into_iter().enumerate() {
            values[(t, g)] = v;
        }
    }
    let sample = FunctionalSample::new(values, Grid::new(points)?)?;
    raw.dates.truncate(keep);
    Ok(Ingested { sample, dates: raw.dates, slots, imputed, trimmed, warnings })
}

pub fn ingest(path: &Path, cfg: &PipelineConfig) -> Result<Ingested> {
    preprocess(read_records_from_path(path)?, cfg)
}

/// Wide CSV with shortest round-trip number formatting, so reading it back
/// without preprocessing reproduces the values bit for bit.
pub fn write_wide<W: Write>(out: W, dates: &[String], sample: &FunctionalSample) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let g = sample.grid_len();
    let mut header = vec!["date".to_string()];
    header.extend((0..g).map(|s| format!("s{s}")));
    w.write_record(&header)?;
    for (t, date) in dates.iter().enumerate() {
        let mut rec = vec![date.clone()];
        rec.extend((0..g).map(|j| sample.values()[(t, j)].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
