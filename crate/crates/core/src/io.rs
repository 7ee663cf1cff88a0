//! Tick CSV ingestion and report/plot-data writers.
//!
//! Input files carry a `timestamp,price` header. Timestamps are seconds since
//! midnight or ISO-8601 date-times (with or without offset); the latter are
//! reduced to seconds since midnight of their own day.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Timelike};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::obs::TickSeries;
use crate::simulator::SimulatedPath;
use crate::spotvol::SpotVolPath;

/// Version tag embedded in every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

/// Session the simulated days are mapped onto: 9:30 to 16:00.
pub const SESSION_OPEN: f64 = 34_200.0;
pub const SESSION_LENGTH: f64 = 23_400.0;

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { context: "tick file".into(), line, message: message.into() }
}

pub fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let time = DateTime::parse_from_rfc3339(s)
        .map(|d| d.naive_local())
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
        .ok()?
        .time();
    Some(time.num_seconds_from_midnight() as f64 + time.nanosecond() as f64 * 1e-9)
}

pub fn read_ticks(path: &Path) -> Result<TickSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => parse_error(1, format!("{other:?}")),
    })?;
    let headers = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ti), Some(pi)) = (col("timestamp"), col("price")) else {
        return Err(parse_error(1, format!("expected header `timestamp,price`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    };
    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let t = rec.get(ti).and_then(parse_timestamp).ok_or_else(|| parse_error(line, format!("bad timestamp `{}`", rec.get(ti).unwrap_or(""))))?;
        let p = rec
            .get(pi)
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|p| p.is_finite())
            .ok_or_else(|| parse_error(line, format!("bad price `{}`", rec.get(pi).unwrap_or(""))))?;
        if p <= 0.0 {
            return Err(parse_error(line, format!("nonpositive price {p}")));
        }
        timestamps.push(t);
        prices.push(p);
    }
    TickSeries::from_raw(timestamps, prices)
}

/// Trade rows of a simulated day: equispaced over the session, prices `exp(y)`.
pub fn ticks_from_path(sim: &SimulatedPath) -> Result<TickSeries> {
    let n = sim.n() as f64;
    let ts = (0..=sim.n()).map(|i| SESSION_OPEN + SESSION_LENGTH * i as f64 / n).collect();
    let px = sim.y.values().iter().map(|y| y.exp()).collect();
    TickSeries::new(ts, px)
}

pub fn write_ticks(path: &Path, ticks: &TickSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "timestamp,price")?;
    for (t, p) in ticks.timestamps().iter().zip(ticks.prices()) {
        writeln!(w, "{t},{p}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidConfig(format!("csv: {other:?}")),
    }
}

/// Two-column plot data.
pub fn write_xy(path: &Path, header: (&str, &str), xy: &[(f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{},{}", header.0, header.1)?;
    for (x, y) in xy {
        writeln!(w, "{x},{y}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpotRow {
    pub bin: usize,
    pub time: f64,
    pub c_right: Option<f64>,
    pub c_left: Option<f64>,
    pub combined: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub zeta: f64,
    pub truncated: bool,
}

pub fn spot_rows(spot: &SpotVolPath<f64>) -> Result<Vec<SpotRow>> {
    spot.estimates
        .iter()
        .zip(&spot.bins)
        .map(|(e, b)| {
            let ci = e.combined_interval(spot.config.ci_level)?;
            Ok(SpotRow {
                bin: e.bin,
                time: e.time,
                c_right: e.right.map(|s| s.c),
                c_left: e.left.map(|s| s.c),
                combined: e.combined,
                ci_low: ci.map(|c| c.0),
                ci_high: ci.map(|c| c.1),
                zeta: b.zeta,
                truncated: b.truncated,
            })
        })
        .collect()
}

/// Ground truth of a simulated day.
#[derive(Debug, Clone, Serialize)]
pub struct Truth<'a, C: Serialize> {
    pub schema_version: u32,
    pub config: &'a C,
    pub n: usize,
    pub noise_variance: f64,
    pub price_jumps: &'a [crate::simulator::PriceJump],
    pub vol_jumps: &'a [crate::simulator::VolJump],
    pub c_path: &'a [f64],
}

impl<'a, C: Serialize> Truth<'a, C> {
    pub fn new(config: &'a C, sim: &'a SimulatedPath) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            n: sim.n(),
            noise_variance: sim.noise_variance,
            price_jumps: &sim.price_jumps,
            vol_jumps: &sim.vol_jumps,
            c_path: &sim.c_path,
        }
    }
}
