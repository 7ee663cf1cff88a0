//! Price-jump detection on the second-stage bin statistics.
//!
//! A bin is flagged when `h |ζ_k| > max(u_k, a²)`. Flagged bins closer than
//! a configurable gap are grouped into one event, so that the test windows
//! sit left of the first and right of the last member.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::spotvol::SpotVolPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub r_inv: usize,
    pub a_min_jump: f64,
    /// Ignore the first and last `r_inv` bins (opening and closing periods).
    pub exclude_edges: bool,
    /// Keep only events whose time lies in `[t0, t1]`.
    pub time_range: Option<(f64, f64)>,
}

impl DetectConfig {
    pub fn new(r_inv: usize) -> Self {
        Self { r_inv, a_min_jump: 0.0, exclude_edges: false, time_range: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent<T> {
    pub first_bin: usize,
    pub last_bin: usize,
    /// Boundary `first_bin · h`.
    pub time: T,
    /// `h ζ_k` of the largest member.
    pub zeta_value: T,
    /// `max(u_k, a²)` of that member.
    pub threshold_used: T,
    pub grouped: bool,
}

impl<T> JumpEvent<T> {
    pub fn bins(&self) -> std::ops::RangeInclusive<usize> {
        self.first_bin..=self.last_bin
    }
}

pub fn detect<T: Scalar>(spot: &SpotVolPath<T>, cfg: &DetectConfig) -> Vec<JumpEvent<T>> {
    let h: T = spot.h();
    let a2 = T::of(cfg.a_min_jump * cfg.a_min_jump);
    let bins = spot.bins.len();
    let edge = if cfg.exclude_edges { cfg.r_inv } else { 0 };
    let events = spot
        .bins
        .iter()
        .enumerate()
        .filter(|&(k, _)| k >= edge && k + edge < bins)
        .filter_map(|(k, b)| {
            let threshold = b.threshold.max(a2);
            let value = h * b.zeta;
            (value.abs() > threshold).then(|| JumpEvent {
                first_bin: k,
                last_bin: k,
                time: T::of(spot.grid.bin_time(k)),
                zeta_value: value,
                threshold_used: threshold,
                grouped: false,
            })
        })
        .collect();
    match cfg.time_range {
        Some((t0, t1)) => restrict_to(events, t0, t1),
        None => events,
    }
}

/// Merges events separated by fewer than `gap` unflagged bins.
pub fn group<T: Scalar>(events: &[JumpEvent<T>], gap: usize) -> Vec<JumpEvent<T>> {
    let mut out: Vec<JumpEvent<T>> = Vec::with_capacity(events.len());
    for e in events {
        match out.last_mut() {
            Some(last) if e.first_bin <= last.last_bin || e.first_bin - last.last_bin - 1 < gap => {
                last.last_bin = last.last_bin.max(e.last_bin);
                if e.zeta_value.abs() > last.zeta_value.abs() {
                    last.zeta_value = e.zeta_value;
                    last.threshold_used = e.threshold_used;
                }
                last.grouped = true;
            }
            _ => out.push(e.clone()),
        }
    }
    out
}

/// Sub-interval test: drops events outside `[t0, t1]`.
pub fn restrict_to<T: Scalar>(events: Vec<JumpEvent<T>>, t0: f64, t1: f64) -> Vec<JumpEvent<T>> {
    events.into_iter().filter(|e| (t0..=t1).contains(&e.time.f64())).collect()
}
