//! Non-Markovianity witnesses: backflow intervals of the IDF and sign
//! intervals of the channel rates.

use serde::{Deserialize, Serialize};

use crate::dynamics::{FlowRecord, MasterEquation};
use crate::{Error, Result};

/// Default positivity threshold for the IDF.
pub const DEFAULT_BACKFLOW_THRESHOLD: f64 = 1e-10;

/// Rates with `|gamma|` at or below this count as zero.
const RATE_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    fn of(x: f64, zero: f64) -> Self {
        if x > zero {
            Sign::Positive
        } else if x < -zero {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessKind {
    IdfPositive,
    RateSign { channel: usize },
}

/// Time window of uniform sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub sign: Sign,
    /// `(t, value)` of the largest sampled value inside the window.
    pub peak: Option<(f64, f64)>,
    /// `(t, idqs)` of the smallest sampled IDQS inside the window.
    pub min_idqs: Option<(f64, f64)>,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub witness: WitnessKind,
    /// First and last sample time.
    pub range: (f64, f64),
    /// Largest spacing between consecutive samples.
    pub resolution: f64,
    pub intervals: Vec<Interval>,
}

impl IntervalReport {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn with_sign(&self, sign: Sign) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |i| i.sign == sign)
    }
}

fn check_times(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some(i) = times.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::GridNotAscending { index: i + 1 });
    }
    Ok(times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
}

/// Time where the straight line through `(t0, v0)`, `(t1, v1)` reaches `level`.
fn crossing(t0: f64, v0: f64, t1: f64, v1: f64, level: f64) -> f64 {
    if v1 == v0 {
        return 0.5 * (t0 + t1);
    }
    (t0 + (level - v0) * (t1 - t0) / (v1 - v0)).clamp(t0, t1)
}

/// Maximal windows where `idf > threshold`. Endpoints between samples are
/// placed by linear interpolation; undefined records (poles, singular metric)
/// end a window at the last defined sample.
pub fn detect_backflow(records: &[FlowRecord], threshold: f64) -> Result<IntervalReport> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative threshold {threshold}")));
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let resolution = check_times(&times)?;
    let value = |r: &FlowRecord| if r.is_ok() { r.idf.filter(|v| v.is_finite()) } else { None };

    let mut intervals = Vec::new();
    let mut open: Option<Interval> = None;
    let mut prev: Option<(f64, f64)> = None;
    for r in records {
        let v = value(r);
        match (v, open.as_mut()) {
            (Some(v), Some(iv)) if v > threshold => {
                if iv.peak.is_none_or(|(_, p)| v > p) {
                    iv.peak = Some((r.t, v));
                }
                if let Some(d) = r.idqs {
                    if iv.min_idqs.is_none_or(|(_, m)| d < m) {
                        iv.min_idqs = Some((r.t, d));
                    }
                }
            }
            (Some(v), Some(_)) => {
                let mut iv = open.take().expect("open interval");
                let (t0, v0) = prev.expect("open interval has a previous sample");
                iv.end = crossing(t0, v0, r.t, v, threshold);
                intervals.push(iv);
            }
            (Some(v), None) if v > threshold => {
                let start = match prev {
                    Some((t0, v0)) => crossing(t0, v0, r.t, v, threshold),
                    None => r.t,
                };
                open = Some(Interval {
                    start,
                    end: r.t,
                    sign: Sign::Positive,
                    peak: Some((r.t, v)),
                    min_idqs: r.idqs.map(|d| (r.t, d)),
                });
            }
            (Some(_), None) => {}
            (None, _) => {
                if let (Some(mut iv), Some((t0, _))) = (open.take(), prev) {
                    iv.end = t0;
                    intervals.push(iv);
                }
            }
        }
        prev = v.map(|v| (r.t, v));
    }
    if let (Some(mut iv), Some((t0, _))) = (open, prev) {
        iv.end = t0;
        intervals.push(iv);
    }
    Ok(IntervalReport {
        witness: WitnessKind::IdfPositive,
        range: (times[0], times[times.len() - 1]),
        resolution,
        intervals,
    })
}

/// Sign partition of sampled values. Non-finite samples (poles) split the
/// partition; boundaries between opposite signs are interpolated zero
/// crossings, and isolated zero samples only mark a boundary.
pub fn sign_partition(times: &[f64], values: &[f64], zero: f64) -> Result<Vec<Interval>> {
    if times.len() != values.len() {
        return Err(Error::DimMismatch { left: times.len(), right: values.len() });
    }
    check_times(times)?;
    let mut runs: Vec<(Sign, usize, usize)> = Vec::new();
    for (k, v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let s = Sign::of(*v, zero);
        match runs.last_mut() {
            Some((last, _, end)) if *last == s && *end + 1 == k => *end = k,
            _ => runs.push((s, k, k)),
        }
    }
    let joined = |a: usize, b: usize| b == a + 1;
    let isolated_zero = |i: usize| {
        let (s, a, b) = runs[i];
        s == Sign::Zero
            && a == b
            && runs.len() > 1
            && (i == 0 || joined(runs[i - 1].2, a))
            && (i + 1 == runs.len() || joined(b, runs[i + 1].1))
    };
    let keep: Vec<usize> = (0..runs.len()).filter(|&i| !isolated_zero(i)).collect();

    let mut out = Vec::with_capacity(keep.len());
    for (pos, &i) in keep.iter().enumerate() {
        let (sign, a, b) = runs[i];
        let mut start = times[a];
        let mut end = times[b];
        if pos == 0 && i > 0 {
            start = times[runs[i - 1].1];
        }
        if pos + 1 == keep.len() && i + 1 < runs.len() {
            end = times[runs[i + 1].2];
        }
        if pos > 0 {
            let (_, _, pb) = runs[keep[pos - 1]];
            if joined(pb, a) {
                start = crossing(times[pb], values[pb], times[a], values[a], 0.0);
            } else if pb + 2 == a && values[pb + 1].is_finite() {
                start = times[pb + 1];
            }
        }
        if let Some(&j) = keep.get(pos + 1) {
            let (_, na, _) = runs[j];
            if joined(b, na) {
                end = crossing(times[b], values[b], times[na], values[na], 0.0);
            } else if b + 2 == na && values[b + 1].is_finite() {
                end = times[b + 1];
            }
        }
        let peak = (a..=b).map(|k| (times[k], values[k])).fold(None, |best: Option<(f64, f64)>, (t, v)| match best {
            Some((_, p)) if p >= v => best,
            _ => Some((t, v)),
        });
        out.push(Interval { start, end, sign, peak, min_idqs: None });
    }
    Ok(out)
}

/// Per-channel sign partition of the rates of `me` on `grid`.
pub fn rate_sign_intervals(me: &MasterEquation, grid: &[f64]) -> Result<Vec<IntervalReport>> {
    let resolution = check_times(grid)?;
    let samples: Vec<Vec<f64>> = grid.iter().map(|&t| me.rates_at(t)).collect();
    (0..me.channels().len())
        .map(|channel| {
            let values: Vec<f64> = samples.iter().map(|s| s[channel]).collect();
            rate_sign_report(channel, grid, &values, resolution)
        })
        .collect()
}

/// Sign report for one channel from sampled rates.
pub fn rate_sign_intervals_from_samples(channel: usize, times: &[f64], rates: &[f64]) -> Result<IntervalReport> {
    let resolution = check_times(times)?;
    rate_sign_report(channel, times, rates, resolution)
}

fn rate_sign_report(channel: usize, times: &[f64], values: &[f64], resolution: f64) -> Result<IntervalReport> {
    Ok(IntervalReport {
        witness: WitnessKind::RateSign { channel },
        range: (times[0], times[times.len() - 1]),
        resolution,
        intervals: sign_partition(times, values, RATE_ZERO)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub channels: usize,
    /// Every IDF-positive window lies inside a negative-rate window of some
    /// channel, up to the grid resolution.
    pub contained: bool,
    /// IDF-positive windows with no enclosing negative-rate window.
    pub counterexamples: Vec<Interval>,
    pub slack: f64,
}

/// Compares backflow windows with negative-rate windows. With one channel a
/// positive IDF requires a negative rate, so containment is expected; with
/// several channels failures are reported, not treated as errors.
pub fn witness_agreement(idf_report: &IntervalReport, rate_reports: &[IntervalReport]) -> AgreementSummary {
    let slack = rate_reports.iter().map(|r| r.resolution).fold(idf_report.resolution, f64::max);
    let negative: Vec<&Interval> = rate_reports.iter().flat_map(|r| r.with_sign(Sign::Negative)).collect();
    let counterexamples: Vec<Interval> = idf_report
        .intervals
        .iter()
        .filter(|iv| !negative.iter().any(|n| n.start - slack <= iv.start && iv.end <= n.end + slack))
        .cloned()
        .collect();
    AgreementSummary { channels: rate_reports.len(), contained: counterexamples.is_empty(), counterexamples, slack }
}

/// Time integral of the positive part of the IDF (trapezoid rule over
/// consecutive defined records). Not a measure defined by the theory; offered
/// as a summary statistic.
pub fn positive_flow_integral(records: &[FlowRecord]) -> f64 {
    records
        .windows(2)
        .filter_map(|w| {
            let a = w[0].idf.filter(|_| w[0].is_ok())?;
            let b = w[1].idf.filter(|_| w[1].is_ok())?;
            Some(0.5 * (a.max(0.0) + b.max(0.0)) * (w[1].t - w[0].t))
        })
        .sum()
}
