//! Revival analysis: commensurate fractional super-revival times, and peak
//! detection on the return fidelity `|<psi(0)|psi(t)>|`.

use std::io::{self, Write};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::numeric::{linspace, parabolic_vertex};
use crate::spectrum::SystemConfig;
use crate::wavepacket::{autocorrelation, expand, EigenExpansion, PacketSpec};

/// Peaks below this fraction of the captured norm are not reported as revivals.
pub const PEAK_THRESHOLD_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RevivalKind {
    /// Whole number of `t_sr3` periods.
    Super3,
    /// Fractional on both super-revival clocks.
    Super4,
}

/// A time at which both super-revival clocks are commensurate:
/// `t = (r2/s2) t_sr4 = (r1/s1) t_sr3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevivalPrediction {
    /// In units of `T_rev`.
    pub time: f64,
    pub r1: i64,
    pub s1: i64,
    pub r2: i64,
    pub s2: i64,
    pub kind: RevivalKind,
}

impl RevivalPrediction {
    pub fn sr4_fraction(&self) -> Ratio<i64> {
        Ratio::new(self.r2, self.s2)
    }

    pub fn sr3_fraction(&self) -> Ratio<i64> {
        Ratio::new(self.r1, self.s1)
    }
}

/// All `r2/s2` in lowest terms with `2 <= s2 <= s_max` and `r2 < s2`, with the
/// matching `t_sr3` fraction `4 n_bar r2 / s2`, sorted by time.
pub fn enumerate_fractional(n_bar: u32, cfg: &SystemConfig, s_max: u32) -> Result<Vec<RevivalPrediction>> {
    cfg.validate()?;
    if !cfg.is_relativistic() {
        return Err(Error::NoSuperRevival);
    }
    if n_bar < 1 {
        return Err(Error::InvalidQuantumNumber(n_bar as i64));
    }
    if s_max < 2 {
        return Err(precondition(format!("s_max >= 2 required (got {s_max})")));
    }
    let t_sr4 = cfg.q_squared.recip();
    let clock_ratio = 4 * n_bar as i64;
    let mut fractions: Vec<Ratio<i64>> = (2..=s_max as i64)
        .flat_map(|s| (1..s).map(move |r| Ratio::new(r, s)))
        .filter(|f| f.denom() >= &2)
        .collect();
    fractions.sort();
    fractions.dedup();
    Ok(fractions
        .into_iter()
        .map(|f2| {
            let f1 = f2 * clock_ratio;
            RevivalPrediction {
                time: (*f2.numer() as f64 / *f2.denom() as f64) * t_sr4,
                r1: *f1.numer(),
                s1: *f1.denom(),
                r2: *f2.numer(),
                s2: *f2.denom(),
                kind: if f1.is_integer() {
                    RevivalKind::Super3
                } else {
                    RevivalKind::Super4
                },
            }
        })
        .collect())
}

pub fn write_predictions_json<W: Write>(predictions: &[RevivalPrediction], out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(out, predictions).map_err(io::Error::other)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityPeak {
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityScan {
    pub times: Vec<f64>,
    /// `|A(t)|` at each time.
    pub values: Vec<f64>,
    pub captured_norm: f64,
    /// Local maxima at or above `PEAK_THRESHOLD_FRACTION * captured_norm`,
    /// refined with [`refine_peak`].
    pub peaks: Vec<FidelityPeak>,
}

impl FidelityScan {
    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Highest thresholded peak.
    pub fn top_peak(&self) -> Option<FidelityPeak> {
        self.peaks.iter().copied().max_by(|a, b| a.value.total_cmp(&b.value))
    }

    /// Every interior local maximum at or above `threshold`, with a single
    /// parabolic refinement on the samples.
    pub fn local_maxima(&self, threshold: f64) -> Vec<FidelityPeak> {
        local_maxima(&self.times, &self.values, threshold)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "time,fidelity")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t:e},{v:e}")?;
        }
        Ok(())
    }
}

/// Samples `|A(t)|` at `nt` uniform times over `[t0, t1]`.
pub fn fidelity_scan(packet: &PacketSpec, cfg: &SystemConfig, t_range: (f64, f64), nt: usize) -> Result<FidelityScan> {
    let e = expand(packet, cfg)?;
    fidelity_scan_from(&e, cfg, t_range, nt)
}

pub fn fidelity_scan_from(
    expansion: &EigenExpansion,
    cfg: &SystemConfig,
    (t0, t1): (f64, f64),
    nt: usize,
) -> Result<FidelityScan> {
    if nt < 3 {
        return Err(precondition(format!("nt >= 3 required (got {nt})")));
    }
    if !(t0.is_finite() && t0 >= 0.0 && t1.is_finite() && t1 > t0) {
        return Err(precondition(format!("0 <= t0 < t1 required (got t0 = {t0}, t1 = {t1})")));
    }
    let times = linspace(t0, t1, nt);
    let values: Vec<f64> = times
        .par_iter()
        .map(|&t| autocorrelation(expansion, t, cfg).norm())
        .collect();
    let captured_norm = expansion.captured_norm;
    let step = times[1] - times[0];
    let peaks = local_maxima(&times, &values, PEAK_THRESHOLD_FRACTION * captured_norm)
        .into_iter()
        .map(|p| refine_peak(expansion, cfg, p, step))
        .collect();
    Ok(FidelityScan {
        times,
        values,
        captured_norm,
        peaks,
    })
}

/// Repeats the three-point parabolic fit on `|A(t)|` itself, shrinking the
/// stencil fourfold around each new vertex, until it is below `1e-10` of the
/// scan step.
pub fn refine_peak(expansion: &EigenExpansion, cfg: &SystemConfig, start: FidelityPeak, step: f64) -> FidelityPeak {
    let fidelity = |t: f64| autocorrelation(expansion, t, cfg).norm();
    let mut peak = start;
    let mut h = 0.25 * step;
    while h > 1e-10 * step {
        let (l, m, r) = (fidelity(peak.time - h), fidelity(peak.time), fidelity(peak.time + h));
        if !(m >= l && m >= r) {
            break;
        }
        let (offset, value) = parabolic_vertex(l, m, r);
        peak = FidelityPeak {
            time: peak.time + offset * h,
            value,
        };
        h *= 0.25;
    }
    FidelityPeak {
        time: peak.time,
        value: fidelity(peak.time),
    }
}

/// Interior samples above their left neighbour and not below their right
/// one, refined by a parabola through `ln |A|` of the three samples.
pub fn local_maxima(times: &[f64], values: &[f64], threshold: f64) -> Vec<FidelityPeak> {
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] >= threshold)
        .map(|i| {
            let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
            if l > 0.0 && r > 0.0 {
                let (offset, log_peak) = parabolic_vertex(l.ln(), m.ln(), r.ln());
                FidelityPeak {
                    time: times[i] + offset * dt,
                    value: log_peak.exp(),
                }
            } else {
                FidelityPeak {
                    time: times[i],
                    value: m,
                }
            }
        })
        .collect()
}
