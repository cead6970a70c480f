//! Quantum carpets: the space-time probability density on a rectangular grid.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{precondition, Error, Result};
use crate::field::{Axis, Field2D, FieldKind};
use crate::numeric::{linspace, parabolic_vertex, trapezoid, uniform_step};
use crate::spectrum::SystemConfig;
use crate::wavepacket::{evolve, expand, BasisTable, EigenExpansion, PacketSpec};

/// Default grid for a carpet window.
pub const DEFAULT_NT: usize = 512;
pub const DEFAULT_NX: usize = 512;

/// `|psi(x_j, t_i)|^2` for `nt` times in `[t0, t1]` and `nx` positions in `[0, 1]`.
///
/// `nt = 1` yields the single row at `t0`.
pub fn carpet(
    packet: &PacketSpec,
    cfg: &SystemConfig,
    t_range: (f64, f64),
    nt: usize,
    nx: usize,
) -> Result<Field2D> {
    let expansion = expand(packet, cfg)?;
    carpet_from(&expansion, cfg, t_range, nt, nx)
}

pub fn carpet_from(
    expansion: &EigenExpansion,
    cfg: &SystemConfig,
    (t0, t1): (f64, f64),
    nt: usize,
    nx: usize,
) -> Result<Field2D> {
    if !(t0.is_finite() && t0 >= 0.0) {
        return Err(precondition(format!("t0 >= 0 required (got {t0})")));
    }
    if nt == 0 {
        return Err(precondition("nt >= 1 required"));
    }
    if nt > 1 && !(t1.is_finite() && t1 > t0) {
        return Err(precondition(format!("t1 > t0 required (got t0 = {t0}, t1 = {t1})")));
    }
    if nx < 2 {
        return Err(precondition(format!("nx >= 2 required (got {nx})")));
    }
    let times = linspace(t0, t1, nt);
    let xs = linspace(0.0, 1.0, nx);
    let basis = BasisTable::for_expansion(expansion, &xs)?;
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let state = evolve(expansion, t, cfg)?;
            Ok(basis.density(&state.amplitudes))
        })
        .collect::<Result<_>>()?;
    Field2D::new(
        Axis::new("time", "T_rev", times),
        Axis::new("position", "L", xs),
        rows.concat(),
        "probability density",
        "1/L",
        FieldKind::Density,
    )
}

/// Largest deviation of a row integral from `norm`.
pub fn worst_row_norm_error(field: &Field2D, norm: f64) -> f64 {
    let h = uniform_step(&field.axis2.points).unwrap_or(0.0);
    (0..field.rows())
        .map(|i| (trapezoid(field.row(i), h) - norm).abs())
        .fold(0.0, f64::max)
}

/// First moment `<x>` of each row of a density carpet.
pub fn centroid_trace(field: &Field2D) -> Result<Vec<f64>> {
    let xs = &field.axis2.points;
    let h = uniform_step(xs)
        .ok_or_else(|| precondition("centroid needs a uniform position axis"))?;
    (0..field.rows())
        .map(|i| {
            let row = field.row(i);
            let norm = trapezoid(row, h);
            if !(norm > 0.0) {
                return Err(Error::ZeroNorm { row: i });
            }
            let first: Vec<f64> = row.iter().zip(xs).map(|(r, x)| r * x).collect();
            Ok(trapezoid(&first, h) / norm)
        })
        .collect()
}

/// Number of interior samples strictly above both neighbours.
pub fn count_local_maxima(trace: &[f64]) -> usize {
    trace
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count()
}

/// Frequency (cycles per unit time) of the strongest periodogram peak of a
/// uniformly sampled trace, after removing its mean.
///
/// The periodogram is evaluated on a grid 16x finer than the natural
/// resolution `1 / duration` and refined with a parabola through the peak.
pub fn dominant_frequency(times: &[f64], trace: &[f64]) -> Result<f64> {
    if times.len() != trace.len() || times.len() < 4 {
        return Err(precondition("trace needs at least 4 samples matching its time axis"));
    }
    let dt = uniform_step(times).ok_or_else(|| precondition("times must be uniform"))?;
    let duration = times[times.len() - 1] - times[0];
    let mean = trace.iter().sum::<f64>() / trace.len() as f64;
    let centered: Vec<f64> = trace.iter().map(|v| v - mean).collect();
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (v, t) in centered.iter().zip(times) {
            let (s, c) = (2.0 * PI * f * (t - times[0])).sin_cos();
            re += v * c;
            im -= v * s;
        }
        re * re + im * im
    };
    let df = 1.0 / (16.0 * duration);
    let nyquist = 0.5 / dt;
    let n = ((nyquist - 0.5 / duration) / df).floor() as usize;
    let freqs: Vec<f64> = (0..=n).map(|k| 0.5 / duration + k as f64 * df).collect();
    let spectrum: Vec<f64> = freqs.par_iter().map(|&f| power(f)).collect();
    let k = (0..spectrum.len())
        .max_by(|&a, &b| spectrum[a].total_cmp(&spectrum[b]))
        .expect("nonempty spectrum");
    if k == 0 || k + 1 == spectrum.len() {
        return Ok(freqs[k]);
    }
    let (offset, _) = parabolic_vertex(spectrum[k - 1], spectrum[k], spectrum[k + 1]);
    Ok(freqs[k] + offset * df)
}
