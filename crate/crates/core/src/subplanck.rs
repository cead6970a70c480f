//! Sub-Planck structure: the action `A = dx dp` of an evolved packet, the
//! fringe scale `a = 1/A` (units of hbar), and its sensitivity to `q^2`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::spectrum::SystemConfig;
use crate::wavepacket::{evolve, expand, EvolvedState, PacketSpec, POSITION_QUADRATURE_INTERVALS};
use crate::wigner::fringe_period_along_x;

/// Reference evaluation time for the sensitivity ratio.
pub const QUARTER_REVIVAL: f64 = 0.25;
/// Fine intervals used for the fringe measurement.
pub const FRINGE_INTERVALS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubPlanckReport {
    pub time: f64,
    pub q_squared: f64,
    pub delta_x_eff: f64,
    pub delta_p_eff: f64,
    pub action_a: f64,
    pub dim_a: f64,
    /// Period along `x` of `W(x, 0)` around `x_bar`, when fringes are present.
    pub fringe_spacing: Option<f64>,
}

/// Moment-based report for `packet` evolved to `t`, without fringe measurement.
pub fn subplanck_dimension(packet: &PacketSpec, cfg: &SystemConfig, t: f64) -> Result<SubPlanckReport> {
    let e = expand(packet, cfg)?;
    report(&evolve(&e, t, cfg)?, false)
}

/// Widths from the second moments of `|psi(x)|^2` and `|phi(p)|^2`.
pub fn report(state: &EvolvedState, measure_fringes: bool) -> Result<SubPlanckReport> {
    let dx = state.position_moments(POSITION_QUADRATURE_INTERVALS)?.spread;
    let dp = state.momentum_moments()?.spread;
    let action_a = dx * dp;
    let fringe_spacing = if measure_fringes {
        let packet = &state.expansion.packet;
        fringe_period_along_x(state, 0.0, packet.x_bar, packet.delta_x, FRINGE_INTERVALS)?
    } else {
        None
    };
    Ok(SubPlanckReport {
        time: state.time,
        q_squared: state.cfg.q_squared,
        delta_x_eff: dx,
        delta_p_eff: dp,
        action_a,
        dim_a: action_a.recip(),
        fringe_spacing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityMode {
    /// Evaluate at `t = 0.25`.
    ShortTime,
    /// Evaluate at `t = t_sr4 / 4 = 1 / (4 q^2)`; `q^2 = 0` is skipped.
    SuperRevival,
}

impl SensitivityMode {
    pub fn time(self, q_squared: f64) -> Option<f64> {
        match self {
            SensitivityMode::ShortTime => Some(QUARTER_REVIVAL),
            SensitivityMode::SuperRevival => (q_squared > 0.0).then(|| 0.25 / q_squared),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityPoint {
    pub report: SubPlanckReport,
    /// `a_q / a(q^2 = 0, t = 0.25)`.
    pub delta: f64,
}

/// `delta(q^2)` for each `q^2` in the list, sorted by `q^2`.
pub fn sensitivity_curve(
    packet: &PacketSpec,
    q2_list: &[f64],
    mode: SensitivityMode,
    base: &SystemConfig,
    measure_fringes: bool,
) -> Result<Vec<SensitivityPoint>> {
    if let Some(q) = q2_list.iter().find(|q| !(q.is_finite() && **q >= 0.0)) {
        return Err(precondition(format!("q_squared >= 0 required (got {q})")));
    }
    let mut q2s = q2_list.to_vec();
    q2s.sort_by(f64::total_cmp);
    q2s.dedup();
    let jobs: Vec<(SystemConfig, f64)> = q2s
        .iter()
        .filter_map(|&q2| mode.time(q2).map(|t| (SystemConfig { q_squared: q2, ..*base }, t)))
        .collect();
    for (cfg, _) in &jobs {
        cfg.validate()?;
    }
    let reference_cfg = SystemConfig { q_squared: 0.0, ..*base };
    let reference = subplanck_dimension(packet, &reference_cfg, QUARTER_REVIVAL)?;
    jobs.par_iter()
        .map(|(cfg, t)| {
            let e = expand(packet, cfg)?;
            let r = report(&evolve(&e, *t, cfg)?, measure_fringes)?;
            Ok(SensitivityPoint {
                report: r,
                delta: r.dim_a / reference.dim_a,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "q_squared,time,delta_x,delta_p,action_A,dim_a,delta_ratio,fringe_spacing";

/// One row per point; an empty `fringe_spacing` means no fringes were found
/// or none were measured.
pub fn write_csv<W: Write>(points: &[SensitivityPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in points {
        let r = &p.report;
        let fringe = r.fringe_spacing.map(|f| format!("{f:e}")).unwrap_or_default();
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{fringe}",
            r.q_squared, r.time, r.delta_x_eff, r.delta_p_eff, r.action_a, r.dim_a, p.delta
        )?;
    }
    Ok(())
}
