//! Gaussian wave packet in the box: truncated eigenexpansion, exact
//! evolution by eigenphases, and the position/momentum observables built on it.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::numeric::{
    cycles_to_phasor, density_moments, frac_of_product, linspace, phase_cycles, sin_n_pi_x,
    sincospi, trapezoid, trapezoid_weights, uniform_step,
};
use crate::spectrum::{mean_quantum_number, validity_warning, SystemConfig};

/// Default number of intervals for position quadrature.
pub const POSITION_QUADRATURE_INTERVALS: usize = 1024;
/// Default number of samples on the momentum grid.
pub const MOMENTUM_GRID_POINTS: usize = 1024;
/// Momentum grid half-width beyond |p_bar|, in units of 1/delta_x.
pub const MOMENTUM_GRID_MARGIN: f64 = 8.0;
/// Minimum momentum coverage beyond |p_bar|, in units of 1/delta_x.
pub const MOMENTUM_COVERAGE: f64 = 6.0;

/// Initial Gaussian packet, in box units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketSpec {
    pub x_bar: f64,
    pub delta_x: f64,
    pub p_bar: f64,
}

impl PacketSpec {
    pub fn new(x_bar: f64, delta_x: f64, p_bar: f64) -> Result<Self> {
        let p = PacketSpec {
            x_bar,
            delta_x,
            p_bar,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_bar > 0.0 && self.x_bar < 1.0) {
            return Err(precondition(format!(
                "x_bar in (0, 1) required (got {})",
                self.x_bar
            )));
        }
        if !(self.delta_x > 0.0 && self.delta_x.is_finite()) {
            return Err(precondition(format!(
                "delta_x > 0 required (got {})",
                self.delta_x
            )));
        }
        if !self.p_bar.is_finite() {
            return Err(precondition("p_bar must be finite"));
        }
        Ok(())
    }

    /// Warns when the packet is closer than three widths to a wall.
    pub fn wall_clearance_warning(&self) -> Option<String> {
        let lo = self.x_bar - 3.0 * self.delta_x;
        let hi = self.x_bar + 3.0 * self.delta_x;
        (lo <= 0.0 || hi >= 1.0).then(|| {
            format!(
                "packet [x_bar - 3 dx, x_bar + 3 dx] = [{lo:.4}, {hi:.4}] touches a wall; \
                 the Gaussian is a poor box state"
            )
        })
    }

    pub fn n_bar(&self) -> u32 {
        mean_quantum_number(self.p_bar)
    }

    /// Minimum half-width a momentum grid needs for this packet.
    pub fn required_momentum_extent(&self) -> f64 {
        self.p_bar.abs() + MOMENTUM_COVERAGE / self.delta_x
    }

    /// `psi(x)` of the untruncated Gaussian.
    pub fn gaussian(&self, x: f64) -> Complex64 {
        let u = (x - self.x_bar) / self.delta_x;
        let amp = (PI.sqrt() * self.delta_x).powf(-0.5) * (-0.5 * u * u).exp();
        Complex64::from_polar(amp, self.p_bar * (x - self.x_bar))
    }

    /// Closed-form expansion coefficient `a_n` of the Gaussian on the box basis.
    pub fn coefficient(&self, n: u32) -> Complex64 {
        let dx = self.delta_x;
        let k = n as f64 * PI;
        let g_plus = (-0.5 * dx * dx * (self.p_bar + k).powi(2)).exp();
        let g_minus = (-0.5 * dx * dx * (self.p_bar - k).powi(2)).exp();
        let (s, c) = sincospi(2.0 * frac_of_product(n as f64, 0.5 * self.x_bar));
        let pre = 0.5 * (4.0 * dx * PI.sqrt()).sqrt();
        // (e^{i n pi xbar} g+ - e^{-i n pi xbar} g-) / (2i)
        Complex64::new(pre * s * (g_plus + g_minus), -pre * c * (g_plus - g_minus))
    }
}

impl Default for PacketSpec {
    fn default() -> Self {
        PacketSpec {
            x_bar: 0.5,
            delta_x: 0.1,
            p_bar: 50.0,
        }
    }
}

/// Truncated eigenexpansion; coefficients outside `[n_min, n_max]` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenExpansion {
    pub packet: PacketSpec,
    pub n_min: u32,
    pub n_max: u32,
    pub coefficients: Vec<Complex64>,
    pub captured_norm: f64,
}

impl EigenExpansion {
    pub fn coefficient(&self, n: u32) -> Complex64 {
        if n < self.n_min || n > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients[(n - self.n_min) as usize]
    }

    pub fn levels(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        (self.n_min..=self.n_max).zip(self.coefficients.iter().copied())
    }

    pub fn populations(&self) -> Vec<(u32, f64)> {
        self.levels().map(|(n, a)| (n, a.norm_sqr())).collect()
    }

    /// Non-fatal diagnostics about the packet and basis.
    pub fn warnings(&self, cfg: &SystemConfig) -> Vec<String> {
        self.packet
            .wall_clearance_warning()
            .into_iter()
            .chain(validity_warning(self.n_max, cfg))
            .collect()
    }
}

/// Expands `packet` on the box eigenbasis.
///
/// Levels are added until the cumulative norm exceeds `1 - eps` and the last
/// three terms are each below `eps / 100`. Leading terms below that floor
/// are dropped. Coefficients are kept raw, without renormalization.
pub fn expand(packet: &PacketSpec, cfg: &SystemConfig) -> Result<EigenExpansion> {
    packet.validate()?;
    cfg.validate()?;
    let eps = cfg.truncation_epsilon;
    let floor = eps / 100.0;
    let target = 1.0 - eps;

    let mut all = Vec::new();
    let mut cumulative = 0.0;
    let mut quiet = 0;
    let mut converged = false;
    for n in 1..=cfg.n_max_cap {
        let a = packet.coefficient(n);
        let p = a.norm_sqr();
        all.push(a);
        cumulative += p;
        quiet = if p < floor { quiet + 1 } else { 0 };
        if cumulative > target && quiet >= 3 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Truncation {
            n_max_cap: cfg.n_max_cap,
            achieved: cumulative,
            target,
        });
    }

    let significant = |a: &Complex64| a.norm_sqr() > floor;
    let first = all.iter().position(significant).unwrap_or(0);
    let last = all.len() - 1;
    let mut range = first..=last;
    let trimmed: f64 = all[range.clone()].iter().map(|a| a.norm_sqr()).sum();
    if trimmed <= target {
        range = 0..=all.len() - 1;
    }
    let coefficients = all[range.clone()].to_vec();
    let captured_norm = coefficients.iter().map(|a| a.norm_sqr()).sum();
    let expansion = EigenExpansion {
        packet: *packet,
        n_min: *range.start() as u32 + 1,
        n_max: *range.end() as u32 + 1,
        coefficients,
        captured_norm,
    };
    for w in expansion.warnings(cfg) {
        log::warn!("{w}");
    }
    Ok(expansion)
}

/// An expansion evolved to a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    pub expansion: EigenExpansion,
    pub cfg: SystemConfig,
    /// Evolution time in units of `T_rev`.
    pub time: f64,
    /// `a_n exp(-i E_n t)` for `n` in `[n_min, n_max]`.
    pub amplitudes: Vec<Complex64>,
}

/// Multiplies every coefficient by its exact eigenphase at time `t`.
pub fn evolve(expansion: &EigenExpansion, t: f64, cfg: &SystemConfig) -> Result<EvolvedState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(precondition(format!("evolution time t >= 0 required (got {t})")));
    }
    let amplitudes = expansion
        .levels()
        .map(|(n, a)| a * cycles_to_phasor(phase_cycles(n, t, cfg.q_squared)))
        .collect();
    Ok(EvolvedState {
        expansion: expansion.clone(),
        cfg: *cfg,
        time: t,
        amplitudes,
    })
}

/// `<psi(0)|psi(t)> = sum |a_n|^2 exp(-i E_n t)`.
pub fn autocorrelation(expansion: &EigenExpansion, t: f64, cfg: &SystemConfig) -> Complex64 {
    expansion
        .levels()
        .map(|(n, a)| a.norm_sqr() * cycles_to_phasor(phase_cycles(n, t, cfg.q_squared)))
        .sum()
}

/// Eigenfunction values `sqrt(2) sin(n pi x)` on a set of positions,
/// stored position-major.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub n_min: u32,
    pub n_count: usize,
    pub xs: Vec<f64>,
    values: Vec<f64>,
}

impl BasisTable {
    pub fn new(n_min: u32, n_max: u32, xs: &[f64]) -> Result<Self> {
        if let Some(x) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(precondition(format!("positions must lie in [0, 1] (got {x})")));
        }
        let n_count = (n_max - n_min + 1) as usize;
        let values = xs
            .par_iter()
            .flat_map_iter(|&x| (n_min..=n_max).map(move |n| SQRT_2 * sin_n_pi_x(n, x)))
            .collect();
        Ok(BasisTable {
            n_min,
            n_count,
            xs: xs.to_vec(),
            values,
        })
    }

    pub fn for_expansion(expansion: &EigenExpansion, xs: &[f64]) -> Result<Self> {
        Self::new(expansion.n_min, expansion.n_max, xs)
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_count..(j + 1) * self.n_count]
    }

    /// `psi(x_j)` for the given amplitudes.
    pub fn wavefunction(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(amplitudes.len(), self.n_count, "amplitude count mismatch");
        (0..self.xs.len())
            .into_par_iter()
            .map(|j| {
                self.row(j)
                    .iter()
                    .zip(amplitudes)
                    .map(|(u, a)| a * u)
                    .sum()
            })
            .collect()
    }

    pub fn density(&self, amplitudes: &[Complex64]) -> Vec<f64> {
        self.wavefunction(amplitudes)
            .into_iter()
            .map(|z| z.norm_sqr())
            .collect()
    }
}

impl EvolvedState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn wavefunction(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        Ok(BasisTable::for_expansion(&self.expansion, xs)?.wavefunction(&self.amplitudes))
    }

    /// Mean and spread of the position density by trapezoid quadrature on
    /// `intervals` uniform intervals of `[0, 1]`.
    pub fn position_moments(&self, intervals: usize) -> Result<Moments> {
        let xs = linspace(0.0, 1.0, intervals + 1);
        let rho = position_density(self, &xs)?;
        let (norm, mean, spread) = density_moments(&xs, &rho, 1.0 / intervals as f64);
        Ok(Moments { norm, mean, spread })
    }

    /// Mean and spread of `|phi(p)|^2` on the default momentum grid.
    pub fn momentum_moments(&self) -> Result<Moments> {
        let ps = default_momentum_grid(&self.expansion.packet);
        let h = uniform_step(&ps).expect("default grid is uniform");
        let rho: Vec<f64> = momentum_amplitude(self, &ps)?
            .into_iter()
            .map(|z| z.norm_sqr())
            .collect();
        let (norm, mean, spread) = density_moments(&ps, &rho, h);
        Ok(Moments { norm, mean, spread })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub mean: f64,
    pub spread: f64,
}

/// `|psi(x, t)|^2` at each position.
pub fn position_density(state: &EvolvedState, xs: &[f64]) -> Result<Vec<f64>> {
    Ok(BasisTable::for_expansion(&state.expansion, xs)?.density(&state.amplitudes))
}

/// Symmetric grid of `MOMENTUM_GRID_POINTS` samples over
/// `+-(|p_bar| + MOMENTUM_GRID_MARGIN / delta_x)`.
pub fn default_momentum_grid(packet: &PacketSpec) -> Vec<f64> {
    let half = packet.p_bar.abs() + MOMENTUM_GRID_MARGIN / packet.delta_x;
    crate::numeric::symmetric_linspace(half, MOMENTUM_GRID_POINTS)
}

/// Checks that `ps` is symmetric about zero and wide enough for `packet`.
pub fn check_momentum_coverage(packet: &PacketSpec, ps: &[f64]) -> Result<()> {
    let required = packet.required_momentum_extent();
    let (Some(&lo), Some(&hi)) = (ps.first(), ps.last()) else {
        return Err(Error::Coverage {
            required,
            available: 0.0,
        });
    };
    if (lo + hi).abs() > 1e-9 * hi.abs().max(1.0) {
        return Err(precondition(format!(
            "momentum grid must be symmetric about 0 (got [{lo}, {hi}])"
        )));
    }
    if hi < required {
        return Err(Error::Coverage {
            required,
            available: hi,
        });
    }
    Ok(())
}

/// `phi(p) = (2 pi)^(-1/2) int_0^1 psi(x) exp(-i p x) dx`, by trapezoid
/// quadrature on the default position grid.
pub fn momentum_amplitude(state: &EvolvedState, ps: &[f64]) -> Result<Vec<Complex64>> {
    momentum_amplitude_with(state, ps, POSITION_QUADRATURE_INTERVALS)
}

/// As [`momentum_amplitude`] with `intervals` quadrature intervals.
///
/// The trapezoid sum carries the leading Euler-Maclaurin end correction,
/// evaluated from the exact wall slopes of the expansion; the zero-extended
/// wavefunction has a kink at each wall whenever the packet touches it.
pub fn momentum_amplitude_with(
    state: &EvolvedState,
    ps: &[f64],
    intervals: usize,
) -> Result<Vec<Complex64>> {
    check_momentum_coverage(&state.expansion.packet, ps)?;
    if intervals < 2 {
        return Err(precondition("position quadrature needs at least 2 intervals"));
    }
    let h = 1.0 / intervals as f64;
    let xs = linspace(0.0, 1.0, intervals + 1);
    let psi = state.wavefunction(&xs)?;
    let weights = trapezoid_weights(xs.len(), h);
    let weighted: Vec<Complex64> = psi.iter().zip(&weights).map(|(z, w)| z * w).collect();
    let (slope_left, slope_right) = state.wall_slopes();
    let scale = (2.0 * PI).sqrt().recip();
    Ok(ps
        .par_iter()
        .map(|&p| {
            let sum: Complex64 = weighted
                .iter()
                .zip(&xs)
                .map(|(z, &x)| {
                    let (s, c) = (p * x).sin_cos();
                    z * Complex64::new(c, -s)
                })
                .sum();
            let (s, c) = p.sin_cos();
            let end = slope_right * Complex64::new(c, -s) - slope_left;
            (sum - end * (h * h / 12.0)) * scale
        })
        .collect())
}

impl EvolvedState {
    /// `(psi'(0), psi'(1))` from the eigenexpansion.
    pub fn wall_slopes(&self) -> (Complex64, Complex64) {
        let mut left = Complex64::new(0.0, 0.0);
        let mut right = Complex64::new(0.0, 0.0);
        for (n, a) in (self.expansion.n_min..).zip(&self.amplitudes) {
            let d = a * (SQRT_2 * PI * n as f64);
            left += d;
            right += if n % 2 == 0 { d } else { -d };
        }
        (left, right)
    }
}

/// Integral of a density over `[0, 1]` sampled at `intervals + 1` points.
pub fn integrate_density(rho: &[f64]) -> f64 {
    trapezoid(rho, 1.0 / (rho.len().max(2) - 1) as f64)
}
