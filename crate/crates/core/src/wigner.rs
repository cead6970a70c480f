//! Wigner quasiprobability distribution of an evolved state on a phase-space grid.
//!
//! `W(x, p) = (1/pi) int psi*(x - y) psi(x + y) exp(-2 i p y) dy`, with `psi`
//! zero outside the box, so `|y| <= min(x, 1 - x)`. The wavefunction is
//! reconstructed once on a fine uniform grid and the `y` integral is a direct
//! sum over that grid, evaluated for every requested momentum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{precondition, Error, Result};
use crate::field::{Axis, Field2D, FieldKind};
use crate::numeric::{linspace, symmetric_linspace, trapezoid_weights, uniform_step};
use crate::wavepacket::{momentum_amplitude, position_density, EvolvedState, PacketSpec};

pub const DEFAULT_NX: usize = 256;
pub const DEFAULT_NP: usize = 256;
/// Fine samples per half output cell.
pub const DEFAULT_OVERSAMPLE: usize = 4;
/// Largest tolerated imaginary part of a computed `W` value.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-10;
/// Tolerance of the marginal and normalization checks.
pub const MARGINAL_TOLERANCE: f64 = 1e-3;

/// Phase-space sampling: `nx` cell-centred positions, `np` momenta spanning
/// `[-p_max, p_max]`, and `2 nx oversample` intervals for the `y` sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGrid {
    pub nx: usize,
    pub np: usize,
    pub p_max: f64,
    pub oversample: usize,
}

impl WignerGrid {
    /// Default grid for `packet`: momenta cover `|p_bar| + 6 / delta_x`.
    pub fn for_packet(packet: &PacketSpec) -> Self {
        WignerGrid {
            nx: DEFAULT_NX,
            np: DEFAULT_NP,
            p_max: packet.required_momentum_extent(),
            oversample: DEFAULT_OVERSAMPLE,
        }
    }

    pub fn fine_intervals(&self) -> usize {
        2 * self.nx * self.oversample
    }

    /// `x_i = (i + 1/2) / nx`.
    pub fn x_axis(&self) -> Vec<f64> {
        let denom = (2 * self.nx) as f64;
        (0..self.nx).map(|i| (2 * i + 1) as f64 / denom).collect()
    }

    pub fn p_axis(&self) -> Vec<f64> {
        symmetric_linspace(self.p_max, self.np)
    }

    pub fn validate(&self, packet: &PacketSpec) -> Result<()> {
        if self.nx < 2 || self.np < 2 {
            return Err(precondition(format!(
                "nx >= 2 and np >= 2 required (got {} x {})",
                self.nx, self.np
            )));
        }
        if self.oversample == 0 {
            return Err(precondition("oversample >= 1 required"));
        }
        let required = packet.required_momentum_extent();
        if !(self.p_max >= required) {
            return Err(Error::Coverage {
                required,
                available: self.p_max,
            });
        }
        // the kernel exp(-2 i p y) on step h is periodic in p with period pi / h
        let alias = 0.5 * PI * self.fine_intervals() as f64;
        if self.p_max >= alias {
            return Err(precondition(format!(
                "p_max < pi N / 2 = {alias:.1} required to avoid aliasing (got {})",
                self.p_max
            )));
        }
        Ok(())
    }
}

/// Sampling of the `y` integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMeta {
    pub fine_intervals: usize,
    pub step: f64,
    /// Largest `|y|` reached, at the row nearest the box centre.
    pub max_half_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    /// Rows are positions, columns momenta.
    pub field: Field2D,
    pub time: f64,
    pub captured_norm: f64,
    pub quadrature: QuadratureMeta,
    pub min_value: f64,
    pub max_imag_residue: f64,
}

impl WignerField {
    pub fn x_axis(&self) -> &[f64] {
        &self.field.axis1.points
    }

    pub fn p_axis(&self) -> &[f64] {
        &self.field.axis2.points
    }

    /// Midpoint weights in `x`, trapezoid weights in `p`.
    fn weights(&self) -> (f64, Vec<f64>) {
        let dx = 1.0 / self.field.rows() as f64;
        let dp = uniform_step(self.p_axis()).unwrap_or(0.0);
        (dx, trapezoid_weights(self.field.cols(), dp))
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (dx, wp) = self.weights();
        (0..self.field.rows())
            .map(|i| {
                self.field
                    .row(i)
                    .iter()
                    .zip(&wp)
                    .map(|(v, w)| f(*v) * w)
                    .sum::<f64>()
            })
            .sum::<f64>()
            * dx
    }

    /// `int int W dx dp`.
    pub fn integral(&self) -> f64 {
        self.integrate(|v| v)
    }

    /// `int W dp` at each position.
    pub fn position_marginal(&self) -> Vec<f64> {
        let (_, wp) = self.weights();
        (0..self.field.rows())
            .map(|i| self.field.row(i).iter().zip(&wp).map(|(v, w)| v * w).sum())
            .collect()
    }

    /// `int W dx` at each momentum.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let (dx, _) = self.weights();
        let mut out = vec![0.0; self.field.cols()];
        for i in 0..self.field.rows() {
            for (o, v) in out.iter_mut().zip(self.field.row(i)) {
                *o += v;
            }
        }
        out.iter().map(|v| v * dx).collect()
    }
}

/// `W` on the default grid for the state's packet with `nx` positions and `np` momenta.
pub fn wigner(state: &EvolvedState, nx: usize, np: usize) -> Result<WignerField> {
    let grid = WignerGrid {
        nx,
        np,
        ..WignerGrid::for_packet(&state.expansion.packet)
    };
    wigner_on(state, &grid)
}

pub fn wigner_on(state: &EvolvedState, grid: &WignerGrid) -> Result<WignerField> {
    grid.validate(&state.expansion.packet)?;
    let n = grid.fine_intervals();
    let h = 1.0 / n as f64;
    let psi = state.wavefunction(&linspace(0.0, 1.0, n + 1))?;
    let xs = grid.x_axis();
    let ps = grid.p_axis();
    let rows: Vec<(Vec<f64>, f64)> = (0..grid.nx)
        .into_par_iter()
        .map(|i| row_transform(&psi, (2 * i + 1) * grid.oversample, &ps, h))
        .collect();
    let max_imag_residue = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let values: Vec<f64> = rows.into_iter().flat_map(|r| r.0).collect();
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if max_imag_residue > IMAG_RESIDUE_LIMIT * scale {
        return Err(Error::Contract(format!(
            "Wigner transform has imaginary residue {max_imag_residue:e}"
        )));
    }
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let field = Field2D::new(
        Axis::new("position", "L", xs),
        Axis::new("momentum", "hbar/L", ps),
        values,
        "Wigner function",
        "1/hbar",
        FieldKind::Signed,
    )?;
    Ok(WignerField {
        field,
        time: state.time,
        captured_norm: state.expansion.captured_norm,
        quadrature: QuadratureMeta {
            fine_intervals: n,
            step: h,
            max_half_range: (n / 2) as f64 * h,
        },
        min_value,
        max_imag_residue,
    })
}

/// `W(x_j, p)` for each `p`, with `x_j = j h` a fine-grid point, and the
/// largest imaginary part seen.
fn row_transform(psi: &[Complex64], j: usize, ps: &[f64], h: f64) -> (Vec<f64>, f64) {
    let n = psi.len() - 1;
    let m = j.min(n - j);
    // f[s] = psi*(x - k h) psi(x + k h) with k = s - m
    let f: Vec<Complex64> = (0..=2 * m)
        .map(|s| psi[j + m - s].conj() * psi[j + s - m])
        .collect();
    let mut residue: f64 = 0.0;
    let values = ps
        .iter()
        .map(|&p| {
            let (s, c) = (2.0 * p * h).sin_cos();
            let step = Complex64::new(c, -s);
            let (s0, c0) = (2.0 * p * h * m as f64).sin_cos();
            let mut phasor = Complex64::new(c0, s0);
            let mut acc = Complex64::new(0.0, 0.0);
            for fk in &f {
                acc += fk * phasor;
                phasor *= step;
            }
            let w = acc * (h / PI);
            residue = residue.max(w.im.abs());
            w.re
        })
        .collect();
    (values, residue)
}

/// Sup-norm deviations of the two marginals from `|psi(x)|^2` and `|phi(p)|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalErrors {
    pub position: f64,
    pub momentum: f64,
    pub normalization: f64,
}

impl MarginalErrors {
    pub fn within(&self, tol: f64) -> bool {
        self.position <= tol && self.momentum <= tol && self.normalization <= tol
    }
}

pub fn marginal_errors(wf: &WignerField, state: &EvolvedState) -> Result<MarginalErrors> {
    let rho_x = position_density(state, wf.x_axis())?;
    let rho_p: Vec<f64> = momentum_amplitude(state, wf.p_axis())?
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    Ok(MarginalErrors {
        position: sup(&wf.position_marginal(), &rho_x),
        momentum: sup(&wf.momentum_marginal(), &rho_p),
        normalization: (wf.integral() - wf.captured_norm).abs(),
    })
}

/// Fails with a contract error when a marginal or the normalization is off by
/// more than [`MARGINAL_TOLERANCE`].
pub fn check_marginals(wf: &WignerField, state: &EvolvedState) -> Result<MarginalErrors> {
    let e = marginal_errors(wf, state)?;
    if !e.within(MARGINAL_TOLERANCE) {
        return Err(Error::Contract(format!(
            "Wigner marginals off: position {:e}, momentum {:e}, normalization {:e} (limit {MARGINAL_TOLERANCE:e})",
            e.position, e.momentum, e.normalization
        )));
    }
    Ok(e)
}

/// `int int W_a W_b / sqrt(int int W_a^2 int int W_b^2)`.
pub fn wigner_overlap(a: &WignerField, b: &WignerField) -> Result<f64> {
    if a.field.axis1.points != b.field.axis1.points || a.field.axis2.points != b.field.axis2.points {
        return Err(Error::GridMismatch(format!(
            "{} x {} over p in [{}, {}] vs {} x {} over p in [{}, {}]",
            a.field.rows(),
            a.field.cols(),
            a.p_axis()[0],
            a.p_axis()[a.p_axis().len() - 1],
            b.field.rows(),
            b.field.cols(),
            b.p_axis()[0],
            b.p_axis()[b.p_axis().len() - 1],
        )));
    }
    let (dx, wp) = a.weights();
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..a.field.rows() {
        for ((u, v), w) in a.field.row(i).iter().zip(b.field.row(i)).zip(&wp) {
            ab += u * v * w;
            aa += u * u * w;
            bb += v * v * w;
        }
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(precondition("overlap of an identically zero field"));
    }
    Ok((ab * dx / ((aa * dx) * (bb * dx)).sqrt()).clamp(-1.0, 1.0))
}

/// `int int |W| dx dp - captured_norm`.
pub fn negativity_volume(wf: &WignerField) -> f64 {
    wf.integrate(f64::abs) - wf.captured_norm
}

/// `int int W^2 dx dp`.
pub fn purity_integral(wf: &WignerField) -> f64 {
    wf.integrate(|v| v * v)
}

/// Period of the oscillation of `W(x, p)` along `x` at fixed `p`, measured
/// as twice the mean gap between sign changes within `center +- half_window`.
///
/// Returns `None` when fewer than two sign changes are found.
pub fn fringe_period_along_x(
    state: &EvolvedState,
    p: f64,
    center: f64,
    half_window: f64,
    fine_intervals: usize,
) -> Result<Option<f64>> {
    if fine_intervals < 2 || !(half_window > 0.0) {
        return Err(precondition("fringe window needs half_window > 0 and >= 2 intervals"));
    }
    let h = 1.0 / fine_intervals as f64;
    let psi = state.wavefunction(&linspace(0.0, 1.0, fine_intervals + 1))?;
    let lo = ((center - half_window) / h).ceil().max(1.0) as usize;
    let hi = (((center + half_window) / h).floor() as usize).min(fine_intervals - 1);
    let samples: Vec<(f64, f64)> = (lo..=hi)
        .into_par_iter()
        .map(|j| (j as f64 * h, row_transform(&psi, j, &[p], h).0[0]))
        .collect();
    let crossings: Vec<f64> = samples
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            x0 + (x1 - x0) * y0 / (y0 - y1)
        })
        .collect();
    if crossings.len() < 2 {
        return Ok(None);
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Ok(Some(2.0 * span / (crossings.len() - 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parabolic_vertex;
    use crate::spectrum::SystemConfig;
    use crate::wavepacket::{evolve, expand};

    fn state(packet: PacketSpec, q2: f64, t: f64) -> EvolvedState {
        let cfg = SystemConfig::new(q2).unwrap();
        let e = expand(&packet, &cfg).unwrap();
        evolve(&e, t, &cfg).unwrap()
    }

    fn evolved_field(q2: f64, t: f64) -> (EvolvedState, WignerField) {
        let s = state(PacketSpec::default(), q2, t);
        let w = wigner(&s, DEFAULT_NX, DEFAULT_NP).unwrap();
        (s, w)
    }

    #[test]
    fn grid_validation() {
        let packet = PacketSpec::default();
        let g = WignerGrid::for_packet(&packet);
        assert_eq!(g.fine_intervals(), 2048);
        assert_eq!(g.p_max, 110.0);
        assert!(g.validate(&packet).is_ok());
        let narrow = WignerGrid { p_max: 80.0, ..g };
        assert!(matches!(narrow.validate(&packet), Err(Error::Coverage { .. })));
        let coarse = WignerGrid { nx: 4, oversample: 1, p_max: 20.0, ..g };
        let slow = PacketSpec::new(0.5, 0.5, 0.0).unwrap();
        assert!(coarse.validate(&slow).is_err());
    }

    #[test]
    fn gaussian_peak_is_one_over_pi() {
        let (_, w) = evolved_field(0.0, 0.0);
        let (mut best, mut at) = (f64::MIN, (0, 0));
        for i in 0..w.field.rows() {
            for j in 0..w.field.cols() {
                if w.field.get(i, j) > best {
                    best = w.field.get(i, j);
                    at = (i, j);
                }
            }
        }
        assert!((best * PI - 1.0).abs() < 0.05, "{best}");
        assert!((w.x_axis()[at.0] - 0.5).abs() < 0.01);
        assert!((w.p_axis()[at.1] - 50.0).abs() < 1.0);
        assert!(w.max_imag_residue < 1e-12);
    }

    #[test]
    fn marginals_and_normalization() {
        for (q2, t) in [(0.0, 0.0), (0.0, 0.25), (5e-4, 500.0)] {
            let (s, w) = evolved_field(q2, t);
            let e = check_marginals(&w, &s).unwrap();
            assert!(e.within(MARGINAL_TOLERANCE), "q2={q2} t={t}: {e:?}");
        }
    }

    /// Rows next to a wall the packet touches have `1/p^2` tails in `p`.
    #[test]
    fn wall_contact_needs_wider_momentum_range() {
        let (s, w) = evolved_field(5e-4, 0.25);
        assert!(matches!(check_marginals(&w, &s), Err(Error::Contract(_))));
        let g = WignerGrid {
            p_max: 800.0,
            np: 1861,
            ..WignerGrid::for_packet(&s.expansion.packet)
        };
        let wide = wigner_on(&s, &g).unwrap();
        check_marginals(&wide, &s).unwrap();
    }

    #[test]
    fn parity_of_symmetric_packet_at_rest() {
        let s = state(PacketSpec::new(0.5, 0.1, 0.0).unwrap(), 0.0, 0.0);
        let w = wigner(&s, 128, 128).unwrap();
        let (nx, np) = (w.field.rows(), w.field.cols());
        for i in 0..nx {
            for j in 0..np {
                let v = w.field.get(i, j);
                assert!((v - w.field.get(nx - 1 - i, j)).abs() < 1e-8);
                assert!((v - w.field.get(i, np - 1 - j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn refinement_is_stable() {
        let s = state(PacketSpec::default(), 0.0, 0.25);
        let g = WignerGrid::for_packet(&s.expansion.packet);
        let coarse = wigner_on(&s, &WignerGrid { nx: 128, ..g }).unwrap();
        let fine = wigner_on(&s, &g).unwrap();
        let (a, b) = (purity_integral(&coarse), purity_integral(&fine));
        assert!((a - b).abs() / b < 1e-3, "{a} vs {b}");
        // a pure state has 2 pi int int W^2 = 1
        assert!((2.0 * PI * b - 1.0).abs() < 1e-3);
    }

    #[test]
    fn overlap_properties() {
        let (_, w0) = evolved_field(0.0, 0.0);
        let (_, w1) = evolved_field(0.0, 1.0);
        assert_eq!(wigner_overlap(&w0, &w0).unwrap(), 1.0);
        assert!((wigner_overlap(&w0, &w1).unwrap() - 1.0).abs() < 1e-6);
        let (_, cat) = evolved_field(0.0, 0.25);
        let (_, rel) = evolved_field(5e-4, 0.25);
        let o = wigner_overlap(&cat, &rel).unwrap();
        assert!(o < 0.5, "{o}");
        assert_eq!(o, wigner_overlap(&rel, &cat).unwrap());
        let s = state(PacketSpec::default(), 0.0, 0.0);
        let small = wigner(&s, 64, 64).unwrap();
        assert!(matches!(wigner_overlap(&w0, &small), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn negativity() {
        let (_, g) = evolved_field(0.0, 0.0);
        assert!(negativity_volume(&g).abs() < 1e-3);
        let (_, cat) = evolved_field(0.0, 0.25);
        assert!(negativity_volume(&cat) > 0.1);
        assert!(cat.min_value < 0.0);
        let (_, rel) = evolved_field(1e-5, 37.3);
        assert!(negativity_volume(&rel) >= -1e-3);
    }

    /// The cat has lobes at the same position and momenta `+-p_0`; they
    /// interfere along `x` with period `2 pi / (2 p_0)`.
    #[test]
    fn cat_fringe_period_matches_lobe_separation() {
        let s = state(PacketSpec::default(), 0.0, 0.25);
        let ps = symmetric_linspace(110.0, 2048);
        let rho: Vec<f64> = momentum_amplitude(&s, &ps)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let dp = ps[1] - ps[0];
        let peak = |range: std::ops::Range<usize>| {
            let k = range.max_by(|&a, &b| rho[a].total_cmp(&rho[b])).unwrap();
            ps[k] + parabolic_vertex(rho[k - 1], rho[k], rho[k + 1]).0 * dp
        };
        let separation = peak(1024..2047) - peak(1..1024);
        assert!((separation - 100.0).abs() < 4.0, "{separation}");
        let period = fringe_period_along_x(&s, 0.0, 0.5, 0.1, 2048).unwrap().unwrap();
        let predicted = 2.0 * PI / separation;
        assert!((period / predicted - 1.0).abs() < 0.1, "{period} vs {predicted}");
    }

    /// At `t_sr4 / 4` with `1 / (4 q^2)` an integer, the odd levels pick up
    /// the phase of `t = 3/4` rather than `t = 1/4`: the state is the
    /// quarter-revival cat with its fringes reversed.
    #[test]
    fn quarter_super_revival_is_three_quarter_cat() {
        let (_, w) = evolved_field(5e-4, 500.0);
        let (_, three) = evolved_field(0.0, 0.75);
        let (_, one) = evolved_field(0.0, 0.25);
        assert!(wigner_overlap(&w, &three).unwrap() > 0.999);
        assert!(wigner_overlap(&w, &one).unwrap().abs() < 0.05);
        assert!(wigner_overlap(&one, &three).unwrap().abs() < 0.05);
    }
}
