//! Energy spectrum of the box with the quartic relativistic correction, its
//! eigenfunctions, and the time scales that follow from a Taylor expansion of
//! the spectrum around the mean quantum number.
//!
//! Units: hbar = m = L = 1. Energies are in hbar^2/(m L^2); every time is
//! expressed in units of the non-relativistic revival time `T_rev = 4/pi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::numeric::sin_n_pi_x;

/// `2 pi hbar / T_rev` in natural units.
pub const SPECTRAL_SCALE: f64 = PI * PI / 2.0;

/// Revival time `4 m L^2 / (pi hbar)` in natural units.
pub const T_REV: f64 = 4.0 / PI;

/// Largest basis size for which `n^4` stays exact in `f64`.
pub const N_MAX_LIMIT: u32 = 9000;

/// Fraction of the spectrum turnover beyond which a basis triggers a validity warning.
pub const TURNOVER_WARNING_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Relativistic parameter q^2, with q = lambda_c / (4 L).
    pub q_squared: f64,
    /// Allowed deficit of the captured norm, in (0, 1).
    pub truncation_epsilon: f64,
    /// Hard cap on the largest quantum number of an expansion.
    pub n_max_cap: u32,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            q_squared: 0.0,
            truncation_epsilon: 1e-6,
            n_max_cap: 512,
        }
    }
}

impl SystemConfig {
    pub fn new(q_squared: f64) -> Result<Self> {
        let cfg = SystemConfig {
            q_squared,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, eps: f64) -> Result<Self> {
        self.truncation_epsilon = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_squared.is_finite() && self.q_squared >= 0.0) {
            return Err(precondition(format!(
                "q_squared >= 0 required (got {})",
                self.q_squared
            )));
        }
        if !(self.truncation_epsilon > 0.0 && self.truncation_epsilon < 1.0) {
            return Err(precondition(format!(
                "truncation_epsilon in (0, 1) required (got {})",
                self.truncation_epsilon
            )));
        }
        if self.n_max_cap == 0 || self.n_max_cap > N_MAX_LIMIT {
            return Err(precondition(format!(
                "n_max_cap in [1, {N_MAX_LIMIT}] required (got {})",
                self.n_max_cap
            )));
        }
        Ok(())
    }

    pub fn is_relativistic(&self) -> bool {
        self.q_squared > 0.0
    }
}

/// Derived periods, all in units of `T_rev`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeScales {
    pub n_bar: u32,
    pub t_cl: f64,
    pub t_cl_bar: f64,
    pub t_rev: f64,
    pub t_rev_bar: f64,
    /// Cubic super-revival time; absent without relativistic correction.
    pub t_sr3: Option<f64>,
    /// Quartic super-revival time `T_rev / q^2`.
    pub t_sr4: Option<f64>,
}

/// `E_n = (n^2 - q^2 n^4) pi^2 / 2`.
pub fn energy_level(n: i64, cfg: &SystemConfig) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidQuantumNumber(n));
    }
    Ok(reduced_energy(n as u32, cfg.q_squared) * SPECTRAL_SCALE)
}

/// `n^2 - q^2 n^4`: the energy in units of `2 pi hbar / T_rev`.
#[inline]
pub fn reduced_energy(n: u32, q_squared: f64) -> f64 {
    let n2 = (n as f64) * (n as f64);
    n2 - q_squared * n2 * n2
}

/// Normalized box eigenfunction `sqrt(2) sin(n pi x)`.
pub fn eigenfunction(n: i64, x: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidQuantumNumber(n));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(precondition(format!("eigenfunction needs 0 <= x <= 1 (got {x})")));
    }
    Ok(std::f64::consts::SQRT_2 * sin_n_pi_x(n as u32, x))
}

/// Quantum number `1 / sqrt(2 q^2)` where the corrected spectrum stops
/// increasing; `None` for the purely quadratic spectrum.
pub fn spectrum_turnover(cfg: &SystemConfig) -> Option<f64> {
    cfg.is_relativistic()
        .then(|| 1.0 / (2.0 * cfg.q_squared).sqrt())
}

/// Warning text when a basis reaching `n_max` extends past
/// `TURNOVER_WARNING_FRACTION` of the spectrum turnover.
pub fn validity_warning(n_max: u32, cfg: &SystemConfig) -> Option<String> {
    let turnover = spectrum_turnover(cfg)?;
    let limit = TURNOVER_WARNING_FRACTION * turnover;
    ((n_max as f64) > limit).then(|| {
        format!(
            "basis reaches n = {n_max}, beyond {TURNOVER_WARNING_FRACTION} x turnover n* = {turnover:.2}; \
             the perturbative spectrum is near its validity edge"
        )
    })
}

/// Mean quantum number `round(|p_bar| / pi)`, at least 1.
pub fn mean_quantum_number(p_bar: f64) -> u32 {
    ((p_bar.abs() / PI).round() as u32).max(1)
}

pub fn time_scales(n_bar: u32, cfg: &SystemConfig) -> Result<TimeScales> {
    if n_bar < 1 {
        return Err(Error::InvalidQuantumNumber(n_bar as i64));
    }
    cfg.validate()?;
    let q2 = cfg.q_squared;
    let nb = n_bar as f64;
    let stiffness = 6.0 * q2 * nb * nb;
    if stiffness >= 1.0 {
        return Err(Error::BeyondPerturbative {
            q_squared: q2,
            n_bar,
            value: stiffness,
        });
    }
    let (t_sr3, t_sr4) = if cfg.is_relativistic() {
        (Some(1.0 / (4.0 * nb * q2)), Some(1.0 / q2))
    } else {
        (None, None)
    };
    Ok(TimeScales {
        n_bar,
        t_cl: 1.0 / (2.0 * nb),
        t_cl_bar: 1.0 / (2.0 * nb - 4.0 * q2 * nb * nb * nb),
        t_rev: 1.0,
        t_rev_bar: 1.0 / (1.0 - stiffness),
        t_sr3,
        t_sr4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(q2: f64) -> SystemConfig {
        SystemConfig::new(q2).unwrap()
    }

    // Independent route: the dispersion relation k^2/2 - (k^2/2)^2 / (2 c^2)
    // with k = n pi and c fixed by q = (2 pi hbar / m c) / (4 L).
    fn dispersion(n: u32, q2: f64) -> f64 {
        let k = n as f64 * PI;
        let kinetic = 0.5 * k * k;
        if q2 == 0.0 {
            return kinetic;
        }
        let c = PI / (2.0 * q2.sqrt());
        kinetic - kinetic * kinetic / (2.0 * c * c)
    }

    #[test]
    fn ground_state_and_quadratic_levels() {
        let e1 = energy_level(1, &cfg(0.0)).unwrap();
        assert!((e1 - 4.934802200544679).abs() < 1e-14);
        let e16 = energy_level(16, &cfg(0.0)).unwrap();
        assert!((e16 - 1263.309363339438).abs() < 1e-10);
    }

    #[test]
    fn relativistic_level_sixteen() {
        let e = energy_level(16, &cfg(5e-4)).unwrap();
        let expected = (256.0 - 32.768) * PI * PI / 2.0;
        assert!((e - expected).abs() / expected < 1e-14);
        assert!((e - 1101.61).abs() < 0.01);
    }

    #[test]
    fn nonpositive_quantum_numbers_rejected() {
        assert!(matches!(energy_level(0, &cfg(0.0)), Err(Error::InvalidQuantumNumber(0))));
        assert!(matches!(energy_level(-3, &cfg(0.0)), Err(Error::InvalidQuantumNumber(-3))));
        assert!(eigenfunction(0, 0.3).is_err());
    }

    #[test]
    fn dispersion_relation_identity() {
        for &q2 in &[0.0, 1e-6, 1e-5, 5e-4] {
            for n in 1..=64u32 {
                let e = energy_level(n as i64, &cfg(q2)).unwrap();
                let d = dispersion(n, q2);
                assert!((e - d).abs() <= 1e-12 * d.abs(), "n={n} q2={q2}: {e} vs {d}");
            }
        }
    }

    #[test]
    fn eigenfunction_values() {
        assert!((eigenfunction(1, 0.5).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(eigenfunction(2, 0.5).unwrap(), 0.0);
        for n in 1..40 {
            assert_eq!(eigenfunction(n, 0.0).unwrap(), 0.0);
            assert_eq!(eigenfunction(n, 1.0).unwrap(), 0.0);
        }
        assert!(eigenfunction(1, -0.01).is_err());
        assert!(eigenfunction(1, 1.01).is_err());
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let m = 4096;
        let h = 1.0 / m as f64;
        for a in 1..6 {
            for b in 1..6 {
                let s: f64 = (0..=m)
                    .map(|j| {
                        let x = j as f64 * h;
                        eigenfunction(a, x).unwrap() * eigenfunction(b, x).unwrap()
                    })
                    .sum::<f64>()
                    * h;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn turnover_values() {
        let n = spectrum_turnover(&cfg(5e-4)).unwrap();
        assert!((n - 31.622776601683793).abs() < 1e-12);
        let n = spectrum_turnover(&cfg(1e-5)).unwrap();
        assert!((n - 223.60679774997897).abs() < 1e-9);
        assert!(spectrum_turnover(&cfg(0.0)).is_none());
        // dE/dn vanishes at the turnover
        let q2 = 5e-4;
        let n = spectrum_turnover(&cfg(q2)).unwrap();
        assert!((2.0 * n - 4.0 * q2 * n.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn validity_warning_threshold() {
        // n* = 31.62, 0.7 n* = 22.14
        assert!(validity_warning(22, &cfg(5e-4)).is_none());
        assert!(validity_warning(23, &cfg(5e-4)).is_some());
        assert!(validity_warning(10_000, &cfg(0.0)).is_none());
    }

    #[test]
    fn time_scale_examples() {
        let ts = time_scales(16, &cfg(1e-5)).unwrap();
        assert!((ts.t_sr4.unwrap() - 1e5).abs() < 1e-7);
        assert!((ts.t_rev_bar - 1.0 / (1.0 - 0.01536)).abs() < 1e-14);
        assert!((ts.t_rev_bar - 1.01560).abs() < 1e-5);

        let ts = time_scales(16, &cfg(5e-4)).unwrap();
        assert!((ts.t_sr3.unwrap() - 31.25).abs() < 1e-10);
        assert!((ts.t_sr4.unwrap() - 2000.0).abs() < 1e-9);

        let ts = time_scales(16, &cfg(0.0)).unwrap();
        assert_eq!(ts.t_rev, 1.0);
        assert_eq!(ts.t_cl, 1.0 / 32.0);
        assert_eq!(ts.t_cl_bar, ts.t_cl);
        assert!(ts.t_sr3.is_none() && ts.t_sr4.is_none());
    }

    #[test]
    fn perturbative_regime_enforced() {
        // 6 q^2 nbar^2 = 1.2
        let err = time_scales(20, &cfg(5e-4)).unwrap_err();
        assert!(matches!(err, Error::BeyondPerturbative { .. }));
        assert!(time_scales(0, &cfg(0.0)).is_err());
    }

    #[test]
    fn time_scale_identities() {
        for &q2 in &[1e-6, 1e-5, 1e-4, 5e-4] {
            for nb in [1u32, 4, 8, 16] {
                let Ok(ts) = time_scales(nb, &cfg(q2)) else { continue };
                let (t3, t4) = (ts.t_sr3.unwrap(), ts.t_sr4.unwrap());
                assert!((t4 * q2 - 1.0).abs() < 1e-12);
                assert!((t4 / (4.0 * nb as f64 * t3) - 1.0).abs() < 1e-12);
                let nb2 = (nb * nb) as f64;
                assert!((ts.t_cl_bar * (1.0 - 2.0 * q2 * nb2) / ts.t_cl - 1.0).abs() < 1e-12);
                if 2.0 * q2 * nb2 < 1.0 {
                    assert!(ts.t_cl_bar > ts.t_cl);
                    assert!(ts.t_rev_bar > ts.t_rev);
                }
            }
        }
    }

    /// Five-point stencils are exact on quartic polynomials, so the
    /// derivatives of the spectrum at nbar are recovered from level values.
    #[test]
    fn taylor_coefficients_match_time_scales() {
        for &q2 in &[1e-4, 5e-4] {
            for nb in [8u32, 16] {
                let c = cfg(q2);
                let e = |k: u32| energy_level(k as i64, &c).unwrap();
                let (m2, m1, z, p1, p2) = (e(nb - 2), e(nb - 1), e(nb), e(nb + 1), e(nb + 2));
                let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / 12.0;
                let d2 = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / 12.0;
                let d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / 2.0;
                let d4 = p2 - 4.0 * p1 + 6.0 * z - 4.0 * m1 + m2;

                let ts = time_scales(nb, &c).unwrap();
                let rel = |a: f64, b: f64| ((a - b) / b).abs();
                assert!(rel(d1.abs(), SPECTRAL_SCALE / ts.t_cl_bar) < 1e-10);
                assert!(rel(0.5 * d2.abs(), SPECTRAL_SCALE / ts.t_rev_bar) < 1e-10);
                assert!(rel(d3.abs() / 6.0, SPECTRAL_SCALE / ts.t_sr3.unwrap()) < 1e-10);
                assert!(rel(d4.abs() / 24.0, SPECTRAL_SCALE / ts.t_sr4.unwrap()) < 1e-10);
            }
        }
    }

    #[test]
    fn mean_quantum_number_from_momentum() {
        assert_eq!(mean_quantum_number(50.0), 16);
        assert_eq!(mean_quantum_number(-50.0), 16);
        assert_eq!(mean_quantum_number(0.0), 1);
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(-1e-6).is_err());
        assert!(SystemConfig::new(f64::NAN).is_err());
        assert!(SystemConfig::new(0.0).unwrap().with_epsilon(0.0).is_err());
        assert!(SystemConfig::new(0.0).unwrap().with_epsilon(1.0).is_err());
        let mut c = SystemConfig::default();
        c.n_max_cap = 0;
        assert!(c.validate().is_err());
    }
}
