//! Small numerical kernels shared by the physics modules: exact argument
//! reduction for trigonometric phases, uniform grids and trapezoid sums.

use num_complex::Complex64;

/// Error-free product: `a * b == p + e` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Fractional part of the exact product `a * b`, in `[0, 1)`.
///
/// The rounding error of the product is recovered with a fused multiply-add
/// so the result stays accurate even when `a * b` is of order 1e12.
#[inline]
pub fn frac_of_product(a: f64, b: f64) -> f64 {
    let (p, e) = two_prod(a, b);
    ((p - p.floor()) + e).rem_euclid(1.0)
}

/// `(sin(pi r), cos(pi r))`, exact at every multiple of one half.
pub fn sincospi(r: f64) -> (f64, f64) {
    let r = r - 2.0 * (0.5 * r).floor();
    let k = (2.0 * r).round();
    let f = r - 0.5 * k;
    let (s, c) = (std::f64::consts::PI * f).sin_cos();
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// `sin(n pi x)` with `n x` reduced modulo 2 before evaluation.
#[inline]
pub fn sin_n_pi_x(n: u32, x: f64) -> f64 {
    sincospi(2.0 * frac_of_product(n as f64, 0.5 * x)).0
}

/// `exp(-2 pi i c)` for a phase given in cycles.
#[inline]
pub fn cycles_to_phasor(c: f64) -> Complex64 {
    let (s, co) = sincospi(2.0 * c);
    Complex64::new(co, -s)
}

/// Number of cycles, modulo 1, accumulated by level `n` after time `t`
/// (in revival-time units): `(n^2 - q2 n^4) t mod 1`.
///
/// Both terms are reduced separately in double-double arithmetic, so the
/// phase stays accurate at times of order 1e5 revival periods.
pub fn phase_cycles(n: u32, t: f64, q_squared: f64) -> f64 {
    let n2 = (n as f64) * (n as f64);
    let quad = frac_of_product(n2, t);
    if q_squared == 0.0 {
        return quad;
    }
    let n4 = n2 * n2;
    let (hi, lo) = two_prod(q_squared, t);
    let quart = frac_of_product(n4, hi) + n4 * lo;
    (quad - quart).rem_euclid(1.0)
}

/// `n` uniformly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = (n - 1) as f64;
            (0..n).map(|i| a + (b - a) * (i as f64 / last)).collect()
        }
    }
}

/// `n` points spanning `[-half, half]`, exactly antisymmetric under reversal.
pub fn symmetric_linspace(half: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| half * (((2 * i) as f64 - last) / last))
        .collect()
}

/// Trapezoid rule on a uniform grid of spacing `h`.
pub fn trapezoid(ys: &[f64], h: f64) -> f64 {
    match ys.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = ys[1..n - 1].iter().sum();
            h * (inner + 0.5 * (ys[0] + ys[n - 1]))
        }
    }
}

/// Trapezoid weights for a uniform grid of `n` points and spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n >= 2 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    } else if n == 1 {
        w[0] = 0.0;
    }
    w
}

/// Spacing of a grid, if it is uniform.
pub fn uniform_step(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let tol = 1e-9 * h.abs().max(f64::MIN_POSITIVE);
    xs.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= tol)
        .then_some(h)
}

/// Mean and standard deviation of a nonnegative density sampled on a uniform grid.
pub fn density_moments(xs: &[f64], rho: &[f64], h: f64) -> (f64, f64, f64) {
    let norm = trapezoid(rho, h);
    let mean = trapezoid(
        &xs.iter().zip(rho).map(|(x, r)| x * r).collect::<Vec<_>>(),
        h,
    ) / norm;
    let var = trapezoid(
        &xs.iter()
            .zip(rho)
            .map(|(x, r)| (x - mean) * (x - mean) * r)
            .collect::<Vec<_>>(),
        h,
    ) / norm;
    (norm, mean, var.max(0.0).sqrt())
}

/// Vertex of the parabola through three equally spaced samples, as an offset
/// in units of the spacing relative to the middle sample, with the peak value.
pub fn parabolic_vertex(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < f64::EPSILON * mid.abs().max(1.0) {
        return (0.0, mid);
    }
    let offset = 0.5 * (left - right) / denom;
    let offset = offset.clamp(-0.5, 0.5);
    let value = mid - 0.25 * (left - right) * offset;
    (offset, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn sincospi_is_exact_at_half_integers() {
        assert_eq!(sincospi(0.0), (0.0, 1.0));
        assert_eq!(sincospi(0.5), (1.0, 0.0));
        assert_eq!(sincospi(1.0).0, 0.0);
        assert_eq!(sincospi(1.0).1, -1.0);
        assert_eq!(sincospi(1.5), (-1.0, 0.0));
        assert_eq!(sincospi(-0.5), (-1.0, 0.0));
        assert_eq!(sincospi(2048.0).0, 0.0);
    }

    #[test]
    fn sin_n_pi_x_vanishes_at_nodes() {
        for n in 1..200 {
            assert_eq!(sin_n_pi_x(n, 0.0), 0.0);
            assert_eq!(sin_n_pi_x(n, 1.0), 0.0);
            if n % 2 == 0 {
                assert_eq!(sin_n_pi_x(n, 0.5), 0.0);
            }
        }
    }

    #[test]
    fn phase_cycles_integer_revivals() {
        for n in 1..64 {
            assert_eq!(phase_cycles(n, 1.0, 0.0), 0.0);
            assert_eq!(phase_cycles(n, 0.0, 5e-4), 0.0);
            let c = phase_cycles(n, 2000.0, 5e-4);
            let dist = c.min(1.0 - c);
            assert!(dist < 1e-9, "n = {n}: {c}");
        }
    }

    #[test]
    fn phase_cycles_matches_wide_arithmetic() {
        // n^2 t with t a dyadic rational is exact in i128 arithmetic.
        let t = 12345.0 + 3.0 / 1024.0;
        for n in [1u32, 7, 16, 31, 64, 500] {
            let num = (n as i128).pow(2) * (12345 * 1024 + 3);
            let expected = (num % 1024) as f64 / 1024.0;
            assert_eq!(phase_cycles(n, t, 0.0), expected);
        }
    }

    #[test]
    fn parabola_recovers_exact_vertex() {
        // y = 3 - 2 (x - 0.3)^2 sampled at -1, 0, 1
        let f = |x: f64| 3.0 - 2.0 * (x - 0.3) * (x - 0.3);
        let (off, val) = parabolic_vertex(f(-1.0), f(0.0), f(1.0));
        assert!((off - 0.3).abs() < 1e-14);
        assert!((val - 3.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_integrates_sine_squared() {
        let xs = linspace(0.0, 1.0, 1025);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (3.0 * PI * x).sin().powi(2)).collect();
        assert!((trapezoid(&ys, 1.0 / 1024.0) - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn sincospi_agrees_with_std(r in -1e3f64..1e3) {
            let (s, c) = sincospi(r);
            let (s0, c0) = (PI * r).sin_cos();
            // std loses ~|r| ulps in the argument reduction
            prop_assert!((s - s0).abs() < 1e-12);
            prop_assert!((c - c0).abs() < 1e-12);
            prop_assert!((s * s + c * c - 1.0).abs() < 1e-15);
        }

        #[test]
        fn frac_of_product_in_unit_interval(a in 0.0f64..1e8, b in 0.0f64..1e5) {
            let f = frac_of_product(a, b);
            prop_assert!((0.0..1.0).contains(&f));
        }

        #[test]
        fn symmetric_linspace_is_antisymmetric(half in 0.1f64..500.0, n in 2usize..2000) {
            let ps = symmetric_linspace(half, n);
            for i in 0..n {
                prop_assert_eq!(ps[i], -ps[n - 1 - i]);
            }
            prop_assert_eq!(ps[0], -half);
        }
    }
}
