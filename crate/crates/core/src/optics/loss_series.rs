//! Power series of products of cavity reflection moduli near resonance in
//! `x = eps/T` and the reflection phases `gamma`.
//!
//! With `T << 1`, `|f(gamma = 0)| = (1 - x)/(1 + x)` so that
//! `|f|^n = exp(-2n (x + x^3/3 + ...))`; the cubic coefficient is
//! `(4n^3 + 2n)/3`. The leading phase term is `(x/2) gamma^2` per factor.

/// Coefficients `[c0, c1, c2, c3]` of `((1 - x)/(1 + x))^n` up to cubic order.
pub fn modulus_power_coefficients(n: u32) -> [f64; 4] {
    let n = n as f64;
    [1.0, -2.0 * n, 2.0 * n * n, -(4.0 * n.powi(3) + 2.0 * n) / 3.0]
}

/// `|f_a|^p |f_c|^q` to third order in `x` and second order in the phases.
pub fn reflection_product_series(p: u32, q: u32, x: f64, gamma_a: f64, gamma_c: f64) -> f64 {
    let c = modulus_power_coefficients(p + q);
    let poly = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
    poly + 0.5 * x * (p as f64 * gamma_a * gamma_a + q as f64 * gamma_c * gamma_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::cavity::cavity_reflection;

    #[test]
    fn coefficients_of_low_powers() {
        assert_eq!(modulus_power_coefficients(1), [1.0, -2.0, 2.0, -2.0]);
        assert_eq!(modulus_power_coefficients(2), [1.0, -4.0, 8.0, -12.0]);
        assert_eq!(modulus_power_coefficients(3), [1.0, -6.0, 18.0, -38.0]);
        assert_eq!(modulus_power_coefficients(4), [1.0, -8.0, 32.0, -88.0]);
    }

    #[test]
    fn quartic_residual_on_resonance() {
        let t = 1e-7;
        for x in [0.002, 0.01, 0.02, 0.05] {
            let m = cavity_reflection(0.0, t, x * t).norm();
            for (p, q) in [(1, 0), (2, 0), (1, 1), (2, 1), (1, 2), (2, 2)] {
                let exact = m.powi(p as i32 + q as i32);
                let s = reflection_product_series(p, q, x, 0.0, 0.0);
                assert!((exact - s).abs() < 200.0 * x.powi(4), "p={p} q={q} x={x}");
            }
        }
    }
}
