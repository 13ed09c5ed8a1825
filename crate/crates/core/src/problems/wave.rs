//! Acoustic system with `c = 1`, a Gaussian pulse and zero initial velocity.

use super::wrap_unit;

const C: f64 = 1.0;

pub fn wave_u0(x: f64) -> f64 {
    let s = 2.0 * wrap_unit(x) - 1.0;
    (-20.0 * s * s).exp()
}

/// d'Alembert solution `(u, v)` with `v0 = 0`.
pub fn wave_reference(t: f64, x: f64) -> (f64, f64) {
    let right = wave_u0(wrap_unit(x - C * t));
    let left = wave_u0(wrap_unit(x + C * t));
    (0.5 * (right + left), 0.5 * (right - left))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::gauss_legendre_nodes;
    use crate::quadrature::gauss_legendre_rule;

    #[test]
    fn examples() {
        for &x in &[0.0, 0.2, 0.5, 0.81] {
            assert_eq!(wave_reference(0.0, x), (wave_u0(x), 0.0));
            let (u, v) = wave_reference(1.0, x);
            assert!((u - wave_u0(x)).abs() < 1e-14 && v.abs() < 1e-14);
            let (u, _) = wave_reference(0.3, x);
            let expected = 0.5 * (wave_u0(wrap_unit(x - 0.3)) + wave_u0(wrap_unit(x + 0.3)));
            assert_eq!(u, expected);
        }
        assert!((wave_u0(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_is_constant() {
        // 20 panels of 40-point Gauss-Legendre resolve the pulse to roundoff.
        let rule = gauss_legendre_rule(40).unwrap();
        let xi = gauss_legendre_nodes(40).unwrap();
        let energy = |t: f64| -> f64 {
            let mut total = 0.0;
            for p in 0..20 {
                let a = p as f64 / 20.0;
                for (w, z) in rule.weights().iter().zip(xi.points()) {
                    let (u, v) = wave_reference(t, a + (z + 1.0) / 40.0);
                    total += w / 40.0 * (u * u + v * v);
                }
            }
            total
        };
        let e0 = energy(0.0);
        for &t in &[0.13, 0.5, 2.7, 10.0] {
            assert!((energy(t) - e0).abs() < 1e-10, "t={t}");
        }
    }
}
