//! Exact entropy solution of Burgers' equation for
//! `u0(x) = 1 + sin(2 pi x) / (4 pi)` on the periodic unit interval.
//!
//! Along characteristics `x = xi + t u0(xi)`. Before the breaking time the map
//! `xi -> x` is monotone and the solution is `u0` at the unique foot. After it
//! the map folds; the shock joins two feet `xi_l < xi_r` that land on the same
//! `x_s` and enclose equal areas (Whitham's construction), and every point
//! away from the shock takes its value from the monotone branch between
//! `xi_r - 1` and `xi_l`.

use std::f64::consts::PI;

use super::wrap_unit;
use crate::error::{Error, Result};

/// `t_b = -1 / min u0' = 2`
pub const BURGERS_BREAKING_TIME: f64 = 2.0;
const DEFAULT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

pub fn burgers_u0(x: f64) -> f64 {
    1.0 + (2.0 * PI * wrap_unit(x)).sin() / (4.0 * PI)
}

fn u0_with_derivative(x: f64) -> (f64, f64) {
    let (s, c) = (2.0 * PI * wrap_unit(x)).sin_cos();
    (1.0 + s / (4.0 * PI), 0.5 * c)
}

/// Antiderivative of `u0`, without wrapping so that differences over more
/// than one period stay correct.
fn u0_antiderivative(x: f64) -> f64 {
    x - (2.0 * PI * x).cos() / (8.0 * PI * PI)
}

const U0_MIN: f64 = 1.0 - 1.0 / (4.0 * PI);
const U0_MAX: f64 = 1.0 + 1.0 / (4.0 * PI);

/// Reference-solution evaluator with a residual tolerance on the implicit
/// equation `u = u0(x - t u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersReference {
    pub tol: f64,
}

impl Default for BurgersReference {
    fn default() -> Self {
        BurgersReference { tol: DEFAULT_TOL }
    }
}

/// Shock data at one time, in unwrapped coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shock {
    pub position: f64,
    pub foot_left: f64,
    pub foot_right: f64,
}

impl Shock {
    pub fn u_left(&self) -> f64 {
        burgers_u0(self.foot_left)
    }

    pub fn u_right(&self) -> f64 {
        burgers_u0(self.foot_right)
    }
}

/// The solution at a fixed time, ready for many point evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersSnapshot {
    t: f64,
    tol: f64,
    shock: Option<Shock>,
}

impl BurgersReference {
    pub fn snapshot(&self, t: f64) -> Result<BurgersSnapshot> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("time must be finite and >= 0, got {t}")));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let shock = if t > BURGERS_BREAKING_TIME {
            Some(locate_shock(t)?)
        } else {
            None
        };
        Ok(BurgersSnapshot { t, tol: self.tol, shock })
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        self.snapshot(t)?.eval(x)
    }
}

/// `u(t, x)` with the default tolerance `1e-12`.
pub fn burgers_reference(t: f64, x: f64) -> Result<f64> {
    BurgersReference::default().eval(t, x)
}

impl BurgersSnapshot {
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn shock(&self) -> Option<Shock> {
        self.shock
    }

    /// Shock position wrapped into `[0, 1)`.
    pub fn shock_position(&self) -> Option<f64> {
        self.shock.map(|s| wrap_unit(s.position))
    }

    /// At the shock itself the right state is returned.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = self.t;
        if t == 0.0 {
            return Ok(burgers_u0(x));
        }
        let (x, lo, hi) = match self.shock {
            None => (x, x - t * U0_MAX, x - t * U0_MIN),
            Some(s) => {
                // Shift x into [x_s - 1, x_s), covered by the branch
                // [xi_r - 1, xi_l].
                let shifted = s.position - 1.0 + wrap_unit(x - s.position);
                (shifted, s.foot_right - 1.0, s.foot_left)
            }
        };
        let foot = monotone_root(|xi| characteristic(t, xi, x), lo, hi)?;
        let u = burgers_u0(foot);
        let residual = u - burgers_u0(x - t * u);
        if residual.abs() > self.tol {
            return Err(Error::ReferenceSolution(format!(
                "implicit residual {residual:e} at t = {t}, x = {x}"
            )));
        }
        Ok(u)
    }
}

/// `xi + t u0(xi) - x` and its derivative in `xi`.
fn characteristic(t: f64, xi: f64, x: f64) -> (f64, f64) {
    let (u, du) = u0_with_derivative(xi);
    (xi + t * u - x, 1.0 + t * du)
}

/// Equal-area shock for `t > t_b`, by bisection on the shock position.
fn locate_shock(t: f64) -> Result<Shock> {
    // Fold points: 1 + t u0'(xi) = 0, i.e. cos(2 pi xi) = -2 / t.
    let xi_max = (-2.0 / t).acos() / (2.0 * PI);
    let xi_min = 1.0 - xi_max;
    let x_of = |xi: f64| xi + t * burgers_u0(xi);
    let feet = |xs: f64| -> Result<(f64, f64)> {
        let left = monotone_root(|xi| characteristic(t, xi, xs), xi_min - 1.0, xi_max)?;
        let right = monotone_root(|xi| characteristic(t, xi, xs), xi_min, xi_max + 1.0)?;
        Ok((left, right))
    };
    // Mass under the curve between the feet minus the trapezoid under the
    // chord; zero for the entropy shock.
    let area = |xs: f64| -> Result<f64> {
        let (l, r) = feet(xs)?;
        Ok(u0_antiderivative(r) - u0_antiderivative(l)
            - 0.5 * (burgers_u0(l) + burgers_u0(r)) * (r - l))
    };
    let (mut lo, mut hi) = (x_of(xi_min), x_of(xi_max));
    let (f_lo, f_hi) = (area(lo)?, area(hi)?);
    if f_lo == 0.0 || f_hi == 0.0 {
        let xs = if f_lo == 0.0 { lo } else { hi };
        let (l, r) = feet(xs)?;
        return Ok(Shock { position: xs, foot_left: l, foot_right: r });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::ReferenceSolution(format!(
            "equal-area condition not bracketed at t = {t}"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 || mid == lo || mid == hi {
            break;
        }
        let f_mid = area(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let position = 0.5 * (lo + hi);
    let (foot_left, foot_right) = feet(position)?;
    Ok(Shock { position, foot_left, foot_right })
}

/// Root of a nondecreasing function with `h(lo) <= 0 <= h(hi)`, by Newton
/// steps safeguarded with bisection.
fn monotone_root(h: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> Result<f64> {
    let (h_lo, _) = h(lo);
    let (h_hi, _) = h(hi);
    let slack = 1e-13;
    if h_lo > slack || h_hi < -slack {
        return Err(Error::ReferenceSolution(format!(
            "root not bracketed on [{lo}, {hi}]: h = ({h_lo:e}, {h_hi:e})"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (val, der) = h(x);
        if val == 0.0 {
            return Ok(x);
        }
        if val < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - val / der;
        let next = if der > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let scale = 1.0f64.max(next.abs());
        if (next - x).abs() <= 2.0 * f64::EPSILON * scale || hi - lo <= 2.0 * f64::EPSILON * scale {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::ReferenceSolution(format!(
        "root iteration did not converge on [{lo}, {hi}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::gauss_legendre_nodes;
    use crate::quadrature::gauss_legendre_rule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_time_is_u0() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert_eq!(burgers_reference(0.0, x).unwrap(), burgers_u0(x));
        }
    }

    #[test]
    fn breaking_time_from_u0_slope() {
        let min_slope = (0..10_000)
            .map(|i| u0_with_derivative(i as f64 / 10_000.0).1)
            .fold(f64::INFINITY, f64::min);
        assert!((min_slope + 0.5).abs() < 1e-12);
        assert_eq!(-1.0 / min_slope, BURGERS_BREAKING_TIME);
    }

    #[test]
    fn implicit_equation_holds_before_breaking() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let t = rng.gen_range(0.0..2.0);
            let x = rng.gen_range(0.0..1.0);
            let u = burgers_reference(t, x).unwrap();
            assert!((u - burgers_u0(x - t * u)).abs() <= 1e-11);
        }
    }

    #[test]
    fn shock_moves_with_unit_speed() {
        // u0 - 1 is odd about 1/2 and the mean speed is 1, so the shock born
        // at x = 1/2 travels with speed 1.
        for &t in &[2.01, 2.5, 3.0, 3.5] {
            let s = BurgersReference::default().snapshot(t).unwrap();
            let x_s = s.shock_position().unwrap();
            let offset = wrap_unit(x_s - 0.5 - t + 0.5) - 0.5;
            assert!(offset.abs() < 1e-12, "t={t}: {x_s}");
            let shock = s.shock().unwrap();
            assert!(shock.u_left() > shock.u_right());
            assert!((0.5 * (shock.u_left() + shock.u_right()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_is_conserved() {
        let rule = gauss_legendre_rule(30).unwrap();
        let xi = gauss_legendre_nodes(30).unwrap();
        for &t in &[1.0, 3.0] {
            let snap = BurgersReference::default().snapshot(t).unwrap();
            // Split the period at the shock so each panel is smooth.
            let start = snap.shock_position().unwrap_or(0.0);
            let panels = 40;
            let mut total = 0.0;
            for p in 0..panels {
                let a = start + p as f64 / panels as f64;
                let h = 1.0 / panels as f64;
                for (w, z) in rule.weights().iter().zip(xi.points()) {
                    let x = a + 0.5 * h * (z + 1.0);
                    total += 0.5 * h * w * snap.eval(x).unwrap();
                }
            }
            assert!((total - 1.0).abs() < 1e-10, "t={t}: {total}");
        }
    }

    #[test]
    fn bounded_by_initial_extrema() {
        let reference = BurgersReference::default();
        for &t in &[0.5, 1.9, 2.0, 2.2, 3.5] {
            let snap = reference.snapshot(t).unwrap();
            for i in 0..200 {
                let u = snap.eval(i as f64 / 200.0).unwrap();
                assert!(u >= U0_MIN - 1e-14 && u <= U0_MAX + 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_times() {
        assert!(burgers_reference(-1.0, 0.3).is_err());
        assert!(burgers_reference(f64::NAN, 0.3).is_err());
    }
}
