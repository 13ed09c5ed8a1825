//! Variable-coefficient advection `u_t + (a u)_x + (b u)_y = 0` on `[0, 1]^2`
//! with `a = x`, `b = 1`, inflow at `x = 0` and periodic `y`.
//!
//! The discretization is the tensor product of the 1D operator: modes are
//! `phi_k(xi) phi_l(eta)` stored at index `k (K + 1) + l`, nodal values at
//! index `n (N + 1) + q`, and each direction is handled line by line.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::wrap_unit;
use crate::error::{Error, Result};
use crate::nodes::{uniform_mesh, Mesh1D, Mesh2D};
use crate::operator::{check_finite, At, DgOperator};
use crate::state::ModalState;

pub fn advection2d_u0(x: f64, y: f64) -> f64 {
    (4.0 * PI * x).sin() * (1.0 - 0.5 * (2.0 * PI * wrap_unit(y)).sin())
}

/// Solution by characteristics, `exp(-t) u0(x exp(-t), y - t)`.
pub fn advection2d_reference(t: f64, x: f64, y: f64) -> f64 {
    let decay = (-t).exp();
    decay * advection2d_u0(x * decay, wrap_unit(y - t))
}

pub fn coefficient_a(x: f64, _y: f64) -> f64 {
    x
}

pub fn coefficient_b(_x: f64, _y: f64) -> f64 {
    1.0
}

/// Treatment of the `x = 0` and `x = 1` faces. `y` is always periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XBoundary {
    Periodic,
    /// Exterior state `value` on both faces; only used where the flow enters.
    Inflow { value: f64 },
}

pub type Coefficient = fn(f64, f64) -> f64;

#[derive(Debug, Clone)]
pub struct Advection2d {
    op: DgOperator,
    mesh: Mesh2D,
    a: Coefficient,
    b: Coefficient,
    x_boundary: XBoundary,
}

/// Nodal data of one element needed for the face fluxes.
struct Traces {
    /// Along `eta`, at `xi = -1` and `xi = 1`.
    west: Vec<f64>,
    east: Vec<f64>,
    /// Along `xi`, at `eta = -1` and `eta = 1`.
    south: Vec<f64>,
    north: Vec<f64>,
}

impl Advection2d {
    /// The benchmark: `a = x`, `b = 1`, zero inflow, `I x I` elements.
    pub fn benchmark(op: DgOperator, n_elements: usize) -> Result<Self> {
        let mesh = Mesh2D::new(uniform_mesh(0.0, 1.0, n_elements)?, uniform_mesh(0.0, 1.0, n_elements)?);
        Ok(Self::new(op, mesh, coefficient_a, coefficient_b, XBoundary::Inflow { value: 0.0 }))
    }

    pub fn new(op: DgOperator, mesh: Mesh2D, a: Coefficient, b: Coefficient, x_boundary: XBoundary) -> Self {
        Advection2d { op, mesh, a, b, x_boundary }
    }

    pub fn operator(&self) -> &DgOperator {
        &self.op
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    fn nx(&self) -> usize {
        self.mesh.x.n_elements()
    }

    fn ny(&self) -> usize {
        self.mesh.y.n_elements()
    }

    /// Element index of cell `(ix, iy)`.
    pub fn element(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn zeros(&self) -> ModalState {
        let m = self.op.n_modes();
        ModalState::zeros(self.nx() * self.ny(), 1, m * m)
    }

    /// Tensor least-squares projection of nodal samples of `f`.
    pub fn project(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> ModalState {
        let mut state = self.zeros();
        let nn = self.op.n_nodes();
        let nx = self.nx();
        state
            .as_mut_slice()
            .par_chunks_mut(self.op.n_modes().pow(2))
            .enumerate()
            .for_each(|(e, out)| {
                let (ix, iy) = (e % nx, e / nx);
                let mut nodal = vec![0.0; nn * nn];
                for (n, &xi) in self.op.nodes().iter().enumerate() {
                    let x = self.mesh.x.map(ix, xi);
                    for (q, &eta) in self.op.nodes().iter().enumerate() {
                        nodal[n * nn + q] = f(x, self.mesh.y.map(iy, eta));
                    }
                }
                tensor_project(&self.op, &nodal, out);
            });
        state
    }

    /// `sum_kl u_kl phi_k(xi) phi_l(eta)` in element `e`.
    pub fn eval(&self, state: &ModalState, e: usize, xi: f64, eta: f64) -> f64 {
        let (px, _) = self.op.basis().eval_all(xi);
        let (py, _) = self.op.basis().eval_all(eta);
        let m = self.op.n_modes();
        let u = state.modes(e, 0);
        let mut sum = 0.0;
        for k in 0..m {
            for l in 0..m {
                sum += u[k * m + l] * px[k] * py[l];
            }
        }
        sum
    }

    /// `max |a| + |b|` over all collocation nodes.
    pub fn max_speed(&self) -> f64 {
        let mut lambda: f64 = 0.0;
        for ix in 0..self.nx() {
            for iy in 0..self.ny() {
                for &xi in self.op.nodes() {
                    for &eta in self.op.nodes() {
                        let (x, y) = (self.mesh.x.map(ix, xi), self.mesh.y.map(iy, eta));
                        lambda = lambda.max((self.a)(x, y).abs() + (self.b)(x, y).abs());
                    }
                }
            }
        }
        lambda
    }

    fn traces(&self, u: &[f64]) -> Traces {
        let m = self.op.n_modes();
        let phi = self.op.basis().nodal_values();
        let (bl, br) = (self.op.boundary_left(), self.op.boundary_right());
        let nn = self.op.n_nodes();
        let mut t = Traces {
            west: vec![0.0; nn],
            east: vec![0.0; nn],
            south: vec![0.0; nn],
            north: vec![0.0; nn],
        };
        for k in 0..m {
            for l in 0..m {
                let c = u[k * m + l];
                for n in 0..nn {
                    t.west[n] += c * bl[k] * phi[l][n];
                    t.east[n] += c * br[k] * phi[l][n];
                    t.south[n] += c * phi[k][n] * bl[l];
                    t.north[n] += c * phi[k][n] * br[l];
                }
            }
        }
        t
    }

    /// Face flux along one face: upwind by the sign of the normal coefficient
    /// at each node, or LLF with the largest `|coef|` on the face if the
    /// coefficient changes sign along it.
    fn face_flux(coef: &[f64], minus: &[f64], plus: &[f64]) -> Vec<f64> {
        let has_pos = coef.iter().any(|c| *c > 0.0);
        let has_neg = coef.iter().any(|c| *c < 0.0);
        if has_pos && has_neg {
            let lambda = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            return coef
                .iter()
                .zip(minus.iter().zip(plus))
                .map(|(c, (um, up))| 0.5 * c * (um + up) - 0.5 * lambda * (up - um))
                .collect();
        }
        coef.iter()
            .zip(minus.iter().zip(plus))
            .map(|(&c, (&um, &up))| {
                if c > 0.0 {
                    c * um
                } else if c < 0.0 {
                    c * up
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Semidiscrete time derivative.
    pub fn rhs(&self, t: f64, state: &ModalState) -> Result<ModalState> {
        let (nx, ny) = (self.nx(), self.ny());
        let m = self.op.n_modes();
        let nn = self.op.n_nodes();
        let expected = (nx * ny, 1, m * m);
        if state.shape() != expected {
            return Err(Error::invalid(format!(
                "state shape {:?}, expected {expected:?}",
                state.shape()
            )));
        }
        if let Some(e) = crate::state::OdeState::first_non_finite(state) {
            return Err(Error::Divergence { element: e, time: t, context: "2D state".into() });
        }
        let traces: Vec<Traces> = (0..nx * ny)
            .into_par_iter()
            .map(|e| self.traces(state.modes(e, 0)))
            .collect();
        let nodes = self.op.nodes();
        let ghost = vec![
            match self.x_boundary {
                XBoundary::Inflow { value } => value,
                XBoundary::Periodic => 0.0,
            };
            nn
        ];

        // x faces: (nx + 1) per row, indexed iy * (nx + 1) + j.
        let mut x_flux = vec![Vec::new(); ny * (nx + 1)];
        for iy in 0..ny {
            let ys: Vec<f64> = nodes.iter().map(|&eta| self.mesh.y.map(iy, eta)).collect();
            for j in 0..=nx {
                let xf = self.mesh.x.boundaries()[j];
                let coef: Vec<f64> = ys.iter().map(|&y| (self.a)(xf, y)).collect();
                let periodic = self.x_boundary == XBoundary::Periodic;
                let minus = if j > 0 {
                    &traces[self.element(j - 1, iy)].east
                } else if periodic {
                    &traces[self.element(nx - 1, iy)].east
                } else {
                    &ghost
                };
                let plus = if j < nx {
                    &traces[self.element(j, iy)].west
                } else if periodic {
                    &traces[self.element(0, iy)].west
                } else {
                    &ghost
                };
                x_flux[iy * (nx + 1) + j] = Self::face_flux(&coef, minus, plus);
            }
        }
        // y faces, periodic: face j of column ix sits below row j.
        let mut y_flux = vec![Vec::new(); nx * ny];
        for ix in 0..nx {
            let xs: Vec<f64> = nodes.iter().map(|&xi| self.mesh.x.map(ix, xi)).collect();
            for j in 0..ny {
                let yf = self.mesh.y.boundaries()[j];
                let coef: Vec<f64> = xs.iter().map(|&x| (self.b)(x, yf)).collect();
                let below = if j > 0 { j - 1 } else { ny - 1 };
                let minus = &traces[self.element(ix, below)].north;
                let plus = &traces[self.element(ix, j)].south;
                y_flux[ix * ny + j] = Self::face_flux(&coef, minus, plus);
            }
        }

        let mut out = self.zeros();
        out.as_mut_slice()
            .par_chunks_mut(m * m)
            .enumerate()
            .try_for_each(|(e, du)| -> Result<()> {
                let (ix, iy) = (e % nx, e / nx);
                let (dx, dy) = (self.mesh.x.length(ix), self.mesh.y.length(iy));
                let u = state.modes(e, 0);
                let mut u_nodal = vec![0.0; nn * nn];
                tensor_nodal(&self.op, u, &mut u_nodal);
                let mut fx = vec![0.0; nn * nn];
                let mut fy = vec![0.0; nn * nn];
                for (n, &xi) in nodes.iter().enumerate() {
                    let x = self.mesh.x.map(ix, xi);
                    for (q, &eta) in nodes.iter().enumerate() {
                        let y = self.mesh.y.map(iy, eta);
                        let i = n * nn + q;
                        fx[i] = (self.a)(x, y) * u_nodal[i];
                        fy[i] = (self.b)(x, y) * u_nodal[i];
                    }
                }
                let mut fx_hat = vec![0.0; m * m];
                let mut fy_hat = vec![0.0; m * m];
                tensor_project(&self.op, &fx, &mut fx_hat);
                tensor_project(&self.op, &fy, &mut fy_hat);

                let row = iy * (nx + 1);
                let west = project_line(&self.op, &x_flux[row + ix]);
                let east = project_line(&self.op, &x_flux[row + ix + 1]);
                let south = project_line(&self.op, &y_flux[ix * ny + iy]);
                let north = project_line(&self.op, &y_flux[ix * ny + (iy + 1) % ny]);

                let s = self.op.stiffness();
                let (bl, br) = (self.op.boundary_left(), self.op.boundary_right());
                for k in 0..m {
                    for l in 0..m {
                        let mut vx = 0.0;
                        let mut vy = 0.0;
                        for j in 0..m {
                            vx += s[k][j] * fx_hat[j * m + l];
                            vy += s[l][j] * fy_hat[k * m + j];
                        }
                        du[k * m + l] = 2.0 / dx * (vx - east[l] * br[k] + west[l] * bl[k])
                            + 2.0 / dy * (vy - north[k] * br[l] + south[k] * bl[l]);
                    }
                }
                check_finite(du, At { element: e, time: t }, "2D element rhs")
            })?;
        Ok(out)
    }

    /// `sum_e (dx dy / 4) <u, 1>` and `sum_e (dx dy / 4) <u, u>`.
    pub fn mass_energy(&self, state: &ModalState) -> (f64, f64) {
        let m = self.op.n_modes();
        let c = crate::diagnostics::basis_integrals(&self.op);
        let (mut mass, mut energy) = (0.0, 0.0);
        for iy in 0..self.ny() {
            for ix in 0..self.nx() {
                let jac = 0.25 * self.mesh.x.length(ix) * self.mesh.y.length(iy);
                let u = state.modes(self.element(ix, iy), 0);
                for k in 0..m {
                    for l in 0..m {
                        mass += jac * u[k * m + l] * c[k] * c[l];
                    }
                }
                energy += jac * u.iter().map(|v| v * v).sum::<f64>();
            }
        }
        (mass, energy)
    }

    /// L2 error against `reference` with `points` Gauss-Legendre points per
    /// direction and element.
    pub fn l2_error(
        &self,
        state: &ModalState,
        reference: impl Fn(f64, f64) -> f64 + Sync,
        points: usize,
    ) -> Result<f64> {
        let rule = crate::quadrature::gauss_legendre_rule(points)?;
        let xs = rule.nodes().points();
        let w = rule.weights();
        let total: f64 = (0..self.nx() * self.ny())
            .into_par_iter()
            .map(|e| {
                let (ix, iy) = (e % self.nx(), e / self.nx());
                let jac = 0.25 * self.mesh.x.length(ix) * self.mesh.y.length(iy);
                let mut sum = 0.0;
                for (i, &xi) in xs.iter().enumerate() {
                    let x = self.mesh.x.map(ix, xi);
                    for (j, &eta) in xs.iter().enumerate() {
                        let y = self.mesh.y.map(iy, eta);
                        let d = self.eval(state, e, xi, eta) - reference(x, y);
                        sum += w[i] * w[j] * d * d;
                    }
                }
                jac * sum
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        Ok(total.sqrt())
    }
}

/// `U[n][q] = sum_kl u[k][l] phi_k(xi_n) phi_l(eta_q)`
fn tensor_nodal(op: &DgOperator, u: &[f64], out: &mut [f64]) {
    let m = op.n_modes();
    let nn = op.n_nodes();
    let phi = op.basis().nodal_values();
    let mut tmp = vec![0.0; m * nn];
    for k in 0..m {
        for l in 0..m {
            let c = u[k * m + l];
            for q in 0..nn {
                tmp[k * nn + q] += c * phi[l][q];
            }
        }
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..m {
        for n in 0..nn {
            let p = phi[k][n];
            for q in 0..nn {
                out[n * nn + q] += p * tmp[k * nn + q];
            }
        }
    }
}

/// `F[k][l] = sum_nq P[k][n] P[l][q] f[n][q]`
fn tensor_project(op: &DgOperator, f: &[f64], out: &mut [f64]) {
    let m = op.n_modes();
    let nn = op.n_nodes();
    let p = op.projection();
    let mut tmp = vec![0.0; nn * m];
    for n in 0..nn {
        for l in 0..m {
            tmp[n * m + l] = (0..nn).map(|q| p[l][q] * f[n * nn + q]).sum();
        }
    }
    for k in 0..m {
        for l in 0..m {
            out[k * m + l] = (0..nn).map(|n| p[k][n] * tmp[n * m + l]).sum();
        }
    }
}

fn project_line(op: &DgOperator, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; op.n_modes()];
    op.project_into(f, &mut out);
    out
}

/// Uniform `n x n` mesh of the unit square.
pub fn unit_square(n_elements: usize) -> Result<Mesh2D> {
    let axis: Mesh1D = uniform_mesh(0.0, 1.0, n_elements)?;
    Ok(Mesh2D::new(axis.clone(), axis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::equidistant_nodes;
    use crate::operator::{OperatorMode, RulePolicy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn operator(k: usize) -> DgOperator {
        DgOperator::build(
            &equidistant_nodes(2 * k + 1).unwrap(),
            k,
            OperatorMode::Dgdls { policy: RulePolicy::Exact },
        )
        .unwrap()
    }

    #[test]
    fn reference_examples() {
        for &(x, y) in &[(0.1, 0.2), (0.7, 0.9), (0.33, 0.0)] {
            assert_eq!(advection2d_reference(0.0, x, y), advection2d_u0(x, y));
            assert_eq!(advection2d_reference(1.3, 0.0, y), 0.0);
            let at_one = advection2d_reference(1.0, x, y);
            let expected = (-1.0f64).exp() * (4.0 * PI * x * (-1.0f64).exp()).sin()
                * (1.0 - 0.5 * (2.0 * PI * y).sin());
            assert!((at_one - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_solves_the_pde() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = 1e-3;
        let d = |f: &dyn Fn(f64) -> f64, z: f64| {
            (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h)
        };
        for _ in 0..200 {
            let (t, x, y) = (rng.gen_range(0.1..2.0), rng.gen_range(0.05..0.95), rng.gen_range(0.0..1.0));
            let ut = d(&|s| advection2d_reference(s, x, y), t);
            let flux_x = d(&|s| s * advection2d_reference(t, s, y), x);
            let flux_y = d(&|s| advection2d_reference(t, x, s), y);
            assert!((ut + flux_x + flux_y).abs() <= 1e-6);
        }
    }

    #[test]
    fn reduces_to_1d_advection_per_line() {
        let k = 3;
        let op = operator(k);
        let mesh = unit_square(4).unwrap();
        let solver = Advection2d::new(op.clone(), mesh.clone(), |_, _| 1.0, |_, _| 0.0, XBoundary::Periodic);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = solver.zeros();
        state.as_mut_slice().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        let rhs = solver.rhs(0.0, &state).unwrap();
        let m = k + 1;
        for iy in 0..4 {
            for l in 0..m {
                // Column l of every element on this row is a 1D state.
                let line: Vec<Vec<f64>> = (0..4)
                    .map(|ix| (0..m).map(|kk| state.modes(solver.element(ix, iy), 0)[kk * m + l]).collect())
                    .collect();
                for ix in 0..4 {
                    let left = op.right_value(&line[(ix + 3) % 4]);
                    let right = op.right_value(&line[ix]);
                    let expected = op
                        .rhs_element(mesh.x.length(ix), &line[ix], left, right, |u| u, At { element: ix, time: 0.0 })
                        .unwrap();
                    for kk in 0..m {
                        let got = rhs.modes(solver.element(ix, iy), 0)[kk * m + l];
                        assert!((got - expected[kk]).abs() < 1e-12, "{got} vs {}", expected[kk]);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_state_is_preserved_for_constant_coefficients() {
        let op = operator(2);
        let solver = Advection2d::new(op, unit_square(3).unwrap(), |_, _| 0.7, |_, _| -1.3, XBoundary::Periodic);
        let state = solver.project(|_, _| 2.5);
        let rhs = solver.rhs(0.0, &state).unwrap();
        assert!(rhs.max_abs() <= 1e-12, "{}", rhs.max_abs());
    }

    #[test]
    fn projection_reproduces_tensor_polynomials() {
        let op = operator(3);
        let solver = Advection2d::benchmark(op, 2).unwrap();
        let p = |x: f64, y: f64| 1.0 + x * x * y - y.powi(3) + x.powi(3) * y.powi(2);
        let state = solver.project(p);
        let err = solver.l2_error(&state, p, 8).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn benchmark_speed_and_sign_change_fallback() {
        let solver = Advection2d::benchmark(operator(1), 4).unwrap();
        assert!((solver.max_speed() - 2.0).abs() < 1e-15);
        let f = Advection2d::face_flux(&[1.0, -1.0], &[2.0, 2.0], &[1.0, 1.0]);
        // LLF with lambda = 1: 0.5 c (3) - 0.5 (1 - 2)
        assert_eq!(f, vec![2.0, -1.0]);
        let f = Advection2d::face_flux(&[2.0, 0.0], &[1.0, 1.0], &[3.0, 3.0]);
        assert_eq!(f, vec![2.0, 0.0]);
    }
}
