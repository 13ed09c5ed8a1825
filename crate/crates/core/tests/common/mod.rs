//! Independent oracles shared by the integration tests. Nothing here goes
//! through the DOP basis or the library's linear algebra.
#![allow(dead_code)]

use dgdls::nodes::{NodeKind, NodeSet};
use dgdls::operator::DgOperator;
use dgdls::solver::Solver1d;
use dgdls::state::ModalState;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Legendre polynomials `P_0..=P_d` at `x` by the three-term recurrence.
pub fn legendre(d: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0; d + 1];
    if d >= 1 {
        p[1] = x;
    }
    for j in 1..d {
        p[j + 1] = ((2 * j + 1) as f64 * x * p[j] - j as f64 * p[j - 1]) / (j + 1) as f64;
    }
    p
}

/// Minimum-norm solution of `sum_n w_n P_j(xi_n) = int P_j` for `j <= d`,
/// via the SVD pseudo-inverse.
pub fn min_norm_weights(nodes: &[f64], d: usize) -> Vec<f64> {
    let a = DMatrix::from_fn(d + 1, nodes.len(), |j, n| legendre(d, nodes[n])[j]);
    let mut b = DVector::zeros(d + 1);
    b[0] = 2.0;
    let svd = a.svd(true, true);
    let w = svd.solve(&b, 1e-14).expect("svd solve");
    w.iter().copied().collect()
}

/// Sorted random points in `[-1, 1]` with a minimum spacing of `min_gap`,
/// optionally including both endpoints.
pub fn random_nodes(rng: &mut impl Rng, n_points: usize, min_gap: f64, endpoints: bool) -> NodeSet {
    loop {
        let mut pts: Vec<f64> = (0..n_points).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if endpoints && n_points >= 2 {
            pts[0] = -1.0;
            pts[1] = 1.0;
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if pts.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return NodeSet::new(pts, NodeKind::Scattered).unwrap();
        }
    }
}

/// Barycentric Lagrange differentiation matrix `D[j][m] = l_m'(x_j)`.
pub fn lagrange_diff_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| 1.0 / (0..n).filter(|&m| m != j).map(|m| x[j] - x[m]).product::<f64>())
        .collect();
    let mut d = vec![vec![0.0; n]; n];
    for j in 0..n {
        for m in 0..n {
            if m != j {
                d[j][m] = bary[m] / bary[j] / (x[j] - x[m]);
            }
        }
        d[j][j] = -(0..n).filter(|&m| m != j).map(|m| d[j][m]).sum::<f64>();
    }
    d
}

/// Strong-form nodal DGSEM time derivative of a periodic scalar state given
/// by nodal values per element:
/// `du_j/dt = -(2/dx) [ (D f)_j + d_jN (f*_R - f_N)/w_N - d_j0 (f*_L - f_0)/w_0 ]`.
pub fn nodal_dgsem_rhs(
    nodes: &[f64],
    weights: &[f64],
    dx: f64,
    u: &[Vec<f64>],
    flux: impl Fn(f64) -> f64,
    numerical_flux: impl Fn(f64, f64) -> f64,
) -> Vec<Vec<f64>> {
    let d = lagrange_diff_matrix(nodes);
    let last = nodes.len() - 1;
    let n_el = u.len();
    (0..n_el)
        .map(|e| {
            let f: Vec<f64> = u[e].iter().map(|&v| flux(v)).collect();
            let left_nb = &u[(e + n_el - 1) % n_el];
            let right_nb = &u[(e + 1) % n_el];
            let f_left = numerical_flux(left_nb[last], u[e][0]);
            let f_right = numerical_flux(u[e][last], right_nb[0]);
            (0..=last)
                .map(|j| {
                    let mut v: f64 = (0..=last).map(|m| d[j][m] * f[m]).sum();
                    if j == last {
                        v += (f_right - f[last]) / weights[last];
                    }
                    if j == 0 {
                        v -= (f_left - f[0]) / weights[0];
                    }
                    -(2.0 / dx) * v
                })
                .collect()
        })
        .collect()
}

/// Largest difference between the solver's rhs, evaluated at the nodes, and
/// the nodal DGSEM oracle, for a random nodal state. Returns `(diff, scale)`
/// with `scale` the largest oracle entry.
pub fn dgsem_discrepancy(solver: &Solver1d, rng: &mut impl Rng) -> (f64, f64) {
    let op: &DgOperator = solver.operator();
    let n_el = solver.mesh().n_elements();
    let nodal: Vec<Vec<f64>> = (0..n_el)
        .map(|_| (0..op.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut state = ModalState::zeros(n_el, 1, op.n_modes());
    for (e, values) in nodal.iter().enumerate() {
        state.modes_mut(e, 0).copy_from_slice(&op.dls_project(values).unwrap());
    }
    let rhs = solver.rhs(0.0, &state).unwrap();
    let law = solver.problem().law();
    let kind = solver.problem().flux_kind();
    let oracle = nodal_dgsem_rhs(
        op.nodes(),
        op.weights(),
        solver.mesh().length(0),
        &nodal,
        |v| {
            let mut out = [0.0];
            law.flux(&[v], &mut out);
            out[0]
        },
        |a, b| {
            let mut out = [0.0];
            law.numerical_flux(kind, &[a], &[b], &mut out);
            out[0]
        },
    );
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for e in 0..n_el {
        let ours = op.nodal_values(rhs.modes(e, 0));
        for (a, b) in ours.iter().zip(&oracle[e]) {
            diff = diff.max((a - b).abs());
            scale = scale.max(b.abs());
        }
    }
    (diff, scale)
}

/// Exact `int_{-1}^{1} x^j dx`.
pub fn monomial_integral(j: usize) -> f64 {
    if j % 2 == 1 {
        0.0
    } else {
        2.0 / (j as f64 + 1.0)
    }
}


/// Legendre values and derivatives `P_0..=P_d` at `x`.
pub fn legendre_with_derivs(d: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = legendre(d, x);
    let mut dp = vec![0.0; d + 1];
    for j in 1..=d {
        // P'_j = P'_{j-2} + (2j - 1) P_{j-1}
        dp[j] = (2 * j - 1) as f64 * p[j - 1] + if j >= 2 { dp[j - 2] } else { 0.0 };
    }
    (p, dp)
}

/// `sum_j coeffs[j] P_j` and its derivative at `x`.
pub fn legendre_series(coeffs: &[f64], x: f64) -> (f64, f64) {
    let (p, dp) = legendre_with_derivs(coeffs.len() - 1, x);
    let v = coeffs.iter().zip(&p).map(|(c, p)| c * p).sum();
    let d = coeffs.iter().zip(&dp).map(|(c, p)| c * p).sum();
    (v, d)
}

/// `|<p, q'> + <p', q> - [pq]_{-1}^{1}|` under the operator's rule for random
/// `p, q` of degree `K` with coefficients in `[-1, 1]`.
pub fn ibp_residual(op: &DgOperator, rng: &mut impl Rng) -> f64 {
    let k = op.degree();
    let p: Vec<f64> = (0..=k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let q: Vec<f64> = (0..=k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut lhs = 0.0;
    for (&x, &w) in op.nodes().iter().zip(op.weights()) {
        let (pv, pd) = legendre_series(&p, x);
        let (qv, qd) = legendre_series(&q, x);
        lhs += w * (pv * qd + pd * qv);
    }
    let pq = |x: f64| legendre_series(&p, x).0 * legendre_series(&q, x).0;
    (lhs - (pq(1.0) - pq(-1.0))).abs()
}

/// `max |S[l][k] + S[k][l] - (phi_k phi_l)(1) + (phi_k phi_l)(-1)|`.
pub fn sbp_residual(op: &DgOperator) -> f64 {
    let s = op.stiffness();
    let (bl, br) = (op.boundary_left(), op.boundary_right());
    let mut worst: f64 = 0.0;
    for l in 0..op.n_modes() {
        for k in 0..op.n_modes() {
            let r = s[l][k] + s[k][l] - (br[k] * br[l] - bl[k] * bl[l]);
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// `max |<phi_k, phi_l> - delta_kl|` under the basis' inner product.
pub fn orthonormality_residual(basis: &dgdls::dop::DopBasis) -> f64 {
    let ip = basis.inner_product();
    let vals = basis.nodal_values();
    let mut worst: f64 = 0.0;
    for k in 0..vals.len() {
        for l in 0..vals.len() {
            let g = ip.dot(&vals[k], &vals[l]).unwrap();
            let delta = if k == l { 1.0 } else { 0.0 };
            worst = worst.max((g - delta).abs());
        }
    }
    worst
}

/// Largest rhs entry for a constant state.
pub fn free_stream_residual(solver: &Solver1d, value: f64) -> f64 {
    let state = solver.project(|_, out| out.iter_mut().for_each(|u| *u = value));
    solver.rhs(0.0, &state).unwrap().max_abs()
}

/// Random modal state with coefficients in `[-1, 1]` plus `offset` on mode 0.
pub fn random_state(solver: &Solver1d, rng: &mut impl Rng, offset: f64) -> ModalState {
    let mut state = solver.zeros();
    for v in state.as_mut_slice() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let (n_el, nc, _) = state.shape();
    for e in 0..n_el {
        for c in 0..nc {
            state.modes_mut(e, c)[0] += offset;
        }
    }
    state
}

/// Rate of change of the total mass, `sum_i (dx_i/2) <du^i/dt, 1>`, per
/// component.
pub fn mass_rate(solver: &Solver1d, state: &ModalState) -> Vec<f64> {
    let rhs = solver.rhs(0.0, state).unwrap();
    dgdls::diagnostics::mass(&rhs, solver.mesh(), solver.operator())
}
