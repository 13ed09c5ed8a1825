//! Least-squares quadrature on arbitrary node sets, plus the classical rules
//! used for comparison and for error integration.
//!
//! An LS rule of exactness degree `d` on `N + 1 >= d + 1` nodes is the
//! minimum-Euclidean-norm weight vector satisfying the exactness conditions.
//! With a basis orthonormal under the unit-weight point sum the normal
//! equations collapse to the identity and the weights are explicit:
//! `w_n = sum_k phi_k(xi_n) * integral(phi_k)`.

use crate::dop::{build_dop_basis, legendre_eval, DiscreteInnerProduct, DopBasis};
use crate::error::{Error, Result};
use crate::linalg;
use crate::nodes::{gauss_legendre_nodes, gauss_lobatto_nodes, NodeSet};
use crate::report::fmt_f64;

/// Weights below this are treated as negative.
pub const NONNEGATIVE_TOL: f64 = -1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: NodeSet,
    weights: Vec<f64>,
    exactness_degree: usize,
    kappa: f64,
    nonnegative: bool,
}

/// Rules produced by [`build_ls_quadrature`].
pub type LsQuadrature = QuadratureRule;

impl QuadratureRule {
    fn new(nodes: NodeSet, weights: Vec<f64>, exactness_degree: usize) -> Self {
        let kappa = kappa(&weights);
        let nonnegative = weights.iter().all(|w| *w >= NONNEGATIVE_TOL);
        QuadratureRule {
            nodes,
            weights,
            exactness_degree,
            kappa,
            nonnegative,
        }
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn integrate(&self, g_nodal: &[f64]) -> Result<f64> {
        integrate(&self.weights, g_nodal)
    }

    /// `xi,weight` rows followed by nothing else; see [`QuadratureRule::summary`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,weight\n");
        for (x, w) in self.nodes.points().iter().zip(&self.weights) {
            out.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*w)));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "# nodes={} N={} degree={} kappa={} nonnegative={}",
            self.nodes.kind(),
            self.nodes.degree_n(),
            self.exactness_degree,
            fmt_f64(self.kappa),
            self.nonnegative
        )
    }
}

/// `I[phi_k]` over `[-1, 1]`. Only the `P_0` component integrates to a
/// nonzero value, so the moments are read straight off the coefficients.
pub fn dop_moments(basis: &DopBasis) -> Vec<f64> {
    basis
        .legendre_coeffs()
        .iter()
        .map(|row| 2.0 * row[0])
        .collect()
}

/// Minimal-norm quadrature with exactness degree `degree` on `nodes`.
pub fn build_ls_quadrature(nodes: &NodeSet, degree: usize) -> Result<LsQuadrature> {
    let n = nodes.degree_n();
    if degree > n {
        return Err(Error::invalid(format!(
            "exactness degree {degree} needs at least {} nodes, got {}",
            degree + 1,
            nodes.len()
        )));
    }
    let basis = build_dop_basis(&DiscreteInnerProduct::unit(nodes.clone()), degree)?;
    let moments = dop_moments(&basis);
    let mut weights = vec![0.0; nodes.len()];
    for (phi, m) in basis.orthonormal_vectors().iter().zip(&moments) {
        for (w, p) in weights.iter_mut().zip(phi) {
            *w += p * m;
        }
    }
    Ok(QuadratureRule::new(nodes.clone(), weights, degree))
}

/// Stability value: sum of absolute weights.
pub fn kappa(weights: &[f64]) -> f64 {
    weights.iter().map(|w| w.abs()).sum()
}

pub fn integrate(weights: &[f64], g_nodal: &[f64]) -> Result<f64> {
    if weights.len() != g_nodal.len() {
        return Err(Error::invalid(format!(
            "{} weights but {} nodal values",
            weights.len(),
            g_nodal.len()
        )));
    }
    Ok(weights.iter().zip(g_nodal).map(|(w, g)| w * g).sum())
}

/// Closed Newton-Cotes weights on `n_points` equidistant points of an
/// interval of length `domain_length`. Ill-conditioning for large
/// `n_points` is expected and not masked.
pub fn newton_cotes_weights(n_points: usize, domain_length: f64) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::invalid("Newton-Cotes needs at least 2 points"));
    }
    let n = n_points - 1;
    let xs: Vec<f64> = (0..n_points)
        .map(|i| -1.0 + 2.0 * i as f64 / n as f64)
        .collect();
    // Exactness for P_0..P_n on [-1, 1]: sum_j w_j P_k(x_j) = 2 delta_k0.
    let a: Vec<Vec<f64>> = (0..=n)
        .map(|k| xs.iter().map(|&x| legendre_eval(k, x).0).collect())
        .collect();
    let mut rhs = vec![0.0; n_points];
    rhs[0] = 2.0;
    let w = linalg::solve(a, rhs)?;
    Ok(w.into_iter().map(|w| w * domain_length / 2.0).collect())
}

/// Gauss-Lobatto rule on `n_points` nodes, exact to degree `2 n_points - 3`.
pub fn gauss_lobatto_rule(n_points: usize) -> Result<QuadratureRule> {
    let nodes = gauss_lobatto_nodes(n_points)?;
    let n = n_points - 1;
    let scale = 2.0 / (n * (n + 1)) as f64;
    let weights = nodes
        .points()
        .iter()
        .map(|&x| {
            let p = legendre_eval(n, x).0;
            scale / (p * p)
        })
        .collect();
    Ok(QuadratureRule::new(nodes, weights, 2 * n_points - 3))
}

/// Gauss-Legendre rule on `n_points` nodes, exact to degree `2 n_points - 1`.
pub fn gauss_legendre_rule(n_points: usize) -> Result<QuadratureRule> {
    let nodes = gauss_legendre_nodes(n_points)?;
    let weights = nodes
        .points()
        .iter()
        .map(|&x| {
            let d = legendre_eval(n_points, x).1;
            2.0 / ((1.0 - x * x) * d * d)
        })
        .collect();
    Ok(QuadratureRule::new(nodes, weights, 2 * n_points - 1))
}

/// Grows `N` from `n_start - 1` in steps of `k_degree` until the LS rule of
/// exactness `degree` on `generator(N + 1)` has no negative weights.
pub fn auto_n_for_nonnegative<G>(
    generator: G,
    k_degree: usize,
    degree: usize,
    n_start: usize,
) -> Result<LsQuadrature>
where
    G: Fn(usize) -> Result<NodeSet>,
{
    if n_start < degree + 1 {
        return Err(Error::invalid(format!(
            "n_start = {n_start} is below degree + 1 = {}",
            degree + 1
        )));
    }
    let max_n = 64 * (degree + 1);
    let step = k_degree.max(1);
    let mut n = n_start - 1;
    while n <= max_n {
        let nodes = generator(n + 1)?;
        let rule = build_ls_quadrature(&nodes, degree)?;
        if rule.is_nonnegative() {
            return Ok(rule);
        }
        n += step;
    }
    Err(Error::NoStableRule { max_n })
}

/// Highest exactness degree `<= max_degree` whose LS rule on `nodes` is
/// nonnegative. Degree 0 always qualifies: its weights are `2 / (N + 1)`.
pub fn highest_nonnegative_rule(nodes: &NodeSet, max_degree: usize) -> Result<LsQuadrature> {
    let mut degree = max_degree.min(nodes.degree_n());
    loop {
        let rule = build_ls_quadrature(nodes, degree)?;
        if rule.is_nonnegative() || degree == 0 {
            return Ok(rule);
        }
        degree -= 1;
    }
}
