//! Discrete orthonormal polynomials.
//!
//! A [`DopBasis`] is orthonormal with respect to a weighted point-sum inner
//! product. It is built by modified Gram-Schmidt on the Legendre polynomials
//! and stored as Legendre coefficients, so the basis can be evaluated (and
//! integrated exactly) anywhere on `[-1, 1]`, not only at the nodes.

use crate::error::{Error, Result};
use crate::nodes::NodeSet;
use crate::report::fmt_f64;

const DEGENERACY_RATIO: f64 = 1e-13;
/// Above this degree every vector gets a second orthogonalization pass.
const REORTHOGONALIZE_ABOVE: usize = 8;

/// `P_k(x)` and `P'_k(x)` by the three-term recurrence.
pub fn legendre_eval(degree: usize, x: f64) -> (f64, f64) {
    let (vals, ders) = legendre_all(degree, x);
    (vals[degree], ders[degree])
}

/// Values and derivatives of `P_0..=P_degree` at `x`.
pub fn legendre_all(degree: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut vals = vec![0.0; degree + 1];
    let mut ders = vec![0.0; degree + 1];
    vals[0] = 1.0;
    if degree >= 1 {
        vals[1] = x;
        ders[1] = 1.0;
    }
    for k in 1..degree {
        let kf = k as f64;
        vals[k + 1] = ((2.0 * kf + 1.0) * x * vals[k] - kf * vals[k - 1]) / (kf + 1.0);
        ders[k + 1] = ders[k - 1] + (2.0 * kf + 1.0) * vals[k];
    }
    (vals, ders)
}

/// `<u, v>_w = sum_n w_n u(xi_n) v(xi_n)` over a fixed node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInnerProduct {
    nodes: NodeSet,
    weights: Vec<f64>,
}

impl DiscreteInnerProduct {
    pub fn new(nodes: NodeSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != nodes.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} nodes",
                weights.len(),
                nodes.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::invalid(format!(
                "inner product weights must be positive, found {w}"
            )));
        }
        Ok(DiscreteInnerProduct { nodes, weights })
    }

    /// Accepts weights of either sign, as produced by quadrature rules with
    /// negative weights. The form is only required to be positive definite on
    /// the polynomials the basis spans; [`build_dop_basis`] checks that.
    pub fn new_signed(nodes: NodeSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != nodes.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} nodes",
                weights.len(),
                nodes.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("inner product weights must be finite"));
        }
        Ok(DiscreteInnerProduct { nodes, weights })
    }

    /// All weights equal to one.
    pub fn unit(nodes: NodeSet) -> Self {
        let weights = vec![1.0; nodes.len()];
        DiscreteInnerProduct { nodes, weights }
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dot(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        inner_product(self, u, v)
    }

    fn dot_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u)
            .zip(v)
            .map(|((w, a), b)| w * a * b)
            .sum()
    }
}

pub fn inner_product(ip: &DiscreteInnerProduct, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = ip.weights.len();
    if u.len() != n || v.len() != n {
        return Err(Error::invalid(format!(
            "inner product expects vectors of length {n}, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(ip.dot_unchecked(u, v))
}

/// Basis `phi_0..=phi_K` orthonormal under a [`DiscreteInnerProduct`].
#[derive(Debug, Clone)]
pub struct DopBasis {
    degree: usize,
    /// Row `k`: Legendre coefficients of `phi_k`, zero beyond index `k`.
    coeffs: Vec<Vec<f64>>,
    nodal_values: Vec<Vec<f64>>,
    nodal_derivs: Vec<Vec<f64>>,
    /// Nodal vectors straight from the orthogonalization.
    orthonormal_vectors: Vec<Vec<f64>>,
    ip: DiscreteInnerProduct,
}

/// Modified Gram-Schmidt on `P_0..=P_K` under `ip`.
pub fn build_dop_basis(ip: &DiscreteInnerProduct, degree: usize) -> Result<DopBasis> {
    let n_nodes = ip.nodes().len();
    if degree >= n_nodes {
        return Err(Error::invalid(format!(
            "basis degree {degree} needs more than {n_nodes} nodes"
        )));
    }
    let legendre_at_nodes: Vec<(Vec<f64>, Vec<f64>)> = ip
        .nodes()
        .points()
        .iter()
        .map(|&x| legendre_all(degree, x))
        .collect();

    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        let mut c = vec![0.0; degree + 1];
        c[k] = 1.0;
        let mut v: Vec<f64> = legendre_at_nodes.iter().map(|(p, _)| p[k]).collect();
        let initial_norm = signed_norm(ip, &v);

        let mut norm = orthogonalize(ip, &coeffs, &values, &mut c, &mut v);
        // "Twice is enough": repeat when cancellation was severe.
        if k > REORTHOGONALIZE_ABOVE || norm < 0.1 * initial_norm {
            norm = orthogonalize(ip, &coeffs, &values, &mut c, &mut v);
        }
        if !(initial_norm > 0.0) || !(norm > DEGENERACY_RATIO * initial_norm) {
            return Err(Error::DegenerateBasis { degree: k });
        }
        c.iter_mut().for_each(|x| *x /= norm);
        v.iter_mut().for_each(|x| *x /= norm);
        coeffs.push(c);
        values.push(v);
    }

    // Re-evaluate nodal data from the coefficients so that cached values and
    // off-node evaluation agree to roundoff.
    let mut nodal_values = vec![vec![0.0; n_nodes]; degree + 1];
    let mut nodal_derivs = vec![vec![0.0; n_nodes]; degree + 1];
    for (n, (p, dp)) in legendre_at_nodes.iter().enumerate() {
        for k in 0..=degree {
            let (mut val, mut der) = (0.0, 0.0);
            for j in 0..=k {
                val += coeffs[k][j] * p[j];
                der += coeffs[k][j] * dp[j];
            }
            nodal_values[k][n] = val;
            nodal_derivs[k][n] = der;
        }
    }

    Ok(DopBasis {
        degree,
        coeffs,
        nodal_values,
        nodal_derivs,
        orthonormal_vectors: values,
        ip: ip.clone(),
    })
}

fn orthogonalize(
    ip: &DiscreteInnerProduct,
    coeffs: &[Vec<f64>],
    values: &[Vec<f64>],
    c: &mut [f64],
    v: &mut [f64],
) -> f64 {
    for (cj, vj) in coeffs.iter().zip(values) {
        let r = ip.dot_unchecked(v, vj);
        for (a, b) in c.iter_mut().zip(cj) {
            *a -= r * b;
        }
        for (a, b) in v.iter_mut().zip(vj) {
            *a -= r * b;
        }
    }
    signed_norm(ip, v)
}

// NaN when the form is not positive on `v`, which the callers treat as
// degenerate.
fn signed_norm(ip: &DiscreteInnerProduct, v: &[f64]) -> f64 {
    let sq = ip.dot_unchecked(v, v);
    if sq > 0.0 {
        sq.sqrt()
    } else {
        f64::NAN
    }
}

impl DopBasis {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.ip.nodes().len()
    }

    pub fn inner_product(&self) -> &DiscreteInnerProduct {
        &self.ip
    }

    pub fn nodes(&self) -> &NodeSet {
        self.ip.nodes()
    }

    pub fn legendre_coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// `phi_k(xi_n)`, indexed `[k][n]`.
    pub fn nodal_values(&self) -> &[Vec<f64>] {
        &self.nodal_values
    }

    /// `phi_k'(xi_n)`, indexed `[k][n]`.
    /// Nodal vectors as produced by the orthogonalization. They are
    /// orthonormal to roundoff even when the Legendre coefficients are large
    /// and re-evaluating them through [`DopBasis::nodal_values`] cancels.
    pub fn orthonormal_vectors(&self) -> &[Vec<f64>] {
        &self.orthonormal_vectors
    }

    pub fn nodal_derivs(&self) -> &[Vec<f64>] {
        &self.nodal_derivs
    }

    pub fn eval(&self, k: usize, xi: f64) -> Result<(f64, f64)> {
        dop_eval(self, k, xi)
    }

    /// Values and derivatives of every basis function at `xi`.
    pub fn eval_all(&self, xi: f64) -> (Vec<f64>, Vec<f64>) {
        let (p, dp) = legendre_all(self.degree, xi);
        let mut vals = vec![0.0; self.degree + 1];
        let mut ders = vec![0.0; self.degree + 1];
        for k in 0..=self.degree {
            for j in 0..=k {
                vals[k] += self.coeffs[k][j] * p[j];
                ders[k] += self.coeffs[k][j] * dp[j];
            }
        }
        (vals, ders)
    }

    /// Rows `(k, j, coefficient)` for debugging and oracle comparisons.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,j,legendre_coeff\n");
        for (k, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                out.push_str(&format!("{k},{j},{}\n", fmt_f64(*c)));
            }
        }
        out
    }
}

pub fn dop_eval(basis: &DopBasis, k: usize, xi: f64) -> Result<(f64, f64)> {
    if k > basis.degree {
        return Err(Error::invalid(format!(
            "mode {k} out of range for degree {}",
            basis.degree
        )));
    }
    let (p, dp) = legendre_all(k, xi);
    let row = &basis.coeffs[k];
    let val = row[..=k].iter().zip(&p).map(|(c, v)| c * v).sum();
    let der = row[..=k].iter().zip(&dp).map(|(c, v)| c * v).sum();
    Ok((val, der))
}
