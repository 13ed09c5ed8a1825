//! The DGDLS reference-element operator.
//!
//! With a basis orthonormal under `<., .>_w*` the mass matrix is the identity
//! and each element evolves `K + 1` modal coefficients by
//!
//! ```text
//! (dx/2) du_l/dt = <f, phi_l'>_w* - [f_R phi_l(1) - f_L phi_l(-1)]
//! ```
//!
//! where `f` is the weighted least-squares fit of the nodal flux values. All
//! matrices needed for that are assembled once in [`DgOperator::build`].

use crate::dop::{build_dop_basis, DiscreteInnerProduct, DopBasis};
use crate::error::{Error, Result};
use crate::nodes::{NodeKind, NodeSet};
use crate::quadrature::{build_ls_quadrature, gauss_lobatto_rule, highest_nonnegative_rule, QuadratureRule};
use crate::report::fmt_f64;

/// Below this spread the entropy correction is switched off.
pub const ENTROPY_DENOMINATOR_MIN: f64 = 1e-28;

/// How the least-squares rule of a DGDLS operator is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RulePolicy {
    /// Exactness `2K` with nonnegative weights, or a configuration error.
    Strict,
    /// Exactness `min(2K, N)` whatever the sign of the weights.
    Exact,
    /// The highest exactness up to `min(2K, N)` whose weights are nonnegative.
    Nonnegative,
}

impl RulePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RulePolicy::Strict => "strict",
            RulePolicy::Exact => "exact",
            RulePolicy::Nonnegative => "nonnegative",
        }
    }
}

impl std::str::FromStr for RulePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(RulePolicy::Strict),
            "exact" => Ok(RulePolicy::Exact),
            "nonnegative" | "non-negative" => Ok(RulePolicy::Nonnegative),
            other => Err(Error::invalid(format!("unknown rule policy '{other}'"))),
        }
    }
}

impl std::fmt::Display for RulePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorMode {
    /// Least-squares quadrature on the given nodes.
    Dgdls { policy: RulePolicy },
    /// Classical collocation on `K + 1` Gauss-Lobatto nodes and their rule.
    DgsemGaussLobatto,
}

/// Where an element evaluation happens, for divergence reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct At {
    pub element: usize,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct DgOperator {
    basis: DopBasis,
    quad: QuadratureRule,
    mode: OperatorMode,
    /// `P[k][n] = w*_n phi_k(xi_n)`
    projection: Vec<Vec<f64>>,
    /// `S[l][k] = <phi_k, phi_l'>_w*`
    stiffness: Vec<Vec<f64>>,
    boundary_left: Vec<f64>,
    boundary_right: Vec<f64>,
}

impl DgOperator {
    pub fn build(nodes: &NodeSet, degree: usize, mode: OperatorMode) -> Result<Self> {
        let n = nodes.degree_n();
        if n < degree {
            return Err(Error::Configuration(format!(
                "need N >= K, got N = {n}, K = {degree}"
            )));
        }
        let quad = match mode {
            OperatorMode::Dgdls { policy: RulePolicy::Strict } => {
                if n < 2 * degree {
                    return Err(Error::Configuration(format!(
                        "exactness 2K = {} unreachable with N = {n}",
                        2 * degree
                    )));
                }
                let rule = build_ls_quadrature(nodes, 2 * degree)?;
                if !rule.is_nonnegative() {
                    return Err(Error::Configuration(format!(
                        "least-squares rule of degree {} on N = {n} has negative weights",
                        2 * degree
                    )));
                }
                rule
            }
            OperatorMode::Dgdls { policy: RulePolicy::Exact } => {
                build_ls_quadrature(nodes, (2 * degree).min(n))?
            }
            OperatorMode::Dgdls { policy: RulePolicy::Nonnegative } => {
                highest_nonnegative_rule(nodes, 2 * degree)?
            }
            OperatorMode::DgsemGaussLobatto => {
                if nodes.kind() != NodeKind::GaussLobatto || nodes.len() != degree + 1 {
                    return Err(Error::Configuration(format!(
                        "DGSEM needs K + 1 = {} Gauss-Lobatto nodes",
                        degree + 1
                    )));
                }
                gauss_lobatto_rule(degree + 1)?
            }
        };
        Self::with_rule(quad, degree, mode)
    }

    /// Assembles the operator on an explicit quadrature rule.
    pub fn with_rule(quad: QuadratureRule, degree: usize, mode: OperatorMode) -> Result<Self> {
        let ip = DiscreteInnerProduct::new_signed(quad.nodes().clone(), quad.weights().to_vec())?;
        let basis = build_dop_basis(&ip, degree).map_err(|e| match e {
            Error::DegenerateBasis { degree: d } => Error::Configuration(format!(
                "quadrature weights do not define an inner product on degree {d}"
            )),
            other => other,
        })?;
        let w = quad.weights();
        let projection: Vec<Vec<f64>> = basis
            .nodal_values()
            .iter()
            .map(|phi| phi.iter().zip(w).map(|(p, w)| p * w).collect())
            .collect();
        let stiffness: Vec<Vec<f64>> = basis
            .nodal_derivs()
            .iter()
            .map(|dphi_l| {
                basis
                    .nodal_values()
                    .iter()
                    .map(|phi_k| {
                        phi_k
                            .iter()
                            .zip(dphi_l)
                            .zip(w)
                            .map(|((a, b), w)| a * b * w)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let boundary_left = basis.eval_all(-1.0).0;
        let boundary_right = basis.eval_all(1.0).0;
        Ok(DgOperator {
            basis,
            quad,
            mode,
            projection,
            stiffness,
            boundary_left,
            boundary_right,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn n_nodes(&self) -> usize {
        self.basis.n_nodes()
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    pub fn basis(&self) -> &DopBasis {
        &self.basis
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn nodes(&self) -> &[f64] {
        self.quad.nodes().points()
    }

    pub fn weights(&self) -> &[f64] {
        self.quad.weights()
    }

    pub fn projection(&self) -> &[Vec<f64>] {
        &self.projection
    }

    pub fn stiffness(&self) -> &[Vec<f64>] {
        &self.stiffness
    }

    pub fn boundary_left(&self) -> &[f64] {
        &self.boundary_left
    }

    pub fn boundary_right(&self) -> &[f64] {
        &self.boundary_right
    }

    /// Least-squares modal coefficients `f_k = <f, phi_k>_w*`.
    pub fn dls_project(&self, f_nodal: &[f64]) -> Result<Vec<f64>> {
        if f_nodal.len() != self.n_nodes() {
            return Err(Error::invalid(format!(
                "expected {} nodal values, got {}",
                self.n_nodes(),
                f_nodal.len()
            )));
        }
        let mut out = vec![0.0; self.n_modes()];
        self.project_into(f_nodal, &mut out);
        Ok(out)
    }

    pub(crate) fn project_into(&self, f_nodal: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.projection) {
            *o = row.iter().zip(f_nodal).map(|(p, f)| p * f).sum();
        }
    }

    /// Evaluates `sum_k modal[k] phi_k(xi)`.
    pub fn reconstruct(&self, modal: &[f64], xi: f64) -> f64 {
        let (phi, _) = self.basis.eval_all(xi);
        phi.iter().zip(modal).map(|(p, u)| p * u).sum()
    }

    /// Values at the collocation nodes.
    pub fn nodal_values(&self, modal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_nodes()];
        self.nodal_into(modal, &mut out);
        out
    }

    pub(crate) fn nodal_into(&self, modal: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (u, phi) in modal.iter().zip(self.basis.nodal_values()) {
            for (o, p) in out.iter_mut().zip(phi) {
                *o += u * p;
            }
        }
    }

    pub fn left_value(&self, modal: &[f64]) -> f64 {
        dot(&self.boundary_left, modal)
    }

    pub fn right_value(&self, modal: &[f64]) -> f64 {
        dot(&self.boundary_right, modal)
    }

    /// Time derivative of one element's modal coefficients for a scalar law.
    ///
    /// `f_left` and `f_right` are the numerical fluxes at the element's left
    /// and right faces; `flux` is the physical flux applied pointwise.
    pub fn rhs_element(
        &self,
        dx: f64,
        modal: &[f64],
        f_left: f64,
        f_right: f64,
        flux: impl Fn(f64) -> f64,
        at: At,
    ) -> Result<Vec<f64>> {
        if modal.len() != self.n_modes() {
            return Err(Error::invalid(format!(
                "expected {} modes, got {}",
                self.n_modes(),
                modal.len()
            )));
        }
        check_finite(modal, at, "modal state")?;
        check_finite(&[f_left, f_right], at, "face flux")?;
        let mut nodal = self.nodal_values(modal);
        nodal.iter_mut().for_each(|u| *u = flux(*u));
        let mut flux_modal = vec![0.0; self.n_modes()];
        self.project_into(&nodal, &mut flux_modal);
        let mut out = vec![0.0; self.n_modes()];
        self.rhs_from_flux_modes(dx, &flux_modal, f_left, f_right, &mut out);
        check_finite(&out, at, "element rhs")?;
        Ok(out)
    }

    /// `du_l/dt = (2/dx) (sum_k f_k S[l][k] - f_R b+_l + f_L b-_l)`.
    pub(crate) fn rhs_from_flux_modes(
        &self,
        dx: f64,
        flux_modal: &[f64],
        f_left: f64,
        f_right: f64,
        out: &mut [f64],
    ) {
        let scale = 2.0 / dx;
        for l in 0..self.n_modes() {
            let volume = dot(&self.stiffness[l], flux_modal);
            out[l] = scale
                * (volume - f_right * self.boundary_right[l] + f_left * self.boundary_left[l]);
        }
    }

    /// Zero-sum modal correction that sets the element's entropy production.
    ///
    /// `rhs_raw` is the uncorrected `du/dt`; `entropy_flux_faces` holds the
    /// numerical entropy fluxes at the left and right face. The entropy
    /// variable is the solution itself. See [`entropy_error`].
    pub fn entropy_correction(
        &self,
        dx: f64,
        modal: &[f64],
        rhs_raw: &[f64],
        entropy_flux_faces: (f64, f64),
    ) -> Vec<f64> {
        let e = entropy_error(dx, modal, rhs_raw, entropy_flux_faces);
        let mean = modal.iter().sum::<f64>() / modal.len() as f64;
        let spread: f64 = modal.iter().map(|u| (u - mean).powi(2)).sum();
        if spread < ENTROPY_DENOMINATOR_MIN || e == 0.0 {
            return vec![0.0; modal.len()];
        }
        let alpha = e / spread;
        let mut r: Vec<f64> = modal.iter().map(|u| alpha * (u - mean)).collect();
        // Remove the roundoff residue so the sum vanishes exactly.
        let residue = r.iter().sum::<f64>() / r.len() as f64;
        r.iter_mut().for_each(|x| *x -= residue);
        r
    }

    /// CSV dump with sections `P`, `S`, `b-`, `b+`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,row,col,value\n");
        let mut push = |name: &str, m: &[Vec<f64>]| {
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out.push_str(&format!("{name},{i},{j},{}\n", fmt_f64(*v)));
                }
            }
        };
        push("P", &self.projection);
        push("S", &self.stiffness);
        push("b-", &[self.boundary_left.clone()]);
        push("b+", &[self.boundary_right.clone()]);
        out
    }
}

/// Entropy error of one element: the mismatch between the entropy flux
/// difference across the element and the entropy production of the
/// uncorrected scheme, both as rates of `sum_k u_k^2 / 2`.
///
/// `E = -(2/dx) (G_R - G_L) - sum_k u_k (du_k/dt)`
pub fn entropy_error(dx: f64, modal: &[f64], rhs_raw: &[f64], faces: (f64, f64)) -> f64 {
    let (g_left, g_right) = faces;
    -(2.0 / dx) * (g_right - g_left) - dot(modal, rhs_raw)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_finite(values: &[f64], at: At, context: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence {
            element: at.element,
            time: at.time,
            context: context.to_string(),
        })
    }
}
