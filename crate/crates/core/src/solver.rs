//! Global 1D semidiscretization on a periodic mesh and the run driver.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flux::{burgers_entropy_flux, NumericalFluxKind};
use crate::nodes::{
    equidistant_nodes, gauss_legendre_nodes, gauss_lobatto_nodes, scattered_nodes, uniform_mesh,
    Mesh1D, NodeKind, NodeSet,
};
use crate::operator::{check_finite, At, DgOperator, OperatorMode, RulePolicy};
use crate::problems::advection2d::Advection2d;
use crate::problems::{Law, Problem, ProblemKind};
use crate::state::{ModalState, OdeState};
use crate::time::{integrate, Integration, TimeConfig};

/// How many collocation points an element uses: `N + 1` with `N` either a
/// multiple of `K` or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NRule {
    TimesK(usize),
    Fixed(usize),
}

impl NRule {
    pub fn resolve(&self, degree: usize) -> usize {
        match *self {
            NRule::TimesK(m) => m * degree,
            NRule::Fixed(n) => n,
        }
    }
}

impl FromStr for NRule {
    type Err = Error;

    /// `K`, `2K`, `4K`, ... or a plain integer.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::invalid(format!("invalid N '{s}' (expected e.g. 12, K, 2K)"));
        if let Some(m) = t.strip_suffix(['K', 'k']) {
            if m.is_empty() {
                return Ok(NRule::TimesK(1));
            }
            let m: usize = m.parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            return Ok(NRule::TimesK(m));
        }
        t.parse().map(NRule::Fixed).map_err(|_| bad())
    }
}

impl fmt::Display for NRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NRule::TimesK(1) => f.write_str("K"),
            NRule::TimesK(m) => write!(f, "{m}K"),
            NRule::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// The default least-squares rule policy of the solver.
pub const DEFAULT_POLICY: RulePolicy = RulePolicy::Nonnegative;

/// Everything needed to build a discretization of one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub problem: ProblemKind,
    pub flux: NumericalFluxKind,
    pub degree: usize,
    pub n_elements: usize,
    pub n_rule: NRule,
    pub nodes: NodeKind,
    pub seed: u64,
    pub policy: RulePolicy,
    /// Classical DGSEM on `K + 1` Gauss-Lobatto nodes; ignores `n_rule`,
    /// `nodes` and `policy`.
    pub dgsem: bool,
    pub entropy_correction: bool,
}

impl Setup {
    pub fn new(problem: ProblemKind, degree: usize, n_elements: usize, n_rule: NRule) -> Self {
        Setup {
            problem,
            flux: problem.default_flux(),
            degree,
            n_elements,
            n_rule,
            nodes: NodeKind::Equidistant,
            seed: 1,
            policy: DEFAULT_POLICY,
            dgsem: false,
            entropy_correction: false,
        }
    }

    pub fn dgsem(problem: ProblemKind, degree: usize, n_elements: usize) -> Self {
        Setup {
            dgsem: true,
            nodes: NodeKind::GaussLobatto,
            ..Setup::new(problem, degree, n_elements, NRule::TimesK(1))
        }
    }

    pub fn with_nodes(mut self, nodes: NodeKind, seed: u64) -> Self {
        self.nodes = nodes;
        self.seed = seed;
        self
    }

    /// The `N` of this setup.
    pub fn n(&self) -> usize {
        if self.dgsem {
            self.degree
        } else {
            self.n_rule.resolve(self.degree)
        }
    }

    pub fn node_set(&self) -> Result<NodeSet> {
        if self.dgsem {
            return gauss_lobatto_nodes(self.degree + 1);
        }
        let n_points = self.n() + 1;
        if self.n() < self.degree || n_points < 2 {
            return Err(Error::Configuration(format!(
                "need N >= K and N >= 1, got N = {}, K = {}",
                self.n(),
                self.degree
            )));
        }
        match self.nodes {
            NodeKind::Equidistant => equidistant_nodes(n_points),
            // Two points have no interior to perturb.
            NodeKind::Scattered if n_points == 2 => {
                Ok(NodeSet::from_raw(vec![-1.0, 1.0], NodeKind::Scattered))
            }
            NodeKind::Scattered => scattered_nodes(n_points, self.seed),
            NodeKind::GaussLobatto => gauss_lobatto_nodes(n_points),
            NodeKind::GaussLegendre => gauss_legendre_nodes(n_points),
        }
    }

    pub fn operator(&self) -> Result<DgOperator> {
        let mode = if self.dgsem {
            OperatorMode::DgsemGaussLobatto
        } else {
            OperatorMode::Dgdls { policy: self.policy }
        };
        DgOperator::build(&self.node_set()?, self.degree, mode)
    }

    pub fn solver(&self) -> Result<Solver1d> {
        let problem = Problem::new(self.problem, self.flux)?;
        let mesh = uniform_mesh(0.0, 1.0, self.n_elements)?;
        let solver = Solver1d::new(self.operator()?, mesh, problem);
        if self.entropy_correction {
            solver.with_entropy_correction(None)
        } else {
            Ok(solver)
        }
    }

    pub fn solver_2d(&self) -> Result<Advection2d> {
        if self.problem != ProblemKind::Advection2d {
            return Err(Error::Configuration(format!("{} is not two-dimensional", self.problem)));
        }
        if self.entropy_correction {
            return Err(Error::Configuration("entropy correction is 1D only".into()));
        }
        Advection2d::benchmark(self.operator()?, self.n_elements)
    }

    /// Short label of the node configuration, e.g. `equidistant` or
    /// `dgsem-gauss-lobatto`.
    pub fn nodes_label(&self) -> String {
        if self.dgsem {
            "dgsem-gauss-lobatto".to_string()
        } else {
            self.nodes.name().to_string()
        }
    }
}

/// Numerical entropy flux `g(u-, u+)` for the square entropy.
pub type EntropyFlux = fn(f64, f64) -> f64;

#[derive(Debug, Clone)]
pub struct Solver1d {
    op: DgOperator,
    mesh: Mesh1D,
    problem: Problem,
    entropy_flux: Option<EntropyFlux>,
}

impl Solver1d {
    pub fn new(op: DgOperator, mesh: Mesh1D, problem: Problem) -> Self {
        Solver1d { op, mesh, problem, entropy_flux: None }
    }

    /// Adds the zero-sum entropy correction to every element. Only scalar
    /// Burgers has a default entropy flux; other laws must pass one.
    pub fn with_entropy_correction(mut self, flux: Option<EntropyFlux>) -> Result<Self> {
        if self.problem.n_components() != 1 {
            return Err(Error::Configuration(
                "entropy correction is only implemented for scalar laws".into(),
            ));
        }
        let flux = match (flux, self.problem.law()) {
            (Some(f), _) => f,
            (None, Law::Burgers) => burgers_entropy_flux as EntropyFlux,
            (None, law) => {
                return Err(Error::Configuration(format!(
                    "no default entropy flux for {law:?}"
                )))
            }
        };
        self.entropy_flux = Some(flux);
        Ok(self)
    }

    pub fn operator(&self) -> &DgOperator {
        &self.op
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn zeros(&self) -> ModalState {
        ModalState::zeros(self.mesh.n_elements(), self.problem.n_components(), self.op.n_modes())
    }

    /// Least-squares projection of `f` sampled at the physical nodes.
    pub fn project(&self, f: impl Fn(f64, &mut [f64])) -> ModalState {
        let nc = self.problem.n_components();
        let nn = self.op.n_nodes();
        let mut state = self.zeros();
        let mut point = vec![0.0; nc];
        let mut nodal = vec![vec![0.0; nn]; nc];
        for e in 0..self.mesh.n_elements() {
            for (n, &xi) in self.op.nodes().iter().enumerate() {
                f(self.mesh.map(e, xi), &mut point);
                for c in 0..nc {
                    nodal[c][n] = point[c];
                }
            }
            for (c, values) in nodal.iter().enumerate() {
                self.op.project_into(values, state.modes_mut(e, c));
            }
        }
        state
    }

    pub fn initial_state(&self) -> ModalState {
        self.project(|x, out| self.problem.initial(x, out))
    }

    /// Fastest characteristic speed over all nodal values.
    pub fn max_speed(&self, state: &ModalState) -> f64 {
        let nc = self.problem.n_components();
        let nn = self.op.n_nodes();
        let law = self.problem.law();
        let mut nodal = vec![vec![0.0; nn]; nc];
        let mut point = vec![0.0; nc];
        let mut lambda: f64 = 0.0;
        for e in 0..self.mesh.n_elements() {
            for (c, values) in nodal.iter_mut().enumerate() {
                self.op.nodal_into(state.modes(e, c), values);
            }
            for n in 0..nn {
                for c in 0..nc {
                    point[c] = nodal[c][n];
                }
                lambda = lambda.max(law.max_speed(&point));
            }
        }
        lambda
    }

    /// Semidiscrete time derivative with periodic coupling.
    pub fn rhs(&self, t: f64, state: &ModalState) -> Result<ModalState> {
        let n_el = self.mesh.n_elements();
        let nc = self.problem.n_components();
        let nn = self.op.n_nodes();
        let nm = self.op.n_modes();
        if state.shape() != (n_el, nc, nm) {
            return Err(Error::invalid(format!(
                "state shape {:?}, expected {:?}",
                state.shape(),
                (n_el, nc, nm)
            )));
        }
        if let Some(e) = state.first_non_finite() {
            return Err(Error::Divergence { element: e, time: t, context: "modal state".into() });
        }
        let law = self.problem.law();
        let kind = self.problem.flux_kind();

        // Traces: [element][component] at the left and right face.
        let mut left = vec![0.0; n_el * nc];
        let mut right = vec![0.0; n_el * nc];
        for e in 0..n_el {
            for c in 0..nc {
                let u = state.modes(e, c);
                left[e * nc + c] = self.op.left_value(u);
                right[e * nc + c] = self.op.right_value(u);
            }
        }
        // Interface j sits left of element j; interface n_el wraps to 0.
        let mut face_flux = vec![0.0; n_el * nc];
        for j in 0..n_el {
            let prev = (j + n_el - 1) % n_el;
            let (um, up) = (&right[prev * nc..prev * nc + nc], &left[j * nc..j * nc + nc]);
            law.numerical_flux(kind, um, up, &mut face_flux[j * nc..j * nc + nc]);
        }
        check_finite(&face_flux, At { element: 0, time: t }, "interface flux")?;

        let mut out = self.zeros();
        let mut nodal = vec![vec![0.0; nn]; nc];
        let mut flux_nodal = vec![vec![0.0; nn]; nc];
        let mut point = vec![0.0; nc];
        let mut point_flux = vec![0.0; nc];
        let mut flux_modal = vec![0.0; nm];
        for e in 0..n_el {
            let dx = self.mesh.length(e);
            let next = (e + 1) % n_el;
            for c in 0..nc {
                self.op.nodal_into(state.modes(e, c), &mut nodal[c]);
            }
            for n in 0..nn {
                for c in 0..nc {
                    point[c] = nodal[c][n];
                }
                law.flux(&point, &mut point_flux);
                for c in 0..nc {
                    flux_nodal[c][n] = point_flux[c];
                }
            }
            for c in 0..nc {
                self.op.project_into(&flux_nodal[c], &mut flux_modal);
                let (f_left, f_right) = (face_flux[e * nc + c], face_flux[next * nc + c]);
                self.op
                    .rhs_from_flux_modes(dx, &flux_modal, f_left, f_right, out.modes_mut(e, c));
            }
            if let Some(g) = self.entropy_flux {
                let prev = (e + n_el - 1) % n_el;
                let g_left = g(right[prev], left[e]);
                let g_right = g(right[e], left[next]);
                let u = state.modes(e, 0);
                let r = self.op.entropy_correction(dx, u, out.modes(e, 0), (g_left, g_right));
                out.modes_mut(e, 0).iter_mut().zip(&r).for_each(|(a, b)| *a += b);
            }
            check_finite(out.element(e), At { element: e, time: t }, "element rhs")?;
        }
        Ok(out)
    }

    /// Integrates from the projected initial data to `config.t_end`.
    pub fn run<O>(&self, config: &TimeConfig, observer: O) -> Result<Integration<ModalState>>
    where
        O: FnMut(f64, &ModalState),
    {
        self.run_from(self.initial_state(), config, observer)
    }

    pub fn run_from<O>(
        &self,
        u0: ModalState,
        config: &TimeConfig,
        observer: O,
    ) -> Result<Integration<ModalState>>
    where
        O: FnMut(f64, &ModalState),
    {
        if config.n_elements != self.mesh.n_elements() || config.degree != self.op.degree() {
            return Err(Error::invalid(
                "time configuration does not match the discretization",
            ));
        }
        integrate(|t, u| self.rhs(t, u), u0, config, |u| self.max_speed(u), observer)
    }

    /// A [`TimeConfig`] matching this discretization.
    pub fn time_config(&self, t_end: f64) -> TimeConfig {
        TimeConfig::new(t_end, self.mesh.n_elements(), self.op.degree())
    }
}
