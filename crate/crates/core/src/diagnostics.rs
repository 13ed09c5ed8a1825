//! Mass, energy, L2 errors, convergence rates and convergence studies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::NumericalFluxKind;
use crate::nodes::{Mesh1D, NodeKind};
use crate::operator::{dot, DgOperator, RulePolicy};
use crate::problems::advection2d::advection2d_reference;
use crate::problems::ProblemKind;
use crate::quadrature::gauss_legendre_rule;
use crate::report::{csv_line, fmt_f64};
use crate::solver::{NRule, Setup, Solver1d};
use crate::state::ModalState;
use crate::time::{integrate, TimeConfig, DEFAULT_CFL};

/// `c_k = <phi_k, 1>_w*`, the reference-element integrals of the basis.
pub fn basis_integrals(op: &DgOperator) -> Vec<f64> {
    op.basis()
        .nodal_values()
        .iter()
        .map(|phi| dot(phi, op.weights()))
        .collect()
}

/// `sum_i (dx_i / 2) <u^i, 1>_w*` per component.
pub fn mass(state: &ModalState, mesh: &Mesh1D, op: &DgOperator) -> Vec<f64> {
    let c = basis_integrals(op);
    (0..state.n_components())
        .map(|comp| {
            (0..state.n_elements())
                .map(|e| 0.5 * mesh.length(e) * dot(state.modes(e, comp), &c))
                .sum()
        })
        .collect()
}

/// `sum_i (dx_i / 2) <u^i, u^i>_w*` per component; by orthonormality the
/// inner product is the sum of squared modes.
pub fn energy(state: &ModalState, mesh: &Mesh1D, _op: &DgOperator) -> Vec<f64> {
    (0..state.n_components())
        .map(|comp| {
            (0..state.n_elements())
                .map(|e| {
                    let u = state.modes(e, comp);
                    0.5 * mesh.length(e) * dot(u, u)
                })
                .sum()
        })
        .collect()
}

/// Gauss-Legendre points per element used for error norms.
pub fn error_quadrature_points(degree: usize) -> usize {
    2 * degree + 10
}

/// L2 error per component against `reference(x, out)`.
pub fn l2_error_with(
    state: &ModalState,
    op: &DgOperator,
    mesh: &Mesh1D,
    reference: impl Fn(f64, &mut [f64]) -> Result<()>,
    points: usize,
) -> Result<Vec<f64>> {
    let rule = gauss_legendre_rule(points)?;
    let nc = state.n_components();
    let mut sums = vec![0.0; nc];
    let mut exact = vec![0.0; nc];
    for e in 0..state.n_elements() {
        let half = 0.5 * mesh.length(e);
        for (&xi, &w) in rule.nodes().points().iter().zip(rule.weights()) {
            reference(mesh.map(e, xi), &mut exact)?;
            for c in 0..nc {
                let d = op.reconstruct(state.modes(e, c), xi) - exact[c];
                sums[c] += half * w * d * d;
            }
        }
    }
    Ok(sums.into_iter().map(f64::sqrt).collect())
}

/// L2 error per component against the problem's reference solution at `t`.
pub fn l2_error(state: &ModalState, solver: &Solver1d, t: f64) -> Result<Vec<f64>> {
    let reference = solver.problem().reference_at(t)?;
    l2_error_with(
        state,
        solver.operator(),
        solver.mesh(),
        |x, out| reference.eval(x, out),
        error_quadrature_points(solver.operator().degree()),
    )
}

/// Least-squares fit of `y = C n^-s` on `(log n, log y)`; returns `(C, s)`.
pub fn eoc_fit(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 2 {
        return Err(Error::invalid("EOC fit needs at least two points"));
    }
    if let Some((n, y)) = pairs.iter().find(|(n, y)| !(*n > 0.0) || !(*y > 0.0) || !y.is_finite()) {
        return Err(Error::invalid(format!(
            "EOC fit needs positive finite data, got ({n}, {y})"
        )));
    }
    let m = pairs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(n, y)| (n.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("EOC fit needs at least two distinct resolutions"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(((my - slope * mx).exp(), -slope))
}

/// Settings of a time-dependent run besides the discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub cfl: f64,
    pub freeze_lambda: bool,
    pub observer_stride: usize,
}

impl RunOptions {
    pub fn new(t_end: f64) -> Self {
        RunOptions { t_end, cfl: DEFAULT_CFL, freeze_lambda: false, observer_stride: 1 }
    }

    fn time_config(&self, setup: &Setup) -> TimeConfig {
        TimeConfig {
            cfl: self.cfl,
            t_end: self.t_end,
            n_elements: setup.n_elements,
            degree: setup.degree,
            freeze_lambda: self.freeze_lambda,
            observer_stride: self.observer_stride,
        }
    }
}

/// Trace and final errors of one run. Mass and energy are summed over
/// components.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub setup: Setup,
    pub options: RunOptions,
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    /// Final L2 error per component.
    pub errors: Vec<f64>,
    pub steps: usize,
}

impl RunRecord {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,mass,energy\n");
        for ((t, m), e) in self.times.iter().zip(&self.mass).zip(&self.energy) {
            out.push_str(&csv_line([fmt_f64(*t), fmt_f64(*m), fmt_f64(*e)]));
            out.push('\n');
        }
        out
    }

    /// `|mass(end) - mass(0)| / (1 + |mass(0)|)`
    pub fn relative_mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        (self.mass[self.mass.len() - 1] - m0).abs() / (1.0 + m0.abs())
    }

    /// Largest increase of the energy between consecutive samples.
    pub fn max_energy_increase(&self) -> f64 {
        self.energy
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs one configuration, 1D or 2D, recording mass and energy at every
/// observer sample and the final L2 error.
pub fn run(setup: &Setup, options: &RunOptions) -> Result<RunRecord> {
    let cfg = options.time_config(setup);
    let mut times = Vec::new();
    let mut masses = Vec::new();
    let mut energies = Vec::new();
    let (steps, errors) = if setup.problem.is_2d() {
        let solver = setup.solver_2d()?;
        let u0 = solver.project(|x, y| advection2d_reference(0.0, x, y));
        let lambda = solver.max_speed();
        let out = integrate(
            |t, u| solver.rhs(t, u),
            u0,
            &cfg,
            |_| lambda,
            |t, u| {
                let (m, e) = solver.mass_energy(u);
                times.push(t);
                masses.push(m);
                energies.push(e);
            },
        )?;
        let t_end = out.t;
        let err = solver.l2_error(
            &out.state,
            |x, y| advection2d_reference(t_end, x, y),
            error_quadrature_points(setup.degree),
        )?;
        (out.steps, vec![err])
    } else {
        let solver = setup.solver()?;
        let out = solver.run(&cfg, |t, u| {
            times.push(t);
            masses.push(mass(u, solver.mesh(), solver.operator()).iter().sum());
            energies.push(energy(u, solver.mesh(), solver.operator()).iter().sum());
        })?;
        (out.steps, l2_error(&out.state, &solver, out.t)?)
    };
    Ok(RunRecord {
        setup: setup.clone(),
        options: options.clone(),
        times,
        mass: masses,
        energy: energies,
        errors,
        steps,
    })
}

/// One method column of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StudyColumn {
    Dgsem,
    Dgdls(NRule),
}

impl StudyColumn {
    /// DGSEM followed by DGDLS with `N = K, 2K, 4K`.
    pub fn standard() -> Vec<StudyColumn> {
        vec![
            StudyColumn::Dgsem,
            StudyColumn::Dgdls(NRule::TimesK(1)),
            StudyColumn::Dgdls(NRule::TimesK(2)),
            StudyColumn::Dgdls(NRule::TimesK(4)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub problem: ProblemKind,
    pub degrees: Vec<usize>,
    pub elements: Vec<usize>,
    pub columns: Vec<StudyColumn>,
    pub nodes: NodeKind,
    pub seed: u64,
    pub flux: NumericalFluxKind,
    pub policy: RulePolicy,
    pub entropy_correction: bool,
    pub options: RunOptions,
}

impl StudySpec {
    /// Standard study layout: `K = 1..4`, `I = 5, 10, 20, 40`.
    pub fn standard(problem: ProblemKind, nodes: NodeKind) -> Self {
        StudySpec {
            problem,
            degrees: vec![1, 2, 3, 4],
            elements: vec![5, 10, 20, 40],
            columns: StudyColumn::standard(),
            nodes,
            seed: 1,
            flux: problem.default_flux(),
            policy: crate::solver::DEFAULT_POLICY,
            entropy_correction: false,
            options: RunOptions::new(problem.default_t_end()),
        }
    }

    fn setup(&self, column: StudyColumn, degree: usize, n_elements: usize) -> Setup {
        let mut setup = match column {
            StudyColumn::Dgsem => Setup::dgsem(self.problem, degree, n_elements),
            StudyColumn::Dgdls(rule) => Setup::new(self.problem, degree, n_elements, rule)
                .with_nodes(self.nodes, self.seed),
        };
        setup.flux = self.flux;
        setup.policy = self.policy;
        setup.entropy_correction = self.entropy_correction;
        setup
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub column: StudyColumn,
    pub degree: usize,
    pub n_elements: usize,
    pub nodes: String,
    pub n: usize,
    /// Component-0 L2 error; `NaN` if the run diverged.
    pub error: f64,
    /// Fit over the finite errors of this `(column, K)` group; `NaN` if
    /// fewer than two are finite.
    pub eoc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub spec: StudySpec,
    pub rows: Vec<StudyRow>,
}

/// Runs every `(column, K, I)` cell, in parallel; divergent cells become
/// `NaN` and configuration errors abort the study. Rows are ordered by
/// column, then `K`, then `I`.
pub fn run_convergence_study(spec: &StudySpec) -> Result<StudyTable> {
    let mut cells = Vec::new();
    for &column in &spec.columns {
        for &k in &spec.degrees {
            for &i in &spec.elements {
                cells.push((column, k, i));
            }
        }
    }
    let results: Vec<Result<StudyRow>> = cells
        .par_iter()
        .map(|&(column, k, i)| {
            let setup = spec.setup(column, k, i);
            let error = match run(&setup, &spec.options) {
                Ok(record) => record.errors[0],
                Err(e) if e.is_divergence() => f64::NAN,
                Err(e) => return Err(e),
            };
            Ok(StudyRow {
                column,
                degree: k,
                n_elements: i,
                nodes: setup.nodes_label(),
                n: setup.n(),
                error,
                eoc: f64::NAN,
            })
        })
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    for group in rows.chunks_mut(spec.elements.len().max(1)) {
        let pairs: Vec<(f64, f64)> = group
            .iter()
            .filter(|r| r.error.is_finite() && r.error > 0.0)
            .map(|r| (r.n_elements as f64, r.error))
            .collect();
        let eoc = if pairs.len() >= 2 {
            eoc_fit(&pairs).map(|(_, s)| s).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        group.iter_mut().for_each(|r| r.eoc = eoc);
    }
    Ok(StudyTable { spec: spec.clone(), rows })
}

impl StudyTable {
    /// Error of one cell, if present.
    pub fn error(&self, column: StudyColumn, degree: usize, n_elements: usize) -> Option<f64> {
        self.row(column, degree, n_elements).map(|r| r.error)
    }

    pub fn row(&self, column: StudyColumn, degree: usize, n_elements: usize) -> Option<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.column == column && r.degree == degree && r.n_elements == n_elements)
    }

    /// CSV with the resolved study configuration as leading `#` lines.
    pub fn to_csv(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str("problem,nodes,K,I,N,error,eoc\n");
        for r in &self.rows {
            out.push_str(&csv_line([
                self.spec.problem.name().to_string(),
                r.nodes.clone(),
                r.degree.to_string(),
                r.n_elements.to_string(),
                r.n.to_string(),
                fmt_f64(r.error),
                fmt_f64(r.eoc),
            ]));
            out.push('\n');
        }
        out
    }
}
