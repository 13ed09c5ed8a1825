//! Benchmark problems: physical fluxes, initial data and reference solutions.

mod burgers;
mod wave;

pub mod advection2d;

pub use burgers::{burgers_reference, burgers_u0, BurgersReference, BurgersSnapshot, BURGERS_BREAKING_TIME};
pub use wave::{wave_reference, wave_u0};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flux::{flux_full_upwind, flux_llf, flux_wave_upwind, NumericalFluxKind};

/// Reduces `x` into `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x - floor(x) can round up to exactly 1 for tiny negative x.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Scalar laws and the acoustic system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// `u_t + u_x = 0`
    LinearAdvection,
    /// `u_t + (u^2/2)_x = 0`
    Burgers,
    /// `u_t + c v_x = 0`, `v_t + c u_x = 0`
    Wave { c: f64 },
}

impl Law {
    pub fn n_components(&self) -> usize {
        match self {
            Law::Wave { .. } => 2,
            _ => 1,
        }
    }

    /// Pointwise physical flux; `u` and `out` hold one value per component.
    #[inline]
    pub fn flux(&self, u: &[f64], out: &mut [f64]) {
        match *self {
            Law::LinearAdvection => out[0] = u[0],
            Law::Burgers => out[0] = 0.5 * u[0] * u[0],
            Law::Wave { c } => {
                out[0] = c * u[1];
                out[1] = c * u[0];
            }
        }
    }

    /// Largest characteristic speed at a state.
    #[inline]
    pub fn max_speed(&self, u: &[f64]) -> f64 {
        match *self {
            Law::LinearAdvection => 1.0,
            Law::Burgers => u[0].abs(),
            Law::Wave { c } => c.abs(),
        }
    }

    /// Whether a numerical flux kind makes sense for this law.
    pub fn supports(&self, kind: NumericalFluxKind) -> bool {
        matches!(
            (self, kind),
            (Law::LinearAdvection, NumericalFluxKind::FullUpwind)
                | (Law::LinearAdvection, NumericalFluxKind::LocalLaxFriedrichs)
                | (Law::Burgers, NumericalFluxKind::LocalLaxFriedrichs)
                | (Law::Wave { .. }, NumericalFluxKind::WaveUpwind)
        )
    }

    /// Interface flux between the traces `um` (left) and `up` (right).
    #[inline]
    pub fn numerical_flux(&self, kind: NumericalFluxKind, um: &[f64], up: &[f64], out: &mut [f64]) {
        match (*self, kind) {
            (Law::Wave { c }, _) => {
                let f = flux_wave_upwind(um[0], up[0], um[1], up[1], c);
                out[..2].copy_from_slice(&f);
            }
            (Law::LinearAdvection, NumericalFluxKind::FullUpwind) => {
                out[0] = flux_full_upwind(um[0], up[0])
            }
            (Law::LinearAdvection, _) => out[0] = flux_llf(um[0], up[0], |u| u, |_| 1.0),
            (Law::Burgers, _) => out[0] = flux_llf(um[0], up[0], |u| 0.5 * u * u, |u| u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Advection,
    Burgers,
    Wave,
    Advection2d,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Advection,
        ProblemKind::Burgers,
        ProblemKind::Wave,
        ProblemKind::Advection2d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Advection => "advection",
            ProblemKind::Burgers => "burgers",
            ProblemKind::Wave => "wave",
            ProblemKind::Advection2d => "advection2d",
        }
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, ProblemKind::Advection2d)
    }

    /// Final time used when none is given.
    pub fn default_t_end(&self) -> f64 {
        match self {
            ProblemKind::Wave => 10.0,
            _ => 1.0,
        }
    }

    pub fn default_flux(&self) -> NumericalFluxKind {
        match self {
            ProblemKind::Advection | ProblemKind::Advection2d => NumericalFluxKind::FullUpwind,
            ProblemKind::Burgers => NumericalFluxKind::LocalLaxFriedrichs,
            ProblemKind::Wave => NumericalFluxKind::WaveUpwind,
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        ProblemKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown problem '{s}' (expected advection, burgers, wave or advection2d)"
                ))
            })
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A one-dimensional periodic benchmark on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Problem {
    kind: ProblemKind,
    law: Law,
    flux: NumericalFluxKind,
    burgers: Option<BurgersReference>,
}

impl Problem {
    pub fn new(kind: ProblemKind, flux: NumericalFluxKind) -> Result<Self> {
        let law = match kind {
            ProblemKind::Advection => Law::LinearAdvection,
            ProblemKind::Burgers => Law::Burgers,
            ProblemKind::Wave => Law::Wave { c: 1.0 },
            ProblemKind::Advection2d => {
                return Err(Error::invalid(
                    "advection2d is two-dimensional; use problems::advection2d",
                ))
            }
        };
        if !law.supports(flux) {
            return Err(Error::Configuration(format!(
                "numerical flux {flux} is not available for {kind}"
            )));
        }
        let burgers = (kind == ProblemKind::Burgers).then(BurgersReference::default);
        Ok(Problem { kind, law, flux, burgers })
    }

    /// The problem with the flux used in the benchmark suite.
    pub fn standard(kind: ProblemKind) -> Result<Self> {
        Self::new(kind, kind.default_flux())
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn law(&self) -> Law {
        self.law
    }

    pub fn flux_kind(&self) -> NumericalFluxKind {
        self.flux
    }

    pub fn n_components(&self) -> usize {
        self.law.n_components()
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// Initial data at `x`, one value per component.
    pub fn initial(&self, x: f64, out: &mut [f64]) {
        match self.kind {
            ProblemKind::Advection => out[0] = advection_u0(x),
            ProblemKind::Burgers => out[0] = burgers_u0(x),
            ProblemKind::Wave => {
                out[0] = wave_u0(x);
                out[1] = 0.0;
            }
            ProblemKind::Advection2d => unreachable!("rejected in Problem::new"),
        }
    }

    /// Reference solutions valid at a fixed time, so that costly set-up (the
    /// Burgers shock) is done once per evaluation sweep.
    pub fn reference_at(&self, t: f64) -> Result<Reference> {
        Ok(match self.kind {
            ProblemKind::Advection => Reference::Advection { t },
            ProblemKind::Burgers => {
                let reference = self.burgers.as_ref().expect("burgers reference");
                Reference::Burgers(reference.snapshot(t)?)
            }
            ProblemKind::Wave => Reference::Wave { t },
            ProblemKind::Advection2d => unreachable!("rejected in Problem::new"),
        })
    }
}

/// A reference solution frozen at one time.
#[derive(Debug, Clone)]
pub enum Reference {
    Advection { t: f64 },
    Burgers(BurgersSnapshot),
    Wave { t: f64 },
}

impl Reference {
    pub fn eval(&self, x: f64, out: &mut [f64]) -> Result<()> {
        match self {
            Reference::Advection { t } => out[0] = advection_reference(*t, x),
            Reference::Burgers(s) => out[0] = s.eval(x)?,
            Reference::Wave { t } => {
                let (u, v) = wave_reference(*t, x);
                out[0] = u;
                out[1] = v;
            }
        }
        Ok(())
    }
}

pub fn advection_u0(x: f64) -> f64 {
    (4.0 * PI * wrap_unit(x)).sin()
}

/// `u(t, x) = u0(x - t)` with periodic wrapping.
pub fn advection_reference(t: f64, x: f64) -> f64 {
    advection_u0(wrap_unit(x - t))
}
