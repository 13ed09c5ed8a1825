//! Explicit SSPRK(3,3) time stepping with `dt = C / (I (K + 1) lambda)`.

use crate::error::{Error, Result};
use crate::state::OdeState;

pub const DEFAULT_CFL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub cfl: f64,
    pub t_end: f64,
    /// Element count used in the step-size rule.
    pub n_elements: usize,
    /// Polynomial degree used in the step-size rule.
    pub degree: usize,
    /// Evaluate the propagation speed once at `t = 0` instead of every step.
    pub freeze_lambda: bool,
    /// Observers fire every `observer_stride` steps, plus at the start and end.
    pub observer_stride: usize,
}

impl TimeConfig {
    pub fn new(t_end: f64, n_elements: usize, degree: usize) -> Self {
        TimeConfig {
            cfl: DEFAULT_CFL,
            t_end,
            n_elements,
            degree,
            freeze_lambda: false,
            observer_stride: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) {
            return Err(Error::invalid(format!("CFL constant must be positive, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::invalid(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.n_elements == 0 {
            return Err(Error::invalid("step-size rule needs at least one element"));
        }
        Ok(())
    }
}

pub fn timestep_size(n_elements: usize, degree: usize, lambda: f64, cfl: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "propagation speed must be positive and finite, got {lambda}"
        )));
    }
    if n_elements == 0 || !(cfl > 0.0) {
        return Err(Error::invalid("step-size rule needs I >= 1 and C > 0"));
    }
    Ok(cfl / (n_elements as f64 * (degree + 1) as f64 * lambda))
}

/// One SSPRK(3,3) step. `rhs` receives the stage time.
pub fn ssprk33_step<S, F>(rhs: &mut F, t: f64, u: &S, dt: f64) -> Result<S>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
{
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let l0 = rhs(t, u)?;
    let u1 = u.lin_comb(1.0, &l0, dt);
    check_stage(&u1, t, 1)?;
    // Written as increments on u^n so a vanishing rhs leaves u^n bitwise intact:
    // u2 = 3/4 u + 1/4 (u1 + dt L1) = u + 1/4 (u1 - u + dt L1)
    let l1 = rhs(t + dt, &u1)?;
    let u2 = u.lin_comb(1.0, &u1.lin_comb(1.0, u, -1.0).lin_comb(0.25, &l1, 0.25 * dt), 1.0);
    check_stage(&u2, t, 2)?;
    // u^{n+1} = 1/3 u + 2/3 (u2 + dt L2) = u + 2/3 (u2 - u + dt L2)
    let l2 = rhs(t + 0.5 * dt, &u2)?;
    let next = u.lin_comb(
        1.0,
        &u2.lin_comb(1.0, u, -1.0).lin_comb(2.0 / 3.0, &l2, 2.0 / 3.0 * dt),
        1.0,
    );
    check_stage(&next, t, 3)?;
    Ok(next)
}

fn check_stage<S: OdeState>(u: &S, t: f64, stage: usize) -> Result<()> {
    match u.first_non_finite() {
        None => Ok(()),
        Some(element) => Err(Error::Divergence {
            element,
            time: t,
            context: format!("SSPRK stage {stage}"),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct Integration<S> {
    pub state: S,
    pub steps: usize,
    pub t: f64,
}

/// Steps from `t = 0` to `config.t_end`, clipping the last step so the end
/// time is hit exactly. `speed` returns the fastest propagation speed of a
/// state; `observer` sees `(t, state)` at the configured stride.
pub fn integrate<S, F, L, O>(
    mut rhs: F,
    u0: S,
    config: &TimeConfig,
    speed: L,
    mut observer: O,
) -> Result<Integration<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
    L: Fn(&S) -> f64,
    O: FnMut(f64, &S),
{
    config.validate()?;
    let stride = config.observer_stride.max(1);
    let mut u = u0;
    let mut t = 0.0;
    let mut steps = 0;
    observer(t, &u);
    let frozen = if config.freeze_lambda {
        Some(timestep_size(config.n_elements, config.degree, speed(&u), config.cfl)?)
    } else {
        None
    };
    while t < config.t_end {
        let dt_full = match frozen {
            Some(dt) => dt,
            None => timestep_size(config.n_elements, config.degree, speed(&u), config.cfl)?,
        };
        let remaining = config.t_end - t;
        let last = dt_full >= remaining * (1.0 - 1e-12);
        let dt = if last { remaining } else { dt_full };
        u = ssprk33_step(&mut rhs, t, &u, dt)?;
        steps += 1;
        t = if last { config.t_end } else { t + dt };
        if last || steps % stride == 0 {
            observer(t, &u);
        }
    }
    Ok(Integration { state: u, steps, t })
}
