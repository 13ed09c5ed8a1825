//! Interface fluxes for the benchmark conservation laws.

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumericalFluxKind {
    FullUpwind,
    LocalLaxFriedrichs,
    WaveUpwind,
}

impl NumericalFluxKind {
    pub fn name(&self) -> &'static str {
        match self {
            NumericalFluxKind::FullUpwind => "upwind",
            NumericalFluxKind::LocalLaxFriedrichs => "llf",
            NumericalFluxKind::WaveUpwind => "wave-upwind",
        }
    }
}

impl std::str::FromStr for NumericalFluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "upwind" | "full-upwind" | "full_upwind" => Ok(NumericalFluxKind::FullUpwind),
            "llf" | "local-lax-friedrichs" | "rusanov" => Ok(NumericalFluxKind::LocalLaxFriedrichs),
            "wave-upwind" | "wave_upwind" | "wave" => Ok(NumericalFluxKind::WaveUpwind),
            other => Err(Error::invalid(format!("unknown numerical flux '{other}'"))),
        }
    }
}

impl std::fmt::Display for NumericalFluxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full upwind flux for `f(u) = u`: take the left state.
#[inline]
pub fn flux_full_upwind(u_minus: f64, _u_plus: f64) -> f64 {
    u_minus
}

/// Local Lax-Friedrichs flux with `lambda = max(|f'(u-)|, |f'(u+)|)`.
#[inline]
pub fn flux_llf(
    u_minus: f64,
    u_plus: f64,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
) -> f64 {
    let lambda = f_prime(u_minus).abs().max(f_prime(u_plus).abs());
    0.5 * (f(u_minus) + f(u_plus)) - 0.5 * lambda * (u_plus - u_minus)
}

/// LLF for Burgers, `f(u) = u^2 / 2`, `lambda = max(|u-|, |u+|)`.
#[inline]
pub fn flux_llf_burgers(u_minus: f64, u_plus: f64) -> f64 {
    flux_llf(u_minus, u_plus, |u| 0.5 * u * u, |u| u)
}

/// Upwind flux for the acoustic system `u_t + c v_x = 0`, `v_t + c u_x = 0`.
#[inline]
pub fn flux_wave_upwind(u_minus: f64, u_plus: f64, v_minus: f64, v_plus: f64, c: f64) -> [f64; 2] {
    [
        0.5 * c * ((v_minus + v_plus) - (u_plus - u_minus)),
        0.5 * c * ((u_minus + u_plus) - (v_plus - v_minus)),
    ]
}

/// Entropy flux for the square entropy of Burgers paired with the
/// entropy-conservative two-point flux `(a^2 + ab + b^2) / 6`.
///
/// With entropy variable `v = u` and potential `psi(u) = u^3 / 6` this is
/// `{v} f* - {psi}`, consistent with `G(u) = u^3 / 3`.
pub fn burgers_entropy_flux(u_minus: f64, u_plus: f64) -> f64 {
    let f_ec = (u_minus * u_minus + u_minus * u_plus + u_plus * u_plus) / 6.0;
    let mean_v = 0.5 * (u_minus + u_plus);
    let mean_psi = (u_minus.powi(3) + u_plus.powi(3)) / 12.0;
    mean_v * f_ec - mean_psi
}
