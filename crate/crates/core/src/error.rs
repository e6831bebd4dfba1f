//! Error type shared by all simulation modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter bundle or geometry field violates its invariant.
    #[error("{field} {reason}")]
    InvalidParam {
        field: &'static str,
        reason: &'static str,
    },

    /// Internal cavity loss exceeds the total loss for this geometry.
    #[error(
        "unphysical geometry: internal loss {kappa_in:.6} ueV exceeds total loss {kappa:.6} ueV"
    )]
    UnphysicalGeometry { kappa_in: f64, kappa: f64 },

    /// Malformed dephasing table file.
    #[error("dephasing table (line {line}): {reason}")]
    TableFormat { line: usize, reason: String },

    /// Temperature outside the range covered by the dephasing table.
    #[error("temperature {t_kelvin} K outside table range [0, {t_max} K]")]
    TemperatureOutOfRange { t_kelvin: f64, t_max: f64 },

    /// The requested optimum does not exist at zero detuning.
    #[error("no interior optimum at zero detuning: the rate is monotone in the linewidth")]
    ZeroDetuning,

    /// The closed-form rate equations are only stated for the unpumped case.
    #[error("rate equations require pump = 0 (got {pump} ueV); use the lindblad module instead")]
    PumpedRateEquations { pump: f64 },

    /// Invalid time grid for a trajectory.
    #[error("time grid {reason}")]
    TimeGrid { reason: &'static str },

    /// A matrix failed the density-matrix invariants.
    #[error("not a density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    /// Adaptive integrator could not take a step at the requested tolerance.
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// Trace left the allowed band during integration.
    #[error("trace drift {drift:.3e} exceeds 1e-6 at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    /// The stationary equation has no unique normalized solution.
    #[error("steady state is singular or not unique: {reason}")]
    SingularSteadyState { reason: String },

    /// Decay-rate extraction could not find a usable fit window.
    #[error("decay fit: {reason}")]
    DecayFit { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
