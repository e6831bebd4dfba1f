//! Closed-form incoherent model of the QD-cavity transfer: effective
//! transfer rate, single-photon efficiency, generalized Purcell factor,
//! quality factors, optimality conditions, and the two-variable rate
//! equations.
//!
//! With Γ = P + γ + γ* + κ the adiabatic elimination of the QD-cavity
//! coherence gives
//!
//! ```text
//! R  = (4g²/Γ) · 1 / (1 + (2δ/Γ)²)
//! E  = κ_out/κ · R(1/κ + 1/γ) / (1 + R(1/κ + 1/γ))
//! F* = 4g² / (γ (κ+γ+γ*)) · 1 / (1 + (2δ/(κ+γ+γ*))²)
//! ```
//!
//! The Purcell factor carries no pump term, so F* = R/γ holds exactly only
//! for P = 0. The exact maximizer of R over Γ at fixed δ ≠ 0 is Γ = 2|δ|
//! with R_max = g²/|δ|; the commonly quoted condition Γ ≈ |δ| is reported
//! alongside for comparison.

use crate::{Error, Result, SystemParams};

/// Effective transfer rate R in μeV.
pub fn effective_rate(p: &SystemParams) -> f64 {
    let linewidth = p.total_linewidth();
    let lorentz = 1.0 + (2.0 * p.delta / linewidth).powi(2);
    4.0 * p.g * p.g / linewidth / lorentz
}

/// Single-photon source efficiency in [0, 1).
///
/// Zero iff R = 0 or κ_out = 0.
pub fn efficiency(p: &SystemParams) -> f64 {
    let kappa = p.kappa();
    let x = effective_rate(p) * (1.0 / kappa + 1.0 / p.gamma);
    p.kappa_out / kappa * x / (1.0 + x)
}

/// Generalized Purcell factor F* (dimensionless).
///
/// Carries no pump term; for P = 0 it equals R/γ exactly.
pub fn purcell_factor(p: &SystemParams) -> f64 {
    let linewidth = p.gamma + p.gamma_star + p.kappa();
    let lorentz = 1.0 + (2.0 * p.delta / linewidth).powi(2);
    4.0 * p.g * p.g / (p.gamma * linewidth) / lorentz
}

/// Optimality data for R over the linewidth at fixed detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptimum {
    /// Dephasing rate that realizes the optimum, γ*_opt = 2|δ| − κ − γ − P;
    /// `None` when the optimum would need a negative γ*.
    pub gamma_star_opt: Option<f64>,
    /// Exact maximum R = g²/|δ|, attained at Γ = 2|δ|.
    pub r_max_exact: f64,
    /// R evaluated at the approximate matching condition Γ = |δ|
    /// (equals 4g²/(5|δ|)), reported alongside the exact optimum.
    pub r_max_approx: f64,
}

/// Maximize R over the linewidth Γ at fixed δ ≠ 0.
///
/// R(Γ) = 4g²Γ/(Γ² + 4δ²) peaks at Γ = 2|δ|, so the optimal dephasing is
/// γ*_opt = 2|δ| − κ − γ − P and the maximum is g²/|δ|. At δ = 0 the rate
/// is monotone decreasing in Γ and no interior optimum exists.
pub fn optimal_gamma_star(p: &SystemParams) -> Result<RateOptimum> {
    if p.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let abs_delta = p.delta.abs();
    let gamma_star_opt = 2.0 * abs_delta - p.kappa() - p.gamma - p.pump;
    Ok(RateOptimum {
        gamma_star_opt: (gamma_star_opt >= 0.0).then_some(gamma_star_opt),
        r_max_exact: p.g * p.g / abs_delta,
        r_max_approx: 4.0 * p.g * p.g / (5.0 * abs_delta),
    })
}

/// Maximum of the Purcell factor over γ* at fixed δ ≠ 0: g²/(γ|δ|).
pub fn purcell_max(p: &SystemParams) -> Result<f64> {
    if p.delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok(p.g * p.g / (p.gamma * p.delta.abs()))
}

/// Emitter, cavity and combined quality factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityFactors {
    /// Q_QD = ω_QD / (γ + γ*).
    pub q_qd: f64,
    /// Q_c = ω_c / κ.
    pub q_c: f64,
    /// 1/Q_eff = 1/Q_QD + 1/Q_c.
    pub q_eff: f64,
}

/// Quality factors for transition/cavity energies given in μeV (both > 0).
pub fn quality_factors(p: &SystemParams, omega_qd_uev: f64, omega_c_uev: f64) -> QualityFactors {
    debug_assert!(omega_qd_uev > 0.0 && omega_c_uev > 0.0);
    let q_qd = omega_qd_uev / (p.gamma + p.gamma_star);
    let q_c = omega_c_uev / p.kappa();
    QualityFactors {
        q_qd,
        q_c,
        q_eff: 1.0 / (1.0 / q_qd + 1.0 / q_c),
    }
}

/// Solution of the two-variable rate equations on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSolution {
    /// Time grid in ħ/μeV, starting at 0.
    pub times: Vec<f64>,
    /// QD excited population ⟨σ₊σ₋⟩ series.
    pub n_e: Vec<f64>,
    /// Cavity photon number ⟨a†a⟩ series.
    pub n_ph: Vec<f64>,
    /// The two decay constants (positive, ascending) of the linear system,
    /// in μeV.
    pub eigenrates: [f64; 2],
}

/// Populations (n_e, n_ph) at a single time t ≥ 0 (units ħ/μeV).
///
/// Closed form for
///
/// ```text
/// d n_e /dt = R n_ph − (γ+R) n_e
/// d n_ph/dt = R n_e  − (κ+R) n_ph
/// ```
///
/// via the symmetric 2×2 propagator
/// `exp(At) = e^{-st} [cosh(ωt) I + sinh(ωt)/ω (A + sI)]` with
/// s = (γ+κ)/2 + R and ω² = ((κ−γ)/2)² + R². The ω → 0 limit (degenerate
/// decay constants) is taken through the confluent expansion of sinh(ωt)/ω,
/// not treated as an error. Stated for the unpumped case only.
pub fn rate_equation_at(p: &SystemParams, n_e0: f64, n_ph0: f64, t: f64) -> Result<(f64, f64)> {
    check_rate_equation_inputs(p, n_e0, n_ph0)?;
    if t < 0.0 || !t.is_finite() {
        return Err(Error::TimeGrid {
            reason: "must be non-negative",
        });
    }
    Ok(propagate(p, effective_rate(p), n_e0, n_ph0, t))
}

/// Solve the rate equations on a strictly increasing grid starting at 0.
pub fn rate_equation_solution(
    p: &SystemParams,
    n_e0: f64,
    n_ph0: f64,
    t_grid: &[f64],
) -> Result<RateSolution> {
    check_rate_equation_inputs(p, n_e0, n_ph0)?;
    check_grid(t_grid)?;
    let rate = effective_rate(p);
    let (s, omega) = sym_invariants(p, rate);
    let mut n_e = Vec::with_capacity(t_grid.len());
    let mut n_ph = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (e, ph) = propagate(p, rate, n_e0, n_ph0, t);
        n_e.push(e);
        n_ph.push(ph);
    }
    Ok(RateSolution {
        times: t_grid.to_vec(),
        n_e,
        n_ph,
        eigenrates: [s - omega, s + omega],
    })
}

fn check_rate_equation_inputs(p: &SystemParams, n_e0: f64, n_ph0: f64) -> Result<()> {
    if p.pump != 0.0 {
        return Err(Error::PumpedRateEquations { pump: p.pump });
    }
    if !(0.0..=1.0).contains(&n_e0) {
        return Err(Error::InvalidParam {
            field: "n_e0",
            reason: "must lie in [0, 1]",
        });
    }
    if n_ph0 < 0.0 || n_ph0.is_nan() {
        return Err(Error::InvalidParam {
            field: "n_ph0",
            reason: "must be non-negative",
        });
    }
    Ok(())
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::TimeGrid {
            reason: "must not be empty",
        });
    }
    if t_grid[0] != 0.0 {
        return Err(Error::TimeGrid {
            reason: "must start at 0",
        });
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::TimeGrid {
            reason: "must be finite and strictly increasing",
        });
    }
    Ok(())
}

/// (s, ω) of the symmetric rate matrix; both decay constants are s ∓ ω.
fn sym_invariants(p: &SystemParams, rate: f64) -> (f64, f64) {
    let a = p.gamma + rate;
    let b = p.kappa() + rate;
    let s = 0.5 * (a + b);
    let m = 0.5 * (b - a);
    (s, m.hypot(rate))
}

fn propagate(p: &SystemParams, rate: f64, n_e0: f64, n_ph0: f64, t: f64) -> (f64, f64) {
    let (s, omega) = sym_invariants(p, rate);
    let m = 0.5 * (p.kappa() - p.gamma);
    // (A + sI) x0 with A = [[-(γ+R), R], [R, -(κ+R)]].
    let bx_e = m * n_e0 + rate * n_ph0;
    let bx_ph = rate * n_e0 - m * n_ph0;
    // e^{-st} cosh(ωt) and e^{-st} sinh(ωt)/ω, computed from the two
    // non-positive exponents (ω < s always, since det A > 0).
    let ep = ((omega - s) * t).exp();
    let em = (-(omega + s) * t).exp();
    let ch = 0.5 * (ep + em);
    let sh_over_omega = if omega * t < 1e-5 {
        let x = omega * t;
        (-s * t).exp() * t * (1.0 + x * x / 6.0 + x.powi(4) / 120.0)
    } else {
        0.5 * (ep - em) / omega
    };
    (
        ch * n_e0 + sh_over_omega * bx_e,
        ch * n_ph0 + sh_over_omega * bx_ph,
    )
}
