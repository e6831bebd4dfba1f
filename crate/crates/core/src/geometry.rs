//! Cavity loss rates and QD-cavity coupling strength from geometry.
//!
//! The loss formulas are the good-cavity (Fabry–Pérot) expressions
//!
//! ```text
//! κ    = (π c d² / 8V) · (1 − √(R_l R_r)) / √(R_l R_r)
//! κ_in = (π c d² / 4V) · α
//! g    = √( M² ω_QD / (2 ε₀ ħ V) )
//! ```
//!
//! evaluated in SI and returned as ħ·rate in μeV. `d` is the cavity
//! diameter, `V` the mode volume, `R_l`/`R_r` the mirror reflectivities,
//! `α` the one-round-trip internal loss and `M` the transition dipole
//! moment.

use crate::params::{C_M_PER_S, DEBYE_TO_SI, EPSILON0_F_PER_M, EV_J, HBAR_J_S};
use crate::{Error, Result};

/// ħ in μeV·s for converting angular rates in s⁻¹ to energies in μeV;
/// derived through the J·s route so SI evaluations stay self-consistent.
const HBAR_UEV_S: f64 = HBAR_J_S / EV_J * 1e6;

/// Physical cavity description from which rates and g are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Cavity diameter in μm.
    pub d_um: f64,
    /// Cavity mode volume in μm³.
    pub v_um3: f64,
    /// Left mirror reflectivity in (0, 1].
    pub r_l: f64,
    /// Right mirror reflectivity in (0, 1].
    pub r_r: f64,
    /// One-round-trip internal loss coefficient α ≥ 0 (dimensionless).
    pub alpha: f64,
    /// QD transition dipole moment in Debye.
    pub m_debye: f64,
    /// QD transition energy ω_QD in eV.
    pub omega_qd_ev: f64,
}

impl CavityGeometry {
    /// Check the geometry invariants and return the value unchanged.
    ///
    /// Reflectivities below 0.5 are accepted but flagged on the warning
    /// channel: the κ formula is a good-cavity approximation there.
    pub fn validate(self) -> Result<Self> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidParam {
                    field,
                    reason: "must be finite and positive",
                });
            }
            Ok(())
        }
        positive("d_um", self.d_um)?;
        positive("V_um3", self.v_um3)?;
        for (field, r) in [("R_l", self.r_l), ("R_r", self.r_r)] {
            if r <= 0.0 || r > 1.0 || r.is_nan() {
                return Err(Error::InvalidParam {
                    field,
                    reason: "must lie in (0, 1]",
                });
            }
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(Error::InvalidParam {
                field: "alpha",
                reason: "must be finite and non-negative",
            });
        }
        positive("M_debye", self.m_debye)?;
        positive("omega_qd_eV", self.omega_qd_ev)?;
        if self.r_l < 0.5 || self.r_r < 0.5 {
            log::warn!(
                "mirror reflectivity below 0.5 (R_l={}, R_r={}): the loss formula is a \
                 good-cavity approximation and may be inaccurate",
                self.r_l,
                self.r_r
            );
        }
        Ok(self)
    }

    fn d_m(&self) -> f64 {
        self.d_um * 1e-6
    }

    fn v_m3(&self) -> f64 {
        self.v_um3 * 1e-18
    }
}

/// Total cavity loss ħκ in μeV. Perfect mirrors (R_l = R_r = 1) give 0.
pub fn total_loss(geom: &CavityGeometry) -> f64 {
    let srr = (geom.r_l * geom.r_r).sqrt();
    let kappa_si = std::f64::consts::PI * C_M_PER_S * geom.d_m().powi(2) / (8.0 * geom.v_m3())
        * (1.0 - srr)
        / srr;
    kappa_si * HBAR_UEV_S
}

/// Internal (absorption/side-leakage) loss ħκ_in in μeV, linear in α.
pub fn internal_loss(geom: &CavityGeometry) -> f64 {
    let kappa_si =
        std::f64::consts::PI * C_M_PER_S * geom.d_m().powi(2) / (4.0 * geom.v_m3()) * geom.alpha;
    kappa_si * HBAR_UEV_S
}

/// External (output-mirror) loss ħκ_out = ħκ − ħκ_in in μeV.
///
/// Errors when the internal loss exceeds the total loss; that configuration
/// is unphysical and clamping it would hide the mistake.
pub fn external_loss(geom: &CavityGeometry) -> Result<f64> {
    let kappa = total_loss(geom);
    let kappa_in = internal_loss(geom);
    if kappa_in > kappa {
        return Err(Error::UnphysicalGeometry { kappa_in, kappa });
    }
    Ok(kappa - kappa_in)
}

/// QD-cavity coupling ħg in μeV from the dipole moment, transition energy
/// and mode volume.
pub fn coupling_strength(geom: &CavityGeometry) -> f64 {
    let m_si = geom.m_debye * DEBYE_TO_SI;
    let omega_si = geom.omega_qd_ev * EV_J / HBAR_J_S;
    let g_si = (m_si * m_si * omega_si / (2.0 * EPSILON0_F_PER_M * HBAR_J_S * geom.v_m3())).sqrt();
    g_si * HBAR_UEV_S
}
