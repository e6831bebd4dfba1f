//! Canonical parameter bundle, unit conventions and physical constants.
//!
//! Every rate and frequency in this crate is an energy in μeV with ħ = 1,
//! so a rate of `x` μeV decays as `exp(-x t)` when time is measured in
//! ħ/μeV (≈ 0.658 ps). Conversion to inverse picoseconds happens only at
//! the boundary where real-time output is wanted, via
//! [`rate_to_inverse_time`].

use crate::{Error, Result};

/// Fixed CODATA constants used by the geometry-to-rate conversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// ħ in μeV·ps.
    pub hbar_uev_ps: f64,
    /// ħ in J·s.
    pub hbar_j_s: f64,
    /// Speed of light in m/s.
    pub c_m_per_s: f64,
    /// Vacuum permittivity in F/m.
    pub epsilon0_f_per_m: f64,
    /// One Debye in C·m.
    pub debye_to_si: f64,
}

/// ħ in μeV·ps; equal to `HBAR_J_S / EV_J × 1e18` up to rounding.
pub const HBAR_UEV_PS: f64 = 658.2119569;

/// ħ in J·s (CODATA 2018, exact by definition of the SI second/metre).
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// One electron-volt in joules (exact).
pub const EV_J: f64 = 1.602_176_634e-19;

/// Speed of light in m/s (exact).
pub const C_M_PER_S: f64 = 299_792_458.0;

/// Vacuum permittivity in F/m (CODATA 2018).
pub const EPSILON0_F_PER_M: f64 = 8.854_187_812_8e-12;

/// One Debye in C·m (1e-21/c).
pub const DEBYE_TO_SI: f64 = 1e-21 / C_M_PER_S;

pub const CODATA: PhysicalConstants = PhysicalConstants {
    hbar_uev_ps: HBAR_UEV_PS,
    hbar_j_s: HBAR_J_S,
    c_m_per_s: C_M_PER_S,
    epsilon0_f_per_m: EPSILON0_F_PER_M,
    debye_to_si: DEBYE_TO_SI,
};

/// Rate-model parameter bundle. All fields are energies in μeV.
///
/// κ is never stored; it is always derived as `kappa_in + kappa_out` so the
/// internal/external split stays consistent with the efficiency formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// QD-cavity coupling strength g.
    pub g: f64,
    /// QD spontaneous emission rate γ.
    pub gamma: f64,
    /// Pure dephasing rate γ*.
    pub gamma_star: f64,
    /// Cavity internal loss rate κ_in.
    pub kappa_in: f64,
    /// Cavity external (output-mirror) loss rate κ_out.
    pub kappa_out: f64,
    /// Detuning δ = ω_QD − ω_c (signed).
    pub delta: f64,
    /// Incoherent pump rate P.
    pub pump: f64,
}

impl SystemParams {
    /// Check every invariant and return the bundle unchanged on success.
    ///
    /// The first violated invariant is reported by field name. Validation is
    /// idempotent: a bundle that passes once passes again unmodified.
    pub fn validate(self) -> Result<Self> {
        fn nonneg(field: &'static str, v: f64) -> Result<()> {
            // NaN fails the is_finite check.
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParam {
                    field,
                    reason: "must be finite and non-negative",
                });
            }
            Ok(())
        }
        nonneg("g", self.g)?;
        if self.gamma <= 0.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidParam {
                field: "gamma",
                reason: "must be positive",
            });
        }
        nonneg("gamma_star", self.gamma_star)?;
        nonneg("kappa_in", self.kappa_in)?;
        nonneg("kappa_out", self.kappa_out)?;
        if !self.delta.is_finite() {
            return Err(Error::InvalidParam {
                field: "delta",
                reason: "must be finite",
            });
        }
        nonneg("pump", self.pump)?;
        if self.kappa() <= 0.0 {
            return Err(Error::InvalidParam {
                field: "kappa",
                reason: "must be positive (kappa_in + kappa_out)",
            });
        }
        Ok(self)
    }

    /// Total cavity loss rate κ = κ_in + κ_out.
    pub fn kappa(&self) -> f64 {
        self.kappa_in + self.kappa_out
    }

    /// Total linewidth Γ = P + γ + γ* + κ entering the effective rate.
    pub fn total_linewidth(&self) -> f64 {
        self.pump + self.gamma + self.gamma_star + self.kappa()
    }
}

/// Convert an energy in μeV to a rate in ps⁻¹ (divide by ħ in μeV·ps).
pub fn rate_to_inverse_time(energy_uev: f64) -> f64 {
    energy_uev / HBAR_UEV_PS
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_params() -> SystemParams {
        SystemParams {
            g: 50.0,
            gamma: 1.0,
            gamma_star: 40.0,
            kappa_in: 5.0,
            kappa_out: 245.0,
            delta: 0.0,
            pump: 0.0,
        }
    }

    #[test]
    fn reference_bundle_validates() {
        let p = reference_params().validate().unwrap();
        assert_eq!(p, reference_params());
        assert_eq!(p.kappa(), 250.0);
    }

    #[test]
    fn zero_gamma_is_rejected_by_name() {
        let p = SystemParams {
            gamma: 0.0,
            ..reference_params()
        };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("gamma"), "{err}");
        assert!(err.contains("positive"), "{err}");
    }

    #[test]
    fn negative_kappa_in_is_rejected() {
        let p = SystemParams {
            kappa_in: -1.0,
            ..reference_params()
        };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("kappa_in"), "{err}");
    }

    #[test]
    fn zero_total_kappa_is_rejected() {
        let p = SystemParams {
            kappa_in: 0.0,
            kappa_out: 0.0,
            ..reference_params()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn validate_is_idempotent() {
        let p = reference_params().validate().unwrap();
        assert_eq!(p.validate().unwrap(), p);
    }

    #[test]
    fn hbar_consistency_between_unit_systems() {
        // 658.2119569 ueV*ps must agree with the J*s value through e.
        let derived = HBAR_J_S / EV_J * 1e6 * 1e12;
        assert_relative_eq!(HBAR_UEV_PS, derived, max_relative = 1e-6);
    }

    #[test]
    fn rate_conversion_fixed_points() {
        assert_eq!(rate_to_inverse_time(0.0), 0.0);
        assert_relative_eq!(rate_to_inverse_time(HBAR_UEV_PS), 1.0, epsilon = 1e-15);
        // 50 ueV / (658.2119569 ueV*ps), frozen from an independent evaluation.
        assert_relative_eq!(
            rate_to_inverse_time(50.0),
            0.07596337239980637,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rate_conversion_is_linear() {
        let xs = [0.0, 1e-6, 0.5, 3.7, 50.0, 658.2119569, 1.3e6];
        for &x in &xs {
            for &a in &[0.0, 0.25, 2.0, 1e3] {
                assert_relative_eq!(
                    rate_to_inverse_time(a * x),
                    a * rate_to_inverse_time(x),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn codata_bundle_matches_consts() {
        assert_eq!(CODATA.hbar_uev_ps, HBAR_UEV_PS);
        assert_eq!(CODATA.debye_to_si, DEBYE_TO_SI);
        assert_relative_eq!(
            CODATA.debye_to_si,
            3.33564095198152e-30,
            max_relative = 1e-12
        );
    }
}
