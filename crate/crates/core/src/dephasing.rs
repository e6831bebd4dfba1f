//! Temperature → pure-dephasing map γ*(T).
//!
//! The built-in table holds the measured InGaAs values the rate model is
//! calibrated to; alternative materials load from CSV. Lookups interpolate
//! linearly in (T, γ*) and, below the first sample, extrapolate linearly
//! through the (0 K, 0 meV) anchor — pure dephasing vanishes at zero
//! temperature. The regime change near 100 K is carried by the data kink
//! only; no phonon model is fitted.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Expected CSV header (temperatures in kelvin, rates in meV).
pub const CSV_HEADER: &str = "T_K,gamma_star_meV";

/// Monotone (T, γ*) sample set with a linear interpolation policy.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingTable {
    /// Samples as (kelvin, meV), strictly increasing in T.
    samples: Vec<(f64, f64)>,
    /// Extrapolate through (0 K, 0 meV) below the first sample.
    extrapolation_floor: bool,
}

impl DephasingTable {
    /// Build a table from (kelvin, meV) samples.
    ///
    /// Temperatures must be strictly increasing and non-negative, rates
    /// non-negative, with at least two samples. `line_offset` shifts error
    /// line numbers so CSV loads report file positions.
    fn from_samples(samples: Vec<(f64, f64)>, line_offset: usize) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TableFormat {
                line: line_offset + samples.len(),
                reason: "at least 2 samples required".into(),
            });
        }
        let mut prev_t = -f64::INFINITY;
        for (i, &(t, gs)) in samples.iter().enumerate() {
            let line = line_offset + i + 1;
            if !t.is_finite() || t < 0.0 {
                return Err(Error::TableFormat {
                    line,
                    reason: format!("temperature {t} must be finite and non-negative"),
                });
            }
            if t <= prev_t {
                return Err(Error::TableFormat {
                    line,
                    reason: "non-increasing temperature".into(),
                });
            }
            if !gs.is_finite() || gs < 0.0 {
                return Err(Error::TableFormat {
                    line,
                    reason: format!("gamma_star {gs} must be finite and non-negative"),
                });
            }
            prev_t = t;
        }
        Ok(Self {
            samples,
            extrapolation_floor: true,
        })
    }

    /// The measured InGaAs table: γ* = 0.04, 0.22, 3.0, 4.0, 6.0 meV at
    /// T = 50, 100, 150, 200, 300 K, with the zero-temperature anchor.
    pub fn builtin_ingaas() -> Self {
        Self::from_samples(
            vec![
                (50.0, 0.04),
                (100.0, 0.22),
                (150.0, 3.0),
                (200.0, 4.0),
                (300.0, 6.0),
            ],
            0,
        )
        .expect("built-in table is valid")
    }

    /// Pure dephasing rate γ*(T) in μeV by piecewise-linear interpolation.
    ///
    /// Valid for 0 ≤ T ≤ max sample temperature. Below the first sample the
    /// interpolant runs through (0 K, 0 meV) when the anchor is enabled.
    pub fn gamma_star_at(&self, t_kelvin: f64) -> Result<f64> {
        let t_max = self.t_max();
        if !t_kelvin.is_finite() || t_kelvin < 0.0 || t_kelvin > t_max {
            return Err(Error::TemperatureOutOfRange { t_kelvin, t_max });
        }
        let (t0, g0) = self.samples[0];
        let mev = if t_kelvin <= t0 {
            if self.extrapolation_floor {
                g0 * t_kelvin / t0
            } else if t_kelvin == t0 {
                g0
            } else {
                return Err(Error::TemperatureOutOfRange {
                    t_kelvin,
                    t_max: t0,
                });
            }
        } else {
            let hi = self
                .samples
                .iter()
                .position(|&(t, _)| t >= t_kelvin)
                .expect("t_kelvin <= t_max");
            let (ta, ga) = self.samples[hi - 1];
            let (tb, gb) = self.samples[hi];
            ga + (gb - ga) * (t_kelvin - ta) / (tb - ta)
        };
        Ok(mev * 1e3)
    }

    /// Largest temperature covered by the table, in kelvin.
    pub fn t_max(&self) -> f64 {
        self.samples.last().expect("non-empty").0
    }

    /// Smallest sampled temperature, in kelvin.
    pub fn t_min_sample(&self) -> f64 {
        self.samples[0].0
    }

    /// The (kelvin, meV) sample nodes.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Load a table from a CSV file with header `T_K,gamma_star_meV`.
    ///
    /// Rows must already be sorted by temperature; an unsorted file is an
    /// error, not silently resorted.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    /// Parse CSV text (see [`DephasingTable::load`]).
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::TableFormat {
            line: 1,
            reason: "empty file".into(),
        })?;
        if header.trim() != CSV_HEADER {
            return Err(Error::TableFormat {
                line: 1,
                reason: format!(
                    "expected header \"{CSV_HEADER}\", got \"{}\"",
                    header.trim()
                ),
            });
        }
        let mut samples = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            let mut fields = row.split(',');
            let parse = |s: Option<&str>, what: &str| -> Result<f64> {
                s.map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| Error::TableFormat {
                        line,
                        reason: format!("missing {what}"),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::TableFormat {
                        line,
                        reason: format!("bad {what}: {e}"),
                    })
            };
            let t = parse(fields.next(), "T_K")?;
            let gs = parse(fields.next(), "gamma_star_meV")?;
            if fields.next().is_some() {
                return Err(Error::TableFormat {
                    line,
                    reason: "expected exactly 2 fields".into(),
                });
            }
            samples.push((t, gs));
        }
        // Report structural violations at their file position: the first
        // sample sits on line 2 (after the header).
        Self::from_samples(samples, 1)
    }

    /// Render the table as CSV, newline-terminated, full f64 precision.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for &(t, gs) in &self.samples {
            let _ = writeln!(out, "{t},{gs}");
        }
        out
    }

    /// Write the table as CSV to `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}
