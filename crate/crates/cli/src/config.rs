//! Config-file parsing and resolution.
//!
//! Files are TOML with sections `[system]`, `[geometry]`, `[dephasing]`,
//! `[hilbert]`, `[sweep]`, `[variants]` and `[dynamics]`. Rate-type keys
//! come either as absolute μeV (`delta_ueV = 500.0`) or as multiples of
//! the coupling (`delta_over_g = 10.0`); the resolved absolute values are
//! what every command works with and what the provenance block echoes.

use std::path::{Path, PathBuf};

use spsim_core::dephasing::DephasingTable;
use spsim_core::geometry::CavityGeometry;
use spsim_core::SystemParams;
use toml::value::Value;

use crate::error::{CliError, CliResult};

/// Fully parsed and resolved configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub system: Option<ResolvedSystem>,
    pub geometry: Option<CavityGeometry>,
    pub dephasing: DephasingSettings,
    pub n_max: usize,
    pub sweep: Option<SweepSection>,
    pub variants: Variants,
    pub dynamics: Option<DynamicsSection>,
}

/// `[system]` with every rate resolved to absolute μeV. γ* stays optional
/// because temperature sweeps supply it per row.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedSystem {
    pub g: f64,
    pub gamma: f64,
    pub gamma_star: Option<f64>,
    pub kappa_in: f64,
    pub kappa_out: f64,
    pub delta: f64,
    pub pump: f64,
}

impl ResolvedSystem {
    /// Bundle with γ* supplied externally (temperature sweeps).
    pub fn params_with_gamma_star(&self, gamma_star: f64) -> SystemParams {
        SystemParams {
            g: self.g,
            gamma: self.gamma,
            gamma_star,
            kappa_in: self.kappa_in,
            kappa_out: self.kappa_out,
            delta: self.delta,
            pump: self.pump,
        }
    }

    /// Bundle using the fixed γ* from the config.
    pub fn fixed_params(&self) -> CliResult<SystemParams> {
        let gamma_star = self.gamma_star.ok_or_else(|| {
            CliError::config(
                "[system] needs gamma_star_ueV, gamma_star_over_g or T_K for this command",
            )
        })?;
        Ok(self.params_with_gamma_star(gamma_star))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    Nodes,
    Interp,
}

impl TableMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TableMode::Nodes => "nodes",
            TableMode::Interp => "interp",
        }
    }
}

#[derive(Debug, Clone)]
pub enum TableSource {
    Builtin,
    Path(PathBuf),
}

impl TableSource {
    pub fn as_provenance_string(&self) -> String {
        match self {
            TableSource::Builtin => "builtin".into(),
            TableSource::Path(p) => p.display().to_string(),
        }
    }
}

/// `[dephasing]` with the table already loaded.
#[derive(Debug, Clone)]
pub struct DephasingSettings {
    pub source: TableSource,
    pub mode: TableMode,
    pub table: DephasingTable,
}

impl Default for DephasingSettings {
    fn default() -> Self {
        Self {
            source: TableSource::Builtin,
            mode: TableMode::Interp,
            table: DephasingTable::builtin_ingaas(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    V,
    Kappa,
    KappaIn,
    KappaOut,
    T,
    Delta,
    Pump,
}

impl SweepVariable {
    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "V" => Self::V,
            "kappa" => Self::Kappa,
            "kappa_in" => Self::KappaIn,
            "kappa_out" => Self::KappaOut,
            "T" => Self::T,
            "delta" => Self::Delta,
            "pump" => Self::Pump,
            other => {
                return Err(CliError::config(format!(
                    "[sweep] unknown variable \"{other}\" (expected one of V, kappa, kappa_in, \
                     kappa_out, T, delta, pump)"
                )))
            }
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::V => "V",
            Self::Kappa => "kappa",
            Self::KappaIn => "kappa_in",
            Self::KappaOut => "kappa_out",
            Self::T => "T",
            Self::Delta => "delta",
            Self::Pump => "pump",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

/// Value columns a sweep can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Rate,
    Efficiency,
    Purcell,
    QEff,
    Kappa,
    KappaIn,
    Coupling,
}

impl OutputKind {
    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "R" => Self::Rate,
            "efficiency" => Self::Efficiency,
            "purcell" => Self::Purcell,
            "Q_eff" => Self::QEff,
            "kappa" => Self::Kappa,
            "kappa_in" => Self::KappaIn,
            "g" => Self::Coupling,
            other => {
                return Err(CliError::config(format!(
                    "[sweep] unknown output \"{other}\" (expected R, efficiency, purcell, \
                     Q_eff, kappa, kappa_in, g)"
                )))
            }
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rate => "R",
            Self::Efficiency => "efficiency",
            Self::Purcell => "purcell",
            Self::QEff => "Q_eff",
            Self::Kappa => "kappa",
            Self::KappaIn => "kappa_in",
            Self::Coupling => "g",
        }
    }

    /// CSV column name for this output.
    pub fn column_name(&self) -> &'static str {
        match self {
            Self::Rate => "R_ueV",
            Self::Efficiency => "efficiency",
            Self::Purcell => "F_star",
            Self::QEff => "Q_eff",
            Self::Kappa => "kappa_ueV",
            Self::KappaIn => "kappa_in_ueV",
            Self::Coupling => "g_ueV",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub outputs: Option<Vec<OutputKind>>,
}

impl SweepSection {
    /// The sweep grid (count points from min to max).
    pub fn grid(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let frac = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * frac,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * frac).exp(),
                }
            })
            .collect()
    }
}

/// `[variants]`: at most one rate-model axis; the geometry lists are
/// independent column groups for the geometry sweep.
#[derive(Debug, Clone, Default)]
pub struct Variants {
    pub t_k: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub pump: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub d_um: Option<Vec<f64>>,
    pub omega_qd_ev: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    ExcitedVacuum,
    GroundVacuum,
    Custom(Vec<f64>),
}

impl InitialState {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExcitedVacuum => "excited_vacuum",
            Self::GroundVacuum => "ground_vacuum",
            Self::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamicsSection {
    pub initial: InitialState,
    pub t_max: f64,
    pub count: usize,
}

// ---------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------

/// One section's key/value map; every key must be consumed.
struct Section {
    name: &'static str,
    map: toml::map::Map<String, Value>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> CliResult<Option<f64>> {
        self.take(key)
            .map(|v| as_f64(self.name, key, &v))
            .transpose()
    }

    fn take_usize(&mut self, key: &str) -> CliResult<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(_) => Err(CliError::config(format!(
                "[{}] {key} must be a non-negative integer",
                self.name
            ))),
        }
    }

    fn take_string(&mut self, key: &str) -> CliResult<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(CliError::config(format!(
                "[{}] {key} must be a string",
                self.name
            ))),
        }
    }

    fn take_f64_list(&mut self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(items)) => {
                let vals = items
                    .iter()
                    .map(|v| as_f64(self.name, key, v))
                    .collect::<CliResult<Vec<f64>>>()?;
                if vals.is_empty() {
                    return Err(CliError::config(format!(
                        "[{}] {key} must not be empty",
                        self.name
                    )));
                }
                Ok(Some(vals))
            }
            Some(_) => Err(CliError::config(format!(
                "[{}] {key} must be an array of numbers",
                self.name
            ))),
        }
    }

    fn finish(self) -> CliResult<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(CliError::config(format!(
                "[{}] unknown key \"{key}\"",
                self.name
            )));
        }
        Ok(())
    }
}

fn as_f64(section: &str, key: &str, v: &Value) -> CliResult<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::config(format!(
            "[{section}] {key} must be a number"
        ))),
    }
}

/// Read either `<base>_ueV` or `<base>_over_g`, never both.
fn energy_key(sec: &mut Section, base: &str, g: f64) -> CliResult<Option<f64>> {
    let abs = sec.take_f64(&format!("{base}_ueV"))?;
    let rel = sec.take_f64(&format!("{base}_over_g"))?;
    match (abs, rel) {
        (Some(_), Some(_)) => Err(CliError::config(format!(
            "[{}] give only one of {base}_ueV and {base}_over_g",
            sec.name
        ))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(r)) => Ok(Some(r * g)),
        (None, None) => Ok(None),
    }
}

fn energy_key_list(sec: &mut Section, base: &str, g: Option<f64>) -> CliResult<Option<Vec<f64>>> {
    let abs = sec.take_f64_list(&format!("{base}_ueV"))?;
    let rel = sec.take_f64_list(&format!("{base}_over_g"))?;
    match (abs, rel) {
        (Some(_), Some(_)) => Err(CliError::config(format!(
            "[{}] give only one of {base}_ueV and {base}_over_g",
            sec.name
        ))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(r)) => {
            let g = g.ok_or_else(|| {
                CliError::config(format!(
                    "[{}] {base}_over_g needs [system] g_ueV to resolve multiples of g",
                    sec.name
                ))
            })?;
            Ok(Some(r.iter().map(|x| x * g).collect()))
        }
        (None, None) => Ok(None),
    }
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let root: toml::map::Map<String, Value> = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::config(format!("invalid TOML: {e}")))?;

        let mut sections: std::collections::BTreeMap<&'static str, Section> = Default::default();
        for (key, value) in root {
            let name = match key.as_str() {
                "system" => "system",
                "geometry" => "geometry",
                "dephasing" => "dephasing",
                "hilbert" => "hilbert",
                "sweep" => "sweep",
                "variants" => "variants",
                "dynamics" => "dynamics",
                // Emitted alongside the config in provenance blocks;
                // harmless on re-parse.
                "command" | "skipped_rows" => continue,
                other => {
                    return Err(CliError::config(format!("unknown section [{other}]")));
                }
            };
            let Value::Table(map) = value else {
                return Err(CliError::config(format!("[{name}] must be a table")));
            };
            sections.insert(name, Section { name, map });
        }

        let dephasing = match sections.remove("dephasing") {
            Some(sec) => parse_dephasing(sec)?,
            None => DephasingSettings::default(),
        };
        let system = sections
            .remove("system")
            .map(|sec| parse_system(sec, &dephasing.table))
            .transpose()?;
        let geometry = sections
            .remove("geometry")
            .map(parse_geometry)
            .transpose()?;
        let n_max = match sections.remove("hilbert") {
            Some(mut sec) => {
                let n = sec.take_usize("n_max")?.unwrap_or(5);
                sec.finish()?;
                if n < 1 {
                    return Err(CliError::config("[hilbert] n_max must be at least 1"));
                }
                n
            }
            None => 5,
        };
        let sweep = sections.remove("sweep").map(parse_sweep).transpose()?;
        let variants = match sections.remove("variants") {
            Some(sec) => parse_variants(sec, system.as_ref().map(|s| s.g))?,
            None => Variants::default(),
        };
        let dynamics = sections
            .remove("dynamics")
            .map(parse_dynamics)
            .transpose()?;

        Ok(Config {
            system,
            geometry,
            dephasing,
            n_max,
            sweep,
            variants,
            dynamics,
        })
    }

    pub fn require_system(&self) -> CliResult<&ResolvedSystem> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::config("missing [system] section"))
    }

    pub fn require_geometry(&self) -> CliResult<&CavityGeometry> {
        self.geometry
            .as_ref()
            .ok_or_else(|| CliError::config("missing [geometry] section"))
    }

    pub fn require_sweep(&self) -> CliResult<&SweepSection> {
        self.sweep
            .as_ref()
            .ok_or_else(|| CliError::config("missing [sweep] section"))
    }
}

fn parse_system(mut sec: Section, table: &DephasingTable) -> CliResult<ResolvedSystem> {
    let g = sec
        .take_f64("g_ueV")?
        .ok_or_else(|| CliError::config("[system] g_ueV is required"))?;
    let gamma = energy_key(&mut sec, "gamma", g)?
        .ok_or_else(|| CliError::config("[system] gamma_ueV or gamma_over_g is required"))?;
    let gamma_star = energy_key(&mut sec, "gamma_star", g)?;
    let t_k = sec.take_f64("T_K")?;
    let gamma_star = match (gamma_star, t_k) {
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "[system] give only one of gamma_star_ueV/gamma_star_over_g and T_K",
            ))
        }
        (Some(gs), None) => Some(gs),
        (None, Some(t)) => Some(
            table
                .gamma_star_at(t)
                .map_err(|e| CliError::config(format!("[system] T_K: {e}")))?,
        ),
        (None, None) => None,
    };

    let kappa_total = energy_key(&mut sec, "kappa", g)?;
    let kappa_in = energy_key(&mut sec, "kappa_in", g)?;
    let kappa_out = energy_key(&mut sec, "kappa_out", g)?;
    let (kappa_in, kappa_out) = match (kappa_total, kappa_in, kappa_out) {
        (Some(_), Some(_), Some(_)) => {
            return Err(CliError::config(
                "[system] kappa is over-specified: give total kappa plus exactly one of \
                 kappa_in/kappa_out",
            ))
        }
        (Some(total), Some(inner), None) => {
            if inner > total {
                return Err(CliError::config(format!(
                    "[system] kappa_in ({inner} ueV) exceeds total kappa ({total} ueV)"
                )));
            }
            (inner, total - inner)
        }
        (Some(total), None, Some(outer)) => {
            if outer > total {
                return Err(CliError::config(format!(
                    "[system] kappa_out ({outer} ueV) exceeds total kappa ({total} ueV)"
                )));
            }
            (total - outer, outer)
        }
        (Some(_), None, None) => {
            return Err(CliError::config(
                "[system] total kappa needs one of kappa_in/kappa_out for the split",
            ))
        }
        (None, inner, outer) => (inner.unwrap_or(0.0), outer.unwrap_or(0.0)),
    };

    let delta = energy_key(&mut sec, "delta", g)?.unwrap_or(0.0);
    let pump = energy_key(&mut sec, "pump", g)?.unwrap_or(0.0);
    sec.finish()?;
    Ok(ResolvedSystem {
        g,
        gamma,
        gamma_star,
        kappa_in,
        kappa_out,
        delta,
        pump,
    })
}

fn parse_geometry(mut sec: Section) -> CliResult<CavityGeometry> {
    let need = |key: &str, sec: &mut Section| -> CliResult<f64> {
        sec.take_f64(key)?
            .ok_or_else(|| CliError::config(format!("[geometry] {key} is required")))
    };
    let geom = CavityGeometry {
        d_um: need("d_um", &mut sec)?,
        v_um3: need("V_um3", &mut sec)?,
        r_l: need("R_l", &mut sec)?,
        r_r: need("R_r", &mut sec)?,
        alpha: need("alpha", &mut sec)?,
        m_debye: need("M_debye", &mut sec)?,
        omega_qd_ev: need("omega_qd_eV", &mut sec)?,
    };
    sec.finish()?;
    geom.validate()
        .map_err(|e| CliError::config(format!("[geometry] {e}")))
}

fn parse_dephasing(mut sec: Section) -> CliResult<DephasingSettings> {
    let source = match sec.take_string("table")?.as_deref() {
        None | Some("builtin") => TableSource::Builtin,
        Some(path) => TableSource::Path(PathBuf::from(path)),
    };
    let mode = match sec.take_string("mode")?.as_deref() {
        None | Some("interp") => TableMode::Interp,
        Some("nodes") => TableMode::Nodes,
        Some(other) => {
            return Err(CliError::config(format!(
                "[dephasing] mode must be \"nodes\" or \"interp\", got \"{other}\""
            )))
        }
    };
    sec.finish()?;
    let table = match &source {
        TableSource::Builtin => DephasingTable::builtin_ingaas(),
        TableSource::Path(path) => DephasingTable::load(path)
            .map_err(|e| CliError::config(format!("[dephasing] table {}: {e}", path.display())))?,
    };
    Ok(DephasingSettings {
        source,
        mode,
        table,
    })
}

fn parse_sweep(mut sec: Section) -> CliResult<SweepSection> {
    let variable = SweepVariable::parse(
        &sec.take_string("variable")?
            .ok_or_else(|| CliError::config("[sweep] variable is required"))?,
    )?;
    let min = sec
        .take_f64("min")?
        .ok_or_else(|| CliError::config("[sweep] min is required"))?;
    let max = sec
        .take_f64("max")?
        .ok_or_else(|| CliError::config("[sweep] max is required"))?;
    let count = sec
        .take_usize("count")?
        .ok_or_else(|| CliError::config("[sweep] count is required"))?;
    let spacing = match sec.take_string("spacing")?.as_deref() {
        None | Some("linear") => Spacing::Linear,
        Some("log") => Spacing::Log,
        Some(other) => {
            return Err(CliError::config(format!(
                "[sweep] spacing must be \"linear\" or \"log\", got \"{other}\""
            )))
        }
    };
    let outputs = match sec.take("outputs") {
        None => None,
        Some(Value::Array(items)) => {
            let kinds = items
                .iter()
                .map(|v| match v {
                    Value::String(s) => OutputKind::parse(s),
                    _ => Err(CliError::config("[sweep] outputs must be strings")),
                })
                .collect::<CliResult<Vec<_>>>()?;
            if kinds.is_empty() {
                return Err(CliError::config("[sweep] outputs must not be empty"));
            }
            Some(kinds)
        }
        Some(_) => return Err(CliError::config("[sweep] outputs must be an array")),
    };
    sec.finish()?;

    if count < 2 {
        return Err(CliError::config("[sweep] count must be at least 2"));
    }
    if min >= max || min.is_nan() || max.is_nan() {
        return Err(CliError::config("[sweep] min must be less than max"));
    }
    if spacing == Spacing::Log && min <= 0.0 {
        return Err(CliError::config("[sweep] log spacing requires min > 0"));
    }
    Ok(SweepSection {
        variable,
        min,
        max,
        count,
        spacing,
        outputs,
    })
}

fn parse_variants(mut sec: Section, g: Option<f64>) -> CliResult<Variants> {
    let variants = Variants {
        t_k: sec.take_f64_list("T_K")?,
        delta: energy_key_list(&mut sec, "delta", g)?,
        pump: energy_key_list(&mut sec, "pump", g)?,
        gamma: energy_key_list(&mut sec, "gamma", g)?,
        alpha: sec.take_f64_list("alpha")?,
        d_um: sec.take_f64_list("d_um")?,
        omega_qd_ev: sec.take_f64_list("omega_qd_eV")?,
    };
    sec.finish()?;
    Ok(variants)
}

fn parse_dynamics(mut sec: Section) -> CliResult<DynamicsSection> {
    let initial = match sec.take_string("initial")?.as_deref() {
        None | Some("excited_vacuum") => InitialState::ExcitedVacuum,
        Some("ground_vacuum") => InitialState::GroundVacuum,
        Some("custom") => {
            let diag = sec.take_f64_list("diagonal")?.ok_or_else(|| {
                CliError::config("[dynamics] initial = \"custom\" needs a diagonal array")
            })?;
            InitialState::Custom(diag)
        }
        Some(other) => {
            return Err(CliError::config(format!(
                "[dynamics] initial must be excited_vacuum, ground_vacuum or custom, got \
                 \"{other}\""
            )))
        }
    };
    let t_max = sec
        .take_f64("t_max")?
        .ok_or_else(|| CliError::config("[dynamics] t_max is required"))?;
    if t_max <= 0.0 || t_max.is_nan() {
        return Err(CliError::config("[dynamics] t_max must be positive"));
    }
    let count = sec.take_usize("count")?.unwrap_or(1000);
    if count < 2 {
        return Err(CliError::config("[dynamics] count must be at least 2"));
    }
    sec.finish()?;
    Ok(DynamicsSection {
        initial,
        t_max,
        count,
    })
}
