//! The six subcommands: four sweep generators, the trajectory dump and the
//! self-check runner.

use spsim_core::dephasing::DephasingTable;
use spsim_core::geometry::{self, CavityGeometry};
use spsim_core::lindblad::{evolve, expectation_pair, DensityMatrix, HilbertConfig, RkOptions};
use spsim_core::rates::{effective_rate, efficiency, purcell_factor, quality_factors};
use spsim_core::validation::{run_all, CheckResult};
use spsim_core::SystemParams;

use crate::config::{
    Config, DephasingSettings, InitialState, OutputKind, ResolvedSystem, SweepSection,
    SweepVariable, TableMode,
};
use crate::error::{CliError, CliResult};
use crate::output::{Provenance, Table};

/// Number format for column-name suffixes: integers without the trailing
/// ".0", everything else as the shortest round-trip form.
fn fmt_trim(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------
// variant axis
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisKind {
    Temperature,
    Delta,
    Pump,
    Gamma,
}

#[derive(Debug, Clone)]
struct Axis {
    kind: Option<AxisKind>,
    values: Vec<f64>,
}

impl Axis {
    fn none() -> Self {
        Self {
            kind: None,
            values: vec![0.0],
        }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn suffix(&self, i: usize) -> String {
        match self.kind {
            None => String::new(),
            Some(AxisKind::Temperature) => format!("_T{}K", fmt_trim(self.values[i])),
            Some(AxisKind::Delta) => format!("_delta{}", fmt_trim(self.values[i])),
            Some(AxisKind::Pump) => format!("_P{}", fmt_trim(self.values[i])),
            Some(AxisKind::Gamma) => format!("_gamma{}", fmt_trim(self.values[i])),
        }
    }

    /// Substitute variant `i` into the bundle. Temperature variants resolve
    /// γ* through the table.
    fn apply(
        &self,
        i: usize,
        base: ResolvedSystem,
        table: &DephasingTable,
    ) -> CliResult<ResolvedSystem> {
        let v = self.values[i];
        Ok(match self.kind {
            None => base,
            Some(AxisKind::Temperature) => ResolvedSystem {
                gamma_star: Some(
                    table
                        .gamma_star_at(v)
                        .map_err(|e| CliError::config(format!("[variants] T_K: {e}")))?,
                ),
                ..base
            },
            Some(AxisKind::Delta) => ResolvedSystem { delta: v, ..base },
            Some(AxisKind::Pump) => ResolvedSystem { pump: v, ..base },
            Some(AxisKind::Gamma) => ResolvedSystem { gamma: v, ..base },
        })
    }
}

/// Pick the (at most one) rate-model variant axis and reject the rest.
fn rate_axis(config: &Config, allowed: &[AxisKind], command: &str) -> CliResult<Axis> {
    let v = &config.variants;
    for (name, present) in [
        ("alpha", v.alpha.is_some()),
        ("d_um", v.d_um.is_some()),
        ("omega_qd_eV", v.omega_qd_ev.is_some()),
    ] {
        if present {
            return Err(CliError::config(format!(
                "[variants] {name} applies only to geometry-sweep, not {command}"
            )));
        }
    }
    let mut axes: Vec<(AxisKind, &Vec<f64>, &str)> = Vec::new();
    if let Some(list) = &v.t_k {
        axes.push((AxisKind::Temperature, list, "T_K"));
    }
    if let Some(list) = &v.delta {
        axes.push((AxisKind::Delta, list, "delta"));
    }
    if let Some(list) = &v.pump {
        axes.push((AxisKind::Pump, list, "pump"));
    }
    if let Some(list) = &v.gamma {
        axes.push((AxisKind::Gamma, list, "gamma"));
    }
    match axes.len() {
        0 => Ok(Axis::none()),
        1 => {
            let (kind, values, name) = axes.remove(0);
            if !allowed.contains(&kind) {
                return Err(CliError::config(format!(
                    "[variants] {name} is not supported by {command}"
                )));
            }
            Ok(Axis {
                kind: Some(kind),
                values: values.clone(),
            })
        }
        _ => Err(CliError::config(
            "[variants] give at most one variant axis per sweep",
        )),
    }
}

// ---------------------------------------------------------------------
// provenance helpers
// ---------------------------------------------------------------------

fn echo_system(prov: &mut Provenance, sys: &ResolvedSystem, include_gamma_star: bool) {
    prov.section("system");
    prov.float("g_ueV", sys.g);
    prov.float("gamma_ueV", sys.gamma);
    if include_gamma_star {
        if let Some(gs) = sys.gamma_star {
            prov.float("gamma_star_ueV", gs);
        }
    }
    prov.float("kappa_in_ueV", sys.kappa_in);
    prov.float("kappa_out_ueV", sys.kappa_out);
    prov.float("delta_ueV", sys.delta);
    prov.float("pump_ueV", sys.pump);
}

fn echo_geometry(prov: &mut Provenance, geom: &CavityGeometry) {
    prov.section("geometry");
    prov.float("d_um", geom.d_um);
    prov.float("V_um3", geom.v_um3);
    prov.float("R_l", geom.r_l);
    prov.float("R_r", geom.r_r);
    prov.float("alpha", geom.alpha);
    prov.float("M_debye", geom.m_debye);
    prov.float("omega_qd_eV", geom.omega_qd_ev);
}

fn echo_dephasing(prov: &mut Provenance, settings: &DephasingSettings, mode: TableMode) {
    prov.section("dephasing");
    prov.string("table", &settings.source.as_provenance_string());
    prov.string("mode", mode.as_str());
}

fn echo_sweep(prov: &mut Provenance, sweep: &SweepSection, outputs: &[OutputKind]) {
    prov.section("sweep");
    prov.string("variable", sweep.variable.as_str());
    prov.float("min", sweep.min);
    prov.float("max", sweep.max);
    prov.integer("count", sweep.count);
    prov.string("spacing", sweep.spacing.as_str());
    let names: Vec<&str> = outputs.iter().map(|o| o.as_str()).collect();
    prov.string_list("outputs", &names);
}

fn echo_axis(prov: &mut Provenance, axis: &Axis) {
    let Some(kind) = axis.kind else { return };
    prov.section("variants");
    let key = match kind {
        AxisKind::Temperature => "T_K",
        AxisKind::Delta => "delta_ueV",
        AxisKind::Pump => "pump_ueV",
        AxisKind::Gamma => "gamma_ueV",
    };
    prov.float_list(key, &axis.values);
}

// ---------------------------------------------------------------------
// temperature grids
// ---------------------------------------------------------------------

/// The temperature rows: table nodes or an interpolated grid.
fn temperature_grid(
    settings: &DephasingSettings,
    sweep: Option<&SweepSection>,
    mode: TableMode,
) -> CliResult<Vec<f64>> {
    let t_max = settings.table.t_max();
    let (lo, hi) = match sweep {
        Some(s) => {
            if s.min < 0.0 || s.max > t_max {
                return Err(CliError::config(format!(
                    "[sweep] temperature range [{}, {}] outside table range [0, {t_max}]",
                    s.min, s.max
                )));
            }
            (s.min, s.max)
        }
        None => (10.0_f64.min(t_max), t_max),
    };
    match mode {
        TableMode::Nodes => {
            let nodes: Vec<f64> = settings
                .table
                .samples()
                .iter()
                .map(|&(t, _)| t)
                .filter(|&t| t >= lo && t <= hi)
                .collect();
            if nodes.is_empty() {
                return Err(CliError::config(
                    "no dephasing table nodes inside the sweep range",
                ));
            }
            Ok(nodes)
        }
        TableMode::Interp => match sweep {
            Some(s) => Ok(s.grid()),
            None => {
                let count = 59;
                Ok((0..count)
                    .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                    .collect())
            }
        },
    }
}

// ---------------------------------------------------------------------
// rate-model sweeps
// ---------------------------------------------------------------------

struct RateSweep {
    command: &'static str,
    /// The command sweeps temperature by definition ([sweep] optional).
    temperature_only: bool,
    /// Add a gamma_star_ueV column after T_K on temperature sweeps.
    gamma_star_column: bool,
    default_outputs: Vec<OutputKind>,
    allowed_axes: Vec<AxisKind>,
}

fn compute_output(
    kind: OutputKind,
    p: &SystemParams,
    geom: Option<&CavityGeometry>,
) -> CliResult<f64> {
    Ok(match kind {
        OutputKind::Rate => effective_rate(p),
        OutputKind::Efficiency => efficiency(p),
        OutputKind::Purcell => purcell_factor(p),
        OutputKind::QEff => {
            let geom = geom.ok_or_else(|| {
                CliError::config("output Q_eff needs a [geometry] section for omega_qd_eV")
            })?;
            let omega_qd = geom.omega_qd_ev * 1e6;
            let omega_c = omega_qd - p.delta;
            quality_factors(p, omega_qd, omega_c).q_eff
        }
        OutputKind::Kappa => p.kappa(),
        OutputKind::KappaIn => p.kappa_in,
        OutputKind::Coupling => p.g,
    })
}

fn run_rate_sweep(
    config: &Config,
    mode_override: Option<TableMode>,
    spec: RateSweep,
) -> CliResult<Table> {
    let system = *config.require_system()?;
    let mode = mode_override.unwrap_or(config.dephasing.mode);
    let axis = rate_axis(config, &spec.allowed_axes, spec.command)?;

    // The swept variable: temperature-style commands imply T; the
    // efficiency sweep reads it from [sweep].
    let (variable, sweep_section): (SweepVariable, Option<&SweepSection>) = if spec.temperature_only
    {
        if let Some(s) = &config.sweep {
            if s.variable != SweepVariable::T {
                return Err(CliError::config(format!(
                    "{} sweeps temperature; [sweep] variable must be \"T\"",
                    spec.command
                )));
            }
        }
        (SweepVariable::T, config.sweep.as_ref())
    } else {
        let s = config.require_sweep()?;
        match s.variable {
            SweepVariable::Kappa
            | SweepVariable::KappaIn
            | SweepVariable::KappaOut
            | SweepVariable::T => {}
            other => {
                return Err(CliError::config(format!(
                    "{} cannot sweep \"{}\"; use kappa, kappa_in, kappa_out or T",
                    spec.command,
                    other.as_str()
                )))
            }
        }
        (s.variable, Some(s))
    };

    let sweeping_temperature = variable == SweepVariable::T;
    let grid = if sweeping_temperature {
        if axis.kind == Some(AxisKind::Temperature) {
            return Err(CliError::config(
                "cannot combine a temperature sweep with T_K variants",
            ));
        }
        temperature_grid(&config.dephasing, sweep_section, mode)?
    } else {
        sweep_section.expect("non-T sweep has a section").grid()
    };

    // γ* must be fixed in [system] unless rows or variants supply it.
    if !sweeping_temperature
        && axis.kind != Some(AxisKind::Temperature)
        && system.gamma_star.is_none()
    {
        return Err(CliError::config(
            "[system] needs gamma_star_ueV, gamma_star_over_g or T_K (or sweep/variants over T)",
        ));
    }

    let outputs: Vec<OutputKind> = sweep_section
        .and_then(|s| s.outputs.clone())
        .unwrap_or_else(|| spec.default_outputs.clone());
    if outputs.contains(&OutputKind::QEff) && config.geometry.is_none() {
        return Err(CliError::config(
            "output Q_eff needs a [geometry] section for omega_qd_eV",
        ));
    }

    // Column layout.
    let x_name = match variable {
        SweepVariable::Kappa => "kappa_ueV",
        SweepVariable::KappaIn => "kappa_in_ueV",
        SweepVariable::KappaOut => "kappa_out_ueV",
        SweepVariable::T => "T_K",
        _ => unreachable!("validated above"),
    };
    let mut columns = vec![x_name.to_string()];
    if spec.gamma_star_column && sweeping_temperature {
        columns.push("gamma_star_ueV".into());
    }
    for out in &outputs {
        for vi in 0..axis.len() {
            columns.push(format!("{}{}", out.column_name(), axis.suffix(vi)));
        }
    }

    // Rows.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut skipped = 0usize;
    'rows: for &x in &grid {
        let base = match variable {
            SweepVariable::Kappa => {
                let kappa_out = x - system.kappa_in;
                if kappa_out < 0.0 {
                    skipped += 1;
                    continue 'rows;
                }
                ResolvedSystem {
                    kappa_out,
                    ..system
                }
            }
            SweepVariable::KappaIn => ResolvedSystem {
                kappa_in: x,
                ..system
            },
            SweepVariable::KappaOut => ResolvedSystem {
                kappa_out: x,
                ..system
            },
            SweepVariable::T => ResolvedSystem {
                gamma_star: Some(
                    config
                        .dephasing
                        .table
                        .gamma_star_at(x)
                        .map_err(|e| CliError::config(format!("temperature sweep: {e}")))?,
                ),
                ..system
            },
            _ => unreachable!(),
        };

        let mut row = vec![x];
        if spec.gamma_star_column && sweeping_temperature {
            row.push(base.gamma_star.expect("set above"));
        }
        for out in &outputs {
            for vi in 0..axis.len() {
                let resolved = axis.apply(vi, base, &config.dephasing.table)?;
                let params = match resolved.fixed_params()?.validate() {
                    Ok(p) => p,
                    Err(e) => {
                        log::warn!("{}: skipping {x_name} = {x}: {e}", spec.command);
                        skipped += 1;
                        continue 'rows;
                    }
                };
                row.push(compute_output(*out, &params, config.geometry.as_ref())?);
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            skipped += 1;
            continue;
        }
        rows.push(row);
    }

    // Provenance.
    let mut prov = Provenance::new();
    let fixed_gamma_star = !sweeping_temperature && axis.kind != Some(AxisKind::Temperature);
    echo_system(&mut prov, &system, fixed_gamma_star);
    if let Some(geom) = &config.geometry {
        if outputs.contains(&OutputKind::QEff) {
            echo_geometry(&mut prov, geom);
        }
    }
    if sweeping_temperature || axis.kind == Some(AxisKind::Temperature) {
        echo_dephasing(&mut prov, &config.dephasing, mode);
    }
    if let Some(s) = sweep_section {
        echo_sweep(&mut prov, s, &outputs);
    }
    echo_axis(&mut prov, &axis);

    Ok(Table {
        command: spec.command,
        provenance: prov.finish(),
        columns,
        rows,
        skipped,
        context_columns: usize::from(spec.gamma_star_column && sweeping_temperature),
    })
}

pub fn efficiency_sweep(config: &Config, mode_override: Option<TableMode>) -> CliResult<Table> {
    run_rate_sweep(
        config,
        mode_override,
        RateSweep {
            command: "efficiency-sweep",
            temperature_only: false,
            gamma_star_column: true,
            default_outputs: vec![OutputKind::Efficiency],
            allowed_axes: vec![AxisKind::Temperature, AxisKind::Delta, AxisKind::Pump],
        },
    )
}

pub fn transfer_rate_sweep(config: &Config, mode_override: Option<TableMode>) -> CliResult<Table> {
    run_rate_sweep(
        config,
        mode_override,
        RateSweep {
            command: "transfer-rate-sweep",
            temperature_only: true,
            gamma_star_column: true,
            default_outputs: vec![OutputKind::Rate],
            allowed_axes: vec![AxisKind::Delta, AxisKind::Pump],
        },
    )
}

pub fn purcell_sweep(config: &Config, mode_override: Option<TableMode>) -> CliResult<Table> {
    run_rate_sweep(
        config,
        mode_override,
        RateSweep {
            command: "purcell-sweep",
            temperature_only: true,
            gamma_star_column: false,
            default_outputs: vec![OutputKind::Purcell],
            allowed_axes: vec![AxisKind::Gamma, AxisKind::Delta, AxisKind::Pump],
        },
    )
}

// ---------------------------------------------------------------------
// geometry sweep
// ---------------------------------------------------------------------

pub fn geometry_sweep(config: &Config) -> CliResult<Table> {
    let geom = *config.require_geometry()?;
    let sweep = config.require_sweep()?;
    if sweep.variable != SweepVariable::V {
        return Err(CliError::config(
            "geometry-sweep sweeps the mode volume; [sweep] variable must be \"V\"",
        ));
    }
    let v = &config.variants;
    for (name, present) in [
        ("T_K", v.t_k.is_some()),
        ("delta", v.delta.is_some()),
        ("pump", v.pump.is_some()),
        ("gamma", v.gamma.is_some()),
    ] {
        if present {
            return Err(CliError::config(format!(
                "[variants] {name} does not apply to geometry-sweep"
            )));
        }
    }
    let outputs: Vec<OutputKind> = sweep.outputs.clone().unwrap_or(vec![
        OutputKind::KappaIn,
        OutputKind::Kappa,
        OutputKind::Coupling,
    ]);
    for out in &outputs {
        if !matches!(
            out,
            OutputKind::KappaIn | OutputKind::Kappa | OutputKind::Coupling
        ) {
            return Err(CliError::config(format!(
                "geometry-sweep outputs must be kappa_in, kappa or g; got {}",
                out.as_str()
            )));
        }
    }

    let alphas = v.alpha.clone().unwrap_or_else(|| vec![geom.alpha]);
    let ds = v.d_um.clone().unwrap_or_else(|| vec![geom.d_um]);
    let omegas = v
        .omega_qd_ev
        .clone()
        .unwrap_or_else(|| vec![geom.omega_qd_ev]);
    // Validate every variant geometry once, up front.
    for &alpha in &alphas {
        CavityGeometry { alpha, ..geom }
            .validate()
            .map_err(|e| CliError::config(format!("[variants] alpha: {e}")))?;
    }
    for &d_um in &ds {
        CavityGeometry { d_um, ..geom }
            .validate()
            .map_err(|e| CliError::config(format!("[variants] d_um: {e}")))?;
    }
    for &omega_qd_ev in &omegas {
        CavityGeometry {
            omega_qd_ev,
            ..geom
        }
        .validate()
        .map_err(|e| CliError::config(format!("[variants] omega_qd_eV: {e}")))?;
    }

    let mut columns = vec!["V_um3".to_string()];
    for out in &outputs {
        match out {
            OutputKind::KappaIn => {
                for &a in &alphas {
                    columns.push(if v.alpha.is_some() {
                        format!("kappa_in_ueV_alpha{}", fmt_trim(a))
                    } else {
                        "kappa_in_ueV".into()
                    });
                }
            }
            OutputKind::Kappa => {
                for &d in &ds {
                    columns.push(if v.d_um.is_some() {
                        format!("kappa_ueV_d{}um", fmt_trim(d))
                    } else {
                        "kappa_ueV".into()
                    });
                }
            }
            OutputKind::Coupling => {
                for &w in &omegas {
                    columns.push(if v.omega_qd_ev.is_some() {
                        format!("g_ueV_w{}eV", fmt_trim(w))
                    } else {
                        "g_ueV".into()
                    });
                }
            }
            _ => unreachable!("filtered above"),
        }
    }

    let mut rows = Vec::with_capacity(sweep.count);
    let mut flagged = 0usize;
    for v_um3 in sweep.grid() {
        let mut row = vec![v_um3];
        for out in &outputs {
            match out {
                OutputKind::KappaIn => {
                    for &alpha in &alphas {
                        let g = CavityGeometry {
                            v_um3,
                            alpha,
                            ..geom
                        };
                        let kappa_in = geometry::internal_loss(&g);
                        if kappa_in > geometry::total_loss(&g) {
                            flagged += 1;
                        }
                        row.push(kappa_in);
                    }
                }
                OutputKind::Kappa => {
                    for &d_um in &ds {
                        row.push(geometry::total_loss(&CavityGeometry {
                            v_um3,
                            d_um,
                            ..geom
                        }));
                    }
                }
                OutputKind::Coupling => {
                    for &omega_qd_ev in &omegas {
                        row.push(geometry::coupling_strength(&CavityGeometry {
                            v_um3,
                            omega_qd_ev,
                            ..geom
                        }));
                    }
                }
                _ => unreachable!(),
            }
        }
        rows.push(row);
    }
    if flagged > 0 {
        log::warn!(
            "geometry-sweep: {flagged} point(s) have kappa_in > kappa (unphysical split; \
             check alpha)"
        );
    }

    let mut prov = Provenance::new();
    echo_geometry(&mut prov, &geom);
    echo_sweep(&mut prov, sweep, &outputs);
    if v.alpha.is_some() || v.d_um.is_some() || v.omega_qd_ev.is_some() {
        prov.section("variants");
        if let Some(list) = &v.alpha {
            prov.float_list("alpha", list);
        }
        if let Some(list) = &v.d_um {
            prov.float_list("d_um", list);
        }
        if let Some(list) = &v.omega_qd_ev {
            prov.float_list("omega_qd_eV", list);
        }
    }

    Ok(Table {
        command: "geometry-sweep",
        provenance: prov.finish(),
        columns,
        rows,
        skipped: 0,
        context_columns: 0,
    })
}

// ---------------------------------------------------------------------
// dynamics
// ---------------------------------------------------------------------

pub fn dynamics(config: &Config) -> CliResult<Table> {
    let system = config.require_system()?;
    let params = system.fixed_params()?;
    let section = config
        .dynamics
        .as_ref()
        .ok_or_else(|| CliError::config("missing [dynamics] section"))?;
    let hilbert = HilbertConfig::new(config.n_max).map_err(|e| CliError::config(e.to_string()))?;

    let rho0 = match &section.initial {
        InitialState::ExcitedVacuum => DensityMatrix::excited_vacuum(&hilbert),
        InitialState::GroundVacuum => DensityMatrix::ground_vacuum(&hilbert),
        InitialState::Custom(diag) => DensityMatrix::from_diagonal(&hilbert, diag)
            .map_err(|e| CliError::config(format!("[dynamics] diagonal: {e}")))?,
    };
    let t_grid: Vec<f64> = (0..section.count)
        .map(|i| section.t_max * i as f64 / (section.count - 1) as f64)
        .collect();

    let traj = evolve(&hilbert, &params, &rho0, &t_grid, &RkOptions::default())
        .map_err(|e| CliError::runtime(format!("integration failed: {e}")))?;

    let mut rows = Vec::with_capacity(t_grid.len());
    for (i, state) in traj.states.iter().enumerate() {
        let (n_e, n_ph) =
            expectation_pair(&hilbert, state).map_err(|e| CliError::runtime(e.to_string()))?;
        rows.push(vec![
            t_grid[i],
            n_e,
            n_ph,
            state.trace_error(),
            state.min_eigenvalue(),
        ]);
    }

    let mut prov = Provenance::new();
    echo_system(&mut prov, system, true);
    prov.section("hilbert");
    prov.integer("n_max", config.n_max);
    prov.section("dynamics");
    prov.string("initial", section.initial.as_str());
    if let InitialState::Custom(diag) = &section.initial {
        prov.float_list("diagonal", diag);
    }
    prov.float("t_max", section.t_max);
    prov.integer("count", section.count);

    Ok(Table {
        command: "dynamics",
        provenance: prov.finish(),
        columns: vec![
            "t_hbar_per_ueV".into(),
            "n_e".into(),
            "n_ph".into(),
            "trace_err".into(),
            "min_eig".into(),
        ],
        rows,
        skipped: 0,
        context_columns: 0,
    })
}

// ---------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------

/// Run the full self-check suite; `table_path` swaps in a custom dephasing
/// table for the temperature-trend criterion.
pub fn validate(table_path: Option<&std::path::Path>) -> CliResult<Vec<CheckResult>> {
    let table = match table_path {
        None => DephasingTable::builtin_ingaas(),
        Some(path) => DephasingTable::load(path)
            .map_err(|e| CliError::config(format!("dephasing table {}: {e}", path.display())))?,
    };
    Ok(run_all(&table))
}
