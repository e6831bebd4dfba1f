//! Sweep commands: golden values, trend checks, CSV round-trips and
//! provenance-based reproduction.

use spsim_cli::commands;
use spsim_cli::config::Config;
use spsim_cli::output::{ParsedCsv, Table};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Re-run a command from the provenance block of its own CSV.
fn rerun_from_provenance(csv: &str) -> Table {
    let parsed = ParsedCsv::parse(csv).unwrap();
    let root: toml::Table = parsed.provenance.parse().unwrap();
    let command = root.get("command").and_then(|v| v.as_str()).unwrap();
    let config = Config::parse(&parsed.provenance).unwrap();
    match command {
        "geometry-sweep" => commands::geometry_sweep(&config).unwrap(),
        "efficiency-sweep" => commands::efficiency_sweep(&config, None).unwrap(),
        "transfer-rate-sweep" => commands::transfer_rate_sweep(&config, None).unwrap(),
        "purcell-sweep" => commands::purcell_sweep(&config, None).unwrap(),
        "dynamics" => commands::dynamics(&config).unwrap(),
        other => panic!("unexpected command {other}"),
    }
}

// ---------------------------------------------------------------------
// geometry sweep
// ---------------------------------------------------------------------

const GEOMETRY_CONFIG: &str = r#"
[geometry]
d_um = 2.0
V_um3 = 50.0
R_l = 0.99
R_r = 0.99
alpha = 1e-5
M_debye = 30.0
omega_qd_eV = 1.3

[sweep]
variable = "V"
min = 10.0
max = 100.0
count = 10
"#;

#[test]
fn geometry_sweep_matches_si_oracle_golden_rows() {
    let config = Config::parse(GEOMETRY_CONFIG).unwrap();
    let table = commands::geometry_sweep(&config).unwrap();
    assert_eq!(
        table.columns,
        vec!["V_um3", "kappa_in_ueV", "kappa_ueV", "g_ueV"]
    );
    assert_eq!(table.rows.len(), 10);

    // Frozen from an independent SI evaluation of the loss/coupling
    // formulas at V = 10, 20, 100 um^3.
    let golden = [
        (
            0,
            10.0,
            0.6199209917861638,
            313.0914099930123,
            21.420404528200972,
        ),
        (
            1,
            20.0,
            0.3099604958930819,
            156.54570499650615,
            15.146513297649937,
        ),
        (
            9,
            100.0,
            0.06199209917861638,
            31.309140999301228,
            6.773726671129952,
        ),
    ];
    for (i, v, kin, k, g) in golden {
        let row = &table.rows[i];
        assert_eq!(row[0], v);
        assert!(rel(row[1], kin) < 1e-12, "kappa_in at V={v}");
        assert!(rel(row[2], k) < 1e-12, "kappa at V={v}");
        assert!(rel(row[3], g) < 1e-12, "g at V={v}");
    }

    // Doubling V halves both losses (rows 0 and 1).
    assert!(rel(table.rows[0][1], 2.0 * table.rows[1][1]) < 1e-12);
    assert!(rel(table.rows[0][2], 2.0 * table.rows[1][2]) < 1e-12);
}

#[test]
fn geometry_sweep_expands_variant_columns() {
    let text = format!("{GEOMETRY_CONFIG}\n[variants]\nalpha = [0.0, 2.0, 4.0]\n");
    let config = Config::parse(&text).unwrap();
    let table = commands::geometry_sweep(&config).unwrap();
    assert_eq!(
        table.columns,
        vec![
            "V_um3",
            "kappa_in_ueV_alpha0",
            "kappa_in_ueV_alpha2",
            "kappa_in_ueV_alpha4",
            "kappa_ueV",
            "g_ueV"
        ]
    );
    for row in &table.rows {
        // alpha = 0 column is identically zero; kappa_in is linear in alpha.
        assert_eq!(row[1], 0.0);
        assert!(rel(row[3], 2.0 * row[2]) < 1e-12);
    }
}

#[test]
fn geometry_sweep_rejects_rate_variants_and_wrong_variable() {
    let text = format!("{GEOMETRY_CONFIG}\n[variants]\npump_ueV = [0.0, 1.0]\n");
    assert!(commands::geometry_sweep(&Config::parse(&text).unwrap()).is_err());
    let bad = GEOMETRY_CONFIG.replace("variable = \"V\"", "variable = \"kappa\"");
    assert!(commands::geometry_sweep(&Config::parse(&bad).unwrap()).is_err());
}

// ---------------------------------------------------------------------
// efficiency sweep
// ---------------------------------------------------------------------

#[test]
fn efficiency_kappa_sweep_starts_at_zero_and_skips_nothing_valid() {
    // Sweeping total kappa from kappa_in: the first row has kappa_out = 0.
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        gamma_star_ueV = 40.0
        kappa_in_ueV = 5.0

        [sweep]
        variable = "kappa"
        min = 5.0
        max = 500.0
        count = 100
        "#,
    )
    .unwrap();
    let table = commands::efficiency_sweep(&config, None).unwrap();
    assert_eq!(table.columns, vec!["kappa_ueV", "efficiency"]);
    assert_eq!(table.rows.len(), 100);
    assert_eq!(table.skipped, 0);
    assert_eq!(table.rows[0][1], 0.0, "kappa_out = 0 gives zero efficiency");
    for row in &table.rows {
        assert!((0.0..1.0).contains(&row[1]));
    }
}

#[test]
fn efficiency_rows_below_kappa_in_are_skipped() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        gamma_star_ueV = 40.0
        kappa_in_ueV = 5.0

        [sweep]
        variable = "kappa"
        min = 1.0
        max = 9.0
        count = 9
        "#,
    )
    .unwrap();
    let table = commands::efficiency_sweep(&config, None).unwrap();
    // kappa = 1..4 cannot carry kappa_in = 5.
    assert_eq!(table.skipped, 4);
    assert_eq!(table.rows.len(), 5);
    assert_eq!(table.rows[0][0], 5.0);
}

#[test]
fn efficiency_is_half_when_losses_split_evenly() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 0.5
        gamma_star_ueV = 40.0
        kappa_in_ueV = 2.5

        [sweep]
        variable = "kappa_out"
        min = 2.5
        max = 25.0
        count = 10
        "#,
    )
    .unwrap();
    let table = commands::efficiency_sweep(&config, None).unwrap();
    // First row: kappa_out = kappa_in = 2.5, frozen from the formula oracle.
    assert!(rel(table.rows[0][1], 0.49896804336485906) < 1e-14);
}

#[test]
fn efficiency_temperature_sweep_peaks_at_100k_when_detuned() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0
        delta_over_g = 10.0

        [sweep]
        variable = "T"
        min = 50.0
        max = 300.0
        count = 6
        "#,
    )
    .unwrap();
    let table =
        commands::efficiency_sweep(&config, Some(spsim_cli::config::TableMode::Nodes)).unwrap();
    assert_eq!(table.columns, vec!["T_K", "gamma_star_ueV", "efficiency"]);
    let ts: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    assert_eq!(ts, vec![50.0, 100.0, 150.0, 200.0, 300.0]);
    let peak = table
        .rows
        .iter()
        .max_by(|a, b| a[2].total_cmp(&b[2]))
        .unwrap();
    assert_eq!(peak[0], 100.0);
}

#[test]
fn efficiency_variants_add_columns() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_in_ueV = 5.0
        T_K = 50.0

        [sweep]
        variable = "kappa"
        min = 250.0
        max = 500.0
        count = 2

        [variants]
        delta_over_g = [0.0, 10.0, 20.0]
        "#,
    )
    .unwrap();
    let table = commands::efficiency_sweep(&config, None).unwrap();
    assert_eq!(
        table.columns,
        vec![
            "kappa_ueV",
            "efficiency_delta0",
            "efficiency_delta500",
            "efficiency_delta1000"
        ]
    );
    // Detuning suppresses the rate, hence the efficiency, monotonically.
    for row in &table.rows {
        assert!(row[1] > row[2] && row[2] > row[3]);
    }
}

#[test]
fn pumping_shifts_efficiency_opposite_ways_with_and_without_detuning() {
    // Pump variants reuse the efficiency formula with the pumped rate:
    // at delta = 10g pumping helps, at delta = 0 it hurts.
    let base = r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_in_ueV = 5.0
        T_K = 50.0
        delta_over_g = DELTA

        [sweep]
        variable = "kappa"
        min = 100.0
        max = 500.0
        count = 9

        [variants]
        pump_over_g = [0.0, 2.0]
    "#;
    let detuned = Config::parse(&base.replace("DELTA", "10.0")).unwrap();
    let table = commands::efficiency_sweep(&detuned, None).unwrap();
    assert_eq!(
        table.columns,
        vec!["kappa_ueV", "efficiency_P0", "efficiency_P100"]
    );
    for row in &table.rows {
        assert!(row[2] > row[1], "pumping must raise detuned efficiency");
    }
    let resonant = Config::parse(&base.replace("DELTA", "0.0")).unwrap();
    let table = commands::efficiency_sweep(&resonant, None).unwrap();
    for row in &table.rows {
        assert!(row[2] < row[1], "pumping must lower resonant efficiency");
    }
}

// ---------------------------------------------------------------------
// transfer-rate sweep
// ---------------------------------------------------------------------

const TRANSFER_CONFIG: &str = r#"
[system]
g_ueV = 50.0
gamma_over_g = 0.02
kappa_over_g = 5.0
kappa_in_ueV = 5.0
delta_over_g = 10.0

[variants]
pump_over_g = [0.0, 2.0]
"#;

#[test]
fn transfer_rate_nodes_match_frozen_oracle_values() {
    let config = Config::parse(TRANSFER_CONFIG).unwrap();
    let table =
        commands::transfer_rate_sweep(&config, Some(spsim_cli::config::TableMode::Nodes)).unwrap();
    assert_eq!(
        table.columns,
        vec!["T_K", "gamma_star_ueV", "R_ueV_P0", "R_ueV_P100"]
    );
    assert_eq!(table.rows.len(), 5);

    // gamma_star column carries the table nodes in ueV.
    let gs: Vec<f64> = table.rows.iter().map(|r| r[1]).collect();
    assert_eq!(gs, vec![40.0, 220.0, 3000.0, 4000.0, 6000.0]);

    // Frozen unpumped values at 50 and 100 K; the detuned peak sits at the
    // 100 K node, and pumping raises R at 50 K.
    assert!(rel(table.rows[0][2], 2.682816422524226) < 1e-14);
    assert!(rel(table.rows[1][2], 3.8548387228780174) < 1e-14);
    assert!(rel(table.rows[0][3], 3.391503546333056) < 1e-14);
    let peak = table
        .rows
        .iter()
        .max_by(|a, b| a[2].total_cmp(&b[2]))
        .unwrap();
    assert_eq!(peak[0], 100.0);
    assert!(table.rows[0][3] > table.rows[0][2]);
}

#[test]
fn resonant_transfer_rate_decreases_with_temperature() {
    let config =
        Config::parse(&TRANSFER_CONFIG.replace("delta_over_g = 10.0", "delta_ueV = 0.0")).unwrap();
    let table = commands::transfer_rate_sweep(&config, None).unwrap();
    // Interp mode default grid: strictly decreasing R through the whole range.
    let mut prev = f64::INFINITY;
    for row in &table.rows {
        assert!(row[2] < prev, "R must decrease with T at delta = 0");
        prev = row[2];
        assert!(row[3] < row[2], "pumping lowers the resonant rate");
    }
}

#[test]
fn transfer_rate_rejects_gamma_variants() {
    let bad = TRANSFER_CONFIG.replace("pump_over_g = [0.0, 2.0]", "gamma_over_g = [0.01, 0.02]");
    assert!(commands::transfer_rate_sweep(&Config::parse(&bad).unwrap(), None).is_err());
}

// ---------------------------------------------------------------------
// purcell sweep
// ---------------------------------------------------------------------

#[test]
fn purcell_columns_equal_rate_over_gamma_and_order_by_gamma() {
    let text = r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0
        delta_over_g = 10.0

        [variants]
        gamma_over_g = [0.01, 0.02, 0.03]
    "#;
    let config = Config::parse(text).unwrap();
    let mode = Some(spsim_cli::config::TableMode::Nodes);
    let purcell = commands::purcell_sweep(&config, mode).unwrap();
    assert_eq!(
        purcell.columns,
        vec!["T_K", "F_star_gamma0.5", "F_star_gamma1", "F_star_gamma1.5"]
    );

    // Larger gamma suppresses the Purcell factor pointwise.
    for row in &purcell.rows {
        assert!(row[1] > row[2] && row[2] > row[3]);
    }

    // F* = R / gamma, exactly, for the unpumped sweep: compare against the
    // transfer-rate command run at gamma = 1.0.
    let rate_config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0
        delta_over_g = 10.0
        "#,
    )
    .unwrap();
    let rates = commands::transfer_rate_sweep(&rate_config, mode).unwrap();
    for (p_row, r_row) in purcell.rows.iter().zip(&rates.rows) {
        assert!(rel(p_row[2], r_row[2] / 1.0) < 1e-14);
    }
}

#[test]
fn purcell_resonant_zero_dephasing_row_matches_textbook_form() {
    // T = 0 with the anchor gives gamma* = 0; at delta = 0 the value is
    // 4g²/(γ(κ+γ)), within γ/κ (0.4%) of the textbook 4g²/(κγ).
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0

        [sweep]
        variable = "T"
        min = 0.0
        max = 300.0
        count = 4
        "#,
    )
    .unwrap();
    let table = commands::purcell_sweep(&config, None).unwrap();
    assert_eq!(table.rows[0][0], 0.0);
    assert!(rel(table.rows[0][1], 4.0 * 2500.0 / (1.0 * 251.0)) < 1e-14);
    assert!(rel(table.rows[0][1], 4.0 * 2500.0 / (250.0 * 1.0)) < 5e-3);
}

// ---------------------------------------------------------------------
// dynamics
// ---------------------------------------------------------------------

#[test]
fn lossless_dynamics_reproduces_vacuum_rabi() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 0.0
        gamma_star_ueV = 0.0

        [hilbert]
        n_max = 1

        [dynamics]
        initial = "excited_vacuum"
        t_max = 0.18849555921538758
        count = 400
        "#,
    )
    .unwrap();
    let table = commands::dynamics(&config).unwrap();
    assert_eq!(
        table.columns,
        vec!["t_hbar_per_ueV", "n_e", "n_ph", "trace_err", "min_eig"]
    );
    for row in &table.rows {
        let expect = (50.0 * row[0]).cos().powi(2);
        assert!((row[1] - expect).abs() < 1e-6);
        assert!(row[3] < 1e-8, "trace err");
        assert!(row[4] > -1e-8, "positivity");
    }
}

#[test]
fn all_zero_rates_run_is_constant() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 0.0
        gamma_ueV = 0.0
        gamma_star_ueV = 0.0

        [dynamics]
        initial = "ground_vacuum"
        t_max = 5.0
        count = 50
        "#,
    )
    .unwrap();
    let table = commands::dynamics(&config).unwrap();
    for row in &table.rows {
        assert_eq!(row[1], 0.0);
        assert_eq!(row[2], 0.0);
    }
}

#[test]
fn working_point_dynamics_decays_at_gamma_plus_rate() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0
        T_K = 100.0

        [hilbert]
        n_max = 2

        [dynamics]
        initial = "excited_vacuum"
        t_max = 0.55
        count = 1500
        "#,
    )
    .unwrap();
    let table = commands::dynamics(&config).unwrap();
    let times: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let n_e: Vec<f64> = table.rows.iter().map(|r| r[1]).collect();
    let fitted = spsim_core::lindblad::fit_decay_rate(&times, &n_e).unwrap();
    let expected = 1.0 + 21.231422505307854;
    assert!(
        (fitted - expected).abs() / expected < 0.10,
        "fitted {fitted} vs {expected}"
    );
}

// ---------------------------------------------------------------------
// CSV round-trip and provenance reproduction
// ---------------------------------------------------------------------

#[test]
fn csv_round_trips_exactly_and_provenance_reruns_bit_identically() {
    type Runner = fn(&Config) -> Table;
    let configs: Vec<(&str, Runner)> = vec![
        (GEOMETRY_CONFIG, |c| commands::geometry_sweep(c).unwrap()),
        (TRANSFER_CONFIG, |c| {
            commands::transfer_rate_sweep(c, Some(spsim_cli::config::TableMode::Nodes)).unwrap()
        }),
    ];
    for (text, run) in configs {
        let table = run(&Config::parse(text).unwrap());
        let csv = table.to_csv();

        // Re-parse: every value identical (17 significant digits).
        let parsed = ParsedCsv::parse(&csv).unwrap();
        assert_eq!(parsed.columns, table.columns);
        assert_eq!(parsed.rows.len(), table.rows.len());
        for (a, b) in parsed.rows.iter().zip(&table.rows) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x, y, "round-trip must be exact");
            }
        }

        // Re-run from the provenance block: identical bytes.
        let rerun = rerun_from_provenance(&csv);
        assert_eq!(rerun.to_csv(), csv);
    }
}

#[test]
fn efficiency_temperature_provenance_reruns_identically() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0
        delta_over_g = 10.0

        [sweep]
        variable = "T"
        min = 10.0
        max = 300.0
        count = 30
        "#,
    )
    .unwrap();
    let table = commands::efficiency_sweep(&config, None).unwrap();
    let csv = table.to_csv();
    assert_eq!(rerun_from_provenance(&csv).to_csv(), csv);
}

#[test]
fn dynamics_provenance_reruns_identically() {
    let config = Config::parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 0.0
        gamma_star_ueV = 0.0

        [hilbert]
        n_max = 1

        [dynamics]
        initial = "custom"
        diagonal = [0.25, 0.25, 0.25, 0.25]
        t_max = 0.05
        count = 40
        "#,
    )
    .unwrap();
    let table = commands::dynamics(&config).unwrap();
    let csv = table.to_csv();
    assert_eq!(rerun_from_provenance(&csv).to_csv(), csv);
}

#[test]
fn svg_output_contains_a_polyline_per_value_column() {
    let table = commands::geometry_sweep(&Config::parse(GEOMETRY_CONFIG).unwrap()).unwrap();
    let svg = table.to_svg();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(svg.contains("kappa_in_ueV"));
}
