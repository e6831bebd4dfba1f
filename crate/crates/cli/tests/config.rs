//! Config parsing and resolution.

use spsim_cli::config::{Config, InitialState, Spacing, SweepVariable, TableMode};
use spsim_cli::error::CliError;

fn parse(text: &str) -> Result<Config, CliError> {
    Config::parse(text)
}

#[test]
fn over_g_keys_resolve_against_g() {
    let c = parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_over_g = 0.02
        kappa_over_g = 5.0
        kappa_in_ueV = 5.0
        delta_over_g = 10.0
        pump_over_g = 2.0
        gamma_star_ueV = 40.0
        "#,
    )
    .unwrap();
    let sys = c.system.unwrap();
    assert_eq!(sys.gamma, 1.0);
    assert_eq!(sys.kappa_in, 5.0);
    assert_eq!(sys.kappa_out, 245.0);
    assert_eq!(sys.delta, 500.0);
    assert_eq!(sys.pump, 100.0);
    assert_eq!(sys.gamma_star, Some(40.0));
}

#[test]
fn kappa_out_can_derive_kappa_in() {
    let c = parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        kappa_ueV = 250.0
        kappa_out_ueV = 245.0
        "#,
    )
    .unwrap();
    let sys = c.system.unwrap();
    assert_eq!(sys.kappa_in, 5.0);
    assert_eq!(sys.gamma_star, None);
}

#[test]
fn duplicate_energy_keys_are_rejected() {
    let err = parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        gamma_over_g = 0.02
        "#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("only one of"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn kappa_overspecification_is_rejected() {
    for body in [
        "kappa_ueV = 250.0\nkappa_in_ueV = 5.0\nkappa_out_ueV = 245.0",
        "kappa_ueV = 250.0",
        "kappa_ueV = 250.0\nkappa_in_ueV = 300.0",
    ] {
        let text = format!("[system]\ng_ueV = 50.0\ngamma_ueV = 1.0\n{body}\n");
        assert!(parse(&text).is_err(), "{body}");
    }
}

#[test]
fn temperature_key_resolves_gamma_star_through_the_table() {
    let c = parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        kappa_in_ueV = 5.0
        kappa_out_ueV = 245.0
        T_K = 100.0
        "#,
    )
    .unwrap();
    assert_eq!(c.system.unwrap().gamma_star, Some(220.0));

    // T_K together with an explicit gamma_star is ambiguous.
    assert!(parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        kappa_out_ueV = 245.0
        T_K = 100.0
        gamma_star_ueV = 40.0
        "#,
    )
    .is_err());

    // Out-of-table temperatures are config errors.
    assert!(parse(
        r#"
        [system]
        g_ueV = 50.0
        gamma_ueV = 1.0
        kappa_out_ueV = 245.0
        T_K = 400.0
        "#,
    )
    .is_err());
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    assert!(parse("[bogus]\nx = 1\n").is_err());
    assert!(
        parse("[system]\ng_ueV = 50.0\ngamma_ueV = 1.0\nkappa_out_ueV = 1.0\ntypo = 3\n").is_err()
    );
    assert!(
        parse("[sweep]\nvariable = \"kappa\"\nmin = 1.0\nmax = 2.0\ncount = 5\nbad = 1\n").is_err()
    );
}

#[test]
fn sweep_invariants_are_enforced() {
    let base = "[sweep]\nvariable = \"kappa\"\n";
    assert!(parse(&format!("{base}min = 1.0\nmax = 2.0\ncount = 1\n")).is_err());
    assert!(parse(&format!("{base}min = 2.0\nmax = 1.0\ncount = 5\n")).is_err());
    assert!(parse(&format!(
        "{base}min = 0.0\nmax = 2.0\ncount = 5\nspacing = \"log\"\n"
    ))
    .is_err());
    let ok = parse(&format!(
        "{base}min = 1.0\nmax = 2.0\ncount = 5\nspacing = \"log\"\n"
    ))
    .unwrap();
    let sweep = ok.sweep.unwrap();
    assert_eq!(sweep.variable, SweepVariable::Kappa);
    assert_eq!(sweep.spacing, Spacing::Log);
    let grid = sweep.grid();
    assert_eq!(grid.len(), 5);
    assert!((grid[0] - 1.0).abs() < 1e-12 && (grid[4] - 2.0).abs() < 1e-12);
    // Log spacing has a constant ratio.
    let r0 = grid[1] / grid[0];
    let r1 = grid[3] / grid[2];
    assert!((r0 - r1).abs() < 1e-12);
}

#[test]
fn variant_over_g_needs_system_g() {
    let err = parse("[variants]\npump_over_g = [0.0, 2.0]\n").unwrap_err();
    assert!(err.to_string().contains("g_ueV"), "{err}");
    let ok = parse(
        "[system]\ng_ueV = 50.0\ngamma_ueV = 1.0\nkappa_out_ueV = 245.0\n\
         [variants]\npump_over_g = [0.0, 2.0]\n",
    )
    .unwrap();
    assert_eq!(ok.variants.pump, Some(vec![0.0, 100.0]));
}

#[test]
fn custom_dephasing_table_is_loaded() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    std::fs::write(&path, "T_K,gamma_star_meV\n10,0.1\n20,0.4\n").unwrap();
    let c = parse(&format!(
        "[dephasing]\ntable = \"{}\"\nmode = \"nodes\"\n",
        path.display()
    ))
    .unwrap();
    assert_eq!(c.dephasing.mode, TableMode::Nodes);
    assert_eq!(c.dephasing.table.t_max(), 20.0);
    // Missing file is a config error.
    assert!(parse("[dephasing]\ntable = \"/nonexistent/t.csv\"\n").is_err());
}

#[test]
fn dynamics_section_parses() {
    let c = parse(
        r#"
        [dynamics]
        initial = "custom"
        diagonal = [0.5, 0.0, 0.5, 0.0]
        t_max = 1.0
        count = 100
        "#,
    )
    .unwrap();
    let dyn_section = c.dynamics.unwrap();
    assert_eq!(
        dyn_section.initial,
        InitialState::Custom(vec![0.5, 0.0, 0.5, 0.0])
    );
    assert!(parse("[dynamics]\ninitial = \"custom\"\nt_max = 1.0\n").is_err());
    assert!(parse("[dynamics]\nt_max = -1.0\n").is_err());
    assert!(parse("[dynamics]\ninitial = \"upside_down\"\nt_max = 1.0\n").is_err());
}

#[test]
fn hilbert_defaults_to_five() {
    assert_eq!(parse("").unwrap().n_max, 5);
    assert_eq!(parse("[hilbert]\nn_max = 2\n").unwrap().n_max, 2);
    assert!(parse("[hilbert]\nn_max = 0\n").is_err());
}

#[test]
fn provenance_top_level_keys_are_ignored_on_reparse() {
    let c = parse("command = \"transfer-rate-sweep\"\nskipped_rows = 0\n").unwrap();
    assert!(c.system.is_none());
}
