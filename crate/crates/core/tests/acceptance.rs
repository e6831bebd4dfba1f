//! Acceptance suite: runs every self-check criterion at its pinned
//! tolerance and prints one pass/fail line per criterion
//! (`cargo test --test acceptance -- --nocapture` to see them all).

use std::sync::OnceLock;

use spsim_core::dephasing::DephasingTable;
use spsim_core::validation::{run_all, CheckResult};

fn results() -> &'static [CheckResult] {
    static RESULTS: OnceLock<Vec<CheckResult>> = OnceLock::new();
    RESULTS.get_or_init(|| run_all(&DephasingTable::builtin_ingaas()))
}

fn criterion(id: usize) -> &'static CheckResult {
    let r = results()
        .iter()
        .find(|r| r.id == id)
        .expect("criterion id exists");
    println!("{}", r.summary_line());
    r
}

macro_rules! criterion_test {
    ($name:ident, $id:expr) => {
        #[test]
        fn $name() {
            let r = criterion($id);
            assert!(r.passed, "{}", r.summary_line());
        }
    };
}

criterion_test!(criterion_01_rate_reproduction_at_100k, 1);
criterion_test!(criterion_02_exact_linewidth_optimality, 2);
criterion_test!(criterion_03_half_efficiency_point, 3);
criterion_test!(criterion_04_purcell_identities, 4);
criterion_test!(criterion_05_vacuum_rabi_oracle, 5);
criterion_test!(criterion_06_adiabatic_elimination_consistency, 6);
criterion_test!(criterion_07_conservation_and_truncation, 7);
criterion_test!(criterion_08_temperature_and_pump_trends, 8);
criterion_test!(criterion_09_geometry_scaling_laws, 9);
criterion_test!(criterion_10_rate_equations_vs_matrix_exponential, 10);
