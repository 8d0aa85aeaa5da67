//! The acceptance criteria, one PASS/FAIL line each; exits nonzero on any failure.
//!
//! Also runs the sign-flip mutation and requires criterion 1 to catch it.

use cone_cli::acceptance::{run_all, run_criterion, SuiteOptions};
use cone_ext::C64;

fn main() {
    let opts = SuiteOptions::default();
    let outcomes = run_all(&opts);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let mut failed = outcomes.iter().filter(|o| !o.passed).count();

    let mutated = SuiteOptions { pairing_factor: C64::new(0.0, -1.0), ..SuiteOptions::default() };
    let m = run_criterion(1, &mutated).expect("criterion 1 exists");
    if m.passed {
        println!("FAIL [mutation] sign-flipped prefactor was not detected by criterion 1");
        failed += 1;
    } else {
        println!("PASS [mutation] sign-flipped prefactor fails criterion 1: {}", m.detail);
    }

    println!("{} criteria, {failed} failures", outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
