//! Runs every acceptance criterion at full size and prints one line each.
//! Set `AZTEC_ACCEPTANCE_QUICK=1` for the reduced sizes.

use std::process::ExitCode;

use aztec_core::verify::{run_criterion, VerifyOptions};

fn main() -> ExitCode {
    let quick = std::env::var_os("AZTEC_ACCEPTANCE_QUICK").is_some_and(|v| v != "0");
    let opts = VerifyOptions { quick };
    let mut failed = Vec::new();
    println!("acceptance ({} mode)", if quick { "quick" } else { "full" });
    for id in 1..=15 {
        let r = run_criterion(id, opts);
        println!("{r}");
        if !r.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: 15/15 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
