use std::process::ExitCode;

use rgscope_core::validation::{run_checks, ValidationConfig};

fn main() -> ExitCode {
    let outcomes = match run_checks(&[], &ValidationConfig::default()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("acceptance suite could not start: {e}");
            return ExitCode::FAILURE;
        }
    };
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
