//! `lda`: command-line harness for low-density lattice experiments.
//!
//! Exit codes: 0 success, 1 other failure, 2 budget exceeded, 3 invalid
//! configuration (including bad arguments).

mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;
use lda_core::Error;

use args::Cli;
use commands::Global;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } | Error::ResampleExhausted(_) => 2,
        Error::ModulusTooLarge(_)
        | Error::NotPrime(_)
        | Error::DegreeInfeasible { .. }
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::EntropyDomain { .. }
        | Error::Domain(_)
        | Error::DivisionByZero(_)
        | Error::ExponentNonNegative(_)
        | Error::InvalidConfig(_)
        | Error::Parse { .. }
        | Error::Json(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let global = Global {
        seed: cli.seed,
        workers: cli.workers,
        format: cli.format.into(),
        out: cli.out.as_deref(),
    };
    match commands::run(&cli.command, &global) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_and_config_errors_map_to_documented_codes() {
        assert_eq!(exit_code(&Error::BudgetExceeded { needed: 1e9, budget: 10 }), 2);
        assert_eq!(exit_code(&Error::ResampleExhausted(5)), 2);
        assert_eq!(exit_code(&Error::NotPrime(9)), 3);
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 3);
        assert_eq!(exit_code(&Error::SingularBasis), 1);
    }

    #[test]
    fn argument_definitions_are_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
