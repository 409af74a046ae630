use std::process::ExitCode;

use clap::Parser;
use softmapper_cli::args::{Cli, Command};
use softmapper_cli::commands;
use softmapper_cli::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => {
            let cfg = args.resolve()?;
            let built = commands::cmd_build(&cfg)?;
            println!(
                "{} nodes, {} edges, beta_1 = {} -> {}",
                built.graph.node_count(),
                built.graph.edge_count(),
                built.graph.betti_1(),
                cfg.output.display()
            );
        }
        Command::Optimize(args) => {
            let cfg = args.resolve()?;
            let run = commands::cmd_optimize(&cfg)?;
            println!("theta_final = {:?}", run.theta_final.theta);
            if let Some(c) = run.correlation {
                println!("correlation with the optimal direction: {c:.4}");
            }
        }
        Command::Synth(args) => {
            let cfg = args.resolve()?;
            println!("{}", commands::cmd_synth(&cfg)?.display());
        }
        Command::Export(args) => {
            for path in commands::cmd_export(args.graph.as_deref(), args.trace.as_deref(), &args.output)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
