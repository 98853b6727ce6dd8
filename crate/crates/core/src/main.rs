use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hirzebruch::global_fields::Window;
use hirzebruch::report::{self, Inputs, Section, VerificationReport};
use hirzebruch::Error;

#[derive(Parser)]
#[command(
    name = "hirzebruch",
    version,
    about = "Exact verification of gluing, global fields, cohomology and lifting on the W family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON report here.
    #[arg(long)]
    report_path: Option<PathBuf>,
    /// Seed for randomized spot checks.
    #[arg(long, default_value_t = 20240)]
    seed: u64,
    /// Directory with `w_family.manifest` and `structure_constants.table`.
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Transition consistency and the embedded surface models.
    VerifyGluing {
        #[command(flatten)]
        common: Common,
    },
    /// Global fields at t-order N and v-degree D.
    GlobalFields {
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, default_value_t = 5)]
        degree: u32,
        #[command(flatten)]
        common: Common,
    },
    /// H0 and H1 of the tangent sheaf of the central fiber and the
    /// Kodaira-Spencer class.
    Cohomology {
        /// `w` for [-w, w] or `lo:hi`; repeat for a sweep.
        #[arg(long = "window")]
        windows: Vec<Window>,
        #[command(flatten)]
        common: Common,
    },
    /// Fundamental fields and the bracket table.
    Brackets {
        #[command(flatten)]
        common: Common,
    },
    /// Order-by-order lifting of the fundamental fields.
    Lift {
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Every section with default parameters.
    All {
        #[arg(long = "window")]
        windows: Vec<Window>,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(Error),
    Internal(Error),
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e)
}

fn internal(e: Error) -> Failure {
    Failure::Internal(e)
}

fn windows_or_default(w: Vec<Window>) -> Vec<Window> {
    if w.is_empty() {
        Window::default_sweep()
    } else {
        w
    }
}

fn run(cli: Cli) -> Result<(VerificationReport, Common), Failure> {
    let (name, common) = match &cli.command {
        Command::VerifyGluing { common } => ("verify-gluing", common),
        Command::GlobalFields { common, .. } => ("global-fields", common),
        Command::Cohomology { common, .. } => ("cohomology", common),
        Command::Brackets { common } => ("brackets", common),
        Command::Lift { common, .. } => ("lift", common),
        Command::All { common, .. } => ("all", common),
    };
    let common = common.clone();
    let inputs = match &common.fixtures {
        Some(dir) => Inputs::from_dir(dir, common.seed).map_err(usage)?,
        None => Inputs::stock(common.seed),
    };
    inputs.family.primary_transition().map_err(usage)?;

    let mut rep = VerificationReport::new(name);
    let sections: Vec<Section> = match cli.command {
        Command::VerifyGluing { .. } => vec![report::gluing_section(&inputs).map_err(internal)?],
        Command::GlobalFields { order, degree, .. } => {
            report::check_field_flags(order, degree).map_err(usage)?;
            vec![report::global_fields_section(&inputs, order, degree).map_err(internal)?]
        }
        Command::Cohomology { windows, .. } => {
            let windows = windows_or_default(windows);
            if let Some(w) = windows.iter().find(|w| !w.covers(&Window::symmetric(3))) {
                return Err(usage(Error::Precondition(format!("window {w} must contain [-3,3]"))));
            }
            vec![report::cohomology_section(&inputs, &windows).map_err(internal)?]
        }
        Command::Brackets { .. } => vec![report::brackets_section(&inputs).map_err(internal)?],
        Command::Lift { order, degree, .. } => {
            report::check_lift_flags(order, degree).map_err(usage)?;
            vec![report::lift_section(&inputs, order, degree).map_err(internal)?]
        }
        Command::All { windows, .. } => {
            let windows = windows_or_default(windows);
            vec![
                report::gluing_section(&inputs).map_err(internal)?,
                report::global_fields_section(&inputs, 2, 5).map_err(internal)?,
                report::cohomology_section(&inputs, &windows).map_err(internal)?,
                report::brackets_section(&inputs).map_err(internal)?,
                report::lift_section(&inputs, 2, 4).map_err(internal)?,
            ]
        }
    };
    for s in sections {
        rep.extend(s);
    }
    Ok((rep, common))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((rep, common)) => {
            for c in &rep.checks {
                println!("{:<10} {:<36} {:>8.3} s", c.status.to_string(), c.id, c.wall_time);
            }
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = &common.report_path {
                if let Err(e) = rep.write(path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if rep.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
