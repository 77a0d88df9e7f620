use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use signed_fj::io::{self, IoError, RunReport, Scenario};
use signed_fj::single_topic::{single_topic_minf, single_topic_winf, single_topic_yinf};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "signed-fj", version, about = "Signed homophily Friedkin-Johnsen opinion dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Maximum number of steps.
    #[arg(long)]
    horizon: Option<u64>,
    /// Convergence tolerance on the opinion increment.
    #[arg(long)]
    tol: Option<f64>,
    /// Zero band used when taking signs of inner products.
    #[arg(long = "sign-eps")]
    sign_eps: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory, influence, summary and DOT files.
    Simulate {
        scenario: PathBuf,
        /// Output directory (default: runs/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the single-topic closed-form limit as JSON.
    ClosedForm { scenario: PathBuf },
    /// Run every invariant check; exit code 0 iff all pass.
    Check {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Rewrite the DOT graph of a finished run from its summary.
    ExportDot { run_dir: PathBuf },
    /// Run several scenarios in parallel, one output directory each.
    Sweep {
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &Path, o: &Overrides) -> Result<Scenario, IoError> {
    let mut s = io::load_scenario(path)?;
    if let Some(h) = o.horizon {
        s.config.horizon = h;
    }
    if let Some(t) = o.tol {
        s.config.tol_conv = t;
    }
    if let Some(e) = o.sign_eps {
        s.config.sign_eps = e;
    }
    s.config.validate()?;
    Ok(s)
}

fn report_code(report: &RunReport) -> u8 {
    if !report.converged {
        EXIT_NOT_CONVERGED
    } else if !report.all_pass() {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    }
}

fn fail(e: &IoError) -> u8 {
    eprintln!("error: {e}");
    EXIT_VALIDATION
}

fn print_properties(report: &RunReport) {
    for (name, status) in &report.property_results {
        println!("{name:<28} {status}");
    }
}

#[derive(Serialize)]
struct ClosedForm {
    scenario: String,
    w_inf_signs: Vec<Vec<i8>>,
    m_inf: Vec<Vec<f64>>,
    y_inf: Vec<f64>,
}

fn closed_form(path: &Path) -> Result<ClosedForm, String> {
    let s = io::load_scenario(path).map_err(|e| e.to_string())?;
    let y0 = s.inputs.y0();
    if y0.topics() != 1 {
        return Err(format!("closed form needs a single topic, scenario has {}", y0.topics()));
    }
    let col: Vec<f64> = y0.as_matrix().column(0).iter().copied().collect();
    let eps = s.config.sign_eps;
    let theta = s.inputs.theta();
    let err = |e: signed_fj::single_topic::SingleTopicError| e.to_string();
    Ok(ClosedForm {
        scenario: s.name.clone(),
        w_inf_signs: single_topic_winf(&col, eps).map_err(err)?.to_rows(),
        m_inf: single_topic_minf(&col, theta, eps).map_err(err)?.to_rows(),
        y_inf: single_topic_yinf(&col, theta, eps).map_err(err)?,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK });
        }
    };
    let code = match cli.command {
        Command::Simulate { scenario, out, overrides } => match load(&scenario, &overrides) {
            Err(e) => fail(&e),
            Ok(s) => {
                let dir = out.unwrap_or_else(|| Path::new("runs").join(&s.name));
                match io::run(&s, &dir) {
                    Err(e) => fail(&e),
                    Ok(report) => {
                        println!(
                            "{}: converged={} steps={} lock_time={} -> {}",
                            report.scenario,
                            report.converged,
                            report.steps,
                            report.lock_time.map_or("-".into(), |t| t.to_string()),
                            dir.display()
                        );
                        for (name, status) in report.failures() {
                            eprintln!("check {name}: {status}");
                        }
                        report_code(&report)
                    }
                }
            }
        },
        Command::ClosedForm { scenario } => match closed_form(&scenario) {
            Ok(cf) => {
                println!("{}", serde_json::to_string_pretty(&cf).expect("serializable"));
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_VALIDATION
            }
        },
        Command::Check { scenario, overrides } => {
            match load(&scenario, &overrides).and_then(|s| io::analyze(&s)) {
                Err(e) => fail(&e),
                Ok(a) => {
                    print_properties(&a.report);
                    if a.report.all_pass() {
                        EXIT_OK
                    } else if !a.report.converged {
                        EXIT_NOT_CONVERGED
                    } else {
                        EXIT_INVARIANT
                    }
                }
            }
        }
        Command::ExportDot { run_dir } => match io::export_dot(&run_dir) {
            Ok((path, dot)) => {
                print!("{dot}");
                eprintln!("wrote {}", path.display());
                EXIT_OK
            }
            Err(e) => fail(&e),
        },
        Command::Sweep { scenarios, out, overrides } => {
            let codes: Vec<u8> = scenarios
                .par_iter()
                .map(|path| {
                    let s = match load(path, &overrides) {
                        Ok(s) => s,
                        Err(e) => {
                            eprintln!("{}: {e}", path.display());
                            return EXIT_VALIDATION;
                        }
                    };
                    match io::run(&s, &out.join(&s.name)) {
                        Ok(report) => {
                            println!(
                                "{}: converged={} steps={} all_pass={}",
                                report.scenario,
                                report.converged,
                                report.steps,
                                report.all_pass()
                            );
                            report_code(&report)
                        }
                        Err(e) => {
                            eprintln!("{}: {e}", path.display());
                            EXIT_VALIDATION
                        }
                    }
                })
                .collect();
            codes.into_iter().max().unwrap_or(EXIT_OK)
        }
    };
    ExitCode::from(code)
}
