use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ordersense::lawspec::{format_law, parse_law, parse_law_list};
use ordersense::report::Format;
use ordersense::run::resolve_seed;
use ordersense::{expr, reproduce, run_scenario, CliError, RunOptions, Scenario};
use ordersense_core::hoeffding::decompose;
use ordersense_core::orders::{check, CheckConfig};
use ordersense_core::{Relation, Verdict};

#[derive(Parser)]
#[command(name = "ordersense", version, about = "Sobol indices under stochastically ordered input laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether X <=rel Y.
    CheckOrder {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        relation: Relation,
        /// Quantile grid size.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run a scenario file.
    Sobol {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Rebuild a bundled table.
    Reproduce {
        #[arg(value_parser = ["table1", "table2", "table3", "table4", "counterexamples", "all"])]
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write one file per table here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Closed-form indices of a structured function.
    Decompose {
        /// Expression in x1, x2, ...
        #[arg(long)]
        function: String,
        /// Comma-separated laws, one per input.
        #[arg(long)]
        inputs: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

const EXIT_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

fn seed(cli: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    let env = std::env::var("ORDERSENSE_SEED").ok();
    resolve_seed(cli, env.as_deref(), file).map_err(|message| CliError::Scenario {
        name: "environment".into(),
        message,
    })
}

fn check_order(x: &str, y: &str, relation: Relation, points: Option<usize>) -> Result<u8, CliError> {
    let (lx, ly) = (parse_law(x)?, parse_law(y)?);
    let cfg = match points {
        Some(n) => CheckConfig::with_points(n)?,
        None => CheckConfig::default(),
    };
    let r = check(relation, &lx, &ly, &cfg)?;
    println!("{} <={} {}: {}", format_law(&lx), relation, format_law(&ly), r.verdict);
    if let Some(w) = r.witness {
        println!("witness at {:?}: {} > {}", w.at, w.lhs, w.rhs);
    }
    if let Some(note) = &r.note {
        println!("note: {note}");
    }
    Ok(match r.verdict {
        Verdict::Holds => 0,
        Verdict::Fails => EXIT_FAILED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn decompose_cmd(function: &str, inputs: &str, format: Format) -> Result<u8, CliError> {
    let laws = parse_law_list(inputs)?;
    let sf = expr::parse_structured(function, laws.len())?;
    if sf.dim() != laws.len() {
        return Err(CliError::Expression {
            expr: function.into(),
            message: format!("{} inputs expected, {} given", sf.dim(), laws.len()),
        });
    }
    let d = decompose(&sf, &laws)?;
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(std::io::stdout());
            w.write_record(["parameter", "law", "first", "total"])?;
            for (i, law) in laws.iter().enumerate() {
                w.write_record([
                    format!("x{}", i + 1),
                    format_law(law),
                    format!("{:.6}", d.first_order[i]),
                    format!("{:.6}", d.total[i]),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            println!("mean {:.6}, variance {:.6e}", d.f_empty, d.total_variance);
            for (i, law) in laws.iter().enumerate() {
                println!(
                    "x{:<3} {:<24} S = {:.6}  S_T = {:.6}",
                    i + 1,
                    format_law(law),
                    d.first_order[i],
                    d.total[i]
                );
            }
        }
    }
    Ok(0)
}

fn report_failures(name: &str, failures: usize, diff: &str, warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if failures > 0 {
        eprintln!("{name}: {failures} expectation(s) missed");
        eprint!("{diff}");
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::CheckOrder { x, y, relation, points } => check_order(&x, &y, relation, points),
        Command::Decompose { function, inputs, format } => decompose_cmd(&function, &inputs, format),
        Command::Sobol {
            scenario,
            seed: s,
            samples,
            bootstrap,
            format,
        } => {
            let sc = Scenario::load(&scenario)?;
            let opts = RunOptions {
                seed: Some(seed(s, sc.seed)?),
                samples,
                bootstrap,
            };
            let r = run_scenario(&sc, &opts)?;
            print!("{}", ordersense::report::emit_run(&r, format)?);
            let failures = r.failures();
            report_failures(&r.scenario, failures, &ordersense::report::diff_table(&r), &r.warnings());
            Ok(if failures > 0 { EXIT_FAILED } else { 0 })
        }
        Command::Reproduce {
            target,
            seed: s,
            samples,
            bootstrap,
            format,
            out_dir,
        } => {
            let opts = RunOptions {
                seed: Some(seed(s, None)?),
                samples,
                bootstrap,
            };
            let names: Vec<&str> = if target == "all" {
                ordersense::TARGETS.to_vec()
            } else {
                vec![target.as_str()]
            };
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
            }
            let mut failures = 0;
            for (n, name) in names.iter().enumerate() {
                let a = reproduce(name, &opts, format)?.remove(0);
                eprintln!("elapsed {} {:.3}", a.name, a.elapsed.as_secs_f64());
                report_failures(&a.name, a.failures, &a.diff, &a.warnings);
                failures += a.failures;
                match &out_dir {
                    Some(dir) => {
                        let ext = match format {
                            Format::Csv => "csv",
                            Format::Text => "txt",
                        };
                        std::fs::write(dir.join(format!("{}.{ext}", a.name)), &a.body)?;
                    }
                    None => {
                        if n > 0 {
                            println!();
                        }
                        print!("{}", a.body);
                    }
                }
            }
            Ok(if failures > 0 { EXIT_FAILED } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
