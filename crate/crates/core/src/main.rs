use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use obo::chain::iterate_dynamics;
use obo::milp::{budget_sweep, MilpOptions, DEFAULT_NODE_LIMIT};
use obo::model::{self, confidence_matrix, expressed_opinions, Instance, LoadError, PlanFile};
use obo::report;
use obo::solve::{self, Mode, SolveError, SolveOptions};
use obo::Execution;

#[derive(Parser)]
#[command(
    name = "obo",
    version,
    about = "Spend a budget to maximize opinion supporters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Auto,
    Knapsack,
    Milp,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file.
    Validate { instance: PathBuf },
    /// Print transient agents and ergodic classes.
    Decompose { instance: PathBuf },
    /// Stationary distributions, hitting probabilities and limit opinions.
    Analyze { instance: PathBuf },
    /// Cheapest payments lifting one class (1-based) to the threshold.
    MinClassBudget {
        #[arg(long = "class")]
        class: usize,
        instance: PathBuf,
    },
    /// Optimal payment plan for one budget.
    Solve {
        /// Defaults to the instance's budget.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Use the knapsack FPTAS with this epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        instance: PathBuf,
    },
    /// Solve for each budget in an ascending list.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<f64>,
        instance: PathBuf,
    },
    /// Run the averaging dynamics from a plan's expressed opinions.
    Simulate {
        /// Plan JSON as written by `solve`; no payments when omitted.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        instance: PathBuf,
    },
}

enum Failure {
    /// Bad input: exit code 1.
    Input(Value),
    /// Solver trouble: exit code 2.
    Solver(Value),
}

fn load_error(e: LoadError) -> Failure {
    let detail = match &e {
        LoadError::Invalid(v) => json!({ "error": "invalid instance", "violations": v.0 }),
        LoadError::Syntax { line, column, .. } => {
            json!({ "error": e.to_string(), "line": line, "column": column })
        }
        LoadError::Field { field, .. } => json!({ "error": e.to_string(), "field": field }),
        LoadError::Io { .. } => json!({ "error": e.to_string() }),
    };
    Failure::Input(detail)
}

fn solve_error(e: SolveError) -> Failure {
    match e {
        SolveError::TransientsPresent(_) | SolveError::BadEpsilon(_) => {
            Failure::Input(json!({ "error": e.to_string() }))
        }
        _ => Failure::Solver(json!({ "error": e.to_string() })),
    }
}

fn load(path: &PathBuf) -> Result<Instance, Failure> {
    model::load_instance(path).map_err(load_error)
}

fn node_limit() -> usize {
    std::env::var("OBO_NODE_LIMIT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_NODE_LIMIT)
}

fn render(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize") + "\n"
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Validate { instance } => {
            let inst = load(instance)?;
            Ok(render(&json!({ "valid": true, "agents": inst.len() })))
        }
        Command::Decompose { instance } => {
            let inst = load(instance)?;
            let d = obo::decompose::decompose(&confidence_matrix(&inst));
            Ok(render(&report::decomposition_json(&inst, &d)))
        }
        Command::Analyze { instance } => {
            let inst = load(instance)?;
            let analysis = solve::analyze(&inst).map_err(|e| solve_error(e.into()))?;
            Ok(render(&report::analysis_json(&inst, &analysis)))
        }
        Command::MinClassBudget { class, instance } => {
            let inst = load(instance)?;
            let analysis = solve::analyze(&inst).map_err(|e| solve_error(e.into()))?;
            let m = analysis.num_classes();
            if *class == 0 || *class > m {
                return Err(Failure::Input(
                    json!({ "error": format!("class must be between 1 and {m}") }),
                ));
            }
            let result = solve::class_budget(&inst, &analysis, class - 1)
                .map_err(|e| solve_error(e.into()))?;
            let members = &analysis.decomposition.classes[class - 1];
            Ok(render(&report::class_budget_json(
                &inst, members, *class, &result,
            )))
        }
        Command::Solve {
            budget,
            mode,
            epsilon,
            instance,
        } => {
            let mut inst = load(instance)?;
            if let Some(b) = budget {
                inst = inst.with_budget(*b).map_err(|e| load_error(e.into()))?;
            }
            let analysis = solve::analyze(&inst).map_err(|e| solve_error(e.into()))?;
            let options = SolveOptions {
                mode: match mode {
                    ModeArg::Auto => Mode::Auto,
                    ModeArg::Knapsack => Mode::Knapsack,
                    ModeArg::Milp => Mode::Milp,
                },
                epsilon: *epsilon,
                milp: MilpOptions {
                    node_limit: node_limit(),
                },
            };
            let solution = solve::solve(&inst, &analysis, &options).map_err(solve_error)?;
            Ok(if csv {
                format!(
                    "{}\n{}\n",
                    report::CSV_HEADER,
                    report::csv_row(inst.budget(), &solution)
                )
            } else {
                render(&report::solution_json(&inst, &solution))
            })
        }
        Command::Sweep { budgets, instance } => {
            let inst = load(instance)?;
            if let Some(&b) = budgets.iter().find(|b| !b.is_finite() || **b < 0.0) {
                return Err(Failure::Input(
                    json!({ "error": format!("invalid budget {b}") }),
                ));
            }
            let analysis = solve::analyze(&inst).map_err(|e| solve_error(e.into()))?;
            let options = MilpOptions {
                node_limit: node_limit(),
            };
            let curve = budget_sweep(&inst, &analysis, budgets, &options, Execution::default())
                .map_err(|e| match e {
                    obo::milp::MilpError::UnsortedBudgets => {
                        Failure::Input(json!({ "error": e.to_string() }))
                    }
                    other => solve_error(other.into()),
                })?;
            Ok(if csv {
                report::sweep_csv(&curve)
            } else {
                render(&report::sweep_json(&inst, &curve))
            })
        }
        Command::Simulate {
            plan,
            tol,
            max_steps,
            instance,
        } => {
            let inst = load(instance)?;
            let mut payments = vec![0.0; inst.len()];
            if let Some(path) = plan {
                let text = fs::read_to_string(path).map_err(|e| {
                    Failure::Input(
                        json!({ "error": format!("cannot read {}: {e}", path.display()) }),
                    )
                })?;
                let file: PlanFile = serde_json::from_str(&text)
                    .map_err(|e| Failure::Input(json!({ "error": format!("plan: {e}") })))?;
                for (agent, p) in &file.payments {
                    let i = inst.index_of(agent).ok_or_else(|| {
                        Failure::Input(
                            json!({ "error": format!("plan names unknown agent `{agent}`") }),
                        )
                    })?;
                    payments[i] = *p;
                }
            }
            let start = expressed_opinions(&inst, &payments);
            let (limit, steps) =
                iterate_dynamics(&confidence_matrix(&inst), &start, *max_steps, *tol)
                    .map_err(|e| Failure::Solver(json!({ "error": e.to_string() })))?;
            let supporters: Vec<&str> = limit
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x >= inst.threshold() - model::TOL)
                .map(|(i, _)| inst.agents()[i].as_str())
                .collect();
            let opinions: serde_json::Map<String, Value> = inst
                .agents()
                .iter()
                .zip(&limit)
                .map(|(a, &x)| (a.clone(), json!(report::round_sig(x))))
                .collect();
            Ok(render(&json!({
                "steps": steps,
                "opinions": opinions,
                "supporters": supporters,
                "supporter_count": supporters.len(),
            })))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let validate = matches!(cli.command, Command::Validate { .. });
    match run(&cli) {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &text) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Input(detail)) => {
            if validate {
                print!("{}", render(&detail));
            } else {
                eprint!("{}", render(&detail));
            }
            ExitCode::from(1)
        }
        Err(Failure::Solver(detail)) => {
            eprint!("{}", render(&detail));
            ExitCode::from(2)
        }
    }
}
