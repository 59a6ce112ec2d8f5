//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or computation, 2 usage error,
//! 3 invalid configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use multiseq::classic::{two_sided_wrap, MsprtRule, TwoSidedReport};
use multiseq::fit::{calibrate, CalibrationTarget, ErrorTargets, Evaluator, FitOptions, ParamMap};
use multiseq::kiefer_weiss::{kw_fixed_point, KwOptions};
use multiseq::lattice::{backward_optimal, dbc_lattice, evaluate, LatticePolicy};
use multiseq::montecarlo::{SimConfig, Simulator};
use multiseq::report::{fmt17, TestReport};
use multiseq::scenarios::{run_scenario, Overrides, CATALOG, DEFAULT_SEED};
use multiseq::spec::{row_constant_lambdas, Horizon, TestSpec};
use multiseq::{Error, Model};

#[derive(Parser)]
#[command(name = "multiseq", version, about = "Sequential multi-hypothesis tests with DBC rules")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Test specification (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write machine-readable output here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine output format; without --out it goes to standard output.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvaluatorArg {
    /// Exact lattice evaluation of the DBC rule (Bernoulli).
    Exact,
    /// Exact lattice evaluation of the optimal test (Bernoulli).
    Optimal,
    /// Monte Carlo simulation of the DBC rule.
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Check a specification and print a summary.
    Validate,
    /// Exact error probabilities and ESS of the DBC test (Bernoulli).
    Evaluate {
        /// Evaluate this saved lattice policy instead of the DBC rule.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Additional parameters for the ESS table.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        extra: Vec<f64>,
    },
    /// Optimal truncated test by backward induction (Bernoulli).
    Optimal {
        /// Truncation level; defaults to the spec's horizon.
        #[arg(long)]
        horizon: Option<usize>,
        /// Save the optimal policy as JSON.
        #[arg(long)]
        policy_out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        extra: Vec<f64>,
    },
    /// Fit the multipliers to target error probabilities.
    Calibrate {
        /// One level for every hypothesis, or one per hypothesis.
        #[arg(long, alias = "alpha-targets", value_delimiter = ',', required = true)]
        target_alpha: Vec<f64>,
        /// Parameter sharing: rows, symmetric, common, full, or row groups
        /// such as 0,1,0.
        #[arg(long, default_value = "rows")]
        tie: String,
        #[arg(long, default_value_t = multiseq::fit::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = 400)]
        max_evals: usize,
        #[arg(long, value_enum, default_value = "exact")]
        evaluator: EvaluatorArg,
        /// Replications per probe with --evaluator mc.
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        /// Start from the spec's multipliers rather than λ ≈ 1/α.
        #[arg(long)]
        from_spec: bool,
    },
    /// Monte Carlo evaluation of the DBC rule or an MSPRT.
    Simulate {
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        /// Truncation; defaults to the spec's horizon or safety cap.
        #[arg(long)]
        cap: Option<usize>,
        /// Parameters to simulate; defaults to hypotheses and ESS points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        true_theta: Vec<f64>,
        /// Simulate this MSPRT ({"log_thresholds": ...}) instead of the DBC rule.
        #[arg(long)]
        msprt: Option<PathBuf>,
    },
    /// DBC approximation to the Kiefer–Weiss problem (Bernoulli).
    Kw {
        /// Hypotheses, increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        thetas: Vec<f64>,
        #[arg(long, alias = "target-alpha", value_delimiter = ',', required = true)]
        alpha_targets: Vec<f64>,
        /// Tie λ_i = λ_{k+1−i}.
        #[arg(long)]
        symmetric: bool,
        #[arg(long, default_value_t = 3000)]
        horizon: usize,
        #[arg(long, default_value_t = 20)]
        max_rounds: usize,
    },
    /// Two-decision summary of a three-hypothesis test.
    Twosided {
        /// Position (1-based) of the null among the hypotheses.
        #[arg(long, default_value_t = 2)]
        null_index: usize,
        /// OC/ESS grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Vec<f64>,
        #[arg(long, value_enum, default_value = "exact")]
        evaluator: EvaluatorArg,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
    },
    /// The reference numerical studies.
    Scenario {
        #[command(subcommand)]
        action: ScenarioCmd,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// List the catalog.
    List,
    /// Run a study and compare with the reference values.
    Run {
        id: String,
        /// Same as --format json.
        #[arg(long)]
        json: bool,
        /// Same as --format csv.
        #[arg(long)]
        csv: bool,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        max_evals: Option<usize>,
    },
}

enum Failure {
    Check(String),
    Usage(String),
    Config(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Machine output of a command.
struct Machine {
    json: String,
    csv: Option<String>,
}

impl Machine {
    fn new<T: Serialize>(value: &T, csv: Option<String>) -> CliResult<Self> {
        let json = serde_json::to_string_pretty(value).map_err(Error::from)?;
        Ok(Machine { json, csv })
    }
}

struct Output {
    human: String,
    machine: Machine,
    /// Failed check, reported after the output is written.
    failure: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run(&cli).and_then(|out| emit(&cli.global, &cli.command, out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(3)
        }
    }
}

fn emit(global: &Global, command: &Command, out: Output) -> CliResult<()> {
    let format = match command {
        Command::Scenario {
            action: ScenarioCmd::Run { json: true, .. },
        } => Some(Format::Json),
        Command::Scenario {
            action: ScenarioCmd::Run { csv: true, .. },
        } => Some(Format::Csv),
        _ => global.format,
    };
    let machine = match format.unwrap_or(Format::Json) {
        Format::Json => Some(out.machine.json),
        Format::Csv => out.machine.csv,
    };
    match (&global.out, format) {
        (Some(path), _) => {
            let text = machine.ok_or_else(|| Failure::Usage("CSV output is not available for this command".into()))?;
            std::fs::write(path, text).map_err(|e| Failure::Run(e.into()))?;
            print!("{}", out.human);
        }
        (None, Some(_)) => {
            let text = machine.ok_or_else(|| Failure::Usage("CSV output is not available for this command".into()))?;
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
        }
        (None, None) => print!("{}", out.human),
    }
    match out.failure {
        Some(msg) => Err(Failure::Check(msg)),
        None => Ok(()),
    }
}

fn load_spec(global: &Global) -> CliResult<TestSpec> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("this command needs --config <spec.json>".into()))?;
    read_spec(path)
}

fn read_spec(path: &Path) -> CliResult<TestSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    TestSpec::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> CliResult<Output> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Validate => {
            let spec = load_spec(g)?;
            Ok(Output {
                human: format!("valid specification\n{}", describe(&spec)),
                machine: Machine::new(&spec, None)?,
                failure: None,
            })
        }
        Command::Evaluate { policy, extra } => {
            let spec = load_spec(g)?;
            let policy = match policy {
                Some(p) => LatticePolicy::from_json(&read_text(p)?).map_err(|e| Failure::Config(e.to_string()))?,
                None => dbc_lattice(&spec)?,
            };
            let report = evaluate(&policy, &spec, extra)?;
            report_output(&report, String::new())
        }
        Command::Optimal {
            horizon,
            policy_out,
            extra,
        } => {
            let spec = load_spec(g)?;
            let n = horizon.unwrap_or(spec.horizon().cap());
            let opt = backward_optimal(&spec, n)?;
            if let Some(path) = policy_out {
                std::fs::write(path, opt.policy.to_json()?).map_err(|e| Failure::Run(e.into()))?;
            }
            let report = evaluate(&opt.policy, &spec, extra)?;
            let head = format!("minimal Lagrangian {:.6}\n", opt.minimal_lagrangian);
            let mut out = report_output(&report, head)?;
            #[derive(Serialize)]
            struct OptimalOut<'a> {
                minimal_lagrangian: f64,
                report: &'a TestReport,
            }
            out.machine.json = Machine::new(
                &OptimalOut {
                    minimal_lagrangian: opt.minimal_lagrangian,
                    report: &report,
                },
                None,
            )?
            .json;
            Ok(out)
        }
        Command::Calibrate {
            target_alpha,
            tie,
            tol,
            max_evals,
            evaluator,
            reps,
            from_spec,
        } => {
            let spec = load_spec(g)?;
            let k = spec.k();
            let alphas = expand_targets(target_alpha, k)?;
            let map = parse_tie(tie, k)?;
            let target = CalibrationTarget::new(ErrorTargets::PerHypothesis(alphas), map).with_tolerance(*tol);
            let ev = match evaluator {
                EvaluatorArg::Exact => Evaluator::ExactDbc,
                EvaluatorArg::Optimal => Evaluator::ExactOptimal,
                EvaluatorArg::Mc => Evaluator::MonteCarlo { reps: *reps, seed },
            };
            let opts = FitOptions {
                max_evals: *max_evals,
                from_template: *from_spec,
                ..FitOptions::default()
            };
            let fit = calibrate(&spec, &target, ev, &opts)?;
            #[derive(Serialize)]
            struct CalibrateOut<'a> {
                spec: &'a TestSpec,
                report: &'a TestReport,
                distance: f64,
                converged: bool,
                evals: usize,
            }
            let head = format!(
                "{} after {} evaluations: relative distance {:.5} (tolerance {tol})\n{}",
                if fit.converged { "converged" } else { "not converged" },
                fit.evals,
                fit.distance,
                describe(&fit.params)
            );
            let mut out = report_output(&fit.report, head)?;
            out.machine.json = Machine::new(
                &CalibrateOut {
                    spec: &fit.params,
                    report: &fit.report,
                    distance: fit.distance,
                    converged: fit.converged,
                    evals: fit.evals,
                },
                None,
            )?
            .json;
            if !fit.converged {
                out.failure = Some(format!(
                    "calibration stopped at relative distance {:.5} > {tol}",
                    fit.distance
                ));
            }
            Ok(out)
        }
        Command::Simulate {
            reps,
            cap,
            true_theta,
            msprt,
        } => {
            let spec = load_spec(g)?;
            let cap = cap.unwrap_or(spec.horizon().cap());
            let sim = match msprt {
                Some(p) => {
                    let rule = MsprtRule::from_json(&read_text(p)?).map_err(|e| Failure::Config(e.to_string()))?;
                    if rule.k() != spec.k() {
                        return Err(Failure::Config(format!(
                            "MSPRT has {} hypotheses, the spec {}",
                            rule.k(),
                            spec.k()
                        )));
                    }
                    Simulator::with_rule(&spec, Box::new(rule))
                }
                None => Simulator::dbc(&spec),
            };
            let head = format!("{reps} replications per parameter, seed {seed}, cap {cap}\n");
            if true_theta.is_empty() {
                report_output(&sim.simulate(&[], *reps, seed, cap)?, head)
            } else {
                simulate_only(&sim, true_theta, *reps, seed, cap, head)
            }
        }
        Command::Kw {
            thetas,
            alpha_targets,
            symmetric,
            horizon,
            max_rounds,
        } => {
            let k = thetas.len();
            if k < 2 {
                return Err(Failure::Usage("at least two hypotheses are needed".into()));
            }
            let alphas = expand_targets(alpha_targets, k)?;
            let evals: Vec<f64> = thetas.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let gammas = vec![1.0 / evals.len() as f64; evals.len()];
            let init: Vec<f64> = alphas.iter().map(|a| 1.0 / a).collect();
            let template = TestSpec::new(
                Model::Bernoulli,
                thetas.clone(),
                evals,
                gammas,
                row_constant_lambdas(&init),
                Horizon::Finite(*horizon),
            )
            .map_err(|e| Failure::Config(e.to_string()))?;
            let map = if *symmetric {
                ParamMap::symmetric_rows(k)
            } else {
                ParamMap::untied_rows(k)
            };
            let target = CalibrationTarget::new(ErrorTargets::PerHypothesis(alphas), map);
            let opts = KwOptions {
                max_rounds: *max_rounds,
                ..KwOptions::default()
            };
            let d = kw_fixed_point(&template, &target, &opts)?;
            let lam: Vec<String> = (0..k)
                .map(|i| format!("{:.4}", d.spec.lambdas()[i][if i == 0 { 1 } else { 0 }]))
                .collect();
            let human = format!(
                "{} after {} rounds\nλ (rows) = ({})\nα_i = {:?}\nworst points {:?}\nmax ESS {:.4}, gap {:.2e}, distance {:.5}\n",
                if d.converged { "converged" } else { "not converged" },
                d.rounds,
                lam.join(", "),
                d.alpha_i,
                d.worst_points,
                d.max_ess,
                d.fixed_point_gap,
                d.distance
            );
            Ok(Output {
                human,
                machine: Machine::new(&d, None)?,
                failure: None,
            })
        }
        Command::Twosided {
            null_index,
            grid,
            evaluator,
            reps,
        } => {
            let spec = load_spec(g)?;
            if *null_index == 0 {
                return Err(Failure::Usage("--null-index counts from 1".into()));
            }
            let report = match evaluator {
                EvaluatorArg::Exact => evaluate(&dbc_lattice(&spec)?, &spec, grid)?,
                EvaluatorArg::Optimal => {
                    let opt = backward_optimal(&spec, spec.horizon().cap())?;
                    evaluate(&opt.policy, &spec, grid)?
                }
                EvaluatorArg::Mc => Simulator::dbc(&spec).simulate(grid, *reps, seed, spec.horizon().cap())?,
            };
            let ts = two_sided_wrap(&report, null_index - 1)?;
            Ok(Output {
                human: describe_two_sided(&ts),
                machine: Machine::new(&ts, Some(two_sided_csv(&ts)?))?,
                failure: None,
            })
        }
        Command::Scenario { action } => match action {
            ScenarioCmd::List => {
                let human: String = CATALOG.iter().map(|s| format!("{:16} {}\n", s.id, s.title)).collect();
                Ok(Output {
                    human,
                    machine: Machine::new(&CATALOG.iter().map(|s| s.id).collect::<Vec<_>>(), None)?,
                    failure: None,
                })
            }
            ScenarioCmd::Run {
                id,
                json,
                csv,
                alphas,
                reps,
                horizon,
                max_evals,
            } => {
                if *json && *csv {
                    return Err(Failure::Usage("--json and --csv are exclusive".into()));
                }
                let ov = Overrides {
                    alphas: alphas.clone(),
                    reps: *reps,
                    seed: g.seed,
                    horizon: *horizon,
                    max_evals: *max_evals,
                };
                let outcome = match run_scenario(id, &ov) {
                    Err(Error::UnknownScenario(s)) => {
                        let ids: Vec<&str> = CATALOG.iter().map(|s| s.id).collect();
                        return Err(Failure::Usage(format!("unknown scenario '{s}' (known: {})", ids.join(", "))));
                    }
                    r => r?,
                };
                let failed = outcome.failures().count();
                Ok(Output {
                    human: outcome.render(),
                    machine: Machine {
                        json: outcome.to_json()?,
                        csv: Some(outcome.to_csv()?),
                    },
                    failure: (failed > 0).then(|| format!("{id}: {failed} check(s) outside tolerance")),
                })
            }
        },
    }
}

fn expand_targets(values: &[f64], k: usize) -> CliResult<Vec<f64>> {
    let out = match values.len() {
        1 => vec![values[0]; k],
        n if n == k => values.to_vec(),
        n => return Err(Failure::Usage(format!("{n} target levels for {k} hypotheses"))),
    };
    if out.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Failure::Usage("target levels must lie in (0, 1)".into()));
    }
    Ok(out)
}

fn parse_tie(tie: &str, k: usize) -> CliResult<ParamMap> {
    let map = match tie {
        "rows" => Ok(ParamMap::untied_rows(k)),
        "symmetric" => Ok(ParamMap::symmetric_rows(k)),
        "common" => ParamMap::rows(&vec![0; k]),
        "full" => {
            let mut next = 0;
            let slots = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            (i != j).then(|| {
                                next += 1;
                                next - 1
                            })
                        })
                        .collect()
                })
                .collect();
            ParamMap::new(slots)
        }
        groups => {
            let g: std::result::Result<Vec<usize>, _> = groups.split(',').map(|s| s.trim().parse()).collect();
            match g {
                Ok(g) if g.len() == k => ParamMap::rows(&g),
                _ => return Err(Failure::Usage(format!("cannot read --tie '{tie}' for {k} hypotheses"))),
            }
        }
    };
    map.map_err(|e| Failure::Usage(e.to_string()))
}

#[derive(Serialize)]
struct ParamOut {
    theta: f64,
    accept: Vec<f64>,
    accept_se: Vec<f64>,
    ess: f64,
    ess_se: f64,
    cap_share: f64,
}

/// Simulation restricted to the requested parameters.
fn simulate_only(sim: &Simulator, thetas: &[f64], reps: u64, seed: u64, cap: usize, head: String) -> CliResult<Output> {
    let obs = sim.model.observations_per_step();
    let mut rows = Vec::new();
    for &t in thetas {
        let tally = sim.tally(&SimConfig {
            reps,
            seed,
            cap,
            true_param: t,
        })?;
        let (p, se) = tally.summary(obs);
        rows.push(ParamOut {
            theta: t,
            accept: p.accept,
            accept_se: se.accept,
            ess: p.ess,
            ess_se: se.ess,
            cap_share: p.horizon_mass,
        });
    }
    let mut human = head + "parameter      ESS       (SE)    accepted H_j\n";
    let mut csv = String::from("theta,ess,ess_se");
    for j in 0..sim.k() {
        csv += &format!(",accept_{},accept_{}_se", j + 1, j + 1);
    }
    csv.push('\n');
    for r in &rows {
        let acc: Vec<String> = r.accept.iter().map(|a| format!("{a:.5}")).collect();
        human += &format!("  {:<10} {:.4}  ({:.4})  {}\n", r.theta, r.ess, r.ess_se, acc.join(" "));
        csv += &format!("{},{},{}", fmt17(r.theta), fmt17(r.ess), fmt17(r.ess_se));
        for (a, e) in r.accept.iter().zip(&r.accept_se) {
            csv += &format!(",{},{}", fmt17(*a), fmt17(*e));
        }
        csv.push('\n');
    }
    Ok(Output {
        human,
        machine: Machine::new(&rows, Some(csv))?,
        failure: None,
    })
}

fn describe(spec: &TestSpec) -> String {
    let mut s = format!(
        "model {}, k = {}, horizon {}\nhypotheses {:?}\nESS points {:?} with weights {:?}\nmultipliers:\n",
        spec.model().name(),
        spec.k(),
        match spec.horizon() {
            Horizon::Finite(n) => n.to_string(),
            Horizon::Unbounded => "unbounded".into(),
        },
        spec.thetas(),
        spec.evals(),
        spec.gammas()
    );
    for row in spec.lambdas() {
        let r: Vec<String> = row.iter().map(|x| format!("{x:10.4}")).collect();
        s += &format!("  {}\n", r.join(" "));
    }
    s
}

fn report_output(report: &TestReport, head: String) -> CliResult<Output> {
    Ok(Output {
        human: head + &describe_report(report),
        machine: Machine {
            json: report.to_json()?,
            csv: Some(report.to_csv()?),
        },
        failure: None,
    })
}

fn describe_report(r: &TestReport) -> String {
    let se = r.se.as_ref();
    let mut s = String::from("acceptance probabilities (row: true hypothesis)\n");
    for (i, row) in r.alpha.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, &a)| match se {
                Some(e) => format!("{a:.4e} ({:.1e})", e.alpha[i][j]),
                None => format!("{a:.4e}"),
            })
            .collect();
        s += &format!("  θ = {:<8} {}\n", r.thetas[i], cells.join("  "));
    }
    s += "parameter      ESS\n";
    for (i, p) in r.params.iter().enumerate() {
        match se {
            Some(e) => s += &format!("  {:<10} {:.4} ({:.4})\n", p.theta, p.ess, e.ess[i]),
            None => s += &format!("  {:<10} {:.4}\n", p.theta, p.ess),
        }
    }
    s += &format!("weighted ESS {:.4}\n", r.weighted_ess);
    s
}

fn describe_two_sided(ts: &TwoSidedReport) -> String {
    let mut s = format!(
        "null H{}: α = {:.4}, β = {:?}, P(accept null) = {:?}\n   θ       OC      ESS\n",
        ts.null_index + 1,
        ts.alpha,
        ts.beta,
        ts.accept_null
    );
    for p in &ts.curve {
        s += &format!("{:>6.3}  {:.4}  {:.3}\n", p.theta, p.oc, p.ess);
    }
    s
}

fn two_sided_csv(ts: &TwoSidedReport) -> CliResult<String> {
    let mut s = String::from("theta,oc,ess\n");
    for p in &ts.curve {
        s += &format!("{},{},{}\n", fmt17(p.theta), fmt17(p.oc), fmt17(p.ess));
    }
    Ok(s)
}
