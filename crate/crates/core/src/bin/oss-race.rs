use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use oss_race::continuous::best_response_dynamics;
use oss_race::continuous_mip::{encode_continuous_pne, solve_encoding, ContinuousSolveError, ContinuousVariant};
use oss_race::discrete::{enumerate_pure_nash, welfare_alignment_report, AnalysisError, DEFAULT_ENUMERATION_CAP};
use oss_race::discrete_mip::{discrete_solver_config, enumerate_pne_via_mip, find_nontrivial_pne_among, EncodingError};
use oss_race::game::all_profiles;
use oss_race::mip::{MipError, SolverConfig, DEFAULT_NODE_BUDGET};
use oss_race::report::{
    analyze_profile, continuous_witness, deviation_section, equilibria_section, equilibrium_entry, welfare_section,
    EquilibriumReport,
};
use oss_race::sat::{check_reduction, default_params, parse_dimacs, reduce_to_game, CheckError, CnfFormula, SatError};
use oss_race::scenario::{load_scenario, write_scenario, Scenario, ScenarioOptions};
use oss_race::{ContinuousProfile, DiscreteProfile};

/// Pure Nash equilibria of the open/closed-source race game.
#[derive(Parser)]
#[command(name = "oss-race", version)]
struct Cli {
    #[arg(long, value_enum, global = true, default_value_t = Output::Text)]
    output: Output,
    /// Player cap for exhaustive scans (overrides the scenario option).
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Branch-and-bound node budget (overrides the scenario option).
    #[arg(long, global = true)]
    node_budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Oracle,
    Mip,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Paper,
    TieComplete,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a scenario loads and describes a valid game.
    Validate { file: PathBuf },
    /// Progress, utilities and equilibrium checks for one or all profiles.
    Analyze {
        file: PathBuf,
        /// A 0/1 string such as 0110; all profiles when omitted.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Discrete pure equilibria.
    SolveDiscrete {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Mip)]
        method: Method,
        /// Look for one equilibrium with an open player instead of listing all.
        #[arg(long)]
        nontrivial: bool,
    },
    /// A continuous pure equilibrium, verified by exact best responses.
    SolveContinuous {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Variant::TieComplete)]
        variant: Variant,
    },
    /// Which players gain by opening alone from the all-closed profile.
    DeviationReport { file: PathBuf },
    /// Welfare maximizers against equilibria.
    Welfare { file: PathBuf },
    /// Write the game reduced from a 3-CNF formula as a scenario.
    ReduceSat {
        cnf: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Compare satisfiability with existence of a nontrivial equilibrium.
    CheckSatReduction { cnf: PathBuf },
}

const EXIT_EMPTY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_resource_limit(&e) { EXIT_LIMIT } else { EXIT_INPUT })
        }
    }
}

fn is_resource_limit(e: &anyhow::Error) -> bool {
    fn mip(e: &MipError) -> bool {
        matches!(e, MipError::NodeBudgetExceeded { .. })
    }
    fn analysis(e: &AnalysisError) -> bool {
        matches!(e, AnalysisError::CapExceeded { .. })
    }
    fn encoding(e: &EncodingError) -> bool {
        matches!(e, EncodingError::Mip(m) if mip(m))
    }
    fn sat(e: &SatError) -> bool {
        matches!(e, SatError::CapExceeded { .. })
    }
    e.chain().any(|c| {
        c.downcast_ref::<MipError>().is_some_and(mip)
            || c.downcast_ref::<AnalysisError>().is_some_and(analysis)
            || c.downcast_ref::<EncodingError>().is_some_and(encoding)
            || c.downcast_ref::<SatError>().is_some_and(sat)
            || c.downcast_ref::<ContinuousSolveError>()
                .is_some_and(|x| matches!(x, ContinuousSolveError::Encoding(en) if encoding(en)))
            || c.downcast_ref::<CheckError>().is_some_and(|x| match x {
                CheckError::Sat(s) => sat(s),
                CheckError::Encoding(en) => encoding(en),
                CheckError::Analysis(a) => analysis(a),
                CheckError::Game(_) => false,
            })
    })
}

struct Limits {
    cap: usize,
    node_budget: u64,
    max_rounds: usize,
}

fn limits(cli: &Cli, options: &ScenarioOptions) -> Limits {
    Limits {
        cap: cli.cap.or(options.enumeration_cap).unwrap_or(DEFAULT_ENUMERATION_CAP),
        node_budget: cli.node_budget.or(options.node_budget).unwrap_or(DEFAULT_NODE_BUDGET),
        max_rounds: options.max_rounds.unwrap_or(100),
    }
}

fn load(path: &Path) -> Result<Scenario> {
    load_scenario(path).with_context(|| format!("loading {}", path.display()))
}

fn load_cnf(path: &Path) -> Result<CnfFormula> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(cli: &Cli, report: &EquilibriumReport) {
    match cli.output {
        Output::Json => print!("{}", report.to_json()),
        Output::Text => print!("{}", report.to_text()),
    }
}

fn findings(found: bool) -> u8 {
    if found {
        0
    } else {
        EXIT_EMPTY
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate { file } => {
            let s = load(file)?;
            let mut r = EquilibriumReport::new("validate").with_input(&s.names, &s.game);
            r.push("valid", &true);
            emit(cli, &r);
            Ok(0)
        }
        Command::Analyze { file, profile } => {
            let s = load(file)?;
            let lim = limits(cli, &s.options);
            let k = s.game.players();
            let profiles: Vec<DiscreteProfile> = match profile {
                Some(p) => {
                    let p: DiscreteProfile = p.parse()?;
                    anyhow::ensure!(
                        p.bits().len() == k,
                        "profile has {} entries but the game has {k} players",
                        p.bits().len()
                    );
                    vec![p]
                }
                None => {
                    if k > lim.cap.min(63) {
                        return Err(AnalysisError::CapExceeded {
                            players: k,
                            cap: lim.cap,
                        }
                        .into());
                    }
                    all_profiles(k).collect()
                }
            };
            let rows = profiles
                .iter()
                .map(|p| analyze_profile(&s.game, p))
                .collect::<Result<Vec<_>, _>>()?;
            let any = rows.iter().any(|r| r.is_equilibrium);
            let mut r = EquilibriumReport::new("analyze").with_input(&s.names, &s.game);
            r.push("profiles", &rows);
            emit(cli, &r);
            Ok(findings(any))
        }
        Command::SolveDiscrete {
            file,
            method,
            nontrivial,
        } => {
            let s = load(file)?;
            let lim = limits(cli, &s.options);
            let config = discrete_solver_config(lim.node_budget);
            let mut r = EquilibriumReport::new("solve-discrete").with_input(&s.names, &s.game);
            r.push(
                "method",
                match method {
                    Method::Oracle => "oracle",
                    Method::Mip => "mip",
                },
            );
            if *nontrivial {
                let players = s.nontrivial_players()?;
                let witness = match method {
                    Method::Oracle => enumerate_pure_nash(&s.game, lim.cap)?
                        .into_iter()
                        .find(|p| players.iter().any(|&i| p.is_open(i))),
                    Method::Mip => find_nontrivial_pne_among(&s.game, &players, &config)?,
                };
                let names: Vec<&String> = players.iter().map(|&i| &s.names[i]).collect();
                let entry = witness.as_ref().map(|w| equilibrium_entry(&s.game, w)).transpose()?;
                r.push(
                    "nontrivial",
                    &serde_json::json!({ "players": names, "found": entry.is_some(), "witness": entry }),
                );
                emit(cli, &r);
                Ok(findings(witness.is_some()))
            } else {
                let set = match method {
                    Method::Oracle => enumerate_pure_nash(&s.game, lim.cap)?,
                    Method::Mip => enumerate_pne_via_mip(&s.game, &config)?,
                };
                r.push("equilibria", &equilibria_section(&s.game, &set)?);
                emit(cli, &r);
                Ok(findings(!set.is_empty()))
            }
        }
        Command::SolveContinuous { file, variant } => {
            let s = load(file)?;
            let lim = limits(cli, &s.options);
            let (variant, name) = match variant {
                Variant::Paper => (ContinuousVariant::PaperFaithful, "paper"),
                Variant::TieComplete => (ContinuousVariant::TieComplete, "tie-complete"),
            };
            let config = SolverConfig {
                node_budget: lim.node_budget,
                lp_relaxation: true,
            };
            let enc = encode_continuous_pne(&s.game, variant)?;
            let found = solve_encoding(&s.game, &enc, &config)?;
            if found.is_none() && variant == ContinuousVariant::TieComplete {
                eprintln!(
                    "warning: tie-complete encoding infeasible; problem follows\n{}",
                    enc.problem.dump()
                );
            }
            let witness = found.as_ref().map(|p| continuous_witness(&s.game, p)).transpose()?;
            let trace = best_response_dynamics(&s.game, &ContinuousProfile::zeros(s.game.players()), lim.max_rounds)?;
            let mut r = EquilibriumReport::new("solve-continuous").with_input(&s.names, &s.game);
            r.push("variant", name);
            r.push("equilibrium", &witness);
            r.push("dynamics_from_all_closed", &trace);
            emit(cli, &r);
            Ok(findings(found.is_some()))
        }
        Command::DeviationReport { file } => {
            let s = load(file)?;
            let d = deviation_section(&s.names, &s.game)?;
            let any = !d.deviators.is_empty();
            let mut r = EquilibriumReport::new("deviation-report").with_input(&s.names, &s.game);
            r.push("deviation", &d);
            emit(cli, &r);
            Ok(findings(any))
        }
        Command::Welfare { file } => {
            let s = load(file)?;
            let lim = limits(cli, &s.options);
            let w = welfare_alignment_report(&s.game, lim.cap)?;
            let any = !w.aligned_equilibria.is_empty();
            let mut r = EquilibriumReport::new("welfare").with_input(&s.names, &s.game);
            r.push("welfare", &welfare_section(&s.game, w));
            emit(cli, &r);
            Ok(findings(any))
        }
        Command::ReduceSat { cnf, out } => {
            let f = load_cnf(cnf)?;
            let (game, roles) = reduce_to_game(&f, &default_params(&f))?;
            let mut names: Vec<String> = (1..=f.num_vars).map(|t| format!("x{t}")).collect();
            names.extend((1..=f.clauses.len()).map(|j| format!("clause{j}")));
            names.push("switch".into());
            let options = ScenarioOptions {
                nontrivial_players: Some(roles.variable_players.iter().map(|&t| names[t].clone()).collect()),
                ..Default::default()
            };
            let text = write_scenario(&names, &game, &options);
            match out {
                Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::CheckSatReduction { cnf } => {
            let f = load_cnf(cnf)?;
            let params = default_params(&f);
            let budget = cli.node_budget.unwrap_or(DEFAULT_NODE_BUDGET);
            let result = check_reduction(&f, &params, &discrete_solver_config(budget))?;
            let roles = oss_race::sat::PlayerRoleMap::for_formula(&f);
            let mut r = EquilibriumReport::new("check-sat-reduction");
            r.push("formula", &f);
            r.push("params", &params);
            r.push("roles", &roles);
            r.push("result", &result);
            emit(cli, &r);
            Ok(0)
        }
    }
}
