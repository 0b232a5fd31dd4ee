//! Command-line front end for the Steiner forest toolkit.
//!
//! Exit codes: 0 success / all checks pass, 1 certificate failure, 2 input
//! error, 3 oracle limit hit under `--require-oracle`.

mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use steiner_greedy::certify::{
    build_faithful, charge_trace, delta_accounting, updateforest_trace, CertificateReport,
    DeletionRule,
};
use steiner_greedy::costshare::{
    chi_groupstrict, chi_unistrict, verify_groupstrict, verify_nesting, verify_unistrict,
};
use steiner_greedy::exact::{steiner_forest_exact, OracleError};
use steiner_greedy::forest;
use steiner_greedy::greedy::{
    gluttonous, gluttonous_contract, paired_greedy, timed_gluttonous, TieRule,
};
use steiner_greedy::instance::{save, Instance};
use steiner_greedy::primal_dual::{
    group_strict_a, timed_primal_dual, unistrict_a, ActivitySchedule,
};
use steiner_greedy::rational::Rational;
use steiner_greedy::stochastic::{
    boosted_sampling, evaluate_plan, exact_two_stage, scenario_feasible, second_stage_augment,
    ScenarioDistribution,
};
use steiner_greedy::RunTrace;

#[derive(Parser)]
#[command(name = "sfg", about = "Greedy Steiner forest solvers, oracles and certifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Gluttonous,
    Timed,
    Contract,
    Paired,
    Tpd,
    #[value(name = "unistrict-A", alias = "unistrict-a")]
    UnistrictA,
    #[value(name = "groupstrict-A", alias = "groupstrict-a")]
    GroupstrictA,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Certifier {
    Faithful,
    Updateforest,
    Delta,
    Charge,
    Unistrict,
    Nesting,
    Groupstrict,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver and write its trace as JSON lines.
    Solve {
        /// Instance file (SFI) or generator spec such as gen:ladder:3:0.1.
        instance: String,
        #[arg(long, value_enum, default_value = "gluttonous")]
        alg: Algorithm,
        #[arg(long, default_value_t = 2)]
        c: u32,
        /// Tie rule: `lex` or `custom:<file>` with one id per line.
        #[arg(long, default_value = "lex")]
        tie: String,
        #[arg(long, value_enum, default_value = "on")]
        oracle: OracleMode,
        /// Fail (exit 3) instead of skipping when the oracle limits bite.
        #[arg(long)]
        require_oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a certifier over a fresh run and write its report.
    Certify {
        instance: String,
        #[arg(long, value_enum)]
        certifier: Certifier,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, default_value = "lex")]
        tie: String,
        /// Mutation rule for updateforest (`first-edge`).
        #[arg(long)]
        mutate: Option<String>,
        /// Target demand-pair index for unistrict/nesting.
        #[arg(long, default_value_t = 0)]
        target: usize,
        /// Comma-separated D2 pair indices for groupstrict.
        #[arg(long)]
        d2: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a cost-share table.
    Costshare {
        instance: String,
        #[arg(long, default_value = "groupstrict")]
        scheme: String,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, default_value = "lex")]
        tie: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boosted-sampling two-stage plan for an explicit distribution.
    Stochastic {
        instance: String,
        /// JSON file with {"sigma": r, "scenarios": [{"p": r, "pairs": [[u,v],..]},..]}.
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte-Carlo evaluation samples (0 to skip).
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated instance in SFI format.
    Generate {
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Benchmark algorithms over instances; emits CSV.
    Bench {
        /// Comma-separated instance specs (files or gen:... specs).
        #[arg(long)]
        instances: String,
        /// Comma-separated algorithm list.
        #[arg(long)]
        algs: String,
        #[arg(long, default_value_t = 2)]
        c: u32,
        #[arg(long, value_enum, default_value = "on")]
        oracle: OracleMode,
        #[arg(long)]
        require_oracle: bool,
        /// Fill the wall_time column (breaks byte-for-byte determinism).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_tie(s: &str) -> anyhow::Result<TieRule> {
    if s == "lex" {
        return Ok(TieRule::Lex);
    }
    if let Some(path) = s.strip_prefix("custom:") {
        let text = std::fs::read_to_string(path)?;
        let perm: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()?;
        return Ok(TieRule::Permuted(perm));
    }
    anyhow::bail!("unknown tie rule `{s}` (expected `lex` or `custom:<file>`)")
}

fn solve_with(
    alg: Algorithm,
    inst: &Instance,
    c: u32,
    tie: &TieRule,
) -> anyhow::Result<RunTrace> {
    Ok(match alg {
        Algorithm::Gluttonous => gluttonous(inst, tie),
        Algorithm::Timed => timed_gluttonous(inst, c, tie)?,
        Algorithm::Contract => gluttonous_contract(inst, tie),
        Algorithm::Paired => paired_greedy(inst),
        Algorithm::Tpd => timed_primal_dual(inst, &ActivitySchedule::half_distance(inst))?.0,
        Algorithm::UnistrictA => unistrict_a(inst, c, tie)?,
        Algorithm::GroupstrictA => group_strict_a(inst, c)?.0,
    })
}

fn algorithm_name(alg: Algorithm) -> &'static str {
    match alg {
        Algorithm::Gluttonous => "gluttonous",
        Algorithm::Timed => "timed",
        Algorithm::Contract => "contract",
        Algorithm::Paired => "paired",
        Algorithm::Tpd => "tpd",
        Algorithm::UnistrictA => "unistrict-A",
        Algorithm::GroupstrictA => "groupstrict-A",
    }
}

fn parse_alg(s: &str) -> anyhow::Result<Algorithm> {
    Ok(match s {
        "gluttonous" => Algorithm::Gluttonous,
        "timed" => Algorithm::Timed,
        "contract" => Algorithm::Contract,
        "paired" => Algorithm::Paired,
        "tpd" => Algorithm::Tpd,
        "unistrict-A" | "unistrict-a" => Algorithm::UnistrictA,
        "groupstrict-A" | "groupstrict-a" => Algorithm::GroupstrictA,
        other => anyhow::bail!("unknown algorithm `{other}`"),
    })
}

/// Oracle cost, distinguishing limit errors from hard errors.
fn oracle_cost(inst: &Instance) -> Result<Rational, OracleError> {
    steiner_forest_exact(inst).map(|r| r.cost)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn emit_report(
    report: &CertificateReport,
    out: &Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    write_or_print(out, &(report.to_json() + "\n"))?;
    if report.passed() {
        println!("certificate: PASS ({} checks)", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "certificate: FAIL ({} of {} checks)",
            report.failed_checks().len(),
            report.checks.len()
        );
        Ok(ExitCode::from(1))
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve {
            instance,
            alg,
            c,
            tie,
            oracle,
            require_oracle,
            out,
        } => {
            let inst = spec::load_instance(&instance)?;
            let tie = parse_tie(&tie)?;
            let trace = solve_with(alg, &inst, c, &tie)?;
            if !forest::is_feasible(&inst, &trace.forest) {
                anyhow::bail!("solver produced an infeasible forest");
            }
            let ratio = match oracle {
                OracleMode::On => match oracle_cost(&inst) {
                    Ok(opt) if !opt.is_zero() => Some(trace.total_cost / opt),
                    Ok(_) => None,
                    Err(e) if require_oracle => {
                        eprintln!("oracle limit: {e}");
                        return Ok(ExitCode::from(3));
                    }
                    Err(_) => None,
                },
                OracleMode::Off => None,
            };
            write_or_print(&out, &trace.to_json_lines(ratio))?;
            match ratio {
                Some(r) => println!(
                    "algorithm={} cost={} ratio={}",
                    algorithm_name(alg),
                    trace.total_cost,
                    r
                ),
                None => println!("algorithm={} cost={}", algorithm_name(alg), trace.total_cost),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify {
            instance,
            certifier,
            c,
            tie,
            mutate,
            target,
            d2,
            out,
        } => {
            let inst = spec::load_instance(&instance)?;
            let tie = parse_tie(&tie)?;
            let rule = match mutate.as_deref() {
                None => DeletionRule::HighestPotential,
                Some("first-edge") => DeletionRule::FirstEdge,
                Some(other) => anyhow::bail!("unknown mutation `{other}`"),
            };
            let report = match certifier {
                Certifier::Faithful | Certifier::Updateforest | Certifier::Delta
                | Certifier::Charge => {
                    let opt = match steiner_forest_exact(&inst) {
                        Ok(o) => o,
                        Err(e) => {
                            eprintln!("oracle limit: {e}");
                            return Ok(ExitCode::from(3));
                        }
                    };
                    let trace = gluttonous(&inst, &tie);
                    match certifier {
                        Certifier::Faithful => build_faithful(&inst, &opt.forest, &trace)?.1,
                        Certifier::Updateforest => {
                            let (fss, mut report) = build_faithful(&inst, &opt.forest, &trace)?;
                            for comp in forest::components(inst.num_vertices(), &fss) {
                                let tree: Vec<_> = fss
                                    .iter()
                                    .filter(|e| comp.contains(&e.u))
                                    .copied()
                                    .collect();
                                if !tree.is_empty() {
                                    report.extend(updateforest_trace(&inst, &tree, &trace, rule)?);
                                }
                            }
                            report
                        }
                        Certifier::Delta => delta_accounting(&inst, &opt.forest, &trace)?,
                        Certifier::Charge => charge_trace(&inst, &opt.forest, &trace)?,
                        _ => unreachable!(),
                    }
                }
                Certifier::Unistrict => verify_unistrict(&inst, target, c, &tie)?,
                Certifier::Nesting => verify_nesting(&inst, target, c, &tie)?,
                Certifier::Groupstrict => {
                    let d2: Vec<usize> = match d2 {
                        Some(list) => list
                            .split(',')
                            .filter(|t| !t.is_empty())
                            .map(|t| t.trim().parse())
                            .collect::<Result<_, _>>()?,
                        None => vec![0.min(inst.num_pairs().saturating_sub(1))],
                    };
                    let d1: Vec<usize> =
                        (0..inst.num_pairs()).filter(|k| !d2.contains(k)).collect();
                    verify_groupstrict(&inst, &d1, &d2, c, &tie)?.1
                }
            };
            emit_report(&report, &out)
        }
        Command::Costshare {
            instance,
            scheme,
            c,
            tie,
            out,
        } => {
            let inst = spec::load_instance(&instance)?;
            let tie = parse_tie(&tie)?;
            let table = match scheme.as_str() {
                "unistrict" => chi_unistrict(&inst, c, &tie)?.0,
                "groupstrict" => chi_groupstrict(&inst, c, &tie)?.0,
                other => anyhow::bail!("unknown scheme `{other}`"),
            };
            write_or_print(&out, &(table.to_json() + "\n"))?;
            println!("scheme={scheme} total-share={}", table.total());
            Ok(ExitCode::SUCCESS)
        }
        Command::Stochastic {
            instance,
            dist,
            seed,
            samples,
            c,
            out,
        } => {
            let inst = spec::load_instance(&instance)?;
            let text = std::fs::read_to_string(&dist)?;
            let (pi, sigma) = ScenarioDistribution::from_json(&text, &inst)?;
            let mut plan = boosted_sampling(&inst, &pi, sigma, seed, c, &TieRule::Lex)?;
            if samples > 0 {
                evaluate_plan(&inst, &mut plan, &pi, sigma, samples, seed ^ 0x9e3779b9, c, &TieRule::Lex)?;
            }
            // Always sanity-check feasibility for every scenario in support.
            for (ix, (_, pairs)) in pi.scenarios.iter().enumerate() {
                let aug = second_stage_augment(&inst, &plan.first_stage, pairs, c, &TieRule::Lex)?;
                if !scenario_feasible(&inst, &plan.first_stage, &aug, pairs) {
                    anyhow::bail!("scenario {ix} infeasible after augmentation");
                }
            }
            let exact = exact_two_stage(&inst, &pi, sigma).ok().map(|(_, v)| v);
            let json = serde_json::json!({
                "plan": plan,
                "sigma": sigma,
                "exact_two_stage_cost": exact,
            });
            write_or_print(&out, &(json.to_string() + "\n"))?;
            println!(
                "first-stage-cost={} scenarios={} draws={}",
                plan.first_stage_cost,
                pi.scenarios.len(),
                plan.sample_log.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { spec: gen_spec, out } => {
            let inst = spec::load_instance(&gen_spec)?;
            save(&inst, &out)?;
            println!(
                "wrote {} ({} vertices, {} pairs)",
                out.display(),
                inst.num_vertices(),
                inst.num_pairs()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            instances,
            algs,
            c,
            oracle,
            require_oracle,
            timings,
            out,
        } => {
            let specs: Vec<&str> = instances.split(',').filter(|s| !s.is_empty()).collect();
            let alg_list: Vec<Algorithm> = algs
                .split(',')
                .filter(|s| !s.is_empty())
                .map(parse_alg)
                .collect::<Result<_, _>>()?;
            if alg_list.is_empty() || specs.is_empty() {
                anyhow::bail!("bench needs at least one instance and one algorithm");
            }
            let mut csv = String::from("instance,algorithm,cost,opt,ratio,merges,wall_time\n");
            for name in &specs {
                let inst = spec::load_instance(name)?;
                let opt = match oracle {
                    OracleMode::On => match oracle_cost(&inst) {
                        Ok(v) => Some(v),
                        Err(e) if require_oracle => {
                            eprintln!("oracle limit on {name}: {e}");
                            return Ok(ExitCode::from(3));
                        }
                        Err(_) => None,
                    },
                    OracleMode::Off => None,
                };
                for &alg in &alg_list {
                    let start = std::time::Instant::now();
                    let trace = solve_with(alg, &inst, c, &TieRule::Lex)?;
                    let wall = if timings {
                        format!("{:.3}", start.elapsed().as_secs_f64())
                    } else {
                        String::new()
                    };
                    let (opt_s, ratio_s) = match &opt {
                        Some(v) if !v.is_zero() => {
                            (v.to_string(), (trace.total_cost / *v).to_string())
                        }
                        Some(v) => (v.to_string(), String::new()),
                        None => (String::new(), String::new()),
                    };
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        name,
                        algorithm_name(alg),
                        trace.total_cost,
                        opt_s,
                        ratio_s,
                        trace.events.len(),
                        wall
                    ));
                }
            }
            write_or_print(&out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
