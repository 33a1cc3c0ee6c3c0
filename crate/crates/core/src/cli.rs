//! Command-line surface: argument definitions, dispatch, and report text.
//!
//! Every subcommand reads documents via [`crate::files`], runs the library
//! pipeline, and appends human-readable lines to an output buffer. The
//! buffer is printed by the binary even when dispatch ends in an error, so
//! partial diagnostics (say, an assumption witness) reach the user before
//! the process exits with the error's code.
//!
//! Output is deterministic: no timestamps, no absolute paths, no
//! hash-ordered iteration — identical invocations produce identical bytes.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Result;
use crate::files::{
    parse_model, parse_occupation, parse_strategy, render_occupation, render_report,
    render_strategy, write_file,
};
use crate::graph::EndComponent;
use crate::lp::{build_occupation_lp, write_mps};
use crate::mixture::{
    assumption_witness_error, check_penalization_assumption, decompose_to_mixture,
    enumerate_deterministic, find_feasible_with, is_extreme, solve_constrained_with,
    Decomposition, SolveOptions,
};
use crate::model::{AnyStrategy, ConstrainedProblem, DeterministicStrategy, FiniteMdpModel};
use crate::occupancy::{
    cost_vector, flow_residual, minimality_repair, occupation_of_any, FinitenessReport,
    ObjectiveVector, OccupationMeasure,
};
use crate::sim::{compare_empirical, simulate};
use crate::tol::Tolerances;

/// Solver for finite constrained total-cost decision processes with a
/// cemetery state.
#[derive(Parser, Debug)]
#[command(name = "cmdp", version, about, max_term_width = 100)]
pub struct Cli {
    /// Scale factor applied to every internal tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a model file, reporting its dimensions.
    Validate {
        /// Model file.
        model: PathBuf,
    },
    /// Minimize the objective subject to the cost bounds; emit the optimal
    /// occupation measure and its deterministic-mixture certificate.
    Solve {
        /// Model file.
        model: PathBuf,
        /// Proceed even if a reachable zero-cost end component exists.
        #[arg(long)]
        skip_assumption_check: bool,
        /// Write the occupation linear program in MPS format to this path.
        #[arg(long, value_name = "PATH")]
        dump_lp: Option<PathBuf>,
        /// Write the optimal occupation measure document to this path.
        #[arg(long, value_name = "PATH")]
        out_occupation: Option<PathBuf>,
        /// Write the optimal mixture as a strategy document to this path.
        #[arg(long, value_name = "PATH")]
        out_strategy: Option<PathBuf>,
    },
    /// Decide feasibility by minimizing the first constraint cost subject
    /// to the remaining bounds.
    FindFeasible {
        /// Model file.
        model: PathBuf,
    },
    /// Repair an occupation measure to its set-wise minimal form and
    /// certify it as a mixture of deterministic strategies.
    Decompose {
        /// Model file.
        model: PathBuf,
        /// Occupation-measure file.
        occupation: PathBuf,
    },
    /// Report whether an occupation measure is an extreme point of the
    /// occupation polytope.
    CheckExtreme {
        /// Model file.
        model: PathBuf,
        /// Occupation-measure file.
        occupation: PathBuf,
    },
    /// Check the penalization assumption: no reachable end component may
    /// carry zero cost in every table.
    CheckAssumption {
        /// Model file.
        model: PathBuf,
    },
    /// Compute the occupation measure and expected costs of a strategy.
    Evaluate {
        /// Model file.
        model: PathBuf,
        /// Strategy file (deterministic, stationary, or mixed).
        strategy: PathBuf,
    },
    /// Simulate a strategy (default: the solved optimal mixture) and print
    /// an empirical report.
    Simulate {
        /// Model file.
        model: PathBuf,
        /// Strategy file; when omitted, the model is solved and its optimal
        /// mixture simulated.
        strategy: Option<PathBuf>,
        /// Number of trajectories.
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        /// Seed for the per-trajectory random substreams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum decision epochs per trajectory.
        #[arg(long, default_value_t = 100_000)]
        step_cap: u64,
        /// Occupation-measure file to compare against (prints max |z|).
        #[arg(long, value_name = "PATH")]
        compare: Option<PathBuf>,
        /// Write the report document to this path as well.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// List every deterministic stationary strategy with its occupation
    /// classification and expected costs.
    Enumerate {
        /// Model file.
        model: PathBuf,
    },
}

/// Dispatches a parsed invocation, appending report text to `out`.
///
/// On error, `out` still holds everything written before the failure; the
/// caller should print it and exit with the error's code.
pub fn run(cli: &Cli, out: &mut String) -> Result<()> {
    let tol = Tolerances::scaled(cli.tol);
    match &cli.command {
        Command::Validate { model } => {
            let problem = parse_model(model)?;
            let m = &problem.model;
            let pairs: usize = (0..m.num_states()).map(|x| m.num_actions(x)).sum();
            line(out, "model OK");
            line(out, &format!("states: {}", m.num_states()));
            line(out, &format!("state-action pairs: {pairs}"));
            line(
                out,
                &format!("cost tables: {} (objective '{}')", m.num_costs(), m.cost_name(0)),
            );
            line(out, &format!("constraints: {}", problem.num_constraints()));
            line(out, &format!("initial state: {}", m.state_name(m.initial_state())));
            Ok(())
        }
        Command::Solve {
            model,
            skip_assumption_check,
            dump_lp,
            out_occupation,
            out_strategy,
        } => {
            let problem = parse_model(model)?;
            if let Some(path) = dump_lp {
                write_file(path, &write_mps(&build_occupation_lp(&problem)))?;
            }
            let options = SolveOptions {
                skip_assumption_check: *skip_assumption_check,
                tol: tol.clone(),
            };
            let solution = solve_constrained_with(&problem, &options)?;
            line(out, "status: optimal");
            print_costs(out, &problem, &solution.decomposition.achieved);
            print_occupation(out, &problem.model, &solution.occupation);
            print_mixture(out, &problem.model, &solution.decomposition);
            if let Some(path) = out_occupation {
                write_file(path, &render_occupation(&problem.model, &solution.occupation))?;
            }
            if let Some(path) = out_strategy {
                let doc = render_strategy(
                    &problem.model,
                    &AnyStrategy::Mixed(solution.decomposition.mixture.clone()),
                )?;
                write_file(path, &doc)?;
            }
            Ok(())
        }
        Command::FindFeasible { model } => {
            let problem = parse_model(model)?;
            let options = SolveOptions {
                skip_assumption_check: false,
                tol: tol.clone(),
            };
            let cert = find_feasible_with(&problem, &options)?;
            line(out, "feasible: yes");
            line(
                out,
                &format!(
                    "minimal '{}' = {} (bound {})",
                    problem.model.cost_name(1),
                    cert.best_constraint_value,
                    problem.bounds[0]
                ),
            );
            print_costs(out, &problem, &cert.decomposition.achieved);
            print_occupation(out, &problem.model, &cert.occupation);
            print_mixture(out, &problem.model, &cert.decomposition);
            Ok(())
        }
        Command::Decompose { model, occupation } => {
            let problem = parse_model(model)?;
            let m = parse_occupation(occupation, &problem.model)?;
            line(out, &format!("flow residual: {}", flow_residual(&problem.model, &m)));
            let repaired = minimality_repair(&problem.model, &m, &tol)?;
            line(
                out,
                &format!("repair adjustment (sup norm): {}", m.sup_distance(&repaired)),
            );
            let decomposition = decompose_to_mixture(&problem, &repaired, &tol)?;
            print_costs(out, &problem, &decomposition.achieved);
            print_mixture(out, &problem.model, &decomposition);
            Ok(())
        }
        Command::CheckExtreme { model, occupation } => {
            let problem = parse_model(model)?;
            let m = parse_occupation(occupation, &problem.model)?;
            let (extreme, witness) = is_extreme(&problem.model, &m, tol.extreme);
            if extreme {
                line(out, "extreme: yes");
            } else {
                line(out, "extreme: no");
                if let Some(x) = witness {
                    line(
                        out,
                        &format!("first state mixing actions: {}", problem.model.state_name(x)),
                    );
                }
            }
            Ok(())
        }
        Command::CheckAssumption { model } => {
            let problem = parse_model(model)?;
            let report = check_penalization_assumption(&problem);
            match report.witness {
                None => {
                    line(out, "assumption holds: no reachable zero-cost end component");
                    Ok(())
                }
                Some(ec) => {
                    line(out, "assumption violated");
                    print_end_component(out, &problem.model, &ec);
                    Err(assumption_witness_error(&problem.model, &ec))
                }
            }
        }
        Command::Evaluate { model, strategy } => {
            let problem = parse_model(model)?;
            let s = parse_strategy(strategy, &problem.model)?;
            line(out, &format!("strategy kind: {}", kind_name(&s)));
            let m = occupation_of_any(&problem.model, &s)?;
            line(out, &format!("total mass: {}", m.total_mass()));
            print_occupation(out, &problem.model, &m);
            print_costs(out, &problem, &cost_vector(&problem.model, &m));
            Ok(())
        }
        Command::Simulate {
            model,
            strategy,
            n,
            seed,
            step_cap,
            compare,
            out: out_path,
        } => {
            let problem = parse_model(model)?;
            let s = match strategy {
                Some(path) => parse_strategy(path, &problem.model)?,
                None => {
                    let options = SolveOptions {
                        skip_assumption_check: false,
                        tol: tol.clone(),
                    };
                    let solution = solve_constrained_with(&problem, &options)?;
                    AnyStrategy::Mixed(solution.decomposition.mixture)
                }
            };
            let report = simulate(&problem.model, &s, *n, *seed, *step_cap);
            let doc = render_report(&problem.model, &report);
            out.push_str(&doc);
            if let Some(path) = out_path {
                write_file(path, &doc)?;
            }
            if let Some(path) = compare {
                let reference = parse_occupation(path, &problem.model)?;
                let z = compare_empirical(&report, &reference)?;
                line(out, "");
                line(out, &format!("max |z| = {z}"));
            }
            Ok(())
        }
        Command::Enumerate { model } => {
            let problem = parse_model(model)?;
            let mut count = 0usize;
            let mut body = String::new();
            for item in enumerate_deterministic(&problem.model)? {
                let sel = item?;
                count += 1;
                let head = format!("  {}: ", selector_text(&problem.model, &sel.strategy));
                match &sel.report {
                    FinitenessReport::Finite { .. } => {
                        let costs = sel.costs.as_ref().expect("finite selector carries costs");
                        line(&mut body, &format!("{head}finite; {}", costs_inline(&problem, costs)));
                    }
                    FinitenessReport::Infinite { witness } => {
                        let states = witness
                            .iter()
                            .map(|&x| problem.model.state_name(x))
                            .collect::<Vec<_>>()
                            .join(", ");
                        line(&mut body, &format!("{head}infinite (witness states: {states})"));
                    }
                }
            }
            line(out, &format!("deterministic strategies: {count}"));
            out.push_str(&body);
            Ok(())
        }
    }
}

fn line(out: &mut String, text: &str) {
    out.push_str(text);
    out.push('\n');
}

fn kind_name(s: &AnyStrategy) -> &'static str {
    match s {
        AnyStrategy::Deterministic(_) => "deterministic",
        AnyStrategy::Stationary(_) => "stationary",
        AnyStrategy::Markov(_) => "markov",
        AnyStrategy::Mixed(_) => "mixed",
    }
}

fn selector_text(model: &FiniteMdpModel, phi: &DeterministicStrategy) -> String {
    let body = (0..model.num_states())
        .map(|x| format!("{} -> {}", model.state_name(x), model.action_name(x, phi.action(x))))
        .collect::<Vec<_>>()
        .join(", ");
    format!("{{ {body} }}")
}

fn costs_inline(problem: &ConstrainedProblem, costs: &ObjectiveVector) -> String {
    costs
        .0
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{} = {v}", problem.model.cost_name(j)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_costs(out: &mut String, problem: &ConstrainedProblem, costs: &ObjectiveVector) {
    let model = &problem.model;
    line(out, &format!("objective '{}' = {}", model.cost_name(0), costs.objective()));
    for (j, &bound) in problem.bounds.iter().enumerate() {
        line(
            out,
            &format!(
                "constraint '{}' = {} (bound {})",
                model.cost_name(j + 1),
                costs.0[j + 1],
                bound
            ),
        );
    }
}

fn print_occupation(out: &mut String, model: &FiniteMdpModel, m: &OccupationMeasure) {
    line(out, "occupation measure:");
    for x in 0..model.num_states() {
        for a in 0..model.num_actions(x) {
            let value = m.get(x, a);
            if value != 0.0 {
                line(
                    out,
                    &format!("  {}/{} = {value}", model.state_name(x), model.action_name(x, a)),
                );
            }
        }
    }
}

fn print_mixture(out: &mut String, model: &FiniteMdpModel, decomposition: &Decomposition) {
    let mix = &decomposition.mixture;
    let plural = if mix.len() == 1 { "component" } else { "components" };
    line(out, &format!("mixture ({} {plural}):", mix.len()));
    for (weight, phi) in mix.iter() {
        line(out, &format!("  weight {weight}: {}", selector_text(model, phi)));
    }
    if decomposition.fallback {
        line(
            out,
            "note: decomposition exceeded the guaranteed component bound (fallback mixture)",
        );
    }
}

fn print_end_component(out: &mut String, model: &FiniteMdpModel, ec: &EndComponent) {
    line(out, "witness end component:");
    for (i, &x) in ec.states.iter().enumerate() {
        let actions = ec.actions[i]
            .iter()
            .map(|&a| model.action_name(x, a))
            .collect::<Vec<_>>()
            .join(", ");
        line(out, &format!("  {}: {actions}", model.state_name(x)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_a_solve_invocation() {
        let cli = Cli::try_parse_from([
            "cmdp",
            "solve",
            "m.model",
            "--skip-assumption-check",
            "--tol",
            "10",
        ])
        .unwrap();
        assert_eq!(cli.tol, 10.0);
        match cli.command {
            Command::Solve {
                skip_assumption_check,
                ..
            } => assert!(skip_assumption_check),
            other => panic!("wrong command: {other:?}"),
        }
    }

    #[test]
    fn simulate_strategy_is_optional() {
        let cli = Cli::try_parse_from(["cmdp", "simulate", "m.model", "--n", "5"]).unwrap();
        match cli.command {
            Command::Simulate { strategy, n, .. } => {
                assert!(strategy.is_none());
                assert_eq!(n, 5);
            }
            other => panic!("wrong command: {other:?}"),
        }
    }
}
