//! Minimal library walkthrough: parse a model, solve the constrained
//! problem, and print the optimal deterministic mixture.

use std::path::Path;

fn main() -> cmdp::Result<()> {
    let problem = cmdp::files::parse_model(Path::new("models/twoact.model"))?;
    let solution = cmdp::mixture::solve_constrained(&problem)?;

    println!("objective = {}", solution.decomposition.achieved.objective());
    for (weight, phi) in solution.decomposition.mixture.iter() {
        let model = &problem.model;
        let choices: Vec<String> = (0..model.num_states())
            .map(|x| model.action_name(x, phi.action(x)).to_owned())
            .collect();
        println!("weight {weight}: {}", choices.join(", "));
    }
    Ok(())
}
