//! Seeded random-instance generators shared by the integration suites.
//!
//! All randomness flows through a caller-supplied ChaCha generator, so
//! every suite is reproducible from its fixed seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cmdp::{
    validate_model, ConstrainedProblem, CostTable, DeterministicStrategy, FiniteMdpModel,
    ModelData, StationaryStrategy, TransitionRow,
};

/// Shape of a random model.
pub struct ModelSpec {
    pub max_states: usize,
    pub max_actions: usize,
    /// Minimum cemetery mass per row (0 permits non-absorbing rows).
    pub min_absorb: f64,
    /// When `min_absorb == 0`: probability that a row keeps no cemetery
    /// mass at all (its alive mass sums to exactly 1).
    pub zero_absorb_prob: f64,
    /// Number of cost tables (objective first).
    pub num_costs: usize,
    /// Draw every cost entry strictly positive instead of half-sparse.
    pub positive_costs: bool,
    /// Give every transition row full support over the states, so every
    /// state is reachable from the initial one under any strategy.
    pub full_support: bool,
}

impl ModelSpec {
    /// Every row leaves at least `min_absorb` to the cemetery.
    pub fn absorbing(max_states: usize, max_actions: usize, min_absorb: f64) -> Self {
        ModelSpec {
            max_states,
            max_actions,
            min_absorb,
            zero_absorb_prob: 0.0,
            num_costs: 1,
            positive_costs: false,
            full_support: false,
        }
    }

    /// Rows may keep all mass alive, so closed components can arise.
    pub fn general(max_states: usize, max_actions: usize) -> Self {
        ModelSpec {
            max_states,
            max_actions,
            min_absorb: 0.0,
            zero_absorb_prob: 0.5,
            num_costs: 1,
            positive_costs: false,
            full_support: false,
        }
    }
}

/// Draws a model matching `spec`. States are `s0..`, actions per state are
/// `a0..` with a random per-state count.
pub fn random_model(rng: &mut ChaCha8Rng, spec: &ModelSpec) -> FiniteMdpModel {
    let n = rng.random_range(1..=spec.max_states);
    let states: Vec<String> = (0..n).map(|x| format!("s{x}")).collect();
    let actions: Vec<Vec<String>> = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=spec.max_actions);
            (0..k).map(|a| format!("a{a}")).collect()
        })
        .collect();

    let mut transitions = Vec::new();
    for x in 0..n {
        for a in 0..actions[x].len() {
            let alive = if spec.min_absorb > 0.0 {
                let absorb = spec.min_absorb + rng.random::<f64>() * (1.0 - spec.min_absorb);
                1.0 - absorb
            } else if rng.random::<f64>() < spec.zero_absorb_prob {
                1.0
            } else {
                rng.random::<f64>()
            };
            if alive <= 0.0 {
                continue; // row goes entirely to the cemetery
            }
            let support = if spec.full_support {
                n
            } else {
                rng.random_range(1..=n)
            };
            let mut targets: Vec<usize> = (0..n).collect();
            for i in 0..support {
                let j = rng.random_range(i..n);
                targets.swap(i, j);
            }
            let weights: Vec<f64> = (0..support).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = weights.iter().sum();
            let to: Vec<(String, f64)> = targets[..support]
                .iter()
                .zip(&weights)
                .map(|(&y, &w)| (states[y].clone(), w / total * alive))
                .collect();
            transitions.push(TransitionRow {
                from: states[x].clone(),
                action: actions[x][a].clone(),
                to,
            });
        }
    }

    let costs: Vec<CostTable> = (0..spec.num_costs)
        .map(|j| {
            let mut entries = Vec::new();
            for x in 0..n {
                for a in 0..actions[x].len() {
                    let value = if spec.positive_costs {
                        0.01 + rng.random::<f64>()
                    } else if rng.random::<f64>() < 0.5 {
                        0.0
                    } else {
                        rng.random::<f64>()
                    };
                    if value != 0.0 {
                        entries.push((states[x].clone(), actions[x][a].clone(), value));
                    }
                }
            }
            CostTable {
                name: format!("c{j}"),
                entries,
            }
        })
        .collect();

    // Placeholder zero bounds keep the extra tables attached to the model;
    // callers that need real constraints rebuild the problem themselves.
    let data = ModelData {
        initial: states[rng.random_range(0..n)].clone(),
        states,
        actions,
        transitions,
        objective: "c0".into(),
        constraints: (1..spec.num_costs).map(|j| (format!("c{j}"), 0.0)).collect(),
        costs,
    };
    validate_model(&data).expect("generated model is valid").model
}

/// A fully random stationary strategy; roughly half the rows get a sparse
/// support to exercise degenerate disintegrations.
pub fn random_stationary(rng: &mut ChaCha8Rng, model: &FiniteMdpModel) -> StationaryStrategy {
    let rows: Vec<Vec<f64>> = (0..model.num_states())
        .map(|x| {
            let k = model.num_actions(x);
            let support = if rng.random::<f64>() < 0.5 {
                k
            } else {
                rng.random_range(1..=k)
            };
            let mut row = vec![0.0; k];
            let mut picked: Vec<usize> = (0..k).collect();
            for i in 0..support {
                let j = rng.random_range(i..k);
                picked.swap(i, j);
            }
            let weights: Vec<f64> = (0..support).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = weights.iter().sum();
            for (i, &a) in picked[..support].iter().enumerate() {
                row[a] = weights[i] / total;
            }
            row
        })
        .collect();
    StationaryStrategy::new(model, rows).expect("generated rows are distributions")
}

/// A uniformly random deterministic strategy.
pub fn random_deterministic(rng: &mut ChaCha8Rng, model: &FiniteMdpModel) -> DeterministicStrategy {
    let choices: Vec<usize> = (0..model.num_states())
        .map(|x| rng.random_range(0..model.num_actions(x)))
        .collect();
    DeterministicStrategy::new(model, choices).expect("choices are in range")
}

/// Wraps a model into a constrained problem whose bounds are satisfiable by
/// construction: each bound is a random deterministic strategy's constraint
/// cost inflated by 5–50 %. Returns `None` when the probe strategy has
/// infinite occupation.
pub fn feasible_problem(
    rng: &mut ChaCha8Rng,
    model: FiniteMdpModel,
) -> Option<ConstrainedProblem> {
    let probe = random_deterministic(rng, &model);
    let sigma = cmdp::as_stationary(&model, &probe);
    let occupation = cmdp::occupation_of_stationary(&model, &sigma).ok()?;
    let costs = cmdp::cost_vector(&model, &occupation);
    let bounds: Vec<f64> = costs.0[1..]
        .iter()
        .map(|&c| c * (1.05 + 0.45 * rng.random::<f64>()) + 1e-6)
        .collect();
    Some(ConstrainedProblem::new(model, bounds).expect("bounds match cost tables"))
}
