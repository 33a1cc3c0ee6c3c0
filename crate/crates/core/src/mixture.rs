//! Extreme points, the penalization assumption, and mixture decomposition.
//!
//! Three structural facts drive this module:
//!
//! 1. A finite occupation measure is an extreme point of the occupation
//!    polytope exactly when it is generated by a deterministic stationary
//!    strategy — equivalently, when its disintegration randomizes nowhere.
//! 2. If every strategy with infinite expected occupation incurs an
//!    infinite total for at least one cost (the *penalization assumption*,
//!    which for finite models reduces to the absence of a reachable end
//!    component whose pairs carry zero cost in every table), the
//!    constrained optimum is attained by mixing at most `J+1` deterministic
//!    stationary strategies.
//! 3. Feasibility can be certified by re-enumerating: minimize the first
//!    constraint cost subject to the remaining `J-1` bounds and compare the
//!    attained value against `d_1`.
//!
//! The decomposition itself is a small LP over candidate selectors (support
//! selectors of the target measure, Lagrangian-scalarization optima, and —
//! for small models — the full selector set), followed by a Carathéodory
//! reduction in cost space down to `J+2` components and a subset search for
//! a `J+1`-sized certificate.

use std::collections::BTreeMap;

use crate::error::{CmdpError, Result};
use crate::graph::{self, EndComponent};
use crate::linalg;
use crate::lp::{self, LpStatus, StandardFormLp};
use crate::model::{
    as_stationary, ConstrainedProblem, DeterministicStrategy, FiniteMdpModel, MixedStrategy,
};
use crate::occupancy::{
    classify_finiteness, cost_vector, flow_residual, minimality_repair,
    occupation_of_stationary, FinitenessReport, ObjectiveVector, OccupationMeasure,
};
use crate::tol::{Tolerances, SELECTOR_ENUMERATION_LIMIT, VALUE_ITERATION_CAP};

// ---------------------------------------------------------------------------
// Extreme points
// ---------------------------------------------------------------------------

/// Tests whether a finite occupation measure is an extreme point of the
/// occupation polytope: every state carrying more than `tol` marginal mass
/// must concentrate that mass on a single action. Returns the verdict and,
/// when not extreme, the lowest-indexed state where randomization shows.
pub fn is_extreme(
    model: &FiniteMdpModel,
    m: &OccupationMeasure,
    tol: f64,
) -> (bool, Option<usize>) {
    for x in 0..model.num_states() {
        let mu = m.marginal(x);
        if mu <= tol {
            continue;
        }
        let carried = m.row(x).iter().filter(|&&v| v > tol * mu).count();
        if carried > 1 {
            return (false, Some(x));
        }
    }
    (true, None)
}

// ---------------------------------------------------------------------------
// Deterministic enumeration
// ---------------------------------------------------------------------------

/// One selector from [`enumerate_deterministic`], with its finiteness
/// verdict and (when finite) its exact cost vector.
#[derive(Clone, Debug)]
pub struct EnumeratedSelector {
    pub strategy: DeterministicStrategy,
    pub report: FinitenessReport,
    pub costs: Option<ObjectiveVector>,
}

/// Streams every deterministic stationary strategy in lexicographic order
/// of its action indices. Refuses upfront when `Π_x |A(x)|` exceeds a
/// million.
pub fn enumerate_deterministic(
    model: &FiniteMdpModel,
) -> Result<impl Iterator<Item = Result<EnumeratedSelector>> + '_> {
    let mut product: u128 = 1;
    for x in 0..model.num_states() {
        product = product.saturating_mul(model.num_actions(x) as u128);
    }
    if product > SELECTOR_ENUMERATION_LIMIT as u128 {
        return Err(CmdpError::TooManySelectors(
            product,
            SELECTOR_ENUMERATION_LIMIT,
        ));
    }
    let mut odometer = Some(vec![0usize; model.num_states()]);
    Ok(std::iter::from_fn(move || {
        let choices = odometer.take()?;
        // Advance for next call: rightmost digit first.
        let mut next = choices.clone();
        let mut pos = model.num_states();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            next[pos] += 1;
            if next[pos] < model.num_actions(pos) {
                odometer = Some(next);
                break;
            }
            next[pos] = 0;
        }
        let strategy = DeterministicStrategy::new(model, choices)
            .expect("odometer stays within per-state action counts");
        let report = classify_finiteness(model, &as_stationary(model, &strategy));
        let costs = match &report {
            FinitenessReport::Finite { .. } => {
                match occupation_of_stationary(model, &as_stationary(model, &strategy)) {
                    Ok(m) => Some(cost_vector(model, &m)),
                    Err(e) => return Some(Err(e)),
                }
            }
            FinitenessReport::Infinite { .. } => None,
        };
        Some(Ok(EnumeratedSelector {
            strategy,
            report,
            costs,
        }))
    }))
}

// ---------------------------------------------------------------------------
// Scalarized unconstrained solve
// ---------------------------------------------------------------------------

/// Minimizes the expected total of the weighted cost `Σ_j λ_j r_j` by value
/// iteration on `v(x) = min_a [f(x,a) + Σ_y p(y|x,a) v(y)]`, returning the
/// greedy selector (lowest action index on ties). Divergence — which
/// happens exactly when every action forces unbounded weighted cost — is
/// reported as [`CmdpError::NonConvergent`] after `1e5` sweeps.
pub fn solve_unconstrained(
    model: &FiniteMdpModel,
    lambda: &[f64],
) -> Result<DeterministicStrategy> {
    if lambda.len() != model.num_costs() {
        return Err(CmdpError::ShapeMismatch(format!(
            "{} scalarization weights for {} cost tables",
            lambda.len(),
            model.num_costs()
        )));
    }
    if lambda.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(CmdpError::InvalidArgument(
            "scalarization weights must be finite and nonnegative".into(),
        ));
    }
    let tol = Tolerances::default();
    let n = model.num_states();
    let f = |x: usize, a: usize| -> f64 {
        lambda
            .iter()
            .enumerate()
            .map(|(j, w)| w * model.cost(j, x, a))
            .sum()
    };

    let mut v = vec![0.0; n];
    let mut sweeps: u64 = 0;
    loop {
        let mut next = vec![0.0; n];
        for x in 0..n {
            let mut best = f64::INFINITY;
            for a in 0..model.num_actions(x) {
                let mut q = f(x, a);
                for (y, p) in model.successors(x, a) {
                    q += p * v[y];
                }
                if q < best {
                    best = q;
                }
            }
            next[x] = best;
        }
        let residual = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        sweeps += 1;
        if residual < tol.value_iter {
            break;
        }
        if sweeps >= VALUE_ITERATION_CAP {
            return Err(CmdpError::NonConvergent { sweeps, residual });
        }
    }

    let choices = (0..n)
        .map(|x| {
            let mut best_a = 0;
            let mut best = f64::INFINITY;
            for a in 0..model.num_actions(x) {
                let mut q = f(x, a);
                for (y, p) in model.successors(x, a) {
                    q += p * v[y];
                }
                if q < best {
                    best = q;
                    best_a = a;
                }
            }
            best_a
        })
        .collect();
    DeterministicStrategy::new(model, choices)
}

// ---------------------------------------------------------------------------
// Penalization assumption
// ---------------------------------------------------------------------------

/// Outcome of [`check_penalization_assumption`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssumptionReport {
    pub holds: bool,
    /// When violated: a reachable end component all of whose pairs carry
    /// zero cost in every table (the first one in state order).
    pub witness: Option<EndComponent>,
}

/// Checks that no strategy can accumulate infinite occupation at finite
/// total cost. For finite models this is equivalent to: no end component
/// reachable from the initial state consists solely of pairs with
/// `r_j(x,a) = 0` for every `j`. The analysis is exact — it depends only on
/// kernel supports, canonicalized deficits, and exact cost zeros.
pub fn check_penalization_assumption(problem: &ConstrainedProblem) -> AssumptionReport {
    let model = &problem.model;
    let allowed: Vec<Vec<bool>> = (0..model.num_states())
        .map(|x| {
            (0..model.num_actions(x))
                .map(|a| (0..model.num_costs()).all(|j| model.cost(j, x, a) == 0.0))
                .collect()
        })
        .collect();
    let mecs = graph::maximal_end_components(model, &allowed);
    let reach = graph::reachable(model, None);
    for ec in mecs {
        if ec.states.iter().any(|&x| reach[x]) {
            return AssumptionReport {
                holds: false,
                witness: Some(ec),
            };
        }
    }
    AssumptionReport {
        holds: true,
        witness: None,
    }
}

/// Builds the reportable error for a failing penalization check from its
/// witness end component.
pub fn assumption_witness_error(model: &FiniteMdpModel, ec: &EndComponent) -> CmdpError {
    CmdpError::AssumptionViolated {
        witness_states: ec
            .states
            .iter()
            .map(|&x| model.state_name(x).to_string())
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Decomposition into deterministic mixtures
// ---------------------------------------------------------------------------

/// A mixture certificate for an occupation measure: component selectors
/// with weights, the exact cost vector the mixture achieves, and a flag
/// marking the rare case where only `J+2` components (instead of the
/// guaranteed `J+1` for an optimal input) could be certified.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub mixture: MixedStrategy,
    pub achieved: ObjectiveVector,
    pub fallback: bool,
}

/// A candidate selector with its exact cost vector.
struct Candidate {
    phi: DeterministicStrategy,
    costs: ObjectiveVector,
}

/// Collects candidate selectors for decomposing `target_costs`-compatible
/// measures: the support selectors of `mstar`, scalarization optima over a
/// `{0,1}^{J+1}` grid plus `count` low-discrepancy simplex points (phase
/// distinguishes the retry grid), and — when the model is small — every
/// selector. Only selectors with finite occupation survive.
fn candidate_pool(
    problem: &ConstrainedProblem,
    mstar: &OccupationMeasure,
    extra_phase: Option<f64>,
    tol: &Tolerances,
) -> Vec<Candidate> {
    let model = &problem.model;
    let n = model.num_states();
    let mut pool: BTreeMap<Vec<usize>, ObjectiveVector> = BTreeMap::new();
    let admit = |choices: Vec<usize>, pool: &mut BTreeMap<Vec<usize>, ObjectiveVector>| {
        if pool.contains_key(&choices) {
            return;
        }
        let Ok(phi) = DeterministicStrategy::new(model, choices.clone()) else {
            return;
        };
        let sigma = as_stationary(model, &phi);
        if !classify_finiteness(model, &sigma).is_finite() {
            return;
        }
        let Ok(m) = occupation_of_stationary(model, &sigma) else {
            return;
        };
        pool.insert(choices, cost_vector(model, &m));
    };

    // 1. Selectors consistent with the support of the target measure
    //    (off-support states fixed to the lowest action: changing a selector
    //    where the measure vanishes does not change its occupation).
    let support: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            if mstar.marginal(x) > tol.support {
                let acts: Vec<usize> = (0..model.num_actions(x))
                    .filter(|&a| mstar.get(x, a) > tol.support)
                    .collect();
                if acts.is_empty() {
                    vec![0]
                } else {
                    acts
                }
            } else {
                vec![0]
            }
        })
        .collect();
    let support_product: u128 = support.iter().map(|s| s.len() as u128).product();
    if support_product <= 4096 {
        let mut idx = vec![0usize; n];
        loop {
            let choices: Vec<usize> = (0..n).map(|x| support[x][idx[x]]).collect();
            admit(choices, &mut pool);
            let mut pos = n;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < support[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }

    // 2. Scalarization optima over the standard grid (or the retry grid).
    let dim = model.num_costs();
    let mut lambdas: Vec<Vec<f64>> = Vec::new();
    match extra_phase {
        None => {
            for mask in 0..(1u32 << dim.min(16)) {
                lambdas.push((0..dim).map(|j| ((mask >> j) & 1) as f64).collect());
            }
            lambdas.extend(simplex_grid(dim, 20, 0.5));
        }
        Some(phase) => lambdas.extend(simplex_grid(dim, 20, phase)),
    }
    for lambda in lambdas {
        if let Ok(phi) = solve_unconstrained(model, &lambda) {
            admit(phi.choices().to_vec(), &mut pool);
        }
    }

    // 3. Small models: the entire selector space.
    let full_product: u128 = (0..n).map(|x| model.num_actions(x) as u128).product();
    if full_product <= 10_000 {
        if let Ok(iter) = enumerate_deterministic(model) {
            for item in iter.flatten() {
                if let Some(costs) = item.costs {
                    pool.entry(item.strategy.choices().to_vec())
                        .or_insert(costs);
                }
            }
        }
    }

    pool.into_iter()
        .map(|(choices, costs)| Candidate {
            phi: DeterministicStrategy::new(model, choices).expect("pool keys are valid"),
            costs,
        })
        .collect()
}

/// Deterministic low-discrepancy points on the probability simplex: the
/// R-sequence (powers of the generalized golden ratio) pushed through the
/// exponential-spacings map.
fn simplex_grid(dim: usize, count: usize, phase: f64) -> Vec<Vec<f64>> {
    let d = dim as f64;
    let mut g = 1.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (d + 1.0));
    }
    let alphas: Vec<f64> = (1..=dim).map(|k| g.powi(-(k as i32))).collect();
    (1..=count)
        .map(|i| {
            let e: Vec<f64> = alphas
                .iter()
                .map(|a| {
                    let u = (phase + i as f64 * a).fract();
                    -(1.0 - u).ln()
                })
                .collect();
            let s: f64 = e.iter().sum();
            if s > 0.0 {
                e.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / d; dim]
            }
        })
        .collect()
}

/// Weight LP over `pool`: minimize the mixture objective subject to
/// `Σ α = 1`, the mixture's constraint costs staying within `slack` of the
/// target's, and the objective not undershooting the target (so the LP
/// certifies a *match*, not an improvement). Returns the weights when the
/// optimum reproduces `target[0]` within `tol.mixture`.
fn solve_weight_lp(
    pool: &[Candidate],
    target: &ObjectiveVector,
    tol: &Tolerances,
) -> Result<Option<Vec<f64>>> {
    let k = pool.len();
    let j_cons = target.0.len() - 1;
    let mut inequalities = Vec::with_capacity(j_cons + 1);
    for j in 1..=j_cons {
        let row: Vec<f64> = pool.iter().map(|c| c.costs.0[j]).collect();
        inequalities.push((row, target.0[j] + tol.weight_slack));
    }
    // Objective lower bound: -Σ α R_0 ≤ -(target_0 - slack).
    let neg_obj: Vec<f64> = pool.iter().map(|c| -c.costs.0[0]).collect();
    inequalities.push((neg_obj, -(target.0[0] - tol.weight_slack)));

    let lp = StandardFormLp {
        name: "WEIGHTS".into(),
        objective: pool.iter().map(|c| c.costs.0[0]).collect(),
        equalities: vec![(vec![1.0; k], 1.0)],
        inequalities,
        columns: (0..k).map(|i| format!("W{i}")).collect(),
        equality_names: vec!["SUM".into()],
        inequality_names: (0..=j_cons).map(|j| format!("B{j}")).collect(),
    };
    let sol = lp::simplex_solve(&lp, tol)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    if (sol.objective - target.0[0]).abs() > tol.mixture {
        return Ok(None);
    }
    Ok(Some(sol.values))
}

/// Carathéodory reduction in cost space: while more than `limit` weights
/// are active, move along a null direction of the active columns'
/// `[costs; 1]` matrix until one weight hits zero. The weight sum and every
/// mixture cost total are invariant along such directions.
fn caratheodory_reduce(weights: &mut [f64], pool: &[Candidate], limit: usize, tol: &Tolerances) {
    loop {
        let active: Vec<usize> = (0..weights.len())
            .filter(|&l| weights[l] > 1e-12)
            .collect();
        if active.len() <= limit {
            return;
        }
        let dim = pool[0].costs.0.len();
        let mut rows: Vec<Vec<f64>> = (0..dim)
            .map(|j| active.iter().map(|&l| pool[l].costs.0[j]).collect())
            .collect();
        rows.push(vec![1.0; active.len()]);
        let Some(c) = linalg::null_vector(rows, tol.singular) else {
            return; // columns affinely independent; nothing to eliminate
        };
        // Step until the first active weight reaches zero.
        let mut t = f64::INFINITY;
        for (i, &l) in active.iter().enumerate() {
            if c[i] > 1e-14 {
                t = t.min(weights[l] / c[i]);
            }
        }
        if !t.is_finite() {
            // Null direction has no positive entry; use its negation.
            for (i, &l) in active.iter().enumerate() {
                if -c[i] > 1e-14 {
                    t = t.min(-weights[l] / c[i]);
                }
            }
            if !t.is_finite() {
                return;
            }
            for (i, &l) in active.iter().enumerate() {
                weights[l] += t * c[i];
            }
        } else {
            for (i, &l) in active.iter().enumerate() {
                weights[l] -= t * c[i];
            }
        }
        for w in weights.iter_mut() {
            if *w < 1e-12 {
                *w = 0.0;
            }
        }
    }
}

/// Re-fits weights for a fixed active set by solving the matching system
/// `Σ α = 1`, `Σ α_l r_j(φ_l) = target_j` in the least-squares sense
/// (normal equations). The weight LP works within a small feasibility
/// slack, so its optimum can sit ~1e-9 off the exact certificate; when the
/// active selectors admit an exact convex match, this recovers it.
fn polish_weights(costs: &[&ObjectiveVector], target: &ObjectiveVector) -> Option<Vec<f64>> {
    let k = costs.len();
    let dim = target.0.len();
    let rows = dim + 1;
    let mut a = vec![vec![0.0; k]; rows];
    let mut b = vec![0.0; rows];
    a[0] = vec![1.0; k];
    b[0] = 1.0;
    for j in 0..dim {
        for (i, c) in costs.iter().enumerate() {
            a[j + 1][i] = c.0[j];
        }
        b[j + 1] = target.0[j];
    }
    let mut ata = vec![vec![0.0; k]; k];
    let mut atb = vec![0.0; k];
    for r in 0..rows {
        for i in 0..k {
            atb[i] += a[r][i] * b[r];
            for l in 0..k {
                ata[i][l] += a[r][i] * a[r][l];
            }
        }
    }
    let x = linalg::solve_dense(ata, atb, 1e-13).ok()?;
    if x.iter().any(|&w| w < -1e-9) {
        return None;
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return None;
    }
    Some(x.iter().map(|&w| w.max(0.0)).collect())
}

/// Worst cost mismatch of a weighting over the active set.
fn match_residual(costs: &[&ObjectiveVector], alphas: &[f64], target: &ObjectiveVector) -> f64 {
    (0..target.0.len())
        .map(|j| {
            let got: f64 = alphas.iter().zip(costs).map(|(&w, c)| w * c.0[j]).sum();
            (got - target.0[j]).abs()
        })
        .fold(0.0, f64::max)
}

fn assemble(
    pool: &[Candidate],
    weights: &[f64],
    target: &ObjectiveVector,
    fallback: bool,
) -> Result<Decomposition> {
    let active: Vec<usize> = (0..weights.len())
        .filter(|&l| weights[l] > 1e-12)
        .collect();
    let total: f64 = active.iter().map(|&l| weights[l]).sum();
    let mut alphas: Vec<f64> = active.iter().map(|&l| weights[l] / total).collect();
    let costs: Vec<&ObjectiveVector> = active.iter().map(|&l| &pool[l].costs).collect();
    if let Some(polished) = polish_weights(&costs, target) {
        if match_residual(&costs, &polished, target)
            <= match_residual(&costs, &alphas, target) + 1e-15
        {
            alphas = polished;
        }
    }

    let dim = target.0.len();
    let mut achieved = vec![0.0; dim];
    let mut final_weights = Vec::new();
    let mut final_components = Vec::new();
    for (i, &l) in active.iter().enumerate() {
        if alphas[i] == 0.0 {
            continue; // polished to irrelevance; the remaining weights sum to 1
        }
        for (j, slot) in achieved.iter_mut().enumerate() {
            *slot += alphas[i] * pool[l].costs.0[j];
        }
        final_weights.push(alphas[i]);
        final_components.push(pool[l].phi.clone());
    }
    let mixture = MixedStrategy::new(final_weights, final_components)?;
    Ok(Decomposition {
        mixture,
        achieved: ObjectiveVector(achieved),
        fallback,
    })
}

/// Decomposes a repaired, flow-feasible occupation measure into a mixture
/// of at most `J+1` deterministic stationary strategies whose constraint
/// costs stay within `1e-8` of the measure's and whose objective matches it
/// within `1e-8`. When only a `J+2`-sized certificate can be found (which
/// cannot happen for an optimal measure under the penalization assumption),
/// the result carries `fallback = true`.
pub fn decompose_to_mixture(
    problem: &ConstrainedProblem,
    mstar: &OccupationMeasure,
    tol: &Tolerances,
) -> Result<Decomposition> {
    let model = &problem.model;
    let target = cost_vector(model, mstar);
    let j_plus_1 = problem.num_constraints() + 1;

    let mut pool = candidate_pool(problem, mstar, None, tol);
    if pool.is_empty() {
        return Err(CmdpError::EmptyCandidatePool);
    }
    let mut weights = solve_weight_lp(&pool, &target, tol)?;
    if weights.is_none() {
        // One retry with a fresh scalarization grid.
        pool = candidate_pool(problem, mstar, Some(0.25), tol);
        if pool.is_empty() {
            return Err(CmdpError::EmptyCandidatePool);
        }
        weights = solve_weight_lp(&pool, &target, tol)?;
    }
    let Some(mut weights) = weights else {
        return Err(CmdpError::DecompositionFailed(format!(
            "no mixture over {} candidate selectors reproduces the target costs",
            pool.len()
        )));
    };

    caratheodory_reduce(&mut weights, &pool, j_plus_1 + 1, tol);
    let active: Vec<usize> = (0..weights.len())
        .filter(|&l| weights[l] > 1e-12)
        .collect();

    if active.len() <= j_plus_1 {
        return assemble(&pool, &weights, &target, false);
    }

    // J+2 active components: look for a J+1 subset that still certifies.
    for drop in &active {
        let sub: Vec<usize> = active.iter().copied().filter(|l| l != drop).collect();
        let sub_pool: Vec<Candidate> = sub
            .iter()
            .map(|&l| Candidate {
                phi: pool[l].phi.clone(),
                costs: pool[l].costs.clone(),
            })
            .collect();
        if let Some(sub_weights) = solve_weight_lp(&sub_pool, &target, tol)? {
            return assemble(&sub_pool, &sub_weights, &target, false);
        }
    }
    assemble(&pool, &weights, &target, true)
}

// ---------------------------------------------------------------------------
// End-to-end solvers
// ---------------------------------------------------------------------------

/// Knobs for [`solve_constrained_with`] and [`find_feasible_with`].
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Proceed even when the penalization assumption fails, taking the LP
    /// solution at face value.
    pub skip_assumption_check: bool,
    pub tol: Tolerances,
}

/// Everything the constrained solver produces.
#[derive(Clone, Debug)]
pub struct Solution {
    /// The repaired (set-wise minimal) optimal occupation measure.
    pub occupation: OccupationMeasure,
    /// Its certificate as a small deterministic mixture.
    pub decomposition: Decomposition,
    /// Simplex pivots spent on the occupation LP.
    pub lp_iterations: u64,
}

/// Solves the constrained problem end to end: assumption gate, occupation
/// LP, minimality repair, and mixture decomposition.
pub fn solve_constrained(problem: &ConstrainedProblem) -> Result<Solution> {
    solve_constrained_with(problem, &SolveOptions::default())
}

pub fn solve_constrained_with(
    problem: &ConstrainedProblem,
    options: &SolveOptions,
) -> Result<Solution> {
    let tol = &options.tol;
    if !options.skip_assumption_check {
        let report = check_penalization_assumption(problem);
        if let Some(ec) = report.witness {
            return Err(assumption_witness_error(&problem.model, &ec));
        }
    }

    let lp = lp::build_occupation_lp(problem);
    let sol = lp::simplex_solve(&lp, tol)?;
    match sol.status {
        LpStatus::Infeasible => return Err(CmdpError::InfeasibleProblem),
        LpStatus::Unbounded => return Err(CmdpError::UnboundedPolytope),
        LpStatus::Optimal => {}
    }
    let m_lp = measure_from_values(&problem.model, &sol.values)?;
    debug_assert!(flow_residual(&problem.model, &m_lp) <= tol.flow);
    let repaired = minimality_repair(&problem.model, &m_lp, tol)?;
    let decomposition = decompose_to_mixture(problem, &repaired, tol)?;
    Ok(Solution {
        occupation: repaired,
        decomposition,
        lp_iterations: sol.iterations,
    })
}

/// Reassembles an occupation measure from LP values in pair-column order.
fn measure_from_values(model: &FiniteMdpModel, values: &[f64]) -> Result<OccupationMeasure> {
    let mut entries: Vec<Vec<f64>> = (0..model.num_states())
        .map(|x| vec![0.0; model.num_actions(x)])
        .collect();
    for (&(x, a), &v) in lp::pair_columns(model).iter().zip(values) {
        entries[x][a] = v;
    }
    OccupationMeasure::new(model, entries)
}

/// A feasibility certificate from the re-enumeration trick.
#[derive(Clone, Debug)]
pub struct FeasibilityCertificate {
    /// Repaired occupation measure minimizing `R_1` subject to the other
    /// constraints.
    pub occupation: OccupationMeasure,
    /// Mixture certificate; `achieved` holds the *original* problem's full
    /// cost vector `(R_0, …, R_J)` of the mixture.
    pub decomposition: Decomposition,
    /// The attained minimum of `R_1`.
    pub best_constraint_value: f64,
}

/// Decides feasibility of the constrained problem by minimizing the first
/// constraint cost subject to the remaining bounds. Feasible exactly when
/// the attained minimum is at most `d_1` (within slack); the certificate is
/// a mixture of at most `J` deterministic strategies (the auxiliary problem
/// has `J-1` constraints). The penalization assumption is only required of
/// the costs `r_1, …, r_J` — the objective table plays no role here.
pub fn find_feasible(problem: &ConstrainedProblem) -> Result<FeasibilityCertificate> {
    find_feasible_with(problem, &SolveOptions::default())
}

pub fn find_feasible_with(
    problem: &ConstrainedProblem,
    options: &SolveOptions,
) -> Result<FeasibilityCertificate> {
    if problem.num_constraints() == 0 {
        return Err(CmdpError::InvalidArgument(
            "feasibility search needs at least one constraint".into(),
        ));
    }
    let tol = &options.tol;
    let model = &problem.model;

    // Re-enumerated problem: minimize r_1 subject to r_2..r_J.
    let order: Vec<usize> = (1..model.num_costs()).collect();
    let aux_model = model.select_costs(&order)?;
    let aux_problem = ConstrainedProblem::new(aux_model, problem.bounds[1..].to_vec())?;

    let aux_solution = solve_constrained_with(&aux_problem, options)?;
    let attained = cost_vector(&aux_problem.model, &aux_solution.occupation).0[0];
    if attained > problem.bounds[0] + tol.weight_slack {
        return Err(CmdpError::InfeasibleProblem);
    }

    // Re-express the mixture's costs in the original problem's tables.
    let mut achieved = vec![0.0; model.num_costs()];
    for (w, phi) in aux_solution.decomposition.mixture.iter() {
        let occ = occupation_of_stationary(model, &as_stationary(model, phi))?;
        for (j, slot) in achieved.iter_mut().enumerate() {
            *slot += w * cost_vector(model, &occ).0[j];
        }
    }
    Ok(FeasibilityCertificate {
        occupation: aux_solution.occupation,
        decomposition: Decomposition {
            mixture: aux_solution.decomposition.mixture,
            achieved: ObjectiveVector(achieved),
            fallback: aux_solution.decomposition.fallback,
        },
        best_constraint_value: attained,
    })
}
