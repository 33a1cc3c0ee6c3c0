//! Occupation measures and their calculus.
//!
//! The expected total occupation of a strategy is `M(x,a) = Σ_n P(X_n = x,
//! A_n = a)`. Finite occupation measures are exactly the nonnegative
//! solutions of the flow equation
//!
//! ```text
//! μ(x) = δ_{x0}(x) + Σ_{y,a} p(x|y,a) · M(y,a),      μ(x) = Σ_a M(x,a),
//! ```
//!
//! that carry no excess circulation. This module classifies strategies as
//! finite or infinite, solves the flow equation exactly for stationary and
//! eventually-stationary strategies, disintegrates a measure back into the
//! strategy that generates it, and converts a mixture of selectors into a
//! single Markov strategy with identical step-wise marginals.

use crate::error::{CmdpError, Result};
use crate::graph;
use crate::linalg;
use crate::model::{
    as_stationary, AnyStrategy, DeterministicStrategy, FiniteMdpModel, MarkovStrategy,
    MixedStrategy, StationaryStrategy,
};
use crate::tol::{Tolerances, TAIL_MASS_CAP, TAIL_MASS_CUTOFF};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Expected visit counts per state-action pair; always elementwise finite
/// and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationMeasure {
    entries: Vec<Vec<f64>>,
}

impl OccupationMeasure {
    /// Validates shape and nonnegativity against `model`. Entries in
    /// `[-1e-15, 0)` are clamped to zero.
    pub fn new(model: &FiniteMdpModel, entries: Vec<Vec<f64>>) -> Result<Self> {
        let tol = Tolerances::default();
        if entries.len() != model.num_states() {
            return Err(CmdpError::ShapeMismatch(format!(
                "{} occupation rows for {} states",
                entries.len(),
                model.num_states()
            )));
        }
        let mut entries = entries;
        for (x, row) in entries.iter_mut().enumerate() {
            if row.len() != model.num_actions(x) {
                return Err(CmdpError::ShapeMismatch(format!(
                    "{} occupation entries for {} actions at state '{}'",
                    row.len(),
                    model.num_actions(x),
                    model.state_name(x)
                )));
            }
            for v in row.iter_mut() {
                if !v.is_finite() {
                    return Err(CmdpError::InvalidArgument(
                        "occupation entries must be finite".into(),
                    ));
                }
                if *v < 0.0 && *v >= -tol.entry_clamp {
                    *v = 0.0;
                }
                if *v < 0.0 {
                    return Err(CmdpError::InvalidArgument(format!(
                        "negative occupation entry {v} at state '{}'",
                        model.state_name(x)
                    )));
                }
            }
        }
        Ok(OccupationMeasure { entries })
    }

    pub fn zeros(model: &FiniteMdpModel) -> Self {
        OccupationMeasure {
            entries: (0..model.num_states())
                .map(|x| vec![0.0; model.num_actions(x)])
                .collect(),
        }
    }

    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.entries[x][a]
    }

    pub(crate) fn set(&mut self, x: usize, a: usize, v: f64) {
        self.entries[x][a] = v;
    }

    pub(crate) fn add(&mut self, x: usize, a: usize, v: f64) {
        self.entries[x][a] += v;
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x]
    }

    /// State marginal `μ(x) = Σ_a M(x,a)`.
    pub fn marginal(&self, x: usize) -> f64 {
        self.entries[x].iter().sum()
    }

    /// Total expected lifetime `Σ_x μ(x)`.
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }

    pub fn num_states(&self) -> usize {
        self.entries.len()
    }

    /// Iterates `(state, action, value)` in index order.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().enumerate().map(move |(a, &v)| (x, a, v)))
    }

    /// Sup-norm distance; panics on shape mismatch (internal use).
    pub fn sup_distance(&self, other: &OccupationMeasure) -> f64 {
        self.iter_pairs()
            .map(|(x, a, v)| (v - other.get(x, a)).abs())
            .fold(0.0, f64::max)
    }
}

/// Verdict of [`classify_finiteness`].
#[derive(Clone, Debug, PartialEq)]
pub enum FinitenessReport {
    /// All expected visit counts are finite. `tail_mass[n]` is the survival
    /// probability `P(X_{n+1} alive)`, recorded until it falls below `1e-15`
    /// (capped at 10 000 terms) as a decay diagnostic.
    Finite { tail_mass: Vec<f64> },
    /// The strategy reaches a closed zero-leak state set (sorted) from which
    /// it can never absorb; expected occupation there is infinite.
    Infinite { witness: Vec<usize> },
}

impl FinitenessReport {
    pub fn is_finite(&self) -> bool {
        matches!(self, FinitenessReport::Finite { .. })
    }
}

/// Expected total costs `(R_0, …, R_J)` of a strategy or measure.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    pub fn objective(&self) -> f64 {
        self.0[0]
    }
}

// ---------------------------------------------------------------------------
// Finiteness classification
// ---------------------------------------------------------------------------

/// Decides exactly whether a stationary strategy's expected occupation is
/// finite, by structure alone: the occupation from `x0` is infinite iff the
/// support graph reaches a set of states that is closed under the strategy
/// and leaks nothing to the cemetery. Equivalently the spectral radius of
/// the reachable restriction of `P_σ` is 1; absent such a set it is
/// strictly below 1 and every visit count is a convergent geometric-type sum.
pub fn classify_finiteness(model: &FiniteMdpModel, sigma: &StationaryStrategy) -> FinitenessReport {
    let mut init = vec![0.0; model.num_states()];
    init[model.initial_state()] = 1.0;
    classify_finiteness_from(model, sigma, &init)
}

/// [`classify_finiteness`] started from an arbitrary initial distribution
/// (used for the tail of an eventually-stationary strategy).
pub(crate) fn classify_finiteness_from(
    model: &FiniteMdpModel,
    sigma: &StationaryStrategy,
    init: &[f64],
) -> FinitenessReport {
    let reach = reachable_from(model, sigma, init);
    let witness = graph::closed_zero_leak(model, sigma, &reach);
    if !witness.is_empty() {
        return FinitenessReport::Infinite { witness };
    }

    // Survival diagnostic: iterate the one-step law and record total alive mass.
    let mut tail_mass = Vec::new();
    let mut nu: Vec<f64> = init.to_vec();
    for _ in 0..TAIL_MASS_CAP {
        let mass: f64 = nu.iter().sum();
        tail_mass.push(mass);
        if mass <= TAIL_MASS_CUTOFF {
            break;
        }
        nu = push_forward(model, sigma, &nu);
    }
    FinitenessReport::Finite { tail_mass }
}

/// States reachable from the support of `init` under the support of `sigma`.
fn reachable_from(model: &FiniteMdpModel, sigma: &StationaryStrategy, init: &[f64]) -> Vec<bool> {
    let n = model.num_states();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&x| init[x] > 0.0).collect();
    for &x in &stack {
        seen[x] = true;
    }
    while let Some(x) = stack.pop() {
        for a in sigma.support(x).collect::<Vec<_>>() {
            for (y, _) in model.successors(x, a) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen
}

/// One-step push-forward `ν P_σ` of a subprobability over states.
fn push_forward(model: &FiniteMdpModel, sigma: &StationaryStrategy, nu: &[f64]) -> Vec<f64> {
    let n = model.num_states();
    let mut out = vec![0.0; n];
    for x in 0..n {
        if nu[x] == 0.0 {
            continue;
        }
        for (a, &sa) in sigma.row(x).iter().enumerate() {
            if sa == 0.0 {
                continue;
            }
            let w = nu[x] * sa;
            for (y, p) in model.successors(x, a) {
                out[y] += w * p;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Stationary occupation via the flow equation
// ---------------------------------------------------------------------------

/// Exact expected occupation of a stationary strategy, or an
/// [`CmdpError::InfiniteOccupation`] carrying the zero-leak witness.
///
/// Solves `(I - P_σᵀ) μ = δ_{x0}` restricted to the σ-reachable states by
/// dense elimination; off-reachable states have zero occupation. The
/// restriction is nonsingular whenever the classifier reports finite.
pub fn occupation_of_stationary(
    model: &FiniteMdpModel,
    sigma: &StationaryStrategy,
) -> Result<OccupationMeasure> {
    let mut init = vec![0.0; model.num_states()];
    init[model.initial_state()] = 1.0;
    occupation_of_stationary_from(model, sigma, &init)
}

pub(crate) fn occupation_of_stationary_from(
    model: &FiniteMdpModel,
    sigma: &StationaryStrategy,
    init: &[f64],
) -> Result<OccupationMeasure> {
    match classify_finiteness_from(model, sigma, init) {
        FinitenessReport::Infinite { witness } => Err(CmdpError::InfiniteOccupation {
            witness_states: witness
                .iter()
                .map(|&x| model.state_name(x).to_string())
                .collect(),
        }),
        FinitenessReport::Finite { .. } => {
            let reach_mask = reachable_from(model, sigma, init);
            let reach: Vec<usize> = (0..model.num_states())
                .filter(|&x| reach_mask[x])
                .collect();
            let k = reach.len();
            // A[i][j] = δ_ij - P_σ(reach[i] | reach[j]): transposed one-step kernel.
            let mut a_mat = vec![vec![0.0; k]; k];
            for (j, &xj) in reach.iter().enumerate() {
                a_mat[j][j] += 1.0;
                for (act, &sa) in sigma.row(xj).iter().enumerate() {
                    if sa == 0.0 {
                        continue;
                    }
                    for (y, p) in model.successors(xj, act) {
                        if let Ok(i) = reach.binary_search(&y) {
                            a_mat[i][j] -= sa * p;
                        }
                    }
                }
            }
            let b: Vec<f64> = reach.iter().map(|&x| init[x]).collect();
            let mu_r = linalg::solve_dense(a_mat, b, Tolerances::default().singular)?;

            let mut m = OccupationMeasure::zeros(model);
            for (i, &x) in reach.iter().enumerate() {
                // Rounding can push an exact zero marginally negative.
                let mu = if mu_r[i] < 0.0 {
                    debug_assert!(mu_r[i] > -1e-9, "marginal {} at state {x}", mu_r[i]);
                    0.0
                } else {
                    mu_r[i]
                };
                for (a, &sa) in sigma.row(x).iter().enumerate() {
                    m.set(x, a, mu * sa);
                }
            }
            Ok(m)
        }
    }
}

/// Maximum absolute violation of the flow equation by `m`.
pub fn flow_residual(model: &FiniteMdpModel, m: &OccupationMeasure) -> f64 {
    let n = model.num_states();
    let mut inflow = vec![0.0; n];
    for (y, a, v) in m.iter_pairs() {
        if v == 0.0 {
            continue;
        }
        for (x, p) in model.successors(y, a) {
            inflow[x] += p * v;
        }
    }
    let mut worst = 0.0f64;
    for x in 0..n {
        let delta = if x == model.initial_state() { 1.0 } else { 0.0 };
        worst = worst.max((m.marginal(x) - delta - inflow[x]).abs());
    }
    worst
}

// ---------------------------------------------------------------------------
// Disintegration and minimality
// ---------------------------------------------------------------------------

/// Disintegrates an occupation measure into the stationary strategy that
/// generates it: `σ(a|x) = M(x,a)/μ(x)` wherever the marginal exceeds the
/// support tolerance, and the `default` selector's action elsewhere. The
/// off-support rows never influence the measure of the induced strategy, so
/// any deterministic tie-break is sound; the lowest-index default keeps
/// results reproducible.
pub fn induced_strategy(
    model: &FiniteMdpModel,
    m: &OccupationMeasure,
    default: &DeterministicStrategy,
    tol: &Tolerances,
) -> StationaryStrategy {
    let rows: Vec<Vec<f64>> = (0..model.num_states())
        .map(|x| {
            let mu = m.marginal(x);
            let mut row = vec![0.0; model.num_actions(x)];
            if mu > tol.support {
                for (a, slot) in row.iter_mut().enumerate() {
                    *slot = m.get(x, a) / mu;
                }
            } else {
                row[default.action(x)] = 1.0;
            }
            row
        })
        .collect();
    StationaryStrategy::new(model, rows).expect("disintegrated rows are normalized by construction")
}

/// Replaces a flow-feasible measure by the true occupation measure of its
/// induced strategy, removing any excess circulation the flow equation
/// alone cannot see. The result is set-wise minimal among flow solutions
/// sharing the strategy: never larger componentwise, so never costlier.
///
/// Fails with [`CmdpError::NotFlowFeasible`] when the input's residual
/// exceeds the flow tolerance and [`CmdpError::RepairFailed`] in the
/// (structurally impossible for exactly-balanced inputs) case that the
/// induced strategy has infinite occupation.
pub fn minimality_repair(
    model: &FiniteMdpModel,
    m: &OccupationMeasure,
    tol: &Tolerances,
) -> Result<OccupationMeasure> {
    let residual = flow_residual(model, m);
    if residual > tol.flow {
        return Err(CmdpError::NotFlowFeasible(residual));
    }
    let sigma = induced_strategy(model, m, &DeterministicStrategy::lowest(model), tol);
    occupation_of_stationary(model, &sigma).map_err(|e| match e {
        CmdpError::InfiniteOccupation { .. } => CmdpError::RepairFailed,
        other => other,
    })
}

// ---------------------------------------------------------------------------
// Value functions
// ---------------------------------------------------------------------------

/// Expected total of an arbitrary nonnegative stage cost `f(x,a)` under a
/// stationary strategy, as a function of the start state: the unique
/// solution of `v = f_σ + P_σ v` on the σ-reachable states (zero elsewhere).
/// Uniqueness holds because the reachable restriction of `P_σ` has spectral
/// radius below 1 whenever the occupation is finite; infinite occupation is
/// reported as an error instead.
pub fn evaluate_value(
    model: &FiniteMdpModel,
    sigma: &StationaryStrategy,
    f: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if f.len() != model.num_states()
        || f.iter()
            .enumerate()
            .any(|(x, row)| row.len() != model.num_actions(x))
    {
        return Err(CmdpError::ShapeMismatch(
            "stage-cost table does not match the model's state-action pairs".into(),
        ));
    }
    match classify_finiteness(model, sigma) {
        FinitenessReport::Infinite { witness } => Err(CmdpError::InfiniteOccupation {
            witness_states: witness
                .iter()
                .map(|&x| model.state_name(x).to_string())
                .collect(),
        }),
        FinitenessReport::Finite { .. } => {
            let mut init = vec![0.0; model.num_states()];
            init[model.initial_state()] = 1.0;
            let reach_mask = reachable_from(model, sigma, &init);
            let reach: Vec<usize> = (0..model.num_states())
                .filter(|&x| reach_mask[x])
                .collect();
            let k = reach.len();
            // (I - P_σ) v = f_σ on the reachable restriction.
            let mut a_mat = vec![vec![0.0; k]; k];
            let mut b = vec![0.0; k];
            for (i, &x) in reach.iter().enumerate() {
                a_mat[i][i] += 1.0;
                for (act, &sa) in sigma.row(x).iter().enumerate() {
                    if sa == 0.0 {
                        continue;
                    }
                    b[i] += sa * f[x][act];
                    for (y, p) in model.successors(x, act) {
                        if let Ok(j) = reach.binary_search(&y) {
                            a_mat[i][j] -= sa * p;
                        }
                    }
                }
            }
            let v_r = linalg::solve_dense(a_mat, b, Tolerances::default().singular)?;
            let mut v = vec![0.0; model.num_states()];
            for (i, &x) in reach.iter().enumerate() {
                v[x] = v_r[i];
            }
            Ok(v)
        }
    }
}

// ---------------------------------------------------------------------------
// Eventually-stationary strategies and mixtures
// ---------------------------------------------------------------------------

/// Exact occupation of an eventually-stationary Markov strategy: the head
/// epochs accumulate `ν_n(x) · σ_n(a|x)` by forward recursion, and the
/// remaining tail is the stationary flow solution started from the residual
/// law `ν_{H+1}`. An empty head therefore reproduces
/// [`occupation_of_stationary`] through the identical code path.
pub fn occupation_of_markov(model: &FiniteMdpModel, mk: &MarkovStrategy) -> Result<OccupationMeasure> {
    let mut nu = vec![0.0; model.num_states()];
    nu[model.initial_state()] = 1.0;
    let mut m = OccupationMeasure::zeros(model);
    for sigma_n in &mk.head {
        for x in 0..model.num_states() {
            if nu[x] == 0.0 {
                continue;
            }
            for (a, &sa) in sigma_n.row(x).iter().enumerate() {
                if sa != 0.0 {
                    m.add(x, a, nu[x] * sa);
                }
            }
        }
        nu = push_forward(model, sigma_n, &nu);
    }
    let tail = occupation_of_stationary_from(model, &mk.tail, &nu)?;
    for (x, a, v) in tail.iter_pairs() {
        if v != 0.0 {
            m.add(x, a, v);
        }
    }
    Ok(m)
}

/// Occupation of a mixture: the weighted sum of its components' occupations
/// (the mixture draws one component at time zero, so expectations add).
pub fn occupation_of_mixed(model: &FiniteMdpModel, mix: &MixedStrategy) -> Result<OccupationMeasure> {
    let mut m = OccupationMeasure::zeros(model);
    for (w, phi) in mix.iter() {
        let part = occupation_of_stationary(model, &as_stationary(model, phi))?;
        if w == 0.0 {
            continue;
        }
        for (x, a, v) in part.iter_pairs() {
            if v != 0.0 {
                m.add(x, a, w * v);
            }
        }
    }
    Ok(m)
}

/// Occupation of any supported strategy class.
pub fn occupation_of_any(model: &FiniteMdpModel, strategy: &AnyStrategy) -> Result<OccupationMeasure> {
    match strategy {
        AnyStrategy::Deterministic(phi) => {
            occupation_of_stationary(model, &as_stationary(model, phi))
        }
        AnyStrategy::Stationary(sigma) => occupation_of_stationary(model, sigma),
        AnyStrategy::Markov(mk) => occupation_of_markov(model, mk),
        AnyStrategy::Mixed(mix) => occupation_of_mixed(model, mix),
    }
}

/// Rewrites a mixture of selectors as one Markov strategy with the same
/// step-wise state-action marginals (and hence, once the components have
/// essentially died out by epoch `H`, the same occupation measure).
///
/// At epoch `n` the kernel weights each component by its probability of
/// being at `x` alive: `σ_n(a|x) ∝ Σ_l α_l w_{l,n}(x) [φ_l(x) = a]` with
/// `w_{l,1} = δ_{x0}` and `w_{l,n+1} = w_{l,n} P_{φ_l}`. States no component
/// can occupy get a Dirac at the lowest-indexed action. The tail reuses the
/// epoch-`H` kernel.
pub fn markovize_mixture(
    model: &FiniteMdpModel,
    mix: &MixedStrategy,
    horizon: usize,
) -> Result<MarkovStrategy> {
    if horizon == 0 {
        return Err(CmdpError::InvalidArgument(
            "markovization horizon must be at least 1".into(),
        ));
    }
    for (_, phi) in mix.iter() {
        let sigma = as_stationary(model, phi);
        if let FinitenessReport::Infinite { witness } = classify_finiteness(model, &sigma) {
            return Err(CmdpError::InfiniteOccupation {
                witness_states: witness
                    .iter()
                    .map(|&x| model.state_name(x).to_string())
                    .collect(),
            });
        }
    }

    let n_states = model.num_states();
    let mut w: Vec<Vec<f64>> = (0..mix.len())
        .map(|_| {
            let mut v = vec![0.0; n_states];
            v[model.initial_state()] = 1.0;
            v
        })
        .collect();

    let mut head = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let rows: Vec<Vec<f64>> = (0..n_states)
            .map(|x| {
                let mut row = vec![0.0; model.num_actions(x)];
                let mut denom = 0.0;
                for (l, (alpha, phi)) in mix.iter().enumerate() {
                    let mass = alpha * w[l][x];
                    row[phi.action(x)] += mass;
                    denom += mass;
                }
                if denom > 0.0 {
                    for p in row.iter_mut() {
                        *p /= denom;
                    }
                } else {
                    row.fill(0.0);
                    row[0] = 1.0;
                }
                row
            })
            .collect();
        head.push(StationaryStrategy::new(model, rows).expect("kernel rows normalized"));

        for (l, (_, phi)) in mix.iter().enumerate() {
            w[l] = push_forward(model, &as_stationary(model, phi), &w[l]);
        }
    }

    let tail = head.last().expect("horizon >= 1").clone();
    Ok(MarkovStrategy { head, tail })
}

// ---------------------------------------------------------------------------
// Cost integrals
// ---------------------------------------------------------------------------

/// Integrates every cost table against the measure:
/// `R_j = Σ_{x,a} r_j(x,a) · M(x,a)`. Linear (indeed affine) in `M`.
pub fn cost_vector(model: &FiniteMdpModel, m: &OccupationMeasure) -> ObjectiveVector {
    let mut r = vec![0.0; model.num_costs()];
    for (x, a, v) in m.iter_pairs() {
        if v == 0.0 {
            continue;
        }
        for (j, slot) in r.iter_mut().enumerate() {
            *slot += model.cost(j, x, a) * v;
        }
    }
    ObjectiveVector(r)
}

/// Expected total costs of an arbitrary strategy (via its occupation).
pub fn cost_of_strategy(model: &FiniteMdpModel, strategy: &AnyStrategy) -> Result<ObjectiveVector> {
    Ok(cost_vector(model, &occupation_of_any(model, strategy)?))
}
