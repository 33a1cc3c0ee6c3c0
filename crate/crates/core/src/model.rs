//! Model data structures: finite substochastic decision models, constraint
//! bundles, and the four strategy classes the solver manipulates.
//!
//! A model is a finite state set `X`, a nonempty finite action set `A(x)` per
//! state, a substochastic kernel `p(y|x,a)` with row sums at most 1, and
//! `J+1` nonnegative cost tables `r_j(x,a)` (index 0 is the objective). The
//! cemetery is implicit: each row's deficit `1 - Σ_y p(y|x,a)` is the
//! probability of moving to a costless absorbing state, after which nothing
//! accrues. Deficits within `1e-12` of zero are canonicalized to exactly
//! zero so structural zero-leak analysis is exact rather than tolerance-based.

use crate::error::{CmdpError, Result};
use crate::tol::Tolerances;

// ---------------------------------------------------------------------------
// Raw model data
// ---------------------------------------------------------------------------

/// One kernel row as read from a model file: `p(·| from, action)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionRow {
    pub from: String,
    pub action: String,
    /// Target states with probabilities; states not listed get probability 0.
    pub to: Vec<(String, f64)>,
}

/// One named cost table; entries default to 0 where unspecified.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable {
    pub name: String,
    /// `(state, action, value)` triples.
    pub entries: Vec<(String, String, f64)>,
}

/// Unvalidated model data, mirroring the on-disk format. Everything is
/// referenced by name; [`validate_model`] resolves names to indices and
/// checks every invariant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelData {
    pub states: Vec<String>,
    /// Action names per state, parallel to `states`.
    pub actions: Vec<Vec<String>>,
    pub initial: String,
    pub transitions: Vec<TransitionRow>,
    pub costs: Vec<CostTable>,
    /// Name of the cost table to minimize (`r_0`).
    pub objective: String,
    /// `(cost name, bound)` pairs defining `E[r_j] ≤ d_j`.
    pub constraints: Vec<(String, f64)>,
}

// ---------------------------------------------------------------------------
// Validated model
// ---------------------------------------------------------------------------

/// A validated finite decision model with implicit cemetery.
///
/// States and actions are indexed densely; names are retained for reporting.
/// Cost tables are ordered objective-first, then constraint costs in file
/// order, so `cost table j` always matches `bound j` of the enclosing
/// [`ConstrainedProblem`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMdpModel {
    state_names: Vec<String>,
    action_names: Vec<Vec<String>>,
    /// `kernel[x][a][y] = p(y|x,a)`, dense.
    kernel: Vec<Vec<Vec<f64>>>,
    /// Cemetery mass per row, canonicalized to exactly 0 when the row sum is
    /// within tolerance of 1.
    absorb: Vec<Vec<f64>>,
    /// `costs[j][x][a]`, `j = 0` is the objective.
    costs: Vec<Vec<Vec<f64>>>,
    cost_names: Vec<String>,
    initial: usize,
}

impl FiniteMdpModel {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self, x: usize) -> usize {
        self.action_names[x].len()
    }

    /// Number of cost tables, `J + 1`.
    pub fn num_costs(&self) -> usize {
        self.costs.len()
    }

    pub fn initial_state(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, x: usize) -> &str {
        &self.state_names[x]
    }

    pub fn action_name(&self, x: usize, a: usize) -> &str {
        &self.action_names[x][a]
    }

    pub fn cost_name(&self, j: usize) -> &str {
        &self.cost_names[j]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn action_index(&self, x: usize, name: &str) -> Option<usize> {
        self.action_names[x].iter().position(|a| a == name)
    }

    /// Dense transition row `p(·|x,a)` over states; the cemetery mass is
    /// carried separately by [`FiniteMdpModel::absorb`].
    pub fn transition(&self, x: usize, a: usize) -> &[f64] {
        &self.kernel[x][a]
    }

    /// Probability of dropping to the cemetery from `(x, a)`.
    pub fn absorb(&self, x: usize, a: usize) -> f64 {
        self.absorb[x][a]
    }

    pub fn cost(&self, j: usize, x: usize, a: usize) -> f64 {
        self.costs[j][x][a]
    }

    /// Iterator over `(y, p(y|x,a))` with strictly positive probability.
    pub fn successors(&self, x: usize, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.kernel[x][a]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(y, &p)| (y, p))
    }

    /// Total number of state-action pairs, `Σ_x |A(x)|`.
    pub fn num_pairs(&self) -> usize {
        self.action_names.iter().map(Vec::len).sum()
    }

    /// The same model with its cost tables re-selected: table `k` of the
    /// result is table `indices[k]` of `self`. Used to re-enumerate costs
    /// for the feasibility search (the first constraint cost becomes the
    /// objective and the original objective is dropped).
    pub fn select_costs(&self, indices: &[usize]) -> Result<FiniteMdpModel> {
        if indices.is_empty() {
            return Err(CmdpError::InvalidArgument(
                "a model needs at least one cost table".into(),
            ));
        }
        for &j in indices {
            if j >= self.num_costs() {
                return Err(CmdpError::InvalidArgument(format!(
                    "cost index {j} out of range ({} tables)",
                    self.num_costs()
                )));
            }
        }
        let mut out = self.clone();
        out.costs = indices.iter().map(|&j| self.costs[j].clone()).collect();
        out.cost_names = indices
            .iter()
            .map(|&j| self.cost_names[j].clone())
            .collect();
        Ok(out)
    }
}

/// A model together with the constraint bounds `d_1, …, d_J`. The model's
/// cost tables are `r_0` (objective) followed by the J constraint costs in
/// the same order as `bounds`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedProblem {
    pub model: FiniteMdpModel,
    pub bounds: Vec<f64>,
}

impl ConstrainedProblem {
    pub fn new(model: FiniteMdpModel, bounds: Vec<f64>) -> Result<Self> {
        if model.num_costs() != bounds.len() + 1 {
            return Err(CmdpError::InvalidModel(format!(
                "{} cost tables do not match {} constraint bounds (need J+1 tables)",
                model.num_costs(),
                bounds.len()
            )));
        }
        Ok(ConstrainedProblem { model, bounds })
    }

    /// Number of inequality constraints `J`.
    pub fn num_constraints(&self) -> usize {
        self.bounds.len()
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

fn check_name(kind: &str, name: &str) -> Result<()> {
    if name.is_empty() || name.contains('/') || name.chars().any(char::is_control) {
        return Err(CmdpError::InvalidModel(format!(
            "{kind} name {name:?} must be nonempty, printable, and free of '/'"
        )));
    }
    Ok(())
}

/// Validates raw model data and assembles a [`ConstrainedProblem`].
///
/// Checks performed, in order: name hygiene and uniqueness, nonempty action
/// sets, reference resolution, kernel nonnegativity (entries in
/// `[-1e-15, 0)` are clamped to 0), row sums at most `1 + 1e-12`, cost
/// nonnegativity and finiteness, and objective/constraint resolution.
/// Unreferenced cost tables are dropped; a table referenced several times is
/// duplicated internally so table `j` always aligns with bound `j`.
pub fn validate_model(data: &ModelData) -> Result<ConstrainedProblem> {
    let tol = Tolerances::default();
    let n = data.states.len();
    if n == 0 {
        return Err(CmdpError::InvalidModel("model has no states".into()));
    }
    for s in &data.states {
        check_name("state", s)?;
    }
    for (i, s) in data.states.iter().enumerate() {
        if data.states[..i].contains(s) {
            return Err(CmdpError::InvalidModel(format!("duplicate state '{s}'")));
        }
    }
    if data.actions.len() != n {
        return Err(CmdpError::InvalidModel(format!(
            "{} action lists for {} states",
            data.actions.len(),
            n
        )));
    }
    for (x, acts) in data.actions.iter().enumerate() {
        if acts.is_empty() {
            return Err(CmdpError::EmptyActionSet(data.states[x].clone()));
        }
        for a in acts {
            check_name("action", a)?;
        }
        for (i, a) in acts.iter().enumerate() {
            if acts[..i].contains(a) {
                return Err(CmdpError::InvalidModel(format!(
                    "duplicate action '{a}' at state '{}'",
                    data.states[x]
                )));
            }
        }
    }

    let state_index = |name: &str| -> Result<usize> {
        data.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| CmdpError::UnknownStateReference(name.to_string()))
    };
    let action_index = |x: usize, name: &str| -> Result<usize> {
        data.actions[x]
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| CmdpError::UnknownActionReference {
                state: data.states[x].clone(),
                action: name.to_string(),
            })
    };

    let initial = state_index(&data.initial)?;

    // Kernel: rows default to full absorption; each listed row fills one (x, a).
    let mut kernel: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|x| vec![vec![0.0; n]; data.actions[x].len()])
        .collect();
    let mut row_seen: Vec<Vec<bool>> = (0..n)
        .map(|x| vec![false; data.actions[x].len()])
        .collect();
    for row in &data.transitions {
        let x = state_index(&row.from)?;
        let a = action_index(x, &row.action)?;
        if row_seen[x][a] {
            return Err(CmdpError::InvalidModel(format!(
                "duplicate transition row for ({}, {})",
                row.from, row.action
            )));
        }
        row_seen[x][a] = true;
        let mut tgt_seen = vec![false; n];
        for (to, p) in &row.to {
            let y = state_index(to)?;
            if tgt_seen[y] {
                return Err(CmdpError::InvalidModel(format!(
                    "duplicate target '{to}' in transition row ({}, {})",
                    row.from, row.action
                )));
            }
            tgt_seen[y] = true;
            if !p.is_finite() {
                return Err(CmdpError::InvalidModel(format!(
                    "non-finite probability at ({}, {}) -> {to}",
                    row.from, row.action
                )));
            }
            let p = if *p < 0.0 && *p >= -tol.entry_clamp {
                0.0
            } else {
                *p
            };
            if p < 0.0 {
                return Err(CmdpError::InvalidModel(format!(
                    "negative probability {p} at ({}, {}) -> {to}",
                    row.from, row.action
                )));
            }
            kernel[x][a][y] = p;
        }
    }

    // Row sums and cemetery canonicalization.
    let mut absorb: Vec<Vec<f64>> = (0..n)
        .map(|x| vec![1.0; data.actions[x].len()])
        .collect();
    for x in 0..n {
        for a in 0..data.actions[x].len() {
            let sum: f64 = kernel[x][a].iter().sum();
            if sum > 1.0 + tol.row_sum {
                return Err(CmdpError::RowSumExceedsOne {
                    state: data.states[x].clone(),
                    action: data.actions[x][a].clone(),
                    sum,
                });
            }
            let deficit = 1.0 - sum;
            absorb[x][a] = if deficit.abs() <= tol.row_sum {
                0.0
            } else {
                deficit
            };
        }
    }

    // Cost tables: resolve names, check sign and finiteness.
    for t in &data.costs {
        check_name("cost", &t.name)?;
    }
    for (i, t) in data.costs.iter().enumerate() {
        if data.costs[..i].iter().any(|u| u.name == t.name) {
            return Err(CmdpError::InvalidModel(format!(
                "duplicate cost table '{}'",
                t.name
            )));
        }
    }
    let resolve_table = |name: &str| -> Result<Vec<Vec<f64>>> {
        let table = data
            .costs
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| CmdpError::InvalidModel(format!("unknown cost table '{name}'")))?;
        let mut dense: Vec<Vec<f64>> = (0..n)
            .map(|x| vec![0.0; data.actions[x].len()])
            .collect();
        for (state, action, value) in &table.entries {
            let x = state_index(state)?;
            let a = action_index(x, action)?;
            if !value.is_finite() {
                return Err(CmdpError::InvalidModel(format!(
                    "non-finite cost '{name}' at ({state}, {action})"
                )));
            }
            if *value < 0.0 {
                return Err(CmdpError::NegativeCost {
                    cost: name.to_string(),
                    state: state.clone(),
                    action: action.clone(),
                    value: *value,
                });
            }
            dense[x][a] = *value;
        }
        Ok(dense)
    };

    let mut costs = vec![resolve_table(&data.objective)?];
    let mut cost_names = vec![data.objective.clone()];
    let mut bounds = Vec::with_capacity(data.constraints.len());
    for (name, bound) in &data.constraints {
        if !bound.is_finite() {
            return Err(CmdpError::InvalidModel(format!(
                "non-finite bound for constraint '{name}'"
            )));
        }
        costs.push(resolve_table(name)?);
        cost_names.push(name.clone());
        bounds.push(*bound);
    }

    let model = FiniteMdpModel {
        state_names: data.states.clone(),
        action_names: data.actions.clone(),
        kernel,
        absorb,
        costs,
        cost_names,
        initial,
    };
    ConstrainedProblem::new(model, bounds)
}

// ---------------------------------------------------------------------------
// Stopping-problem construction
// ---------------------------------------------------------------------------

/// Reserved action name introduced by [`make_stopping_mdp`].
pub const STOP_ACTION: &str = "STOP";

/// Extends `base` into an optimal-stopping model: every state gains a `STOP`
/// action that moves to the cemetery with probability 1 and charges
/// `stop_costs[x] ≥ 0` on the objective table (constraint costs at `STOP`
/// are 0). The base kernel and costs are preserved exactly on all original
/// actions.
pub fn make_stopping_mdp(base: &FiniteMdpModel, stop_costs: &[f64]) -> Result<FiniteMdpModel> {
    let n = base.num_states();
    if stop_costs.len() != n {
        return Err(CmdpError::ShapeMismatch(format!(
            "{} stop costs for {} states",
            stop_costs.len(),
            n
        )));
    }
    for x in 0..n {
        if base.action_index(x, STOP_ACTION).is_some() {
            return Err(CmdpError::ActionNameClash(STOP_ACTION.to_string()));
        }
        if !stop_costs[x].is_finite() || stop_costs[x] < 0.0 {
            return Err(CmdpError::NegativeCost {
                cost: base.cost_name(0).to_string(),
                state: base.state_name(x).to_string(),
                action: STOP_ACTION.to_string(),
                value: stop_costs[x],
            });
        }
    }

    let mut out = base.clone();
    for x in 0..n {
        out.action_names[x].push(STOP_ACTION.to_string());
        out.kernel[x].push(vec![0.0; n]);
        out.absorb[x].push(1.0);
        for (j, table) in out.costs.iter_mut().enumerate() {
            table[x].push(if j == 0 { stop_costs[x] } else { 0.0 });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// A selector: one action per state, applied at every decision epoch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    choices: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(model: &FiniteMdpModel, choices: Vec<usize>) -> Result<Self> {
        if choices.len() != model.num_states() {
            return Err(CmdpError::ShapeMismatch(format!(
                "{} choices for {} states",
                choices.len(),
                model.num_states()
            )));
        }
        for (x, &a) in choices.iter().enumerate() {
            if a >= model.num_actions(x) {
                return Err(CmdpError::InvalidArgument(format!(
                    "action index {a} out of range at state '{}'",
                    model.state_name(x)
                )));
            }
        }
        Ok(DeterministicStrategy { choices })
    }

    /// Selector choosing the lowest-indexed action everywhere; the canonical
    /// default wherever an arbitrary tie-break is needed.
    pub fn lowest(model: &FiniteMdpModel) -> Self {
        DeterministicStrategy {
            choices: vec![0; model.num_states()],
        }
    }

    pub fn action(&self, x: usize) -> usize {
        self.choices[x]
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }
}

/// A stationary randomized strategy: one distribution over `A(x)` per state.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryStrategy {
    rows: Vec<Vec<f64>>,
}

impl StationaryStrategy {
    /// Validates shape, nonnegativity, and row sums within `1e-12` of 1,
    /// then normalizes each row to sum exactly to 1.
    pub fn new(model: &FiniteMdpModel, rows: Vec<Vec<f64>>) -> Result<Self> {
        let tol = Tolerances::default();
        if rows.len() != model.num_states() {
            return Err(CmdpError::ShapeMismatch(format!(
                "{} strategy rows for {} states",
                rows.len(),
                model.num_states()
            )));
        }
        let mut rows = rows;
        for (x, row) in rows.iter_mut().enumerate() {
            if row.len() != model.num_actions(x) {
                return Err(CmdpError::ShapeMismatch(format!(
                    "{} probabilities for {} actions at state '{}'",
                    row.len(),
                    model.num_actions(x),
                    model.state_name(x)
                )));
            }
            let mut sum = 0.0;
            for p in row.iter() {
                if !p.is_finite() || *p < 0.0 {
                    return Err(CmdpError::InvalidArgument(format!(
                        "strategy probability {p} at state '{}' is not in [0, 1]",
                        model.state_name(x)
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > tol.row_sum {
                return Err(CmdpError::InvalidArgument(format!(
                    "strategy row at state '{}' sums to {sum}, not 1",
                    model.state_name(x)
                )));
            }
            for p in row.iter_mut() {
                *p /= sum;
            }
        }
        Ok(StationaryStrategy { rows })
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    /// Actions with strictly positive probability at `x`.
    pub fn support(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[x]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, _)| a)
    }
}

/// Lifts a selector to its Dirac stationary strategy.
pub fn as_stationary(model: &FiniteMdpModel, phi: &DeterministicStrategy) -> StationaryStrategy {
    let rows = (0..model.num_states())
        .map(|x| {
            let mut row = vec![0.0; model.num_actions(x)];
            row[phi.action(x)] = 1.0;
            row
        })
        .collect();
    StationaryStrategy { rows }
}

/// An eventually-stationary Markov strategy: kernel `head[n-1]` governs
/// decision epoch `n = 1, …, H`, and `tail` governs every epoch after `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovStrategy {
    pub head: Vec<StationaryStrategy>,
    pub tail: StationaryStrategy,
}

impl MarkovStrategy {
    /// Strategy kernel in effect at decision epoch `n ≥ 1`.
    pub fn at_epoch(&self, n: usize) -> &StationaryStrategy {
        debug_assert!(n >= 1);
        self.head.get(n - 1).unwrap_or(&self.tail)
    }
}

/// A convex mixture of selectors: one component is drawn once at time zero
/// and followed forever.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategy {
    weights: Vec<f64>,
    components: Vec<DeterministicStrategy>,
}

impl MixedStrategy {
    /// Validates weights (nonnegative, summing to 1 within `1e-12`) and
    /// normalizes them exactly. Components may repeat.
    pub fn new(weights: Vec<f64>, components: Vec<DeterministicStrategy>) -> Result<Self> {
        let tol = Tolerances::default();
        if weights.len() != components.len() || weights.is_empty() {
            return Err(CmdpError::ShapeMismatch(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        let mut sum = 0.0;
        for w in &weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(CmdpError::InvalidArgument(format!(
                    "mixture weight {w} is not in [0, 1]"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > tol.row_sum {
            return Err(CmdpError::InvalidArgument(format!(
                "mixture weights sum to {sum}, not 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(MixedStrategy {
            weights,
            components,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, l: usize) -> f64 {
        self.weights[l]
    }

    pub fn component(&self, l: usize) -> &DeterministicStrategy {
        &self.components[l]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DeterministicStrategy)> {
        self.weights
            .iter()
            .copied()
            .zip(self.components.iter())
    }
}

/// Any strategy the evaluator and simulator accept.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyStrategy {
    Deterministic(DeterministicStrategy),
    Stationary(StationaryStrategy),
    Markov(MarkovStrategy),
    Mixed(MixedStrategy),
}

impl From<DeterministicStrategy> for AnyStrategy {
    fn from(s: DeterministicStrategy) -> Self {
        AnyStrategy::Deterministic(s)
    }
}
impl From<StationaryStrategy> for AnyStrategy {
    fn from(s: StationaryStrategy) -> Self {
        AnyStrategy::Stationary(s)
    }
}
impl From<MarkovStrategy> for AnyStrategy {
    fn from(s: MarkovStrategy) -> Self {
        AnyStrategy::Markov(s)
    }
}
impl From<MixedStrategy> for AnyStrategy {
    fn from(s: MixedStrategy) -> Self {
        AnyStrategy::Mixed(s)
    }
}

// ---------------------------------------------------------------------------
// Test fixtures shared by the unit tests of several modules
// ---------------------------------------------------------------------------


#[cfg(test)]
mod tests {
    use super::fixtures;
    use super::*;

    #[test]
    fn validate_resolves_names_and_orders_costs() {
        let p = fixtures::twoact(0.5);
        let m = &p.model;
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.num_actions(0), 2);
        assert_eq!(m.num_costs(), 2);
        assert_eq!(m.cost_name(0), "objective");
        assert_eq!(m.cost_name(1), "budget");
        assert_eq!(m.cost(0, 0, 0), 0.0);
        assert_eq!(m.cost(0, 0, 1), 1.0);
        assert_eq!(m.cost(1, 0, 0), 1.0);
        assert_eq!(m.absorb(0, 0), 1.0);
        assert_eq!(p.bounds, vec![0.5]);
    }

    #[test]
    fn missing_transition_rows_absorb() {
        let p = fixtures::chain2();
        assert_eq!(p.model.absorb(1, 0), 1.0);
        assert_eq!(p.model.absorb(0, 0), 0.0);
        assert_eq!(p.model.transition(0, 0)[1], 1.0);
    }

    #[test]
    fn near_one_row_sum_canonicalizes_to_zero_deficit() {
        let mut data = ModelData {
            states: vec!["s0".into()],
            actions: vec![vec!["a".into()]],
            initial: "s0".into(),
            transitions: vec![TransitionRow {
                from: "s0".into(),
                action: "a".into(),
                to: vec![("s0".into(), 1.0 - 1e-13)],
            }],
            costs: vec![CostTable {
                name: "c".into(),
                entries: vec![],
            }],
            objective: "c".into(),
            constraints: vec![],
        };
        let p = validate_model(&data).unwrap();
        assert_eq!(p.model.absorb(0, 0), 0.0);

        data.transitions[0].to[0].1 = 1.0 + 5e-13;
        assert_eq!(validate_model(&data).unwrap().model.absorb(0, 0), 0.0);

        data.transitions[0].to[0].1 = 1.0 + 1e-9;
        match validate_model(&data) {
            Err(CmdpError::RowSumExceedsOne { sum, .. }) => assert!(sum > 1.0),
            other => panic!("expected RowSumExceedsOne, got {other:?}"),
        }
    }

    #[test]
    fn tiny_negative_probabilities_clamp_to_zero() {
        let data = ModelData {
            states: vec!["s0".into(), "s1".into()],
            actions: vec![vec!["a".into()], vec!["a".into()]],
            initial: "s0".into(),
            transitions: vec![TransitionRow {
                from: "s0".into(),
                action: "a".into(),
                to: vec![("s1".into(), -1e-16), ("s0".into(), 0.25)],
            }],
            costs: vec![CostTable {
                name: "c".into(),
                entries: vec![],
            }],
            objective: "c".into(),
            constraints: vec![],
        };
        let p = validate_model(&data).unwrap();
        assert_eq!(p.model.transition(0, 0)[1], 0.0);

        let mut bad = data;
        bad.transitions[0].to[0].1 = -1e-3;
        assert!(matches!(
            validate_model(&bad),
            Err(CmdpError::InvalidModel(_))
        ));
    }

    #[test]
    fn rejects_bad_references_and_shapes() {
        let p = fixtures::twoact(0.5);
        let mut data = ModelData {
            states: vec!["s0".into()],
            actions: vec![vec!["a".into(), "b".into()]],
            initial: "nope".into(),
            transitions: vec![],
            costs: vec![
                CostTable {
                    name: "objective".into(),
                    entries: vec![],
                },
                CostTable {
                    name: "budget".into(),
                    entries: vec![],
                },
            ],
            objective: "objective".into(),
            constraints: vec![("budget".into(), 0.5)],
        };
        assert!(matches!(
            validate_model(&data),
            Err(CmdpError::UnknownStateReference(_))
        ));
        data.initial = "s0".into();
        data.costs[0].entries = vec![("s0".into(), "zzz".into(), 1.0)];
        assert!(matches!(
            validate_model(&data),
            Err(CmdpError::UnknownActionReference { .. })
        ));
        data.costs[0].entries = vec![("s0".into(), "a".into(), -2.0)];
        assert!(matches!(
            validate_model(&data),
            Err(CmdpError::NegativeCost { .. })
        ));
        // sanity: fixture itself is fine
        assert_eq!(p.model.num_pairs(), 2);
    }

    #[test]
    fn empty_action_set_is_rejected() {
        let data = ModelData {
            states: vec!["s0".into()],
            actions: vec![vec![]],
            initial: "s0".into(),
            transitions: vec![],
            costs: vec![CostTable {
                name: "c".into(),
                entries: vec![],
            }],
            objective: "c".into(),
            constraints: vec![],
        };
        assert!(matches!(
            validate_model(&data),
            Err(CmdpError::EmptyActionSet(_))
        ));
    }

    #[test]
    fn stopping_mdp_adds_absorbing_stop_rows() {
        let p = fixtures::stopping(0.5);
        let m = &p.model;
        assert_eq!(m.num_actions(0), 2);
        let stop = m.action_index(0, STOP_ACTION).unwrap();
        assert_eq!(m.absorb(0, stop), 1.0);
        assert!(m.transition(0, stop).iter().all(|&q| q == 0.0));
        assert_eq!(m.cost(0, 0, stop), 5.0);
        assert_eq!(m.cost(1, 0, stop), 0.0);
        // base rows untouched
        let go = m.action_index(0, "go").unwrap();
        assert_eq!(m.transition(0, go)[1], 1.0);
        assert_eq!(m.cost(1, 0, go), 1.0);
    }

    #[test]
    fn stopping_mdp_rejects_name_clash() {
        let p = fixtures::chain2();
        let clash = {
            let mut data = ModelData {
                states: vec!["s0".into()],
                actions: vec![vec![STOP_ACTION.into()]],
                initial: "s0".into(),
                transitions: vec![],
                costs: vec![CostTable {
                    name: "c".into(),
                    entries: vec![],
                }],
                objective: "c".into(),
                constraints: vec![],
            };
            data.actions[0][0] = STOP_ACTION.into();
            validate_model(&data).unwrap()
        };
        assert!(matches!(
            make_stopping_mdp(&clash.model, &[0.0]),
            Err(CmdpError::ActionNameClash(_))
        ));
        assert!(matches!(
            make_stopping_mdp(&p.model, &[1.0, -1.0]),
            Err(CmdpError::NegativeCost { .. })
        ));
    }

    #[test]
    fn as_stationary_is_dirac() {
        let p = fixtures::twoact(0.5);
        let phi = DeterministicStrategy::new(&p.model, vec![1]).unwrap();
        let sigma = as_stationary(&p.model, &phi);
        assert_eq!(sigma.row(0), &[0.0, 1.0]);
        assert_eq!(sigma.support(0).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn strategy_validation_rejects_bad_rows() {
        let p = fixtures::twoact(0.5);
        assert!(StationaryStrategy::new(&p.model, vec![vec![0.5, 0.6]]).is_err());
        assert!(StationaryStrategy::new(&p.model, vec![vec![0.5]]).is_err());
        assert!(StationaryStrategy::new(&p.model, vec![vec![-0.1, 1.1]]).is_err());
        let ok = StationaryStrategy::new(&p.model, vec![vec![0.25, 0.75]]).unwrap();
        assert!((ok.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);

        assert!(DeterministicStrategy::new(&p.model, vec![2]).is_err());
        assert!(DeterministicStrategy::new(&p.model, vec![0, 0]).is_err());
    }

    #[test]
    fn mixture_weights_normalize() {
        let p = fixtures::twoact(0.5);
        let a = DeterministicStrategy::new(&p.model, vec![0]).unwrap();
        let b = DeterministicStrategy::new(&p.model, vec![1]).unwrap();
        let mix = MixedStrategy::new(vec![0.5, 0.5], vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(mix.len(), 2);
        assert_eq!(mix.weight(0), 0.5);
        assert!(MixedStrategy::new(vec![0.4, 0.4], vec![a, b]).is_err());
    }

    #[test]
    fn markov_strategy_epochs() {
        let p = fixtures::twoact(0.5);
        let head = StationaryStrategy::new(&p.model, vec![vec![1.0, 0.0]]).unwrap();
        let tail = StationaryStrategy::new(&p.model, vec![vec![0.0, 1.0]]).unwrap();
        let mk = MarkovStrategy {
            head: vec![head.clone()],
            tail: tail.clone(),
        };
        assert_eq!(mk.at_epoch(1), &head);
        assert_eq!(mk.at_epoch(2), &tail);
        assert_eq!(mk.at_epoch(99), &tail);
    }
}
