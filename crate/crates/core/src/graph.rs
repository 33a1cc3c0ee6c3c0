//! Structural analysis of the support graph: reachability, greatest closed
//! zero-leak subsets, and maximal end components.
//!
//! Everything here is exact — decisions depend only on which kernel entries
//! are strictly positive and which cemetery deficits are exactly zero (the
//! validator canonicalizes near-zero deficits), never on magnitudes. This is
//! what lets finiteness classification agree with spectral criteria without
//! a tolerance race.

use petgraph::graph::{DiGraph, NodeIndex};

use crate::model::{FiniteMdpModel, StationaryStrategy};

/// A set of states together with, for each member state, the actions that
/// keep the process inside the set with probability 1 and zero cemetery
/// leak. `states` is sorted ascending and `actions[i]` lists the qualifying
/// actions of `states[i]`, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndComponent {
    pub states: Vec<usize>,
    pub actions: Vec<Vec<usize>>,
}

/// States reachable from the initial state through positive-probability
/// transitions. With a strategy, only its support actions are followed;
/// without, every action is.
pub fn reachable(model: &FiniteMdpModel, strategy: Option<&StationaryStrategy>) -> Vec<bool> {
    let n = model.num_states();
    let mut seen = vec![false; n];
    let mut stack = vec![model.initial_state()];
    seen[model.initial_state()] = true;
    while let Some(x) = stack.pop() {
        let actions: Vec<usize> = match strategy {
            Some(sigma) => sigma.support(x).collect(),
            None => (0..model.num_actions(x)).collect(),
        };
        for a in actions {
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

/// Greatest subset `C` of the marked states such that every support action
/// of `sigma` at every `x ∈ C` has zero cemetery leak and all its successors
/// inside `C`. Once the process enters such a set under `sigma` it never
/// leaves and never absorbs, so a nonempty result certifies an infinite
/// expected occupation. Returns the sorted member list (possibly empty).
///
/// Computed as a fixpoint: repeatedly delete states with a leaking or
/// escaping support action. Any closed zero-leak subset of the marked states
/// survives every deletion round, so the result is the union of them all.
pub fn closed_zero_leak(
    model: &FiniteMdpModel,
    sigma: &StationaryStrategy,
    within: &[bool],
) -> Vec<usize> {
    let n = model.num_states();
    let mut member: Vec<bool> = within.to_vec();
    debug_assert_eq!(member.len(), n);
    loop {
        let mut changed = false;
        for x in 0..n {
            if !member[x] {
                continue;
            }
            let escapes = sigma.support(x).any(|a| {
                model.absorb(x, a) != 0.0 || model.successors(x, a).any(|(y, _)| !member[y])
            });
            if escapes {
                member[x] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&x| member[x]).collect()
}

/// Maximal end components over the state-action pairs marked in `allowed`.
///
/// A pair additionally qualifies only if its cemetery leak is exactly zero.
/// The classic fixpoint over strongly connected components applies: compute
/// SCCs of the candidate transition graph, remove actions whose successors
/// leave their SCC, and repeat until stable. Components are returned sorted
/// by their smallest state.
pub fn maximal_end_components(model: &FiniteMdpModel, allowed: &[Vec<bool>]) -> Vec<EndComponent> {
    let n = model.num_states();
    let mut candidates: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            (0..model.num_actions(x))
                .filter(|&a| allowed[x][a] && model.absorb(x, a) == 0.0)
                .collect()
        })
        .collect();

    let mut comp_of = vec![usize::MAX; n];
    loop {
        let mut graph: DiGraph<(), ()> = DiGraph::new();
        let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
        for x in 0..n {
            for &a in &candidates[x] {
                for (y, _) in model.successors(x, a) {
                    graph.add_edge(nodes[x], nodes[y], ());
                }
            }
        }
        let sccs = petgraph::algo::tarjan_scc(&graph);
        for (id, scc) in sccs.iter().enumerate() {
            for node in scc {
                comp_of[node.index()] = id;
            }
        }
        let mut changed = false;
        for x in 0..n {
            let before = candidates[x].len();
            candidates[x].retain(|&a| {
                model
                    .successors(x, a)
                    .all(|(y, _)| comp_of[y] == comp_of[x])
            });
            changed |= candidates[x].len() != before;
        }
        if !changed {
            break;
        }
    }

    // Group surviving states by component; a state survives iff it kept an
    // action, which by the fixpoint stays inside its component.
    let mut by_comp: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for x in 0..n {
        if !candidates[x].is_empty() {
            by_comp.entry(comp_of[x]).or_default().push(x);
        }
    }
    let mut out: Vec<EndComponent> = by_comp
        .into_values()
        .map(|mut states| {
            states.sort_unstable();
            let actions = states.iter().map(|&x| candidates[x].clone()).collect();
            EndComponent { states, actions }
        })
        .collect();
    out.sort_by_key(|ec| ec.states[0]);
    out
}
