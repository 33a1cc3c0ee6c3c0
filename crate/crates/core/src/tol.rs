//! Numerical tolerances used across the solver, bundled so the command-line
//! `--tol` flag can scale every comparison consistently.
//!
//! Each field documents its default and what comparison it guards. The
//! defaults are deliberate: validation slack sits near machine epsilon,
//! flow/feasibility checks sit at `1e-9`, and cross-checks between two
//! independently computed quantities sit at `1e-8`.

/// Bundle of every tunable tolerance. Obtain defaults via [`Tolerances::default`]
/// and a uniformly scaled copy via [`Tolerances::scaled`].
#[derive(Clone, Debug)]
pub struct Tolerances {
    /// Transition row sums may exceed 1 by at most this much (default `1e-12`);
    /// any smaller deficit is canonicalized to an exactly-zero cemetery mass.
    pub row_sum: f64,
    /// Negative kernel entries no smaller than `-entry_clamp` are clamped to 0
    /// during validation (default `1e-15`).
    pub entry_clamp: f64,
    /// Maximum flow residual for an occupation measure to count as
    /// flow-feasible (default `1e-9`).
    pub flow: f64,
    /// Marginal mass below which a state is treated as unvisited when
    /// disintegrating an occupation measure into a strategy (default `1e-12`).
    pub support: f64,
    /// Sup-norm distance under which two enumerated vertices are duplicates
    /// (default `1e-8`).
    pub dedupe: f64,
    /// Simplex pivot magnitude threshold (default `1e-10`).
    pub pivot: f64,
    /// Pivot magnitude below which dense elimination reports a singular
    /// system (default `1e-12`).
    pub singular: f64,
    /// Sup-norm convergence threshold for value iteration (default `1e-10`).
    pub value_iter: f64,
    /// Agreement required between a mixture's objective and the LP optimum,
    /// and slack allowed on mixture constraint rows (default `1e-8`).
    pub mixture: f64,
    /// Internal slack granted to the mixture weight LP so solver noise cannot
    /// make an exactly-tight constraint infeasible (default `1e-9`).
    pub weight_slack: f64,
    /// Default randomization threshold for extreme-point tests (default `1e-9`).
    pub extreme: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            row_sum: 1e-12,
            entry_clamp: 1e-15,
            flow: 1e-9,
            support: 1e-12,
            dedupe: 1e-8,
            pivot: 1e-10,
            singular: 1e-12,
            value_iter: 1e-10,
            mixture: 1e-8,
            weight_slack: 1e-9,
            extreme: 1e-9,
        }
    }
}

impl Tolerances {
    /// Every default multiplied by `factor` (> 0). Used by the CLI `--tol` flag.
    pub fn scaled(factor: f64) -> Self {
        let d = Tolerances::default();
        Tolerances {
            row_sum: d.row_sum * factor,
            entry_clamp: d.entry_clamp * factor,
            flow: d.flow * factor,
            support: d.support * factor,
            dedupe: d.dedupe * factor,
            pivot: d.pivot * factor,
            singular: d.singular * factor,
            value_iter: d.value_iter * factor,
            mixture: d.mixture * factor,
            weight_slack: d.weight_slack * factor,
            extreme: d.extreme * factor,
        }
    }
}

/// Hard cap on simplex pivots before [`crate::CmdpError::IterationLimit`].
pub const SIMPLEX_ITERATION_CAP: u64 = 1_000_000;
/// Hard cap on value-iteration sweeps before [`crate::CmdpError::NonConvergent`].
pub const VALUE_ITERATION_CAP: u64 = 100_000;
/// Survival-probability cutoff and length cap for tail-mass diagnostics.
pub const TAIL_MASS_CUTOFF: f64 = 1e-15;
pub const TAIL_MASS_CAP: usize = 10_000;
/// Guard on `Π_x |A(x)|` before deterministic-strategy enumeration refuses.
pub const SELECTOR_ENUMERATION_LIMIT: u64 = 1_000_000;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_is_uniform() {
        let t = Tolerances::scaled(10.0);
        assert_eq!(t.flow, 1e-8);
        assert_eq!(t.pivot, 1e-9);
        assert_eq!(t.mixture, 1e-7);
        let one = Tolerances::scaled(1.0);
        assert_eq!(one.row_sum, Tolerances::default().row_sum);
    }
}
