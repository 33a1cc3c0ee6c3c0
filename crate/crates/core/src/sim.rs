//! Seeded Monte Carlo simulation of any strategy class, with reproducible
//! parallel aggregation and a z-score comparison against analytic
//! occupation measures.
//!
//! Reproducibility contract: trajectory `i` always consumes stream `i` of a
//! counter-based generator seeded with the user seed, and aggregation folds
//! fixed 1024-trajectory chunks in index order. Results are therefore
//! bit-identical for any thread count — the thread pool only decides who
//! computes a chunk, never what is summed in what order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CmdpError, Result};
use crate::model::{AnyStrategy, FiniteMdpModel};
use crate::occupancy::OccupationMeasure;

/// Trajectories per aggregation chunk; fixed so the summation tree does not
/// depend on the thread count.
const CHUNK: u64 = 1024;

/// Empirical estimates from `n` simulated trajectories.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub n: u64,
    pub seed: u64,
    pub step_cap: u64,
    /// Mean visit count per state-action pair.
    pub occupation_mean: Vec<Vec<f64>>,
    /// Standard error of each mean (sample standard deviation over `√n`).
    pub occupation_se: Vec<Vec<f64>>,
    /// Mean accumulated cost per table.
    pub cost_mean: Vec<f64>,
    pub cost_se: Vec<f64>,
    /// Histogram of absorption times (decision epochs survived) over the
    /// trajectories that absorbed within the cap.
    pub absorption_histogram: BTreeMap<u64, u64>,
    /// Trajectories cut off at `step_cap` before absorbing.
    pub capped: u64,
}

/// Per-chunk accumulator; merged in chunk-index order.
struct Partial {
    visit_sum: Vec<f64>,
    visit_sumsq: Vec<f64>,
    cost_sum: Vec<f64>,
    cost_sumsq: Vec<f64>,
    hist: BTreeMap<u64, u64>,
    capped: u64,
}

/// Simulates `n` trajectories of `strategy` from the initial state,
/// each truncated at `step_cap` decision epochs, and aggregates visit
/// counts, cost totals, and absorption times.
pub fn simulate(
    model: &FiniteMdpModel,
    strategy: &AnyStrategy,
    n: u64,
    seed: u64,
    step_cap: u64,
) -> SimulationReport {
    let offsets: Vec<usize> = {
        let mut off = vec![0usize];
        for x in 0..model.num_states() {
            off.push(off[x] + model.num_actions(x));
        }
        off
    };
    let pairs = offsets[model.num_states()];
    let jdim = model.num_costs();

    let chunks: u64 = n.div_ceil(CHUNK).max(if n == 0 { 0 } else { 1 });
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut part = Partial {
                visit_sum: vec![0.0; pairs],
                visit_sumsq: vec![0.0; pairs],
                cost_sum: vec![0.0; jdim],
                cost_sumsq: vec![0.0; jdim],
                hist: BTreeMap::new(),
                capped: 0,
            };
            let mut visits = vec![0.0f64; pairs];
            let mut costs = vec![0.0f64; jdim];
            for i in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                visits.fill(0.0);
                costs.fill(0.0);
                match run_trajectory(model, strategy, step_cap, &mut rng, &offsets, &mut visits, &mut costs)
                {
                    Some(steps) => *part.hist.entry(steps).or_insert(0) += 1,
                    None => part.capped += 1,
                }
                for k in 0..pairs {
                    part.visit_sum[k] += visits[k];
                    part.visit_sumsq[k] += visits[k] * visits[k];
                }
                for j in 0..jdim {
                    part.cost_sum[j] += costs[j];
                    part.cost_sumsq[j] += costs[j] * costs[j];
                }
            }
            part
        })
        .collect();

    let mut total = Partial {
        visit_sum: vec![0.0; pairs],
        visit_sumsq: vec![0.0; pairs],
        cost_sum: vec![0.0; jdim],
        cost_sumsq: vec![0.0; jdim],
        hist: BTreeMap::new(),
        capped: 0,
    };
    for part in partials {
        for k in 0..pairs {
            total.visit_sum[k] += part.visit_sum[k];
            total.visit_sumsq[k] += part.visit_sumsq[k];
        }
        for j in 0..jdim {
            total.cost_sum[j] += part.cost_sum[j];
            total.cost_sumsq[j] += part.cost_sumsq[j];
        }
        for (steps, count) in part.hist {
            *total.hist.entry(steps).or_insert(0) += count;
        }
        total.capped += part.capped;
    }

    let mean_se = |sum: f64, sumsq: f64| -> (f64, f64) {
        if n == 0 {
            return (0.0, 0.0);
        }
        let nf = n as f64;
        let mean = sum / nf;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (mean, (var / nf).sqrt())
    };

    let mut occupation_mean: Vec<Vec<f64>> = Vec::with_capacity(model.num_states());
    let mut occupation_se: Vec<Vec<f64>> = Vec::with_capacity(model.num_states());
    for x in 0..model.num_states() {
        let mut row_mean = Vec::with_capacity(model.num_actions(x));
        let mut row_se = Vec::with_capacity(model.num_actions(x));
        for a in 0..model.num_actions(x) {
            let k = offsets[x] + a;
            let (m, s) = mean_se(total.visit_sum[k], total.visit_sumsq[k]);
            row_mean.push(m);
            row_se.push(s);
        }
        occupation_mean.push(row_mean);
        occupation_se.push(row_se);
    }
    let (cost_mean, cost_se): (Vec<f64>, Vec<f64>) = (0..jdim)
        .map(|j| mean_se(total.cost_sum[j], total.cost_sumsq[j]))
        .unzip();

    SimulationReport {
        n,
        seed,
        step_cap,
        occupation_mean,
        occupation_se,
        cost_mean,
        cost_se,
        absorption_histogram: total.hist,
        capped: total.capped,
    }
}

/// Runs one trajectory; fills per-pair visit counts and per-table cost
/// totals. Returns the number of decision epochs before absorption, or
/// `None` if the cap was hit first.
fn run_trajectory(
    model: &FiniteMdpModel,
    strategy: &AnyStrategy,
    step_cap: u64,
    rng: &mut ChaCha8Rng,
    offsets: &[usize],
    visits: &mut [f64],
    costs: &mut [f64],
) -> Option<u64> {
    // A mixture commits to one component for the whole trajectory.
    let component = match strategy {
        AnyStrategy::Mixed(mix) => {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            let mut chosen = mix.len() - 1;
            for l in 0..mix.len() {
                cum += mix.weight(l);
                if u < cum {
                    chosen = l;
                    break;
                }
            }
            Some(chosen)
        }
        _ => None,
    };

    let mut x = model.initial_state();
    let mut epoch: u64 = 0;
    while epoch < step_cap {
        epoch += 1;
        let a = match strategy {
            AnyStrategy::Deterministic(phi) => phi.action(x),
            AnyStrategy::Mixed(mix) => mix.component(component.unwrap()).action(x),
            AnyStrategy::Stationary(sigma) => sample_row(sigma.row(x), rng),
            AnyStrategy::Markov(mk) => sample_row(mk.at_epoch(epoch as usize).row(x), rng),
        };
        visits[offsets[x] + a] += 1.0;
        for (j, slot) in costs.iter_mut().enumerate() {
            *slot += model.cost(j, x, a);
        }

        let u: f64 = rng.random();
        let row = model.transition(x, a);
        let mut cum = 0.0;
        let mut next: Option<usize> = None;
        let mut last_support: Option<usize> = None;
        for (y, &p) in row.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            last_support = Some(y);
            cum += p;
            if u < cum {
                next = Some(y);
                break;
            }
        }
        match next {
            Some(y) => x = y,
            None => {
                if model.absorb(x, a) > 0.0 {
                    return Some(epoch);
                }
                // Zero deficit: u fell into rounding slack past the row sum.
                match last_support {
                    Some(y) => x = y,
                    None => return Some(epoch),
                }
            }
        }
    }
    None
}

/// Samples an index from a probability row (cumulative walk; the last
/// positive entry absorbs rounding slack).
fn sample_row(row: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = 0;
    for (a, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = a;
        cum += p;
        if u < cum {
            return a;
        }
    }
    last
}

/// Largest z-score between the empirical occupation means and an analytic
/// measure: `|mean - M| / SE` per pair, with zero-variance entries required
/// to match within `1e-12` (else infinity). Shapes must agree.
pub fn compare_empirical(report: &SimulationReport, m: &OccupationMeasure) -> Result<f64> {
    if report.occupation_mean.len() != m.num_states() {
        return Err(CmdpError::ShapeMismatch(format!(
            "report covers {} states, measure {}",
            report.occupation_mean.len(),
            m.num_states()
        )));
    }
    let mut worst = 0.0f64;
    for (x, row) in report.occupation_mean.iter().enumerate() {
        if row.len() != m.row(x).len() {
            return Err(CmdpError::ShapeMismatch(format!(
                "state {x}: report has {} actions, measure {}",
                row.len(),
                m.row(x).len()
            )));
        }
        for (a, &mean) in row.iter().enumerate() {
            let diff = (mean - m.get(x, a)).abs();
            let se = report.occupation_se[x][a];
            let z = if se == 0.0 {
                if diff <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                diff / se
            };
            worst = worst.max(z);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use crate::model::{as_stationary, DeterministicStrategy, MixedStrategy, StationaryStrategy};
    use crate::occupancy::occupation_of_stationary;

    #[test]
    fn deterministic_chain_is_exact() {
        let p = fixtures::chain2();
        let phi = DeterministicStrategy::new(&p.model, vec![0, 0]).unwrap();
        let report = simulate(&p.model, &phi.clone().into(), 100, 7, 1000);
        assert_eq!(report.occupation_mean, vec![vec![1.0], vec![1.0]]);
        assert_eq!(report.occupation_se, vec![vec![0.0], vec![0.0]]);
        assert_eq!(report.cost_mean, vec![4.0]);
        assert_eq!(report.capped, 0);
        assert_eq!(report.absorption_histogram.get(&2), Some(&100));

        let m = occupation_of_stationary(&p.model, &as_stationary(&p.model, &phi)).unwrap();
        assert_eq!(compare_empirical(&report, &m).unwrap(), 0.0);
    }

    #[test]
    fn seeded_runs_reproduce_and_seeds_differ() {
        let p = fixtures::geometric(0.5);
        let sigma = StationaryStrategy::new(&p.model, vec![vec![1.0]]).unwrap();
        let s: AnyStrategy = sigma.into();
        let a = simulate(&p.model, &s, 5000, 42, 10_000);
        let b = simulate(&p.model, &s, 5000, 42, 10_000);
        assert_eq!(a.occupation_mean, b.occupation_mean);
        assert_eq!(a.absorption_histogram, b.absorption_histogram);
        let c = simulate(&p.model, &s, 5000, 43, 10_000);
        assert_ne!(a.occupation_mean, c.occupation_mean);
    }

    #[test]
    fn geometric_mass_is_recovered_within_error() {
        let p = fixtures::geometric(0.5);
        let sigma = StationaryStrategy::new(&p.model, vec![vec![1.0]]).unwrap();
        let report = simulate(&p.model, &sigma.into(), 20_000, 1, 10_000);
        let m = occupation_of_stationary(
            &p.model,
            &StationaryStrategy::new(&p.model, vec![vec![1.0]]).unwrap(),
        )
        .unwrap();
        let z = compare_empirical(&report, &m).unwrap();
        assert!(z < 4.0, "z = {z}");
    }

    #[test]
    fn nonabsorbing_trajectories_hit_the_cap() {
        let p = fixtures::zero_loop();
        let phi = DeterministicStrategy::new(&p.model, vec![0]).unwrap();
        let report = simulate(&p.model, &phi.into(), 50, 0, 100);
        assert_eq!(report.capped, 50);
        assert!(report.absorption_histogram.is_empty());
        assert_eq!(report.occupation_mean[0][0], 100.0);
    }

    #[test]
    fn mixture_draws_components_by_weight() {
        let p = fixtures::twoact(0.5);
        let a = DeterministicStrategy::new(&p.model, vec![0]).unwrap();
        let b = DeterministicStrategy::new(&p.model, vec![1]).unwrap();
        let mix = MixedStrategy::new(vec![0.25, 0.75], vec![a, b]).unwrap();
        let report = simulate(&p.model, &mix.into(), 40_000, 9, 10);
        // Every trajectory absorbs after exactly one epoch.
        assert_eq!(report.absorption_histogram.get(&1), Some(&40_000));
        let frac_b = report.occupation_mean[0][1];
        assert!((frac_b - 0.75).abs() < 4.0 * report.occupation_se[0][1]);
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let p = fixtures::twoact(0.5);
        let q = fixtures::chain2();
        let phi = DeterministicStrategy::new(&p.model, vec![0]).unwrap();
        let report = simulate(&p.model, &phi.into(), 10, 0, 10);
        let m = occupation_of_stationary(
            &q.model,
            &as_stationary(
                &q.model,
                &DeterministicStrategy::new(&q.model, vec![0, 0]).unwrap(),
            ),
        )
        .unwrap();
        assert!(matches!(
            compare_empirical(&report, &m),
            Err(CmdpError::ShapeMismatch(_))
        ));
    }
}
