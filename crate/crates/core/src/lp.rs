//! Linear programming over occupation measures.
//!
//! The constrained problem is the finite-dimensional program
//!
//! ```text
//! minimize   Σ r_0(x,a) M(x,a)
//! subject to Σ_a M(x,a) - Σ_{y,a} p(x|y,a) M(y,a) = δ_{x0}(x)   (one row per state)
//!            Σ r_j(x,a) M(x,a) ≤ d_j                            (j = 1..J)
//!            M ≥ 0.
//! ```
//!
//! This module builds that program, solves it with an in-house dense
//! two-phase simplex (Dantzig pricing with a Bland fallback against
//! cycling), enumerates the vertices of the feasible polytope by basis
//! enumeration, and writes fixed-column MPS for external solvers. The
//! simplex is deliberately hand-rolled: basic solutions matter here —
//! vertices of the flow polytope are exactly deterministic occupations, and
//! a basic optimum keeps the mixture-decomposition support small — so the
//! solver must expose its basis, stay bit-reproducible, and never regularize.

use itertools::Itertools;

use crate::error::{CmdpError, Result};
use crate::linalg;
use crate::model::ConstrainedProblem;
use crate::tol::{Tolerances, SIMPLEX_ITERATION_CAP};

// ---------------------------------------------------------------------------
// Problem form
// ---------------------------------------------------------------------------

/// A minimization LP in the standard shape the simplex consumes: named
/// structural columns, equality rows, and `≤` inequality rows (slacks are
/// added internally).
#[derive(Clone, Debug)]
pub struct StandardFormLp {
    pub name: String,
    /// Objective coefficient per structural column.
    pub objective: Vec<f64>,
    /// `(coefficients, rhs)` with `Σ c_i x_i = rhs`.
    pub equalities: Vec<(Vec<f64>, f64)>,
    /// `(coefficients, rhs)` with `Σ c_i x_i ≤ rhs`.
    pub inequalities: Vec<(Vec<f64>, f64)>,
    /// Display name per structural column.
    pub columns: Vec<String>,
    /// Display name per equality row, then per inequality row.
    pub equality_names: Vec<String>,
    pub inequality_names: Vec<String>,
}

/// Termination status of the simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Simplex result. For `Optimal`, `values` is a basic feasible solution:
/// nonnegative (within `1e-10`), satisfying every equality row within
/// `1e-9`, with at most `#rows` nonzero entries.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values (empty unless optimal).
    pub values: Vec<f64>,
    /// Objective at `values` (0 unless optimal).
    pub objective: f64,
    /// Indices of basic variables, sorted; structural columns first
    /// (`0..n`), then inequality slacks (`n..n+J`).
    pub basis: Vec<usize>,
    pub iterations: u64,
}

/// Column order used by [`build_occupation_lp`]: state-major, action-minor.
pub fn pair_columns(model: &crate::model::FiniteMdpModel) -> Vec<(usize, usize)> {
    let mut cols = Vec::with_capacity(model.num_pairs());
    for x in 0..model.num_states() {
        for a in 0..model.num_actions(x) {
            cols.push((x, a));
        }
    }
    cols
}

/// Assembles the occupation-measure LP of a constrained problem.
pub fn build_occupation_lp(problem: &ConstrainedProblem) -> StandardFormLp {
    let model = &problem.model;
    let cols = pair_columns(model);
    let ncols = cols.len();

    let objective: Vec<f64> = cols.iter().map(|&(x, a)| model.cost(0, x, a)).collect();

    let mut equalities = Vec::with_capacity(model.num_states());
    for s in 0..model.num_states() {
        let mut row = vec![0.0; ncols];
        for (i, &(x, a)) in cols.iter().enumerate() {
            let mut c = if x == s { 1.0 } else { 0.0 };
            c -= model.transition(x, a)[s];
            row[i] = c;
        }
        let rhs = if s == model.initial_state() { 1.0 } else { 0.0 };
        equalities.push((row, rhs));
    }

    let mut inequalities = Vec::with_capacity(problem.num_constraints());
    for (j, &bound) in problem.bounds.iter().enumerate() {
        let row: Vec<f64> = cols
            .iter()
            .map(|&(x, a)| model.cost(j + 1, x, a))
            .collect();
        inequalities.push((row, bound));
    }

    StandardFormLp {
        name: "CMDP".into(),
        objective,
        equalities,
        inequalities,
        columns: cols.iter().map(|&(x, a)| format!("X{x}A{a}")).collect(),
        equality_names: (0..model.num_states()).map(|x| format!("FB{x}")).collect(),
        inequality_names: (0..problem.num_constraints())
            .map(|j| format!("CT{j}"))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Two-phase simplex
// ---------------------------------------------------------------------------

struct Tableau {
    /// `rows × (nvars + 1)`; last entry of each row is the rhs.
    rows: Vec<Vec<f64>>,
    /// Objective row (reduced costs), `nvars + 1` wide; last entry is the
    /// negated objective value.
    obj: Vec<f64>,
    /// Basic variable per row.
    basis: Vec<usize>,
    nvars: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        // Keep the rhs column clean: ratio-test arithmetic can leave
        // negligibly negative basics behind.
        for row in self.rows.iter_mut() {
            let rhs = row[self.nvars];
            if rhs < 0.0 && rhs > -1e-12 {
                row[self.nvars] = 0.0;
            }
        }
    }

    /// Runs the pivot loop to optimality for the current objective row.
    /// `allowed` masks columns that may enter (artificials are barred in
    /// phase 2). Dantzig pricing switches to Bland's rule after
    /// `2 (rows + columns)` pivots, which guarantees termination.
    fn optimize(
        &mut self,
        allowed: &[bool],
        iterations: &mut u64,
        tol: &Tolerances,
    ) -> Result<LpStatus> {
        let bland_after = 2 * (self.rows.len() + self.nvars) as u64;
        let mut local: u64 = 0;
        loop {
            if *iterations >= SIMPLEX_ITERATION_CAP {
                return Err(CmdpError::IterationLimit(*iterations));
            }
            let entering = if local < bland_after {
                // Dantzig: most negative reduced cost, lowest index on ties.
                let mut best: Option<(usize, f64)> = None;
                for c in 0..self.nvars {
                    if !allowed[c] || self.basis.contains(&c) {
                        continue;
                    }
                    let rc = self.obj[c];
                    if rc < -tol.pivot && best.map_or(true, |(_, b)| rc < b) {
                        best = Some((c, rc));
                    }
                }
                best.map(|(c, _)| c)
            } else {
                // Bland: lowest eligible index; immune to cycling.
                (0..self.nvars)
                    .find(|&c| allowed[c] && !self.basis.contains(&c) && self.obj[c] < -tol.pivot)
            };
            let Some(c) = entering else {
                return Ok(LpStatus::Optimal);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let coef = self.rows[r][c];
                if coef > tol.pivot {
                    let ratio = self.rows[r][self.nvars].max(0.0) / coef;
                    match leaving {
                        Some((_, best)) if ratio >= best => {}
                        _ => leaving = Some((r, ratio)),
                    }
                }
            }
            let Some((r, _)) = leaving else {
                return Ok(LpStatus::Unbounded);
            };
            self.pivot(r, c);
            *iterations += 1;
            local += 1;
        }
    }
}

/// Solves a [`StandardFormLp`] by the two-phase tableau simplex.
///
/// Phase 1 drives a full set of artificial variables to zero (reporting
/// `Infeasible` if it cannot); redundant rows whose artificials cannot be
/// pivoted out are dropped. Phase 2 minimizes the actual objective with
/// artificials barred from entering. All tie-breaks are lowest-index, so
/// results are deterministic.
pub fn simplex_solve(lp: &StandardFormLp, tol: &Tolerances) -> Result<LpSolution> {
    let n = lp.objective.len();
    let n_ineq = lp.inequalities.len();
    let nvars = n + n_ineq; // structural + slacks
    let m = lp.equalities.len() + n_ineq;
    let total = nvars + m; // + artificials

    // Assemble rows: [structural | slacks | artificials | rhs], rhs ≥ 0.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, (coeffs, rhs)) in lp.equalities.iter().chain(lp.inequalities.iter()).enumerate() {
        debug_assert_eq!(coeffs.len(), n);
        let mut row = vec![0.0; total + 1];
        row[..n].copy_from_slice(coeffs);
        if i >= lp.equalities.len() {
            row[n + (i - lp.equalities.len())] = 1.0; // slack
        }
        row[total] = *rhs;
        if row[total] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[nvars + i] = 1.0; // artificial
        rows.push(row);
    }

    // Phase-1 objective: minimize the sum of artificials; price out the
    // (all-artificial) starting basis by subtracting every row.
    let mut obj = vec![0.0; total + 1];
    for a in nvars..total {
        obj[a] = 1.0;
    }
    for row in &rows {
        for (o, v) in obj.iter_mut().zip(row.iter()) {
            *o -= v;
        }
    }

    let mut tab = Tableau {
        rows,
        obj,
        basis: (nvars..total).collect(),
        nvars: total,
    };
    let mut iterations: u64 = 0;
    let allowed_all = vec![true; total];
    match tab.optimize(&allowed_all, &mut iterations, tol)? {
        LpStatus::Unbounded => unreachable!("phase-1 objective is bounded below by zero"),
        _ => {}
    }
    let phase1 = -tab.obj[total];
    if phase1 > 1e-9 {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective: 0.0,
            basis: Vec::new(),
            iterations,
        });
    }

    // Evict artificials still basic (at value 0); drop rows that prove
    // redundant (no real column left to pivot on).
    let mut drop_rows: Vec<usize> = Vec::new();
    for r in 0..tab.rows.len() {
        if tab.basis[r] < nvars {
            continue;
        }
        match (0..nvars).find(|&c| tab.rows[r][c].abs() > tol.pivot) {
            Some(c) => tab.pivot(r, c),
            None => drop_rows.push(r),
        }
    }
    for &r in drop_rows.iter().rev() {
        tab.rows.remove(r);
        tab.basis.remove(r);
    }

    // Phase 2: real objective, artificials barred.
    let mut obj = vec![0.0; total + 1];
    obj[..n].copy_from_slice(&lp.objective);
    for (r, &b) in tab.basis.iter().enumerate() {
        let cb = obj[b];
        if cb == 0.0 {
            continue;
        }
        let row = tab.rows[r].clone();
        for (o, v) in obj.iter_mut().zip(row.iter()) {
            *o -= cb * v;
        }
    }
    tab.obj = obj;
    let mut allowed = vec![true; total];
    for slot in allowed.iter_mut().skip(nvars) {
        *slot = false;
    }
    let status = tab.optimize(&allowed, &mut iterations, tol)?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            status,
            values: Vec::new(),
            objective: 0.0,
            basis: Vec::new(),
            iterations,
        });
    }

    let mut values = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            values[b] = tab.rows[r][tab.nvars].max(0.0);
        }
    }
    let objective = values
        .iter()
        .zip(&lp.objective)
        .map(|(v, c)| v * c)
        .sum();
    let mut basis: Vec<usize> = tab.basis.iter().copied().filter(|&b| b < nvars).collect();
    basis.sort_unstable();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        basis,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Vertex enumeration
// ---------------------------------------------------------------------------

/// The vertices found by [`enumerate_vertices`], as structural coordinate
/// vectors. `truncated` is set when enumeration stopped at the limit.
#[derive(Clone, Debug)]
pub struct VertexSet {
    pub vertices: Vec<Vec<f64>>,
    pub truncated: bool,
}

/// Enumerates all vertices of `{x ≥ 0 : equalities, inequalities}` by
/// solving every basis-sized column subset, keeping the nonnegative
/// solutions, and deduplicating at sup-distance `1e-8`.
///
/// Fails with [`CmdpError::UnboundedPolytope`] when the feasible region has
/// a recession ray (for the occupation LP: a zero-leak end component whose
/// circulation adds flow-free mass), detected by an auxiliary LP that
/// maximizes the total mass of a bounded ray candidate.
pub fn enumerate_vertices(lp: &StandardFormLp, limit: usize, tol: &Tolerances) -> Result<VertexSet> {
    let n = lp.objective.len();
    let n_ineq = lp.inequalities.len();
    let nvars = n + n_ineq;
    let m = lp.equalities.len() + n_ineq;

    if has_recession_ray(lp, tol)? {
        return Err(CmdpError::UnboundedPolytope);
    }

    let bases = binomial(nvars as u128, m as u128);
    if bases > 20_000_000 {
        return Err(CmdpError::InvalidArgument(format!(
            "vertex enumeration over {bases} bases is not tractable"
        )));
    }

    // Column k of the row system, stacked equalities-then-inequalities.
    let column = |k: usize, row: usize| -> f64 {
        let (coeffs, _) = if row < lp.equalities.len() {
            &lp.equalities[row]
        } else {
            &lp.inequalities[row - lp.equalities.len()]
        };
        if k < n {
            coeffs[k]
        } else if row >= lp.equalities.len() && row - lp.equalities.len() == k - n {
            1.0
        } else {
            0.0
        }
    };
    let rhs: Vec<f64> = lp
        .equalities
        .iter()
        .chain(lp.inequalities.iter())
        .map(|(_, b)| *b)
        .collect();

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut truncated = false;
    'outer: for subset in (0..nvars).combinations(m) {
        let a_mat: Vec<Vec<f64>> = (0..m)
            .map(|row| subset.iter().map(|&k| column(k, row)).collect())
            .collect();
        let Ok(xb) = linalg::solve_dense(a_mat, rhs.clone(), tol.singular) else {
            continue;
        };
        if xb.iter().any(|&v| v < -tol.flow) {
            continue;
        }
        let mut point = vec![0.0; n];
        for (&k, &v) in subset.iter().zip(&xb) {
            if k < n {
                point[k] = v.max(0.0);
            }
        }
        let dup = vertices.iter().any(|u| {
            u.iter()
                .zip(&point)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= tol.dedupe
        });
        if dup {
            continue;
        }
        if vertices.len() == limit {
            truncated = true;
            break 'outer;
        }
        vertices.push(point);
    }
    Ok(VertexSet {
        vertices,
        truncated,
    })
}

/// Decides whether `{x ≥ 0 : Ax = 0, Cx ≤ 0}` contains a nonzero point, by
/// maximizing `Σ x_i` under the extra box `x_i ≤ 1`.
fn has_recession_ray(lp: &StandardFormLp, tol: &Tolerances) -> Result<bool> {
    let n = lp.objective.len();
    let mut inequalities: Vec<(Vec<f64>, f64)> = lp
        .inequalities
        .iter()
        .map(|(c, _)| (c.clone(), 0.0))
        .collect();
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        inequalities.push((row, 1.0));
    }
    let aux = StandardFormLp {
        name: "RAY".into(),
        objective: vec![-1.0; n],
        equalities: lp
            .equalities
            .iter()
            .map(|(c, _)| (c.clone(), 0.0))
            .collect(),
        inequalities,
        columns: lp.columns.clone(),
        equality_names: lp.equality_names.clone(),
        inequality_names: Vec::new(),
    };
    let sol = simplex_solve(&aux, tol)?;
    debug_assert_eq!(sol.status, LpStatus::Optimal, "ray LP is always feasible");
    Ok(sol.objective < -1e-6)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

// ---------------------------------------------------------------------------
// MPS output
// ---------------------------------------------------------------------------

/// Renders the LP in fixed-column MPS (objective row `COST`, RHS set `RHS`).
pub fn write_mps(lp: &StandardFormLp) -> String {
    fn num(v: f64) -> String {
        let s = format!("{v}");
        if s.len() <= 12 {
            s
        } else {
            format!("{v:.6e}")
        }
    }
    let mut out = String::new();
    out.push_str(&format!("NAME          {}\n", lp.name));
    out.push_str("ROWS\n N  COST\n");
    for name in &lp.equality_names {
        out.push_str(&format!(" E  {name}\n"));
    }
    for name in &lp.inequality_names {
        out.push_str(&format!(" L  {name}\n"));
    }
    out.push_str("COLUMNS\n");
    for (i, col) in lp.columns.iter().enumerate() {
        let mut fields: Vec<(String, f64)> = Vec::new();
        if lp.objective[i] != 0.0 {
            fields.push(("COST".into(), lp.objective[i]));
        }
        for (r, (coeffs, _)) in lp.equalities.iter().enumerate() {
            if coeffs[i] != 0.0 {
                fields.push((lp.equality_names[r].clone(), coeffs[i]));
            }
        }
        for (r, (coeffs, _)) in lp.inequalities.iter().enumerate() {
            if coeffs[i] != 0.0 {
                fields.push((lp.inequality_names[r].clone(), coeffs[i]));
            }
        }
        for pair in fields.chunks(2) {
            let mut line = format!("    {:<10}", col);
            for (row, v) in pair {
                line.push_str(&format!("{:<10}{:<12}", row, num(*v)));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    out.push_str("RHS\n");
    let mut rhs_fields: Vec<(String, f64)> = Vec::new();
    for (r, (_, b)) in lp.equalities.iter().enumerate() {
        if *b != 0.0 {
            rhs_fields.push((lp.equality_names[r].clone(), *b));
        }
    }
    for (r, (_, b)) in lp.inequalities.iter().enumerate() {
        if *b != 0.0 {
            rhs_fields.push((lp.inequality_names[r].clone(), *b));
        }
    }
    for pair in rhs_fields.chunks(2) {
        let mut line = format!("    {:<10}", "RHS");
        for (row, v) in pair {
            line.push_str(&format!("{:<10}{:<12}", row, num(*v)));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str("BOUNDS\nENDATA\n");
    out
}
