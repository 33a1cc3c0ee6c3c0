//! Dense linear algebra for desk-scale systems: Gaussian elimination with
//! partial pivoting, and a null-space sampler used by the Carathéodory
//! reduction. Everything here operates on `Vec<Vec<f64>>` rows; the systems
//! this crate solves stay well under a few hundred unknowns, so simplicity
//! and determinism win over BLAS.

use crate::error::{CmdpError, Result};

/// Solves the square system `a x = b` in place by partial-pivoting
/// elimination. Returns [`CmdpError::SingularSystem`] when the best available
/// pivot falls below `singular_tol` in absolute value.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, singular_tol: f64) -> Result<Vec<f64>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), n);

    for col in 0..n {
        // Partial pivot: largest magnitude in this column at or below the diagonal.
        let mut piv = col;
        let mut best = a[col][col].abs();
        for (row, a_row) in a.iter().enumerate().skip(col + 1) {
            let mag = a_row[col].abs();
            if mag > best {
                best = mag;
                piv = row;
            }
        }
        if best < singular_tol {
            return Err(CmdpError::SingularSystem { pivot: best });
        }
        if piv != col {
            a.swap(col, piv);
            b.swap(col, piv);
        }
        let diag = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            a[row][col] = 0.0;
            for k in col + 1..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    // Back substitution.
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// Returns a nonzero vector `c` with `a c = 0` for a wide matrix `a`
/// (`rows < cols`), or `None` when the columns are linearly independent.
///
/// Row echelon form with partial pivoting; the first non-pivot column is set
/// to 1 and the pivot columns are back-solved. Deterministic, so repeated
/// Carathéodory steps always eliminate the same coordinate.
pub fn null_vector(mut a: Vec<Vec<f64>>, pivot_tol: f64) -> Option<Vec<f64>> {
    let rows = a.len();
    if rows == 0 {
        return None;
    }
    let cols = a[0].len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r >= rows {
            break;
        }
        let mut piv = r;
        let mut best = a[r][col].abs();
        for (row, a_row) in a.iter().enumerate().skip(r + 1) {
            let mag = a_row[col].abs();
            if mag > best {
                best = mag;
                piv = row;
            }
        }
        if best < pivot_tol {
            continue; // free column
        }
        a.swap(r, piv);
        let diag = a[r][col];
        for row in 0..rows {
            if row == r {
                continue;
            }
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..cols {
                a[row][k] -= factor * a[r][k];
            }
            a[row][col] = 0.0;
        }
        pivot_cols.push(col);
        r += 1;
    }

    let free = (0..cols).find(|c| !pivot_cols.contains(c))?;
    let mut c = vec![0.0; cols];
    c[free] = 1.0;
    for (row, &pc) in pivot_cols.iter().enumerate() {
        // Row is reduced: a[row][pc] * c[pc] + a[row][free] * 1 = 0.
        c[pc] = -a[row][free] / a[row][pc];
    }
    Some(c)
}
