//! Just enough dense linear algebra for the normal equations: the
//! systems here are at most 8×8, so a pivoted Gaussian elimination is
//! simpler and faster than pulling in a matrix crate.

/// Solves A·x = b in place (A row-major n×n; both buffers are
/// overwritten, the solution lands in `b`). Returns false when a pivot
/// vanishes or goes non-finite.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > pivot {
                pivot = v;
                pivot_row = row;
            }
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return false;
        }
        if pivot_row != col {
            for k in col..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row * n + k] * b[k];
        }
        b[row] = sum / a[row * n + row];
    }
    true
}

/// Inverse of a symmetric 2×2 matrix, or None when it is singular to
/// relative precision.
pub(crate) fn invert_2x2_sym(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs() * m[1][1].abs() + m[0][1] * m[1][0];
    if det.abs() <= 1e-14 * scale.abs() || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}
