//! Dense phase-one simplex, enough to decide convex-hull membership.

use crate::scalar::Scalar;

/// Is `target` a convex combination of `points`?
///
/// Solves `λ ≥ 0, Σλ = 1, Σ λ_k·points[k] = target` with Bland's rule, so the
/// answer is exact for rational scalars.
pub(crate) fn in_convex_hull<S: Scalar>(points: &[Vec<S>], target: &[S]) -> bool {
    if points.is_empty() {
        return false;
    }
    let dim = target.len();
    let rows = dim + 1;
    let cols = points.len();
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .chain(target)
        .fold(S::one(), |acc, v| acc.max_of(v.abs()));
    let tol = S::tolerance() * scale;

    // tableau: [A | I | b]
    let width = cols + rows + 1;
    let mut t: Vec<Vec<S>> = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut row = vec![S::zero(); width];
        for (c, p) in points.iter().enumerate() {
            row[c] = if r < dim { p[r].clone() } else { S::one() };
        }
        row[cols + r] = S::one();
        row[width - 1] = if r < dim { target[r].clone() } else { S::one() };
        if row[width - 1] < S::zero() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            row[cols + r] = S::one();
        }
        t.push(row);
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // reduced costs of the phase-one objective Σ artificials
    let mut cost = vec![S::zero(); width];
    for row in &t {
        for c in 0..cols {
            cost[c] = cost[c].clone() - row[c].clone();
        }
        cost[width - 1] = cost[width - 1].clone() - row[width - 1].clone();
    }

    loop {
        let Some(enter) = (0..cols + rows).find(|&c| cost[c] < -tol.clone()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for r in 0..rows {
            if t[r][enter] > tol {
                let ratio = t[r][width - 1].clone() / t[r][enter].clone();
                leave = match leave {
                    None => Some(r),
                    Some(best) => {
                        let best_ratio = t[best][width - 1].clone() / t[best][enter].clone();
                        if ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[best]) {
                            Some(r)
                        } else {
                            Some(best)
                        }
                    }
                };
            }
        }
        let Some(pr) = leave else {
            // unbounded direction cannot occur in phase one; treat as done
            break;
        };
        let pivot = t[pr][enter].clone();
        for v in t[pr].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        let pivot_row = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        let f = cost[enter].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v = v.clone() - f.clone() * pv.clone();
        }
        basis[pr] = enter;
    }
    // objective value is -cost[b]
    -cost[width - 1].clone() <= tol * S::of_i64(rows as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn pts(raw: &[&[f64]]) -> Vec<Vec<f64>> {
        raw.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn square_membership() {
        let square = pts(&[&[-1.0, -1.0], &[1.0, -1.0], &[1.0, 1.0], &[-1.0, 1.0]]);
        assert!(in_convex_hull(&square, &[0.0, 0.0]));
        assert!(in_convex_hull(&square, &[1.0, 1.0]));
        assert!(in_convex_hull(&square, &[0.3, -0.9]));
        assert!(!in_convex_hull(&square, &[1.1, 0.0]));
    }

    #[test]
    fn degenerate_segment_membership() {
        let diag = pts(&[&[1.0, 1.0], &[-1.0, -1.0]]);
        assert!(in_convex_hull(&diag, &[0.5, 0.5]));
        assert!(!in_convex_hull(&diag, &[1.0, -1.0]));
        assert!(in_convex_hull(&pts(&[&[0.0]]), &[0.0]));
        assert!(!in_convex_hull(&pts(&[&[0.0]]), &[1e-3]));
    }

    #[test]
    fn exact_boundary_in_rationals() {
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let tri = vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        assert!(in_convex_hull(&tri, &[q(1, 3), q(2, 3)]));
        assert!(!in_convex_hull(&tri, &[q(1, 3), q(2, 3) + q(1, 1_000_000_000)]));
    }
}
