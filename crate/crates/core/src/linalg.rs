//! Floating-point rank, containment and zero-forcing helpers, plus a small generic solver
//! shared by the floating and exact relay code.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::Scalar;

/// Default relative tolerance for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Rank decision together with how far the deciding singular values sit from the threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// `sigma_rank / threshold`, infinite for rank 0. Large means the kept values are safe.
    pub kept_margin: f64,
    /// `threshold / sigma_{rank+1}`, infinite when nothing was dropped.
    pub dropped_margin: f64,
}

impl RankInfo {
    pub fn margin(&self) -> f64 {
        self.kept_margin.min(self.dropped_margin)
    }
}

/// Singular values above `rel_tol * sigma_max` count toward the rank.
pub fn rank_info(m: &DMatrix<Complex64>, rel_tol: f64) -> RankInfo {
    rank_info_from_sv(&singular_values(m), rel_tol)
}

pub fn rank_info_from_sv(sv: &[f64], rel_tol: f64) -> RankInfo {
    let Some(&top) = sv.first() else {
        return RankInfo { rank: 0, kept_margin: f64::INFINITY, dropped_margin: f64::INFINITY };
    };
    if top == 0.0 {
        return RankInfo { rank: 0, kept_margin: f64::INFINITY, dropped_margin: f64::INFINITY };
    }
    let thr = rel_tol * top;
    let rank = sv.iter().take_while(|&&s| s > thr).count();
    let kept_margin = if rank == 0 { f64::INFINITY } else { sv[rank - 1] / thr };
    let dropped_margin = match sv.get(rank) {
        Some(&s) if s > 0.0 => thr / s,
        _ => f64::INFINITY,
    };
    RankInfo { rank, kept_margin, dropped_margin }
}

pub fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    rank_info(m, rel_tol).rank
}

/// `sigma_max / sigma_min` over `min(rows, cols)` singular values.
pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn hstack(blocks: &[&DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Containment `span(a) ⊆ span(host)` by rank equality, with the decision margin.
pub fn contained_in(a: &DMatrix<Complex64>, host: &DMatrix<Complex64>, rel_tol: f64) -> (bool, f64) {
    let r_host = rank_info(host, rel_tol);
    let r_joint = rank_info(&hstack(&[host, a]), rel_tol);
    (r_host.rank == r_joint.rank, r_host.margin().min(r_joint.margin()))
}

/// Left inverse of a full-column-rank matrix, computed by SVD after column equilibration.
/// Returns `None` when the matrix is numerically rank deficient.
pub fn left_inverse(m: &DMatrix<Complex64>, rel_tol: f64) -> Option<DMatrix<Complex64>> {
    let cols = m.ncols();
    if cols == 0 || cols > m.nrows() {
        return None;
    }
    let scales: Vec<f64> = m.column_iter().map(|c| c.norm()).collect();
    if scales.contains(&0.0) {
        return None;
    }
    let mut eq = m.clone();
    for (mut c, &s) in eq.column_iter_mut().zip(&scales) {
        c.unscale_mut(s);
    }
    let svd = eq.svd(true, true);
    let top = svd.singular_values.max();
    if svd.singular_values.iter().any(|&s| s <= rel_tol * top) {
        return None;
    }
    let pinv = svd.pseudo_inverse(0.0).ok()?;
    let mut out = pinv;
    for (mut r, &s) in out.row_iter_mut().zip(&scales) {
        r.unscale_mut(s);
    }
    Some(out)
}

/// Invert a small square matrix by Gauss-Jordan elimination with magnitude pivoting.
/// Returns `None` when no pivot exceeds the scalar's tolerance relative to the largest entry.
pub fn invert_small<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    let scale = m.iter().flatten().map(S::magnitude).fold(0.0, f64::max);
    let floor = scale * S::pivot_tolerance();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut inv: Vec<Vec<S>> =
        (0..n).map(|r| (0..n).map(|c| if r == c { S::one() } else { S::zero() }).collect()).collect();
    for col in 0..n {
        let (pivot, score) = (col..n)
            .map(|r| (r, a[r][col].magnitude()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if score <= floor || score <= 0.0 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] = a[col][c].clone() / p.clone();
            inv[col][c] = inv[col][c].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].magnitude() == 0.0 {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                a[r][c] = a[r][c].clone() - f.clone() * a[col][c].clone();
                inv[r][c] = inv[r][c].clone() - f.clone() * inv[col][c].clone();
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_from_parts;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_of_dependent_columns() {
        let m = DMatrix::from_row_slice(3, 3, &[
            c(1.0, 0.0), c(2.0, 0.0), c(3.0, 1.0),
            c(0.0, 1.0), c(0.0, 2.0), c(1.0, 0.0),
            c(1.0, 1.0), c(2.0, 2.0), c(0.0, 0.0),
        ]);
        assert_eq!(numerical_rank(&m, RANK_TOL), 2);
        assert!(condition_number(&m) > 1e12);
    }

    #[test]
    fn containment_by_rank() {
        let host = DMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let inside = DMatrix::from_column_slice(3, 1, &[c(2.0, 1.0), c(-1.0, 0.5), c(0.0, 0.0)]);
        let outside = DMatrix::from_column_slice(3, 1, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(contained_in(&inside, &host, RANK_TOL).0);
        assert!(!contained_in(&outside, &host, RANK_TOL).0);
    }

    #[test]
    fn left_inverse_of_badly_scaled_columns() {
        let m = DMatrix::from_row_slice(3, 2, &[c(1e-3, 0.0), c(1e3, 0.0), c(2e-3, 1e-3), c(0.0, 1e3), c(0.0, 0.0), c(3e3, 0.0)]);
        let li = left_inverse(&m, RANK_TOL).unwrap();
        let id = &li * &m;
        assert!((id - DMatrix::identity(2, 2)).norm() < 1e-9);
    }

    #[test]
    fn exact_inverse() {
        let m = vec![
            vec![exact_from_parts(1, 2, 3), exact_from_parts(0, 1, 1)],
            vec![exact_from_parts(5, 0, 7), exact_from_parts(-2, 3, 1)],
        ];
        let inv = invert_small(&m).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                let mut acc = exact_from_parts(0, 0, 1);
                for k in 0..2 {
                    acc = acc + m[r][k].clone() * inv[k][col].clone();
                }
                let want = if r == col { exact_from_parts(1, 0, 1) } else { exact_from_parts(0, 0, 1) };
                assert_eq!(acc, want);
            }
        }
        let singular = vec![vec![exact_from_parts(1, 0, 1); 2]; 2];
        assert!(invert_small(&singular).is_none());
    }

    proptest! {
        #[test]
        fn float_inverse_round_trips(v in proptest::collection::vec(-3.0f64..3.0, 18)) {
            let m: Vec<Vec<Complex64>> = (0..3).map(|r| (0..3).map(|k| c(v[6 * r + 2 * k], v[6 * r + 2 * k + 1])).collect()).collect();
            let dm = DMatrix::from_fn(3, 3, |r, k| m[r][k]);
            prop_assume!(condition_number(&dm) < 1e6);
            let inv = invert_small(&m).unwrap();
            let di = DMatrix::from_fn(3, 3, |r, k| inv[r][k]);
            prop_assert!((dm * di - DMatrix::identity(3, 3)).norm() < 1e-8);
        }

        #[test]
        fn rank_of_product_bounded(v in proptest::collection::vec(-1.0f64..1.0, 24)) {
            let a = DMatrix::from_fn(4, 2, |r, k| c(v[2 * r + k], v[8 + 2 * r + k]));
            let b = DMatrix::from_fn(2, 4, |r, k| c(v[16 + 2 * k.min(3) / 2 + r], 0.3 * k as f64));
            prop_assert!(numerical_rank(&(a * b), RANK_TOL) <= 2);
        }
    }
}
