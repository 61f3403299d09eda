//! Exact rank over the Gaussian rationals.
//!
//! Each column is scaled by the lcm of its denominators, turning it into Gaussian integers
//! without changing the rank; fraction-free (Bareiss) elimination then runs with exact
//! division in `Z[i]`.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::model::ExactComplex;

pub type GaussInt = Complex<BigInt>;

/// Exact quotient in `Z[i]`; the caller guarantees divisibility.
fn div_exact(a: &GaussInt, b: &GaussInt) -> GaussInt {
    let norm = &b.re * &b.re + &b.im * &b.im;
    let num = a * b.conj();
    debug_assert!((&num.re % &norm).is_zero() && (&num.im % &norm).is_zero());
    GaussInt::new(num.re / &norm, num.im / norm)
}

/// Scale a column of Gaussian rationals to Gaussian integers.
pub fn clear_denominators(col: &[ExactComplex]) -> Vec<GaussInt> {
    let lcm = col.iter().fold(BigInt::one(), |acc, z| acc.lcm(z.re.denom()).lcm(z.im.denom()));
    col.iter()
        .map(|z| {
            let re = z.re.numer() * (&lcm / z.re.denom());
            let im = z.im.numer() * (&lcm / z.im.denom());
            GaussInt::new(re, im)
        })
        .collect()
}

/// Rank of a row-major Gaussian-integer matrix by fraction-free elimination.
pub fn bareiss_rank(mut a: Vec<Vec<GaussInt>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = GaussInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let (top, rest) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let piv = pivot_row[c].clone();
        for row in rest.iter_mut() {
            let lead = std::mem::replace(&mut row[c], GaussInt::zero());
            for j in c + 1..cols {
                let v = &piv * &row[j] - &lead * &pivot_row[j];
                row[j] = div_exact(&v, &prev);
            }
        }
        prev = piv;
        r += 1;
    }
    r
}

/// Exact rank of a matrix given by columns.
pub fn exact_rank(columns: &[Vec<ExactComplex>]) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let cleared: Vec<Vec<GaussInt>> = columns.iter().map(|c| clear_denominators(c)).collect();
    let rows = cleared[0].len();
    let m: Vec<Vec<GaussInt>> =
        (0..rows).map(|r| cleared.iter().map(|c| c[r].clone()).collect()).collect();
    bareiss_rank(m)
}

/// `span(a) ⊆ span(host)` decided exactly.
pub fn exact_contained(a: &[Vec<ExactComplex>], host: &[Vec<ExactComplex>]) -> bool {
    let joint: Vec<Vec<ExactComplex>> = host.iter().chain(a).cloned().collect();
    exact_rank(host) == exact_rank(&joint)
}

/// Plain Gaussian elimination over `Q(i)`; slow, used as an independent check.
pub fn rational_rank(columns: &[Vec<ExactComplex>]) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let rows = columns[0].len();
    let cols = columns.len();
    let mut a: Vec<Vec<ExactComplex>> =
        (0..rows).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone() / a[r][c].clone();
            for j in c..cols {
                let v = f.clone() * a[r][j].clone();
                a[i][j] = a[i][j].clone() - v;
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_from_parts;
    use proptest::prelude::*;

    fn col(v: &[(i64, i64, i64)]) -> Vec<ExactComplex> {
        v.iter().map(|&(a, b, d)| exact_from_parts(a, b, d)).collect()
    }

    #[test]
    fn detects_exact_dependence() {
        let a = col(&[(1, 1, 3), (2, 0, 5), (0, -1, 7)]);
        let b = col(&[(0, 1, 2), (1, 1, 1), (3, 0, 4)]);
        let two = exact_from_parts(2, -1, 9);
        let c: Vec<_> = a.iter().zip(&b).map(|(x, y)| x.clone() * two.clone() + y.clone()).collect();
        assert_eq!(exact_rank(&[a.clone(), b.clone(), c.clone()]), 2);
        assert_eq!(rational_rank(&[a.clone(), b.clone(), c.clone()]), 2);
        assert!(exact_contained(&[c], &[a, b]));
    }

    #[test]
    fn zero_columns_are_skipped() {
        let z = col(&[(0, 0, 1), (0, 0, 1)]);
        let e = col(&[(0, 0, 1), (1, 0, 1)]);
        assert_eq!(exact_rank(&[z.clone(), e.clone()]), 1);
        assert_eq!(exact_rank(&[z]), 0);
    }

    proptest! {
        #[test]
        fn bareiss_agrees_with_rational_elimination(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in proptest::collection::vec((-4i64..5, -4i64..5, 1i64..4), 16),
            dup in any::<bool>(),
        ) {
            let mut columns: Vec<Vec<ExactComplex>> = (0..cols)
                .map(|c| (0..rows).map(|r| { let (a, b, d) = seed[(c * rows + r) % 16]; exact_from_parts(a * (c as i64 + 1) - r as i64, b, d) }).collect())
                .collect();
            if dup && cols > 1 {
                let sum: Vec<ExactComplex> = columns[0].iter().zip(&columns[1]).map(|(x, y)| x.clone() + y.clone()).collect();
                columns.push(sum);
            }
            prop_assert_eq!(exact_rank(&columns), rational_rank(&columns));
        }
    }
}
