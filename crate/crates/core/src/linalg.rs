//! Linear algebra helpers: exact rank and nullspaces by fraction-free
//! elimination over the integers, plus `f64` SVD utilities backed by nalgebra.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

/// Scales a rational row to a primitive integer row.
fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    primitive(ints)
}

fn primitive(mut row: Vec<BigInt>) -> Vec<BigInt> {
    let g = row.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in &mut row {
            *v = &*v / &g;
        }
    }
    row
}

/// Integer echelon form. Returns the reduced rows and their pivot columns;
/// each pivot column is zero in every other row.
fn fraction_free_reduce(rows: &[Vec<Rational>]) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut work: Vec<Vec<BigInt>> =
        rows.iter().map(|r| integer_row(r)).filter(|r| r.iter().any(|v| !v.is_zero())).collect();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut done = 0;
    for col in 0..ncols {
        if done == work.len() {
            break;
        }
        // smallest nonzero magnitude keeps intermediate numbers small
        let Some(p) = (done..work.len())
            .filter(|&r| !work[r][col].is_zero())
            .min_by(|&a, &b| work[a][col].abs().cmp(&work[b][col].abs()))
        else {
            continue;
        };
        work.swap(done, p);
        let pivot_row = work[done].clone();
        let a = pivot_row[col].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r == done || row[col].is_zero() {
                continue;
            }
            let b = row[col].clone();
            let g = a.gcd(&b);
            let (ma, mb) = (&a / &g, &b / &g);
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = &*x * &ma - y * &mb;
            }
            *row = primitive(std::mem::take(row));
        }
        pivots.push(col);
        done += 1;
    }
    work.truncate(done);
    work.retain(|r| r.iter().any(|v| !v.is_zero()));
    (work, pivots)
}

pub fn rank_exact(rows: &[Vec<Rational>]) -> usize {
    fraction_free_reduce(rows).1.len()
}

/// Basis of `{ x : A x = 0 }` with primitive integer entries, one vector per
/// free column (in column order).
pub fn nullspace_exact(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    if rows.is_empty() {
        return (0..ncols)
            .map(|i| (0..ncols).map(|j| Rational::from_integer(BigInt::from(i32::from(i == j)))).collect())
            .collect();
    }
    let (reduced, pivots) = fraction_free_reduce(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let lcm = reduced
        .iter()
        .zip(&pivots)
        .fold(BigInt::one(), |acc, (row, &p)| acc.lcm(&row[p]));
    free.iter()
        .map(|&f| {
            let mut x = vec![BigInt::zero(); ncols];
            x[f] = lcm.clone();
            for (row, &p) in reduced.iter().zip(&pivots) {
                if !row[f].is_zero() {
                    x[p] = -(&row[f] * &lcm) / &row[p];
                }
            }
            let mut x = primitive(x);
            if x[f].is_negative() {
                x.iter_mut().for_each(|v| *v = -&*v);
            }
            x.into_iter().map(Rational::from_integer).collect()
        })
        .collect()
}

/// `true` if the row spaces of `a` and `b` coincide.
pub fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    let ra = rank_exact(a);
    let rb = rank_exact(b);
    if ra != rb {
        return false;
    }
    let joined: Vec<Vec<Rational>> = a.iter().chain(b).cloned().collect();
    rank_exact(&joined) == ra
}

/// Singular values (descending) of a row-major `f64` matrix.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with relative tolerance `rel_tol`.
pub fn rank_f64(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    let s = singular_values(rows);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the span of the top `k` left singular vectors.
pub fn dominant_subspace(columns: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let dim = columns[0].len();
    let m = DMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.iter().take(k).map(|&c| u.column(c).iter().copied().collect()).collect()
}

/// Least-squares solution of `A x = b`; returns `(x, residual_norm)`.
pub fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> (Vec<f64>, f64) {
    let a = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).expect("svd computed with both factors");
    let r = &a * &x - &b;
    (x.iter().copied().collect(), r.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn qr(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Brute-force check: every returned vector is annihilated and the count
    /// matches `ncols - rank`.
    fn check(rows: Vec<Vec<Rational>>, ncols: usize) {
        let ns = nullspace_exact(&rows, ncols);
        assert_eq!(ns.len(), ncols - rank_exact(&rows));
        for v in &ns {
            for r in &rows {
                let dot = r.iter().zip(v).fold(q(0), |acc, (a, b)| acc + a * b);
                assert!(dot.is_zero());
            }
        }
        if !ns.is_empty() {
            assert_eq!(rank_exact(&ns), ns.len());
        }
    }

    #[test]
    fn nullspace_small_cases() {
        check(vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]], 3);
        check(vec![vec![qr(1, 2), qr(1, 3), q(0)], vec![q(0), q(1), qr(-5, 7)]], 3);
        check(vec![vec![q(0), q(0)]], 2);
        check(vec![vec![q(1), q(0)], vec![q(0), q(1)]], 2);
        assert_eq!(nullspace_exact(&[], 2).len(), 2);
    }

    #[test]
    fn nullspace_is_integer_and_primitive() {
        let ns = nullspace_exact(&[vec![q(2), q(4)]], 2);
        assert_eq!(ns, vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn span_comparison() {
        let a = vec![vec![q(1), q(1), q(0)], vec![q(0), q(1), q(1)]];
        let b = vec![vec![q(1), q(2), q(1)], vec![q(1), q(0), q(-1)]];
        assert!(same_span(&a, &b));
        let c = vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(1)]];
        assert!(!same_span(&a, &c));
    }

    #[test]
    fn float_helpers() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1e-13], vec![1.0, 0.0]];
        assert_eq!(rank_f64(&rows, 1e-10), 1);
        let (x, res) = least_squares(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]], &[1.0, 2.0, 2.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }
}
