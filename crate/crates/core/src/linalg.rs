#![allow(clippy::needless_range_loop)]

//! Exact rational linear algebra on small dense integer matrices.
//!
//! Everything here works over `BigRational`; no floating point is used. The
//! matrices handled by the engine are at most a few dozen rows, so dense
//! Gaussian elimination is fine.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense row-major integer matrix as used for Gram matrices.
pub type IntMatrix = Vec<Vec<i64>>;

/// Counts of positive, negative and zero entries of a diagonalization by
/// congruence (Sylvester's law of inertia).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    m.iter().map(|row| row.iter().map(|&x| rat(x)).collect()).collect()
}

pub fn is_square(m: &[Vec<i64>]) -> bool {
    m.iter().all(|row| row.len() == m.len())
}

pub fn is_symmetric(m: &[Vec<i64>]) -> bool {
    is_square(m) && (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

/// Inertia of a symmetric matrix via exact symmetric (LDLᵀ-style) elimination.
///
/// When every remaining diagonal entry vanishes but an off-diagonal entry
/// `a[i][j]` does not, row/column `j` is added to row/column `i`, which makes
/// the new diagonal entry `2·a[i][j]` nonzero. Only congruences are applied,
/// so the signs of the pivots give the inertia.
pub fn inertia(m: &[Vec<i64>]) -> Inertia {
    assert!(is_symmetric(m), "inertia requires a symmetric matrix");
    let n = m.len();
    let mut a = to_rational(m);
    let mut out = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][i].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => {
                let off = (k..n)
                    .flat_map(|i| (k..n).map(move |j| (i, j)))
                    .find(|&(i, j)| i != j && !a[i][j].is_zero());
                match off {
                    Some((i, j)) => {
                        for c in 0..n {
                            let v = a[j][c].clone();
                            a[i][c] += v;
                        }
                        for r in 0..n {
                            let v = a[r][j].clone();
                            a[r][i] += v;
                        }
                        i
                    }
                    None => {
                        out.zero += n - k;
                        return out;
                    }
                }
            }
        };
        a.swap(k, pivot);
        for row in a.iter_mut() {
            row.swap(k, pivot);
        }
        let d = a[k][k].clone();
        if d.is_positive() {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let factor = &a[i][k] / &d;
            for c in k..n {
                let v = &factor * &a[k][c];
                a[i][c] -= v;
            }
            for r in k..n {
                let v = &factor * &a[r][k];
                a[r][i] -= v;
            }
        }
    }
    out
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(a: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let v = &f * &a[r][j];
                    a[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<i64>]) -> usize {
    let mut a = to_rational(m);
    rref(&mut a).len()
}

/// Basis of the rational null space `{x : m·x = 0}`, each vector scaled to a
/// primitive integer vector.
pub fn integer_nullspace(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut a = to_rational(m);
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); cols];
            v[fc] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][fc].clone();
            }
            primitive_integer(&v)
        })
        .collect()
}

/// Clears denominators and divides by the gcd of the entries.
pub fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Solves `m·x = b` over the rationals. Returns `None` when the system is
/// inconsistent or the solution is not unique.
pub fn solve_unique(m: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) || pivots.len() != cols {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

/// Exact inverse of a square integer matrix over the rationals.
pub fn inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut aug: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|&x| rat(x)).collect();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Determinant by fraction-free elimination over the rationals.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    let mut a = to_rational(m);
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= &a[k][k];
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
        }
    }
    det.to_integer()
}

/// Converts a rational matrix with integral entries to `i64`.
pub fn to_int_matrix(m: &[Vec<BigRational>]) -> Option<IntMatrix> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn mat_vec(a: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn transpose(a: &[Vec<i64>]) -> IntMatrix {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}
