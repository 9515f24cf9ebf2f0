//! Smith normal form over the integers, integral solvability of linear
//! systems, and cokernel structure.
//!
//! For an `m×n` matrix `A` we compute unimodular `U` (`m×m`) and `V` (`n×n`)
//! with `U·A·V = D` diagonal, `d₁ | d₂ | …`. Then `A·x = b` has an integral
//! solution iff `dᵢ | (U·b)ᵢ` for every `i < rank` and `(U·b)ᵢ = 0` beyond.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

type Mat = Vec<Vec<BigInt>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub u: Mat,
    pub v: Mat,
    /// Diagonal of `D`, length `min(m, n)`; trailing zeros for rank deficiency.
    pub diagonal: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
}

/// Cokernel `Zᵐ / A·Zⁿ ≅ Z^free_rank ⊕ ⊕ Z/tᵢ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cokernel {
    pub free_rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
}

impl Cokernel {
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().fold(BigInt::one(), |acc, t| acc * t)
    }
}

/// Outcome of deciding `A·x = b` over `Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntegralSolution {
    Solvable(Vec<BigInt>),
    /// `(U·b)[index] = residue` is not divisible by `divisor` (a zero divisor
    /// means the coordinate lies outside the image entirely).
    Insolvable {
        index: usize,
        residue: BigInt,
        divisor: BigInt,
    },
}

impl IntegralSolution {
    pub fn is_solvable(&self) -> bool {
        matches!(self, IntegralSolution::Solvable(_))
    }
}

fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn from_i64(a: &[Vec<i64>]) -> Mat {
    a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

// Row op on A and U: row_i += q·row_j.
fn add_row(m: &mut Mat, i: usize, j: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = m[j].clone();
    for (x, y) in m[i].iter_mut().zip(src.iter()) {
        *x += q * y;
    }
}

// Column op: col_i += q·col_j.
fn add_col(m: &mut Mat, i: usize, j: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let v = q * &row[j];
        row[i] += v;
    }
}

fn swap_cols(m: &mut Mat, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

fn negate_row(m: &mut Mat, i: usize) {
    for x in m[i].iter_mut() {
        *x = -x.clone();
    }
}

pub fn smith_normal_form(a: &[Vec<i64>]) -> SmithForm {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut d = from_i64(a);
    let mut u = identity(rows);
    let mut v = identity(cols);

    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry in the remaining block as pivot.
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !d[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| d[i][j].abs().cmp(&d[k][l].abs()));
        let Some((pi, pj)) = pivot else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        let mut dirty = false;
        for i in t + 1..rows {
            let q = -(d[i][t].div_floor(&d[t][t]));
            add_row(&mut d, i, t, &q);
            add_row(&mut u, i, t, &q);
            dirty |= !d[i][t].is_zero();
        }
        for j in t + 1..cols {
            let q = -(d[t][j].div_floor(&d[t][t]));
            add_col(&mut d, j, t, &q);
            add_col(&mut v, j, t, &q);
            dirty |= !d[t][j].is_zero();
        }
        if dirty {
            // A smaller remainder appeared in row/column t; pick a new pivot.
            continue;
        }
        // Enforce divisibility: if some entry of the block is not a multiple
        // of the pivot, fold its row into row t and retry.
        let bad = (t + 1..rows)
            .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !d[i][j].is_multiple_of(&d[t][t]));
        if let Some((i, _)) = bad {
            let one = BigInt::one();
            add_row(&mut d, t, i, &one);
            add_row(&mut u, t, i, &one);
            continue;
        }
        if d[t][t].is_negative() {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
        t += 1;
    }
    let diagonal = (0..rows.min(cols)).map(|i| d[i][i].clone()).collect();
    SmithForm {
        u,
        v,
        diagonal,
        rows,
        cols,
    }
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().take_while(|x| !x.is_zero()).count()
    }

    pub fn cokernel(&self) -> Cokernel {
        let r = self.rank();
        Cokernel {
            free_rank: self.rows - r,
            torsion: self.diagonal[..r].iter().filter(|x| !x.is_one()).cloned().collect(),
        }
    }

    pub fn solve(&self, b: &[BigInt]) -> IntegralSolution {
        assert_eq!(b.len(), self.rows);
        let ub: Vec<BigInt> = self
            .u
            .iter()
            .map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum())
            .collect();
        let r = self.rank();
        let mut y = vec![BigInt::zero(); self.cols];
        for (i, val) in ub.iter().enumerate() {
            if i < r {
                let di = &self.diagonal[i];
                if !val.is_multiple_of(di) {
                    return IntegralSolution::Insolvable {
                        index: i,
                        residue: val.clone(),
                        divisor: di.clone(),
                    };
                }
                y[i] = val / di;
            } else if !val.is_zero() {
                return IntegralSolution::Insolvable {
                    index: i,
                    residue: val.clone(),
                    divisor: BigInt::zero(),
                };
            }
        }
        let x = self
            .v
            .iter()
            .map(|row| row.iter().zip(&y).map(|(p, q)| p * q).sum())
            .collect();
        IntegralSolution::Solvable(x)
    }
}

/// Decides `a·x = b` over the integers.
pub fn solve_integral(a: &[Vec<i64>], b: &[i64]) -> IntegralSolution {
    let b: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
    smith_normal_form(a).solve(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mul(a: &Mat, b: &Mat) -> Mat {
        let n = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|row| {
                (0..n)
                    .map(|j| row.iter().zip(b.iter()).map(|(x, br)| x * &br[j]).sum())
                    .collect()
            })
            .collect()
    }

    fn check_decomposition(a: &[Vec<i64>]) {
        let s = smith_normal_form(a);
        let d = mul(&mul(&s.u, &from_i64(a)), &s.v);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(x, &s.diagonal[i]);
                } else {
                    assert!(x.is_zero(), "off-diagonal entry at {i},{j}: {d:?}");
                }
            }
        }
        for w in s.diagonal.windows(2) {
            if !w[1].is_zero() {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        assert!(s.diagonal.iter().all(|x| !x.is_negative()));
    }

    #[test]
    fn cycle_laplacian_cokernel() {
        let c5: Vec<Vec<i64>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| {
                        if i == j {
                            -2
                        } else if (i + 1) % 5 == j || (j + 1) % 5 == i {
                            1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let s = smith_normal_form(&c5);
        check_decomposition(&c5);
        let ck = s.cokernel();
        assert_eq!(ck.free_rank, 1);
        assert_eq!(ck.torsion, vec![BigInt::from(5)]);
    }

    #[test]
    fn solvability_matches_divisibility() {
        let a = vec![vec![2, 0], vec![0, 3]];
        assert!(solve_integral(&a, &[4, 9]).is_solvable());
        assert!(!solve_integral(&a, &[1, 0]).is_solvable());
        match solve_integral(&[vec![2, 4]], &[6]) {
            IntegralSolution::Solvable(x) => {
                assert_eq!(&x[0] * 2 + &x[1] * 4, BigInt::from(6));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rectangular_and_zero() {
        check_decomposition(&[vec![0, 0, 0], vec![0, 0, 0]]);
        check_decomposition(&[vec![6, 4, 2], vec![3, 9, 12]]);
        check_decomposition(&[vec![0], vec![5], vec![10]]);
    }

    proptest! {
        #[test]
        fn decomposition_holds(entries in proptest::collection::vec(-9i64..=9, 12)) {
            let a: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            check_decomposition(&a);
        }

        #[test]
        fn solutions_solve(entries in proptest::collection::vec(-6i64..=6, 9),
                           x in proptest::collection::vec(-5i64..=5, 3)) {
            let a: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
            let b: Vec<i64> = a.iter().map(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
            match solve_integral(&a, &b) {
                IntegralSolution::Solvable(y) => {
                    for (row, bi) in a.iter().zip(&b) {
                        let lhs: BigInt = row.iter().zip(&y).map(|(p, q)| q * *p).sum();
                        prop_assert_eq!(lhs, BigInt::from(*bi));
                    }
                }
                other => prop_assert!(false, "image vector reported insolvable: {:?}", other),
            }
        }
    }
}
