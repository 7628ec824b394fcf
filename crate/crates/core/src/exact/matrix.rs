use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense integer matrix, row-major, arbitrary precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("ragged rows: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::Shape {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-integer rows. All rows must have the same
    /// length; an empty slice gives the 0x0 matrix.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(MatrixError::Ragged {
                    row: i,
                    expected: cols,
                    got: r.len(),
                });
            }
            entries.extend(r.iter().map(|&v| BigInt::from(v)));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Matrix product, `None` on a shape mismatch.
    pub fn mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        if self.cols != other.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.entries[idx] += a * other.get(k, j);
                }
            }
        }
        Some(out)
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[i64]) -> Option<Vec<BigInt>> {
        if v.len() != self.cols {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v)
                        .map(|(a, &x)| a * BigInt::from(x))
                        .sum()
                })
                .collect(),
        )
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> Result<BigInt, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Basis of the right kernel `{x : M x = 0}` as primitive integer vectors,
    /// each scaled so that its last nonzero entry is positive.
    pub fn integer_kernel(&self) -> Vec<Vec<BigInt>> {
        use num_integer::Integer;
        use num_rational::BigRational;
        let mut a: Vec<Vec<BigRational>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| BigRational::from_integer(v.clone())).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..self.rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            let inv = a[r][c].recip();
            for v in a[r].iter_mut() {
                *v = &*v * &inv;
            }
            for i in 0..self.rows {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    let pr = a[r].clone();
                    for (v, pv) in a[i].iter_mut().zip(&pr) {
                        *v = &*v - &f * pv;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![BigRational::zero(); self.cols];
                x[f] = BigRational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    x[p] = -a[i][f].clone();
                }
                let den = x.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
                let mut v: Vec<BigInt> = x.iter().map(|q| (q * BigRational::from_integer(den.clone())).to_integer()).collect();
                let g = v.iter().fold(BigInt::zero(), |g, e| g.gcd(e));
                for e in v.iter_mut() {
                    *e = &*e / &g;
                }
                if v.iter().rev().find(|e| !e.is_zero()).is_some_and(|e| e.is_negative()) {
                    for e in v.iter_mut() {
                        *e = -&*e;
                    }
                }
                v
            })
            .collect()
    }

    pub fn is_upper_unitriangular(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                self.get(i, i).is_one() && (0..i).all(|j| self.get(i, j).is_zero())
            })
    }

    pub(crate) fn sparse_rows_i64(&self) -> Option<Vec<Vec<(usize, i64)>>> {
        use num_traits::ToPrimitive;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| v.to_i64().map(|x| (j, x)))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn sparse_rows_big(&self) -> Vec<Vec<(usize, BigInt)>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.clone()))
                    .collect()
            })
            .collect()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![7, 4]]).unwrap();
        assert_eq!(m.determinant().unwrap(), BigInt::from(1));
        let m = IntMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]]).unwrap();
        assert_eq!(m.determinant().unwrap(), BigInt::from(-5));
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(m.determinant().unwrap().is_zero());
    }

    #[test]
    fn kernel_of_dependent_columns() {
        let m = IntMatrix::from_rows(&[vec![1, 0, 1], vec![0, 2, 2]]).unwrap();
        let k = m.integer_kernel();
        assert_eq!(k, vec![vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)]]);
        assert!(IntMatrix::identity(3).integer_kernel().is_empty());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matches!(
            IntMatrix::from_rows(&[vec![1, 2], vec![3]]),
            Err(MatrixError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn product_with_identity() {
        let m = IntMatrix::from_rows(&[vec![1, -2, 3], vec![0, 4, 5]]).unwrap();
        assert_eq!(IntMatrix::identity(2).mul(&m).unwrap(), m);
        assert_eq!(m.mul(&IntMatrix::identity(3)).unwrap(), m);
        assert!(m.mul(&m).is_none());
    }
}
