//! Small dense matrices over `i64` and exact rational vectors.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::lattice::IntMatrix;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Short text form of a rational, `3`, `-1/2`.
pub fn qfmt(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn qvec_fmt(v: &[Q]) -> String {
    format!("({})", v.iter().map(qfmt).collect::<Vec<_>>().join(", "))
}

/// Dense `i64` matrix used for Weyl group actions on cocharacter lattices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<i64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        assert_eq!(data.len(), rows.len() * cols, "ragged rows");
        Mat { rows: rows.len(), cols, data }
    }

    /// Matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(rows: usize, cols: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<i64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o.data[k * o.cols + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn apply_q(&self, v: &[Q]) -> Vec<Q> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Q::zero(), |acc, j| acc + &v[j] * BigInt::from(self.get(i, j))))
            .collect()
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.rows, v.len(), "shape mismatch in row-vector product");
        (0..self.cols).map(|j| (0..self.rows).map(|i| v[i] * self.get(i, j)).sum()).collect()
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn pow(&self, e: usize) -> Mat {
        let mut out = Mat::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == i64::from(i == j)))
    }

    /// Smallest `k >= 1` with `self^k = 1`, searching up to `bound`.
    pub fn order(&self, bound: usize) -> Option<usize> {
        let mut p = self.clone();
        for k in 1..=bound {
            if p.is_identity() {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64(self.rows, self.cols, &self.data)
    }

    pub fn from_int_matrix(m: &IntMatrix) -> Option<Mat> {
        let rows = m.to_i64_rows()?;
        if rows.is_empty() {
            return Some(Mat::zeros(0, m.cols()));
        }
        Some(Mat::from_rows(&rows))
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Option<Mat> {
        let rm = QMat::from_mat(self);
        let inv = rm.inverse()?;
        let mut out = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = &inv.data[i][j];
                if !x.is_integer() {
                    return None;
                }
                out.set(i, j, x.to_integer().to_i64()?);
            }
        }
        Some(out)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(i64::to_string).collect();
            writeln!(f, "[{}]", r.join(" "))?;
        }
        Ok(())
    }
}

/// Dense rational matrix, only used for exact solves.
#[derive(Clone, Debug)]
pub struct QMat {
    pub data: Vec<Vec<Q>>,
}

impl QMat {
    pub fn from_mat(m: &Mat) -> Self {
        QMat { data: (0..m.rows()).map(|i| m.row(i).into_iter().map(qi).collect()).collect() }
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn det(&self) -> Q {
        let mut a = self.data.clone();
        let n = a.len();
        let mut det = Q::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else { return Q::zero() };
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det *= &a[k][k];
            for i in k + 1..n {
                let f = &a[i][k] / &a[k][k];
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        det
    }

    /// Solve `self * x = b`; `None` if singular.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        let n = self.n();
        let mut a: Vec<Vec<Q>> = self.data.iter().zip(b).map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        }).collect();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(p, k);
            let piv = a[k][k].clone();
            for x in a[k].iter_mut().skip(k) {
                *x /= &piv;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in k..=n {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        Some(a.into_iter().map(|r| r[n].clone()).collect())
    }

    pub fn inverse(&self) -> Option<QMat> {
        let n = self.n();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let e: Vec<Q> = (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
            cols.push(self.solve(&e)?);
        }
        Some(QMat { data: (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect() })
    }
}

pub fn qdot(a: &[i64], x: &[Q]) -> Q {
    a.iter().zip(x).fold(Q::zero(), |acc, (&ai, xi)| acc + xi * BigInt::from(ai))
}

pub fn to_q(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| qi(x)).collect()
}

pub fn max_abs(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a })
}

/// Serialize rationals as `"p/q"` strings.
pub fn ser_qvec<S: serde::Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(qfmt))
}

/// Serialize a rational as a `"p/q"` string.
pub fn ser_q<S: serde::Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&qfmt(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_signed_permutation() {
        let m = Mat::from_rows(&[vec![0, -1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        let inv = m.inverse_unimodular().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert_eq!(m.order(10), Some(6));
    }

    #[test]
    fn rational_solve() {
        let a = QMat::from_mat(&Mat::from_rows(&[vec![2, 1], vec![1, 3]]));
        let x = a.solve(&[qi(1), qi(2)]).unwrap();
        assert_eq!(x, vec![q(1, 5), q(3, 5)]);
        assert_eq!(a.det(), qi(5));
    }
}
