//! Small dense helpers for integer and rational matrices.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, to_f64, Rational, RationalPoint};

/// Square rational matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix {
    pub rows: Vec<Vec<Rational>>,
}

impl RatMatrix {
    pub fn from_ints(m: &[Vec<i64>]) -> Self {
        RatMatrix {
            rows: m
                .iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn identity(d: usize) -> Self {
        let mut rows = vec![vec![Rational::zero(); d]; d];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = Rational::one();
        }
        RatMatrix { rows }
    }

    pub fn apply(&self, p: &RationalPoint) -> RationalPoint {
        RationalPoint(
            self.rows
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(p.coords())
                        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        )
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        RatMatrix {
            rows: (0..d)
                .map(|j| (0..d).map(|i| self.rows[i][j].clone()).collect())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| to_f64(&self.rows[i][j]))
    }

    /// Exact determinant by Gaussian elimination over the rationals.
    pub fn det(&self) -> Rational {
        let mut a = self.rows.clone();
        let d = a.len();
        let mut det = Rational::one();
        for col in 0..d {
            let Some(piv) = (col..d).find(|&r| !a[r][col].is_zero()) else {
                return Rational::zero();
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            let p = a[col][col].clone();
            det *= &p;
            for r in col + 1..d {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &p;
                for c in col..d {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<RatMatrix> {
        let d = self.dim();
        let mut a = self.rows.clone();
        let mut inv = RatMatrix::identity(d).rows;
        for col in 0..d {
            let piv = (col..d)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::SingularMatrix)?;
            a.swap(piv, col);
            inv.swap(piv, col);
            let p = a[col][col].clone();
            for c in 0..d {
                a[col][c] /= &p;
                inv[col][c] /= &p;
            }
            for r in 0..d {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..d {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                    let w = &f * &inv[col][c];
                    inv[r][c] -= w;
                }
            }
        }
        Ok(RatMatrix { rows: inv })
    }

    /// Diagonal entries when the matrix is upper or lower triangular.
    pub fn triangular_diagonal(&self) -> Option<Vec<Rational>> {
        let d = self.dim();
        let upper = (0..d).all(|i| (0..i).all(|j| self.rows[i][j].is_zero()));
        let lower = (0..d).all(|i| (i + 1..d).all(|j| self.rows[i][j].is_zero()));
        (upper || lower).then(|| (0..d).map(|i| self.rows[i][i].clone()).collect())
    }

    /// `sigma * I` when the matrix is a scalar multiple of the identity.
    pub fn scalar_multiple(&self) -> Option<Rational> {
        let d = self.dim();
        let s = self.rows[0][0].clone();
        let ok = (0..d).all(|i| {
            (0..d).all(|j| {
                if i == j {
                    self.rows[i][j] == s
                } else {
                    self.rows[i][j].is_zero()
                }
            })
        });
        ok.then_some(s)
    }
}

/// Moduli of the (complex) eigenvalues of a real square matrix.
pub fn eigen_moduli(m: &DMatrix<f64>) -> Vec<f64> {
    m.complex_eigenvalues().iter().map(|z| z.norm()).collect()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    m.singular_values().max()
}

/// Upper bound on `||R^{-1}||`: exact for scalar matrices, otherwise the
/// float singular value inflated by a relative margin of 1e-12.
pub fn inverse_norm_bound(inv: &RatMatrix) -> NormBound {
    if let Some(s) = inv.scalar_multiple() {
        return NormBound::Exact(s.abs());
    }
    let v = spectral_norm(&inv.to_f64());
    NormBound::Float(v * (1.0 + 1e-12))
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormBound {
    Exact(Rational),
    Float(f64),
}

impl NormBound {
    pub fn value(&self) -> f64 {
        match self {
            NormBound::Exact(r) => to_f64(r),
            NormBound::Float(v) => *v,
        }
    }

    pub fn is_contractive(&self) -> bool {
        match self {
            NormBound::Exact(r) => r < &Rational::one(),
            NormBound::Float(v) => *v < 1.0,
        }
    }
}

/// Checked integer matrix-vector product.
pub fn int_mat_vec(m: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .try_fold(0i64, |acc, (a, b)| acc.checked_add(a.checked_mul(*b)?))
        })
        .collect()
}

pub fn transpose_int(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = m.len();
    (0..d).map(|j| (0..d).map(|i| m[i][j]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn inverse_and_det() {
        let m = RatMatrix::from_ints(&[vec![2, 1], vec![1, 3]]);
        assert_eq!(m.det(), int(5));
        let inv = m.inverse().unwrap();
        assert_eq!(inv.rows[0][0], rat(3, 5));
        assert_eq!(inv.rows[0][1], rat(-1, 5));
        let p = RationalPoint::from_ints(&[1, 2]);
        assert_eq!(inv.apply(&m.apply(&p)), p);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = RatMatrix::from_ints(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.det(), int(0));
        assert_eq!(m.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn triangular_and_scalar_detection() {
        let m = RatMatrix::from_ints(&[vec![1, 1], vec![0, 2]]);
        assert_eq!(m.triangular_diagonal(), Some(vec![int(1), int(2)]));
        assert_eq!(m.scalar_multiple(), None);
        let s = RatMatrix::from_ints(&[vec![3, 0], vec![0, 3]]);
        assert_eq!(s.scalar_multiple(), Some(int(3)));
        let full = RatMatrix::from_ints(&[vec![1, 2], vec![3, 1]]);
        assert_eq!(full.triangular_diagonal(), None);
    }

    #[test]
    fn norm_bound_exact_for_scalar() {
        let inv = RatMatrix::from_ints(&[vec![16]]).inverse().unwrap();
        assert_eq!(inverse_norm_bound(&inv), NormBound::Exact(rat(1, 16)));
        let inv = RatMatrix::from_ints(&[vec![2, 1], vec![0, 2]])
            .inverse()
            .unwrap();
        match inverse_norm_bound(&inv) {
            NormBound::Float(v) => assert!(v > 0.5 && v < 1.0),
            other => panic!("{other:?}"),
        }
    }
}
