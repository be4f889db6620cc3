//! Block decomposition of invertible linear maps and the induced
//! transformation of frequency sets.

use nalgebra::DMatrix;

use super::{FrequencySet, Provenance};
use crate::error::{Error, Result};

const DET_MARGIN: f64 = 1e-12;

/// An invertible `d x d` map split as `[[A1, A2], [A3, A4]]` with `A1` of
/// size `m x m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockedLinearMap {
    t: DMatrix<f64>,
    m: usize,
}

impl BlockedLinearMap {
    pub fn new(t: DMatrix<f64>, m: usize) -> Result<Self> {
        if t.nrows() != t.ncols() {
            return Err(Error::DimensionMismatch {
                expected: t.nrows(),
                got: t.ncols(),
            });
        }
        if m == 0 || m >= t.nrows() {
            return Err(Error::Malformed(format!(
                "block size {m} must lie in 1..{}",
                t.nrows()
            )));
        }
        if t.iter().any(|x| !x.is_finite()) || t.determinant().abs() <= DET_MARGIN {
            return Err(Error::NotInvertible);
        }
        Ok(BlockedLinearMap { t, m })
    }

    /// Planar rotation by `theta` radians, split 1 + 1.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        BlockedLinearMap {
            t: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
            m: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn split(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn a1(&self) -> DMatrix<f64> {
        self.t.view((0, 0), (self.m, self.m)).into_owned()
    }

    pub fn a2(&self) -> DMatrix<f64> {
        let k = self.dim() - self.m;
        self.t.view((0, self.m), (self.m, k)).into_owned()
    }

    pub fn a3(&self) -> DMatrix<f64> {
        let k = self.dim() - self.m;
        self.t.view((self.m, 0), (k, self.m)).into_owned()
    }

    pub fn a4(&self) -> DMatrix<f64> {
        let k = self.dim() - self.m;
        self.t.view((self.m, self.m), (k, k)).into_owned()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShearData {
    /// `A2 A4^{-1}`.
    pub c: DMatrix<f64>,
    pub a4: DMatrix<f64>,
    /// 2-norm condition number of `A4`.
    pub condition: f64,
}

pub fn shear_blocks(t: &BlockedLinearMap) -> Result<ShearData> {
    let a4 = t.a4();
    let det = a4.determinant();
    if det.abs() <= DET_MARGIN {
        return Err(Error::SingularA4 { det });
    }
    let inv = a4.clone().try_inverse().ok_or(Error::SingularA4 { det })?;
    let sv = a4.singular_values();
    let condition = sv.max() / sv.min();
    Ok(ShearData {
        c: t.a2() * inv,
        a4,
        condition,
    })
}

/// Maps `(l1, l2)` to `(l1, l2 - A4^{-t} A2^t l1)`.
pub fn transform_spectrum(lambda: &FrequencySet, t: &BlockedLinearMap) -> Result<FrequencySet> {
    if lambda.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            got: lambda.dim(),
        });
    }
    let data = shear_blocks(t)?;
    // A4^{-t} A2^t = (A2 A4^{-1})^t
    let ct = data.c.transpose();
    let m = t.split();
    lambda.map(
        |l| {
            let l1 = nalgebra::DVector::from_column_slice(&l[..m]);
            let shift = &ct * l1;
            let mut out = l.to_vec();
            for (o, s) in out[m..].iter_mut().zip(shift.iter()) {
                *o -= s;
            }
            out
        },
        t.dim(),
        Provenance::Sheared,
    )
}
