//! Extremal eigenpairs of Hermitian positive semidefinite matrices.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    /// Largest size handled by a full Hermitian eigendecomposition.
    pub dense_limit: usize,
    /// Largest size accepted at all.
    pub budget: usize,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            dense_limit: 1024,
            budget: 4096,
            rel_tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenPath {
    Dense,
    Iterative,
}

#[derive(Clone, Debug)]
pub struct Extremal {
    pub min: f64,
    pub max: f64,
    pub min_vector: DVector<Complex64>,
    /// Full spectrum, ascending, when the dense path ran.
    pub spectrum: Option<Vec<f64>>,
    pub path: EigenPath,
}

pub fn extremal_eigen(g: &DMatrix<Complex64>, cfg: &EigenConfig) -> Result<Extremal> {
    let n = g.nrows();
    if n > cfg.budget {
        return Err(Error::EigenBudgetExceeded {
            atoms: n,
            budget: cfg.budget,
        });
    }
    if n == 0 {
        return Err(Error::SizeMismatch("empty matrix".into()));
    }
    if n <= cfg.dense_limit {
        Ok(dense(g))
    } else {
        Ok(iterative(g, cfg))
    }
}

fn dense(g: &DMatrix<Complex64>) -> Extremal {
    let eig = g.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..g.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lo = order[0];
    let hi = *order.last().expect("nonempty");
    Extremal {
        min: eig.eigenvalues[lo],
        max: eig.eigenvalues[hi],
        min_vector: eig.eigenvectors.column(lo).into_owned(),
        spectrum: Some(order.iter().map(|&i| eig.eigenvalues[i]).collect()),
        path: EigenPath::Dense,
    }
}

fn rayleigh(g: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
    (v.adjoint() * g * v)[(0, 0)].re
}

fn unit_start(n: usize) -> DVector<Complex64> {
    DVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0))
}

/// Power iteration for the largest eigenvalue.
fn power_max(g: &DMatrix<Complex64>, cfg: &EigenConfig) -> f64 {
    let mut v = unit_start(g.nrows());
    let mut theta = rayleigh(g, &v);
    for _ in 0..cfg.max_iter {
        let w = g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(norm, 0.0);
        let next = rayleigh(g, &v);
        let done = (next - theta).abs() <= cfg.rel_tol * next.abs();
        theta = next;
        if done {
            break;
        }
    }
    theta
}

/// Inverse iteration on `G - sigma I` with `sigma` below the spectrum.
fn inverse_min(
    chol: &Cholesky<Complex64, nalgebra::Dyn>,
    g: &DMatrix<Complex64>,
    start: DVector<Complex64>,
    cfg: &EigenConfig,
    iters: usize,
) -> (f64, DVector<Complex64>) {
    let mut v = start;
    let mut theta = rayleigh(g, &v);
    for _ in 0..iters {
        let w = chol.solve(&v);
        let norm = w.norm();
        v = w / Complex64::new(norm, 0.0);
        let next = rayleigh(g, &v);
        let done = (next - theta).abs() <= cfg.rel_tol * next.abs().max(f64::MIN_POSITIVE);
        theta = next;
        if done {
            break;
        }
    }
    (theta, v)
}

fn shifted_cholesky(
    g: &DMatrix<Complex64>,
    sigma: f64,
) -> Option<Cholesky<Complex64, nalgebra::Dyn>> {
    let mut s = g.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= Complex64::new(sigma, 0.0);
    }
    Cholesky::new(s)
}

fn iterative(g: &DMatrix<Complex64>, cfg: &EigenConfig) -> Extremal {
    let n = g.nrows();
    let max = power_max(g, cfg);
    let scale = max.max(f64::MIN_POSITIVE);
    // coarse estimate with a shift safely below zero
    let mut sigma = -1e-9 * scale;
    let chol = loop {
        match shifted_cholesky(g, sigma) {
            Some(c) => break c,
            None => sigma *= 10.0,
        }
    };
    let (coarse, v) = inverse_min(&chol, g, unit_start(n), cfg, 64);
    // refine with a shift just below the estimate, backing off on failure
    let mut gap = 1e-3 * coarse.abs() + 1e-9 * scale;
    let chol = loop {
        if let Some(c) = shifted_cholesky(g, coarse - gap) {
            break c;
        }
        gap *= 4.0;
    };
    let (min, min_vector) = inverse_min(&chol, g, v, cfg, cfg.max_iter);
    Extremal {
        min,
        max,
        min_vector,
        spectrum: None,
        path: EigenPath::Iterative,
    }
}
