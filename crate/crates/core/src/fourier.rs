//! Fourier transforms of self-affine and atomic measures.
//!
//! Convention: `(f dm)^(xi) = sum_x f(x) w_x exp(-2 pi i <xi, x>)`. Phases on
//! rational atoms are reduced modulo one exactly before the exponential is
//! taken, so large frequencies do not lose the fractional part.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{convolve, AtomBudget, AtomicMeasure, DigitSystem};
use crate::packing::PackingCertificate;
use crate::rational::{phase_turns, CompensatedSum, PhaseCoord, Rational, RationalPoint};

const COMPENSATED_THRESHOLD: usize = 1 << 10;

/// `exp(-2 pi i turns)`.
pub fn cis_turns(turns: f64) -> Complex64 {
    let a = -2.0 * PI * turns;
    Complex64::new(a.cos(), a.sin())
}

/// Weighted point masses with evaluable phases.
pub trait PointMasses: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn weight(&self, i: usize) -> f64;
    /// `<xi, x_i>` modulo one.
    fn turns(&self, i: usize, xi: &[f64]) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }
}

/// An [`AtomicMeasure`] with its coordinates prepared for exact phase
/// reduction.
#[derive(Clone, Debug)]
pub struct PreparedMeasure {
    dim: usize,
    coords: Vec<Vec<PhaseCoord>>,
    weights: Vec<f64>,
    offset: Option<Vec<f64>>,
}

impl PreparedMeasure {
    pub fn new(m: &AtomicMeasure) -> Self {
        PreparedMeasure {
            dim: m.dim(),
            coords: m
                .atoms()
                .iter()
                .map(|a| a.location.coords().iter().map(PhaseCoord::new).collect())
                .collect(),
            weights: m.weights_f64(),
            offset: m.offset().map(<[f64]>::to_vec),
        }
    }
}

impl PointMasses for PreparedMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    fn turns(&self, i: usize, xi: &[f64]) -> f64 {
        let t = phase_turns(xi, &self.coords[i]);
        match &self.offset {
            None => t,
            Some(o) => {
                let s = t + xi.iter().zip(o).map(|(a, b)| a * b).sum::<f64>();
                s - s.floor()
            }
        }
    }
}

/// Point masses with floating-point locations, for images under
/// irrational linear maps.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMeasure {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl RealMeasure {
    pub fn from_atomic(m: &AtomicMeasure) -> Self {
        RealMeasure {
            dim: m.dim(),
            points: m.float_locations(),
            weights: m.weights_f64(),
        }
    }

    /// Image under the linear map `x -> t x`.
    pub fn push_forward(&self, t: &DMatrix<f64>) -> Result<RealMeasure> {
        if t.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.ncols(),
            });
        }
        Ok(RealMeasure {
            dim: t.nrows(),
            points: self
                .points
                .iter()
                .map(|p| {
                    (t * DVector::from_column_slice(p))
                        .iter()
                        .copied()
                        .collect()
                })
                .collect(),
            weights: self.weights.clone(),
        })
    }

    /// Concatenation of two atom lists (no merging).
    pub fn concat(&self, other: &RealMeasure) -> Result<RealMeasure> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(RealMeasure {
            dim: self.dim,
            points: self.points.iter().chain(&other.points).cloned().collect(),
            weights: self.weights.iter().chain(&other.weights).copied().collect(),
        })
    }
}

impl PointMasses for RealMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    fn turns(&self, i: usize, xi: &[f64]) -> f64 {
        let s: f64 = xi.iter().zip(&self.points[i]).map(|(a, b)| a * b).sum();
        s - s.floor()
    }
}

/// Single digit-layer factor `(1/#B) sum_b exp(-2 pi i <xi, b>)`.
pub fn mask_eval(digits: &[Vec<i64>], xi: &[f64]) -> Complex64 {
    if digits.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let s: Complex64 = digits
        .iter()
        .map(|b| {
            let c: Vec<PhaseCoord> = b
                .iter()
                .map(|&v| PhaseCoord::Small {
                    num: v.into(),
                    den: 1,
                })
                .collect();
            cis_turns(phase_turns(xi, &c))
        })
        .sum();
    s / digits.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifiedValue {
    pub re: f64,
    pub im: f64,
    /// Certified bound on `|value - true value|`.
    pub bound: f64,
    pub factors: usize,
}

impl CertifiedValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Upper envelope `||R^-n|| <= c q^floor(n/k)` with `q < 1`.
#[derive(Clone, Copy, Debug)]
struct Decay {
    c: f64,
    k: usize,
    q: f64,
}

impl Decay {
    fn new(ds: &DigitSystem) -> Result<Decay> {
        let inv = ds.inverse()?.to_f64();
        let mut pow = DMatrix::identity(ds.dim(), ds.dim());
        let mut c: f64 = 1.0;
        for k in 1..=64 {
            pow = &pow * &inv;
            let q = crate::linalg::spectral_norm(&pow) * (1.0 + 1e-12);
            if q < 1.0 {
                return Ok(Decay { c, k, q });
            }
            c = c.max(q);
        }
        Err(Error::NonExpandingMatrix { modulus: 1.0 })
    }

    fn norm_pow(&self, n: usize) -> f64 {
        self.c * self.q.powi((n / self.k) as i32)
    }

    /// Upper bound on `sum_{n >= 1} ||R^-n||`.
    fn series(&self) -> f64 {
        if self.k == 1 {
            self.q / (1.0 - self.q)
        } else {
            self.c * self.k as f64 / (1.0 - self.q)
        }
    }
}

fn transpose_inverse_apply(inv_t: &DMatrix<f64>, xi: &[f64]) -> Vec<f64> {
    (inv_t * DVector::from_column_slice(xi))
        .iter()
        .copied()
        .collect()
}

/// `mu_{R,B}^(xi)` as a truncated product of mask factors, with `N` chosen
/// so that the certified tail `2 pi max|b| |xi| ||R^-N|| sum ||R^-n||` is
/// below `eps`.
pub fn mu_hat(ds: &DigitSystem, xi: &[f64], eps: f64) -> Result<CertifiedValue> {
    ds.validate()?;
    if xi.len() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            got: xi.len(),
        });
    }
    if !(eps >= 64.0 * f64::EPSILON) {
        return Err(Error::ToleranceUnreachable(eps));
    }
    let decay = Decay::new(ds)?;
    let xi_norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lip = 2.0 * PI * ds.max_digit_norm() * xi_norm * decay.series();
    let inv_t = ds.inverse()?.transpose().to_f64();
    let mut value = Complex64::new(1.0, 0.0);
    let mut cur = xi.to_vec();
    let mut n = 0usize;
    loop {
        let rounding = 8.0 * f64::EPSILON * (n as f64 + 1.0);
        let tail = lip * decay.norm_pow(n);
        if tail + rounding < eps {
            return Ok(CertifiedValue {
                re: value.re,
                im: value.im,
                bound: tail + rounding,
                factors: n,
            });
        }
        if rounding >= eps || n > 100_000 {
            return Err(Error::ToleranceUnreachable(eps));
        }
        cur = transpose_inverse_apply(&inv_t, &cur);
        value *= mask_eval(&ds.digits, &cur);
        n += 1;
    }
}

/// Coefficients of the test function against which a measure is integrated.
#[derive(Clone, Debug)]
pub enum Window {
    Ones,
    /// Indicator of a finite set of skeleton points.
    Indicator(BTreeSet<RationalPoint>),
    /// Indicator of the closed ball, decided exactly on skeleton points.
    Ball {
        center: RationalPoint,
        radius: Rational,
    },
    /// One coefficient per atom, in atom order.
    Coefficients(Vec<Complex64>),
}

impl Window {
    /// Per-atom coefficients for `m`.
    pub fn coefficients(&self, m: &AtomicMeasure) -> Result<Vec<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self {
            Window::Ones => vec![one; m.len()],
            Window::Indicator(set) => m
                .locations()
                .map(|p| if set.contains(p) { one } else { zero })
                .collect(),
            Window::Ball { center, radius } => {
                if center.dim() != m.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: m.dim(),
                        got: center.dim(),
                    });
                }
                let r2 = radius * radius;
                m.exact_locations()?
                    .iter()
                    .map(|p| {
                        if p.sub(center).norm_sq() <= r2 {
                            one
                        } else {
                            zero
                        }
                    })
                    .collect()
            }
            Window::Coefficients(c) => {
                if c.len() != m.len() {
                    return Err(Error::SizeMismatch(format!(
                        "{} coefficients for {} atoms",
                        c.len(),
                        m.len()
                    )));
                }
                c.clone()
            }
        })
    }
}

fn weighted_sum<P: PointMasses + ?Sized>(p: &P, coef: &[Complex64], xi: &[f64]) -> Complex64 {
    if p.len() > COMPENSATED_THRESHOLD {
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        for (i, c) in coef.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let z = c * p.weight(i) * cis_turns(p.turns(i, xi));
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value())
    } else {
        coef.iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(i, c)| c * p.weight(i) * cis_turns(p.turns(i, xi)))
            .sum()
    }
}

/// `sum_x f(x) w_x exp(-2 pi i <xi, x>)`.
pub fn windowed_transform(m: &AtomicMeasure, window: &Window, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: xi.len(),
        });
    }
    let coef = window.coefficients(m)?;
    Ok(weighted_sum(&PreparedMeasure::new(m), &coef, xi))
}

/// Transform of `m` at many frequencies, in input order.
pub fn windowed_transform_grid(
    m: &AtomicMeasure,
    window: &Window,
    grid: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    if let Some(x) = grid.iter().find(|x| x.len() != m.dim()) {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: x.len(),
        });
    }
    let coef = window.coefficients(m)?;
    let prep = PreparedMeasure::new(m);
    Ok(grid
        .par_iter()
        .map(|xi| weighted_sum(&prep, &coef, xi))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub max_deviation: f64,
    /// Grid index attaining the maximum.
    pub argmax: usize,
    pub grid_size: usize,
    /// True when evaluated without a packing certificate.
    pub forced: bool,
}

/// Max over the grid of `|(1_{E+F} d(nu*lambda))^ - (1_E dnu)^ (1_F dlambda)^|`.
///
/// Refuses to run without a packing certificate unless `force` is set.
#[allow(clippy::too_many_arguments)]
pub fn factorization_check(
    nu: &AtomicMeasure,
    la: &AtomicMeasure,
    e: &BTreeSet<RationalPoint>,
    f: &BTreeSet<RationalPoint>,
    grid: &[Vec<f64>],
    certificate: Option<&PackingCertificate>,
    force: bool,
    budget: AtomBudget,
) -> Result<FactorizationReport> {
    if !force {
        match certificate {
            Some(c) if c.is_packing() => {}
            Some(c) => return Err(Error::NotCertifiedPacking(format!("status {:?}", c.status))),
            None => return Err(Error::NotCertifiedPacking("no certificate supplied".into())),
        }
    }
    let mu = convolve(nu, la, budget)?;
    let ef: BTreeSet<RationalPoint> = e
        .iter()
        .flat_map(|a| f.iter().map(move |b| a.add(b)))
        .collect();
    let lhs = windowed_transform_grid(&mu, &Window::Indicator(ef), grid)?;
    let a = windowed_transform_grid(nu, &Window::Indicator(e.clone()), grid)?;
    let b = windowed_transform_grid(la, &Window::Indicator(f.clone()), grid)?;
    let (mut max_deviation, mut argmax) = (0.0, 0);
    for i in 0..grid.len() {
        let d = (lhs[i] - a[i] * b[i]).norm();
        if d > max_deviation {
            max_deviation = d;
            argmax = i;
        }
    }
    Ok(FactorizationReport {
        max_deviation,
        argmax,
        grid_size: grid.len(),
        forced: certificate.is_none_or(|c| !c.is_packing()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub xi: Vec<f64>,
    pub re: f64,
    pub im: f64,
    pub certified_tail_bound: f64,
}

/// `mu_hat` over a grid, in input order.
pub fn mu_hat_grid(ds: &DigitSystem, grid: &[Vec<f64>], eps: f64) -> Result<Vec<GridRow>> {
    grid.par_iter()
        .map(|xi| {
            mu_hat(ds, xi, eps).map(|v| GridRow {
                xi: xi.clone(),
                re: v.re,
                im: v.im,
                certified_tail_bound: v.bound,
            })
        })
        .collect()
}

/// Atomic transform over a grid; the tail bound column is zero.
pub fn measure_grid(m: &AtomicMeasure, grid: &[Vec<f64>]) -> Result<Vec<GridRow>> {
    let v = windowed_transform_grid(m, &Window::Ones, grid)?;
    Ok(grid
        .iter()
        .zip(v)
        .map(|(xi, z)| GridRow {
            xi: xi.clone(),
            re: z.re,
            im: z.im,
            certified_tail_bound: 0.0,
        })
        .collect())
}

/// CSV with columns `xi_1..xi_d, re, im, certified_tail_bound`.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], dim: usize, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Malformed(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("xi_{i}")).collect();
    header.extend(["re", "im", "certified_tail_bound"].map(String::from));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec: Vec<String> = r.xi.iter().map(|x| format!("{x:e}")).collect();
        rec.extend([r.re, r.im, r.certified_tail_bound].map(|x| format!("{x:e}")));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Malformed(e.to_string()))
}

/// Evenly spaced 1D grid on `[lo, hi]` with `count` points.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<Vec<f64>> {
    match count {
        0 => Vec::new(),
        1 => vec![vec![lo]],
        _ => (0..count)
            .map(|i| vec![lo + (hi - lo) * i as f64 / (count - 1) as f64])
            .collect(),
    }
}
