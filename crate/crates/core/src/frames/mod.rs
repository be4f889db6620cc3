//! Frequency sets and frame bounds of exponential systems on discretized
//! measures.
//!
//! For point masses `w_x` at `x` and frequencies `Lambda`, the synthesis
//! matrix `Phi` has entries `sqrt(w_x) exp(-2 pi i <lambda, x>)`. The frame
//! bounds of `E(Lambda)` in `L^2(m)` are the extremal eigenvalues of the
//! atom-indexed matrix `Phi* Phi`.

pub mod eigen;
pub mod experiments;
pub mod greedy;
pub mod shear;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fourier::{cis_turns, PointMasses};
use crate::linalg::{int_mat_vec, transpose_int};
use crate::measures::{AtomBudget, DigitSystem};
use crate::rational::{phase_turns, PhaseCoord};

pub use eigen::{EigenConfig, EigenPath};

/// Two frequencies closer than this (max norm) are considered equal.
pub const FREQUENCY_RESOLUTION: f64 = 1e-12;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    JpSpectrum,
    LatticePool,
    Sheared,
    Greedy,
    User,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencySet {
    dim: usize,
    freqs: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl FrequencySet {
    pub fn new(dim: usize, freqs: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if let Some(f) = freqs.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
        if freqs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Malformed("frequencies must be finite".into()));
        }
        // sort a copy by the first coordinate so only a window needs checking
        let mut order: Vec<usize> = (0..freqs.len()).collect();
        order.sort_by(|&a, &b| freqs[a][0].total_cmp(&freqs[b][0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if freqs[j][0] - freqs[i][0] > FREQUENCY_RESOLUTION {
                    break;
                }
                let close = freqs[i]
                    .iter()
                    .zip(&freqs[j])
                    .all(|(a, b)| (a - b).abs() <= FREQUENCY_RESOLUTION);
                if close {
                    return Err(Error::DuplicateFrequency(i.min(j), i.max(j)));
                }
            }
        }
        Ok(FrequencySet {
            dim,
            freqs,
            provenance,
        })
    }

    pub fn from_scalars(values: &[f64], provenance: Provenance) -> Result<Self> {
        Self::new(1, values.iter().map(|&v| vec![v]).collect(), provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[Vec<f64>] {
        &self.freqs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Subset in the given index order.
    pub fn select(&self, idx: &[usize], provenance: Provenance) -> FrequencySet {
        FrequencySet {
            dim: self.dim,
            freqs: idx.iter().map(|&i| self.freqs[i].clone()).collect(),
            provenance,
        }
    }

    /// Image under a linear map of frequency space.
    pub fn map(
        &self,
        f: impl Fn(&[f64]) -> Vec<f64>,
        dim: usize,
        provenance: Provenance,
    ) -> Result<FrequencySet> {
        FrequencySet::new(dim, self.freqs.iter().map(|x| f(x)).collect(), provenance)
    }
}

/// True iff `(1/sqrt(#B)) [exp(2 pi i <R^-1 b, l>)]` is unitary within 1e-12.
pub fn hadamard_triple_check(matrix: &[Vec<i64>], b: &[Vec<i64>], l: &[Vec<i64>]) -> Result<bool> {
    if b.len() != l.len() {
        return Err(Error::SizeMismatch(format!(
            "#B = {} but #L = {}",
            b.len(),
            l.len()
        )));
    }
    let ds = DigitSystem::new(matrix.to_vec(), b.to_vec())?;
    if let Some(v) = l.iter().find(|v| v.len() != ds.dim()) {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            got: v.len(),
        });
    }
    let inv = ds.inverse()?;
    let n = b.len();
    let h = DMatrix::from_fn(n, n, |i, j| {
        let x = inv.apply(&crate::rational::RationalPoint::from_ints(&b[i]));
        let coords: Vec<PhaseCoord> = x.coords().iter().map(PhaseCoord::new).collect();
        let freq: Vec<f64> = l[j].iter().map(|&v| v as f64).collect();
        cis_turns(-phase_turns(&freq, &coords)) / (n as f64).sqrt()
    });
    let prod = h.adjoint() * &h;
    let id = DMatrix::<Complex64>::identity(n, n);
    Ok((prod - id).iter().all(|z| z.norm() <= UNITARY_TOL))
}

/// First `L` (lexicographic, containing 0, entries in `0..|det R|`) that
/// makes `(R, B, L)` a Hadamard triple.
pub fn find_hadamard_partner(matrix: &[Vec<i64>], b: &[Vec<i64>]) -> Result<Option<Vec<Vec<i64>>>> {
    let ds = DigitSystem::new(matrix.to_vec(), b.to_vec())?;
    let det = crate::rational::to_f64(&ds.rat_matrix().det())
        .abs()
        .round() as i64;
    let d = ds.dim();
    let side = det.max(1);
    let total = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > 1 << 16 {
        return Err(Error::AtomBudgetExceeded {
            requested: total,
            budget: 1 << 16,
        });
    }
    let cells: Vec<Vec<i64>> = (0..total as i64)
        .map(|mut k| {
            let mut v = vec![0; d];
            for c in v.iter_mut().rev() {
                *c = k % side;
                k /= side;
            }
            v
        })
        .collect();
    let need = b.len();
    if need == 0 || need > cells.len() {
        return Ok(None);
    }
    // combinations of the nonzero cells, lexicographic
    let mut pick: Vec<usize> = (1..need).collect();
    let rest = cells.len() - 1;
    for _ in 0..1 << 20 {
        let mut l = vec![cells[0].clone()];
        l.extend(pick.iter().map(|&i| cells[i].clone()));
        if hadamard_triple_check(matrix, b, &l)? {
            return Ok(Some(l));
        }
        if !next_combination(&mut pick, rest) {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Advances `pick` (strictly increasing values in `1..=n`) to the next
/// combination in lexicographic order.
fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    for i in (0..k).rev() {
        if pick[i] < n - (k - 1 - i) {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `{l_0 + R^t l_1 + ... + (R^t)^{n-1} l_{n-1}}`, sorted.
pub fn jp_spectrum(
    matrix: &[Vec<i64>],
    l: &[Vec<i64>],
    n: usize,
    budget: AtomBudget,
) -> Result<FrequencySet> {
    let d = matrix.len();
    if let Some(v) = l.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    budget.check((l.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX))?;
    let rt = transpose_int(matrix);
    let overflow = || Error::Malformed("spectrum coordinates overflow i64".into());
    let mut points: Vec<Vec<i64>> = vec![vec![0; d]];
    let mut scale: Vec<Vec<i64>> = l.to_vec();
    for k in 0..n {
        let mut next = Vec::with_capacity(points.len() * l.len());
        for p in &points {
            for s in &scale {
                next.push(
                    p.iter()
                        .zip(s)
                        .map(|(a, b)| a.checked_add(*b))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(overflow)?,
                );
            }
        }
        points = next;
        if k + 1 < n {
            scale = scale
                .iter()
                .map(|s| int_mat_vec(&rt, s).ok_or_else(overflow))
                .collect::<Result<_>>()?;
        }
    }
    points.sort();
    points.dedup();
    FrequencySet::new(
        d,
        points
            .into_iter()
            .map(|p| p.into_iter().map(|v| v as f64).collect())
            .collect(),
        Provenance::JpSpectrum,
    )
}

/// JP spectrum after checking the Hadamard property of `(R, B, L)`.
pub fn jp_spectrum_checked(
    ds: &DigitSystem,
    l: &[Vec<i64>],
    n: usize,
    budget: AtomBudget,
) -> Result<FrequencySet> {
    if !hadamard_triple_check(&ds.matrix, &ds.digits, l)? {
        return Err(Error::NotHadamard);
    }
    jp_spectrum(&ds.matrix, l, n, budget)
}

pub(crate) fn serialize_ratio<S: Serializer>(
    r: &Option<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_str("inf"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameReport {
    pub lower: f64,
    pub upper: f64,
    /// `upper / lower`; `None` stands for infinity.
    #[serde(serialize_with = "serialize_ratio")]
    pub ratio: Option<f64>,
    pub rank: usize,
    pub atoms: usize,
    pub frequencies: usize,
    /// Test function `f_x = u_x / sqrt(w_x)` attaining the lower bound, as
    /// `[re, im]` pairs.
    pub worst_vector: Vec<[f64; 2]>,
    pub eigen_path: EigenPath,
}

impl FrameReport {
    pub fn worst_coefficients(&self) -> Vec<Complex64> {
        self.worst_vector
            .iter()
            .map(|[a, b]| Complex64::new(*a, *b))
            .collect()
    }
}

fn check_inputs<P: PointMasses + ?Sized>(m: &P, lambda: &FrequencySet) -> Result<()> {
    if lambda.is_empty() {
        return Err(Error::EmptyFrequencySet);
    }
    if lambda.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: lambda.dim(),
        });
    }
    if m.is_empty() {
        return Err(Error::SizeMismatch("measure has no atoms".into()));
    }
    Ok(())
}

/// Synthesis matrix, rows indexed by frequency and columns by atom.
pub fn synthesis_matrix<P: PointMasses + ?Sized>(
    m: &P,
    lambda: &FrequencySet,
) -> DMatrix<Complex64> {
    let rows = lambda.len();
    let cols = m.len();
    let sw: Vec<f64> = (0..cols).map(|i| m.weight(i).sqrt()).collect();
    let data: Vec<Vec<Complex64>> = lambda
        .freqs()
        .par_iter()
        .map(|xi| {
            (0..cols)
                .map(|j| cis_turns(m.turns(j, xi)) * sw[j])
                .collect()
        })
        .collect();
    DMatrix::from_fn(rows, cols, |i, j| data[i][j])
}

pub fn gram(phi: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    phi.adjoint() * phi
}

fn numerical_rank(phi: &DMatrix<Complex64>, spectrum: Option<&[f64]>, tol: f64) -> usize {
    match spectrum {
        Some(s) => s.iter().filter(|&&v| v > tol).count(),
        None => {
            let qr = phi.clone().col_piv_qr();
            let r = qr.r();
            let diag: Vec<f64> = (0..r.nrows().min(r.ncols()))
                .map(|i| r[(i, i)].norm())
                .collect();
            let top = diag.first().copied().unwrap_or(0.0);
            diag.iter()
                .filter(|&&v| v * v > tol.max(top * top * 1e-24))
                .count()
        }
    }
}

pub fn frame_bounds<P: PointMasses + ?Sized>(
    m: &P,
    lambda: &FrequencySet,
    cfg: &EigenConfig,
) -> Result<FrameReport> {
    check_inputs(m, lambda)?;
    if m.len() > cfg.budget {
        return Err(Error::EigenBudgetExceeded {
            atoms: m.len(),
            budget: cfg.budget,
        });
    }
    let phi = synthesis_matrix(m, lambda);
    report_from_gram(m, &phi, &gram(&phi), cfg)
}

pub(crate) fn report_from_gram<P: PointMasses + ?Sized>(
    m: &P,
    phi: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
    cfg: &EigenConfig,
) -> Result<FrameReport> {
    let ex = eigen::extremal_eigen(g, cfg)?;
    let n = g.nrows();
    let upper = ex.max.max(0.0);
    let tol = 10.0 * n as f64 * f64::EPSILON * upper;
    let rank = numerical_rank(phi, ex.spectrum.as_deref(), tol);
    let lower = if rank < n || ex.min <= tol {
        0.0
    } else {
        ex.min
    };
    let worst_vector = (0..n)
        .map(|i| {
            let f = ex.min_vector[i] / m.weight(i).sqrt();
            [f.re, f.im]
        })
        .collect();
    Ok(FrameReport {
        lower,
        upper,
        ratio: (lower > 0.0).then(|| upper / lower),
        rank,
        atoms: n,
        frequencies: phi.nrows(),
        worst_vector,
        eigen_path: ex.path,
    })
}

/// `sum_lambda |(f dm)^(lambda)|^2 / ||f||^2_{L^2(m)}`.
pub fn bessel_quotient<P: PointMasses + ?Sized>(
    m: &P,
    lambda: &FrequencySet,
    f: &[Complex64],
) -> Result<f64> {
    check_inputs(m, lambda)?;
    if f.len() != m.len() {
        return Err(Error::SizeMismatch(format!(
            "{} coefficients for {} atoms",
            f.len(),
            m.len()
        )));
    }
    let norm: f64 = f
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm_sqr() * m.weight(i))
        .sum();
    if !(norm > 0.0) {
        return Err(Error::ZeroNormInput);
    }
    let num: f64 = lambda
        .freqs()
        .par_iter()
        .map(|xi| {
            f.iter()
                .enumerate()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .map(|(i, c)| c * m.weight(i) * cis_turns(m.turns(i, xi)))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(num / norm)
}
