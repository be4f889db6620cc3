use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::eigen::EigenConfig;
use super::{gram, report_from_gram, synthesis_matrix, FrameReport, FrequencySet, Provenance};
use crate::error::{Error, Result};
use crate::fourier::PointMasses;

/// Residuals below this fraction of the largest row norm count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GreedySelection {
    pub selected: FrequencySet,
    /// Positions of the selected frequencies in the pool, in selection order.
    pub indices: Vec<usize>,
    pub report: FrameReport,
}

/// Integer lattice `{0, .., side-1}^dim` in lexicographic order.
pub fn lattice_pool(dim: usize, side: usize) -> Result<FrequencySet> {
    let total = side
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Malformed("pool too large".into()))?;
    let freqs = (0..total)
        .map(|mut k| {
            let mut v = vec![0.0; dim];
            for c in v.iter_mut().rev() {
                *c = (k % side) as f64;
                k /= side;
            }
            v
        })
        .collect();
    FrequencySet::new(dim, freqs, Provenance::LatticePool)
}

/// Smallest eigenvalue of `diag(ev) + c c*` for ascending `ev`.
fn rank_one_min(ev: &[f64], c: &[f64]) -> f64 {
    let lo = ev[0];
    if ev.len() == 1 {
        return lo + c[0];
    }
    let hi = ev[1];
    if c[0] == 0.0 || hi <= lo {
        return lo;
    }
    let secular = |x: f64| 1.0 + ev.iter().zip(c).map(|(l, w)| w / (l - x)).sum::<f64>();
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if secular(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Index of the largest score, ties going to the lowest index.
fn argmax(scores: &[(usize, f64)]) -> Option<(usize, f64)> {
    scores.iter().fold(None, |best, &(i, s)| match best {
        Some((_, b)) if s <= b => best,
        _ => Some((i, s)),
    })
}

/// Selects `target` frequencies from `pool`: first by largest residual
/// against the span of the rows already chosen until the rank reaches the
/// atom count, then by the largest resulting smallest eigenvalue of
/// `Phi* Phi`.
pub fn greedy_frame_search<P: PointMasses + ?Sized>(
    m: &P,
    pool: &FrequencySet,
    target: usize,
    cfg: &EigenConfig,
) -> Result<GreedySelection> {
    if pool.is_empty() {
        return Err(Error::EmptyFrequencySet);
    }
    if pool.len() < target || target == 0 {
        return Err(Error::SizeMismatch(format!(
            "target {target} with a pool of {} frequencies",
            pool.len()
        )));
    }
    let atoms = m.len();
    if atoms > cfg.budget {
        return Err(Error::EigenBudgetExceeded {
            atoms,
            budget: cfg.budget,
        });
    }
    if target < atoms {
        log::warn!("target {target} is below the atom count {atoms}; the lower bound will be 0");
    }
    // column vectors v with Phi* Phi = sum v v*
    let phi = synthesis_matrix(m, pool);
    let vecs: Vec<DVector<Complex64>> = (0..pool.len()).map(|i| phi.row(i).adjoint()).collect();
    let scale = vecs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut taken = vec![false; pool.len()];
    let mut indices = Vec::with_capacity(target);

    let mut residual = vecs.clone();
    let goal = atoms.min(target);
    while indices.len() < goal {
        let scores: Vec<(usize, f64)> = (0..pool.len())
            .filter(|&i| !taken[i])
            .map(|i| (i, residual[i].norm()))
            .collect();
        let (pick, r) = argmax(&scores).expect("pool larger than target");
        if r <= RANK_TOL * scale {
            if target >= atoms {
                return Err(Error::PoolExhausted {
                    rank: indices.len(),
                    atoms,
                });
            }
            break;
        }
        let q = &residual[pick] / Complex64::new(r, 0.0);
        taken[pick] = true;
        indices.push(pick);
        residual.par_iter_mut().enumerate().for_each(|(i, v)| {
            if !taken[i] {
                let p = q.dotc(v);
                *v -= &q * p;
            }
        });
    }

    let mut g = DMatrix::<Complex64>::zeros(atoms, atoms);
    for &i in &indices {
        g += &vecs[i] * vecs[i].adjoint();
    }
    // rank-deficient leftovers when the pool cannot span are filled in pool order
    while indices.len() < target && indices.len() < atoms {
        let i = (0..pool.len())
            .find(|&i| !taken[i])
            .expect("pool larger than target");
        taken[i] = true;
        indices.push(i);
        g += &vecs[i] * vecs[i].adjoint();
    }
    while indices.len() < target {
        let eig = g.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..atoms).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let ev: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let u = DMatrix::from_fn(atoms, atoms, |r, c| eig.eigenvectors[(r, order[c])]);
        let ua = u.adjoint();
        let scores: Vec<(usize, f64)> = (0..pool.len())
            .into_par_iter()
            .filter(|&i| !taken[i])
            .map(|i| {
                let c: Vec<f64> = (&ua * &vecs[i]).iter().map(|z| z.norm_sqr()).collect();
                (i, rank_one_min(&ev, &c))
            })
            .collect();
        let (pick, _) = argmax(&scores).expect("pool larger than target");
        taken[pick] = true;
        indices.push(pick);
        g += &vecs[pick] * vecs[pick].adjoint();
    }

    let selected = pool.select(&indices, Provenance::Greedy);
    let phi_sel = synthesis_matrix(m, &selected);
    let report = report_from_gram(m, &phi_sel, &gram(&phi_sel), cfg)?;
    Ok(GreedySelection {
        selected,
        indices,
        report,
    })
}
