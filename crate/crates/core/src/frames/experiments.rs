//! Finite-level experiments: Bessel degeneracy on packing sums, rotation
//! invariance of frame bounds, and cross-Bessel growth between Cantor-type
//! measures.

use std::collections::BTreeSet;
use std::io::Write;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use super::greedy::{greedy_frame_search, lattice_pool};
use super::shear::{shear_blocks, transform_spectrum, BlockedLinearMap};
use super::{
    frame_bounds, jp_spectrum, jp_spectrum_checked, serialize_ratio, EigenConfig, FrameReport,
    FrequencySet, Provenance,
};
use crate::error::{Error, Result};
use crate::fourier::{PreparedMeasure, RealMeasure};
use crate::measures::{
    add, ball_mass_exact, convolve, level_measure, translate, AtomBudget, AtomicMeasure,
    DigitSystem,
};
use crate::packing::{pair_certificate, PackingMethod};
use crate::rational::{format_rational, rat, to_f64, Rational, RationalPoint};

/// `convolve(nu_n, lambda_n) + translate(nu_n, t)` together with its parts.
#[derive(Clone, Debug)]
pub struct PackingSum {
    pub nu: AtomicMeasure,
    pub lambda: AtomicMeasure,
    pub conv: AtomicMeasure,
    pub rho: AtomicMeasure,
}

pub fn packing_sum(
    nu_ds: &DigitSystem,
    la_ds: &DigitSystem,
    t: &RationalPoint,
    n: usize,
    budget: AtomBudget,
) -> Result<PackingSum> {
    let nu = level_measure(nu_ds, n, budget)?;
    let lambda = level_measure(la_ds, n, budget)?;
    let conv = convolve(&nu, &lambda, budget)?;
    let rho = add(&conv, &translate(&nu, t)?)?;
    Ok(PackingSum {
        nu,
        lambda,
        conv,
        rho,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyRow {
    pub k: u64,
    /// `lambda_n(B(0, 1/k))`, exact.
    pub beta: String,
    pub beta_f64: f64,
    pub q: f64,
    pub q_over_beta: f64,
    pub inv_beta: f64,
    /// `q <= B_est * beta` with relative slack `1e-10`.
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyTable {
    pub level: usize,
    pub packing_method: PackingMethod,
    pub atoms: usize,
    pub frequencies: usize,
    pub b_est: f64,
    /// `sum_lambda |nu_n^(lambda)|^2`.
    pub nu_energy: f64,
    pub rows: Vec<DegeneracyRow>,
}

/// For each `k`, tests `1_{V_k}` with `V_k = K_nu + (K_lambda & B(0,1/k))`
/// against `Lambda` on the `nu * lambda` component of `rho`.
#[allow(clippy::too_many_arguments)]
pub fn degeneracy_experiment(
    nu_ds: &DigitSystem,
    la_ds: &DigitSystem,
    t: &RationalPoint,
    n: usize,
    lambda: &FrequencySet,
    k_list: &[u64],
    cfg: &EigenConfig,
    budget: AtomBudget,
) -> Result<DegeneracyTable> {
    let cert = pair_certificate(nu_ds, la_ds, n, budget)?;
    let sum = packing_sum(nu_ds, la_ds, t, n, budget)?;
    let b_est = frame_bounds(&PreparedMeasure::new(&sum.rho), lambda, cfg)?.upper;
    let nu_p = PreparedMeasure::new(&sum.nu);
    let nu_energy = super::bessel_quotient(&nu_p, lambda, &vec![Complex64::one(); sum.nu.len()])?;
    let conv_p = PreparedMeasure::new(&sum.conv);
    let origin = RationalPoint::zero(nu_ds.dim());
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        if k == 0 {
            return Err(Error::Malformed("k must be positive".into()));
        }
        let radius = rat(1, k as i64);
        let r2 = &radius * &radius;
        let near: Vec<&RationalPoint> = sum
            .lambda
            .locations()
            .filter(|p| p.norm_sq() <= r2)
            .collect();
        let v: BTreeSet<RationalPoint> = sum
            .nu
            .locations()
            .flat_map(|a| near.iter().map(move |b| a.add(b)))
            .collect();
        let f: Vec<Complex64> = sum
            .conv
            .locations()
            .map(|x| {
                if v.contains(x) {
                    Complex64::one()
                } else {
                    Complex64::zero()
                }
            })
            .collect();
        let beta: Rational = ball_mass_exact(&sum.lambda, &origin, &radius)?;
        let q = super::bessel_quotient(&conv_p, lambda, &f)?;
        let beta_f64 = to_f64(&beta);
        rows.push(DegeneracyRow {
            k,
            beta: format_rational(&beta),
            beta_f64,
            q,
            q_over_beta: q / beta_f64,
            inv_beta: 1.0 / beta_f64,
            within_bound: q <= b_est * beta_f64 * (1.0 + 1e-10),
        });
    }
    Ok(DegeneracyTable {
        level: n,
        packing_method: cert.method,
        atoms: sum.rho.len(),
        frequencies: lambda.len(),
        b_est,
        nu_energy,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolRule {
    /// `{0, 1, .., 2M-1}` for `M` atoms.
    Lattice,
    /// The level-`n+1` spectrum of the first Hadamard pair, `2M` frequencies
    /// when `M` matches its atom count at level `n`.
    JpDoubling,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseRow {
    pub n: usize,
    pub atoms: usize,
    pub pool_size: usize,
    pub lower: f64,
    pub upper: f64,
    #[serde(serialize_with = "serialize_ratio")]
    pub ratio: Option<f64>,
    pub rank: usize,
}

fn mu4() -> DigitSystem {
    DigitSystem::scalar(4, &[0, 1]).expect("valid")
}

fn mu16() -> DigitSystem {
    DigitSystem::scalar(16, &[0, 1]).expect("valid")
}

fn lambda16() -> DigitSystem {
    DigitSystem::scalar(16, &[0, 4]).expect("valid")
}

/// Frame bounds of the collinear sum `mu_4 + mu_16` (levels `2n` and `n`)
/// against a pool of twice its atom count, for each `n`.
pub fn collinear_collapse(
    levels: &[usize],
    rule: PoolRule,
    cfg: &EigenConfig,
    budget: AtomBudget,
) -> Result<Vec<CollapseRow>> {
    levels
        .iter()
        .map(|&n| {
            let sum = packing_sum(&mu16(), &lambda16(), &RationalPoint::zero(1), n, budget)?;
            let m = sum.rho.len();
            let pool = match rule {
                PoolRule::Lattice => lattice_pool(1, 2 * m)?,
                PoolRule::JpDoubling => {
                    jp_spectrum(&[vec![4]], &[vec![0], vec![2]], 2 * n + 1, budget)?
                }
            };
            let r = frame_bounds(&PreparedMeasure::new(&sum.rho), &pool, cfg)?;
            Ok(CollapseRow {
                n,
                atoms: m,
                pool_size: pool.len(),
                lower: r.lower,
                upper: r.upper,
                ratio: r.ratio,
                rank: r.rank,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationStatus {
    Ok,
    SingularA4,
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationRow {
    pub theta_deg: f64,
    pub status: RotationStatus,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub lower_deviation: Option<f64>,
    pub upper_deviation: Option<f64>,
    pub a4_condition: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationTable {
    pub level: usize,
    pub atoms: usize,
    pub pool_size: usize,
    pub base: FrameReport,
    pub rows: Vec<RotationRow>,
    pub collinear: Vec<CollapseRow>,
}

/// Axis-aligned `(mu_4 x delta) + (delta x mu_16)` at level `n`.
pub fn axis_sum(n: usize, budget: AtomBudget) -> Result<AtomicMeasure> {
    let a = level_measure(&mu4(), n, budget)?.embed(2, 0)?;
    let b = level_measure(&mu16(), n, budget)?.embed(2, 1)?;
    add(&a, &b)
}

/// Image of the axis sum when the second axis is carried by `t`.
pub fn rotated_sum(base: &AtomicMeasure, t: &BlockedLinearMap) -> Result<RealMeasure> {
    if base.dim() != 2 || t.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: base.dim().max(t.dim()),
        });
    }
    let mut m = RealMeasure::from_atomic(base);
    let (a2, a4) = (t.a2()[(0, 0)], t.a4()[(0, 0)]);
    for p in &mut m.points {
        if p[1] != 0.0 {
            *p = vec![a2 * p[1], a4 * p[1]];
        }
    }
    Ok(m)
}

/// Greedy frame for the axis sum from the product pool of the two JP
/// spectra, then for each angle the sheared spectrum of
/// `(l1, l2 / cos theta)` on the rotated sum.
pub fn rotation_experiment(
    n: usize,
    thetas_deg: &[f64],
    collinear_levels: &[usize],
    cfg: &EigenConfig,
    budget: AtomBudget,
) -> Result<RotationTable> {
    let base = axis_sum(n, budget)?;
    let lx = jp_spectrum_checked(&mu4(), &[vec![0], vec![2]], n, budget)?;
    let ly = jp_spectrum_checked(&mu16(), &[vec![0], vec![8]], n, budget)?;
    budget.check(lx.len() as u128 * ly.len() as u128)?;
    let pool = FrequencySet::new(
        2,
        lx.freqs()
            .iter()
            .flat_map(|a| ly.freqs().iter().map(move |b| vec![a[0], b[0]]))
            .collect(),
        Provenance::JpSpectrum,
    )?;
    let target = (2 * base.len()).min(pool.len());
    let sel = greedy_frame_search(&PreparedMeasure::new(&base), &pool, target, cfg)?;
    let (a0, b0) = (sel.report.lower, sel.report.upper);
    let mut rows = Vec::with_capacity(thetas_deg.len());
    for &deg in thetas_deg {
        let t = BlockedLinearMap::rotation(deg.to_radians());
        let data = match shear_blocks(&t) {
            Ok(d) => d,
            Err(Error::SingularA4 { .. }) => {
                rows.push(RotationRow {
                    theta_deg: deg,
                    status: RotationStatus::SingularA4,
                    lower: None,
                    upper: None,
                    lower_deviation: None,
                    upper_deviation: None,
                    a4_condition: None,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let a4 = data.a4[(0, 0)];
        let scaled = sel
            .selected
            .map(|l| vec![l[0], l[1] / a4], 2, Provenance::User)?;
        let lt = transform_spectrum(&scaled, &t)?;
        let r = frame_bounds(&rotated_sum(&base, &t)?, &lt, cfg)?;
        rows.push(RotationRow {
            theta_deg: deg,
            status: RotationStatus::Ok,
            lower: Some(r.lower),
            upper: Some(r.upper),
            lower_deviation: Some((r.lower - a0).abs()),
            upper_deviation: Some((r.upper - b0).abs()),
            a4_condition: Some(data.condition),
        });
    }
    Ok(RotationTable {
        level: n,
        atoms: base.len(),
        pool_size: pool.len(),
        base: sel.report,
        rows,
        collinear: collinear_collapse(collinear_levels, PoolRule::Lattice, cfg, budget)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossBesselRow {
    pub n: usize,
    pub dst_level: usize,
    pub frequencies: usize,
    pub atoms: usize,
    pub upper: f64,
}

/// Bessel constant of the level-`n` spectrum of `src` against `dst` at
/// level `n * depth_ratio`.
pub fn cross_bessel_experiment(
    src: &DigitSystem,
    src_l: &[Vec<i64>],
    dst: &DigitSystem,
    n_list: &[usize],
    depth_ratio: usize,
    cfg: &EigenConfig,
    budget: AtomBudget,
) -> Result<Vec<CrossBesselRow>> {
    if depth_ratio == 0 {
        return Err(Error::Malformed("depth ratio must be positive".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let lambda = jp_spectrum_checked(src, src_l, n, budget)?;
            let m = level_measure(dst, n * depth_ratio, budget)?;
            let r = frame_bounds(&PreparedMeasure::new(&m), &lambda, cfg)?;
            Ok(CrossBesselRow {
                n,
                dst_level: n * depth_ratio,
                frequencies: lambda.len(),
                atoms: m.len(),
                upper: r.upper,
            })
        })
        .collect()
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Malformed(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Malformed(e.to_string()))
}
