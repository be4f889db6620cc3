//! Packing-pair certificates, strong separation, and translational
//! singularity witnesses on exact rational skeletons.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::NormBound;
use crate::measures::{
    add, convolve, digit_layers, level_measure, tail_radius, translate, AtomBudget, AtomicMeasure,
    DigitSystem, PointCloud, SCHEMA_VERSION,
};
use crate::rational::{
    exact_sqrt, format_rational, rational_from_f64, rational_string, Rational, RationalPoint,
};

/// `{p - q}` over all pairs, deduplicated and sorted.
pub fn difference_set(p: &[RationalPoint], q: &[RationalPoint]) -> Result<Vec<RationalPoint>> {
    let mut out = BTreeSet::new();
    for a in p {
        for b in q {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch {
                    expected: a.dim(),
                    got: b.dim(),
                });
            }
            out.insert(a.sub(b));
        }
    }
    Ok(out.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PackingStatus {
    CertifiedPacking,
    CertifiedNotPacking,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PackingMethod {
    NormCriterion,
    FiniteLevelSeparation,
    DifferenceIntersection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateInputs {
    DigitSets {
        matrix: Vec<Vec<i64>>,
        b: Vec<Vec<i64>>,
        c: Vec<Vec<i64>>,
    },
    PointClouds {
        first: PointCloud,
        second: PointCloud,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// `D |R^-1| / (1 - |R^-1|)`; exact strings when the norm is exact.
    NormCriterion {
        d_squared: String,
        d: String,
        inverse_norm: String,
        bound: String,
        exact: bool,
    },
    /// A nonzero vector common to both difference sets.
    Collision { difference: RationalPoint },
    Separation {
        min_gap: f64,
        tail_radius_first: f64,
        tail_radius_second: f64,
        required_gap: f64,
        /// Differences inside this ball are not excluded by the finite check.
        residual_radius: f64,
        pairs_checked: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub schema_version: u32,
    pub status: PackingStatus,
    pub method: PackingMethod,
    pub inputs: CertificateInputs,
    pub evidence: Evidence,
}

impl PackingCertificate {
    pub fn is_packing(&self) -> bool {
        self.status == PackingStatus::CertifiedPacking
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn int_points(v: &[Vec<i64>]) -> Vec<RationalPoint> {
    v.iter().map(|p| RationalPoint::from_ints(p)).collect()
}

fn common_nonzero(a: &[RationalPoint], b: &[RationalPoint]) -> Option<RationalPoint> {
    let sb: BTreeSet<&RationalPoint> = b.iter().collect();
    a.iter().find(|p| !p.is_zero() && sb.contains(p)).cloned()
}

/// Sufficient criterion for `(K_{R,B}, K_{R,C})` to be a packing pair:
/// `(B-B) & (C-C) = {0}` and `D |R^-1| / (1 - |R^-1|) < 1` with
/// `D = max |(B-B) - (C-C)|`.
pub fn packing_norm_criterion(
    matrix: &[Vec<i64>],
    b: &[Vec<i64>],
    c: &[Vec<i64>],
) -> Result<PackingCertificate> {
    let sys_b = DigitSystem::new(matrix.to_vec(), b.to_vec())?;
    DigitSystem::new(matrix.to_vec(), c.to_vec())?;
    let inputs = CertificateInputs::DigitSets {
        matrix: matrix.to_vec(),
        b: b.to_vec(),
        c: c.to_vec(),
    };
    let bb = difference_set(&int_points(b), &int_points(b))?;
    let cc = difference_set(&int_points(c), &int_points(c))?;
    if let Some(d) = common_nonzero(&bb, &cc) {
        return Ok(PackingCertificate {
            schema_version: SCHEMA_VERSION,
            status: PackingStatus::CertifiedNotPacking,
            method: PackingMethod::DifferenceIntersection,
            inputs,
            evidence: Evidence::Collision { difference: d },
        });
    }
    let d_sq = difference_set(&bb, &cc)?
        .iter()
        .map(RationalPoint::norm_sq)
        .max()
        .unwrap_or_else(Rational::zero);
    let d_exact = exact_sqrt(&d_sq);
    let norm = sys_b.inverse_norm()?;
    let (bound_str, holds, exact) = match (&norm, &d_exact) {
        (NormBound::Exact(q), Some(d)) if q < &Rational::one() => {
            let bound = d * q / (Rational::one() - q);
            let holds = bound < Rational::one();
            (format_rational(&bound), holds, true)
        }
        (NormBound::Exact(q), Some(_)) if q >= &Rational::one() => ("inf".to_string(), false, true),
        _ => {
            let q = norm.value();
            if q >= 1.0 {
                ("inf".to_string(), false, false)
            } else {
                let d = crate::rational::to_f64(&d_sq).sqrt() * (1.0 + 4.0 * f64::EPSILON);
                let bound = d * q / (1.0 - q) * (1.0 + 4.0 * f64::EPSILON);
                (format!("{bound:e}"), bound < 1.0, false)
            }
        }
    };
    let evidence = Evidence::NormCriterion {
        d_squared: format_rational(&d_sq),
        d: d_exact
            .map(|d| format_rational(&d))
            .unwrap_or_else(|| format!("{:e}", crate::rational::to_f64(&d_sq).sqrt())),
        inverse_norm: match &norm {
            NormBound::Exact(q) => format_rational(q),
            NormBound::Float(v) => format!("{v:e}"),
        },
        bound: bound_str,
        exact,
    };
    Ok(PackingCertificate {
        schema_version: SCHEMA_VERSION,
        status: if holds {
            PackingStatus::CertifiedPacking
        } else {
            PackingStatus::Inconclusive
        },
        method: PackingMethod::NormCriterion,
        inputs,
        evidence,
    })
}

fn dist_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Finite-level packing certificate for two attractor truncations. Every
/// attractor difference lies within `2r` of a listed one, so separating all
/// listed pairs `(u, v) != (0, 0)` by more than `2(r1 + r2)` rules out a
/// common nonzero difference outside a ball of radius `2 min(r1, r2)`.
pub fn packing_certificate_finite_level(
    first: &PointCloud,
    second: &PointCloud,
) -> Result<PackingCertificate> {
    if !first.points.is_empty() && !second.points.is_empty() && first.dim() != second.dim() {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: second.dim(),
        });
    }
    let inputs = CertificateInputs::PointClouds {
        first: first.clone(),
        second: second.clone(),
    };
    let d1 = difference_set(&first.points, &first.points)?;
    let d2 = difference_set(&second.points, &second.points)?;
    if let Some(d) = common_nonzero(&d1, &d2) {
        return Ok(PackingCertificate {
            schema_version: SCHEMA_VERSION,
            status: PackingStatus::CertifiedNotPacking,
            method: PackingMethod::DifferenceIntersection,
            inputs,
            evidence: Evidence::Collision { difference: d },
        });
    }
    let (r1, r2) = (first.tail_radius, second.tail_radius);
    let required = 2.0 * (r1 + r2);
    let f1: Vec<Vec<f64>> = d1.iter().map(RationalPoint::to_f64).collect();
    let f2: Vec<Vec<f64>> = d2.iter().map(RationalPoint::to_f64).collect();
    let z1 = d1.iter().position(RationalPoint::is_zero);
    let z2 = d2.iter().position(RationalPoint::is_zero);
    let req_exact = if required.is_finite() {
        Some(rational_from_f64(required)?)
    } else {
        None
    };
    // (min gap, separated) per row, reduced in index order
    let rows: Vec<(f64, bool)> = (0..d1.len())
        .into_par_iter()
        .map(|i| {
            let mut min_gap = f64::INFINITY;
            let mut ok = true;
            for j in 0..d2.len() {
                if Some(i) == z1 && Some(j) == z2 {
                    continue;
                }
                let g = dist_f64(&f1[i], &f2[j]);
                min_gap = min_gap.min(g);
                if !ok || g > required * (1.0 + 1e-9) {
                    continue;
                }
                ok = match &req_exact {
                    Some(req) => d1[i].sub(&d2[j]).norm_sq() > req * req,
                    None => false,
                };
            }
            (min_gap, ok)
        })
        .collect();
    let min_gap = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let separated = rows.iter().all(|r| r.1);
    Ok(PackingCertificate {
        schema_version: SCHEMA_VERSION,
        status: if separated {
            PackingStatus::CertifiedPacking
        } else {
            PackingStatus::Inconclusive
        },
        method: PackingMethod::FiniteLevelSeparation,
        inputs,
        evidence: Evidence::Separation {
            min_gap,
            tail_radius_first: r1,
            tail_radius_second: r2,
            required_gap: required,
            residual_radius: 2.0 * r1.min(r2),
            pairs_checked: (d1.len() as u64) * (d2.len() as u64),
        },
    })
}

/// Re-derives a serialized certificate from its inputs and accepts it only
/// if every field matches.
pub fn verify_certificate(json: &str) -> Result<PackingCertificate> {
    let reject = |m: String| Error::CertificateRejected(m);
    let cert: PackingCertificate = serde_json::from_str(json).map_err(|e| reject(e.to_string()))?;
    if cert.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion(cert.schema_version));
    }
    let recomputed = match &cert.inputs {
        CertificateInputs::DigitSets { matrix, b, c } => packing_norm_criterion(matrix, b, c),
        CertificateInputs::PointClouds { first, second } => {
            packing_certificate_finite_level(first, second)
        }
    }
    .map_err(|e| reject(format!("inputs invalid: {e}")))?;
    // compared as text so that numerically equivalent spellings are refused
    if strip_whitespace(json) != strip_whitespace(&recomputed.to_json()) {
        return Err(reject("recomputed certificate differs".into()));
    }
    Ok(recomputed)
}

fn strip_whitespace(json: &str) -> String {
    let mut out = String::with_capacity(json.len());
    let (mut in_string, mut escaped) = (false, false);
    for ch in json.chars() {
        if in_string {
            out.push(ch);
            match (escaped, ch) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
        } else if !ch.is_whitespace() {
            in_string = ch == '"';
            out.push(ch);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SscStatus {
    CertifiedSsc,
    CertifiedOverlap,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SscReport {
    pub status: SscStatus,
    pub depth: usize,
    pub min_gap: f64,
    pub tail_radius: f64,
    /// Shared point of two distinct first-digit cylinders.
    pub collision: Option<RationalPoint>,
}

fn cylinder_points(ds: &DigitSystem, depth: usize) -> Result<Vec<(RationalPoint, usize)>> {
    let layers = digit_layers(ds, depth)?;
    let mut acc: Vec<(RationalPoint, usize)> = layers[0]
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    for layer in &layers[1..] {
        acc = acc
            .iter()
            .flat_map(|(p, c)| layer.iter().map(move |q| (p.add(q), *c)))
            .collect();
    }
    Ok(acc)
}

fn ssc_at_depth(ds: &DigitSystem, depth: usize) -> Result<SscReport> {
    let r = tail_radius(ds, depth)?;
    let pts = cylinder_points(ds, depth)?;
    let mut owner: BTreeMap<&RationalPoint, usize> = BTreeMap::new();
    for (p, c) in &pts {
        if let Some(&o) = owner.get(p) {
            if o != *c {
                return Ok(SscReport {
                    status: SscStatus::CertifiedOverlap,
                    depth,
                    min_gap: 0.0,
                    tail_radius: r,
                    collision: Some(p.clone()),
                });
            }
        } else {
            owner.insert(p, *c);
        }
    }
    let min_gap = if ds.dim() == 1 {
        // sorted sweep: the closest cross-cylinder pair is adjacent
        let v: Vec<(f64, usize)> = owner.iter().map(|(p, c)| (p.to_f64()[0], *c)).collect();
        v.windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min)
    } else {
        let v: Vec<(Vec<f64>, usize)> = pts.iter().map(|(p, c)| (p.to_f64(), *c)).collect();
        (0..v.len())
            .into_par_iter()
            .map(|i| {
                v[i + 1..]
                    .iter()
                    .filter(|w| w.1 != v[i].1)
                    .map(|w| dist_f64(&v[i].0, &w.0))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    };
    // margin absorbs rounding in the double distances
    let status = if min_gap > 2.0 * r * (1.0 + 1e-9) + 1e-12 * min_gap.abs().max(f64::MIN_POSITIVE)
    {
        SscStatus::CertifiedSsc
    } else {
        SscStatus::Inconclusive
    };
    Ok(SscReport {
        status,
        depth,
        min_gap,
        tail_radius: r,
        collision: None,
    })
}

/// Strong separation check, doubling the depth until certified or until the
/// next depth would exceed the atom budget.
pub fn ssc_certificate(ds: &DigitSystem, depth: usize, budget: AtomBudget) -> Result<SscReport> {
    ds.validate()?;
    if depth == 0 {
        return Err(Error::Malformed("depth must be at least 1".into()));
    }
    let count = |n: usize| {
        (ds.digit_count() as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX)
    };
    budget.check(count(depth))?;
    let mut n = depth;
    loop {
        let rep = ssc_at_depth(ds, n)?;
        if rep.status != SscStatus::Inconclusive || budget.check(count(2 * n)).is_err() {
            return Ok(rep);
        }
        n *= 2;
    }
}

/// Level-`n` truncations of `K_S` and `K_{S^c}` for `S` a subset of `1..=n`.
/// Both tail radii are the full-system tail bound.
pub fn split_by_index_set(
    ds: &DigitSystem,
    mask: &BTreeSet<usize>,
    n: usize,
    budget: AtomBudget,
) -> Result<(PointCloud, PointCloud)> {
    ds.validate()?;
    if let Some(k) = mask.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::Malformed(format!("index {k} outside 1..={n}")));
    }
    budget.check(
        (ds.digit_count() as u128)
            .checked_pow(mask.len().max(n - mask.len()) as u32)
            .unwrap_or(u128::MAX),
    )?;
    let layers = digit_layers(ds, n)?;
    let r = tail_radius(ds, n)?;
    let sums = |pick: &dyn Fn(usize) -> bool| {
        let mut acc: BTreeSet<RationalPoint> = [RationalPoint::zero(ds.dim())].into();
        for (k, layer) in layers.iter().enumerate() {
            if pick(k + 1) {
                acc = acc
                    .iter()
                    .flat_map(|p| layer.iter().map(move |q| p.add(q)))
                    .collect();
            }
        }
        acc.into_iter().collect::<Vec<_>>()
    };
    Ok((
        PointCloud {
            points: sums(&|k| mask.contains(&k)),
            tail_radius: r,
        },
        PointCloud {
            points: sums(&|k| !mask.contains(&k)),
            tail_radius: r,
        },
    ))
}

/// `F -> rho((F + t) & (E + t))` as an atomic measure: atoms `y - t` for the
/// atoms `y` of `rho` lying in `E + t`.
pub fn translation_overlap(
    rho: &AtomicMeasure,
    e: &BTreeSet<RationalPoint>,
    t: &RationalPoint,
) -> Result<AtomicMeasure> {
    if rho.offset().is_some() {
        return Err(Error::Malformed(
            "translation overlap needs a measure without real offset".into(),
        ));
    }
    let et: BTreeSet<RationalPoint> = e.iter().map(|p| p.add(t)).collect();
    translate(&rho.restrict(&et), &t.neg())
}

/// Extended nonnegative rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(r) => format_rational(r).serialize(s),
            Ratio::Infinite => "inf".serialize(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomRatio {
    pub at: RationalPoint,
    #[serde(with = "rational_string")]
    pub ratio: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    pub ac_part: Vec<AtomRatio>,
    #[serde(with = "rational_string")]
    pub singular_mass: Rational,
    pub sup_ratio: Ratio,
}

impl OverlapReport {
    /// `sum ratio * mu-weight` over the absolutely continuous atoms.
    pub fn ac_mass(&self, mu: &AtomicMeasure) -> Rational {
        self.ac_part.iter().fold(Rational::zero(), |acc, a| {
            acc + &a.ratio * mu.weight_at(&a.at)
        })
    }
}

/// Splits `omega` into its part on `mu`-atoms, with per-atom density
/// ratios, and its mass on `mu`-null locations.
pub fn radon_nikodym_atoms(omega: &AtomicMeasure, mu: &AtomicMeasure) -> Result<OverlapReport> {
    if omega.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: omega.dim(),
        });
    }
    let mut ac_part = Vec::new();
    let mut singular = Rational::zero();
    for a in omega.atoms() {
        let w = mu.weight_at(&a.location);
        if w.is_zero() {
            singular += &a.weight;
        } else {
            ac_part.push(AtomRatio {
                at: a.location.clone(),
                ratio: &a.weight / w,
            });
        }
    }
    let sup_ratio = if !singular.is_zero() {
        Ratio::Infinite
    } else {
        Ratio::Finite(
            ac_part
                .iter()
                .map(|a| a.ratio.clone())
                .max()
                .unwrap_or_else(Rational::zero),
        )
    };
    Ok(OverlapReport {
        ac_part,
        singular_mass: singular,
        sup_ratio,
    })
}

/// Finite-resolution singularity witness for `rho_t = nu * lambda + delta_t * nu`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityWitness {
    pub level: usize,
    pub t: RationalPoint,
    pub x: RationalPoint,
    pub candidates_tried: usize,
    pub packing_method: PackingMethod,
    /// `F = supp(nu_n) + x`.
    pub f_set: Vec<RationalPoint>,
    #[serde(with = "rational_string")]
    pub rho_mass_f: Rational,
    #[serde(with = "rational_string")]
    pub omega_mass_f: Rational,
    /// Contribution of the `delta_t * nu` component to `omega(F)`.
    #[serde(with = "rational_string")]
    pub omega_translate_part: Rational,
    /// Contribution of the `nu * lambda` component to `omega(F)`.
    #[serde(with = "rational_string")]
    pub omega_mu_leak: Rational,
}

/// Packing certificate for `(nu, lambda)`: the norm criterion when both share
/// the matrix, otherwise finite-level separation at level `n`.
pub fn pair_certificate(
    nu: &DigitSystem,
    la: &DigitSystem,
    n: usize,
    budget: AtomBudget,
) -> Result<PackingCertificate> {
    if nu.matrix == la.matrix {
        let c = packing_norm_criterion(&nu.matrix, &nu.digits, &la.digits)?;
        if c.is_packing() {
            return Ok(c);
        }
    }
    let a = crate::measures::attractor_points(nu, n, budget)?;
    let b = crate::measures::attractor_points(la, n, budget)?;
    let c = packing_certificate_finite_level(&a, &b)?;
    if c.is_packing() {
        Ok(c)
    } else {
        Err(Error::NotCertifiedPacking(format!(
            "{:?} at level {n}",
            c.status
        )))
    }
}

/// Searches the level-`n` points `x` of `K_lambda` in lexicographic order for
/// the first one with `(K_nu + t) & (K_nu + x)` empty on the skeleton.
pub fn singularity_witness(
    nu_ds: &DigitSystem,
    la_ds: &DigitSystem,
    t: &RationalPoint,
    n: usize,
    budget: AtomBudget,
) -> Result<SingularityWitness> {
    if nu_ds.dim() != la_ds.dim() || t.dim() != nu_ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu_ds.dim(),
            got: if t.dim() != nu_ds.dim() {
                t.dim()
            } else {
                la_ds.dim()
            },
        });
    }
    if nu_ds.digit_count() < 2 || la_ds.digit_count() < 2 {
        return Err(Error::NoWitnessFound {
            max_overlap: "1 (a component measure is a point mass)".into(),
        });
    }
    let cert = pair_certificate(nu_ds, la_ds, n, budget)?;
    let nu = level_measure(nu_ds, n, budget)?;
    let la = level_measure(la_ds, n, budget)?;
    let mu = convolve(&nu, &la, budget)?;
    let nu_t = translate(&nu, t)?;
    let rho = add(&mu, &nu_t)?;
    let nu_support = nu.support();
    let mut max_overlap = Rational::zero();
    for (i, x) in la.locations().enumerate() {
        // (delta_t * nu)(K_nu + x) on the skeleton
        let shift = t.sub(x);
        let back: Vec<RationalPoint> = nu_support.iter().map(|p| p.sub(&shift)).collect();
        let overlap = nu.mass_on(&back);
        if !overlap.is_zero() {
            max_overlap = max_overlap.max(overlap);
            continue;
        }
        let f: BTreeSet<RationalPoint> = nu_support.iter().map(|p| p.add(x)).collect();
        let rho_mass_f = rho.mass_on(&f);
        let e = mu.support();
        let moved: BTreeSet<RationalPoint> = f.iter().map(|p| p.add(&shift)).collect();
        let window: BTreeSet<RationalPoint> = e
            .iter()
            .map(|p| p.add(&shift))
            .filter(|p| moved.contains(p))
            .collect();
        let translate_part = nu_t.mass_on(&window);
        let leak = mu.mass_on(&window);
        let omega = translation_overlap(&rho, &e, &shift)?;
        let omega_mass_f = omega.mass_on(&f);
        debug_assert_eq!(omega_mass_f, &translate_part + &leak);
        return Ok(SingularityWitness {
            level: n,
            t: t.clone(),
            x: x.clone(),
            candidates_tried: i + 1,
            packing_method: cert.method,
            f_set: f.into_iter().collect(),
            rho_mass_f,
            omega_mass_f,
            omega_translate_part: translate_part,
            omega_mu_leak: leak,
        });
    }
    Err(Error::NoWitnessFound {
        max_overlap: format_rational(&max_overlap),
    })
}

/// `2^-n`-style reference mass: the weight of a single level-`n` atom of an
/// equal-weight system with `#B` digits.
pub fn atom_weight(ds: &DigitSystem, n: usize) -> Rational {
    Rational::new(
        1.into(),
        num_bigint::BigInt::from(ds.digit_count()).pow(n as u32),
    )
}
