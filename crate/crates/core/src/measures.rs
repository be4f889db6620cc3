//! Finite-level atomic approximations of self-affine measures.
//!
//! A [`DigitSystem`] `(R, B)` generates the equal-weight self-affine measure
//! `mu_{R,B} = delta_{R^-1 B} * delta_{R^-2 B} * ...`. Truncating the
//! convolution after `n` layers gives an [`AtomicMeasure`] with exact rational
//! atoms, which every other module consumes.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigen_moduli, inverse_norm_bound, NormBound, RatMatrix};
use crate::rational::{
    format_rational, rational_from_f64, rational_string, to_f64, Rational, RationalPoint,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the default atom budget.
pub const ATOM_BUDGET_ENV: &str = "FRACFRAME_ATOM_BUDGET";

const EXPANDING_MARGIN: f64 = 1e-9;

/// Upper limit on the number of atoms any single construction may produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomBudget(pub usize);

impl Default for AtomBudget {
    fn default() -> Self {
        AtomBudget(1 << 16)
    }
}

impl AtomBudget {
    pub fn from_env() -> Self {
        std::env::var(ATOM_BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(AtomBudget)
            .unwrap_or_default()
    }

    pub fn check(&self, requested: u128) -> Result<()> {
        if requested > self.0 as u128 {
            Err(Error::AtomBudgetExceeded {
                requested,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// Expanding integer matrix `R` with an integer digit set `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitSystem {
    pub matrix: Vec<Vec<i64>>,
    pub digits: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub expanding: bool,
    /// Decided by exact integer comparison (1x1 or triangular `R`).
    pub exact_check: bool,
    pub min_eigen_modulus: f64,
    /// Spectral radius of `R^{-1}`.
    pub inverse_spectral_radius: f64,
    pub digits_distinct: bool,
    pub digit_count: usize,
}

impl DigitSystem {
    /// Builds and validates a digit system.
    pub fn new(matrix: Vec<Vec<i64>>, digits: Vec<Vec<i64>>) -> Result<Self> {
        let ds = DigitSystem { matrix, digits };
        ds.validate()?;
        Ok(ds)
    }

    /// One-dimensional system `(N, {b_1, ..})`.
    pub fn scalar(n: i64, digits: &[i64]) -> Result<Self> {
        Self::new(vec![vec![n]], digits.iter().map(|&b| vec![b]).collect())
    }

    /// Parses the compact `N:b1,b2,...` form.
    pub fn parse_compact(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("expected N:b1,b2,... got {s:?}"));
        let (n, ds) = s.split_once(':').ok_or_else(bad)?;
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let digits = ds
            .split(',')
            .map(|d| d.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::scalar(n, &digits)
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    pub fn digit_points(&self) -> Vec<RationalPoint> {
        self.digits
            .iter()
            .map(|d| RationalPoint::from_ints(d))
            .collect()
    }

    pub fn rat_matrix(&self) -> RatMatrix {
        RatMatrix::from_ints(&self.matrix)
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        self.rat_matrix().inverse()
    }

    /// Largest digit norm `max_b |b|`.
    pub fn max_digit_norm(&self) -> f64 {
        self.digits
            .iter()
            .map(|d| {
                d.iter()
                    .map(|&x| (x as f64) * (x as f64))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn inverse_norm(&self) -> Result<NormBound> {
        Ok(inverse_norm_bound(&self.inverse()?))
    }

    fn check_shape(&self) -> Result<()> {
        let d = self.matrix.len();
        if d == 0 || self.matrix.iter().any(|r| r.len() != d) {
            return Err(Error::Malformed(
                "R must be a nonempty square matrix".into(),
            ));
        }
        if self.digits.is_empty() {
            return Err(Error::Malformed("digit set must be nonempty".into()));
        }
        if let Some(b) = self.digits.iter().find(|b| b.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.len(),
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        validate_digit_system(self)
    }

    /// Serialized form with schema version.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&DigitSystemWire {
            schema_version: SCHEMA_VERSION,
            matrix: self.matrix.clone(),
            digits: self.digits.clone(),
        })
        .expect("digit system serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: DigitSystemWire =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        if w.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion(w.schema_version));
        }
        Self::new(w.matrix, w.digits)
    }
}

#[derive(Serialize, Deserialize)]
struct DigitSystemWire {
    schema_version: u32,
    matrix: Vec<Vec<i64>>,
    digits: Vec<Vec<i64>>,
}

pub fn validate_digit_system(ds: &DigitSystem) -> Result<ValidationReport> {
    ds.check_shape()?;
    let r = ds.rat_matrix();
    if r.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let (min_mod, exact) = match r.triangular_diagonal() {
        Some(diag) => {
            let m = diag
                .iter()
                .map(|x| to_f64(x).abs())
                .fold(f64::INFINITY, f64::min);
            if diag.iter().any(|x| x.abs() <= Rational::one()) {
                return Err(Error::NonExpandingMatrix { modulus: m });
            }
            (m, true)
        }
        None => {
            let m = eigen_moduli(&r.to_f64())
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if m < 1.0 + EXPANDING_MARGIN {
                return Err(Error::NonExpandingMatrix { modulus: m });
            }
            (m, false)
        }
    };
    let mut seen = BTreeSet::new();
    for b in &ds.digits {
        if !seen.insert(b.clone()) {
            return Err(Error::DuplicateDigits(format!("{b:?}")));
        }
    }
    Ok(ValidationReport {
        dim: ds.dim(),
        expanding: true,
        exact_check: exact,
        min_eigen_modulus: min_mod,
        inverse_spectral_radius: 1.0 / min_mod,
        digits_distinct: true,
        digit_count: ds.digit_count(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub location: RationalPoint,
    pub weight: Rational,
}

/// Canonical finite weighted point set: distinct locations sorted
/// lexicographically, no zero weights, `total` equal to the weight sum.
///
/// A measure may carry a shared real `offset` (from an irrational
/// translation); the rational skeleton stays exact.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    total: Rational,
    offset: Option<Vec<f64>>,
}

impl AtomicMeasure {
    pub fn zero(dim: usize) -> Self {
        AtomicMeasure {
            dim,
            atoms: Vec::new(),
            total: Rational::zero(),
            offset: None,
        }
    }

    pub fn dirac(point: RationalPoint) -> Self {
        Self::from_atoms(point.dim(), [(point, Rational::one())]).expect("single atom")
    }

    /// Canonicalizes an arbitrary list of weighted points.
    pub fn from_atoms<I>(dim: usize, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (RationalPoint, Rational)>,
    {
        let mut map: BTreeMap<RationalPoint, Rational> = BTreeMap::new();
        for (p, w) in atoms {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if w < Rational::zero() {
                return Err(Error::Malformed(format!("negative weight at {p}")));
            }
            *map.entry(p).or_insert_with(Rational::zero) += w;
        }
        Ok(Self::from_map(dim, map, None))
    }

    fn from_map(
        dim: usize,
        map: BTreeMap<RationalPoint, Rational>,
        offset: Option<Vec<f64>>,
    ) -> Self {
        let atoms: Vec<Atom> = map
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(location, weight)| Atom { location, weight })
            .collect();
        let total = atoms
            .iter()
            .fold(Rational::zero(), |acc, a| acc + &a.weight);
        AtomicMeasure {
            dim,
            atoms,
            total,
            offset,
        }
    }

    /// Uniform probability measure on a set of points.
    pub fn uniform(dim: usize, points: &[RationalPoint]) -> Result<Self> {
        let distinct: BTreeSet<_> = points.iter().cloned().collect();
        if distinct.is_empty() {
            return Ok(Self::zero(dim));
        }
        let w = Rational::new(BigInt::one(), BigInt::from(distinct.len()));
        Self::from_atoms(dim, distinct.into_iter().map(|p| (p, w.clone())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn offset(&self) -> Option<&[f64]> {
        self.offset.as_deref()
    }

    pub fn locations(&self) -> impl Iterator<Item = &RationalPoint> {
        self.atoms.iter().map(|a| &a.location)
    }

    pub fn support(&self) -> BTreeSet<RationalPoint> {
        self.locations().cloned().collect()
    }

    /// Weight of the atom at `p` (zero when absent). Ignores the offset.
    pub fn weight_at(&self, p: &RationalPoint) -> Rational {
        self.atoms
            .binary_search_by(|a| a.location.cmp(p))
            .map(|i| self.atoms[i].weight.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Mass of a finite set of skeleton points.
    pub fn mass_on<'a, I>(&self, points: I) -> Rational
    where
        I: IntoIterator<Item = &'a RationalPoint>,
    {
        points
            .into_iter()
            .fold(Rational::zero(), |acc, p| acc + self.weight_at(p))
    }

    /// Restriction to a finite set of skeleton points.
    pub fn restrict(&self, set: &BTreeSet<RationalPoint>) -> AtomicMeasure {
        AtomicMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .filter(|a| set.contains(&a.location))
                .cloned()
                .collect(),
            total: Rational::zero(),
            offset: self.offset.clone(),
        }
        .recompute_total()
    }

    fn recompute_total(mut self) -> Self {
        self.total = self
            .atoms
            .iter()
            .fold(Rational::zero(), |acc, a| acc + &a.weight);
        self
    }

    /// Places this measure into `R^dim`, coordinates starting at `start`,
    /// all other coordinates zero.
    pub fn embed(&self, dim: usize, start: usize) -> Result<AtomicMeasure> {
        if start + self.dim > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: start + self.dim,
            });
        }
        let lift = |c: &[Rational]| {
            let mut v = vec![Rational::zero(); dim];
            v[start..start + c.len()].clone_from_slice(c);
            RationalPoint(v)
        };
        let offset = self.offset.as_ref().map(|o| {
            let mut v = vec![0.0; dim];
            v[start..start + o.len()].copy_from_slice(o);
            v
        });
        let mut m = Self::from_atoms(
            dim,
            self.atoms
                .iter()
                .map(|a| (lift(a.location.coords()), a.weight.clone())),
        )?;
        m.offset = offset;
        Ok(m)
    }

    /// Atom locations as doubles, offset included.
    pub fn float_locations(&self) -> Vec<Vec<f64>> {
        self.atoms
            .iter()
            .map(|a| {
                let mut v = a.location.to_f64();
                if let Some(o) = &self.offset {
                    v.iter_mut().zip(o).for_each(|(x, t)| *x += t);
                }
                v
            })
            .collect()
    }

    /// Exact coordinates of each atom with the offset folded in.
    pub fn exact_locations(&self) -> Result<Vec<RationalPoint>> {
        match &self.offset {
            None => Ok(self.locations().cloned().collect()),
            Some(o) => {
                let o = RationalPoint(
                    o.iter()
                        .map(|&t| rational_from_f64(t))
                        .collect::<Result<_>>()?,
                );
                Ok(self.locations().map(|p| p.add(&o)).collect())
            }
        }
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| to_f64(&a.weight)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("measure serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("measure serializes")
    }

    fn to_wire(&self) -> MeasureWire {
        MeasureWire {
            schema_version: SCHEMA_VERSION,
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomWire {
                    at: a.location.clone(),
                    w: a.weight.clone(),
                })
                .collect(),
            total: self.total.clone(),
            offset: self.offset.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: MeasureWire =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        if w.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion(w.schema_version));
        }
        let mut m = Self::from_atoms(w.dim, w.atoms.into_iter().map(|a| (a.at, a.w)))?;
        if m.total != w.total {
            return Err(Error::Malformed(format!(
                "total {} does not match atom weights {}",
                format_rational(&w.total),
                format_rational(&m.total)
            )));
        }
        if let Some(o) = &w.offset {
            if o.len() != w.dim {
                return Err(Error::DimensionMismatch {
                    expected: w.dim,
                    got: o.len(),
                });
            }
        }
        m.offset = w.offset;
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct AtomWire {
    at: RationalPoint,
    #[serde(with = "rational_string")]
    w: Rational,
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    schema_version: u32,
    dim: usize,
    atoms: Vec<AtomWire>,
    #[serde(with = "rational_string")]
    total: Rational,
    offset: Option<Vec<f64>>,
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        })
    } else {
        Ok(())
    }
}

/// Points `R^{-k} b` for `k = 1..=n`, one vector per layer.
pub(crate) fn digit_layers(ds: &DigitSystem, n: usize) -> Result<Vec<Vec<RationalPoint>>> {
    let inv = ds.inverse()?;
    let mut layer: Vec<RationalPoint> = ds.digit_points();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        layer = layer.iter().map(|p| inv.apply(p)).collect();
        out.push(layer.clone());
    }
    Ok(out)
}

fn word_count(base: usize, n: usize) -> u128 {
    (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

/// `mu_n = delta_{R^-1 B} * ... * delta_{R^-n B}`, canonicalized.
pub fn level_measure(ds: &DigitSystem, n: usize, budget: AtomBudget) -> Result<AtomicMeasure> {
    ds.validate()?;
    if n == 0 {
        return Err(Error::Malformed("level must be at least 1".into()));
    }
    budget.check(word_count(ds.digit_count(), n))?;
    let w = Rational::new(BigInt::one(), BigInt::from(ds.digit_count()));
    let mut acc = AtomicMeasure::dirac(RationalPoint::zero(ds.dim()));
    for layer in digit_layers(ds, n)? {
        let factor =
            AtomicMeasure::from_atoms(ds.dim(), layer.into_iter().map(|p| (p, w.clone())))?;
        acc = convolve(&acc, &factor, budget)?;
    }
    Ok(acc)
}

/// Level-`n` truncation of an attractor together with a certified radius:
/// every attractor point lies within `tail_radius` of some listed point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<RationalPoint>,
    pub tail_radius: f64,
}

impl PointCloud {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, RationalPoint::dim)
    }
}

/// `max|b| * ||R^-1||^(n+1) / (1 - ||R^-1||)`, or infinity when the norm
/// bound is not contractive.
pub fn tail_radius(ds: &DigitSystem, n: usize) -> Result<f64> {
    let norm = ds.inverse_norm()?;
    Ok(tail_from_norm(ds.max_digit_norm(), &norm, n))
}

pub(crate) fn tail_from_norm(max_b: f64, norm: &NormBound, n: usize) -> f64 {
    if !norm.is_contractive() {
        return f64::INFINITY;
    }
    if max_b == 0.0 {
        return 0.0;
    }
    let q = norm.value();
    // outward rounding margin so the radius stays an upper bound
    max_b * q.powi(n as i32 + 1) / (1.0 - q) * (1.0 + 1e-12)
}

pub fn attractor_points(ds: &DigitSystem, n: usize, budget: AtomBudget) -> Result<PointCloud> {
    let m = level_measure(ds, n, budget)?;
    Ok(PointCloud {
        points: m.locations().cloned().collect(),
        tail_radius: tail_radius(ds, n)?,
    })
}

pub fn convolve(a: &AtomicMeasure, b: &AtomicMeasure, budget: AtomBudget) -> Result<AtomicMeasure> {
    check_dim(a.dim, b.dim)?;
    budget.check(a.len() as u128 * b.len() as u128)?;
    let mut map = BTreeMap::new();
    for x in &a.atoms {
        for y in &b.atoms {
            *map.entry(x.location.add(&y.location))
                .or_insert_with(Rational::zero) += &x.weight * &y.weight;
        }
    }
    let offset = match (&a.offset, &b.offset) {
        (None, None) => None,
        (Some(o), None) | (None, Some(o)) => Some(o.clone()),
        (Some(p), Some(q)) => Some(p.iter().zip(q).map(|(x, y)| x + y).collect()),
    };
    Ok(AtomicMeasure::from_map(a.dim, map, offset))
}

/// Exact translation by a rational vector.
pub fn translate(m: &AtomicMeasure, t: &RationalPoint) -> Result<AtomicMeasure> {
    check_dim(m.dim, t.dim())?;
    Ok(AtomicMeasure {
        dim: m.dim,
        atoms: m
            .atoms
            .iter()
            .map(|a| Atom {
                location: a.location.add(t),
                weight: a.weight.clone(),
            })
            .collect(),
        total: m.total.clone(),
        offset: m.offset.clone(),
    })
}

/// Translation by a real vector, recorded in the shared offset.
pub fn translate_real(m: &AtomicMeasure, t: &[f64]) -> Result<AtomicMeasure> {
    check_dim(m.dim, t.len())?;
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::Malformed("translation must be finite".into()));
    }
    let mut out = m.clone();
    let off = match &m.offset {
        Some(o) => o.iter().zip(t).map(|(a, b)| a + b).collect(),
        None => t.to_vec(),
    };
    out.offset = if off.iter().all(|x| *x == 0.0) {
        None
    } else {
        Some(off)
    };
    Ok(out)
}

/// Sum of measures (not renormalized).
pub fn add(a: &AtomicMeasure, b: &AtomicMeasure) -> Result<AtomicMeasure> {
    check_dim(a.dim, b.dim)?;
    // the zero measure carries no offset information
    let offset = match (a.is_empty(), b.is_empty()) {
        (true, _) => b.offset.clone(),
        (_, true) => a.offset.clone(),
        _ if a.offset == b.offset => a.offset.clone(),
        _ => return Err(Error::OffsetMismatch),
    };
    let mut map: BTreeMap<RationalPoint, Rational> = BTreeMap::new();
    for atom in a.atoms.iter().chain(&b.atoms) {
        *map.entry(atom.location.clone())
            .or_insert_with(Rational::zero) += &atom.weight;
    }
    Ok(AtomicMeasure::from_map(a.dim, map, offset))
}

/// Mass of the closed Euclidean ball, decided in exact arithmetic (doubles
/// are converted to their exact dyadic values).
pub fn ball_mass(m: &AtomicMeasure, center: &[f64], radius: f64) -> Result<Rational> {
    check_dim(m.dim, center.len())?;
    let c = RationalPoint(
        center
            .iter()
            .map(|&x| rational_from_f64(x))
            .collect::<Result<_>>()?,
    );
    let r = rational_from_f64(radius)?;
    ball_mass_exact(m, &c, &r)
}

pub fn ball_mass_exact(
    m: &AtomicMeasure,
    center: &RationalPoint,
    radius: &Rational,
) -> Result<Rational> {
    check_dim(m.dim, center.dim())?;
    let r2 = radius * radius;
    let locs = m.exact_locations()?;
    Ok(m.atoms
        .iter()
        .zip(&locs)
        .filter(|(_, p)| p.sub(center).norm_sq() <= r2)
        .fold(Rational::zero(), |acc, (a, _)| acc + &a.weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn p1(n: i64, d: i64) -> RationalPoint {
        RationalPoint(vec![rat(n, d)])
    }

    fn m1(atoms: &[((i64, i64), (i64, i64))]) -> AtomicMeasure {
        AtomicMeasure::from_atoms(
            1,
            atoms.iter().map(|&((a, b), (c, d))| (p1(a, b), rat(c, d))),
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        let r = DigitSystem::scalar(4, &[0, 1]).unwrap().validate().unwrap();
        assert!(r.exact_check);
        assert_eq!(r.inverse_spectral_radius, 0.25);
        assert!(DigitSystem::scalar(16, &[0, 4]).is_ok());
        let e = DigitSystem::new(vec![vec![1, 1], vec![0, 2]], vec![vec![0, 0]]).unwrap_err();
        assert!(matches!(e, Error::NonExpandingMatrix { .. }));
    }

    #[test]
    fn validate_errors() {
        assert_eq!(
            DigitSystem::new(vec![vec![1, 2], vec![2, 4]], vec![vec![0, 0]]).unwrap_err(),
            Error::SingularMatrix
        );
        assert!(matches!(
            DigitSystem::scalar(4, &[0, 1, 0]).unwrap_err(),
            Error::DuplicateDigits(_)
        ));
        assert!(matches!(
            DigitSystem::scalar(-1, &[0]).unwrap_err(),
            Error::NonExpandingMatrix { .. }
        ));
        // rotation-like non-triangular, eigenvalues of modulus sqrt(2)
        let r = DigitSystem::new(vec![vec![1, -1], vec![1, 1]], vec![vec![0, 0], vec![1, 0]])
            .unwrap()
            .validate()
            .unwrap();
        assert!(!r.exact_check);
        assert!((r.min_eigen_modulus - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn compact_form() {
        let ds = DigitSystem::parse_compact("16:0,4").unwrap();
        assert_eq!(ds.matrix, vec![vec![16]]);
        assert_eq!(ds.digits, vec![vec![0], vec![4]]);
        assert!(DigitSystem::parse_compact("16").is_err());
    }

    #[test]
    fn level_measure_examples() {
        let ds = DigitSystem::scalar(4, &[0, 1]).unwrap();
        let m1_ = level_measure(&ds, 1, AtomBudget::default()).unwrap();
        assert_eq!(m1_, m1(&[((0, 1), (1, 2)), ((1, 4), (1, 2))]));
        let m2 = level_measure(&ds, 2, AtomBudget::default()).unwrap();
        assert_eq!(
            m2,
            m1(&[
                ((0, 1), (1, 4)),
                ((1, 16), (1, 4)),
                ((1, 4), (1, 4)),
                ((5, 16), (1, 4))
            ])
        );
        let dy = level_measure(
            &DigitSystem::scalar(2, &[0, 1]).unwrap(),
            3,
            AtomBudget::default(),
        )
        .unwrap();
        assert_eq!(dy.len(), 8);
        for (k, a) in dy.atoms().iter().enumerate() {
            assert_eq!(a.location, p1(k as i64, 8));
            assert_eq!(a.weight, rat(1, 8));
        }
        assert_eq!(dy.total(), &int(1));
    }

    #[test]
    fn level_measure_budget() {
        let ds = DigitSystem::scalar(4, &[0, 1]).unwrap();
        assert!(matches!(
            level_measure(&ds, 10, AtomBudget(512)),
            Err(Error::AtomBudgetExceeded {
                requested: 1024,
                ..
            })
        ));
    }

    #[test]
    fn attractor_examples() {
        let pc = attractor_points(
            &DigitSystem::scalar(4, &[0, 1]).unwrap(),
            2,
            AtomBudget::default(),
        )
        .unwrap();
        assert_eq!(pc.points, vec![p1(0, 1), p1(1, 16), p1(1, 4), p1(5, 16)]);
        assert!(pc.tail_radius >= 1.0 / 48.0 && pc.tail_radius < 1.0 / 48.0 * (1.0 + 1e-11));
        let pc = attractor_points(
            &DigitSystem::scalar(4, &[0]).unwrap(),
            5,
            AtomBudget::default(),
        )
        .unwrap();
        assert_eq!(pc.points, vec![p1(0, 1)]);
        assert_eq!(pc.tail_radius, 0.0);
        let pc = attractor_points(
            &DigitSystem::scalar(16, &[0, 4]).unwrap(),
            1,
            AtomBudget::default(),
        )
        .unwrap();
        assert_eq!(pc.points, vec![p1(0, 1), p1(1, 4)]);
        assert!(pc.tail_radius >= 1.0 / 60.0 && pc.tail_radius < 1.0 / 60.0 * (1.0 + 1e-11));
    }

    #[test]
    fn convolve_examples() {
        let half = m1(&[((0, 1), (1, 2)), ((1, 1), (1, 2))]);
        let c = convolve(&half, &half, AtomBudget::default()).unwrap();
        assert_eq!(
            c,
            m1(&[((0, 1), (1, 4)), ((1, 1), (1, 2)), ((2, 1), (1, 4))])
        );
        let delta = AtomicMeasure::dirac(RationalPoint::zero(1));
        assert_eq!(
            convolve(&delta, &half, AtomBudget::default()).unwrap(),
            half
        );
        let two = AtomicMeasure::dirac(RationalPoint::zero(2));
        assert!(matches!(
            convolve(&two, &half, AtomBudget::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            convolve(&half, &half, AtomBudget(3)),
            Err(Error::AtomBudgetExceeded { .. })
        ));
    }

    #[test]
    fn sixteen_adic_decomposition_small() {
        let nu = DigitSystem::scalar(16, &[0, 1]).unwrap();
        let la = DigitSystem::scalar(16, &[0, 4]).unwrap();
        let mu = DigitSystem::scalar(4, &[0, 1]).unwrap();
        for n in 1..=3 {
            let b = AtomBudget::default();
            let c = convolve(
                &level_measure(&nu, n, b).unwrap(),
                &level_measure(&la, n, b).unwrap(),
                b,
            )
            .unwrap();
            assert_eq!(c, level_measure(&mu, 2 * n, b).unwrap());
        }
    }

    #[test]
    fn translate_examples() {
        let m = level_measure(
            &DigitSystem::scalar(4, &[0, 1]).unwrap(),
            2,
            AtomBudget::default(),
        )
        .unwrap();
        assert_eq!(translate(&m, &RationalPoint::zero(1)).unwrap(), m);
        let d = AtomicMeasure::dirac(RationalPoint::zero(1));
        assert_eq!(
            translate(&d, &p1(3, 4)).unwrap(),
            AtomicMeasure::dirac(p1(3, 4))
        );
        let t = p1(-7, 3);
        assert_eq!(translate(&translate(&m, &t).unwrap(), &t.neg()).unwrap(), m);
        let r = translate_real(&m, &[2f64.sqrt()]).unwrap();
        assert_eq!(r.offset(), Some(&[2f64.sqrt()][..]));
        assert_eq!(translate_real(&r, &[-2f64.sqrt()]).unwrap(), m);
    }

    #[test]
    fn add_examples() {
        let b = AtomBudget::default();
        let mu4 = level_measure(&DigitSystem::scalar(4, &[0, 1]).unwrap(), 2, b).unwrap();
        let mu16 = level_measure(&DigitSystem::scalar(16, &[0, 1]).unwrap(), 1, b).unwrap();
        let s = add(&mu4, &translate(&mu16, &RationalPoint::zero(1)).unwrap()).unwrap();
        assert_eq!(s.len(), 4);
        // atoms 0 and 1/16 are shared
        assert_eq!(s.weight_at(&p1(0, 1)), rat(3, 4));
        assert_eq!(s.weight_at(&p1(1, 16)), rat(3, 4));
        assert_eq!(s.total(), &int(2));
        assert_eq!(add(&mu4, &AtomicMeasure::zero(1)).unwrap(), mu4);
        let shifted = translate_real(&mu16, &[0.3]).unwrap();
        assert_eq!(add(&mu4, &shifted).unwrap_err(), Error::OffsetMismatch);
    }

    #[test]
    fn ball_mass_examples() {
        let b = AtomBudget::default();
        let la = level_measure(&DigitSystem::scalar(16, &[0, 4]).unwrap(), 2, b).unwrap();
        assert_eq!(
            la.locations().cloned().collect::<Vec<_>>(),
            vec![p1(0, 1), p1(1, 64), p1(1, 4), p1(17, 64)]
        );
        assert_eq!(ball_mass(&la, &[0.0], 1.0 / 60.0).unwrap(), rat(1, 2));
        assert_eq!(ball_mass(&la, &[0.0], 10.0).unwrap(), int(1));
        let d = AtomicMeasure::dirac(RationalPoint::zero(1));
        assert_eq!(ball_mass(&d, &[1.0], 0.5).unwrap(), int(0));
        // closed ball: boundary atom counts
        assert_eq!(ball_mass(&la, &[0.0], 0.25).unwrap(), rat(3, 4));
    }

    #[test]
    fn json_roundtrip_preserves_exactness() {
        let m = level_measure(
            &DigitSystem::scalar(3, &[0, 2]).unwrap(),
            3,
            AtomBudget::default(),
        )
        .unwrap();
        let s = m.to_json();
        assert!(s.contains("\"2/27\""));
        assert_eq!(AtomicMeasure::from_json(&s).unwrap(), m);
        let ds = DigitSystem::scalar(16, &[0, 4]).unwrap();
        assert_eq!(DigitSystem::from_json(&ds.to_json()).unwrap(), ds);
        let tampered = s.replace("\"total\":\"1\"", "\"total\":\"2\"");
        assert!(AtomicMeasure::from_json(&tampered).is_err());
    }

    #[test]
    fn embed_places_coordinates() {
        let m = level_measure(
            &DigitSystem::scalar(4, &[0, 1]).unwrap(),
            1,
            AtomBudget::default(),
        )
        .unwrap();
        let e = m.embed(2, 1).unwrap();
        assert_eq!(
            e.atoms()[1].location,
            RationalPoint(vec![int(0), rat(1, 4)])
        );
    }
}
