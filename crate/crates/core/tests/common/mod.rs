//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use fracframe::measures::{AtomBudget, AtomicMeasure, DigitSystem};
use fracframe::rational::Rational;
use num_complex::Complex64;
use num_traits::ToPrimitive;

pub const BUDGET: AtomBudget = AtomBudget(1 << 16);

pub fn ds(n: i64, digits: &[i64]) -> DigitSystem {
    DigitSystem::scalar(n, digits).unwrap()
}

fn rat_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Atom locations and weights as doubles, computed without the library's
/// conversion helpers.
pub fn atoms_f64(m: &AtomicMeasure) -> (Vec<Vec<f64>>, Vec<f64>) {
    let off = m
        .offset()
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| vec![0.0; m.dim()]);
    m.atoms()
        .iter()
        .map(|a| {
            let p = a
                .location
                .coords()
                .iter()
                .zip(&off)
                .map(|(c, o)| rat_to_f64(c) + o)
                .collect();
            (p, rat_to_f64(&a.weight))
        })
        .unzip()
}

/// `G_xy = sqrt(w_x w_y) sum_lambda exp(2 pi i <lambda, x - y>)`.
pub fn gram(points: &[Vec<f64>], weights: &[f64], freqs: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for x in 0..n {
        for y in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for l in freqs {
                let ph: f64 = l
                    .iter()
                    .zip(points[x].iter().zip(&points[y]))
                    .map(|(a, (p, q))| a * p - a * q)
                    .sum();
                let ph = ph - ph.round();
                s += Complex64::from_polar(1.0, 2.0 * PI * ph);
            }
            g[x][y] = s * (weights[x] * weights[y]).sqrt();
        }
    }
    g
}

fn matvec(g: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    g.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn rayleigh(g: &[Vec<Complex64>], v: &[Complex64]) -> f64 {
    let w = matvec(g, v);
    v.iter()
        .zip(&w)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        / norm(v).powi(2)
}

fn start(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
        .collect()
}

/// Largest eigenvalue by plain power iteration.
pub fn power_max(g: &[Vec<Complex64>]) -> f64 {
    let mut v = start(g.len());
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut theta = 0.0;
    for _ in 0..1_000_000 {
        let w = matvec(g, &v);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        theta = rayleigh(g, &v);
        let resid: Vec<Complex64> = w.iter().zip(&v).map(|(a, b)| a - b * theta).collect();
        if norm(&resid) <= 1e-12 * theta.abs() {
            return theta;
        }
        v = w.iter().map(|z| z / nw).collect();
    }
    theta
}

/// Smallest eigenvalue by power iteration on `(B + 1) I - G`.
pub fn power_min(g: &[Vec<Complex64>], b: f64) -> f64 {
    let c = b + 1.0;
    let shifted: Vec<Vec<Complex64>> = g
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, z)| {
                    if i == j {
                        Complex64::new(c, 0.0) - z
                    } else {
                        -z
                    }
                })
                .collect()
        })
        .collect();
    c - power_max(&shifted)
}

/// Smallest eigenvalue by inverse iteration with a hand-written complex
/// Gaussian elimination.
pub fn inverse_min(g: &[Vec<Complex64>]) -> f64 {
    let n = g.len();
    let mut v = start(n);
    let mut theta = rayleigh(g, &v);
    for _ in 0..10_000 {
        let w = solve(g, &v);
        let nw = norm(&w);
        v = w.iter().map(|z| z / nw).collect();
        let next = rayleigh(g, &v);
        if (next - theta).abs() <= 1e-15 * next.abs().max(1e-300) {
            return next;
        }
        theta = next;
    }
    theta
}

fn solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| r.iter().copied().chain([*x]).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                let t = m[col][c];
                m[r][c] -= f * t;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// `(min, max)` eigenvalues of the reference Gram matrix.
pub fn oracle_bounds(points: &[Vec<f64>], weights: &[f64], freqs: &[Vec<f64>]) -> (f64, f64) {
    let g = gram(points, weights, freqs);
    // the shifted power route stalls on clustered small eigenvalues, so the
    // smallest one comes from inverse iteration
    (inverse_min(&g), power_max(&g))
}

pub struct Instance {
    pub name: String,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub freqs: Vec<Vec<f64>>,
    pub production: Box<dyn Fn(&fracframe::frames::EigenConfig) -> fracframe::frames::FrameReport>,
}

fn atomic_instance(name: String, m: AtomicMeasure, l: fracframe::frames::FrequencySet) -> Instance {
    let (points, weights) = atoms_f64(&m);
    let freqs = l.freqs().to_vec();
    let prep = fracframe::fourier::PreparedMeasure::new(&m);
    Instance {
        name,
        points,
        weights,
        freqs,
        production: Box::new(move |cfg| fracframe::frames::frame_bounds(&prep, &l, cfg).unwrap()),
    }
}

/// Every frame-bound instance with at most 64 atoms used across the suite.
pub fn small_instances() -> Vec<Instance> {
    use fracframe::frames::experiments::{axis_sum, packing_sum, rotated_sum};
    use fracframe::frames::greedy::{greedy_frame_search, lattice_pool};
    use fracframe::frames::shear::{transform_spectrum, BlockedLinearMap};
    use fracframe::frames::{jp_spectrum, EigenConfig, FrequencySet, Provenance};
    use fracframe::measures::{level_measure, translate};
    use fracframe::rational::{rat, RationalPoint};
    use rand::{Rng, SeedableRng};

    let mut out = Vec::new();
    for n in 1..=6 {
        out.push(atomic_instance(
            format!("jp mu4 level {n}"),
            level_measure(&ds(4, &[0, 1]), n, BUDGET).unwrap(),
            jp_spectrum(&[vec![4]], &[vec![0], vec![2]], n, BUDGET).unwrap(),
        ));
    }
    for n in 1..=3 {
        out.push(atomic_instance(
            format!("jp mu16 level {n}"),
            level_measure(&ds(16, &[0, 1]), n, BUDGET).unwrap(),
            jp_spectrum(&[vec![16]], &[vec![0], vec![8]], n, BUDGET).unwrap(),
        ));
    }
    for n in 1..=2 {
        let s = packing_sum(
            &ds(16, &[0, 1]),
            &ds(16, &[0, 4]),
            &RationalPoint::zero(1),
            n,
            BUDGET,
        )
        .unwrap();
        let m = s.rho.len();
        out.push(atomic_instance(
            format!("collinear lattice level {n}"),
            s.rho.clone(),
            lattice_pool(1, 2 * m).unwrap(),
        ));
        out.push(atomic_instance(
            format!("collinear jp level {n}"),
            s.rho,
            jp_spectrum(&[vec![4]], &[vec![0], vec![2]], 2 * n + 1, BUDGET).unwrap(),
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for i in 0..10 {
        let atoms = rng.gen_range(2..=24);
        let pts: Vec<(RationalPoint, fracframe::rational::Rational)> = (0..atoms)
            .map(|_| {
                (
                    RationalPoint(vec![rat(rng.gen_range(-60..60), 61)]),
                    rat(rng.gen_range(1..9), 1),
                )
            })
            .collect();
        let m = AtomicMeasure::from_atoms(1, pts).unwrap();
        let count = m.len() + rng.gen_range(0..8);
        let freqs: Vec<f64> = (0..count)
            .map(|k| k as f64 * 0.75 + rng.gen_range(0.0..0.5))
            .collect();
        out.push(atomic_instance(
            format!("random 1d #{i}"),
            m.clone(),
            FrequencySet::from_scalars(&freqs, Provenance::User).unwrap(),
        ));
        out.push(atomic_instance(
            format!("random 1d #{i} translated"),
            translate(&m, &RationalPoint(vec![rat(rng.gen_range(-50..50), 7)])).unwrap(),
            FrequencySet::from_scalars(&freqs, Provenance::User).unwrap(),
        ));
    }
    let base = axis_sum(4, BUDGET).unwrap();
    let prep = fracframe::fourier::PreparedMeasure::new(&base);
    let lx = jp_spectrum(&[vec![4]], &[vec![0], vec![2]], 4, BUDGET).unwrap();
    let ly = jp_spectrum(&[vec![16]], &[vec![0], vec![8]], 4, BUDGET).unwrap();
    let pool = FrequencySet::new(
        2,
        lx.freqs()
            .iter()
            .flat_map(|a| ly.freqs().iter().map(move |b| vec![a[0], b[0]]))
            .collect(),
        Provenance::JpSpectrum,
    )
    .unwrap();
    let sel = greedy_frame_search(&prep, &pool, 2 * base.len(), &EigenConfig::default())
        .unwrap()
        .selected;
    out.push(atomic_instance(
        "axis sum level 4".into(),
        base.clone(),
        sel.clone(),
    ));
    let t = BlockedLinearMap::rotation(30f64.to_radians());
    let a4 = t.a4()[(0, 0)];
    let lt = transform_spectrum(
        &sel.map(|l| vec![l[0], l[1] / a4], 2, Provenance::User)
            .unwrap(),
        &t,
    )
    .unwrap();
    let rot = rotated_sum(&base, &t).unwrap();
    out.push(Instance {
        name: "rotated sum level 4, 30 degrees".into(),
        points: rot.points.clone(),
        weights: rot.weights.clone(),
        freqs: lt.freqs().to_vec(),
        production: Box::new(move |cfg| fracframe::frames::frame_bounds(&rot, &lt, cfg).unwrap()),
    });
    out
}

/// Oracle bounds with the production rank convention: a smallest eigenvalue
/// within rounding of zero is reported as zero.
pub fn oracle_clamped(inst: &Instance) -> (f64, f64) {
    let (min, max) = oracle_bounds(&inst.points, &inst.weights, &inst.freqs);
    let tol = 10.0 * inst.points.len() as f64 * f64::EPSILON * max;
    (if min <= tol { 0.0 } else { min }, max)
}
