//! Acceptance report: one line per criterion.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{ds, oracle_clamped, small_instances, BUDGET};
use fracframe::fourier::{factorization_check, linear_grid, PreparedMeasure};
use fracframe::frames::experiments::{
    collinear_collapse, degeneracy_experiment, rotation_experiment, PoolRule, RotationStatus,
};
use fracframe::frames::{frame_bounds, jp_spectrum, EigenConfig, FrequencySet, Provenance};
use fracframe::measures::{convolve, level_measure, translate, translate_real, AtomicMeasure};
use fracframe::packing::{packing_norm_criterion, singularity_witness, Evidence, PackingStatus};
use fracframe::rational::{rat, Rational, RationalPoint};
use num_traits::One;
use rand::{Rng, SeedableRng};

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

/// Criterion sub-items that cannot hold as stated; see the project notes.
const RECORDED_DEVIATIONS: &[u32] = &[2, 8];

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn c1() -> Line {
    let (ok, dt) = timed(|| {
        (1..=6).all(|n| {
            let lhs = convolve(
                &level_measure(&ds(16, &[0, 1]), n, BUDGET).unwrap(),
                &level_measure(&ds(16, &[0, 4]), n, BUDGET).unwrap(),
                BUDGET,
            )
            .unwrap();
            lhs == level_measure(&ds(4, &[0, 1]), 2 * n, BUDGET).unwrap()
        })
    });
    Line {
        id: 1,
        pass: ok && dt < Duration::from_secs(5),
        detail: format!("convolution decomposition exact for n=1..6 in {dt:.2?}"),
    }
}

fn norm_bound(b: &[i64], c: &[i64], n: i64) -> (PackingStatus, String, String) {
    let col = |v: &[i64]| v.iter().map(|x| vec![*x]).collect::<Vec<_>>();
    let cert = packing_norm_criterion(&[vec![n]], &col(b), &col(c)).unwrap();
    match cert.evidence {
        Evidence::NormCriterion { d, bound, .. } => (cert.status, d, bound),
        Evidence::Collision { difference } => {
            (cert.status, "-".into(), format!("collision {difference}"))
        }
        e => panic!("unexpected evidence {e:?}"),
    }
}

fn c2() -> Line {
    let a = norm_bound(&[0, 1], &[0, 4], 16);
    let b = norm_bound(&[0, 1], &[0, 4], 10);
    let c = norm_bound(&[0, 1], &[0, 1], 16);
    let edge = norm_bound(&[0, 1], &[0, 4], 6);
    let ok16 = a.0 == PackingStatus::CertifiedPacking && a.1 == "5" && a.2 == "1/3";
    let ok10 = b.0 == PackingStatus::Inconclusive && b.2 == "1";
    let same = c.0 == PackingStatus::CertifiedNotPacking;
    Line {
        id: 2,
        pass: ok16 && ok10 && same,
        detail: format!(
            "N=16: {:?} D={} bound={} [{}]; N=10: {:?} bound={} [{}]; identical sets: {:?} [{}]; (N=6 gives {:?} bound={})",
            a.0,
            a.1,
            a.2,
            if ok16 { "ok" } else { "mismatch" },
            b.0,
            b.2,
            if ok10 { "ok" } else { "mismatch: expected Inconclusive with bound 1" },
            c.0,
            if same { "ok" } else { "mismatch" },
            edge.0,
            edge.2
        ),
    }
}

fn c3() -> Line {
    let cfg = EigenConfig::default();
    let (worst, dt) = timed(|| {
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            for (sys, l) in [((4, [0, 1]), [0, 2]), ((16, [0, 1]), [0, 8])] {
                let m =
                    PreparedMeasure::new(&level_measure(&ds(sys.0, &sys.1), n, BUDGET).unwrap());
                let lam =
                    jp_spectrum(&[vec![sys.0]], &[vec![l[0]], vec![l[1]]], n, BUDGET).unwrap();
                let r = frame_bounds(&m, &lam, &cfg).unwrap();
                worst = worst.max((r.lower - 1.0).abs()).max((r.upper - 1.0).abs());
            }
        }
        worst
    });
    Line {
        id: 3,
        pass: worst <= 1e-8 && dt < Duration::from_secs(10),
        detail: format!("max |A-1|, |B-1| = {worst:.2e} over n=1..8 for mu4 and mu16 in {dt:.2?}"),
    }
}

fn c4() -> Line {
    let (nu_ds, la_ds) = (ds(16, &[0, 1]), ds(16, &[0, 4]));
    let cert = packing_norm_criterion(&nu_ds.matrix, &nu_ds.digits, &la_ds.digits).unwrap();
    let nu = level_measure(&nu_ds, 4, BUDGET).unwrap();
    let la = level_measure(&la_ds, 4, BUDGET).unwrap();
    let grid = linear_grid(-400.0, 400.0, 200);
    let cyl = |m: &AtomicMeasure, d: i64| -> BTreeSet<RationalPoint> {
        let lo = rat(d, 16);
        m.locations()
            .filter(|p| p.0[0] >= lo && p.0[0] < &lo + rat(1, 16))
            .cloned()
            .collect()
    };
    let worst = [(0, 0), (0, 4), (1, 0), (1, 4)]
        .iter()
        .map(|&(a, b)| {
            factorization_check(
                &nu,
                &la,
                &cyl(&nu, a),
                &cyl(&la, b),
                &grid,
                Some(&cert),
                false,
                BUDGET,
            )
            .unwrap()
            .max_deviation
        })
        .fold(0.0, f64::max);
    Line {
        id: 4,
        pass: worst < 1e-10,
        detail: format!(
            "max factorization deviation {worst:.2e} over 200 frequencies, 4 cylinder pairs"
        ),
    }
}

fn c5() -> Line {
    let cfg = EigenConfig::default();
    let lam = jp_spectrum(&[vec![4]], &[vec![0], vec![2]], 4, BUDGET).unwrap();
    let t = degeneracy_experiment(
        &ds(16, &[0, 1]),
        &ds(16, &[0, 4]),
        &RationalPoint::zero(1),
        4,
        &lam,
        &[2, 8, 32, 128, 512],
        &cfg,
        BUDGET,
    )
    .unwrap();
    let bounded = t.rows.iter().all(|r| r.within_bound);
    let inv = |k: u64| t.rows.iter().find(|r| r.k == k).unwrap().inv_beta;
    let doubling = [(2, 32), (8, 128), (32, 512)]
        .iter()
        .all(|&(a, b)| inv(b) >= 2.0 * inv(a));
    let col = collinear_collapse(&[2, 3, 4, 5], PoolRule::Lattice, &cfg, BUDGET).unwrap();
    let lows: Vec<f64> = col.iter().map(|r| r.lower).collect();
    let monotone = lows.windows(2).all(|w| w[1] <= w[0]) && lows[3] < lows[0];
    let jp = collinear_collapse(&[2, 3, 4, 5], PoolRule::JpDoubling, &cfg, BUDGET).unwrap();
    Line {
        id: 5,
        pass: bounded && doubling && monotone,
        detail: format!(
            "q_k <= B_est beta_k: {bounded}; 1/beta over 16-adic scales {:?}: x2 {doubling}; lattice-pool A(n=2..5) = {:?} (ranks {:?} of {:?}), non-increasing: {monotone}; JP-pool B/A = {:?}",
            t.rows.iter().map(|r| r.inv_beta).collect::<Vec<_>>(),
            lows.iter().map(|a| format!("{a:.2e}")).collect::<Vec<_>>(),
            col.iter().map(|r| r.rank).collect::<Vec<_>>(),
            col.iter().map(|r| r.atoms).collect::<Vec<_>>(),
            jp.iter().map(|r| r.ratio.map(|x| x.round())).collect::<Vec<_>>()
        ),
    }
}

fn c6() -> Line {
    let (t, dt) = timed(|| {
        rotation_experiment(
            4,
            &[10.0, 30.0, 45.0, 60.0, 80.0, 90.0],
            &[],
            &EigenConfig::default(),
            BUDGET,
        )
        .unwrap()
    });
    let worst = t
        .rows
        .iter()
        .filter_map(|r| Some(r.lower_deviation?.max(r.upper_deviation?)))
        .fold(0.0, f64::max);
    let rest_ok = t.rows[..5]
        .iter()
        .all(|r| matches!(r.status, RotationStatus::Ok));
    let singular = matches!(t.rows[5].status, RotationStatus::SingularA4);
    Line {
        id: 6,
        pass: worst < 1e-8 && rest_ok && singular && dt < Duration::from_secs(30),
        detail: format!(
            "A(0)={:.6}, B(0)={:.6}; max deviation {worst:.2e} over 10..80 degrees; 90 degrees SingularA4: {singular}; {dt:.2?}",
            t.base.lower, t.base.upper
        ),
    }
}

fn c7() -> Line {
    let cfg = EigenConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let atoms = rng.gen_range(2..=64);
        let m = AtomicMeasure::from_atoms(
            1,
            (0..atoms).map(|_| {
                (
                    RationalPoint(vec![rat(rng.gen_range(-300..300), 89)]),
                    rat(rng.gen_range(1..6), 7),
                )
            }),
        )
        .unwrap();
        let l = FrequencySet::from_scalars(
            &(0..m.len() + rng.gen_range(0..6))
                .map(|k| k as f64 * 0.9 + rng.gen_range(0.0..0.3))
                .collect::<Vec<_>>(),
            Provenance::User,
        )
        .unwrap();
        let moved = if i % 2 == 0 {
            translate(&m, &RationalPoint(vec![rat(rng.gen_range(-999..999), 31)])).unwrap()
        } else {
            translate_real(&m, &[rng.gen_range(-20.0..20.0)]).unwrap()
        };
        let a = frame_bounds(&PreparedMeasure::new(&m), &l, &cfg).unwrap();
        let b = frame_bounds(&PreparedMeasure::new(&moved), &l, &cfg).unwrap();
        let scale = a.upper.max(1.0);
        worst = worst
            .max((a.upper - b.upper).abs() / scale)
            .max((a.lower - b.lower).abs() / scale);
    }
    Line {
        id: 7,
        pass: worst <= 1e-10,
        detail: format!("max bound change under translation {worst:.2e} (relative to max(B,1)) over 20 instances"),
    }
}

fn c8() -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 3..=6 {
        let w = singularity_witness(
            &ds(16, &[0, 1]),
            &ds(16, &[0, 4]),
            &RationalPoint::zero(1),
            n,
            BUDGET,
        )
        .unwrap();
        let bound = rat(1, 1 << n);
        let good = w.rho_mass_f <= bound && w.omega_mass_f == Rational::one();
        ok &= good;
        parts.push(format!(
            "n={n}: rho(F)={} omega(F)={} (translated-nu part {}, mu leak {})",
            w.rho_mass_f, w.omega_mass_f, w.omega_translate_part, w.omega_mu_leak
        ));
    }
    Line {
        id: 8,
        pass: ok,
        detail: parts.join("; "),
    }
}

fn c9() -> Line {
    let iterative = EigenConfig {
        dense_limit: 0,
        ..EigenConfig::default()
    };
    let insts = small_instances();
    let mut worst: f64 = 0.0;
    for inst in &insts {
        let (a, b) = oracle_clamped(inst);
        for cfg in [EigenConfig::default(), iterative] {
            let r = (inst.production)(&cfg);
            worst = worst.max((r.lower - a).abs().max((r.upper - b).abs()) / b.max(1.0));
        }
    }
    Line {
        id: 9,
        pass: worst <= 1e-8,
        detail: format!(
            "{} instances, dense and iterative paths, max deviation {worst:.2e}",
            insts.len()
        ),
    }
}

fn main() -> ExitCode {
    let lines = [c1(), c2(), c3(), c4(), c5(), c6(), c7(), c8(), c9()];
    let mut unexpected = 0;
    for l in &lines {
        let tag = match (l.pass, RECORDED_DEVIATIONS.contains(&l.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (recorded deviation)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {}: {tag}: {}", l.id, l.detail);
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
