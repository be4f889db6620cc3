use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fracframe::fourier::{linear_grid, measure_grid, mu_hat_grid, GridRow, PreparedMeasure};
use fracframe::frames::experiments::{
    cross_bessel_experiment, degeneracy_experiment, rotation_experiment,
};
use fracframe::frames::greedy::lattice_pool;
use fracframe::frames::{
    find_hadamard_partner, frame_bounds, jp_spectrum_checked, EigenConfig, FrameReport,
};
use fracframe::measures::{
    attractor_points, convolve, level_measure, AtomBudget, AtomicMeasure, DigitSystem,
    SCHEMA_VERSION,
};
use fracframe::packing::{
    packing_certificate_finite_level, packing_norm_criterion, singularity_witness,
    verify_certificate, PackingStatus,
};
use fracframe::rational::{format_rational, parse_rational, to_f64, RationalPoint};
use fracframe::Error;
use serde::Serialize;

use crate::args::*;
use crate::output::{csv_string, Sink};

const DEMONSTRATION: &str =
    "mechanism demonstration (finite level; not a proof of the infinite statement)";

#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Computed, and the answer is negative.
    Negative(String),
}

struct Ctx {
    budget: AtomBudget,
    eigen: EigenConfig,
    format: Format,
    sink: Sink,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    resolved_budget: usize,
    invocation: &'a Cli,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        // a second call in one process keeps the first pool, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let budget = g
        .budget
        .map(AtomBudget)
        .unwrap_or_else(AtomBudget::from_env);
    if let Some(path) = &g.manifest {
        let m = Manifest {
            tool: "fracframe",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            resolved_budget: budget.0,
            invocation: cli,
        };
        fs::write(path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("cannot write manifest {}", path.display()))?;
    }
    let ctx = Ctx {
        budget,
        eigen: EigenConfig {
            budget: g.eigen_budget,
            ..EigenConfig::default()
        },
        format: g.format,
        sink: Sink::new(g.out.as_deref()),
    };
    match &cli.command {
        Command::Measure(c) => measure(&ctx, c),
        Command::Ft(c) => ft(&ctx, c),
        Command::Packing(c) => packing(&ctx, c),
        Command::Frame(c) => frame(&ctx, c),
        Command::Exp(c) => exp(&ctx, c),
        Command::Verify(c) => verify(&ctx, c),
    }
}

/// `N:b1,b2,..` or a path to a JSON digit system.
pub fn parse_system(s: &str) -> Result<DigitSystem> {
    if s.contains(':') {
        return Ok(DigitSystem::parse_compact(s)?);
    }
    let text = fs::read_to_string(s).with_context(|| format!("cannot read digit system {s}"))?;
    Ok(DigitSystem::from_json(&text)?)
}

fn parse_point(s: &str) -> Result<RationalPoint> {
    Ok(RationalPoint(
        s.split(',')
            .map(|c| parse_rational(c.trim()))
            .collect::<fracframe::Result<_>>()?,
    ))
}

fn read_measure(p: &Path) -> Result<AtomicMeasure> {
    let text =
        fs::read_to_string(p).with_context(|| format!("cannot read measure {}", p.display()))?;
    Ok(AtomicMeasure::from_json(&text)?)
}

fn measure_csv(m: &AtomicMeasure) -> String {
    let mut s: Vec<String> = (1..=m.dim()).map(|i| format!("x_{i}")).collect();
    s.extend(["weight".into(), "weight_f64".into()]);
    let mut out = s.join(",") + "\n";
    for a in m.atoms() {
        let mut row: Vec<String> = a.location.coords().iter().map(format_rational).collect();
        row.push(format_rational(&a.weight));
        row.push(format!("{:e}", to_f64(&a.weight)));
        out += &(row.join(",") + "\n");
    }
    out
}

fn emit_measure(ctx: &Ctx, m: &AtomicMeasure) -> Result<Outcome> {
    match ctx.format {
        Format::Json => ctx.sink.text(&(m.to_json_pretty() + "\n"))?,
        Format::Csv => ctx.sink.text(&measure_csv(m))?,
    }
    Ok(Outcome::Success)
}

fn measure(ctx: &Ctx, c: &MeasureCmd) -> Result<Outcome> {
    let m = match c {
        MeasureCmd::Build { system, level } => {
            level_measure(&parse_system(system)?, *level, ctx.budget)?
        }
        MeasureCmd::Convolve { first, second } => {
            convolve(&read_measure(first)?, &read_measure(second)?, ctx.budget)?
        }
    };
    emit_measure(ctx, &m)
}

fn emit_grid(ctx: &Ctx, rows: &[GridRow], dim: usize) -> Result<()> {
    match ctx.format {
        Format::Json => ctx.sink.json(&rows),
        Format::Csv => {
            let mut buf = Vec::new();
            fracframe::fourier::write_grid_csv(rows, dim, &mut buf)?;
            ctx.sink.text(&String::from_utf8(buf)?)
        }
    }
}

fn ft(ctx: &Ctx, c: &FtCmd) -> Result<Outcome> {
    let FtCmd::Grid {
        system,
        measure,
        lo,
        hi,
        count,
        eps,
    } = c;
    let grid = linear_grid(*lo, *hi, *count);
    let rows = match (system, measure) {
        (Some(s), None) => {
            let ds = parse_system(s)?;
            if ds.dim() != 1 {
                bail!("grid transforms are one-dimensional");
            }
            mu_hat_grid(&ds, &grid, *eps)?
        }
        (None, Some(p)) => {
            let m = read_measure(p)?;
            if m.dim() != 1 {
                bail!("grid transforms are one-dimensional");
            }
            measure_grid(&m, &grid)?
        }
        _ => bail!("exactly one of --system and --measure is required"),
    };
    emit_grid(ctx, &rows, 1)?;
    Ok(Outcome::Success)
}

fn column(v: &[i64]) -> Vec<Vec<i64>> {
    v.iter().map(|x| vec![*x]).collect()
}

fn packing(ctx: &Ctx, c: &PackingCmd) -> Result<Outcome> {
    match c {
        PackingCmd::Check {
            r,
            b,
            c,
            first,
            second,
            level,
        } => {
            let cert = match (r, first, second) {
                (Some(r), _, _) => {
                    let (b, c) = (
                        b.as_deref().unwrap_or_default(),
                        c.as_deref().unwrap_or_default(),
                    );
                    packing_norm_criterion(&[vec![*r]], &column(b), &column(c))?
                }
                (None, Some(f), Some(s)) => packing_certificate_finite_level(
                    &attractor_points(&parse_system(f)?, *level, ctx.budget)?,
                    &attractor_points(&parse_system(s)?, *level, ctx.budget)?,
                )?,
                _ => bail!("give either --R/--B/--C or --first/--second"),
            };
            ctx.sink.text(&(cert.to_json() + "\n"))?;
            Ok(match cert.status {
                PackingStatus::CertifiedNotPacking => {
                    Outcome::Negative("certified: not a packing pair".into())
                }
                _ => Outcome::Success,
            })
        }
        PackingCmd::Witness {
            nu,
            lambda,
            t,
            level,
        } => {
            let w = singularity_witness(
                &parse_system(nu)?,
                &parse_system(lambda)?,
                &parse_point(t)?,
                *level,
                ctx.budget,
            )?;
            ctx.sink.json(&w)?;
            Ok(Outcome::Success)
        }
    }
}

#[derive(Serialize)]
struct FrameRow {
    lower: f64,
    upper: f64,
    ratio: String,
    rank: usize,
    atoms: usize,
    frequencies: usize,
}

fn emit_report(ctx: &Ctx, r: &FrameReport) -> Result<()> {
    match ctx.format {
        Format::Json => ctx.sink.json(r),
        Format::Csv => ctx.sink.text(&csv_string(&[FrameRow {
            lower: r.lower,
            upper: r.upper,
            ratio: r.ratio.map_or("inf".into(), |x| x.to_string()),
            rank: r.rank,
            atoms: r.atoms,
            frequencies: r.frequencies,
        }])?),
    }
}

fn partner(ds: &DigitSystem, l: &Option<Vec<i64>>) -> Result<Vec<Vec<i64>>> {
    match l {
        Some(l) if ds.dim() == 1 => Ok(column(l)),
        Some(_) => bail!("--L takes one-dimensional digits"),
        None => find_hadamard_partner(&ds.matrix, &ds.digits)?
            .ok_or_else(|| anyhow::anyhow!("no Hadamard partner exists for this system")),
    }
}

fn frame(ctx: &Ctx, c: &FrameCmd) -> Result<Outcome> {
    let FrameCmd::Bounds {
        system,
        level,
        spectrum,
        l,
        pool_size,
    } = c;
    let ds = parse_system(system)?;
    let m = level_measure(&ds, *level, ctx.budget)?;
    let lambda = match spectrum {
        SpectrumKind::Jp => jp_spectrum_checked(&ds, &partner(&ds, l)?, *level, ctx.budget)?,
        SpectrumKind::Lattice => {
            if ds.dim() != 1 {
                bail!("lattice pools are one-dimensional here");
            }
            lattice_pool(1, pool_size.unwrap_or(2 * m.len()))?
        }
    };
    let r = frame_bounds(&PreparedMeasure::new(&m), &lambda, &ctx.eigen)?;
    emit_report(ctx, &r)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct Labeled<'a, T> {
    label: &'static str,
    #[serde(flatten)]
    table: &'a T,
}

fn exp(ctx: &Ctx, c: &ExpCmd) -> Result<Outcome> {
    eprintln!("note: {DEMONSTRATION}");
    match c {
        ExpCmd::Degeneracy {
            nu,
            lambda,
            t,
            level,
            spectrum_system,
            spectrum_l,
            spectrum_level,
            ks,
        } => {
            let sds = parse_system(spectrum_system)?;
            let spec = jp_spectrum_checked(
                &sds,
                &partner(&sds, spectrum_l)?,
                *spectrum_level,
                ctx.budget,
            )?;
            let table = degeneracy_experiment(
                &parse_system(nu)?,
                &parse_system(lambda)?,
                &parse_point(t)?,
                *level,
                &spec,
                ks,
                &ctx.eigen,
                ctx.budget,
            )?;
            match ctx.format {
                Format::Json => ctx.sink.json(&Labeled {
                    label: DEMONSTRATION,
                    table: &table,
                })?,
                Format::Csv => ctx.sink.text(&csv_string(&table.rows)?)?,
            }
        }
        ExpCmd::Rotation {
            thetas,
            level,
            collinear_levels,
        } => {
            let table =
                rotation_experiment(*level, thetas, collinear_levels, &ctx.eigen, ctx.budget)?;
            match ctx.format {
                Format::Json => ctx.sink.json(&Labeled {
                    label: DEMONSTRATION,
                    table: &table,
                })?,
                Format::Csv => {
                    let main = csv_string(&table.rows)?;
                    let collinear = csv_string(&table.collinear)?;
                    match ctx.sink.sibling("collinear.csv") {
                        Some(p) => {
                            ctx.sink.text(&main)?;
                            fs::write(&p, collinear)
                                .with_context(|| format!("cannot write {}", p.display()))?;
                        }
                        None => ctx.sink.text(&format!("{main}\n{collinear}"))?,
                    }
                }
            }
        }
        ExpCmd::CrossBessel {
            src,
            src_l,
            dst,
            levels,
            depth_ratio,
        } => {
            let rows = cross_bessel_experiment(
                &parse_system(src)?,
                &column(src_l),
                &parse_system(dst)?,
                levels,
                *depth_ratio,
                &ctx.eigen,
                ctx.budget,
            )?;
            match ctx.format {
                Format::Json => ctx.sink.json(&rows)?,
                Format::Csv => ctx.sink.text(&csv_string(&rows)?)?,
            }
        }
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct Verdict {
    accepted: bool,
    status: Option<PackingStatus>,
    reason: Option<String>,
}

fn verify(ctx: &Ctx, c: &VerifyCmd) -> Result<Outcome> {
    let VerifyCmd::Certificate { input } = c;
    let text =
        fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    match verify_certificate(&text) {
        Ok(cert) => {
            ctx.sink.json(&Verdict {
                accepted: true,
                status: Some(cert.status),
                reason: None,
            })?;
            Ok(Outcome::Success)
        }
        Err(Error::CertificateRejected(reason)) => {
            ctx.sink.json(&Verdict {
                accepted: false,
                status: None,
                reason: Some(reason.clone()),
            })?;
            Ok(Outcome::Negative(format!("certificate rejected: {reason}")))
        }
        Err(e) => Err(e.into()),
    }
}
