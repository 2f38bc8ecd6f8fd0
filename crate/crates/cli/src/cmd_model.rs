use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pml_core::group::GroupElement;
use pml_core::model::{
    chain_through, chain_through_frame, contact_form, contact_geodesic_through, curve_distance, initial_data,
    project_to_contact_plane, random_transverse_pair, transform_curve, CurveMetadata, ModelCurve, RayPoint,
};
use pml_core::random::random_group_element;
use pml_core::{AlgebraDescriptor, Rational};

use crate::output::{assert_checks, csv, emit, sp, summary, to_json, write_text, CliError, CliResult, Tolerances};
use crate::{Common, Format};

#[derive(Subcommand)]
pub enum ModelCommand {
    /// Chain through a point with a direction transverse to the contact plane.
    Chain(CurveArgs),
    /// Contact geodesic through a point with a direction in the contact plane.
    Geodesic(CurveArgs),
    /// Chains and contact geodesics over a seeded (point, direction) grid.
    Sweep(SweepArgs),
    /// Images of chains under random elements of Sp(2n+2).
    Symmetry(SymmetryArgs),
}

#[derive(Args)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// `eK` (1-based basis vector), `last`, or comma-separated coordinates.
    #[arg(long, default_value = "e1")]
    point: String,
    /// Same syntax as `--point`; defaults to `last` for chains, `e2` for geodesics.
    #[arg(long)]
    dir: Option<String>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Number of points, and of directions per point.
    #[arg(long, default_value_t = 10)]
    grid: usize,
}

#[derive(Args)]
pub struct SymmetryArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
}

pub fn run(cmd: ModelCommand, common: &Common, tol: &Tolerances) -> CliResult {
    match cmd {
        ModelCommand::Chain(a) => curve(a, true, common, tol),
        ModelCommand::Geodesic(a) => curve(a, false, common, tol),
        ModelCommand::Sweep(a) => sweep(a, common, tol),
        ModelCommand::Symmetry(a) => symmetry(a, common, tol),
    }
}

fn parse_vector(text: &str, size: usize) -> CliResult<Vec<f64>> {
    let text = text.trim();
    let unit = |k: usize| {
        let mut v = vec![0.0; size];
        v[k] = 1.0;
        v
    };
    if text == "last" {
        return Ok(unit(size - 1));
    }
    if let Some(k) = text.strip_prefix('e').and_then(|k| k.parse::<usize>().ok()) {
        if k == 0 || k > size {
            return Err(CliError::Usage(format!("basis vector `{text}` outside e1..e{size}")));
        }
        return Ok(unit(k - 1));
    }
    let v: Vec<f64> = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("cannot parse vector `{text}`")))?;
    if v.len() != size {
        return Err(CliError::Usage(format!("vector `{text}` has {} entries, expected {size}", v.len())));
    }
    Ok(v)
}

#[derive(Serialize)]
struct SampleJson {
    t: f64,
    point: Vec<f64>,
    tangent: Vec<f64>,
    omega: f64,
}

#[derive(Serialize)]
struct CurveReport {
    metadata: CurveMetadata,
    samples: Vec<SampleJson>,
}

fn curve(a: CurveArgs, chain: bool, common: &Common, tol: &Tolerances) -> CliResult {
    let d = sp(a.n)?;
    let size = d.size();
    let x = RayPoint::new(d, &parse_vector(&a.point, size)?)?;
    let dir = a.dir.unwrap_or_else(|| if chain { "last".into() } else { "e2".into() });
    let v = parse_vector(&dir, size)?;
    let c = if chain { chain_through(&x, &v)? } else { contact_geodesic_through(&x, &v)? };
    let metadata = c.metadata()?;
    let samples = c
        .samples
        .iter()
        .map(|s| {
            Ok(SampleJson {
                t: s.t,
                point: s.point.rep.clone(),
                tangent: s.tangent.clone(),
                omega: contact_form(&s.point, &s.tangent)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = CurveReport { metadata: metadata.clone(), samples };
    emit(common, &report, Some(c.to_csv()))?;
    if let (Some(out), Format::Csv) = (&common.out, common.format) {
        write_text(Some(&out.with_extension("meta.json")), &to_json(&metadata)?)?;
    }

    let residual = metadata.great_circle_residual;
    let theta_min = metadata.min_abs_contact_form.unwrap_or(0.0);
    let theta_max = metadata.max_abs_contact_form.unwrap_or(0.0);
    summary(
        common,
        &format!(
            "{}: {} samples, great-circle residual {residual:.2e}, |theta| in [{theta_min:.2e}, {theta_max:.2e}]",
            if chain { "chain" } else { "contact geodesic" },
            metadata.samples
        ),
    );
    let mut failures = Vec::new();
    if residual >= tol.get("circle") {
        failures.push(format!("great-circle residual {residual:e}"));
    }
    if chain && theta_min <= tol.get("chain_theta") {
        failures.push(format!("chain touches the contact plane (|theta| = {theta_min:e})"));
    }
    if !chain && theta_max >= tol.get("geodesic_theta") {
        failures.push(format!("geodesic leaves the contact plane (|theta| = {theta_max:e})"));
    }
    assert_checks(common, &failures)
}

#[derive(Serialize)]
struct SweepRow {
    point: usize,
    direction: usize,
    chain_residual: Option<f64>,
    chain_min_theta: Option<f64>,
    chain_frame_change: Option<f64>,
    geodesic_residual: Option<f64>,
    geodesic_max_theta: Option<f64>,
}

#[derive(Serialize)]
struct SweepReport {
    descriptor: AlgebraDescriptor,
    seed: u64,
    grid: usize,
    chains: usize,
    geodesics: usize,
    max_great_circle_residual: f64,
    min_chain_theta: f64,
    max_geodesic_theta: f64,
    max_chain_frame_change: f64,
    pass: bool,
    rows: Vec<SweepRow>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn random_vector(size: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn sweep(a: SweepArgs, common: &Common, tol: &Tolerances) -> CliResult {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let d = sp(a.n)?;
    let size = d.size();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut rows = Vec::with_capacity(a.grid * a.grid);
    for i in 0..a.grid {
        let x = RayPoint::new(d, &random_vector(size, &mut rng))?;
        for j in 0..a.grid {
            let w = x.tangent_part(&random_vector(size, &mut rng));
            let lambda = rng.gen_range(-1.0..1.0);
            let seeds: Vec<Vec<f64>> = (0..size).map(|_| random_vector(size, &mut rng)).collect();
            let mut row = SweepRow {
                point: i,
                direction: j,
                chain_residual: None,
                chain_min_theta: None,
                chain_frame_change: None,
                geodesic_residual: None,
                geodesic_max_theta: None,
            };
            if norm(&w) > 1e-3 && contact_form(&x, &w)?.abs() / norm(&w) >= 1e-2 {
                let c = chain_through(&x, &w)?;
                let m = c.metadata()?;
                row.chain_residual = Some(m.great_circle_residual);
                row.chain_min_theta = m.min_abs_contact_form;
                let other = chain_through_frame(&x, &w, lambda, &seeds)?;
                row.chain_frame_change = Some(curve_distance(&c, &other));
            }
            let h = project_to_contact_plane(&x, &w)?;
            if norm(&h) > 1e-3 {
                let m = contact_geodesic_through(&x, &h)?.metadata()?;
                row.geodesic_residual = Some(m.great_circle_residual);
                row.geodesic_max_theta = m.max_abs_contact_form;
            }
            rows.push(row);
        }
    }
    let fold_max = |f: fn(&SweepRow) -> Option<f64>| rows.iter().filter_map(f).fold(0.0, f64::max);
    let max_residual = fold_max(|r| r.chain_residual).max(fold_max(|r| r.geodesic_residual));
    let min_chain_theta = rows.iter().filter_map(|r| r.chain_min_theta).fold(f64::INFINITY, f64::min);
    let max_geodesic_theta = fold_max(|r| r.geodesic_max_theta);
    let max_frame = fold_max(|r| r.chain_frame_change);
    let chains = rows.iter().filter(|r| r.chain_residual.is_some()).count();
    let geodesics = rows.iter().filter(|r| r.geodesic_residual.is_some()).count();

    let mut failures = Vec::new();
    if max_residual >= tol.get("circle") {
        failures.push(format!("great-circle residual {max_residual:e}"));
    }
    if chains > 0 && min_chain_theta <= tol.get("chain_theta") {
        failures.push(format!("chain |theta| {min_chain_theta:e}"));
    }
    if max_geodesic_theta >= tol.get("geodesic_theta") {
        failures.push(format!("geodesic |theta| {max_geodesic_theta:e}"));
    }
    if max_frame >= tol.get("frame") {
        failures.push(format!("chain depends on the frame ({max_frame:e})"));
    }
    let table = csv(
        &[
            "point",
            "direction",
            "chain_residual",
            "chain_min_theta",
            "chain_frame_change",
            "geodesic_residual",
            "geodesic_max_theta",
        ],
        rows.iter().map(|r| {
            vec![
                r.point.to_string(),
                r.direction.to_string(),
                opt(r.chain_residual),
                opt(r.chain_min_theta),
                opt(r.chain_frame_change),
                opt(r.geodesic_residual),
                opt(r.geodesic_max_theta),
            ]
        }),
    )?;
    let report = SweepReport {
        descriptor: d,
        seed: common.seed,
        grid: a.grid,
        chains,
        geodesics,
        max_great_circle_residual: max_residual,
        min_chain_theta: if chains > 0 { min_chain_theta } else { 0.0 },
        max_geodesic_theta,
        max_chain_frame_change: max_frame,
        pass: failures.is_empty(),
        rows,
    };
    emit(common, &report, Some(table))?;
    summary(
        common,
        &format!(
            "sweep {d}: {chains} chains, {geodesics} geodesics, max residual {max_residual:.2e}, min chain |theta| {:.2e}, max geodesic |theta| {max_geodesic_theta:.2e}, frame change {max_frame:.2e}",
            report.min_chain_theta
        ),
    );
    assert_checks(common, &failures)
}

#[derive(Serialize)]
struct SymmetryReport {
    descriptor: AlgebraDescriptor,
    seed: u64,
    count: usize,
    max_distance: f64,
    pass: bool,
    distances: Vec<f64>,
}

fn image_distance(g: &GroupElement<f64>, c: &ModelCurve) -> CliResult<f64> {
    let image = transform_curve(g, c)?;
    let (y, w) = initial_data(&image);
    Ok(curve_distance(&image, &chain_through(&y, &w)?))
}

fn symmetry(a: SymmetryArgs, common: &Common, tol: &Tolerances) -> CliResult {
    let d = sp(a.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut distances = Vec::with_capacity(a.count);
    for _ in 0..a.count {
        let g: GroupElement<f64> = random_group_element::<Rational, _>(d, &mut rng, 3).convert();
        let (x, v) = random_transverse_pair(d, &mut rng, 1e-2)?;
        distances.push(image_distance(&g, &chain_through(&x, &v)?)?);
    }
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let pass = max_distance < tol.get("frame");
    let table = csv(&["index", "distance"], distances.iter().enumerate().map(|(i, v)| vec![i.to_string(), format!("{v:e}")]))?;
    let report = SymmetryReport { descriptor: d, seed: common.seed, count: a.count, max_distance, pass, distances };
    emit(common, &report, Some(table))?;
    summary(common, &format!("symmetry {d}: {} group elements, max distance {max_distance:.2e}", a.count));
    let failures = if pass { vec![] } else { vec![format!("chain image off the reconstructed chain by {max_distance:e}")] };
    assert_checks(common, &failures)
}
