use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pml_core::connections::{
    contact_torsion, geodesic, path_distance, recover_upsilon, AffineConnection, ContactChart, UpsilonRecovery,
};
use pml_core::polynomial::Polynomial;
use pml_core::Rational;

use crate::output::{assert_checks, csv, emit, summary, to_json, write_text, CliError, CliResult, Tolerances};
use crate::{Common, Format};

#[derive(Subcommand)]
pub enum ConnectionsCommand {
    /// Decides whether two connections are projectively equivalent and
    /// recovers the one-form relating them.
    ProjectiveCheck(CheckArgs),
    /// Contact torsion of a connection on the Heisenberg chart R^{2n+1}.
    ContactTorsion(TorsionArgs),
    /// Writes the projective change of a connection by a polynomial one-form.
    Push(PushArgs),
}

#[derive(Args)]
pub struct CheckArgs {
    /// Exactly two connection files.
    #[arg(long = "file", num_args = 1, required = true)]
    files: Vec<PathBuf>,
    /// Sample points in [-1, 1]^m.
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Geodesics compared as unparametrized paths (equivalent pairs only).
    #[arg(long, default_value_t = 3)]
    geodesics: usize,
}

#[derive(Args)]
pub struct TorsionArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, default_value_t = 20)]
    points: usize,
}

#[derive(Args)]
pub struct PushArgs {
    #[arg(long)]
    file: PathBuf,
    /// Components of the one-form, separated by `;` (e.g. `x1;0;x2^2`).
    #[arg(long)]
    upsilon: String,
}

pub fn run(cmd: ConnectionsCommand, common: &Common, tol: &Tolerances) -> CliResult {
    match cmd {
        ConnectionsCommand::ProjectiveCheck(a) => projective_check(a, common, tol),
        ConnectionsCommand::ContactTorsion(a) => torsion(a, common, tol),
        ConnectionsCommand::Push(a) => push(a, common),
    }
}

fn load(path: &Path) -> CliResult<AffineConnection<Rational>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let json = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(AffineConnection::from_json(&json)?)
}

fn sample_points(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

#[derive(Serialize)]
struct CheckReport {
    status: &'static str,
    dim: usize,
    seed: u64,
    max_residual: f64,
    torsion_equal: bool,
    max_path_distance: Option<f64>,
    points: Vec<Vec<f64>>,
    upsilon: Option<Vec<Vec<f64>>>,
}

fn projective_check(a: CheckArgs, common: &Common, tol: &Tolerances) -> CliResult {
    let [f1, f2] = a.files.as_slice() else {
        return Err(CliError::Usage(format!("projective-check needs exactly two --file arguments, got {}", a.files.len())));
    };
    let (c1, c2) = (load(f1)?, load(f2)?);
    if c1.dim() != c2.dim() {
        return Err(CliError::Usage(format!("dimensions differ: {} vs {}", c1.dim(), c2.dim())));
    }
    let dim = c1.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let points = sample_points(dim, a.points, &mut rng);
    let torsion_equal = c1.torsion() == c2.torsion();
    let (status, max_residual, upsilon) = match recover_upsilon(&c1, &c2, &points)? {
        UpsilonRecovery::Equivalent { values, max_residual } => ("EQUIVALENT", max_residual, Some(values)),
        UpsilonRecovery::NotEquivalent { max_residual } => ("NOT_EQUIVALENT", max_residual, None),
    };
    let max_path_distance = if upsilon.is_some() && a.geodesics > 0 {
        let mut worst: f64 = 0.0;
        for _ in 0..a.geodesics {
            let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let v0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g1 = geodesic(&c1, &x0, &v0, (-1.0, 1.0))?;
            let g2 = geodesic(&c2, &x0, &v0, (-1.0, 1.0))?;
            worst = worst.max(path_distance((&g1, &g2)));
        }
        Some(worst)
    } else {
        None
    };
    let table = match &upsilon {
        Some(u) => {
            let mut header = vec!["point".to_string()];
            header.extend((1..=dim).map(|i| format!("upsilon{i}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            Some(csv(
                &header,
                points.iter().zip(u).map(|(p, u)| {
                    let coords: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
                    std::iter::once(coords.join(" ")).chain(u.iter().map(|v| format!("{v:e}"))).collect()
                }),
            )?)
        }
        None => Some(csv(&["status", "max_residual"], [vec![status.to_string(), format!("{max_residual:e}")]])?),
    };
    let report = CheckReport {
        status,
        dim,
        seed: common.seed,
        max_residual,
        torsion_equal,
        max_path_distance,
        points,
        upsilon,
    };
    emit(common, &report, table)?;
    summary(
        common,
        &match max_path_distance {
            Some(p) => format!("{status}: residual {max_residual:.2e}, torsion equal {torsion_equal}, path distance {p:.2e}"),
            None => format!("{status}: residual {max_residual:.2e}, torsion equal {torsion_equal}"),
        },
    );
    let mut failures = Vec::new();
    if status != "EQUIVALENT" {
        failures.push("NOT_EQUIVALENT".to_string());
    } else {
        if !torsion_equal {
            failures.push("torsions differ".to_string());
        }
        if max_path_distance.is_some_and(|p| p >= tol.get("path")) {
            failures.push("unparametrized geodesics differ".to_string());
        }
    }
    assert_checks(common, &failures)
}

#[derive(Serialize)]
struct TorsionReport {
    n: usize,
    seed: u64,
    max_abs_component: f64,
    vanishes: bool,
    points: Vec<Vec<f64>>,
    max_per_point: Vec<f64>,
}

fn torsion(a: TorsionArgs, common: &Common, tol: &Tolerances) -> CliResult {
    let c = load(&a.file)?;
    let dim = c.dim();
    if dim < 3 || dim % 2 == 0 {
        return Err(CliError::Usage(format!("contact chart needs odd dimension >= 3, got {dim}")));
    }
    let chart = ContactChart::new((dim - 1) / 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let points = sample_points(dim, a.points, &mut rng);
    let max_per_point = points
        .iter()
        .map(|p| Ok(contact_torsion(&c, &chart, p)?.iter().fold(0.0_f64, |m, v| m.max(v.abs()))))
        .collect::<CliResult<Vec<f64>>>()?;
    let max_abs_component = max_per_point.iter().copied().fold(0.0, f64::max);
    let vanishes = max_abs_component < tol.get("torsion");
    let table = csv(
        &["point", "max_abs_component"],
        points.iter().zip(&max_per_point).map(|(p, m)| {
            let coords: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            vec![coords.join(" "), format!("{m:e}")]
        }),
    )?;
    let report = TorsionReport { n: chart.n(), seed: common.seed, max_abs_component, vanishes, points, max_per_point };
    emit(common, &report, Some(table))?;
    summary(common, &format!("contact torsion: max |component| {max_abs_component:.2e}, vanishes {vanishes}"));
    let failures = if vanishes { vec![] } else { vec![format!("contact torsion {max_abs_component:e}")] };
    assert_checks(common, &failures)
}

fn push(a: PushArgs, common: &Common) -> CliResult {
    let c = load(&a.file)?;
    let parts: Vec<&str> = a.upsilon.split(';').collect();
    if parts.len() != c.dim() {
        return Err(CliError::Usage(format!("--upsilon has {} components, expected {}", parts.len(), c.dim())));
    }
    let upsilon = parts
        .iter()
        .map(|p| Polynomial::parse(p, c.dim()))
        .collect::<pml_core::Result<Vec<Polynomial<Rational>>>>()?;
    let pushed = c.projective_push(&upsilon)?;
    if common.format == Format::Csv {
        return Err(CliError::Usage("push writes JSON only".into()));
    }
    write_text(common.out.as_deref(), &to_json(&pushed.to_json())?)
}
