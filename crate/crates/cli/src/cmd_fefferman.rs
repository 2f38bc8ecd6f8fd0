use std::path::PathBuf;

use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pml_core::algebra::{basis, AlgebraTables, GradeSelection};
use pml_core::fefferman::{
    alpha, decompose_g_minus1, random_curvature_map, same_ray, CurvatureMap, CurvatureMapJson, FeffermanTransfer,
};
use pml_core::group::exp_nilpotent;
use pml_core::kostant::{kernel_basis, KostantComplex};
use pml_core::random::random_graded_element;
use pml_core::{AlgebraDescriptor, GradedElement, Rational, Scalar};

use crate::output::{assert_checks, csv, emit, sp, summary, CliError, CliResult, Tolerances};
use crate::Common;

#[derive(Subcommand)]
pub enum FeffermanCommand {
    /// Splits α(x) = x̃ + ã for x in g_-1 and checks [ã, x̃] = 0.
    Decompose(DecomposeArgs),
    /// Transfers curvature maps along Φ: harmonic elements and random samples,
    /// or a single map read from `--file`.
    Transfer(TransferArgs),
}

#[derive(Args)]
pub struct DecomposeArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Use the g_-1 basis instead of random elements.
    #[arg(long)]
    all_basis: bool,
    /// Number of random elements when `--all-basis` is absent.
    #[arg(long, default_value_t = 100)]
    count: usize,
}

#[derive(Args)]
pub struct TransferArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Random curvature maps to test.
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Curvature map (JSON) to transfer instead of running the checks.
    #[arg(long)]
    file: Option<PathBuf>,
}

pub fn run(cmd: FeffermanCommand, common: &Common, _tol: &Tolerances) -> CliResult {
    match cmd {
        FeffermanCommand::Decompose(a) => decompose(a, common),
        FeffermanCommand::Transfer(a) => transfer(a, common),
    }
}

fn exact(v: &[Rational]) -> Vec<String> {
    v.iter().map(Scalar::to_exact_string).collect()
}

fn nonzero_entries(x: &GradedElement<Rational>) -> Vec<String> {
    let m = x.entries();
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m[(i, j)].negligible() {
                out.push(format!("({},{})={}", i + 1, j + 1, m[(i, j)].to_exact_string()));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct DecomposeRow {
    /// Coordinates of `x` in the g_-1 basis.
    x: Vec<String>,
    /// First column of `x̃`.
    x_tilde: Vec<String>,
    /// Nonzero entries of `ã`, 1-based.
    a_tilde: Vec<String>,
    sum_ok: bool,
    bracket_zero: bool,
    same_ray: bool,
}

#[derive(Serialize)]
struct DecomposeReport {
    descriptor: AlgebraDescriptor,
    seed: u64,
    rows: Vec<DecomposeRow>,
    pass: bool,
}

fn decompose(a: DecomposeArgs, common: &Common) -> CliResult {
    let d = sp(a.n)?;
    let t = AlgebraTables::shared(d);
    let minus_one: Vec<usize> = (0..t.dim()).filter(|&i| t.grades[i] == -1).collect();
    let xs: Vec<GradedElement<Rational>> = if a.all_basis {
        basis(d, GradeSelection::Grade(-1))?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        (0..a.count).map(|_| random_graded_element(d, -1, &mut rng, 7)).collect()
    };
    let times = [Rational::from_ratio(1, 2), Rational::from_ratio(-3, 2), Rational::from_i64(2)];
    let mut rows = Vec::with_capacity(xs.len());
    for x in &xs {
        let (xt, at) = decompose_g_minus1(x)?;
        let mut ray = true;
        for s in &times {
            ray &= same_ray(&exp_nilpotent(x, s)?.first_column(), &exp_nilpotent(&xt, s)?.first_column());
        }
        let coords = t.coordinates(x.entries());
        rows.push(DecomposeRow {
            x: exact(&minus_one.iter().map(|&i| coords[i].clone()).collect::<Vec<_>>()),
            x_tilde: exact(&xt.first_column()),
            a_tilde: nonzero_entries(&at),
            sum_ok: alpha(x)? == xt.add(&at)?,
            bracket_zero: at.bracket(&xt)?.is_zero(),
            same_ray: ray,
        });
    }
    let pass = rows.iter().all(|r| r.sum_ok && r.bracket_zero && r.same_ray);
    let table = csv(
        &["x", "x_tilde", "a_tilde", "sum_ok", "bracket_zero", "same_ray"],
        rows.iter().map(|r| {
            vec![
                r.x.join(" "),
                r.x_tilde.join(" "),
                r.a_tilde.join(" "),
                r.sum_ok.to_string(),
                r.bracket_zero.to_string(),
                r.same_ray.to_string(),
            ]
        }),
    )?;
    let count = rows.len();
    emit(common, &DecomposeReport { descriptor: d, seed: common.seed, rows, pass }, Some(table))?;
    summary(common, &format!("{d}: {count} elements of g_-1, all brackets zero: {pass}"));
    let failures = if pass { vec![] } else { vec!["decomposition check failed".to_string()] };
    assert_checks(common, &failures)
}

#[derive(Serialize)]
struct TransferReport {
    contact: AlgebraDescriptor,
    projective: AlgebraDescriptor,
    underline_alpha: Vec<Vec<String>>,
    kernel_elements: usize,
    kernel_images_coclosed: usize,
    random_maps: usize,
    torsion_free_agreement: usize,
    zero_agreement: usize,
    pass: bool,
}

#[derive(Serialize)]
struct SingleTransfer {
    contact: AlgebraDescriptor,
    projective: AlgebraDescriptor,
    input_normal: bool,
    input_torsion_free: bool,
    image_normal: bool,
    image_torsion_free: bool,
    image: CurvatureMapJson,
}

fn transfer(a: TransferArgs, common: &Common) -> CliResult {
    let d = sp(a.n)?;
    let tr = FeffermanTransfer::new(d)?;
    let contact = KostantComplex::new(d);
    let projective = KostantComplex::new(tr.projective());

    if let Some(path) = &a.file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let k = CurvatureMap::<Rational>::from_json(&serde_json::from_str(&text)?)?;
        if k.descriptor() != d {
            return Err(CliError::Usage(format!("curvature map is over {}, expected {d}", k.descriptor())));
        }
        let phi = tr.phi_map(&k)?;
        let report = SingleTransfer {
            contact: d,
            projective: tr.projective(),
            input_normal: contact.is_normal(&k)?,
            input_torsion_free: k.torsion_free(),
            image_normal: projective.is_normal(&phi)?,
            image_torsion_free: phi.torsion_free(),
            image: phi.to_json(),
        };
        emit(common, &report, None)?;
        summary(
            common,
            &format!("transferred map: normal {} -> {}, torsion-free {} -> {}", report.input_normal, report.image_normal, report.input_torsion_free, report.image_torsion_free),
        );
        return Ok(());
    }

    let kernel = kernel_basis(d)?.elements;
    let mut coclosed = 0;
    for w in &kernel {
        let image = projective.curvature_to_cochain(&tr.phi_map(&contact.cochain_to_curvature(w)?)?)?;
        if !image.is_zero() && projective.codifferential(&image)?.is_zero() {
            coclosed += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let (mut tf, mut zero) = (0, 0);
    for i in 0..a.count {
        let k = if i == 0 {
            CurvatureMap::zero(d)
        } else {
            let terms = rng.gen_range(1..8);
            random_curvature_map(d, &mut rng, terms, i % 2 == 0)
        };
        let phi = tr.phi_map(&k)?;
        tf += usize::from(k.torsion_free() == phi.torsion_free());
        zero += usize::from(k.is_zero() == phi.is_zero());
    }
    let pass = coclosed == kernel.len() && tf == a.count && zero == a.count;
    let report = TransferReport {
        contact: d,
        projective: tr.projective(),
        underline_alpha: tr.underline_alpha().to_rows().iter().map(|r| exact(r)).collect(),
        kernel_elements: kernel.len(),
        kernel_images_coclosed: coclosed,
        random_maps: a.count,
        torsion_free_agreement: tf,
        zero_agreement: zero,
        pass,
    };
    emit(common, &report, None)?;
    summary(
        common,
        &format!(
            "{d} -> {}: {coclosed}/{} harmonic images coclosed, torsion-free agreement {tf}/{}, zero agreement {zero}/{}",
            tr.projective(),
            kernel.len(),
            a.count,
            a.count
        ),
    );
    let failures = if pass { vec![] } else { vec!["transfer check failed".to_string()] };
    assert_checks(common, &failures)
}
