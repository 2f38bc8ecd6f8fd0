use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use similar::TextDiff;

use pml_core::kostant::{check_size_guard, kernel_basis, KostantComplex};
use pml_core::random::{random_algebra_element, random_graded_element};
use pml_core::{AlgebraDescriptor, GradedElement, Rational};

use crate::output::{assert_checks, csv, emit, summary, to_json, CliError, CliResult, Tolerances};
use crate::Common;

#[derive(Subcommand)]
pub enum KostantCommand {
    /// Kernel of the Kostant Laplacian: homogeneities and support.
    Tables(TablesArgs),
    /// Exact checks of the complex: squares of both differentials and the
    /// degree-2 codifferential on decomposables.
    Identities(IdentitiesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Sp,
    Sl,
}

#[derive(Args)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// `n` for sp(2n+2), `m` for sl(m+1).
    #[arg(long)]
    size: usize,
    /// Compare with the stored golden table.
    #[arg(long)]
    golden: bool,
}

#[derive(Args)]
pub struct IdentitiesArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    size: usize,
    /// Random decomposables `Z ∧ W ⊗ A` to test.
    #[arg(long, default_value_t = 200)]
    count: usize,
}

pub fn run(cmd: KostantCommand, common: &Common, _tol: &Tolerances) -> CliResult {
    match cmd {
        KostantCommand::Tables(a) => tables(a, common),
        KostantCommand::Identities(a) => identities(a, common),
    }
}

fn descriptor(family: FamilyArg, size: usize) -> CliResult<AlgebraDescriptor> {
    let d = match family {
        FamilyArg::Sp => AlgebraDescriptor::sp(size)?,
        FamilyArg::Sl => AlgebraDescriptor::sl(size)?,
    };
    check_size_guard(d)?;
    Ok(d)
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::Sp => "sp",
        FamilyArg::Sl => "sl",
    }
}

pub fn golden_dir() -> PathBuf {
    std::env::var_os("PML_GOLDEN_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/golden")))
}

fn tables(a: TablesArgs, common: &Common) -> CliResult {
    let d = descriptor(a.family, a.size)?;
    let report = kernel_basis(d)?.report;
    let table = csv(
        &["wedge", "value", "homogeneity"],
        report.support.iter().map(|b| {
            let wedge: Vec<String> = b.wedge.iter().map(|g| g.to_string()).collect();
            vec![wedge.join(" "), b.value.to_string(), (b.wedge.iter().sum::<i32>() + b.value).to_string()]
        }),
    )?;
    emit(common, &report, Some(table))?;
    let support: Vec<String> = report.support.iter().map(|b| b.to_string()).collect();
    summary(
        common,
        &format!(
            "{d}: ker dim {}, homogeneities {:?}, support [{}], parabolic-valued {}",
            report.kernel_dim,
            report.homogeneities,
            support.join(", "),
            report.parabolic_valued
        ),
    );
    if a.golden {
        let path = golden_dir().join(format!("kostant_{}_{}.json", family_name(a.family), a.size));
        let expected = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read golden file {}: {e}", path.display())))?;
        let actual = to_json(&report)?;
        if expected != actual {
            let diff = TextDiff::from_lines(&expected, &actual)
                .unified_diff()
                .header(&path.display().to_string(), "computed")
                .to_string();
            eprint!("{diff}");
            return Err(CliError::Check(format!("golden mismatch for {}", path.display())));
        }
        summary(common, &format!("golden match: {}", path.display()));
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentitiesReport {
    descriptor: AlgebraDescriptor,
    seed: u64,
    codifferential_squared: Vec<DegreeCheck>,
    differential_squared: Vec<DegreeCheck>,
    decomposables: usize,
    decomposable_mismatches: usize,
    pass: bool,
}

#[derive(Serialize)]
struct DegreeCheck {
    degree: usize,
    basis_elements: usize,
    nonzero: usize,
}

fn random_p_plus(d: AlgebraDescriptor, rng: &mut ChaCha8Rng) -> CliResult<GradedElement<Rational>> {
    let (_, top) = d.grade_range();
    let mut acc = GradedElement::zero(d);
    for k in 1..=top {
        acc = acc.add(&random_graded_element(d, k, rng, 5))?;
    }
    Ok(acc)
}

fn identities(a: IdentitiesArgs, common: &Common) -> CliResult {
    let d = descriptor(a.family, a.size)?;
    let c = KostantComplex::new(d);
    let square = |degree: usize, f: &dyn Fn(&pml_core::kostant::CochainElement) -> pml_core::Result<pml_core::kostant::CochainElement>| -> CliResult<DegreeCheck> {
        let mut nonzero = 0;
        for i in 0..c.cochain_dim(degree) {
            if !f(&f(&c.basis_element(degree, i))?)?.is_zero() {
                nonzero += 1;
            }
        }
        Ok(DegreeCheck { degree, basis_elements: c.cochain_dim(degree), nonzero })
    };
    let codifferential_squared =
        [2, 3].iter().map(|&k| square(k, &|x| c.codifferential(x))).collect::<CliResult<Vec<_>>>()?;
    let differential_squared =
        [0, 1].iter().map(|&k| square(k, &|x| c.differential(x))).collect::<CliResult<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut mismatches = 0;
    for _ in 0..a.count {
        let z = random_p_plus(d, &mut rng)?;
        let w = random_p_plus(d, &mut rng)?;
        let x: GradedElement<Rational> = random_algebra_element(d, &mut rng, 5);
        let lhs = c.codifferential(&c.decomposable(&[z.clone(), w.clone()], &x)?)?;
        let rhs = c
            .decomposable(std::slice::from_ref(&z), &w.bracket(&x)?)?
            .sub(&c.decomposable(std::slice::from_ref(&w), &z.bracket(&x)?)?)
            .sub(&c.decomposable(&[z.bracket(&w)?], &x)?);
        if lhs != rhs {
            mismatches += 1;
        }
    }
    let pass = mismatches == 0
        && codifferential_squared.iter().chain(&differential_squared).all(|c| c.nonzero == 0);
    let report = IdentitiesReport {
        descriptor: d,
        seed: common.seed,
        codifferential_squared,
        differential_squared,
        decomposables: a.count,
        decomposable_mismatches: mismatches,
        pass,
    };
    emit(common, &report, None)?;
    summary(common, &format!("{d}: complex identities {}", if pass { "hold" } else { "FAIL" }));
    let failures = if pass { vec![] } else { vec![format!("complex identities fail for {d}")] };
    assert_checks(common, &failures)
}
