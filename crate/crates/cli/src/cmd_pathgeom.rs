use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use pml_core::pathgeom::{check_generalized_path_geometry, flag_grid, restriction_consistency, LineField, VerticalFrame};
use pml_core::AlgebraDescriptor;

use crate::output::{assert_checks, csv, emit, summary, CliError, CliResult, Tolerances};
use crate::Common;

#[derive(Subcommand)]
pub enum PathgeomCommand {
    /// Checks E ∩ V = 0, [V, V] ⊂ E ⊕ V and E ⊗ V ≅ TN/(E ⊕ V) on a flag grid.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Chain,
    GreatCircle,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FrameArg {
    Standard,
    Perturbed,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Contact model on the ray sphere of R^{2n+2}.
    #[arg(long, conflicts_with = "m")]
    n: Option<usize>,
    /// Projective model on the ray sphere of R^{m+1}.
    #[arg(long)]
    m: Option<usize>,
    /// Number of flags.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Defaults to `chain` for the contact model, `great-circle` otherwise.
    #[arg(long, value_enum)]
    field: Option<FieldArg>,
    #[arg(long, value_enum, default_value_t = FrameArg::Standard)]
    frame: FrameArg,
}

pub fn run(cmd: PathgeomCommand, common: &Common, tol: &Tolerances) -> CliResult {
    match cmd {
        PathgeomCommand::Check(a) => check(a, common, tol),
    }
}

#[derive(Serialize)]
struct Report {
    descriptor: AlgebraDescriptor,
    seed: u64,
    field: LineField,
    vertical_frame: VerticalFrame,
    flags: usize,
    min_e_cap_v_ratio: f64,
    max_e_in_h_residual: f64,
    max_vv_residual: f64,
    min_ev_rank_ratio: f64,
    max_restriction_distance: Option<f64>,
    e_cap_v_ok: bool,
    vv_ok: bool,
    ev_full_rank: bool,
    pass: bool,
}

fn check(a: CheckArgs, common: &Common, tol: &Tolerances) -> CliResult {
    let d = match (a.n, a.m) {
        (_, Some(m)) => AlgebraDescriptor::sl(m)?,
        (n, None) => AlgebraDescriptor::sp(n.unwrap_or(1))?,
    };
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let field = match a.field {
        Some(FieldArg::Chain) => LineField::Chain,
        Some(FieldArg::GreatCircle) => LineField::GreatCircle,
        Some(FieldArg::Vertical) => LineField::Vertical,
        None if d.is_contact() => LineField::Chain,
        None => LineField::GreatCircle,
    };
    if field == LineField::Chain && !d.is_contact() {
        return Err(CliError::Usage("the chain field needs the contact model (--n)".into()));
    }
    let frame = match a.frame {
        FrameArg::Standard => VerticalFrame::Standard,
        FrameArg::Perturbed => VerticalFrame::Perturbed,
    };
    let flags = flag_grid(d, a.grid, common.seed, tol.get("transversality"))?;
    let r = check_generalized_path_geometry(&flags, field, frame)?;
    let restriction = if d.is_contact() {
        let mut worst: f64 = 0.0;
        for f in &flags {
            worst = worst.max(restriction_consistency(f)?);
        }
        Some(worst)
    } else {
        None
    };
    // re-judge with the configured tolerances
    let (rank, bracket) = (tol.get("rank"), tol.get("bracket"));
    let e_cap_v_ok = r.min_e_cap_v_ratio > rank;
    let vv_ok = r.max_vv_residual < bracket;
    let ev_full_rank = r.min_ev_rank_ratio > rank;
    let restriction_ok = restriction.is_none_or(|x| field != LineField::Chain || x < tol.get("restriction"));
    let pass = e_cap_v_ok && vv_ok && ev_full_rank && r.max_e_in_h_residual < bracket && restriction_ok;

    let table = csv(
        &["base", "line", "e_cap_v_ratio", "e_in_h_residual", "vv_residual", "ev_rank_ratio"],
        r.per_flag.iter().map(|f| {
            let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
            vec![
                join(&f.base),
                join(&f.line),
                format!("{:e}", f.e_cap_v_ratio),
                format!("{:e}", f.e_in_h_residual),
                format!("{:e}", f.vv_residual),
                format!("{:e}", f.ev_rank_ratio),
            ]
        }),
    )?;
    let report = Report {
        descriptor: d,
        seed: common.seed,
        field,
        vertical_frame: frame,
        flags: flags.len(),
        min_e_cap_v_ratio: r.min_e_cap_v_ratio,
        max_e_in_h_residual: r.max_e_in_h_residual,
        max_vv_residual: r.max_vv_residual,
        min_ev_rank_ratio: r.min_ev_rank_ratio,
        max_restriction_distance: restriction,
        e_cap_v_ok,
        vv_ok,
        ev_full_rank,
        pass,
    };
    emit(common, &report, Some(table))?;
    summary(
        common,
        &format!(
            "{d}: {} flags, E∩V=0 {e_cap_v_ok}, [V,V] ok {vv_ok}, E⊗V full rank {ev_full_rank}, restriction {} -> {}",
            flags.len(),
            restriction.map_or("n/a".to_string(), |x| format!("{x:.2e}")),
            if pass { "pass" } else { "FAIL" }
        ),
    );
    let failures = if pass { vec![] } else { vec!["path geometry axioms fail".to_string()] };
    assert_checks(common, &failures)
}
