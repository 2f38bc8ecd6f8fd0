//! Generalized path geometry axioms on `N = PTS^m` for the flat models.
//!
//! Each flag `ℓ ⊂ T_x S^m` gets its own chart of `N`: the base in gnomonic
//! coordinates `y ∈ R^m` centred at `x` (so great circles are straight lines)
//! and the line as `(1, p)` with `p ∈ R^{m-1}` relative to the frame aligned
//! with `ℓ`. There `𝓗 = span{(1,p; 0), (0; e_j)}` and `V = span{(0; e_j)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraDescriptor;
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::model::{
    chain_frame, curve_distance, contact_form, flow_curve, great_circle_through, model_generator, RayPoint,
    CONTACT_TOLERANCE, DEFAULT_SAMPLES, DEFAULT_T_MAX,
};

pub const FD_STEP: f64 = 1e-4;
pub const BRACKET_TOLERANCE: f64 = 1e-5;
pub const RANK_TOLERANCE: f64 = 1e-6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A line in `T_x S^m`, stored by a unit vector with first nonzero entry positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagPoint {
    pub base: RayPoint,
    pub line: Vec<f64>,
}

impl FlagPoint {
    pub fn new(base: RayPoint, direction: &[f64]) -> Result<Self> {
        let v = base.tangent_part(direction);
        let r = norm(&v);
        if r < 1e-12 {
            return Err(Error::ZeroTangent);
        }
        let mut line: Vec<f64> = v.iter().map(|x| x / r).collect();
        if let Some(first) = line.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                line.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(Self { base, line })
    }

    /// `|Ω(x, ℓ)|` for the contact family.
    pub fn transversality(&self) -> Result<f64> {
        Ok(contact_form(&self.base, &self.line)?.abs())
    }
}

/// Chart of `N` centred at a flag.
#[derive(Clone, Debug)]
pub struct FlagChart {
    descriptor: AlgebraDescriptor,
    /// Orthonormal basis `b_0 = x`, `b_1 = ℓ`, then a completion.
    basis: Vec<Vec<f64>>,
}

impl FlagChart {
    pub fn centred_at(flag: &FlagPoint) -> Self {
        let size = flag.base.rep.len();
        let mut basis = vec![flag.base.rep.clone(), flag.line.clone()];
        for i in 0..size {
            if basis.len() == size {
                break;
            }
            let mut e = vec![0.0; size];
            e[i] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&e, b);
                    e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let r = norm(&e);
            if r > 1e-6 {
                basis.push(e.iter().map(|x| x / r).collect());
            }
        }
        Self { descriptor: flag.base.descriptor, basis }
    }

    /// `m`, the dimension of the sphere.
    pub fn m(&self) -> usize {
        self.basis.len() - 1
    }

    /// Dimension of `N`.
    pub fn dim(&self) -> usize {
        2 * self.m() - 1
    }

    /// Unnormalized sphere representative `b_0 + Σ y_i b_i`.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut w = self.basis[0].clone();
        for (yi, b) in y.iter().zip(&self.basis[1..]) {
            w.iter_mut().zip(b).for_each(|(x, v)| *x += yi * v);
        }
        w
    }

    /// Gnomonic coordinates of a sphere point.
    pub fn chart_point(&self, w: &[f64]) -> Result<Vec<f64>> {
        let w0 = dot(w, &self.basis[0]);
        if w0 <= 1e-9 {
            return Err(Error::OutsideChart);
        }
        Ok(self.basis[1..].iter().map(|b| dot(w, b) / w0).collect())
    }

    /// Chart velocity of a curve through `w` with velocity `u` (in `R^{m+1}`).
    pub fn chart_velocity(&self, w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let w0 = dot(w, &self.basis[0]);
        if w0 <= 1e-9 {
            return Err(Error::OutsideChart);
        }
        let u0 = dot(u, &self.basis[0]);
        Ok(self.basis[1..].iter().map(|b| dot(u, b) / w0 - dot(w, b) * u0 / (w0 * w0)).collect())
    }

    /// Direction of `(1, p)` in `R^m`.
    pub fn direction(p: &[f64]) -> Vec<f64> {
        std::iter::once(1.0).chain(p.iter().copied()).collect()
    }

    /// Flag at chart coordinates `q = (y, p)`.
    pub fn flag_at(&self, q: &[f64]) -> Result<FlagPoint> {
        let m = self.m();
        let (y, p) = q.split_at(m);
        let w = self.lift(y);
        let d = Self::direction(p);
        let mut u = vec![0.0; w.len()];
        for (di, b) in d.iter().zip(&self.basis[1..]) {
            u.iter_mut().zip(b).for_each(|(x, v)| *x += di * v);
        }
        let base = RayPoint::new(self.descriptor, &w)?;
        FlagPoint::new(base, &u)
    }

    /// `(y, p)` of a point with chart velocity `dy` (`dy_1 ≠ 0`).
    fn line_coords(dy: &[f64]) -> Result<Vec<f64>> {
        if dy[0].abs() < 1e-12 {
            return Err(Error::OutsideChart);
        }
        Ok(dy[1..].iter().map(|v| v / dy[0]).collect())
    }

    /// Basis of `𝓗` at `q`.
    pub fn tautological_plane(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let m = self.m();
        let mut first = Self::direction(&q[m..]);
        first.extend(std::iter::repeat_n(0.0, m - 1));
        let mut out = vec![first];
        out.extend(self.vertical(q));
        out
    }

    /// Basis of the vertical subbundle `V` at `q`.
    pub fn vertical(&self, _q: &[f64]) -> Vec<Vec<f64>> {
        let (m, d) = (self.m(), self.dim());
        (0..m - 1)
            .map(|j| {
                let mut v = vec![0.0; d];
                v[m + j] = 1.0;
                v
            })
            .collect()
    }

    /// Coordinates of `w` in `TN/𝓗`: the base part of `w` with its
    /// component along `(1, p)` removed, read in a fixed basis of the complement.
    pub fn quotient(&self, q: &[f64], w: &[f64]) -> Vec<f64> {
        let m = self.m();
        let d = Self::direction(&q[m..]);
        let wy = &w[..m];
        let c = dot(wy, &d) / dot(&d, &d);
        let perp: Vec<f64> = wy.iter().zip(&d).map(|(a, b)| a - c * b).collect();
        // e_2..e_m projected orthogonally to d span d^⊥
        (1..m)
            .map(|j| {
                let mut e = vec![0.0; m];
                e[j] = 1.0;
                let ce = dot(&e, &d) / dot(&d, &d);
                let e: Vec<f64> = e.iter().zip(&d).map(|(a, b)| a - ce * b).collect();
                dot(&perp, &e)
            })
            .collect()
    }

    /// Distance of `w` from `𝓗_q` (norm of the base part orthogonal to `(1, p)`).
    pub fn distance_from_h(&self, q: &[f64], w: &[f64]) -> f64 {
        let m = self.m();
        let d = Self::direction(&q[m..]);
        let wy = &w[..m];
        let c = dot(wy, &d) / dot(&d, &d);
        wy.iter().zip(&d).map(|(a, b)| (a - c * b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Which line field plays the role of `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineField {
    /// Lifted chains (contact family, transverse flags).
    Chain,
    /// Lifted great circles (projective model).
    GreatCircle,
    /// A vertical direction; violates `E ∩ V = 0`.
    Vertical,
}

/// Which frame spans `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerticalFrame {
    Standard,
    /// `V_2 = ∂p_2 + p_1 ∂y_2`; not involutive modulo `𝓗`.
    Perturbed,
}

/// Sphere points and tangents of the path through a flag at `t ∈ {-h, 0, h}`.
fn path_samples(field: LineField, flag: &FlagPoint, h: f64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let curve = match field {
        LineField::Chain => {
            let g = chain_frame(&flag.base, &flag.line, 0.0, &[])?;
            flow_curve(&g, &model_generator(flag.base.descriptor, -2)?, (-h, h), 3)?
        }
        LineField::GreatCircle => great_circle_through(&flag.base, &flag.line, (-h, h), 3)?,
        LineField::Vertical => unreachable!("vertical field is not a path field"),
    };
    Ok(curve.samples.into_iter().map(|s| (s.point.rep, s.tangent)).collect())
}

/// `E` at chart coordinates `q`, normalized; the base part is the exact path
/// tangent, the line part `p'(0)` a central difference.
pub fn line_field(chart: &FlagChart, field: LineField, q: &[f64]) -> Result<Vec<f64>> {
    let m = chart.m();
    if field == LineField::Vertical {
        let mut e = vec![0.0; chart.dim()];
        e[m] = 1.0;
        return Ok(e);
    }
    let flag = chart.flag_at(q)?;
    let h = FD_STEP;
    let samples = path_samples(field, &flag, h)?;
    let mut ps = Vec::with_capacity(3);
    let mut dy0 = Vec::new();
    for (i, (w, u)) in samples.iter().enumerate() {
        let dy = chart.chart_velocity(w, u)?;
        ps.push(FlagChart::line_coords(&dy)?);
        if i == 1 {
            dy0 = dy;
        }
    }
    let dp: Vec<f64> = ps[2].iter().zip(&ps[0]).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let mut e: Vec<f64> = dy0.into_iter().chain(dp).collect();
    let r = norm(&e);
    e.iter_mut().for_each(|x| *x /= r);
    Ok(e)
}

/// Chain line field at a transverse flag, in the chart centred there.
pub fn chain_line_field(flag: &FlagPoint) -> Result<Vec<f64>> {
    let w = flag.transversality()?;
    if w < CONTACT_TOLERANCE {
        return Err(Error::TangentInContactPlane { value: w });
    }
    let chart = FlagChart::centred_at(flag);
    line_field(&chart, LineField::Chain, &vec![0.0; chart.dim()])
}

fn vertical_field(chart: &FlagChart, frame: VerticalFrame, j: usize, q: &[f64]) -> Vec<f64> {
    let m = chart.m();
    let mut v = vec![0.0; chart.dim()];
    v[m + j] = 1.0;
    if frame == VerticalFrame::Perturbed && j == 1 {
        v[1] += q[m];
    }
    v
}

/// `[A, B](q) = DB·A - DA·B` with central differences.
pub fn bracket(
    a: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    b: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    q: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let av = a(q)?;
    let bv = b(q)?;
    let directional = |f: &dyn Fn(&[f64]) -> Result<Vec<f64>>, dir: &[f64]| -> Result<Vec<f64>> {
        let plus: Vec<f64> = q.iter().zip(dir).map(|(x, d)| x + h * d).collect();
        let minus: Vec<f64> = q.iter().zip(dir).map(|(x, d)| x - h * d).collect();
        let (fp, fm) = (f(&plus)?, f(&minus)?);
        Ok(fp.iter().zip(&fm).map(|(x, y)| (x - y) / (2.0 * h)).collect())
    };
    let db_a = directional(b, &av)?;
    let da_b = directional(a, &bv)?;
    Ok(db_a.iter().zip(&da_b).map(|(x, y)| x - y).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagResidual {
    pub base: Vec<f64>,
    pub line: Vec<f64>,
    /// `σ_min/σ_max` of `[E; V]`; positive means `E ∩ V = 0`.
    pub e_cap_v_ratio: f64,
    /// Distance of `E` from `𝓗`.
    pub e_in_h_residual: f64,
    /// Largest `|[V_i, V_j] mod 𝓗|`.
    pub vv_residual: f64,
    /// `σ_min/σ_max` of `E ⊗ V → TN/𝓗`.
    pub ev_rank_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathGeometryReport {
    pub descriptor: AlgebraDescriptor,
    pub field: LineField,
    pub vertical_frame: VerticalFrame,
    pub flags: usize,
    pub min_e_cap_v_ratio: f64,
    pub max_e_in_h_residual: f64,
    pub max_vv_residual: f64,
    pub min_ev_rank_ratio: f64,
    pub e_cap_v_ok: bool,
    pub vv_ok: bool,
    pub ev_full_rank: bool,
    pub pass: bool,
    pub per_flag: Vec<FlagResidual>,
}

/// Axioms at one flag, in the chart centred there.
pub fn check_flag(flag: &FlagPoint, field: LineField, frame: VerticalFrame) -> Result<FlagResidual> {
    let chart = FlagChart::centred_at(flag);
    let q = vec![0.0; chart.dim()];
    let m = chart.m();
    let e_field = |x: &[f64]| line_field(&chart, field, x);
    let e = e_field(&q)?;
    let mut rows = vec![e.clone()];
    rows.extend((0..m - 1).map(|j| vertical_field(&chart, frame, j, &q)));
    let s = singular_values(&rows);
    let e_cap_v_ratio = s.last().copied().unwrap_or(0.0) / s[0];
    let e_in_h_residual = chart.distance_from_h(&q, &e);

    let mut vv_residual: f64 = 0.0;
    for i in 0..m - 1 {
        for j in (i + 1)..m - 1 {
            let vi = |x: &[f64]| Ok(vertical_field(&chart, frame, i, x));
            let vj = |x: &[f64]| Ok(vertical_field(&chart, frame, j, x));
            let br = bracket(&vi, &vj, &q, FD_STEP)?;
            vv_residual = vv_residual.max(norm(&chart.quotient(&q, &br)));
        }
    }
    let mut ev = Vec::with_capacity(m - 1);
    for j in 0..m - 1 {
        let vj = |x: &[f64]| Ok(vertical_field(&chart, frame, j, x));
        let br = bracket(&e_field, &vj, &q, FD_STEP)?;
        ev.push(chart.quotient(&q, &br));
    }
    let s = singular_values(&ev);
    let ev_rank_ratio = if s[0] == 0.0 { 0.0 } else { s.last().copied().unwrap_or(0.0) / s[0] };
    Ok(FlagResidual {
        base: flag.base.rep.clone(),
        line: flag.line.clone(),
        e_cap_v_ratio,
        e_in_h_residual,
        vv_residual,
        ev_rank_ratio,
    })
}

/// Seeded random flags; for the contact family only flags with
/// `|Ω(x, ℓ)| >= min_transversality` are kept.
pub fn flag_grid(descriptor: AlgebraDescriptor, count: usize, seed: u64, min_transversality: f64) -> Result<Vec<FlagPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = descriptor.size();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count + 100 {
            return Err(Error::DegenerateGrid(format!("only {} admissible flags found", out.len())));
        }
        let w: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let Ok(base) = RayPoint::new(descriptor, &w) else { continue };
        let Ok(flag) = FlagPoint::new(base, &v) else { continue };
        if descriptor.is_contact() && flag.transversality()? < min_transversality {
            continue;
        }
        out.push(flag);
    }
    Ok(out)
}

/// Checks the axioms on every flag of the grid.
pub fn check_generalized_path_geometry(
    flags: &[FlagPoint],
    field: LineField,
    frame: VerticalFrame,
) -> Result<PathGeometryReport> {
    let Some(first) = flags.first() else {
        return Err(Error::DegenerateGrid("empty flag grid".into()));
    };
    let descriptor = first.base.descriptor;
    if flags.iter().any(|f| f.base.descriptor != descriptor) {
        return Err(Error::DegenerateGrid("flags from different models".into()));
    }
    if descriptor.size() < 3 {
        return Err(Error::DegenerateGrid("need m >= 2".into()));
    }
    let per_flag = flags
        .par_iter()
        .map(|f| check_flag(f, field, frame))
        .collect::<Result<Vec<_>>>()?;
    let fold_min = |g: fn(&FlagResidual) -> f64| per_flag.iter().map(g).fold(f64::INFINITY, f64::min);
    let fold_max = |g: fn(&FlagResidual) -> f64| per_flag.iter().map(g).fold(0.0, f64::max);
    let min_e_cap_v_ratio = fold_min(|r| r.e_cap_v_ratio);
    let max_e_in_h_residual = fold_max(|r| r.e_in_h_residual);
    let max_vv_residual = fold_max(|r| r.vv_residual);
    let min_ev_rank_ratio = fold_min(|r| r.ev_rank_ratio);
    let e_cap_v_ok = min_e_cap_v_ratio > RANK_TOLERANCE;
    let vv_ok = max_vv_residual < BRACKET_TOLERANCE;
    let ev_full_rank = min_ev_rank_ratio > RANK_TOLERANCE;
    Ok(PathGeometryReport {
        descriptor,
        field,
        vertical_frame: frame,
        flags: flags.len(),
        min_e_cap_v_ratio,
        max_e_in_h_residual,
        max_vv_residual,
        min_ev_rank_ratio,
        e_cap_v_ok,
        vv_ok,
        ev_full_rank,
        pass: e_cap_v_ok && vv_ok && ev_full_rank && max_e_in_h_residual < BRACKET_TOLERANCE,
        per_flag,
    })
}

/// Distance between the chain and the great circle through a transverse flag.
pub fn restriction_consistency(flag: &FlagPoint) -> Result<f64> {
    let g = chain_frame(&flag.base, &flag.line, 0.0, &[])?;
    let chain = flow_curve(&g, &model_generator(flag.base.descriptor, -2)?, (-DEFAULT_T_MAX, DEFAULT_T_MAX), DEFAULT_SAMPLES)?;
    let circle = great_circle_through(&flag.base, &flag.line, (-DEFAULT_T_MAX, DEFAULT_T_MAX), DEFAULT_SAMPLES)?;
    Ok(curve_distance(&chain, &circle))
}

/// Integral curve of `E` from the flag (RK4 in its chart), mapped to the sphere.
pub fn integrate_line_field(flag: &FlagPoint, field: LineField, s_max: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    let chart = FlagChart::centred_at(flag);
    let m = chart.m();
    let h = s_max / steps as f64;
    let mut q = vec![0.0; chart.dim()];
    let mut out = vec![flag.base.rep.clone()];
    let f = |x: &[f64]| line_field(&chart, field, x);
    for _ in 0..steps {
        let k1 = f(&q)?;
        let q2: Vec<f64> = q.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = f(&q2)?;
        let q3: Vec<f64> = q.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = f(&q3)?;
        let q4: Vec<f64> = q.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = f(&q4)?;
        for i in 0..q.len() {
            q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let w = chart.lift(&q[..m]);
        let r = norm(&w);
        out.push(w.iter().map(|x| x / r).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::chain_through;

    fn sp1() -> AlgebraDescriptor {
        AlgebraDescriptor::sp(1).unwrap()
    }

    #[test]
    fn tautological_plane_dimensions() {
        for flag in flag_grid(sp1(), 20, 1, 0.0).unwrap() {
            let chart = FlagChart::centred_at(&flag);
            let q = vec![0.1, -0.2, 0.05, 0.3, -0.1];
            let h = chart.tautological_plane(&q);
            let v = chart.vertical(&q);
            assert_eq!(crate::linalg::rank_f64(&h, 1e-12), 3);
            assert_eq!(crate::linalg::rank_f64(&v, 1e-12), 2);
            for vj in &v {
                assert!(chart.distance_from_h(&q, vj) < 1e-15);
            }
            // a base direction transverse to the line is excluded
            assert!(chart.distance_from_h(&q, &[0.0, 1.0, 0.0, 0.0, 0.0]) > 0.1);
        }
    }

    #[test]
    fn flag_sign_is_canonical() {
        let base = RayPoint::basis(sp1(), 0);
        let a = FlagPoint::new(base.clone(), &[0.0, -1.0, 2.0, 0.0]).unwrap();
        let b = FlagPoint::new(base, &[0.0, 1.0, -2.0, 0.0]).unwrap();
        assert_eq!(a, b);
        assert!(a.line[1] > 0.0);
    }

    #[test]
    fn chain_field_is_horizontal_and_transverse_to_v() {
        for flag in flag_grid(sp1(), 10, 3, 0.1).unwrap() {
            let e = chain_line_field(&flag).unwrap();
            let chart = FlagChart::centred_at(&flag);
            assert!(chart.distance_from_h(&[0.0; 5], &e) < 1e-12);
            assert!(e[0].abs() > 0.1);
        }
        let contact_flag = FlagPoint::new(RayPoint::basis(sp1(), 0), &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(chain_line_field(&contact_flag).is_err());
    }

    #[test]
    fn integral_curve_follows_chain() {
        let flag = flag_grid(sp1(), 1, 5, 0.2).unwrap().remove(0);
        let pts = integrate_line_field(&flag, LineField::Chain, 0.5, 50).unwrap();
        let chain = chain_through(&flag.base, &flag.line).unwrap();
        let plane = crate::model::fitted_plane(&chain.points());
        for p in pts {
            let a = dot(&p, &plane[0]);
            let b = dot(&p, &plane[1]);
            assert!((1.0 - (a * a + b * b).sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn model_passes_and_failures_fail() {
        let flags = flag_grid(sp1(), 8, 9, 0.1).unwrap();
        let ok = check_generalized_path_geometry(&flags, LineField::Chain, VerticalFrame::Standard).unwrap();
        assert!(ok.pass, "{ok:?}");
        let vert = check_generalized_path_geometry(&flags, LineField::Vertical, VerticalFrame::Standard).unwrap();
        assert!(!vert.e_cap_v_ok);
        let pert = check_generalized_path_geometry(&flags, LineField::Chain, VerticalFrame::Perturbed).unwrap();
        assert!(!pert.vv_ok);
        assert!(check_generalized_path_geometry(&[], LineField::Chain, VerticalFrame::Standard).is_err());
    }

    #[test]
    fn projective_model_passes() {
        let d = AlgebraDescriptor::sl(3).unwrap();
        let flags = flag_grid(d, 8, 2, 0.0).unwrap();
        let r = check_generalized_path_geometry(&flags, LineField::GreatCircle, VerticalFrame::Standard).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
