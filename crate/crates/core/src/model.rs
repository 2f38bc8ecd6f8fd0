//! Flat models: the sphere of rays in `R^{m+1}` and, for the symplectic
//! family, `S^{2n+1}` with the contact distribution `ker Ω(x, ·)`.
//!
//! Distinguished curves are projections of `t ↦ g exp(tX)`: `X ∈ g_-1`
//! gives contact geodesics, `X ∈ g_-2` gives chains.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraTables, GradedElement, SymplecticForm};
use crate::error::{Error, Result};
use crate::group::{exp, GroupElement};
use crate::linalg::{dominant_subspace, singular_values};
use crate::matrix::Mat;

/// Threshold on `|Ω(x, v)|` separating contact from transverse directions.
pub const CONTACT_TOLERANCE: f64 = 1e-9;
/// Allowed `|<x, v>|/|v|` for a tangent vector.
pub const TANGENCY_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_T_MAX: f64 = 3.0;
pub const DEFAULT_SAMPLES: usize = 241;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// A ray, stored by its unit representative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayPoint {
    pub descriptor: AlgebraDescriptor,
    pub rep: Vec<f64>,
}

impl RayPoint {
    pub fn new(descriptor: AlgebraDescriptor, v: &[f64]) -> Result<Self> {
        if v.len() != descriptor.size() {
            return Err(Error::DimensionMismatch { expected: descriptor.size(), got: v.len() });
        }
        let r = norm(v);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::ZeroTangent);
        }
        Ok(Self { descriptor, rep: scaled(v, 1.0 / r) })
    }

    /// Ray of the `i`-th standard basis vector (0-based).
    pub fn basis(descriptor: AlgebraDescriptor, i: usize) -> Self {
        let mut v = vec![0.0; descriptor.size()];
        v[i] = 1.0;
        Self { descriptor, rep: v }
    }

    /// Component of `v` orthogonal to the representative.
    pub fn tangent_part(&self, v: &[f64]) -> Vec<f64> {
        let c = dot(&self.rep, v);
        v.iter().zip(&self.rep).map(|(a, b)| a - c * b).collect()
    }

    fn check_tangent(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.rep.len() {
            return Err(Error::DimensionMismatch { expected: self.rep.len(), got: v.len() });
        }
        let value = dot(&self.rep, v).abs();
        if value > TANGENCY_TOLERANCE * norm(v).max(1.0) {
            return Err(Error::NotTangent { value });
        }
        Ok(())
    }
}

/// Normalized first column of `g`.
pub fn project(g: &GroupElement<f64>) -> RayPoint {
    RayPoint::new(g.descriptor(), &g.first_column()).expect("group elements are nonsingular")
}

/// `Ω(x, v)` for a tangent vector `v` at `x`.
pub fn contact_form(x: &RayPoint, v: &[f64]) -> Result<f64> {
    let Some(n) = contact_n(x.descriptor) else {
        return Err(Error::IncompatibleDescriptor { which: "contact_form", expected: "sp", got: x.descriptor });
    };
    x.check_tangent(v)?;
    Ok(SymplecticForm::new(n).eval(&x.rep, v))
}

fn contact_n(d: AlgebraDescriptor) -> Option<usize> {
    match d.family() {
        crate::algebra::Family::SpContact { n } => Some(n),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CurveKind {
    ContactGeodesic,
    Chain,
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub t: f64,
    pub point: RayPoint,
    pub tangent: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelCurve {
    pub kind: CurveKind,
    pub descriptor: AlgebraDescriptor,
    pub samples: Vec<CurveSample>,
    /// Group element the flow started from.
    pub frame: Mat<f64>,
}

impl ModelCurve {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.point.rep.clone()).collect()
    }

    /// `Ω(x, x')` at every sample (contact family only).
    pub fn contact_values(&self) -> Result<Vec<f64>> {
        self.samples.iter().map(|s| contact_form(&s.point, &s.tangent)).collect()
    }

    /// CSV with columns `t, x0.., v0.., omega` (`omega` empty off the contact family).
    pub fn to_csv(&self) -> String {
        let size = self.descriptor.size();
        let mut out = String::from("t");
        for i in 0..size {
            let _ = write!(out, ",x{i}");
        }
        for i in 0..size {
            let _ = write!(out, ",v{i}");
        }
        out.push_str(",omega\n");
        for s in &self.samples {
            let _ = write!(out, "{}", s.t);
            for v in s.point.rep.iter().chain(&s.tangent) {
                let _ = write!(out, ",{v:.17e}");
            }
            match contact_form(&s.point, &s.tangent) {
                Ok(w) => {
                    let _ = writeln!(out, ",{w:.17e}");
                }
                Err(_) => out.push_str(",\n"),
            }
        }
        out
    }

    pub fn metadata(&self) -> Result<CurveMetadata> {
        let (_, residual) = is_great_circle(self, f64::INFINITY)?;
        let omegas = self.contact_values().ok();
        Ok(CurveMetadata {
            kind: self.kind,
            descriptor: self.descriptor,
            samples: self.samples.len(),
            frame: self.frame.to_rows(),
            great_circle_residual: residual,
            max_abs_contact_form: omegas.as_ref().map(|w| w.iter().fold(0.0_f64, |a, b| a.max(b.abs()))),
            min_abs_contact_form: omegas.as_ref().map(|w| w.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub kind: CurveKind,
    pub descriptor: AlgebraDescriptor,
    pub samples: usize,
    pub frame: Vec<Vec<f64>>,
    pub great_circle_residual: f64,
    pub max_abs_contact_form: Option<f64>,
    pub min_abs_contact_form: Option<f64>,
}

/// `n` uniform times on `[t0, t1]`.
pub fn sample_times(t_range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t_range.0];
    }
    (0..n).map(|i| t_range.0 + (t_range.1 - t_range.0) * i as f64 / (n - 1) as f64).collect()
}

/// Samples `t ↦ project(g0 exp(tX))` with tangents of the normalized curve.
pub fn flow_curve(
    g0: &GroupElement<f64>,
    x: &GradedElement<f64>,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<ModelCurve> {
    if g0.descriptor() != x.descriptor() {
        return Err(Error::AlgebraMismatch { left: g0.descriptor(), right: x.descriptor() });
    }
    let d = x.descriptor();
    let kind = match (d.is_contact(), x.pure_grade()) {
        (true, Some(-1)) => CurveKind::ContactGeodesic,
        (true, Some(-2)) => CurveKind::Chain,
        _ => CurveKind::Generic,
    };
    let mut samples = Vec::with_capacity(n_samples);
    for t in sample_times(t_range, n_samples) {
        let g = g0.entries().matmul(exp(x, t).entries());
        let w = g.column(0);
        let dw = g.matmul(x.entries()).column(0);
        let r = norm(&w);
        let point = RayPoint::new(d, &w)?;
        let tangent = scaled(&point.tangent_part(&dw), 1.0 / r);
        samples.push(CurveSample { t, point, tangent });
    }
    Ok(ModelCurve { kind, descriptor: d, samples, frame: g0.entries().clone() })
}

/// [`flow_curve`] that insists on the requested kind.
pub fn flow_curve_as(
    kind: CurveKind,
    g0: &GroupElement<f64>,
    x: &GradedElement<f64>,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<ModelCurve> {
    let expected = match kind {
        CurveKind::ContactGeodesic => Some(-1),
        CurveKind::Chain => Some(-2),
        CurveKind::Generic => None,
    };
    if let Some(g) = expected {
        if !x.descriptor().is_contact() || x.pure_grade() != Some(g) {
            return Err(Error::NotPureGrade { expected: g });
        }
    }
    flow_curve(g0, x, t_range, n_samples)
}

/// Basis element of `g_-2` (`E_{N-1,0}`) or of `g_-1` with column `e_1`.
pub fn model_generator(descriptor: AlgebraDescriptor, grade: i32) -> Result<GradedElement<f64>> {
    descriptor.check_grade(grade)?;
    let t = AlgebraTables::shared(descriptor);
    let row = if grade == -2 { descriptor.size() - 1 } else { 1 };
    t.basis
        .iter()
        .zip(&t.grades)
        .find(|(b, &g)| {
            g == grade
                && (0..descriptor.size()).all(|i| {
                    let e = &b.entries()[(i, 0)];
                    if i == row {
                        *e == crate::scalar::Rational::from_integer(1.into())
                    } else {
                        num_traits::Zero::is_zero(e)
                    }
                })
        })
        .map(|(b, _)| b.convert())
        .ok_or(Error::NotPureGrade { expected: grade })
}

/// Completes Darboux pairs `(col 0, col N-1)`, `(col i, col i+n)` to a
/// symplectic frame by Gram–Schmidt against `Ω`. `fixed` lists already chosen
/// `(column, vector)` entries; `seeds` are tried before the standard basis.
pub fn symplectic_frame(n: usize, fixed: &[(usize, Vec<f64>)], seeds: &[Vec<f64>]) -> Result<Mat<f64>> {
    let omega = SymplecticForm::new(n);
    let size = 2 * n + 2;
    let partner = |i: usize| omega.partner(i).0;
    let mut cols: Vec<Option<Vec<f64>>> = vec![None; size];
    for (c, v) in fixed {
        cols[*c] = Some(v.clone());
    }
    // all fixed columns must come in complete pairs
    for c in 0..size {
        if cols[c].is_some() != cols[partner(c)].is_some() {
            return Err(Error::DimensionMismatch { expected: size, got: fixed.len() });
        }
    }
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for c in std::iter::once(0).chain(1..=n) {
        if let (Some(e), Some(f)) = (&cols[c], &cols[partner(c)]) {
            pairs.push((e.clone(), f.clone()));
        }
    }
    let project = |w: &[f64], pairs: &[(Vec<f64>, Vec<f64>)]| -> Vec<f64> {
        let mut w = w.to_vec();
        for (e, f) in pairs {
            let a = omega.eval(&w, f);
            let b = omega.eval(&w, e);
            for k in 0..size {
                w[k] += -a * e[k] + b * f[k];
            }
        }
        w
    };
    let mut candidates: Vec<Vec<f64>> = seeds.to_vec();
    candidates.extend((0..size).map(|i| {
        let mut v = vec![0.0; size];
        v[i] = 1.0;
        v
    }));
    for i in 1..=n {
        if cols[i].is_some() {
            continue;
        }
        let projected: Vec<Vec<f64>> = candidates.iter().map(|w| project(&project(w, &pairs), &pairs)).collect();
        let e = projected
            .iter()
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .map(|v| scaled(v, 1.0 / norm(v)))
            .ok_or(Error::Singular)?;
        let f = projected
            .iter()
            .max_by(|a, b| omega.eval(&e, a).abs().total_cmp(&omega.eval(&e, b).abs()))
            .cloned()
            .ok_or(Error::Singular)?;
        let s = omega.eval(&e, &f);
        if s.abs() < 1e-12 {
            return Err(Error::Singular);
        }
        let f = scaled(&f, 1.0 / s);
        cols[i] = Some(e.clone());
        cols[i + n] = Some(f.clone());
        pairs.push((e, f));
    }
    let mut m = Mat::zeros(size, size);
    for (c, v) in cols.into_iter().enumerate() {
        m.set_column(c, &v.expect("every column assigned"));
    }
    Ok(m)
}

/// Frame of [`chain_through`] with parameter `λ` in the last column `c + λu`
/// and optional Gram–Schmidt seeds.
pub fn chain_frame(x: &RayPoint, v: &[f64], lambda: f64, seeds: &[Vec<f64>]) -> Result<GroupElement<f64>> {
    let omega = contact_form(x, v)?;
    if omega.abs() < CONTACT_TOLERANCE {
        return Err(Error::TangentInContactPlane { value: omega.abs() });
    }
    let n = contact_n(x.descriptor).expect("checked by contact_form");
    let u = x.rep.clone();
    let c: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a / omega + lambda * b).collect();
    let size = u.len();
    let frame = symplectic_frame(n, &[(0, u), (size - 1, c)], seeds)?;
    Ok(GroupElement::new_unchecked(x.descriptor, frame))
}

/// Chain through `x` with initial direction `v` (transverse to `H_x`).
pub fn chain_through(x: &RayPoint, v: &[f64]) -> Result<ModelCurve> {
    chain_through_frame(x, v, 0.0, &[])
}

pub fn chain_through_frame(x: &RayPoint, v: &[f64], lambda: f64, seeds: &[Vec<f64>]) -> Result<ModelCurve> {
    let g = chain_frame(x, v, lambda, seeds)?;
    let gen = model_generator(x.descriptor, -2)?;
    flow_curve(&g, &gen, (-DEFAULT_T_MAX, DEFAULT_T_MAX), DEFAULT_SAMPLES)
}

/// Frame of [`contact_geodesic_through`]: `u`, `-Ωu`, `v/|v|`, `-Ωv/|v|`, completed.
pub fn contact_geodesic_frame(x: &RayPoint, v: &[f64], seeds: &[Vec<f64>]) -> Result<GroupElement<f64>> {
    let omega = contact_form(x, v)?;
    if omega.abs() >= CONTACT_TOLERANCE {
        return Err(Error::TangentNotInContactPlane { value: omega.abs() });
    }
    let r = norm(v);
    if r == 0.0 {
        return Err(Error::ZeroTangent);
    }
    let n = contact_n(x.descriptor).expect("checked by contact_form");
    let om = SymplecticForm::new(n).matrix::<f64>();
    let u = x.rep.clone();
    let e = scaled(v, 1.0 / r);
    let c = scaled(&om.mul_vec(&u), -1.0);
    let f = scaled(&om.mul_vec(&e), -1.0);
    let size = u.len();
    let frame = symplectic_frame(n, &[(0, u), (size - 1, c), (1, e), (1 + n, f)], seeds)?;
    Ok(GroupElement::new_unchecked(x.descriptor, frame))
}

/// Contact geodesic through `x` with initial direction `v ∈ H_x`.
pub fn contact_geodesic_through(x: &RayPoint, v: &[f64]) -> Result<ModelCurve> {
    let g = contact_geodesic_frame(x, v, &[])?;
    let gen = model_generator(x.descriptor, -1)?;
    flow_curve(&g, &gen, (-DEFAULT_T_MAX, DEFAULT_T_MAX), DEFAULT_SAMPLES)
}

/// The chain or contact geodesic through `(x, v)`, whichever applies.
pub fn distinguished_path_through(x: &RayPoint, v: &[f64]) -> Result<ModelCurve> {
    if contact_form(x, v)?.abs() < CONTACT_TOLERANCE {
        contact_geodesic_through(x, v)
    } else {
        chain_through(x, v)
    }
}

/// Great circle of the projective model through `x` with direction `v`.
pub fn great_circle_through(x: &RayPoint, v: &[f64], t_range: (f64, f64), n_samples: usize) -> Result<ModelCurve> {
    x.check_tangent(v)?;
    let r = norm(v);
    if r == 0.0 {
        return Err(Error::ZeroTangent);
    }
    let e = scaled(v, 1.0 / r);
    let samples = sample_times(t_range, n_samples)
        .into_iter()
        .map(|t| {
            let (s, c) = t.atan().sin_cos();
            let p: Vec<f64> = x.rep.iter().zip(&e).map(|(a, b)| c * a + s * b).collect();
            let tangent: Vec<f64> = x.rep.iter().zip(&e).map(|(a, b)| (-s * a + c * b) / (1.0 + t * t)).collect();
            CurveSample { t, point: RayPoint { descriptor: x.descriptor, rep: p }, tangent }
        })
        .collect();
    let size = x.rep.len();
    Ok(ModelCurve { kind: CurveKind::Generic, descriptor: x.descriptor, samples, frame: Mat::identity(size) })
}

/// `σ₃/σ₁` of the sample matrix; `true` if it is below `tol`.
pub fn is_great_circle(c: &ModelCurve, tol: f64) -> Result<(bool, f64)> {
    if c.samples.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: c.samples.len() });
    }
    let s = singular_values(&c.points());
    let residual = if s.len() < 3 || s[0] == 0.0 { 0.0 } else { s[2] / s[0] };
    Ok((residual < tol, residual))
}

/// Plane of the best-fitting great circle (orthonormal pair).
pub fn fitted_plane(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    dominant_subspace(points, 2)
}

fn distance_to_circle(p: &[f64], plane: &[Vec<f64>]) -> f64 {
    let a = dot(p, &plane[0]);
    let b = dot(p, &plane[1]);
    let r = (a * a + b * b).sqrt();
    if r == 0.0 {
        return norm(p).hypot(1.0);
    }
    let q: Vec<f64> = plane[0].iter().zip(&plane[1]).map(|(e, f)| (a * e + b * f) / r).collect();
    p.iter().zip(&q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance between the unparametrized great circles carrying two curves:
/// every sample of one is compared with the full fitted circle of the other,
/// symmetrically.
pub fn circle_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let pa = fitted_plane(a);
    let pb = fitted_plane(b);
    let ab = a.iter().map(|p| distance_to_circle(p, &pb)).fold(0.0, f64::max);
    let ba = b.iter().map(|p| distance_to_circle(p, &pa)).fold(0.0, f64::max);
    ab.max(ba)
}

/// Orthonormal pair spanning the great circle tangent to `c` at its sample
/// closest to `t = 0`.
pub fn carrier_plane(c: &ModelCurve) -> Vec<Vec<f64>> {
    let (x, v) = initial_data(c);
    let v = x.tangent_part(&v);
    let r = norm(&v);
    vec![x.rep, scaled(&v, 1.0 / r)]
}

/// Symmetric distance between the samples of each curve and the great circle
/// carrying the other (Hausdorff distance of the full circles when both are
/// great circles).
pub fn curve_distance(a: &ModelCurve, b: &ModelCurve) -> f64 {
    let pa = carrier_plane(a);
    let pb = carrier_plane(b);
    let ab = a.samples.iter().map(|s| distance_to_circle(&s.point.rep, &pb)).fold(0.0, f64::max);
    let ba = b.samples.iter().map(|s| distance_to_circle(&s.point.rep, &pa)).fold(0.0, f64::max);
    ab.max(ba)
}

/// Component of a tangent vector `v` at `x` lying in `H_x`.
pub fn project_to_contact_plane(x: &RayPoint, v: &[f64]) -> Result<Vec<f64>> {
    let n = contact_n(x.descriptor).ok_or(Error::IncompatibleDescriptor {
        which: "project_to_contact_plane",
        expected: "sp",
        got: x.descriptor,
    })?;
    // Ω(x, v) = a·v with a = Ωᵀx, and a ⊥ x
    let a = SymplecticForm::new(n).matrix::<f64>().transpose().mul_vec(&x.rep);
    let w = x.tangent_part(v);
    let c = dot(&w, &a) / dot(&a, &a);
    Ok(w.iter().zip(&a).map(|(p, q)| p - c * q).collect())
}

fn random_vector<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Vec<f64> {
    (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random point with a tangent direction satisfying `|Ω(x, v/|v|)| >= min_ratio`.
pub fn random_transverse_pair<R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    rng: &mut R,
    min_ratio: f64,
) -> Result<(RayPoint, Vec<f64>)> {
    loop {
        let x = RayPoint::new(descriptor, &random_vector(descriptor.size(), rng))?;
        let v = x.tangent_part(&random_vector(descriptor.size(), rng));
        let len = norm(&v);
        if len > 1e-3 && contact_form(&x, &v)?.abs() / len >= min_ratio {
            return Ok((x, v));
        }
    }
}

/// Random point with a nonzero direction in its contact plane.
pub fn random_contact_pair<R: Rng + ?Sized>(descriptor: AlgebraDescriptor, rng: &mut R) -> Result<(RayPoint, Vec<f64>)> {
    loop {
        let x = RayPoint::new(descriptor, &random_vector(descriptor.size(), rng))?;
        let v = project_to_contact_plane(&x, &random_vector(descriptor.size(), rng))?;
        if norm(&v) > 1e-2 {
            return Ok((x, v));
        }
    }
}

/// Point and tangent of the sample nearest `t = 0`.
pub fn initial_data(c: &ModelCurve) -> (RayPoint, Vec<f64>) {
    let s = c.samples.iter().min_by(|a, b| a.t.abs().total_cmp(&b.t.abs())).expect("nonempty curve");
    (s.point.clone(), s.tangent.clone())
}

/// Image of a curve under the ray map of `g`, with pushed-forward tangents.
pub fn transform_curve(g: &GroupElement<f64>, c: &ModelCurve) -> Result<ModelCurve> {
    let samples = c
        .samples
        .iter()
        .map(|s| {
            let w = g.apply(&s.point.rep);
            let dw = g.apply(&s.tangent);
            let point = RayPoint::new(c.descriptor, &w)?;
            let tangent = scaled(&point.tangent_part(&dw), 1.0 / norm(&w));
            Ok(CurveSample { t: s.t, point, tangent })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelCurve { kind: c.kind, descriptor: c.descriptor, samples, frame: g.entries().matmul(&c.frame) })
}
