//! Affine connections on a chart `R^m` with polynomial Christoffel symbols:
//! projective changes, recovery of the one-form `Υ`, geodesics, torsion, and
//! contact torsion on the chart `θ = dz - Σ y^i dx^i`.
//!
//! Convention: `∇_{∂_i} ∂_j = Γ^k_{ij} ∂_k`, so `T^k_{ij} = Γ^k_{ij} - Γ^k_{ji}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::polynomial::Polynomial;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct AffineConnection<S> {
    dim: usize,
    christoffel: Vec<Polynomial<S>>,
}

impl<S: Scalar> AffineConnection<S> {
    pub fn flat(dim: usize) -> Self {
        Self { dim, christoffel: vec![Polynomial::zero(dim); dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Polynomial<S> {
        &self.christoffel[self.idx(k, i, j)]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, p: Polynomial<S>) {
        let idx = self.idx(k, i, j);
        self.christoffel[idx] = p;
    }

    /// `Γ^k_{ij}(x)` flattened as `(k, i, j)`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.christoffel.iter().map(|p| p.eval_f64(x)).collect()
    }

    /// Torsion components `T^k_{ij}` as polynomials.
    pub fn torsion(&self) -> Vec<Polynomial<S>> {
        let m = self.dim;
        let mut out = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out.push(self.get(k, i, j).sub(self.get(k, j, i)));
                }
            }
        }
        out
    }

    pub fn torsion_at(&self, x: &[f64]) -> Vec<f64> {
        self.torsion().iter().map(|p| p.eval_f64(x)).collect()
    }

    /// `Γ^k_{(ij)}`.
    pub fn symmetrize(&self) -> Self {
        let m = self.dim;
        let half = S::from_ratio(1, 2);
        let mut out = Self::flat(m);
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out.set(k, i, j, self.get(k, i, j).add(self.get(k, j, i)).scale(&half));
                }
            }
        }
        out
    }

    /// Adds a tensor `A^k_{ij}` given in `(k, i, j)` order.
    pub fn add_tensor(&self, a: &[Polynomial<S>]) -> Result<Self> {
        if a.len() != self.christoffel.len() {
            return Err(Error::DimensionMismatch { expected: self.christoffel.len(), got: a.len() });
        }
        Ok(Self {
            dim: self.dim,
            christoffel: self.christoffel.iter().zip(a).map(|(g, t)| g.add(t)).collect(),
        })
    }

    /// `Γ'^k_{ij} = Γ^k_{ij} + Υ_i δ^k_j + Υ_j δ^k_i`.
    pub fn projective_push(&self, upsilon: &[Polynomial<S>]) -> Result<Self> {
        let m = self.dim;
        if upsilon.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: upsilon.len() });
        }
        let mut out = self.clone();
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut p = out.get(k, i, j).clone();
                    if k == j {
                        p = p.add(&upsilon[i]);
                    }
                    if k == i {
                        p = p.add(&upsilon[j]);
                    }
                    out.set(k, i, j, p);
                }
            }
        }
        Ok(out)
    }

    pub fn convert<T: Scalar>(&self) -> AffineConnection<T> {
        AffineConnection { dim: self.dim, christoffel: self.christoffel.iter().map(Polynomial::convert).collect() }
    }

    /// File form `{dim, christoffel: {"k,i,j": polynomial}}`, 1-based, nonzero entries only.
    pub fn to_json(&self) -> ConnectionJson {
        let m = self.dim;
        let mut christoffel = BTreeMap::new();
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let p = self.get(k, i, j);
                    if !p.is_zero() {
                        christoffel.insert(format!("{},{},{}", k + 1, i + 1, j + 1), p.to_string());
                    }
                }
            }
        }
        ConnectionJson { dim: m, christoffel }
    }

    pub fn from_json(json: &ConnectionJson) -> Result<Self> {
        let m = json.dim;
        if m == 0 {
            return Err(Error::Parse("connection dimension must be positive".into()));
        }
        let mut out = Self::flat(m);
        for (key, text) in &json.christoffel {
            let idx: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad index key `{key}`"))))
                .collect::<Result<_>>()?;
            if idx.len() != 3 || idx.iter().any(|&v| v == 0 || v > m) {
                return Err(Error::Parse(format!("index key `{key}` outside 1..={m}")));
            }
            out.set(idx[0] - 1, idx[1] - 1, idx[2] - 1, Polynomial::parse(text, m)?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionJson {
    pub dim: usize,
    pub christoffel: BTreeMap<String, String>,
}

/// Outcome of [`recover_upsilon`].
#[derive(Clone, Debug, PartialEq)]
pub enum UpsilonRecovery {
    Equivalent { values: Vec<Vec<f64>>, max_residual: f64 },
    NotEquivalent { max_residual: f64 },
}

pub const RECOVERY_RESIDUAL: f64 = 1e-8;

/// Solves `Γ2 - Γ1 = Υ_i δ^k_j + Υ_j δ^k_i` for `Υ` in least squares at each sample.
pub fn recover_upsilon<S: Scalar>(
    nabla1: &AffineConnection<S>,
    nabla2: &AffineConnection<S>,
    points: &[Vec<f64>],
) -> Result<UpsilonRecovery> {
    let m = nabla1.dim;
    if nabla2.dim != m {
        return Err(Error::DimensionMismatch { expected: m, got: nabla2.dim });
    }
    // rows indexed by (k, i, j), columns by the components of Υ
    let mut rows = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut row = vec![0.0; m];
                if k == j {
                    row[i] += 1.0;
                }
                if k == i {
                    row[j] += 1.0;
                }
                rows.push(row);
            }
        }
    }
    let mut values = Vec::with_capacity(points.len());
    let mut max_residual: f64 = 0.0;
    for x in points {
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: x.len() });
        }
        let a: Vec<f64> = nabla2.eval(x).iter().zip(nabla1.eval(x)).map(|(p, q)| p - q).collect();
        let (u, r) = least_squares(&rows, &a);
        max_residual = max_residual.max(r);
        values.push(u);
    }
    Ok(if max_residual < RECOVERY_RESIDUAL {
        UpsilonRecovery::Equivalent { values, max_residual }
    } else {
        UpsilonRecovery::NotEquivalent { max_residual }
    })
}

pub const GEODESIC_STEP: f64 = 1e-3;
pub const BLOW_UP: f64 = 1e6;

/// Sampled geodesic; `start` is the index of the sample at `t = 0`.
/// Samples are `GEODESIC_STEP` apart in the parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicCurve {
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub start: usize,
    pub blew_up: bool,
}

impl GeodesicCurve {
    /// Polyline refined by cubic Hermite interpolation so that no segment is
    /// longer than `max_len`.
    pub fn densified(&self, max_len: f64) -> Vec<Vec<f64>> {
        let h = GEODESIC_STEP;
        let mut out = vec![self.points[0].clone()];
        for i in 1..self.points.len() {
            let (p0, p1) = (&self.points[i - 1], &self.points[i]);
            let (v0, v1) = (&self.velocities[i - 1], &self.velocities[i]);
            let pieces = (dist(p0, p1) / max_len).ceil().max(1.0) as usize;
            for k in 1..pieces {
                let s = k as f64 / pieces as f64;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                out.push(
                    (0..p0.len())
                        .map(|j| h00 * p0[j] + h10 * h * v0[j] + h01 * p1[j] + h11 * h * v1[j])
                        .collect(),
                );
            }
            out.push(p1.clone());
        }
        out
    }
}

fn acceleration(gamma: &[f64], m: usize, v: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; m];
    for (k, ak) in a.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += gamma[(k * m + i) * m + j] * v[i] * v[j];
            }
        }
        *ak = -s;
    }
    a
}

type Trajectory = (Vec<Vec<f64>>, Vec<Vec<f64>>, bool);

fn integrate<S: Scalar>(nabla: &AffineConnection<S>, x0: &[f64], v0: &[f64], t: f64, h: f64) -> Trajectory {
    let m = nabla.dim;
    let steps = (t.abs() / h).round() as usize;
    let h = if t < 0.0 { -h } else { h };
    let f = |state: &[f64]| -> Vec<f64> {
        let (x, v) = state.split_at(m);
        let a = acceleration(&nabla.eval(x), m, v);
        v.iter().chain(&a).copied().collect()
    };
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let mut out = vec![x0.to_vec()];
    let mut vel = vec![v0.to_vec()];
    for _ in 0..steps {
        let k1 = f(&y);
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = f(&y2);
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = f(&y3);
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = f(&y4);
        for (idx, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
        let norm = y[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > BLOW_UP {
            return (out, vel, true);
        }
        out.push(y[..m].to_vec());
        vel.push(y[m..].to_vec());
    }
    (out, vel, false)
}

/// RK4 solution of `ẍ^k + Γ^k_{ij} ẋ^i ẋ^j = 0` on `t ∈ [t0, t1]` (`t0 <= 0 <= t1`).
pub fn geodesic<S: Scalar>(
    nabla: &AffineConnection<S>,
    x0: &[f64],
    v0: &[f64],
    t_range: (f64, f64),
) -> Result<GeodesicCurve> {
    let m = nabla.dim;
    if x0.len() != m || v0.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: x0.len().min(v0.len()) });
    }
    if v0.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroTangent);
    }
    let (t0, t1) = (t_range.0.min(0.0), t_range.1.max(0.0));
    let fast: AffineConnection<f64> = nabla.convert();
    let (mut back, mut back_v, b_blow) = integrate(&fast, x0, v0, t0, GEODESIC_STEP);
    let (fwd, fwd_v, f_blow) = integrate(&fast, x0, v0, t1, GEODESIC_STEP);
    back.reverse();
    back_v.reverse();
    let start = back.len() - 1;
    back.extend(fwd.into_iter().skip(1));
    back_v.extend(fwd_v.into_iter().skip(1));
    Ok(GeodesicCurve { points: back, velocities: back_v, start, blew_up: b_blow || f_blow })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn point_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (mut len2, mut proj) = (0.0, 0.0);
    for ((pi, ai), bi) in p.iter().zip(a).zip(b) {
        let d = bi - ai;
        len2 += d * d;
        proj += (pi - ai) * d;
    }
    let t = if len2 == 0.0 { 0.0 } else { (proj / len2).clamp(0.0, 1.0) };
    p.iter()
        .zip(a)
        .zip(b)
        .map(|((pi, ai), bi)| {
            let q = ai + t * (bi - ai);
            (pi - q) * (pi - q)
        })
        .sum::<f64>()
        .sqrt()
}

const BLOCK: usize = 32;

/// Polyline with bounding balls over runs of `BLOCK` segments, for exact
/// nearest-segment queries that skip distant runs.
struct IndexedPolyline<'a> {
    points: &'a [Vec<f64>],
    balls: Vec<(usize, Vec<f64>, f64)>,
}

impl<'a> IndexedPolyline<'a> {
    fn new(points: &'a [Vec<f64>]) -> Self {
        let segments = points.len().saturating_sub(1);
        let balls = (0..segments)
            .step_by(BLOCK)
            .map(|lo| {
                let hi = (lo + BLOCK).min(segments);
                let run = &points[lo..=hi];
                let dim = run[0].len();
                let centre: Vec<f64> =
                    (0..dim).map(|j| run.iter().map(|q| q[j]).sum::<f64>() / run.len() as f64).collect();
                let radius = run.iter().map(|q| dist(q, &centre)).fold(0.0, f64::max);
                (lo, centre, radius)
            })
            .collect();
        Self { points, balls }
    }

    fn distance(&self, p: &[f64]) -> f64 {
        if self.points.len() == 1 {
            return dist(p, &self.points[0]);
        }
        let segments = self.points.len() - 1;
        let mut order: Vec<(f64, usize)> =
            self.balls.iter().map(|(lo, c, r)| ((dist(p, c) - r).max(0.0), *lo)).collect();
        order.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut best = f64::INFINITY;
        for (bound, lo) in order {
            if bound >= best {
                break;
            }
            for i in lo..(lo + BLOCK).min(segments) {
                best = best.min(point_segment(p, &self.points[i], &self.points[i + 1]));
            }
        }
        best
    }
}

/// Symmetric Hausdorff distance between two polylines (vertices to segments).
pub fn hausdorff_polyline(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let (ia, ib) = (IndexedPolyline::new(a), IndexedPolyline::new(b));
    let ab = a.par_iter().map(|p| ib.distance(p)).reduce(|| 0.0, f64::max);
    let ba = b.par_iter().map(|p| ia.distance(p)).reduce(|| 0.0, f64::max);
    ab.max(ba)
}

/// Resamples a polyline at uniform arc-length spacing `ds`.
pub fn resample_arclength(points: &[Vec<f64>], ds: f64) -> Vec<Vec<f64>> {
    let mut out = vec![points[0].clone()];
    let mut carry = 0.0;
    for w in points.windows(2) {
        let seg = dist(&w[0], &w[1]);
        let mut s = ds - carry;
        while s <= seg {
            let t = s / seg;
            out.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + t * (b - a)).collect());
            s += ds;
        }
        carry = seg - (s - ds);
    }
    if out.last() != points.last() {
        out.push(points.last().unwrap().clone());
    }
    out
}

/// Walks from `points[0]` until the distance to `center` first exceeds `r`,
/// cutting the last segment at the sphere.
fn clip_half(points: &[Vec<f64>], center: &[f64], r: f64) -> Vec<Vec<f64>> {
    let mut out = vec![points[0].clone()];
    for w in points.windows(2) {
        let d1 = dist(&w[1], center);
        if d1 > r {
            // bisect the crossing
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let p: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| a + mid * (b - a)).collect();
                if dist(&p, center) > r {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + lo * (b - a)).collect());
            return out;
        }
        out.push(w[1].clone());
    }
    out
}

fn halves(c: &GeodesicCurve, max_len: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let split = |lo: usize, hi: usize| {
        let part = GeodesicCurve {
            points: c.points[lo..hi].to_vec(),
            velocities: c.velocities[lo..hi].to_vec(),
            start: 0,
            blew_up: c.blew_up,
        };
        part.densified(max_len)
    };
    let mut back = split(0, c.start + 1);
    back.reverse();
    (back, split(c.start, c.points.len()))
}

fn reach(half: &[Vec<f64>], center: &[f64]) -> f64 {
    half.iter().map(|p| dist(p, center)).fold(0.0, f64::max)
}

/// Distance between the unparametrized paths of geodesics through the same
/// initial point: both are refined by Hermite interpolation, clipped to the
/// largest common ball around it (90% of the smallest reach), resampled by
/// arc length, and compared by Hausdorff distance.
pub fn path_distance(curves: (&GeodesicCurve, &GeodesicCurve)) -> f64 {
    let (a, b) = curves;
    let center = a.points[a.start].clone();
    let coarse = |c: &GeodesicCurve| c.points.iter().map(|p| dist(p, &center)).fold(0.0, f64::max);
    let max_len = coarse(a).min(coarse(b)).max(1e-12) / 4000.0;
    let (a0, a1) = halves(a, max_len);
    let (b0, b1) = halves(b, max_len);
    let r = 0.9 * [&a0, &a1, &b0, &b1].iter().map(|h| reach(h, &center)).fold(f64::INFINITY, f64::min);
    let clip = |back: &[Vec<f64>], fwd: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut path = clip_half(back, &center, r);
        path.reverse();
        path.extend(clip_half(fwd, &center, r).into_iter().skip(1));
        resample_arclength(&path, r / 2000.0)
    };
    hausdorff_polyline(&clip(&a0, &a1), &clip(&b0, &b1))
}

/// Sparse exterior form on `R^d`: sorted index tuples to coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Form {
    pub terms: BTreeMap<Vec<usize>, f64>,
}

impl Form {
    pub fn one_form(coeffs: &[f64]) -> Self {
        let mut terms = BTreeMap::new();
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                terms.insert(vec![i], c);
            }
        }
        Self { terms }
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut idx: Vec<usize> = a.iter().chain(b).copied().collect();
                let mut sign = 1.0;
                for i in 1..idx.len() {
                    let mut j = i;
                    while j > 0 && idx[j - 1] > idx[j] {
                        idx.swap(j - 1, j);
                        sign = -sign;
                        j -= 1;
                    }
                }
                if idx.windows(2).any(|w| w[0] == w[1]) {
                    continue;
                }
                *terms.entry(idx).or_insert(0.0) += sign * x * y;
            }
        }
        terms.retain(|_, v| *v != 0.0);
        Self { terms }
    }
}

/// The chart `R^{2n+1}` with coordinates `(x^1..x^n, y^1..y^n, z)` and
/// contact form `θ = dz - Σ y^i dx^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContactChart {
    n: usize,
}

impl ContactChart {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDescriptor("contact chart needs n >= 1".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutsideChart);
        }
        Ok(())
    }

    /// Coefficients of `θ` as polynomials in `x1..x_{2n+1}`.
    pub fn theta<S: Scalar>(&self) -> Vec<Polynomial<S>> {
        let d = self.dim();
        let mut out = vec![Polynomial::zero(d); d];
        for i in 0..self.n {
            out[i] = Polynomial::variable(d, self.n + i).scale(&-S::one());
        }
        out[d - 1] = Polynomial::constant(d, S::one());
        out
    }

    pub fn theta_at(&self, p: &[f64]) -> Vec<f64> {
        self.theta::<f64>().iter().map(|c| c.eval_f64(p)).collect()
    }

    /// `dθ` at `p`, computed from the coefficients of `θ`.
    pub fn dtheta_at(&self, p: &[f64]) -> Form {
        let d = self.dim();
        let theta = self.theta::<f64>();
        let mut terms = BTreeMap::new();
        for (k, c) in theta.iter().enumerate() {
            for j in 0..d {
                let v = c.derivative(j).eval_f64(p);
                if v == 0.0 || j == k {
                    continue;
                }
                let (key, s) = if j < k { (vec![j, k], v) } else { (vec![k, j], -v) };
                *terms.entry(key).or_insert(0.0) += s;
            }
        }
        Form { terms }
    }

    /// Coefficient of `θ ∧ (dθ)^n` on `dx^1 ∧ … ∧ dz`.
    pub fn volume_at(&self, p: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        let dt = self.dtheta_at(p);
        let mut form = Form::one_form(&self.theta_at(p));
        for _ in 0..self.n {
            form = form.wedge(&dt);
        }
        let top: Vec<usize> = (0..self.dim()).collect();
        Ok(form.terms.get(&top).copied().unwrap_or(0.0))
    }

    /// `H` frame `X_1..X_n, Y_1..Y_n` at `p`: `X_i = ∂x_i + y^i ∂z`, `Y_i = ∂y_i`.
    pub fn h_frame(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut frame = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            let mut x = vec![0.0; d];
            x[i] = 1.0;
            x[d - 1] = p[self.n + i];
            frame.push(x);
        }
        for i in 0..self.n {
            let mut y = vec![0.0; d];
            y[self.n + i] = 1.0;
            frame.push(y);
        }
        frame
    }

    /// Reeb field `∂z`.
    pub fn reeb(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        r[self.dim() - 1] = 1.0;
        r
    }

    /// Projection `w - θ(w) R` onto `H`, in `H`-frame components.
    pub fn h_components(&self, p: &[f64], w: &[f64]) -> Vec<f64> {
        let theta = self.theta_at(p);
        let tw: f64 = theta.iter().zip(w).map(|(a, b)| a * b).sum();
        let proj: Vec<f64> = w.iter().zip(self.reeb()).map(|(a, r)| a - tw * r).collect();
        // X_i and Y_i components are the x^i and y^i coordinates
        proj[..2 * self.n].to_vec()
    }
}

/// Contact torsion at `p`: components `c^c_{ab}` with
/// `π_H T(F_a, F_b) = Σ_c c^c_{ab} F_c` over the `H` frame, flattened `(c, a, b)`.
pub fn contact_torsion<S: Scalar>(nabla: &AffineConnection<S>, chart: &ContactChart, p: &[f64]) -> Result<Vec<f64>> {
    if nabla.dim() != chart.dim() {
        return Err(Error::DimensionMismatch { expected: chart.dim(), got: nabla.dim() });
    }
    chart.check_point(p)?;
    let d = chart.dim();
    let r = 2 * chart.n();
    let t = nabla.torsion_at(p);
    let frame = chart.h_frame(p);
    let mut out = vec![0.0; r * r * r];
    for a in 0..r {
        for b in 0..r {
            let mut w = vec![0.0; d];
            for (k, wk) in w.iter_mut().enumerate() {
                for i in 0..d {
                    for j in 0..d {
                        *wk += t[(k * d + i) * d + j] * frame[a][i] * frame[b][j];
                    }
                }
            }
            for (c, v) in chart.h_components(p, &w).into_iter().enumerate() {
                out[(c * r + a) * r + b] = v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type P = Polynomial<Rational>;

    #[test]
    fn push_example_in_plane() {
        let flat = AffineConnection::<Rational>::flat(2);
        let ups = vec![P::constant(2, Rational::from_i64(1)), P::zero(2)];
        let g = flat.projective_push(&ups).unwrap();
        let two = P::constant(2, Rational::from_i64(2));
        let one = P::constant(2, Rational::from_i64(1));
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let expected = match (k, i, j) {
                        (0, 0, 0) => two.clone(),
                        (1, 0, 1) | (1, 1, 0) => one.clone(),
                        _ => P::zero(2),
                    };
                    assert_eq!(g.get(k, i, j), &expected, "({k},{i},{j})");
                }
            }
        }
        assert_eq!(flat.projective_push(&[P::zero(2), P::zero(2)]).unwrap(), flat);
    }

    #[test]
    fn push_is_an_action_and_keeps_torsion() {
        let mut c = AffineConnection::<Rational>::flat(2);
        c.set(0, 0, 1, P::parse("x1*x2", 2).unwrap());
        c.set(1, 1, 1, P::parse("3 - x1", 2).unwrap());
        let u1 = vec![P::parse("x2", 2).unwrap(), P::parse("1/2", 2).unwrap()];
        let u2 = vec![P::parse("x1^2", 2).unwrap(), P::parse("-x2", 2).unwrap()];
        let sum: Vec<P> = u1.iter().zip(&u2).map(|(a, b)| a.add(b)).collect();
        let twice = c.projective_push(&u1).unwrap().projective_push(&u2).unwrap();
        assert_eq!(twice, c.projective_push(&sum).unwrap());
        assert_eq!(twice.torsion(), c.torsion());
    }

    #[test]
    fn flat_geodesic_is_a_line() {
        let c = AffineConnection::<f64>::flat(3);
        let g = geodesic(&c, &[1.0, 2.0, 3.0], &[0.5, -1.0, 2.0], (-1.0, 1.0)).unwrap();
        assert!(!g.blew_up);
        for (s, p) in g.points.iter().enumerate() {
            let t = (s as f64 - g.start as f64) * GEODESIC_STEP;
            let e = [1.0 + 0.5 * t, 2.0 - t, 3.0 + 2.0 * t];
            assert!(dist(p, &e) < 1e-10);
        }
    }

    #[test]
    fn blow_up_is_flagged() {
        let mut c = AffineConnection::<f64>::flat(1);
        c.set(0, 0, 0, Polynomial::constant(1, -1.0));
        // ẍ = ẋ², x = -ln(1 - t) blows up near t = 1
        let g = geodesic(&c, &[0.0], &[1.0], (0.0, 2.0)).unwrap();
        assert!(g.blew_up);
    }

    #[test]
    fn contact_condition() {
        let chart = ContactChart::new(2).unwrap();
        let v = chart.volume_at(&[0.3, -1.0, 2.0, 0.5, 7.0]).unwrap();
        assert!(v.abs() > 0.5);
    }

    #[test]
    fn json_round_trip() {
        let mut c = AffineConnection::<Rational>::flat(3);
        c.set(2, 0, 1, P::parse("x1 - 2/3*x3^2", 3).unwrap());
        let back = AffineConnection::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let bad = ConnectionJson { dim: 2, christoffel: [("3,1,1".to_string(), "1".to_string())].into() };
        assert!(AffineConnection::<Rational>::from_json(&bad).is_err());
    }

    #[test]
    fn hausdorff_basics() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = vec![vec![0.0, 0.1], vec![1.0, 0.1]];
        assert!((hausdorff_polyline(&a, &b) - 0.1).abs() < 1e-15);
        let r = resample_arclength(&a, 0.25);
        assert_eq!(r.len(), 5);
    }

    proptest::proptest! {
        #[test]
        fn pruned_search_matches_full_scan(
            a in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 1..120),
            b in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 1..120),
        ) {
            let full = |p: &Vec<f64>, line: &[Vec<f64>]| {
                if line.len() == 1 {
                    return dist(p, &line[0]);
                }
                line.windows(2).map(|w| point_segment(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
            };
            let ab = a.iter().map(|p| full(p, &b)).fold(0.0, f64::max);
            let ba = b.iter().map(|p| full(p, &a)).fold(0.0, f64::max);
            proptest::prop_assert_eq!(hausdorff_polyline(&a, &b), ab.max(ba));
        }
    }
}
