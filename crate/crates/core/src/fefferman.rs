//! The inclusion `α: sp(2n+2) → sl(2n+2)`, the splitting of `α(g_-1)` into a
//! `g̃_-1` part and a commuting `g̃_0` part, and the transfer `Φ` of curvature
//! maps `Λ²(g/p) → g` to `Λ²(g̃/p̃) → g̃`.
//!
//! Curvature maps are stored on the complement `g_-` of `p` (resp. `g̃_-`),
//! indexed by positions in the `g_-` basis of [`AlgebraTables`].

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraTables, GradedElement};
use crate::error::{Error, Result};
use crate::group::{adjoint, GroupElement};
use crate::matrix::Mat;
use crate::random::random_rational;
use crate::scalar::{convert, parse_rational, Rational, Scalar};

/// Alternating map `Λ²(g/p) → g` on the `g_-` representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureMap<S> {
    descriptor: AlgebraDescriptor,
    values: Vec<Vec<GradedElement<S>>>,
}

impl<S: Scalar> CurvatureMap<S> {
    pub fn zero(descriptor: AlgebraDescriptor) -> Self {
        let q = AlgebraTables::shared(descriptor).negative.len();
        Self { descriptor, values: vec![vec![GradedElement::zero(descriptor); q]; q] }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    /// Dimension of `g/p`.
    pub fn quotient_dim(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, a: usize, b: usize) -> &GradedElement<S> {
        &self.values[a][b]
    }

    /// Sets `k(e_a, e_b) = v` and `k(e_b, e_a) = -v`.
    pub fn set(&mut self, a: usize, b: usize, v: GradedElement<S>) -> Result<()> {
        if v.descriptor() != self.descriptor {
            return Err(Error::AlgebraMismatch { left: self.descriptor, right: v.descriptor() });
        }
        if a == b {
            return if v.is_zero() { Ok(()) } else { Err(Error::Parse("k(e_a, e_a) must vanish".into())) };
        }
        self.values[b][a] = v.scale(&-S::one());
        self.values[a][b] = v;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(GradedElement::is_zero)
    }

    /// Every value lies in the parabolic subalgebra.
    pub fn torsion_free(&self) -> bool {
        self.values.iter().flatten().all(GradedElement::in_parabolic)
    }

    pub fn convert<T: Scalar>(&self) -> CurvatureMap<T> {
        CurvatureMap {
            descriptor: self.descriptor,
            values: self.values.iter().map(|r| r.iter().map(GradedElement::convert).collect()).collect(),
        }
    }
}

/// `α(x)`: the same matrix read in `sl(2n+2)`.
pub fn alpha<S: Scalar>(x: &GradedElement<S>) -> Result<GradedElement<S>> {
    let d = x.descriptor();
    if !d.is_contact() {
        return Err(Error::IncompatibleDescriptor { which: "alpha", expected: "sp", got: d });
    }
    x.reinterpret(d.ambient_projective()?)
}

/// `α` on group elements.
pub fn alpha_group<S: Scalar>(g: &GroupElement<S>) -> Result<GroupElement<S>> {
    let d = g.descriptor();
    if !d.is_contact() {
        return Err(Error::IncompatibleDescriptor { which: "alpha_group", expected: "sp", got: d });
    }
    GroupElement::new(d.ambient_projective()?, g.entries().clone())
}

/// Splits `α(x)` for `x ∈ g_-1` into `x̃ ∈ g̃_-1` (the first column of `x`)
/// and `ã = α(x) - x̃ ∈ g̃_0`.
pub fn decompose_g_minus1<S: Scalar>(
    x: &GradedElement<S>,
) -> Result<(GradedElement<S>, GradedElement<S>)> {
    let ax = alpha(x)?;
    if !x.is_zero() && x.pure_grade() != Some(-1) {
        return Err(Error::NotPureGrade { expected: -1 });
    }
    let size = x.descriptor().size();
    let m = x.entries();
    let xt = Mat::from_fn(size, size, |i, j| if j == 0 { m[(i, 0)].clone() } else { S::zero() });
    let xt = GradedElement::new(ax.descriptor(), xt)?;
    let at = ax.sub(&xt)?;
    Ok((xt, at))
}

/// Exact test that two nonzero vectors span the same ray (positive multiple).
pub fn same_ray<S: Scalar>(u: &[S], v: &[S]) -> bool {
    let Some(p) = u.iter().position(|x| !x.negligible()) else { return false };
    if v[p].negligible() {
        return false;
    }
    let ratio_pos = (u[p].clone() * v[p].clone()).is_positive();
    ratio_pos
        && u.iter()
            .zip(v)
            .all(|(a, b)| (a.clone() * v[p].clone() - b.clone() * u[p].clone()).negligible())
}

/// Precomputed data of the quotient isomorphism `g/p → g̃/p̃`.
pub struct FeffermanTransfer {
    contact: Arc<AlgebraTables>,
    projective: Arc<AlgebraTables>,
    /// Column `b` holds the `g̃_-` coordinates of `α(e_b)`.
    underline_alpha: Mat<Rational>,
    underline_alpha_inverse: Mat<Rational>,
}

impl FeffermanTransfer {
    pub fn new(contact: AlgebraDescriptor) -> Result<Self> {
        if !contact.is_contact() {
            return Err(Error::IncompatibleDescriptor { which: "FeffermanTransfer", expected: "sp", got: contact });
        }
        let c = AlgebraTables::shared(contact);
        let p = AlgebraTables::shared(contact.ambient_projective()?);
        let q = c.negative.len();
        if q != p.negative.len() {
            return Err(Error::DimensionMismatch { expected: q, got: p.negative.len() });
        }
        let mut u = Mat::zeros(q, q);
        for (b, &gi) in c.negative.iter().enumerate() {
            let coords = p.coordinates(alpha(&c.basis[gi])?.entries());
            for (a, &gj) in p.negative.iter().enumerate() {
                u[(a, b)] = coords[gj].clone();
            }
        }
        let inv = u.inverse()?;
        Ok(Self { contact: c, projective: p, underline_alpha: u, underline_alpha_inverse: inv })
    }

    pub fn contact(&self) -> AlgebraDescriptor {
        self.contact.descriptor
    }

    pub fn projective(&self) -> AlgebraDescriptor {
        self.projective.descriptor
    }

    /// Matrix of `g/p → g̃/p̃` in the `g_-`, `g̃_-` bases.
    pub fn underline_alpha(&self) -> &Mat<Rational> {
        &self.underline_alpha
    }

    /// `g_-` coordinates of the class of `x` in `g/p`.
    pub fn contact_class<S: Scalar>(&self, x: &GradedElement<S>) -> Vec<S> {
        let coords = self.contact.coordinates(x.entries());
        self.contact.negative.iter().map(|&i| coords[i].clone()).collect()
    }

    /// `g̃_-` coordinates of the class of `x` in `g̃/p̃`.
    pub fn projective_class<S: Scalar>(&self, x: &GradedElement<S>) -> Vec<S> {
        let coords = self.projective.coordinates(x.entries());
        self.projective.negative.iter().map(|&i| coords[i].clone()).collect()
    }

    /// Action of a group element on `g/p` coordinates: `v ↦ Ad(g) v mod p`.
    pub fn contact_quotient_action<S: Scalar>(&self, g: &GroupElement<S>, v: &[S]) -> Result<Vec<S>> {
        let x = self.lift(&self.contact, v);
        Ok(self.contact_class(&adjoint(g, &x)?))
    }

    /// Action of a group element on `g̃/p̃` coordinates.
    pub fn projective_quotient_action<S: Scalar>(&self, g: &GroupElement<S>, v: &[S]) -> Result<Vec<S>> {
        let x = self.lift(&self.projective, v);
        Ok(self.projective_class(&adjoint(g, &x)?))
    }

    fn lift<S: Scalar>(&self, t: &AlgebraTables, v: &[S]) -> GradedElement<S> {
        let mut coords = vec![S::zero(); t.dim()];
        for (&i, x) in t.negative.iter().zip(v) {
            coords[i] = x.clone();
        }
        t.element(&coords)
    }

    /// `underline-α` applied to `g/p` coordinates.
    pub fn apply_underline_alpha<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        self.underline_alpha.map(convert::<Rational, S>).mul_vec(v)
    }

    /// `Φ = Λ²((underline-α)^{-1})^* ⊗ α`.
    pub fn phi_map<S: Scalar>(&self, k: &CurvatureMap<S>) -> Result<CurvatureMap<S>> {
        if k.descriptor() != self.contact() {
            return Err(Error::AlgebraMismatch { left: self.contact(), right: k.descriptor() });
        }
        let q = k.quotient_dim();
        let m = self.underline_alpha_inverse.map(convert::<Rational, S>);
        let mut out = CurvatureMap::zero(self.projective());
        let size = self.contact().size();
        for a in 0..q {
            for b in (a + 1)..q {
                let mut acc = Mat::<S>::zeros(size, size);
                for c in 0..q {
                    if m[(c, a)].is_zero() {
                        continue;
                    }
                    for d in 0..q {
                        if m[(d, b)].is_zero() || c == d {
                            continue;
                        }
                        let v = k.value(c, d);
                        if v.is_zero() {
                            continue;
                        }
                        acc = &acc + &v.entries().scale(&(m[(c, a)].clone() * m[(d, b)].clone()));
                    }
                }
                out.set(a, b, GradedElement::new(self.projective(), acc)?)?;
            }
        }
        Ok(out)
    }
}

/// Random rational combination of basis two-forms `ε^a ∧ ε^b ⊗ A_j`; with
/// `parabolic_only` the values are drawn from `p`.
pub fn random_curvature_map<R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    rng: &mut R,
    terms: usize,
    parabolic_only: bool,
) -> CurvatureMap<Rational> {
    let t = AlgebraTables::shared(descriptor);
    let q = t.negative.len();
    let targets: Vec<usize> =
        (0..t.dim()).filter(|&j| !parabolic_only || t.grades[j] >= 0).collect();
    let mut values = vec![vec![vec![Rational::from_i64(0); t.dim()]; q]; q];
    for _ in 0..terms {
        let a = rng.gen_range(0..q);
        let mut b = rng.gen_range(0..q - 1);
        if b >= a {
            b += 1;
        }
        let j = targets[rng.gen_range(0..targets.len())];
        let c = random_rational(rng, 5);
        values[a][b][j] += &c;
        values[b][a][j] -= &c;
    }
    let mut k = CurvatureMap::zero(descriptor);
    for a in 0..q {
        for b in (a + 1)..q {
            k.set(a, b, t.element(&values[a][b])).expect("same descriptor");
        }
    }
    k
}

/// Serialized curvature map: nonzero `k(e_a, e_b)`, `a < b`, as exact
/// basis coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMapJson {
    pub descriptor: AlgebraDescriptor,
    pub entries: Vec<CurvatureEntryJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEntryJson {
    pub a: usize,
    pub b: usize,
    pub value: Vec<String>,
}

impl CurvatureMap<Rational> {
    pub fn to_json(&self) -> CurvatureMapJson {
        let t = AlgebraTables::shared(self.descriptor);
        let mut entries = Vec::new();
        for a in 0..self.quotient_dim() {
            for b in (a + 1)..self.quotient_dim() {
                let v = &self.values[a][b];
                if !v.is_zero() {
                    let value = t.coordinates(v.entries()).iter().map(Scalar::to_exact_string).collect();
                    entries.push(CurvatureEntryJson { a, b, value });
                }
            }
        }
        CurvatureMapJson { descriptor: self.descriptor, entries }
    }

    pub fn from_json(json: &CurvatureMapJson) -> Result<Self> {
        let t = AlgebraTables::shared(json.descriptor);
        let mut k = Self::zero(json.descriptor);
        for e in &json.entries {
            if e.value.len() != t.dim() {
                return Err(Error::DimensionMismatch { expected: t.dim(), got: e.value.len() });
            }
            if e.a >= k.quotient_dim() || e.b >= k.quotient_dim() || e.a == e.b {
                return Err(Error::Parse(format!("bad index pair ({}, {})", e.a, e.b)));
            }
            let coords = e
                .value
                .iter()
                .map(|s| parse_rational(s).ok_or_else(|| Error::Parse(format!("not a rational: {s}"))))
                .collect::<Result<Vec<_>>>()?;
            k.set(e.a, e.b, t.element(&coords))?;
        }
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::algebra::{basis, GradeSelection};
    use crate::group::exp_nilpotent;

    fn sp(n: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::sp(n).unwrap()
    }

    #[test]
    fn alpha_is_a_homomorphism() {
        let b = basis::<Rational>(sp(1), GradeSelection::All).unwrap();
        for x in &b {
            for y in &b {
                let lhs = alpha(&x.bracket(y).unwrap()).unwrap();
                let rhs = alpha(x).unwrap().bracket(&alpha(y).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn alpha_grades() {
        for x in basis::<Rational>(sp(2), GradeSelection::All).unwrap() {
            let g = x.pure_grade().unwrap();
            let ax = alpha(&x).unwrap();
            if g == -2 {
                assert_eq!(ax.pure_grade(), Some(-1));
            }
            assert_eq!(x.in_parabolic(), ax.in_parabolic());
        }
    }

    #[test]
    fn decomposition_n1() {
        let d = sp(1);
        let t = AlgebraTables::shared(d);
        let size = d.size();
        // the g_-1 element whose column has a 1 in row 1 (0-based)
        let x = t
            .basis
            .iter()
            .find(|b| b.pure_grade() == Some(-1) && b.entries()[(1, 0)] == Rational::from_i64(1))
            .unwrap()
            .clone();
        let (xt, at) = decompose_g_minus1(&x).unwrap();
        let mut expected = Mat::zeros(size, size);
        expected[(1, 0)] = Rational::from_i64(1);
        assert_eq!(xt.entries(), &expected);
        assert_eq!(at.pure_grade(), Some(0));
        assert!(at.bracket(&xt).unwrap().is_zero());
        let (z1, z2) = decompose_g_minus1(&GradedElement::<Rational>::zero(d)).unwrap();
        assert!(z1.is_zero() && z2.is_zero());
    }

    #[test]
    fn decomposition_rejects_other_grades() {
        let g2 = basis::<Rational>(sp(1), GradeSelection::Grade(-2)).unwrap();
        assert!(decompose_g_minus1(&g2[0]).is_err());
    }

    #[test]
    fn ad_invariance_under_a_tilde() {
        for x in basis::<Rational>(sp(2), GradeSelection::Grade(-1)).unwrap() {
            let (xt, at) = decompose_g_minus1(&x).unwrap();
            for t in [Rational::from_i64(1), Rational::from_i64(2), Rational::from_ratio(1, 2)] {
                let g = exp_nilpotent(&at, &-t).unwrap();
                assert_eq!(adjoint(&g, &xt).unwrap(), xt);
            }
        }
    }

    #[test]
    fn underline_alpha_invertible() {
        for n in 1..=3 {
            let tr = FeffermanTransfer::new(sp(n)).unwrap();
            assert_eq!(tr.underline_alpha().rows(), 2 * n + 1);
            assert!(!num_traits::Zero::is_zero(&tr.underline_alpha().determinant()));
        }
    }

    #[test]
    fn phi_basics() {
        let tr = FeffermanTransfer::new(sp(1)).unwrap();
        assert!(tr.phi_map(&CurvatureMap::<Rational>::zero(sp(1))).unwrap().is_zero());
        let t = AlgebraTables::shared(sp(1));
        let p0 = t.grades.iter().position(|&g| g == 0).unwrap();
        let m2 = t.grades.iter().position(|&g| g == -2).unwrap();
        let mut k = CurvatureMap::zero(sp(1));
        k.set(0, 1, t.basis[p0].clone()).unwrap();
        assert!(k.torsion_free() && tr.phi_map(&k).unwrap().torsion_free());
        let mut k = CurvatureMap::zero(sp(1));
        k.set(0, 2, t.basis[m2].clone()).unwrap();
        assert!(!k.torsion_free() && !tr.phi_map(&k).unwrap().torsion_free());
    }

    #[test]
    fn torsion_equivalence_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tr = FeffermanTransfer::new(sp(1)).unwrap();
        for i in 0..40 {
            let k = random_curvature_map(sp(1), &mut rng, 4, i % 2 == 0);
            let phi = tr.phi_map(&k).unwrap();
            assert_eq!(k.torsion_free(), phi.torsion_free());
            assert_eq!(k.is_zero(), phi.is_zero());
        }
    }

    #[test]
    fn equivariance_over_p() {
        let d = sp(1);
        let tr = FeffermanTransfer::new(d).unwrap();
        let t = AlgebraTables::shared(d);
        let q = t.negative.len();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut elements: Vec<GroupElement<Rational>> = t
            .basis
            .iter()
            .zip(&t.grades)
            .filter(|(_, &g)| g >= 0)
            .filter_map(|(y, _)| exp_nilpotent(y, &Rational::from_i64(1)).ok())
            .collect();
        elements.extend((0..5).map(|_| {
            crate::random::random_subgroup_element::<Rational, _>(d, crate::group::Subgroup::P, &mut rng, 4)
        }));
        for p in elements {
            let ap = alpha_group(&p).unwrap();
            for b in 0..q {
                let mut v = vec![Rational::from_i64(0); q];
                v[b] = Rational::from_i64(1);
                let lhs = tr.apply_underline_alpha(&tr.contact_quotient_action(&p, &v).unwrap());
                let rhs = tr.projective_quotient_action(&ap, &tr.apply_underline_alpha(&v)).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_curvature_map(sp(1), &mut rng, 5, false);
        let text = serde_json::to_string(&k.to_json()).unwrap();
        let back = CurvatureMap::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn rays() {
        let q = |v: i64| Rational::from_i64(v);
        assert!(same_ray(&[q(1), q(2)], &[q(2), q(4)]));
        assert!(!same_ray(&[q(1), q(2)], &[q(-1), q(-2)]));
        assert!(!same_ray(&[q(1), q(2)], &[q(1), q(3)]));
    }
}
