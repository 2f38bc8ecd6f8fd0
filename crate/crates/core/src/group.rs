//! Matrix groups `Sp(2n+2, R) ⊂ SL(2n+2, R)` and `SL(m+1, R)`, their parabolic
//! subgroups and the quotient representations `g/q ≅ R^{m+1}`.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, Family, GradedElement, SymplecticForm};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Subgroups of `G̃ = SL(N)` and `G = Sp(N)` stabilizing the ray (P, P̃) or
/// the vector (Q, Q̃) spanned by `e_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subgroup {
    P,
    Q,
    PTilde,
    QTilde,
}

impl Subgroup {
    pub fn is_contact(self) -> bool {
        matches!(self, Subgroup::P | Subgroup::Q)
    }

    /// Stabilizes the vector, not only the ray.
    pub fn fixes_vector(self) -> bool {
        matches!(self, Subgroup::Q | Subgroup::QTilde)
    }

    fn check(self, descriptor: AlgebraDescriptor) -> Result<()> {
        if self.is_contact() && !descriptor.is_contact() {
            return Err(Error::IncompatibleDescriptor {
                which: if self == Subgroup::P { "P" } else { "Q" },
                expected: "sp",
                got: descriptor,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<S> {
    descriptor: AlgebraDescriptor,
    entries: Mat<S>,
}

impl<S: Scalar> GroupElement<S> {
    /// Checked constructor: `det = 1`, and `gᵗΩg = Ω` for the symplectic family.
    pub fn new(descriptor: AlgebraDescriptor, entries: Mat<S>) -> Result<Self> {
        if !is_group_member(&descriptor, &entries) {
            return Err(Error::NotInAlgebra(descriptor));
        }
        Ok(Self { descriptor, entries })
    }

    pub(crate) fn new_unchecked(descriptor: AlgebraDescriptor, entries: Mat<S>) -> Self {
        Self { descriptor, entries }
    }

    pub fn identity(descriptor: AlgebraDescriptor) -> Self {
        Self { descriptor, entries: Mat::identity(descriptor.size()) }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn entries(&self) -> &Mat<S> {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.descriptor != other.descriptor {
            return Err(Error::AlgebraMismatch { left: self.descriptor, right: other.descriptor });
        }
        Ok(Self::new_unchecked(self.descriptor, self.entries.matmul(&other.entries)))
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self::new_unchecked(self.descriptor, self.entries.inverse()?))
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        self.entries.mul_vec(v)
    }

    pub fn first_column(&self) -> Vec<S> {
        self.entries.column(0)
    }

    pub fn is_member(&self) -> bool {
        is_group_member(&self.descriptor, &self.entries)
    }

    pub fn convert<T: Scalar>(&self) -> GroupElement<T> {
        GroupElement {
            descriptor: self.descriptor,
            entries: self.entries.map(crate::scalar::convert::<S, T>),
        }
    }
}

pub fn is_group_member<S: Scalar>(descriptor: &AlgebraDescriptor, g: &Mat<S>) -> bool {
    let size = descriptor.size();
    if g.rows() != size || g.cols() != size {
        return false;
    }
    if !(g.determinant() - S::one()).negligible() {
        return false;
    }
    match descriptor.family() {
        Family::SlProjective { .. } => true,
        Family::SpContact { n } => {
            let omega = SymplecticForm::new(n).matrix::<S>();
            g.transpose().matmul(&omega).matmul(g).approx_eq(&omega)
        }
    }
}

/// Smallest `k <= size` with `x^k = 0`.
pub fn nilpotency_index<S: Scalar>(x: &Mat<S>) -> Option<u32> {
    let mut power = x.clone();
    for k in 1..=x.rows() as u32 {
        if power.is_zero() {
            return Some(k);
        }
        power = power.matmul(x);
    }
    None
}

fn nilpotent_series<S: Scalar>(x: &Mat<S>, t: &S, index: u32) -> Mat<S> {
    let n = x.rows();
    let tx = x.scale(t);
    let mut term = Mat::identity(n);
    let mut sum = Mat::identity(n);
    for j in 1..index {
        term = term.matmul(&tx).scale(&(S::one() / S::from_i64(i64::from(j))));
        sum = &sum + &term;
    }
    sum
}

/// `exp(t x)` as a finite polynomial; fails unless `x` is nilpotent.
pub fn exp_nilpotent<S: Scalar>(x: &GradedElement<S>, t: &S) -> Result<GroupElement<S>> {
    let index = nilpotency_index(x.entries()).ok_or(Error::NotNilpotent)?;
    Ok(GroupElement::new_unchecked(x.descriptor(), nilpotent_series(x.entries(), t, index)))
}

/// `exp(t x)`: exact polynomial for nilpotent `x`, scaling and squaring otherwise.
pub fn exp<S: Scalar + Float>(x: &GradedElement<S>, t: S) -> GroupElement<S> {
    let m = x.entries();
    if let Some(index) = nilpotency_index(m) {
        return GroupElement::new_unchecked(x.descriptor(), nilpotent_series(m, &t, index));
    }
    let a = m.scale(&t);
    let norm = a.iter().fold(S::zero(), |acc, v| acc + v.abs());
    let half = S::from(0.5).expect("float constant");
    let mut squarings = 0;
    let mut scale = S::one();
    while norm * scale > half {
        scale = scale * half;
        squarings += 1;
    }
    let a = a.scale(&scale);
    let n = m.rows();
    let mut term = Mat::identity(n);
    let mut sum = Mat::identity(n);
    for j in 1..=20 {
        term = term.matmul(&a).scale(&(S::one() / S::from_i64(j)));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    GroupElement::new_unchecked(x.descriptor(), sum)
}

/// Membership in `P`, `Q`, `P̃` or `Q̃`.
pub fn in_subgroup<S: Scalar>(g: &GroupElement<S>, which: Subgroup) -> Result<bool> {
    let d = g.descriptor();
    which.check(d)?;
    let m = g.entries();
    if !(m.determinant() - S::one()).negligible() {
        return Ok(false);
    }
    if which.is_contact() && !g.is_member() {
        return Ok(false);
    }
    let size = d.size();
    // block lower triangular part must vanish
    for i in 0..size {
        for j in 0..size {
            if d.entry_grade(i, j) < 0 && !m[(i, j)].negligible() {
                return Ok(false);
            }
        }
    }
    if (1..size).any(|i| !m[(i, 0)].negligible()) {
        return Ok(false);
    }
    if which.fixes_vector() {
        Ok((m[(0, 0)].clone() - S::one()).negligible())
    } else {
        Ok(m[(0, 0)].is_positive())
    }
}

/// `Ad(g) x = g x g⁻¹`.
pub fn adjoint<S: Scalar>(g: &GroupElement<S>, x: &GradedElement<S>) -> Result<GradedElement<S>> {
    if g.descriptor() != x.descriptor() {
        return Err(Error::AlgebraMismatch { left: g.descriptor(), right: x.descriptor() });
    }
    let inv = g.entries().inverse()?;
    Ok(GradedElement::new_unchecked(x.descriptor(), g.entries().matmul(x.entries()).matmul(&inv)))
}

/// Class of `x` in `g/p`, `g/q`, `g̃/p̃` or `g̃/q̃`: the first column of `x`
/// for `Q`, `Q̃`; the first column without its top entry for `P`, `P̃`.
pub fn quotient_class<S: Scalar>(x: &GradedElement<S>, parabolic: Subgroup) -> Result<Vec<S>> {
    parabolic.check(x.descriptor())?;
    let col = x.first_column();
    Ok(if parabolic.fixes_vector() { col } else { col[1..].to_vec() })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::algebra::{basis, GradeSelection};
    use crate::random::{random_algebra_element, random_subgroup_element};
    use crate::scalar::Rational;

    fn sp(n: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::sp(n).unwrap()
    }

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let d = sp(1);
        let z = GradedElement::<f64>::zero(d);
        assert_eq!(exp(&z, 3.0).entries(), &Mat::identity(4));
        assert_eq!(exp_nilpotent(&GradedElement::<Rational>::zero(d), &q(5)).unwrap(), GroupElement::identity(d));
    }

    #[test]
    fn chain_generator_exponential_is_linear() {
        let d = sp(2);
        let z = &basis::<Rational>(d, GradeSelection::Grade(-2)).unwrap()[0];
        assert!(z.entries().matmul(z.entries()).is_zero());
        let t = Rational::from_ratio(7, 3);
        let g = exp_nilpotent(z, &t).unwrap();
        let expected = &Mat::identity(6) + &z.entries().scale(&t);
        assert_eq!(g.entries(), &expected);
        assert!(g.is_member());
    }

    #[test]
    fn float_exp_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [sp(1), AlgebraDescriptor::sl(3).unwrap()] {
            let x = random_algebra_element::<f64, _>(d, &mut rng, 4).scale(&0.3);
            let a = exp(&x, 1.0);
            let b = exp(&x, -1.0);
            assert!(a.mul(&b).unwrap().entries().max_abs_diff(&Mat::identity(d.size())) < 1e-12);
            assert!(a.is_member());
        }
        // grading element is not nilpotent
        let e = crate::algebra::grading_element::<f64>(sp(1));
        let g = exp(&e, 0.5);
        assert!((g.entries()[(0, 0)] - 0.5f64.exp()).abs() < 1e-13);
        assert!(exp_nilpotent(&e, &0.5).is_err());
    }

    #[test]
    fn subgroup_membership_basics() {
        let d = sp(1);
        let id = GroupElement::<Rational>::identity(d);
        for which in [Subgroup::P, Subgroup::Q, Subgroup::PTilde, Subgroup::QTilde] {
            assert!(in_subgroup(&id, which).unwrap());
        }
        let z = &basis::<Rational>(d, GradeSelection::Grade(-2)).unwrap()[0];
        let g = exp_nilpotent(z, &q(1)).unwrap();
        assert!(!in_subgroup(&g, Subgroup::P).unwrap());
        for k in [1, 2] {
            for y in basis::<Rational>(d, GradeSelection::Grade(k)).unwrap() {
                let g = exp_nilpotent(&y, &Rational::from_ratio(-3, 2)).unwrap();
                assert!(in_subgroup(&g, Subgroup::P).unwrap());
                assert!(in_subgroup(&g, Subgroup::PTilde).unwrap());
            }
        }
        let sl = AlgebraDescriptor::sl(3).unwrap();
        assert!(in_subgroup(&GroupElement::<Rational>::identity(sl), Subgroup::P).is_err());
    }

    #[test]
    fn adjoint_identity_and_first_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [sp(1), AlgebraDescriptor::sl(3).unwrap()] {
            let x = random_algebra_element::<Rational, _>(d, &mut rng, 3);
            assert_eq!(adjoint(&GroupElement::identity(d), &x).unwrap(), x);
            let g = random_subgroup_element::<Rational, _>(d, Subgroup::QTilde, &mut rng, 5);
            assert!(in_subgroup(&g, Subgroup::QTilde).unwrap());
            let ad = adjoint(&g, &x).unwrap();
            assert_eq!(ad.first_column(), g.entries().matmul(x.entries()).column(0));
        }
    }

    #[test]
    fn adjoint_matches_series_for_nilpotent() {
        let d = sp(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = basis::<f64>(d, GradeSelection::Grade(1)).unwrap()[1].add(
            &basis::<f64>(d, GradeSelection::Grade(2)).unwrap()[0].scale(&0.7),
        ).unwrap();
        let x = random_algebra_element::<f64, _>(d, &mut rng, 3);
        let lhs = adjoint(&exp(&a, 1.0), &x).unwrap();
        // x + [a,x] + [a,[a,x]]/2 + ...; ad(a) is nilpotent of order <= 5
        let mut term = x.clone();
        let mut sum = x.clone();
        for k in 1..=6 {
            term = a.bracket(&term).unwrap().scale(&(1.0 / k as f64));
            sum = sum.add(&term).unwrap();
        }
        assert!(lhs.entries().max_abs_diff(sum.entries()) < 1e-10);
    }

    #[test]
    fn quotient_classes() {
        let d = sp(1);
        let z = &basis::<Rational>(d, GradeSelection::Grade(-2)).unwrap()[0];
        assert_eq!(quotient_class(z, Subgroup::Q).unwrap(), vec![q(0), q(0), q(0), q(1)]);
        assert_eq!(quotient_class(z, Subgroup::P).unwrap(), vec![q(0), q(0), q(1)]);
        // q̃ elements have vanishing first column
        let sl = AlgebraDescriptor::sl(3).unwrap();
        for y in basis::<Rational>(sl, GradeSelection::Grade(1)).unwrap() {
            assert!(quotient_class(&y, Subgroup::QTilde).unwrap().iter().all(|v| v == &q(0)));
        }
    }
}
