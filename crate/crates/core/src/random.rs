//! Seeded generators for algebra and group elements.
//!
//! Group elements are products of exponentials of nilpotent basis elements
//! with small rational coefficients times a rational torus element, so they
//! are exact and lie in the requested subgroup by construction.

use num_bigint::BigInt;
use rand::Rng;

use crate::algebra::{AlgebraDescriptor, AlgebraTables, Family, GradedElement};
use crate::group::{exp_nilpotent, GroupElement, Subgroup};
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};

/// Rational `p/q` with `|p| <= height`, `1 <= q <= height`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Rational {
    let h = height.max(1);
    let num = rng.gen_range(-h..=h);
    let den = rng.gen_range(1..=h);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn random_positive_rational<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Rational {
    let h = height.max(1);
    Rational::new(BigInt::from(rng.gen_range(1..=h)), BigInt::from(rng.gen_range(1..=h)))
}

/// Random rational combination of the full basis.
pub fn random_algebra_element<S: Scalar, R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    rng: &mut R,
    height: i64,
) -> GradedElement<S> {
    let t = AlgebraTables::shared(descriptor);
    let coords: Vec<Rational> = (0..t.dim()).map(|_| random_rational(rng, height)).collect();
    t.element(&coords).convert()
}

/// Random rational combination of the basis of one grade.
pub fn random_graded_element<S: Scalar, R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    grade: i32,
    rng: &mut R,
    height: i64,
) -> GradedElement<S> {
    let t = AlgebraTables::shared(descriptor);
    let coords: Vec<Rational> = t
        .grades
        .iter()
        .map(|&g| if g == grade { random_rational(rng, height) } else { Rational::from_i64(0) })
        .collect();
    t.element(&coords).convert()
}

fn is_cartan(x: &GradedElement<Rational>) -> bool {
    let m = x.entries();
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| i == j || m[(i, j)] == Rational::from_i64(0)))
}

/// Diagonal torus element of the requested group.
fn random_torus<R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    which: Option<Subgroup>,
    rng: &mut R,
) -> Mat<Rational> {
    let size = descriptor.size();
    let fix_vector = which.is_some_and(Subgroup::fixes_vector);
    match descriptor.family() {
        Family::SlProjective { m } => {
            let mut d: Vec<Rational> = (0..size).map(|_| random_positive_rational(rng, 3)).collect();
            if fix_vector {
                d[0] = Rational::from_i64(1);
                let partial = d[1..m].iter().fold(Rational::from_i64(1), |acc, v| acc * v);
                d[m] = Rational::from_i64(1) / partial;
            } else {
                let partial = d[1..].iter().fold(Rational::from_i64(1), |acc, v| acc * v);
                d[0] = Rational::from_i64(1) / partial;
            }
            Mat::diagonal(&d)
        }
        Family::SpContact { n } => {
            let a = if fix_vector { Rational::from_i64(1) } else { random_positive_rational(rng, 3) };
            let mid: Vec<Rational> = (0..n).map(|_| random_positive_rational(rng, 3)).collect();
            let mut d = Vec::with_capacity(size);
            d.push(a.clone());
            d.extend(mid.iter().cloned());
            d.extend(mid.iter().map(|v| Rational::from_i64(1) / v));
            d.push(Rational::from_i64(1) / a);
            Mat::diagonal(&d)
        }
    }
}

fn random_product<S: Scalar, R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    which: Option<Subgroup>,
    rng: &mut R,
    factors: usize,
) -> GroupElement<S> {
    let t = AlgebraTables::shared(descriptor);
    let generators: Vec<&GradedElement<Rational>> = t
        .basis
        .iter()
        .zip(&t.grades)
        .filter(|(b, g)| !is_cartan(b) && (which.is_none() || **g >= 0))
        .map(|(b, _)| b)
        .collect();
    let mut g = random_torus(descriptor, which, rng);
    for _ in 0..factors {
        let x = generators[rng.gen_range(0..generators.len())];
        let c = random_rational(rng, 2);
        let e = exp_nilpotent(x, &c).expect("root vectors are nilpotent");
        g = g.matmul(e.entries());
    }
    GroupElement::new_unchecked(descriptor, g).convert()
}

/// Random element of `P`, `Q`, `P̃` or `Q̃` (for the symplectic family the
/// tilde groups are sampled through their intersection with `Sp`).
pub fn random_subgroup_element<S: Scalar, R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    which: Subgroup,
    rng: &mut R,
    factors: usize,
) -> GroupElement<S> {
    random_product(descriptor, Some(which), rng, factors)
}

/// Random element of the whole group `Sp(2n+2)` resp. `SL(m+1)`.
pub fn random_group_element<S: Scalar, R: Rng + ?Sized>(
    descriptor: AlgebraDescriptor,
    rng: &mut R,
    factors: usize,
) -> GroupElement<S> {
    random_product(descriptor, None, rng, factors)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::group::in_subgroup;

    #[test]
    fn sampled_elements_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [AlgebraDescriptor::sp(1).unwrap(), AlgebraDescriptor::sp(2).unwrap()] {
            for which in [Subgroup::P, Subgroup::Q] {
                for _ in 0..10 {
                    let g = random_subgroup_element::<Rational, _>(d, which, &mut rng, 6);
                    assert!(g.is_member());
                    assert!(in_subgroup(&g, which).unwrap());
                }
            }
            let g = random_group_element::<Rational, _>(d, &mut rng, 8);
            assert!(g.is_member());
        }
        let sl = AlgebraDescriptor::sl(4).unwrap();
        for which in [Subgroup::PTilde, Subgroup::QTilde] {
            for _ in 0..10 {
                let g = random_subgroup_element::<Rational, _>(sl, which, &mut rng, 6);
                assert!(in_subgroup(&g, which).unwrap());
            }
        }
    }

    #[test]
    fn same_seed_same_element() {
        let d = AlgebraDescriptor::sp(1).unwrap();
        let a = random_group_element::<Rational, _>(d, &mut ChaCha8Rng::seed_from_u64(9), 5);
        let b = random_group_element::<Rational, _>(d, &mut ChaCha8Rng::seed_from_u64(9), 5);
        assert_eq!(a, b);
    }
}
