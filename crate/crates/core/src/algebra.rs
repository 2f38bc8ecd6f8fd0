//! Graded matrix Lie algebras `sp(2n+2, R)` (contact grading, depth 2) and
//! `sl(m+1, R)` (projective grading, depth 1).
//!
//! Both algebras are realized as square matrices split into diagonal blocks
//! (`[1, 2n, 1]` resp. `[1, m]`). An entry in block row `r` and block column
//! `c` has grade `c - r`, so `g_-` sits below the block diagonal and the
//! parabolic `p = g_0 + p_+` is block upper triangular.
//!
//! The symplectic form is
//!
//! ```text
//!       [  0  0  1 ]            [  0   I_n ]
//! Ω  =  [  0  J  0 ]   with J = [ -I_n  0  ]
//!       [ -1  0  0 ]
//! ```
//!
//! and `sp(2n+2)` is `{ X : XᵗΩ + ΩX = 0 }`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};
use crate::sparse::SparseVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `sp(2n+2, R)` with the contact grading.
    SpContact { n: usize },
    /// `sl(m+1, R)` with the projective grading.
    SlProjective { m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraDescriptor {
    family: Family,
}

impl AlgebraDescriptor {
    pub fn sp(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDescriptor("sp family needs n >= 1".into()));
        }
        Ok(Self { family: Family::SpContact { n } })
    }

    pub fn sl(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidDescriptor("sl family needs m >= 2".into()));
        }
        Ok(Self { family: Family::SlProjective { m } })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_contact(&self) -> bool {
        matches!(self.family, Family::SpContact { .. })
    }

    /// Matrix size: `2n+2` or `m+1`.
    pub fn size(&self) -> usize {
        match self.family {
            Family::SpContact { n } => 2 * n + 2,
            Family::SlProjective { m } => m + 1,
        }
    }

    /// Dimension of the manifold the algebra models (`2n+1` or `m`).
    pub fn base_dim(&self) -> usize {
        self.size() - 1
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        match self.family {
            Family::SpContact { n } => vec![1, 2 * n, 1],
            Family::SlProjective { m } => vec![1, m],
        }
    }

    pub fn grade_range(&self) -> (i32, i32) {
        match self.family {
            Family::SpContact { .. } => (-2, 2),
            Family::SlProjective { .. } => (-1, 1),
        }
    }

    pub fn grades(&self) -> impl Iterator<Item = i32> {
        let (lo, hi) = self.grade_range();
        lo..=hi
    }

    pub fn check_grade(&self, k: i32) -> Result<()> {
        let (min, max) = self.grade_range();
        if k < min || k > max {
            return Err(Error::GradeOutOfRange { grade: k, min, max });
        }
        Ok(())
    }

    pub fn block_of(&self, index: usize) -> i32 {
        let size = self.size();
        match self.family {
            Family::SpContact { .. } => {
                if index == 0 {
                    0
                } else if index + 1 == size {
                    2
                } else {
                    1
                }
            }
            Family::SlProjective { .. } => i32::from(index != 0),
        }
    }

    /// Grade of the matrix entry `(i, j)`.
    pub fn entry_grade(&self, i: usize, j: usize) -> i32 {
        self.block_of(j) - self.block_of(i)
    }

    pub fn dim(&self) -> usize {
        match self.family {
            Family::SpContact { n } => (n + 1) * (2 * n + 3),
            Family::SlProjective { m } => m * m + 2 * m,
        }
    }

    /// The projective descriptor `sl(2n+2)` containing `sp(2n+2)`.
    pub fn ambient_projective(&self) -> Result<Self> {
        Self::sl(self.size() - 1)
    }

    /// Killing form of the family as a multiple of the trace form `tr(xy)`:
    /// `2N` for `sl(N)`, `N + 2` for `sp(N)`.
    pub fn killing_factor(&self) -> i64 {
        let n = self.size() as i64;
        match self.family {
            Family::SpContact { .. } => n + 2,
            Family::SlProjective { .. } => 2 * n,
        }
    }

    fn require_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::AlgebraMismatch { left: *self, right: *other });
        }
        Ok(())
    }
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::SpContact { n } => write!(f, "sp({})", 2 * n + 2),
            Family::SlProjective { m } => write!(f, "sl({})", m + 1),
        }
    }
}

/// The linear symplectic form on `R^{2n+2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    n: usize,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        2 * self.n + 2
    }

    /// Index paired with `i` by Ω, together with the sign of `Ω[i][partner]`.
    pub fn partner(&self, i: usize) -> (usize, i64) {
        let n = self.n;
        let last = 2 * n + 1;
        if i == 0 {
            (last, 1)
        } else if i == last {
            (0, -1)
        } else if i <= n {
            (i + n, 1)
        } else {
            (i - n, -1)
        }
    }

    pub fn matrix<S: Scalar>(&self) -> Mat<S> {
        let size = self.size();
        let mut omega = Mat::zeros(size, size);
        for i in 0..size {
            let (j, sign) = self.partner(i);
            omega[(i, j)] = S::from_i64(sign);
        }
        omega
    }

    /// `Ω(u, v) = uᵗ Ω v`.
    pub fn eval<S: Scalar>(&self, u: &[S], v: &[S]) -> S {
        let size = self.size();
        assert_eq!(u.len(), size);
        assert_eq!(v.len(), size);
        (0..size).fold(S::zero(), |acc, i| {
            let (j, sign) = self.partner(i);
            acc + S::from_i64(sign) * u[i].clone() * v[j].clone()
        })
    }
}

/// Which grades a basis request covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradeSelection {
    All,
    Grade(i32),
}

/// A square matrix known to lie in the algebra described by `descriptor`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedElement<S> {
    descriptor: AlgebraDescriptor,
    entries: Mat<S>,
}

impl<S: Scalar> GradedElement<S> {
    /// Checked constructor (trace-free resp. Ω-compatible).
    pub fn new(descriptor: AlgebraDescriptor, entries: Mat<S>) -> Result<Self> {
        if !is_member(&descriptor, &entries) {
            return Err(Error::NotInAlgebra(descriptor));
        }
        Ok(Self { descriptor, entries })
    }

    pub(crate) fn new_unchecked(descriptor: AlgebraDescriptor, entries: Mat<S>) -> Self {
        debug_assert_eq!(entries.rows(), descriptor.size());
        Self { descriptor, entries }
    }

    pub fn zero(descriptor: AlgebraDescriptor) -> Self {
        let n = descriptor.size();
        Self { descriptor, entries: Mat::zeros(n, n) }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn entries(&self) -> &Mat<S> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<S> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_zero()
    }

    /// `xy - yx`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.descriptor.require_same(&other.descriptor)?;
        Ok(Self::new_unchecked(self.descriptor, self.entries.commutator(&other.entries)))
    }

    /// Keeps only the entries of grade `k`.
    pub fn grade_project(&self, k: i32) -> Result<Self> {
        self.descriptor.check_grade(k)?;
        let d = self.descriptor;
        let entries = Mat::from_fn(d.size(), d.size(), |i, j| {
            if d.entry_grade(i, j) == k {
                self.entries[(i, j)].clone()
            } else {
                S::zero()
            }
        });
        Ok(Self::new_unchecked(d, entries))
    }

    /// Sum of the projections onto grades `>= k`.
    pub fn filtration_part(&self, k: i32) -> Self {
        let d = self.descriptor;
        let entries = Mat::from_fn(d.size(), d.size(), |i, j| {
            if d.entry_grade(i, j) >= k {
                self.entries[(i, j)].clone()
            } else {
                S::zero()
            }
        });
        Self::new_unchecked(d, entries)
    }

    /// The unique grade of a nonzero homogeneous element.
    pub fn pure_grade(&self) -> Option<i32> {
        let d = self.descriptor;
        let mut found = None;
        for i in 0..d.size() {
            for j in 0..d.size() {
                if self.entries[(i, j)].negligible() {
                    continue;
                }
                let g = d.entry_grade(i, j);
                match found {
                    None => found = Some(g),
                    Some(h) if h != g => return None,
                    _ => {}
                }
            }
        }
        found
    }

    /// `true` if the element lies in the parabolic `p` (all negative grades vanish).
    pub fn in_parabolic(&self) -> bool {
        let d = self.descriptor;
        (0..d.size()).all(|i| {
            (0..d.size()).all(|j| d.entry_grade(i, j) >= 0 || self.entries[(i, j)].negligible())
        })
    }

    /// Killing form `B(x, y) = c · tr(xy)` with `c = killing_factor()`.
    pub fn killing_pair(&self, other: &Self) -> Result<S> {
        self.descriptor.require_same(&other.descriptor)?;
        Ok(trace_of_product(&self.entries, &other.entries)
            * S::from_i64(self.descriptor.killing_factor()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.descriptor.require_same(&other.descriptor)?;
        Ok(Self::new_unchecked(self.descriptor, &self.entries + &other.entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.descriptor.require_same(&other.descriptor)?;
        Ok(Self::new_unchecked(self.descriptor, &self.entries - &other.entries))
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new_unchecked(self.descriptor, self.entries.scale(s))
    }

    pub fn first_column(&self) -> Vec<S> {
        self.entries.column(0)
    }

    /// Reinterprets the matrix under another descriptor of the same size.
    pub fn reinterpret(&self, descriptor: AlgebraDescriptor) -> Result<Self> {
        Self::new(descriptor, self.entries.clone())
    }

    pub fn convert<T: Scalar>(&self) -> GradedElement<T> {
        GradedElement {
            descriptor: self.descriptor,
            entries: self.entries.map(crate::scalar::convert::<S, T>),
        }
    }
}

fn trace_of_product<S: Scalar>(x: &Mat<S>, y: &Mat<S>) -> S {
    let n = x.rows();
    let mut acc = S::zero();
    for i in 0..n {
        for k in 0..n {
            if !x[(i, k)].is_zero() && !y[(k, i)].is_zero() {
                acc = acc + x[(i, k)].clone() * y[(k, i)].clone();
            }
        }
    }
    acc
}

/// Membership test for the algebra (trace-free, and `XᵗΩ + ΩX = 0` for `sp`).
pub fn is_member<S: Scalar>(descriptor: &AlgebraDescriptor, x: &Mat<S>) -> bool {
    let size = descriptor.size();
    if x.rows() != size || x.cols() != size {
        return false;
    }
    match descriptor.family() {
        Family::SlProjective { .. } => x.trace().negligible(),
        Family::SpContact { n } => {
            let omega = SymplecticForm::new(n).matrix::<S>();
            (&x.transpose().matmul(&omega) + &omega.matmul(x)).is_zero()
        }
    }
}

/// Grading element `E` with `[E, x] = k x` for `x` of grade `k`.
pub fn grading_element<S: Scalar>(descriptor: AlgebraDescriptor) -> GradedElement<S> {
    let size = descriptor.size();
    let diag: Vec<S> = match descriptor.family() {
        Family::SpContact { .. } => (0..size)
            .map(|i| match descriptor.block_of(i) {
                0 => S::one(),
                2 => -S::one(),
                _ => S::zero(),
            })
            .collect(),
        Family::SlProjective { m } => {
            let denom = (m + 1) as i64;
            (0..size)
                .map(|i| {
                    if i == 0 {
                        S::from_ratio(m as i64, denom)
                    } else {
                        S::from_ratio(-1, denom)
                    }
                })
                .collect()
        }
    };
    GradedElement::new_unchecked(descriptor, Mat::diagonal(&diag))
}

/// Integer basis of the requested grade(s): grades ascending, row-major by
/// leading entry within each grade, leading entry positive.
pub fn basis<S: Scalar>(
    descriptor: AlgebraDescriptor,
    selection: GradeSelection,
) -> Result<Vec<GradedElement<S>>> {
    if let GradeSelection::Grade(k) = selection {
        descriptor.check_grade(k)?;
    }
    let tables = AlgebraTables::shared(descriptor);
    Ok(tables
        .basis
        .iter()
        .zip(&tables.grades)
        .filter(|(_, g)| selection == GradeSelection::All || selection == GradeSelection::Grade(**g))
        .map(|(b, _)| b.convert::<S>())
        .collect())
}

fn raw_basis(descriptor: AlgebraDescriptor) -> Vec<(i32, (usize, usize), Mat<Rational>)> {
    let size = descriptor.size();
    let mut out = Vec::new();
    match descriptor.family() {
        Family::SlProjective { .. } => {
            for i in 0..size {
                for j in 0..size {
                    if i != j {
                        out.push((descriptor.entry_grade(i, j), (i, j), Mat::unit(size, i, j)));
                    } else if i + 1 < size {
                        let mut h = Mat::unit(size, i, i);
                        h[(i + 1, i + 1)] = Rational::from_i64(-1);
                        out.push((0, (i, i), h));
                    }
                }
            }
        }
        Family::SpContact { n } => {
            // X = -Ω S for S running over the symmetric matrices E_ab + E_ba.
            let form = SymplecticForm::new(n);
            for a in 0..size {
                for b in a..size {
                    let mut x = Mat::<Rational>::zeros(size, size);
                    let (ra, sa) = form.partner(a);
                    let (rb, sb) = form.partner(b);
                    // Ω[r][a] = -sign when Ω[a][r] = sign, so (-Ω S)[r][b] = sign_a.
                    x[(ra, b)] = x[(ra, b)].clone() + Rational::from_i64(sa);
                    if a != b {
                        x[(rb, a)] = x[(rb, a)].clone() + Rational::from_i64(sb);
                    }
                    let lead = (0..size)
                        .flat_map(|i| (0..size).map(move |j| (i, j)))
                        .find(|&p| !num_traits::Zero::is_zero(&x[p]))
                        .expect("nonzero basis matrix");
                    if !Scalar::is_positive(&x[lead]) {
                        x = x.scale(&Rational::from_i64(-1));
                    }
                    out.push((descriptor.entry_grade(lead.0, lead.1), lead, x));
                }
            }
        }
    }
    out.sort_by_key(|(g, lead, _)| (*g, *lead));
    out
}

/// Exact structure data of one algebra: basis, grades, coordinate map and
/// structure constants. Built once per descriptor and shared.
#[derive(Debug)]
pub struct AlgebraTables {
    pub descriptor: AlgebraDescriptor,
    pub basis: Vec<GradedElement<Rational>>,
    pub grades: Vec<i32>,
    /// Basis indices of `g_-` (grades ascending).
    pub negative: Vec<usize>,
    /// Basis indices of `p_+` (grades ascending).
    pub positive: Vec<usize>,
    /// `structure[a][b]` are the coordinates of `[e_a, e_b]`.
    pub structure: Vec<Vec<SparseVec>>,
    pivots: Vec<(usize, usize)>,
    pivot_inverse: Mat<Rational>,
}

impl AlgebraTables {
    pub fn new(descriptor: AlgebraDescriptor) -> Self {
        let raw = raw_basis(descriptor);
        let grades: Vec<i32> = raw.iter().map(|(g, _, _)| *g).collect();
        let basis: Vec<GradedElement<Rational>> =
            raw.into_iter().map(|(_, _, m)| GradedElement::new_unchecked(descriptor, m)).collect();
        let (pivots, pivot_inverse) = coordinate_pivots(descriptor, &basis);
        let negative = (0..basis.len()).filter(|&i| grades[i] < 0).collect();
        let positive = (0..basis.len()).filter(|&i| grades[i] > 0).collect();
        let mut tables = Self {
            descriptor,
            basis,
            grades,
            negative,
            positive,
            structure: Vec::new(),
            pivots,
            pivot_inverse,
        };
        let dim = tables.basis.len();
        let mut structure = vec![vec![SparseVec::new(); dim]; dim];
        for a in 0..dim {
            for b in (a + 1)..dim {
                let br = tables.basis[a].entries().commutator(tables.basis[b].entries());
                let coords = SparseVec::from_dense(&tables.coordinates(&br));
                structure[b][a] = coords.scaled(&Rational::from_i64(-1));
                structure[a][b] = coords;
            }
        }
        tables.structure = structure;
        tables
    }

    /// Process-wide cache keyed by descriptor.
    pub fn shared(descriptor: AlgebraDescriptor) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<AlgebraDescriptor, Arc<AlgebraTables>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("tables cache poisoned").get(&descriptor) {
            return Arc::clone(t);
        }
        let built = Arc::new(Self::new(descriptor));
        cache
            .lock()
            .expect("tables cache poisoned")
            .entry(descriptor)
            .or_insert(built)
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis coordinates of an algebra matrix (not checked for membership).
    pub fn coordinates<S: Scalar>(&self, x: &Mat<S>) -> Vec<S> {
        let values: Vec<S> = self.pivots.iter().map(|&p| x[p].clone()).collect();
        (0..self.dim())
            .map(|r| {
                self.pivot_inverse
                    .row(r)
                    .iter()
                    .zip(&values)
                    .filter(|(c, _)| !num_traits::Zero::is_zero(*c))
                    .fold(S::zero(), |acc, (c, v)| acc + S::from_rational(c) * v.clone())
            })
            .collect()
    }

    /// Coordinates, failing if `x` is not in the span of the basis.
    pub fn coordinates_checked<S: Scalar>(&self, x: &Mat<S>) -> Result<Vec<S>> {
        let coords = self.coordinates(x);
        if !self.element(&coords).entries().approx_eq(x) {
            return Err(Error::NotInAlgebra(self.descriptor));
        }
        Ok(coords)
    }

    /// Linear combination of basis elements.
    pub fn element<S: Scalar>(&self, coords: &[S]) -> GradedElement<S> {
        let size = self.descriptor.size();
        let mut m = Mat::<S>::zeros(size, size);
        for (c, b) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for i in 0..size {
                for j in 0..size {
                    let e = &b.entries()[(i, j)];
                    if !num_traits::Zero::is_zero(e) {
                        m[(i, j)] = m[(i, j)].clone() + c.clone() * S::from_rational(e);
                    }
                }
            }
        }
        GradedElement::new_unchecked(self.descriptor, m)
    }

    /// Gram matrix `B(Z_a, e_b)` of the Killing form between `p_+` (rows)
    /// and `g_-` (columns).
    pub fn duality_gram(&self) -> Mat<Rational> {
        Mat::from_fn(self.positive.len(), self.negative.len(), |a, b| {
            self.basis[self.positive[a]]
                .killing_pair(&self.basis[self.negative[b]])
                .expect("same descriptor")
        })
    }

    /// Eigenvalue of `ad(h)` on each basis element for a generic Cartan
    /// element `h`; distinct weights get distinct values.
    pub fn weights(&self) -> Option<Vec<i128>> {
        let size = self.descriptor.size();
        let base: i128 = 1000;
        let diag: Vec<i128> = match self.descriptor.family() {
            Family::SlProjective { .. } => (0..size).map(|i| base.pow(i as u32)).collect(),
            Family::SpContact { n } => {
                let d: Vec<i128> = (0..=n).map(|i| base.pow(i as u32)).collect();
                (0..size)
                    .map(|i| {
                        if i == 0 {
                            d[0]
                        } else if i + 1 == size {
                            -d[0]
                        } else if i <= n {
                            d[i]
                        } else {
                            -d[i - n]
                        }
                    })
                    .collect()
            }
        };
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.basis {
            let m = b.entries();
            let mut weight = None;
            for i in 0..size {
                for j in 0..size {
                    if num_traits::Zero::is_zero(&m[(i, j)]) {
                        continue;
                    }
                    let w = diag[i] - diag[j];
                    match weight {
                        None => weight = Some(w),
                        Some(v) if v != w => return None,
                        _ => {}
                    }
                }
            }
            out.push(weight.unwrap_or(0));
        }
        Some(out)
    }
}

fn coordinate_pivots(
    descriptor: AlgebraDescriptor,
    basis: &[GradedElement<Rational>],
) -> (Vec<(usize, usize)>, Mat<Rational>) {
    let size = descriptor.size();
    let dim = basis.len();
    let mut pivots = Vec::with_capacity(dim);
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(dim);
    for i in 0..size {
        for j in 0..size {
            if pivots.len() == dim {
                break;
            }
            let row: Vec<Rational> = basis.iter().map(|b| b.entries()[(i, j)].clone()).collect();
            let mut candidate = rows.clone();
            candidate.push(row.clone());
            if crate::linalg::rank_exact(&candidate) == candidate.len() {
                rows.push(row);
                pivots.push((i, j));
            }
        }
    }
    let square = Mat::from_rows(rows);
    let inverse = square.inverse().expect("pivot rows independent by construction");
    (pivots, inverse)
}

/// Serializable basis table with exact entries.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisTable {
    pub descriptor: AlgebraDescriptor,
    pub grade: Option<i32>,
    pub elements: Vec<BasisEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisEntry {
    pub index: usize,
    pub grade: i32,
    pub entries: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GramTable {
    pub descriptor: AlgebraDescriptor,
    pub killing_factor: i64,
    pub rows: Vec<Vec<String>>,
}

pub fn basis_table(descriptor: AlgebraDescriptor, selection: GradeSelection) -> Result<BasisTable> {
    if let GradeSelection::Grade(k) = selection {
        descriptor.check_grade(k)?;
    }
    let tables = AlgebraTables::shared(descriptor);
    let elements = tables
        .basis
        .iter()
        .enumerate()
        .filter(|(i, _)| match selection {
            GradeSelection::All => true,
            GradeSelection::Grade(k) => tables.grades[*i] == k,
        })
        .map(|(index, b)| BasisEntry {
            index,
            grade: tables.grades[index],
            entries: b
                .entries()
                .to_rows()
                .iter()
                .map(|r| r.iter().map(Scalar::to_exact_string).collect())
                .collect(),
        })
        .collect();
    Ok(BasisTable {
        descriptor,
        grade: match selection {
            GradeSelection::All => None,
            GradeSelection::Grade(k) => Some(k),
        },
        elements,
    })
}

/// Killing Gram matrix between `p_+` and `g_-`.
pub fn duality_gram_table(descriptor: AlgebraDescriptor) -> GramTable {
    let tables = AlgebraTables::shared(descriptor);
    GramTable {
        descriptor,
        killing_factor: descriptor.killing_factor(),
        rows: tables
            .duality_gram()
            .to_rows()
            .iter()
            .map(|r| r.iter().map(Scalar::to_exact_string).collect())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank_exact;

    fn sp(n: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::sp(n).unwrap()
    }

    fn sl(m: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::sl(m).unwrap()
    }

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn omega_shape() {
        let omega = SymplecticForm::new(2).matrix::<Rational>();
        assert_eq!(omega[(0, 5)], q(1));
        assert_eq!(omega[(5, 0)], q(-1));
        assert_eq!(omega[(1, 3)], q(1));
        assert_eq!(omega[(3, 1)], q(-1));
        assert_eq!(omega.transpose(), omega.scale(&q(-1)));
        assert!(!num_traits::Zero::is_zero(&omega.determinant()));
    }

    #[test]
    fn dimensions_per_grade() {
        let dims = |d: AlgebraDescriptor| -> Vec<usize> {
            d.grades()
                .map(|k| basis::<Rational>(d, GradeSelection::Grade(k)).unwrap().len())
                .collect()
        };
        assert_eq!(dims(sp(1)), vec![1, 2, 4, 2, 1]);
        assert_eq!(dims(sl(2)), vec![2, 4, 2]);
        assert_eq!(basis::<Rational>(sp(1), GradeSelection::All).unwrap().len(), 10);
        assert_eq!(basis::<Rational>(sl(2), GradeSelection::All).unwrap().len(), 8);
        for n in 1..=3 {
            assert_eq!(basis::<Rational>(sp(n), GradeSelection::All).unwrap().len(), sp(n).dim());
        }
        for m in 2..=7 {
            assert_eq!(basis::<Rational>(sl(m), GradeSelection::All).unwrap().len(), sl(m).dim());
        }
    }

    #[test]
    fn bracket_of_extreme_grades() {
        let d = sp(1);
        let x = GradedElement::new(d, Mat::<Rational>::unit(4, 3, 0)).unwrap();
        let y = GradedElement::new(d, Mat::<Rational>::unit(4, 0, 3)).unwrap();
        assert_eq!(x.pure_grade(), Some(-2));
        assert_eq!(y.pure_grade(), Some(2));
        let b = x.bracket(&y).unwrap();
        // E41 E14 - E14 E41 = E44 - E11
        assert_eq!(b.entries(), &Mat::diagonal(&[q(-1), q(0), q(0), q(1)]));
        assert_eq!(b.pure_grade(), Some(0));
        assert!(x.bracket(&x).unwrap().is_zero());
    }

    #[test]
    fn abelian_minus_one_for_sl() {
        let d = sl(2);
        let b = basis::<Rational>(d, GradeSelection::Grade(-1)).unwrap();
        for x in &b {
            for y in &b {
                assert!(x.bracket(y).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn mismatch_is_an_error() {
        let x = GradedElement::<Rational>::zero(sp(1));
        let y = GradedElement::<Rational>::zero(sl(3));
        let err = x.bracket(&y).unwrap_err();
        assert!(err.to_string().starts_with("algebra mismatch"));
        assert!(x.killing_pair(&y).is_err());
    }

    #[test]
    fn grade_projection_of_full_element() {
        let d = sp(1);
        let all = basis::<Rational>(d, GradeSelection::All).unwrap();
        let mut x = GradedElement::zero(d);
        for (i, b) in all.iter().enumerate() {
            x = x.add(&b.scale(&q(i as i64 + 1))).unwrap();
        }
        let low = x.grade_project(-2).unwrap();
        let mut expected = Mat::zeros(4, 4);
        expected[(3, 0)] = x.entries()[(3, 0)].clone();
        assert_eq!(low.entries(), &expected);
        assert!(!expected.is_zero());
        let mut sum = GradedElement::zero(d);
        for k in d.grades() {
            sum = sum.add(&x.grade_project(k).unwrap()).unwrap();
        }
        assert_eq!(sum, x);
        assert!(x.grade_project(3).is_err());
        for k in d.grades() {
            assert!(GradedElement::<Rational>::zero(d).grade_project(k).unwrap().is_zero());
        }
    }

    #[test]
    fn grading_element_acts_by_grade() {
        for d in [sp(1), sp(2), sl(2), sl(4)] {
            let e = grading_element::<Rational>(d);
            assert!(is_member(&d, e.entries()));
            for b in basis::<Rational>(d, GradeSelection::All).unwrap() {
                let k = b.pure_grade().unwrap();
                assert_eq!(e.bracket(&b).unwrap(), b.scale(&q(k as i64)));
            }
            assert!(Scalar::is_positive(&e.killing_pair(&e).unwrap()));
        }
    }

    #[test]
    fn killing_duality_is_perfect() {
        for d in [sp(1), sp(2), sp(3), sl(2), sl(3), sl(5)] {
            let t = AlgebraTables::shared(d);
            let gram = t.duality_gram();
            assert_eq!(gram.rows(), gram.cols());
            assert_eq!(rank_exact(&gram.to_rows()), gram.rows());
        }
    }

    #[test]
    fn minus_one_plus_one_pairing_invertible_and_orthogonality() {
        let d = sp(2);
        let lo = basis::<Rational>(d, GradeSelection::Grade(-1)).unwrap();
        let hi = basis::<Rational>(d, GradeSelection::Grade(1)).unwrap();
        let gram: Vec<Vec<Rational>> = lo
            .iter()
            .map(|x| hi.iter().map(|y| x.killing_pair(y).unwrap()).collect())
            .collect();
        assert_eq!(rank_exact(&gram), lo.len());
        let top = basis::<Rational>(d, GradeSelection::Grade(2)).unwrap();
        for x in &lo {
            for y in &top {
                assert!(num_traits::Zero::is_zero(&x.killing_pair(y).unwrap()));
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        for d in [sp(1), sp(3), sl(2), sl(5)] {
            let t = AlgebraTables::shared(d);
            for (i, b) in t.basis.iter().enumerate() {
                let c = t.coordinates(b.entries());
                for (j, v) in c.iter().enumerate() {
                    assert_eq!(*v, q(i64::from(i == j)));
                }
            }
            let bad = Mat::<Rational>::identity(d.size());
            assert!(t.coordinates_checked(&bad).is_err());
        }
    }

    #[test]
    fn basis_elements_are_weight_vectors() {
        for d in [sp(1), sp(2), sl(3)] {
            let w = AlgebraTables::shared(d).weights().expect("weight basis");
            assert_eq!(w.len(), d.dim());
        }
    }

    #[test]
    fn basis_table_json_has_exact_strings() {
        let t = basis_table(sp(1), GradeSelection::Grade(-2)).unwrap();
        assert_eq!(t.elements.len(), 1);
        assert_eq!(t.elements[0].entries[3][0], "1");
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"family\":\"sp_contact\""));
        let back: BasisTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let g = duality_gram_table(sl(2));
        assert_eq!(g.rows.len(), 2);
    }
}
