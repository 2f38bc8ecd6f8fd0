//! Cochains `Λ^k p_+ ⊗ g`, the Kostant codifferential `∂*`, the
//! Chevalley–Eilenberg differential `∂` of `g_-` with values in `g`, the
//! Kostant Laplacian `□ = ∂∂* + ∂*∂` and exact harmonic kernels.
//!
//! Coordinates are taken over `Z_I ⊗ A_j` where `Z_I` is a sorted wedge of
//! `p_+` basis elements and `A_j` runs over the `g` basis. The codifferential
//! is
//!
//! ```text
//! ∂*(Z_1 ∧ … ∧ Z_k ⊗ A) = Σ_i (-1)^i  Z_1 ∧ … Ẑ_i … ∧ Z_k ⊗ [Z_i, A]
//!                       + Σ_{i<j} (-1)^{i+j} [Z_i, Z_j] ∧ Z_1 … Ẑ_i … Ẑ_j … ⊗ A
//! ```
//!
//! which in degree two reads `∂*(Z ∧ W ⊗ A) = -W ⊗ [Z,A] + Z ⊗ [W,A] - [Z,W] ⊗ A`.
//!
//! `∂` is evaluated on `Λ^k g_-^* ⊗ g` and moved to `p_+` coordinates through
//! the Killing Gram matrix `G_ab = B(Z_a, e_b)`, i.e. `Z_a = Σ_b G_ab ε^b`.
//! The scale of the Killing form cancels in every kernel computation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraTables, Family, GradedElement};
use crate::error::{Error, Result};
use crate::fefferman::CurvatureMap;
use crate::linalg::nullspace_exact;
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};
use crate::sparse::{Accumulator, SparseVec};

/// Sorted `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Sorts `indices` in place, returning the permutation sign, or `None` on a repeat.
fn sort_with_sign(indices: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if indices.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn sign_of(parity: usize) -> Rational {
    if parity.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Expands `v_1 ∧ … ∧ v_k` for sparse vectors into sorted wedge monomials.
pub fn wedge_expand(factors: &[SparseVec]) -> BTreeMap<Vec<usize>, Rational> {
    let mut terms: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    terms.insert(Vec::new(), Rational::one());
    for f in factors {
        let mut next: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (mono, c) in &terms {
            for (i, x) in f.iter() {
                let mut idx = mono.clone();
                idx.push(i);
                if let Some(sign) = sort_with_sign(&mut idx) {
                    let slot = next.entry(idx).or_insert_with(Rational::zero);
                    *slot += c * x * Rational::from_i64(sign);
                }
            }
        }
        next.retain(|_, v| !v.is_zero());
        terms = next;
    }
    terms
}

/// Exact element of `Λ^k p_+ ⊗ g`.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainElement {
    descriptor: AlgebraDescriptor,
    degree: usize,
    coeffs: SparseVec,
}

impl CochainElement {
    pub fn zero(descriptor: AlgebraDescriptor, degree: usize) -> Self {
        Self { descriptor, degree, coeffs: SparseVec::new() }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &SparseVec {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.descriptor, self.degree), (other.descriptor, other.degree));
        Self { coeffs: self.coeffs.add(&other.coeffs), ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.descriptor, self.degree), (other.descriptor, other.degree));
        Self { coeffs: self.coeffs.sub(&other.coeffs), ..self.clone() }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self { coeffs: self.coeffs.scaled(s), ..self.clone() }
    }
}

/// A `g_i ∧ g_j ⊗ g_l` block (wedge grades ascending).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WedgeBlock {
    pub wedge: Vec<i32>,
    pub value: i32,
}

impl fmt::Display for WedgeBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wedge: Vec<String> = self.wedge.iter().map(|g| format!("g{g}")).collect();
        write!(f, "{} (x) g{}", wedge.join(" ^ "), self.value)
    }
}

/// The complex `Λ^• p_+ ⊗ g` for one graded algebra, degrees 0 through 3.
pub struct KostantComplex {
    tables: Arc<AlgebraTables>,
    wedges: Vec<Vec<Vec<usize>>>,
    wedge_index: Vec<HashMap<Vec<usize>, usize>>,
    neg_wedges: Vec<Vec<Vec<usize>>>,
    neg_wedge_index: Vec<HashMap<Vec<usize>, usize>>,
    /// `p_+` position of each `g` index.
    plus_position: Vec<Option<usize>>,
    /// `g_-` position of each `g` index.
    minus_position: Vec<Option<usize>>,
    /// Rows of `G`: `Z_a = Σ_b G_ab ε^b`.
    gram_rows: Vec<SparseVec>,
    /// Rows of `G⁻¹`: `ε^c = Σ_a (G⁻¹)_ca Z_a`.
    gram_inverse_rows: Vec<SparseVec>,
    weights: Option<Vec<i128>>,
}

pub const MAX_DEGREE: usize = 3;

impl KostantComplex {
    pub fn new(descriptor: AlgebraDescriptor) -> Self {
        let tables = AlgebraTables::shared(descriptor);
        let np = tables.positive.len();
        let nm = tables.negative.len();
        let wedges: Vec<Vec<Vec<usize>>> = (0..=MAX_DEGREE).map(|k| subsets(np, k)).collect();
        let neg_wedges: Vec<Vec<Vec<usize>>> = (0..=MAX_DEGREE + 1).map(|k| subsets(nm, k)).collect();
        let index = |ws: &Vec<Vec<Vec<usize>>>| -> Vec<HashMap<Vec<usize>, usize>> {
            ws.iter()
                .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
                .collect()
        };
        let mut plus_position = vec![None; tables.dim()];
        for (p, &g) in tables.positive.iter().enumerate() {
            plus_position[g] = Some(p);
        }
        let mut minus_position = vec![None; tables.dim()];
        for (p, &g) in tables.negative.iter().enumerate() {
            minus_position[g] = Some(p);
        }
        let gram = tables.duality_gram();
        let gram_inverse = gram.inverse().expect("Killing duality is perfect");
        let rows = |m: &Mat<Rational>| -> Vec<SparseVec> {
            (0..m.rows()).map(|i| SparseVec::from_dense(m.row(i))).collect()
        };
        let weights = tables.weights();
        Self {
            wedge_index: index(&wedges),
            neg_wedge_index: index(&neg_wedges),
            wedges,
            neg_wedges,
            plus_position,
            minus_position,
            gram_rows: rows(&gram),
            gram_inverse_rows: rows(&gram_inverse),
            weights,
            tables,
        }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.tables.descriptor
    }

    pub fn tables(&self) -> &AlgebraTables {
        &self.tables
    }

    pub fn dim_g(&self) -> usize {
        self.tables.dim()
    }

    /// Dimension of `Λ^k p_+ ⊗ g`.
    pub fn cochain_dim(&self, degree: usize) -> usize {
        self.wedges[degree].len() * self.dim_g()
    }

    /// `(wedge of p_+ positions, g index)` of a coordinate index.
    pub fn decode(&self, degree: usize, index: usize) -> (&[usize], usize) {
        let g = self.dim_g();
        (&self.wedges[degree][index / g], index % g)
    }

    pub fn encode(&self, degree: usize, wedge: &[usize], value: usize) -> usize {
        self.wedge_index[degree][wedge] * self.dim_g() + value
    }

    pub fn basis_element(&self, degree: usize, index: usize) -> CochainElement {
        CochainElement { descriptor: self.descriptor(), degree, coeffs: SparseVec::unit(index) }
    }

    pub fn element(&self, degree: usize, coeffs: SparseVec) -> CochainElement {
        CochainElement { descriptor: self.descriptor(), degree, coeffs }
    }

    /// `Z_1 ∧ … ∧ Z_k ⊗ A` for `Z_i ∈ p_+`, `A ∈ g`.
    pub fn decomposable<S: Scalar>(
        &self,
        wedge: &[GradedElement<S>],
        value: &GradedElement<S>,
    ) -> Result<CochainElement> {
        let t = &self.tables;
        let mut factors = Vec::with_capacity(wedge.len());
        for z in wedge {
            let coords = to_rational(&t.coordinates_checked(z.entries())?);
            let mut acc = Accumulator::new();
            for (g, c) in coords.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let p = self.plus_position[g].ok_or(Error::NotPureGrade { expected: 1 })?;
                acc.push(p, c.clone());
            }
            factors.push(acc.finish());
        }
        let value = SparseVec::from_dense(&to_rational(&t.coordinates_checked(value.entries())?));
        let mut acc = Accumulator::new();
        for (mono, c) in wedge_expand(&factors) {
            for (j, v) in value.iter() {
                acc.push(self.encode(wedge.len(), &mono, j), &c * v);
            }
        }
        Ok(self.element(wedge.len(), acc.finish()))
    }

    /// Grade sum of the wedge factors plus the grade of the value.
    pub fn homogeneity_of(&self, degree: usize, index: usize) -> i32 {
        let (wedge, j) = self.decode(degree, index);
        wedge.iter().map(|&p| self.tables.grades[self.tables.positive[p]]).sum::<i32>()
            + self.tables.grades[j]
    }

    pub fn block_of(&self, degree: usize, index: usize) -> WedgeBlock {
        let (wedge, j) = self.decode(degree, index);
        WedgeBlock {
            wedge: wedge.iter().map(|&p| self.tables.grades[self.tables.positive[p]]).collect(),
            value: self.tables.grades[j],
        }
    }

    fn weight_of(&self, degree: usize, index: usize) -> Option<i128> {
        let w = self.weights.as_ref()?;
        let (wedge, j) = self.decode(degree, index);
        Some(wedge.iter().map(|&p| w[self.tables.positive[p]]).sum::<i128>() + w[j])
    }

    fn check(&self, c: &CochainElement) -> Result<()> {
        if c.descriptor != self.descriptor() {
            return Err(Error::AlgebraMismatch { left: self.descriptor(), right: c.descriptor });
        }
        Ok(())
    }

    /// Kostant codifferential `Λ^k p_+ ⊗ g → Λ^{k-1} p_+ ⊗ g`.
    pub fn codifferential(&self, c: &CochainElement) -> Result<CochainElement> {
        self.check(c)?;
        let k = c.degree;
        if k == 0 || k > MAX_DEGREE {
            return Err(Error::DegreeOutOfRange { degree: k, op: "codifferential" });
        }
        let t = &self.tables;
        let mut acc = Accumulator::new();
        for (index, x) in c.coeffs.iter() {
            let (wedge, a) = self.decode(k, index);
            for i in 0..k {
                // (-1)^i with 1-based i
                let sign = sign_of(i + 1);
                let rest: Vec<usize> =
                    wedge.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &v)| v).collect();
                let row = self.wedge_index[k - 1][&rest] * self.dim_g();
                for (l, s) in t.structure[t.positive[wedge[i]]][a].iter() {
                    acc.push(row + l, &sign * x * s);
                }
            }
            for i in 0..k {
                for j in (i + 1)..k {
                    let sign = sign_of(i + j + 2);
                    let rest: Vec<usize> = wedge
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != i && p != j)
                        .map(|(_, &v)| v)
                        .collect();
                    for (l, s) in t.structure[t.positive[wedge[i]]][t.positive[wedge[j]]].iter() {
                        let p = self.plus_position[l].expect("p_+ is a subalgebra");
                        let mut mono = Vec::with_capacity(k - 1);
                        mono.push(p);
                        mono.extend_from_slice(&rest);
                        let Some(perm) = sort_with_sign(&mut mono) else { continue };
                        let idx = self.encode(k - 1, &mono, a);
                        acc.push(idx, &sign * Rational::from_i64(perm) * x * s);
                    }
                }
            }
        }
        Ok(self.element(k - 1, acc.finish()))
    }

    /// Re-expresses a wedge over one basis through the rows of a change of basis.
    fn transport(
        &self,
        c: &SparseVec,
        degree: usize,
        rows: &[SparseVec],
        from: &[Vec<Vec<usize>>],
        to: &[HashMap<Vec<usize>, usize>],
    ) -> SparseVec {
        let g = self.dim_g();
        let mut cache: HashMap<usize, BTreeMap<Vec<usize>, Rational>> = HashMap::new();
        let mut acc = Accumulator::new();
        for (index, x) in c.iter() {
            let (w, j) = (index / g, index % g);
            let expansion = cache.entry(w).or_insert_with(|| {
                let factors: Vec<SparseVec> = from[degree][w].iter().map(|&a| rows[a].clone()).collect();
                wedge_expand(&factors)
            });
            for (mono, coef) in expansion.iter() {
                acc.push(to[degree][mono] * g + j, x * coef);
            }
        }
        acc.finish()
    }

    /// Chevalley–Eilenberg differential on `Λ^k g_-^* ⊗ g` in dual-basis
    /// coordinates, evaluated on every sorted `(k+1)`-tuple.
    fn ce_differential(&self, phi: &SparseVec, k: usize) -> SparseVec {
        let t = &self.tables;
        let g = self.dim_g();
        // group φ by wedge
        let mut by_wedge: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
        for (index, x) in phi.iter() {
            by_wedge.entry(index / g).or_default().push((index % g, x.clone()));
        }
        let eval = |tuple: &[usize]| -> Option<(i64, &Vec<(usize, Rational)>)> {
            let mut sorted = tuple.to_vec();
            let sign = sort_with_sign(&mut sorted)?;
            let w = self.neg_wedge_index[k].get(&sorted)?;
            by_wedge.get(w).map(|v| (sign, v))
        };
        let mut acc = Accumulator::new();
        for (out_w, tuple) in self.neg_wedges[k + 1].iter().enumerate() {
            let row = out_w * g;
            for i in 0..=k {
                let rest: Vec<usize> =
                    tuple.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &v)| v).collect();
                let Some((sign, values)) = eval(&rest) else { continue };
                let s = sign_of(i) * Rational::from_i64(sign);
                let xi = t.negative[tuple[i]];
                for (a, x) in values {
                    for (l, c) in t.structure[xi][*a].iter() {
                        acc.push(row + l, &s * x * c);
                    }
                }
            }
            for i in 0..=k {
                for j in (i + 1)..=k {
                    let rest: Vec<usize> = tuple
                        .iter()
                        .enumerate()
                        .filter(|&(p, _)| p != i && p != j)
                        .map(|(_, &v)| v)
                        .collect();
                    let bracket = &t.structure[t.negative[tuple[i]]][t.negative[tuple[j]]];
                    for (l, c) in bracket.iter() {
                        let b = self.minus_position[l].expect("g_- is a subalgebra");
                        let mut args = Vec::with_capacity(k);
                        args.push(b);
                        args.extend_from_slice(&rest);
                        let Some((sign, values)) = eval(&args) else { continue };
                        let s = sign_of(i + j) * Rational::from_i64(sign) * c;
                        for (a, x) in values {
                            acc.push(row + a, &s * x);
                        }
                    }
                }
            }
        }
        acc.finish()
    }

    /// Lie algebra cohomology differential `Λ^k p_+ ⊗ g → Λ^{k+1} p_+ ⊗ g`.
    pub fn differential(&self, c: &CochainElement) -> Result<CochainElement> {
        self.check(c)?;
        let k = c.degree;
        if k >= MAX_DEGREE {
            return Err(Error::DegreeOutOfRange { degree: k, op: "differential" });
        }
        let dual = self.transport(&c.coeffs, k, &self.gram_rows, &self.wedges, &self.neg_wedge_index);
        let d = self.ce_differential(&dual, k);
        let back =
            self.transport(&d, k + 1, &self.gram_inverse_rows, &self.neg_wedges, &self.wedge_index);
        Ok(self.element(k + 1, back))
    }

    /// `□ = ∂∂* + ∂*∂` on degree-2 cochains.
    pub fn laplacian(&self, c: &CochainElement) -> Result<CochainElement> {
        self.check(c)?;
        if c.degree != 2 {
            return Err(Error::DegreeOutOfRange { degree: c.degree, op: "laplacian" });
        }
        let a = self.differential(&self.codifferential(c)?)?;
        let b = self.codifferential(&self.differential(c)?)?;
        Ok(a.add(&b))
    }

    /// Components by homogeneity; they sum back to `c`.
    pub fn homogeneity_decompose(&self, c: &CochainElement) -> BTreeMap<i32, CochainElement> {
        let mut parts: BTreeMap<i32, Accumulator> = BTreeMap::new();
        for (index, x) in c.coeffs.iter() {
            parts.entry(self.homogeneity_of(c.degree, index)).or_default().push(index, x.clone());
        }
        parts.into_iter().map(|(h, acc)| (h, self.element(c.degree, acc.finish()))).collect()
    }

    /// Action of `a ∈ g_0` (given by `g` coordinates) on a cochain, as a derivation.
    pub fn levi_action(&self, a: &SparseVec, c: &CochainElement) -> Result<CochainElement> {
        self.check(c)?;
        let t = &self.tables;
        if a.iter().any(|(i, _)| t.grades[i] != 0) {
            return Err(Error::NotPureGrade { expected: 0 });
        }
        let k = c.degree;
        let mut acc = Accumulator::new();
        for (index, x) in c.coeffs.iter() {
            let (wedge, j) = self.decode(k, index);
            for (ai, av) in a.iter() {
                for (l, s) in t.structure[ai][j].iter() {
                    acc.push(self.encode(k, wedge, l), x * av * s);
                }
                for pos in 0..k {
                    for (l, s) in t.structure[ai][t.positive[wedge[pos]]].iter() {
                        let p = self.plus_position[l].expect("g_0 preserves p_+");
                        let mut mono = wedge.to_vec();
                        mono[pos] = p;
                        let Some(perm) = sort_with_sign(&mut mono) else { continue };
                        acc.push(self.encode(k, &mono, j), Rational::from_i64(perm) * x * av * s);
                    }
                }
            }
        }
        Ok(self.element(k, acc.finish()))
    }

    /// Coordinate indices of degree-2 cochains grouped into `□`-invariant blocks
    /// (weight spaces of the Cartan subalgebra, or homogeneity slices).
    pub fn invariant_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: BTreeMap<(i32, i128), Vec<usize>> = BTreeMap::new();
        for i in 0..self.cochain_dim(2) {
            let key = (self.homogeneity_of(2, i), self.weight_of(2, i).unwrap_or(0));
            blocks.entry(key).or_default().push(i);
        }
        blocks.into_values().collect()
    }

    /// Dense matrix of a linear map restricted to `block` (columns) and read
    /// off on `block` (rows). Returns `None` if the image leaves the block.
    fn block_matrix(
        &self,
        block: &[usize],
        map: impl Fn(&CochainElement) -> Result<CochainElement>,
    ) -> Result<Option<Vec<Vec<Rational>>>> {
        let position: HashMap<usize, usize> = block.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut rows = vec![vec![Rational::zero(); block.len()]; block.len()];
        for (col, &i) in block.iter().enumerate() {
            let image = map(&self.basis_element(2, i))?;
            for (r, v) in image.coeffs.iter() {
                let Some(&row) = position.get(&r) else { return Ok(None) };
                rows[row][col] = v.clone();
            }
        }
        Ok(Some(rows))
    }

    /// Exact basis of `ker □` in degree two.
    pub fn harmonic_basis(&self) -> Result<Vec<CochainElement>> {
        let blocks = self.invariant_blocks();
        let per_block: Vec<Result<Vec<CochainElement>>> = blocks
            .par_iter()
            .map(|block| {
                let matrix = self
                    .block_matrix(block, |c| self.laplacian(c))?
                    .expect("the Laplacian preserves weight spaces");
                Ok(nullspace_exact(&matrix, block.len())
                    .into_iter()
                    .map(|v| {
                        let mut acc = Accumulator::new();
                        for (p, x) in v.into_iter().enumerate() {
                            acc.push(block[p], x);
                        }
                        self.element(2, acc.finish())
                    })
                    .collect())
            })
            .collect();
        let mut out = Vec::new();
        for r in per_block {
            out.extend(r?);
        }
        Ok(out)
    }

    /// Dense matrix of `□` on one invariant block (for inspection and tests).
    pub fn laplacian_block(&self, block: &[usize]) -> Result<Option<Vec<Vec<Rational>>>> {
        self.block_matrix(block, |c| self.laplacian(c))
    }

    /// Exact basis of `ker ∂* ∩ ker ∂` in degree two, block by block.
    pub fn closed_coclosed_basis(&self) -> Result<Vec<CochainElement>> {
        let mut out = Vec::new();
        for block in self.invariant_blocks() {
            let mut rows: Vec<Vec<Rational>> = Vec::new();
            for map in [0, 1] {
                let mut images: Vec<SparseVec> = Vec::with_capacity(block.len());
                for &i in &block {
                    let e = self.basis_element(2, i);
                    let img = if map == 0 { self.codifferential(&e)? } else { self.differential(&e)? };
                    images.push(img.coeffs);
                }
                let support: BTreeSet<usize> =
                    images.iter().flat_map(|v| v.iter().map(|(r, _)| r)).collect();
                for r in support {
                    rows.push(images.iter().map(|v| v.get(r)).collect());
                }
            }
            for v in nullspace_exact(&rows, block.len()) {
                let mut acc = Accumulator::new();
                for (p, x) in v.into_iter().enumerate() {
                    acc.push(block[p], x);
                }
                out.push(self.element(2, acc.finish()));
            }
        }
        Ok(out)
    }

    /// Degree-2 cochain of a curvature map `Λ²(g/p) → g` stored on `g_-`.
    pub fn curvature_to_cochain<S: Scalar>(&self, k: &CurvatureMap<S>) -> Result<CochainElement> {
        if k.descriptor() != self.descriptor() {
            return Err(Error::AlgebraMismatch { left: self.descriptor(), right: k.descriptor() });
        }
        let t = &self.tables;
        let g = self.dim_g();
        let nm = t.negative.len();
        // ε^c ∧ ε^d in the Z basis
        let mut acc = Accumulator::new();
        for c in 0..nm {
            for d in (c + 1)..nm {
                let value = k.value(c, d);
                if value.is_zero() {
                    continue;
                }
                let coords = to_rational(&t.coordinates_checked(value.entries())?);
                let wedge = wedge_expand(&[
                    self.gram_inverse_rows[c].clone(),
                    self.gram_inverse_rows[d].clone(),
                ]);
                for (mono, w) in &wedge {
                    let base = self.wedge_index[2][mono] * g;
                    for (j, x) in coords.iter().enumerate() {
                        if !x.is_zero() {
                            acc.push(base + j, w * x);
                        }
                    }
                }
            }
        }
        Ok(self.element(2, acc.finish()))
    }

    /// Inverse of [`Self::curvature_to_cochain`].
    pub fn cochain_to_curvature(&self, c: &CochainElement) -> Result<CurvatureMap<Rational>> {
        self.check(c)?;
        if c.degree != 2 {
            return Err(Error::DegreeOutOfRange { degree: c.degree, op: "cochain_to_curvature" });
        }
        let dual = self.transport(&c.coeffs, 2, &self.gram_rows, &self.wedges, &self.neg_wedge_index);
        let t = &self.tables;
        let g = self.dim_g();
        let nm = t.negative.len();
        let mut values = vec![vec![vec![Rational::zero(); g]; nm]; nm];
        for (index, x) in dual.iter() {
            let pair = &self.neg_wedges[2][index / g];
            let j = index % g;
            values[pair[0]][pair[1]][j] += x;
            values[pair[1]][pair[0]][j] -= x;
        }
        let mut k = CurvatureMap::zero(self.descriptor());
        for a in 0..nm {
            for b in (a + 1)..nm {
                k.set(a, b, t.element(&values[a][b]))?;
            }
        }
        Ok(k)
    }

    /// `∂*` of the cochain attached to `k` vanishes.
    pub fn is_normal<S: Scalar>(&self, k: &CurvatureMap<S>) -> Result<bool> {
        Ok(self.codifferential(&self.curvature_to_cochain(k)?)?.is_zero())
    }
}

fn to_rational<S: Scalar>(v: &[S]) -> Vec<Rational> {
    v.iter().map(crate::scalar::convert::<S, Rational>).collect()
}

/// `ker □` computations are limited to `n <= 4` (symplectic) and `m <= 8` (projective).
pub fn check_size_guard(descriptor: AlgebraDescriptor) -> Result<()> {
    match descriptor.family() {
        Family::SpContact { n } if n > 4 => {
            Err(Error::SizeGuard(format!("sp family supports n <= 4, got n = {n}")))
        }
        Family::SlProjective { m } if m > 8 => {
            Err(Error::SizeGuard(format!("sl family supports m <= 8, got m = {m}")))
        }
        _ => Ok(()),
    }
}

/// Summary of `ker □` for one graded algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    pub descriptor: AlgebraDescriptor,
    /// Dimensions of `Λ^k p_+ ⊗ g` for `k = 0..=3`.
    pub cochain_dims: Vec<usize>,
    pub kernel_dim: usize,
    pub homogeneities: Vec<i32>,
    pub support: Vec<WedgeBlock>,
    pub parabolic_valued: bool,
}

pub struct KernelBasis {
    pub elements: Vec<CochainElement>,
    pub report: KernelReport,
}

/// Exact basis of `ker □` with its homogeneity and support report.
pub fn kernel_basis(descriptor: AlgebraDescriptor) -> Result<KernelBasis> {
    check_size_guard(descriptor)?;
    let complex = KostantComplex::new(descriptor);
    kernel_basis_in(&complex)
}

pub fn kernel_basis_in(complex: &KostantComplex) -> Result<KernelBasis> {
    let elements = complex.harmonic_basis()?;
    let mut homogeneities = BTreeSet::new();
    let mut support = BTreeSet::new();
    let mut parabolic_valued = true;
    for e in &elements {
        for (i, _) in e.coeffs().iter() {
            homogeneities.insert(complex.homogeneity_of(2, i));
            let block = complex.block_of(2, i);
            parabolic_valued &= block.value >= 0;
            support.insert(block);
        }
    }
    let report = KernelReport {
        descriptor: complex.descriptor(),
        cochain_dims: (0..=MAX_DEGREE).map(|k| complex.cochain_dim(k)).collect(),
        kernel_dim: elements.len(),
        homogeneities: homogeneities.into_iter().collect(),
        support: support.into_iter().collect(),
        parabolic_valued,
    };
    Ok(KernelBasis { elements, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{basis, grading_element, GradeSelection};

    fn sp(n: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::sp(n).unwrap()
    }

    fn sl(m: usize) -> AlgebraDescriptor {
        AlgebraDescriptor::sl(m).unwrap()
    }

    #[test]
    fn subsets_and_signs() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        let mut v = vec![2, 0, 1];
        assert_eq!(sort_with_sign(&mut v), Some(1));
        assert_eq!(v, vec![0, 1, 2]);
        let mut v = vec![1, 0];
        assert_eq!(sort_with_sign(&mut v), Some(-1));
        assert_eq!(sort_with_sign(&mut [1, 1]), None);
    }

    #[test]
    fn codifferential_of_zero_and_degree_errors() {
        let cx = KostantComplex::new(sp(1));
        assert!(cx.codifferential(&CochainElement::zero(sp(1), 2)).unwrap().is_zero());
        assert!(cx.codifferential(&CochainElement::zero(sp(1), 0)).is_err());
        assert!(cx.differential(&CochainElement::zero(sp(1), 3)).is_err());
        assert!(cx.laplacian(&CochainElement::zero(sp(1), 1)).is_err());
        assert!(cx.laplacian(&CochainElement::zero(sp(1), 2)).unwrap().is_zero());
    }

    #[test]
    fn codifferential_on_top_grades_matches_bracket_oracle() {
        // Z ∈ g_1, W ∈ g_2, A = grading element: evaluate the displayed formula
        // term by term with matrix brackets.
        let d = sp(1);
        let cx = KostantComplex::new(d);
        let z = basis::<Rational>(d, GradeSelection::Grade(1)).unwrap()[0].clone();
        let w = basis::<Rational>(d, GradeSelection::Grade(2)).unwrap()[0].clone();
        let a = grading_element::<Rational>(d);
        let c = cx.decomposable(&[z.clone(), w.clone()], &a).unwrap();
        let lhs = cx.codifferential(&c).unwrap();
        // [Z,E] = -Z, [W,E] = -2W, [Z,W] = 0 in sp(4)
        let t1 = cx.decomposable(std::slice::from_ref(&w), &z.bracket(&a).unwrap()).unwrap().scale(&Rational::from_i64(-1));
        let t2 = cx.decomposable(std::slice::from_ref(&z), &w.bracket(&a).unwrap()).unwrap();
        let zw = z.bracket(&w).unwrap();
        assert!(zw.is_zero());
        let expected = t1.add(&t2);
        assert_eq!(lhs, expected);
        assert!(!lhs.is_zero());
    }

    #[test]
    fn homogeneity_examples() {
        let d = sp(1);
        let cx = KostantComplex::new(d);
        let g1 = basis::<Rational>(d, GradeSelection::Grade(1)).unwrap();
        let g2 = basis::<Rational>(d, GradeSelection::Grade(2)).unwrap();
        let g0 = basis::<Rational>(d, GradeSelection::Grade(0)).unwrap();
        let gm2 = basis::<Rational>(d, GradeSelection::Grade(-2)).unwrap();
        let h = |c: CochainElement| cx.homogeneity_decompose(&c).into_keys().collect::<Vec<_>>();
        assert_eq!(h(cx.decomposable(&[g1[0].clone(), g1[1].clone()], &g0[0]).unwrap()), vec![2]);
        assert_eq!(h(cx.decomposable(&[g1[0].clone(), g2[0].clone()], &g0[0]).unwrap()), vec![3]);
        assert_eq!(h(cx.decomposable(&[g1[0].clone(), g2[0].clone()], &gm2[0]).unwrap()), vec![1]);
    }

    #[test]
    fn homogeneity_decomposition_recomposes() {
        let d = sp(1);
        let cx = KostantComplex::new(d);
        let mut acc = Accumulator::new();
        for i in (0..cx.cochain_dim(2)).step_by(3) {
            acc.push(i, Rational::from_i64(i as i64 % 7 - 3));
        }
        let c = cx.element(2, acc.finish());
        let parts = cx.homogeneity_decompose(&c);
        assert!(parts.len() > 1);
        let sum = parts.values().fold(CochainElement::zero(d, 2), |a, b| a.add(b));
        assert_eq!(sum, c);
    }

    #[test]
    fn complexes_square_to_zero_small() {
        for d in [sp(1), sl(2)] {
            let cx = KostantComplex::new(d);
            for k in [2, 3] {
                for i in 0..cx.cochain_dim(k) {
                    let e = cx.basis_element(k, i);
                    let dd = cx.codifferential(&cx.codifferential(&e).unwrap()).unwrap();
                    assert!(dd.is_zero(), "∂*∂* != 0 on {d} degree {k} index {i}");
                }
            }
            for k in [0, 1] {
                for i in 0..cx.cochain_dim(k) {
                    let e = cx.basis_element(k, i);
                    let dd = cx.differential(&cx.differential(&e).unwrap()).unwrap();
                    assert!(dd.is_zero(), "∂∂ != 0 on {d} degree {k} index {i}");
                }
            }
        }
    }

    #[test]
    fn sl_differential_has_no_bracket_term() {
        let d = sl(2);
        let t = AlgebraTables::shared(d);
        for &a in &t.negative {
            for &b in &t.negative {
                assert!(t.structure[a][b].is_zero());
            }
        }
    }

    #[test]
    fn sp_degree_one_picks_up_minus_two() {
        // for φ = ε^X ⊗ A with X ∈ g_-1 the second CE sum is fed by [g_-1, g_-1] = g_-2
        let d = sp(1);
        let t = AlgebraTables::shared(d);
        let m1: Vec<usize> = t.negative.iter().copied().filter(|&i| t.grades[i] == -1).collect();
        assert!(!t.structure[m1[0]][m1[1]].is_zero());
        let cx = KostantComplex::new(d);
        // the Z dual to g_-2 is the g_2 element; ∂ of Z_{g2} ⊗ A_j has a Z_{g1}∧Z_{g1} part
        let top = cx.tables().positive.len() - 1;
        let mut found = false;
        for j in 0..cx.dim_g() {
            let c = cx.element(1, SparseVec::unit(cx.encode(1, &[top], j)));
            let dc = cx.differential(&c).unwrap();
            found |= dc.coeffs().iter().any(|(i, _)| cx.block_of(2, i).wedge == vec![1, 1]);
        }
        assert!(found);
    }

    #[test]
    fn laplacian_preserves_homogeneity() {
        let cx = KostantComplex::new(sp(1));
        for i in 0..cx.cochain_dim(2) {
            let h = cx.homogeneity_of(2, i);
            let img = cx.laplacian(&cx.basis_element(2, i)).unwrap();
            assert!(img.coeffs().iter().all(|(r, _)| cx.homogeneity_of(2, r) == h));
        }
    }

    #[test]
    fn kernel_sp1_table() {
        let kb = kernel_basis(sp(1)).unwrap();
        assert_eq!(kb.report.homogeneities, vec![3]);
        assert_eq!(kb.report.support, vec![WedgeBlock { wedge: vec![1, 2], value: 0 }]);
        assert!(kb.report.parabolic_valued);
        assert!(kb.report.kernel_dim > 0);
    }

    #[test]
    fn kernel_sl2_table() {
        let kb = kernel_basis(sl(2)).unwrap();
        assert_eq!(kb.report.homogeneities, vec![3]);
        assert_eq!(kb.report.support, vec![WedgeBlock { wedge: vec![1, 1], value: 1 }]);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(kernel_basis(sp(5)), Err(Error::SizeGuard(_))));
        assert!(matches!(kernel_basis(sl(9)), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn harmonic_equals_closed_and_coclosed() {
        for d in [sp(1), sl(2), sl(3)] {
            let cx = KostantComplex::new(d);
            let h: Vec<Vec<Rational>> = cx
                .harmonic_basis()
                .unwrap()
                .iter()
                .map(|e| e.coeffs().to_dense(cx.cochain_dim(2)))
                .collect();
            let cc: Vec<Vec<Rational>> = cx
                .closed_coclosed_basis()
                .unwrap()
                .iter()
                .map(|e| e.coeffs().to_dense(cx.cochain_dim(2)))
                .collect();
            assert!(crate::linalg::same_span(&h, &cc), "{d}");
        }
    }

    #[test]
    fn curvature_cochain_round_trip() {
        let d = sp(1);
        let cx = KostantComplex::new(d);
        for e in cx.harmonic_basis().unwrap() {
            let k = cx.cochain_to_curvature(&e).unwrap();
            assert_eq!(cx.curvature_to_cochain(&k).unwrap(), e);
            assert!(cx.is_normal(&k).unwrap());
        }
    }
}
