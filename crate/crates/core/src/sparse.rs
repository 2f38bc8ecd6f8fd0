//! Sparse exact vectors used for structure constants and cochains.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::scalar::Rational;

/// Sorted `(index, value)` pairs with no explicit zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(index: usize) -> Self {
        Self { entries: vec![(index, Rational::from_integer(1.into()))] }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn from_map(map: BTreeMap<usize, Rational>) -> Self {
        Self { entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn get(&self, index: usize) -> Rational {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|p| self.entries[p].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::new();
        }
        Self { entries: self.entries.iter().map(|(i, v)| (*i, v * s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut acc = Accumulator::new();
        acc.add(self, &Rational::from_integer(1.into()));
        acc.add(other, &Rational::from_integer(1.into()));
        acc.finish()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut acc = Accumulator::new();
        acc.add(self, &Rational::from_integer(1.into()));
        acc.add(other, &Rational::from_integer((-1).into()));
        acc.finish()
    }
}

/// Builder that sums scaled sparse vectors.
#[derive(Clone, Debug, Default)]
pub struct Accumulator {
    map: BTreeMap<usize, Rational>,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, index: usize, value: Rational) {
        if value.is_zero() {
            return;
        }
        let slot = self.map.entry(index).or_insert_with(Rational::zero);
        *slot += value;
    }

    pub fn add(&mut self, v: &SparseVec, scale: &Rational) {
        for (i, x) in v.iter() {
            self.push(i, x * scale);
        }
    }

    pub fn finish(self) -> SparseVec {
        SparseVec::from_map(self.map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    #[test]
    fn cancellation_drops_entries() {
        let a = SparseVec::from_dense(&[q(1), q(0), q(2)]);
        let b = SparseVec::from_dense(&[q(1), q(3), q(2)]);
        let d = b.sub(&a);
        assert_eq!(d, SparseVec::from_dense(&[q(0), q(3), q(0)]));
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(1), q(3));
        assert_eq!(d.get(0), q(0));
        assert!(a.sub(&a).is_zero());
    }
}
