use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::linalg::ZERO;

/// Finitely supported sequence on ℤ: `entries[i]` sits at site `offset + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector {
    pub entries: Vec<c64>,
    pub offset: i64,
}

impl ComplexVector {
    pub fn new(entries: Vec<c64>, offset: i64) -> Self {
        Self { entries, offset }
    }

    pub fn zeros(lo: i64, hi: i64) -> Self {
        let len = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
        Self { entries: vec![ZERO; len], offset: lo }
    }

    pub fn delta(site: i64) -> Self {
        Self { entries: vec![c64::new(1.0, 0.0)], offset: site }
    }

    /// Section vector on `-k..=k`.
    pub fn from_section(values: Vec<c64>, k: usize) -> Self {
        Self { entries: values, offset: -(k as i64) }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Last occupied site (inclusive); meaningless when empty.
    pub fn hi(&self) -> i64 {
        self.offset + self.entries.len() as i64 - 1
    }

    pub fn get(&self, site: i64) -> c64 {
        let i = site - self.offset;
        if i < 0 || i >= self.entries.len() as i64 {
            ZERO
        } else {
            self.entries[i as usize]
        }
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> c64 {
        let lo = self.offset.max(other.offset);
        let hi = self.hi().min(other.hi());
        (lo..=hi).map(|k| self.get(k).conj() * other.get(k)).sum()
    }

    pub fn scaled(&self, z: c64) -> Self {
        Self { entries: self.entries.iter().map(|x| x * z).collect(), offset: self.offset }
    }

    /// `self + z · other` on the union of supports.
    pub fn axpy(&self, z: c64, other: &Self) -> Self {
        if self.is_empty() {
            return other.scaled(z);
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = self.offset.min(other.offset);
        let hi = self.hi().max(other.hi());
        let entries = (lo..=hi).map(|k| self.get(k) + z * other.get(k)).collect();
        Self { entries, offset: lo }
    }

    pub fn map_sites(&self, f: impl Fn(i64, c64) -> c64) -> Self {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, &x)| f(self.offset + i as i64, x))
            .collect();
        Self { entries, offset: self.offset }
    }

    /// Drop leading and trailing entries below `rel_tol · ‖v‖_∞`.
    pub fn trim(&mut self, rel_tol: f64) {
        let peak = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let cut = rel_tol * peak;
        let first = self.entries.iter().position(|z| z.norm() > cut);
        let Some(first) = first else {
            self.entries.clear();
            return;
        };
        let last = self.entries.iter().rposition(|z| z.norm() > cut).unwrap_or(first);
        self.entries = self.entries[first..=last].to_vec();
        self.offset += first as i64;
    }

    /// Restriction to `-k..=k` as a dense section vector.
    pub fn to_section(&self, k: usize) -> Vec<c64> {
        let k = k as i64;
        (-k..=k).map(|s| self.get(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_zero_iff_all_zero() {
        assert_eq!(ComplexVector::zeros(-3, 3).norm(), 0.0);
        assert_eq!(ComplexVector::delta(4).norm(), 1.0);
    }

    #[test]
    fn trim_keeps_mass() {
        let mut v = ComplexVector::new(vec![ZERO, c64::new(1e-20, 0.0), c64::new(2.0, 0.0), ZERO], -2);
        v.trim(1e-16);
        assert_eq!(v.offset, 0);
        assert_eq!(v.entries.len(), 1);
    }
}
