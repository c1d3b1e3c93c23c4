//! Sparse complex vectors and rank-3 structure-constant tensors.

use alloc::vec;
use alloc::vec::Vec;

// `Float` supplies sqrt/powi when std is absent
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::C64;

pub const DROP_TOL: f64 = 1e-14;

/// Sparse coefficient vector over a basis of size `dim`, sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub dim: usize,
    pub entries: Vec<(usize, C64)>,
}

impl Element {
    pub fn zero(dim: usize) -> Self {
        Element { dim, entries: Vec::new() }
    }
    pub fn basis(dim: usize, i: usize) -> Self {
        Element { dim, entries: vec![(i, C64::new(1.0, 0.0))] }
    }
    pub fn from_dense(v: &[C64]) -> Self {
        Self::from_dense_tol(v, DROP_TOL)
    }
    pub fn from_dense_tol(v: &[C64], tol: f64) -> Self {
        let entries = v.iter().enumerate().filter(|(_, z)| z.norm() > tol).map(|(i, &z)| (i, z)).collect();
        Element { dim: v.len(), entries }
    }
    /// Accumulates unsorted `(index, value)` pairs.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, C64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(usize, C64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        let mut e = Element { dim, entries };
        e.prune(DROP_TOL);
        e
    }
    pub fn to_dense(&self) -> Vec<C64> {
        let mut v = vec![C64::zero(); self.dim];
        for &(i, z) in &self.entries {
            v[i] += z;
        }
        v
    }
    pub fn prune(&mut self, tol: f64) {
        self.entries.retain(|(_, z)| z.norm() > tol);
    }
    pub fn get(&self, i: usize) -> C64 {
        match self.entries.binary_search_by_key(&i, |p| p.0) {
            Ok(k) => self.entries[k].1,
            Err(_) => C64::zero(),
        }
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    pub fn scale(&self, s: C64) -> Self {
        let mut e = Element { dim: self.dim, entries: self.entries.iter().map(|&(i, z)| (i, z * s)).collect() };
        e.prune(DROP_TOL);
        e
    }
    pub fn add(&self, other: &Element) -> Self {
        let mut p = self.entries.clone();
        p.extend_from_slice(&other.entries);
        Element::from_pairs(self.dim, p)
    }
    pub fn sub(&self, other: &Element) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt()
    }
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max)
    }
}

/// `T[i][j][k]` stored row-major by `i`, entries within a row sorted by `(j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparse3 {
    pub dim: usize,
    offsets: Vec<usize>,
    entries: Vec<(u32, u32, C64)>,
}

impl Sparse3 {
    pub fn from_triples(dim: usize, mut t: Vec<(usize, usize, usize, C64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut merged: Vec<(usize, usize, usize, C64)> = Vec::with_capacity(t.len());
        for x in t {
            match merged.last_mut() {
                Some(l) if (l.0, l.1, l.2) == (x.0, x.1, x.2) => l.3 += x.3,
                _ => merged.push(x),
            }
        }
        merged.retain(|x| x.3.norm() > DROP_TOL);
        let mut offsets = vec![0usize; dim + 1];
        for x in &merged {
            offsets[x.0 + 1] += 1;
        }
        for i in 0..dim {
            offsets[i + 1] += offsets[i];
        }
        let entries = merged.into_iter().map(|(_, j, k, v)| (j as u32, k as u32, v)).collect();
        Sparse3 { dim, offsets, entries }
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    /// All `(j, k, value)` with first index `i`.
    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries[self.offsets[i]..self.offsets[i + 1]].iter().map(|&(j, k, v)| (j as usize, k as usize, v))
    }
    /// All `(k, value)` with first indices `(i, j)`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let row = &self.entries[self.offsets[i]..self.offsets[i + 1]];
        let lo = row.partition_point(|e| (e.0 as usize) < j);
        let hi = row.partition_point(|e| (e.0 as usize) <= j);
        row[lo..hi].iter().map(|&(_, k, v)| (k as usize, v))
    }
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.pair(i, j).find(|p| p.0 == k).map(|p| p.1).unwrap_or_else(C64::zero)
    }
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, k, v)| (i, j, k, v)))
    }
    /// `out[p(i,j,k)] = T[i][j][k]` where `perm` names the slot each input index moves to.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let t = self
            .triples()
            .map(|(i, j, k, v)| {
                let mut o = [0usize; 3];
                o[perm[0]] = i;
                o[perm[1]] = j;
                o[perm[2]] = k;
                (o[0], o[1], o[2], v)
            })
            .collect();
        Sparse3::from_triples(self.dim, t)
    }
    pub fn max_abs_diff(&self, other: &Sparse3) -> f64 {
        let mut m = 0.0f64;
        for (i, j, k, v) in self.triples() {
            m = m.max((v - other.get(i, j, k)).norm());
        }
        for (i, j, k, v) in other.triples() {
            m = m.max((v - self.get(i, j, k)).norm());
        }
        m
    }
}

/// Sparse square matrix `M[in][out]` stored by input row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseMat {
    pub fn apply(&self, x: &Element) -> Element {
        let mut p = Vec::new();
        for &(i, z) in &x.entries {
            for &(j, s) in &self.rows[i] {
                p.push((j, z * s));
            }
        }
        Element::from_pairs(self.dim, p)
    }
    /// Image of basis vector `i`.
    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.rows[i]
    }
    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                rows[j].push((i, v));
            }
        }
        SparseMat { dim: self.dim, rows }
    }
    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        // column convention: column i is the image of basis i
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                m[(j, i)] += v;
            }
        }
        m
    }
    pub fn from_dense(m: &nalgebra::DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| (0..dim).filter(|&j| m[(j, i)].norm() > DROP_TOL).map(|j| (j, m[(j, i)])).collect())
            .collect();
        SparseMat { dim, rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_lookup() {
        let t = Sparse3::from_triples(
            3,
            vec![(0, 1, 2, C64::new(1.0, 0.0)), (0, 1, 0, C64::new(2.0, 0.0)), (0, 2, 2, C64::new(3.0, 0.0))],
        );
        let v: Vec<_> = t.pair(0, 1).collect();
        assert_eq!(v, vec![(0, C64::new(2.0, 0.0)), (2, C64::new(1.0, 0.0))]);
        assert_eq!(t.pair(1, 0).count(), 0);
        let p = t.permuted([1, 2, 0]);
        assert_eq!(p.get(2, 0, 1), C64::new(1.0, 0.0));
    }

    #[test]
    fn merge_and_prune() {
        let e = Element::from_pairs(4, vec![(2, C64::new(1.0, 0.0)), (2, C64::new(-1.0, 0.0)), (1, C64::new(0.5, 0.0))]);
        assert_eq!(e.entries, vec![(1, C64::new(0.5, 0.0))]);
    }
}
