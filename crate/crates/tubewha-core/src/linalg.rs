//! Small dense linear-algebra helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
// `Float` supplies sqrt/powi when std is absent
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use rand::Rng;

use crate::C64;

/// `G += vᴴ v` for one sparse row `v` (the normal-equation accumulator).
pub fn add_gram_row(g: &mut DMatrix<C64>, row: &[(usize, C64)]) {
    for &(p, vp) in row {
        let cp = vp.conj();
        for &(q, vq) in row {
            g[(p, q)] += cp * vq;
        }
    }
}

/// Groups `(row, col, value)` triples by row and accumulates each row into `g`.
pub fn add_gram_triples(g: &mut DMatrix<C64>, mut t: Vec<(usize, usize, C64)>) {
    t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut row: Vec<(usize, C64)> = Vec::new();
    let mut cur = usize::MAX;
    for (r, c, v) in t {
        if r != cur {
            if !row.is_empty() {
                add_gram_row(g, &row);
            }
            row.clear();
            cur = r;
        }
        match row.last_mut() {
            Some(l) if l.0 == c => l.1 += v,
            _ => row.push((c, v)),
        }
    }
    if !row.is_empty() {
        add_gram_row(g, &row);
    }
}

pub struct NullSpace {
    /// orthonormal kernel vectors
    pub basis: Vec<DVector<C64>>,
    /// singular values (√ of Gram eigenvalues), ascending
    pub singular_values: Vec<f64>,
    /// smallest kept-out singular value divided by the largest kernel one
    pub gap: f64,
}

/// Kernel of `M` from its Gram matrix `G = MᴴM`: eigenvectors whose singular
/// value is below `threshold`.
pub fn null_space_from_gram(g: &DMatrix<C64>, threshold: f64) -> NullSpace {
    let n = g.nrows();
    if n == 0 {
        return NullSpace { basis: Vec::new(), singular_values: Vec::new(), gap: f64::INFINITY };
    }
    let h = (g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let sv: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let mut basis = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if sv[rank] < threshold {
            basis.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    let k = basis.len();
    let gap = if k == 0 || k == n { f64::INFINITY } else { sv[k] / sv[k - 1].max(f64::MIN_POSITIVE) };
    NullSpace { basis, singular_values: sv, gap }
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

/// Eigenvalues of a general complex matrix (diagonal of its Schur form).
pub fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Groups numbers that lie within `tol` (relative to the spread) of each other.
pub fn cluster(values: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut groups: Vec<(C64, usize)> = Vec::new();
    for &v in values {
        match groups.iter_mut().find(|g| (g.0 - v).norm() < tol * scale) {
            Some(g) => {
                g.0 = (g.0 * C64::new(g.1 as f64, 0.0) + v) / C64::new((g.1 + 1) as f64, 0.0);
                g.1 += 1;
            }
            None => groups.push((v, 1)),
        }
    }
    groups
}

/// Orthonormal basis of the column space, columns with singular value above `tol`.
pub fn column_space(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::zero(), |s, (x, y)| s + x.conj() * y)
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_one_gram() {
        // M = [1 1], kernel spanned by (1,-1)/√2
        let mut g = DMatrix::zeros(2, 2);
        add_gram_row(&mut g, &[(0, C64::new(1.0, 0.0)), (1, C64::new(1.0, 0.0))]);
        let ns = null_space_from_gram(&g, 1e-8);
        assert_eq!(ns.basis.len(), 1);
        let v = &ns.basis[0];
        assert!((v[0] + v[1]).norm() < 1e-12);
    }

    #[test]
    fn clustering() {
        let v = [C64::new(1.0, 0.0), C64::new(1.0 + 1e-9, 0.0), C64::new(2.0, 0.0)];
        let c = cluster(&v, 1e-6);
        assert_eq!(c.len(), 2);
    }
}
