//! Boundary tube algebra of a multiplicity-free fusion category acting on
//! itself, with its weak Hopf structure written down in closed form.
//!
//! A basis tube `(a; c, e, f, g)` carries a bulk string `a` across the annulus,
//! outer/inner labels `c, e` on the bottom and `f, g` on the top, with
//! `g ∈ a⊗f` and `c ∈ a⊗e`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
// `Float` supplies sqrt/powi when std is absent
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::fusion::FusionCategory;
use crate::sparse::{Element, Sparse3, SparseMat};
use crate::weak_hopf::{WeakHopfAlgebra, WhaError};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TubeBasisElement {
    pub a: usize,
    pub c: usize,
    pub e: usize,
    pub f: usize,
    pub g: usize,
}

impl fmt::Display for TubeBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {},{},{},{})", self.a, self.c, self.e, self.f, self.g)
    }
}

/// Lexicographic `(a,c,e,f,g)` enumeration of admissible tubes.
pub fn enumerate_basis(cat: &FusionCategory) -> Vec<TubeBasisElement> {
    let r = cat.rank();
    let mut out = Vec::new();
    for a in 0..r {
        for c in 0..r {
            for e in 0..r {
                if !cat.n(a, e, c) {
                    continue;
                }
                for f in 0..r {
                    for g in 0..r {
                        if cat.n(a, f, g) {
                            out.push(TubeBasisElement { a, c, e, f, g });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Number of tubes carrying each bulk string `a`.
pub fn bulk_string_counts(cat: &FusionCategory) -> Vec<usize> {
    let r = cat.rank();
    (0..r)
        .map(|a| {
            let top = (0..r).flat_map(|f| (0..r).map(move |g| (f, g))).filter(|&(f, g)| cat.n(a, f, g)).count();
            let bot = (0..r).flat_map(|e| (0..r).map(move |c| (e, c))).filter(|&(e, c)| cat.n(a, e, c)).count();
            top * bot
        })
        .collect()
}

type FInv = (Vec<usize>, Vec<usize>, DMatrix<C64>);

#[derive(Debug, Clone)]
pub struct TubeAlgebra {
    pub cat: FusionCategory,
    pub basis: Vec<TubeBasisElement>,
    index: Vec<usize>,
    finv: Vec<Option<FInv>>,
    pub wha: WeakHopfAlgebra,
}

impl TubeAlgebra {
    pub fn new(cat: &FusionCategory) -> Result<Self, WhaError> {
        let basis = enumerate_basis(cat);
        let r = cat.rank();
        let mut index = vec![usize::MAX; r.pow(5)];
        for (i, t) in basis.iter().enumerate() {
            index[key5(r, t)] = i;
        }
        let mut finv = vec![None; r.pow(4)];
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for d in 0..r {
                        let (es, fs, m) = cat.f_matrix(a, b, c, d);
                        if es.is_empty() {
                            continue;
                        }
                        let inv = m.try_inverse().ok_or_else(|| {
                            WhaError::Decomposition(format!("F^{{{a}{b}{c}}}_{d} is singular"))
                        })?;
                        finv[((a * r + b) * r + c) * r + d] = Some((es, fs, inv));
                    }
                }
            }
        }
        let mut t = TubeAlgebra {
            cat: cat.clone(),
            basis,
            index,
            finv,
            // placeholder, replaced below
            wha: WeakHopfAlgebra::new(
                1,
                Sparse3::from_triples(1, Vec::new()),
                Sparse3::from_triples(1, Vec::new()),
                vec![C64::zero()],
                vec![C64::zero()],
                SparseMat { dim: 1, rows: vec![vec![(0, C64::new(1.0, 0.0))]] },
            )?,
        };
        let n = t.basis.len();
        let mut wha = WeakHopfAlgebra::new(n, t.build_mult(), t.build_comult(), t.counit(), t.unit(), t.antipode())?;
        wha.haar = Some(t.haar_closed_form());
        t.wha = wha;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, t: &TubeBasisElement) -> Option<usize> {
        let r = self.cat.rank();
        if [t.a, t.c, t.e, t.f, t.g].iter().any(|&x| x >= r) {
            return None;
        }
        match self.index[key5(r, t)] {
            usize::MAX => None,
            i => Some(i),
        }
    }

    fn idx(&self, a: usize, c: usize, e: usize, f: usize, g: usize) -> usize {
        self.index[key5(self.cat.rank(), &TubeBasisElement { a, c, e, f, g })]
    }

    fn finv(&self, a: usize, b: usize, c: usize, d: usize) -> Option<&FInv> {
        let r = self.cat.rank();
        self.finv[((a * r + b) * r + c) * r + d].as_ref()
    }

    /// Product of two basis tubes as `(k, coefficient)` pairs:
    ///
    /// `(a;c,e,f,g)·(a';c',e',f',g') = δ_{e,c'} δ_{f,g'} Σ_{c''}
    ///   conj([F^{a a' f'}_g]⁻¹[g', c'']) [F^{a a' e'}_c]⁻¹[c', c''] √(d_a d_a' / d_c'') (c''; c, e', f', g)`
    ///
    /// The top inverse-F factor enters conjugated (the top vertex of the
    /// stacked annulus is the adjoint of the bottom one).
    pub fn product_basis(&self, i: usize, j: usize) -> Vec<(usize, C64)> {
        let x = self.basis[i];
        let y = self.basis[j];
        let mut out = Vec::new();
        if x.e != y.c || x.f != y.g {
            return out;
        }
        let (Some(top), Some(bot)) = (self.finv(x.a, y.a, y.f, x.g), self.finv(x.a, y.a, y.e, x.c)) else {
            return out;
        };
        let (tes, tfs, tm) = top;
        let (bes, bfs, bm) = bot;
        let Some(ti) = tfs.iter().position(|&l| l == y.g) else { return out };
        let Some(bi) = bfs.iter().position(|&l| l == y.c) else { return out };
        let d = self.cat.fpdims();
        for (tj, &cc) in tes.iter().enumerate() {
            let Some(bj) = bes.iter().position(|&l| l == cc) else { continue };
            let v = tm[(ti, tj)].conj() * bm[(bi, bj)] * (d[x.a] * d[y.a] / d[cc]).sqrt();
            if v.norm() > crate::sparse::DROP_TOL {
                out.push((self.idx(cc, x.c, y.e, y.f, x.g), v));
            }
        }
        out
    }

    fn build_mult(&self) -> Sparse3 {
        let n = self.dim();
        // group right factors by (c', g') so only compatible pairs are visited
        let r = self.cat.rank();
        let mut by_cg: Vec<Vec<usize>> = vec![Vec::new(); r * r];
        for (j, y) in self.basis.iter().enumerate() {
            by_cg[y.c * r + y.g].push(j);
        }
        let row = |i: usize| -> Vec<(usize, usize, usize, C64)> {
            let x = self.basis[i];
            let mut t = Vec::new();
            for &j in &by_cg[x.e * r + x.f] {
                for (k, v) in self.product_basis(i, j) {
                    t.push((i, j, k, v));
                }
            }
            t
        };
        #[cfg(feature = "parallel")]
        let triples: Vec<_> = {
            use rayon::prelude::*;
            (0..n).into_par_iter().flat_map_iter(row).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let triples: Vec<_> = (0..n).flat_map(row).collect();
        Sparse3::from_triples(n, triples)
    }

    /// `Δ(a;c,e,f,g) = Σ_{l ∈ a⊗k} √(d_l/(d_k d_a)) (a;l,k,f,g) ⊗ (a;c,e,k,l)`
    fn build_comult(&self) -> Sparse3 {
        let r = self.cat.rank();
        let d = self.cat.fpdims();
        let mut t = Vec::new();
        for (i, x) in self.basis.iter().enumerate() {
            for k in 0..r {
                for l in 0..r {
                    if self.cat.n(x.a, k, l) {
                        let v = C64::new((d[l] / (d[k] * d[x.a])).sqrt(), 0.0);
                        t.push((i, self.idx(x.a, l, k, x.f, x.g), self.idx(x.a, x.c, x.e, k, l), v));
                    }
                }
            }
        }
        Sparse3::from_triples(self.dim(), t)
    }

    /// `ε(a;c,e,f,g) = δ_{f,e} δ_{c,g} √(d_a d_e / d_g)`
    pub fn counit(&self) -> Vec<C64> {
        let d = self.cat.fpdims();
        self.basis
            .iter()
            .map(|x| {
                if x.f == x.e && x.c == x.g {
                    C64::new((d[x.a] * d[x.e] / d[x.g]).sqrt(), 0.0)
                } else {
                    C64::zero()
                }
            })
            .collect()
    }

    /// `1 = Σ_{e,f} (1; e, e, f, f)`
    pub fn unit(&self) -> Vec<C64> {
        self.basis
            .iter()
            .map(|x| if x.a == 0 && x.c == x.e && x.f == x.g { C64::new(1.0, 0.0) } else { C64::zero() })
            .collect()
    }

    /// `S(a;c,e,f,g) = (d_f/d_g) θ_{a,f,g} θ̄_{a,e,c} (ā; f, g, c, e)` where
    /// `θ_{a,f,g}` is the phase of `F^{ā a f}_f[1, g]`. The phases cancel
    /// for categories whose F-symbols are real and positive on these entries
    /// and are needed otherwise for the antipode axioms.
    pub fn antipode(&self) -> SparseMat {
        let d = self.cat.fpdims();
        let rows = self
            .basis
            .iter()
            .map(|x| {
                let ab = self.cat.dual(x.a);
                let p1 = phase(self.cat.f(ab, x.a, x.f, x.f, 0, x.g));
                let p2 = phase(self.cat.f(ab, x.a, x.e, x.e, 0, x.c));
                vec![(self.idx(ab, x.f, x.g, x.c, x.e), p1 * p2.conj() * (d[x.f] / d[x.g]))]
            })
            .collect();
        SparseMat { dim: self.dim(), rows }
    }

    /// `λ = (1/rank) Σ_{a,x,y} √(d_a/(d_x³ d_y)) (a; y, x, x, y)`
    pub fn haar_closed_form(&self) -> Vec<C64> {
        let d = self.cat.fpdims();
        let r = self.cat.rank() as f64;
        self.basis
            .iter()
            .map(|t| {
                if t.c == t.g && t.e == t.f {
                    C64::new((d[t.a] / (d[t.e].powi(3) * d[t.c])).sqrt() / r, 0.0)
                } else {
                    C64::zero()
                }
            })
            .collect()
    }

    /// Solves for the dual Haar integral and stores it on the algebra.
    pub fn compute_dual_haar(&mut self) -> Result<&[C64], WhaError> {
        if self.wha.haar_dual.is_none() {
            let dual = self.wha.dualize()?;
            self.wha.haar_dual = Some(dual.solve_haar()?);
        }
        Ok(self.wha.haar_dual.as_deref().unwrap())
    }

    pub fn element(&self, coeffs: &[(TubeBasisElement, C64)]) -> Option<Element> {
        let mut p = Vec::new();
        for (t, v) in coeffs {
            p.push((self.index_of(t)?, *v));
        }
        Some(Element::from_pairs(self.dim(), p))
    }
}

fn key5(r: usize, t: &TubeBasisElement) -> usize {
    (((t.a * r + t.c) * r + t.e) * r + t.f) * r + t.g
}

fn phase(z: C64) -> C64 {
    let n = z.norm();
    if n == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{builtin, fibonacci, group_category};

    #[test]
    fn basis_sizes() {
        let fib = fibonacci().unwrap();
        assert_eq!(enumerate_basis(&fib).len(), 13);
        assert_eq!(bulk_string_counts(&fib), vec![4, 9]);
        let triv = builtin("trivial", None).unwrap();
        assert_eq!(enumerate_basis(&triv).len(), 1);
        let z3 = group_category(3, |_, _, _| C64::new(1.0, 0.0)).unwrap();
        assert_eq!(enumerate_basis(&z3).len(), 27);
    }

    #[test]
    fn lexicographic_order() {
        let fib = fibonacci().unwrap();
        let b = enumerate_basis(&fib);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unit_and_counit_values() {
        let fib = fibonacci().unwrap();
        let t = TubeAlgebra::new(&fib).unwrap();
        assert_eq!(t.unit().iter().filter(|z| z.norm() > 0.0).count(), 4);
        // ε(1) = Σ_{e=f} √(d_e d_e / d_e)... only (1;e,e,e,e) with c=g=e survives: 1 + 1
        let e1 = t.wha.counit_of(&t.unit());
        assert!((e1 - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trivial_category_is_one_dimensional() {
        let triv = builtin("trivial", None).unwrap();
        let t = TubeAlgebra::new(&triv).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.wha.mult.get(0, 0, 0), C64::new(1.0, 0.0));
        assert_eq!(t.wha.comult.get(0, 0, 0), C64::new(1.0, 0.0));
        assert_eq!(t.haar_closed_form(), vec![C64::new(1.0, 0.0)]);
    }
}
