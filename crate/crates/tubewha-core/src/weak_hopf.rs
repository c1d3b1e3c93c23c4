//! Finite-dimensional weak Hopf algebras given by structure constants:
//! axiom verification, Haar integrals, duality, the cocommutative subspace,
//! Wedderburn blocks and irreducible characters.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
// `Float` supplies sqrt/powi when std is absent
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, NullSpace};
use crate::sparse::{Element, Sparse3, SparseMat, DROP_TOL};
use crate::C64;

/// Element of `H^{⊗n}` keyed by basis multi-index.
pub type Multi = BTreeMap<Vec<usize>, C64>;

#[derive(Debug, Clone, PartialEq)]
pub enum WhaError {
    SingularAntipode,
    /// Integral space of the wrong dimension.
    HaarRank { nullity: usize },
    Decomposition(String),
    Shape(String),
}

impl fmt::Display for WhaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhaError::SingularAntipode => write!(f, "antipode matrix is singular"),
            WhaError::HaarRank { nullity } => {
                write!(f, "two-sided integral space has dimension {nullity}, expected 1")
            }
            WhaError::Decomposition(s) => write!(f, "semisimple decomposition failed: {s}"),
            WhaError::Shape(s) => write!(f, "shape mismatch: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for WhaError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplePolicy {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

impl fmt::Display for SamplePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplePolicy::Exhaustive => write!(f, "exhaustive"),
            SamplePolicy::Sampled { samples, seed } => write!(f, "sampled({samples}, seed={seed})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub residuals: Vec<(&'static str, f64)>,
    pub policy: SamplePolicy,
    pub tol: f64,
    pub pass: bool,
    /// filled in by callers that can read a clock
    pub wall_time_s: Option<f64>,
}

impl AxiomReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.0 == name).map(|r| r.1)
    }
    pub fn failed(&self) -> Vec<&'static str> {
        self.residuals.iter().filter(|r| !(r.1 < self.tol)).map(|r| r.0).collect()
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "policy {} tol {:e}", self.policy, self.tol)?;
        for (name, r) in &self.residuals {
            let mark = if *r < self.tol { "ok  " } else { "FAIL" };
            writeln!(f, "  {mark} {name:<22} {r:.3e}")?;
        }
        write!(f, "  => {}", if self.pass { "pass" } else { "fail" })
    }
}

#[derive(Debug, Clone)]
pub struct WeakHopfAlgebra {
    pub dim: usize,
    /// `x_i x_j = Σ_k A[i][j][k] x_k`
    pub mult: Sparse3,
    /// `Δ(x_i) = Σ C[i][j][k] x_j ⊗ x_k`
    pub comult: Sparse3,
    pub counit: Vec<C64>,
    pub unit: Vec<C64>,
    /// row `i` is `S(x_i)`
    pub antipode: SparseMat,
    pub antipode_inv: SparseMat,
    pub antipode_condition: f64,
    pub haar: Option<Vec<C64>>,
    pub haar_dual: Option<Vec<C64>>,
    /// `R[j][i][k] = A[i][j][k]`, for right multiplication
    mult_right: Sparse3,
    delta_unit: Vec<(usize, usize, C64)>,
}

#[derive(Debug, Clone)]
pub struct Blocks {
    pub dims: Vec<usize>,
    pub idempotents: Vec<Vec<C64>>,
    pub center_dim: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub block_dims: Vec<usize>,
    /// `characters[i][j] = χ_i(x_j)`
    pub characters: Vec<Vec<C64>>,
    /// `χ_i χ_j = Σ_k M[i][j][k] χ_k`
    pub fusion_mults: Vec<Vec<Vec<i64>>>,
    pub rounding_residual: f64,
    pub idempotents: Vec<Vec<C64>>,
    pub seed: u64,
    pub cluster_tol: f64,
}

/// An irreducible representation realised on a minimal left ideal.
#[derive(Debug, Clone)]
pub struct Irrep {
    pub dim: usize,
    q: DMatrix<C64>,
}

pub const CLUSTER_TOL: f64 = 1e-6;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn multi_add(m: &mut Multi, k: Vec<usize>, v: C64) {
    *m.entry(k).or_insert_with(C64::zero) += v;
}

pub fn multi_diff(a: &Multi, b: &Multi) -> f64 {
    let mut r = 0.0f64;
    for (k, v) in a {
        r = r.max((v - b.get(k).copied().unwrap_or_else(C64::zero)).norm());
    }
    for (k, v) in b {
        if !a.contains_key(k) {
            r = r.max(v.norm());
        }
    }
    r
}

pub fn multi_swap(a: &Multi) -> Multi {
    a.iter().map(|(k, v)| (vec![k[1], k[0]], *v)).collect()
}

impl WeakHopfAlgebra {
    pub fn new(
        dim: usize,
        mult: Sparse3,
        comult: Sparse3,
        counit: Vec<C64>,
        unit: Vec<C64>,
        antipode: SparseMat,
    ) -> Result<Self, WhaError> {
        if mult.dim != dim || comult.dim != dim || counit.len() != dim || unit.len() != dim || antipode.dim != dim {
            return Err(WhaError::Shape(format!("structure constants disagree with dim {dim}")));
        }
        let (antipode_inv, antipode_condition) = invert(&antipode)?;
        let mult_right = mult.permuted([1, 0, 2]);
        let mut delta_unit = Vec::new();
        for (i, &u) in unit.iter().enumerate() {
            if u != C64::zero() {
                for (j, k, v) in comult.row(i) {
                    delta_unit.push((j, k, u * v));
                }
            }
        }
        Ok(WeakHopfAlgebra {
            dim,
            mult,
            comult,
            counit,
            unit,
            antipode,
            antipode_inv,
            antipode_condition,
            haar: None,
            haar_dual: None,
            mult_right,
            delta_unit,
        })
    }

    pub fn zero(&self) -> Vec<C64> {
        vec![C64::zero(); self.dim]
    }
    pub fn basis_vec(&self, i: usize) -> Vec<C64> {
        let mut v = self.zero();
        v[i] = one();
        v
    }

    /// Right multiplication table `x_p x_i` as `(p, k, value)` for fixed `i`.
    pub fn right_row(&self, i: usize) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.mult_right.row(i)
    }

    pub fn mul_dense(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for (i, &xi) in x.iter().enumerate() {
            if xi == C64::zero() {
                continue;
            }
            for (j, k, v) in self.mult.row(i) {
                let yj = y[j];
                if yj != C64::zero() {
                    out[k] += xi * yj * v;
                }
            }
        }
        out
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Result<Element, WhaError> {
        if x.dim != self.dim || y.dim != self.dim {
            return Err(WhaError::Shape(format!("element dims {} and {} vs algebra {}", x.dim, y.dim, self.dim)));
        }
        let mut p = Vec::new();
        for &(i, xi) in &x.entries {
            for &(j, yj) in &y.entries {
                for (k, v) in self.mult.pair(i, j) {
                    p.push((k, xi * yj * v));
                }
            }
        }
        Ok(Element::from_pairs(self.dim, p))
    }

    pub fn counit_of(&self, x: &[C64]) -> C64 {
        x.iter().zip(&self.counit).fold(C64::zero(), |s, (a, b)| s + a * b)
    }

    pub fn antipode_dense(&self, x: &[C64]) -> Vec<C64> {
        apply_rows(&self.antipode, x)
    }
    pub fn antipode_inv_dense(&self, x: &[C64]) -> Vec<C64> {
        apply_rows(&self.antipode_inv, x)
    }

    pub fn comult_dense(&self, x: &[C64]) -> Multi {
        let mut m = Multi::new();
        for (i, &xi) in x.iter().enumerate() {
            if xi == C64::zero() {
                continue;
            }
            for (j, k, v) in self.comult.row(i) {
                multi_add(&mut m, vec![j, k], xi * v);
            }
        }
        m
    }

    /// `Δ^{(legs-1)}(x)`, applying Δ to the last leg repeatedly.
    pub fn iterated_comult(&self, x: &[C64], legs: usize) -> Multi {
        let mut cur: Multi = x
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != C64::zero())
            .map(|(i, &z)| (vec![i], z))
            .collect();
        for _ in 1..legs {
            let mut next = Multi::new();
            for (k, v) in &cur {
                let last = *k.last().unwrap();
                for (j, l, c) in self.comult.row(last) {
                    let mut key = k[..k.len() - 1].to_vec();
                    key.push(j);
                    key.push(l);
                    multi_add(&mut next, key, v * c);
                }
            }
            next.retain(|_, v| v.norm() > DROP_TOL);
            cur = next;
        }
        cur
    }

    /// Legwise product in `H^{⊗n}`.
    pub fn multi_mul(&self, a: &Multi, b: &Multi) -> Multi {
        let mut out = Multi::new();
        for (ka, va) in a {
            for (kb, vb) in b {
                let mut partial: Vec<(Vec<usize>, C64)> = vec![(Vec::new(), va * vb)];
                for (&i, &j) in ka.iter().zip(kb) {
                    let mut next = Vec::new();
                    for (k, v) in &partial {
                        for (o, c) in self.mult.pair(i, j) {
                            let mut kk = k.clone();
                            kk.push(o);
                            next.push((kk, v * c));
                        }
                    }
                    partial = next;
                    if partial.is_empty() {
                        break;
                    }
                }
                for (k, v) in partial {
                    multi_add(&mut out, k, v);
                }
            }
        }
        out
    }

    pub fn delta_unit(&self) -> Multi {
        self.comult_dense(&self.unit)
    }

    /// `ε_L(x) = Σ ε(1₍₁₎ x) 1₍₂₎`
    pub fn epsilon_l(&self, x: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for &(u1, u2, c) in &self.delta_unit {
            let mut e = C64::zero();
            for (j, k, v) in self.mult.row(u1) {
                e += x[j] * v * self.counit[k];
            }
            out[u2] += c * e;
        }
        out
    }

    /// `ε_R(x) = Σ 1₍₁₎ ε(x 1₍₂₎)`
    pub fn epsilon_r(&self, x: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for &(u1, u2, c) in &self.delta_unit {
            let mut e = C64::zero();
            for (p, k, v) in self.mult_right.row(u2) {
                e += x[p] * v * self.counit[k];
            }
            out[u1] += c * e;
        }
        out
    }

    fn eps_pair(&self, i: usize, j: usize) -> C64 {
        self.mult.pair(i, j).fold(C64::zero(), |s, (k, v)| s + v * self.counit[k])
    }

    fn right_partners(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|i| {
                let mut js: Vec<usize> = self.mult.row(i).map(|(j, _, _)| j).collect();
                js.dedup();
                js
            })
            .collect()
    }

    fn sample_triples(&self, policy: SamplePolicy) -> Vec<[usize; 3]> {
        let n = self.dim;
        match policy {
            SamplePolicy::Exhaustive => {
                let partners = self.right_partners();
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let ij = partners[i].binary_search(&j).is_ok();
                        for k in 0..n {
                            if ij || partners[j].binary_search(&k).is_ok() {
                                out.push([i, j, k]);
                            }
                        }
                    }
                }
                out
            }
            SamplePolicy::Sampled { samples, seed } => {
                let partners = self.right_partners();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pick = |rng: &mut ChaCha8Rng, from: &[usize]| {
                    if from.is_empty() || rng.random::<f64>() < 0.1 {
                        rng.random_range(0..n)
                    } else {
                        from[rng.random_range(0..from.len())]
                    }
                };
                (0..samples)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        let j = pick(&mut rng, &partners[i]);
                        let k = pick(&mut rng, &partners[j]);
                        [i, j, k]
                    })
                    .collect()
            }
        }
    }

    fn sample_singles(&self, policy: SamplePolicy) -> Vec<usize> {
        match policy {
            SamplePolicy::Exhaustive => (0..self.dim).collect(),
            SamplePolicy::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
                if samples >= self.dim {
                    (0..self.dim).collect()
                } else {
                    (0..samples).map(|_| rng.random_range(0..self.dim)).collect()
                }
            }
        }
    }

    pub fn verify_axioms(&self, tol: f64, policy: SamplePolicy) -> AxiomReport {
        let triples = self.sample_triples(policy);
        let singles = self.sample_singles(policy);
        let mut res: Vec<(&'static str, f64)> = Vec::new();

        // unit and counit
        let mut r_unit = 0.0f64;
        let mut r_counit = 0.0f64;
        for &i in &singles {
            let x = self.basis_vec(i);
            r_unit = r_unit.max(linalg::max_abs_diff(&self.mul_dense(&self.unit, &x), &x));
            r_unit = r_unit.max(linalg::max_abs_diff(&self.mul_dense(&x, &self.unit), &x));
            let mut left = self.zero();
            let mut right = self.zero();
            for (j, k, v) in self.comult.row(i) {
                left[k] += self.counit[j] * v;
                right[j] += self.counit[k] * v;
            }
            r_counit = r_counit.max(linalg::max_abs_diff(&left, &x)).max(linalg::max_abs_diff(&right, &x));
        }
        res.push(("unit", r_unit));
        res.push(("counit", r_counit));

        // associativity
        let mut r = 0.0f64;
        for &[i, j, k] in &triples {
            let (xi, xj, xk) = (self.basis_vec(i), self.basis_vec(j), self.basis_vec(k));
            let l = self.mul_dense(&self.mul_dense(&xi, &xj), &xk);
            let rr = self.mul_dense(&xi, &self.mul_dense(&xj, &xk));
            r = r.max(linalg::max_abs_diff(&l, &rr));
        }
        res.push(("associativity", r));

        // coassociativity
        let mut r = 0.0f64;
        for &i in &singles {
            let mut l = Multi::new();
            let mut rr = Multi::new();
            for (j, k, v) in self.comult.row(i) {
                for (p, q, w) in self.comult.row(j) {
                    multi_add(&mut l, vec![p, q, k], v * w);
                }
                for (p, q, w) in self.comult.row(k) {
                    multi_add(&mut rr, vec![j, p, q], v * w);
                }
            }
            r = r.max(multi_diff(&l, &rr));
        }
        res.push(("coassociativity", r));

        // Δ(xy) = Δ(x)Δ(y)
        let mut r = 0.0f64;
        for &[i, j, _] in &triples {
            let xy: Vec<C64> = self.mul_dense(&self.basis_vec(i), &self.basis_vec(j));
            let l = self.comult_dense(&xy);
            let rr = self.multi_mul(&self.comult_dense(&self.basis_vec(i)), &self.comult_dense(&self.basis_vec(j)));
            r = r.max(multi_diff(&l, &rr));
        }
        res.push(("comult_multiplicative", r));

        // (Δ⊗id)Δ(1) = (Δ(1)⊗1)(1⊗Δ(1)) = (1⊗Δ(1))(Δ(1)⊗1)
        let d1 = self.delta_unit();
        let mut lhs = Multi::new();
        for (k, v) in &d1 {
            for (p, q, w) in self.comult.row(k[0]) {
                multi_add(&mut lhs, vec![p, q, k[1]], v * w);
            }
        }
        let mut d1_1 = Multi::new();
        let mut one_d1 = Multi::new();
        for (k, v) in &d1 {
            for (u, &c) in self.unit.iter().enumerate() {
                if c != C64::zero() {
                    multi_add(&mut d1_1, vec![k[0], k[1], u], v * c);
                    multi_add(&mut one_d1, vec![u, k[0], k[1]], v * c);
                }
            }
        }
        let r1 = multi_diff(&lhs, &self.multi_mul(&d1_1, &one_d1));
        let r2 = multi_diff(&lhs, &self.multi_mul(&one_d1, &d1_1));
        res.push(("weak_unit", r1.max(r2)));

        // ε(xyz) = Σ ε(x y₁) ε(y₂ z) = Σ ε(x y₂) ε(y₁ z)
        let mut r = 0.0f64;
        for &[i, j, k] in &triples {
            let xyz = self.mul_dense(&self.mul_dense(&self.basis_vec(i), &self.basis_vec(j)), &self.basis_vec(k));
            let l = self.counit_of(&xyz);
            let mut a = C64::zero();
            let mut b = C64::zero();
            for (p, q, v) in self.comult.row(j) {
                a += v * self.eps_pair(i, p) * self.eps_pair(q, k);
                b += v * self.eps_pair(i, q) * self.eps_pair(p, k);
            }
            r = r.max((l - a).norm()).max((l - b).norm());
        }
        res.push(("weak_counit", r));

        // antipode axioms
        let mut ra = 0.0f64;
        let mut rb = 0.0f64;
        let mut rc = 0.0f64;
        for &i in &singles {
            let x = self.basis_vec(i);
            let mut l = self.zero();
            let mut rr = self.zero();
            for (j, k, v) in self.comult.row(i) {
                let sk = self.antipode.row(k);
                let sj = self.antipode.row(j);
                for &(s, w) in sk {
                    for (o, c) in self.mult.pair(j, s) {
                        l[o] += v * w * c;
                    }
                }
                for &(s, w) in sj {
                    for (o, c) in self.mult.pair(s, k) {
                        rr[o] += v * w * c;
                    }
                }
            }
            ra = ra.max(linalg::max_abs_diff(&l, &self.epsilon_l(&x)));
            rb = rb.max(linalg::max_abs_diff(&rr, &self.epsilon_r(&x)));
            let mut t = self.zero();
            for (key, v) in self.iterated_comult(&x, 3) {
                let s1 = self.antipode_dense(&self.basis_vec(key[0]));
                let s3 = self.antipode_dense(&self.basis_vec(key[2]));
                let p = self.mul_dense(&self.mul_dense(&s1, &self.basis_vec(key[1])), &s3);
                for (o, z) in p.into_iter().enumerate() {
                    t[o] += v * z;
                }
            }
            rc = rc.max(linalg::max_abs_diff(&t, &self.antipode_dense(&x)));
        }
        res.push(("antipode_left", ra));
        res.push(("antipode_right", rb));
        res.push(("antipode_s1_x2_s3", rc));

        let pass = res.iter().all(|r| r.1 < tol);
        AxiomReport { residuals: res, policy, tol, pass, wall_time_s: None }
    }

    /// `λ² − λ`, left/right integral, and cocommutativity residuals for `λ`.
    pub fn haar_residuals(&self, lambda: &[C64]) -> HaarResiduals {
        let mut left = 0.0f64;
        let mut right = 0.0f64;
        for i in 0..self.dim {
            let x = self.basis_vec(i);
            let l = self.mul_dense(&x, lambda);
            let l2 = self.mul_dense(&self.epsilon_l(&x), lambda);
            left = left.max(linalg::max_abs_diff(&l, &l2));
            let r = self.mul_dense(lambda, &x);
            let r2 = self.mul_dense(lambda, &self.epsilon_r(&x));
            right = right.max(linalg::max_abs_diff(&r, &r2));
        }
        let idem = linalg::max_abs_diff(&self.mul_dense(lambda, lambda), lambda);
        let d = self.comult_dense(lambda);
        let cocom = multi_diff(&d, &multi_swap(&d));
        HaarResiduals { left_integral: left, right_integral: right, idempotent: idem, cocommutative: cocom }
    }

    /// The normalised two-sided integral from the linear system
    /// `xλ = ε_L(x)λ`, `λx = λε_R(x)` for all basis `x`, with `λ² = λ`.
    pub fn solve_haar(&self) -> Result<Vec<C64>, WhaError> {
        let n = self.dim;
        let mut g = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            let x = self.basis_vec(i);
            let el = self.epsilon_l(&x);
            let er = self.epsilon_r(&x);
            // left: column p is x_i x_p − ε_L(x_i) x_p
            let mut t: Vec<(usize, usize, C64)> = Vec::new();
            for (p, k, v) in self.mult.row(i) {
                t.push((k, p, v));
            }
            for (e, &c) in el.iter().enumerate() {
                if c.norm() > DROP_TOL {
                    for (p, k, v) in self.mult.row(e) {
                        t.push((k, p, -c * v));
                    }
                }
            }
            linalg::add_gram_triples(&mut g, t);
            // right: column p is x_p x_i − x_p ε_R(x_i)
            let mut t: Vec<(usize, usize, C64)> = Vec::new();
            for (p, k, v) in self.mult_right.row(i) {
                t.push((k, p, v));
            }
            for (e, &c) in er.iter().enumerate() {
                if c.norm() > DROP_TOL {
                    for (p, k, v) in self.mult_right.row(e) {
                        t.push((k, p, -c * v));
                    }
                }
            }
            linalg::add_gram_triples(&mut g, t);
        }
        let scale = (0..n).map(|i| g[(i, i)].re).fold(1.0, f64::max).sqrt();
        let ns = linalg::null_space_from_gram(&g, 1e-7 * scale);
        if ns.basis.len() != 1 {
            return Err(WhaError::HaarRank { nullity: ns.basis.len() });
        }
        let v: Vec<C64> = ns.basis[0].iter().copied().collect();
        let v2 = self.mul_dense(&v, &v);
        let c = linalg::dot(&v, &v2) / linalg::dot(&v, &v);
        if c.norm() < 1e-12 {
            return Err(WhaError::Decomposition("integral is nilpotent".into()));
        }
        Ok(v.iter().map(|z| z / c).collect())
    }

    /// Linear dual on the coordinate dual basis.
    pub fn dualize(&self) -> Result<WeakHopfAlgebra, WhaError> {
        // φ_i φ_j = Σ C[k][i][j] φ_k,  Δφ_i = Σ A[j][k][i] φ_j ⊗ φ_k
        let mult = self.comult.permuted([2, 0, 1]);
        let comult = self.mult.permuted([1, 2, 0]);
        let mut d = WeakHopfAlgebra::new(
            self.dim,
            mult,
            comult,
            self.unit.clone(),
            self.counit.clone(),
            self.antipode.transpose(),
        )?;
        d.haar = self.haar_dual.clone();
        d.haar_dual = self.haar.clone();
        Ok(d)
    }

    /// Orthonormal basis of `ker(Δ − τ∘Δ)`.
    pub fn cocommutative_subspace(&self) -> NullSpace {
        let n = self.dim;
        let mut g = DMatrix::<C64>::zeros(n, n);
        let mut t = Vec::new();
        for p in 0..n {
            for (j, k, v) in self.comult.row(p) {
                t.push((j * n + k, p, v));
                t.push((k * n + j, p, -v));
            }
        }
        linalg::add_gram_triples(&mut g, t);
        linalg::null_space_from_gram(&g, 1e-8)
    }

    /// Orthonormal basis of the center.
    pub fn center(&self) -> Vec<Vec<C64>> {
        let n = self.dim;
        let mut g = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            let mut t = Vec::new();
            for (p, k, v) in self.mult.row(i) {
                t.push((k, p, v));
            }
            for (p, k, v) in self.mult_right.row(i) {
                t.push((k, p, -v));
            }
            linalg::add_gram_triples(&mut g, t);
        }
        let scale = (0..n).map(|i| g[(i, i)].re).fold(1.0, f64::max).sqrt();
        linalg::null_space_from_gram(&g, 1e-7 * scale)
            .basis
            .into_iter()
            .map(|v| v.iter().copied().collect())
            .collect()
    }

    fn trace_functional(&self) -> Vec<C64> {
        let mut tau = self.zero();
        for (i, j, k, v) in self.mult.triples() {
            if j == k {
                tau[i] += v;
            }
        }
        tau
    }

    /// Block decomposition from the primitive central idempotents of a
    /// random central element.
    pub fn wedderburn_blocks(&self, seed: u64) -> Result<Blocks, WhaError> {
        let center = self.center();
        let m = center.len();
        if m == 0 {
            return Err(WhaError::Decomposition("empty center".into()));
        }
        let tau = self.trace_functional();
        let ucoords = DVector::from_iterator(m, center.iter().map(|c| linalg::dot(c, &self.unit)));
        for attempt in 0..8u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
            let r = linalg::random_complex(&mut rng, m);
            let mut z = self.zero();
            for (c, &rk) in center.iter().zip(&r) {
                for (o, &v) in z.iter_mut().zip(c) {
                    *o += rk * v;
                }
            }
            let zc: Vec<Vec<C64>> = center.iter().map(|c| self.mul_dense(&z, c)).collect();
            let mz = DMatrix::from_fn(m, m, |l, k| linalg::dot(&center[l], &zc[k]));
            let eig = linalg::eigenvalues(&mz);
            let groups = linalg::cluster(&eig, CLUSTER_TOL);
            if groups.len() != m {
                continue;
            }
            let mus: Vec<C64> = groups.iter().map(|g| g.0).collect();
            let mut dims = Vec::new();
            let mut idems = Vec::new();
            let mut ok = true;
            for (i, &mi) in mus.iter().enumerate() {
                let mut p = DMatrix::<C64>::identity(m, m);
                for (j, &mj) in mus.iter().enumerate() {
                    if i != j {
                        let f = (&mz - DMatrix::<C64>::identity(m, m) * mj) / (mi - mj);
                        p = f * p;
                    }
                }
                let coords = p * &ucoords;
                let mut e = self.zero();
                for (k, c) in center.iter().enumerate() {
                    for (o, &v) in e.iter_mut().zip(c) {
                        *o += coords[k] * v;
                    }
                }
                let t = linalg::dot(&tau.iter().map(|z| z.conj()).collect::<Vec<_>>(), &e);
                let nf = t.re.max(0.0).sqrt();
                let nr = nf.round();
                if (t - C64::new(nr * nr, 0.0)).norm() > 1e-6 || nr < 1.0 {
                    ok = false;
                    break;
                }
                dims.push(nr as usize);
                idems.push(e);
            }
            if !ok {
                continue;
            }
            if dims.iter().map(|d| d * d).sum::<usize>() != self.dim {
                return Err(WhaError::Decomposition(format!("block dims {dims:?} do not sum to {}", self.dim)));
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by_key(|&i| dims[i]);
            return Ok(Blocks {
                dims: order.iter().map(|&i| dims[i]).collect(),
                idempotents: order.iter().map(|&i| idems[i].clone()).collect(),
                center_dim: m,
                seed,
            });
        }
        Err(WhaError::Decomposition(format!("no separating central element for center of dim {m}")))
    }

    /// `(φψ)(x_k) = Σ C[k][p][q] φ(x_p) ψ(x_q)`.
    pub fn dual_product(&self, phi: &[C64], psi: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for (k, o) in out.iter_mut().enumerate() {
            for (p, q, v) in self.comult.row(k) {
                *o += v * phi[p] * psi[q];
            }
        }
        out
    }

    pub fn characters(&self, seed: u64) -> Result<CharacterTable, WhaError> {
        let blocks = self.wedderburn_blocks(seed)?;
        let tau = self.trace_functional();
        let m = blocks.dims.len();
        let mut chars: Vec<Vec<C64>> = Vec::new();
        for (e, &n) in blocks.idempotents.iter().zip(&blocks.dims) {
            let mut chi = self.zero();
            // χ(x_j) = τ(x_j e)/n
            for (j, c) in chi.iter_mut().enumerate() {
                let mut s = C64::zero();
                for (p, k, v) in self.mult.row(j) {
                    if e[p] != C64::zero() {
                        s += tau[k] * v * e[p];
                    }
                }
                *c = s / n as f64;
            }
            chars.push(chi);
        }
        let gram = DMatrix::from_fn(m, m, |a, b| linalg::dot(&chars[a], &chars[b]));
        let ginv = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| WhaError::Decomposition("characters are linearly dependent".into()))?;
        let mut mults = vec![vec![vec![0i64; m]; m]; m];
        let mut resid = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let prod = self.dual_product(&chars[a], &chars[b]);
                let rhs = DVector::from_iterator(m, chars.iter().map(|c| linalg::dot(c, &prod)));
                let coef = &ginv * rhs;
                let mut recon = self.zero();
                for k in 0..m {
                    let r = coef[k].re.round();
                    resid = resid.max((coef[k] - C64::new(r, 0.0)).norm());
                    mults[a][b][k] = r as i64;
                    for (o, &v) in recon.iter_mut().zip(&chars[k]) {
                        *o += v * r;
                    }
                }
                resid = resid.max(linalg::max_abs_diff(&recon, &prod));
            }
        }
        // put the tensor unit first
        let unit = (0..m).find(|&u| (0..m).all(|j| (0..m).all(|k| mults[u][j][k] == (j == k) as i64)));
        let mut order: Vec<usize> = (0..m).collect();
        if let Some(u) = unit {
            order.retain(|&i| i != u);
            order.insert(0, u);
        }
        let inv: Vec<usize> = {
            let mut v = vec![0; m];
            for (new, &old) in order.iter().enumerate() {
                v[old] = new;
            }
            v
        };
        let mut fm = vec![vec![vec![0i64; m]; m]; m];
        for a in 0..m {
            for b in 0..m {
                for k in 0..m {
                    fm[inv[a]][inv[b]][inv[k]] = mults[a][b][k];
                }
            }
        }
        Ok(CharacterTable {
            block_dims: order.iter().map(|&i| blocks.dims[i]).collect(),
            characters: order.iter().map(|&i| chars[i].clone()).collect(),
            fusion_mults: fm,
            rounding_residual: resid,
            idempotents: order.iter().map(|&i| blocks.idempotents[i].clone()).collect(),
            seed,
            cluster_tol: CLUSTER_TOL,
        })
    }

    /// `f = Π_{k≠0} (r − μ_k e)/(μ_0 − μ_k)` for a random `r ∈ eAe` whose
    /// image in the block has `n` distinct eigenvalues `μ_k`.
    fn primitive_idempotent(&self, e: &[C64], n: usize, seed: u64) -> Result<Vec<C64>, WhaError> {
        let cols: Vec<Vec<C64>> = (0..self.dim).map(|j| self.mul_dense(e, &self.basis_vec(j))).collect();
        let scale = cols.iter().map(|c| linalg::norm(c)).fold(0.0, f64::max).max(1.0);
        let qb = linalg::column_space(&DMatrix::from_fn(self.dim, self.dim, |i, j| cols[j][i]), 1e-8 * scale);
        if qb.ncols() != n * n {
            return Err(WhaError::Decomposition(format!("block has dim {}, expected {}", qb.ncols(), n * n)));
        }
        for attempt in 0..8u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
            let r0 = linalg::random_complex(&mut rng, self.dim);
            let r = self.mul_dense(&self.mul_dense(e, &r0), e);
            let img: Vec<Vec<C64>> = (0..qb.ncols())
                .map(|c| self.mul_dense(&r, &qb.column(c).iter().copied().collect::<Vec<_>>()))
                .collect();
            let lr = DMatrix::from_fn(self.dim, qb.ncols(), |i, c| img[c][i]);
            let m = qb.adjoint() * lr;
            let groups = linalg::cluster(&linalg::eigenvalues(&m), CLUSTER_TOL);
            if groups.len() != n || groups.iter().any(|g| g.1 != n) {
                continue;
            }
            let mus: Vec<C64> = groups.iter().map(|g| g.0).collect();
            let mut f = e.to_vec();
            for &mk in &mus[1..] {
                let shifted: Vec<C64> = r.iter().zip(e).map(|(x, y)| x - mk * y).collect();
                let g = self.mul_dense(&shifted, &f);
                f = g.iter().map(|z| z / (mus[0] - mk)).collect();
            }
            // f ← 3f² − 2f³ pulls a near-idempotent onto the idempotent
            for _ in 0..2 {
                let f2 = self.mul_dense(&f, &f);
                let f3 = self.mul_dense(&f2, &f);
                f = f2.iter().zip(&f3).map(|(a, b)| a * 3.0 - b * 2.0).collect();
            }
            return Ok(f);
        }
        Err(WhaError::Decomposition(format!("no separating element in a block of size {n}")))
    }

    /// Irrep carried by the central idempotent `e` of a block of size `n`,
    /// realised on the left ideal of a primitive idempotent `f ≤ e`.
    pub fn irrep(&self, e: &[C64], n: usize, seed: u64) -> Result<Irrep, WhaError> {
        let f = if n == 1 { e.to_vec() } else { self.primitive_idempotent(e, n, seed)? };
        let cols: Vec<Vec<C64>> = (0..self.dim).map(|j| self.mul_dense(&self.basis_vec(j), &f)).collect();
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| cols[j][i]);
        let scale = cols.iter().map(|c| linalg::norm(c)).fold(0.0, f64::max);
        let q = linalg::column_space(&m, 1e-8 * scale.max(1.0));
        if q.ncols() != n {
            return Err(WhaError::Decomposition(format!("left ideal has dim {}, expected {n}", q.ncols())));
        }
        Ok(Irrep { dim: n, q })
    }
}

impl Irrep {
    pub fn matrix(&self, alg: &WeakHopfAlgebra, x: &[C64]) -> DMatrix<C64> {
        let n = self.dim;
        let mut lx = DMatrix::<C64>::zeros(alg.dim, n);
        for c in 0..n {
            let col: Vec<C64> = self.q.column(c).iter().copied().collect();
            let img = alg.mul_dense(x, &col);
            for (r, v) in img.into_iter().enumerate() {
                lx[(r, c)] = v;
            }
        }
        self.q.adjoint() * lx
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HaarResiduals {
    pub left_integral: f64,
    pub right_integral: f64,
    pub idempotent: f64,
    pub cocommutative: f64,
}

fn apply_rows(m: &SparseMat, x: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::zero(); m.dim];
    for (i, &xi) in x.iter().enumerate() {
        if xi != C64::zero() {
            for &(j, v) in m.row(i) {
                out[j] += xi * v;
            }
        }
    }
    out
}

/// Inverse and condition number; monomial matrices are inverted exactly.
fn invert(s: &SparseMat) -> Result<(SparseMat, f64), WhaError> {
    let n = s.dim;
    let monomial = s.rows.iter().all(|r| r.len() == 1) && {
        let mut seen = vec![false; n];
        s.rows.iter().all(|r| !core::mem::replace(&mut seen[r[0].0], true))
    };
    if monomial {
        let mut rows = vec![Vec::new(); n];
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (i, r) in s.rows.iter().enumerate() {
            let (j, v) = r[0];
            if v.norm() < 1e-300 {
                return Err(WhaError::SingularAntipode);
            }
            rows[j].push((i, C64::new(1.0, 0.0) / v));
            lo = lo.min(v.norm());
            hi = hi.max(v.norm());
        }
        return Ok((SparseMat { dim: n, rows }, hi / lo));
    }
    let d = s.to_dense();
    let sv = d.clone().svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lo > 1e-12 * hi) {
        return Err(WhaError::SingularAntipode);
    }
    let inv = d.try_inverse().ok_or(WhaError::SingularAntipode)?;
    Ok((SparseMat::from_dense(&inv), hi / lo))
}
