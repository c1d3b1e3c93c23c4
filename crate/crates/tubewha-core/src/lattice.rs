//! Cluster state and cluster ladder on a two-row strip.
//!
//! Edge layout: bottom (symmetry) edges `y_i` point right, vertical (bulk)
//! edges `h_i` point up, top (physical, ladder only) edges `x_i` point right.
//! Face `i` is bounded by `h_i` on the left, `y_i` below, `h_{i+1}` on the
//! right and `x_i` above. Every edge carries the algebra itself.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::sparse::{SparseMat, DROP_TOL};
use crate::weak_hopf::{multi_diff, multi_swap, Multi, WeakHopfAlgebra, WhaError};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Cluster,
    Ladder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    Symmetry,
    Bulk,
    Physical,
}

/// `→X_g h = g h`, `←X_g h = h S⁻¹(g)`, `→Z_ψ h = Σ ψ(h₂) h₁`,
/// `←Z_ψ h = Σ ψ(S(h₁)) h₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LocalKind {
    XLeft,
    XRight,
    ZLeft,
    ZRight,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeError {
    Size(String),
    NoSuchTerm(String),
    Budget { needed: usize, budget: usize },
    Algebra(WhaError),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::Size(s) => write!(f, "bad lattice: {s}"),
            LatticeError::NoSuchTerm(s) => write!(f, "no such term: {s}"),
            LatticeError::Budget { needed, budget } => {
                write!(f, "dense dimension {needed} exceeds budget {budget}")
            }
            LatticeError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LatticeError {}

impl From<WhaError> for LatticeError {
    fn from(e: WhaError) -> Self {
        LatticeError::Algebra(e)
    }
}

#[derive(Debug, Clone)]
pub struct LadderLattice {
    pub n: usize,
    pub boundary: Boundary,
    pub model: Model,
    pub roles: Vec<EdgeRole>,
    pub local_dim: usize,
}

impl LadderLattice {
    pub fn new(n: usize, model: Model, boundary: Boundary, local_dim: usize) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::Size("need at least one plaquette".into()));
        }
        let nv = if boundary == Boundary::Periodic { n } else { n + 1 };
        let mut roles = vec![EdgeRole::Symmetry; n];
        roles.extend(core::iter::repeat(EdgeRole::Bulk).take(nv));
        if model == Model::Ladder {
            roles.extend(core::iter::repeat(EdgeRole::Physical).take(n));
        }
        Ok(LadderLattice { n, boundary, model, roles, local_dim })
    }
    pub fn n_edges(&self) -> usize {
        self.roles.len()
    }
    pub fn n_vertical(&self) -> usize {
        if self.boundary == Boundary::Periodic {
            self.n
        } else {
            self.n + 1
        }
    }
    pub fn y(&self, i: usize) -> usize {
        i
    }
    pub fn h(&self, i: usize) -> usize {
        self.n + i
    }
    pub fn x(&self, i: usize) -> usize {
        self.n + self.n_vertical() + i
    }
    pub fn edge_name(&self, e: usize) -> String {
        if e < self.n {
            format!("y{e}")
        } else if e < self.n + self.n_vertical() {
            format!("h{}", e - self.n)
        } else {
            format!("x{}", e - self.n - self.n_vertical())
        }
    }
    /// Total dimension of the edge Hilbert space, if it fits in `usize`.
    pub fn hilbert_dim(&self) -> Option<usize> {
        let mut d: usize = 1;
        for _ in 0..self.n_edges() {
            d = d.checked_mul(self.local_dim)?;
        }
        Some(d)
    }

    /// Incoming (left) and outgoing (right) horizontal edge indices at a
    /// vertex of a row, `None` at the open ends.
    fn row_neighbours(&self, i: usize) -> (Option<usize>, Option<usize>) {
        match self.boundary {
            Boundary::Periodic => (Some((i + self.n - 1) % self.n), Some(i)),
            Boundary::Open => (if i >= 1 { Some(i - 1) } else { None }, if i < self.n { Some(i) } else { None }),
        }
    }
}

/// Σ over Sweedler terms of tensor products of local actions.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    pub name: String,
    pub legs: Vec<(usize, LocalKind)>,
    pub terms: Vec<(Vec<usize>, C64)>,
}

impl LatticeOperator {
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.legs.iter().map(|l| l.0).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Per-basis-element local actions, `ops[kind][k]` = action of `x_k` / `φ_k`.
#[derive(Debug, Clone)]
pub struct LocalOps {
    pub dim: usize,
    ops: [Vec<SparseMat>; 4],
}

fn kind_index(k: LocalKind) -> usize {
    match k {
        LocalKind::XLeft => 0,
        LocalKind::XRight => 1,
        LocalKind::ZLeft => 2,
        LocalKind::ZRight => 3,
    }
}

impl LocalOps {
    pub fn new(h: &WeakHopfAlgebra) -> Self {
        let n = h.dim;
        let empty = || (0..n).map(|_| SparseMat { dim: n, rows: vec![Vec::new(); n] }).collect::<Vec<_>>();
        let (mut lx, mut rx, mut lz, mut rz) = (empty(), empty(), empty(), empty());
        for (i, j, k, v) in h.mult.triples() {
            // x_i x_j = ... : left mult by x_i sends x_j to x_k
            lx[i].rows[j].push((k, v));
        }
        for g in 0..n {
            for &(m, w) in h.antipode_inv.row(g) {
                // h ↦ h S⁻¹(x_g) = Σ w h x_m
                for (p, k, v) in h.right_row(m) {
                    rx[g].rows[p].push((k, w * v));
                }
            }
        }
        for (i, a, b, v) in h.comult.triples() {
            lz[b].rows[i].push((a, v));
            // ψ(S(x_a)) = Σ_k S[a][k] ψ_k
            for &(k, s) in h.antipode.row(a) {
                rz[k].rows[i].push((b, s * v));
            }
        }
        let tidy = |ms: &mut Vec<SparseMat>| {
            for m in ms.iter_mut() {
                for r in m.rows.iter_mut() {
                    merge(r);
                }
            }
        };
        tidy(&mut lx);
        tidy(&mut rx);
        tidy(&mut lz);
        tidy(&mut rz);
        LocalOps { dim: n, ops: [lx, rx, lz, rz] }
    }

    pub fn basis_op(&self, kind: LocalKind, k: usize) -> &SparseMat {
        &self.ops[kind_index(kind)][k]
    }

    /// Local matrix of `kind` with a general parameter (element or functional).
    pub fn op(&self, kind: LocalKind, coeffs: &[C64]) -> SparseMat {
        let mut rows = vec![Vec::new(); self.dim];
        for (k, &c) in coeffs.iter().enumerate() {
            if c.norm() <= DROP_TOL {
                continue;
            }
            for (i, r) in self.ops[kind_index(kind)][k].rows.iter().enumerate() {
                for &(o, v) in r {
                    rows[i].push((o, c * v));
                }
            }
        }
        for r in rows.iter_mut() {
            merge(r);
        }
        SparseMat { dim: self.dim, rows }
    }
}

fn merge(r: &mut Vec<(usize, C64)>) {
    r.sort_by_key(|p| p.0);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(r.len());
    for &(i, v) in r.iter() {
        match out.last_mut() {
            Some(l) if l.0 == i => l.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|p| p.1.norm() > DROP_TOL);
    *r = out;
}

/// Sparse multi-edge state: full edge-label tuple → amplitude.
pub type SparseState = BTreeMap<Vec<usize>, C64>;

/// Operator restricted to its support, as a sparse matrix on `d^k` indices.
#[derive(Debug, Clone)]
pub struct LocalMatrix {
    pub edges: Vec<usize>,
    pub d: usize,
    /// row = input local index, entries = (output local index, value)
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl LocalMatrix {
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// `(M ⊗ id) ψ` for a sparse state whose keys index `space`.
    pub fn apply_sparse(&self, space: &[usize], psi: &SparseState) -> SparseState {
        let d = self.d;
        let pos: Vec<usize> = self
            .edges
            .iter()
            .map(|e| space.iter().position(|s| s == e).expect("operator edge outside state space"))
            .collect();
        let mut out = SparseState::new();
        for (key, v) in psi {
            let lin = pos.iter().fold(0, |a, &p| a * d + key[p]);
            for &(o, w) in &self.rows[lin] {
                let mut k = key.clone();
                let mut rem = o;
                for &p in pos.iter().rev() {
                    k[p] = rem % d;
                    rem /= d;
                }
                *out.entry(k).or_insert_with(C64::zero) += v * w;
            }
        }
        out.retain(|_, v| v.norm() > DROP_TOL);
        out
    }

    /// `out = (M ⊗ id) ψ` for a dense state over `space` (ordered edge list,
    /// first edge most significant).
    pub fn apply_dense(&self, space: &[usize], psi: &[C64]) -> Vec<C64> {
        let d = self.d;
        let m = space.len();
        let stride = |p: usize| d.pow((m - 1 - p) as u32);
        let pos: Vec<usize> = self
            .edges
            .iter()
            .map(|e| space.iter().position(|s| s == e).expect("operator edge outside state space"))
            .collect();
        let k = pos.len();
        let loc = d.pow(k as u32);
        let off: Vec<usize> = (0..loc)
            .map(|l| {
                let mut rem = l;
                let mut o = 0;
                for j in (0..k).rev() {
                    o += (rem % d) * stride(pos[j]);
                    rem /= d;
                }
                o
            })
            .collect();
        let others: Vec<usize> = (0..m).filter(|p| !pos.contains(p)).collect();
        let nb = d.pow(others.len() as u32);
        let mut out = vec![C64::zero(); psi.len()];
        let mut digits = vec![0usize; others.len()];
        let mut base = 0usize;
        for _ in 0..nb {
            for (lin, row) in self.rows.iter().enumerate() {
                if row.is_empty() {
                    continue;
                }
                let v = psi[base + off[lin]];
                if v == C64::zero() {
                    continue;
                }
                for &(lout, w) in row {
                    out[base + off[lout]] += w * v;
                }
            }
            // mixed-radix increment over the complement positions
            for j in (0..others.len()).rev() {
                let s = stride(others[j]);
                digits[j] += 1;
                base += s;
                if digits[j] < d {
                    break;
                }
                digits[j] = 0;
                base -= d * s;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct LatticeModel<'a> {
    pub lat: LadderLattice,
    pub h: &'a WeakHopfAlgebra,
    pub dual: WeakHopfAlgebra,
    pub lambda: Vec<C64>,
    pub big_lambda: Vec<C64>,
    pub ops: LocalOps,
}

fn sweedler(alg: &WeakHopfAlgebra, x: &[C64], legs: usize) -> Vec<(Vec<usize>, C64)> {
    alg.iterated_comult(x, legs).into_iter().filter(|t| t.1.norm() > DROP_TOL).collect()
}

impl<'a> LatticeModel<'a> {
    /// `h.haar` and `h.haar_dual` are used when present, solved for otherwise.
    pub fn new(h: &'a WeakHopfAlgebra, lat: LadderLattice) -> Result<Self, LatticeError> {
        if lat.local_dim != h.dim {
            return Err(LatticeError::Size(format!("lattice local dim {} vs algebra dim {}", lat.local_dim, h.dim)));
        }
        let lambda = match &h.haar {
            Some(l) => l.clone(),
            None => h.solve_haar()?,
        };
        let dual = h.dualize()?;
        let big_lambda = match &h.haar_dual {
            Some(l) => l.clone(),
            None => dual.solve_haar()?,
        };
        Ok(LatticeModel { lat, h, dual, lambda, big_lambda, ops: LocalOps::new(h) })
    }

    /// Symmetry-boundary vertex `i`: `→X_{λ₁}` on the incoming bottom edge,
    /// `←X_{λ₂}` on the outgoing one, `←X_{λ₃}` on `h_i`.
    pub fn vertex_operator(&self, i: usize) -> Result<LatticeOperator, LatticeError> {
        if i >= self.lat.n_vertical() {
            return Err(LatticeError::NoSuchTerm(format!("symmetry vertex {i}")));
        }
        let (inc, out) = self.lat.row_neighbours(i);
        let mut legs = Vec::new();
        if let Some(e) = inc {
            legs.push((self.lat.y(e), LocalKind::XLeft));
        }
        if let Some(e) = out {
            legs.push((self.lat.y(e), LocalKind::XRight));
        }
        legs.push((self.lat.h(i), LocalKind::XRight));
        let terms = sweedler(self.h, &self.lambda, legs.len());
        Ok(LatticeOperator { name: format!("A_s{i}"), legs, terms })
    }

    /// Same vertex with the Sweedler legs started from the next link
    /// (cyclically rotated). Agrees with `vertex_operator` when λ is
    /// cocommutative.
    pub fn vertex_operator_rotated(&self, i: usize) -> Result<LatticeOperator, LatticeError> {
        let mut op = self.vertex_operator(i)?;
        op.legs.rotate_left(1);
        op.name = format!("A_s{i}'");
        Ok(op)
    }

    /// Physical-boundary vertex `i` of the ladder (`J = H`): `→X_{λ₁}` on the
    /// incoming top edge, `→X_{λ₂}` on `h_i`, `←X_{λ₃}` on the outgoing top edge.
    pub fn physical_vertex_operator(&self, i: usize) -> Result<LatticeOperator, LatticeError> {
        if self.lat.model != Model::Ladder || i >= self.lat.n_vertical() {
            return Err(LatticeError::NoSuchTerm(format!("physical vertex {i}")));
        }
        let (inc, out) = self.lat.row_neighbours(i);
        let mut legs = Vec::new();
        if let Some(e) = inc {
            legs.push((self.lat.x(e), LocalKind::XLeft));
        }
        legs.push((self.lat.h(i), LocalKind::XLeft));
        if let Some(e) = out {
            legs.push((self.lat.x(e), LocalKind::XRight));
        }
        let terms = sweedler(self.h, &self.lambda, legs.len());
        Ok(LatticeOperator { name: format!("A_p{i}"), legs, terms })
    }

    /// `B_f^ψ = →Z_{ψ₁}(h_i) ←Z_{ψ₂}(y_i) ←Z_{ψ₃}(h_{i+1}) [→Z_{ψ₄}(x_i)]`.
    pub fn face_operator(&self, i: usize, psi: &[C64]) -> Result<LatticeOperator, LatticeError> {
        if i >= self.lat.n {
            return Err(LatticeError::NoSuchTerm(format!("face {i}")));
        }
        let right = (i + 1) % self.lat.n_vertical();
        let mut legs = vec![
            (self.lat.h(i), LocalKind::ZLeft),
            (self.lat.y(i), LocalKind::ZRight),
            (self.lat.h(right), LocalKind::ZRight),
        ];
        if self.lat.model == Model::Ladder {
            legs.push((self.lat.x(i), LocalKind::ZLeft));
        }
        let terms = sweedler(&self.dual, psi, legs.len());
        Ok(LatticeOperator { name: format!("B_{i}"), legs, terms })
    }

    pub fn stabilizers(&self) -> Result<Vec<LatticeOperator>, LatticeError> {
        let mut out = Vec::new();
        for v in 0..self.lat.n_vertical() {
            out.push(self.vertex_operator(v)?);
        }
        if self.lat.model == Model::Ladder {
            for v in 0..self.lat.n_vertical() {
                out.push(self.physical_vertex_operator(v)?);
            }
        }
        for f in 0..self.lat.n {
            out.push(self.face_operator(f, &self.big_lambda)?);
        }
        Ok(out)
    }

    /// `W_φ = Σ →Z_{φ₁} ⊗ ⋯ ⊗ →Z_{φₙ}` on the symmetry-boundary edges.
    /// Sweedler legs run against the edge orientation (`φ₁` on the last
    /// edge), so that `W_φ` evaluates `φ` on the product of the edge
    /// coproduct legs in the order the vertex terms multiply them.
    pub fn symmetry_z(&self, phi: &[C64]) -> LatticeOperator {
        let legs: Vec<_> = (0..self.lat.n).rev().map(|i| (self.lat.y(i), LocalKind::ZLeft)).collect();
        let terms = sweedler(&self.dual, phi, legs.len());
        LatticeOperator { name: String::from("W_phi"), legs, terms }
    }

    /// `W_h = Σ →X_{h₁} ⊗ ⋯ ⊗ →X_{hₙ}` on the vertical edges, `h₁` on `h_0`.
    pub fn symmetry_x(&self, x: &[C64]) -> LatticeOperator {
        self.symmetry_x_ordered(x, false)
    }

    pub fn symmetry_x_ordered(&self, x: &[C64], reversed: bool) -> LatticeOperator {
        let mut legs: Vec<_> = (0..self.lat.n_vertical()).map(|i| (self.lat.h(i), LocalKind::XLeft)).collect();
        if reversed {
            legs.reverse();
        }
        let terms = sweedler(self.h, x, legs.len());
        LatticeOperator { name: String::from("W_h"), legs, terms }
    }

    /// One Sweedler term applied to a sparse state whose keys index `space`.
    fn apply_term(&self, op: &LatticeOperator, pos: &[usize], key: &[usize], input: &SparseState) -> SparseState {
        let mut cur: Vec<(Vec<usize>, C64)> = input.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for ((&(_, kind), &p), &k) in op.legs.iter().zip(pos).zip(key) {
            let m = self.ops.basis_op(kind, k);
            let mut next = Vec::new();
            for (idx, v) in &cur {
                for &(o, w) in m.row(idx[p]) {
                    let mut j = idx.clone();
                    j[p] = o;
                    next.push((j, v * w));
                }
            }
            cur = next;
            if cur.is_empty() {
                break;
            }
        }
        let mut out = SparseState::new();
        for (k, v) in cur {
            *out.entry(k).or_insert_with(C64::zero) += v;
        }
        out
    }

    /// Lazy application to a sparse state over the edges `space`.
    pub fn apply_sparse(&self, op: &LatticeOperator, space: &[usize], state: &SparseState) -> SparseState {
        let pos: Vec<usize> = op
            .legs
            .iter()
            .map(|(e, _)| space.iter().position(|s| s == e).expect("operator edge outside state space"))
            .collect();
        let mut out = SparseState::new();
        for (key, c) in &op.terms {
            for (k, v) in self.apply_term(op, &pos, key, state) {
                *out.entry(k).or_insert_with(C64::zero) += c * v;
            }
        }
        out.retain(|_, v| v.norm() > DROP_TOL);
        out
    }

    /// Materialises the operator on its support.
    pub fn local_matrix(&self, op: &LatticeOperator) -> LocalMatrix {
        let edges = op.support();
        let d = self.lat.local_dim;
        let k = edges.len();
        let loc = d.pow(k as u32);
        let mut rows = Vec::with_capacity(loc);
        for lin in 0..loc {
            let mut digits = vec![0usize; k];
            let mut rem = lin;
            for j in (0..k).rev() {
                digits[j] = rem % d;
                rem /= d;
            }
            let mut st = SparseState::new();
            st.insert(digits, C64::new(1.0, 0.0));
            let img = self.apply_sparse(op, &edges, &st);
            let mut row: Vec<(usize, C64)> =
                img.into_iter().map(|(key, v)| (key.iter().fold(0, |a, &x| a * d + x), v)).collect();
            merge(&mut row);
            rows.push(row);
        }
        LocalMatrix { edges, d, rows }
    }
}

/// Dense vector norm helper.
fn nrm(v: &[C64]) -> f64 {
    linalg::norm(v)
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    /// random vectors per operator identity
    pub probes: usize,
    /// largest dense state built for whole-lattice checks
    pub max_state_dim: usize,
    /// rounds of the product of all projectors in the ground-state search
    pub rounds: usize,
    /// largest sparse state allowed when the whole lattice exceeds the
    /// dense budget
    pub max_sparse_nnz: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 1, probes: 2, max_state_dim: 20_000_000, rounds: 2, max_sparse_nnz: 5_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct LatticeReport {
    pub n_terms: usize,
    pub projector: Vec<(String, f64)>,
    /// `(a, b, ‖[a,b]‖)` for every pair with overlapping support
    pub commutators: Vec<(String, String, f64)>,
    /// `None` when the whole-lattice state exceeded the budget
    pub ground: Option<GroundCheck>,
    pub start_link: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct GroundCheck {
    pub hilbert_dim: usize,
    /// norm of the product of all projectors applied to a random unit vector
    pub survivor_norm: f64,
    /// max over terms of ‖(P − 1)ψ‖/‖ψ‖ on the surviving vector
    pub fixed_residual: f64,
    /// `−#terms` when a common fixed vector was found
    pub energy: Option<f64>,
}

impl LatticeReport {
    pub fn max_projector(&self) -> f64 {
        self.projector.iter().map(|p| p.1).fold(0.0, f64::max)
    }
    pub fn max_commutator(&self) -> f64 {
        self.commutators.iter().map(|p| p.2).fold(0.0, f64::max)
    }
}

/// Operator-level checks; each identity is tested on random vectors of the
/// operators' joint support, so it holds on the whole lattice.
pub struct Checker<'m, 'a> {
    pub model: &'m LatticeModel<'a>,
    pub opts: CheckOptions,
    rng: ChaCha8Rng,
}

impl<'m, 'a> Checker<'m, 'a> {
    pub fn new(model: &'m LatticeModel<'a>, opts: CheckOptions) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(opts.seed);
        Checker { model, opts, rng }
    }

    fn random_state(&mut self, dim: usize) -> Vec<C64> {
        let v = linalg::random_complex(&mut self.rng, dim);
        let n = nrm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    fn space_dim(&self, space: &[usize]) -> Result<usize, LatticeError> {
        let d = self.model.lat.local_dim;
        let mut n: usize = 1;
        for _ in space {
            n = n.checked_mul(d).ok_or(LatticeError::Budget { needed: usize::MAX, budget: self.opts.max_state_dim })?;
        }
        if n > self.opts.max_state_dim {
            return Err(LatticeError::Budget { needed: n, budget: self.opts.max_state_dim });
        }
        Ok(n)
    }

    /// `max ‖(P² − P)v‖` over random unit `v`.
    pub fn projector_residual(&mut self, p: &LocalMatrix) -> Result<f64, LatticeError> {
        let space = p.edges.clone();
        let n = self.space_dim(&space)?;
        let mut r = 0.0f64;
        for _ in 0..self.opts.probes {
            let v = self.random_state(n);
            let pv = p.apply_dense(&space, &v);
            let ppv = p.apply_dense(&space, &pv);
            r = r.max(nrm(&sub(&ppv, &pv)));
        }
        Ok(r)
    }

    /// `max ‖[A, B]v‖` over random unit `v` on the joint support.
    pub fn commutator(&mut self, a: &LocalMatrix, b: &LocalMatrix) -> Result<f64, LatticeError> {
        let space = union(&a.edges, &b.edges);
        let n = self.space_dim(&space)?;
        let mut r = 0.0f64;
        for _ in 0..self.opts.probes {
            let v = self.random_state(n);
            let ab = a.apply_dense(&space, &b.apply_dense(&space, &v));
            let ba = b.apply_dense(&space, &a.apply_dense(&space, &v));
            r = r.max(nrm(&sub(&ab, &ba)));
        }
        Ok(r)
    }

    /// `max ‖(AB − C)v‖`, used for the algebra laws of the symmetry operators.
    pub fn product_residual(&mut self, a: &LocalMatrix, b: &LocalMatrix, c: &LocalMatrix) -> Result<f64, LatticeError> {
        let space = union(&union(&a.edges, &b.edges), &c.edges);
        let n = self.space_dim(&space)?;
        let mut r = 0.0f64;
        for _ in 0..self.opts.probes {
            let v = self.random_state(n);
            let ab = a.apply_dense(&space, &b.apply_dense(&space, &v));
            let cv = c.apply_dense(&space, &v);
            r = r.max(nrm(&sub(&ab, &cv)));
        }
        Ok(r)
    }

    /// `max ‖(A − B)v‖`.
    pub fn difference(&mut self, a: &LocalMatrix, b: &LocalMatrix) -> Result<f64, LatticeError> {
        let space = union(&a.edges, &b.edges);
        let n = self.space_dim(&space)?;
        let mut r = 0.0f64;
        for _ in 0..self.opts.probes {
            let v = self.random_state(n);
            r = r.max(nrm(&sub(&a.apply_dense(&space, &v), &b.apply_dense(&space, &v))));
        }
        Ok(r)
    }

    /// `‖[W, Σ_t P_t]v‖` on the whole lattice when it fits the budget,
    /// otherwise `Σ_t ‖[W, P_t]‖` on joint supports (an upper bound).
    pub fn hamiltonian_commutator(&mut self, w: &LocalMatrix, terms: &[LocalMatrix]) -> Result<f64, LatticeError> {
        let all: Vec<usize> = (0..self.model.lat.n_edges()).collect();
        if let Ok(n) = self.space_dim(&all) {
            if n <= 5_000_000 {
                let mut r = 0.0f64;
                for _ in 0..self.opts.probes {
                    let v = self.random_state(n);
                    let wv = w.apply_dense(&all, &v);
                    let mut acc = vec![C64::zero(); n];
                    for t in terms {
                        let a = w.apply_dense(&all, &t.apply_dense(&all, &v));
                        let b = t.apply_dense(&all, &wv);
                        for ((o, x), y) in acc.iter_mut().zip(a).zip(b) {
                            *o += x - y;
                        }
                    }
                    r = r.max(nrm(&acc));
                }
                return Ok(r);
            }
        }
        let mut s = 0.0;
        for t in terms {
            s += self.commutator(w, t)?;
        }
        Ok(s)
    }

    /// Applies the product of all projectors to a random vector and checks
    /// the survivor is fixed by every term. Past the dense budget the seed is
    /// a random superposition of a few basis states, kept sparse; if every
    /// such seed is annihilated the search reports a budget error.
    pub fn ground_state(&mut self, terms: &[LocalMatrix]) -> Result<GroundCheck, LatticeError> {
        let all: Vec<usize> = (0..self.model.lat.n_edges()).collect();
        match self.space_dim(&all) {
            Ok(n) => self.ground_state_dense(terms, &all, n),
            Err(LatticeError::Budget { .. }) => self.ground_state_sparse(terms, &all),
            Err(e) => Err(e),
        }
    }

    fn ground_state_dense(&mut self, terms: &[LocalMatrix], all: &[usize], n: usize) -> Result<GroundCheck, LatticeError> {
        let mut v = self.random_state(n);
        let mut survivor = 1.0;
        for _ in 0..self.opts.rounds.max(1) {
            for t in terms {
                v = t.apply_dense(all, &v);
            }
            let s = nrm(&v);
            survivor *= s;
            if s < 1e-300 {
                break;
            }
            for z in v.iter_mut() {
                *z /= s;
            }
        }
        let mut fixed = f64::INFINITY;
        if survivor > 1e-12 {
            fixed = 0.0;
            for t in terms {
                fixed = fixed.max(nrm(&sub(&t.apply_dense(all, &v), &v)));
            }
        }
        Ok(ground_check(n, survivor, fixed, terms.len()))
    }

    fn ground_state_sparse(&mut self, terms: &[LocalMatrix], all: &[usize]) -> Result<GroundCheck, LatticeError> {
        let d = self.model.lat.local_dim;
        let hilbert = self.model.lat.hilbert_dim().unwrap_or(usize::MAX);
        for _attempt in 0..4 {
            let mut v = SparseState::new();
            for _ in 0..16 {
                let key: Vec<usize> = all.iter().map(|_| self.rng.random_range(0..d)).collect();
                v.insert(key, C64::new(self.rng.random::<f64>() - 0.5, self.rng.random::<f64>() - 0.5));
            }
            let n0 = sparse_norm(&v);
            v.values_mut().for_each(|z| *z /= n0);
            let mut survivor = 1.0;
            for _ in 0..self.opts.rounds.max(1) {
                for t in terms {
                    v = t.apply_sparse(all, &v);
                    if v.len() > self.opts.max_sparse_nnz {
                        return Err(LatticeError::Budget { needed: v.len(), budget: self.opts.max_sparse_nnz });
                    }
                }
                let s = sparse_norm(&v);
                survivor *= s;
                if s < 1e-300 {
                    break;
                }
                v.values_mut().for_each(|z| *z /= s);
            }
            if survivor <= 1e-12 {
                continue;
            }
            let mut fixed = 0.0f64;
            for t in terms {
                let w = t.apply_sparse(all, &v);
                fixed = fixed.max(sparse_norm(&multi_sub(&w, &v)));
            }
            return Ok(ground_check(hilbert, survivor, fixed, terms.len()));
        }
        // every sparse seed was annihilated: inconclusive, not a missing ground state
        Err(LatticeError::Budget { needed: hilbert, budget: self.opts.max_state_dim })
    }

    pub fn stabilizer_report(&mut self) -> Result<LatticeReport, LatticeError> {
        let model = self.model;
        let ops = model.stabilizers()?;
        let mats: Vec<LocalMatrix> = ops.iter().map(|o| model.local_matrix(o)).collect();
        let mut projector = Vec::new();
        for (o, m) in ops.iter().zip(&mats) {
            projector.push((o.name.clone(), self.projector_residual(m)?));
        }
        let mut commutators = Vec::new();
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                if mats[i].edges.iter().any(|e| mats[j].edges.contains(e)) {
                    let c = self.commutator(&mats[i], &mats[j])?;
                    commutators.push((ops[i].name.clone(), ops[j].name.clone(), c));
                }
            }
        }
        let ground = match self.ground_state(&mats) {
            Ok(g) => Some(g),
            Err(LatticeError::Budget { .. }) => None,
            Err(e) => return Err(e),
        };
        let mut start_link = Vec::new();
        for v in 0..model.lat.n_vertical() {
            let a = model.local_matrix(&model.vertex_operator(v)?);
            let b = model.local_matrix(&model.vertex_operator_rotated(v)?);
            start_link.push((ops[v].name.clone(), self.difference(&a, &b)?));
        }
        Ok(LatticeReport { n_terms: ops.len(), projector, commutators, ground, start_link })
    }
}

fn ground_check(hilbert_dim: usize, survivor_norm: f64, fixed_residual: f64, n_terms: usize) -> GroundCheck {
    let energy = if fixed_residual < 1e-8 { Some(-(n_terms as f64)) } else { None };
    GroundCheck { hilbert_dim, survivor_norm, fixed_residual, energy }
}

fn sparse_norm(v: &SparseState) -> f64 {
    v.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn multi_sub(a: &SparseState, b: &SparseState) -> SparseState {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(k.clone()).or_insert_with(C64::zero) -= v;
    }
    out
}

/// `‖Δ̂ψ − swap Δ̂ψ‖` of a functional, in the dual algebra.
pub fn dual_cocommutativity(dual: &WeakHopfAlgebra, psi: &[C64]) -> f64 {
    let d: Multi = dual.comult_dense(psi);
    multi_diff(&d, &multi_swap(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::builtin;
    use crate::tube::TubeAlgebra;

    #[test]
    fn edge_layout() {
        let l = LadderLattice::new(3, Model::Ladder, Boundary::Open, 8).unwrap();
        assert_eq!(l.n_edges(), 3 + 4 + 3);
        assert_eq!(l.edge_name(l.h(3)), "h3");
        assert_eq!(l.edge_name(l.x(0)), "x0");
        assert_eq!(l.roles[l.x(2)], EdgeRole::Physical);
    }

    #[test]
    fn local_ops_unit_and_counit_act_trivially() {
        let t = TubeAlgebra::new(&builtin("vec_z2", None).unwrap()).unwrap();
        let ops = LocalOps::new(&t.wha);
        let id = |m: &SparseMat| {
            m.rows.iter().enumerate().all(|(i, r)| {
                r.iter().all(|&(o, v)| (o == i && (v - C64::new(1.0, 0.0)).norm() < 1e-12) || v.norm() < 1e-12)
                    && r.iter().any(|&(o, _)| o == i)
            })
        };
        assert!(id(&ops.op(LocalKind::XLeft, &t.wha.unit)));
        assert!(id(&ops.op(LocalKind::XRight, &t.wha.unit)));
        assert!(id(&ops.op(LocalKind::ZLeft, &t.wha.counit)));
        assert!(id(&ops.op(LocalKind::ZRight, &t.wha.counit)));
    }

    #[test]
    fn dense_application_matches_sparse() {
        let t = TubeAlgebra::new(&builtin("vec_z2", None).unwrap()).unwrap();
        let lat = LadderLattice::new(2, Model::Cluster, Boundary::Periodic, t.dim()).unwrap();
        let m = LatticeModel::new(&t.wha, lat).unwrap();
        let a = m.vertex_operator(1).unwrap();
        let lm = m.local_matrix(&a);
        let space: Vec<usize> = (0..4).collect();
        let mut st = SparseState::new();
        st.insert(vec![3, 1, 4, 6], C64::new(1.0, 0.0));
        let sp = m.apply_sparse(&a, &space, &st);
        let mut v = vec![C64::zero(); 8usize.pow(4)];
        v[((3 * 8 + 1) * 8 + 4) * 8 + 6] = C64::new(1.0, 0.0);
        let dv = lm.apply_dense(&space, &v);
        for (k, z) in sp {
            let i = k.iter().fold(0, |a, &x| a * 8 + x);
            assert!((dv[i] - z).norm() < 1e-12);
        }
    }
}
