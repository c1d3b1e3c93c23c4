//! Weak-Hopf matrix-product ground state of the cluster model.
//!
//! Three local tensors: `Δ(λ)` on every symmetry-boundary edge, `Δ₂(λ)` on
//! every bulk edge and the face glue `(id ⊗ id ⊗ Ŝ)Δ̂₂(Λ)`. Bonds pair a dual
//! basis index with an algebra basis index, which in coordinate duals is a
//! plain index sum.
//!
//! Chain layout (face `i` sits between `h_i` and `h_{i+1}`):
//!
//! ```text
//!   h_i ──λ⁽²⁾── Ŝ(Λ⁽³⁾)•[Λ_i]──Λ⁽¹⁾ ── λ⁽³⁾── h_{i+1}
//!    │ λ⁽¹⁾            │ Λ⁽²⁾
//!  phys                │ λ⁽²⁾
//!                     y_i ── λ⁽¹⁾ phys
//! ```
//!
//! The Sweedler legs of the glue run clockwise (right, down, left), the
//! mirror image of the usual drawing; with our edge orientations this is the
//! order that makes the vertex and face terms stabilise the state.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Boundary, LatticeError, LatticeModel, LocalKind, LocalMatrix, Model, SparseState};
use crate::linalg;
use crate::sparse::DROP_TOL;
use crate::weak_hopf::{multi_diff, multi_swap, Irrep, WeakHopfAlgebra, WhaError};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum MpsError {
    MissingHaar(&'static str),
    Budget { needed: usize, budget: usize },
    NoSuchBlock(usize),
    Unsupported(String),
    Lattice(LatticeError),
    Algebra(WhaError),
}

impl fmt::Display for MpsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MpsError::MissingHaar(w) => write!(f, "missing {w}"),
            MpsError::Budget { needed, budget } => write!(f, "contraction needs {needed} amplitudes, budget {budget}"),
            MpsError::NoSuchBlock(b) => write!(f, "no block {b}"),
            MpsError::Unsupported(s) => write!(f, "{s}"),
            MpsError::Lattice(e) => write!(f, "{e}"),
            MpsError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MpsError {}

impl From<LatticeError> for MpsError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Budget { needed, budget } => MpsError::Budget { needed, budget },
            e => MpsError::Lattice(e),
        }
    }
}

impl From<WhaError> for MpsError {
    fn from(e: WhaError) -> Self {
        MpsError::Algebra(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    BoundaryEdge,
    BulkEdge,
    FaceGlue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegRole {
    Physical,
    Bond,
}

#[derive(Debug, Clone)]
pub struct LocalTensor {
    pub kind: TensorKind,
    /// legs in Sweedler order
    pub legs: Vec<LegRole>,
    pub dim: usize,
    pub data: Vec<(Vec<usize>, C64)>,
    /// leg carrying `Ŝ` (the black dot), face glue only
    pub marked_leg: Option<usize>,
}

impl LocalTensor {
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|t| t.1.norm_sqr()).sum::<f64>().sqrt()
    }
    pub fn nnz(&self) -> usize {
        self.data.len()
    }
    /// `ε` on leg `leg` (caps a dangling leg).
    fn capped(&self, alg: &WeakHopfAlgebra, leg: usize, kind: TensorKind) -> LocalTensor {
        let mut acc: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        for (key, v) in &self.data {
            let e = alg.counit[key[leg]];
            if e == C64::zero() {
                continue;
            }
            let mut k = key.clone();
            k.remove(leg);
            *acc.entry(k).or_insert_with(C64::zero) += v * e;
        }
        let mut legs = self.legs.clone();
        legs.remove(leg);
        let data = acc.into_iter().filter(|t| t.1.norm() > DROP_TOL).collect();
        LocalTensor { kind, legs, dim: self.dim, data, marked_leg: None }
    }
}

#[derive(Debug, Clone)]
pub struct LocalTensors {
    pub boundary_edge: LocalTensor,
    pub bulk_edge: LocalTensor,
    pub face_glue: LocalTensor,
}

/// Needs `h.haar` and `h.haar_dual`.
pub fn local_tensors(h: &WeakHopfAlgebra) -> Result<LocalTensors, MpsError> {
    let lambda = h.haar.as_ref().ok_or(MpsError::MissingHaar("haar integral"))?;
    let big = h.haar_dual.as_ref().ok_or(MpsError::MissingHaar("dual haar measure"))?;
    let dual = h.dualize()?;
    Ok(local_tensors_from(h, &dual, lambda, big))
}

pub fn local_tensors_from(h: &WeakHopfAlgebra, dual: &WeakHopfAlgebra, lambda: &[C64], big: &[C64]) -> LocalTensors {
    use LegRole::*;
    let collect = |m: crate::weak_hopf::Multi| -> Vec<(Vec<usize>, C64)> {
        m.into_iter().filter(|t| t.1.norm() > DROP_TOL).collect()
    };
    let boundary_edge = LocalTensor {
        kind: TensorKind::BoundaryEdge,
        legs: vec![Physical, Bond],
        dim: h.dim,
        data: collect(h.iterated_comult(lambda, 2)),
        marked_leg: None,
    };
    let bulk_edge = LocalTensor {
        kind: TensorKind::BulkEdge,
        legs: vec![Physical, Bond, Bond],
        dim: h.dim,
        data: collect(h.iterated_comult(lambda, 3)),
        marked_leg: None,
    };
    let mut glue = crate::weak_hopf::Multi::new();
    for (key, v) in dual.iterated_comult(big, 3) {
        // Ŝ(φ_c) = Σ_k Ŝ[c][k] φ_k
        for &(k, s) in dual.antipode.row(key[2]) {
            *glue.entry(vec![key[0], key[1], k]).or_insert_with(C64::zero) += v * s;
        }
    }
    let face_glue = LocalTensor {
        kind: TensorKind::FaceGlue,
        legs: vec![Bond, Bond, Bond],
        dim: h.dim,
        data: collect(glue),
        marked_leg: Some(2),
    };
    LocalTensors { boundary_edge, bulk_edge, face_glue }
}

/// Sparse tensor with labelled legs.
#[derive(Debug, Clone)]
struct Labelled {
    labels: Vec<usize>,
    entries: BTreeMap<Vec<usize>, C64>,
}

impl Labelled {
    fn of(t: &LocalTensor, labels: &[usize]) -> Self {
        let mut entries = BTreeMap::new();
        for (k, v) in &t.data {
            *entries.entry(k.clone()).or_insert_with(C64::zero) += v;
        }
        Labelled { labels: labels.to_vec(), entries }
    }

    /// Sums over every label the two tensors share; free legs of `self`
    /// come first.
    fn contract(&self, other: &Labelled, budget: usize) -> Result<Labelled, MpsError> {
        let shared: Vec<usize> = self.labels.iter().copied().filter(|l| other.labels.contains(l)).collect();
        let pos = |t: &Labelled, l: usize| t.labels.iter().position(|&x| x == l).unwrap();
        let sa: Vec<usize> = shared.iter().map(|&l| pos(self, l)).collect();
        let sb: Vec<usize> = shared.iter().map(|&l| pos(other, l)).collect();
        let fa: Vec<usize> = (0..self.labels.len()).filter(|i| !sa.contains(i)).collect();
        let fb: Vec<usize> = (0..other.labels.len()).filter(|i| !sb.contains(i)).collect();
        let mut by_shared: BTreeMap<Vec<usize>, Vec<(Vec<usize>, C64)>> = BTreeMap::new();
        for (k, v) in &other.entries {
            let s: Vec<usize> = sb.iter().map(|&i| k[i]).collect();
            by_shared.entry(s).or_default().push((fb.iter().map(|&i| k[i]).collect(), *v));
        }
        let mut entries: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
        for (k, v) in &self.entries {
            let s: Vec<usize> = sa.iter().map(|&i| k[i]).collect();
            let Some(matches) = by_shared.get(&s) else { continue };
            let head: Vec<usize> = fa.iter().map(|&i| k[i]).collect();
            for (tail, w) in matches {
                let mut key = head.clone();
                key.extend_from_slice(tail);
                *entries.entry(key).or_insert_with(C64::zero) += v * w;
            }
            if entries.len() > budget {
                return Err(MpsError::Budget { needed: entries.len(), budget });
            }
        }
        entries.retain(|_, v| v.norm() > DROP_TOL);
        let mut labels: Vec<usize> = fa.iter().map(|&i| self.labels[i]).collect();
        labels.extend(fb.iter().map(|&i| other.labels[i]));
        Ok(Labelled { labels, entries })
    }
}

/// A tensor placed on the lattice, its legs relabelled: physical legs carry
/// the edge index, bonds carry ids above the edge count.
#[derive(Debug, Clone)]
pub struct PlacedTensor {
    pub name: String,
    pub tensor: LocalTensor,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionPlan {
    LeftToRight,
    RightToLeft,
}

#[derive(Debug, Clone)]
pub struct MpsOptions {
    /// largest contracted state also returned as a dense vector
    pub max_dense_dim: usize,
    /// most nonzero entries allowed in an intermediate tensor
    pub max_intermediate: usize,
    pub seed: u64,
}

impl Default for MpsOptions {
    fn default() -> Self {
        MpsOptions { max_dense_dim: 200_000, max_intermediate: 20_000_000, seed: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct TensorNetworkState {
    pub n: usize,
    pub boundary: Boundary,
    pub n_edges: usize,
    pub d: usize,
    /// chain of plaquettes: bulk edge, boundary edge, face glue
    pub tensors: Vec<PlacedTensor>,
    /// normalised amplitudes keyed by the labels of all edges in order
    pub amplitudes: SparseState,
    /// the same state as a dense vector (edge 0 most significant), when it
    /// fits the dense budget
    pub dense: Option<Vec<C64>>,
    /// 2-norm before normalisation
    pub raw_norm: f64,
}

/// Lays out the cluster-model network on `model.lat` and contracts it.
pub fn build_state(model: &LatticeModel<'_>, tensors: &LocalTensors, opts: &MpsOptions) -> Result<TensorNetworkState, MpsError> {
    let lat = &model.lat;
    if lat.model != Model::Cluster {
        return Err(MpsError::Unsupported("the tensor-network state is built for the cluster model".into()));
    }
    let n = lat.n;
    let nv = lat.n_vertical();
    let ne = lat.n_edges();
    // bond ids: right leg of h_i = ne + 2i, left leg of h_i = ne + 2i + 1,
    // y_i to face i = ne + 2 nv + i
    let right = |i: usize| ne + 2 * i;
    let left = |i: usize| ne + 2 * i + 1;
    let ybond = |i: usize| ne + 2 * nv + i;
    let mut placed = Vec::new();
    for i in 0..nv {
        let has_left = lat.boundary == Boundary::Periodic || i > 0;
        let has_right = lat.boundary == Boundary::Periodic || i < n;
        // Δ₂(λ) = λ⁽¹⁾ phys ⊗ λ⁽²⁾ right ⊗ λ⁽³⁾ left; open ends cap with ε
        let (t, labels) = match (has_left, has_right) {
            (true, true) => (tensors.bulk_edge.clone(), vec![lat.h(i), right(i), left(i)]),
            (false, true) => (tensors.bulk_edge.capped(model.h, 2, TensorKind::BulkEdge), vec![lat.h(i), right(i)]),
            (true, false) => (tensors.bulk_edge.capped(model.h, 1, TensorKind::BulkEdge), vec![lat.h(i), left(i)]),
            (false, false) => return Err(MpsError::Unsupported("isolated bulk edge".into())),
        };
        placed.push(PlacedTensor { name: format!("h{i}"), tensor: t, labels });
        if i < n {
            placed.push(PlacedTensor {
                name: format!("y{i}"),
                tensor: tensors.boundary_edge.clone(),
                labels: vec![lat.y(i), ybond(i)],
            });
            // Λ⁽¹⁾ → h_{i+1} left, Λ⁽²⁾ → y_i, Ŝ(Λ⁽³⁾) → h_i right
            placed.push(PlacedTensor {
                name: format!("F{i}"),
                tensor: tensors.face_glue.clone(),
                labels: vec![left((i + 1) % nv), ybond(i), right(i)],
            });
        }
    }
    let mut st = TensorNetworkState {
        n,
        boundary: lat.boundary,
        n_edges: ne,
        d: lat.local_dim,
        tensors: placed,
        amplitudes: SparseState::new(),
        dense: None,
        raw_norm: 0.0,
    };
    let amps = st.contract(ContractionPlan::LeftToRight, opts.max_intermediate)?;
    let nrm = amps.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    st.raw_norm = nrm;
    let s = if nrm > 0.0 { 1.0 / nrm } else { 1.0 };
    st.amplitudes = amps.into_iter().map(|(k, v)| (k, v * s)).collect();
    if let Some(dim) = lat.hilbert_dim() {
        if dim <= opts.max_dense_dim {
            st.dense = Some(to_dense(&st.amplitudes, st.d, dim));
        }
    }
    Ok(st)
}

fn to_dense(st: &SparseState, d: usize, dim: usize) -> Vec<C64> {
    let mut v = vec![C64::zero(); dim];
    for (k, z) in st {
        v[k.iter().fold(0, |a, &x| a * d + x)] += z;
    }
    v
}

impl TensorNetworkState {
    /// Each plaquette (bulk edge, boundary edge, face glue) merged first, then
    /// the chain folded in the given direction. Unnormalised.
    pub fn contract(&self, plan: ContractionPlan, max_intermediate: usize) -> Result<SparseState, MpsError> {
        let mut units: Vec<Labelled> = Vec::new();
        let mut k = 0;
        while k < self.tensors.len() {
            let p = &self.tensors[k];
            let mut u = Labelled::of(&p.tensor, &p.labels);
            if p.tensor.kind == TensorKind::BulkEdge
                && self.tensors.get(k + 1).is_some_and(|t| t.tensor.kind == TensorKind::BoundaryEdge)
            {
                let (y, f) = (&self.tensors[k + 1], &self.tensors[k + 2]);
                let yf = Labelled::of(&y.tensor, &y.labels).contract(&Labelled::of(&f.tensor, &f.labels), max_intermediate)?;
                u = u.contract(&yf, max_intermediate)?;
                k += 3;
            } else {
                k += 1;
            }
            units.push(u);
        }
        if plan == ContractionPlan::RightToLeft {
            units.reverse();
        }
        let mut acc = units[0].clone();
        for u in &units[1..] {
            acc = acc.contract(u, max_intermediate)?;
        }
        if acc.labels.iter().any(|&l| l >= self.n_edges) {
            return Err(MpsError::Unsupported("uncontracted bond".into()));
        }
        let order: Vec<usize> = (0..self.n_edges).map(|e| acc.labels.iter().position(|&l| l == e).unwrap()).collect();
        Ok(acc.entries.into_iter().map(|(k, v)| (order.iter().map(|&i| k[i]).collect(), v)).collect())
    }

    /// Largest amplitude difference between two contraction plans, relative
    /// to the largest amplitude.
    pub fn plan_discrepancy(&self, max_intermediate: usize) -> Result<f64, MpsError> {
        let a = self.contract(ContractionPlan::LeftToRight, max_intermediate)?;
        let b = self.contract(ContractionPlan::RightToLeft, max_intermediate)?;
        let scale = a.values().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        Ok(multi_diff(&a, &b) / scale)
    }
}

fn sparse_norm(s: &SparseState) -> f64 {
    s.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sparse_sub_norm(a: &SparseState, b: &SparseState, scale: C64) -> f64 {
    let mut r = 0.0;
    for (k, v) in a {
        r += (v - scale * b.get(k).copied().unwrap_or_else(C64::zero)).norm_sqr();
    }
    for (k, v) in b {
        if !a.contains_key(k) {
            r += (scale * v).norm_sqr();
        }
    }
    r.sqrt()
}

fn sparse_dot(a: &SparseState, b: &SparseState) -> C64 {
    a.iter().fold(C64::zero(), |s, (k, v)| s + v.conj() * b.get(k).copied().unwrap_or_else(C64::zero))
}

#[derive(Debug, Clone)]
pub struct StabilizerReport {
    /// `‖(P − 1)ψ‖/‖ψ‖` per term
    pub residuals: Vec<(String, f64)>,
    /// `|⟨ψ|Πψ⟩| / ‖Πψ‖` with `Π` the product of all terms
    pub projected_fidelity: f64,
}

impl StabilizerReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

pub fn verify_stabilizers(model: &LatticeModel<'_>, state: &TensorNetworkState) -> Result<StabilizerReport, MpsError> {
    let psi = &state.amplitudes;
    let all: Vec<usize> = (0..state.n_edges).collect();
    let mut residuals = Vec::new();
    let mut proj = psi.clone();
    for op in model.stabilizers()? {
        let m = model.local_matrix(&op);
        let p = m.apply_sparse(&all, psi);
        residuals.push((op.name.clone(), sparse_sub_norm(&p, psi, C64::new(1.0, 0.0))));
        proj = m.apply_sparse(&all, &proj);
    }
    let pn = sparse_norm(&proj);
    let projected_fidelity = if pn > 0.0 { sparse_dot(psi, &proj).norm() / pn } else { 0.0 };
    Ok(StabilizerReport { residuals, projected_fidelity })
}

/// `W_Γ = Tr′[→Z_Γ ⋆ ⋯ ⋆ →Z_Γ]` on the symmetry-boundary edges, auxiliary
/// legs of dimension `dim Γ`.
pub struct SymmetryMpo {
    pub block: usize,
    pub dim: usize,
    /// in auxiliary-chain order, which runs against the edge orientation as
    /// in `symmetry_z`
    pub edges: Vec<usize>,
    /// `z[α][β]` = `→Z` with the functional `x ↦ Γ(x)_{αβ}`, per edge
    z: Vec<Vec<Vec<LocalMatrix>>>,
}

impl SymmetryMpo {
    pub fn new(model: &LatticeModel<'_>, irrep: &Irrep, block: usize) -> Self {
        let h = model.h;
        let g = irrep.dim;
        let mats: Vec<DMatrix<C64>> = (0..h.dim).map(|k| irrep.matrix(h, &h.basis_vec(k))).collect();
        let edges: Vec<usize> = (0..model.lat.n).rev().map(|i| model.lat.y(i)).collect();
        let z = edges
            .iter()
            .map(|&e| {
                (0..g)
                    .map(|a| {
                        (0..g)
                            .map(|b| {
                                let coeffs: Vec<C64> = mats.iter().map(|m| m[(a, b)]).collect();
                                let m = model.ops.op(LocalKind::ZLeft, &coeffs);
                                LocalMatrix { edges: vec![e], d: h.dim, rows: m.rows }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        SymmetryMpo { block, dim: g, edges, z }
    }

    /// Traces the auxiliary chain: `Σ_α Z_{α₀α₁} ⊗ Z_{α₁α₂} ⊗ ⋯ ⊗ Z_{α_{n−1}α₀}`.
    fn trace_chain<V: Clone>(&self, psi: &V, apply: impl Fn(&LocalMatrix, &V) -> V, add: impl Fn(&mut V, V)) -> Option<V> {
        let g = self.dim;
        let k = self.edges.len();
        let mut out: Option<V> = None;
        for a0 in 0..g {
            let mut cur: Vec<Option<V>> = vec![None; g];
            cur[a0] = Some(psi.clone());
            for step in 0..k {
                let mut next: Vec<Option<V>> = vec![None; g];
                let targets: Vec<usize> = if step + 1 == k { vec![a0] } else { (0..g).collect() };
                for (a, v) in cur.iter().enumerate() {
                    let Some(v) = v else { continue };
                    for &b in &targets {
                        let w = apply(&self.z[step][a][b], v);
                        match &mut next[b] {
                            Some(acc) => add(acc, w),
                            slot => *slot = Some(w),
                        }
                    }
                }
                cur = next;
            }
            if let Some(v) = cur[a0].take() {
                match &mut out {
                    Some(o) => add(o, v),
                    slot => *slot = Some(v),
                }
            }
        }
        out
    }

    /// `W ψ` for a dense state over `space` (must contain every symmetry edge).
    pub fn apply(&self, space: &[usize], psi: &[C64]) -> Vec<C64> {
        let v = psi.to_vec();
        self.trace_chain(&v, |m, x| m.apply_dense(space, x), |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y))
            .unwrap_or_else(|| vec![C64::zero(); psi.len()])
    }

    pub fn apply_sparse(&self, space: &[usize], psi: &SparseState) -> SparseState {
        self.trace_chain(psi, |m, x| m.apply_sparse(space, x), |a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert_with(C64::zero) += v;
            }
        })
        .map(|mut s| {
            s.retain(|_, v| v.norm() > DROP_TOL);
            s
        })
        .unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct SymmetryAction {
    pub block: usize,
    pub irrep_dim: usize,
    /// `⟨ψ|W|ψ⟩/⟨ψ|ψ⟩`
    pub eigenvalue: C64,
    /// `‖Wψ − μψ‖/‖ψ‖`
    pub variance: f64,
    /// max over random probes of `‖(W_mpo − W_op)v‖/‖v‖`
    pub operator_agreement: f64,
    /// `Σ_t ‖[W_mpo, P_t]v‖/‖v‖` on joint supports; `None` past the budget
    pub hamiltonian_commutator: Option<f64>,
}

/// Applies the symmetry MPO of `block` to the state and cross-checks it
/// against the functional-path operator on random states.
pub fn apply_symmetry_mpo(
    model: &LatticeModel<'_>,
    state: &TensorNetworkState,
    block: usize,
    probes: usize,
    seed: u64,
    max_dense_dim: usize,
) -> Result<SymmetryAction, MpsError> {
    let table = model.h.characters(seed)?;
    if block >= table.block_dims.len() {
        return Err(MpsError::NoSuchBlock(block));
    }
    let irrep = model.h.irrep(&table.idempotents[block], table.block_dims[block], seed)?;
    let mpo = SymmetryMpo::new(model, &irrep, block);
    let psi = &state.amplitudes;
    let all: Vec<usize> = (0..state.n_edges).collect();
    let wpsi = mpo.apply_sparse(&all, psi);
    let mu = sparse_dot(psi, &wpsi);
    let variance = sparse_sub_norm(&wpsi, psi, mu);

    let wop = model.local_matrix(&model.symmetry_z(&table.characters[block]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreement = 0.0f64;
    let space = wop.edges.clone();
    for _ in 0..probes {
        let v = linalg::random_complex(&mut rng, state.d.pow(space.len() as u32));
        let a = mpo.apply(&space, &v);
        let b = wop.apply_dense(&space, &v);
        agreement = agreement.max(linalg::norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()) / linalg::norm(&v));
    }
    let mut comm = Some(0.0);
    for op in model.stabilizers()? {
        let p = model.local_matrix(&op);
        let mut joint = space.clone();
        joint.extend(p.edges.iter().copied());
        joint.sort_unstable();
        joint.dedup();
        let n = match state.d.checked_pow(joint.len() as u32) {
            Some(n) if n <= max_dense_dim => n,
            _ => {
                comm = None;
                break;
            }
        };
        let v = linalg::random_complex(&mut rng, n);
        let nv = linalg::norm(&v);
        let wp = mpo.apply(&joint, &p.apply_dense(&joint, &v));
        let pw = p.apply_dense(&joint, &mpo.apply(&joint, &v));
        let c = linalg::norm(&wp.iter().zip(&pw).map(|(a, b)| a - b).collect::<Vec<_>>()) / nv;
        comm = comm.map(|s| s + c);
    }
    Ok(SymmetryAction {
        block,
        irrep_dim: irrep.dim,
        eigenvalue: mu,
        variance,
        operator_agreement: agreement,
        hamiltonian_commutator: comm,
    })
}

/// The algebraic facts the stabilizer proof rests on, for algebras too
/// large to contract.
#[derive(Debug, Clone, Copy)]
pub struct LocalIdentities {
    pub lambda_idempotent: f64,
    pub lambda_cocommutative: f64,
    pub big_lambda_idempotent: f64,
    pub big_lambda_cocommutative: f64,
}

impl LocalIdentities {
    pub fn as_list(&self) -> [(&'static str, f64); 4] {
        [
            ("lambda_idempotent", self.lambda_idempotent),
            ("lambda_cocommutative", self.lambda_cocommutative),
            ("dual_lambda_idempotent", self.big_lambda_idempotent),
            ("dual_lambda_cocommutative", self.big_lambda_cocommutative),
        ]
    }
}

pub fn local_identities(h: &WeakHopfAlgebra, dual: &WeakHopfAlgebra, lambda: &[C64], big: &[C64]) -> LocalIdentities {
    let cocom = |alg: &WeakHopfAlgebra, x: &[C64]| {
        let d = alg.comult_dense(x);
        multi_diff(&d, &multi_swap(&d))
    };
    LocalIdentities {
        lambda_idempotent: linalg::max_abs_diff(&h.mul_dense(lambda, lambda), lambda),
        lambda_cocommutative: cocom(h, lambda),
        big_lambda_idempotent: linalg::max_abs_diff(&dual.mul_dense(big, big), big),
        big_lambda_cocommutative: cocom(dual, big),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::builtin;
    use crate::lattice::LadderLattice;
    use crate::tube::TubeAlgebra;

    fn setup(name: &str) -> TubeAlgebra {
        let mut t = TubeAlgebra::new(&builtin(name, None).unwrap()).unwrap();
        t.compute_dual_haar().unwrap();
        t
    }

    #[test]
    fn trivial_tensors_are_scalar_one() {
        let t = setup("trivial");
        let lt = local_tensors(&t.wha).unwrap();
        for x in [&lt.boundary_edge, &lt.bulk_edge, &lt.face_glue] {
            assert_eq!(x.nnz(), 1);
            assert!((x.data[0].1 - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_tensor_is_coproduct_of_haar() {
        let t = setup("vec_z2");
        let lt = local_tensors(&t.wha).unwrap();
        let lam = t.wha.haar.clone().unwrap();
        // oracle: Σ_k λ_k C[k][i][j], read straight off the comultiplication table
        let mut want = alloc::collections::BTreeMap::new();
        for (k, i, j, v) in t.wha.comult.triples() {
            *want.entry(vec![i, j]).or_insert(C64::zero()) += lam[k] * v;
        }
        for (key, v) in &lt.boundary_edge.data {
            assert!((want[key] - v).norm() < 1e-13);
        }
        let total: usize = want.values().filter(|v| v.norm() > DROP_TOL).count();
        assert_eq!(total, lt.boundary_edge.nnz());
    }

    #[test]
    fn labelled_contraction_is_a_matrix_product() {
        let t = |labels: Vec<usize>, e: &[(usize, usize, f64)]| Labelled {
            labels,
            entries: e.iter().map(|&(i, j, v)| (vec![i, j], C64::new(v, 0.0))).collect(),
        };
        // [[1,2],[0,3]] · [[4,0],[5,6]] = [[14,12],[15,18]]
        let a = t(vec![0, 9], &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = t(vec![9, 1], &[(0, 0, 4.0), (1, 0, 5.0), (1, 1, 6.0)]);
        let c = a.contract(&b, 100).unwrap();
        assert_eq!(c.labels, vec![0, 1]);
        assert_eq!(c.entries[&vec![0, 0]], C64::new(14.0, 0.0));
        assert_eq!(c.entries[&vec![1, 1]], C64::new(18.0, 0.0));
        assert!(matches!(a.contract(&b, 1), Err(MpsError::Budget { .. })));
    }

    #[test]
    fn trivial_state_is_one() {
        let t = setup("trivial");
        let lt = local_tensors(&t.wha).unwrap();
        let lat = LadderLattice::new(2, Model::Cluster, Boundary::Periodic, 1).unwrap();
        let m = LatticeModel::new(&t.wha, lat).unwrap();
        let st = build_state(&m, &lt, &MpsOptions::default()).unwrap();
        assert_eq!(st.dense.as_deref(), Some(&[C64::new(1.0, 0.0)][..]));
    }
}
