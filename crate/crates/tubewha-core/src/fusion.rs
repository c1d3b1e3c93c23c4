//! Multiplicity-free unitary fusion categories: fusion rules, duals,
//! Frobenius–Perron dimensions and F-symbols.
//!
//! F-symbol keys are `(a, b, c, d, e, f)`: the matrix `F^{abc}_d` sends the
//! basis `(a⊗b)⊗c` through `e ∈ a⊗b` to `a⊗(b⊗c)` through `f ∈ b⊗c`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
// `Float` supplies sqrt/powi when std is absent
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::C64;

pub type FKey = [usize; 6];

#[derive(Debug, Clone, PartialEq)]
pub enum FusionError {
    /// `N[a][b][c] > 1`.
    Multiplicity { a: usize, b: usize, c: usize, n: u32 },
    /// First violated structural invariant, in words.
    Invariant(String),
    MissingF(FKey),
    InadmissibleF(FKey),
    Convergence,
    MissingData(String),
}

impl fmt::Display for FusionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FusionError::Multiplicity { a, b, c, n } => {
                write!(f, "multiplicity N[{a}][{b}][{c}] = {n} > 1 is not supported")
            }
            FusionError::Invariant(s) => write!(f, "invariant violated: {s}"),
            FusionError::MissingF(k) => write!(f, "missing F-symbol for admissible key {k:?}"),
            FusionError::InadmissibleF(k) => write!(f, "F-symbol given for inadmissible key {k:?}"),
            FusionError::Convergence => write!(f, "Frobenius-Perron eigen-solve did not converge"),
            FusionError::MissingData(s) => write!(f, "missing data: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FusionError {}

#[derive(Debug, Clone)]
pub struct FusionCategory {
    rank: usize,
    labels: Vec<String>,
    dual: Vec<usize>,
    n: Vec<u8>,
    d: Vec<f64>,
    f: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct PentagonReport {
    /// `(a, b, c, d, e, f, g, k, l)` and the residual of that instance.
    pub residuals: Vec<([usize; 9], f64)>,
    pub max_residual: f64,
    pub worst: Option<[usize; 9]>,
    pub max_unitarity: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Fusion tensor from a list of triples with multiplicity one.
pub fn fusion_tensor(rank: usize, triples: &[[usize; 3]]) -> Result<Vec<u8>, FusionError> {
    let mut n = vec![0u8; rank * rank * rank];
    for &[a, b, c] in triples {
        if a >= rank || b >= rank || c >= rank {
            return Err(FusionError::Invariant(format!(
                "fusion triple [{a},{b},{c}] out of range for rank {rank}"
            )));
        }
        let slot = &mut n[(a * rank + b) * rank + c];
        *slot = slot.saturating_add(1);
        if *slot > 1 {
            return Err(FusionError::Multiplicity { a, b, c, n: *slot as u32 });
        }
    }
    Ok(n)
}

impl FusionCategory {
    /// Builds and validates a category. `n` is the dense `rank³` fusion tensor,
    /// `dual` is cross-checked if given, `fsymbols` must cover every
    /// admissible key and nothing else.
    pub fn new(
        labels: Vec<String>,
        n: Vec<u8>,
        dual: Option<Vec<usize>>,
        fsymbols: &[(FKey, C64)],
    ) -> Result<Self, FusionError> {
        let rank = labels.len();
        if rank == 0 {
            return Err(FusionError::Invariant("rank must be positive".into()));
        }
        if n.len() != rank * rank * rank {
            return Err(FusionError::Invariant("fusion tensor has wrong size".into()));
        }
        let idx = |a: usize, b: usize, c: usize| (a * rank + b) * rank + c;
        for a in 0..rank {
            for b in 0..rank {
                for c in 0..rank {
                    let v = n[idx(a, b, c)];
                    if v > 1 {
                        return Err(FusionError::Multiplicity { a, b, c, n: v as u32 });
                    }
                }
            }
        }
        for b in 0..rank {
            for c in 0..rank {
                let want = (b == c) as u8;
                if n[idx(0, b, c)] != want || n[idx(b, 0, c)] != want {
                    return Err(FusionError::Invariant(format!(
                        "object 0 is not a unit (b={b}, c={c})"
                    )));
                }
            }
        }
        let mut computed_dual = vec![0; rank];
        for a in 0..rank {
            let duals: Vec<usize> = (0..rank).filter(|&b| n[idx(a, b, 0)] == 1).collect();
            if duals.len() != 1 {
                return Err(FusionError::Invariant(format!(
                    "object {a} has {} duals, expected exactly one",
                    duals.len()
                )));
            }
            computed_dual[a] = duals[0];
        }
        for a in 0..rank {
            if computed_dual[computed_dual[a]] != a {
                return Err(FusionError::Invariant(format!("duality is not an involution at {a}")));
            }
        }
        if let Some(dl) = dual {
            if dl != computed_dual {
                return Err(FusionError::Invariant(format!(
                    "declared dual map {dl:?} disagrees with fusion rules {computed_dual:?}"
                )));
            }
        }
        for a in 0..rank {
            for b in 0..rank {
                for c in 0..rank {
                    for d in 0..rank {
                        let l: u32 = (0..rank)
                            .map(|e| n[idx(a, b, e)] as u32 * n[idx(e, c, d)] as u32)
                            .sum();
                        let r: u32 = (0..rank)
                            .map(|f| n[idx(b, c, f)] as u32 * n[idx(a, f, d)] as u32)
                            .sum();
                        if l != r {
                            return Err(FusionError::Invariant(format!(
                                "fusion ring not associative at ({a},{b},{c};{d})"
                            )));
                        }
                    }
                }
            }
        }
        let d = perron_dims(rank, &n)?;
        let mut cat = FusionCategory { rank, labels, dual: computed_dual, n, d, f: Vec::new() };
        let res = cat.dimension_residual();
        if res > 1e-10 {
            return Err(FusionError::Invariant(format!(
                "d_a d_b = Σ N d_c fails with residual {res:e}"
            )));
        }
        cat.f = vec![C64::zero(); rank.pow(6)];
        let mut seen = vec![false; rank.pow(6)];
        for &(k, v) in fsymbols {
            if k.iter().any(|&x| x >= rank) || !cat.admissible(k) {
                return Err(FusionError::InadmissibleF(k));
            }
            let i = cat.fidx(k);
            cat.f[i] = v;
            seen[i] = true;
        }
        for k in cat.admissible_keys() {
            if !seen[cat.fidx(k)] {
                return Err(FusionError::MissingF(k));
            }
        }
        Ok(cat)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn dual(&self, a: usize) -> usize {
        self.dual[a]
    }
    pub fn duals(&self) -> &[usize] {
        &self.dual
    }
    #[inline]
    pub fn n(&self, a: usize, b: usize, c: usize) -> bool {
        self.n[(a * self.rank + b) * self.rank + c] != 0
    }
    pub fn fusion_raw(&self) -> &[u8] {
        &self.n
    }
    /// Simple summands of `a ⊗ b`.
    pub fn fuse(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.rank).filter(|&c| self.n(a, b, c)).collect()
    }
    pub fn fusion_triples(&self) -> Vec<[usize; 3]> {
        let r = self.rank;
        let mut out = Vec::new();
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    if self.n(a, b, c) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }
    /// Frobenius–Perron dimensions (recomputed at construction).
    pub fn fpdims(&self) -> &[f64] {
        &self.d
    }
    #[inline]
    pub fn d(&self, a: usize) -> f64 {
        self.d[a]
    }
    pub fn total_fpdim(&self) -> f64 {
        self.d.iter().map(|x| x * x).sum()
    }
    /// max over (a,b) of |d_a d_b − Σ_c N_ab^c d_c|.
    pub fn dimension_residual(&self) -> f64 {
        let r = self.rank;
        let mut m = 0.0f64;
        for a in 0..r {
            for b in 0..r {
                let s: f64 = (0..r).filter(|&c| self.n(a, b, c)).map(|c| self.d[c]).sum();
                m = m.max((self.d[a] * self.d[b] - s).abs());
            }
        }
        m
    }

    #[inline]
    fn fidx(&self, k: FKey) -> usize {
        k.iter().fold(0, |acc, &x| acc * self.rank + x)
    }
    pub fn admissible(&self, [a, b, c, d, e, f]: FKey) -> bool {
        self.n(a, b, e) && self.n(e, c, d) && self.n(b, c, f) && self.n(a, f, d)
    }
    pub fn admissible_keys(&self) -> Vec<FKey> {
        let r = self.rank;
        let mut out = Vec::new();
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for d in 0..r {
                        let (es, fs) = self.channels(a, b, c, d);
                        for &e in &es {
                            for &f in &fs {
                                out.push([a, b, c, d, e, f]);
                            }
                        }
                    }
                }
            }
        }
        out
    }
    #[inline]
    pub fn f(&self, a: usize, b: usize, c: usize, d: usize, e: usize, f: usize) -> C64 {
        self.f[self.fidx([a, b, c, d, e, f])]
    }
    pub fn fsymbols(&self) -> Vec<(FKey, C64)> {
        self.admissible_keys().into_iter().map(|k| (k, self.f[self.fidx(k)])).collect()
    }
    /// Row labels `e ∈ a⊗b` and column labels `f ∈ b⊗c` of `F^{abc}_d`.
    pub fn channels(&self, a: usize, b: usize, c: usize, d: usize) -> (Vec<usize>, Vec<usize>) {
        let es = (0..self.rank).filter(|&e| self.n(a, b, e) && self.n(e, c, d)).collect();
        let fs = (0..self.rank).filter(|&f| self.n(b, c, f) && self.n(a, f, d)).collect();
        (es, fs)
    }
    pub fn f_matrix(&self, a: usize, b: usize, c: usize, d: usize) -> (Vec<usize>, Vec<usize>, DMatrix<C64>) {
        let (es, fs) = self.channels(a, b, c, d);
        let m = DMatrix::from_fn(es.len(), fs.len(), |i, j| self.f(a, b, c, d, es[i], fs[j]));
        (es, fs, m)
    }

    /// Pentagon
    /// `F^{fcd}_e[g,l] F^{abl}_e[f,k] = Σ_h F^{abc}_g[f,h] F^{ahd}_e[g,k] F^{bcd}_k[h,l]`
    /// over every admissible instance, plus unitarity of every F-matrix.
    pub fn check_pentagon(&self, tol: f64) -> PentagonReport {
        let r = self.rank;
        let per_a = |a: usize| -> Vec<([usize; 9], f64)> {
            let mut out = Vec::new();
            for b in 0..r {
                for c in 0..r {
                    for d in 0..r {
                        for e in 0..r {
                            for f in (0..r).filter(|&f| self.n(a, b, f)) {
                                for g in (0..r).filter(|&g| self.n(f, c, g) && self.n(g, d, e)) {
                                    for l in (0..r).filter(|&l| self.n(c, d, l)) {
                                        for k in (0..r).filter(|&k| self.n(b, l, k) && self.n(a, k, e)) {
                                            let lhs = if self.n(f, l, e) {
                                                self.f(f, c, d, e, g, l) * self.f(a, b, l, e, f, k)
                                            } else {
                                                C64::zero()
                                            };
                                            let mut rhs = C64::zero();
                                            for h in 0..r {
                                                if self.admissible([a, b, c, g, f, h])
                                                    && self.admissible([a, h, d, e, g, k])
                                                    && self.admissible([b, c, d, k, h, l])
                                                {
                                                    rhs += self.f(a, b, c, g, f, h)
                                                        * self.f(a, h, d, e, g, k)
                                                        * self.f(b, c, d, k, h, l);
                                                }
                                            }
                                            out.push(([a, b, c, d, e, f, g, k, l], (lhs - rhs).norm()));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            out
        };
        #[cfg(feature = "parallel")]
        let residuals: Vec<_> = {
            use rayon::prelude::*;
            (0..r).into_par_iter().flat_map_iter(per_a).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let residuals: Vec<_> = (0..r).flat_map(per_a).collect();

        let mut max_residual = 0.0f64;
        let mut worst = None;
        for &(k, v) in &residuals {
            if v > max_residual || worst.is_none() {
                max_residual = max_residual.max(v);
                worst = Some(k);
            }
        }
        let mut max_unitarity = 0.0f64;
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for d in 0..r {
                        let (es, _, m) = self.f_matrix(a, b, c, d);
                        if es.is_empty() {
                            continue;
                        }
                        let u = &m * m.adjoint() - DMatrix::identity(m.nrows(), m.nrows());
                        max_unitarity = max_unitarity.max(u.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    }
                }
            }
        }
        let pass = max_residual < tol && max_unitarity < tol;
        PentagonReport { residuals, max_residual, worst, max_unitarity, tol, pass }
    }

    /// Vertex gauge transform `F ↦ u(a,b;e) u(e,c;d) / (u(b,c;f) u(a,f;d)) F`.
    pub fn gauge_transform(&self, u: impl Fn(usize, usize, usize) -> C64) -> Self {
        let mut out = self.clone();
        for [a, b, c, d, e, f] in self.admissible_keys() {
            let g = u(a, b, e) * u(e, c, d) / (u(b, c, f) * u(a, f, d));
            let i = self.fidx([a, b, c, d, e, f]);
            out.f[i] = self.f[i] * g;
        }
        out
    }

    /// Copy with one F entry shifted by `delta` (fault injection).
    pub fn with_f_perturbed(&self, key: FKey, delta: C64) -> Self {
        let mut out = self.clone();
        let i = self.fidx(key);
        out.f[i] += delta;
        out
    }
}

/// Perron–Frobenius vector of `Σ_a N_a` (entrywise positive for a fusion
/// ring), normalised so that `d_0 = 1`; it is the common eigenvector of
/// every `N_a`, with eigenvalue `d_a`.
fn perron_dims(rank: usize, n: &[u8]) -> Result<Vec<f64>, FusionError> {
    let mut m = vec![0.0f64; rank * rank];
    for a in 0..rank {
        for b in 0..rank {
            for c in 0..rank {
                m[b * rank + c] += n[(a * rank + b) * rank + c] as f64;
            }
        }
    }
    let mut v = vec![1.0f64; rank];
    for _ in 0..10_000 {
        let mut w = vec![0.0f64; rank];
        for b in 0..rank {
            for c in 0..rank {
                w[b] += m[b * rank + c] * v[c];
            }
        }
        let s = w[0];
        if !(s > 0.0) {
            return Err(FusionError::Convergence);
        }
        for x in w.iter_mut() {
            *x /= s;
        }
        let diff = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-15 {
            return Ok(v);
        }
    }
    Err(FusionError::Convergence)
}

/// Rewrites an externally supplied F table into the native convention.
/// `transpose`: the file's last two key entries are (b⊗c channel, a⊗b channel).
/// `invert`: the file stores the inverse matrices `(F^{abc}_d)^{-1}`.
pub fn normalize_fsymbols(
    rank: usize,
    n: &[u8],
    entries: &[(FKey, C64)],
    transpose: bool,
    invert: bool,
) -> Result<Vec<(FKey, C64)>, FusionError> {
    let nn = |a: usize, b: usize, c: usize| n[(a * rank + b) * rank + c] != 0;
    let mut table: Vec<(FKey, C64)> = entries
        .iter()
        .map(|&(k, v)| if transpose { ([k[0], k[1], k[2], k[3], k[5], k[4]], v) } else { (k, v) })
        .collect();
    if !invert {
        return Ok(table);
    }
    table.sort_by(|x, y| x.0.cmp(&y.0));
    let look = |k: FKey| table.binary_search_by(|x| x.0.cmp(&k)).ok().map(|i| table[i].1);
    // with `invert`, the stored block is indexed [f][e] after transposition
    // back, i.e. the stored value at (e,f) is (F^{-1})[f,e]
    let mut out = Vec::new();
    for a in 0..rank {
        for b in 0..rank {
            for c in 0..rank {
                for d in 0..rank {
                    let es: Vec<usize> = (0..rank).filter(|&e| nn(a, b, e) && nn(e, c, d)).collect();
                    let fs: Vec<usize> = (0..rank).filter(|&f| nn(b, c, f) && nn(a, f, d)).collect();
                    if es.is_empty() {
                        continue;
                    }
                    let mut inv = DMatrix::<C64>::zeros(fs.len(), es.len());
                    for (i, &f) in fs.iter().enumerate() {
                        for (j, &e) in es.iter().enumerate() {
                            inv[(i, j)] = look([a, b, c, d, e, f]).ok_or(FusionError::MissingF([a, b, c, d, e, f]))?;
                        }
                    }
                    let fwd = inv.try_inverse().ok_or_else(|| {
                        FusionError::Invariant(format!("F-matrix ({a},{b},{c};{d}) is singular"))
                    })?;
                    for (i, &e) in es.iter().enumerate() {
                        for (j, &f) in fs.iter().enumerate() {
                            out.push(([a, b, c, d, e, f], fwd[(i, j)]));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub const BUILTIN_NAMES: [&str; 5] = ["trivial", "vec_z2", "vec_z3", "fibonacci", "haagerup_h3"];

/// Built-in categories. `haagerup_h3` needs its F-symbols supplied.
pub fn builtin(name: &str, h3_fsymbols: Option<&[(FKey, C64)]>) -> Result<FusionCategory, FusionError> {
    match name {
        "trivial" => group_category(1, |_, _, _| C64::new(1.0, 0.0)),
        "vec_z2" => group_category(2, |_, _, _| C64::new(1.0, 0.0)),
        "vec_z3" => group_category(3, |_, _, _| C64::new(1.0, 0.0)),
        "fibonacci" => fibonacci(),
        "haagerup_h3" => {
            let fs = h3_fsymbols.ok_or_else(|| {
                FusionError::MissingData("haagerup_h3 requires an F-symbol data file".into())
            })?;
            haagerup_h3(fs)
        }
        other => Err(FusionError::MissingData(format!("unknown builtin category {other:?}"))),
    }
}

/// `Vec_{Z_n}^ω` with associator `ω(a,b,c)` (a normalised 3-cocycle).
pub fn group_category(order: usize, omega: impl Fn(usize, usize, usize) -> C64) -> Result<FusionCategory, FusionError> {
    let labels = (0..order).map(|g| if g == 0 { "1".to_string() } else { format!("g{g}") }).collect();
    let mut triples = Vec::new();
    for a in 0..order {
        for b in 0..order {
            triples.push([a, b, (a + b) % order]);
        }
    }
    let n = fusion_tensor(order, &triples)?;
    let mut fs = Vec::new();
    for a in 0..order {
        for b in 0..order {
            for c in 0..order {
                fs.push(([a, b, c, (a + b + c) % order, (a + b) % order, (b + c) % order], omega(a, b, c)));
            }
        }
    }
    FusionCategory::new(labels, n, None, &fs)
}

pub fn fibonacci() -> Result<FusionCategory, FusionError> {
    let n = fusion_tensor(2, &[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0], [1, 1, 1]])?;
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut fs = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    for e in 0..2 {
                        for f in 0..2 {
                            let nn = |x: usize, y: usize, z: usize| n[(x * 2 + y) * 2 + z] != 0;
                            if !(nn(a, b, e) && nn(e, c, d) && nn(b, c, f) && nn(a, f, d)) {
                                continue;
                            }
                            let v = if [a, b, c, d] == [1, 1, 1, 1] {
                                match (e, f) {
                                    (0, 0) => 1.0 / phi,
                                    (1, 1) => -1.0 / phi,
                                    _ => phi.powf(-0.5),
                                }
                            } else {
                                1.0
                            };
                            fs.push(([a, b, c, d, e, f], C64::new(v, 0.0)));
                        }
                    }
                }
            }
        }
    }
    FusionCategory::new(vec!["1".into(), "τ".into()], n, None, &fs)
}

pub const H3_LABELS: [&str; 6] = ["1", "α", "α²", "ρ", "αρ", "α²ρ"];

/// Fusion rules of the Haagerup category: objects `α^i` (index `i`) and
/// `α^i ρ` (index `3+i`), with `α³ = 1`, `ρα = α²ρ` and
/// `ρ⊗ρ = 1 ⊕ ρ ⊕ αρ ⊕ α²ρ`.
pub fn h3_fusion_triples() -> Vec<[usize; 3]> {
    let id = |p: i32, rho: bool| (p.rem_euclid(3)) as usize + if rho { 3 } else { 0 };
    let mut t = Vec::new();
    for a in 0..6usize {
        for b in 0..6usize {
            let (i, ra) = ((a % 3) as i32, a >= 3);
            let (j, rb) = ((b % 3) as i32, b >= 3);
            match (ra, rb) {
                (false, false) => t.push([a, b, id(i + j, false)]),
                (false, true) => t.push([a, b, id(i + j, true)]),
                (true, false) => t.push([a, b, id(i - j, true)]),
                (true, true) => {
                    t.push([a, b, id(i - j, false)]);
                    for k in 0..3 {
                        t.push([a, b, id(k, true)]);
                    }
                }
            }
        }
    }
    t
}

pub fn haagerup_h3(fsymbols: &[(FKey, C64)]) -> Result<FusionCategory, FusionError> {
    let n = fusion_tensor(6, &h3_fusion_triples())?;
    FusionCategory::new(H3_LABELS.iter().map(|s| s.to_string()).collect(), n, None, fsymbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fib_dims_and_pentagon() {
        let c = fibonacci().unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((c.d(1) - phi).abs() < 1e-12);
        assert_eq!(c.d(0), 1.0);
        let rep = c.check_pentagon(1e-10);
        assert!(rep.pass, "{}", rep.max_residual);
    }

    #[test]
    fn h3_fusion_rules() {
        let n = fusion_tensor(6, &h3_fusion_triples()).unwrap();
        let has = |a: usize, b: usize, c: usize| n[(a * 6 + b) * 6 + c] != 0;
        // ρ⊗ρ = 1 ⊕ ρ ⊕ αρ ⊕ α²ρ
        let rr: Vec<usize> = (0..6).filter(|&c| has(3, 3, c)).collect();
        assert_eq!(rr, vec![0, 3, 4, 5]);
        // ρ⊗α = α²ρ, α⊗ρ = αρ
        assert_eq!((0..6).filter(|&c| has(3, 1, c)).collect::<Vec<_>>(), vec![5]);
        assert_eq!((0..6).filter(|&c| has(1, 3, c)).collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn h3_dims_without_f() {
        // dimensions depend only on fusion rules; use a scratch check
        let n = fusion_tensor(6, &h3_fusion_triples()).unwrap();
        let d = perron_dims(6, &n).unwrap();
        let drho = (3.0 + 13f64.sqrt()) / 2.0;
        for a in 3..6 {
            assert!((d[a] - drho).abs() < 1e-10);
        }
        let total: f64 = d.iter().map(|x| x * x).sum();
        assert!((total - 3.0 * (1.0 + (11.0 + 3.0 * 13f64.sqrt()) / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn multiplicity_rejected() {
        let err = fusion_tensor(2, &[[1, 1, 0], [1, 1, 0]]).unwrap_err();
        assert!(matches!(err, FusionError::Multiplicity { .. }));
    }

    #[test]
    fn missing_f_named() {
        let n = fusion_tensor(2, &[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]).unwrap();
        let err = FusionCategory::new(vec!["1".into(), "g".into()], n, None, &[]).unwrap_err();
        assert!(matches!(err, FusionError::MissingF(_)));
    }

    #[test]
    fn corruption_detected() {
        let c = fibonacci().unwrap();
        let bad = c.with_f_perturbed([1, 1, 1, 1, 1, 1], C64::new(1e-3, 0.0));
        assert!(!bad.check_pentagon(1e-8).pass);
    }

    #[test]
    fn invert_transpose_roundtrip() {
        let c = fibonacci().unwrap();
        // store the inverse, transposed
        let mut stored = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let (es, fs, m) = c.f_matrix(a, b, cc, d);
                        if es.is_empty() {
                            continue;
                        }
                        let inv = m.try_inverse().unwrap();
                        for (i, &f) in fs.iter().enumerate() {
                            for (j, &e) in es.iter().enumerate() {
                                stored.push(([a, b, cc, d, f, e], inv[(i, j)]));
                            }
                        }
                    }
                }
            }
        }
        let back = normalize_fsymbols(2, c.fusion_raw(), &stored, true, true).unwrap();
        for (k, v) in back {
            assert!((v - c.f(k[0], k[1], k[2], k[3], k[4], k[5])).norm() < 1e-12);
        }
    }
}
