//! Sparse text dump of a weak Hopf algebra's structure constants.
//!
//! ```text
//! #tubewha-dump/1
//! #manifest {"format":...}
//! dim 13
//! basis 0 0 0 0 0 0          # i a c e f g (tube algebras only)
//! mult 0 4 4 1e0 0e0         # i j k re im : x_i x_j = Σ_k mult x_k
//! comult 0 0 0 1e0 0e0       # i j k re im : Δ(x_i) = Σ comult x_j⊗x_k
//! counit 0 1e0 0e0
//! unit 0 1e0 0e0
//! antipode 0 0 1e0 0e0       # i j re im   : S(x_i) = Σ_j antipode x_j
//! haar 0 5e-1 0e0
//! haar_dual 0 1e0 0e0
//! ```
//! Floats use the shortest representation that round-trips, so a dump read
//! back reproduces the algebra bit for bit.

use std::fmt::{self, Write as _};

use tubewha_core::sparse::{Sparse3, SparseMat};
use tubewha_core::tube::TubeBasisElement;
use tubewha_core::weak_hopf::{WeakHopfAlgebra, WhaError};
use tubewha_core::C64;

use crate::report::Manifest;

pub const HEADER: &str = "#tubewha-dump/1";

#[derive(Debug)]
pub enum DumpError {
    Parse { line: usize, msg: String },
    Algebra(WhaError),
}

impl fmt::Display for DumpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DumpError::Parse { line, msg } => write!(f, "dump line {line}: {msg}"),
            DumpError::Algebra(e) => write!(f, "dump does not define an algebra: {e}"),
        }
    }
}

impl std::error::Error for DumpError {}

#[derive(Debug, Clone)]
pub struct Dump {
    pub manifest: Option<Manifest>,
    pub basis: Option<Vec<TubeBasisElement>>,
    pub wha: WeakHopfAlgebra,
}

fn c(z: C64) -> String {
    format!("{:e} {:e}", z.re, z.im)
}

pub fn write_dump(manifest: &Manifest, basis: Option<&[TubeBasisElement]>, h: &WeakHopfAlgebra) -> String {
    let mut s = String::new();
    s.push_str(HEADER);
    s.push('\n');
    let _ = writeln!(s, "#manifest {}", serde_json::to_string(manifest).expect("manifest serialises"));
    let _ = writeln!(s, "dim {}", h.dim);
    if let Some(b) = basis {
        for (i, t) in b.iter().enumerate() {
            let _ = writeln!(s, "basis {i} {} {} {} {} {}", t.a, t.c, t.e, t.f, t.g);
        }
    }
    for (name, t) in [("mult", &h.mult), ("comult", &h.comult)] {
        for (i, j, k, v) in t.triples() {
            let _ = writeln!(s, "{name} {i} {j} {k} {}", c(v));
        }
    }
    let vecs: [(&str, Option<&Vec<C64>>); 4] =
        [("counit", Some(&h.counit)), ("unit", Some(&h.unit)), ("haar", h.haar.as_ref()), ("haar_dual", h.haar_dual.as_ref())];
    for (name, v) in vecs {
        if let Some(v) = v {
            for (i, &z) in v.iter().enumerate() {
                if z.norm() != 0.0 {
                    let _ = writeln!(s, "{name} {i} {}", c(z));
                }
            }
        }
    }
    for (i, row) in h.antipode.rows.iter().enumerate() {
        for &(j, v) in row {
            let _ = writeln!(s, "antipode {i} {j} {}", c(v));
        }
    }
    s
}

pub fn read_dump(text: &str) -> Result<Dump, DumpError> {
    let err = |line: usize, msg: String| DumpError::Parse { line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        _ => return Err(err(1, format!("missing {HEADER} header"))),
    }
    let mut manifest = None;
    let mut dim: Option<usize> = None;
    let mut basis = Vec::new();
    let (mut mult, mut comult, mut anti) = (Vec::new(), Vec::new(), Vec::new());
    let (mut counit, mut unit, mut haar, mut haar_dual) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (ln, line) in lines {
        let ln = ln + 1;
        if let Some(m) = line.strip_prefix("#manifest ") {
            manifest = Some(serde_json::from_str(m).map_err(|e| err(ln, format!("manifest: {e}")))?);
            continue;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let ints = |n: usize| -> Result<Vec<usize>, DumpError> {
            if tok.len() < 1 + n {
                return Err(err(ln, "too few fields".into()));
            }
            tok[1..1 + n].iter().map(|t| t.parse().map_err(|_| err(ln, format!("bad index {t:?}")))).collect()
        };
        let val = |n: usize| -> Result<C64, DumpError> {
            if tok.len() != 3 + n {
                return Err(err(ln, format!("expected {} fields", 3 + n)));
            }
            let f = |t: &str| t.parse::<f64>().map_err(|_| err(ln, format!("bad number {t:?}")));
            Ok(C64::new(f(tok[1 + n])?, f(tok[2 + n])?))
        };
        let d = || dim.ok_or_else(|| err(ln, "`dim` must come first".into()));
        let check = |ix: &[usize], dim: usize| {
            if ix.iter().any(|&i| i >= dim) {
                Err(err(ln, format!("index out of range for dim {dim}")))
            } else {
                Ok(())
            }
        };
        match tok[0] {
            "dim" => {
                let n = ints(1)?[0];
                dim = Some(n);
            }
            "basis" => {
                let ix = ints(6)?;
                if tok.len() != 7 || ix[0] != basis.len() {
                    return Err(err(ln, "basis rows must be `basis i a c e f g` in order".into()));
                }
                basis.push(TubeBasisElement { a: ix[1], c: ix[2], e: ix[3], f: ix[4], g: ix[5] });
            }
            "mult" | "comult" => {
                let ix = ints(3)?;
                check(&ix, d()?)?;
                let t = (ix[0], ix[1], ix[2], val(3)?);
                if tok[0] == "mult" { mult.push(t) } else { comult.push(t) }
            }
            "antipode" => {
                let ix = ints(2)?;
                check(&ix, d()?)?;
                anti.push((ix[0], ix[1], val(2)?));
            }
            "counit" | "unit" | "haar" | "haar_dual" => {
                let ix = ints(1)?;
                check(&ix, d()?)?;
                let v = (ix[0], val(1)?);
                match tok[0] {
                    "counit" => counit.push(v),
                    "unit" => unit.push(v),
                    "haar" => haar.push(v),
                    _ => haar_dual.push(v),
                }
            }
            other => return Err(err(ln, format!("unknown table {other:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| err(0, "no `dim` line".into()))?;
    let dense = |pairs: Vec<(usize, C64)>| {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for (i, z) in pairs {
            v[i] += z;
        }
        v
    };
    let opt_dense = |pairs: Vec<(usize, C64)>| if pairs.is_empty() { None } else { Some(dense(pairs)) };
    let mut rows = vec![Vec::new(); dim];
    for (i, j, v) in anti {
        rows[i].push((j, v));
    }
    let mut wha = WeakHopfAlgebra::new(
        dim,
        Sparse3::from_triples(dim, mult),
        Sparse3::from_triples(dim, comult),
        dense(counit),
        dense(unit),
        SparseMat { dim, rows },
    )
    .map_err(DumpError::Algebra)?;
    wha.haar = opt_dense(haar);
    wha.haar_dual = opt_dense(haar_dual);
    let basis = if basis.is_empty() { None } else { Some(basis) };
    if basis.as_ref().is_some_and(|b| b.len() != dim) {
        return Err(err(0, "basis table does not cover the algebra".into()));
    }
    Ok(Dump { manifest, basis, wha })
}
