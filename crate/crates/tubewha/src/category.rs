//! Category spec files (TOML), `.fsym` F-symbol tables, and resolution of
//! `builtin:NAME` / file arguments into a validated category.
//!
//! ```toml
//! name = "fibonacci"
//! rank = 2
//! labels = ["1", "t"]
//! dual = [0, 1]
//! fusion = [[0,0,0], [0,1,1], [1,0,1], [1,1,0], [1,1,1]]
//! fconvention = "direct"          # direct | invert | transpose | invert_transpose
//! fsymbols = [[1,1,1,1,0,0, 0.618, 0.0], ...]   # a b c d e f re im
//! # or: fsymbol_file = "fib.fsym"  (relative to this file)
//! # optional: fpdim = [1.0, 1.618]  (cross-checked, never trusted)
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use tubewha_core::fusion::{self, normalize_fsymbols, FKey, FusionCategory, FusionError};
use tubewha_core::C64;

/// How an external F table relates to the native `(a,b,c;d;e,f)` convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FConvention {
    #[default]
    Direct,
    /// stores `(F^{abc}_d)^{-1}`
    Invert,
    /// last two key entries swapped: `(…; f, e)`
    Transpose,
    InvertTranspose,
}

impl FConvention {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "direct" => Some(Self::Direct),
            "invert" => Some(Self::Invert),
            "transpose" => Some(Self::Transpose),
            "invert_transpose" | "invert,transpose" | "transpose,invert" => Some(Self::InvertTranspose),
            _ => None,
        }
    }
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Invert => "invert",
            Self::Transpose => "transpose",
            Self::InvertTranspose => "invert_transpose",
        }
    }
    fn flags(self) -> (bool, bool) {
        match self {
            Self::Direct => (false, false),
            Self::Invert => (false, true),
            Self::Transpose => (true, false),
            Self::InvertTranspose => (true, true),
        }
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Category(FusionError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            LoadError::Parse(s) => write!(f, "parse error: {s}"),
            LoadError::Category(e) => write!(f, "validation error: {e}"),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<FusionError> for LoadError {
    fn from(e: FusionError) -> Self {
        LoadError::Category(e)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default)]
    name: Option<String>,
    rank: usize,
    labels: Vec<String>,
    dual: Vec<usize>,
    fusion: Vec<[usize; 3]>,
    #[serde(default)]
    fconvention: Option<FConvention>,
    #[serde(default)]
    fsymbols: Option<Vec<Vec<toml::Value>>>,
    #[serde(default)]
    fsymbol_file: Option<PathBuf>,
    #[serde(default)]
    fpdim: Option<Vec<f64>>,
}

/// A parsed F-symbol table in its file's own convention.
#[derive(Debug, Clone, Default)]
pub struct FTable {
    pub convention: Option<FConvention>,
    pub entries: Vec<(FKey, C64)>,
}

/// Reads the whitespace `.fsym` format: `#` comments, `key = value` header
/// lines (only `fconvention` is recognised), then rows `a b c d e f re im`.
pub fn parse_fsym(text: &str) -> Result<FTable, LoadError> {
    let mut table = FTable::default();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            match k.trim() {
                "fconvention" => {
                    table.convention = Some(FConvention::parse(v).ok_or_else(|| {
                        LoadError::Parse(format!("line {}: unknown fconvention {:?}", ln + 1, v.trim()))
                    })?)
                }
                other => return Err(LoadError::Parse(format!("line {}: unknown header key {other:?}", ln + 1))),
            }
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 8 {
            return Err(LoadError::Parse(format!("line {}: expected 8 fields, found {}", ln + 1, tok.len())));
        }
        let mut key = [0usize; 6];
        for (slot, t) in key.iter_mut().zip(&tok[..6]) {
            *slot = t.parse().map_err(|_| LoadError::Parse(format!("line {}: bad index {t:?}", ln + 1)))?;
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| LoadError::Parse(format!("line {}: bad number {t:?}", ln + 1)));
        table.entries.push((key, C64::new(num(tok[6])?, num(tok[7])?)));
    }
    Ok(table)
}

pub fn read_fsym(path: &Path) -> Result<FTable, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_path_buf(), e))?;
    parse_fsym(&text)
}

fn inline_row(i: usize, row: &[toml::Value]) -> Result<(FKey, C64), LoadError> {
    let bad = || LoadError::Parse(format!("fsymbols[{i}]: expected [a,b,c,d,e,f,re,im]"));
    if row.len() != 8 {
        return Err(bad());
    }
    let mut key = [0usize; 6];
    for (slot, v) in key.iter_mut().zip(&row[..6]) {
        *slot = v.as_integer().and_then(|x| usize::try_from(x).ok()).ok_or_else(bad)?;
    }
    let num = |v: &toml::Value| v.as_float().or_else(|| v.as_integer().map(|x| x as f64)).ok_or_else(bad);
    Ok((key, C64::new(num(&row[6])?, num(&row[7])?)))
}

/// A validated category plus the provenance recorded in manifests.
#[derive(Debug, Clone)]
pub struct LoadedCategory {
    pub name: String,
    pub source: String,
    pub cat: FusionCategory,
    pub fconvention: FConvention,
}

impl LoadedCategory {
    pub fn hash(&self) -> String {
        category_hash(&self.cat)
    }
}

pub fn parse_spec(text: &str, base_dir: &Path) -> Result<LoadedCategory, LoadError> {
    let spec: SpecFile = toml::from_str(text).map_err(|e| LoadError::Parse(e.message().to_string()))?;
    if spec.rank == 0 {
        return Err(FusionError::Invariant("rank must be positive".into()).into());
    }
    if spec.labels.len() != spec.rank {
        return Err(FusionError::Invariant(format!("{} labels for rank {}", spec.labels.len(), spec.rank)).into());
    }
    if spec.dual.len() != spec.rank {
        return Err(FusionError::Invariant(format!("dual map has {} entries for rank {}", spec.dual.len(), spec.rank)).into());
    }
    let n = fusion::fusion_tensor(spec.rank, &spec.fusion)?;
    let (raw, file_conv) = match (&spec.fsymbols, &spec.fsymbol_file) {
        (Some(_), Some(_)) => return Err(LoadError::Parse("give either fsymbols or fsymbol_file, not both".into())),
        (None, None) => return Err(LoadError::Parse("missing fsymbols or fsymbol_file".into())),
        (Some(rows), None) => {
            (rows.iter().enumerate().map(|(i, r)| inline_row(i, r)).collect::<Result<Vec<_>, _>>()?, None)
        }
        (None, Some(p)) => {
            let t = read_fsym(&base_dir.join(p))?;
            (t.entries, t.convention)
        }
    };
    let conv = match (spec.fconvention, file_conv) {
        (Some(a), Some(b)) if a != b => {
            return Err(LoadError::Parse(format!(
                "fconvention {} in the spec disagrees with {} in the F-symbol file",
                a.as_str(),
                b.as_str()
            )))
        }
        (a, b) => a.or(b).unwrap_or_default(),
    };
    let (transpose, invert) = conv.flags();
    let fs = normalize_fsymbols(spec.rank, &n, &raw, transpose, invert)?;
    let cat = FusionCategory::new(spec.labels, n, Some(spec.dual), &fs)?;
    if let Some(given) = spec.fpdim {
        if given.len() != cat.rank() {
            return Err(FusionError::Invariant("fpdim has the wrong length".into()).into());
        }
        for (a, (&g, &d)) in given.iter().zip(cat.fpdims()).enumerate() {
            if (g - d).abs() > 1e-8 * d.max(1.0) {
                return Err(FusionError::Invariant(format!("fpdim[{a}] = {g} but the fusion rules give {d}")).into());
            }
        }
    }
    let name = spec.name.unwrap_or_else(|| "custom".into());
    Ok(LoadedCategory { name, source: String::new(), cat, fconvention: conv })
}

pub fn load_category(path: &Path) -> Result<LoadedCategory, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_path_buf(), e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut c = parse_spec(&text, base)?;
    c.source = path.display().to_string();
    Ok(c)
}

/// Data directory for shipped tables: `$TUBEWHA_DATA`, else the crate's `data/`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os("TUBEWHA_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}

/// `builtin:NAME` or a path to a spec file. The H3 F-symbols come from
/// `fsymbols`, else `haagerup_h3.fsym` in `data_dir`.
pub fn resolve(arg: &str, fsymbols: Option<&Path>, data_dir: &Path) -> Result<LoadedCategory, LoadError> {
    let Some(name) = arg.strip_prefix("builtin:") else {
        return load_category(Path::new(arg));
    };
    if !fusion::BUILTIN_NAMES.contains(&name) {
        return Err(LoadError::Parse(format!(
            "unknown builtin {name:?}; expected one of {}",
            fusion::BUILTIN_NAMES.join(", ")
        )));
    }
    if name == "haagerup_h3" {
        let path = fsymbols.map(Path::to_path_buf).unwrap_or_else(|| data_dir.join("haagerup_h3.fsym"));
        let t = read_fsym(&path)?;
        let conv = t.convention.unwrap_or_default();
        let (transpose, invert) = conv.flags();
        let n = fusion::fusion_tensor(6, &fusion::h3_fusion_triples())?;
        let fs = normalize_fsymbols(6, &n, &t.entries, transpose, invert)?;
        let cat = fusion::haagerup_h3(&fs)?;
        return Ok(LoadedCategory { name: name.into(), source: path.display().to_string(), cat, fconvention: conv });
    }
    let cat = fusion::builtin(name, None)?;
    Ok(LoadedCategory { name: name.into(), source: arg.into(), cat, fconvention: FConvention::Direct })
}

/// SHA-256 over a canonical rendering of fusion rules, duals and F-symbols
/// (17 significant digits, so equal tables hash equal).
pub fn category_hash(cat: &FusionCategory) -> String {
    let mut h = Sha256::new();
    h.update(format!("rank {}\n", cat.rank()));
    for l in cat.labels() {
        h.update(format!("label {l}\n"));
    }
    h.update(format!("dual {:?}\n", cat.duals()));
    for t in cat.fusion_triples() {
        h.update(format!("N {t:?}\n"));
    }
    for (k, v) in cat.fsymbols() {
        h.update(format!("F {k:?} {:.16e} {:.16e}\n", v.re, v.im));
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders a category back into the spec format (inline F-symbols).
pub fn to_spec_toml(name: &str, cat: &FusionCategory) -> String {
    let mut s = format!("name = {name:?}\nrank = {}\nlabels = {:?}\ndual = {:?}\n", cat.rank(), cat.labels(), cat.duals());
    s.push_str("fusion = [\n");
    for t in cat.fusion_triples() {
        s.push_str(&format!("  [{}, {}, {}],\n", t[0], t[1], t[2]));
    }
    s.push_str("]\nfconvention = \"direct\"\nfsymbols = [\n");
    for (k, v) in cat.fsymbols() {
        s.push_str(&format!(
            "  [{}, {}, {}, {}, {}, {}, {:?}, {:?}],\n",
            k[0], k[1], k[2], k[3], k[4], k[5], v.re, v.im
        ));
    }
    s.push_str("]\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fsym_header_and_rows() {
        let t = parse_fsym("# x\nfconvention = transpose\n1 1 1 1 0 1 0.5 -0.25\n").unwrap();
        assert_eq!(t.convention, Some(FConvention::Transpose));
        assert_eq!(t.entries, vec![([1, 1, 1, 1, 0, 1], C64::new(0.5, -0.25))]);
        assert!(parse_fsym("1 2 3\n").is_err());
        assert!(parse_fsym("colour = red\n").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let text = "rank = 1\nlabels = [\"1\"]\ndual = [0]\nfusion = [[0,0,0]]\nfsymbols = [[0,0,0,0,0,0,1.0,0.0]]\nbraiding = 1\n";
        let e = parse_spec(text, Path::new(".")).unwrap_err();
        assert!(matches!(e, LoadError::Parse(ref m) if m.contains("braiding")), "{e}");
    }

    #[test]
    fn roundtrip_through_spec_text() {
        let fib = fusion::fibonacci().unwrap();
        let back = parse_spec(&to_spec_toml("fibonacci", &fib), Path::new(".")).unwrap();
        assert_eq!(category_hash(&back.cat), category_hash(&fib));
    }

    #[test]
    fn wrong_fpdim_named() {
        let text = "rank = 1\nlabels = [\"1\"]\ndual = [0]\nfusion = [[0,0,0]]\nfsymbols = [[0,0,0,0,0,0,1,0]]\nfpdim = [2.0]\n";
        let e = parse_spec(text, Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("fpdim[0]"), "{e}");
    }
}
