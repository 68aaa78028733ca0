//! On-disk coefficient cache.
//!
//! ```text
//! fglwb-cache v1
//! max-degree 12
//! sha256 <hex digest of everything after the separator>
//! ---
//! [alpha]
//! 1,1 = -1 * CP1
//! ...
//! ```
//!
//! Entries are in canonical polynomial text form, so a store of a loaded file
//! reproduces it byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fgl::{pairing_series, universal_fgl, FglTable, PairingTable};
use crate::genera::{abelian_map, buchstaber_map, kh_solve, ClassifyingMap};
use crate::graded::GradedPoly;
use crate::report::{Check, Report};
use crate::series::Series2;
use crate::su::w_coefficients;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "fglwb-cache v";
const SEPARATOR: &str = "---\n";

pub const SECTIONS: [&str; 7] = ["alpha", "pairing", "w", "dw", "buchstaber", "abelian", "kh"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: GradedPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheFile {
    pub max_degree: u32,
    pub sections: Vec<Section>,
}

/// Weight bound at which the entry `key` first appears in section `name`.
fn entry_range(name: &str, key: &str) -> Result<u32> {
    let w = entry_weight(name, key)?;
    Ok(if name == "dw" { w + 1 } else { w })
}

/// Weight of the entry `key` in section `name`.
fn entry_weight(name: &str, key: &str) -> Result<u32> {
    let bad = || Error::Cache(format!("malformed key '{key}' in [{name}]"));
    if let Some(k) = key.strip_prefix("CP") {
        return k.parse().map_err(|_| bad());
    }
    let (i, j) = key.split_once(',').ok_or_else(bad)?;
    let (i, j): (u32, u32) = (i.parse().map_err(|_| bad())?, j.parse().map_err(|_| bad())?);
    // τ has weight 1, so ∂w sits one below w
    let shift = if name == "pairing" || name == "dw" { 2 } else { 1 };
    (i + j).checked_sub(shift).ok_or_else(bad)
}

fn bivariate(name: &str, n: u32, shift: usize, lo: usize, get: impl Fn(usize, usize) -> GradedPoly) -> Section {
    let mut entries = Vec::new();
    for total in 2 * lo..=n as usize + shift {
        for i in lo..=total - lo {
            entries.push(Entry { key: format!("{i},{}", total - i), value: get(i, total - i) });
        }
    }
    Section { name: name.into(), entries }
}

fn map_section(name: &str, map: &ClassifyingMap) -> Section {
    let entries =
        (1..=map.max_degree()).map(|k| Entry { key: format!("CP{k}"), value: map.image(k).unwrap() }).collect();
    Section { name: name.into(), entries }
}

impl CacheFile {
    /// Computes every table at weight bound `n`. Map sections are left empty
    /// below the weight where the map is defined.
    pub fn compute(n: u32) -> Result<CacheFile> {
        let f = universal_fgl(n)?;
        let a = pairing_series(&f)?;
        let w = w_coefficients(&f)?;
        let mut sections = vec![
            bivariate("alpha", n, 1, 1, |i, j| f.alpha(i, j).clone()),
            bivariate("pairing", n, 2, 1, |i, j| a.a(i, j).clone()),
            bivariate("w", n, 1, 1, |i, j| w.w(i, j).cls),
            bivariate("dw", n, 1, 1, |i, j| w.w(i, j).bnd),
        ];
        let empty = |name: &str| Section { name: name.into(), entries: Vec::new() };
        sections.push(if n >= 5 { map_section("buchstaber", &buchstaber_map(&f, &a)?) } else { empty("buchstaber") });
        sections.push(if n >= 3 { map_section("abelian", &abelian_map(&f, &a)?) } else { empty("abelian") });
        sections.push(if n >= 2 { map_section("kh", &kh_solve(n)?.map) } else { empty("kh") });
        Ok(CacheFile { max_degree: n, sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn body(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            out.push_str(&format!("[{}]\n", s.name));
            for e in &s.entries {
                out.push_str(&format!("{} = {}\n", e.key, e.value));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let body = self.body();
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        format!("{MAGIC}{FORMAT_VERSION}\nmax-degree {}\nsha256 {digest}\n{SEPARATOR}{body}", self.max_degree)
    }

    pub fn from_text(text: &str) -> Result<CacheFile> {
        let err = |m: String| Error::Cache(m);
        let (header, body) = text.split_once(SEPARATOR).ok_or_else(|| err("missing header separator".into()))?;
        let mut lines = header.lines();
        let version: u32 = lines
            .next()
            .and_then(|l| l.strip_prefix(MAGIC))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err("not a cache file".into()))?;
        if version != FORMAT_VERSION {
            return Err(err(format!("unsupported format version {version}, expected {FORMAT_VERSION}")));
        }
        let max_degree: u32 = lines
            .next()
            .and_then(|l| l.strip_prefix("max-degree "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err("missing max-degree".into()))?;
        let digest =
            lines.next().and_then(|l| l.strip_prefix("sha256 ")).ok_or_else(|| err("missing checksum".into()))?;
        if lines.next().is_some() {
            return Err(err("unexpected header line".into()));
        }
        if hex::encode(Sha256::digest(body.as_bytes())) != digest {
            return Err(err("checksum mismatch".into()));
        }
        let mut sections: Vec<Section> = Vec::new();
        for (lineno, line) in body.lines().enumerate() {
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                sections.push(Section { name: name.into(), entries: Vec::new() });
                continue;
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| err(format!("entry before any section at body line {}", lineno + 1)))?;
            let (key, value) =
                line.split_once(" = ").ok_or_else(|| err(format!("malformed entry at body line {}", lineno + 1)))?;
            let value: GradedPoly = value.parse().map_err(|e| err(format!("body line {}: {e}", lineno + 1)))?;
            let w = entry_weight(&section.name, key)?;
            if entry_range(&section.name, key)? > max_degree || !(value.is_zero() || value.is_homogeneous_of(w)) {
                return Err(err(format!("entry {key} in [{}] has the wrong weight", section.name)));
            }
            section.entries.push(Entry { key: key.into(), value });
        }
        let names: Vec<&str> = sections.iter().map(|s| s.name.as_str()).collect();
        if names != SECTIONS {
            return Err(err(format!("unexpected sections {names:?}")));
        }
        let file = CacheFile { max_degree, sections };
        if file.body() != body {
            return Err(err("body is not in canonical form".into()));
        }
        Ok(file)
    }

    /// The part of the file at weight `<= n`.
    pub fn restrict(&self, n: u32) -> Result<CacheFile> {
        if n > self.max_degree {
            return Err(Error::domain(format!("cannot restrict a cache at N = {} to N = {n}", self.max_degree)));
        }
        let mut sections = Vec::new();
        for s in &self.sections {
            let mut entries = Vec::new();
            for e in &s.entries {
                if entry_range(&s.name, &e.key)? <= n {
                    entries.push(e.clone());
                }
            }
            let defined = match s.name.as_str() {
                "buchstaber" => n >= 5,
                "abelian" => n >= 3,
                "kh" => n >= 2,
                _ => true,
            };
            sections.push(Section { name: s.name.clone(), entries: if defined { entries } else { Vec::new() } });
        }
        Ok(CacheFile { max_degree: n, sections })
    }

    /// Compares the shared weight range with another file.
    pub fn validate_against(&self, other: &CacheFile) -> Result<Report> {
        let n = self.max_degree.min(other.max_degree);
        let (a, b) = (self.restrict(n)?, other.restrict(n)?);
        let mut report = Report::new(format!("cache tables agree to weight {n}"));
        for (sa, sb) in a.sections.iter().zip(&b.sections) {
            let first_diff = sa.entries.iter().zip(&sb.entries).find(|(x, y)| x != y);
            let check = if sa.entries.len() != sb.entries.len() {
                Check::fail(sa.name.clone(), format!("{} entries against {}", sa.entries.len(), sb.entries.len()))
            } else if let Some((x, y)) = first_diff {
                Check::fail(sa.name.clone(), format!("{} differs: {} against {}", x.key, x.value, y.value))
            } else {
                Check::pass(sa.name.clone(), format!("{} entries", sa.entries.len()))
            };
            report.push(check);
        }
        Ok(report)
    }

    fn bivariate_series(&self, name: &str, bound: usize) -> Result<Series2<GradedPoly>> {
        let mut s = Series2::zeros(bound, &GradedPoly::zero());
        for e in &self.section(name).ok_or_else(|| Error::Cache(format!("missing [{name}]")))?.entries {
            let (i, j) = e.key.split_once(',').unwrap();
            s.set(i.parse().unwrap(), j.parse().unwrap(), e.value.clone());
        }
        Ok(s)
    }

    pub fn fgl_table(&self) -> Result<FglTable> {
        let mut alpha = self.bivariate_series("alpha", self.max_degree as usize + 1)?;
        alpha.set(1, 0, GradedPoly::one());
        alpha.set(0, 1, GradedPoly::one());
        FglTable::from_alpha(self.max_degree, alpha.with_grading(-1)?)
    }

    pub fn pairing_table(&self) -> Result<PairingTable> {
        let a = self.bivariate_series("pairing", self.max_degree as usize + 2)?;
        let mut full = a;
        // A(x, 0) = x², A(0, y) = -y²
        full.set(2, 0, GradedPoly::one());
        full.set(0, 2, -&GradedPoly::one());
        PairingTable::from_series(self.max_degree, full.with_grading(-2)?)
    }

    pub fn classifying_map(&self, name: &str) -> Result<Option<ClassifyingMap>> {
        let s = self.section(name).ok_or_else(|| Error::Cache(format!("missing [{name}]")))?;
        if s.entries.is_empty() {
            return Ok(None);
        }
        let mut images = std::collections::BTreeMap::new();
        let mut gens = std::collections::BTreeSet::new();
        for e in &s.entries {
            let k: u32 = e
                .key
                .strip_prefix("CP")
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| Error::Cache(format!("bad key {}", e.key)))?;
            gens.extend(e.value.generators());
            images.insert(crate::graded::Generator::Cp(k), e.value.clone());
        }
        let gens = match name {
            "kh" => (1..=4).map(crate::graded::Generator::Q).collect(),
            "buchstaber" => (1..=4).map(crate::graded::Generator::Cp).collect(),
            "abelian" => (1..=2).map(crate::graded::Generator::Cp).collect(),
            _ => gens.into_iter().collect(),
        };
        ClassifyingMap::new(self.max_degree, images, gens).map(Some)
    }
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes to a temporary file in the target directory and renames it into place.
pub fn store(file: &CacheFile, path: &Path) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", tmp.display()));
    let mut out = fs::File::create(&tmp).map_err(io)?;
    out.write_all(file.to_text().as_bytes()).map_err(io)?;
    out.sync_all().map_err(io)?;
    drop(out);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(format!("{}: {e}", path.display()))
    })
}

pub fn load(path: &Path) -> Result<CacheFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    CacheFile::from_text(&text)
}

/// `$FGLWB_CACHE_DIR`, else `$XDG_CACHE_HOME/fglwb`, else `~/.cache/fglwb`.
pub fn cache_dir() -> Option<PathBuf> {
    let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    var("FGLWB_CACHE_DIR")
        .or_else(|| var("XDG_CACHE_HOME").map(|d| d.join("fglwb")))
        .or_else(|| var("HOME").map(|d| d.join(".cache").join("fglwb")))
}

pub fn cache_path(dir: &Path, n: u32) -> PathBuf {
    dir.join(format!("tables-n{n}.fglwb"))
}

/// Cache files in `dir` with their weight bounds, sorted by bound.
pub fn list(dir: &Path) -> Result<Vec<(u32, PathBuf)>> {
    let rd = match fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::Io(format!("{}: {e}", dir.display()))),
    };
    let mut out = Vec::new();
    for entry in rd {
        let path = entry.map_err(|e| Error::Io(e.to_string()))?.path();
        let n = path
            .file_name()
            .and_then(|f| f.to_str())
            .and_then(|f| f.strip_prefix("tables-n"))
            .and_then(|f| f.strip_suffix(".fglwb"))
            .and_then(|n| n.parse().ok());
        if let Some(n) = n {
            out.push((n, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Loads the smallest cached file with bound `>= n` and restricts it, or
/// computes and stores the tables when none exists.
pub fn load_or_compute(dir: Option<&Path>, n: u32) -> Result<CacheFile> {
    let Some(dir) = dir else { return CacheFile::compute(n) };
    if let Some((_, path)) = list(dir)?.into_iter().find(|(m, _)| *m >= n) {
        return load(&path)?.restrict(n);
    }
    let file = CacheFile::compute(n)?;
    store(&file, &cache_path(dir, n))?;
    Ok(file)
}

/// Removes every cache file in `dir`; returns how many were removed.
pub fn clear(dir: &Path) -> Result<usize> {
    let files = list(dir)?;
    for (_, p) in &files {
        fs::remove_file(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(files.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_exact() {
        let file = CacheFile::compute(8).unwrap();
        let text = file.to_text();
        let back = CacheFile::from_text(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_text(), text);
        assert!(text.starts_with("fglwb-cache v1\nmax-degree 8\nsha256 "));
        assert!(text.contains("[alpha]\n1,1 = -1 * CP1\n"));
    }

    #[test]
    fn tables_rebuild_from_cache() {
        let file = CacheFile::compute(7).unwrap();
        let f = universal_fgl(7).unwrap();
        let a = pairing_series(&f).unwrap();
        assert_eq!(file.fgl_table().unwrap().alpha_series(), f.alpha_series());
        assert_eq!(file.pairing_table().unwrap().series(), a.series());
        assert_eq!(file.classifying_map("buchstaber").unwrap().unwrap(), buchstaber_map(&f, &a).unwrap());
        assert_eq!(file.classifying_map("kh").unwrap().unwrap(), kh_solve(7).unwrap().map);
    }

    #[test]
    fn rejects_bad_files() {
        let text = CacheFile::compute(4).unwrap().to_text();
        let bumped = text.replacen("fglwb-cache v1", "fglwb-cache v2", 1);
        assert!(matches!(CacheFile::from_text(&bumped), Err(Error::Cache(m)) if m.contains("version")));
        let corrupt = text.replacen("1,1 = -1 * CP1", "1,1 = 1 * CP1", 1);
        assert!(matches!(CacheFile::from_text(&corrupt), Err(Error::Cache(m)) if m.contains("checksum")));
        let partial = &text[..text.len() - 10];
        assert!(CacheFile::from_text(partial).is_err());
        assert!(CacheFile::from_text("").is_err());
    }

    #[test]
    fn restriction_is_a_prefix() {
        let small = CacheFile::compute(6).unwrap();
        let large = CacheFile::compute(8).unwrap();
        assert_eq!(large.restrict(6).unwrap(), small);
        assert!(large.validate_against(&small).unwrap().passed());
        assert!(small.restrict(7).is_err());
    }

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let file = CacheFile::compute(5).unwrap();
        let path = cache_path(dir.path(), 5);
        store(&file, &path).unwrap();
        assert_eq!(load(&path).unwrap(), file);
        assert_eq!(list(dir.path()).unwrap(), vec![(5, path.clone())]);
        assert_eq!(load_or_compute(Some(dir.path()), 4).unwrap(), file.restrict(4).unwrap());
        assert_eq!(clear(dir.path()).unwrap(), 1);
        assert!(list(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn concurrent_stores_leave_a_valid_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = cache_path(dir.path(), 6);
        let a = CacheFile::compute(6).unwrap();
        let b = a.clone();
        std::thread::scope(|s| {
            for f in [&a, &b] {
                let path = path.clone();
                s.spawn(move || {
                    for _ in 0..20 {
                        store(f, &path).unwrap();
                    }
                });
            }
        });
        assert_eq!(load(&path).unwrap(), a);
        let stray: Vec<_> = fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path() != path).collect();
        assert!(stray.is_empty());
    }
}
