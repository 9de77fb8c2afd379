use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EigList;
use crate::seqcore::{SeqKind, SingularSeq, Support};

use super::lattice::{circle_dirac_svals, torus_laplacian_svals, torus_target};

/// Eigenvalue count generated for `alt-osc` and for positive models.
pub const DEFAULT_EIG_TERMS: u64 = 1 << 20;

/// How a target value is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Forced by a closed form.
    Exact,
    /// Computed by an independent numerical oracle.
    Oracle,
    /// A published residue or trace formula.
    Literature,
}

/// Expected trace of `T^p` (`p = 1` for Dixmier traces).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub value: f64,
    pub p: f64,
    pub provenance: Provenance,
}

/// Eigenvalue data attached to a model.
#[derive(Clone, Debug)]
pub enum EigenData {
    /// Positive operator: the eigenvalues are the singular values.
    Positive,
    List(Arc<EigList>),
}

/// A parsed model: singular values, eigenvalue data and the known target.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: String,
    pub seq: SingularSeq,
    pub eigs: EigenData,
    pub target: Option<Target>,
}

impl Model {
    /// Eigenvalues in modulus order, at most `n_max` counted with
    /// multiplicity.
    pub fn eig_list(&self, n_max: u64) -> Result<EigList> {
        match &self.eigs {
            EigenData::List(list) => truncate_list(list, n_max),
            EigenData::Positive => positive_eigs(&self.seq, n_max),
        }
    }
}

fn truncate_list(list: &EigList, n_max: u64) -> Result<EigList> {
    let mut left = n_max;
    let mut out = Vec::new();
    for &(z, m) in list.entries() {
        if left == 0 {
            break;
        }
        out.push((z, m.min(left)));
        left -= m.min(left);
    }
    EigList::new(out)
}

fn positive_eigs(seq: &SingularSeq, n_max: u64) -> Result<EigList> {
    let c = seq.scale();
    let entries: Vec<(Complex64, u64)> = match seq.kind() {
        SeqKind::Runs(table) => {
            let mut left = n_max;
            let mut out = Vec::new();
            for (v, m) in table.runs() {
                if left == 0 || v == 0.0 {
                    break;
                }
                out.push((Complex64::new(c * v, 0.0), m.min(left)));
                left -= m.min(left);
            }
            out
        }
        _ => (1..=n_max)
            .map(|n| seq.value_at(n))
            .take_while(|&v| v > 0.0)
            .map(|v| (Complex64::new(v, 0.0), 1))
            .collect(),
    };
    EigList::new(entries)
}

/// `{"values": [...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ValuesFile {
    pub values: Vec<f64>,
}

/// `{"eigs": [[re, im, mult], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EigsFile {
    pub eigs: Vec<(f64, f64, u64)>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let text = serde_json::to_string(v).map_err(|source| Error::Json { path: path.into(), source })?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn read_values_file(path: &Path) -> Result<Vec<f64>> {
    Ok(read_json::<ValuesFile>(path)?.values)
}

/// Writes the first `n_max` singular values, multiplicities expanded.
pub fn write_values_file(path: &Path, seq: &SingularSeq, n_max: u64) -> Result<()> {
    let c = seq.scale();
    let values: Vec<f64> = match seq.kind() {
        SeqKind::Runs(table) => table
            .runs()
            .flat_map(|(v, m)| std::iter::repeat_n(c * v, m as usize))
            .take(n_max as usize)
            .collect(),
        _ => (1..=n_max).map(|n| seq.value_at(n)).collect(),
    };
    write_json(path, &ValuesFile { values })
}

pub fn read_eigs_file(path: &Path) -> Result<EigList> {
    let file: EigsFile = read_json(path)?;
    EigList::new(file.eigs.into_iter().map(|(re, im, m)| (Complex64::new(re, im), m)).collect())
}

pub fn write_eigs_file(path: &Path, eigs: &EigList) -> Result<()> {
    let eigs = eigs.entries().iter().map(|&(z, m)| (z.re, z.im, m)).collect();
    write_json(path, &EigsFile { eigs })
}

struct Params {
    name: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        if name.is_empty() {
            return Err(Error::Grammar("empty model name".into()));
        }
        let mut map = BTreeMap::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Grammar(format!("expected key=value, got '{item}' in '{spec}'")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Grammar(format!("key '{k}' repeated in '{spec}'")));
            }
        }
        Ok(Self { name: name.to_string(), map })
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::Grammar(format!(
                "model '{}' has no parameter '{k}' (expected {})",
                self.name,
                keys.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn str(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Grammar(format!("model '{}' needs parameter '{key}'", self.name)))
    }

    fn num(&self, key: &str) -> Result<f64> {
        let s = self.str(key)?;
        s.parse::<f64>()
            .map_err(|_| Error::Grammar(format!("parameter {key}='{s}' is not a number")))
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.map.contains_key(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    /// Integers may be written as `1e6`.
    fn int(&self, key: &str) -> Result<u64> {
        let v = self.num(key)?;
        if v.fract() != 0.0 || !(0.0..=9.0e15).contains(&v) {
            return Err(Error::Grammar(format!("parameter {key}={v} is not a nonnegative integer")));
        }
        Ok(v as u64)
    }
}

fn exact(value: f64, p: f64) -> Option<Target> {
    Some(Target { value, p, provenance: Provenance::Exact })
}

fn literature(value: f64) -> Option<Target> {
    Some(Target { value, p: 1.0, provenance: Provenance::Literature })
}

/// Parses a model specification.
///
/// ```text
/// harmonic[:c=..]            mu_n = c/n
/// power:p=..[,c=..]          mu_n = c n^{-1/p}
/// osc:a=..,b=..              oscillating Cesaro profile
/// geom:r=..[,c=..]           mu_n = c r^n
/// circle:R=..                (1 + D^2)^{-1/2} on the circle
/// torus:n=..,R=..            (1 + Laplacian)^{-n/2} on the n-torus
/// alt-osc:a=..,b=..          eigenvalues +mu_k, -mu_k of the osc model
/// explicit:file=..[,tail=power|none]
/// eigs:file=..
/// ```
pub fn make_model(spec: &str) -> Result<Model> {
    let p = Params::parse(spec)?;
    let positive = |seq: SingularSeq, target: Option<Target>| Model {
        spec: spec.trim().to_string(),
        seq,
        eigs: EigenData::Positive,
        target,
    };
    match p.name.as_str() {
        "harmonic" => {
            p.allow(&["c"])?;
            let c = p.num_or("c", 1.0)?;
            Ok(positive(SingularSeq::harmonic(c)?, exact(c, 1.0)))
        }
        "power" => {
            p.allow(&["p", "c"])?;
            let (pw, c) = (p.num("p")?, p.num_or("c", 1.0)?);
            Ok(positive(SingularSeq::power(pw, c)?, exact(c.powf(pw), pw)))
        }
        "osc" => {
            p.allow(&["a", "b"])?;
            Ok(positive(SingularSeq::oscillating(p.num("a")?, p.num("b")?)?, None))
        }
        "geom" => {
            p.allow(&["r", "c"])?;
            let seq = SingularSeq::geometric(p.num("r")?, p.num_or("c", 1.0)?)?;
            Ok(positive(seq, exact(0.0, 1.0)))
        }
        "circle" => {
            p.allow(&["R"])?;
            Ok(positive(circle_dirac_svals(p.int("R")?)?, literature(2.0)))
        }
        "torus" => {
            p.allow(&["n", "R"])?;
            let n = p.int("n")?;
            let n = u32::try_from(n).map_err(|_| Error::Model(format!("torus dimension {n} is too large")))?;
            Ok(positive(torus_laplacian_svals(n, p.int("R")?)?, literature(torus_target(n))))
        }
        "alt-osc" => {
            p.allow(&["a", "b"])?;
            let osc = SingularSeq::oscillating(p.num("a")?, p.num("b")?)?;
            let half = DEFAULT_EIG_TERMS / 2;
            let entries = (1..=half).flat_map(|k| {
                let v = osc.value_at(k);
                [(Complex64::new(v, 0.0), 1), (Complex64::new(-v, 0.0), 1)]
            });
            let list = EigList::new(entries.collect())?;
            let seq = SingularSeq::from_runs(list.moduli(), Support::Truncation, spec.trim())?;
            Ok(Model {
                spec: spec.trim().to_string(),
                seq,
                eigs: EigenData::List(Arc::new(list)),
                target: literature(0.0),
            })
        }
        "explicit" => {
            p.allow(&["file", "tail"])?;
            let support = match p.map.get("tail").map(String::as_str) {
                None | Some("power") => Support::Truncation,
                Some("none") => Support::FiniteRank,
                Some(other) => return Err(Error::Grammar(format!("tail must be 'power' or 'none', got '{other}'"))),
            };
            let path = PathBuf::from(p.str("file")?);
            let values = read_values_file(&path)?;
            if values.is_empty() {
                return Err(Error::Model(format!("{}: no values", path.display())));
            }
            let seq = SingularSeq::from_values(&values, support)?.with_label(spec.trim());
            Ok(positive(seq, None))
        }
        "eigs" => {
            p.allow(&["file"])?;
            let path = PathBuf::from(p.str("file")?);
            let list = read_eigs_file(&path)?;
            if list.is_empty() {
                return Err(Error::Model(format!("{}: no eigenvalues", path.display())));
            }
            // Singular values of a normal operator are the moduli.
            let mut moduli: Vec<(f64, u64)> = list.moduli().collect();
            moduli.sort_by(|a, b| b.0.total_cmp(&a.0));
            let seq = SingularSeq::from_runs(moduli, Support::Truncation, spec.trim())?;
            Ok(Model {
                spec: spec.trim().to_string(),
                seq,
                eigs: EigenData::List(Arc::new(list)),
                target: None,
            })
        }
        other => Err(Error::Grammar(format!(
            "unknown model '{other}' (expected harmonic, power, osc, geom, circle, torus, alt-osc, explicit or eigs)"
        ))),
    }
}
