//! Storage and evaluation of collective surrogates `sum_{(k,s)} delta_k(c_s) phi_s(y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::colloc;
use crate::error::{Error, Result};
use crate::fem1d::{self, SpatialField};
use crate::legendre::{self, Normalization};
use crate::multiindex::{CollectiveIndexSet, MultiIndex};

/// Parametric basis attached to the detail fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `y^s`.
    Monomial,
    /// Tensorized `h_s` on the real Leja sequence.
    HierarchicalLeja,
    /// Orthonormal `L_s`.
    Legendre,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Monomial => "monomial",
            Basis::HierarchicalLeja => "hierarchical-leja",
            Basis::Legendre => "legendre",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(Basis::Monomial),
            "hierarchical-leja" => Ok(Basis::HierarchicalLeja),
            "legendre" => Ok(Basis::Legendre),
            other => Err(Error::Parse(format!("unknown basis '{other}'"))),
        }
    }
}

/// Detail fields keyed by `(k, s)`, each stored at level `k`.
#[derive(Clone, Debug)]
pub struct Surrogate {
    pub basis: Basis,
    pub g: CollectiveIndexSet,
    details: BTreeMap<(u32, MultiIndex), SpatialField>,
}

impl Surrogate {
    pub fn new(basis: Basis, g: CollectiveIndexSet) -> Self {
        Self {
            basis,
            g,
            details: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, k: u32, s: MultiIndex, field: SpatialField) {
        assert_eq!(field.level(), k, "detail for level {k} stored at level {}", field.level());
        self.details.insert((k, s), field);
    }

    pub fn details(&self) -> &BTreeMap<(u32, MultiIndex), SpatialField> {
        &self.details
    }

    pub fn get(&self, k: u32, s: &MultiIndex) -> Option<&SpatialField> {
        self.details.get(&(k, s.clone()))
    }

    /// `sum_k 2^k` over the stored keys.
    pub fn rank(&self) -> u128 {
        self.details.keys().map(|&(k, _)| 1u128 << k).sum()
    }

    pub fn max_level(&self) -> u32 {
        self.details.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }

    /// Highest exponent used in each dimension, indexed by `j - 1`.
    fn degrees(&self) -> Vec<u32> {
        let mut deg = Vec::new();
        for (_, s) in self.details.keys() {
            for &(j, e) in s.entries() {
                let j = j as usize;
                if deg.len() < j {
                    deg.resize(j, 0);
                }
                deg[j - 1] = deg[j - 1].max(e);
            }
        }
        deg
    }

    /// Univariate basis values `phi_e(y_j)` for `e <= degree_j`.
    fn univariate_tables(&self, y: &[f64]) -> Result<Vec<Vec<f64>>> {
        let degrees = self.degrees();
        let leja = match self.basis {
            Basis::HierarchicalLeja => {
                let top = degrees.iter().copied().max().unwrap_or(0) as usize;
                Some(colloc::leja_points(top + 1)?)
            }
            _ => None,
        };
        degrees
            .iter()
            .enumerate()
            .map(|(i, &deg)| {
                let yj = y.get(i).copied().unwrap_or(0.0);
                (0..=deg)
                    .map(|e| match self.basis {
                        Basis::Monomial => Ok(yj.powi(e as i32)),
                        Basis::HierarchicalLeja => Ok(colloc::hier_univariate(e, yj, leja.as_deref().unwrap())),
                        Basis::Legendre => legendre::legendre_eval(e, yj, Normalization::Orthonormal),
                    })
                    .collect()
            })
            .collect()
    }

    /// `phi_s(y)` for one multi-index.
    pub fn basis_value(&self, s: &MultiIndex, y: &[f64]) -> Result<f64> {
        check_domain(y)?;
        let tables = self.univariate_tables(y)?;
        Ok(s.entries().iter().map(|&(j, e)| tables[j as usize - 1][e as usize]).product())
    }

    /// The surrogate at `y`, represented on the finest stored level.
    pub fn evaluate(&self, y: &[f64]) -> Result<SpatialField> {
        check_domain(y)?;
        let tables = self.univariate_tables(y)?;
        let top = self.max_level();
        let mut per_level: Vec<SpatialField> = (0..=top).map(SpatialField::zeros).collect();
        for ((k, s), field) in &self.details {
            let phi: f64 = s.entries().iter().map(|&(j, e)| tables[j as usize - 1][e as usize]).product();
            if phi != 0.0 {
                per_level[*k as usize].axpy(phi, field);
            }
        }
        let mut acc = SpatialField::zeros(0);
        for (k, layer) in per_level.into_iter().enumerate() {
            acc = fem1d::prolong(&acc, k as u32)?;
            acc.axpy(1.0, &layer);
        }
        Ok(acc)
    }

    /// `c_s = sum_k delta_k(c_s)` on the finest level stored for `s`.
    pub fn coefficient(&self, s: &MultiIndex) -> Option<SpatialField> {
        let levels: Vec<(&u32, &SpatialField)> = self
            .details
            .iter()
            .filter(|((_, t), _)| t == s)
            .map(|((k, _), f)| (k, f))
            .collect();
        let top = *levels.iter().map(|(k, _)| *k).max()?;
        let mut acc = SpatialField::zeros(top);
        for (_, f) in levels {
            acc.axpy_prolonged(1.0, f).expect("levels below top");
        }
        Some(acc)
    }

    /// Writes `index.tsv` plus one binary file per detail.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut index = String::new();
        index.push_str(&format!(
            "# basis={} p={} T={} rule={}\n",
            self.basis, self.g.p, self.g.t, self.g.rule
        ));
        for (i, ((k, s), field)) in self.details.iter().enumerate() {
            let name = format!("d{i:06}.bin");
            index.push_str(&format!("{k}\t{s}\t{name}\n"));
            write_field(field, &dir.join(&name))?;
        }
        std::fs::write(dir.join("index.tsv"), index)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("index.tsv"))?;
        let mut basis = None;
        let (mut p, mut t, mut rule) = (f64::NAN, f64::NAN, String::from("custom"));
        let mut details = BTreeMap::new();
        for line in text.lines() {
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    match field.split_once('=') {
                        Some(("basis", v)) => basis = Some(v.parse::<Basis>()?),
                        Some(("p", v)) => p = v.parse().map_err(|_| Error::Parse(format!("bad p '{v}'")))?,
                        Some(("T", v)) => t = v.parse().map_err(|_| Error::Parse(format!("bad T '{v}'")))?,
                        Some(("rule", v)) => rule = v.to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [k, s, file] = cols[..] else {
                return Err(Error::Parse(format!("expected 'k<TAB>s<TAB>file', got '{line}'")));
            };
            let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad level '{k}'")))?;
            let field = read_field(&dir.join(file))?;
            if field.level() != k {
                return Err(Error::Parse(format!("{file} holds level {}, index says {k}", field.level())));
            }
            details.insert((k, s.parse::<MultiIndex>()?), field);
        }
        let basis = basis.ok_or_else(|| Error::Parse("index.tsv lacks a basis header".into()))?;
        let g = CollectiveIndexSet::from_pairs(details.keys().map(|(k, s)| (*k, s.clone())), p, t, &rule)?;
        Ok(Self { basis, g, details })
    }
}

fn check_domain(y: &[f64]) -> Result<()> {
    if let Some((j, v)) = y.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0)) {
        return Err(Error::DomainViolation(format!("y_{} = {v}", j + 1)));
    }
    Ok(())
}

/// Binary layout: level as little-endian `u32`, then the values as little-endian `f64`.
pub fn write_field(field: &SpatialField, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&field.level().to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SpatialField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 4 || (bytes.len() - 4) % 8 != 0 {
        return Err(Error::Parse(format!("{} is not a field file", path.display())));
    }
    let level = u32::from_le_bytes(bytes[..4].try_into().unwrap());
    let values = bytes[4..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SpatialField::new(level, values)
}
