//! Multi-indices, lower sets and the weighted collective index set
//! `G(T) = {(k, s) : 2^k sigma_s^p <= T}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Finitely supported exponent vector, stored as sorted `(dimension, exponent)` pairs.
///
/// Dimensions are 1-based and exponents strictly positive, so equal indices have
/// equal representations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit index `e^j`.
    pub fn unit(j: u32) -> Self {
        assert!(j >= 1, "dimensions are 1-based");
        Self { entries: vec![(j, 1)] }
    }

    /// Builds from a dense exponent vector; position 0 is dimension 1.
    pub fn from_dense(exps: &[u32]) -> Self {
        let entries = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (i as u32 + 1, e))
            .collect();
        Self { entries }
    }

    /// Builds from arbitrary `(dimension, exponent)` pairs, merging repeats and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (j, e) in pairs {
            if j == 0 {
                return Err(Error::Parse("dimension 0 is not allowed".into()));
            }
            *map.entry(j).or_insert(0u32) += e;
        }
        Ok(Self {
            entries: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        })
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exponent of dimension `j` (zero when absent).
    pub fn get(&self, j: u32) -> u32 {
        match self.entries.binary_search_by_key(&j, |&(d, _)| d) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    /// `|s| = sum_j s_j`.
    pub fn order(&self) -> u32 {
        self.entries.iter().map(|&(_, e)| e).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(j, _)| j)
    }

    /// Largest active dimension, 0 for the zero index.
    pub fn max_dim(&self) -> u32 {
        self.entries.last().map_or(0, |&(j, _)| j)
    }

    pub fn add_unit(&self, j: u32) -> Self {
        assert!(j >= 1, "dimensions are 1-based");
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&j, |&(d, _)| d) {
            Ok(i) => entries[i].1 += 1,
            Err(i) => entries.insert(i, (j, 1)),
        }
        Self { entries }
    }

    /// `s - e^j`, or `None` when `s_j = 0`.
    pub fn sub_unit(&self, j: u32) -> Option<Self> {
        let i = self.entries.binary_search_by_key(&j, |&(d, _)| d).ok()?;
        let mut entries = self.entries.clone();
        if entries[i].1 == 1 {
            entries.remove(i);
        } else {
            entries[i].1 -= 1;
        }
        Some(Self { entries })
    }

    /// All `s - e^j` with `s_j > 0`.
    pub fn predecessors(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        self.support().filter_map(move |j| self.sub_unit(j))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.entries.iter().all(|&(j, e)| other.get(j) >= e)
    }

    pub fn dense(&self, dims: usize) -> Vec<u32> {
        let mut v = vec![0; dims];
        for &(j, e) in &self.entries {
            if (j as usize) <= dims {
                v[j as usize - 1] = e;
            }
        }
        v
    }

    /// `s! = prod_j s_j!` as a float.
    pub fn factorial(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, e)| (1..=e).map(f64::from).product::<f64>())
            .product()
    }

    /// Exact multinomial `|s|! / s!`, available while `|s| <= 20`.
    pub fn multinomial_exact(&self) -> Option<u128> {
        let n = self.order();
        if n > 20 {
            return None;
        }
        let fact = |m: u32| (1..=m as u128).product::<u128>();
        let den: u128 = self.entries.iter().map(|&(_, e)| fact(e)).product();
        Some(fact(n) / den)
    }

    /// `|s|! / s!`, exact up to `|s| = 20` and a product of binomials beyond.
    pub fn multinomial(&self) -> f64 {
        if let Some(m) = self.multinomial_exact() {
            return m as f64;
        }
        let mut total = 0u32;
        let mut acc = 1.0;
        for &(_, e) in &self.entries {
            for i in 1..=e {
                total += 1;
                acc *= f64::from(total) / f64::from(i);
            }
        }
        acc
    }

    /// `y^s`, with dimension `j` read from `y[j-1]` and missing coordinates taken as zero.
    pub fn monomial(&self, y: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(j, e)| y.get(j as usize - 1).copied().unwrap_or(0.0).powi(e as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, (j, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}:{e}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "0" {
            return Ok(Self::zero());
        }
        let mut entries: Vec<(u32, u32)> = Vec::new();
        for part in text.split(',') {
            let (j, e) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad multi-index entry '{part}'")))?;
            let j: u32 = j.trim().parse().map_err(|_| Error::Parse(format!("bad dimension in '{part}'")))?;
            let e: u32 = e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in '{part}'")))?;
            if j == 0 || e == 0 {
                return Err(Error::Parse(format!("non-canonical entry '{part}'")));
            }
            if entries.last().is_some_and(|&(prev, _)| prev >= j) {
                return Err(Error::Parse(format!("dimensions not increasing in '{text}'")));
            }
            entries.push((j, e));
        }
        Ok(Self { entries })
    }
}

/// Sort key for the deterministic linear extension: total order first, then lexicographic.
pub fn graded_key(s: &MultiIndex) -> (u32, &MultiIndex) {
    (s.order(), s)
}

/// True iff every `s - e^j` of every member is a member.
pub fn is_downward_closed(set: &BTreeSet<MultiIndex>) -> bool {
    set.iter().all(|s| s.predecessors().all(|t| set.contains(&t)))
}

/// A finite lower set of multi-indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DownwardClosedSet {
    members: BTreeSet<MultiIndex>,
}

impl DownwardClosedSet {
    pub fn new(members: BTreeSet<MultiIndex>) -> Result<Self> {
        for s in &members {
            for t in s.predecessors() {
                if !members.contains(&t) {
                    return Err(Error::NotLowerSet(s.to_string()));
                }
            }
        }
        Ok(Self { members })
    }

    /// Smallest lower set containing the given indices.
    pub fn closure(seeds: impl IntoIterator<Item = MultiIndex>) -> Self {
        let mut members = BTreeSet::new();
        let mut stack: Vec<MultiIndex> = seeds.into_iter().collect();
        while let Some(s) = stack.pop() {
            if members.contains(&s) {
                continue;
            }
            stack.extend(s.predecessors());
            members.insert(s);
        }
        Self { members }
    }

    pub fn members(&self) -> &BTreeSet<MultiIndex> {
        &self.members
    }

    pub fn contains(&self, s: &MultiIndex) -> bool {
        self.members.contains(s)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// Members sorted by `(|s|, lexicographic)`; every prefix is a lower set.
    pub fn linear_extension(&self) -> Vec<MultiIndex> {
        let mut v: Vec<MultiIndex> = self.members.iter().cloned().collect();
        v.sort_by(|a, b| graded_key(a).cmp(&graded_key(b)));
        v
    }

    /// Checks that `order` lists exactly the members with every prefix downward closed.
    pub fn check_ordering(&self, order: &[MultiIndex]) -> Result<()> {
        if order.len() != self.members.len() {
            return Err(Error::OrderingInvalid(format!(
                "{} entries for a set of {}",
                order.len(),
                self.members.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for s in order {
            if !self.members.contains(s) {
                return Err(Error::OrderingInvalid(format!("{s} is not a member")));
            }
            if let Some(t) = s.predecessors().find(|t| !seen.contains(t)) {
                return Err(Error::OrderingInvalid(format!("{s} listed before {t}")));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::OrderingInvalid(format!("{s} listed twice")));
            }
        }
        Ok(())
    }

    /// Highest exponent used in any dimension.
    pub fn max_exponent(&self) -> u32 {
        self.members
            .iter()
            .flat_map(|s| s.entries().iter().map(|&(_, e)| e))
            .max()
            .unwrap_or(0)
    }

    /// Dimensions touched by some member, ascending.
    pub fn active_dims(&self) -> Vec<u32> {
        let dims: BTreeSet<u32> = self.members.iter().flat_map(|s| s.support().collect::<Vec<_>>()).collect();
        dims.into_iter().collect()
    }
}

/// A weight sequence `sigma_s` on multi-indices over `dims()` active dimensions.
pub trait Weight: Sync {
    fn sigma(&self, s: &MultiIndex) -> f64;
    fn dims(&self) -> usize;
    fn name(&self) -> String {
        "custom".into()
    }
}

/// Weight backed by a closure.
pub struct FnWeight<F> {
    pub dims: usize,
    pub f: F,
}

impl<F: Fn(&MultiIndex) -> f64 + Sync> Weight for FnWeight<F> {
    fn sigma(&self, s: &MultiIndex) -> f64 {
        (self.f)(s)
    }
    fn dims(&self) -> usize {
        self.dims
    }
}

/// Levels beyond this are refused; `2^k` must stay representable.
pub const MAX_SET_LEVEL: u32 = 60;

/// Default cap on the number of weights evaluated by [`build_g`].
pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;

/// The set `G(T)`, stored as the maximal admissible level per multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveIndexSet {
    kappa: BTreeMap<MultiIndex, u32>,
    pub p: f64,
    pub t: f64,
    pub rule: String,
}

/// Largest `k` with `2^k * sp <= t`, if any.
fn max_level(sp: f64, t: f64) -> Option<u32> {
    if !(sp <= t) {
        return None;
    }
    let mut k = (t / sp).log2().floor().max(0.0) as u32;
    while k > 0 && (k as f64).exp2() * sp > t {
        k -= 1;
    }
    while ((k + 1) as f64).exp2() * sp <= t {
        k += 1;
    }
    Some(k)
}

/// Enumerates `G(T) = {(k, s) : 2^k sigma_s^p <= T}` by frontier search over the active dimensions.
pub fn build_g(weight: &dyn Weight, p: f64, t: f64, cap: usize) -> Result<CollectiveIndexSet> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidBudget(format!("exponent p = {p} must be positive")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidBudget(format!("threshold T = {t} must be finite and nonnegative")));
    }
    let mut set = CollectiveIndexSet {
        kappa: BTreeMap::new(),
        p,
        t,
        rule: weight.name(),
    };
    let dims = weight.dims() as u32;
    let zero = MultiIndex::zero();
    let mut evaluated = 1usize;
    let Some(k0) = max_level(weight.sigma(&zero).powf(p), t) else {
        return Ok(set);
    };
    check_level(k0)?;
    set.kappa.insert(zero.clone(), k0);

    // Frontier search is exact as long as every index has a parent with weight no
    // larger than its own; a probed index lying strictly below all its parents is rejected.
    let mut sigmas: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    sigmas.insert(zero.clone(), weight.sigma(&zero));
    let mut layer = vec![zero];
    while !layer.is_empty() {
        let mut candidates = BTreeSet::new();
        for s in &layer {
            for j in 1..=dims {
                candidates.insert(s.add_unit(j));
            }
        }
        let mut next = Vec::new();
        let mut next_sigmas = BTreeMap::new();
        for c in candidates {
            evaluated += 1;
            if evaluated > cap {
                return Err(Error::EnumerationBudgetExceeded { cap });
            }
            let sc = weight.sigma(&c);
            let mut lowest: Option<(MultiIndex, f64)> = None;
            for parent in c.predecessors() {
                let sp = sigmas.get(&parent).copied().unwrap_or_else(|| weight.sigma(&parent));
                if lowest.as_ref().map_or(true, |(_, v)| sp < *v) {
                    lowest = Some((parent, sp));
                }
            }
            if let Some((parent, sp)) = lowest {
                if sc < sp {
                    return Err(Error::NonMonotoneWeight {
                        parent: parent.to_string(),
                        child: c.to_string(),
                        parent_value: sp,
                        child_value: sc,
                    });
                }
            }
            if let Some(kc) = max_level(sc.powf(p), t) {
                check_level(kc)?;
                set.kappa.insert(c.clone(), kc);
                next_sigmas.insert(c.clone(), sc);
                next.push(c);
            }
        }
        sigmas = next_sigmas;
        layer = next;
    }
    Ok(set)
}

fn check_level(k: u32) -> Result<()> {
    if k > MAX_SET_LEVEL {
        return Err(Error::InvalidBudget(format!(
            "threshold admits level {k}, above the limit {MAX_SET_LEVEL}"
        )));
    }
    Ok(())
}

impl CollectiveIndexSet {
    /// Builds a set from explicit pairs; levels must be contiguous from 0 for each index.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, MultiIndex)>, p: f64, t: f64, rule: &str) -> Result<Self> {
        let mut levels: BTreeMap<MultiIndex, BTreeSet<u32>> = BTreeMap::new();
        for (k, s) in pairs {
            levels.entry(s).or_default().insert(k);
        }
        let mut kappa = BTreeMap::new();
        for (s, ks) in levels {
            let top = *ks.iter().next_back().expect("non-empty");
            if ks.len() as u32 != top + 1 {
                return Err(Error::Parse(format!("levels of {s} are not contiguous from 0")));
            }
            kappa.insert(s, top);
        }
        Ok(Self {
            kappa,
            p,
            t,
            rule: rule.to_string(),
        })
    }

    /// Builds a set from per-index maximal levels.
    pub fn from_kappa(kappa: BTreeMap<MultiIndex, u32>, p: f64, t: f64, rule: &str) -> Self {
        Self {
            kappa,
            p,
            t,
            rule: rule.to_string(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    /// Number of `(k, s)` pairs.
    pub fn len(&self) -> usize {
        self.kappa.values().map(|&k| k as usize + 1).sum()
    }

    pub fn contains(&self, k: u32, s: &MultiIndex) -> bool {
        self.kappa.get(s).is_some_and(|&m| k <= m)
    }

    /// `kappa(s) = max{k : (k, s) in G}`.
    pub fn kappa(&self, s: &MultiIndex) -> Option<u32> {
        self.kappa.get(s).copied()
    }

    pub fn kappa_map(&self) -> &BTreeMap<MultiIndex, u32> {
        &self.kappa
    }

    /// Multi-indices with at least one level, in lexicographic order.
    pub fn indices(&self) -> impl Iterator<Item = &MultiIndex> {
        self.kappa.keys()
    }

    /// All pairs, ordered by multi-index then level.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, &MultiIndex)> {
        self.kappa.iter().flat_map(|(s, &m)| (0..=m).map(move |k| (k, s)))
    }

    /// `k* = max kappa(s)`, `None` for the empty set.
    pub fn max_level(&self) -> Option<u32> {
        self.kappa.values().copied().max()
    }

    /// Largest active dimension used by any index.
    pub fn max_dim(&self) -> u32 {
        self.kappa.keys().map(MultiIndex::max_dim).max().unwrap_or(0)
    }

    /// `Lambda_0`, all indices with at least one level.
    pub fn index_set(&self) -> BTreeSet<MultiIndex> {
        self.kappa.keys().cloned().collect()
    }
}

/// Sections `Lambda_k = {s : (k, s) in G}` for `k = 0..=k*`, nested in inverse order.
///
/// The sections are lower sets whenever the weight is coordinate-monotone.
pub fn level_sections(g: &CollectiveIndexSet) -> Vec<BTreeSet<MultiIndex>> {
    let Some(top) = g.max_level() else {
        return Vec::new();
    };
    (0..=top)
        .map(|k| g.kappa.iter().filter(|&(_, &m)| m >= k).map(|(s, _)| s.clone()).collect())
        .collect()
}

/// `sum_{(k,s) in G} 2^k`.
pub fn work_bound(g: &CollectiveIndexSet) -> u128 {
    g.kappa.values().map(|&m| (1u128 << (m + 1)) - 1).sum()
}

/// Threshold `T_n = n / (2 * mass)`, which satisfies `2 mass T_n <= n < 4 mass T_n`.
pub fn choose_t(n: u64, lp_mass: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidBudget("budget n must be at least 1".into()));
    }
    if !(lp_mass > 0.0 && lp_mass.is_finite()) {
        return Err(Error::InvalidBudget(format!("weight mass {lp_mass} must be positive and finite")));
    }
    let nf = n as f64;
    let t = nf / (2.0 * lp_mass);
    debug_assert!(2.0 * lp_mass * t <= nf * (1.0 + f64::EPSILON));
    debug_assert!(nf < 4.0 * lp_mass * t + f64::EPSILON);
    Ok(t)
}

/// Writes the pairs as `k<TAB>multiindex` lines with the parameters in a leading comment.
pub fn write_index_set(g: &CollectiveIndexSet, path: &Path) -> Result<()> {
    std::fs::write(path, format_index_set(g))?;
    Ok(())
}

pub fn format_index_set(g: &CollectiveIndexSet) -> String {
    let mut out = format!("# p={} T={} rule={}\n", g.p, g.t, g.rule);
    let mut pairs: Vec<(u32, &MultiIndex)> = g.pairs().collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| graded_key(a.1).cmp(&graded_key(b.1))));
    for (k, s) in pairs {
        out.push_str(&format!("{k}\t{s}\n"));
    }
    out
}

pub fn read_index_set(path: &Path) -> Result<CollectiveIndexSet> {
    parse_index_set(&std::fs::read_to_string(path)?)
}

pub fn parse_index_set(text: &str) -> Result<CollectiveIndexSet> {
    let (mut p, mut t, mut rule) = (f64::NAN, f64::NAN, String::from("custom"));
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('#') {
            for field in header.split_whitespace() {
                match field.split_once('=') {
                    Some(("p", v)) => p = v.parse().map_err(|_| Error::Parse(format!("bad p '{v}'")))?,
                    Some(("T", v)) => t = v.parse().map_err(|_| Error::Parse(format!("bad T '{v}'")))?,
                    Some(("rule", v)) => rule = v.to_string(),
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (k, s) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("expected 'k<TAB>index', got '{line}'")))?;
        let k: u32 = k.trim().parse().map_err(|_| Error::Parse(format!("bad level '{k}'")))?;
        pairs.push((k, s.parse::<MultiIndex>()?));
    }
    CollectiveIndexSet::from_pairs(pairs, p, t, &rule)
}
