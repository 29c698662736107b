//! Taylor coefficients `t_s = d^s u(0) / s!` by recursive solves with `abar`, and
//! the collective Taylor surrogate with monomial basis.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::diffusion::{lp_mass, regularity_constants, superposed_weight, AffineDiffusion, Profile, WeightRule, DEFAULT_MASS_CUT};
use crate::error::Result;
use crate::fem1d::{self, FluxFunctional, SpatialField};
use crate::multiindex::{build_g, choose_t, CollectiveIndexSet, DownwardClosedSet, MultiIndex, DEFAULT_ENUMERATION_CAP};
use crate::surrogate::{Basis, Surrogate};

/// One recursion step: `int abar t_s' v' = -sum_j int psi_j t_{s-e_j}' v'`.
fn step(a: &AffineDiffusion, f: &Profile, s: &MultiIndex, known: &BTreeMap<MultiIndex, SpatialField>, level: u32) -> Result<SpatialField> {
    if s.is_zero() {
        return fem1d::solve(&a.abar, &FluxFunctional::load(f), level);
    }
    let mut rhs = FluxFunctional::default();
    for j in s.support() {
        let parent = s.sub_unit(j).expect("j in support");
        rhs = rhs.with_term(1.0, &a.psis[j as usize - 1], &known[&parent]);
    }
    fem1d::solve(&a.abar, &rhs, level)
}

/// `t_s` for every `s` in `lambda`, all at `level`.
pub fn taylor_coeffs(a: &AffineDiffusion, f: &Profile, lambda: &BTreeSet<MultiIndex>, level: u32) -> Result<BTreeMap<MultiIndex, SpatialField>> {
    let set = DownwardClosedSet::new(lambda.clone())?;
    let levels = set.iter().map(|s| (s.clone(), level)).collect();
    layered(a, f, &set, &levels)
}

/// Runs the recursion layer by layer in `|s|`, each `t_s` on its own level.
fn layered(a: &AffineDiffusion, f: &Profile, set: &DownwardClosedSet, levels: &BTreeMap<MultiIndex, u32>) -> Result<BTreeMap<MultiIndex, SpatialField>> {
    let mut layers: BTreeMap<u32, Vec<&MultiIndex>> = BTreeMap::new();
    for s in set.iter() {
        layers.entry(s.order()).or_default().push(s);
    }
    let mut known = BTreeMap::new();
    for layer in layers.values() {
        let fresh = layer
            .par_iter()
            .map(|s| Ok(((*s).clone(), step(a, f, s, &known, levels[*s])?)))
            .collect::<Result<Vec<_>>>()?;
        known.extend(fresh);
    }
    Ok(known)
}

/// Result of [`build_taylor`].
#[derive(Clone, Debug)]
pub struct TaylorBuild {
    pub surrogate: Surrogate,
    /// `t_s` on its working level for every `s` of the lower closure of `G`.
    pub coefficients: BTreeMap<MultiIndex, SpatialField>,
    pub mass: f64,
    pub t: f64,
}

/// Working level of every member of the closure of `g`: `kappa(s)`, raised to the
/// working level of any successor so that parents are never coarser than their children.
pub fn working_levels(g: &CollectiveIndexSet) -> (DownwardClosedSet, BTreeMap<MultiIndex, u32>) {
    let closure = DownwardClosedSet::closure(g.indices().cloned());
    let mut levels: BTreeMap<MultiIndex, u32> = closure.iter().map(|s| (s.clone(), g.kappa(s).unwrap_or(0))).collect();
    let mut order = closure.linear_extension();
    order.reverse();
    for s in &order {
        let own = levels[s];
        for parent in s.predecessors() {
            let lvl = levels.get_mut(&parent).expect("closure is lower");
            *lvl = (*lvl).max(own);
        }
    }
    (closure, levels)
}

/// The superposed weight over `b` for model `a`.
pub fn taylor_weight(a: &AffineDiffusion, f: &Profile) -> Result<WeightRule> {
    Ok(superposed_weight(&regularity_constants(a, f.l2_norm())?.b))
}

/// Collective Taylor surrogate for budget `n`.
pub fn build_taylor(a: &AffineDiffusion, f: &Profile, n: u64, p: f64) -> Result<TaylorBuild> {
    let rule = taylor_weight(a, f)?;
    build_taylor_with(a, f, n, p, &rule)
}

pub fn build_taylor_with(a: &AffineDiffusion, f: &Profile, n: u64, p: f64, rule: &WeightRule) -> Result<TaylorBuild> {
    let mass = lp_mass(rule, p, DEFAULT_MASS_CUT, DEFAULT_ENUMERATION_CAP)?.mass;
    let t = choose_t(n, mass)?;
    let g = build_g(rule, p, t, DEFAULT_ENUMERATION_CAP)?;
    let (surrogate, coefficients) = taylor_on_set(a, f, g)?;
    Ok(TaylorBuild {
        surrogate,
        coefficients,
        mass,
        t,
    })
}

/// Taylor surrogate on a given collective set.
pub fn taylor_on_set(a: &AffineDiffusion, f: &Profile, g: CollectiveIndexSet) -> Result<(Surrogate, BTreeMap<MultiIndex, SpatialField>)> {
    let (closure, levels) = working_levels(&g);
    let coefficients = layered(a, f, &closure, &levels)?;
    let mut surrogate = Surrogate::new(Basis::Monomial, g);
    let kappa = surrogate.g.kappa_map().clone();
    for (s, k) in kappa {
        for level in 0..=k {
            surrogate.insert(level, s.clone(), fem1d::detail(&coefficients[&s], level)?);
        }
    }
    Ok((surrogate, coefficients))
}
