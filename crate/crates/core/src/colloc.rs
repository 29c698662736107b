//! Real Leja points, hierarchical interpolation on lower sets and the collective
//! collocation operator `sum_k delta_k I_{Lambda_k} u`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::diffusion::{colloc_weight, ellipticity_bounds, lp_mass, AffineDiffusion, Profile, WeightRule, DEFAULT_MASS_CUT, NORM_GRID};
use crate::error::{Error, Result};
use crate::fem1d::{self, FluxFunctional, SpatialField};
use crate::multiindex::{
    build_g, choose_t, level_sections, CollectiveIndexSet, DownwardClosedSet, MultiIndex,
    DEFAULT_ENUMERATION_CAP,
};
use crate::surrogate::{Basis, Surrogate};

/// Most points [`leja_points`] will return.
pub const MAX_LEJA: usize = 129;

const ANGLES: usize = 1 << 16;

fn leja_sequence() -> &'static [f64] {
    static SEQ: OnceLock<Vec<f64>> = OnceLock::new();
    SEQ.get_or_init(|| {
        let circle: Vec<(f64, f64)> = (0..ANGLES)
            .map(|m| {
                let t = 2.0 * PI * m as f64 / ANGLES as f64;
                (t.cos(), t.sin())
            })
            .collect();
        // Running log of prod_j |z - z_j| on the grid.
        let mut logprod = vec![0.0f64; ANGLES];
        let mut taken = vec![false; ANGLES];
        let add = |m: usize, logprod: &mut Vec<f64>| {
            let (zx, zy) = circle[m];
            for (lp, &(x, y)) in logprod.iter_mut().zip(&circle) {
                *lp += ((x - zx).powi(2) + (y - zy).powi(2)).sqrt().ln();
            }
        };
        let mut points = vec![1.0];
        taken[0] = true;
        add(0, &mut logprod);
        while points.len() < MAX_LEJA {
            let best = logprod.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-12 * best.abs().max(1.0);
            let m = (0..ANGLES)
                .find(|&m| !taken[m] && logprod[m] >= best - tol)
                .expect("grid exhausted");
            taken[m] = true;
            add(m, &mut logprod);
            let x = circle[m].0;
            if points.iter().all(|&p: &f64| (p - x).abs() > 1e-12) {
                points.push(x);
            }
        }
        points
    })
}

/// The first `n` distinct real parts of the disk Leja sequence started at `z_0 = 1`.
pub fn leja_points(n: usize) -> Result<Vec<f64>> {
    if n > MAX_LEJA {
        return Err(Error::CountOverflow {
            requested: n,
            limit: MAX_LEJA,
        });
    }
    Ok(leja_sequence()[..n].to_vec())
}

/// `h_k(t) = prod_{i<k} (t - xi_i) / (xi_k - xi_i)`.
pub fn hier_univariate(k: u32, t: f64, xi: &[f64]) -> f64 {
    let k = k as usize;
    (0..k).map(|i| (t - xi[i]) / (xi[k] - xi[i])).product()
}

/// `h_s(y) = prod_j h_{s_j}(y_j)`; missing coordinates are zero.
pub fn hier_basis_eval(s: &MultiIndex, y: &[f64], xi: &[f64]) -> f64 {
    s.entries()
        .iter()
        .map(|&(j, e)| hier_univariate(e, y.get(j as usize - 1).copied().unwrap_or(0.0), xi))
        .product()
}

/// Lagrange basis polynomial `l_j` on the nodes `xi[..=k]`.
fn lagrange(j: usize, k: usize, t: f64, xi: &[f64]) -> f64 {
    (0..=k).filter(|&i| i != j).map(|i| (t - xi[i]) / (xi[j] - xi[i])).product()
}

/// `lambda_k = max_y sum_j |l_j(y)|` on a 4097-point grid.
pub fn lebesgue_univariate(k: usize, xi: &[f64]) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let n = 4096;
    (0..=n)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            (0..=k).map(|j| lagrange(j, k, t, xi).abs()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Smallest `theta >= 1` with `lambda_k <= (k+1)^theta` for `1 <= k <= kmax`.
pub fn lebesgue_exponent(kmax: usize) -> Result<f64> {
    let xi = leja_points(kmax + 1)?;
    Ok((1..=kmax)
        .map(|k| lebesgue_univariate(k, &xi).ln() / ((k + 1) as f64).ln())
        .fold(1.0, f64::max))
}

/// Point `xi_s = (xi_{s_1}, ..., xi_{s_dims})`.
pub fn grid_point(s: &MultiIndex, dims: usize, xi: &[f64]) -> Vec<f64> {
    s.dense(dims).iter().map(|&e| xi[e as usize]).collect()
}

/// Values the surplus recursion can combine.
pub trait SurplusValue: Clone + Send + Sync {
    /// `self -= alpha * other`; `other` may be represented more finely than `self`.
    fn sub_scaled(&mut self, alpha: f64, other: &Self);
}

impl SurplusValue for f64 {
    fn sub_scaled(&mut self, alpha: f64, other: &Self) {
        *self -= alpha * other;
    }
}

impl SurplusValue for Vec<f64> {
    fn sub_scaled(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a -= alpha * b;
        }
    }
}

impl SurplusValue for SpatialField {
    /// Finer operands enter through their projection onto this level.
    fn sub_scaled(&mut self, alpha: f64, other: &Self) {
        if other.level() == self.level() {
            self.axpy(-alpha, other);
        } else {
            let coarse = fem1d::project(other, self.level()).expect("surplus operand coarser than target");
            self.axpy(-alpha, &coarse);
        }
    }
}

/// Hierarchical surpluses `u_s` along `ordering`, with `sampler(s)` giving `u(xi_s)`.
///
/// Only `s' <= s` contribute to `u_s` because `h_{s'}(xi_s) = 0` otherwise.
pub fn surpluses<V: SurplusValue>(
    sampler: impl Fn(&MultiIndex) -> Result<V> + Sync,
    lambda: &BTreeSet<MultiIndex>,
    ordering: &[MultiIndex],
) -> Result<BTreeMap<MultiIndex, V>> {
    let set = DownwardClosedSet::new(lambda.clone())?;
    set.check_ordering(ordering)?;
    let dims = set.iter().map(MultiIndex::max_dim).max().unwrap_or(0) as usize;
    let xi = leja_points(set.max_exponent() as usize + 1)?;
    let samples: Vec<V> = ordering.par_iter().map(&sampler).collect::<Result<_>>()?;
    let mut out: BTreeMap<MultiIndex, V> = BTreeMap::new();
    for (s, mut value) in ordering.iter().zip(samples) {
        let point = grid_point(s, dims, &xi);
        for (t, ut) in &out {
            if t.le(s) {
                let h = hier_basis_eval(t, &point, &xi);
                if h != 0.0 {
                    value.sub_scaled(h, ut);
                }
            }
        }
        out.insert(s.clone(), value);
    }
    Ok(out)
}

/// `I_Lambda v(y) = sum_s u_s h_s(y)` for scalar surpluses.
pub fn interpolate_scalar(surplus: &BTreeMap<MultiIndex, f64>, y: &[f64]) -> Result<f64> {
    let top = surplus.keys().flat_map(|s| s.entries().iter().map(|&(_, e)| e)).max().unwrap_or(0);
    let xi = leja_points(top as usize + 1)?;
    Ok(surplus.iter().map(|(s, u)| u * hier_basis_eval(s, y, &xi)).sum())
}

/// Grid estimate of `L_Lambda = sup_y sum_s |l_s(y)|` for the cardinal functions of `I_Lambda`.
///
/// The grid has `points_per_axis` points along every active dimension.
pub fn lebesgue_of_set(lambda: &DownwardClosedSet, points_per_axis: usize) -> Result<f64> {
    let order = lambda.linear_extension();
    let n = order.len();
    let dims = lambda.iter().map(MultiIndex::max_dim).max().unwrap_or(0) as usize;
    let pos: BTreeMap<&MultiIndex, usize> = order.iter().enumerate().map(|(i, s)| (s, i)).collect();
    // Surpluses of the unit data vectors: u_s is a row of the map from node values to surpluses.
    let rows = surpluses(
        |s| {
            let mut e = vec![0.0; n];
            e[pos[s]] = 1.0;
            Ok(e)
        },
        lambda.members(),
        &order,
    )?;
    let xi = leja_points(lambda.max_exponent() as usize + 1)?;
    let axis: Vec<f64> = (0..points_per_axis)
        .map(|i| -1.0 + 2.0 * i as f64 / (points_per_axis - 1) as f64)
        .collect();
    let total = points_per_axis.pow(dims as u32);
    let sup = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let y: Vec<f64> = (0..dims)
                .map(|_| {
                    let v = axis[idx % points_per_axis];
                    idx /= points_per_axis;
                    v
                })
                .collect();
            let mut cardinal = vec![0.0; n];
            for (s, row) in &rows {
                let h = hier_basis_eval(s, &y, &xi);
                for (c, r) in cardinal.iter_mut().zip(row) {
                    *c += h * r;
                }
            }
            cardinal.iter().map(|c| c.abs()).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup.max(1.0))
}

/// Result of [`build_colloc`].
#[derive(Clone, Debug)]
pub struct CollocBuild {
    pub surrogate: Surrogate,
    pub sections: Vec<DownwardClosedSet>,
    pub surpluses: BTreeMap<MultiIndex, SpatialField>,
    pub mass: f64,
    pub t: f64,
    /// `sum_k 2^k |Lambda_k|`.
    pub cost: u128,
}

/// Collective collocation surrogate for budget `n` with the given weight rule.
///
/// Each grid point `xi_s` is solved at level `kappa(s)`, the finest level at which `s` appears.
pub fn build_colloc_with(a: &AffineDiffusion, f: &Profile, n: u64, p: f64, rule: &WeightRule) -> Result<CollocBuild> {
    let mass = lp_mass(rule, p, DEFAULT_MASS_CUT, DEFAULT_ENUMERATION_CAP)?.mass;
    let t = choose_t(n, mass)?;
    let g = build_g(rule, p, t, DEFAULT_ENUMERATION_CAP)?;
    colloc_on_set(a, f, g, mass, t)
}

/// [`build_colloc_with`] using the collocation weight of the model with Lebesgue exponent `q`.
pub fn build_colloc(a: &AffineDiffusion, f: &Profile, n: u64, p: f64, q: f64) -> Result<CollocBuild> {
    let (r, _) = ellipticity_bounds(a, NORM_GRID)?;
    let rule = colloc_weight(a, q, r)?;
    build_colloc_with(a, f, n, p, &rule)
}

/// Collocation on a given collective set.
pub fn colloc_on_set(a: &AffineDiffusion, f: &Profile, g: CollectiveIndexSet, mass: f64, t: f64) -> Result<CollocBuild> {
    let sections = level_sections(&g)
        .into_iter()
        .map(DownwardClosedSet::new)
        .collect::<Result<Vec<_>>>()?;
    let cost: u128 = sections.iter().enumerate().map(|(k, sec)| (1u128 << k) * sec.len() as u128).sum();
    let mut surrogate = Surrogate::new(Basis::HierarchicalLeja, g);
    let Some(lambda0) = sections.first() else {
        return Ok(CollocBuild {
            surrogate,
            sections,
            surpluses: BTreeMap::new(),
            mass,
            t,
            cost,
        });
    };
    let dims = a.dims();
    let xi = leja_points(lambda0.max_exponent() as usize + 1)?;
    let kappa = surrogate.g.kappa_map().clone();
    let sampler = |s: &MultiIndex| -> Result<SpatialField> {
        let y = grid_point(s, dims, &xi);
        fem1d::solve(&a.at(&y), &FluxFunctional::load(f), kappa[s])
    };
    let order = lambda0.linear_extension();
    let surplus = surpluses(sampler, lambda0.members(), &order)?;
    for (s, u) in &surplus {
        for k in 0..=kappa[s] {
            surrogate.insert(k, s.clone(), fem1d::detail(u, k)?);
        }
    }
    Ok(CollocBuild {
        surrogate,
        sections,
        surpluses: surplus,
        mass,
        t,
        cost,
    })
}

/// Writes the sections as lines `k<TAB>s1 s2 ...`.
pub fn write_sections(sections: &[DownwardClosedSet], path: &Path) -> Result<()> {
    let mut out = String::new();
    for (k, sec) in sections.iter().enumerate() {
        let items: Vec<String> = sec.linear_extension().iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("{k}\t{}\n", items.join(" ")));
    }
    std::fs::write(path, out)?;
    Ok(())
}
