//! Legendre expansions under the uniform measure, the collective operator with
//! Legendre parametric basis and the coupled stochastic Galerkin solve.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diffusion::{lp_mass, regularity_constants, superposed_weight, AffineDiffusion, Profile, DEFAULT_MASS_CUT};
use crate::error::{Error, Result};
use crate::fem1d::{self, solve_tridiagonal, stiffness_action, v_inner, FluxFunctional, SpatialField};
use crate::multiindex::{build_g, choose_t, CollectiveIndexSet, DownwardClosedSet, MultiIndex, DEFAULT_ENUMERATION_CAP};
use crate::surrogate::{Basis, Surrogate};

/// Highest degree [`legendre_eval`] accepts.
pub const MAX_DEGREE: u32 = 64;

/// Most active dimensions [`legendre_coeffs`] integrates over.
pub const MAX_QUAD_DIMS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `P_n(1) = 1`.
    SupNormalized,
    /// `L_n = sqrt(2n + 1) P_n`, orthonormal for `dy / 2`.
    Orthonormal,
}

/// `P_n(y)` or `L_n(y)` by the three-term recurrence.
pub fn legendre_eval(n: u32, y: f64, norm: Normalization) -> Result<f64> {
    if !(y.abs() <= 1.0) {
        return Err(Error::DomainViolation(format!("Legendre argument {y} outside [-1, 1]")));
    }
    if n > MAX_DEGREE {
        return Err(Error::DomainViolation(format!("Legendre degree {n} above {MAX_DEGREE}")));
    }
    let (mut prev, mut cur) = (1.0, y);
    let p = if n == 0 {
        1.0
    } else {
        for m in 1..n {
            let m = m as f64;
            let next = ((2.0 * m + 1.0) * y * cur - m * prev) / (m + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    Ok(match norm {
        Normalization::SupNormalized => p,
        Normalization::Orthonormal => (2.0 * n as f64 + 1.0).sqrt() * p,
    })
}

/// `L_s(y) = prod_j L_{s_j}(y_j)`; missing coordinates are zero.
pub fn legendre_multi(s: &MultiIndex, y: &[f64]) -> Result<f64> {
    s.entries().iter().try_fold(1.0, |acc, &(j, e)| {
        Ok(acc * legendre_eval(e, y.get(j as usize - 1).copied().unwrap_or(0.0), Normalization::Orthonormal)?)
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`; the weights sum to 2.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..m {
                let k = k as f64;
                let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[m - 1 - i] = -x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// `<y L_n, L_{n+1}> = (n + 1) / sqrt((2n + 1)(2n + 3))` under `dy / 2`.
pub fn coupling(n: u32) -> f64 {
    let n = n as f64;
    (n + 1.0) / ((2.0 * n + 1.0) * (2.0 * n + 3.0)).sqrt()
}

/// `prod_j (2 s_j + 1)^{1/2}`, the factor taking `v_s` to `u_s`.
pub fn v_to_u_factor(s: &MultiIndex) -> f64 {
    s.entries().iter().map(|&(_, e)| (2.0 * e as f64 + 1.0).sqrt()).product()
}

/// Coefficient of `P_s` from the coefficient of `L_s`.
pub fn u_from_v(s: &MultiIndex, v: &SpatialField) -> SpatialField {
    v.scaled(v_to_u_factor(s))
}

/// Coefficient of `L_s` from the coefficient of `P_s`.
pub fn v_from_u(s: &MultiIndex, u: &SpatialField) -> SpatialField {
    u.scaled(1.0 / v_to_u_factor(s))
}

/// `v_s = <u, L_s>` by tensor Gauss quadrature over the active dimensions of `lambda`.
///
/// Inactive coordinates are held at zero. All samples must share one level.
pub fn legendre_coeffs(
    sampler: impl Fn(&[f64]) -> Result<SpatialField> + Sync,
    lambda: &DownwardClosedSet,
    quad_order: usize,
) -> Result<BTreeMap<MultiIndex, SpatialField>> {
    let active = lambda.active_dims();
    if active.len() > MAX_QUAD_DIMS {
        return Err(Error::QuadBudgetExceeded {
            dims: active.len(),
            cap: MAX_QUAD_DIMS,
        });
    }
    let need = lambda.max_exponent() as usize + 2;
    if quad_order < need {
        return Err(Error::Config(format!("quadrature order {quad_order} below {need}")));
    }
    let dims = active.iter().copied().max().unwrap_or(0) as usize;
    let (nodes, weights) = gauss_legendre(quad_order);
    let total = quad_order.pow(active.len() as u32);
    let members: Vec<&MultiIndex> = lambda.iter().collect();
    let point = |mut idx: usize| -> (Vec<f64>, f64) {
        let mut y = vec![0.0; dims];
        let mut w = 1.0;
        for &j in &active {
            let q = idx % quad_order;
            idx /= quad_order;
            y[j as usize - 1] = nodes[q];
            w *= 0.5 * weights[q];
        }
        (y, w)
    };
    let partial = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (y, w) = point(idx);
            let u = sampler(&y)?;
            members
                .iter()
                .map(|s| Ok(u.scaled(w * legendre_multi(s, &y)?)))
                .collect::<Result<Vec<SpatialField>>>()
        })
        .try_reduce_with(|mut acc, next| {
            for (a, b) in acc.iter_mut().zip(&next) {
                a.axpy(1.0, b);
            }
            Ok(acc)
        })
        .transpose()?
        .unwrap_or_default();
    Ok(members.into_iter().cloned().zip(partial).collect())
}

/// Which decay sequence drives the Legendre index set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Uniform error, weight over `b`.
    Linf,
    /// Mean-square error, weight over `d = b / sqrt(3)`.
    L2,
}

/// The superposed weight for `variant` on model `a`.
pub fn variant_weight(a: &AffineDiffusion, f: &Profile, variant: Variant) -> Result<crate::diffusion::WeightRule> {
    let c = regularity_constants(a, f.l2_norm())?;
    Ok(superposed_weight(match variant {
        Variant::Linf => &c.b,
        Variant::L2 => &c.d,
    }))
}

/// Collective set `G(T_n)` for a Legendre variant.
pub fn legendre_index_set(a: &AffineDiffusion, f: &Profile, n: u64, p: f64, variant: Variant) -> Result<CollectiveIndexSet> {
    let rule = variant_weight(a, f, variant)?;
    let mass = lp_mass(&rule, p, DEFAULT_MASS_CUT, DEFAULT_ENUMERATION_CAP)?.mass;
    let t = choose_t(n, mass)?;
    build_g(&rule, p, t, DEFAULT_ENUMERATION_CAP)
}

/// Collective Legendre surrogate from quadrature coefficients.
///
/// Coefficients are computed once on the finest level of `G` and split into details.
pub fn build_sl(a: &AffineDiffusion, f: &Profile, n: u64, p: f64, variant: Variant, extra_order: usize) -> Result<Surrogate> {
    let g = legendre_index_set(a, f, n, p, variant)?;
    surrogate_from_quadrature(a, f, g, extra_order)
}

/// Fills the details of `g` with quadrature coefficients of order `max exponent + 2 + extra_order`.
pub fn surrogate_from_quadrature(a: &AffineDiffusion, f: &Profile, g: CollectiveIndexSet, extra_order: usize) -> Result<Surrogate> {
    let mut surrogate = Surrogate::new(Basis::Legendre, g);
    let Some(top) = surrogate.g.max_level() else {
        return Ok(surrogate);
    };
    let lambda = DownwardClosedSet::closure(surrogate.g.indices().cloned());
    let order = lambda.max_exponent() as usize + 2 + extra_order;
    let coeffs = legendre_coeffs(|y| fem1d::solve(&a.at(y), &FluxFunctional::load(f), top), &lambda, order)?;
    let kappa = surrogate.g.kappa_map().clone();
    for (s, k) in kappa {
        for level in 0..=k {
            surrogate.insert(level, s.clone(), fem1d::detail(&coeffs[&s], level)?);
        }
    }
    Ok(surrogate)
}

/// Outcome of [`stochastic_galerkin_solve`].
#[derive(Clone, Debug)]
pub struct GalerkinSolution {
    pub surrogate: Surrogate,
    /// `v_s` on level `kappa(s)`.
    pub coefficients: BTreeMap<MultiIndex, SpatialField>,
    pub iterations: usize,
    /// Relative residual after each iteration, starting with the initial one.
    pub residuals: Vec<f64>,
}

impl GalerkinSolution {
    /// Writes `iteration,residual` rows.
    pub fn write_log(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "iteration,residual")?;
        for (i, r) in self.residuals.iter().enumerate() {
            writeln!(out, "{i},{r:e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Block operator of the Galerkin system on `V^L(G)`.
pub struct GalerkinSystem<'a> {
    model: &'a AffineDiffusion,
    index: Vec<(MultiIndex, u32)>,
    /// For each block, `(neighbour, j, factor)`.
    neighbours: Vec<Vec<(usize, usize, f64)>>,
}

impl<'a> GalerkinSystem<'a> {
    pub fn new(model: &'a AffineDiffusion, g: &CollectiveIndexSet) -> Self {
        let index: Vec<(MultiIndex, u32)> = g.kappa_map().iter().map(|(s, &k)| (s.clone(), k)).collect();
        let pos: BTreeMap<&MultiIndex, usize> = index.iter().enumerate().map(|(i, (s, _))| (s, i)).collect();
        let neighbours = index
            .iter()
            .map(|(s, _)| {
                let mut out = Vec::new();
                for j in 1..=model.dims() as u32 {
                    let e = s.get(j);
                    if let Some(&i) = pos.get(&s.add_unit(j)) {
                        out.push((i, j as usize - 1, coupling(e)));
                    }
                    if let Some(down) = s.sub_unit(j) {
                        if let Some(&i) = pos.get(&down) {
                            out.push((i, j as usize - 1, coupling(e - 1)));
                        }
                    }
                }
                out
            })
            .collect();
        Self { model, index, neighbours }
    }

    pub fn blocks(&self) -> &[(MultiIndex, u32)] {
        &self.index
    }

    pub fn zeros(&self) -> Vec<SpatialField> {
        self.index.iter().map(|&(_, k)| SpatialField::zeros(k)).collect()
    }

    /// `B(x, phi L_s)` for every hat `phi` of level `kappa(s)`, block by block.
    pub fn apply(&self, x: &[SpatialField]) -> Result<Vec<SpatialField>> {
        self.index
            .par_iter()
            .enumerate()
            .map(|(i, &(_, k))| {
                let mut out = stiffness_action(&self.model.abar, &x[i], k)?;
                for &(n, j, c) in &self.neighbours[i] {
                    let part = stiffness_action(&self.model.psis[j], &x[n], k)?;
                    for (o, p) in out.iter_mut().zip(part) {
                        *o += c * p;
                    }
                }
                SpatialField::new(k, out)
            })
            .collect()
    }

    /// `F(phi L_s) = int f phi` for `s = 0` and zero otherwise.
    pub fn rhs(&self, f: &Profile) -> Vec<SpatialField> {
        self.index
            .iter()
            .map(|(s, k)| {
                if s.is_zero() {
                    SpatialField::new(*k, fem1d::load_vector(f, *k)).expect("load length")
                } else {
                    SpatialField::zeros(*k)
                }
            })
            .collect()
    }

    fn precondition(&self, r: &[SpatialField]) -> Result<Vec<SpatialField>> {
        self.index
            .par_iter()
            .zip(r)
            .map(|(&(_, k), ri)| {
                if k == 0 {
                    return Ok(SpatialField::zeros(0));
                }
                let c = self.model.abar.integrals(k);
                SpatialField::new(k, solve_tridiagonal(c, ri.values(), k)?)
            })
            .collect()
    }
}

fn dot(a: &[SpatialField], b: &[SpatialField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.values().iter().zip(y.values()).map(|(p, q)| p * q).sum::<f64>()).sum()
}

fn axpy(y: &mut [SpatialField], alpha: f64, x: &[SpatialField]) {
    for (a, b) in y.iter_mut().zip(x) {
        a.axpy(alpha, b);
    }
}

/// Tolerance on the relative residual of the Galerkin CG iteration.
pub const GALERKIN_TOL: f64 = 1e-10;

/// Most CG iterations before [`Error::IterationLimit`].
pub const GALERKIN_MAX_ITER: usize = 2000;

/// Solves `B(u_G, v) = F(v)` on `V^L(G)` by block-Jacobi preconditioned CG.
pub fn stochastic_galerkin_solve(a: &AffineDiffusion, f: &Profile, g: &CollectiveIndexSet) -> Result<GalerkinSolution> {
    let system = GalerkinSystem::new(a, g);
    let b = system.rhs(f);
    let b_norm = dot(&b, &b).sqrt();
    let mut x = system.zeros();
    let mut residuals = vec![if b_norm > 0.0 { 1.0 } else { 0.0 }];
    let mut iterations = 0;
    if b_norm > 0.0 {
        let mut r = b.clone();
        let mut z = system.precondition(&r)?;
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        loop {
            let ad = system.apply(&d)?;
            let dad = dot(&d, &ad);
            if !(dad > 0.0) {
                return Err(Error::SingularSystem(format!("Galerkin curvature {dad} at iteration {iterations}")));
            }
            let alpha = rz / dad;
            axpy(&mut x, alpha, &d);
            axpy(&mut r, -alpha, &ad);
            iterations += 1;
            let rel = dot(&r, &r).sqrt() / b_norm;
            residuals.push(rel);
            if rel <= GALERKIN_TOL {
                break;
            }
            if iterations >= GALERKIN_MAX_ITER {
                return Err(Error::IterationLimit {
                    iterations,
                    residual: rel,
                });
            }
            z = system.precondition(&r)?;
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (di, zi) in d.iter_mut().zip(&z) {
                di.scale(beta);
                di.axpy(1.0, zi);
            }
        }
    }
    let mut surrogate = Surrogate::new(Basis::Legendre, g.clone());
    let mut coefficients = BTreeMap::new();
    for ((s, k), v) in system.blocks().iter().zip(x) {
        for level in 0..=*k {
            surrogate.insert(level, s.clone(), fem1d::detail(&v, level)?);
        }
        coefficients.insert(s.clone(), v);
    }
    Ok(GalerkinSolution {
        surrogate,
        coefficients,
        iterations,
        residuals,
    })
}

/// Relative gap between the Monte-Carlo mean of `||S(y)||_V^2` and `sum_s ||c_s||_V^2`.
pub fn parseval_check(surrogate: &Surrogate, draws: usize, seed: u64) -> Result<f64> {
    let coeff_sum: f64 = surrogate
        .g
        .indices()
        .filter_map(|s| surrogate.coefficient(s))
        .map(|c| v_inner(&c, &c))
        .sum();
    let dims = surrogate.g.max_dim() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<Vec<f64>> = (0..draws).map(|_| (0..dims).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    let norms = ys
        .par_iter()
        .map(|y| surrogate.evaluate(y).map(|u| v_inner(&u, &u)))
        .collect::<Result<Vec<f64>>>()?;
    let mc = norms.iter().sum::<f64>() / draws as f64;
    if coeff_sum == 0.0 {
        return Ok(mc.abs());
    }
    Ok((mc - coeff_sum).abs() / coeff_sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(text: &str) -> MultiIndex {
        text.parse().unwrap()
    }

    #[test]
    fn low_degrees() {
        assert_eq!(legendre_eval(0, 0.3, Normalization::SupNormalized).unwrap(), 1.0);
        assert_eq!(legendre_eval(0, 0.3, Normalization::Orthonormal).unwrap(), 1.0);
        assert_eq!(legendre_eval(1, 1.0, Normalization::SupNormalized).unwrap(), 1.0);
        assert!((legendre_eval(1, 0.4, Normalization::Orthonormal).unwrap() - 3f64.sqrt() * 0.4).abs() < 1e-15);
        let y = 0.7f64;
        assert!((legendre_eval(3, y, Normalization::SupNormalized).unwrap() - 0.5 * (5.0 * y.powi(3) - 3.0 * y)).abs() < 1e-15);
        assert!(matches!(legendre_eval(2, 1.5, Normalization::Orthonormal), Err(Error::DomainViolation(_))));
        assert!(matches!(legendre_eval(65, 0.0, Normalization::Orthonormal), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn sup_norm_is_one() {
        for n in 0..=20 {
            let sup = (0..=2000)
                .map(|i| legendre_eval(n, -1.0 + i as f64 / 1000.0, Normalization::SupNormalized).unwrap().abs())
                .fold(0.0, f64::max);
            assert!((sup - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_rule() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let exact = [(0.0, 2.0), (2.0, 2.0 / 3.0), (4.0, 0.4), (8.0, 2.0 / 9.0)];
        for (p, v) in exact {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powf(p)).sum();
            assert!((q - v).abs() < 1e-14);
        }
        let (x1, w1) = gauss_legendre(1);
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    #[test]
    fn orthonormal_under_half_measure() {
        let (x, w) = gauss_legendre(32);
        for m in 0..=20 {
            for n in 0..=20 {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&y, &w)| {
                        0.5 * w
                            * legendre_eval(m, y, Normalization::Orthonormal).unwrap()
                            * legendre_eval(n, y, Normalization::Orthonormal).unwrap()
                    })
                    .sum();
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((q - want).abs() < 1e-12, "{m} {n} {q}");
            }
        }
    }

    #[test]
    fn coupling_factors() {
        assert!((coupling(0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let (x, w) = gauss_legendre(20);
        for n in 0..8 {
            let q: f64 = x
                .iter()
                .zip(&w)
                .map(|(&y, &w)| {
                    0.5 * w
                        * y
                        * legendre_eval(n, y, Normalization::Orthonormal).unwrap()
                        * legendre_eval(n + 1, y, Normalization::Orthonormal).unwrap()
                })
                .sum();
            assert!((q - coupling(n)).abs() < 1e-14);
        }
    }

    #[test]
    fn u_v_round_trip() {
        let field = SpatialField::interpolate(3, |x| x.sin());
        let s = mi("1:2,4:3");
        assert!((v_to_u_factor(&s) - (5f64 * 7.0).sqrt()).abs() < 1e-14);
        let back = v_from_u(&s, &u_from_v(&s, &field));
        for (a, b) in back.values().iter().zip(field.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn quadrature_coefficients() {
        let w = SpatialField::interpolate(3, |x| x * (1.0 - x));
        let lambda = DownwardClosedSet::closure([mi("1:2,2:1")]);
        let constant = legendre_coeffs(|_| Ok(w.clone()), &lambda, 5).unwrap();
        for (s, v) in &constant {
            let scale = if s.is_zero() { 1.0 } else { 0.0 };
            for (a, b) in v.values().iter().zip(w.values()) {
                assert!((a - scale * b).abs() < 1e-12);
            }
        }
        let affine = legendre_coeffs(|y| Ok(w.scaled(1.0 + 0.5 * y[0])), &lambda, 5).unwrap();
        let v1 = &affine[&mi("1:1")];
        for (a, b) in v1.values().iter().zip(w.values()) {
            assert!((a - 0.5 / 3f64.sqrt() * b).abs() < 1e-12);
        }
        let wide = DownwardClosedSet::closure((1..=5).map(MultiIndex::unit));
        assert!(matches!(legendre_coeffs(|_| Ok(w.clone()), &wide, 3), Err(Error::QuadBudgetExceeded { dims: 5, cap: 4 })));
        assert!(legendre_coeffs(|_| Ok(w.clone()), &lambda, 2).is_err());
    }

    #[test]
    fn single_block_galerkin_is_plain_solve() {
        let a = AffineDiffusion::new(Profile::Constant(1.0), vec![]);
        let g = CollectiveIndexSet::from_pairs((0..=5).map(|k| (k, MultiIndex::zero())), 1.0, 1.0, "custom").unwrap();
        let f = Profile::Constant(1.0);
        let sol = stochastic_galerkin_solve(&a, &f, &g).unwrap();
        let plain = fem1d::solve(&a.abar, &FluxFunctional::load(&f), 5).unwrap();
        let got = &sol.coefficients[&MultiIndex::zero()];
        for (x, y) in got.values().iter().zip(plain.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(*sol.residuals.last().unwrap() <= GALERKIN_TOL);
    }

    #[test]
    fn galerkin_system_symmetric() {
        let a = AffineDiffusion::new(Profile::Constant(1.0), vec![Profile::Sine { amplitude: 0.3, frequency: 1.0 }, Profile::Constant(0.2)]);
        let g = CollectiveIndexSet::from_pairs(
            [(0, "0"), (1, "0"), (2, "0"), (3, "0"), (0, "1:1"), (1, "1:1"), (2, "1:1"), (0, "2:1"), (1, "2:1"), (0, "1:2")]
                .into_iter()
                .map(|(k, s)| (k, mi(s))),
            1.0,
            1.0,
            "custom",
        )
        .unwrap();
        let sys = GalerkinSystem::new(&a, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut random = || -> Vec<SpatialField> {
            sys.blocks()
                .iter()
                .map(|&(_, k)| SpatialField::new(k, (0..fem1d::interior_nodes(k)).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
                .collect()
        };
        let (u, v) = (random(), random());
        let (au, av) = (sys.apply(&u).unwrap(), sys.apply(&v).unwrap());
        let (x, y) = (dot(&au, &v), dot(&u, &av));
        assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        assert!(dot(&au, &u) > 0.0);
    }

    #[test]
    fn galerkin_log_written() {
        let a = AffineDiffusion::new(Profile::Constant(1.0), vec![Profile::Constant(0.4)]);
        let g = CollectiveIndexSet::from_pairs(
            (0..4u32).flat_map(|e| (0..=3).map(move |k| (k, MultiIndex::from_dense(&[e])))),
            1.0,
            1.0,
            "custom",
        )
        .unwrap();
        let sol = stochastic_galerkin_solve(&a, &Profile::Constant(1.0), &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cg.csv");
        sol.write_log(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("iteration,residual\n0,"));
        assert_eq!(text.lines().count(), sol.iterations + 2);
    }

    #[test]
    fn parseval_single_term_exact() {
        let g = CollectiveIndexSet::from_pairs([(0, MultiIndex::zero()), (1, MultiIndex::zero()), (2, MultiIndex::zero())], 1.0, 1.0, "custom").unwrap();
        let mut s = Surrogate::new(Basis::Legendre, g);
        let w = SpatialField::interpolate(2, |x| x * (1.0 - x));
        for k in 0..=2 {
            s.insert(k, MultiIndex::zero(), fem1d::detail(&w, k).unwrap());
        }
        assert!(parseval_check(&s, 1000, 1).unwrap() < 1e-12);
    }
}
