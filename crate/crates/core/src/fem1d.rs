//! Piecewise-linear finite elements on dyadic meshes of `(0, 1)`.
//!
//! Level `k` uses `2^k` uniform cells and the `2^k - 1` interior hat functions, so
//! level 0 is the zero space.

use std::borrow::Cow;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Finest level accepted by the solver.
pub const MAX_LEVEL: u32 = 20;

/// Reference level for "exact" solutions.
pub const K_REF: u32 = 13;

const GAUSS_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

pub fn cells(level: u32) -> usize {
    1usize << level
}

pub fn interior_nodes(level: u32) -> usize {
    cells(level) - 1
}

pub fn mesh_width(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOverflow {
            requested: level,
            limit: MAX_LEVEL,
        });
    }
    Ok(())
}

/// A pointwise function on `[0, 1]`.
pub trait SpatialFunction: Sync {
    fn value(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> SpatialFunction for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// A diffusion coefficient seen through its integrals over the cells of a level.
///
/// P1 stiffness entries only depend on these integrals.
pub trait Coefficient: Sync {
    fn cell_integrals(&self, level: u32) -> Cow<'_, [f64]>;
}

/// Integrals of `f` over every cell of `level`, by 3-point Gauss quadrature.
pub fn gauss_cell_integrals(f: &dyn SpatialFunction, level: u32) -> Vec<f64> {
    let n = cells(level);
    let h = mesh_width(level);
    (0..n)
        .map(|c| {
            let mid = (c as f64 + 0.5) * h;
            0.5 * h * GAUSS_NODES
                .iter()
                .zip(GAUSS_WEIGHTS)
                .map(|(&t, w)| w * f.value(mid + 0.5 * h * t))
                .sum::<f64>()
        })
        .collect()
}

/// Cell integrals given directly.
pub struct CellIntegrals(pub Vec<f64>, pub u32);

impl Coefficient for CellIntegrals {
    fn cell_integrals(&self, level: u32) -> Cow<'_, [f64]> {
        assert_eq!(level, self.1, "cell integrals stored for level {}", self.1);
        Cow::Borrowed(&self.0)
    }
}

/// Interior nodal values of a P1 function with zero boundary values.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialField {
    level: u32,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn zeros(level: u32) -> Self {
        Self {
            level,
            values: vec![0.0; interior_nodes(level)],
        }
    }

    pub fn new(level: u32, values: Vec<f64>) -> Result<Self> {
        check_level(level)?;
        if values.len() != interior_nodes(level) {
            return Err(Error::Parse(format!(
                "level {level} needs {} values, got {}",
                interior_nodes(level),
                values.len()
            )));
        }
        Ok(Self { level, values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(level: u32, f: impl Fn(f64) -> f64) -> Self {
        let h = mesh_width(level);
        Self {
            level,
            values: (1..cells(level)).map(|i| f(i as f64 * h)).collect(),
        }
    }

    /// The hat function of interior node `i` (1-based).
    pub fn hat(level: u32, i: usize) -> Self {
        let mut v = Self::zeros(level);
        v.values[i - 1] = 1.0;
        v
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Node coordinates including both boundary points.
    pub fn nodes(&self) -> Vec<f64> {
        let h = mesh_width(self.level);
        (0..=cells(self.level)).map(|i| i as f64 * h).collect()
    }

    /// `self += alpha * other`, both at the same level.
    pub fn axpy(&mut self, alpha: f64, other: &SpatialField) {
        assert_eq!(self.level, other.level, "level mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    /// `self += alpha * other` where `other` may sit on a coarser level.
    pub fn axpy_prolonged(&mut self, alpha: f64, other: &SpatialField) -> Result<()> {
        if other.level == self.level {
            self.axpy(alpha, other);
            return Ok(());
        }
        let up = prolong(other, self.level)?;
        self.axpy(alpha, &up);
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.values {
            *a *= alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn sub(&self, other: &SpatialField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Value at `x` of the piecewise-linear function.
    pub fn eval(&self, x: f64) -> f64 {
        let n = cells(self.level);
        let pos = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let c = (pos.floor() as usize).min(n - 1);
        let t = pos - c as f64;
        let node = |i: usize| if i == 0 || i == n { 0.0 } else { self.values[i - 1] };
        (1.0 - t) * node(c) + t * node(c + 1)
    }

    /// Writes `x,value` rows including the boundary nodes.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,value")?;
        let nodes = self.nodes();
        let last = nodes.len() - 1;
        for (i, x) in nodes.iter().enumerate() {
            let v = if i == 0 || i == last { 0.0 } else { self.values[i - 1] };
            writeln!(out, "{x},{v}")?;
        }
        Ok(())
    }
}

/// `|v|_{H^1} = ||v'||_{L2}`, exact for P1 functions.
pub fn v_norm(v: &SpatialField) -> f64 {
    let h = mesh_width(v.level);
    let n = cells(v.level);
    let node = |i: usize| if i == 0 || i == n { 0.0 } else { v.values[i - 1] };
    let sum: f64 = (0..n).map(|c| (node(c + 1) - node(c)).powi(2)).sum();
    (sum / h).sqrt()
}

/// `||v||_{L2}`, exact for P1 functions.
pub fn l2_norm(v: &SpatialField) -> f64 {
    let h = mesh_width(v.level);
    let n = cells(v.level);
    let node = |i: usize| if i == 0 || i == n { 0.0 } else { v.values[i - 1] };
    let sum: f64 = (0..n)
        .map(|c| {
            let (a, b) = (node(c), node(c + 1));
            a * a + a * b + b * b
        })
        .sum();
    (sum * h / 3.0).sqrt()
}

/// `(u', v')_{L2}`.
pub fn v_inner(u: &SpatialField, v: &SpatialField) -> f64 {
    assert_eq!(u.level, v.level, "level mismatch");
    let h = mesh_width(u.level);
    let n = cells(u.level);
    let node = |w: &SpatialField, i: usize| if i == 0 || i == n { 0.0 } else { w.values[i - 1] };
    (0..n)
        .map(|c| (node(u, c + 1) - node(u, c)) * (node(v, c + 1) - node(v, c)))
        .sum::<f64>()
        / h
}

fn prolong_once(values: &[f64]) -> Vec<f64> {
    let n = values.len() + 1;
    let at = |i: usize| if i == 0 || i == n { 0.0 } else { values[i - 1] };
    let mut out = Vec::with_capacity(2 * n - 1);
    for i in 1..2 * n {
        out.push(if i % 2 == 0 {
            at(i / 2)
        } else {
            0.5 * (at(i / 2) + at(i / 2 + 1))
        });
    }
    out
}

fn restrict_once(values: &[f64]) -> Vec<f64> {
    let n = (values.len() + 1) / 2;
    let at = |i: usize| if i == 0 || i == 2 * n { 0.0 } else { values[i - 1] };
    (1..n).map(|i| at(2 * i) + 0.5 * (at(2 * i - 1) + at(2 * i + 1))).collect()
}

/// Represents `v` on the finer level `k` (exact, the spaces are nested).
pub fn prolong(v: &SpatialField, k: u32) -> Result<SpatialField> {
    check_level(k)?;
    if k < v.level {
        return Err(Error::LevelOverflow {
            requested: k,
            limit: v.level,
        });
    }
    let mut values = v.values.clone();
    for _ in v.level..k {
        values = prolong_once(&values);
    }
    Ok(SpatialField { level: k, values })
}

/// Transpose of prolongation: maps a fine load vector to the coarse load vector.
pub fn restrict_load(load: &[f64], from: u32, to: u32) -> Vec<f64> {
    assert!(to <= from);
    let mut values = load.to_vec();
    for _ in to..from {
        values = restrict_once(&values);
    }
    values
}

/// Ritz projection onto level `k`.
///
/// In one dimension the `H^1_0`-orthogonal projection onto P1 functions is nodal
/// interpolation, so this is injection of the coarse nodes.
pub fn project(v: &SpatialField, k: u32) -> Result<SpatialField> {
    if k > v.level {
        return Err(Error::LevelOverflow {
            requested: k,
            limit: v.level,
        });
    }
    let stride = 1usize << (v.level - k);
    let values = (1..cells(k)).map(|i| v.values[i * stride - 1]).collect();
    Ok(SpatialField { level: k, values })
}

/// `delta_k(v) = P_k v - P_{k-1} v` at level `k`; `delta_0 = P_0 v = 0`.
pub fn detail(v: &SpatialField, k: u32) -> Result<SpatialField> {
    let pk = project(v, k)?;
    if k == 0 {
        return Ok(pk);
    }
    let coarse = prolong(&project(v, k - 1)?, k)?;
    Ok(pk.sub(&coarse))
}

/// `K v` for the stiffness matrix built from the given cell integrals.
pub fn apply_stiffness(cell_int: &[f64], v: &[f64], level: u32) -> Vec<f64> {
    let n = cells(level);
    debug_assert_eq!(cell_int.len(), n);
    debug_assert_eq!(v.len(), n - 1);
    let h2 = mesh_width(level).powi(2);
    let at = |i: usize| if i == 0 || i == n { 0.0 } else { v[i - 1] };
    (1..n)
        .map(|i| (cell_int[i - 1] * (at(i) - at(i - 1)) + cell_int[i] * (at(i) - at(i + 1))) / h2)
        .collect()
}

/// `int psi field' phi_i'` for every hat `phi_i` of `level`, whatever the level of `field`.
pub fn stiffness_action(psi: &dyn Coefficient, field: &SpatialField, level: u32) -> Result<Vec<f64>> {
    check_level(level)?;
    if field.level <= level {
        let up = prolong(field, level)?;
        Ok(apply_stiffness(&psi.cell_integrals(level), &up.values, level))
    } else {
        let fine = apply_stiffness(&psi.cell_integrals(field.level), &field.values, field.level);
        Ok(restrict_load(&fine, field.level, level))
    }
}

/// Solves `K u = rhs` for the stiffness matrix of the given cell integrals (Thomas algorithm).
pub fn solve_tridiagonal(cell_int: &[f64], rhs: &[f64], level: u32) -> Result<Vec<f64>> {
    let n = cells(level);
    let m = n - 1;
    if m == 0 {
        return Ok(Vec::new());
    }
    if let Some(c) = cell_int.iter().position(|&c| !(c > 0.0)) {
        return Err(Error::SingularSystem(format!(
            "nonpositive coefficient integral {} on cell {c} at level {level}",
            cell_int[c]
        )));
    }
    let h2 = mesh_width(level).powi(2);
    let diag = |i: usize| (cell_int[i - 1] + cell_int[i]) / h2;
    let off = |i: usize| -cell_int[i] / h2;
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    let mut denom = diag(1);
    cp[0] = off(1) / denom;
    dp[0] = rhs[0] / denom;
    for i in 2..=m {
        denom = diag(i) - off(i - 1) * cp[i - 2];
        if !(denom > 0.0) {
            return Err(Error::SingularSystem(format!("pivot {denom} at row {i}")));
        }
        cp[i - 1] = off(i) / denom;
        dp[i - 1] = (rhs[i - 1] - off(i - 1) * dp[i - 2]) / denom;
    }
    let mut x = dp;
    for i in (0..m - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Right-hand side `v -> int f v - sum_i w_i int psi_i u_i' v'`.
#[derive(Default)]
pub struct FluxFunctional<'a> {
    pub load: Option<&'a dyn SpatialFunction>,
    pub terms: Vec<(f64, &'a dyn Coefficient, &'a SpatialField)>,
}

impl<'a> FluxFunctional<'a> {
    pub fn load(f: &'a dyn SpatialFunction) -> Self {
        Self {
            load: Some(f),
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, weight: f64, psi: &'a dyn Coefficient, field: &'a SpatialField) -> Self {
        self.terms.push((weight, psi, field));
        self
    }

    /// The functional tested against every hat function of `level`.
    ///
    /// Fields finer than `level` are applied on their own level and restricted,
    /// which is exact because coarse hats are combinations of fine ones.
    pub fn assemble(&self, level: u32) -> Result<Vec<f64>> {
        check_level(level)?;
        let mut rhs = match self.load {
            Some(f) => load_vector(f, level),
            None => vec![0.0; interior_nodes(level)],
        };
        for &(w, psi, field) in &self.terms {
            let contrib = stiffness_action(psi, field, level)?;
            for (r, c) in rhs.iter_mut().zip(contrib) {
                *r -= w * c;
            }
        }
        Ok(rhs)
    }
}

/// `int f phi_i` for every interior hat, by 3-point Gauss on each cell.
pub fn load_vector(f: &dyn SpatialFunction, level: u32) -> Vec<f64> {
    let n = cells(level);
    let h = mesh_width(level);
    let mut out = vec![0.0; n - 1];
    for c in 0..n {
        let x0 = c as f64 * h;
        let (mut left, mut right) = (0.0, 0.0);
        for (&t, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            let s = 0.5 * (t + 1.0);
            let fx = w * f.value(x0 + s * h) * 0.5 * h;
            left += fx * (1.0 - s);
            right += fx * s;
        }
        if c >= 1 {
            out[c - 1] += left;
        }
        if c + 1 < n {
            out[c] += right;
        }
    }
    out
}

/// Galerkin solution of `-(a0 u')' = rhs` in the level-`k` space.
pub fn solve(a0: &dyn Coefficient, rhs: &FluxFunctional, k: u32) -> Result<SpatialField> {
    check_level(k)?;
    if k == 0 {
        return Ok(SpatialField::zeros(0));
    }
    let b = rhs.assemble(k)?;
    let c = a0.cell_integrals(k);
    let x = solve_tridiagonal(&c, &b, k)?;
    let kx = apply_stiffness(&c, &x, k);
    let norm_inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let h2 = mesh_width(k).powi(2);
    let k_norm = (0..cells(k) - 1).map(|i| 2.0 * (c[i] + c[i + 1]) / h2).fold(0.0, f64::max);
    let resid: Vec<f64> = kx.iter().zip(&b).map(|(a, b)| a - b).collect();
    let scale = k_norm * norm_inf(&x) + norm_inf(&b);
    if scale > 0.0 && norm_inf(&resid) > 1e-12 * scale {
        return Err(Error::SingularSystem(format!(
            "solve residual {:e} relative to {scale:e}",
            norm_inf(&resid)
        )));
    }
    SpatialField::new(k, x)
}
