//! Reference solutions, error estimators, the finite-difference Taylor oracle and rate fitting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{AffineDiffusion, Profile};
use crate::error::{Error, Result};
use crate::fem1d::{self, v_norm, FluxFunctional, SpatialField, K_REF};
use crate::multiindex::{build_g, MultiIndex, Weight};
use crate::surrogate::Surrogate;

/// Galerkin solve at `level` for the coefficient `a(y)`.
pub fn reference_at(a: &AffineDiffusion, f: &Profile, y: &[f64], level: u32) -> Result<SpatialField> {
    if let Some(v) = y.iter().find(|v| !(v.abs() <= 1.0)) {
        return Err(Error::DomainViolation(format!("parameter {v} outside [-1, 1]")));
    }
    fem1d::solve(&a.at(y), &FluxFunctional::load(f), level)
}

/// Reference solution on level [`K_REF`].
pub fn reference_solution(a: &AffineDiffusion, f: &Profile, y: &[f64]) -> Result<SpatialField> {
    reference_at(a, f, y, K_REF)
}

/// `|u - w|_V` after lifting both fields to the finer of their levels.
pub fn v_distance(u: &SpatialField, w: &SpatialField) -> Result<f64> {
    let top = u.level().max(w.level());
    Ok(v_norm(&fem1d::prolong(u, top)?.sub(&fem1d::prolong(w, top)?)))
}

/// Fixed-seed sample of parameter points for the uniform error.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerSpec {
    pub uniform: usize,
    pub seed: u64,
    /// Level of the reference solves.
    pub level: u32,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            uniform: 128,
            seed: DEFAULT_SEED,
            level: K_REF,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20240611;

impl SamplerSpec {
    /// `2^min(J, 6)` sign corners followed by the uniform draws.
    ///
    /// For `J > 6` coordinate `j` takes its sign from bit `j mod 6` of the corner number.
    pub fn points(&self, dims: usize) -> Vec<Vec<f64>> {
        let bits = dims.min(6);
        let mut out: Vec<Vec<f64>> = (0..1usize << bits)
            .map(|c| (0..dims).map(|j| if c >> (j % 6) & 1 == 1 { -1.0 } else { 1.0 }).collect())
            .collect();
        if dims == 0 {
            out = vec![Vec::new()];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        out.extend((0..self.uniform).map(|_| (0..dims).map(|_| rng.gen_range(-1.0..=1.0)).collect::<Vec<f64>>()));
        out
    }
}

/// Uniform error of one surrogate: the largest sampled distance and where it occurs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinfError {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// `max_y |u(y) - S(y)|_V` over the sampler points for several surrogates sharing references.
pub fn error_linf(surrogates: &[&Surrogate], a: &AffineDiffusion, f: &Profile, spec: &SamplerSpec) -> Result<Vec<LinfError>> {
    let points = spec.points(a.dims());
    let dists = distances(surrogates, a, f, &points, spec.level)?;
    Ok((0..surrogates.len())
        .map(|m| {
            let (i, value) = dists
                .iter()
                .map(|row| row[m])
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
            LinfError {
                value,
                argmax: points[i].clone(),
            }
        })
        .collect())
}

/// Distances `|u(y) - S_m(y)|_V`, one row per point.
fn distances(surrogates: &[&Surrogate], a: &AffineDiffusion, f: &Profile, points: &[Vec<f64>], level: u32) -> Result<Vec<Vec<f64>>> {
    points
        .par_iter()
        .map(|y| {
            let reference = reference_at(a, f, y, level)?;
            surrogates.iter().map(|s| v_distance(&reference, &s.evaluate(y)?)).collect()
        })
        .collect()
}

/// Mean-square error estimate with its standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct L2Error {
    pub value: f64,
    pub stderr: f64,
}

/// Batches used for the standard error of [`error_l2mu`].
pub const BATCHES: usize = 20;

/// `(E |u(y) - S(y)|_V^2)^{1/2}` by Monte Carlo over `draws` uniform points.
///
/// The standard error comes from batch means of the squared error, carried
/// through the square root to first order.
pub fn error_l2mu(surrogates: &[&Surrogate], a: &AffineDiffusion, f: &Profile, draws: usize, seed: u64, level: u32) -> Result<Vec<L2Error>> {
    if draws < BATCHES {
        return Err(Error::Config(format!("need at least {BATCHES} draws, got {draws}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..draws).map(|_| (0..a.dims()).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
    let dists = distances(surrogates, a, f, &points, level)?;
    Ok((0..surrogates.len())
        .map(|m| {
            let sq: Vec<f64> = dists.iter().map(|row| row[m] * row[m]).collect();
            mean_with_stderr(&sq)
        })
        .map(|(mean, se)| {
            let value = mean.sqrt();
            let stderr = if value > 0.0 { se / (2.0 * value) } else { se.sqrt() };
            L2Error { value, stderr }
        })
        .collect())
}

/// Mean and batch-means standard error.
pub fn mean_with_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let size = n / BATCHES;
    if size == 0 {
        return (mean, f64::INFINITY);
    }
    let batch: Vec<f64> = xs.chunks(size).take(BATCHES).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let bm = batch.iter().sum::<f64>() / batch.len() as f64;
    let var = batch.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (batch.len() - 1) as f64;
    (mean, (var / batch.len() as f64).sqrt())
}

/// Default step of [`fd_taylor_oracle`].
pub const FD_STEP: f64 = 1e-3;

/// Central stencil `(offsets, weights)` for the `e`-th derivative with `O(h^2)` error, in units of `h`.
fn stencil(e: u32) -> Vec<(f64, f64)> {
    match e {
        0 => vec![(0.0, 1.0)],
        1 => vec![(-1.0, -0.5), (1.0, 0.5)],
        2 => vec![(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        _ => vec![(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
    }
}

/// `d^s u(0) / s!` by tensorized central differences with one Richardson step.
pub fn fd_taylor_oracle(a: &AffineDiffusion, f: &Profile, s: &MultiIndex, level: u32, h: f64) -> Result<SpatialField> {
    if s.order() > 3 {
        return Err(Error::DomainViolation(format!("finite-difference oracle limited to |s| <= 3, got {s}")));
    }
    if s.is_zero() {
        return reference_at(a, f, &[], level);
    }
    let dims = a.dims().max(s.max_dim() as usize);
    let diff = |h: f64| -> Result<SpatialField> {
        let axes: Vec<(usize, Vec<(f64, f64)>)> = s.entries().iter().map(|&(j, e)| (j as usize - 1, stencil(e))).collect();
        let mut terms: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; dims], 1.0)];
        for (j, st) in &axes {
            let e = s.get(*j as u32 + 1) as i32;
            terms = terms
                .iter()
                .flat_map(|(y, w)| {
                    st.iter().map(move |&(o, c)| {
                        let mut y = y.clone();
                        y[*j] = o * h;
                        (y, w * c / h.powi(e))
                    })
                })
                .collect();
        }
        let fields = terms
            .par_iter()
            .map(|(y, w)| Ok(reference_at(a, f, y, level)?.scaled(*w)))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = SpatialField::zeros(level);
        for fld in &fields {
            acc.axpy(1.0, fld);
        }
        Ok(acc)
    };
    let coarse = diff(h)?;
    let fine = diff(h / 2.0)?;
    let mut out = fine.scaled(4.0 / 3.0);
    out.axpy(-1.0 / 3.0, &coarse);
    out.scale(1.0 / s.factorial());
    Ok(out)
}

/// `sum_{(k, s) not in G(T)} 2^{-alpha k} sigma_s^{-1}` restricted to `sigma_s^{-p} >= window`.
///
/// The sum over `k` is taken in closed form, so only the parametric window truncates.
pub fn tail_window_sum(weight: &dyn Weight, p: f64, alpha: f64, t: f64, window: f64, cap: usize) -> Result<f64> {
    let set = build_g(weight, p, 1.0 / window, cap)?;
    let q = 2f64.powf(-alpha);
    let mut terms: Vec<f64> = set
        .indices()
        .map(|s| {
            let sigma = weight.sigma(s);
            let sp = sigma.powf(p);
            let mut k0 = 0;
            while 2f64.powi(k0) * sp <= t {
                k0 += 1;
            }
            q.powi(k0) / (1.0 - q) / sigma
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum())
}

/// `alpha* = alpha` if `alpha <= 1/p - 1`, else `alpha - 1/p + 1`.
pub fn alpha_star(alpha: f64, p: f64) -> f64 {
    if alpha <= 1.0 / p - 1.0 {
        alpha
    } else {
        alpha - 1.0 / p + 1.0
    }
}

/// `mass / (2^{alpha*} - 1)` with `mass = sum sigma_s^{-p}`.
pub fn tail_lemma_constant(alpha: f64, p: f64, mass: f64) -> f64 {
    mass / (2f64.powf(alpha_star(alpha, p)) - 1.0)
}

/// Convergence record of one method.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub method: String,
    pub seed: u64,
    pub budgets: Vec<u64>,
    pub errors: Vec<f64>,
    pub stderr: Vec<f64>,
    pub fit: Option<RateFit>,
    pub constants: BTreeMap<String, f64>,
}

impl ErrorReport {
    pub fn new(method: &str, seed: u64) -> Self {
        Self {
            method: method.to_string(),
            seed,
            budgets: Vec::new(),
            errors: Vec::new(),
            stderr: Vec::new(),
            fit: None,
            constants: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, n: u64, error: f64, stderr: f64) {
        self.budgets.push(n);
        self.errors.push(error);
        self.stderr.push(stderr);
    }

    /// Fits the slope when at least five budgets are recorded.
    pub fn finish(&mut self) -> Result<()> {
        if self.budgets.len() >= 5 {
            let ns: Vec<f64> = self.budgets.iter().map(|&n| n as f64).collect();
            self.fit = Some(rate_fit(&ns, &self.errors)?);
        }
        Ok(())
    }

    /// `method,n,error,stderr,seed` rows, then `method,slope,<slope>,<band>,seed` if fitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,n,error,stderr,seed\n");
        for ((n, e), s) in self.budgets.iter().zip(&self.errors).zip(&self.stderr) {
            let _ = writeln!(out, "{},{n},{e:.12e},{s:.12e},{}", self.method, self.seed);
        }
        if let Some(fit) = &self.fit {
            let _ = writeln!(out, "{},slope,{:.12e},{:.12e},{}", self.method, fit.slope, fit.band, self.seed);
        }
        out
    }

    pub fn write(&self, csv: &Path, json: &Path) -> Result<()> {
        std::fs::write(csv, self.to_csv())?;
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(json, text + "\n")?;
        Ok(())
    }
}

/// Least-squares fit of `log e = slope log n + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub band: f64,
}

pub fn rate_fit(budgets: &[f64], errors: &[f64]) -> Result<RateFit> {
    if budgets.len() != errors.len() || budgets.len() < 2 {
        return Err(Error::DegenerateFit(format!("need matching pairs, got {} and {}", budgets.len(), errors.len())));
    }
    if let Some(e) = errors.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::DegenerateFit(format!("nonpositive error {e}")));
    }
    if budgets.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::DegenerateFit("nonpositive budget".into()));
    }
    let xs: Vec<f64> = budgets.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all budgets equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let band = if xs.len() > 2 {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let se = (rss / (m - 2.0) / sxx).sqrt();
        t_quantile_975(xs.len() - 2) * se
    } else {
        f64::INFINITY
    };
    Ok(RateFit { slope, intercept, band })
}

/// Two-sided 95% Student-t quantile.
fn t_quantile_975(dof: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
        2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    match dof {
        0 => f64::INFINITY,
        d if d <= 30 => TABLE[d - 1],
        _ => 1.96,
    }
}
