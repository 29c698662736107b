//! The affine coefficient model `a(y) = abar + sum_j y_j psi_j`, its ellipticity and
//! regularity constants, and the weight rules built from them.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fem1d::{self, Coefficient, SpatialFunction, MAX_LEVEL};
use crate::multiindex::{build_g, MultiIndex, Weight};

/// Default resolution for grid-based norms and bounds.
pub const NORM_GRID: usize = 4097;

/// A closed-form spatial function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `amplitude * sin(frequency * pi * x)`.
    Sine { amplitude: f64, frequency: f64 },
    /// `amplitude * 4x(1-x) * T_degree(2x - 1)`.
    ChebyshevBump { amplitude: f64, degree: u32 },
    Sum(Vec<Profile>),
}

fn chebyshev(n: u32, t: f64) -> (f64, f64) {
    // (T_n(t), T_n'(t)) by the three-term recurrences for T and U.
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut t0, mut t1) = (1.0, t);
    let (mut u0, mut u1) = (1.0, 2.0 * t);
    for _ in 1..n {
        let t2 = 2.0 * t * t1 - t0;
        t0 = t1;
        t1 = t2;
        let u2 = 2.0 * t * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    (t1, n as f64 * u0)
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Sine { amplitude, frequency } => amplitude * (frequency * PI * x).sin(),
            Profile::ChebyshevBump { amplitude, degree } => {
                amplitude * 4.0 * x * (1.0 - x) * chebyshev(*degree, 2.0 * x - 1.0).0
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.value(x)).sum(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(_) => 0.0,
            Profile::Sine { amplitude, frequency } => amplitude * frequency * PI * (frequency * PI * x).cos(),
            Profile::ChebyshevBump { amplitude, degree } => {
                let (t, dt) = chebyshev(*degree, 2.0 * x - 1.0);
                amplitude * 4.0 * ((1.0 - 2.0 * x) * t + x * (1.0 - x) * 2.0 * dt)
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.derivative(x)).sum(),
        }
    }

    fn grid_sup(&self, grid: usize, f: impl Fn(&Self, f64) -> f64) -> f64 {
        let n = grid.max(2) - 1;
        (0..=n).map(|i| f(self, i as f64 / n as f64).abs()).fold(0.0, f64::max)
    }

    /// `||v||_{L_inf}`, closed form for constants and full-period sines.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Profile::Constant(c) => c.abs(),
            Profile::Sine { amplitude, frequency } if *frequency >= 0.5 => amplitude.abs(),
            _ => self.grid_sup(NORM_GRID, Profile::value),
        }
    }

    /// `|v|_{W1,inf} = ||v'||_{L_inf}`.
    pub fn lip_seminorm(&self) -> f64 {
        match self {
            Profile::Constant(_) => 0.0,
            Profile::Sine { amplitude, frequency } => (amplitude * frequency * PI).abs(),
            _ => self.grid_sup(NORM_GRID, Profile::derivative),
        }
    }

    /// `||v||_{W1,inf} = ||v||_{L_inf} + |v|_{W1,inf}`.
    pub fn w1inf_norm(&self) -> f64 {
        self.sup_norm() + self.lip_seminorm()
    }

    /// `||v||_{L2(0,1)}` by composite Gauss quadrature.
    pub fn l2_norm(&self) -> f64 {
        let sq = |x: f64| self.value(x).powi(2);
        fem1d::gauss_cell_integrals(&sq, 10).iter().sum::<f64>().sqrt()
    }
}

impl SpatialFunction for Profile {
    fn value(&self, x: f64) -> f64 {
        Profile::value(self, x)
    }
}

impl Coefficient for Profile {
    fn cell_integrals(&self, level: u32) -> Cow<'_, [f64]> {
        Cow::Owned(fem1d::gauss_cell_integrals(self, level))
    }
}

/// Named mean-field presets.
pub fn abar_preset(name: &str) -> Result<Profile> {
    match name {
        "one" => Ok(Profile::Constant(1.0)),
        "one-plus-bump" => Ok(Profile::Sum(vec![
            Profile::Constant(1.0),
            Profile::Sine {
                amplitude: 0.3,
                frequency: 1.0,
            },
        ])),
        other => Err(Error::Config(format!("unknown abar preset '{other}'"))),
    }
}

/// Riemann zeta for real `s > 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    let n = 16.0f64;
    let head: f64 = (1..16).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Sine,
    ChebyshevBump,
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Shape::Sine),
            "chebyshev-bump" => Ok(Shape::ChebyshevBump),
            other => Err(Error::Config(format!("unknown psi shape '{other}'"))),
        }
    }
}

/// `psi_j = amplitude * j^-beta * shape_j / zeta(beta)` for `j = 1..=count`.
pub fn psi_family(amplitude: f64, beta: f64, count: usize, shape: Shape) -> Result<Vec<Profile>> {
    if !(beta > 1.0) {
        return Err(Error::Config(format!("decay exponent beta = {beta} must exceed 1")));
    }
    let z = zeta(beta);
    Ok((1..=count)
        .map(|j| {
            let c = amplitude * (j as f64).powf(-beta) / z;
            match shape {
                Shape::Sine => Profile::Sine {
                    amplitude: c,
                    frequency: j as f64,
                },
                Shape::ChebyshevBump => Profile::ChebyshevBump {
                    amplitude: c,
                    degree: j as u32,
                },
            }
        })
        .collect())
}

/// A profile with its cell integrals memoized per level.
pub struct CachedProfile {
    pub profile: Profile,
    cache: Vec<OnceLock<Vec<f64>>>,
    sup: f64,
    lip: f64,
}

impl CachedProfile {
    pub fn new(profile: Profile) -> Self {
        let sup = profile.sup_norm();
        let lip = profile.lip_seminorm();
        Self {
            profile,
            cache: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
            sup,
            lip,
        }
    }

    pub fn integrals(&self, level: u32) -> &[f64] {
        self.cache[level as usize].get_or_init(|| fem1d::gauss_cell_integrals(&self.profile, level))
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    pub fn lip_seminorm(&self) -> f64 {
        self.lip
    }

    pub fn w1inf_norm(&self) -> f64 {
        self.sup + self.lip
    }
}

impl Clone for CachedProfile {
    fn clone(&self) -> Self {
        Self::new(self.profile.clone())
    }
}

impl std::fmt::Debug for CachedProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.profile.fmt(f)
    }
}

impl Coefficient for CachedProfile {
    fn cell_integrals(&self, level: u32) -> Cow<'_, [f64]> {
        Cow::Borrowed(self.integrals(level))
    }
}

/// `a(x, y) = abar(x) + sum_j y_j psi_j(x)` over `J` active parameters.
#[derive(Clone, Debug)]
pub struct AffineDiffusion {
    pub abar: CachedProfile,
    pub psis: Vec<CachedProfile>,
}

impl AffineDiffusion {
    pub fn new(abar: Profile, psis: Vec<Profile>) -> Self {
        Self {
            abar: CachedProfile::new(abar),
            psis: psis.into_iter().map(CachedProfile::new).collect(),
        }
    }

    /// Number of active parameters `J`.
    pub fn dims(&self) -> usize {
        self.psis.len()
    }

    pub fn value(&self, x: f64, y: &[f64]) -> f64 {
        self.abar.profile.value(x)
            + self.psis.iter().zip(y).map(|(p, &yj)| yj * p.profile.value(x)).sum::<f64>()
    }

    /// The coefficient `a(y)`; missing coordinates are zero.
    pub fn at<'a>(&'a self, y: &'a [f64]) -> ParametricCoefficient<'a> {
        ParametricCoefficient { model: self, y }
    }

    /// `||psi_j||_{W1,inf}` for every active `j`.
    pub fn psi_w1inf(&self) -> Vec<f64> {
        self.psis.iter().map(CachedProfile::w1inf_norm).collect()
    }

    /// Same model with every `psi_j` scaled by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self::new(self.abar.profile.clone(), self.psis.iter().map(|p| p.profile.clone().scaled(t)).collect())
    }
}

impl Profile {
    pub fn scaled(self, t: f64) -> Profile {
        match self {
            Profile::Constant(c) => Profile::Constant(t * c),
            Profile::Sine { amplitude, frequency } => Profile::Sine {
                amplitude: t * amplitude,
                frequency,
            },
            Profile::ChebyshevBump { amplitude, degree } => Profile::ChebyshevBump {
                amplitude: t * amplitude,
                degree,
            },
            Profile::Sum(parts) => Profile::Sum(parts.into_iter().map(|p| p.scaled(t)).collect()),
        }
    }
}

/// `a(y)` as a [`Coefficient`], combining cached cell integrals.
pub struct ParametricCoefficient<'a> {
    model: &'a AffineDiffusion,
    y: &'a [f64],
}

impl Coefficient for ParametricCoefficient<'_> {
    fn cell_integrals(&self, level: u32) -> Cow<'_, [f64]> {
        let mut out = self.model.abar.integrals(level).to_vec();
        for (psi, &yj) in self.model.psis.iter().zip(self.y) {
            if yj != 0.0 {
                for (o, c) in out.iter_mut().zip(psi.integrals(level)) {
                    *o += yj * c;
                }
            }
        }
        Cow::Owned(out)
    }
}

/// `(r, R)` with `r = min(abar - sum|psi_j|)` and `R = max(abar + sum|psi_j|)` over a uniform grid.
pub fn ellipticity_bounds(a: &AffineDiffusion, grid: usize) -> Result<(f64, f64)> {
    if grid < 64 {
        return Err(Error::Config(format!("ellipticity grid needs at least 64 points, got {grid}")));
    }
    let n = grid - 1;
    let (mut r, mut big_r) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let abar = a.abar.profile.value(x);
        let spread: f64 = a.psis.iter().map(|p| p.profile.value(x).abs()).sum();
        r = r.min(abar - spread);
        big_r = big_r.max(abar + spread);
    }
    if !(r > 0.0) {
        return Err(Error::EllipticityViolation { r });
    }
    Ok((r, big_r))
}

/// Constants `K`, `b`, `d` controlling the parametric decay of the solution.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityConstants {
    pub r: f64,
    pub big_r: f64,
    /// Triangle-inequality bound `|abar|_{W1,inf} + sum_j |psi_j|_{W1,inf}`.
    pub a_lip: f64,
    pub k: f64,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn regularity_constants(a: &AffineDiffusion, f_norm: f64) -> Result<RegularityConstants> {
    let (r, big_r) = ellipticity_bounds(a, NORM_GRID)?;
    let a_lip = a.abar.lip_seminorm() + a.psis.iter().map(CachedProfile::lip_seminorm).sum::<f64>();
    let k = (1.0 / r) * (1.0 + (1.0 + a_lip / r)) * f_norm;
    let b: Vec<f64> = a
        .psis
        .iter()
        .map(|p| (1.0 / r) * ((a_lip / r + 2.0) * p.sup_norm() + p.lip_seminorm()))
        .collect();
    let d = b.iter().map(|v| v / 3f64.sqrt()).collect();
    Ok(RegularityConstants {
        r,
        big_r,
        a_lip,
        k,
        b,
        d,
    })
}

/// Outcome of the summability check on a decay sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub admissible: bool,
    pub l1: f64,
    /// `1 - ||c||_1`; negative when the sequence is too heavy.
    pub margin: f64,
    pub reason: Option<String>,
}

/// `p <= 1`: admissible iff `||c||_1 < 1`; `p > 1`: admissible iff `||c||_1 <= 1`.
pub fn summability_gate(c: &[f64], p: f64) -> Gate {
    let l1: f64 = c.iter().map(|v| v.abs()).sum();
    let ok = if p <= 1.0 { l1 < 1.0 } else { l1 <= 1.0 };
    let reason = (!ok).then(|| {
        let rel = if p <= 1.0 { "< 1" } else { "<= 1" };
        format!("||c||_1 = {l1} violates ||c||_1 {rel}")
    });
    Gate {
        admissible: ok,
        l1,
        margin: 1.0 - l1,
        reason,
    }
}

/// Weight rules feeding the index-set construction.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule {
    /// `sigma_s^{-1} = (|s|!/s!) b^s`.
    Superposed { b: Vec<f64> },
    /// Split weight with `E = {1..=j0}` and `F = {j0+1..}`.
    Collocation {
        lambda: f64,
        j0: usize,
        q: f64,
        r: f64,
        norms: Vec<f64>,
    },
}

pub fn superposed_weight(b: &[f64]) -> WeightRule {
    WeightRule::Superposed { b: b.to_vec() }
}

impl WeightRule {
    /// The sequence whose summability gates this rule.
    pub fn sequence(&self) -> &[f64] {
        match self {
            WeightRule::Superposed { b } => b,
            WeightRule::Collocation { norms, .. } => norms,
        }
    }
}

impl Weight for WeightRule {
    fn sigma(&self, s: &MultiIndex) -> f64 {
        match self {
            WeightRule::Superposed { b } => {
                let bs: f64 = s
                    .entries()
                    .iter()
                    .map(|&(j, e)| b.get(j as usize - 1).copied().unwrap_or(0.0).powi(e as i32))
                    .product();
                1.0 / (s.multinomial() * bs)
            }
            WeightRule::Collocation {
                lambda,
                j0,
                q,
                r,
                norms,
            } => {
                let e_base = 2.0 * lambda / (lambda + 1.0);
                let s_f: u32 = s.entries().iter().filter(|&&(j, _)| j as usize > *j0).map(|&(_, e)| e).sum();
                let mut sigma = 1.0;
                for &(j, e) in s.entries() {
                    let ef = f64::from(e);
                    if (j as usize) <= *j0 {
                        sigma *= e_base.powf(ef);
                    } else {
                        let norm = norms.get(j as usize - 1).copied().unwrap_or(0.0);
                        let rho = q.exp() + r * ef / (4.0 * f64::from(s_f) * norm);
                        sigma *= rho.powf(ef) * (ef + 1.0).powf(*q);
                    }
                }
                sigma
            }
        }
    }

    fn dims(&self) -> usize {
        self.sequence().len()
    }

    fn name(&self) -> String {
        match self {
            WeightRule::Superposed { .. } => "superposed".into(),
            WeightRule::Collocation { .. } => "collocation".into(),
        }
    }
}

/// Collocation weight with the smallest feasible split `j0` and `lambda = min(2, 1 + r/(6 sum_E ||psi_j||))`.
pub fn colloc_weight(a: &AffineDiffusion, q: f64, r: f64) -> Result<WeightRule> {
    let norms = a.psi_w1inf();
    if !(r > 0.0) || norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::SplitInfeasible { dims: norms.len() });
    }
    let bound = r / (12.0 * q.exp());
    let j0 = (0..=norms.len())
        .find(|&j0| norms[j0..].iter().sum::<f64>() <= bound)
        .ok_or(Error::SplitInfeasible { dims: norms.len() })?;
    let head: f64 = norms[..j0].iter().sum();
    let lambda = if head > 0.0 { (1.0 + r / (6.0 * head)).min(2.0) } else { 2.0 };
    Ok(WeightRule::Collocation {
        lambda,
        j0,
        q,
        r,
        norms,
    })
}

/// Estimated `sum_s sigma_s^{-p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpMass {
    pub mass: f64,
    /// Portion of `mass` that is extrapolated rather than enumerated.
    pub tail: f64,
    pub certified: bool,
    pub enumerated: usize,
}

/// Default cut for [`lp_mass`]: indices with `sigma^{-p}` below it are left to the tail estimate.
pub const DEFAULT_MASS_CUT: f64 = 1e-6;

/// `sum sigma_s^{-p}` over the ideal `sigma_s^{-p} >= cut`, plus a geometric tail estimate.
///
/// The tail is extrapolated from the partial sums at cuts `100 cut`, `10 cut` and `cut`.
pub fn lp_mass(rule: &dyn Weight, p: f64, cut: f64, cap: usize) -> Result<LpMass> {
    let partial = |c: f64| -> Result<(f64, usize)> {
        let g = build_g(rule, p, 1.0 / c, cap)?;
        let mut terms: Vec<f64> = g.indices().map(|s| rule.sigma(s).powf(-p)).collect();
        terms.sort_by(f64::total_cmp);
        Ok((terms.iter().sum(), terms.len()))
    };
    let (m0, _) = partial(100.0 * cut)?;
    let (m1, _) = partial(10.0 * cut)?;
    let (m2, count) = partial(cut)?;
    let (d1, d2) = (m1 - m0, m2 - m1);
    let tail = if d2 == 0.0 {
        0.0
    } else if d1 > 0.0 && d2 < d1 {
        let rho = d2 / d1;
        d2 * rho / (1.0 - rho)
    } else {
        f64::INFINITY
    };
    let mass = m2 + tail;
    Ok(LpMass {
        mass,
        tail,
        certified: tail < 0.01 * mass,
        enumerated: count,
    })
}
