//! Experiment configuration, admissibility gates and the budget sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::colloc::{build_colloc, write_sections};
use crate::diffusion::{
    abar_preset, colloc_weight, lp_mass, psi_family, regularity_constants, summability_gate, superposed_weight, AffineDiffusion,
    Gate, Profile, Shape, DEFAULT_MASS_CUT,
};
use crate::error::{Error, Result};
use crate::fem1d::{K_REF, MAX_LEVEL};
use crate::legendre::{build_sl, legendre_index_set, stochastic_galerkin_solve, Variant};
use crate::multiindex::{write_index_set, DEFAULT_ENUMERATION_CAP};
use crate::surrogate::Surrogate;
use crate::taylor::build_taylor;
use crate::verify::{error_l2mu, error_linf, ErrorReport, SamplerSpec, DEFAULT_SEED};

/// Spatial smoothness exponent of the P1 detail bound.
pub const ALPHA: f64 = 1.0;

/// `3 / pi`, from `|v - I_h v|_V <= (h / pi) |v|_W` applied on two consecutive levels.
pub const C_D: f64 = 3.0 / std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Taylor,
    Colloc,
    LegendreLinf,
    GalerkinL2,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(Method::Taylor),
            "colloc" => Ok(Method::Colloc),
            "legendre-linf" => Ok(Method::LegendreLinf),
            "galerkin-l2" => Ok(Method::GalerkinL2),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Method::Taylor => "taylor",
            Method::Colloc => "colloc",
            Method::LegendreLinf => "legendre-linf",
            Method::GalerkinL2 => "galerkin-l2",
        })
    }
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Taylor, Method::Colloc, Method::LegendreLinf, Method::GalerkinL2];

    /// `1 / (1 + alpha)` for uniform-error methods, `2 / (1 + 2 alpha)` for the mean-square one.
    pub fn auto_p(self) -> f64 {
        match self {
            Method::GalerkinL2 => 2.0 / (1.0 + 2.0 * ALPHA),
            _ => 1.0 / (1.0 + ALPHA),
        }
    }

    fn check_p(self, p: f64) -> Result<()> {
        let ok = match self {
            Method::GalerkinL2 => p > 0.0 && p < 2.0,
            _ => p > 0.0 && p <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            let range = if self == Method::GalerkinL2 { "(0, 2)" } else { "(0, 1]" };
            Err(Error::Config(format!("p = {p} outside {range} for {self}")))
        }
    }
}

/// Parametric diffusion model `abar + sum_j y_j psi_j` with `psi_j = A j^-beta shape_j / zeta(beta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub preset: String,
    pub shape: Shape,
    pub dims: usize,
    pub amplitude: f64,
    pub decay: f64,
    /// Constant load `f`.
    pub load: f64,
}

impl ModelSpec {
    pub fn build(&self) -> Result<(AffineDiffusion, Profile)> {
        let abar = abar_preset(&self.preset)?;
        let psis = psi_family(self.amplitude, self.decay, self.dims, self.shape)?;
        Ok((AffineDiffusion::new(abar, psis), Profile::Constant(self.load)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub method: Method,
    /// `None` selects [`Method::auto_p`].
    pub p: Option<f64>,
    /// Lebesgue exponent of the collocation weight.
    pub q: f64,
    /// Quadrature points beyond the minimum for `legendre-linf`.
    pub quad_extra: usize,
    pub budgets: Vec<u64>,
    pub k_ref: u32,
    pub seed: u64,
    /// Monte-Carlo draws for the mean-square error.
    pub draws: usize,
    pub out: PathBuf,
    pub save_surrogates: bool,
}

impl ExperimentConfig {
    pub fn p(&self) -> f64 {
        self.p.unwrap_or_else(|| self.method.auto_p())
    }

    pub fn validate(&self) -> Result<()> {
        self.method.check_p(self.p())?;
        if self.budgets.is_empty() {
            return Err(Error::Config("budgets list is empty".into()));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("budgets {:?} are not strictly increasing", self.budgets)));
        }
        if self.budgets[0] < 1 {
            return Err(Error::Config("budgets must be at least 1".into()));
        }
        if self.k_ref > MAX_LEVEL || self.k_ref == 0 {
            return Err(Error::Config(format!("k_ref = {} outside 1..={MAX_LEVEL}", self.k_ref)));
        }
        if self.method == Method::GalerkinL2 && self.draws < 1000 {
            return Err(Error::Config(format!("draws = {} below 1000", self.draws)));
        }
        if !(self.q > 0.0) {
            return Err(Error::Config(format!("q = {} must be positive", self.q)));
        }
        Ok(())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !["model", "method", "run"].contains(&name.as_str()) {
                    return Err(Error::Config(format!("line {}: unknown section [{name}]", no + 1)));
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected 'key = value', got '{line}'", no + 1)));
            };
            let Some(section) = &current else {
                return Err(Error::Config(format!("line {}: key outside any section", no + 1)));
            };
            let key = key.trim().to_string();
            let table = sections.get_mut(section).expect("section registered");
            if table.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}' in [{section}]", no + 1)));
            }
        }
        let mut take = Fields { sections };
        let model = ModelSpec {
            preset: take.required("model", "preset")?,
            shape: take.parsed("model", "shape")?.unwrap_or(Shape::Sine),
            dims: take.parsed("model", "J")?.unwrap_or(0),
            amplitude: take.parsed("model", "amplitude")?.unwrap_or(0.0),
            decay: take.parsed("model", "decay")?.unwrap_or(3.0),
            load: take.parsed("model", "load")?.unwrap_or(1.0),
        };
        let method: Method = take.required("method", "name")?.parse()?;
        let p = match take.optional("method", "p") {
            None => None,
            Some(v) if v == "auto" => None,
            Some(v) => Some(v.parse().map_err(|_| Error::Config(format!("bad p '{v}'")))?),
        };
        let q = take.parsed("method", "q")?.unwrap_or(4.0);
        let quad_extra = take.parsed("method", "quad_extra")?.unwrap_or(2);
        let budgets = parse_budgets(&take.required("run", "budgets")?)?;
        let k_ref = take.parsed("run", "k_ref")?.unwrap_or(K_REF);
        let seed = take.parsed("run", "seed")?.unwrap_or(DEFAULT_SEED);
        let draws = take.parsed("run", "draws")?.unwrap_or(1000);
        let out = PathBuf::from(take.optional("run", "out").unwrap_or_else(|| "out".into()));
        let save_surrogates = take.parsed("run", "save_surrogates")?.unwrap_or(false);
        take.finish()?;
        let cfg = ExperimentConfig {
            model,
            method,
            p,
            q,
            quad_extra,
            budgets,
            k_ref,
            seed,
            draws,
            out,
            save_surrogates,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Fields {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Fields {
    fn optional(&mut self, section: &str, key: &str) -> Option<String> {
        self.sections.get_mut(section).and_then(|t| t.remove(key))
    }

    fn required(&mut self, section: &str, key: &str) -> Result<String> {
        self.optional(section, key)
            .ok_or_else(|| Error::Config(format!("missing '{key}' in [{section}]")))
    }

    fn parsed<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>> {
        match self.optional(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value '{v}' for '{key}' in [{section}]"))),
        }
    }

    fn finish(self) -> Result<()> {
        for (section, table) in self.sections {
            if let Some(key) = table.keys().next() {
                return Err(Error::Config(format!("unknown key '{key}' in [{section}]")));
            }
        }
        Ok(())
    }
}

/// Comma-separated budgets; `2^k` is accepted as shorthand.
pub fn parse_budgets(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || Error::Config(format!("bad budget '{item}'"));
            match item.split_once('^') {
                Some(("2", e)) => {
                    let e: u32 = e.trim().parse().map_err(|_| bad())?;
                    1u64.checked_shl(e).filter(|_| e < 64).ok_or_else(bad)
                }
                Some(_) => Err(bad()),
                None => item.parse().map_err(|_| bad()),
            }
        })
        .collect()
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?
        .parse()
}

/// Constants and admissibility verdicts for one model.
#[derive(Clone, Debug)]
pub struct GateReport {
    pub r: f64,
    pub big_r: f64,
    pub k: f64,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub p: f64,
    pub method: Method,
    /// `sum sigma_s^{-p}` for the configured method's weight, if it could be computed.
    pub lp_mass: Option<f64>,
    pub verdicts: Vec<(Method, Gate)>,
}

impl GateReport {
    pub fn verdict(&self, m: Method) -> &Gate {
        &self.verdicts.iter().find(|(v, _)| *v == m).expect("every method judged").1
    }

    pub fn passed(&self) -> bool {
        self.verdict(self.method).admissible
    }

    pub fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "r = {:.6e}", self.r);
        let _ = writeln!(out, "R = {:.6e}", self.big_r);
        let _ = writeln!(out, "K = {:.6e}", self.k);
        let _ = writeln!(out, "b = [{}]", list(&self.b));
        let _ = writeln!(out, "d = [{}]", list(&self.d));
        let _ = writeln!(out, "||b||_1 = {:.6e}", self.b.iter().sum::<f64>());
        let _ = writeln!(out, "||d||_1 = {:.6e}", self.d.iter().sum::<f64>());
        let _ = writeln!(out, "p = {}", self.p);
        match self.lp_mass {
            Some(m) => {
                let _ = writeln!(out, "lp_mass = {m:.6e}");
            }
            None => {
                let _ = writeln!(out, "lp_mass = n/a");
            }
        }
        if self.method == Method::GalerkinL2 && self.p > 1.0 {
            let _ = writeln!(out, "note: p > 1, tail bounds for the index set are stated for p < 1 only");
        }
        for (m, gate) in &self.verdicts {
            let mark = if *m == self.method { "*" } else { " " };
            let status = if gate.admissible { "PASS" } else { "FAIL" };
            let _ = write!(out, "{mark} {m:<14} {status}  margin {:+.6e}", gate.margin);
            if let Some(reason) = &gate.reason {
                let _ = write!(out, "  {reason}");
            }
            out.push('\n');
        }
        out
    }
}

/// Ellipticity, regularity constants and each method's summability condition.
pub fn gates(cfg: &ExperimentConfig) -> Result<GateReport> {
    let (a, f) = cfg.model.build()?;
    let c = regularity_constants(&a, f.l2_norm())?;
    let p = cfg.p();
    let psi_norms = a.psi_w1inf();
    let lp_norm: f64 = psi_norms.iter().map(|v| v.powf(p)).sum();
    let verdicts = Method::ALL
        .iter()
        .map(|&m| {
            let mp = if m == cfg.method { p } else { m.auto_p() };
            let mut gate = match m {
                Method::Taylor | Method::LegendreLinf => summability_gate(&c.b, mp),
                Method::GalerkinL2 => summability_gate(&c.d, mp),
                Method::Colloc => match colloc_weight(&a, cfg.q, c.r) {
                    Ok(rule) => Gate {
                        admissible: true,
                        l1: psi_norms.iter().sum(),
                        margin: c.r / (12.0 * cfg.q.exp()) - tail_after_split(&rule),
                        reason: None,
                    },
                    Err(e) => Gate {
                        admissible: false,
                        l1: psi_norms.iter().sum(),
                        margin: c.r / (12.0 * cfg.q.exp()) - psi_norms.iter().sum::<f64>(),
                        reason: Some(format!(
                            "{e}: needs sum_(j > j0) ||psi_j||_W1inf <= r / (12 e^q) = {:.6e}",
                            c.r / (12.0 * cfg.q.exp())
                        )),
                    },
                },
            };
            if gate.admissible && !lp_norm.is_finite() {
                gate.admissible = false;
                gate.reason = Some("psi norms not in l_p".into());
            }
            (m, gate)
        })
        .collect();
    let mut verdicts: Vec<(Method, Gate)> = verdicts;
    let lp = match method_mass(cfg, &a, &f, p) {
        Ok(m) => Some(m),
        Err(e) => {
            let gate = &mut verdicts.iter_mut().find(|(m, _)| *m == cfg.method).expect("every method judged").1;
            if gate.admissible {
                gate.admissible = false;
                gate.reason = Some(format!("weight mass not computable: {e}"));
            }
            None
        }
    };
    Ok(GateReport {
        r: c.r,
        big_r: c.big_r,
        k: c.k,
        b: c.b,
        d: c.d,
        p,
        method: cfg.method,
        lp_mass: lp,
        verdicts,
    })
}

fn tail_after_split(rule: &crate::diffusion::WeightRule) -> f64 {
    match rule {
        crate::diffusion::WeightRule::Collocation { j0, norms, .. } => norms[*j0..].iter().sum(),
        _ => 0.0,
    }
}

fn method_mass(cfg: &ExperimentConfig, a: &AffineDiffusion, f: &Profile, p: f64) -> Result<f64> {
    let c = regularity_constants(a, f.l2_norm())?;
    let rule = match cfg.method {
        Method::Taylor | Method::LegendreLinf => superposed_weight(&c.b),
        Method::GalerkinL2 => superposed_weight(&c.d),
        Method::Colloc => colloc_weight(a, cfg.q, c.r)?,
    };
    Ok(lp_mass(&rule, p, DEFAULT_MASS_CUT, DEFAULT_ENUMERATION_CAP)?.mass)
}

/// One budget of a sweep.
#[derive(Clone, Debug)]
pub struct BudgetRow {
    pub n: u64,
    pub rank: u128,
    pub t: f64,
    pub error: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub report: ErrorReport,
    pub rows: Vec<BudgetRow>,
    pub csv: PathBuf,
}

/// Builds a surrogate per budget, measures errors against shared references and writes the report.
///
/// Gate failures return before anything is written.
pub fn run(cfg: &ExperimentConfig, mut log: impl FnMut(&str)) -> Result<RunSummary> {
    let gate = gates(cfg)?;
    log(&gate.render());
    if !gate.passed() {
        let reason = gate.verdict(cfg.method).reason.clone().unwrap_or_default();
        return Err(Error::Gate(format!("{} not admissible: {reason}", cfg.method)));
    }
    let (a, f) = cfg.model.build()?;
    let p = cfg.p();
    let mut surrogates: Vec<Surrogate> = Vec::new();
    let mut thresholds = Vec::new();
    let mut extras: Vec<Box<dyn FnOnce(&Path) -> Result<()>>> = Vec::new();
    for &n in &cfg.budgets {
        let (surrogate, t) = match cfg.method {
            Method::Taylor => {
                let b = build_taylor(&a, &f, n, p)?;
                (b.surrogate, b.t)
            }
            Method::Colloc => {
                let b = build_colloc(&a, &f, n, p, cfg.q)?;
                let limit = 2.0 * b.mass * b.t;
                if b.cost as f64 > limit * (1.0 + 1e-12) {
                    return Err(Error::Audit(format!("collocation cost {} exceeds 2 mass T = {limit}", b.cost)));
                }
                let sections = b.sections.clone();
                extras.push(Box::new(move |dir: &Path| write_sections(&sections, &dir.join(format!("sections_n{n}.tsv")))));
                (b.surrogate, b.t)
            }
            Method::LegendreLinf => {
                let s = build_sl(&a, &f, n, p, Variant::Linf, cfg.quad_extra)?;
                let t = s.g.t;
                (s, t)
            }
            Method::GalerkinL2 => {
                let g = legendre_index_set(&a, &f, n, p, Variant::L2)?;
                let t = g.t;
                let sol = stochastic_galerkin_solve(&a, &f, &g)?;
                let logged = sol.clone();
                extras.push(Box::new(move |dir: &Path| logged.write_log(&dir.join(format!("cg_n{n}.csv")))));
                (sol.surrogate, t)
            }
        };
        if surrogate.rank() > n as u128 {
            return Err(Error::Audit(format!("rank {} exceeds budget {n}", surrogate.rank())));
        }
        if surrogate.max_level() > cfg.k_ref {
            return Err(Error::Config(format!(
                "budget {n} reaches level {} above k_ref = {}",
                surrogate.max_level(),
                cfg.k_ref
            )));
        }
        surrogates.push(surrogate);
        thresholds.push(t);
    }
    let refs: Vec<&Surrogate> = surrogates.iter().collect();
    let measured: Vec<(f64, f64)> = match cfg.method {
        Method::GalerkinL2 => error_l2mu(&refs, &a, &f, cfg.draws, cfg.seed, cfg.k_ref)?
            .into_iter()
            .map(|e| (e.value, e.stderr))
            .collect(),
        _ => {
            let spec = SamplerSpec {
                seed: cfg.seed,
                level: cfg.k_ref,
                ..SamplerSpec::default()
            };
            error_linf(&refs, &a, &f, &spec)?.into_iter().map(|e| (e.value, 0.0)).collect()
        }
    };
    let mut report = ErrorReport::new(&cfg.method.to_string(), cfg.seed);
    let mut rows = Vec::new();
    for (((&n, s), &t), &(error, stderr)) in cfg.budgets.iter().zip(&surrogates).zip(&thresholds).zip(&measured) {
        log(&format!("n = {n:>6}  rank = {:>6}  T = {t:.6e}  error = {error:.6e}", s.rank()));
        report.push(n, error, stderr);
        rows.push(BudgetRow {
            n,
            rank: s.rank(),
            t,
            error,
            stderr,
        });
    }
    report.finish()?;
    report.constants.insert("r".into(), gate.r);
    report.constants.insert("R".into(), gate.big_r);
    report.constants.insert("K".into(), gate.k);
    report.constants.insert("p".into(), p);
    report.constants.insert("alpha".into(), ALPHA);
    report.constants.insert("c_d".into(), C_D);
    if let Some(m) = gate.lp_mass {
        report.constants.insert("lp_mass".into(), m);
    }
    if let Some(fit) = &report.fit {
        log(&format!("slope = {:.4} +- {:.4}", fit.slope, fit.band));
    }
    std::fs::create_dir_all(&cfg.out)?;
    let csv = cfg.out.join("report.csv");
    report.write(&csv, &cfg.out.join("report.json"))?;
    for (n, s) in cfg.budgets.iter().zip(&surrogates) {
        write_index_set(&s.g, &cfg.out.join(format!("index_n{n}.tsv")))?;
        if cfg.save_surrogates {
            s.save(&cfg.out.join(format!("surrogate_n{n}")))?;
        }
    }
    for write in extras {
        write(&cfg.out)?;
    }
    Ok(RunSummary { report, rows, csv })
}

/// Process exit status for an error: 2 for configuration and gate failures, 3 for numerical ones.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::Gate(_)
        | Error::EllipticityViolation { .. }
        | Error::SplitInfeasible { .. }
        | Error::InvalidBudget(_) => 2,
        _ => 3,
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# acceptance-like model
[model]
preset = one
shape = sine
J = 3
amplitude = 0.05
decay = 3

[method]
name = taylor
p = auto

[run]
budgets = 2^4, 2^5, 64, 2^7, 2^8
k_ref = 10
seed = 7
";

    #[test]
    fn parses_sample() {
        let cfg: ExperimentConfig = SAMPLE.parse().unwrap();
        assert_eq!(cfg.model.dims, 3);
        assert_eq!(cfg.method, Method::Taylor);
        assert_eq!(cfg.p(), 0.5);
        assert_eq!(cfg.budgets, vec![16, 32, 64, 128, 256]);
        assert_eq!(cfg.k_ref, 10);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn rejects_bad_configs() {
        let missing = SAMPLE.replace("preset = one\n", "");
        let err = missing.parse::<ExperimentConfig>().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(exit_code(&err), 2);
        assert!(SAMPLE.replace("2^5, 64", "64, 2^5").parse::<ExperimentConfig>().is_err());
        assert!(SAMPLE.replace("p = auto", "p = 1.5").parse::<ExperimentConfig>().is_err());
        assert!(SAMPLE.replace("name = taylor\np = auto", "name = galerkin-l2\np = 1.5").parse::<ExperimentConfig>().is_ok());
        assert!(SAMPLE.replace("seed = 7", "seed = 7\ncolour = red").parse::<ExperimentConfig>().is_err());
        assert!(SAMPLE.replace("[run]", "[runs]").parse::<ExperimentConfig>().is_err());
        let unknown = SAMPLE.replace("preset = one", "preset = two").parse::<ExperimentConfig>().unwrap();
        assert_eq!(exit_code(&gates(&unknown).unwrap_err()), 2);
    }

    #[test]
    fn gate_report_and_doubling() {
        let mut cfg: ExperimentConfig = SAMPLE.parse().unwrap();
        let report = gates(&cfg).unwrap();
        assert!(report.passed());
        assert!(report.lp_mass.is_some());
        cfg.model.amplitude = 0.5;
        let report = gates(&cfg).unwrap();
        assert!(report.b.iter().sum::<f64>() >= 1.0);
        assert!(!report.passed());
        assert!(report.render().contains("FAIL"));
    }

    #[test]
    fn nonparametric_passes() {
        let cfg: ExperimentConfig = SAMPLE.replace("J = 3", "J = 0").parse().unwrap();
        let report = gates(&cfg).unwrap();
        assert!(report.b.is_empty());
        assert!(Method::ALL.iter().all(|&m| report.verdict(m).admissible));
    }

    #[test]
    fn gate_failure_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg: ExperimentConfig = SAMPLE.parse().unwrap();
        cfg.model.amplitude = 0.5;
        cfg.out = dir.path().join("out");
        let err = run(&cfg, |_| {}).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(!cfg.out.exists());
    }

    #[test]
    fn budget_shorthand() {
        assert_eq!(parse_budgets("2^0, 3,2^10").unwrap(), vec![1, 3, 1024]);
        assert!(parse_budgets("3^2").is_err());
        assert!(parse_budgets("2^70").is_err());
    }
}
