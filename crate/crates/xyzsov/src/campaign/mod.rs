//! Verification campaigns: TOML configuration, seeded parameter generation, named suites
//! and the versioned JSON/CSV report.

mod suites;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::linalg::C;
use crate::registry::Named;
use crate::sov::{validate_eps, Eps};
use crate::spectrum::constrain;
use crate::trig::{TrigParams, DEFAULT_OMEGAS};
use crate::vertex::{ModelParams, MAX_SITES};

pub use suites::registry;

pub const SCHEMA_VERSION: u32 = 1;

/// Determinant condition number above which a failed comparison is inconclusive.
pub const COND_LIMIT: f64 = crate::scalar::COND_LIMIT;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub transfer: f64,
    pub gram: f64,
    pub spectrum: f64,
    pub bethe_match: f64,
    pub eigenvector: f64,
    pub oracle: f64,
    pub gaudin_limit: f64,
    pub gaudin_derivative: f64,
    pub orthogonality: f64,
    pub basis: f64,
    pub blocks: f64,
    pub hamiltonian: f64,
    /// Required decrease factor per ω step (not scaled).
    pub trig_step: f64,
    /// Required log-log slope against |q| (not scaled).
    pub trig_slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            transfer: 1e-9,
            gram: 1e-8,
            spectrum: 1e-8,
            bethe_match: 1e-8,
            eigenvector: 1e-7,
            oracle: 1e-7,
            gaudin_limit: 1e-4,
            gaudin_derivative: 1e-6,
            orthogonality: 1e-10,
            basis: 1e-9,
            blocks: 1e-8,
            hamiltonian: 1e-7,
            trig_step: 10.0,
            trig_slope: 0.9,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            identity: self.identity * s,
            transfer: self.transfer * s,
            gram: self.gram * s,
            spectrum: self.spectrum * s,
            bethe_match: self.bethe_match * s,
            eigenvector: self.eigenvector * s,
            oracle: self.oracle * s,
            gaudin_limit: self.gaudin_limit * s,
            gaudin_derivative: self.gaudin_derivative * s,
            orthogonality: self.orthogonality * s,
            basis: self.basis * s,
            blocks: self.blocks * s,
            hamiltonian: self.hamiltonian * s,
            trig_step: self.trig_step,
            trig_slope: self.trig_slope,
        }
    }
}

/// Explicit chain parameters; N is the length of `xi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub eta: C,
    pub xi: Vec<C>,
    pub alpha_plus: [C; 3],
    pub alpha_minus: [C; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrigConfig {
    pub u: C,
    pub params: TrigParams,
    pub eps: Eps,
    pub omegas: Vec<C>,
    pub q_roots: Vec<C>,
    pub q_points: Vec<C>,
}

impl Default for TrigConfig {
    fn default() -> Self {
        Self {
            u: C::new(0.3, 0.2),
            params: TrigParams {
                phi: [C::new(0.7, 0.2), C::new(0.5, -0.3)],
                psi: [C::new(0.3, 0.1), C::new(-0.4, 0.2)],
                tau: [C::new(0.2, -0.3), C::new(0.6, 0.1)],
                eta_tilde: C::new(0.4, 0.1),
                eps_sign: 1,
            },
            eps: [1, -1, 1, -1, 1, 1],
            omegas: DEFAULT_OMEGAS.iter().map(|&x| C::new(0.0, x)).collect(),
            q_roots: vec![C::new(0.2, 0.1), C::new(-0.15, 0.3)],
            q_points: vec![C::new(0.1, 0.3), C::new(-0.25, 0.15)],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub name: String,
    pub seed: u64,
    pub suites: Vec<String>,
    /// Chain lengths overriding each suite's defaults.
    pub sizes: Option<Vec<usize>>,
    pub tolerance_scale: f64,
    pub tolerances: Tolerances,
    pub omega: C,
    pub eps: Eps,
    pub model: Option<ModelConfig>,
    pub algebra_points: usize,
    pub scalar_draws: usize,
    pub ortho_pairs: usize,
    pub basis_cases: usize,
    /// Perturb the boundary parameters after imposing the constraint (guard test).
    pub break_constraint: bool,
    pub trig: TrigConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 0,
            suites: registry().names().iter().map(|s| s.to_string()).collect(),
            sizes: None,
            tolerance_scale: 1.0,
            tolerances: Tolerances::default(),
            omega: C::new(0.0, 0.8),
            eps: [1, -1, 1, 1, -1, 1],
            model: None,
            algebra_points: 100,
            scalar_draws: 3,
            ortho_pairs: 10,
            basis_cases: 10,
            break_constraint: false,
            trig: TrigConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance_scale > 0.0) {
            return Err(Error::Config("tolerance_scale must be positive".into()));
        }
        validate_eps(&self.eps)?;
        if let Some(sizes) = &self.sizes {
            if let Some(&n) = sizes.iter().find(|&&n| n == 0 || n > MAX_SITES) {
                if n == 0 {
                    return Err(Error::Config("chain length 0".into()));
                }
                return Err(Error::Resource(format!(
                    "N = {n} exceeds the cap of {MAX_SITES} sites"
                )));
            }
        }
        let reg = registry();
        for s in &self.suites {
            reg.get(s)?;
        }
        EllipticContext::with_omega(self.omega)?;
        Ok(())
    }
}

/// FNV-1a, used to derive stable per-case seeds from labels.
fn fnv(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn sub_seed(seed: u64, label: &str) -> u64 {
    fnv(label.as_bytes()) ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, label))
}

pub fn random_c<R: Rng>(rng: &mut R, re: (f64, f64), im: (f64, f64)) -> C {
    C::new(rng.random_range(re.0..re.1), rng.random_range(im.0..im.1))
}

/// Random generic parameters for N sites; with `constraint = Some((M, ε))`, α_3^− is
/// fixed so that the boundary constraint holds. Draws are repeated until the
/// genericity check passes.
pub fn generate_params(
    seed: u64,
    n: usize,
    omega: C,
    constraint: Option<(usize, Eps)>,
) -> Result<ModelParams> {
    let ctx = EllipticContext::with_omega(omega)?;
    let mut rng = rng_for(seed, &format!("params/{n}"));
    let mut last = None;
    for _ in 0..100 {
        let eta = random_c(&mut rng, (0.25, 0.45), (0.05, 0.2));
        let xi = (0..n)
            .map(|_| random_c(&mut rng, (-0.4, 0.4), (-0.25, 0.25)))
            .collect();
        let mut al = [C::new(0.0, 0.0); 6];
        for a in al.iter_mut() {
            *a = random_c(&mut rng, (-0.6, 0.6), (0.1, 0.8));
        }
        let p = ModelParams::new(
            eta,
            xi,
            [al[0], al[1], al[2]],
            [al[3], al[4], al[5]],
            ctx,
        )?;
        let p = match constraint {
            Some((m, eps)) => constrain(&p, &eps, m)?,
            None => p,
        };
        match p.check_default() {
            Ok(()) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Genericity("no generic draw".into())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub criterion: Option<u8>,
    pub n: Option<usize>,
    pub value: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub cond: Option<f64>,
    pub verdict: Verdict,
    pub detail: Option<String>,
}

impl Check {
    fn new(suite: &str, name: &str, criterion: Option<u8>, n: Option<usize>, value: f64, bound: Bound, tol: f64) -> Self {
        let ok = match bound {
            Bound::AtMost => value <= tol,
            Bound::AtLeast => value >= tol,
        };
        Self {
            suite: suite.into(),
            name: name.into(),
            criterion,
            n,
            value,
            bound,
            tolerance: tol,
            cond: None,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: None,
        }
    }

    pub fn at_most(suite: &str, name: &str, criterion: Option<u8>, n: Option<usize>, value: f64, tol: f64) -> Self {
        Self::new(suite, name, criterion, n, value, Bound::AtMost, tol)
    }

    pub fn at_least(suite: &str, name: &str, criterion: Option<u8>, n: Option<usize>, value: f64, tol: f64) -> Self {
        Self::new(suite, name, criterion, n, value, Bound::AtLeast, tol)
    }

    pub fn error(suite: &str, name: &str, criterion: Option<u8>, n: Option<usize>, err: &Error) -> Self {
        let mut c = Self::new(suite, name, criterion, n, f64::NAN, Bound::AtMost, 0.0);
        c.detail = Some(err.to_string());
        c
    }

    /// Records the condition number; a failure above the limit becomes inconclusive.
    pub fn with_cond(mut self, cond: f64) -> Self {
        self.cond = Some(cond);
        if self.verdict == Verdict::Fail && cond > COND_LIMIT {
            self.verdict = Verdict::Inconclusive;
        }
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

pub struct RunContext {
    pub config: Config,
    pub tol: Tolerances,
}

impl RunContext {
    pub fn new(config: Config) -> Self {
        let tol = config.tolerances.scaled(config.tolerance_scale);
        Self { config, tol }
    }

    pub fn sizes(&self, default: &[usize]) -> Vec<usize> {
        self.config.sizes.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Explicit model when its length matches, a seeded random draw otherwise.
    pub fn params(&self, label: &str, n: usize, constraint: Option<(usize, Eps)>) -> Result<ModelParams> {
        let p = match &self.config.model {
            Some(m) if m.xi.len() == n => {
                let p = ModelParams::new(
                    m.eta,
                    m.xi.clone(),
                    m.alpha_plus,
                    m.alpha_minus,
                    EllipticContext::with_omega(self.config.omega)?,
                )?;
                match constraint {
                    Some((mm, eps)) => constrain(&p, &eps, mm)?,
                    None => p,
                }
            }
            _ => generate_params(sub_seed(self.config.seed, label), n, self.config.omega, constraint)?,
        };
        if constraint.is_some() && self.config.break_constraint {
            let mut al = p.alphas();
            al[0] += C::new(0.037, 0.011);
            return Ok(p.with_alphas(al));
        }
        Ok(p)
    }
}

pub trait Suite: Named + Send + Sync {
    fn run(&self, rc: &RunContext) -> SuiteOutput;
}

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl SuiteOutput {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extra<T: Serialize>(&mut self, key: &str, v: &T) {
        if let Ok(j) = serde_json::to_value(v) {
            self.extras.insert(key.to_string(), j);
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub campaign: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub suites: Vec<String>,
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub extras: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.fail > 0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "suite", "name", "criterion", "n", "value", "bound", "tolerance", "cond", "verdict", "detail",
        ])?;
        for c in &self.checks {
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                c.suite.clone(),
                c.name.clone(),
                opt(c.criterion.map(|x| x.to_string())),
                opt(c.n.map(|x| x.to_string())),
                format!("{:e}", c.value),
                match c.bound {
                    Bound::AtMost => "<=".into(),
                    Bound::AtLeast => ">=".into(),
                },
                format!("{:e}", c.tolerance),
                opt(c.cond.map(|x| format!("{x:e}"))),
                format!("{:?}", c.verdict).to_uppercase(),
                opt(c.detail.clone()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Worst verdict per acceptance criterion.
    pub fn criteria(&self) -> BTreeMap<u8, Verdict> {
        let mut out = BTreeMap::new();
        for c in &self.checks {
            if let Some(k) = c.criterion {
                let e = out.entry(k).or_insert(Verdict::Pass);
                *e = match (*e, c.verdict) {
                    (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                    (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
                    _ => Verdict::Pass,
                };
            }
        }
        out
    }
}

pub fn run_campaign(config: Config) -> Result<Report> {
    config.validate()?;
    let reg = registry();
    let suites: Vec<&dyn Suite> = config
        .suites
        .iter()
        .map(|s| reg.get(s))
        .collect::<Result<_>>()?;
    let rc = RunContext::new(config.clone());
    log::info!("campaign `{}`: {} suite(s)", config.name, suites.len());
    let outputs: Vec<SuiteOutput> = suites
        .par_iter()
        .map(|s| {
            log::debug!("suite {}", s.name());
            s.run(&rc)
        })
        .collect();
    let mut checks = Vec::new();
    let mut extras = BTreeMap::new();
    for (s, o) in suites.iter().zip(outputs) {
        checks.extend(o.checks);
        for (k, v) in o.extras {
            extras.insert(format!("{}/{k}", s.name()), v);
        }
    }
    let mut summary = Summary::default();
    for c in &checks {
        match c.verdict {
            Verdict::Pass => summary.pass += 1,
            Verdict::Fail => summary.fail += 1,
            Verdict::Inconclusive => summary.inconclusive += 1,
        }
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        campaign: config.name.clone(),
        seed: config.seed,
        tolerance_scale: config.tolerance_scale,
        suites: config.suites.clone(),
        summary,
        checks,
        extras,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::constraint_offset;

    #[test]
    fn toml_with_complex_pairs() {
        let c = Config::from_toml_str(
            r#"
            name = "t"
            seed = 3
            suites = ["algebra"]
            omega = [0.0, 1.1]
            [model]
            eta = [0.3, 0.1]
            xi = [[0.1, 0.0], [-0.2, 0.05]]
            alpha_plus = [[0.5, 0.1], [-0.4, 0.2], [0.2, 0.6]]
            alpha_minus = [[0.3, -0.2], [-0.1, 0.3], [0.05, 0.8]]
            "#,
        )
        .unwrap();
        assert_eq!(c.omega, C::new(0.0, 1.1));
        assert_eq!(c.model.unwrap().xi[1], C::new(-0.2, 0.05));
        assert_eq!(c.scalar_draws, 3);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(matches!(Config::from_toml_str("suites = [\"nope\"]"), Err(Error::Unknown { .. })));
        assert!(matches!(Config::from_toml_str("sizes = [12]"), Err(Error::Resource(_))));
        assert!(matches!(Config::from_toml_str("colour = 1"), Err(Error::Toml(_))));
        assert!(Config::from_toml_str("eps = [1, 1, 1, 1, 1, 0]").is_err());
    }

    #[test]
    fn generation_is_deterministic_and_constrained() {
        let eps = [1, -1, 1, 1, -1, 1];
        let a = generate_params(5, 3, C::new(0.0, 0.8), Some((1, eps))).unwrap();
        let b = generate_params(5, 3, C::new(0.0, 0.8), Some((1, eps))).unwrap();
        assert_eq!(a, b);
        assert!(constraint_offset(&a, &eps, 1).unwrap().norm() < 1e-14);
        a.check_default().unwrap();
        let c = generate_params(6, 3, C::new(0.0, 0.8), None).unwrap();
        assert_ne!(a.xi, c.xi);
    }

    #[test]
    fn empty_campaign() {
        let cfg = Config {
            suites: vec![],
            ..Config::default()
        };
        let r = run_campaign(cfg).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.exit_code(), 0);
    }
}
