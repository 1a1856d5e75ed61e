//! Line-oriented `key = value` configuration.
//!
//! ```text
//! # harmonic oscillator, n = 1; variables are q_1..q_n, p_1..p_n
//! hamiltonian = 1/2:2,0; 1/2:0,2
//! seed = 7
//! epsilon = 1, 1/2, 1e-6
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use superkvn::kvn::GridSpec;
use superkvn::phase_flow::Observable;
use superkvn::poly::Poly;
use superkvn::ring::{qi_complex, qi_from_f64, rat, Qi, Ring};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Algebra,
    Supergeometry,
    Dynamics,
    Superfield,
    Kvn,
    Kernels,
    Vierbein,
    All,
}

impl Suite {
    /// Every concrete suite, in the order `all` runs them.
    pub const EACH: [Suite; 7] = [
        Suite::Algebra,
        Suite::Supergeometry,
        Suite::Dynamics,
        Suite::Superfield,
        Suite::Kvn,
        Suite::Kernels,
        Suite::Vierbein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Supergeometry => "supergeometry",
            Suite::Dynamics => "dynamics",
            Suite::Superfield => "superfield",
            Suite::Kvn => "kvn",
            Suite::Kernels => "kernels",
            Suite::Vierbein => "vierbein",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Suite::from_str(s, true).map_err(|_| CliError::Config(format!("unknown suite `{s}`")))
    }

    /// Concrete suites covered by this one.
    pub fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            Suite::EACH.to_vec()
        } else {
            vec![self]
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A number kept together with the text it was written as, so the config
/// echo reproduces the input exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Exact {
    pub text: String,
    pub value: Qi,
}

impl Exact {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let text = s.trim().to_string();
        let value = if text.contains('/') || !text.contains(['.', 'e', 'E']) {
            parse_rational(&text).ok_or_else(|| CliError::Config(format!("bad rational `{text}`")))?
        } else {
            let x: f64 = text
                .parse()
                .map_err(|_| CliError::Config(format!("bad number `{text}`")))?;
            if !x.is_finite() {
                return Err(CliError::Config(format!("non-finite number `{text}`")));
            }
            qi_from_f64(x)
        };
        Ok(Exact { text, value })
    }

    pub fn is_one(&self) -> bool {
        self.value == <Qi as Ring>::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// ODE-based checks (ghost transport, symplecticity, composition).
    pub flow: f64,
    /// KvN wave evolution against closed forms and norm drift.
    pub kvn: f64,
    /// Discretized kernel against the Mehler oracle.
    pub kernel: f64,
    /// Relative action deviation in the small-ε limit.
    pub action: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            flow: 1e-8,
            kvn: 1e-3,
            kernel: 1e-3,
            action: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    pub hamiltonian: Observable,
    /// Random samples per randomized check.
    pub samples: usize,
    pub path_degree: u32,
    pub grid: GridSpec,
    pub slices: usize,
    pub kernel_time: f64,
    pub omega: f64,
    pub epsilon: Vec<Exact>,
    pub hbar: Exact,
    pub tolerances: Tolerances,
    pub out: PathBuf,
}

pub const DEFAULT_OUT: &str = "superkvn-out";

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        SuiteConfig {
            suite,
            seed: 42,
            hamiltonian: Observable::harmonic_oscillator(),
            samples: 20,
            path_degree: 3,
            grid: GridSpec {
                dt: FRAC_PI_4,
                total_time: 2.0 * PI,
                ..GridSpec::square(6.0, 256)
            },
            slices: 4096,
            kernel_time: 1.0,
            omega: 1.0,
            epsilon: ["1", "1/2", "1/10", "1/1000", "1/1000000"]
                .iter()
                .map(|s| Exact::parse(s).unwrap())
                .collect(),
            hbar: Exact::parse("1").unwrap(),
            tolerances: Tolerances::default(),
            out: PathBuf::from(DEFAULT_OUT),
        }
    }

    pub fn load(path: &Path, suite: Suite) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = SuiteConfig::new(suite);
        cfg.apply(&parse_lines(&text)?)?;
        Ok(cfg)
    }

    /// Applies `key = value` pairs on top of the current values.
    pub fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<(), CliError> {
        let mut grid_n = self.grid.nq;
        let mut extent = self.grid.q_max;
        for (k, v) in entries {
            let bad = || CliError::Config(format!("bad value for `{k}`: `{v}`"));
            match k.as_str() {
                "suite" => self.suite = Suite::parse(v)?,
                "seed" => self.seed = v.parse().map_err(|_| bad())?,
                "samples" => self.samples = v.parse().map_err(|_| bad())?,
                "path_degree" => self.path_degree = v.parse().map_err(|_| bad())?,
                "grid_n" => grid_n = v.parse().map_err(|_| bad())?,
                "grid_extent" => extent = v.parse().map_err(|_| bad())?,
                "dt" => self.grid.dt = v.parse().map_err(|_| bad())?,
                "total_time" => self.grid.total_time = v.parse().map_err(|_| bad())?,
                "slices" => self.slices = v.parse().map_err(|_| bad())?,
                "kernel_time" => self.kernel_time = v.parse().map_err(|_| bad())?,
                "omega" => self.omega = v.parse().map_err(|_| bad())?,
                "hbar" => self.hbar = Exact::parse(v)?,
                "epsilon" => {
                    self.epsilon = v.split(',').map(Exact::parse).collect::<Result<_, _>>()?;
                }
                "tol_flow" => self.tolerances.flow = v.parse().map_err(|_| bad())?,
                "tol_kvn" => self.tolerances.kvn = v.parse().map_err(|_| bad())?,
                "tol_kernel" => self.tolerances.kernel = v.parse().map_err(|_| bad())?,
                "tol_action" => self.tolerances.action = v.parse().map_err(|_| bad())?,
                "hamiltonian" => self.hamiltonian = parse_hamiltonian(v)?,
                "out" => self.out = PathBuf::from(v),
                _ => return Err(CliError::Config(format!("unknown key `{k}`"))),
            }
        }
        self.grid = GridSpec {
            dt: self.grid.dt,
            total_time: self.grid.total_time,
            ..GridSpec::square(extent, grid_n)
        };
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [("tol_flow", t.flow), ("tol_kvn", t.kvn), ("tol_kernel", t.kernel), ("tol_action", t.action)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.grid
            .validate()
            .map_err(|e| CliError::Config(format!("grid: {e}")))?;
        if self.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if self.slices < 8 {
            return Err(CliError::Config("slices must be at least 8".into()));
        }
        if !(self.kernel_time > 0.0 && self.omega > 0.0) {
            return Err(CliError::Config("kernel_time and omega must be positive".into()));
        }
        if self.epsilon.is_empty() || self.epsilon.iter().any(|e| e.value.is_zero()) {
            return Err(CliError::Config("epsilon needs at least one nonzero value".into()));
        }
        if self.hbar.value.is_zero() {
            return Err(CliError::Config("hbar must be nonzero".into()));
        }
        Ok(())
    }

    /// The effective configuration as `key = value` pairs; feeding it back
    /// through [`SuiteConfig::apply`] reproduces this config. The output
    /// directory is left out so reports do not depend on where they are written.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let t = &self.tolerances;
        let pairs = [
            ("suite", self.suite.to_string()),
            ("seed", self.seed.to_string()),
            ("hamiltonian", format_hamiltonian(&self.hamiltonian)),
            ("samples", self.samples.to_string()),
            ("path_degree", self.path_degree.to_string()),
            ("grid_n", self.grid.nq.to_string()),
            ("grid_extent", self.grid.q_max.to_string()),
            ("dt", self.grid.dt.to_string()),
            ("total_time", self.grid.total_time.to_string()),
            ("slices", self.slices.to_string()),
            ("kernel_time", self.kernel_time.to_string()),
            ("omega", self.omega.to_string()),
            (
                "epsilon",
                self.epsilon.iter().map(|e| e.text.as_str()).collect::<Vec<_>>().join(", "),
            ),
            ("hbar", self.hbar.text.clone()),
            ("tol_flow", t.flow.to_string()),
            ("tol_kvn", t.kvn.to_string()),
            ("tol_kernel", t.kernel.to_string()),
            ("tol_action", t.action.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_lines(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", no + 1)));
        }
    }
    Ok(out)
}

/// `coef:e_1,…,e_2n; …`. Exponents run over `q_1..q_n, p_1..p_n`; the
/// number of exponents fixes `n` and must be even and the same in every term.
pub fn parse_hamiltonian(s: &str) -> Result<Observable, CliError> {
    let bad = |m: String| CliError::Config(format!("hamiltonian: {m}"));
    let mut terms = Vec::new();
    let mut width = None;
    for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let (c, exps) = term
            .split_once(':')
            .ok_or_else(|| bad(format!("term `{term}` is not `coef:exponents`")))?;
        let c = parse_rational(c.trim()).ok_or_else(|| bad(format!("bad coefficient `{c}`")))?;
        let exps = exps
            .split(',')
            .map(|e| e.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad(format!("bad exponents in `{term}`")))?;
        if *width.get_or_insert(exps.len()) != exps.len() {
            return Err(bad("terms have different numbers of exponents".into()));
        }
        terms.push((exps, c));
    }
    let width = width.ok_or_else(|| bad("no terms".into()))?;
    if width == 0 || width % 2 != 0 {
        return Err(bad("need 2n exponents per term".into()));
    }
    let h = Observable::new(width / 2, Poly::from_terms(terms)).map_err(|e| bad(e.to_string()))?;
    if (0..width).all(|a| h.derivative(a).is_zero()) {
        return Err(bad("constant Hamiltonian generates no flow".into()));
    }
    Ok(h)
}

pub fn format_hamiltonian(h: &Observable) -> String {
    let width = h.dim();
    h.poly()
        .terms()
        .map(|(m, c)| {
            let exps: Vec<String> = (0..width).map(|i| m.exponent(i).to_string()).collect();
            format!("{}:{}", c.re, exps.join(","))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// `a` or `a/b` with integer `a, b` as a real element of `Q(i)`.
fn parse_rational(s: &str) -> Option<Qi> {
    s.trim().parse().ok().map(|r| qi_complex(r, rat(0, 1)))
}
