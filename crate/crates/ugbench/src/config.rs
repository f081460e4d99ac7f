//! Run configuration: flag/config-file merging and the small spec grammars
//! (`ppower:1.5`, `synthetic:100,50,7`, `gaussian:0.1`, `sgd:0.01`, ...).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use unigrad::oracle::OracleConfig;
use unigrad::solvers::{AdagradVariant, ReportPoint};

use crate::error::{CliError, CliResult};

pub const DEFAULT_STEP_GRID: [f64; 6] = [10.0, 1.0, 0.1, 0.01, 0.001, 0.0001];
pub const DEFAULT_DIAMETER_GRID: [f64; 5] = [50.0, 35.0, 20.0, 10.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    LeastSquares,
    Logistic,
    PPower(f64),
}

impl ProblemKind {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.split_once(':') {
            None if s == "ls" => Ok(ProblemKind::LeastSquares),
            None if s == "logistic" => Ok(ProblemKind::Logistic),
            Some(("ppower", p)) => {
                let p = parse_f64("ppower exponent", p)?;
                if !(1.0..=2.0).contains(&p) {
                    return Err(CliError::Config(format!(
                        "ppower exponent must be in [1, 2], got {p}"
                    )));
                }
                Ok(ProblemKind::PPower(p))
            }
            _ => Err(CliError::Config(format!(
                "unknown problem '{s}' (expected ls, logistic or ppower:P)"
            ))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::LeastSquares => write!(f, "ls"),
            ProblemKind::Logistic => write!(f, "logistic"),
            ProblemKind::PPower(p) => write!(f, "ppower:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Libsvm(PathBuf),
    /// `seed = None` falls back to the run's master seed.
    Synthetic {
        m: usize,
        n: usize,
        seed: Option<u64>,
    },
}

impl DataSource {
    pub fn parse(s: &str) -> CliResult<Self> {
        let Some(rest) = s.strip_prefix("synthetic:") else {
            if s.is_empty() {
                return Err(CliError::Config("empty data path".into()));
            }
            return Ok(DataSource::Libsvm(PathBuf::from(s)));
        };
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let bad = || CliError::Config(format!("expected synthetic:M,N[,SEED], got '{s}'"));
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let m: usize = parts[0].parse().map_err(|_| bad())?;
        let n: usize = parts[1].parse().map_err(|_| bad())?;
        if m == 0 || n == 0 {
            return Err(CliError::Config(format!(
                "synthetic dimensions must be >= 1, got {m}x{n}"
            )));
        }
        let seed = parts
            .get(2)
            .map(|p| p.parse().map_err(|_| bad()))
            .transpose()?;
        Ok(DataSource::Synthetic { m, n, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleSpec {
    Exact,
    Gaussian(f64),
    Minibatch(usize),
}

impl OracleSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.split_once(':') {
            None if s == "exact" => Ok(OracleSpec::Exact),
            Some(("gaussian", v)) => {
                let sigma = parse_f64("gaussian sigma", v)?;
                if sigma < 0.0 {
                    return Err(CliError::Config(format!("sigma must be >= 0, got {sigma}")));
                }
                Ok(OracleSpec::Gaussian(sigma))
            }
            Some(("minibatch", v)) => v
                .parse()
                .ok()
                .filter(|b| *b >= 1)
                .map(OracleSpec::Minibatch)
                .ok_or_else(|| CliError::Config(format!("invalid batch size '{v}'"))),
            _ => Err(CliError::Config(format!(
                "unknown oracle '{s}' (expected exact, gaussian:SIGMA or minibatch:B)"
            ))),
        }
    }

    pub fn with_seed(self, seed: u64) -> OracleConfig {
        match self {
            OracleSpec::Exact => OracleConfig::exact(),
            OracleSpec::Gaussian(sigma) => OracleConfig::gaussian(sigma, seed),
            OracleSpec::Minibatch(b) => OracleConfig::minibatch(b, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Ugm,
    Usgm,
    Usfgm,
    UsfgmDeterministic,
    /// `step = None` only in sweeps, where the grid supplies it.
    Sgd {
        step: Option<f64>,
        decaying: bool,
    },
    Adagrad(AdagradVariant),
}

impl SolverKind {
    pub fn parse(s: &str) -> CliResult<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let kind = match (name, rest.as_slice()) {
            ("ugm", []) => SolverKind::Ugm,
            ("usgm", []) => SolverKind::Usgm,
            ("usfgm", []) => SolverKind::Usfgm,
            ("usfgm-det", []) => SolverKind::UsfgmDeterministic,
            ("sgd", []) => SolverKind::Sgd {
                step: None,
                decaying: false,
            },
            ("sgd", ["decay"]) => SolverKind::Sgd {
                step: None,
                decaying: true,
            },
            ("sgd", [step]) => SolverKind::Sgd {
                step: Some(parse_step(step)?),
                decaying: false,
            },
            ("sgd", [step, "decay"]) => SolverKind::Sgd {
                step: Some(parse_step(step)?),
                decaying: true,
            },
            ("adagrad", []) | ("adagrad", ["grad_diff"]) => {
                SolverKind::Adagrad(AdagradVariant::GradDiff)
            }
            ("adagrad", ["grad_norm"]) => SolverKind::Adagrad(AdagradVariant::GradNorm),
            _ => {
                return Err(CliError::Config(format!(
                    "unknown solver '{s}' (expected ugm, usgm, usfgm, usfgm-det, \
                     sgd[:STEP][:decay] or adagrad[:grad_diff|grad_norm])"
                )))
            }
        };
        Ok(kind)
    }

    /// Name used in file names and CSV columns.
    pub fn label(&self) -> String {
        match self {
            SolverKind::Ugm => "ugm".into(),
            SolverKind::Usgm => "usgm".into(),
            SolverKind::Usfgm => "usfgm".into(),
            SolverKind::UsfgmDeterministic => "usfgm-det".into(),
            SolverKind::Sgd { step, decaying } => {
                let rule = if *decaying { "sgd-decay" } else { "sgd" };
                match step {
                    Some(s) => format!("{rule}-{s}"),
                    None => rule.into(),
                }
            }
            SolverKind::Adagrad(AdagradVariant::GradDiff) => "adagrad-grad_diff".into(),
            SolverKind::Adagrad(AdagradVariant::GradNorm) => "adagrad-grad_norm".into(),
        }
    }
}

/// Settings that a config-file section may override per solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub problem: ProblemKind,
    pub data: DataSource,
    pub normalize: bool,
    pub radius: f64,
    /// Diagonal of the metric matrix; identity when absent.
    pub b_diag: Option<Vec<f64>>,
    pub diameter: Option<f64>,
    pub oracle: OracleSpec,
    pub iters: usize,
    pub trace_every: usize,
    pub report: ReportPoint,
}

impl Settings {
    pub fn diameter(&self) -> f64 {
        self.diameter.unwrap_or(2.0 * self.radius)
    }

    /// Everything that defines the problem instance and oracle, for compare.
    pub fn same_problem(&self, other: &Settings) -> bool {
        self.problem == other.problem
            && self.data == other.data
            && self.normalize == other.normalize
            && self.radius == other.radius
            && self.b_diag == other.b_diag
            && self.oracle == other.oracle
            && self.iters == other.iters
            && self.trace_every == other.trace_every
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverEntry {
    pub solver: SolverKind,
    pub settings: Settings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub entries: Vec<SolverEntry>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub jobs: usize,
    pub steps: Vec<f64>,
    pub diameters: Vec<f64>,
}

/// Raw `key = value` pairs: top-level keys plus one map per `[section]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: Vec<(String, BTreeMap<String, String>)>,
}

const GLOBAL_KEYS: &[&str] = &[
    "problem",
    "data",
    "normalize",
    "radius",
    "b_diag",
    "D",
    "solver",
    "oracle",
    "iters",
    "trace_every",
    "report",
    "seeds",
    "out",
    "jobs",
    "steps",
    "diameters",
];
const SECTION_KEYS: &[&str] = &[
    "solver",
    "problem",
    "data",
    "normalize",
    "radius",
    "b_diag",
    "D",
    "oracle",
    "iters",
    "trace_every",
    "report",
];

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = ConfigFile::default();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Config(format!("config line {}: {msg}", i + 1));
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| at(format!("malformed section header '{line}'")))?;
                cfg.sections.push((name.to_string(), BTreeMap::new()));
                current = Some(cfg.sections.len() - 1);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let (allowed, map) = match current {
                None => (GLOBAL_KEYS, &mut cfg.global),
                Some(s) => (SECTION_KEYS, &mut cfg.sections[s].1),
            };
            if !allowed.contains(&key) {
                return Err(at(format!("unknown key '{key}'")));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(at(format!("duplicate key '{key}'")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Values given on the command line; they take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub data: Option<String>,
    pub normalize: bool,
    pub radius: Option<f64>,
    pub b_diag: Option<String>,
    pub diameter: Option<f64>,
    pub solvers: Vec<String>,
    pub oracle: Option<String>,
    pub iters: Option<usize>,
    pub trace_every: Option<usize>,
    pub report: Option<String>,
    pub seeds: Option<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub steps: Option<String>,
    pub diameters: Option<String>,
}

impl RunConfig {
    /// Merges defaults, the config file and command-line overrides.
    /// `env_seed` is the `UGBENCH_SEED` fallback used when no seeds are given.
    pub fn resolve(file: &ConfigFile, cli: &Overrides, env_seed: Option<&str>) -> CliResult<Self> {
        let get = |key: &str| file.global.get(key).map(String::as_str);

        let mut base = BTreeMap::new();
        for key in SECTION_KEYS {
            if let Some(v) = get(key) {
                base.insert(key.to_string(), v.to_string());
            }
        }
        let cli_pairs: [(&str, Option<String>); 9] = [
            ("problem", cli.problem.clone()),
            ("data", cli.data.clone()),
            ("radius", cli.radius.map(|v| v.to_string())),
            ("b_diag", cli.b_diag.clone()),
            ("D", cli.diameter.map(|v| v.to_string())),
            ("oracle", cli.oracle.clone()),
            ("iters", cli.iters.map(|v| v.to_string())),
            ("trace_every", cli.trace_every.map(|v| v.to_string())),
            ("report", cli.report.clone()),
        ];
        for (k, v) in cli_pairs.iter() {
            if let Some(v) = v {
                base.insert(k.to_string(), v.clone());
            }
        }
        if cli.normalize {
            base.insert("normalize".into(), "true".into());
        }

        let mut entries = Vec::new();
        if !cli.solvers.is_empty() || file.sections.is_empty() {
            let list: Vec<String> = if cli.solvers.is_empty() {
                get("solver").map(split_list).unwrap_or_default()
            } else {
                cli.solvers.iter().flat_map(|s| split_list(s)).collect()
            };
            if list.is_empty() {
                return Err(CliError::Config("no solver given".into()));
            }
            for name in list {
                entries.push(SolverEntry {
                    solver: SolverKind::parse(&name)?,
                    settings: settings_from(&base)?,
                });
            }
        } else {
            for (name, map) in &file.sections {
                let mut merged = base.clone();
                for (k, v) in map {
                    // Command-line values still win over section values.
                    let from_cli = cli_pairs.iter().any(|(ck, cv)| ck == k && cv.is_some());
                    if !from_cli {
                        merged.insert(k.clone(), v.clone());
                    }
                }
                let solver = merged.remove("solver").unwrap_or_else(|| name.clone());
                entries.push(SolverEntry {
                    solver: SolverKind::parse(&solver)?,
                    settings: settings_from(&merged)?,
                });
            }
        }

        let seeds = match cli.seeds.as_deref().or(get("seeds")) {
            Some(list) => parse_list(list, "seed", |s| s.parse::<u64>().ok())?,
            None => match env_seed {
                Some(s) => vec![s.trim().parse().map_err(|_| {
                    CliError::Config(format!(
                        "UGBENCH_SEED must be an unsigned integer, got '{s}'"
                    ))
                })?],
                None => vec![0],
            },
        };
        if seeds.is_empty() {
            return Err(CliError::Config("seed list is empty".into()));
        }

        let out = cli
            .out
            .clone()
            .or_else(|| get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("ugbench_out"));
        let jobs = match cli.jobs {
            Some(j) => j,
            None => get("jobs")
                .map(|j| parse_usize("jobs", j))
                .transpose()?
                .unwrap_or(1),
        };
        if jobs == 0 {
            return Err(CliError::Config("jobs must be >= 1".into()));
        }
        let steps = match cli.steps.as_deref().or(get("steps")) {
            Some(list) => parse_list(list, "step", |s| {
                s.parse::<f64>().ok().filter(|v| *v >= 0.0)
            })?,
            None => DEFAULT_STEP_GRID.to_vec(),
        };
        let diameters = match cli.diameters.as_deref().or(get("diameters")) {
            Some(list) => parse_list(list, "diameter", |s| {
                s.parse::<f64>().ok().filter(|v| *v > 0.0)
            })?,
            None => DEFAULT_DIAMETER_GRID.to_vec(),
        };

        Ok(RunConfig {
            entries,
            seeds,
            out,
            jobs,
            steps,
            diameters,
        })
    }
}

fn settings_from(map: &BTreeMap<String, String>) -> CliResult<Settings> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let radius = get("radius")
        .map(|v| parse_f64("radius", v))
        .transpose()?
        .unwrap_or(1.0);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Config(format!(
            "radius must be > 0, got {radius}"
        )));
    }
    let b_diag = get("b_diag")
        .map(|v| {
            parse_list(v, "b_diag entry", |s| {
                s.parse::<f64>().ok().filter(|b| *b > 0.0 && b.is_finite())
            })
        })
        .transpose()?;
    if b_diag.as_ref().is_some_and(Vec::is_empty) {
        return Err(CliError::Config("b_diag is empty".into()));
    }
    let diameter = get("D").map(|v| parse_f64("D", v)).transpose()?;
    if let Some(d) = diameter {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Config(format!("D must be > 0, got {d}")));
        }
    }
    let iters = get("iters")
        .map(|v| parse_usize("iters", v))
        .transpose()?
        .unwrap_or(1000);
    let trace_every = get("trace_every")
        .map(|v| parse_usize("trace_every", v))
        .transpose()?
        .unwrap_or(1);
    if trace_every == 0 {
        return Err(CliError::Config("trace_every must be >= 1".into()));
    }
    let report = match get("report").unwrap_or("average") {
        "average" => ReportPoint::Average,
        "last" => ReportPoint::Last,
        other => {
            return Err(CliError::Config(format!(
                "report must be average or last, got '{other}'"
            )))
        }
    };
    let normalize = match get("normalize").unwrap_or("false") {
        "true" | "1" | "yes" => true,
        "false" | "0" | "no" => false,
        other => {
            return Err(CliError::Config(format!(
                "normalize must be true or false, got '{other}'"
            )))
        }
    };
    Ok(Settings {
        problem: ProblemKind::parse(get("problem").unwrap_or("ls"))?,
        data: DataSource::parse(get("data").unwrap_or("synthetic:100,50"))?,
        normalize,
        radius,
        b_diag,
        diameter,
        oracle: OracleSpec::parse(get("oracle").unwrap_or("exact"))?,
        iters,
        trace_every,
        report,
    })
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

fn parse_list<T>(s: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> CliResult<Vec<T>> {
    split_list(s)
        .iter()
        .map(|p| parse(p).ok_or_else(|| CliError::Config(format!("invalid {what} '{p}'"))))
        .collect()
}

fn parse_f64(what: &str, s: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Config(format!("invalid {what} '{s}'")))
}

fn parse_step(s: &str) -> CliResult<f64> {
    let v = parse_f64("step size", s)?;
    if v < 0.0 {
        return Err(CliError::Config(format!("step size must be >= 0, got {v}")));
    }
    Ok(v)
}

fn parse_usize(what: &str, s: &str) -> CliResult<usize> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid {what} '{s}'")))
}
