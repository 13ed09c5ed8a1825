//! Run configuration: defaults, `key=value` files and flag overrides.
//!
//! File format: one `key = value` per line; blank lines and lines starting
//! with `#` are ignored. Keys mirror the long flags (`K`, `I`, `N`, `t_end`,
//! ...). The keys `t_end`, `cfl` and `flux` may also be scoped to a problem,
//! e.g. `burgers.t_end = 3`; a scoped key beats the plain one when that
//! problem is selected. Flags beat both.
//!
//! A study CSV written by this tool is also accepted: its leading `# key=value`
//! lines are the resolved configuration of the study.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dgdls::diagnostics::{RunOptions, StudyColumn, StudySpec};
use dgdls::error::{Error, Result};
use dgdls::flux::NumericalFluxKind;
use dgdls::nodes::NodeKind;
use dgdls::operator::RulePolicy;
use dgdls::problems::{Problem, ProblemKind};
use dgdls::solver::{NRule, Setup, DEFAULT_POLICY};
use dgdls::time::DEFAULT_CFL;

pub const SEED_ENV: &str = "DGDLS_SEED";

/// Every key a config file may set, in the order they are written back.
pub const KEYS: &[&str] = &[
    "problem",
    "K",
    "I",
    "N",
    "nodes",
    "seed",
    "flux",
    "cfl",
    "t_end",
    "policy",
    "dgsem",
    "entropy_correction",
    "freeze_lambda",
    "observer_stride",
    "degrees",
    "elements",
    "columns",
    "trace",
    "output",
    "threads",
];

const SCOPED_KEYS: &[&str] = &["t_end", "cfl", "flux"];

/// Header line of study CSV files; marks a file as a replayable study.
pub const STUDY_CSV_HEADER: &str = "problem,nodes,K,I,N,error,eoc";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub degree: usize,
    pub n_elements: usize,
    pub n_rule: NRule,
    pub nodes: NodeKind,
    pub seed: u64,
    pub flux: NumericalFluxKind,
    pub cfl: f64,
    pub t_end: f64,
    pub policy: RulePolicy,
    pub dgsem: bool,
    pub entropy_correction: bool,
    pub freeze_lambda: bool,
    pub observer_stride: usize,
    pub degrees: Vec<usize>,
    pub elements: Vec<usize>,
    pub columns: Vec<StudyColumn>,
    pub trace: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// A raw value and the file line it came from, if any.
#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Unresolved key-value settings from a file and from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    file: BTreeMap<String, Entry>,
    flags: BTreeMap<String, Entry>,
}

fn valid_keys() -> String {
    let scoped: Vec<String> = SCOPED_KEYS.iter().map(|k| format!("<problem>.{k}")).collect();
    format!("{}, {}", KEYS.join(", "), scoped.join(", "))
}

fn check_key(key: &str) -> std::result::Result<(), String> {
    if KEYS.contains(&key) {
        return Ok(());
    }
    if let Some((problem, inner)) = key.split_once('.') {
        if ProblemKind::from_str(problem).is_ok() && SCOPED_KEYS.contains(&inner) {
            return Ok(());
        }
    }
    Err(format!("unknown key '{key}'; valid keys: {}", valid_keys()))
}

impl RawConfig {
    /// Parses `key=value` text. A study CSV is recognized by its column
    /// header and only its `#` preamble is read.
    pub fn parse(text: &str) -> Result<Self> {
        let is_study = text.lines().any(|l| l.trim() == STUDY_CSV_HEADER);
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            let body = if is_study {
                if trimmed == STUDY_CSV_HEADER {
                    break;
                }
                match trimmed.strip_prefix('#') {
                    Some(rest) => rest.trim(),
                    None => continue,
                }
            } else {
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                trimmed
            };
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected 'key = value', got '{body}'"),
            })?;
            let key = key.trim();
            check_key(key).map_err(|message| Error::Parse { line: line_no, message })?;
            let entry = Entry { value: value.trim().to_string(), line: Some(line_no) };
            if raw.file.insert(key.to_string(), entry).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        RawConfig::parse(&text)
    }

    /// Records a command-line setting; flags override file values.
    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key).map_err(Error::Configuration)?;
        self.flags.insert(key.to_string(), Entry { value: value.into(), line: None });
        Ok(())
    }

    fn lookup(&self, key: &str, problem: Option<ProblemKind>) -> Option<&Entry> {
        if let Some(e) = self.flags.get(key) {
            return Some(e);
        }
        if let Some(p) = problem {
            if let Some(e) = self.file.get(&format!("{}.{key}", p.name())) {
                return Some(e);
            }
        }
        self.file.get(key)
    }

    fn get<T>(&self, key: &str, problem: Option<ProblemKind>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.lookup(key, problem) {
            None => Ok(default),
            Some(entry) => entry.value.parse::<T>().map_err(|e| {
                let message = format!("bad value '{}' for {key}: {e}", entry.value);
                match entry.line {
                    Some(line) => Error::Parse { line, message },
                    None => Error::Configuration(message),
                }
            }),
        }
    }

    fn get_list<T>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let list: List<T> = self.get(key, None, List(default))?;
        Ok(list.0)
    }

    /// Applies defaults and validates. `env_seed` is the value of
    /// [`SEED_ENV`], used when no seed is configured.
    pub fn resolve(&self, env_seed: Option<&str>) -> Result<RunConfig> {
        let problem: ProblemKind = self.get("problem", None, ProblemKind::Advection)?;
        let p = Some(problem);
        let seed = match (self.lookup("seed", None), env_seed) {
            (None, Some(env)) => env.trim().parse::<u64>().map_err(|e| {
                Error::Configuration(format!("bad {SEED_ENV} value '{env}': {e}"))
            })?,
            _ => self.get("seed", None, 1u64)?,
        };
        let cfg = RunConfig {
            problem,
            degree: self.get("K", None, 3usize)?,
            n_elements: self.get("I", None, 10usize)?,
            n_rule: self.get("N", None, NRule::TimesK(2))?,
            nodes: self.get("nodes", None, NodeKind::Equidistant)?,
            seed,
            flux: self.get("flux", p, problem.default_flux())?,
            cfl: self.get("cfl", p, DEFAULT_CFL)?,
            t_end: self.get("t_end", p, problem.default_t_end())?,
            policy: self.get("policy", None, DEFAULT_POLICY)?,
            dgsem: self.get("dgsem", None, false)?,
            entropy_correction: self.get("entropy_correction", None, false)?,
            freeze_lambda: self.get("freeze_lambda", None, false)?,
            observer_stride: self.get("observer_stride", None, 1usize)?,
            degrees: self.get_list("degrees", vec![1, 2, 3, 4])?,
            elements: self.get_list("elements", vec![5, 10, 20, 40])?,
            columns: self
                .get_list("columns", StudyColumn::standard().into_iter().map(Column).collect())?
                .into_iter()
                .map(|c| c.0)
                .collect(),
            trace: self.lookup("trace", None).map(|e| PathBuf::from(&e.value)),
            output: self.lookup("output", None).map(|e| PathBuf::from(&e.value)),
            threads: self.lookup("threads", None).map(|_| self.get("threads", None, 0usize)).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Comma-separated list value.
struct List<T>(Vec<T>);

impl<T> FromStr for List<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|item| item.trim().parse::<T>().map_err(|e| format!("'{}': {e}", item.trim())))
            .collect::<std::result::Result<Vec<T>, String>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&items.join(","))
    }
}

/// Study column as written in configs: `dgsem` or an `N` rule.
struct Column(StudyColumn);

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("dgsem") {
            Ok(Column(StudyColumn::Dgsem))
        } else {
            Ok(Column(StudyColumn::Dgdls(s.parse()?)))
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            StudyColumn::Dgsem => f.write_str("dgsem"),
            StudyColumn::Dgdls(rule) => write!(f, "{rule}"),
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Configuration(msg));
        if self.degree == 0 {
            return bad("K must be at least 1".into());
        }
        if self.n_elements == 0 {
            return bad("I must be at least 1".into());
        }
        if !self.dgsem && self.n_rule.resolve(self.degree) < self.degree {
            return bad(format!(
                "N = {} must be >= K = {}",
                self.n_rule.resolve(self.degree),
                self.degree
            ));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return bad(format!("cfl must be positive, got {}", self.cfl));
        }
        if self.observer_stride == 0 {
            return bad("observer_stride must be >= 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        if self.degrees.iter().any(|&k| k == 0) || self.elements.iter().any(|&i| i == 0) {
            return bad("degrees and elements must be positive".into());
        }
        if let Some(StudyColumn::Dgdls(rule)) = self
            .columns
            .iter()
            .find(|c| matches!(c, StudyColumn::Dgdls(r) if self.degrees.iter().any(|&k| r.resolve(k) < k)))
        {
            return bad(format!("study column N = {rule} is below K for some degree"));
        }
        if self.problem.is_2d() {
            if self.entropy_correction {
                return bad("entropy correction is 1D only".into());
            }
        } else {
            Problem::new(self.problem, self.flux)?;
        }
        Ok(())
    }

    pub fn setup(&self) -> Setup {
        let mut setup = if self.dgsem {
            Setup::dgsem(self.problem, self.degree, self.n_elements)
        } else {
            Setup::new(self.problem, self.degree, self.n_elements, self.n_rule)
                .with_nodes(self.nodes, self.seed)
        };
        setup.flux = self.flux;
        setup.policy = self.policy;
        setup.entropy_correction = self.entropy_correction;
        setup
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            t_end: self.t_end,
            cfl: self.cfl,
            freeze_lambda: self.freeze_lambda,
            observer_stride: self.observer_stride,
        }
    }

    pub fn study_spec(&self) -> StudySpec {
        StudySpec {
            problem: self.problem,
            degrees: self.degrees.clone(),
            elements: self.elements.clone(),
            columns: self.columns.clone(),
            nodes: self.nodes,
            seed: self.seed,
            flux: self.flux,
            policy: self.policy,
            entropy_correction: self.entropy_correction,
            options: self.run_options(),
        }
    }

    /// The fully resolved settings as `(key, value)` pairs that parse back to
    /// this configuration. Output paths and thread count are left out.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let columns: Vec<Column> = self.columns.iter().map(|&c| Column(c)).collect();
        let pairs: Vec<(&str, String)> = vec![
            ("problem", self.problem.to_string()),
            ("K", self.degree.to_string()),
            ("I", self.n_elements.to_string()),
            ("N", self.n_rule.to_string()),
            ("nodes", self.nodes.to_string()),
            ("seed", self.seed.to_string()),
            ("flux", self.flux.to_string()),
            ("cfl", format!("{:?}", self.cfl)),
            ("t_end", format!("{:?}", self.t_end)),
            ("policy", self.policy.to_string()),
            ("dgsem", self.dgsem.to_string()),
            ("entropy_correction", self.entropy_correction.to_string()),
            ("freeze_lambda", self.freeze_lambda.to_string()),
            ("observer_stride", self.observer_stride.to_string()),
            ("degrees", List(self.degrees.clone()).to_string()),
            ("elements", List(self.elements.clone()).to_string()),
            ("columns", List(columns).to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<RunConfig> {
        RawConfig::parse(text)?.resolve(None)
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = resolve("").unwrap();
        assert_eq!(cfg.problem, ProblemKind::Advection);
        assert_eq!(cfg.cfl, 0.1);
        assert_eq!(cfg.flux, NumericalFluxKind::FullUpwind);
        assert_eq!(cfg.t_end, 1.0);
        assert_eq!(cfg.n_rule, NRule::TimesK(2));
        assert_eq!(cfg.policy, DEFAULT_POLICY);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.columns, StudyColumn::standard());
    }

    #[test]
    fn per_problem_defaults() {
        let cfg = resolve("problem = burgers").unwrap();
        assert_eq!(cfg.flux, NumericalFluxKind::LocalLaxFriedrichs);
        let cfg = resolve("problem = wave").unwrap();
        assert_eq!(cfg.t_end, 10.0);
        assert_eq!(cfg.flux, NumericalFluxKind::WaveUpwind);
    }

    #[test]
    fn flags_override_file() {
        let mut raw = RawConfig::parse("K = 4\nI = 7\n").unwrap();
        raw.set_flag("K", "2").unwrap();
        let cfg = raw.resolve(None).unwrap();
        assert_eq!(cfg.degree, 2);
        assert_eq!(cfg.n_elements, 7);
    }

    #[test]
    fn scoped_keys() {
        let text = "problem = burgers\nt_end = 0.5\nburgers.t_end = 3\nwave.t_end = 7";
        assert_eq!(resolve(text).unwrap().t_end, 3.0);
        let text = "problem = advection\nt_end = 0.5\nburgers.t_end = 3";
        assert_eq!(resolve(text).unwrap().t_end, 0.5);
        let mut raw = RawConfig::parse("problem = burgers\nburgers.t_end = 3").unwrap();
        raw.set_flag("t_end", "2").unwrap();
        assert_eq!(raw.resolve(None).unwrap().t_end, 2.0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match RawConfig::parse("K = 3\n\n# note\nthis is not a pair\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match resolve("K = 3\nI = ten\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("ten"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        match RawConfig::parse("K = 3\ncourant = 0.2\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("courant"));
                assert!(message.contains("cfl") && message.contains("t_end"));
            }
            other => panic!("{other:?}"),
        }
        assert!(RawConfig::parse("heat.t_end = 1").is_err());
        assert!(RawConfig::default().set_flag("bogus", "1").is_err());
    }

    #[test]
    fn validation() {
        assert!(resolve("K = 3\nN = 2").is_err());
        assert!(resolve("K = 3\nN = 2\ndgsem = true").is_ok());
        assert!(resolve("t_end = -1").is_err());
        assert!(resolve("nodes = hexagonal").is_err());
        assert!(resolve("problem = burgers\nflux = upwind").is_err());
        assert!(resolve("problem = advection2d\nentropy_correction = true").is_err());
        assert!(resolve("degrees = 1,2\ncolumns = 1").is_err());
        assert!(resolve("columns = dgsem, K, 8").is_ok());
    }

    #[test]
    fn seed_env_fallback() {
        let raw = RawConfig::parse("").unwrap();
        assert_eq!(raw.resolve(Some("42")).unwrap().seed, 42);
        let raw = RawConfig::parse("seed = 7").unwrap();
        assert_eq!(raw.resolve(Some("42")).unwrap().seed, 7);
        assert!(RawConfig::default().resolve(Some("x")).is_err());
    }

    #[test]
    fn pairs_round_trip() {
        let text = "problem = burgers\nK = 2\nN = 4K\nnodes = scattered\nseed = 9\ncfl = 0.05\n\
                    t_end = 0.3\ncolumns = dgsem,K,12\ndegrees = 2,3\nelements = 4,8\n";
        let cfg = resolve(text).unwrap();
        let back: String = cfg.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        assert_eq!(resolve(&back).unwrap(), cfg);
    }

    #[test]
    fn study_csv_preamble_is_a_config() {
        let cfg = resolve("problem = wave\nK = 2\nelements = 3,6").unwrap();
        let mut csv: String = cfg.to_pairs().iter().map(|(k, v)| format!("# {k}={v}\n")).collect();
        csv.push_str(STUDY_CSV_HEADER);
        csv.push_str("\nwave,equidistant,2,3,4,1e-3,NaN\n");
        assert_eq!(resolve(&csv).unwrap(), cfg);
    }
}
