//! Experiment configuration: a flat JSON file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::Parser;
use cuberoute_core::far::FarParams;
use cuberoute_core::harness::{CaseSpec, Execution, RouterKind, DEFAULT_RUNS};
use cuberoute_core::report::OutputFormat;
use cuberoute_core::route::default_max_hops;
use cuberoute_core::safety::UnsafeRule;
use cuberoute_core::topology::Hypercube;
use serde::Deserialize;

pub const SEED_ENV: &str = "CUBEROUTE_SEED";

/// A configuration problem, naming the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Run Monte Carlo fault-tolerant routing experiments on hypercubes.
#[derive(Debug, Default, Parser)]
#[command(name = "cuberoute", version, about)]
pub struct Args {
    /// Flat JSON configuration file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Network dimensions to sweep.
    #[arg(long, value_name = "N", value_delimiter = ',')]
    pub dimension: Option<Vec<u32>>,
    /// Fault counts to sweep.
    #[arg(
        long,
        value_name = "K",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub faults: Option<Vec<usize>>,
    /// Runs per case.
    #[arg(long, value_name = "R")]
    pub runs: Option<usize>,
    /// Base seed (falls back to $CUBEROUTE_SEED, then 0).
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// chiu, far, far-argmin or all (comma-separated lists accepted).
    #[arg(long, value_name = "ROUTER", value_delimiter = ',')]
    pub router: Option<Vec<String>>,
    /// Unsafe-node rule used by the Chiu router.
    #[arg(long, value_name = "chiu|lee")]
    pub rule: Option<String>,
    /// Hop limit per route (default 4 per dimension).
    #[arg(long, value_name = "H")]
    pub max_hops: Option<usize>,
    /// Softening term in the fault-distance cost.
    #[arg(long, value_name = "E", allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Network weight on the route cost.
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    /// Network weight on the one-winner constraint.
    #[arg(long, allow_negative_numbers = true)]
    pub k2: Option<f64>,
    /// Cost weight on distance to the destination.
    #[arg(long, allow_negative_numbers = true)]
    pub k3: Option<f64>,
    /// Cost weight on proximity to faults.
    #[arg(long, allow_negative_numbers = true)]
    pub k4: Option<f64>,
    /// Euler step of the network dynamics.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Sigmoid gain of the network neurons.
    #[arg(long, allow_negative_numbers = true)]
    pub gain: Option<f64>,
    #[arg(long, value_name = "csv|json")]
    pub format: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Run cases and runs on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Vec<T> {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// The on-disk configuration. Every key is optional; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dimension: Option<OneOrMany<u32>>,
    faults: Option<OneOrMany<usize>>,
    runs: Option<usize>,
    seed: Option<u64>,
    router: Option<OneOrMany<String>>,
    rule: Option<String>,
    max_hops: Option<usize>,
    epsilon: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    k3: Option<f64>,
    k4: Option<f64>,
    dt: Option<f64>,
    gain: Option<f64>,
    format: Option<String>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dimensions: Vec<u32>,
    pub faults: Vec<usize>,
    pub routers: Vec<RouterKind>,
    pub runs: usize,
    pub seed: u64,
    pub params: FarParams,
    pub rule: UnsafeRule,
    /// `None` means 4 hops per dimension.
    pub max_hops: Option<usize>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub execution: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dimensions: vec![4],
            faults: (0..=7).collect(),
            routers: vec![RouterKind::Chiu, RouterKind::FarHopfield],
            runs: DEFAULT_RUNS,
            seed: 0,
            params: FarParams::default(),
            rule: UnsafeRule::Chiu,
            max_hops: None,
            format: OutputFormat::Csv,
            out: None,
            execution: Execution::Parallel,
        }
    }
}

fn parse_routers(names: &[String]) -> Result<Vec<RouterKind>, ConfigError> {
    let mut out = Vec::new();
    for name in names {
        let add: Vec<RouterKind> = if name == "all" {
            RouterKind::ALL.to_vec()
        } else {
            vec![name.parse().map_err(|e| ConfigError::new("router", e))?]
        };
        for r in add {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    if out.is_empty() {
        return Err(ConfigError::new("router", "no router given"));
    }
    Ok(out)
}

fn parse_rule(s: &str) -> Result<UnsafeRule, ConfigError> {
    match s {
        "chiu" => Ok(UnsafeRule::Chiu),
        "lee" => Ok(UnsafeRule::Lee),
        _ => Err(ConfigError::new(
            "rule",
            format!("unknown rule `{s}` (expected chiu or lee)"),
        )),
    }
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let key = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field"))
            .unwrap_or("config")
            .to_string();
        ConfigError::new(key, format!("{}: {msg}", path.display()))
    })
}

/// Merges defaults, the config file (if any) and flags, later sources winning,
/// and validates the result. `seed_env` only supplies the seed when neither
/// the file nor the flags do.
pub fn parse_config(args: &Args, seed_env: Option<&str>) -> Result<ExperimentConfig, ConfigError> {
    let file = match &args.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let mut cfg = ExperimentConfig::default();

    if let Some(v) = args.dimension.clone().or(file.dimension.map(Vec::from)) {
        cfg.dimensions = v;
    }
    if let Some(v) = args.faults.clone().or(file.faults.map(Vec::from)) {
        cfg.faults = v;
    }
    if let Some(v) = args.runs.or(file.runs) {
        cfg.runs = v;
    }
    let env_seed = match seed_env {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|e| ConfigError::new(SEED_ENV, format!("`{s}`: {e}")))?,
        ),
        None => None,
    };
    cfg.seed = args.seed.or(file.seed).or(env_seed).unwrap_or(0);
    if let Some(v) = args.router.clone().or(file.router.map(Vec::from)) {
        cfg.routers = parse_routers(&v)?;
    }
    if let Some(v) = args.rule.as_deref().or(file.rule.as_deref()) {
        cfg.rule = parse_rule(v)?;
    }
    cfg.max_hops = args.max_hops.or(file.max_hops);

    let p = &mut cfg.params;
    let overrides = [
        (&mut p.epsilon, args.epsilon.or(file.epsilon)),
        (&mut p.k1, args.k1.or(file.k1)),
        (&mut p.k2, args.k2.or(file.k2)),
        (&mut p.k3, args.k3.or(file.k3)),
        (&mut p.k4, args.k4.or(file.k4)),
        (&mut p.dt, args.dt.or(file.dt)),
        (&mut p.gain, args.gain.or(file.gain)),
    ];
    for (slot, value) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(v) = args.format.as_deref().or(file.format.as_deref()) {
        cfg.format = v.parse().map_err(|e| ConfigError::new("format", e))?;
    }
    cfg.out = args.out.clone().or(file.out);
    if args.serial {
        cfg.execution = Execution::Serial;
    }

    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dimensions.is_empty() {
            return Err(ConfigError::new("dimension", "no dimension given"));
        }
        if self.faults.is_empty() {
            return Err(ConfigError::new("faults", "no fault count given"));
        }
        if self.runs == 0 {
            return Err(ConfigError::new("runs", "must be at least 1"));
        }
        if self.max_hops == Some(0) {
            return Err(ConfigError::new("max_hops", "must be at least 1"));
        }
        self.params.validate().map_err(|e| match e {
            cuberoute_core::Error::InvalidParameter { name, reason } => {
                ConfigError::new(name, reason)
            }
            other => ConfigError::new("params", other),
        })?;
        for &n in &self.dimensions {
            let cube = Hypercube::new(n).map_err(|e| ConfigError::new("dimension", e))?;
            for &k in &self.faults {
                if k + 2 > cube.node_count() {
                    return Err(ConfigError::new(
                        "faults",
                        format!("{k} faults leave no room for two healthy endpoints in a {n}-cube"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Cases in sweep order: dimension, then fault count, then router.
    pub fn cases(&self) -> Vec<CaseSpec> {
        let mut out = Vec::new();
        for &n in &self.dimensions {
            for &k in &self.faults {
                for &router in &self.routers {
                    out.push(CaseSpec {
                        dimension: n,
                        fault_count: k,
                        runs: self.runs,
                        seed: self.seed,
                        router,
                        params: self.params,
                        rule: self.rule,
                        max_hops: self.max_hops.unwrap_or_else(|| default_max_hops(n)),
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn args(v: &[&str]) -> Args {
        let mut full = vec!["cuberoute"];
        full.extend_from_slice(v);
        Args::try_parse_from(full).unwrap()
    }

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = parse_config(&args(&[]), None).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.dimensions, vec![4]);
        assert_eq!(cfg.faults, (0..=7).collect::<Vec<_>>());
        assert_eq!(cfg.runs, 1000);
        assert_eq!(cfg.routers, vec![RouterKind::Chiu, RouterKind::FarHopfield]);
        assert_eq!(cfg.cases().len(), 16);
    }

    #[test]
    fn single_case_from_flags() {
        let cfg = parse_config(
            &args(&[
                "--dimension",
                "5",
                "--faults",
                "4",
                "--router",
                "far",
                "--seed",
                "42",
            ]),
            None,
        )
        .unwrap();
        let cases = cfg.cases();
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].dimension, 5);
        assert_eq!(cases[0].fault_count, 4);
        assert_eq!(cases[0].router, RouterKind::FarHopfield);
        assert_eq!(cases[0].seed, 42);
        assert_eq!(cases[0].max_hops, 20);
    }

    #[test]
    fn negative_faults_rejected() {
        let err = Args::try_parse_from(["cuberoute", "--faults", "-1"]).unwrap_err();
        assert!(err.to_string().contains("--faults"), "{err}");
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(parse_config(&args(&[]), Some("17")).unwrap().seed, 17);
        assert_eq!(
            parse_config(&args(&["--seed", "3"]), Some("17"))
                .unwrap()
                .seed,
            3
        );
        let err = parse_config(&args(&[]), Some("x")).unwrap_err();
        assert_eq!(err.key, SEED_ENV);
    }

    #[test]
    fn routers_and_rule() {
        let cfg = parse_config(&args(&["--router", "all", "--rule", "lee"]), None).unwrap();
        assert_eq!(cfg.routers, RouterKind::ALL.to_vec());
        assert_eq!(cfg.rule, UnsafeRule::Lee);
        let cfg = parse_config(&args(&["--router", "far-argmin,chiu,chiu"]), None).unwrap();
        assert_eq!(cfg.routers, vec![RouterKind::FarArgmin, RouterKind::Chiu]);
        assert_eq!(
            parse_config(&args(&["--router", "dijkstra"]), None)
                .unwrap_err()
                .key,
            "router"
        );
        assert_eq!(
            parse_config(&args(&["--rule", "x"]), None).unwrap_err().key,
            "rule"
        );
    }

    #[test]
    fn invalid_values_name_their_key() {
        let cases: [(&[&str], &str); 6] = [
            (&["--dimension", "4", "--faults", "15"], "faults"),
            (&["--dimension", "31"], "dimension"),
            (&["--runs", "0"], "runs"),
            (&["--k4", "-1"], "k4"),
            (&["--format", "xml"], "format"),
            (&["--max-hops", "0"], "max_hops"),
        ];
        for (flags, key) in cases {
            let mut v = vec!["cuberoute"];
            v.extend_from_slice(flags);
            let a = Args::try_parse_from(v).unwrap();
            assert_eq!(parse_config(&a, None).unwrap_err().key, key, "{flags:?}");
        }
    }

    fn config_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn file_values_and_flag_overrides() {
        let f = config_file(
            r#"{"dimension": [3, 5], "faults": 2, "runs": 10, "router": "chiu", "k4": 0.5, "format": "json"}"#,
        );
        let path = f.path().to_str().unwrap();
        let cfg = parse_config(&args(&["--config", path]), None).unwrap();
        assert_eq!(cfg.dimensions, vec![3, 5]);
        assert_eq!(cfg.faults, vec![2]);
        assert_eq!(cfg.runs, 10);
        assert_eq!(cfg.params.k4, 0.5);
        assert_eq!(cfg.format, OutputFormat::Json);

        let cfg = parse_config(
            &args(&["--config", path, "--runs", "7", "--k4", "0.1"]),
            None,
        )
        .unwrap();
        assert_eq!(cfg.runs, 7);
        assert_eq!(cfg.params.k4, 0.1);
        assert_eq!(cfg.dimensions, vec![3, 5]);
    }

    #[test]
    fn file_errors() {
        let f = config_file(r#"{"dimension": 4, "colour": "blue"}"#);
        let err = parse_config(&args(&["--config", f.path().to_str().unwrap()]), None).unwrap_err();
        assert_eq!(err.key, "colour");

        let f = config_file("{not json");
        let err = parse_config(&args(&["--config", f.path().to_str().unwrap()]), None).unwrap_err();
        assert_eq!(err.key, "config");

        let err = parse_config(&args(&["--config", "/nonexistent/cfg.json"]), None).unwrap_err();
        assert_eq!(err.key, "config");
    }
}
