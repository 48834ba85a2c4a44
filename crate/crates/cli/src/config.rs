//! Run configuration: command-line flags merged over an optional
//! `key = value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ambush_core::{Method, Point, SolverTag};
use clap::Args;

use crate::Failure;

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `key = value` file; command-line flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Risk field file
    #[arg(long, value_name = "PATH")]
    pub field: Option<PathBuf>,
    /// Network JSON written by `build`, used instead of constructing one
    #[arg(long, value_name = "PATH")]
    pub network: Option<PathBuf>,
    /// Built-in environment: `diamond` or `hill`
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
    /// Construction method: 1 random Delaunay, 2 8-connected grid, 3 grid Delaunay
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub method: Option<u8>,
    /// Node budget
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Origin as X,Y
    #[arg(long, value_parser = parse_point, value_name = "X,Y")]
    pub origin: Option<Point>,
    /// Destination as X,Y
    #[arg(long, value_parser = parse_point, value_name = "X,Y")]
    pub dest: Option<Point>,
    /// `simplex` or `ipm`
    #[arg(long)]
    pub solver: Option<SolverTag>,
    /// Weight of expected length in the objective, in [0, 1)
    #[arg(long, value_name = "W")]
    pub length_weight: Option<f64>,
    /// Drop nodes whose risk exceeds T before solving
    #[arg(long, value_name = "T")]
    pub alpha_threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG and DOT figures
    #[arg(long)]
    pub plot: bool,
    /// Number of paths to draw (`sample`)
    #[arg(long)]
    pub count: Option<usize>,
    /// Simulated rounds per planner (`compare`)
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Iteration cap for either LP solver
    #[arg(long, value_name = "N")]
    pub max_iterations: Option<usize>,
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{t}` is not a number"))
    };
    Ok(Point::new(num(x)?, num(y)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Field(PathBuf),
    Network(PathBuf),
    Diamond,
    Hill,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub method: Method,
    pub node_budget: usize,
    pub origin: Option<Point>,
    pub dest: Option<Point>,
    pub solver: SolverTag,
    pub length_weight: f64,
    pub alpha_threshold: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub plot: bool,
    pub count: usize,
    pub iterations: usize,
    pub max_iterations: Option<usize>,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_file(path: &Path) -> Result<BTreeMap<String, (usize, String)>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            usage(format!(
                "{}:{}: expected key = value",
                path.display(),
                i + 1
            ))
        })?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        map.insert(key, (i + 1, value));
    }
    Ok(map)
}

const KEYS: [&str; 16] = [
    "field",
    "network",
    "fixture",
    "method",
    "nodes",
    "origin",
    "dest",
    "solver",
    "length-weight",
    "alpha-threshold",
    "seed",
    "out",
    "plot",
    "count",
    "iterations",
    "max-iterations",
];

/// Fills every unset flag from the config file.
fn merge(mut flags: Flags) -> Result<Flags, Failure> {
    let Some(path) = flags.config.clone() else {
        return Ok(flags);
    };
    let file = read_file(&path)?;
    for (key, (line, value)) in &file {
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!(
                "{}:{line}: unknown key `{key}`",
                path.display()
            )));
        }
        let bad = |e: String| usage(format!("{}:{line}: {key}: {e}", path.display()));
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("invalid value `{v}`"))
        }
        match key.as_str() {
            "field" => flags.field = flags.field.or_else(|| Some(value.into())),
            "network" => flags.network = flags.network.or_else(|| Some(value.into())),
            "fixture" => flags.fixture = flags.fixture.or_else(|| Some(value.clone())),
            "out" => flags.out = flags.out.or_else(|| Some(value.into())),
            "method" if flags.method.is_none() => flags.method = Some(num(value).map_err(bad)?),
            "nodes" if flags.nodes.is_none() => flags.nodes = Some(num(value).map_err(bad)?),
            "origin" if flags.origin.is_none() => {
                flags.origin = Some(parse_point(value).map_err(bad)?)
            }
            "dest" if flags.dest.is_none() => flags.dest = Some(parse_point(value).map_err(bad)?),
            "solver" if flags.solver.is_none() => {
                flags.solver = Some(
                    value
                        .parse()
                        .map_err(|e: ambush_core::Error| bad(e.to_string()))?,
                )
            }
            "length-weight" if flags.length_weight.is_none() => {
                flags.length_weight = Some(num(value).map_err(bad)?)
            }
            "alpha-threshold" if flags.alpha_threshold.is_none() => {
                flags.alpha_threshold = Some(num(value).map_err(bad)?)
            }
            "seed" if flags.seed.is_none() => flags.seed = Some(num(value).map_err(bad)?),
            "plot" => flags.plot |= num::<bool>(value).map_err(bad)?,
            "count" if flags.count.is_none() => flags.count = Some(num(value).map_err(bad)?),
            "iterations" if flags.iterations.is_none() => {
                flags.iterations = Some(num(value).map_err(bad)?)
            }
            "max-iterations" if flags.max_iterations.is_none() => {
                flags.max_iterations = Some(num(value).map_err(bad)?)
            }
            _ => {}
        }
    }
    Ok(flags)
}

impl RunConfig {
    pub fn resolve(flags: Flags) -> Result<Self, Failure> {
        let flags = merge(flags)?;
        let given = [
            flags.field.is_some(),
            flags.network.is_some(),
            flags.fixture.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(usage("give exactly one of --field, --network or --fixture"));
        }
        let existing = |p: PathBuf| {
            if p.is_file() {
                Ok(p)
            } else {
                Err(usage(format!("{} does not exist", p.display())))
            }
        };
        let source = if let Some(p) = flags.field {
            Source::Field(existing(p)?)
        } else if let Some(p) = flags.network {
            Source::Network(existing(p)?)
        } else {
            match flags.fixture.as_deref() {
                Some("diamond") => Source::Diamond,
                Some("hill") => Source::Hill,
                Some(other) => return Err(usage(format!("unknown fixture `{other}`"))),
                None => unreachable!(),
            }
        };
        let length_weight = flags.length_weight.unwrap_or(0.0);
        if !(0.0..1.0).contains(&length_weight) {
            return Err(usage(format!(
                "--length-weight {length_weight} must lie in [0, 1)"
            )));
        }
        let node_budget = flags.nodes.unwrap_or(150);
        if node_budget < 2 {
            return Err(usage("--nodes must be at least 2"));
        }
        if let Some(t) = flags.alpha_threshold {
            if !t.is_finite() {
                return Err(usage("--alpha-threshold must be finite"));
            }
        }
        let method =
            Method::try_from(flags.method.unwrap_or(3)).map_err(|e| usage(e.to_string()))?;
        Ok(RunConfig {
            source,
            method,
            node_budget,
            origin: flags.origin,
            dest: flags.dest,
            solver: flags.solver.unwrap_or(SolverTag::Ipm),
            length_weight,
            alpha_threshold: flags.alpha_threshold,
            seed: flags.seed.unwrap_or(0),
            out: flags.out.unwrap_or_else(|| PathBuf::from(".")),
            plot: flags.plot,
            count: flags.count.unwrap_or(1),
            iterations: flags.iterations.unwrap_or(1000),
            max_iterations: flags.max_iterations,
        })
    }
}
