//! Flat key=value run configuration with dotted keys.
//!
//! Lines are `key = value`; `#` starts a comment. Every run must carry an
//! explicit seed (no wall-clock seeding), and all tolerances must be
//! positive. Unknown keys are rejected so typos fail loudly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use curvgate::verify::{Gauge, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Connection,
    Warped,
}

/// Vertical curvature field selection.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldChoice {
    Zero,
    Constant(f64),
    Height(f64),
}

/// How the boost constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoostChoice {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub catalog: String,
    pub kind: MetricKind,
    pub boost: BoostChoice,
    pub field: FieldChoice,
    pub r0: f64,
    pub r_max: f64,
    pub r_test: f64,
    pub seed: u64,
    pub n_points: usize,
    pub n_tuples: usize,
    pub gauge: Gauge,
    pub tol_algebraic: f64,
    pub tol_stencil: f64,
    pub eps_diam: f64,
    pub eps_hypothesis: f64,
    pub inequalities: Vec<String>,
    pub expectations: BTreeMap<String, Verdict>,
    pub scan_radii: Vec<f64>,
    pub output_dir: PathBuf,
}

pub const KNOWN_INEQUALITIES: [&str; 8] =
    ["thmA", "thmB", "thmC", "sw", "cor26", "q3", "e1pos", "nbhd"];

fn parse_verdict(s: &str) -> Result<Verdict> {
    match s {
        "holds" => Ok(Verdict::Holds),
        "holds_strictly" => Ok(Verdict::HoldsStrictly),
        "violated" => Ok(Verdict::Violated),
        other => bail!("unknown verdict {other:?} (holds | holds_strictly | violated)"),
    }
}

fn parse_gauge(s: &str) -> Result<Gauge> {
    match s {
        "general" => Ok(Gauge::General),
        "orthonormal" => Ok(Gauge::OrthonormalXYWV),
        "claim2" => Ok(Gauge::Claim2Gauge),
        other => bail!("unknown gauge {other:?} (general | orthonormal | claim2)"),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", lineno + 1))?;
        let prev = map.insert(key.trim().to_string(), value.trim().to_string());
        if prev.is_some() {
            bail!("line {}: duplicate key {:?}", lineno + 1, key.trim());
        }
    }

    let mut take = |key: &str| map.remove(key);

    let catalog = take("catalog").ok_or_else(|| anyhow!("missing key: catalog"))?;
    let kind = match take("metric.kind").as_deref() {
        None | Some("connection") => MetricKind::Connection,
        Some("warped") => MetricKind::Warped,
        Some(other) => bail!("unknown metric.kind {other:?} (connection | warped)"),
    };
    let boost = match take("metric.C").as_deref() {
        None | Some("auto") => BoostChoice::Auto,
        Some(v) => BoostChoice::Fixed(v.parse().context("metric.C must be a number or auto")?),
    };
    let field = match take("metric.rf").as_deref() {
        None | Some("zero") => FieldChoice::Zero,
        Some("height") => FieldChoice::Height(1.0),
        Some(v) => {
            if let Some(c) = v.strip_prefix("constant:") {
                FieldChoice::Constant(c.parse().context("metric.rf constant amplitude")?)
            } else if let Some(a) = v.strip_prefix("height:") {
                FieldChoice::Height(a.parse().context("metric.rf height amplitude")?)
            } else {
                bail!("unknown metric.rf {v:?} (zero | constant:<c> | height[:<amp>])")
            }
        }
    };
    let parse_f = |name: &str, v: Option<String>, default: f64| -> Result<f64> {
        match v {
            None => Ok(default),
            Some(s) => s.parse::<f64>().with_context(|| format!("{name} must be a number")),
        }
    };
    let r0 = parse_f("metric.r0", take("metric.r0"), 0.05)?;
    let r_max = parse_f("metric.rmax", take("metric.rmax"), 0.5)?;
    let r_test = parse_f("metric.rtest", take("metric.rtest"), 0.05)?;
    let seed: u64 = take("sample.seed")
        .ok_or_else(|| anyhow!("missing key: sample.seed (runs must be seeded)"))?
        .parse()
        .context("sample.seed must be an unsigned integer")?;
    let n_points = take("sample.points").map_or(Ok(2), |s| s.parse()).context("sample.points")?;
    let n_tuples = take("sample.tuples").map_or(Ok(5), |s| s.parse()).context("sample.tuples")?;
    let gauge = match take("sample.gauge") {
        None => Gauge::OrthonormalXYWV,
        Some(s) => parse_gauge(&s)?,
    };
    let tol_algebraic = parse_f("tol.algebraic", take("tol.algebraic"), 1e-6)?;
    let tol_stencil = parse_f("tol.stencil", take("tol.stencil"), 1e-3)?;
    if tol_algebraic <= 0.0 || tol_stencil <= 0.0 {
        bail!("tolerances must be positive");
    }
    if r0 <= 0.0 || r_max <= 0.0 || r_test <= 0.0 {
        bail!("radii must be positive");
    }
    let eps_diam = parse_f("eps.diam", take("eps.diam"), 0.0)?;
    let eps_hypothesis = parse_f("eps.hypothesis", take("eps.hypothesis"), 0.5)?;

    let inequalities: Vec<String> = match take("check.inequalities") {
        None => vec!["thmB".to_string()],
        Some(s) => s.split(',').map(|t| t.trim().to_string()).collect(),
    };
    for id in &inequalities {
        if !KNOWN_INEQUALITIES.contains(&id.as_str()) {
            bail!(
                "unknown inequality id {id:?} (known: {})",
                KNOWN_INEQUALITIES.join(", ")
            );
        }
    }

    let scan_radii: Vec<f64> = match take("scan.radii") {
        None => vec![0.01, 0.02, 0.05],
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<f64>().context("scan.radii entries"))
            .collect::<Result<_>>()?,
    };
    let output_dir = PathBuf::from(take("output.dir").unwrap_or_else(|| "out".into()));

    let mut expectations = BTreeMap::new();
    let expect_keys: Vec<String> = map
        .keys()
        .filter(|k| k.starts_with("expect."))
        .cloned()
        .collect();
    for key in expect_keys {
        let id = key.trim_start_matches("expect.").to_string();
        if !KNOWN_INEQUALITIES.contains(&id.as_str()) {
            bail!("expectation for unknown inequality {id:?}");
        }
        let value = map.remove(&key).unwrap();
        expectations.insert(id, parse_verdict(&value)?);
    }

    if let Some(stray) = map.keys().next() {
        bail!("unknown config key {stray:?}");
    }

    Ok(RunConfig {
        catalog,
        kind,
        boost,
        field,
        r0,
        r_max,
        r_test,
        seed,
        n_points,
        n_tuples,
        gauge,
        tol_algebraic,
        tol_stencil,
        eps_diam,
        eps_hypothesis,
        inequalities,
        expectations,
        scan_radii,
        output_dir,
    })
}
