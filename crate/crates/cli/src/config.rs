//! Run configuration: inline flags merged over an optional `--config` file,
//! resolved into library inputs and hashed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use faberlab::cauchy::BoundaryFunction;
use faberlab::curve::{CurveSpec, DiscretizedCurve, TabulatedCurve};
use faberlab::riemann::PairSpec;
use faberlab::samples::SampleFunction;
use faberlab::weights::WeightSpec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const DEFAULT_NODES: usize = 1024;
pub const DEFAULT_P: f64 = 2.0;
pub const DEFAULT_EXPAND_M: usize = 16;
pub const DEFAULT_STUDY_M: usize = 32;
pub const DEFAULT_FIT_FROM: usize = 8;

/// Knobs shared by every command. Each is optional so that a config file can
/// supply it; inline flags win.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Knobs {
    /// JSON file with any of these knobs (kebab-case keys).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// circle[:r], ellipse:a,b, inline JSON, or a .json/.csv file.
    #[arg(long)]
    pub curve: Option<String>,
    /// Exponent of the space; taken from the weight when one is given.
    #[arg(long)]
    pub p: Option<f64>,
    /// Degree of the Faber polynomial (gen).
    #[arg(long)]
    pub n: Option<usize>,
    /// plus or minus (gen).
    #[arg(long)]
    pub side: Option<String>,
    /// Number of curve nodes, a power of two.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Power weight as inline JSON or a JSON file.
    #[arg(long)]
    pub weight: Option<String>,
    /// Coefficient pair as inline JSON or a JSON file.
    #[arg(long)]
    pub pair: Option<String>,
    /// Shortcut for the pair A = exp(i a arg xi), B = exp(-i a arg xi).
    #[arg(long)]
    pub phase_alpha: Option<f64>,
    /// Boundary data: sample:runge[:re,im], sample:poly:k, sample:laurent:k or
    /// a CSV file with columns s, re, im.
    #[arg(long)]
    pub f: Option<String>,
    /// Order at infinity of the solution class (solve); -1 vanishes at infinity.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
    /// Plus-side truncation (expand).
    #[arg(long)]
    pub m1: Option<usize>,
    /// Minus-side truncation (expand).
    #[arg(long)]
    pub m2: Option<usize>,
    /// Largest truncation of the study.
    #[arg(long)]
    pub m_max: Option<usize>,
    /// First truncation used in the decay fit (study).
    #[arg(long)]
    pub fit_from: Option<usize>,
    /// Turn every condition warning into exit status 3.
    #[arg(long)]
    #[serde(default)]
    pub strict: bool,
    /// Output directory for artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! take {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Knobs {
    /// Inline flags over the file named by `--config`.
    pub fn merged(mut self) -> Result<Knobs, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: Knobs = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?;
        take!(
            self,
            file,
            curve,
            p,
            n,
            side,
            nodes,
            weight,
            pair,
            phase_alpha,
            f,
            m,
            m1,
            m2,
            m_max,
            fit_from,
            out
        );
        self.strict |= file.strict;
        Ok(self)
    }
}

/// Inputs after parsing, plus the material that identifies the run.
pub struct Resolved {
    pub command: &'static str,
    pub curve: CurveSpec,
    pub nodes: usize,
    pub weight: WeightSpec,
    pub pair: PairSpec,
    pub data: Option<DataSource>,
    pub strict: bool,
    pub out: PathBuf,
    pub knobs: Knobs,
    pub hash: String,
    identity: Value,
}

pub enum DataSource {
    Sample(SampleFunction),
    File(PathBuf),
}

impl DataSource {
    pub fn label(&self) -> String {
        match self {
            DataSource::Sample(s) => serde_json::to_string(s).unwrap_or_default(),
            DataSource::File(p) => p.display().to_string(),
        }
    }

    pub fn load(&self, curve: &DiscretizedCurve) -> Result<BoundaryFunction, CliError> {
        match self {
            DataSource::Sample(s) => Ok(BoundaryFunction {
                values: s.sample(curve)?,
            }),
            DataSource::File(p) => Ok(BoundaryFunction::read_csv(curve, p)?),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn sha_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Inline JSON, or the contents of a file; returns the text and, for files,
/// a digest of the bytes.
fn json_or_file(arg: &str) -> Result<(String, Option<String>), CliError> {
    let t = arg.trim();
    if t.starts_with('{') {
        return Ok((t.to_string(), None));
    }
    let bytes = fs::read(t).map_err(|e| config_err(format!("cannot read {t}: {e}")))?;
    let digest = sha_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| config_err(format!("{t} is not UTF-8")))?;
    Ok((text, Some(digest)))
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad number '{x}' in curve spec")))
        })
        .collect()
}

fn parse_curve(arg: &str, inputs: &mut Vec<(String, String)>) -> Result<CurveSpec, CliError> {
    let t = arg.trim();
    let (name, rest) = match t.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (t, None),
    };
    let spec = match (name, rest) {
        ("circle", None) => CurveSpec::circle(1.0),
        ("circle", Some(r)) => match parse_numbers(r)?.as_slice() {
            [r] => CurveSpec::circle(*r),
            _ => return Err(config_err("circle takes one radius: circle:r")),
        },
        ("ellipse", Some(ab)) => match parse_numbers(ab)?.as_slice() {
            [a, b] => CurveSpec::ellipse(*a, *b),
            _ => return Err(config_err("ellipse takes two semi-axes: ellipse:a,b")),
        },
        ("ellipse", None) => return Err(config_err("ellipse needs semi-axes: ellipse:a,b")),
        _ if t.ends_with(".csv") => {
            let bytes = fs::read(t).map_err(|e| config_err(format!("cannot read {t}: {e}")))?;
            inputs.push((t.to_string(), sha_hex(&bytes)));
            CurveSpec::Custom(TabulatedCurve::from_csv(Path::new(t))?)
        }
        _ => {
            let (text, digest) = json_or_file(t)?;
            if let Some(d) = digest {
                inputs.push((t.to_string(), d));
            }
            serde_json::from_str(&text).map_err(|e| config_err(format!("bad curve JSON: {e}")))?
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_data(arg: &str, inputs: &mut Vec<(String, String)>) -> Result<DataSource, CliError> {
    if let Ok(s) = arg.parse::<SampleFunction>() {
        return Ok(DataSource::Sample(s));
    }
    let path = PathBuf::from(arg);
    if path.is_file() {
        let bytes = fs::read(&path).map_err(|e| config_err(format!("cannot read {arg}: {e}")))?;
        inputs.push((arg.to_string(), sha_hex(&bytes)));
        return Ok(DataSource::File(path));
    }
    Err(config_err(format!(
        "'{arg}' is neither a sample function nor a readable file"
    )))
}

fn float_ok(x: f64) -> bool {
    x.is_finite()
}

impl Resolved {
    pub fn new(command: &'static str, knobs: Knobs) -> Result<Resolved, CliError> {
        let knobs = knobs.merged()?;
        let mut inputs: Vec<(String, String)> = Vec::new();

        let curve = parse_curve(knobs.curve.as_deref().unwrap_or("circle"), &mut inputs)?;

        let nodes = knobs.nodes.unwrap_or(DEFAULT_NODES);
        if !nodes.is_power_of_two() || nodes < 8 {
            return Err(config_err(format!(
                "--nodes must be a power of two >= 8, got {nodes}"
            )));
        }

        let weight = match &knobs.weight {
            Some(arg) => {
                let (text, digest) = json_or_file(arg)?;
                if let Some(d) = digest {
                    inputs.push((arg.clone(), d));
                }
                let w: WeightSpec = serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("bad weight JSON: {e}")))?;
                if let Some(p) = knobs.p {
                    if p != w.p {
                        return Err(config_err(format!(
                            "--p {p} disagrees with the weight exponent {}",
                            w.p
                        )));
                    }
                }
                w
            }
            None => WeightSpec::unit(knobs.p.unwrap_or(DEFAULT_P)),
        };
        if !(weight.p > 1.0 && float_ok(weight.p)) {
            return Err(config_err(format!(
                "p must lie in (1, inf), got {}",
                weight.p
            )));
        }
        weight.validate()?;

        let pair = match (&knobs.pair, knobs.phase_alpha) {
            (Some(_), Some(_)) => {
                return Err(config_err("give either --pair or --phase-alpha, not both"))
            }
            (Some(arg), None) => {
                let (text, digest) = json_or_file(arg)?;
                if let Some(d) = digest {
                    inputs.push((arg.clone(), d));
                }
                serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("bad pair JSON: {e}")))?
            }
            (None, Some(alpha)) if float_ok(alpha) => PairSpec::PhaseSystem { alpha },
            (None, Some(alpha)) => return Err(config_err(format!("bad phase alpha {alpha}"))),
            (None, None) => PairSpec::Unit,
        };

        let data = match &knobs.f {
            Some(arg) => Some(parse_data(arg, &mut inputs)?),
            None if matches!(command, "expand" | "study") => {
                Some(DataSource::Sample(SampleFunction::Runge {
                    z0: faberlab::C64::new(SampleFunction::DEFAULT_POLE, 0.0),
                }))
            }
            None => None,
        };

        let out = knobs.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let strict = knobs.strict;

        // The output directory does not change results, so it is left out.
        let mut id_knobs = knobs.clone();
        id_knobs.out = None;
        inputs.sort();
        let identity = json!({
            "command": command,
            "knobs": id_knobs,
            "curve": curve.label(),
            "nodes": nodes,
            "weight": weight,
            "pair": pair,
            "data": data.as_ref().map(|d| d.label()),
            "inputs": inputs,
        });
        let hash = sha_hex(
            serde_json::to_string(&identity)
                .expect("config serializes")
                .as_bytes(),
        );
        Ok(Resolved {
            command,
            curve,
            nodes,
            weight,
            pair,
            data,
            strict,
            out,
            knobs,
            hash,
            identity,
        })
    }

    pub fn p(&self) -> f64 {
        self.weight.p
    }

    /// Config block embedded in JSON reports.
    pub fn report_header(&self) -> Value {
        json!({ "config_hash": self.hash, "config": self.identity })
    }
}
