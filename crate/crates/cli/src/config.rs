//! Merging of command-line flags, an optional key=value file and defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use elastica::{Boundary, CurvaturePenalty, ElasticaParams, StepPolicy};

use crate::args::{BoundaryArg, Model, RunArgs};
use crate::error::CliError;

pub const ADAPTIVE_SAFETY: f64 = 0.9;

const KEYS: &[&str] = &[
    "input",
    "output",
    "ref",
    "trace",
    "model",
    "a",
    "b",
    "alpha",
    "tau",
    "adaptive-tau",
    "tol",
    "max-iter",
    "boundary",
    "seed",
    "no-timing",
];

/// Fully resolved settings for `denoise` and `speckle-denoise`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub params: ElasticaParams,
    pub boundary: Boundary,
    pub input: PathBuf,
    pub output: PathBuf,
    pub reference: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub seed: Option<u64>,
    pub timing: bool,
}

impl RunConfig {
    /// The penalty used for TRV runs. EE runs go through `halm_solve` directly.
    pub fn penalty(&self) -> Result<CurvaturePenalty, CliError> {
        Ok(CurvaturePenalty::trv(self.params.a, self.params.b)?)
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key=value", no + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                no + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

struct Layer {
    file: BTreeMap<String, String>,
}

impl Layer {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    fn get_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                T::from_str(v, true)
                    .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get::<bool>(None, key)?.unwrap_or(false))
    }
}

pub fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let layer = Layer { file };
    let defaults = ElasticaParams::default();

    let input: PathBuf = layer
        .get(args.input.clone(), "input")?
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let output: PathBuf = layer
        .get(args.output.clone(), "output")?
        .ok_or_else(|| CliError::Usage("--output is required".into()))?;
    let tau = layer.get(args.tau, "tau")?;
    let adaptive = layer.switch(args.adaptive_tau, "adaptive-tau")?;
    let step = match (adaptive, tau) {
        (true, Some(_)) => {
            return Err(CliError::Usage(
                "--tau and --adaptive-tau are exclusive".into(),
            ));
        }
        (true, None) => StepPolicy::Adaptive {
            safety: ADAPTIVE_SAFETY,
        },
        (false, Some(t)) => StepPolicy::Fixed(t),
        (false, None) => defaults.step,
    };
    let params = ElasticaParams {
        a: layer.get(args.a, "a")?.unwrap_or(defaults.a),
        b: layer.get(args.b, "b")?.unwrap_or(defaults.b),
        alpha: layer.get(args.alpha, "alpha")?.unwrap_or(defaults.alpha),
        step,
        tol: layer.get(args.tol, "tol")?.unwrap_or(defaults.tol),
        max_iter: layer
            .get(args.max_iter, "max-iter")?
            .unwrap_or(defaults.max_iter),
    };
    params.validate()?;
    let boundary = match layer.get_enum(args.boundary, "boundary")? {
        Some(BoundaryArg::Neumann) => Boundary::Neumann,
        Some(BoundaryArg::Periodic) | None => Boundary::Periodic,
    };

    Ok(RunConfig {
        model: layer.get_enum(args.model, "model")?.unwrap_or(Model::Ee),
        params,
        boundary,
        input,
        output,
        reference: layer.get(args.reference.clone(), "ref")?,
        trace: layer.get(args.trace.clone(), "trace")?,
        seed: layer.get(args.seed, "seed")?,
        timing: !layer.switch(args.no_timing, "no-timing")?,
    })
}
