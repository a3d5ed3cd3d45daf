use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::masks::{WindowKind, WindowSpec};
use crate::sync::MagnitudeMode;

use super::{Algorithm, WirtingerConfig};

/// Parameters of a sweep, read from a flat `key = value` file.
///
/// ```text
/// d = 64
/// delta = 8
/// window = gaussian:0.3
/// epsilon = 1e-1, 1e-2, 10^-2.5
/// snr = 10, 20, inf
/// trials = 100
/// seed = 1
/// algorithms = blockpr, blockpr_sc
/// magnitude_mode = block
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub d: usize,
    pub delta: usize,
    pub window: WindowKind,
    pub epsilons: Vec<f64>,
    pub snrs: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub magnitude_mode: MagnitudeMode,
    pub wirtinger: WirtingerConfig,
}

impl ExperimentConfig {
    pub fn new(d: usize, delta: usize, window: WindowKind) -> Self {
        ExperimentConfig {
            d,
            delta,
            window,
            epsilons: vec![0.0],
            snrs: vec![f64::INFINITY],
            trials: 100,
            seed: 0,
            algorithms: vec![Algorithm::BlockPr, Algorithm::BlockPrSc],
            magnitude_mode: MagnitudeMode::default(),
            wirtinger: WirtingerConfig::default(),
        }
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.window.clone(), self.d, self.delta)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.delta == 0 || 2 * self.delta > self.d + 1 {
            return bad(format!(
                "need 1 <= delta and 2*delta-1 <= d, got d={} delta={}",
                self.d, self.delta
            ));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return bad("epsilon list must be non-empty, finite and nonnegative".into());
        }
        if self.snrs.is_empty() || self.snrs.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("snr list must be non-empty with values in dB or inf".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        self.wirtinger.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.window_spec().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut d = None;
        let mut delta = None;
        let mut window = None;
        let mut cfg = ExperimentConfig::new(0, 0, WindowKind::Gaussian { sigma: 0.3 });
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| Error::Config(format!("line {}: {}", no + 1, e));
            match key {
                "d" => d = Some(parse_usize(value).map_err(at)?),
                "delta" => delta = Some(parse_usize(value).map_err(at)?),
                "window" => window = Some(value.parse::<WindowKind>().map_err(at)?),
                "epsilon" | "epsilons" => cfg.epsilons = parse_list(value, parse_f64).map_err(at)?,
                "snr" | "snrs" | "snr_db" => cfg.snrs = parse_list(value, parse_f64).map_err(at)?,
                "trials" => cfg.trials = parse_usize(value).map_err(at)?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| at(Error::Config(format!("bad seed '{value}'"))))?
                }
                "algorithms" | "algorithm" => cfg.algorithms = parse_list(value, |v| v.parse()).map_err(at)?,
                "magnitude_mode" => cfg.magnitude_mode = value.parse().map_err(at)?,
                "wf_iterations" => cfg.wirtinger.iterations = parse_usize(value).map_err(at)?,
                "wf_tau0" => cfg.wirtinger.tau0 = parse_f64(value).map_err(at)?,
                "wf_mu_max" => cfg.wirtinger.mu_max = parse_f64(value).map_err(at)?,
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", no + 1))),
            }
        }
        cfg.d = d.ok_or_else(|| Error::Config("missing key 'd'".into()))?;
        cfg.delta = delta.ok_or_else(|| Error::Config("missing key 'delta'".into()))?;
        cfg.window = window.ok_or_else(|| Error::Config("missing key 'window'".into()))?;
        cfg.algorithms.sort();
        cfg.algorithms.dedup();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Config(format!("expected a nonnegative integer, got '{s}'")))
}

/// Parses a float, `inf`, or a power of ten written `10^x`.
pub fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    let err = || Error::Config(format!("expected a number, got '{s}'"));
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        _ => {}
    }
    if let Some(exp) = s.strip_prefix("10^") {
        let e: f64 = exp.trim().parse().map_err(|_| err())?;
        return Ok(10f64.powf(e));
    }
    s.parse().map_err(|_| err())
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(item)
        .collect()
}
