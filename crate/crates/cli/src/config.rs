//! Run configuration: defaults, then the TOML config file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use tracecoef_core::symbol::deg;
use tracecoef_core::{Degree, Precision};
use tracecoef_oracle::Slot;

use crate::error::CliError;

pub const PRECISION_ENV: &str = "TRACECOEF_PRECISION";
pub const DEFAULT_DIGITS: u32 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Fp,
    Res,
    Logsym,
    Expand,
    C0,
    Defect,
    Fit,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fp => "fp",
            Command::Res => "res",
            Command::Logsym => "logsym",
            Command::Expand => "expand",
            Command::C0 => "c0",
            Command::Defect => "defect",
            Command::Fit => "fit",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Pretty,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "pretty" => Ok(Format::Pretty),
            _ => Err(format!("unknown format '{s}' (json, csv, pretty)")),
        }
    }
}

/// Fit ladder: a depth below −N, or an explicit slot list.
#[derive(Clone, Debug, PartialEq)]
pub enum LadderSpec {
    Depth(u32),
    Slots(Vec<Slot>),
}

impl FromStr for LadderSpec {
    type Err = String;
    /// "4" or "-1:1,-1,-5/4" (exponent, optional `:log-power`).
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Ok(d) = s.parse::<u32>() {
            return Ok(LadderSpec::Depth(d));
        }
        let mut slots = Vec::new();
        for item in s.split(',') {
            let (e, l) = match item.split_once(':') {
                Some((e, l)) => (
                    e,
                    l.trim()
                        .parse::<u32>()
                        .map_err(|_| format!("bad log power in '{item}'"))?,
                ),
                None => (item, 0),
            };
            slots.push(Slot::new(parse_degree(e)?, l));
        }
        Ok(LadderSpec::Slots(slots))
    }
}

pub fn parse_degree(s: &str) -> Result<Degree, String> {
    let s = s.trim();
    let bad = || format!("bad exponent '{s}'");
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Degree::new(a, b))
        }
        None => s.parse::<i64>().map(deg).map_err(|_| bad()),
    }
}

/// Values accepted in the config file; every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub matrix_size: Option<usize>,
    pub symbol: Option<String>,
    pub p: Option<String>,
    pub p2: Option<String>,
    pub m: Option<u32>,
    #[serde(rename = "N")]
    pub power: Option<u32>,
    #[serde(rename = "J")]
    pub truncation: Option<u32>,
    pub floor: Option<String>,
    pub precision: Option<u32>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub theta: Option<f64>,
    pub ladder: Option<String>,
    pub t0: Option<f64>,
    pub ratio: Option<f64>,
    pub only: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fill every unset field of `self` from `lower`.
    pub fn over(self, lower: FileConfig) -> FileConfig {
        FileConfig {
            n: self.n.or(lower.n),
            matrix_size: self.matrix_size.or(lower.matrix_size),
            symbol: self.symbol.or(lower.symbol),
            p: self.p.or(lower.p),
            p2: self.p2.or(lower.p2),
            m: self.m.or(lower.m),
            power: self.power.or(lower.power),
            truncation: self.truncation.or(lower.truncation),
            floor: self.floor.or(lower.floor),
            precision: self.precision.or(lower.precision),
            format: self.format.or(lower.format),
            out: self.out.or(lower.out),
            theta: self.theta.or(lower.theta),
            ladder: self.ladder.or(lower.ladder),
            t0: self.t0.or(lower.t0),
            ratio: self.ratio.or(lower.ratio),
            only: self.only.or(lower.only),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub symbol: Option<String>,
    pub p: Option<String>,
    pub p2: Option<String>,
    pub n: Option<usize>,
    /// matrix size, default 1
    pub matrix_size: usize,
    /// model operator order, default 2
    pub m: u32,
    /// resolvent power, default 1
    pub power: u32,
    /// log-symbol truncation; commands pick a sufficient value when unset
    pub truncation: Option<u32>,
    /// lowest exponent reported by `expand`, default −N − 2
    pub floor: Option<Degree>,
    pub precision: Precision,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// fit ray angle, default π/4
    pub theta: f64,
    /// fit ladder, default depth 4
    pub ladder: LadderSpec,
    pub t0: f64,
    pub ratio: f64,
    /// criteria filter for `verify`
    pub only: Vec<String>,
    pub corrupt_alpha: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            symbol: None,
            p: None,
            p2: None,
            n: None,
            matrix_size: 1,
            m: 2,
            power: 1,
            truncation: None,
            floor: None,
            precision: Precision::from_digits(DEFAULT_DIGITS),
            format: Format::Json,
            out: None,
            theta: std::f64::consts::FRAC_PI_4,
            ladder: LadderSpec::Depth(4),
            t0: 16.0,
            ratio: 4.0,
            only: Vec::new(),
            corrupt_alpha: false,
        }
    }

    /// Resolve `merged` (flags over file) on top of the defaults and the precision env var.
    pub fn resolve(
        command: Command,
        merged: FileConfig,
        env_precision: Option<&str>,
    ) -> Result<Self, CliError> {
        let mut c = RunConfig::new(command);
        let digits = match (merged.precision, env_precision) {
            (Some(d), _) => d,
            (None, Some(s)) => s.trim().parse().map_err(|_| {
                CliError::Usage(format!(
                    "{PRECISION_ENV} must be a positive integer, got '{s}'"
                ))
            })?,
            (None, None) => DEFAULT_DIGITS,
        };
        if digits == 0 {
            return Err(CliError::Usage("precision must be at least 1 digit".into()));
        }
        c.precision = Precision::from_digits(digits);
        c.symbol = merged.symbol;
        c.p = merged.p;
        c.p2 = merged.p2;
        c.n = merged.n;
        if let Some(v) = merged.matrix_size {
            c.matrix_size = v;
        }
        if let Some(v) = merged.m {
            c.m = v;
        }
        if let Some(v) = merged.power {
            c.power = v;
        }
        c.truncation = merged.truncation;
        if let Some(f) = merged.floor {
            c.floor = Some(parse_degree(&f).map_err(CliError::Usage)?);
        }
        if let Some(v) = merged.format {
            c.format = v;
        }
        c.out = merged.out;
        if let Some(v) = merged.theta {
            c.theta = v;
        }
        if let Some(l) = merged.ladder {
            c.ladder = l.parse().map_err(CliError::Usage)?;
        }
        if let Some(v) = merged.t0 {
            c.t0 = v;
        }
        if let Some(v) = merged.ratio {
            c.ratio = v;
        }
        if let Some(v) = merged.only {
            c.only = v;
        }
        if c.matrix_size == 0 {
            return Err(CliError::Usage("M must be at least 1".into()));
        }
        if c.power == 0 {
            return Err(CliError::Usage("N must be at least 1".into()));
        }
        Ok(c)
    }

    pub fn dimension(&self) -> Result<usize, CliError> {
        match self.n {
            Some(0) => Err(CliError::Usage("n must be at least 1".into())),
            Some(n) => Ok(n),
            None => Err(CliError::Usage(format!(
                "{} needs --n",
                self.command.name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_env() {
        let file: FileConfig =
            toml::from_str("n = 2\nm = 4\nprecision = 30\nformat = \"csv\"").unwrap();
        let flags = FileConfig {
            m: Some(2),
            ..FileConfig::default()
        };
        let c = RunConfig::resolve(Command::Fp, flags.over(file), Some("80")).unwrap();
        assert_eq!((c.n, c.m, c.format), (Some(2), 2, Format::Csv));
        assert_eq!(c.precision.digits(), 30);
        let c = RunConfig::resolve(Command::Fp, FileConfig::default(), Some("80")).unwrap();
        assert_eq!(c.precision.digits(), 80);
        assert!(RunConfig::resolve(Command::Fp, FileConfig::default(), Some("x")).is_err());
    }

    #[test]
    fn ladders() {
        assert_eq!("3".parse::<LadderSpec>().unwrap(), LadderSpec::Depth(3));
        let LadderSpec::Slots(s) = "-1:1, -1, -5/4".parse::<LadderSpec>().unwrap() else {
            panic!()
        };
        assert_eq!(
            s,
            vec![
                Slot::new(deg(-1), 1),
                Slot::new(deg(-1), 0),
                Slot::new(Degree::new(-5, 4), 0)
            ]
        );
        assert!("-1:x".parse::<LadderSpec>().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
