use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ode::IntegratorParams;

use super::{CommonArgs, Format};

/// Exponent field: one value or a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    One(f64),
    Many(Vec<f64>),
}

impl PSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            PSpec::One(p) => vec![*p],
            PSpec::Many(v) => v.clone(),
        }
    }
}

/// Integrator overrides; unset fields keep the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_init: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_offset: Option<f64>,
}

impl Tolerances {
    pub fn params(&self) -> IntegratorParams {
        let d = IntegratorParams::default();
        IntegratorParams {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            h_init: self.h_init.unwrap_or(d.h_init),
            h_min: self.h_min.unwrap_or(d.h_min),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            origin_offset: self.origin_offset.unwrap_or(d.origin_offset),
        }
    }
}

/// Effective run configuration: config file (if any) overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N", default = "default_n")]
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PSpec>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub check: Vec<String>,
}

fn default_n() -> u32 {
    3
}

fn default_k() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            p: None,
            k: default_k(),
            interval: None,
            tolerances: Tolerances::default(),
            output_dir: default_out(),
            format: Format::default(),
            check: Vec::new(),
        }
    }
}

/// A rejected configuration, with the config-file line when the offending
/// value came from the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Which command the configuration is validated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Basis,
    Limit,
    Solve,
    Validate,
}

/// Where each field came from, so errors can point into the file.
struct Source<'a> {
    text: Option<&'a str>,
    from_flag: Vec<&'static str>,
}

impl Source<'_> {
    fn line_of(&self, key: &'static str) -> Option<usize> {
        if self.from_flag.contains(&key) {
            return None;
        }
        let needle = format!("\"{key}\"");
        self.text?.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
    }

    fn err(&self, key: &'static str, message: String) -> ConfigError {
        ConfigError {
            line: self.line_of(key),
            message,
        }
    }
}

pub fn parse_p_list(s: &str) -> Result<PSpec, ConfigError> {
    let vals: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == 1 => Ok(PSpec::One(v[0])),
        Ok(v) => Ok(PSpec::Many(v)),
        Err(e) => Err(ConfigError {
            line: None,
            message: format!("--p expects a number or a comma-separated list: {e}"),
        }),
    }
}

fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        message: format!("cannot read config {}: {e}", path.display()),
    })
}

/// Load the config file, apply flag overrides and validate for `purpose`.
pub fn resolve(args: &CommonArgs, purpose: Purpose) -> Result<RunConfig, ConfigError> {
    let text = match &args.config {
        Some(path) => Some(read_file(path)?),
        None => None,
    };
    let mut cfg = match &text {
        Some(t) => serde_json::from_str::<RunConfig>(t).map_err(|e| ConfigError {
            line: Some(e.line()),
            message: e.to_string(),
        })?,
        None => RunConfig::default(),
    };
    let mut from_flag = Vec::new();
    if let Some(n) = args.n {
        cfg.n = n;
        from_flag.push("N");
    }
    if let Some(p) = &args.p {
        cfg.p = Some(parse_p_list(p)?);
        from_flag.push("p");
    }
    if let Some(k) = args.k {
        cfg.k = k;
        from_flag.push("k");
    }
    if args.a.is_some() || args.b.is_some() {
        let [a0, b0] = cfg.interval.unwrap_or([0.0, 1.0]);
        cfg.interval = Some([args.a.unwrap_or(a0), args.b.unwrap_or(b0)]);
        from_flag.push("interval");
    }
    if let Some(r) = args.rel_tol {
        cfg.tolerances.rel_tol = Some(r);
        from_flag.push("rel_tol");
    }
    if let Some(r) = args.abs_tol {
        cfg.tolerances.abs_tol = Some(r);
        from_flag.push("abs_tol");
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if !args.check.is_empty() {
        cfg.check = args.check.clone();
        from_flag.push("check");
    }
    let src = Source {
        text: text.as_deref(),
        from_flag,
    };
    validate(&cfg, purpose, &src)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, purpose: Purpose, src: &Source<'_>) -> Result<(), ConfigError> {
    if cfg.n < 3 {
        return Err(src.err("N", format!("N = {} is not supported: N >= 3 is required", cfg.n)));
    }
    if cfg.k == 0 {
        return Err(src.err("k", "k must be at least 1".into()));
    }
    if let Some([a, b]) = cfg.interval {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(src.err("interval", format!("need 0 <= a < b <= 1, got a = {a}, b = {b}")));
        }
        if cfg.k > 1 && (a, b) != (0.0, 1.0) {
            return Err(src.err(
                "interval",
                "an interval other than [0, 1] is only supported for k = 1".into(),
            ));
        }
    }
    let params = cfg.tolerances.params();
    if let Err(e) = params.validate() {
        let key = if src.from_flag.contains(&"rel_tol") {
            "rel_tol"
        } else {
            "tolerances"
        };
        return Err(src.err(key, e.to_string()));
    }
    let ps = cfg.p.as_ref().map(PSpec::values).unwrap_or_default();
    if let Some(bad) = ps.iter().find(|p| !(**p > 1.0) || !p.is_finite()) {
        return Err(src.err("p", format!("p = {bad} rejected: p > 1 is required")));
    }
    match purpose {
        Purpose::Basis => {}
        Purpose::Limit => {}
        Purpose::Solve => match &cfg.p {
            None => return Err(src.err("p", "solve needs an exponent --p".into())),
            Some(PSpec::Many(v)) if v.len() != 1 => {
                return Err(src.err("p", "solve takes a single exponent, not a sweep".into()))
            }
            _ => {}
        },
        Purpose::Validate => {
            if cfg.k != 1 {
                return Err(src.err(
                    "k",
                    "validate checks the increasing solution on [a, b]; use k = 1".into(),
                ));
            }
            if !ps.windows(2).all(|w| w[0] < w[1]) {
                return Err(src.err("p", "the p sweep must be sorted in strictly ascending order".into()));
            }
            let known = crate::lab::CHECK_NAMES;
            if let Some(c) = cfg.check.iter().find(|c| !known.contains(&c.as_str())) {
                return Err(src.err(
                    "check",
                    format!("unknown check '{c}' (expected one of {})", known.join(", ")),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> CommonArgs {
        CommonArgs::default()
    }

    #[test]
    fn defaults_resolve() {
        let cfg = resolve(&args(), Purpose::Basis).unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.k, 1);
    }

    #[test]
    fn small_dimension_rejected() {
        let mut a = args();
        a.n = Some(2);
        let e = resolve(&a, Purpose::Basis).unwrap_err();
        assert!(e.message.contains("N >= 3"));
        assert_eq!(e.line, None);
    }

    #[test]
    fn file_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, "{\n  \"k\": 2,\n  \"N\": 2\n}\n").unwrap();
        let mut a = args();
        a.config = Some(path.clone());
        let e = resolve(&a, Purpose::Limit).unwrap_err();
        assert_eq!(e.line, Some(3));

        std::fs::write(&path, "{\n  \"N\": 3,\n  \"bogus\": 1\n}\n").unwrap();
        let e = resolve(&a, Purpose::Limit).unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"N": 4, "p": [50, 100], "k": 1}"#).unwrap();
        let mut a = args();
        a.config = Some(path);
        a.p = Some("200".into());
        let cfg = resolve(&a, Purpose::Solve).unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.p, Some(PSpec::One(200.0)));
    }

    #[test]
    fn sweep_must_ascend() {
        let mut a = args();
        a.p = Some("100,50".into());
        assert!(resolve(&a, Purpose::Validate).is_err());
        a.p = Some("1".into());
        assert!(resolve(&a, Purpose::Solve).unwrap_err().message.contains("p > 1"));
    }
}
