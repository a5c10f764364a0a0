//! Flat key-value experiment configuration: `section.key = value` lines,
//! `#` comments, no positional structure. Designed for diffability and
//! byte-exact reproducibility; parse -> serialize -> parse is the identity.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Parse { line: usize, text: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("key `{key}`: cannot parse {value:?} as {expected}")]
    InvalidValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("invariant violated: {what}")]
    Invariant { what: String },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Parsed configuration: a sorted key-value map with typed accessors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    map: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Parse {
                    line: i + 1,
                    text: raw.to_string(),
                });
            }
            map.insert(key.to_string(), value.to_string());
        }
        Ok(ExperimentConfig { map })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Serializes sorted; parsing the output reproduces the map exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.map.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn keys_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.map
            .keys()
            .filter(move |k| k.starts_with(prefix))
            .map(|k| k.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::MissingKey {
            key: key.to_string(),
        })
    }

    pub fn f64_req(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| ConfigError::InvalidValue {
            key: key.to_string(),
            value: v.to_string(),
            expected: "a float",
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                value: v.to_string(),
                expected: "a float",
            }),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                value: v.to_string(),
                expected: "a nonnegative integer",
            }),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                value: v.to_string(),
                expected: "an unsigned integer",
            }),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Comma-separated float list.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(raw) if raw.trim().is_empty() => Ok(Vec::new()),
            Some(raw) => raw
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| ConfigError::InvalidValue {
                        key: key.to_string(),
                        value: raw.to_string(),
                        expected: "a comma-separated float list",
                    })
                })
                .collect(),
        }
    }
}

/// Core physics/run parameters shared by every subcommand.
#[derive(Debug, Clone)]
pub struct CoreParams {
    pub c: f64,
    pub d: usize,
    pub alpha: f64,
    pub seed: u64,
    pub out_dir: std::path::PathBuf,
    /// Speeds as fractions of `c`, strictly inside `(0, 1)`.
    pub speeds: Vec<f64>,
}

pub fn core_params(cfg: &ExperimentConfig) -> Result<CoreParams, ConfigError> {
    let c = cfg.f64_or("physics.c", 1.0)?;
    let d = cfg.usize_or("physics.d", 2)?;
    let alpha = cfg.f64_or("physics.alpha", 2.0)?;
    if !(c > 0.0) {
        return Err(ConfigError::Invariant {
            what: format!("physics.c must be positive, got {c}"),
        });
    }
    if d < 2 {
        return Err(ConfigError::Invariant {
            what: format!("physics.d must be at least 2, got {d}"),
        });
    }
    if !(alpha > 1.0) {
        return Err(ConfigError::Invariant {
            what: format!("physics.alpha must exceed 1, got {alpha}"),
        });
    }
    let speeds = cfg.f64_list("speeds")?;
    for &s in &speeds {
        if !(s > 0.0 && s < 1.0) {
            return Err(ConfigError::Invariant {
                what: format!("speeds must be fractions of c strictly in (0, 1), got {s}"),
            });
        }
    }
    Ok(CoreParams {
        c,
        d,
        alpha,
        seed: cfg.u64_or("seed", 0)?,
        out_dir: cfg.str_or("output.dir", "out").into(),
        speeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# demo
physics.c = 1.0
physics.d = 2
physics.alpha = 3.0
field.1.family = gaussian_electric
field.1.v0 = 0.25
speeds = 0.9, 0.99,0.999
seed = 42
";

    #[test]
    fn parse_and_round_trip() {
        let cfg = ExperimentConfig::parse_str(SAMPLE).unwrap();
        assert_eq!(cfg.f64_req("physics.c").unwrap(), 1.0);
        assert_eq!(cfg.f64_list("speeds").unwrap(), vec![0.9, 0.99, 0.999]);
        let text = cfg.to_config_string();
        let again = ExperimentConfig::parse_str(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_config_string());
    }

    #[test]
    fn errors_name_the_key() {
        let cfg = ExperimentConfig::parse_str("a.b = 1\n").unwrap();
        match cfg.require("field.1.family") {
            Err(ConfigError::MissingKey { key }) => assert_eq!(key, "field.1.family"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = ExperimentConfig::parse_str("x = nope\n").unwrap();
        assert!(matches!(
            cfg.f64_req("x"),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn bad_lines_and_bad_invariants_are_rejected() {
        assert!(matches!(
            ExperimentConfig::parse_str("just words\n"),
            Err(ConfigError::Parse { line: 1, .. })
        ));
        let cfg = ExperimentConfig::parse_str("speeds = 1.5\n").unwrap();
        assert!(matches!(
            core_params(&cfg),
            Err(ConfigError::Invariant { .. })
        ));
        let cfg = ExperimentConfig::parse_str("physics.d = 1\n").unwrap();
        assert!(matches!(
            core_params(&cfg),
            Err(ConfigError::Invariant { .. })
        ));
    }
}
