//! Flat `key=value` run configuration.

use std::collections::BTreeMap;
use std::fmt;

use rhmsp::model::{KernelVariant, ProcessSpec};
use rhmsp::quad::QuadratureConfig;

pub const SEED_ENV: &str = "RHMSP_SEED";

const DEFAULTS: &[(&str, &str)] = &[
    ("alpha", "1.5"),
    ("hurst", "const:0.5"),
    ("kernel", "X"),
    ("horizon", "1"),
    ("rel_tol", "1e-8"),
    ("abs_tol", "1e-12"),
    ("terms", "5000"),
    ("paths", "100"),
    ("grid", "0:1:4096"),
    ("seed", "0"),
    ("sine_hurst", "sine:0.5,0.2,6.283185307179586"),
];

/// Keys a command may add on top of the defaults.
const COMMAND_KEYS: &[&str] = &[
    "times", "coeffs", "center", "spacings", "n", "t", "h", "x", "u", "lambda", "deltas", "bins", "lnd_floor", "quick",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Resolved configuration: defaults, then the spec file, then overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }
}

/// Lines of `key=value`; `#` starts a comment.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected key=value, got `{line}`", i + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return err(format!("line {}: empty key", i + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !DEFAULTS.iter().any(|(k, _)| *k == key) && !COMMAND_KEYS.contains(&key) {
            return err(format!("unknown config key `{key}`"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        self.values.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<(), ConfigError> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<&str, ConfigError> {
        match self.values.get(key) {
            Some(v) => Ok(v),
            None => err(format!("missing config key `{key}`")),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.str(key)?;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => err(format!("`{key}`: expected a number, got `{v}`")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.str(key)?;
        v.parse().or_else(|_| err(format!("`{key}`: expected a nonnegative integer, got `{v}`")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.str(key)?;
        v.parse().or_else(|_| err(format!("`{key}`: expected a nonnegative integer, got `{v}`")))
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        parse_list(self.str(key)?).map_err(|e| ConfigError(format!("`{key}`: {e}")))
    }

    pub fn flag(&self, key: &str) -> bool {
        self.values.get(key).is_some_and(|v| v == "true" || v == "1")
    }

    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        parse_grid(self.str("grid")?)
    }

    pub fn spec_with(&self, hurst: &str) -> Result<ProcessSpec, ConfigError> {
        let kernel = KernelVariant::parse(self.str("kernel")?).map_err(|e| ConfigError(e.to_string()))?;
        ProcessSpec::parse(self.f64("alpha")?, hurst, kernel, self.f64("horizon")?).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn spec(&self) -> Result<ProcessSpec, ConfigError> {
        self.spec_with(self.str("hurst")?)
    }

    pub fn quad(&self) -> Result<QuadratureConfig, ConfigError> {
        let q = QuadratureConfig { rel_tol: self.f64("rel_tol")?, abs_tol: self.f64("abs_tol")?, ..QuadratureConfig::default() };
        q.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(q)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(self.values.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect())
    }

    pub fn to_flat(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Comma-separated numbers; `2^-5` is accepted for dyadics.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            let v = if let Some(e) = s.strip_prefix("2^") {
                e.parse::<i32>().map(|e| 2f64.powi(e)).map_err(|_| format!("bad dyadic `{s}`"))?
            } else {
                s.parse::<f64>().map_err(|_| format!("bad number `{s}`"))?
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite value `{s}`"))
            }
        })
        .collect()
}

/// `start:end:count`, inclusive endpoints, `count` intervals.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return err(format!("grid `{text}`: expected start:end:count"));
    }
    let (Ok(a), Ok(b), Ok(n)) = (parts[0].parse::<f64>(), parts[1].parse::<f64>(), parts[2].parse::<usize>()) else {
        return err(format!("grid `{text}`: expected start:end:count"));
    };
    if !(a.is_finite() && b.is_finite() && b > a) || n == 0 {
        return err(format!("grid `{text}`: need start < end and count ≥ 1"));
    }
    Ok((0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect())
}
