//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`, `# comment` or `include = other.conf`. Includes
//! resolve relative to the including file and are applied in place, so later
//! lines override earlier ones. Path values resolve relative to the file
//! that sets them. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
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

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Path,
    Text,
    Choice(&'static [&'static str]),
    /// Inclusive range.
    Int(i64, i64),
    /// Inclusive lower bound; upper bound inclusive unless `open_hi`.
    Float { lo: f64, hi: f64, open_lo: bool, open_hi: bool },
}

const fn unit() -> Kind {
    Kind::Float { lo: 0.0, hi: 1.0, open_lo: false, open_hi: false }
}

const fn positive() -> Kind {
    Kind::Float { lo: 0.0, hi: f64::INFINITY, open_lo: true, open_hi: true }
}

const KEYS: &[(&str, Kind)] = &[
    ("seed", Kind::Int(0, i64::MAX)),
    ("jobs", Kind::Int(1, 256)),
    ("out", Kind::Path),
    ("pages", Kind::Path),
    ("candidates", Kind::Path),
    ("html", Kind::Path),
    ("images", Kind::Path),
    ("ground_truth", Kind::Path),
    ("align.pages", Kind::Path),
    ("align.text_sim_threshold", unit()),
    ("align.context_threshold", unit()),
    ("align.spatial_tolerance", Kind::Float { lo: 0.0, hi: f64::INFINITY, open_lo: false, open_hi: true }),
    ("order.pages", Kind::Path),
    ("order.alignment", Kind::Path),
    ("order.strategy", Kind::Choice(&["html", "hierarchy", "segment"])),
    ("order.t1", positive()),
    ("order.theta1", Kind::Float { lo: 0.0, hi: 90.0, open_lo: true, open_hi: true }),
    ("order.max_invalid", Kind::Int(0, 1_000_000)),
    ("order.rules", Kind::Text),
    ("segment.threshold", Kind::Int(0, 255)),
    ("segment.dilation", Kind::Int(0, 64)),
    ("segment.erosion", Kind::Int(0, 64)),
    ("segment.min_run_fraction", Kind::Float { lo: 0.0, hi: 1.0, open_lo: true, open_hi: false }),
    ("segment.gap_factor", positive()),
    ("segment.word_gap_ratio", positive()),
    ("segment.headline_factor", positive()),
    ("qagen.pages", Kind::Path),
    ("qagen.orders", Kind::Path),
    ("qa.samples_per_document", Kind::Int(1, 1000)),
    ("qa.link_threshold", unit()),
    ("qa.max_pages", Kind::Int(1, 64)),
    ("qa.temperature", Kind::Float { lo: 0.0, hi: 2.0, open_lo: false, open_hi: false }),
    ("qa.retries", Kind::Int(0, 10)),
    ("qa.in_flight", Kind::Int(1, 256)),
    ("examples.curated", Kind::Path),
    ("examples.dataset", Kind::Path),
    ("provider.kind", Kind::Choice(&["mock", "http"])),
    ("provider.script", Kind::Path),
    ("provider.pass_rate", unit()),
    ("provider.base_url", Kind::Text),
    ("provider.model", Kind::Text),
    ("provider.api_key_env", Kind::Text),
    ("provider.timeout_secs", Kind::Int(1, 3600)),
    ("provider.retries", Kind::Int(0, 10)),
    ("eval.task", Kind::Choice(&["vqa", "ocr", "rop_line", "rop_para", "complexity"])),
    ("eval.predictions", Kind::Path),
];

/// Per-engine weight overrides: `fusion.weight.<engine> = w`.
const WEIGHT_PREFIX: &str = "fusion.weight.";

fn kind_of(key: &str) -> Option<Kind> {
    if let Some(engine) = key.strip_prefix(WEIGHT_PREFIX) {
        return (!engine.is_empty()).then_some(unit());
    }
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn check(key: &str, value: &str) -> Result<(), ConfigError> {
    let Some(kind) = kind_of(key) else {
        return err(format!("unknown config key `{key}`"));
    };
    match kind {
        Kind::Path | Kind::Text => {
            if value.is_empty() {
                return err(format!("`{key}` is empty"));
            }
        }
        Kind::Choice(options) => {
            if !options.contains(&value) {
                return err(format!("`{key}` = `{value}` is not one of {}", options.join(", ")));
            }
        }
        Kind::Int(lo, hi) => match value.parse::<i64>() {
            Ok(v) if (lo..=hi).contains(&v) => {}
            _ => return err(format!("`{key}` = `{value}` must be an integer in [{lo}, {hi}]")),
        },
        Kind::Float { lo, hi, open_lo, open_hi } => {
            let ok = value.parse::<f64>().ok().filter(|v| {
                !v.is_nan()
                    && (if open_lo { *v > lo } else { *v >= lo })
                    && (if open_hi { *v < hi } else { *v <= hi })
            });
            if ok.is_none() {
                let l = if open_lo { '(' } else { '[' };
                let r = if open_hi { ')' } else { ']' };
                return err(format!("`{key}` = `{value}` must be a number in {l}{lo}, {hi}{r}"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

const MAX_INCLUDE_DEPTH: usize = 16;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.load_into(path, 0)?;
        Ok(cfg)
    }

    fn load_into(&mut self, path: &Path, depth: usize) -> Result<(), ConfigError> {
        if depth > MAX_INCLUDE_DEPTH {
            return err(format!("includes nested too deeply at {}", path.display()));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("{}:{}: expected `key = value`", path.display(), n + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            if key == "include" {
                self.load_into(&base.join(value), depth + 1)?;
                continue;
            }
            self.set_relative(key, value, base)
                .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), n + 1)))?;
        }
        Ok(())
    }

    /// Sets a value; relative paths resolve against `base`.
    pub fn set_relative(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        check(key, value)?;
        let value = match kind_of(key) {
            Some(Kind::Path) if Path::new(value).is_relative() => base.join(value).to_string_lossy().into_owned(),
            _ => value.to_string(),
        };
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    /// Sets a value given on the command line (paths relative to the working directory).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_relative(key, value, Path::new(""))
    }

    /// Parses `key=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        match pair.split_once('=') {
            Some((k, v)) => self.set(k.trim(), v.trim()),
            None => err(format!("`{pair}` is not key=value")),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(kind_of(key).is_some(), "undeclared key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, ConfigError> {
        self.path(key)
            .ok_or_else(|| ConfigError(format!("missing required setting `{key}`")))
    }

    pub fn float(&self, key: &str, default: f64) -> f64 {
        self.get(key).map_or(default, |v| v.parse().expect("validated on set"))
    }

    pub fn opt_float(&self, key: &str) -> Option<f64> {
        self.get(key).map(|v| v.parse().expect("validated on set"))
    }

    pub fn int(&self, key: &str, default: i64) -> i64 {
        self.get(key).map_or(default, |v| v.parse().expect("validated on set"))
    }

    pub fn text<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// `fusion.weight.*` overrides by engine id.
    pub fn engine_weights(&self) -> BTreeMap<String, f64> {
        self.values
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(WEIGHT_PREFIX)
                    .map(|e| (e.to_string(), v.parse().expect("validated on set")))
            })
            .collect()
    }

    /// Every setting except the output location, for manifests.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| k.as_str() != "out")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}
