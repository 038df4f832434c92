//! Line-based run configuration.
//!
//! ```text
//! # comment
//! n = 64
//! dt = 1e-3
//! t_end = 1
//! preset = taylor_green_inhomogeneous
//! ```
//!
//! Every key is optional; missing keys keep the defaults of
//! [`RunConfig::default`]. Unknown keys are rejected.

use std::path::Path;

use iie_core::eulerian::RunConfig;
use iie_core::presets::PresetKind;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {key} {message}")]
    Range {
        line: usize,
        key: String,
        message: String,
    },
    #[error("--{flag}: {message}")]
    Flag { flag: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Keys accepted in a config file, with a one-line description each.
pub const KEYS: &[(&str, &str)] = &[
    ("n", "grid points per axis, even and >= 8 (default 64)"),
    ("dt", "time step (default 1e-3)"),
    ("t_end", "final time (default 1)"),
    (
        "snapshot_interval",
        "time between snapshots, 0 = first and last only (default 0)",
    ),
    (
        "tol_elliptic",
        "relative residual of the elliptic solves (default 1e-11)",
    ),
    ("dealias", "2/3-rule dealiasing on|off (default on)"),
    (
        "preset",
        "taylor_green | taylor_green_inhomogeneous | shear | random_smooth",
    ),
    ("epsilon", "density amplitude of the preset (default 0.2)"),
    ("seed", "random_smooth seed (default 0)"),
    ("kmax", "random_smooth band limit (default 4)"),
    ("amplitude", "random_smooth peak speed (default 1)"),
    (
        "diagnostics_every",
        "steps between diagnostic rows (default 10)",
    ),
    (
        "level_sets",
        "comma-separated thresholds for level-set vorticity (default 0.9,1.0,1.1)",
    ),
];

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("{key}: '{v}' is not a number"),
    })?;
    if !x.is_finite() {
        return Err(range(line, key, "must be finite"));
    }
    Ok(x)
}

fn parse_int(line: usize, key: &str, v: &str) -> Result<i64, ConfigError> {
    v.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("{key}: '{v}' is not an integer"),
    })
}

fn range(line: usize, key: &str, message: &str) -> ConfigError {
    ConfigError::Range {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn positive(line: usize, key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(range(line, key, "must be positive"))
    }
}

fn non_negative(line: usize, key: &str, x: f64) -> Result<f64, ConfigError> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(range(line, key, "must be non-negative"))
    }
}

/// Applies one `key = value` pair.
pub fn apply_key(
    cfg: &mut RunConfig,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ConfigError> {
    match key {
        "n" => {
            let n = parse_int(line, key, value)?;
            if n < 8 || n % 2 != 0 {
                return Err(range(line, key, "must be an even integer >= 8"));
            }
            cfg.n = n as usize;
        }
        "dt" => cfg.dt = positive(line, key, parse_f64(line, key, value)?)?,
        "t_end" => cfg.t_end = non_negative(line, key, parse_f64(line, key, value)?)?,
        "snapshot_interval" => {
            cfg.snapshot_interval = non_negative(line, key, parse_f64(line, key, value)?)?
        }
        "tol_elliptic" => {
            let tol = parse_f64(line, key, value)?;
            if !(tol > 0.0 && tol < 1.0) {
                return Err(range(line, key, "must lie in (0, 1)"));
            }
            cfg.tol_elliptic = tol;
        }
        "dealias" => {
            cfg.dealias = match value {
                "on" | "true" | "yes" | "1" => true,
                "off" | "false" | "no" | "0" => false,
                _ => {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("dealias: expected on/off, got '{value}'"),
                    })
                }
            }
        }
        "preset" => {
            cfg.preset.kind = value
                .parse::<PresetKind>()
                .map_err(|_| range(line, key, &format!("'{value}' is not a known preset")))?
        }
        "epsilon" => cfg.preset.epsilon = non_negative(line, key, parse_f64(line, key, value)?)?,
        "seed" => {
            let seed = parse_int(line, key, value)?;
            if seed < 0 {
                return Err(range(line, key, "must be non-negative"));
            }
            cfg.preset.seed = seed as u64;
        }
        "kmax" => {
            let k = parse_int(line, key, value)?;
            if k < 1 {
                return Err(range(line, key, "must be at least 1"));
            }
            cfg.preset.kmax = k as usize;
        }
        "amplitude" => {
            cfg.preset.amplitude = non_negative(line, key, parse_f64(line, key, value)?)?
        }
        "diagnostics_every" => {
            let k = parse_int(line, key, value)?;
            if k < 1 {
                return Err(range(line, key, "must be at least 1"));
            }
            cfg.diagnostics_every = k as usize;
        }
        "level_sets" => {
            cfg.level_sets = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_f64(line, key, s))
                .collect::<Result<_, _>>()?
        }
        _ => {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

/// Parses config text on top of the defaults.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: "empty key or value".into(),
            });
        }
        apply_key(&mut cfg, line, key, value)?;
    }
    Ok(cfg)
}

/// Applies a command-line override, reporting errors against the flag.
pub fn apply_flag(
    cfg: &mut RunConfig,
    flag: &str,
    key: &str,
    value: &str,
) -> Result<(), ConfigError> {
    apply_key(cfg, 0, key, value).map_err(|e| match e {
        ConfigError::Range { key, message, .. } => ConfigError::Flag {
            flag: flag.to_string(),
            message: format!("{key} {message}"),
        },
        ConfigError::Parse { message, .. } => ConfigError::Flag {
            flag: flag.to_string(),
            message,
        },
        other => other,
    })
}

/// `--help` text listing the config keys.
pub fn help_text() -> String {
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config file keys (`key = value`, `#` starts a comment):\n");
    for (k, doc) in KEYS {
        s.push_str(&format!("  {k:<width$}  {doc}\n"));
    }
    s
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}
