//! Settings resolved as flags > environment > config file > defaults.
//!
//! The config file is flat `key = value` text; `#` starts a comment line.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use flatstir_core::DEFAULT_BUDGET;

pub const ENV_BUDGET: &str = "FLATSTIR_BUDGET";
pub const ENV_CACHE_DIR: &str = "FLATSTIR_CACHE_DIR";
pub const ENV_CONFIG: &str = "FLATSTIR_CONFIG";
pub const ENV_OFFLINE: &str = "FLATSTIR_OFFLINE";

const KEYS: [&str; 4] = ["budget", "cache_dir", "offline", "timeout_secs"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    pub budget: u64,
    pub cache_dir: PathBuf,
    pub offline: bool,
    pub timeout_secs: u64,
}

/// Values given on the command line; `None` means not given.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub budget: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

fn parse_file(path: &Path, text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "{}:{}: expected key = value",
                path.display(),
                i + 1
            )));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError(format!(
                "{}:{}: unknown key {key:?}",
                path.display(),
                i + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_u64(what: &str, v: &str) -> Result<u64, ConfigError> {
    v.replace('_', "")
        .parse()
        .map_err(|_| ConfigError(format!("{what}: {v:?} is not a nonnegative integer")))
}

fn parse_bool(what: &str, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" | "" => Ok(false),
        _ => Err(ConfigError(format!("{what}: {v:?} is not a boolean"))),
    }
}

/// Config file named by the flag, then the environment, then
/// `<user config dir>/flatstir/config` if it exists.
fn config_path(overrides: &Overrides, env: &dyn Fn(&str) -> Option<String>) -> Option<(PathBuf, bool)> {
    if let Some(p) = &overrides.config {
        return Some((p.clone(), true));
    }
    if let Some(p) = env(ENV_CONFIG) {
        return Some((PathBuf::from(p), true));
    }
    dirs::config_dir().map(|d| (d.join("flatstir").join("config"), false))
}

pub fn resolve_with(overrides: &Overrides, env: &dyn Fn(&str) -> Option<String>) -> Result<Settings, ConfigError> {
    let file = match config_path(overrides, env) {
        Some((path, required)) => match fs::read_to_string(&path) {
            Ok(text) => parse_file(&path, &text)?,
            Err(e) if !required && e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(ConfigError(format!("{}: {e}", path.display()))),
        },
        None => BTreeMap::new(),
    };

    let budget = match (overrides.budget, env(ENV_BUDGET), file.get("budget")) {
        (Some(b), _, _) => b,
        (None, Some(v), _) => parse_u64(ENV_BUDGET, &v)?,
        (None, None, Some(v)) => parse_u64("budget", v)?,
        (None, None, None) => DEFAULT_BUDGET,
    };
    let cache_dir = match (&overrides.cache_dir, env(ENV_CACHE_DIR), file.get("cache_dir")) {
        (Some(d), _, _) => d.clone(),
        (None, Some(v), _) => PathBuf::from(v),
        (None, None, Some(v)) => PathBuf::from(v),
        (None, None, None) => dirs::data_dir()
            .unwrap_or_else(std::env::temp_dir)
            .join("flatstir")
            .join("oeis"),
    };
    let offline = if overrides.offline {
        true
    } else if let Some(v) = env(ENV_OFFLINE) {
        parse_bool(ENV_OFFLINE, &v)?
    } else if let Some(v) = file.get("offline") {
        parse_bool("offline", v)?
    } else {
        false
    };
    let timeout_secs = match file.get("timeout_secs") {
        Some(v) => parse_u64("timeout_secs", v)?,
        None => 10,
    };
    Ok(Settings {
        budget,
        cache_dir,
        offline,
        timeout_secs,
    })
}

pub fn resolve(overrides: &Overrides) -> Result<Settings, ConfigError> {
    resolve_with(overrides, &|key| std::env::var(key).ok().filter(|v| !v.is_empty()))
}
