//! TOML config loading with `--set` overrides.

use std::path::Path;

use home_core::env::EnvConfig;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("ConfigError: cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("ConfigError: {0}")]
    Parse(String),
    #[error("ConfigError: bad override {0:?}: expected key.path=value")]
    Override(String),
    #[error("ConfigError: {0}")]
    Invalid(String),
}

/// Parses an override value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

/// Applies `a.b.c=value` to `root`, creating intermediate tables.
pub fn apply_override(root: &mut Table, spec: &str) -> Result<(), ConfigLoadError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigLoadError::Override(spec.into()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigLoadError::Override(spec.into()));
    }
    let mut t = root;
    for p in &path[..path.len() - 1] {
        let slot = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = slot.as_table_mut().ok_or_else(|| ConfigLoadError::Override(spec.into()))?;
    }
    t.insert(path[path.len() - 1].to_owned(), parse_value(raw.trim()));
    Ok(())
}

/// Loads an optional TOML file, applies overrides in order, then the seed, and validates.
pub fn load_config(path: Option<&Path>, sets: &[String], seed: Option<u64>) -> Result<EnvConfig, ConfigLoadError> {
    let mut root = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigLoadError::Read {
                path: p.display().to_string(),
                source,
            })?;
            text.parse::<Table>().map_err(|e| ConfigLoadError::Parse(e.to_string()))?
        }
        None => Table::new(),
    };
    for s in sets {
        apply_override(&mut root, s)?;
    }
    if let Some(s) = seed {
        root.insert("seed".into(), Value::Integer(s as i64));
    }
    let cfg: EnvConfig = Value::Table(root).try_into().map_err(|e: toml::de::Error| ConfigLoadError::Parse(e.to_string()))?;
    cfg.validate().map_err(|e| ConfigLoadError::Invalid(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_parse() {
        let mut t = Table::new();
        apply_override(&mut t, "audio.max_order=2").unwrap();
        apply_override(&mut t, "modalities.audio=false").unwrap();
        apply_override(&mut t, "houses.kind=corpus").unwrap();
        assert_eq!(t["audio"]["max_order"].as_integer(), Some(2));
        assert_eq!(t["modalities"]["audio"].as_bool(), Some(false));
        assert_eq!(t["houses"]["kind"].as_str(), Some("corpus"));
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "a..b=1").is_err());
        assert!(apply_override(&mut t, "audio.max_order.x=1").is_err());
    }

    #[test]
    fn file_then_overrides_then_seed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "width = 32\nseed = 3\n[audio]\nmax_order = 2\n").unwrap();
        let cfg = load_config(Some(&p), &["height=16".into(), "audio.max_order=0".into()], Some(9)).unwrap();
        assert_eq!((cfg.width, cfg.height, cfg.seed, cfg.audio.max_order), (32, 16, 9, 0));
        assert!(load_config(None, &["no_such_key=1".into()], None).is_err());
        assert!(load_config(None, &["agents=0".into()], None).is_err());
        assert!(load_config(Some(&dir.path().join("missing.toml")), &[], None).is_err());
    }
}
