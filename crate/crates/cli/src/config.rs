//! Layered run configuration: built-in defaults, then an optional TOML or
//! JSON file, then the `HYBRO_THREADS` environment variable for the thread
//! count, then command-line flags. Every leaf knob remembers which layer set
//! it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use hybro_core::hybro::HybroConfig;
use hybro_core::metrics::MacroHpwlMode;
use hybro_core::perturb::{PerturbKind, PerturbStrategy, DEFAULT_STRENGTH};
use hybro_core::placer::{InitMode, PlacerConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Shuffle,
    ShuffleAll,
    Wiremask,
    /// Independent restarts instead of perturbations.
    Restart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub threads: usize,
    pub iterations: usize,
    pub strategy: Strategy,
    /// Perturbation strength in percent.
    pub p: f64,
    pub init: InitMode,
    pub perturb_best: bool,
    pub macro_hpwl: MacroHpwlMode,
    pub placer: PlacerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            threads: 0,
            iterations: 5,
            strategy: Strategy::Wiremask,
            p: DEFAULT_STRENGTH,
            init: InitMode::RandomCenter,
            perturb_best: false,
            macro_hpwl: MacroHpwlMode::default(),
            placer: PlacerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn placer(&self) -> PlacerConfig {
        PlacerConfig {
            seed: self.seed,
            ..self.placer.clone()
        }
    }

    pub fn hybro(&self) -> Result<HybroConfig> {
        let kind = match self.strategy {
            Strategy::Shuffle => PerturbKind::Shuffle,
            Strategy::ShuffleAll => PerturbKind::ShuffleAll,
            Strategy::Wiremask | Strategy::Restart => PerturbKind::WireMask,
        };
        let strategy = PerturbStrategy::new(kind, self.p, self.seed).map_err(|e| UsageError(e.to_string()))?;
        Ok(HybroConfig {
            iterations: self.iterations,
            strategy,
            placer: self.placer(),
            baseline_mode: self.strategy == Strategy::Restart,
            init_mode: self.init,
            perturb_best: self.perturb_best,
            macro_hpwl_mode: self.macro_hpwl,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    File,
    Env,
    Flag,
}

/// Invalid configuration or flags; reported with the parse-error exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub provenance: BTreeMap<String, Source>,
}

fn mark_leaves(value: &Value, path: &str, source: Source, out: &mut BTreeMap<String, Source>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                mark_leaves(v, &join(path, k), source, out);
            }
        }
        _ => {
            out.insert(path.to_string(), source);
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Overlays `top` on `base`. Objects merge key by key when every key of
/// `top` already exists in `base`; otherwise (an enum switching variant, or
/// an unknown key left for deserialization to reject) the value is replaced.
fn overlay(base: &mut Value, top: Value, path: &str, source: Source, prov: &mut BTreeMap<String, Source>) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) if t.keys().all(|k| b.contains_key(k)) => {
            for (k, v) in t {
                let child = join(path, &k);
                overlay(b.get_mut(&k).expect("key checked"), v, &child, source, prov);
            }
        }
        (slot, top) => {
            let prefix = format!("{path}.");
            prov.retain(|k, _| k != path && !k.starts_with(&prefix));
            mark_leaves(&top, path, source, prov);
            *slot = top;
        }
    }
}

/// Reads a config file. A run manifest is accepted too, in which case its
/// recorded configuration is used.
pub fn read_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
    };
    match value {
        Value::Object(mut map) if map.get("tool").and_then(Value::as_str) == Some(crate::manifest::TOOL) => {
            Ok(map.remove("config").unwrap_or(Value::Object(Map::new())))
        }
        v @ Value::Object(_) => Ok(v),
        _ => Err(UsageError(format!("{}: expected a table of settings", path.display())).into()),
    }
}

/// Serialized form of a configuration, as written to manifests.
pub fn config_value(config: &RunConfig) -> Value {
    let mut v = serde_json::to_value(config).expect("config serializes");
    // the top-level seed drives every random stream
    if let Some(placer) = v.get_mut("placer").and_then(Value::as_object_mut) {
        placer.remove("seed");
    }
    v
}

/// Resolves the final configuration from its layers.
pub fn resolve(file: Option<Value>, env_threads: Option<usize>, flags: Value) -> Result<Resolved> {
    let mut value = config_value(&RunConfig::default());
    let mut provenance = BTreeMap::new();
    mark_leaves(&value, "", Source::Default, &mut provenance);
    if let Some(t) = env_threads {
        overlay(&mut value, serde_json::json!({ "threads": t }), "", Source::Env, &mut provenance);
    }
    if let Some(file) = file {
        if file.pointer("/placer/seed").is_some() {
            return Err(UsageError("set the top-level `seed` instead of `placer.seed`".into()).into());
        }
        overlay(&mut value, file, "", Source::File, &mut provenance);
    }
    overlay(&mut value, flags, "", Source::Flag, &mut provenance);
    let config: RunConfig = serde_json::from_value(value).map_err(|e| UsageError(format!("configuration: {e}")))?;
    config.placer().validate().map_err(|e| UsageError(e.to_string()))?;
    if !(config.p > 0.0 && config.p <= 100.0) {
        return Err(UsageError(format!("p must lie in (0, 100], got {}", config.p)).into());
    }
    Ok(Resolved { config, provenance })
}

/// Builds a flag layer from `(dotted path, value)` pairs, skipping unset
/// flags.
pub fn flag_layer(entries: Vec<(&str, Option<Value>)>) -> Value {
    let mut root = Value::Object(Map::new());
    for (path, value) in entries {
        let Some(value) = value else { continue };
        let mut node = &mut root;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let map = node.as_object_mut().expect("flag paths build objects");
            if i + 1 == parts.len() {
                map.insert((*part).to_string(), value.clone());
                break;
            }
            node = map.entry(*part).or_insert_with(|| Value::Object(Map::new()));
        }
    }
    root
}
