//! Line-oriented `key = value` configuration.
//!
//! ```text
//! # shared settings
//! duration = 360
//! strategy = fixed:300,300
//!
//! [sigma]                      # one sweep per section
//! sweep_param = sigma
//! sweep_values = 25 50 75 100 125 150
//! repetitions = 5
//! ```
//!
//! Keys before the first section form the base; each section inherits the base and
//! overrides it. `sweep_values` is whitespace-separated because strategy values contain
//! commas. Unknown keys are rejected.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::attackers::StrategySpec;
use crate::sim::scenario::{DensityPreset, ScenarioConfig, REFERENCE_ATTACKER_PROBABILITIES};

/// Prefix of environment variables that override config keys, e.g. `POSVERIFY_SIGMA=50`.
pub const ENV_PREFIX: &str = "POSVERIFY_";

const PRESETS: [(&str, &str); 4] = [
    ("fig_parameters", include_str!("../presets/fig_parameters.conf")),
    ("fig_random", include_str!("../presets/fig_random.conf")),
    ("fig_random_offset", include_str!("../presets/fig_random_offset.conf")),
    ("fig_fixed_offset", include_str!("../presets/fig_fixed_offset.conf")),
];

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Env(String),
    Preset { name: String, line: usize },
    CommandLine,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Env(var) => write!(f, "environment variable {var}"),
            Origin::Preset { name, line } => write!(f, "preset {name}, line {line}"),
            Origin::CommandLine => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigErrorKind {
    #[error("expected `key = value` or `[section]`, got {0:?}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}` expects {expected}, got {value:?}")]
    TypeMismatch {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{key}` {problem}")]
    Constraint { key: String, problem: String },
    #[error("duplicate section [{0}]")]
    DuplicateSection(String),
    #[error("no sweep or preset named `{0}`")]
    UnknownSweep(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{origin}: {kind}")]
pub struct ConfigError {
    pub origin: Origin,
    pub kind: ConfigErrorKind,
}

impl ConfigError {
    fn new(origin: Origin, kind: ConfigErrorKind) -> Self {
        ConfigError { origin, kind }
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "world_width",
    "world_height",
    "grid_spacing",
    "density",
    "arrival_rate",
    "initial_vehicles",
    "speed_min",
    "speed_max",
    "attacker_probability",
    "strategy",
    "duration",
    "warmup",
    "step",
    "seed",
    "beacon_rate",
    "art_threshold",
    "sigma",
    "exchange_threshold",
    "decay_constant",
    "table_ttl",
    "exchange_enabled",
    "r_full",
    "r_cut",
    "radio_falloff",
    "decision_threshold",
];

const SWEEP_KEYS: &[&str] = &["sweep_param", "sweep_values", "repetitions", "strict_paper"];

fn is_known_key(key: &str) -> bool {
    SCENARIO_KEYS.contains(&key) || SWEEP_KEYS.contains(&key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub origin: Origin,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
}

/// Syntactically parsed config text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigDoc {
    pub base: Vec<Entry>,
    pub sections: Vec<Section>,
}

impl ConfigDoc {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn parse_doc(text: &str, origin: impl Fn(usize) -> Origin) -> Result<ConfigDoc, ConfigError> {
    let mut doc = ConfigDoc::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(ConfigError::new(
                    origin(line_no),
                    ConfigErrorKind::Syntax(raw.to_string()),
                ));
            }
            if doc.section(name).is_some() {
                return Err(ConfigError::new(
                    origin(line_no),
                    ConfigErrorKind::DuplicateSection(name.to_string()),
                ));
            }
            doc.sections.push(Section {
                name: name.to_string(),
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::new(
                origin(line_no),
                ConfigErrorKind::Syntax(raw.to_string()),
            ));
        };
        let key = key.trim();
        if !is_known_key(key) {
            return Err(ConfigError::new(
                origin(line_no),
                ConfigErrorKind::UnknownKey(key.to_string()),
            ));
        }
        let entry = Entry {
            origin: origin(line_no),
            key: key.to_string(),
            value: value.trim().to_string(),
        };
        match doc.sections.last_mut() {
            Some(section) => section.entries.push(entry),
            None => doc.base.push(entry),
        }
    }
    Ok(doc)
}

/// Parses config text. Syntax and key names are checked here; values are checked when the
/// document is resolved into sweeps.
pub fn parse_config(text: &str) -> Result<ConfigDoc, ConfigError> {
    parse_doc(text, Origin::Line)
}

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset(name: &str) -> Option<ConfigDoc> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name)?;
    let doc = parse_doc(text, |line| Origin::Preset {
        name: name.to_string(),
        line,
    })
    .expect("shipped presets parse");
    Some(doc)
}

/// Collects `POSVERIFY_*` variables as config entries. Unknown keys are errors.
pub fn env_overrides<I>(vars: I) -> Result<Vec<Entry>, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut entries: Vec<Entry> = vars
        .into_iter()
        .filter_map(|(name, value)| {
            let key = name.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
            Some(Entry {
                origin: Origin::Env(name),
                key,
                value,
            })
        })
        .collect();
    entries.sort_by(|a, b| a.key.cmp(&b.key));
    if let Some(bad) = entries.iter().find(|e| !is_known_key(&e.key)) {
        return Err(ConfigError::new(
            bad.origin.clone(),
            ConfigErrorKind::UnknownKey(bad.key.clone()),
        ));
    }
    Ok(entries)
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// No parameter varies; only repetitions.
    None,
    ArtThreshold,
    ExchangeThreshold,
    Sigma,
    Density,
    AttackerProbability,
    Strategy,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::None => "none",
            SweepParam::ArtThreshold => "art_threshold",
            SweepParam::ExchangeThreshold => "exchange_threshold",
            SweepParam::Sigma => "sigma",
            SweepParam::Density => "density",
            SweepParam::AttackerProbability => "attacker_probability",
            SweepParam::Strategy => "strategy",
        }
    }

    fn is_numeric(self) -> bool {
        matches!(
            self,
            SweepParam::ArtThreshold
                | SweepParam::ExchangeThreshold
                | SweepParam::Sigma
                | SweepParam::AttackerProbability
        )
    }
}

impl FromStr for SweepParam {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParam::None,
            SweepParam::ArtThreshold,
            SweepParam::ExchangeThreshold,
            SweepParam::Sigma,
            SweepParam::Density,
            SweepParam::AttackerProbability,
            SweepParam::Strategy,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One swept parameter over a list of values, each run `repetitions` times with seeds
/// `base.seed + repetition`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub param: SweepParam,
    /// Empty for [`SweepParam::None`].
    pub values: Vec<String>,
    pub repetitions: u32,
    pub strict_paper: bool,
    pub base: ScenarioConfig,
}

/// A concrete run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Index into [`SweepSpec::values`] (0 for an unswept spec).
    pub value_index: usize,
    pub param_value: String,
    pub config: ScenarioConfig,
}

impl SweepSpec {
    /// Every (value, repetition) run, ordered by value then seed.
    pub fn points(&self) -> Vec<SweepPoint> {
        let values: Vec<Option<&str>> = if self.param == SweepParam::None {
            vec![None]
        } else {
            self.values.iter().map(|v| Some(v.as_str())).collect()
        };
        let mut points = Vec::new();
        for (value_index, value) in values.into_iter().enumerate() {
            let mut cfg = self.base.clone();
            if let Some(v) = value {
                apply_key(&mut cfg, self.param.name(), v)
                    .expect("sweep values are validated at resolve time");
            }
            for rep in 0..self.repetitions {
                let mut config = cfg.clone();
                config.seed = self.base.seed.wrapping_add(u64::from(rep));
                points.push(SweepPoint {
                    value_index,
                    param_value: value.unwrap_or("").to_string(),
                    config,
                });
            }
        }
        points
    }

    /// Value indices in output order: numeric ascending for numeric parameters, as
    /// listed otherwise.
    pub fn value_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len().max(1)).collect();
        if self.param.is_numeric() {
            let key = |i: &usize| self.values[*i].parse::<f64>().unwrap_or(f64::NAN);
            order.sort_by(|a, b| key(a).total_cmp(&key(b)));
        }
        order
    }
}

fn mismatch(key: &str, value: &str, expected: &'static str) -> ConfigErrorKind {
    ConfigErrorKind::TypeMismatch {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    }
}

fn num(key: &str, value: &str) -> Result<f64, ConfigErrorKind> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| mismatch(key, value, "a number"))
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigErrorKind> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(mismatch(key, value, "true or false")),
    }
}

/// Sets one scenario key from its text value.
pub fn apply_key(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), ConfigErrorKind> {
    match key {
        "world_width" => cfg.world_width = num(key, value)?,
        "world_height" => cfg.world_height = num(key, value)?,
        "grid_spacing" => cfg.grid_spacing = num(key, value)?,
        "density" => {
            cfg.density = value
                .parse::<DensityPreset>()
                .map_err(|_| mismatch(key, value, "low, medium or high"))?
        }
        "arrival_rate" => cfg.arrival_rate = Some(num(key, value)?),
        "initial_vehicles" => {
            cfg.initial_vehicles = Some(
                value
                    .parse::<u32>()
                    .map_err(|_| mismatch(key, value, "a non-negative integer"))?,
            )
        }
        "speed_min" => cfg.speed_min = num(key, value)?,
        "speed_max" => cfg.speed_max = num(key, value)?,
        "attacker_probability" => cfg.attacker_probability = num(key, value)?,
        "strategy" => {
            cfg.strategy = value
                .parse::<StrategySpec>()
                .map_err(|_| mismatch(key, value, "fixed:dx,dy | random_position | random_offset:w"))?
        }
        "duration" => cfg.duration = num(key, value)?,
        "warmup" => cfg.warmup = num(key, value)?,
        "step" => cfg.step = num(key, value)?,
        "seed" => {
            cfg.seed = value
                .parse::<u64>()
                .map_err(|_| mismatch(key, value, "a non-negative integer"))?
        }
        "beacon_rate" => cfg.beacon_rate = num(key, value)?,
        "art_threshold" => cfg.art_threshold = num(key, value)?,
        "sigma" => cfg.sigma = num(key, value)?,
        "exchange_threshold" => cfg.exchange_threshold = num(key, value)?,
        "decay_constant" => cfg.decay_constant = num(key, value)?,
        "table_ttl" => cfg.table_ttl = num(key, value)?,
        "exchange_enabled" => cfg.exchange_enabled = boolean(key, value)?,
        "r_full" => cfg.r_full = num(key, value)?,
        "r_cut" => cfg.r_cut = num(key, value)?,
        "radio_falloff" => cfg.radio_falloff = num(key, value)?,
        "decision_threshold" => cfg.decision_threshold = num(key, value)?,
        _ => return Err(ConfigErrorKind::UnknownKey(key.to_string())),
    }
    Ok(())
}

fn check_strict(cfg: &ScenarioConfig) -> Result<(), (&'static str, String)> {
    if !REFERENCE_ATTACKER_PROBABILITIES.contains(&cfg.attacker_probability) {
        return Err((
            "attacker_probability",
            format!(
                "must be one of {:?} in strict-paper mode",
                REFERENCE_ATTACKER_PROBABILITIES
            ),
        ));
    }
    if cfg.beacon_rate != 1.0 {
        return Err(("beacon_rate", "must be 1 in strict-paper mode".to_string()));
    }
    Ok(())
}

/// Folds layered entries into a validated [`SweepSpec`]. Later entries win.
pub fn build_sweep(name: &str, layers: &[&[Entry]]) -> Result<SweepSpec, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut param = SweepParam::None;
    let mut values: Vec<String> = Vec::new();
    let mut repetitions = 1u32;
    let mut strict = false;
    let mut origins: HashMap<&str, Origin> = HashMap::new();

    for entry in layers.iter().flat_map(|l| l.iter()) {
        let fail = |kind| ConfigError::new(entry.origin.clone(), kind);
        match entry.key.as_str() {
            "sweep_param" => {
                param = entry.value.parse().map_err(|_| {
                    fail(mismatch(
                        &entry.key,
                        &entry.value,
                        "one of none, art_threshold, exchange_threshold, sigma, density, attacker_probability, strategy",
                    ))
                })?
            }
            "sweep_values" => {
                values = entry.value.split_whitespace().map(str::to_string).collect()
            }
            "repetitions" => {
                repetitions = entry
                    .value
                    .parse::<u32>()
                    .map_err(|_| fail(mismatch(&entry.key, &entry.value, "a positive integer")))?
            }
            "strict_paper" => strict = boolean(&entry.key, &entry.value).map_err(fail)?,
            key => apply_key(&mut cfg, key, &entry.value).map_err(fail)?,
        }
        let key = SCENARIO_KEYS
            .iter()
            .chain(SWEEP_KEYS)
            .find(|k| **k == entry.key)
            .expect("keys are checked at parse time");
        origins.insert(key, entry.origin.clone());
    }

    let origin_of = |key: &str| origins.get(key).cloned().unwrap_or(Origin::CommandLine);
    let constraint = |key: &str, problem: String| {
        ConfigError::new(
            origin_of(key),
            ConfigErrorKind::Constraint {
                key: key.to_string(),
                problem,
            },
        )
    };

    if repetitions == 0 {
        return Err(constraint("repetitions", "must be at least 1".into()));
    }
    if param != SweepParam::None && values.is_empty() {
        return Err(constraint("sweep_values", "must list at least one value".into()));
    }
    cfg.validate()
        .map_err(|e| constraint(e.field, e.problem))?;
    if strict {
        check_strict(&cfg).map_err(|(key, problem)| constraint(key, problem))?;
    }
    for value in &values {
        let mut point = cfg.clone();
        apply_key(&mut point, param.name(), value).map_err(|kind| {
            ConfigError::new(origin_of("sweep_values"), kind)
        })?;
        point.validate().map_err(|e| {
            constraint("sweep_values", format!("value {value:?}: {}", e))
        })?;
        if strict {
            check_strict(&point).map_err(|(_, problem)| {
                constraint("sweep_values", format!("value {value:?}: {problem}"))
            })?;
        }
    }
    if param == SweepParam::None {
        values.clear();
    }

    Ok(SweepSpec {
        name: name.to_string(),
        param,
        values,
        repetitions,
        strict_paper: strict,
        base: cfg,
    })
}

/// Options that sit above the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub env: Vec<Entry>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn layer(&self) -> Vec<Entry> {
        let mut entries = self.env.clone();
        if let Some(seed) = self.seed {
            entries.push(Entry {
                origin: Origin::CommandLine,
                key: "seed".into(),
                value: seed.to_string(),
            });
        }
        entries
    }
}

/// Turns a config file (plus an optional sweep/preset selection) into the sweeps to run.
///
/// * `select = Some(name)`: the file's `[name]` section if it has one, otherwise the
///   shipped preset `name` (all of its sections) layered under the file's base keys.
/// * `select = None`: every section of the file, or a single sweep named `sweep` when
///   the file has no sections.
///
/// Precedence, lowest first: preset base, file base, environment / `--seed`, section.
pub fn resolve_sweeps(
    file: &ConfigDoc,
    select: Option<&str>,
    overrides: &Overrides,
) -> Result<Vec<SweepSpec>, ConfigError> {
    let top = overrides.layer();
    let no_origin = |name: &str| {
        ConfigError::new(
            Origin::CommandLine,
            ConfigErrorKind::UnknownSweep(name.to_string()),
        )
    };
    match select {
        Some(name) => {
            if let Some(section) = file.section(name) {
                return Ok(vec![build_sweep(
                    name,
                    &[&file.base, &top, &section.entries],
                )?]);
            }
            let preset = preset(name).ok_or_else(|| no_origin(name))?;
            if preset.sections.is_empty() {
                return Ok(vec![build_sweep(name, &[&preset.base, &file.base, &top])?]);
            }
            preset
                .sections
                .iter()
                .map(|s| {
                    build_sweep(
                        &format!("{name}_{}", s.name),
                        &[&preset.base, &file.base, &top, &s.entries],
                    )
                })
                .collect()
        }
        None if file.sections.is_empty() => Ok(vec![build_sweep("sweep", &[&file.base, &top])?]),
        None => file
            .sections
            .iter()
            .map(|s| build_sweep(&s.name, &[&file.base, &top, &s.entries]))
            .collect(),
    }
}

/// Parses text with no sections into a single scenario (sweep keys allowed, ignored).
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    Ok(parse_sweep(text)?.base)
}

/// Parses text with no sections into a single sweep.
pub fn parse_sweep(text: &str) -> Result<SweepSpec, ConfigError> {
    let doc = parse_config(text)?;
    if let Some(first) = doc.sections.first() {
        return Err(ConfigError::new(
            first
                .entries
                .first()
                .map(|e| e.origin.clone())
                .unwrap_or(Origin::CommandLine),
            ConfigErrorKind::Syntax(format!("[{}]", first.name)),
        ));
    }
    build_sweep("sweep", &[&doc.base])
}
