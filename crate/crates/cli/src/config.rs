//! Run configuration: schema, parsing and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ndslab::gallery::{ExampleId, Question, TheoremId};
use ndslab::rational::parse_q;
use ndslab::{BlockRule, MapSequence, MapSpec, Notion, Space, System};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub systems: Vec<SystemDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<ChainDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gallery: Vec<GalleryDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub searches: Vec<SearchDef>,
    #[serde(default)]
    pub output: OutputDef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derive: Option<DeriveDef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceDef {
    Shift { alphabet: u8 },
    Circle,
    /// Discrete metric on `points` points.
    Finite { points: usize },
    /// Points on the real line with the induced metric.
    Line { positions: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceDef {
    Constant {
        map: String,
    },
    Periodic {
        maps: Vec<String>,
    },
    Linear {
        base: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        prefix: Vec<i64>,
        template: Vec<[i64; 2]>,
    },
    Padded {
        base: String,
    },
    TenBlock {
        base: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeriveDef {
    Iterate { of: String, k: u64 },
    Vector { of: String, a: Vec<u64> },
    Product { of: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDef {
    pub system: String,
    pub notion: String,
    pub horizon: u64,
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_entry: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_request: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuple_cap: Option<u64>,
    /// Witness registry for the mildly-mixing surrogate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDef {
    pub system: String,
    pub eps: String,
    pub deltas: Vec<String>,
    pub length_bound: u64,
    #[serde(default = "one")]
    pub m_bound: u64,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalleryDef {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_request: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteDef {
    pub id: String,
    /// System names; the shipped registry when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<Vec<String>>,
    /// Overrides of the default suite bounds, by field name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchDef {
    pub question: String,
    pub budget: usize,
    pub horizon: u64,
    pub resolution: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Markdown,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDef {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Syntax {
    Toml,
    Json,
}

impl Syntax {
    /// `.json` files are JSON, everything else TOML.
    pub fn from_path(path: &Path) -> Syntax {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Syntax::Json,
            _ => Syntax::Toml,
        }
    }
}

fn one_error(path: &str, message: impl Into<String>) -> ConfigErrors {
    ConfigErrors(vec![ConfigError { path: path.into(), message: message.into() }])
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, syntax: Syntax) -> Result<RunConfig, ConfigErrors> {
    let config: RunConfig = match syntax {
        Syntax::Toml => toml::from_str(text).map_err(|e| one_error("", e.to_string().trim_end()))?,
        Syntax::Json => serde_json::from_str(text).map_err(|e| one_error("", e.to_string()))?,
    };
    config.validate()?;
    Ok(config)
}

/// Serializes a configuration back into a document of the given syntax.
pub fn emit_config(config: &RunConfig, syntax: Syntax) -> String {
    match syntax {
        Syntax::Toml => toml::to_string(config).expect("config serializes to TOML"),
        Syntax::Json => serde_json::to_string_pretty(config).expect("config serializes to JSON"),
    }
}

fn map(text: &str) -> Result<MapSpec, String> {
    text.parse::<MapSpec>().map_err(|e| e.to_string())
}

fn build_space(def: &SpaceDef) -> Result<Space, String> {
    let r = match def {
        SpaceDef::Shift { alphabet } => Space::shift(*alphabet),
        SpaceDef::Circle => Ok(Space::circle()),
        SpaceDef::Finite { points } => Space::discrete(*points),
        SpaceDef::Line { positions } => Space::line(positions),
    };
    r.map_err(|e| e.to_string())
}

fn build_sequence(def: &SequenceDef) -> Result<MapSequence, String> {
    Ok(match def {
        SequenceDef::Constant { map: m } => MapSequence::Constant(map(m)?),
        SequenceDef::Periodic { maps } => {
            if maps.is_empty() {
                return Err("periodic sequence needs at least one map".into());
            }
            MapSequence::Periodic(maps.iter().map(|m| map(m)).collect::<Result<_, _>>()?)
        }
        SequenceDef::Linear { base, prefix, template } => MapSequence::Block(BlockRule::Linear {
            base: map(base)?,
            prefix: prefix.clone(),
            template: template.iter().map(|t| (t[0], t[1])).collect(),
        }),
        SequenceDef::Padded { base } => MapSequence::Block(BlockRule::Padded { base: map(base)? }),
        SequenceDef::TenBlock { base } => MapSequence::Block(BlockRule::TenBlock { base: map(base)? }),
    })
}

fn build_system(def: &SystemDef, known: &BTreeMap<String, System>) -> Result<System, (String, String)> {
    let lookup = |name: &String, field: &str| {
        known.get(name).cloned().ok_or_else(|| (field.to_string(), format!("undefined system \"{name}\"")))
    };
    fn err(field: &str) -> impl Fn(String) -> (String, String) + '_ {
        move |e| (field.to_string(), e)
    }
    match (&def.space, &def.sequence, &def.derive) {
        (Some(space), Some(seq), None) => {
            let space = build_space(space).map_err(err("space"))?;
            let seq = build_sequence(seq).map_err(err("sequence"))?;
            System::new(def.name.clone(), space, seq).map_err(|e| ("sequence".into(), e.to_string()))
        }
        (None, None, Some(derive)) => {
            let s = match derive {
                DeriveDef::Iterate { of, k } => lookup(of, "derive.of")?.iterate(*k),
                DeriveDef::Vector { of, a } => lookup(of, "derive.of")?.vector(a),
                DeriveDef::Product { of } => {
                    let parts = of.iter().map(|n| lookup(n, "derive.of")).collect::<Result<Vec<_>, _>>()?;
                    System::product(&parts)
                }
            };
            s.map(|s| s.with_label(def.name.clone())).map_err(|e| ("derive".into(), e.to_string()))
        }
        _ => Err((String::new(), "give either `space` and `sequence`, or `derive`".into())),
    }
}

impl RunConfig {
    /// Builds every named system in order; later systems may derive from
    /// earlier ones.
    pub fn build_systems(&self) -> Result<BTreeMap<String, System>, ConfigErrors> {
        let mut known = BTreeMap::new();
        let mut errors = Vec::new();
        for (i, def) in self.systems.iter().enumerate() {
            let at = |field: &str| {
                if field.is_empty() {
                    format!("systems[{i}]")
                } else {
                    format!("systems[{i}].{field}")
                }
            };
            if known.contains_key(&def.name) {
                errors.push(ConfigError { path: at("name"), message: format!("duplicate system \"{}\"", def.name) });
                continue;
            }
            match build_system(def, &known) {
                Ok(s) => {
                    known.insert(def.name.clone(), s);
                }
                Err((field, message)) => errors.push(ConfigError { path: at(&field), message }),
            }
        }
        if errors.is_empty() {
            Ok(known)
        } else {
            Err(ConfigErrors(errors))
        }
    }

    /// Collects every schema error with its location.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errors = match self.build_systems() {
            Ok(_) => Vec::new(),
            Err(ConfigErrors(e)) => e,
        };
        let names: Vec<&str> = self.systems.iter().map(|s| s.name.as_str()).collect();
        let mut push = |path: String, message: String| errors.push(ConfigError { path, message });
        let refer = |path: String, name: &str, push: &mut dyn FnMut(String, String)| {
            if !names.contains(&name) {
                push(path, format!("undefined system \"{name}\""));
            }
        };
        let positive = |path: String, field: &str, v: u64, push: &mut dyn FnMut(String, String)| {
            if v == 0 {
                push(format!("{path}.{field}"), format!("{field} must be ≥ 1"));
            }
        };

        for (i, c) in self.checks.iter().enumerate() {
            let p = format!("checks[{i}]");
            refer(format!("{p}.system"), &c.system, &mut push);
            if c.notion.parse::<Notion>().is_err() {
                push(format!("{p}.notion"), format!("unknown notion \"{}\"", c.notion));
            }
            positive(p.clone(), "horizon", c.horizon, &mut push);
            positive(p.clone(), "resolution", c.resolution as u64, &mut push);
            for (field, v) in [
                ("order", c.order.map(|x| x as u64)),
                ("m_bound", c.m_bound),
                ("n_bound", c.n_bound),
                ("max_len", c.max_len.map(|x| x as u64)),
                ("max_entry", c.max_entry),
                ("gap_bound", c.gap_bound),
                ("run_request", c.run_request),
                ("tuple_cap", c.tuple_cap),
            ] {
                if let Some(v) = v {
                    positive(p.clone(), field, v, &mut push);
                }
            }
            if let Some(v) = &c.vector {
                if v.is_empty() || v.contains(&0) {
                    push(format!("{p}.vector"), "vector entries must be ≥ 1 and the vector non-empty".into());
                }
            }
            for (j, r) in c.registry.iter().flatten().enumerate() {
                refer(format!("{p}.registry[{j}]"), r, &mut push);
            }
        }
        for (i, c) in self.chains.iter().enumerate() {
            let p = format!("chains[{i}]");
            refer(format!("{p}.system"), &c.system, &mut push);
            positive(p.clone(), "length_bound", c.length_bound, &mut push);
            positive(p.clone(), "m_bound", c.m_bound, &mut push);
            if !parse_q(&c.eps).is_some_and(|e| e > 0.into()) {
                push(format!("{p}.eps"), format!("eps must be a positive rational, got \"{}\"", c.eps));
            }
            if c.deltas.is_empty() {
                push(format!("{p}.deltas"), "at least one delta candidate is required".into());
            }
            for (j, d) in c.deltas.iter().enumerate() {
                if !parse_q(d).is_some_and(|e| e > 0.into()) {
                    push(format!("{p}.deltas[{j}]"), format!("delta must be a positive rational, got \"{d}\""));
                }
            }
        }
        for (i, g) in self.gallery.iter().enumerate() {
            let p = format!("gallery[{i}]");
            if g.id.parse::<ExampleId>().is_err() {
                push(format!("{p}.id"), format!("unknown example \"{}\"", g.id));
            }
            for (field, v) in [
                ("horizon", g.horizon),
                ("resolution", g.resolution.map(|x| x as u64)),
                ("run_request", g.run_request),
                ("gap_bound", g.gap_bound),
            ] {
                if let Some(v) = v {
                    positive(p.clone(), field, v, &mut push);
                }
            }
            if g.n.is_some_and(|n| n < 2) {
                push(format!("{p}.n"), "n must be ≥ 2".into());
            }
            if let Some(a) = &g.alpha {
                if parse_q(a).is_none() {
                    push(format!("{p}.alpha"), format!("alpha must be a rational, got \"{a}\""));
                }
            }
        }
        for (i, s) in self.suites.iter().enumerate() {
            let p = format!("suites[{i}]");
            if s.id.parse::<TheoremId>().is_err() {
                push(format!("{p}.id"), format!("unknown theorem suite \"{}\"", s.id));
            }
            for (j, r) in s.registry.iter().flatten().enumerate() {
                refer(format!("{p}.registry[{j}]"), r, &mut push);
            }
            for (k, &v) in &s.bounds {
                if !SUITE_BOUND_FIELDS.contains(&k.as_str()) {
                    push(format!("{p}.bounds.{k}"), format!("unknown suite bound \"{k}\""));
                } else if v == 0 {
                    push(format!("{p}.bounds.{k}"), format!("{k} must be ≥ 1"));
                }
            }
        }
        for (i, s) in self.searches.iter().enumerate() {
            let p = format!("searches[{i}]");
            if s.question.parse::<Question>().is_err() {
                push(format!("{p}.question"), format!("unknown question \"{}\"", s.question));
            }
            positive(p.clone(), "budget", s.budget as u64, &mut push);
            positive(p.clone(), "horizon", s.horizon, &mut push);
            positive(p.clone(), "resolution", s.resolution as u64, &mut push);
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }
}

pub const SUITE_BOUND_FIELDS: [&str; 11] = [
    "horizon",
    "resolution",
    "m_bound",
    "n_max",
    "max_len",
    "max_entry",
    "k_max",
    "order_max",
    "run_request",
    "n_bound",
    "chain_length",
];
