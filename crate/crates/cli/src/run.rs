//! Executes a validated configuration and renders the report.

use std::collections::BTreeMap;
use std::time::Instant;

use ndslab::chain::{verify_chain_theorems, ChainBounds};
use ndslab::gallery::{
    finite_registry, registry, run_example, search_counterexample, toy_family, verify_theorem, ExampleId,
    ExampleParams, Question, SuiteBounds, TheoremId,
};
use ndslab::rational::parse_q;
use ndslab::{check, CheckSpec, Error, Notion, System};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ConfigErrors, Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line overrides applied to every item.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemStatus {
    Completed,
    ResourceLimit,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemReport {
    pub kind: &'static str,
    pub label: String,
    pub status: ItemStatus,
    /// One-word summary of the result (verdict status, consistency, ...).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_digest: String,
    pub overrides: Overrides,
    pub items: Vec<ItemReport>,
    pub wall_ms: u64,
}

impl Report {
    pub fn all_completed(&self) -> bool {
        self.items.iter().all(|i| i.status != ItemStatus::Error)
    }
}

enum Item {
    Check { system: System, spec: CheckSpec, registry: Vec<System> },
    Chain { system: System, eps: ndslab::Q, deltas: Vec<ndslab::Q>, bounds: ChainBounds },
    Example { id: ExampleId, params: ExampleParams },
    Suite { id: TheoremId, registry: Vec<System>, bounds: SuiteBounds },
    Search { question: Question, budget: usize, horizon: u64, resolution: usize },
}

impl Item {
    fn kind(&self) -> &'static str {
        match self {
            Item::Check { .. } => "check",
            Item::Chain { .. } => "chain",
            Item::Example { .. } => "gallery",
            Item::Suite { .. } => "suite",
            Item::Search { .. } => "search",
        }
    }

    fn label(&self) -> String {
        match self {
            Item::Check { system, spec, .. } => format!("{} on {}", spec.notion.name(), system.label()),
            Item::Chain { system, .. } => format!("chain theorems on {}", system.label()),
            Item::Example { id, .. } => id.name().to_string(),
            Item::Suite { id, .. } => id.name().to_string(),
            Item::Search { question, .. } => format!("{question:?}"),
        }
    }

    fn execute(&self) -> ndslab::Result<(String, Value)> {
        Ok(match self {
            Item::Check { system, spec, registry } => {
                let v = check(system, spec, registry)?;
                (v.status.to_string(), value(&v))
            }
            Item::Chain { system, eps, deltas, bounds } => {
                let r = verify_chain_theorems(system, *eps, deltas, *bounds)?;
                let outcome = if r.flagged() { "flagged" } else { "consistent" };
                (outcome.into(), value(&r))
            }
            Item::Example { id, params } => {
                let r = run_example(*id, params)?;
                let outcome = if r.all_match() { "matches-expected" } else { "differs-from-expected" };
                (outcome.into(), value(&r))
            }
            Item::Suite { id, registry, bounds } => {
                let r = verify_theorem(*id, registry, bounds)?;
                let outcome = if r.flagged().is_empty() { "consistent" } else { "flagged" };
                (outcome.into(), value(&r))
            }
            Item::Search { question, budget, horizon, resolution } => {
                let family = toy_family(*budget);
                let r = search_counterexample(*question, &family, *budget, *horizon, *resolution)?;
                let outcome = if r.candidates.is_empty() { "no-candidates" } else { "candidates" };
                (outcome.into(), value(&r))
            }
        })
    }
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn suite_bounds(overrides: &BTreeMap<String, u64>, global: Overrides) -> SuiteBounds {
    let mut b = SuiteBounds::default();
    for (k, &v) in overrides {
        match k.as_str() {
            "horizon" => b.horizon = v,
            "resolution" => b.resolution = v as usize,
            "m_bound" => b.m_bound = v,
            "n_max" => b.n_max = v,
            "max_len" => b.max_len = v as usize,
            "max_entry" => b.max_entry = v,
            "k_max" => b.k_max = v,
            "order_max" => b.order_max = v as usize,
            "run_request" => b.run_request = v,
            "n_bound" => b.n_bound = v,
            "chain_length" => b.chain_length = v,
            _ => {}
        }
    }
    if let Some(h) = global.horizon {
        b.horizon = h;
    }
    if let Some(r) = global.resolution {
        b.resolution = r;
    }
    b
}

fn plan(config: &RunConfig, o: Overrides) -> Result<Vec<Item>, ConfigErrors> {
    let systems = config.build_systems()?;
    let get = |n: &String| systems[n].clone();
    let mut items = Vec::new();
    for c in &config.checks {
        let notion: Notion = c.notion.parse().expect("validated notion");
        let mut spec = CheckSpec::new(notion, o.resolution.unwrap_or(c.resolution), o.horizon.unwrap_or(c.horizon));
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = c.$f.clone() { spec.$f = v.into(); } )* };
        }
        set!(order, m_bound, n_bound, max_len, max_entry, gap_bound, run_request);
        if let Some(v) = &c.vector {
            spec.vector = v.clone();
        }
        if let Some(s) = &c.subset {
            spec.subset = Some(s.clone());
        }
        if let Some(cap) = c.tuple_cap {
            spec.tuple_cap = cap as u128;
        }
        let registry = c.registry.iter().flatten().map(get).collect();
        items.push(Item::Check { system: get(&c.system), spec, registry });
    }
    for c in &config.chains {
        items.push(Item::Chain {
            system: get(&c.system),
            eps: parse_q(&c.eps).expect("validated eps"),
            deltas: c.deltas.iter().map(|d| parse_q(d).expect("validated delta")).collect(),
            bounds: ChainBounds { length_bound: o.horizon.unwrap_or(c.length_bound), m_bound: c.m_bound },
        });
    }
    for g in &config.gallery {
        let id: ExampleId = g.id.parse().expect("validated example id");
        let d = ExampleParams::defaults(id);
        let params = ExampleParams {
            horizon: o.horizon.or(g.horizon).unwrap_or(d.horizon),
            resolution: o.resolution.or(g.resolution).unwrap_or(d.resolution),
            n: g.n.unwrap_or(d.n),
            alpha: g.alpha.as_deref().and_then(parse_q).unwrap_or(d.alpha),
            run_request: g.run_request.unwrap_or(d.run_request),
            gap_bound: g.gap_bound.or(d.gap_bound),
        };
        items.push(Item::Example { id, params });
    }
    for s in &config.suites {
        let id: TheoremId = s.id.parse().expect("validated suite id");
        let registry = match &s.registry {
            Some(names) => names.iter().map(get).collect(),
            None if id == TheoremId::ChainDeltaMixing => finite_registry(),
            None => registry(),
        };
        items.push(Item::Suite { id, registry, bounds: suite_bounds(&s.bounds, o) });
    }
    for s in &config.searches {
        items.push(Item::Search {
            question: s.question.parse().expect("validated question"),
            budget: s.budget,
            horizon: o.horizon.unwrap_or(s.horizon),
            resolution: o.resolution.unwrap_or(s.resolution),
        });
    }
    Ok(items)
}

/// SHA-256 over the canonical JSON of the configuration and overrides.
pub fn config_digest(config: &RunConfig, overrides: Overrides) -> String {
    let canonical = serde_json::to_string(&json!({ "config": config, "overrides": overrides })).expect("serializable");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every item in configuration order on a pool of `jobs` threads.
/// Item failures are recorded in the report and never stop other items.
pub fn run(config: &RunConfig, overrides: Overrides, jobs: usize) -> Result<Report, ConfigErrors> {
    config.validate()?;
    if overrides.horizon == Some(0) || overrides.resolution == Some(0) {
        return Err(ConfigErrors(vec![crate::config::ConfigError {
            path: "overrides".into(),
            message: "horizon and resolution overrides must be ≥ 1".into(),
        }]));
    }
    let items = plan(config, overrides)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    let reports = pool.install(|| items.par_iter().map(execute).collect());
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        config_digest: config_digest(config, overrides),
        overrides,
        items: reports,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

fn execute(item: &Item) -> ItemReport {
    let t = Instant::now();
    let r = item.execute();
    let wall_ms = t.elapsed().as_millis() as u64;
    let (status, outcome, error, result) = match r {
        Ok((outcome, value)) => (ItemStatus::Completed, Some(outcome), None, Some(value)),
        Err(e @ Error::ResourceLimit { .. }) => (ItemStatus::ResourceLimit, None, Some(e.to_string()), None),
        Err(e) => (ItemStatus::Error, None, Some(e.to_string()), None),
    };
    ItemReport { kind: item.kind(), label: item.label(), status, outcome, error, result, wall_ms }
}

/// Canonical JSON: sorted keys, two-space indentation, trailing newline.
pub fn emit_json(report: &Report) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

/// Removes every `wall_ms` field, for comparing reports across runs.
pub fn strip_timing(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.remove("wall_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.replace('|', "\\|"),
        Value::Null => String::new(),
        other => other.to_string().replace('|', "\\|"),
    }
}

fn table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    out.push_str(&format!("| {} |\n", header.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out.push('\n');
}

fn certificate_kind(verdict: &Value) -> String {
    verdict.pointer("/certificate/kind").map(cell).unwrap_or_default()
}

pub fn emit_markdown(report: &Report) -> String {
    let mut out = String::from("# ndslab report\n\n");
    out.push_str(&format!(
        "- schema version: {}\n- tool version: {}\n- config digest: `{}`\n- items: {}\n- wall time: {} ms\n\n",
        report.schema_version,
        report.tool_version,
        report.config_digest,
        report.items.len(),
        report.wall_ms
    ));
    for (i, item) in report.items.iter().enumerate() {
        out.push_str(&format!("## {}. {} `{}`\n\n", i + 1, item.kind, item.label));
        let status = serde_json::to_value(item.status).map(|v| cell(&v)).unwrap_or_default();
        out.push_str(&format!("status: {status}, {} ms", item.wall_ms));
        if let Some(o) = &item.outcome {
            out.push_str(&format!(", outcome: {o}"));
        }
        out.push_str("\n\n");
        if let Some(e) = &item.error {
            out.push_str(&format!("> {e}\n\n"));
        }
        let Some(r) = &item.result else { continue };
        match item.kind {
            "check" => table(
                &mut out,
                &["system", "notion", "status", "parameters", "certificate"],
                [vec![
                    cell(&r["system"]),
                    cell(&r["notion"]),
                    cell(&r["status"]),
                    r["parameters"]
                        .as_object()
                        .map(|m| m.iter().map(|(k, v)| format!("{k}={}", cell(v))).collect::<Vec<_>>().join(", "))
                        .unwrap_or_default(),
                    certificate_kind(r),
                ]],
            ),
            "gallery" => {
                out.push_str(&format!("claim: {}\n\n", cell(&r["claim"])));
                let rows = r["rows"].as_array().cloned().unwrap_or_default();
                table(
                    &mut out,
                    &["system", "notion", "resolution", "expected", "observed", "match", "certificate"],
                    rows.iter().map(|x| {
                        vec![
                            cell(&x["system"]),
                            cell(&x["notion"]),
                            cell(&x["verdict"]["parameters"]["resolution"]),
                            cell(&x["expected"]),
                            cell(&x["observed"]),
                            cell(&x["matches"]),
                            certificate_kind(&x["verdict"]),
                        ]
                    }),
                );
                let ids = r["identities"].as_array().cloned().unwrap_or_default();
                for id in ids {
                    let mark = if id["passed"] == Value::Bool(true) { "ok" } else { "FAILED" };
                    out.push_str(&format!("- identity {mark}: {}\n", cell(&id["description"])));
                }
                out.push('\n');
            }
            "suite" => {
                out.push_str(&format!("statement: {}\n\n", cell(&r["statement"])));
                let rows = r["rows"].as_array().cloned().unwrap_or_default();
                table(
                    &mut out,
                    &["system", "case", "left", "right", "outcome"],
                    rows.iter().map(|x| {
                        vec![
                            cell(&x["system"]),
                            cell(&x["case"]),
                            format!("{}: {}", cell(&x["left"]["label"]), cell(&x["left"]["status"])),
                            format!("{}: {}", cell(&x["right"]["label"]), cell(&x["right"]["status"])),
                            cell(&x["outcome"]),
                        ]
                    }),
                );
            }
            "chain" => {
                let rows = r["rows"].as_array().cloned().unwrap_or_default();
                table(
                    &mut out,
                    &["implication", "hypotheses hold", "conclusion", "outcome"],
                    rows.iter().map(|x| {
                        vec![cell(&x["implication"]), cell(&x["hypotheses_hold"]), cell(&x["conclusion"]), cell(&x["outcome"])]
                    }),
                );
            }
            "search" => {
                out.push_str(&format!(
                    "{} => {}: evaluated {} of budget {}\n\n",
                    cell(&r["hypothesis"]),
                    cell(&r["conclusion"]),
                    cell(&r["evaluated"]),
                    cell(&r["budget"])
                ));
                for c in r["candidates"].as_array().cloned().unwrap_or_default() {
                    out.push_str(&format!("- CANDIDATE {}\n", cell(&c["system"])));
                }
                out.push_str(&format!("\n{}\n\n", cell(&r["note"])));
            }
            _ => {}
        }
    }
    out
}

pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => emit_json(report),
        Format::Markdown => emit_markdown(report),
    }
}
