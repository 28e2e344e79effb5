use ndslab_cli::config::{parse_config, RunConfig, Syntax};
use ndslab_cli::run::{emit_json, emit_markdown, run, strip_timing, ItemStatus, Overrides};
use serde_json::Value;

const DEMO: &str = include_str!("../../../configs/demo.toml");

fn demo() -> RunConfig {
    parse_config(DEMO, Syntax::Toml).unwrap()
}

fn untimed(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    strip_timing(&mut v);
    v
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let c = demo();
    let a = emit_json(&run(&c, Overrides::default(), 1).unwrap());
    let b = emit_json(&run(&c, Overrides::default(), 4).unwrap());
    assert_eq!(untimed(&a), untimed(&b));
    assert_eq!(serde_json::to_string_pretty(&untimed(&a)).unwrap(), serde_json::to_string_pretty(&untimed(&b)).unwrap());
}

#[test]
fn items_follow_config_order() {
    let r = run(&demo(), Overrides::default(), 3).unwrap();
    let kinds: Vec<&str> = r.items.iter().map(|i| i.kind).collect();
    assert_eq!(kinds, ["check", "check", "check", "chain", "gallery", "suite", "search"]);
    assert!(r.items.iter().all(|i| i.status == ItemStatus::Completed));
}

#[test]
fn json_keys_are_sorted() {
    let text = emit_json(&run(&demo(), Overrides::default(), 2).unwrap());
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    assert!(text.ends_with("}\n"));
}

#[test]
fn empty_config_yields_metadata_only() {
    let r = run(&RunConfig::default(), Overrides::default(), 1).unwrap();
    assert!(r.items.is_empty());
    let v = untimed(&emit_json(&r));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["items"], Value::Array(vec![]));
    assert_eq!(v["config_digest"].as_str().unwrap().len(), 64);
    assert!(emit_markdown(&r).contains("- items: 0"));
}

#[test]
fn digest_tracks_config_and_overrides() {
    let c = demo();
    let base = run(&RunConfig::default(), Overrides::default(), 1).unwrap().config_digest;
    let over = run(&RunConfig::default(), Overrides { horizon: Some(5), resolution: None }, 1).unwrap().config_digest;
    assert_ne!(base, over);
    let a = ndslab_cli::run::config_digest(&c, Overrides::default());
    assert_eq!(a, ndslab_cli::run::config_digest(&demo(), Overrides::default()));
    assert_ne!(a, base);
}

#[test]
fn zero_override_is_a_config_error() {
    assert!(run(&demo(), Overrides { horizon: Some(0), resolution: None }, 1).is_err());
}

#[test]
fn overrides_reach_the_checks() {
    let r = run(&demo(), Overrides { horizon: Some(12), resolution: Some(1) }, 2).unwrap();
    let p = &r.items[0].result.as_ref().unwrap()["parameters"];
    assert_eq!(p["horizon"], "12");
    assert_eq!(p["resolution"], "1");
}

#[test]
fn resource_limit_does_not_stop_siblings() {
    let text = r#"
[[systems]]
name = "shift"
space = { kind = "shift", alphabet = 2 }
sequence = { kind = "constant", map = "shift" }

[[checks]]
system = "shift"
notion = "weak-mixing"
horizon = 16
resolution = 3
order = 4
tuple_cap = 10

[[checks]]
system = "shift"
notion = "transitive"
horizon = 16
resolution = 2
"#;
    let r = run(&parse_config(text, Syntax::Toml).unwrap(), Overrides::default(), 2).unwrap();
    assert_eq!(r.items[0].status, ItemStatus::ResourceLimit);
    assert!(r.items[0].error.is_some());
    assert_eq!(r.items[1].status, ItemStatus::Completed);
    assert_eq!(r.items[1].outcome.as_deref(), Some("holds-up-to-horizon"));
    assert!(r.all_completed());
    assert!(emit_markdown(&r).contains("resource-limit"));
}

#[test]
fn whole_gallery_matches_expectations() {
    let mut c = RunConfig::default();
    for id in ndslab::gallery::ExampleId::ALL {
        c.gallery.push(ndslab_cli::config::GalleryDef {
            id: id.name().into(),
            horizon: None,
            resolution: None,
            n: None,
            alpha: None,
            run_request: None,
            gap_bound: None,
        });
    }
    let r = run(&c, Overrides::default(), 4).unwrap();
    assert_eq!(r.items.len(), 5);
    for item in &r.items {
        assert_eq!(item.outcome.as_deref(), Some("matches-expected"), "{}", item.label);
    }
}

#[test]
fn markdown_lists_every_item() {
    let md = emit_markdown(&run(&demo(), Overrides::default(), 2).unwrap());
    for n in 1..=7 {
        assert!(md.contains(&format!("## {n}. ")), "{md}");
    }
    assert!(md.contains("claim:"));
    assert!(md.contains("statement:"));
}
