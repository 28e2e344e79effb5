use ndslab_cli::config::{emit_config, parse_config, Syntax};

const DEMO: &str = include_str!("../../../configs/demo.toml");

#[test]
fn demo_config_is_valid() {
    let c = parse_config(DEMO, Syntax::Toml).unwrap();
    assert_eq!(c.systems.len(), 4);
    assert_eq!(c.build_systems().unwrap().len(), 4);
}

#[test]
fn minimal_config_is_valid() {
    let text = r#"
[[systems]]
name = "s"
space = { kind = "circle" }
sequence = { kind = "constant", map = "rot(1/3)" }

[[checks]]
system = "s"
notion = "transitive"
horizon = 8
resolution = 1
"#;
    parse_config(text, Syntax::Toml).unwrap();
}

#[test]
fn undefined_system_is_named() {
    let text = r#"
[[checks]]
system = "foo"
notion = "transitive"
horizon = 8
resolution = 1
"#;
    let err = parse_config(text, Syntax::Toml).unwrap_err().to_string();
    assert!(err.contains("checks[0].system"), "{err}");
    assert!(err.contains("\"foo\""), "{err}");
}

#[test]
fn undefined_derive_source_is_named() {
    let text = r#"
[[systems]]
name = "p"
derive = { kind = "iterate", of = "foo", k = 2 }
"#;
    let err = parse_config(text, Syntax::Toml).unwrap_err().to_string();
    assert!(err.contains("systems[0].derive.of") && err.contains("foo"), "{err}");
}

#[test]
fn zero_horizon_is_rejected() {
    let text = r#"
[[systems]]
name = "s"
space = { kind = "shift", alphabet = 2 }
sequence = { kind = "constant", map = "shift" }

[[checks]]
system = "s"
notion = "transitive"
horizon = 0
resolution = 1
"#;
    let err = parse_config(text, Syntax::Toml).unwrap_err().to_string();
    assert!(err.contains("checks[0].horizon: horizon must be ≥ 1"), "{err}");
}

#[test]
fn all_errors_are_reported() {
    let text = r#"
[[checks]]
system = "a"
notion = "sticky"
horizon = 0
resolution = 0

[[gallery]]
id = "nope"
"#;
    let err = parse_config(text, Syntax::Toml).unwrap_err();
    assert!(err.0.len() >= 5, "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(parse_config("[output]\nformat = \"json\"\ncolour = 1\n", Syntax::Toml).is_err());
}

#[test]
fn round_trip_toml_and_json() {
    let c = parse_config(DEMO, Syntax::Toml).unwrap();
    for syntax in [Syntax::Toml, Syntax::Json] {
        let text = emit_config(&c, syntax);
        assert_eq!(parse_config(&text, syntax).unwrap(), c, "{text}");
    }
    let json = emit_config(&c, Syntax::Json);
    assert_eq!(parse_config(&emit_config(&parse_config(&json, Syntax::Json).unwrap(), Syntax::Toml), Syntax::Toml).unwrap(), c);
}
