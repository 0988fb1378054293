use cocart::dsl::json_schema;

const SHIPPED: &str = include_str!("../../../schema/workspace.schema.json");

#[test]
fn shipped_schema_is_current() {
    if std::env::var_os("COCART_BLESS").is_some() {
        std::fs::write(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/workspace.schema.json"), json_schema()).unwrap();
        return;
    }
    assert_eq!(SHIPPED, json_schema(), "rerun with COCART_BLESS=1 to regenerate");
}

#[test]
fn schema_describes_every_block() {
    let v: serde_json::Value = serde_json::from_str(SHIPPED).unwrap();
    let props = v["properties"].as_object().unwrap();
    for k in ["categories", "presentations", "functors", "fibrations", "suites"] {
        assert!(props.contains_key(k), "{k}");
    }
}

const SHIPPED_REPORT: &str = include_str!("../../../schema/suite-report.schema.json");

#[test]
fn shipped_report_schema_is_current() {
    let now = cocart::suites::report_schema();
    if std::env::var_os("COCART_BLESS").is_some() {
        std::fs::write(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/suite-report.schema.json"), now).unwrap();
        return;
    }
    assert_eq!(SHIPPED_REPORT, now, "rerun with COCART_BLESS=1 to regenerate");
}

#[test]
fn reports_validate_against_their_shape() {
    let r = cocart::suites::run_suite("descent-glue", &Default::default()).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&r.to_json()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(SHIPPED_REPORT).unwrap();
    for k in schema["required"].as_array().unwrap() {
        assert!(v.get(k.as_str().unwrap()).is_some(), "{k}");
    }
}
