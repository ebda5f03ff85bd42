use serde_json::Value;
use std::io::Write;
use std::process::{Command, Stdio};

fn whittaker(args: &[&str], stdin: &str) -> (i32, Value, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_whittaker"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let json_start = text.find(['{', '[']).unwrap_or(0);
    let value = serde_json::from_str(&text[json_start..]).unwrap_or(Value::Null);
    (out.status.code().unwrap(), value, text)
}

const KADZIELA_TREE: &str = r#"{"field": "5", "points": ["0", "25", "1", "39", "1/5", "inf"]}"#;

#[test]
fn example_list_has_named_curves_and_all_genus3_shapes() {
    let (code, v, _) = whittaker(&["example", "--list"], "");
    assert_eq!(code, 0);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert!(names.len() >= 14);
    for n in ["x0_37", "x0_39", "kadziela", "q3_rosenhain_c"] {
        assert!(names.contains(&n));
    }
    assert_eq!(names.iter().filter(|n| n.starts_with("g3c")).count(), 10);
}

#[test]
fn unknown_example_is_a_domain_error() {
    let (code, v, _) = whittaker(&["example", "x0_11"], "");
    assert_eq!(code, 2);
    assert_eq!(v["error"]["code"], "domain");
}

#[test]
fn malformed_json_reports_line_and_column() {
    let (code, v, _) = whittaker(&["cluster"], "{\n  \"field\": \"5\",\n  \"points\": [0, 1]\n}");
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "invalid-json");
    assert_eq!(v["error"]["line"], 3);
    assert_eq!(v["error"]["column"], 14);
}

#[test]
fn unknown_keys_are_rejected() {
    let (code, v, _) = whittaker(&["cluster"], r#"{"field": "5", "pionts": []}"#);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "invalid-json");
}

#[test]
fn the_field_must_be_named() {
    let (code, v, _) = whittaker(&["cluster"], r#"{"points": ["0", "1", "5"]}"#);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "usage");
    let (code, _, _) = whittaker(&["cluster", "--field", "5"], r#"{"points": ["0", "1", "5"]}"#);
    assert_eq!(code, 0);
}

#[test]
fn colliding_points_are_a_precision_failure() {
    let (code, v, _) = whittaker(&["cluster"], r#"{"field": "5", "points": ["0", "5 + O(p^2)", "5 + 25", "1"]}"#);
    assert_eq!(code, 3, "{v}");
    assert_eq!(v["error"]["code"], "precision");
}

#[test]
fn cluster_of_the_normalized_kadziela_points() {
    let (code, v, _) = whittaker(&["cluster"], KADZIELA_TREE);
    assert_eq!(code, 0);
    assert_eq!(v["tree"]["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(v["genus"], 2);
    assert_eq!(v["canonical_pairing"], serde_json::json!([[0, 1], [2, 3], [4, 5]]));
}

#[test]
fn config_check_finds_case_b() {
    let (code, v, _) = whittaker(&["config-check"], KADZIELA_TREE);
    assert_eq!(code, 0);
    assert_eq!(v["configuration"]["catalog_name"], "g2b");
    // b1 = 39 is -1 mod 5: branch points need not be restricted
    assert_eq!(v["restricted"], false);
    assert_eq!(v["betti"], 2);
}

#[test]
fn pretty_output_draws_the_tree_with_parities_and_marks() {
    let (code, _, text) = whittaker(&["config-check", "--pretty"], KADZIELA_TREE);
    assert_eq!(code, 0);
    let drawing = &text[..text.find('{').unwrap()];
    assert_eq!(drawing.lines().filter(|l| l.contains("type c")).count(), 3);
    assert!(drawing.contains("(even, size 2)"));
    assert!(drawing.contains("[a0 b0]"));
}

#[test]
fn bad_position_tuple_has_the_short_relation() {
    let job = r#"{"field": "5", "points": ["0", "5", "1", "-1", "1/5", "inf"], "max_len": 3}"#;
    let (code, v, _) = whittaker(&["good-position"], job);
    assert_eq!(code, 0);
    assert_eq!(v["disk_conditions_hold"], false);
    let rels = v["relations"].as_array().unwrap();
    assert!(rels.contains(&serde_json::json!(["0", "121"])), "{rels:?}");
}

#[test]
fn fb_inverse_reproduces_the_kadziela_sheets() {
    let job = r#"{"command": "fb-inverse", "field": "5", "chart": "g2b", "coords": ["25", "39", "1/5"], "target": 4}"#;
    let (code, v, _) = whittaker(&["run"], job);
    assert_eq!(code, 0);
    let digits: Vec<Vec<(String, String)>> = v["sheets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            s["fix"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| (c["valuation"].as_str().unwrap().to_string(), c["leading_residue"].as_str().unwrap().to_string()))
                .collect()
        })
        .collect();
    let sheet = |r: [&str; 3]| vec![("2".into(), r[0].into()), ("0".into(), r[1].into()), ("-1".into(), r[2].into())];
    assert_eq!(digits.len(), 2);
    assert!(digits.contains(&sheet(["1", "2", "3"])));
    assert!(digits.contains(&sheet(["2", "3", "1"])));
}

#[test]
fn run_rejects_a_mismatched_command() {
    let (code, v, _) = whittaker(&["cluster"], r#"{"command": "fb", "field": "5"}"#);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "usage");
}

#[test]
fn identical_jobs_give_identical_bytes() {
    let job = r#"{"field": "5", "chart": "g2a", "coords": ["5", "25", "5"], "length": 4}"#;
    let (_, _, first) = whittaker(&["equation"], job);
    let (_, _, second) = whittaker(&["equation"], job);
    assert_eq!(first, second);
    assert!(first.contains("c_is_square"));
}

#[test]
fn example_output_matches_the_stored_report() {
    let (code, _, text) = whittaker(&["example", "kadziela"], "");
    assert_eq!(code, 0);
    let stored = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kadziela.json")).unwrap();
    assert_eq!(text, stored);
}

#[test]
fn x0_37_example_reports_the_reduction() {
    let (code, v, _) = whittaker(&["example", "x0_37"], "");
    assert_eq!(code, 0);
    assert_eq!(v["reduction"]["factorization"], "(x-1)^2(x^2+8x+1)^2");
    assert_eq!(v["configuration"], "g2a");
}

#[test]
fn theta_values_outside_the_domain_are_uncertified() {
    let job = r#"{"field": "5", "points": ["0", "25", "1", "39", "1/5", "inf"], "a": "2", "b": "3", "z": ["5", "7", "1/25"], "length": 4}"#;
    let (code, v, _) = whittaker(&["theta"], job);
    assert_eq!(code, 0);
    let errors: Vec<&str> = v["values"].as_array().unwrap().iter().map(|x| x["error"].as_str().unwrap()).collect();
    assert_eq!(errors, ["uncertified", "4", "uncertified"]);
}
