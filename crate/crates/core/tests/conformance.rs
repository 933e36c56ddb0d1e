use std::fs;
use std::path::PathBuf;

use serde_json::Value;

use stipple::conformance::{suite_files, TOLERANCE};
use stipple::render::{interpolate, InterpolateOptions};
use stipple::StippleDocument;

fn suite_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../conformance")
}

fn close(got: f64, want: &Value, what: &str) {
    let want = want.as_f64().unwrap_or_else(|| panic!("{what}: not a number"));
    assert!((got - want).abs() <= TOLERANCE, "{what}: {got} vs {want}");
}

#[test]
fn committed_suite_is_current() {
    // regenerate with `stipple vectors conformance`
    for (rel, text) in suite_files().unwrap() {
        let committed = fs::read_to_string(suite_dir().join(&rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
        assert!(committed == text, "{rel} is stale");
    }
}

#[test]
fn interpolate_passes_the_vectors() {
    let suite: Value = serde_json::from_str(&fs::read_to_string(suite_dir().join("interpolation.json")).unwrap()).unwrap();
    let cases = suite["cases"].as_array().unwrap();
    assert!(cases.len() >= 20);
    let mut checked = 0;
    for case in cases {
        let name = case["name"].as_str().unwrap();
        let doc = StippleDocument::parse(case["document"].as_str().unwrap()).unwrap();
        let contrast = case["contrast"].as_f64().unwrap();
        let opts = InterpolateOptions {
            soft_birth: case["soft_birth"].as_bool().unwrap(),
        };
        for q in case["queries"].as_array().unwrap() {
            let t = q["t"].as_f64().unwrap();
            let got = interpolate(&doc, t, contrast, opts).unwrap();
            let want = q["points"].as_array().unwrap();
            assert_eq!(got.len(), want.len(), "{name} t={t}");
            for (g, w) in got.iter().zip(want) {
                let at = format!("{name} t={t} id={}", g.id);
                assert_eq!(w["id"], g.id, "{at}");
                assert_eq!(w["kind"], g.kind.tag(), "{at}");
                assert_eq!(w["color"], serde_json::json!(g.color), "{at}");
                close(g.x, &w["x"], &at);
                close(g.y, &w["y"], &at);
                close(g.darkness, &w["darkness"], &at);
                close(g.size, &w["size"], &at);
                match g.orientation {
                    Some(theta) => close(theta, &w["orientation"], &at),
                    None => assert!(w["orientation"].is_null(), "{at}"),
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 1000, "only {checked} points checked");
}

#[test]
fn reader_matches_the_manifest() {
    let dir = suite_dir().join("stpl");
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for entry in manifest["files"].as_array().unwrap() {
        let file = entry["file"].as_str().unwrap();
        let parsed = StippleDocument::parse(&fs::read_to_string(dir.join(file)).unwrap());
        if entry["valid"].as_bool().unwrap() {
            let doc = parsed.unwrap_or_else(|e| panic!("{file}: {e}"));
            assert_eq!(entry["frames"], doc.frame_count, "{file}");
            assert_eq!(entry["sites"], doc.total_sites(), "{file}");
        } else {
            let err = parsed.err().unwrap_or_else(|| panic!("{file} was accepted"));
            assert_eq!(entry["error_line"].as_u64(), err.line().map(|l| l as u64), "{file}: {err}");
        }
    }
}
