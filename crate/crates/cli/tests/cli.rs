use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use jsonschema::{Registry, Validator};
use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_chansteer");
const SCHEMAS: [&str; 6] = ["operator", "channel", "extension", "assemblage", "verdict", "result"];

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn doc(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    check_schema("result", &v);
    v
}

/// Runs, demands exit 0, and returns `result`, read from `--output` when given.
fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let mut d = match args.iter().position(|a| *a == "--output") {
        Some(i) => {
            assert!(out.stdout.is_empty(), "document goes to the file only");
            let d: Value = serde_json::from_str(&fs::read_to_string(args[i + 1]).unwrap()).unwrap();
            check_schema("result", &d);
            d
        }
        None => doc(&out),
    };
    assert_eq!(d["status"], "ok");
    d["result"].take()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/v1")
}

fn validators() -> &'static Vec<(&'static str, Validator)> {
    static CELL: OnceLock<Vec<(&'static str, Validator)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let docs: Vec<(&str, Value)> = SCHEMAS
            .iter()
            .map(|name| {
                let text = fs::read_to_string(schema_dir().join(format!("{name}.json"))).unwrap();
                (*name, serde_json::from_str(&text).unwrap())
            })
            .collect();
        let mut registry = Registry::new();
        for (name, d) in &docs {
            registry = registry.add(format!("urn:chansteer:schema:v1:{name}"), d.clone()).unwrap();
        }
        let registry = registry.prepare().unwrap();
        docs.iter()
            .map(|(name, d)| (*name, jsonschema::options().with_registry(&registry).build(d).unwrap()))
            .collect()
    })
}

fn check_schema(name: &str, v: &Value) {
    let (_, validator) = validators().iter().find(|(n, _)| *n == name).expect("known schema");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).take(5).collect();
    assert!(errors.is_empty(), "{name} schema rejects document: {errors:?}");
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identical_flags_give_identical_bytes() {
    for args in [
        &["--seed", "11", "random", "extension"][..],
        &["--seed", "3", "demo", "pointer"][..],
        &["demo", "dephasing-dilation"][..],
        &["sweep", "--param", "visibility", "--range", "0:1:4"][..],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?} is not reproducible");
    }
    assert_ne!(run(&["--seed", "1", "random", "channel"]).stdout, run(&["--seed", "2", "random", "channel"]).stdout);
}

#[test]
fn pointer_demo_is_unsteerable() {
    for seed in ["0", "5"] {
        let r = ok(&["--seed", seed, "demo", "pointer"]);
        assert_eq!(r["steerable"], false);
        assert!(r["robustness"].as_f64().unwrap().abs() < 1e-7, "{}", r["robustness"]);
        check_schema("verdict", &r["feasibility"]);
        check_schema("verdict", &r["robustness_verdict"]);
    }
}

#[test]
fn dephasing_dilation_demo_reports_robustness_and_weight() {
    let r = ok(&["demo", "dephasing-dilation"]);
    let sr = r["robustness"].as_f64().unwrap();
    assert!((sr - (3.0 - 2.0 * std::f64::consts::SQRT_2)).abs() < 1e-6, "{sr}");
    assert!(r["weight"].as_f64().unwrap() > 0.0);
    let w = &r["witness_check"];
    assert!(w["gap"].as_f64().unwrap() > 1e-6);
    assert!((w["value_recomputed"].as_f64().unwrap() - (1.0 + sr)).abs() < 1e-6);
    check_schema("verdict", &r["robustness_verdict"]);
    check_schema("verdict", &r["weight_verdict"]);
}

#[test]
fn fixed_output_demo_separates_product_probes_from_choi_test() {
    let r = ok(&["demo", "fixed-output"]);
    assert!(r["complementary_identity_deviation"].as_f64().unwrap() < 1e-10);
    assert!(r["bob_fixed_output_deviation"].as_f64().unwrap() < 1e-10);
    assert!(r["max_product_output_defect"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["ppt"]["coherent_certified"], true);
    assert_eq!(r["ancilla_tomography"]["steerable"], true);
    assert!(r["product_tomography"]["deviation_from_ancilla"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["orthogonal_probes"]["outcome"]["rejected"], true);
    assert_eq!(r["orthogonal_probes"]["probe_rank"], 2);
}

#[test]
fn extremal_kraus_demo_contrasts_pointer_and_dilation() {
    let r = ok(&["demo", "extremal-kraus"]);
    assert_eq!(r["extremal"], true);
    assert_eq!(r["kraus_pointer"]["ppt"]["ppt"], true);
    assert_eq!(r["kraus_pointer"]["steerable"], false);
    assert_eq!(r["coherent_dilation"]["ppt"]["ppt"], false);
    assert_eq!(r["coherent_dilation"]["steerable"], true);
    check_schema("channel", &r["kraus"]);
}

#[test]
fn conversions_round_trip() {
    let dir = TempDir::new().unwrap();
    let reprs = ["choi", "kraus", "stinespring"];
    for seed in ["1", "2", "3"] {
        let src = dir.path().join(format!("choi_{seed}.json"));
        let out = run(&["--seed", seed, "random", "channel", "--kraus", "3", "--output", path_str(&src)]);
        assert_eq!(out.status.code(), Some(0));
        let mut files = vec![("choi", src.clone())];
        for to in ["kraus", "stinespring"] {
            let p = dir.path().join(format!("{to}_{seed}.json"));
            ok(&["convert", "--from", "choi", "--to", to, "--input", path_str(&src), "--output", path_str(&p)]);
            files.push((to, p));
        }
        for (from, file) in &files {
            for to in reprs {
                let r = ok(&["convert", "--from", from, "--to", to, "--input", path_str(file)]);
                let drift = r["drift"].as_f64().unwrap();
                assert!(drift <= 1e-8, "{from} -> {to}: drift {drift}");
                check_schema("channel", &r["object"]);
            }
        }
    }
}

#[test]
fn file_pipeline_agrees_across_verbs() {
    let dir = TempDir::new().unwrap();
    let p = |n: &str| dir.path().join(n);
    let (e, m, a) = (p("e.json"), p("m.json"), p("a.json"));
    assert_eq!(run(&["--seed", "4", "random", "extension", "--output", path_str(&e)]).status.code(), Some(0));
    assert_eq!(run(&["--seed", "5", "random", "povms", "--output", path_str(&m)]).status.code(), Some(0));
    let (es, ms, asm) = (path_str(&e), path_str(&m), path_str(&a));

    let ext: Value = serde_json::from_str(&fs::read_to_string(&e).unwrap()).unwrap();
    check_schema("extension", &ext["result"]["object"]);
    let povms: Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    check_schema("assemblage", &povms["result"]["object"]);

    let r = ok(&["assemblage", "--extension", es, "--povms", ms, "--output", asm]);
    check_schema("assemblage", &r["object"]);

    let cert = ok(&["certify", "--assemblage", asm, "--channel-form"]);
    check_schema("verdict", &cert);
    let sr = ok(&["robustness", "--assemblage", asm, "--channel-form"]);
    check_schema("verdict", &sr);
    let sw = ok(&["weight", "--assemblage", asm, "--channel-form"]);
    check_schema("verdict", &sw);
    assert_eq!(cert["steerable"], sr["steerable"]);
    let sr = sr["value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&sw["value"].as_f64().unwrap()));

    let q = ok(&["extension-quantifier", "--extension", es, "--povms", ms, "--mode", "choi"]);
    assert!((q["value"].as_f64().unwrap() - sr).abs() < 1e-7);
    let q = ok(&["extension-quantifier", "--extension", es, "--povms", ms, "--mode", "search"]);
    assert!(q["value"].as_f64().unwrap() >= sr - 1e-7);

    let t1 = ok(&["verify-theorem1", "--extension", es, "--povms", ms]);
    assert!((t1["robustness_via_state"].as_f64().unwrap() - sr).abs() < 1e-6);
    check_schema("verdict", &t1["via_channels"]);
    check_schema("verdict", &t1["via_state"]);

    let c = ok(&["complementary", "--extension", es, "--eb-check"]);
    check_schema("channel", &c["object"]);
    assert!(c["eb_status"].is_string());

    for mode in ["ancilla", "products"] {
        let t = ok(&["tomography", "--mode", mode, "--extension", es, "--povms", ms]);
        assert!(t["deviation_from_direct"].as_f64().unwrap() < 1e-8, "{mode}");
        check_schema("assemblage", &t["object"]);
    }
}

#[test]
fn bare_objects_are_accepted() {
    let dir = TempDir::new().unwrap();
    let r = ok(&["--seed", "9", "random", "incoherent", "--members", "3"]);
    let bare = dir.path().join("bare.json");
    fs::write(&bare, serde_json::to_string(&r["object"]).unwrap()).unwrap();
    let wrong = run(&["certify", "--assemblage", path_str(&bare), "--channel-form"]);
    assert_eq!(wrong.status.code(), Some(2), "an extension is not a channel assemblage");
    assert_eq!(doc(&wrong)["error"]["kind"], "validation");
    let t1 = ok(&["verify-theorem1", "--extension", path_str(&bare)]);
    assert_eq!(t1["via_channels"]["steerable"], false);
}

#[test]
fn sweep_writes_fixed_csv_columns() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let r = ok(&["sweep", "--param", "gamma", "--range", "0:1:5", "--measure", "weight", "--csv", path_str(&csv_path)]);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,value,status,gap,iterations"));
    let params: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(params, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    for usage in [
        &["frobnicate"][..],
        &["demo", "nonexistent"][..],
        &["sweep", "--param", "gamma", "--range", "0:1"][..],
        &["--tol", "0", "demo", "pointer"][..],
    ] {
        let out = run(usage);
        assert_eq!(out.status.code(), Some(1), "{usage:?}");
        assert_eq!(doc(&out)["error"]["kind"], "usage");
    }

    let missing = run(&["robustness", "--assemblage", path_str(&dir.path().join("none.json"))]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(doc(&missing)["error"]["kind"], "io");

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    let out = run(&["robustness", "--assemblage", path_str(&garbage)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc(&out)["error"]["kind"], "parse");

    let not_tp = dir.path().join("not_tp.json");
    let choi = json!({ "rows": 4, "cols": 4, "data": (0..16).map(|i| if i == 0 { [1.0, 0.0] } else { [0.0, 0.0] }).collect::<Vec<_>>() });
    fs::write(&not_tp, json!({ "choi": choi, "d_in": 2, "d_out": [2] }).to_string()).unwrap();
    let out = run(&["convert", "--from", "choi", "--to", "kraus", "--input", path_str(&not_tp)]);
    assert_eq!(out.status.code(), Some(2));
    let d = doc(&out);
    assert_eq!(d["error"]["kind"], "validation");
    assert!(d["error"]["invariant"].is_string());

    let e = dir.path().join("e.json");
    ok(&["random", "extension", "--output", path_str(&e)]);
    let out = run(&["tomography", "--mode", "products", "--probes", "orthogonal", "--extension", path_str(&e)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc(&out)["error"]["invariant"], "informationally complete probes");
}

#[test]
fn tolerance_flag_is_accepted() {
    let r = ok(&["--tol", "1e-8", "demo", "dephasing-dilation"]);
    assert!((r["robustness"].as_f64().unwrap() - (3.0 - 2.0 * std::f64::consts::SQRT_2)).abs() < 1e-6);
}
