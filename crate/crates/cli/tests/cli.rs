use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pml")).args(args).output().expect("binary runs")
}

fn pml_env(args: &[&str], key: &str, value: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pml")).args(args).env(key, value).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn chain_csv_has_all_samples_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chain.csv");
    let o = pml(&["model", "chain", "--n", "1", "--point", "e1", "--dir", "last", "--format", "csv", "--out", out.to_str().unwrap(), "--assert"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 242);
    assert!(text.starts_with("t,x0,x1,x2,x3,v0,v1,v2,v3,omega\n"));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("chain.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["samples"], 241);
    assert_eq!(meta["kind"], "CHAIN");
    assert!(meta["great_circle_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn chain_in_contact_direction_is_a_precondition_error() {
    let o = pml(&["model", "chain", "--dir", "e2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("TANGENT_IN_CONTACT_PLANE"));
    let o = pml(&["model", "geodesic", "--dir", "last"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("TANGENT_NOT_IN_CONTACT_PLANE"));
}

#[test]
fn geodesic_json_stays_in_contact_plane() {
    let o = pml(&["model", "geodesic", "--n", "2", "--quiet", "--assert"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["metadata"]["kind"], "CONTACT_GEODESIC");
    assert_eq!(v["samples"].as_array().unwrap().len(), 241);
    assert!(v["metadata"]["max_abs_contact_form"].as_f64().unwrap() < 1e-9);
}

#[test]
fn sweep_asserts_and_is_deterministic() {
    let args = ["model", "sweep", "--n", "2", "--grid", "20", "--assert", "--seed", "7", "--quiet"];
    let a = pml(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = pml(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["rows"].as_array().unwrap().len(), 400);
    assert_eq!(v["pass"], true);
    let c = pml(&["model", "sweep", "--n", "2", "--grid", "20", "--seed", "8", "--quiet"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn tolerance_overrides_reach_the_checks() {
    let o = pml(&["model", "chain", "--tol", "circle=1e-30", "--assert", "--quiet"]);
    assert_eq!(code(&o), 1);
    let o = pml(&["model", "chain", "--tol", "circle=1e-30", "--quiet"]);
    assert_eq!(code(&o), 0, "without --assert checks only report");
    assert_eq!(code(&pml(&["model", "chain", "--tol", "nonsense=1"])), 2);
    assert_eq!(code(&pml(&["model", "chain", "--tol", "circle=-1"])), 2);
}

#[test]
fn symmetry_suite_passes() {
    let o = pml(&["model", "symmetry", "--n", "2", "--count", "30", "--assert", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(json(&o)["max_distance"].as_f64().unwrap() < 1e-8);
}

#[test]
fn kostant_goldens_match() {
    for (family, size) in [("sp", "1"), ("sp", "2"), ("sp", "3"), ("sl", "2"), ("sl", "3"), ("sl", "5")] {
        let o = pml(&["kostant", "tables", "--family", family, "--size", size, "--golden", "--quiet"]);
        assert_eq!(code(&o), 0, "{family} {size}: {}", stderr(&o));
    }
}

#[test]
fn kostant_golden_mismatch_exits_one_with_diff() {
    let dir = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("golden/kostant_sl_2.json");
    let text = fs::read_to_string(golden).unwrap().replace("\"kernel_dim\": 2", "\"kernel_dim\": 3");
    fs::write(dir.path().join("kostant_sl_2.json"), text).unwrap();
    let o = pml_env(&["kostant", "tables", "--family", "sl", "--size", "2", "--golden", "--quiet"], "PML_GOLDEN_DIR", dir.path());
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("-  \"kernel_dim\": 3"), "{err}");
    assert!(err.contains("+  \"kernel_dim\": 2"), "{err}");
    let o = pml_env(&["kostant", "tables", "--family", "sl", "--size", "3", "--golden", "--quiet"], "PML_GOLDEN_DIR", dir.path());
    assert_eq!(code(&o), 2, "missing golden file");
}

#[test]
fn kostant_size_guard_and_bad_flags() {
    let o = pml(&["kostant", "tables", "--family", "sp", "--size", "9"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("size guard"));
    assert_eq!(code(&pml(&["kostant", "tables", "--family", "so", "--size", "1"])), 2);
    assert_eq!(code(&pml(&["kostant", "frobnicate"])), 2);
    assert_eq!(code(&pml(&["kostant", "identities", "--family", "sl", "--size", "2", "--format", "csv"])), 2);
}

#[test]
fn kostant_identities_hold() {
    let o = pml(&["kostant", "identities", "--family", "sp", "--size", "1", "--count", "50", "--assert", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["decomposable_mismatches"], 0);
    assert_eq!(v["codifferential_squared"][0]["basis_elements"], 30);
}

#[test]
fn fefferman_decompose_all_basis() {
    let o = pml(&["fefferman", "decompose", "--n", "1", "--all-basis", "--quiet"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["bracket_zero"] == true && r["same_ray"] == true && r["sum_ok"] == true));
    let o = pml(&["fefferman", "decompose", "--n", "3", "--count", "20", "--assert", "--quiet", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 21);
}

#[test]
fn fefferman_transfer_suite_and_single_map() {
    let o = pml(&["fefferman", "transfer", "--n", "1", "--count", "40", "--assert", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["kernel_elements"], v["kernel_images_coclosed"]);
    assert_eq!(v["projective"]["m"], 3);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    // basis of sp(4): one element of grade -2, two of grade -1, then grade 0 from index 3
    let map = |j: usize| {
        let value: Vec<String> = (0..10).map(|i| if i == j { "1".into() } else { "0".into() }).collect();
        serde_json::json!({"descriptor": {"family": "sp_contact", "n": 1}, "entries": [{"a": 0, "b": 1, "value": value}]})
            .to_string()
    };
    fs::write(&path, map(3)).unwrap();
    let o = pml(&["fefferman", "transfer", "--n", "1", "--file", path.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["input_torsion_free"], true);
    assert_eq!(v["image_torsion_free"], true);
    assert!(!v["image"]["entries"].as_array().unwrap().is_empty());
    fs::write(&path, map(1)).unwrap();
    let v = json(&pml(&["fefferman", "transfer", "--n", "1", "--file", path.to_str().unwrap(), "--quiet"]));
    assert_eq!(v["input_torsion_free"], false);
    assert_eq!(v["image_torsion_free"], false);
    let o = pml(&["fefferman", "transfer", "--n", "2", "--file", path.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 2);
}

fn write_connection(dir: &Path, name: &str, dim: usize, entries: &[(&str, &str)]) -> String {
    let map: serde_json::Map<String, serde_json::Value> =
        entries.iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string()))).collect();
    let body = serde_json::json!({ "dim": dim, "christoffel": map });
    let path = dir.join(name);
    fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn projective_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_connection(dir.path(), "a.json", 2, &[("1,1,2", "x2/4"), ("2,2,2", "1/3*x1"), ("1,2,1", "1/5")]);
    let b = dir.path().join("b.json");
    let o = pml(&["connections", "push", "--file", &a, "--upsilon", "x1/4;1/8*x2^2 - 1/10", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = b.to_str().unwrap();

    let o = pml(&["connections", "projective-check", "--file", &a, "--file", b, "--assert", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["status"], "EQUIVALENT");
    assert_eq!(v["torsion_equal"], true);
    assert!(v["max_path_distance"].as_f64().unwrap() < 1e-6);
    for (p, u) in v["points"].as_array().unwrap().iter().zip(v["upsilon"].as_array().unwrap()) {
        let x1 = p[0].as_f64().unwrap();
        let x2 = p[1].as_f64().unwrap();
        assert!((u[0].as_f64().unwrap() - x1 / 4.0).abs() < 1e-10);
        assert!((u[1].as_f64().unwrap() - (x2 * x2 / 8.0 - 0.1)).abs() < 1e-10);
    }

    let c = write_connection(dir.path(), "c.json", 2, &[("1,1,1", "x2")]);
    let o = pml(&["connections", "projective-check", "--file", &a, "--file", &c, "--quiet"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["status"], "NOT_EQUIVALENT");
    let o = pml(&["connections", "projective-check", "--file", &a, "--file", &c, "--assert", "--quiet"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("NOT_EQUIVALENT"));
    assert_eq!(code(&pml(&["connections", "projective-check", "--file", &a])), 2);
}

#[test]
fn contact_torsion_detects_torsion_on_h() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_connection(dir.path(), "flat.json", 3, &[("1,1,1", "x3")]);
    let o = pml(&["connections", "contact-torsion", "--file", &flat, "--assert", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["vanishes"], true);
    // T^1_{12} = 1 has an H-component
    let twisted = write_connection(dir.path(), "twisted.json", 3, &[("1,1,2", "1")]);
    let o = pml(&["connections", "contact-torsion", "--file", &twisted, "--assert", "--quiet"]);
    assert_eq!(code(&o), 1);
    let even = write_connection(dir.path(), "even.json", 2, &[]);
    assert_eq!(code(&pml(&["connections", "contact-torsion", "--file", &even])), 2);
}

#[test]
fn pathgeom_check_passes_and_detects_perturbation() {
    let o = pml(&["pathgeom", "check", "--n", "1", "--grid", "10", "--assert", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["flags"], 10);
    assert!(v["max_restriction_distance"].as_f64().unwrap() < 1e-6);
    let o = pml(&["pathgeom", "check", "--n", "1", "--grid", "10", "--frame", "perturbed", "--assert", "--quiet"]);
    assert_eq!(code(&o), 1);
    let o = pml(&["pathgeom", "check", "--n", "1", "--grid", "10", "--field", "vertical", "--assert", "--quiet"]);
    assert_eq!(code(&o), 1);
    let o = pml(&["pathgeom", "check", "--m", "3", "--grid", "10", "--assert", "--quiet", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 11);
}
