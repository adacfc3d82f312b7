use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vario(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vario"))
        .args(args)
        .output()
        .expect("run vario")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const MA: &str = r#"{"constructor":"ma_product","a1":1,"a2":1}"#;
const CUBIC: &str = r#"{"constructor":"make_variogram","f":{"atom":"monomial","params":{"p":3}},"mode":"norm"}"#;
const EXPO_COV: &str = r#"{"constructor":"exponential_covariance","a":1}"#;

#[test]
fn catalog_lists_atoms_in_stable_order() {
    let a = vario(&["catalog"]);
    assert!(a.status.success());
    let text = stdout(&a);
    assert!(text.contains("dagum"));
    let t1 = text.lines().filter(|l| l.starts_with("t1_")).count();
    assert_eq!(t1, 10);
    assert_eq!(text, stdout(&vario(&["catalog"])));

    let j = json_out(&vario(&["catalog", "--json"]));
    assert_eq!(j["config"]["command"], "catalog");
    let names: Vec<&str> = j["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"cm_pole"));
}

#[test]
fn eval_reports_values_and_config() {
    let o = vario(&["eval", "--model", MA, "--at", "0", "--at", "-1.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j = json_out(&o);
    assert_eq!(j["values"][0]["value"], 0.0);
    let expect = (1.0 - (-1.5f64).exp()).powi(2);
    assert!((j["values"][1]["value"].as_f64().unwrap() - expect).abs() < 1e-15);
    assert_eq!(j["config"]["model"]["constructor"], "ma_product");
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "p.csv", "x1\n0\n1\n2.5\n-3\n0.7\n");
    let ok = vario(&["validate", "--model", EXPO_COV, "--points", &pts]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert_eq!(json_out(&ok)["verdict"], "pass");

    let random = vario(&["validate", "--model", MA, "--n", "12", "--seed", "3"]);
    assert_eq!(random.status.code(), Some(0));
    assert_eq!(json_out(&random)["config"]["seed"], 3);

    let bad = vario(&["validate", "--model", CUBIC, "--points", &pts]);
    assert_eq!(bad.status.code(), Some(1));
    let j = json_out(&bad);
    assert_eq!(j["verdict"], "fail");
    assert_eq!(j["checks"][0]["witness"]["type"], "contrast");
    let a = j["checks"][0]["witness"]["a"].as_array().unwrap();
    assert!(a.iter().map(|v| v.as_f64().unwrap()).sum::<f64>().abs() < 1e-12);

    let broken = write(&dir, "bad.csv", "x1\n0\nabc\n");
    let e = vario(&["validate", "--model", MA, "--points", &broken]);
    assert_eq!(e.status.code(), Some(2));
    assert!(stderr(&e).contains("not a number"), "{}", stderr(&e));
}

#[test]
fn validate_selected_checks_and_output_file() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "one.csv", "x1\n1\n");
    let out = dir.path().join("report.json");
    let o = vario(&[
        "validate",
        "--model",
        CUBIC,
        "--points",
        &pts,
        "--checks",
        "sqrt_subadditivity",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let j: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(j["checks"][0]["witness"]["xi"][0], 1.0);
    assert_eq!(j["checks"][0]["witness"]["eta"][0], 1.0);

    let cos = r#"{"constructor":"cosine_variogram","w":1}"#;
    let o = vario(&["validate", "--model", cos, "--checks", "cnd,period", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let p = json_out(&o)["period"]["vector"][0].as_f64().unwrap();
    assert!((p - std::f64::consts::TAU).abs() < 1e-6);

    let unknown = vario(&["validate", "--model", MA, "--checks", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn construct_certifies_and_gates() {
    let o = vario(&["construct", "--model", MA]);
    assert!(o.status.success());
    let j = json_out(&o);
    assert_eq!(j["certified"], true);
    assert_eq!(j["config"]["recipe"]["constructor"], "ma_product");

    let schur = r#"{"constructor":"schur_product_extended","g1":{"atom":"exp_one_minus","params":{"a":1}},"g2":{"atom":"exp_one_minus","params":{"a":1}},"alpha":0.8,"beta":0.5}"#;
    let o = vario(&["construct", "--model", schur]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha + beta <= 1"));

    let w = r#"{"constructor":"wendland","r":1,"l":1,"d":3}"#;
    let o = vario(&["construct", "--model", w]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("floor(d/2) + 1"));
}

#[test]
fn construct_output_round_trips_through_eval() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.json");
    let spec = r#"{"constructor":"spectral_variogram","f":{"atom":"log1p"}}"#;
    assert!(vario(&["construct", "--model", spec, "--out", out.to_str().unwrap()]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let model_file = write(&dir, "model.json", &doc["model"].to_string());
    let j = json_out(&vario(&["eval", "--model", &model_file, "--at", "1"]));
    let v = j["values"][0]["value"].as_f64().unwrap();
    assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-8, "{v}");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn grid_tabulates_models() {
    let sph = r#"{"constructor":"spherical","range":1}"#;
    let o = vario(&["grid", "--model", sph, "--grid", "0:2:5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("x1,value\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 5);
    let vals: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(&vals[2..], &[1.0, 1.0, 1.0]);
    assert!(stderr(&o).contains("\"command\":\"grid\""));

    let sph2 = r#"{"constructor":"spherical","range":1,"d":2}"#;
    let o = vario(&["grid", "--model", sph2, "--grid", "-1:1:3,0:1:4"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 12);
    for r in rows {
        let xi: Vec<String> = r[..2].to_vec();
        let e = json_out(&vario(&["eval", "--model", sph2, "--at", &xi.join(",")]));
        let expect = e["values"][0]["value"].as_f64().unwrap();
        assert_eq!(r[2].parse::<f64>().unwrap(), expect);
    }

    let o = vario(&["grid", "--model", sph2, "--grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn krige_single_site_and_sparse_requirement() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.csv", "x1,value\n0.5,3.25\n");
    let o = vario(&["krige", "--model", MA, "--points", &one, "--target", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j = json_out(&o);
    assert_eq!(j["predictions"][0]["prediction"], 3.25);
    assert_eq!(j["predictions"][0]["weights"][0], 1.0);

    let o = vario(&["krige", "--model", MA, "--points", &one, "--target", "2", "--mode", "sparse"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("finite support radius"));

    let two = write(&dir, "two.csv", "x1,value\n0,0\n2,2\n");
    let abs = r#"{"constructor":"make_variogram","f":{"atom":"monomial","params":{"p":1}},"mode":"norm"}"#;
    let j = json_out(&vario(&["krige", "--model", abs, "--points", &two, "--target", "1"]));
    assert!((j["predictions"][0]["prediction"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn krige_sparse_matches_dense() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "p.csv", "x1,x2,value\n0,0,1\n0.5,0.2,2\n1,1,0.5\n2,0.3,-1\n0.1,1.4,0.7\n");
    let w = r#"{"constructor":"wendland","r":1.5,"l":2,"d":2}"#;
    let run = |mode: &str| {
        json_out(&vario(&[
            "krige", "--model", w, "--points", &pts, "--grid", "0:2:3,0:1:3", "--mode", mode,
        ]))
    };
    let (d, s) = (run("dense"), run("sparse"));
    let (d, s) = (d["predictions"].as_array().unwrap(), s["predictions"].as_array().unwrap());
    assert_eq!(d.len(), 9);
    for (a, b) in d.iter().zip(s) {
        let (a, b) = (a["prediction"].as_f64().unwrap(), b["prediction"].as_f64().unwrap());
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "five.csv", "x1\n0\n0.5\n1\n1.5\n2\n");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let fields = dir.path().join(format!("{name}.fields"));
        let o = vario(&[
            "simulate",
            "--model",
            EXPO_COV,
            "--points",
            &pts,
            "--seed",
            seed,
            "--replicates",
            "500",
            "--bins",
            "0:2.0001:5",
            "--out",
            out.to_str().unwrap(),
            "--fields",
            fields.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (std::fs::read(&out).unwrap(), std::fs::read(&fields).unwrap())
    };
    let a = run("a.csv", "11");
    let b = run("b.csv", "11");
    assert_eq!(a, b);
    assert_ne!(a.1, run("c.csv", "12").1);
    let text = String::from_utf8(a.0).unwrap();
    assert!(text.starts_with("lag_lo,lag_hi,count,gamma_hat\n"));
    assert_eq!(csv_rows(&text).len(), 4);
    let config: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.config.json")).unwrap()).unwrap();
    assert_eq!(config["seed"], 11);
    assert_eq!(config["replicates"], 500);
}

#[test]
fn simulate_needs_a_sill() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "p.csv", "x1\n0\n1\n");
    let sph = r#"{"constructor":"spherical","range":1}"#;
    let o = vario(&["simulate", "--model", sph, "--points", &pts, "--replicates", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = vario(&["simulate", "--model", MA, "--points", &pts]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("recorded plateau"));
}
