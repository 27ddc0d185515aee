use std::path::PathBuf;
use std::process::Command;

use heightlab_cli::{run, Env};
use serde_json::Value;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn invoke_env(args: &[&str], env: &Env) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("heightlab").chain(args.iter().copied());
    let code = run(argv, env, &mut out, &mut err);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn invoke(args: &[&str]) -> Outcome {
    invoke_env(args, &Env::default())
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let o = invoke(&a);
    assert_eq!(o.code, 0, "stderr: {}", o.err);
    serde_json::from_str(&o.out).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("heightlab-cli-{}-{}", std::process::id(), name));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn tame_symbol_of_t_and_one_minus_t() {
    let o = invoke(&["tame", "--f", "t", "--g", "1-t", "--at", "t"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.lines().next(), Some("1"));
}

#[test]
fn weil_product_is_one() {
    let o = invoke(&["weil", "--f", "t", "--g", "t-2"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.lines().next(), Some("product 1"));
    let v = json(&["weil", "--f", "t^2+1", "--g", "(t-3)/(t^2-2)"]);
    assert_eq!(v["result"]["product"], "1");
    assert!(v["terms"].as_array().unwrap().len() >= 4);
}

#[test]
fn pair1_paper_preset() {
    let v = json(&["pair1", "--example", "paper", "--f1", "2"]);
    let want = -4.0 * std::f64::consts::PI.powi(2) * 2f64.ln();
    let got = v["result"]["value"].as_f64().unwrap();
    assert!(((got - want) / want).abs() < 1e-6, "{} vs {}", got, want);
    assert_eq!(v["result"]["winding_f2"], 1);
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
    // cw flips the sign
    let cw = json(&["pair1", "--example", "paper", "--f1", "2", "--orientation", "cw"]);
    assert!((cw["result"]["value"].as_f64().unwrap() + got).abs() < 1e-9);
}

#[test]
fn pair1_from_json_matches_preset() {
    let g = |a: usize, b: usize| {
        format!(
            r#"{{"constant":"-1","factors":[{{"form":{},"exp":1}},{{"form":{},"exp":-1}}]}}"#,
            unit(a),
            unit(b)
        )
    };
    fn unit(j: usize) -> String {
        let mut v = [0; 3];
        v[j] = 1;
        format!("[{},{},{}]", v[0], v[1], v[2])
    }
    let terms: Vec<String> =
        (0..3).map(|j| format!(r#"{{"g":{},"line":{}}}"#, g((j + 1) % 3, (j + 2) % 3), unit(j))).collect();
    let doc = format!(
        r#"{{"xi":{{"terms":[{}]}},"f1":{{"constant":"2"}},
            "f2":{{"factors":[{{"form":["7/10","-3/10+i","-3/10-3/10*i"],"exp":1}},{{"form":[1,1,1],"exp":-1}}]}}}}"#,
        terms.join(",")
    );
    let path = temp_file("pair1.json", &doc);
    let from_file = json(&["pair1", "--input", path.to_str().unwrap()]);
    let preset = json(&["pair1", "--example", "paper", "--f1", "2"]);
    let a = from_file["result"]["value"].as_f64().unwrap();
    let b = preset["result"]["value"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn pair0_worked_value() {
    let v = json(&["pair0", "--f", "t", "--xi2", "(2) - (3)"]);
    assert_eq!(v["result"]["ratio"], "2/3");
    assert!((v["result"]["value"].as_f64().unwrap() - (2f64 / 3.0).ln()).abs() < 1e-15);

    let path = temp_file(
        "pair0.json",
        r#"{"xi1":{"terms":[{"f":"t","support":"P1"}]},"xi2":{"divisor":"(2)-(3)"}}"#,
    );
    let w = json(&["pair0", "--input", path.to_str().unwrap()]);
    assert_eq!(w["result"]["ratio"], "2/3");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn pair0_on_a_line_of_p2() {
    // f = t on the line z2 = 0, paired with points of that line
    let path = temp_file(
        "pair0-line.json",
        r#"{"xi1":{"terms":[{"f":"(t-1)/(t+1)","support":{"line":[0,0,1]}}]},
            "xi2":{"points":[{"point":[1,3,0],"mult":1},{"point":[1,5,0],"mult":-1}]}}"#,
    );
    let o = invoke(&["pair0", "--input", path.to_str().unwrap(), "--format", "json"]);
    std::fs::remove_file(path).unwrap();
    assert_eq!(o.code, 0, "{}", o.err);
    let v: Value = serde_json::from_str(&o.out).unwrap();
    assert!(v["result"]["ratio"].as_str().is_some());
}

#[test]
fn recip0_sides_agree() {
    let v = json(&["recip0", "--f", "(t-1)/(t+2)", "--g", "(t^2+1)/(t-5)^2"]);
    assert_eq!(v["result"]["equal"], true);
    assert_eq!(v["result"]["lhs"], v["result"]["rhs"]);
}

#[test]
fn winding_preset() {
    let v = json(&["winding", "--example", "paper"]);
    assert_eq!(v["result"]["winding_number"], 1);
    let outside = json(&["winding", "--example", "paper", "--p", "2+2*i"]);
    assert_eq!(outside["result"]["winding_number"], 0);
}

#[test]
fn canonical_height_and_pairing() {
    let v = json(&["ntheight", "--curve", "[0,0,1,-1,0]", "--point", "[0,0]", "--tol", "1e-6"]);
    assert!((v["result"]["height"].as_f64().unwrap() - 0.0511114082).abs() < 1e-6);
    assert_eq!(v["result"]["torsion_order"], Value::Null);
    let t = json(&["ntheight", "--curve", "[0,0,0,0,1]", "--point", "[2,3]"]);
    assert_eq!(t["result"]["height"], 0.0);
    assert_eq!(t["result"]["torsion_order"], 6);
    let p = json(&["ntpair", "--curve", "[0,0,1,-1,0]", "--p", "[0,0]", "--q", "[0,0]", "--tol", "1e-5"]);
    assert!((p["result"]["pairing"].as_f64().unwrap() - 0.0511114082).abs() < 1e-4);
}

#[test]
fn ex5_is_minus_two_times_the_pairing() {
    let v = json(&[
        "ex5", "--curve", "[0,0,1,-1,0]", "--p1", "[0,0]", "--q1", "[1,0]", "--p2", "[-1,-1]", "--q2", "O", "--tol",
        "1e-5",
    ]);
    let nt = v["result"]["nt_pairing"].as_f64().unwrap();
    assert_eq!(v["result"]["factor"], -2);
    assert!((v["result"]["value"].as_f64().unwrap() + 2.0 * nt).abs() < 1e-12);
}

#[test]
fn arakelov_report() {
    let v = json(&["arakelov", "--d", "-1", "--alpha", "2,1"]);
    assert!(v["result"]["degree"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["result"]["norm"], "5");
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert_eq!(terms[0]["valuation"], 1);
    let q = json(&["arakelov", "--d", "1", "--alpha", "12/7"]);
    assert!(q["result"]["degree"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn spread_presets() {
    let v = json(&["spread", "--example", "ex000"]);
    assert_eq!(v["result"]["main"], "u*y^2 + v*x^3 + w*x + 4*x^3");
    assert_eq!(v["result"]["relations"], serde_json::json!(["u - v^2"]));
    assert_eq!(v["result"]["verification"]["passed"], true);
    let ec = json(&["spread", "--example", "ec"]);
    assert_eq!(ec["result"]["relations"].as_array().unwrap().len(), 3);
    let z = json(&["spread", "--example", "ec", "--over-z"]);
    let rels = z["result"]["relations"].as_array().unwrap();
    assert!(rels.iter().any(|r| r == "2*r - 1"), "{:?}", rels);
    let e = json(&["spread", "--expr", "sqrt(pi)*x + pi", "--pi-mode", "eliminate", "--adjoin", "i"]);
    assert_eq!(e["result"]["main"], "u^2 + u*x");
    assert_eq!(e["result"]["relations"], serde_json::json!(["v^2 + 1"]));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        &["pair1", "--example", "paper", "--format", "json"][..],
        &["spread", "--example", "ec", "--format", "json"][..],
        &["ntheight", "--curve", "[0,1,1,-2,0]", "--point", "[-1,1]", "--tol", "1e-5", "--format", "json"][..],
        &["arakelov", "--d", "-5", "--alpha", "3,7", "--format", "json"][..],
    ] {
        let a = invoke(args);
        let b = invoke(args);
        assert_eq!(a.code, 0);
        assert_eq!(a.out, b.out);
        let v: Value = serde_json::from_str(&a.out).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["status"], "ok");
    }
}

#[test]
fn domain_errors_exit_with_one_and_name_their_type() {
    let cases: [(&[&str], &str); 5] = [
        (&["ntheight", "--curve", "[0,0,0,0,0]", "--point", "[0,0]"], "NtError::SingularCurve"),
        (&["ntheight", "--curve", "[0,0,1,-1,0]", "--point", "[1,1]"], "NtError::NotOnCurve"),
        (&["tame", "--f", "t", "--g", "t^3-2", "--at", "t^3-2"], "FuncFieldError::"),
        (&["arakelov", "--d", "4", "--alpha", "1,1"], "ArakelovError::InvalidField"),
        (&["spread", "--expr", "sqrt(4)*x"], "SpreadError::Syntax"),
    ];
    for (args, kind) in cases {
        let o = invoke(args);
        assert_eq!(o.code, 1, "{:?}: {}", args, o.err);
        assert!(o.err.contains(kind), "{:?}: {}", args, o.err);
        assert_eq!(o.err.lines().count(), 1);
    }
    let mut with_json = cases[0].0.to_vec();
    with_json.extend(["--format", "json"]);
    let o = invoke(&with_json);
    let v: Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["type"], "NtError::SingularCurve");
}

#[test]
fn pairing_errors_are_reported() {
    let o = invoke(&["pair0", "--f", "t", "--xi2", "(0) - (3)"]);
    assert_eq!(o.code, 1);
    assert!(o.err.contains("PairingError::SupportsNotDisjoint"), "{}", o.err);
    let o = invoke(&["pair1", "--example", "paper", "--p", "1/3+0*i"]);
    assert_eq!(o.code, 1, "{}", o.err);
    assert!(o.err.starts_with("error: KlmError::"), "{}", o.err);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["bogus"][..],
        &["tame", "--f", "t"][..],
        &["pair1", "--example", "paper", "--tol", "5"][..],
        &["pair1", "--example", "other"][..],
        &["pair1"][..],
        &["pair0", "--input", "/nonexistent/file.json"][..],
        &["spread", "--example", "ec", "--digits", "99"][..],
        &["ex5", "--curve", "[0,0,1,-1,0]", "--p1", "O", "--q1", "O", "--p2", "O", "--q2", "O", "--genera", "x"][..],
    ] {
        let o = invoke(args);
        assert_eq!(o.code, 2, "{:?}: {}", args, o.err);
    }
    let bad_json = temp_file("bad.json", "{ not json");
    assert_eq!(invoke(&["recip0", "--input", bad_json.to_str().unwrap()]).code, 2);
    std::fs::remove_file(bad_json).unwrap();
    assert_eq!(invoke(&["--help"]).code, 0);
}

#[test]
fn environment_tolerance() {
    let env = Env { tol: Some("1e-5".into()) };
    let o = invoke_env(&["ntheight", "--curve", "[0,0,1,-1,0]", "--point", "[0,0]", "--format", "json"], &env);
    let v: Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["inputs"]["tol"], 1e-5);
    // the flag wins over the environment
    let o = invoke_env(&["pair1", "--example", "paper", "--tol", "1e-7", "--format", "json"], &env);
    let v: Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["inputs"]["tol"], 1e-7);
    let o = invoke_env(&["winding", "--example", "paper"], &Env { tol: Some("fast".into()) });
    assert_eq!(o.code, 2);
    let v = json(&["winding", "--example", "paper"]);
    assert_eq!(v["inputs"]["tol"], 1e-9);
}

#[test]
fn binary_end_to_end() {
    let bin = env!("CARGO_BIN_EXE_heightlab");
    let o = Command::new(bin).args(["tame", "--f", "t", "--g", "1-t", "--at", "t"]).env_remove("HEIGHTLAB_TOL").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "1\n");
    // 1e-9 needs more doublings than the default cap
    let o = Command::new(bin)
        .args(["ntheight", "--curve", "[0,0,1,-1,0]", "--point", "[0,0]"])
        .env("HEIGHTLAB_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NtError::PrecisionUnreachable"));
}
