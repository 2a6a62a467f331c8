use std::path::Path;
use std::process::Command;

use isocenter::cli::run;
use isocenter::qpoly::parse_expr;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("isocenter").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn doc(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = cli(&full);
    (o.code, serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout)))
}

fn output<'a>(v: &'a serde_json::Value, name: &str) -> &'a str {
    v["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["name"] == name)
        .unwrap_or_else(|| panic!("no output {name} in {v}"))["value"]
        .as_str()
        .unwrap()
}

const SYMBOLIC: &str = "a,b,c,d,e,f,g,h";
const CASE_I: &str = "0,0,0,d,e,-3*d-3*h,g,h";
const CASE_III: &str = "a,a*beta,-a,d,e,-3/2*d*beta^2 + 3/2*e*beta,\
-1/2*d*beta^3 + 1/2*e*beta^2 + 2*d*beta - e,1/2*d*beta^2 - 1/2*e*beta - d";

#[test]
fn plconst_prints_canonical_constants() {
    let o = cli(&["plconst", "--family", SYMBOLIC, "-m", "2"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout, "D1 = a + c\nD2 = -4*a*b - 4*b*c + 3*d + f + 3*h\n");

    let dir = tempfile::tempdir().unwrap();
    let lin = doc(dir.path(), "lin.json", r#"{"p": "y", "q": "-x"}"#);
    let o = cli(&["plconst", "--system", &lin, "-m", "3"]);
    assert_eq!((o.code, o.stdout.as_str()), (0, "D1 = 0\nD2 = 0\nD3 = 0\n"));

    // reversible about the y-axis, so every constant vanishes
    let quad = doc(dir.path(), "quad.json", r#"{"p": "y + x^2", "q": "-x"}"#);
    let o = cli(&["plconst", "--system", &quad, "-m", "3"]);
    assert_eq!((o.code, o.stdout.as_str()), (0, "D1 = 0\nD2 = 0\nD3 = 0\n"));
}

#[test]
fn plconst_prints_long_constants_in_full() {
    let (code, v) = json(&["plconst", "--family", SYMBOLIC, "-m", "4"]);
    assert_eq!(code, 0);
    assert_eq!(parse_expr(output(&v, "D4")).unwrap().num_terms(), 28);
    let o = cli(&["plconst", "--family", SYMBOLIC, "-m", "4"]);
    assert!(!o.stdout.contains("not shown"));
}

#[test]
fn family_document_with_bindings() {
    let dir = tempfile::tempdir().unwrap();
    let fam = doc(
        dir.path(),
        "fam.json",
        r#"{"family": "quintic-uic", "a": "k", "b": "0", "c": "0", "d": "0",
            "e": "0", "f": "0", "g": "0", "h": "0", "bindings": {"k": "3/2"}}"#,
    );
    let o = cli(&["classify", "--system", &fam]);
    assert_eq!((o.code, o.stdout.as_str()), (1, "FOCUS k=1 sign=+\n"));
}

#[test]
fn classify_examples() {
    let c = |f: &str| cli(&["classify", "--family", f]);
    let o = c("0,0,0,1,0,-3,0,0");
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with("CENTER case=i\n"));
    let o = c("1,0,0,0,0,0,0,0");
    assert_eq!((o.code, o.stdout.as_str()), (1, "FOCUS k=1 sign=+\n"));
    let o = c("-1,0,0,0,0,0,0,0");
    assert_eq!((o.code, o.stdout.as_str()), (1, "FOCUS k=1 sign=-\n"));
    let o = c("1,0,-1,0,0,0,0,0");
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with("CENTER case=iii\n"));
    assert_eq!(c("0,1,0,0,1,0,-1,0").stdout, "CENTER case=ii\ntype = B4\n");
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = doc(dir.path(), "u.json", r#"{"p": "y", "q": "-x", "r": "0"}"#);
    let mixed = doc(dir.path(), "m.json", r#"{"p": "y", "q": "-x", "family": "quintic-uic"}"#);
    let badfam = doc(dir.path(), "b.json", r#"{"family": "cubic", "a": "0"}"#);
    let notjson = doc(dir.path(), "n.json", "p = y");
    let missing = dir.path().join("absent.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["classify", "--family", "1/0,0,0,0,0,0,0,0"],
        vec!["classify", "--family", "0.5,0,0,0,0,0,0,0"],
        vec!["classify", "--family", "1,0,0"],
        vec!["classify", "--family", "a,0,0,0,0,0,0,0"],
        vec!["classify", "--family", "2x,0,0,0,0,0,0,0"],
        vec!["plconst", "--family", SYMBOLIC, "-m", "0"],
        vec!["plconst", "--family", SYMBOLIC, "-m", "7"],
        vec!["plconst", "--system", &unknown],
        vec!["plconst", "--system", &mixed],
        vec!["plconst", "--system", &badfam],
        vec!["plconst", "--system", &notjson],
        vec!["plconst", "--system", missing.to_str().unwrap()],
        vec!["plconst"],
        vec!["frobnicate"],
        vec!["orbit", "--family", "a,0,0,0,0,0,0,0", "--x0", "0.1", "--y0", "0"],
        vec!["orbit", "--family", "0,0,0,0,0,0,0,0", "--x0", "0.1", "--y0", "0", "--tol", "-1"],
        vec!["boundary", "0,1,1"],
        vec!["boundary", "0,1,1,0", "-n", "8"],
        vec!["verify", "reversible", "--family", SYMBOLIC, "--line", "0,0"],
        vec!["verify", "invariant", "--family", SYMBOLIC, "--curve", "0"],
        vec!["verify", "integral", "--family", "0,0,0,0,0,0,0,0", "--num", "x", "--den", "0"],
    ];
    for args in cases {
        let o = cli(&args);
        assert_eq!(o.code, 2, "{args:?}: {}{}", o.stdout, o.stderr);
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    // parses, but has no linear center at the origin
    let bad_linear = doc(dir.path(), "nl.json", r#"{"p": "x", "q": "y"}"#);
    assert_eq!(cli(&["plconst", "--system", &bad_linear]).code, 2);
}

#[test]
fn verify_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let sys5 = doc(dir.path(), "s5.json", r#"{"p": "y + x^2*y*(b + e*x^2 + g*y^2)", "q": "-x + x*y^2*(b + e*x^2 + g*y^2)"}"#);
    let radial = doc(dir.path(), "r.json", r#"{"p": "x", "q": "y"}"#);
    let shear = doc(dir.path(), "sh.json", r#"{"p": "x^2", "q": "0"}"#);
    let lin = doc(dir.path(), "lin.json", r#"{"p": "y", "q": "-x"}"#);
    let bad = doc(dir.path(), "bad.json", r#"{"p": "y + x^2", "q": "-x"}"#);

    let table: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["verify", "commute", "--family", CASE_I, "--case", "i"], 0, "PASS"),
        (vec!["verify", "commute", "--family", "0,b,0,0,e,0,g,0", "--case", "ii"], 0, "PASS"),
        (vec!["verify", "commute", "--family", "a,b,-a,0,0,0,0,0", "--case", "iii"], 0, "PASS"),
        (vec!["verify", "commute", "--family", "0,0,0,1,0,-3,0,0"], 0, "PASS"),
        (vec!["verify", "commute", "--system", &lin, "--partner", &radial], 0, "PASS"),
        (vec!["verify", "commute", "--system", &lin, "--partner", &shear], 1, "FAIL"),
        (vec!["verify", "reversible", "--system", &sys5, "--line", "1,0"], 0, "PASS"),
        (vec!["verify", "reversible", "--system", &sys5, "--line", "0,1"], 0, "PASS"),
        (vec!["verify", "reversible", "--system", &lin, "--line", "3,-7"], 0, "PASS"),
        (vec!["verify", "reversible", "--family", "1,0,0,0,0,0,0,0", "--line", "1,0"], 1, "FAIL"),
        (vec!["verify", "reversible", "--family", CASE_III, "--constraint", "a*s^2 - a*beta*s - a"], 0, "PASS"),
        (vec!["verify", "reversible", "--system", &lin, "--constraint", "s^2 - 1"], 0, "PASS"),
        (
            vec!["verify", "integral", "--family", CASE_I, "--num", "(x^2 + y^2)^2", "--den", "1 + e*x^4 - 4*d*x^3*y + 4*h*x*y^3 - g*y^4"],
            0,
            "PASS",
        ),
        (vec!["verify", "integral", "--family", CASE_I, "--num", "x^2 + y^2"], 1, "FAIL"),
        (vec!["verify", "integral", "--family", CASE_I, "--case", "i"], 0, "PASS"),
        (vec!["verify", "integral", "--family", "0,1,0,0,e,0,g,0", "--case", "ii"], 0, "PASS"),
        (vec!["verify", "integral", "--family", "0,1,0,0,e,0,e,0", "--case", "ii"], 0, "PASS"),
        (vec!["verify", "integral", "--family", "0,0,0,0,e,0,g,0", "--case", "ii"], 0, "PASS"),
        (vec!["verify", "integral", "--family", "1,1,-1,0,0,0,0,0"], 0, "PASS"),
        (vec!["verify", "invariant", "--family", SYMBOLIC, "--curve", "x^2 + y^2"], 0, "PASS"),
        (vec!["verify", "invariant", "--system", &lin, "--curve", "x"], 1, "FAIL"),
        (vec!["verify", "form1", "--family", SYMBOLIC], 0, "PASS"),
        (vec!["verify", "form1", "--system", &bad], 1, "FAIL"),
    ];
    for (args, code, verdict) in table {
        let o = cli(&args);
        assert_eq!(o.code, code, "{args:?}: {}{}", o.stdout, o.stderr);
        assert_eq!(o.stdout.lines().next(), Some(verdict), "{args:?}");
    }
    let o = cli(&["verify", "form1", "--system", &bad]);
    assert!(o.stdout.contains("residual = -x^2*y"), "{}", o.stdout);
}

#[test]
fn long_residuals_are_truncated_in_text_only() {
    // a dense non-commuting partner gives a bracket with many terms
    let dir = tempfile::tempdir().unwrap();
    let partner = doc(
        dir.path(),
        "p.json",
        r#"{"p": "(1 + x + y + a + b)^3", "q": "(2 + x - y + c)^3"}"#,
    );
    let args = ["verify", "commute", "--family", SYMBOLIC, "--partner", &partner];
    let o = cli(&args);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("more terms not shown"), "{}", o.stdout);
    let (_, v) = json(&args);
    let full = parse_expr(output(&v, "bracket_p")).unwrap();
    assert!(full.num_terms() > isocenter::cli::DISPLAY_TERMS);
}

#[test]
fn printed_polynomials_round_trip() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["plconst", "--family", SYMBOLIC, "-m", "4"],
        vec!["plconst", "--family", CASE_III, "-m", "3"],
        vec!["verify", "integral", "--family", "0,1,0,0,e,0,g,0", "--case", "ii"],
        vec!["verify", "invariant", "--family", SYMBOLIC, "--curve", "x^2 + y^2"],
        vec!["verify", "reversible", "--family", "1,2,0,-1/3,0,0,0,5", "--line", "2,1"],
        vec!["verify", "commute", "--family", CASE_I, "--case", "ii"],
    ];
    let mut checked = 0;
    for args in runs {
        let (_, v) = json(&args);
        for o in v["outputs"].as_array().unwrap() {
            let text = o["value"].as_str().unwrap();
            let p = parse_expr(text).unwrap_or_else(|e| panic!("{args:?} {}: {e}", o["name"]));
            assert_eq!(p.to_string(), text);
            checked += 1;
        }
    }
    assert!(checked >= 19, "{checked}");
}

#[test]
fn json_schema_is_stable() {
    let (code, v) = json(&["classify", "--family", "1,0,0,0,0,0,0,0"]);
    assert_eq!(code, 1);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["command", "inputs", "notes", "outputs", "verdict"]);
    assert_eq!(v["command"], "classify");
    assert_eq!(v["verdict"], "FOCUS k=1 sign=+");
    let (_, v) = json(&["--timings", "plconst", "--family", SYMBOLIC, "-m", "1"]);
    assert!(v["elapsed_ms"].is_number());
}

fn parse_csv(path: &Path, header: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines
        .map(|l| {
            l.split(',')
                .map(|f| {
                    if f != "inf" {
                        // 17 significant digits: d.dddddddddddddddde±x
                        let mantissa = f.trim_start_matches('-').split('e').next().unwrap();
                        assert_eq!(mantissa.len(), 18, "{f}");
                    }
                    f.parse().unwrap()
                })
                .collect()
        })
        .collect()
}

#[test]
fn orbit_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lin.csv");
    let o = cli(&["orbit", "--family", "0,0,0,0,0,0,0,0", "--x0", "1", "--y0", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = parse_csv(&out, "t,x,y");
    let last = rows.last().unwrap();
    assert!((last[0] - std::f64::consts::TAU).abs() < 1e-15);
    assert!((last[1] - 1.0).abs() < 1e-8 && last[2].abs() < 1e-8);

    let (code, v) = json(&["orbit", "--family", "0,0,0,1,0,-3,0,0", "--x0", "0.3", "--y0", "0"]);
    assert_eq!(code, 0);
    assert!(output(&v, "closure_defect").parse::<f64>().unwrap() < 1e-6);

    let (code, v) = json(&["orbit", "--family", "1,0,0,0,0,0,0,0", "--x0", "0.3", "--y0", "0"]);
    assert_eq!(code, 0);
    assert!(output(&v, "closure_defect").parse::<f64>().unwrap() > 1e-4);
    let rt: f64 = output(&v, "return_time").parse().unwrap();
    assert!((rt - std::f64::consts::TAU).abs() < 1e-8);

    // leaves every bounded region within one turn
    let o = cli(&["orbit", "--family", "1,0,0,0,0,0,0,0", "--x0", "0.5", "--y0", "0"]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.starts_with("ERROR"));

    let o = cli(&["orbit", "--family", "0,0,0,0,0,0,0,0", "--x0", "1", "--y0", "0", "--rk4", "0.01"]);
    assert_eq!(o.code, 0);
}

#[test]
fn boundary_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = cli(&["boundary", "0,1,-1,0", "-n", "64", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with("B4\n"));
    assert!(o.stdout.contains("maximizers = 4\n"));
    let rows = parse_csv(&out, "phi,rho");
    assert_eq!(rows.len(), 64);
    assert_eq!(rows.iter().filter(|r| r[1].is_infinite()).count(), 4);

    let o = cli(&["boundary", "0,1,1,0"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with("B2\n") && o.stdout.contains("maximizers = 2\n"));

    let o = cli(&["boundary", "0,-1,1,0"]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("boundary formula inapplicable (c0 <= 0)"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<String>> = (0..2)
        .map(|i| {
            let orbit = dir.path().join(format!("o{i}.csv"));
            let bnd = dir.path().join(format!("b{i}.csv"));
            let mut outputs = Vec::new();
            for args in [
                vec!["plconst", "--family", SYMBOLIC, "-m", "4"],
                vec!["--json", "classify", "--family", "0,1,0,0,2,0,-1,0"],
                vec!["orbit", "--family", "0,1,0,0,1,0,1,0", "--x0", "0.2", "--y0", "0.1", "--out", orbit.to_str().unwrap()],
                vec!["boundary", "1/3,1,-1,1/5", "--out", bnd.to_str().unwrap()],
                vec!["--json", "verify", "integral", "--family", "0,1,0,0,e,0,g,0", "--case", "ii"],
            ] {
                outputs.push(cli(&args).stdout.replace(&format!("o{i}.csv"), "o.csv").replace(&format!("b{i}.csv"), "b.csv"));
            }
            outputs.push(std::fs::read_to_string(&orbit).unwrap());
            outputs.push(std::fs::read_to_string(&bnd).unwrap());
            outputs
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_isocenter");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["classify", "--family", "0,0,0,1,0,-3,0,0"]), Some(0));
    assert_eq!(code(&["classify", "--family", "1,0,0,0,0,0,0,0"]), Some(1));
    assert_eq!(code(&["classify", "--family", "1/0,0,0,0,0,0,0,0"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}
