use std::fs;
use std::path::PathBuf;

fn idconc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("idconc").chain(args.iter().copied());
    let code = idconc_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("commands");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eval_prints_value_and_error() {
    let (code, out, _) = idconc(&["eval", "--family", "poisson", "--param", "1", "--mode", "open"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("0.36787944117144233 ± "), "{out}");
}

#[test]
fn eval_json_is_parseable() {
    let (code, out, _) = idconc(&["eval", "--family", "geometric", "--param", "0.75", "--mode", "closed", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"].as_f64(), Some(0.9375));
    assert_eq!(v["family"], "geometric");
}

#[test]
fn inf_lines() {
    let (code, out, _) = idconc(&["inf", "--family", "geometric", "--mode", "closed"]);
    assert_eq!(code, 0);
    assert_eq!(out, "3/4 (0.75), not attained\n");
    let (_, out, _) = idconc(&["inf", "--family", "poisson", "--mode", "open"]);
    assert_eq!(out, "1/e (0.36787944117144233), attained at lambda=1\n");
}

#[test]
fn scan_lines_and_csv() {
    let (code, out, _) = idconc(&["scan", "g1", "--from", "8", "--to", "629"]);
    assert_eq!(code, 0);
    assert_eq!(out, "min 0.793450747058153 at n=8\n");
    let path = scratch("g2.csv");
    let (code, out, _) = idconc(&["scan", "g2", "--from", "3", "--to", "579", "--csv", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, "max 0.225065994481669 at n=3\n");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,prob"));
    assert!(lines.next().unwrap().starts_with("3,0.2250659944816"));
    assert_eq!(text.lines().count(), 578);
}

#[test]
fn argument_errors_exit_2() {
    for args in [
        &["bogus"][..],
        &["eval", "--family", "binomial", "--param", "1", "--mode", "open"],
        &["eval", "--family", "poisson", "--param", "-1", "--mode", "open"],
        &["eval", "--family", "geometric", "--param", "1.5", "--mode", "closed"],
        &["scan", "g1", "--from", "3", "--to", "10"],
        &["scan", "g2", "--from", "10", "--to", "5"],
        &["grid", "--threads", "0"],
        &["grid", "--step", "0"],
        &["figure", "5"],
        &["verify", "--digits", "20"],
    ] {
        let (code, _, err) = idconc(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_exits_0() {
    let (code, out, _) = idconc(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("reproduce-all"));
}

#[test]
fn grid_is_identical_across_thread_counts() {
    let runs: Vec<String> = ["1", "3", "8"]
        .iter()
        .map(|t| {
            let (code, out, _) = idconc(&["grid", "--step", "0.05", "--threads", t]);
            assert_eq!(code, 0);
            out
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    assert!(runs[0].starts_with("min 0.57071123658730"), "{}", runs[0]);
    assert!(runs[0].contains("certified lower bound -3.32929"));
}

#[test]
fn certify_writes_schema_fields() {
    let path = scratch("poisson-closed.json");
    let (code, out, _) = idconc(&["certify", "--family", "poisson", "--mode", "closed", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["family", "mode", "inf_exact", "attained", "attained_at", "evidence"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["inf_exact"]["tag"], "ThreeHalvesOverE");
    assert_eq!(v["inf_exact"]["decimal"].as_f64(), Some(1.5 * (-1f64).exp()));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"decimal\": 0.55181916175716350"));
}

#[test]
fn certify_warns_on_unreproduced_quotes() {
    let path = scratch("poisson-open.json");
    let (code, _, err) = idconc(&["certify", "--family", "poisson", "--mode", "open", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(err.contains("K4 upper end"), "{err}");
}

#[test]
fn coarse_sym_poisson_certificate_fails_verification() {
    let path = scratch("sym-poisson-coarse.json");
    let (code, out, _) = idconc(&[
        "certify", "--family", "sym-poisson", "--mode", "open", "--grid-step", "0.05", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("NOT certified"));
    assert!(path.exists());
}

#[test]
fn figure_csv_to_stdout_and_file() {
    let (code, out, _) = idconc(&["figure", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("lambda,p_closed,p_open"));
    assert_eq!(out.lines().count(), 500);
    let path = scratch("figure4.csv");
    let (code, _, _) = idconc(&["figure", "4", "--csv", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1000);
    assert_eq!(text, idconc(&["figure", "4"]).1);
}

#[test]
fn verify_table_passes() {
    let (code, out, _) = idconc(&["verify"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.trim_end().ends_with("0 failed"));
    assert!(!out.contains("FAIL"));
}
