use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kinkpair"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn kinkpair")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    assert_eq!(text.lines().count(), 1, "{text}");
    serde_json::from_str(&text).unwrap()
}

const CATALOG: [&str; 8] = [
    "fisher(1)",
    "fisher(2)",
    "mt6",
    "dto(2/9,4)",
    "dto(3/16,6)",
    "fhn(3,1)",
    "fhn(3,2)",
    "newell_whitehead",
];

#[test]
fn every_preset_verifies() {
    for preset in CATALOG {
        for branch in ["positive", "negative"] {
            let o = run(&["verify", "--preset", preset, "--branch", branch, "--json"]);
            assert!(o.status.success(), "{preset} {branch}: {}", stdout(&o));
            let rec = json(&o);
            assert_eq!(rec["command"], "verify");
            assert_eq!(rec["passed"], true);
            assert!(rec["flow_sup_error"].as_f64().unwrap() < 1e-8);
            assert!(rec["residual"]["max_abs_residual"].as_f64().unwrap() < 1e-9);
        }
    }
}

#[test]
fn figures_are_deterministic_and_well_formed() {
    let (a, b) = (scratch("fig_a"), scratch("fig_b"));
    for preset in ["fisher(1)", "mt6"] {
        for dir in [&a, &b] {
            let o = run(&["figures", "--preset", preset, "--out", dir.to_str().unwrap()]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
    }
    for name in ["fisher-1.csv", "fisher-1.svg", "mt6.csv", "mt6.svg"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert_eq!(x, y, "{name} differs between runs");
    }
    for name in ["fisher-1.svg", "mt6.svg"] {
        let text = fs::read_to_string(a.join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("viewBox"), Some("0 0 800 500"));
        let polylines = root.descendants().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(polylines, 2);
        assert!(root.descendants().filter(|n| n.has_tag_name("text")).count() > 6);
    }
    let csv = fs::read_to_string(a.join("mt6.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xi,u_original,u_susy"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 3);
    // 17 significant digits in scientific notation
    let mantissa = row[1].split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    assert_eq!(csv.lines().count(), 1002);
}

#[test]
fn text_output_ends_with_summary() {
    let o = run(&["kink", "--preset", "mt6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("summary command=kink preset=mt6 gamma=2.5"), "{last}");
    assert!(last.ends_with("passed=true"));
    assert!(text.contains("tanh(0.750000000000000(xi))"));
}

#[test]
fn partner_reports_derived_fhn_equation() {
    let o = run(&["partner", "--preset", "fhn(3,2)", "--branch", "negative", "--json"]);
    assert!(o.status.success());
    let rec = json(&o);
    // u(u − 1)(3 − 4u)
    let got: kinkpair::PowerPoly = rec["partner_nonlinearity"].as_str().unwrap().parse().unwrap();
    let want: kinkpair::PowerPoly = "-3 u + 7 u^2 - 4 u^3".parse().unwrap();
    assert!(got.approx_eq(&want, 1e-12), "{got}");
    assert_eq!(rec["partner_realization"], "real");
    assert!((rec["partner_rate"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn scenario_file_with_flag_override() {
    let dir = scratch("scenario");
    let path = dir.join("s.json");
    fs::write(&path, r#"{"preset": "fisher(1)", "xi0": 2.0, "branch": "negative", "json": true}"#).unwrap();
    let rec = json(&run(&["kink", "--scenario", path.to_str().unwrap()]));
    assert_eq!(rec["preset"], "fisher(1)");
    assert_eq!(rec["kink_shift"], 2.0);
    assert!(rec["gamma"].as_f64().unwrap() < 0.0);

    let rec = json(&run(&["kink", "--scenario", path.to_str().unwrap(), "--preset", "mt6", "--xi0", "-1"]));
    assert_eq!(rec["preset"], "mt6");
    assert_eq!(rec["kink_shift"], -1.0);
    assert_eq!(rec["gamma"], -2.5);

    fs::write(&path, r#"{"preset": "mt6", "velocity": 1}"#).unwrap();
    let o = run(&["kink", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn factor_custom_nonlinearity() {
    let o = run(&["factor", "--f-over-u", "1 - u^{3/2}", "--family", "fisher:3/2", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = json(&o);
    let pairs = rec["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    let h = (0.75f64 + 1.0).sqrt();
    for p in pairs {
        assert!((p["gamma"].as_f64().unwrap() - (h + 1.0 / h)).abs() < 1e-12);
        assert_eq!(p["nonlinearity"], "u - u^{5/2}");
    }

    let o = run(&["factor", "--f-over-u", "1 - u^2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["factor", "--f-over-u", "1 - u^2 + u^5", "--family", "fisher:2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_front_tracks() {
    let dir = scratch("simulate");
    let o = run(&[
        "simulate", "--preset", "fisher(2)", "--x-min", "-20", "--x-max", "20", "--dx", "0.1",
        "--dt", "0.004", "--t-final", "2", "--out", dir.to_str().unwrap(), "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = json(&o);
    let gamma = rec["gamma"].as_f64().unwrap();
    let speed = rec["original_speed"].as_f64().unwrap();
    assert!((speed - gamma).abs() < 0.05 * gamma, "{speed} vs {gamma}");
    let track = fs::read_to_string(dir.join("fisher-2_front.csv")).unwrap();
    assert!(track.starts_with("t,front_position\n"));
    assert!(dir.join("fisher-2_partner_front.csv").exists());
}

#[test]
fn invalid_inputs_exit_with_diagnostics() {
    for args in [
        &["kink", "--preset", "fisher(0)"][..],
        &["kink", "--preset", "heat"],
        &["kink"],
        &["simulate", "--preset", "mt6", "--dt", "0.01"],
        &["simulate", "--preset", "mt6", "--x-min", "-3", "--x-max", "3"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{args:?}");
    }
    let o = run(&["kink", "--preset", "mt6", "--branch", "sideways"]);
    assert!(!o.status.success());
}
