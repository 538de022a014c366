use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use censoring::cli::files::canonical_json;
use censoring::model::{DiscreteWorld, ObservedAtom};
use censoring::random::random_observed_world;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_censoring")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn observed_file(dir: &Path, name: &str, atoms: &[(f64, usize, f64)]) -> String {
    let grid: Vec<f64> = {
        let mut g: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    };
    let atoms = atoms.iter().map(|&(t, status, p)| ObservedAtom { t, status, p }).collect();
    let w = DiscreteWorld::observed(2, grid, atoms).unwrap();
    write(dir, name, &canonical_json(&w))
}

#[test]
fn check_t1c1_world_holds_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let ex = bin(&["example", "--pair", "T1C1", "--n", "8", "--out", "w.json"], dir.path());
    assert_eq!(ex.status.code(), Some(0));
    let out = bin(&["check", "w.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], "censoring.report/1");
    assert_eq!(v["world_sha256"].as_str().unwrap().len(), 64);
    let props = v["report"]["properties"].as_array().unwrap();
    assert_eq!(props.len(), 17);
    assert!(props.iter().all(|p| p["holds"] == Value::Bool(true)));
}

#[test]
fn check_reports_failures_as_data() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["example", "--pair", "T2C3", "--n", "8", "--out", "w.json"], dir.path());
    let out = bin(&["check", "w.json", "--tol", "1e-9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let fams = v["report"]["families"].as_array().unwrap();
    let held: Vec<bool> = fams.iter().map(|f| f["holds"].as_bool().unwrap()).collect();
    assert_eq!(held, vec![true, false, false, false, false, false]);
}

#[test]
fn check_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["example", "--pair", "T2C2", "--n", "4", "--out", "w.json"], dir.path());
    let a = bin(&["check", "w.json"], dir.path());
    let b = bin(&["check", "w.json"], dir.path());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_json_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "{\n  \"d\": 1,\n  \"grid\": [1,\n}");
    let out = bin(&["check", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    write(dir.path(), "invalid.json", r#"{"d":1,"grid":[1],"atoms":[{"t":1,"d":1,"c":1,"p":0.5}]}"#);
    assert_eq!(bin(&["check", "invalid.json"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["check", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn observed_only_file_marks_latent_checks_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let f = observed_file(dir.path(), "obs.json", &[(1.0, 0, 0.25), (1.0, 1, 0.25), (2.0, 2, 0.5)]);
    let out = bin(&["check", &f], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for p in v["report"]["properties"].as_array().unwrap() {
        assert_eq!(p["applicable"], Value::Bool(false));
        assert!(p["reason"].as_str().unwrap().starts_with("not applicable"));
    }
}

#[test]
fn estimate_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s.csv", "time,status\n1,1\n2,0\n3,1\n");
    let out = bin(&["estimate", &f], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "time,at_risk,n_0,n_1,dH_1,S_km,P_S,P_F1");
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 1.0);
    assert_eq!(first[1], 3.0);
    assert!((first[4] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn estimate_rejects_bad_samples() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "");
    assert_eq!(bin(&["estimate", &empty], dir.path()).status.code(), Some(2));
    let header_only = write(dir.path(), "h.csv", "time,status\n");
    assert_eq!(bin(&["estimate", &header_only], dir.path()).status.code(), Some(2));
    let bad = write(dir.path(), "bad.csv", "time,status\n1,1\n2,3\n");
    let out = bin(&["estimate", &bad, "--d", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("record 2"));
    let neg = write(dir.path(), "neg.csv", "time,status\n-1,1\n");
    assert_eq!(bin(&["estimate", &neg], dir.path()).status.code(), Some(2));
}

#[test]
fn table1_prints_the_published_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["table1", "--n", "8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let cells: Vec<&str> = rows.iter().flat_map(|r| r[1..7].iter().copied()).collect();
    assert_eq!(cells.len(), 36);
    let expected = "111111 111000 110110 100100 110110 100000";
    let got: Vec<String> = rows.iter().map(|r| r[1..7].concat()).collect();
    assert_eq!(got.join(" "), expected);
}

#[test]
fn example_with_heatmaps_writes_six_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["example", "--pair", "T2C1", "--n", "4", "--heatmaps", "--dir", "maps"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(dir.path().join("maps")).unwrap().collect();
    assert_eq!(files.len(), 6);
    let exit = std::fs::read_to_string(dir.path().join("maps/heatmap_Ttilde.csv")).unwrap();
    // row c = 0.25, column t = 0.75
    assert_eq!(exit.lines().next().unwrap().split(',').nth(2), Some("0.25"));
    assert_eq!(bin(&["example", "--pair", "T2C1", "--n", "5"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["example", "--pair", "T4C1"], dir.path()).status.code(), Some(2));
}

#[test]
fn consistency_emits_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    bin(&["example", "--pair", "T1C1", "--n", "8", "--out", "w.json"], dir.path());
    let out = bin(&["consistency", "--world", "w.json", "--nlist", "100,10000", "--seeds", "0..9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 21);
    let again = bin(&["consistency", "--world", "w.json", "--nlist", "100,10000", "--seeds", "0..9"], dir.path());
    assert_eq!(out.stdout, again.stdout);
    assert_eq!(bin(&["consistency", "--world", "w.json", "--nlist", "x"], dir.path()).status.code(), Some(2));
}

#[test]
fn construct_random_observed_law() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = random_observed_world(&mut rng, 2, 6);
    write(dir.path(), "obs.json", &canonical_json(&w));
    let out = bin(&["construct", "obs.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["existence_defect"].as_f64().unwrap() <= 1e-10);
    // the emitted world is itself a valid world file
    let world = serde_json::to_string(&v["world"]).unwrap();
    write(dir.path(), "built.json", &world);
    assert_eq!(bin(&["check", "built.json"], dir.path()).status.code(), Some(0));
}

#[test]
fn construct_degenerate_laws() {
    let dir = tempfile::tempdir().unwrap();
    // everybody censored: C = T̃ is proper and all event mass goes to the tail
    let f = observed_file(dir.path(), "cens.json", &[(1.0, 0, 0.4), (2.0, 0, 0.6)]);
    let v: Value = serde_json::from_str(&stdout(&bin(&["construct", &f], dir.path()))).unwrap();
    assert_eq!(v["improper_c"], Value::Bool(false));
    assert_eq!(v["defective_tail"].as_f64(), Some(4.0));
    // nobody censored: C sits at infinity
    let f = observed_file(dir.path(), "none.json", &[(1.0, 1, 0.4), (2.0, 2, 0.6)]);
    let v: Value = serde_json::from_str(&stdout(&bin(&["construct", &f], dir.path()))).unwrap();
    assert_eq!(v["improper_c"], Value::Bool(true));
    assert!(v["world"]["atoms"].as_array().unwrap().iter().all(|a| a["c"] == "inf"));
}

#[test]
fn bad_flags_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["table1", "--n", "seven"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(bin(&["--help"], dir.path()).status.code(), Some(0));
}
