use std::process::{Command, Output};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use scrambled_core::constructions::parse_point;
use scrambled_core::{truncated_distance, Dyadic};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scrambled"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or("").to_string()
}

const PAIR: [&str; 6] = ["--tuple", "t1 i=1", "--tuple", "t1 i=2", "--gaps", "3,4,9,16,33"];

#[test]
fn gen_prefixes() {
    let o = run(&["gen", "morse", "8"]);
    assert!(o.status.success());
    assert_eq!(last_line(&o), "01101001");
    assert!(stdout(&o).starts_with("# point=morse\n"));
    assert_eq!(last_line(&run(&["gen", "t1 i=1 gaps=1,2", "6"])), "011001");
    assert_eq!(last_line(&run(&["gen", "r3 gaps=1,2", "6"])), "101001");
    assert_eq!(last_line(&run(&["gen", "lemma1", "6", "--gaps", "1,2"])), "010110");
    let j: serde_json::Value = serde_json::from_slice(&run(&["gen", "morse", "4", "--format", "json"]).stdout).unwrap();
    assert_eq!(j["prefix"], "0110");
}

#[test]
fn unknown_descriptor_is_a_usage_error() {
    let o = run(&["gen", "tribonacci", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = run(&["df", "--tuple", "morse", "--tuple", "xyz", "--horizon", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn df_pair_rows_follow_block_ends() {
    let mut args = vec!["df"];
    args.extend(PAIR);
    args.extend(["--checkpoints", "s1,s2,s3,s4", "--delta-grid", "1/16"]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# command=df\n"));
    assert!(text.contains("# point1=t1 i=1 gaps=3,4,9,16,33\n"));
    assert!(text.contains("# checkpoints=8,24,536,66072\n"));
    assert!(!text.contains("threads"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    let phi_star: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    // high after the agreeing odd blocks, low after the complemented even ones
    assert!(phi_star[0] > 0.5 && phi_star[2] > 0.9);
    assert!(phi_star[1] < phi_star[0] && phi_star[3] < 0.01);
}

#[test]
fn df_triple_brackets_direct_distances() {
    let o = run(&[
        "df", "--tuple", "t1 i=1", "--tuple", "t1 i=2", "--tuple", "r3", "--gaps", "1,2,3,4,5,6,7,8", "--horizon",
        "120", "--delta-grid", "1/8,1/2,7/8", "--precision", "12",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pts: Vec<_> = ["t1 i=1 gaps=1,2,3,4,5,6,7,8", "t1 i=2 gaps=1,2,3,4,5,6,7,8", "r3 gaps=1,2,3,4,5,6,7,8"]
        .iter()
        .map(|d| parse_point(d).unwrap())
        .collect();
    for row in csv_rows(&stdout(&o)) {
        let delta: Dyadic = row[0].parse().unwrap();
        let below: u64 = row[2].parse().unwrap();
        let (mut sure, mut maybe) = (0, 0);
        for k in 1..120u64 {
            let k = BigUint::from(k);
            let mut xs = Vec::new();
            for a in 0..3 {
                for b in a + 1..3 {
                    let d = truncated_distance(&pts[a].shift(&k), &pts[b].shift(&k), 12).unwrap();
                    xs.push(d.numerator().to_u64().unwrap());
                }
            }
            let x = *xs.iter().min().unwrap();
            let c = delta.scaled(12).unwrap() as u64;
            if x + 1 < c {
                sure += 1;
            }
            if x < c {
                maybe += 1;
            }
        }
        assert!(sure <= below && below <= maybe, "delta {delta}: {sure} <= {below} <= {maybe}");
    }
}

#[test]
fn df_without_checkpoints_is_a_usage_error() {
    let mut args = vec!["df"];
    args.extend(PAIR);
    args.extend(["--checkpoints", ""]);
    assert_eq!(run(&args).status.code(), Some(2));
    let mut args = vec!["df"];
    args.extend(PAIR);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let out = |threads: &str| {
        let mut args = vec!["--threads", threads, "df", "--engine", "symbolwise"];
        args.extend(PAIR);
        args.extend(["--checkpoints", "s1,s2,s3,1000,50000"]);
        let o = run(&args);
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(out("1"), out("8"));
}

#[test]
fn df_json_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("df.json");
    let mut args = vec!["--out", path.to_str().unwrap(), "df", "--format", "json"];
    args.extend(PAIR);
    args.extend(["--horizon", "100"]);
    let o = run(&args);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(j["config"]["command"], "df");
    assert_eq!(j["estimates"][0]["horizon"], "100");
}

fn classification(o: &Output) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("classification=").map(str::to_string))
        .unwrap_or_default()
}

#[test]
fn classify_examples() {
    let cps = ["--checkpoints", "s1,s2,s3,s4,100000"];
    let mut triple = vec!["classify", "--tuple", "t1 i=1", "--tuple", "t1 i=2", "--tuple", "t1 i=3", "--gaps", "3,4,9,16,33"];
    triple.extend(cps);
    let o = run(&triple);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(classification(&o), "not-scrambled:condition2-fails");

    let mut pair = vec!["classify"];
    pair.extend(PAIR);
    pair.extend(cps);
    let o = run(&pair);
    assert_eq!(classification(&o), "scrambled-evidence");
    assert!(stdout(&o).contains("extremal: checkpoint,delta,below,phi_hat"));

    let g = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16";
    let o = run(&[
        "classify", "--tuple", "t2 beta=101", "--tuple", "t2 beta=110", "--tuple", "r3", "--gaps", g, "--checkpoints",
        "s2,s5,s9,s14", "--precision", "48",
    ]);
    assert_eq!(classification(&o), "scrambled-evidence", "{}", stdout(&o));

    let o = run(&["classify", "--tuple", "t1 i=1", "--tuple", "t1 i=1", "--gaps", "3,4,9", "--horizon", "100"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "classify", "--tuple", "t1 i=1", "--tuple", "t1 i=2", "--gaps", "3,4,9,16,33", "--checkpoints", "s1,s4",
        "--format", "json",
    ]);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["verdict"]["classification"], "scrambled-evidence");
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "p", "--prefix", "16384"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(last_line(&o).starts_with("PASS"));

    let o = run(&["verify", "p", "--word", "01010"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(last_line(&o).starts_with("FAIL"));

    let o = run(&["verify", "lemma1", "--gaps", "1,2,3,4", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(last_line(&o).contains("r_4 = 34"));

    let o = run(&["verify", "lemma1", "--gaps", "2,3", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["verify", "step2", "--gaps", "3,4,9", "--r", "2", "--horizon", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 25);
    assert!(text.contains("min distance"));

    let o = run(&["verify", "lemma2", "--beta1", "1", "--beta2", "0", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(last_line(&o).contains("5 indices"));

    let o = run(&[
        "verify", "oracle-match", "--tuple", "t1 i=1", "--tuple", "t1 i=2", "--tuple", "t1 i=3", "--gaps",
        "3,4,9,16,33", "--checkpoints", "s1,s2,s3,5000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = run(&["verify", "p", "--prefix", "64", "--format", "json"]);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["passed"], true);
    assert_eq!(j["checks"][0]["check"], "overlap-free");

    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn plot_renders_svg_from_df_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("df.csv");
    let mut args = vec!["--out", csv.to_str().unwrap(), "df", "--delta-grid", "1/16,1/2"];
    args.extend(PAIR);
    args.extend(["--checkpoints", "s1,s2,s3,s4"]);
    assert!(run(&args).status.success());
    let o = run(&["plot", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 4);
    let o = run(&["plot", csv.to_str().unwrap(), "--deltas", "0.5"]);
    assert_eq!(stdout(&o).matches("<polyline").count(), 2);
}
