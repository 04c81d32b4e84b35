use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fareyphase"))
        .args(args)
        .env_remove("FAREYPHASE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn levels_csv() {
    let o = run(&["levels", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert!(lines[0].starts_with("# fareyphase "));
    assert!(lines[1].starts_with("# config {"));
    assert_eq!(lines[2], "level,index,fraction,numerator,denominator,value");
    let fractions: Vec<&str> = lines[3..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(fractions, ["0/1", "1/3", "1/2", "2/3", "1/1"]);
}

#[test]
fn json_starts_with_config() {
    let o = run(&["partition", "--model", "knauf", "--k", "3", "--beta", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let records = v.as_array().unwrap();
    assert_eq!(records.len(), 2);
    assert!(records[0].get("command").is_some());
    assert_eq!(records[1]["model"], "knauf");
    assert_eq!(records[1]["k"], 3);
}

#[test]
fn exit_codes() {
    // enumeration cap
    assert_eq!(run(&["levels", "--k", "25"]).status.code(), Some(2));
    assert_eq!(run(&["levels", "--k", "100"]).status.code(), Some(2));
    // denominators past u64
    assert_eq!(run(&["partition", "--model", "knauf", "--k", "89", "--beta", "1"]).status.code(), Some(3));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["partition", "--model", "nope", "--k", "3", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "sandwich", "--k-range", "2:6"]).status.code(), Some(0));
    // three levels are far from the zeta limit
    assert_eq!(run(&["verify", "--suite", "zeta", "--k-range", "1:3"]).status.code(), Some(1));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let args = ["partition", "--model", "farey-chain", "--k-range", "3:8", "--beta", "0.5"];
    let o = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&run(&args)));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["partition", "--model", "all", "--k-range", "12:16", "--beta-grid", "0.25:2:4"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(one.status.code(), Some(0));
    for n in ["2", "4", "8"] {
        let other = run(&[&args[..], &["--threads", n]].concat());
        assert_eq!(other.stdout, one.stdout, "threads {n}");
    }
}
