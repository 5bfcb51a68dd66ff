use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_yangw"))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("yangw-cli-{}-{name}", std::process::id()))
}

fn run(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let (a, b) = (tmp("det-a"), tmp("det-b"));
    let common = ["check-main", "--shape", "4,3", "--fixtures", "main*", "--report"];
    assert_eq!(run(&[&common[..], &[a.to_str().unwrap(), "--jobs", "1"]].concat()), 0);
    assert_eq!(run(&[&common[..], &[b.to_str().unwrap(), "--jobs", "3"]].concat()), 0);
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    assert!(text.starts_with("suite=check-main\n"));
    assert!(text.lines().last().unwrap().starts_with("summary\ttotal=18\tpass=18"));
    assert_eq!(run(&["diff", a.to_str().unwrap(), b.to_str().unwrap()]), 0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["check-w-closure", "--shape", "2,1"]), 0);
    // wrong central charge breaks R2.6
    assert_eq!(run(&["check-relations", "--fixtures", "*R2.6*", "--bind", "c1=0"]), 1);
    assert_eq!(run(&["check-main"]), 2);
    assert_eq!(run(&["check-main", "--shape", "4,x"]), 2);
    assert_eq!(run(&["check-coproduct", "--a", "3", "--b", "4"]), 2);
    assert_eq!(run(&["no-such-suite"]), 2);
}

#[test]
fn config_file_and_diff_of_changed_report() {
    let cfg = tmp("cfg");
    std::fs::write(&cfg, "# relation suite under ev\nmap=ev\nfixtures=*R2.6*\n").unwrap();
    let (good, bad) = (tmp("good"), tmp("bad"));
    assert_eq!(run(&["check-relations", "--config", cfg.to_str().unwrap(), "--report", good.to_str().unwrap()]), 0);
    let flags = ["check-relations", "--config", cfg.to_str().unwrap(), "--bind", "c1=0", "--report", bad.to_str().unwrap()];
    assert_eq!(run(&flags), 1);
    let out = bin().args(["diff", good.to_str().unwrap(), bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("- id=") && l.contains("status=pass")));
    assert!(text.lines().any(|l| l.starts_with("+ id=") && l.contains("status=fail")));
    let w = tmp("w");
    assert_eq!(run(&["check-w-closure", "--shape", "2,1", "--report", w.to_str().unwrap()]), 0);
    assert_eq!(run(&["diff", good.to_str().unwrap(), w.to_str().unwrap()]), 2);
}
