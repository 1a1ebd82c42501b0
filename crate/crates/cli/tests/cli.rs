use std::path::PathBuf;
use std::process::{Command, Output};

fn aztec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aztec"))
        .args(args)
        .env_remove("AZTEC_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aztec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exact_grid_contains_order_two_value() {
    let o = aztec(&["exact", "--order", "2", "--grid"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("# aztec "));
    assert!(s.lines().any(|l| l.starts_with("0,1,3/4,")), "{s}");
}

#[test]
fn exact_single_location_with_bias() {
    let o = aztec(&["exact", "--order", "1", "--at", "0,0", "--bias", "1/3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0,0,1/3,0.333333333333"));
}

#[test]
fn asym_center_is_a_quarter() {
    let o = aztec(&["asym", "--x", "0", "--y", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last(), Some("0.25"));
    let o = aztec(&["asym", "--x", "-0.2", "--y", "0.1", "--all-directions"]);
    let last = stdout(&o).lines().last().unwrap().to_string();
    let sum: f64 = last.split(',').map(|v| v.parse::<f64>().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-9);
}

#[test]
fn sampling_is_reproducible_and_renders() {
    let a = aztec(&["sample", "--order", "6", "--seed", "42"]);
    let b = aztec(&["sample", "--order", "6", "--seed", "42", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let tiling = scratch("t6.txt");
    std::fs::write(&tiling, &a.stdout).unwrap();
    let svg = scratch("t6.svg");
    let r = aztec(&[
        "render",
        "--in",
        tiling.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
        "--polar",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<rect x=").count(), 42);
}

#[test]
fn sample_count_writes_a_directory() {
    let dir = scratch("many");
    let o = aztec(&[
        "sample",
        "--order",
        "3",
        "--seed",
        "1",
        "--count",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 3);
    assert_eq!(
        aztec(&["sample", "--order", "3", "--seed", "1", "--count", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_reads_region_files() {
    let region = scratch("diamond.txt");
    std::fs::write(&region, "aztec 2\n").unwrap();
    let o = aztec(&["oracle", "--region", region.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("3/4"));
    std::fs::write(&region, "aztec 7\n").unwrap();
    assert_eq!(
        aztec(&["oracle", "--region", region.to_str().unwrap()]).status.code(),
        Some(4)
    );
}

#[test]
fn stats_reports() {
    let o = aztec(&["stats", "--order", "4", "--samples", "50", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("ell,m,exact,empirical,stderr"));
    let o = aztec(&["stats", "--order", "12", "--samples", "5", "--seed", "3", "--arctic"]);
    assert_eq!(stdout(&o).lines().count(), 7);
    let o = aztec(&[
        "stats",
        "--order",
        "8",
        "--samples",
        "20",
        "--seed",
        "3",
        "--variance",
        "0,0",
    ]);
    assert!(stdout(&o).contains("vx,vy,m,"));
    let o = aztec(&[
        "stats",
        "--order",
        "40",
        "--samples",
        "1",
        "--seed",
        "3",
        "--convergence",
    ]);
    assert!(stdout(&o).contains("n,supnorm,central_dev"));
}

#[test]
fn verify_exact_suite_passes() {
    let o = aztec(&["verify", "--suite", "exact", "--quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(aztec(&["exact"]).status.code(), Some(2));
    assert_eq!(aztec(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(aztec(&["exact", "--order", "0"]).status.code(), Some(3));
    assert_eq!(aztec(&["asym", "--x", "0.9", "--y", "0.9"]).status.code(), Some(3));
    assert_eq!(aztec(&["exact", "--order", "3", "--bias", "2"]).status.code(), Some(3));
    let o = aztec(&["exact", "--order", "3", "--grid", "--at", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}
