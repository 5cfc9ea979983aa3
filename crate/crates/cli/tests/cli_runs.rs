use std::path::Path;
use std::process::Command;

use proptest::prelude::*;

use rdgalerkin::problem::ProblemSpec;
use rdgalerkin_cli::custom::CustomProblem;
use rdgalerkin_cli::output::{fmt_value, NORMS_HEADER, SOLUTION_HEADER};
use rdgalerkin_cli::{parse_config, run_and_emit, EXIT_CONFIG, EXIT_IO, EXIT_PICARD};

fn run_in(dir: &Path, args: &str) -> Vec<String> {
    let argv = format!("rdgalerkin {args} --output-dir {}", dir.display());
    let cfg = parse_config(argv.split_whitespace()).unwrap();
    let mut out = Vec::new();
    run_and_emit(&cfg, &mut out).unwrap();
    String::from_utf8(out)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn zero_end_time_emits_the_projected_state_only() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_in(dir.path(), "--problem tp1 --dt 0.1 --t-end 0");
    assert_eq!(summary.len(), 1);
    let rows = read_rows(&dir.path().join("solution.csv"));
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
    assert!(!dir.path().join("norms.csv").exists());
}

#[test]
fn table_one_layout() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        "--problem tp1 --dt 0.1 --t-end 2 --degree 6 --report-times 1,2",
    );
    let text = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(SOLUTION_HEADER));
    let rows = read_rows(&dir.path().join("solution.csv"));
    assert_eq!(rows.len(), 42);
    for (k, r) in rows.iter().enumerate() {
        let x: f64 = r[0].parse().unwrap();
        let t: f64 = r[1].parse().unwrap();
        assert!((x - (k % 21) as f64 * 0.1).abs() < 1e-12);
        assert_eq!(t, if k < 21 { 1.0 } else { 2.0 });
    }
    let centre: f64 = rows[10][2].parse().unwrap();
    assert!((centre + 0.00877).abs() < 1e-3);
}

#[test]
fn convergence_study_has_blank_first_row() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        "--problem tp1 --dt 0.1 --t-end 10 --convergence-dts 0.4,0.2,0.1 --report-times 10",
    );
    let text = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], NORMS_HEADER);
    assert_eq!(lines[1], "4.00000000e-1,,,,");
    let l2: Vec<f64> = lines[2..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let ratio = l2[0] / l2[1];
    assert!((1.8..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = "--problem grayscott --dt 0.1 --t-end 2 --svg --convergence-dts 0.2,0.1";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_in(a.path(), args);
    run_in(b.path(), args);
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 2 + 3);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn emitted_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), "--problem grayscott --dt 0.1 --t-end 1");
    for row in read_rows(&dir.path().join("solution.csv")) {
        for field in row {
            assert_eq!(fmt_value(field.parse().unwrap()), field);
        }
    }
}

#[test]
fn custom_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tp1.json");
    std::fs::write(
        &path,
        CustomProblem::from(&ProblemSpec::builtin_tp1()).to_json(),
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_in(&a, "--problem tp1 --dt 0.1 --t-end 1");
    run_in(
        &b,
        &format!(
            "--problem custom --custom {} --dt 0.1 --t-end 1",
            path.display()
        ),
    );
    assert_eq!(
        std::fs::read(a.join("solution.csv")).unwrap(),
        std::fs::read(b.join("solution.csv")).unwrap()
    );
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_rdgalerkin"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        exit_code(&[
            "--problem",
            "tp1",
            "--dt",
            "0.1",
            "--t-end",
            "0.2",
            "-o",
            out
        ]),
        0
    );
    assert_eq!(
        exit_code(&["--problem", "tp1", "--t-end", "1"]),
        EXIT_CONFIG
    );
    assert_eq!(
        exit_code(&["--problem", "tp1", "--dt", "0.1", "--t-end", "1", "--nope"]),
        EXIT_CONFIG
    );
    assert_eq!(
        exit_code(&[
            "--problem",
            "tp1",
            "--dt",
            "0.1",
            "--t-end",
            "1",
            "--picard-max",
            "1",
            "-o",
            out
        ]),
        EXIT_PICARD
    );
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let nested = blocker.join("sub");
    assert_eq!(
        exit_code(&[
            "--problem",
            "tp1",
            "--dt",
            "0.1",
            "--t-end",
            "0",
            "-o",
            nested.to_str().unwrap()
        ]),
        EXIT_IO
    );
    assert_eq!(exit_code(&["--help"]), 0);
}

proptest! {
    #[test]
    fn nine_digit_format_is_a_fixed_point(v in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        let once = fmt_value(v);
        let back: f64 = once.parse().unwrap();
        prop_assert_eq!(fmt_value(back), once.clone());
        prop_assert!((back - v).abs() <= 5e-9 * v.abs());
    }
}
