use std::process::Command;

use percap_cli::output::{
    capacity_rows_csv, fmt_num, parse_capacity_csv, parse_record, ResultItem,
};
use percap_cli::run_with;
use percap_core::{kappa_c, SolverConfig};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("percap").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

#[test]
fn headline_capacity_json() {
    let rec = parse_record(&ok(&["capacity", "--kappa", "0", "--level", "2f"])).unwrap();
    assert_eq!(rec.schema_version, "1");
    assert_eq!(rec.command, "capacity");
    let r = rec.capacities().next().unwrap();
    assert!((r.alpha_c - 0.8330786).abs() < 1e-5);
    assert!(rec.warnings.is_empty());
}

#[test]
fn level_one_csv_row() {
    let out = ok(&[
        "capacity", "--kappa", "0", "--level", "1", "--format", "csv",
    ]);
    let rows = parse_capacity_csv(&out).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].alpha_c - 1.2732).abs() < 5e-5);
    assert_eq!(rows[0].p2, None);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn table_three_layout() {
    let out = ok(&["table", "3", "--format", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "level,-0.4,-0.2,0,0.2,0.4,0.6,0.8,1,1.2");
    let want = [
        (
            "1",
            [
                2.5222, 1.7715, 1.2732, 0.9353, 0.7014, 0.5363, 0.4176, 0.3308, 0.2661,
            ],
        ),
        (
            "2p",
            [
                1.6407, 1.2695, 1.0, 0.8006, 0.6506, 0.5358, 0.4176, 0.3308, 0.2661,
            ],
        ),
        (
            "2f",
            [
                1.4468, 1.0888, 0.8331, 0.6474, 0.5105, 0.4081, 0.3304, 0.2707, 0.2243,
            ],
        ),
    ];
    for (line, (label, row)) in lines[1..].iter().zip(want) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[0], label);
        for (c, w) in cells[1..].iter().zip(row) {
            let v: f64 = c.parse().unwrap();
            assert!((v - w).abs() < 1e-3, "{label}: {v} vs {w}");
        }
    }
}

#[test]
fn table_two_rows() {
    let out = ok(&["table", "2", "--format", "csv"]);
    let labels: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(labels, ["p2", "q2s", "alpha_c"]);
    assert!(out.lines().all(|l| l.split(',').count() == 11));
}

#[test]
fn table_one_has_all_levels() {
    let rows = parse_capacity_csv(&ok(&["table", "1", "--format", "csv"])).unwrap();
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha_c).collect();
    assert!((alphas[0] - 1.2732).abs() < 5e-5);
    assert!((alphas[1] - 1.0).abs() < 1e-12);
    assert!((alphas[2] - 0.8331).abs() < 5e-5);
    assert!((rows[0].gamma_sq.unwrap() - 0.3989).abs() < 5e-5);
}

#[test]
fn curve_json_round_trip_is_byte_identical() {
    let out = ok(&[
        "curve",
        "--kappa-min",
        "-0.6",
        "--kappa-max",
        "1.2",
        "--step",
        "0.3",
    ]);
    let rec = parse_record(&out).unwrap();
    assert_eq!(rec.results.len(), 7);
    assert_eq!(rec.to_json(), out);
}

#[test]
fn curve_csv_round_trip_is_byte_identical() {
    let out = ok(&[
        "curve",
        "--kappa-min",
        "-1",
        "--kappa-max",
        "2",
        "--step",
        "0.25",
        "--level",
        "2p",
        "--format",
        "csv",
    ]);
    let rows = parse_capacity_csv(&out).unwrap();
    assert_eq!(rows.len(), 13);
    assert_eq!(capacity_rows_csv(&rows), out);
}

#[test]
fn csv_numbers_are_rounded_json_numbers() {
    let args = [
        "curve",
        "--kappa-min",
        "-0.4",
        "--kappa-max",
        "1.2",
        "--step",
        "0.4",
    ];
    let rec = parse_record(&ok(&args)).unwrap();
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv = ok(&csv_args);
    for (line, r) in csv.lines().skip(1).zip(rec.capacities()) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], fmt_num(r.kappa));
        assert_eq!(cells[2], fmt_num(r.alpha_c));
        assert_eq!(cells[3], fmt_num(r.p2.unwrap()));
        assert_eq!(cells[4], fmt_num(r.q2s.unwrap()));
        assert_eq!(cells[6], fmt_num(r.residual));
    }
}

#[test]
fn kappa_c_full_precision() {
    let core = kappa_c(&SolverConfig::kappa_c()).unwrap().x;
    let rec = parse_record(&ok(&["kappa-c"])).unwrap();
    match &rec.results[0] {
        ResultItem::KappaC(k) => assert_eq!(k.kappa_c.to_bits(), core.to_bits()),
        other => panic!("unexpected {other:?}"),
    }
    let csv = ok(&["kappa-c", "--format", "csv"]);
    let cell = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_string();
    assert_eq!(cell, fmt_num(core));
    assert!((core - 0.602957).abs() < 1e-5);
}

#[test]
fn uniqueness_scan() {
    let out = ok(&["uniqueness", "--kappa", "0", "--format", "csv"]);
    assert_eq!(out.lines().next().unwrap(), "q2s,residual");
    assert_eq!(out.lines().count(), 65);
    let rec = parse_record(&ok(&["uniqueness", "--kappa", "0"])).unwrap();
    assert_eq!(rec.parameters["sign_changes"], 1);
    assert!(matches!(rec.results[0], ResultItem::Scan(_)));
}

#[test]
fn simulate_by_alpha() {
    let rec = parse_record(&ok(&[
        "simulate", "--n", "10", "--alpha", "0.1,1.5", "--trials", "20", "--seed", "3",
    ]))
    .unwrap();
    let est: Vec<_> = rec
        .results
        .iter()
        .map(|r| match r {
            ResultItem::Estimate(e) => e.clone(),
            other => panic!("unexpected {other:?}"),
        })
        .collect();
    assert_eq!(est[0].m, 1);
    assert_eq!(est[1].m, 15);
    assert_eq!(est[0].rate, 1.0);
}

#[test]
fn threshold_small_n() {
    let rec = parse_record(&ok(&[
        "threshold",
        "--n",
        "10",
        "--trials",
        "60",
        "--seed",
        "9",
    ]))
    .unwrap();
    match &rec.results[0] {
        ResultItem::Threshold(t) => assert!(t.alpha_hat > 0.0 && t.alpha_hat < 2.0),
        other => panic!("unexpected {other:?}"),
    }
    assert!(!rec.warnings.is_empty());
}

#[test]
fn hex_and_decimal_seeds_agree() {
    let base = [
        "simulate", "--n", "8", "--m", "6", "--trials", "10", "--method", "local",
    ];
    let mut a = base.to_vec();
    a.extend(["--seed", "0x1F"]);
    let mut b = base.to_vec();
    b.extend(["--seed", "31"]);
    assert_eq!(ok(&a), ok(&b));
}

#[test]
fn out_file_receives_output() {
    let path = std::env::temp_dir().join(format!("percap-out-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let stdout = ok(&[
        "capacity", "--kappa", "0.2", "--level", "1", "--format", "csv", "--out", p,
    ]);
    assert!(stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(written.starts_with("kappa,level,alpha_c"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).0;
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["capacity", "--kappa", "0", "--bogus"]), 1);
    assert_eq!(code(&["capacity", "--kappa", "0", "--level", "3"]), 1);
    assert_eq!(code(&["capacity", "--kappa", "2.5"]), 1);
    assert_eq!(code(&["capacity", "--kappa", "0", "--nodes", "1"]), 1);
    assert_eq!(code(&["capacity", "--kappa", "0", "--tol", "-1"]), 1);
    assert_eq!(code(&["simulate", "--m", "3", "--seed", "0xZZ"]), 1);
    assert_eq!(code(&["table", "4"]), 1);
    assert_eq!(
        code(&[
            "curve",
            "--kappa-min",
            "1",
            "--kappa-max",
            "0",
            "--step",
            "0.1"
        ]),
        1
    );
    assert_eq!(
        code(&["capacity", "--kappa", "6", "--allow-extrapolation"]),
        2
    );
    assert_eq!(code(&["capacity", "--kappa", "0", "--tol", "1e-300"]), 2);
    assert_eq!(code(&["simulate", "--n", "30", "--m", "5"]), 3);
    assert_eq!(
        code(&[
            "threshold",
            "--n",
            "6",
            "--kappa",
            "-1000000",
            "--trials",
            "3"
        ]),
        3
    );
}

#[test]
fn convergence_failure_prints_diagnostics() {
    let (code, out, err) = run(&["capacity", "--kappa", "6", "--allow-extrapolation"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("not bracketed") && err.contains("q2s,residual"));
}

#[test]
fn extrapolation_warns() {
    let rec = parse_record(&ok(&[
        "capacity",
        "--kappa",
        "-1.1",
        "--allow-extrapolation",
    ]))
    .unwrap();
    assert!(rec.capacities().next().unwrap().extrapolated);
    assert_eq!(rec.warnings.len(), 1);
}

#[test]
fn partial_curve_failure_keeps_good_points() {
    let (code, out, _) = run(&[
        "curve",
        "--kappa-min",
        "1",
        "--kappa-max",
        "7",
        "--step",
        "2",
        "--allow-extrapolation",
    ]);
    assert_eq!(code, 2);
    let rec = parse_record(&out).unwrap();
    assert!(!rec.results.is_empty() && rec.results.len() < 4);
    assert!(rec.warnings.iter().any(|w| w.contains("not bracketed")));
}

fn binary(args: &[&str], threads: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_percap"))
        .args(args)
        .env("PERCAP_THREADS", threads)
        .output()
        .unwrap()
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "simulate", "--n", "12", "--m", "8,12,16", "--trials", "40", "--seed", "5",
    ];
    let one = binary(&args, "1");
    let four = binary(&args, "4");
    let auto = binary(&args, "0");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);
}

#[test]
fn binary_exit_codes() {
    assert_eq!(
        binary(&["capacity", "--kappa", "0", "--level", "1"], "0")
            .status
            .code(),
        Some(0)
    );
    assert_eq!(binary(&["capacity"], "0").status.code(), Some(1));
    assert_eq!(binary(&["kappa-c"], "lots").status.code(), Some(1));
    assert_eq!(
        binary(&["simulate", "--n", "27", "--m", "2"], "0")
            .status
            .code(),
        Some(3)
    );
}
