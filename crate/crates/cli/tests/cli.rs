use std::process::{Command, Output};

use qkdaudit::entropy_rates::Qber;
use qkdaudit::pipeline::{run_protocol, CodeChoice, EccMode, ProtocolConfig, ProtocolReport};
use serde_json::Value;

fn qkdaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdaudit")).args(args).env_remove("QKDAUDIT_FORMAT").output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = qkdaudit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

#[test]
fn threshold_golden() {
    assert_eq!(
        stdout_ok(&["threshold", "--rate", "shannon", "--format", "csv"]),
        "rate,qber_max,h_bound,empty_region,unconstrained\nshannon,0.015026,0.112518,false,false\n"
    );
    let ldpc = json(&["threshold", "--rate", "0.877328"]);
    assert!((ldpc["qber_max"].as_f64().unwrap() - 0.0021).abs() < 2e-4);
}

#[test]
fn empty_region_is_a_domain_error() {
    let out = qkdaudit(&["threshold", "--rate", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("empty feasibility region"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn flag_errors_exit_two() {
    for args in [
        &["threshold", "--rate", "1.5"][..],
        &["threshold", "--rate", "abc"],
        &["threshold"],
        &["audit-code", "--n-total", "4", "--k-info", "7", "--operating-qber", "0.01"],
        &["rates", "--qber-step", "0"],
        &["rates", "--qber-end", "0.6"],
        &["distance", "--n", "5", "--epsilon", "0.1"],
        &["simulate", "--qber", "0.02", "--raw-len", "10"],
        &["markov", "--epsilon", "0.1", "--precision", "0"],
    ] {
        assert_eq!(qkdaudit(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(qkdaudit(&["simulate", "--qber", "0.02", "--attack", "joint"]).status.code(), Some(3));
}

#[test]
fn rates_golden_row() {
    let csv = stdout_ok(&[
        "rates",
        "--sifted-len",
        "10000",
        "--qber-start",
        "0.05",
        "--qber-end",
        "0.05",
        "--f",
        "1.0",
        "--format",
        "csv",
    ]);
    assert_eq!(
        csv,
        "sifted_len,qber,f_factor,mu,code_rate,h_q,leak_heuristic,leak_padded,parity_bits,h_min,key_len_n,net_bits,feasible\n\
         10000,0.05,1,0,0.713603,0.286397,2863.97,4013.39,4013,7136.03,1019,-2994,false\n"
    );
}

#[test]
fn rates_zero_row_and_threshold_bracket() {
    let rows = json(&["rates", "--qber-start", "0", "--qber-end", "0.02", "--qber-step", "0.001"]);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0]["leak_heuristic"], 0.0);
    assert_eq!(rows[0]["leak_padded"], 0.0);
    assert_eq!(rows[0]["net_bits"], 10_000 / 7);
    let flags: Vec<bool> = rows.iter().map(|r| r["feasible"].as_bool().unwrap()).collect();
    let flip = flags.iter().position(|f| !f).unwrap();
    assert!(flags[..flip].iter().all(|&f| f) && flags[flip..].iter().all(|&f| !f));
    let q_flip = rows[flip]["qber"].as_f64().unwrap();
    assert!(q_flip > 0.015 && q_flip <= 0.016, "{q_flip}");
}

#[test]
fn audit_code_examples() {
    let ldpc = json(&["audit-code", "--n-total", "8160", "--k-info", "7159", "--operating-qber", "0.01"]);
    assert_eq!(ldpc["rate"], 0.877328);
    assert_eq!(ldpc["verdict"], "INFEASIBLE");
    assert!((ldpc["max_feasible_qber"].as_f64().unwrap() - 0.0021).abs() < 2e-4);
    for q in ["0", "0.001", "0.2", "0.49"] {
        let hamming = json(&["audit-code", "--n-total", "7", "--k-info", "4", "--operating-qber", q]);
        assert_eq!(hamming["verdict"], "INFEASIBLE");
        assert_eq!(hamming["empty_region"], true);
    }
    let good = json(&["audit-code", "--n-total", "100", "--k-info", "95", "--operating-qber", "0.001"]);
    assert_eq!(good["h_bound"], 0.631579);
    assert_eq!(good["verdict"], "FEASIBLE");
}

#[test]
fn module_pass_through_goldens() {
    assert_eq!(
        stdout_ok(&["counterexample", "--code", "repetition3", "--format", "csv"]),
        "code,n_total,k_info,pac,observation_groups,nominal_p1_s,p1_s,p1_l,p1_k,monotone,baseline_p1_s,baseline_p1_l,baseline_p1_k\n\
         repetition3,3,1,identity,2,0.5,0.25,1,1,true,0.125,0.5,0.5\n"
    );
    assert_eq!(
        stdout_ok(&["markov", "--epsilon", "1e-6", "--double", "--format", "csv"]),
        "epsilon,stages,sigma,sigma2,failure,analytic_sigma,asymptotic_failure\n1e-06,2,0.01,0.01,0.029701,0.01,0.03\n"
    );
    assert_eq!(
        stdout_ok(&["distance", "--n", "4", "--epsilon", "0.1", "--format", "csv"]),
        "n,epsilon,v,guessing,uniform_guessing,theorem1_bound,gap,operational_guarantee\n\
         4,0.1,0.1,0.3,0.25,0.35,0.05,0.714159\n"
    );
}

#[test]
fn format_default_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qkdaudit"))
        .args(["distance", "--n", "2", "--epsilon", "0"])
        .env("QKDAUDIT_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("n,epsilon,"));
}

#[test]
fn json_is_one_newline_terminated_document() {
    for args in [
        &["threshold", "--rate", "shannon"][..],
        &["rates", "--qber-end", "0.01"],
        &["counterexample", "--code", "hamming74"],
        &["simulate", "--qber", "0.03", "--raw-len", "2048"],
    ] {
        let s = stdout_ok(args);
        assert!(s.ends_with("}\n") || s.ends_with("]\n"), "{args:?}");
        let v: Value = serde_json::from_str(&s).unwrap();
        assert!(v.is_object() || v.is_array());
    }
}

#[test]
fn simulate_json_round_trips_at_full_precision() {
    for (code, mode) in [("hamming74", "padded"), ("ideal", "padded"), ("repetition3", "syndrome")] {
        let s = stdout_ok(&[
            "simulate",
            "--qber",
            "0.03",
            "--raw-len",
            "8192",
            "--seed",
            "11",
            "--code",
            code,
            "--mode",
            mode,
            "--precision",
            "17",
        ]);
        let parsed: ProtocolReport = serde_json::from_str(&s).unwrap();
        let mode = if mode == "syndrome" { EccMode::Syndrome } else { EccMode::PaddedParity };
        let cfg = ProtocolConfig::new(8192, Qber::new(0.03).unwrap(), code.parse::<CodeChoice>().unwrap())
            .with_mode(mode)
            .with_seed(11);
        assert_eq!(parsed, run_protocol(&cfg).unwrap());
    }
}

#[test]
fn simulate_csv_has_flattened_ledger() {
    let csv = stdout_ok(&["simulate", "--qber", "0.01", "--raw-len", "4096", "--format", "csv"]);
    let header = csv.lines().next().unwrap();
    for col in [
        "ledger.sifted_bits",
        "ledger.check_bits_sacrificed",
        "ledger.discarded_bits",
        "ledger.reconciled_bits",
        "ledger.pad_bits_spent",
        "ledger.key_bits_generated",
        "ledger.net_bits",
    ] {
        assert!(header.split(',').any(|h| h == col), "{col}");
    }
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sweep_rows_follow_grid_order() {
    let rows = json(&["sweep", "--qbers", "0.01,0.04", "--codes", "hamming74,ideal", "--raw-len", "2048"]);
    let got: Vec<(f64, String)> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["qber"].as_f64().unwrap(), r["code"].as_str().unwrap().to_string()))
        .collect();
    let want: Vec<(f64, String)> = [(0.01, "hamming74"), (0.01, "ideal"), (0.04, "hamming74"), (0.04, "ideal")]
        .iter()
        .map(|&(q, c)| (q, c.to_string()))
        .collect();
    assert_eq!(got, want);
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("qkdaudit-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let out = stdout_ok(&["threshold", "--rate", "shannon", "--output", path.to_str().unwrap()]);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout_ok(&["threshold", "--rate", "shannon"]));
    std::fs::remove_dir_all(&dir).unwrap();
}
