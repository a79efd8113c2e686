use std::process::Command;

fn unihop(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_unihop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &std::process::Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_of_the_free_chain_is_one_ep() {
    let out = unihop(&[
        "spectrum",
        "--geometry",
        "chain",
        "--sites",
        "16",
        "--kappa1",
        "1",
        "--kappa2",
        "0",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    let clusters = v["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0]["ep_order"], 16);
}

#[test]
fn spectrum_of_the_forced_chain_is_a_ladder() {
    let out = unihop(&["spectrum", "--sites", "16", "--force", "0.6"]);
    let v = json(&out);
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 16);
    for (l, e) in eig.iter().enumerate() {
        assert!((e[0].as_f64().unwrap() - 0.6 * l as f64).abs() < 1e-9);
        assert!(e[1].as_f64().unwrap().abs() < 1e-10);
    }
}

#[test]
fn ring_spectrum_lies_on_the_unit_circle() {
    let v = json(&unihop(&[
        "spectrum",
        "--geometry",
        "ring",
        "--sites",
        "4",
        "--kappa1",
        "1",
    ]));
    for e in v["eigenvalues"].as_array().unwrap() {
        let (re, im) = (e[0].as_f64().unwrap(), e[1].as_f64().unwrap());
        assert!((re.hypot(im) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn engineer_reports_the_root() {
    let out = unihop(&[
        "engineer",
        "--theta",
        "1.5707963",
        "--x",
        "0.8",
        "--gamma-guess",
        "3+0.7i",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["root"]["sigma_residual"].as_f64().unwrap() < 1e-10);
    let g = &v["root"]["gamma"];
    assert!((g[0].as_f64().unwrap() - 3.0).abs() < 0.01);
    assert!((g[1].as_f64().unwrap() - 0.7).abs() < 0.01);
    assert!(String::from_utf8_lossy(&out.stderr).contains("|sigma|"));
}

#[test]
fn zero_duration_emits_the_initial_state() {
    let out = unihop(&["evolve", "--sites", "4", "--t-end", "0", "--site", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "t,site,re,im");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[3], "0.0,2,1.0,0.0");
}

#[test]
fn bloch_preset_writes_both_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2b.csv");
    let out = unihop(&["bloch", "--fig2b", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    let rev: f64 = summary
        .split("revival_error = ")
        .nth(1)
        .and_then(|s| s.split(',').next())
        .and_then(|s| s.parse().ok())
        .expect("summary carries the revival error");
    assert!(rev < 1e-4);
    let obs = std::fs::read_to_string(dir.path().join("fig2b_observables.csv")).unwrap();
    assert!(obs.starts_with("t,com,weight,revival"));
}

#[test]
fn presets_differ_only_in_kappa2() {
    let a = json(&unihop(&["bloch", "--fig2a", "--dump-config"]));
    let b = json(&unihop(&["bloch", "--fig2b", "--dump-config"]));
    let mut a2 = a.clone();
    a2["command"]["bloch"]["lattice"]["kappa2"] = b["command"]["bloch"]["lattice"]["kappa2"].clone();
    assert_eq!(a2, b);
    assert_ne!(a, b);
}

#[test]
fn dumped_config_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let args = [
        "evolve", "--sites", "6", "--t-end", "2", "--dt", "0.01", "--kappa1", "0.8-0.3i",
    ];
    let dumped = unihop(&[&args[..], &["--dump-config"]].concat());
    std::fs::write(&cfg, &dumped.stdout).unwrap();
    let direct = unihop(&args);
    let replay = unihop(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(direct.stdout, replay.stdout);
}

#[test]
fn rwa_table_decreases() {
    let out = unihop(&["rwa", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let d: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(d.len(), 3);
    assert!(d[0] > d[1] && d[1] > d[2]);
}

#[test]
fn dump_h_matches_the_ring_wrap() {
    let v = json(&unihop(&[
        "dump-h",
        "--geometry",
        "ring",
        "--sites",
        "2",
        "--kappa1",
        "1",
    ]));
    assert_eq!(v["entries"][1][0][0].as_f64(), Some(1.0));
    assert_eq!(v["entries"][0][1][0].as_f64(), Some(1.0));
}

#[test]
fn exit_codes() {
    assert_eq!(unihop(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(unihop(&["spectrum", "--sites", "notanumber"]).status.code(), Some(1));
    let bad = unihop(&["spectrum", "--sites", "0"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("validation"));
    assert_eq!(
        unihop(&["engineer", "--theta", "0", "--x", "0.8"]).status.code(),
        Some(2)
    );
    let stalled = unihop(&["engineer", "--theta", "1.57", "--x", "0.8", "--gamma-guess", "0"]);
    assert_eq!(stalled.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&stalled.stderr).contains("computation"));
    assert_eq!(
        unihop(&["spectrum", "--output", "/nonexistent-dir/x.json"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        unihop(&["run", "--config", "/nonexistent-dir/cfg.json"]).status.code(),
        Some(4)
    );
}

#[test]
fn infinite_window_warns_at_the_lower_edge() {
    let out = unihop(&[
        "evolve",
        "--geometry",
        "infinite",
        "--n-min",
        "-6",
        "--n-max",
        "0",
        "--t-end",
        "10",
        "--dt",
        "0.01",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}
