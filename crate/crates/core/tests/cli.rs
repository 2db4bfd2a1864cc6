use imslab::cli::run;

fn ims(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ims").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn column(text: &str, row: usize, name: &str) -> String {
    let lines = body(text);
    let idx = lines[0].split(',').position(|c| c == name).unwrap();
    lines[row + 1].split(',').nth(idx).unwrap().to_string()
}

#[test]
fn spectrum_rows() {
    let (code, out, _) = ims(&["spectrum", "koebe", "--t", "1"]);
    assert_eq!(code, 0);
    assert_eq!(body(&out)[0], "t,beta_hat,regime,window,fit_residual,slope_min,slope_max");
    let b: f64 = column(&out, 0, "beta_hat").parse().unwrap();
    assert!((b - 2.0).abs() < 0.06);
    for key in ["schema_version", "k_min", "k_max", "window", "rtol", "map_id", "threads", "seed"] {
        assert!(out.contains(&format!("# {key} = ")), "{key}");
    }

    let (code, out, _) = ims(&["spectrum", "id", "--t", "3,-2", "--area"]);
    assert_eq!(code, 0);
    assert_eq!(column(&out, 0, "beta_hat"), "0.0");
    assert_eq!(column(&out, 1, "regime"), "Bounded");
    assert!(body(&out)[0].ends_with(",beta_area"));
}

#[test]
fn output_is_deterministic() {
    let args = ["curve", "fgamma(0.5)", "--t-range", "-1:2:1.5", "--threads", "2"];
    let (a, b) = (ims(&args), ims(&args));
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert_eq!(body(&a.1).len(), 4);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ims(&[]).0, 2);
    assert_eq!(ims(&["frobnicate"]).0, 2);
    let (code, _, err) = ims(&["spectrum", "prod(koebe", "--t", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("column"), "{err}");
    assert_eq!(ims(&["spectrum", "ggamma(1)", "--t", "1"]).0, 2);
    assert_eq!(ims(&["spectrum", "koebe", "--t", "1", "--window", "40"]).0, 2);
    assert_eq!(ims(&["norms", "koebe", "--j", "3"]).0, 2);
    assert_eq!(ims(&["search", "fgamma", "--interval", "0.1:1.0", "--t", "2"]).0, 2);
    assert_eq!(ims(&["verify", "--suite", "nope"]).0, 2);
    assert_eq!(ims(&["--version"]).0, 0);
}

#[test]
fn unchecked_parameters_lose_certification() {
    let (code, out, _) = ims(&["spectrum", "fgamma(1.5)", "--t", "-1", "--unchecked"]);
    assert_eq!(code, 0);
    assert!(out.contains("# certificate = Unknown"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# test\nwindow = 5\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, out, _) = ims(&["spectrum", "logmap", "--t", "2", "--config", cfg]);
    assert_eq!(code, 0);
    assert!(out.contains("# window = 5") && out.contains("# format = json"));
    let v: serde_json::Value = serde_json::from_str(&body(&out).join("\n")).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["rows"][0]["window"], 5);
    let (_, out, _) = ims(&["spectrum", "logmap", "--t", "2", "--config", cfg, "--window", "4", "--format", "csv"]);
    assert_eq!(column(&out, 0, "window"), "4");
    std::fs::write(dir.path().join("bad.conf"), "colour = blue\n").unwrap();
    assert_eq!(ims(&["families", "list", "--config", dir.path().join("bad.conf").to_str().unwrap()]).0, 2);
}

#[test]
fn out_file_and_cache_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("means.cache");
    let cache = cache.to_str().unwrap();
    let file = dir.path().join("rows.csv");
    let (code, out, _) =
        ims(&["spectrum", "koebe", "--t", "2", "--cache", cache, "--out", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&file).unwrap();
    let (_, again, _) = ims(&["spectrum", "koebe", "--t", "2", "--cache", cache]);
    assert_eq!(written, again);

    let (code, out, _) = ims(&["cache", "stats", "--cache", cache]);
    assert_eq!(code, 0);
    let records: usize = column(&out, 0, "records").parse().unwrap();
    assert!(records > 0);
    let (code, out, _) = ims(&["cache", "gc", "--cache", cache]);
    assert_eq!(code, 0);
    assert_eq!(column(&out, 0, "duplicate_lines"), "0");
}

#[test]
fn norms_and_catalog() {
    let (code, out, _) = ims(&["norms", "koebe", "--j", "2"]);
    assert_eq!(code, 0);
    let v: f64 = column(&out, 0, "value").parse().unwrap();
    assert!((v - 6.0).abs() < 1e-3);
    assert_eq!(body(&out).len(), 1 + 1 + 14);
    let (code, out, _) = ims(&["families", "list", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&body(&out).join("\n")).unwrap();
    assert_eq!(v["families"].as_array().unwrap().len(), 7);
}

#[test]
fn verify_suite_emits_reports() {
    let (code, out, _) = ims(&["verify", "--suite", "growth"]);
    assert_eq!(code, 0);
    let reports: serde_json::Value = serde_json::from_str(&body(&out).join("\n")).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);
    assert!(out.trim_end().lines().last().unwrap().starts_with("# PASS"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ims");
    let ok = std::process::Command::new(bin).args(["spectrum", "id", "--t", "3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = std::process::Command::new(bin).args(["spectrum"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
