use std::fs;
use std::process::{Command, Output};

fn pla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pla"))
        .args(args)
        .env_remove("PLA_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_total_and_triples() {
    let o = pla(&["count", "--alpha", "1.5", "--c", "sqrt2", "--eps", "0.1", "--N", "500"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total = v["count"].as_u64().unwrap();

    let o = pla(&["count", "--alpha", "1.5", "--N", "500", "--emit-triples"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,r,slack1,slack2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len() as u64, total);
    for row in rows {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[3] > 0.0 && f[4] > 0.0);
    }
}

#[test]
fn integral_json_keys() {
    let o = pla(&["integral", "--a", "1", "--b", "2", "--samples", "40", "--seed", "3", "--N", "300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["estimate", "stderr", "gn_ratio"] {
        assert!(v[key].as_f64().unwrap().is_finite(), "{key}");
    }
}

#[test]
fn expsum_csv() {
    let o = pla(&["expsum", "--kind", "zhk", "--H", "1,2", "--P", "2000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("H,P,U,K,value,bound,ratio,elapsed_ms"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 8 && !r[3].is_empty()));
    let o = pla(&["expsum", "--P", "1000"]);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[2], row[3]), ("", ""));
}

#[test]
fn checks_pass() {
    let o = pla(&["vaaler-check", "--degree", "1,4", "--uniform", "2000", "--adversarial", "100"]);
    assert!(o.status.success());
    let o = pla(&["vaughan-check", "--n-max", "1000", "--k-max", "1000"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn sieve_count_csv() {
    let o = pla(&["sieve-count", "--alpha", "1.37", "--c", "golden", "--N", "20736", "--eps", "0.12", "--max-product", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("d1,d2,d3,count,main_term,rel_err,E_value"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn jn_average_array() {
    let o = pla(&["jn-average", "--c", "golden", "--N", "25,64", "--samples", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[1]["N"], 64);
    let o = pla(&["jn-average", "--c", "golden", "--N", "100", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "eps = 0.4\nQ_max = 5\nprecision_bits = 32\n").unwrap();
    let o = pla(&["pipeline-3i", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("eps") && err.contains("precision_bits"), "{err}");
    let o = pla(&["count", "--alpha", "1.5", "--c", "sqrt(", "--N", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_3() {
    // Below U the identity's pieces vanish, so primes there are missed.
    let o = pla(&["vaughan-check", "--from", "2", "--n-max", "100", "--k-max", "10"]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn pipeline_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "c = sqrt2\nA = 1\nB = 2\na = 1.2\nb = 1.8\neps = 0.1\nQ_max = 12\nsamples = 30\nseed = 5\noutput_dir = {}\nworkers = 2\n",
            out.display()
        ),
    )
    .unwrap();
    let run = || {
        let o = pla(&["pipeline-3i", "--config", cfg.to_str().unwrap(), "--check"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("theorem3i.report.json")).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    assert!(out.join("theorem3i.timing.json").exists());

    let report = out.join("theorem3i.report.json");
    let o = pla(&["emit-plots", "--report", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for kind in ["ratio-vs-N", "ratio-vs-P", "bound-diagnostics"] {
        let csv = fs::read_to_string(out.join(format!("{kind}.csv"))).unwrap();
        assert!(csv.lines().count() > 1, "{kind}");
        assert!(out.join(format!("{kind}.schema.json")).exists());
    }
    let o = pla(&["emit-plots", "--report", report.to_str().unwrap(), "--kind", "pie"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_overrides_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cache = dir.path().join("cache");
    let o = Command::new(env!("CARGO_BIN_EXE_pla"))
        .args([
            "pipeline-3ii",
            "--set",
            "c=golden",
            "--set",
            "eps=0.12",
            "--set",
            "Q_max=5",
            "--set",
            "samples=10",
            "--set",
            &format!("output_dir={}", out.display()),
        ])
        .env("PLA_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("theorem3ii.report.json").exists());
    let cached: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(cached.len(), 1);
    let o = pla(&["pipeline-3ii", "--set", "eps=0.3"]);
    assert_eq!(o.status.code(), Some(2));
}
