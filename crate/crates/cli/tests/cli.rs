use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ssguard_core::report::{DiagnosticReport, Verdict};

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn ssguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssguard")).args(args).output().unwrap()
}

fn fixture(family: &str, params: &[&str]) -> PathBuf {
    let out = tmp(&format!("{family}-{}.ssp", params.join("_")));
    let mut args = vec!["fixture", family];
    args.extend_from_slice(params);
    args.extend_from_slice(&["-o", out.to_str().unwrap()]);
    let o = ssguard(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn report(o: &Output) -> DiagnosticReport {
    DiagnosticReport::from_jsonl(std::str::from_utf8(&o.stdout).unwrap()).unwrap()
}

/// Drops the timing field, the only nondeterministic part of a report.
fn strip_timing(text: &[u8]) -> String {
    String::from_utf8_lossy(text)
        .lines()
        .map(|l| match l.find(",\"wall_ms\"") {
            Some(i) => format!("{}}}", &l[..i]),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn trivial_profile_passes() {
    let f = fixture("trivial", &[]);
    let o = ssguard(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&o);
    assert!(!r.entries.is_empty());
    assert!(r.entries.iter().all(|e| matches!(e.verdict, Verdict::Pass | Verdict::Info)));
}

#[test]
fn burgers_vortex_fails_the_residuals() {
    let f = fixture("burgers", &[]);
    let o = ssguard(&["residual", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(report(&o).entries.iter().any(|e| e.verdict == Verdict::Fail && e.name.starts_with("res.")));
}

#[test]
fn gamma_bound_prints_the_number() {
    let o = ssguard(&["criteria", "--gamma-bound", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "0.4");
}

#[test]
fn malformed_header_names_the_field() {
    let f = fixture("trivial", &[]);
    let bytes = std::fs::read(&f).unwrap();
    let text = String::from_utf8_lossy(&bytes);
    let line = text.lines().find(|l| l.trim_start().starts_with("gamma")).unwrap().to_string();
    let bad = tmp("bad-gamma.ssp");
    std::fs::write(&bad, text.replacen(&line, "gamma = \"fast\"", 1)).unwrap();
    let o = ssguard(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_file_and_bad_usage_exit_two() {
    assert_eq!(ssguard(&["check", tmp("nope.ssp").to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ssguard(&["frobnicate"]).status.code(), Some(2));
    let f = fixture("trivial", &[]);
    assert_eq!(ssguard(&["check", f.to_str().unwrap(), "--tol-scale", "0"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let f = fixture("linear-strain", &["gamma=0.45"]);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ssguard"))
            .env("SSGUARD_THREADS", threads)
            .args(["check", f.to_str().unwrap()])
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(strip_timing(&a.stdout), strip_timing(&b.stdout));
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn off_axis_zero_forces_half() {
    let f = fixture("off-axis-zero", &[]);
    let o = ssguard(&["axisym", f.to_str().unwrap(), "fixed-points"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    let hit = r.entries.iter().find(|e| e.verdict == Verdict::Fail && e.name.contains("swirl_gamma")).unwrap();
    assert!(hit.note.as_deref().unwrap_or("").starts_with("at ("));
}

#[test]
fn criteria_report_on_series() {
    let t: Vec<f64> = (0..60).map(|k| 1.0 - 10f64.powf(-(k as f64) / 10.0)).collect();
    let write = |name: &str, f: &dyn Fn(f64) -> f64| {
        let p = tmp(name);
        std::fs::write(&p, t.iter().map(|&t| format!("{t} {}\n", f(t))).collect::<String>()).unwrap();
        p
    };
    // ell ~ (1-t)^0.2 stays well inside the finite regime
    let h = write("holder.txt", &|t| (1.0 - t).powf(-0.6));
    let e = write("energy.txt", &|_| 1.0);
    let o = ssguard(&[
        "criteria", "--ell-mu", "--holder", h.to_str().unwrap(), "--energy", e.to_str().unwrap(), "--mu", "0.5",
        "--viscous", "--gamma", "0.75", "--budget", "1", "--amplitude", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    let v = r.entries.iter().find(|e| e.name == "criteria.viscous").unwrap();
    assert!((v.residual.0 - 16.0 * (1.0 + 16.0 / 1.5)).abs() < 1e-9, "{:?}", v.residual);
    assert!(r.entries.iter().any(|e| e.name == "criteria.ell_mu"));
}

#[test]
fn table_format_is_text() {
    let o = ssguard(&["--format", "table", "criteria", "--viscous", "--gamma", "0.75"]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("criteria.viscous") && !s.trim_start().starts_with('{'), "{s}");
}
