use std::process::Command;

fn harness() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lle-harness"))
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn analytic_spectrum_interval() {
    let out = harness()
        .args(["analytic-spectrum", "--domain", "interval", "--epsilon", "0.05", "--k", "8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("j,lambda,nu,phase,kind,residual\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 8);
    assert_eq!(r[0][1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn compare_writes_report_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = harness()
            .args(["compare", "--domain", "interval", "--epsilon", "0.05", "--n", "2000", "--k", "8", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        out
    };
    let a = run("a");
    let report = std::fs::read_to_string(a.join("report.csv")).unwrap();
    let r = rows(&report);
    assert_eq!(r.len(), 8);
    let lle: Vec<f64> = r.iter().map(|row| row[6].parse().unwrap()).collect();
    assert!(lle.windows(2).all(|w| w[0] < w[1]), "{lle:?}");
    for f in ["convergence.svg", "errors.svg", "runs.csv", "eigenvalues_2000.csv"] {
        assert!(a.join(f).exists(), "{f}");
    }

    let b = run("b");
    for f in ["report.csv", "runs.csv", "eigenvalues_2000.csv", "convergence.svg", "errors.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_flag_prints_usage() {
    let out = harness().args(["compare", "--frobnicate"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn subcritical_run_is_refused() {
    let out = harness().args(["sample", "--domain", "disc", "--m", "41"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("allow-subcritical"));
    let ok = harness().args(["sample", "--domain", "disc", "--m", "41", "--allow-subcritical"]).output().unwrap();
    assert!(ok.status.success());
    assert!(rows(&String::from_utf8(ok.stdout).unwrap()).iter().all(|r| r.len() == 2));
}

#[test]
fn appendix_demo_emits_slopes() {
    let out = harness().args(["appendix-demo", "--beta", "1.5707963267948966"]).output().unwrap();
    assert!(out.status.success());
    let r = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(r.len(), 4);
    assert!(r[1..].iter().all(|row| row[2].parse::<f64>().unwrap() < -0.5));
}
