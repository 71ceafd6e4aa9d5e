use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};
use std::time::Duration;

fn hagv() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hagv"));
    c.env("RUST_LOG", "warn");
    c
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &[][..],
        &["fly"][..],
        &["run"][..],
        &["serve", "--port", "x"][..],
    ] {
        let out = hagv().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn missing_scenario_is_diagnosed() {
    let out = hagv()
        .args(["run", "/nonexistent/x.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("/nonexistent/x.toml"), "{err}");
}

#[test]
fn invalid_scenario_is_diagnosed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "name = \"bad\"\nduration = -1.0\n").unwrap();
    let out = hagv().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bad"));
}

#[test]
fn runs_a_scenario_file_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let file = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/disturbance_recovery.toml"
    );
    let out = hagv()
        .args(["run", file, "--report", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("total"), "{stdout}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = hagv_sim::read_csv(text.as_bytes()).unwrap();
    assert!(rows.len() > 100);
}

#[test]
fn csv_to_stdout_by_builtin_name() {
    let out = hagv()
        .args(["run", "step_pitch", "--out", "-"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = hagv_sim::read_csv(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 28_001);
}

#[test]
fn lists_builtins() {
    let out = hagv().arg("list").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for (name, _) in hagv_sim::BUILTIN {
        assert!(text.lines().any(|l| l == *name));
    }
}

#[test]
fn serve_prints_its_endpoint() {
    let mut child = hagv()
        .args(["serve", "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    assert!(
        line.starts_with("teleop bridge on ws://127.0.0.1:"),
        "{line}"
    );
    let url = line.trim().rsplit(' ').next().unwrap().to_string();
    std::thread::sleep(Duration::from_millis(50));
    let port: u16 = url.rsplit(':').next().unwrap().parse().unwrap();
    assert!(std::net::TcpStream::connect(("127.0.0.1", port)).is_ok());
    child.kill().unwrap();
    child.wait().unwrap();
}

#[test]
fn serve_reads_port_from_env() {
    let out = hagv()
        .args(["serve", "--help"])
        .env("HAGV_PORT", "9123")
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("9123"));
}

#[test]
fn default_config_round_trips() {
    let out = hagv().arg("config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = hagv_core::Config::from_toml_str(&text).unwrap();
    assert_eq!(cfg, hagv_core::Config::default());
}
