//! Daemon-mode integration: byte equivalence with one-shot runs,
//! resilience to malformed requests, and startup amortization.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

const EPOCH: &str = "1378036800"; // 2013-09-01T12:00:00Z

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_texsmith"));
    c.env("SOURCE_DATE_EPOCH", EPOCH);
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

struct Daemon {
    child: Child,
    stdin: std::process::ChildStdin,
    stdout: BufReader<std::process::ChildStdout>,
}

impl Daemon {
    fn spawn() -> Daemon {
        let mut child = bin()
            .arg("--daemon")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn daemon");
        let stdin = child.stdin.take().unwrap();
        let stdout = BufReader::new(child.stdout.take().unwrap());
        Daemon {
            child,
            stdin,
            stdout,
        }
    }

    fn request(&mut self, line: &str) -> serde_json::Value {
        writeln!(self.stdin, "{line}").unwrap();
        self.stdin.flush().unwrap();
        let mut response = String::new();
        self.stdout.read_line(&mut response).unwrap();
        serde_json::from_str(&response).unwrap_or_else(|e| panic!("{e}: {response:?}"))
    }
}

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn json_escape(p: &Path) -> String {
    p.display().to_string().replace('\\', "\\\\")
}

#[test]
fn daemon_output_bytes_equal_one_shot_output() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["book.tex", "plain.tex", "macros.tex"] {
        let input = fixture(name);
        let oneshot = dir.path().join(format!("oneshot-{name}.epub"));
        let status = bin()
            .args([
                input.to_str().unwrap(),
                "--format=epub",
                "--splitat=section",
                &format!("--dest={}", oneshot.display()),
            ])
            .status()
            .unwrap();
        assert!(status.success(), "{name}: one-shot failed");

        let via_daemon = dir.path().join(format!("daemon-{name}.epub"));
        let mut daemon = Daemon::spawn();
        let response = daemon.request(&format!(
            "{{\"source\":\"{}\",\"format\":\"epub\",\"splitat\":\"section\",\"dest\":\"{}\"}}",
            json_escape(&input),
            json_escape(&via_daemon)
        ));
        assert_eq!(response["status"], "ok", "{name}: {response}");

        let a = std::fs::read(&oneshot).unwrap();
        let b = std::fs::read(&via_daemon).unwrap();
        assert_eq!(a, b, "{name}: daemon and one-shot bytes differ");
    }
}

#[test]
fn daemon_survives_malformed_request_among_valid_ones() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("plain.tex");
    let mut daemon = Daemon::spawn();
    let mut statuses = Vec::new();
    for i in 0..11 {
        let line = if i == 5 {
            "{{{ this is not json".to_string()
        } else {
            let dest = dir.path().join(format!("out{i}.epub"));
            format!(
                "{{\"source\":\"{}\",\"format\":\"epub\",\"dest\":\"{}\"}}",
                json_escape(&input),
                json_escape(&dest)
            )
        };
        statuses.push(daemon.request(&line)["status"].as_str().unwrap().to_string());
    }
    assert_eq!(statuses.iter().filter(|s| *s == "ok").count(), 10);
    assert_eq!(statuses[5], "error");
}

#[test]
fn warm_daemon_job_is_faster_than_cold_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("book.tex");

    // cold: full process start including binding load
    let cold_dest = dir.path().join("cold.epub");
    let cold_start = Instant::now();
    let status = bin()
        .args([
            input.to_str().unwrap(),
            "--format=epub",
            &format!("--dest={}", cold_dest.display()),
        ])
        .status()
        .unwrap();
    let cold = cold_start.elapsed();
    assert!(status.success());

    // warm: second job on an already-running daemon
    let mut daemon = Daemon::spawn();
    let first = dir.path().join("warm1.epub");
    daemon.request(&format!(
        "{{\"source\":\"{}\",\"format\":\"epub\",\"dest\":\"{}\"}}",
        json_escape(&input),
        json_escape(&first)
    ));
    let second = dir.path().join("warm2.epub");
    let warm_start = Instant::now();
    let response = daemon.request(&format!(
        "{{\"source\":\"{}\",\"format\":\"epub\",\"dest\":\"{}\"}}",
        json_escape(&input),
        json_escape(&second)
    ));
    let warm = warm_start.elapsed();
    assert_eq!(response["status"], "ok");

    assert!(
        warm * 2 <= cold + Duration::from_millis(1),
        "warm {warm:?} not at least 2x faster than cold {cold:?}"
    );
}

#[test]
fn unix_socket_mode_serves_requests() {
    use std::os::unix::net::UnixStream;

    let dir = tempfile::tempdir().unwrap();
    let socket = dir.path().join("daemon.sock");
    let mut child = bin()
        .args(["--daemon", &format!("--socket={}", socket.display())])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    // wait for the socket to appear
    let deadline = Instant::now() + Duration::from_secs(5);
    while !socket.exists() && Instant::now() < deadline {
        std::thread::sleep(Duration::from_millis(20));
    }
    let stream = UnixStream::connect(&socket).expect("connect to daemon socket");
    let mut writer = stream.try_clone().unwrap();
    let mut reader = BufReader::new(stream);
    writeln!(writer, "{{\"text\":\"socket test\\n\"}}").unwrap();
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["status"], "ok");
    assert!(v["log"].as_str().unwrap().contains("socket test"));
    let _ = child.kill();
    let _ = child.wait();
}
