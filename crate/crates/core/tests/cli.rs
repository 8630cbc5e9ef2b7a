use std::net::TcpListener;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::json;

const BIN: &str = env!("CARGO_BIN_EXE_plotbridge");

const TOY_CSV: &str = "country,birth,death\nA,10,8\nB,20,12\nC,35,9\nD,14,14\nE,27,20\nF,31,11\n";

fn plotbridge(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("DVP_PORT").output().unwrap()
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

/// Kills the child on drop so a failing test never leaks a server.
struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn spawn_server(port_flag: Option<u16>, env_port: Option<u16>) -> Server {
    let mut cmd = Command::new(BIN);
    cmd.arg("serve").env_remove("DVP_PORT").stdout(Stdio::null()).stderr(Stdio::null());
    if let Some(p) = port_flag {
        cmd.args(["--port", &p.to_string()]);
    }
    if let Some(p) = env_port {
        cmd.env("DVP_PORT", p.to_string());
    }
    Server(cmd.spawn().unwrap())
}

fn welcome(port: u16) -> Option<serde_json::Value> {
    let deadline = Instant::now() + Duration::from_secs(10);
    let client = reqwest::blocking::Client::new();
    while Instant::now() < deadline {
        if let Ok(r) = client.get(format!("http://127.0.0.1:{port}/welcome")).send() {
            return r.json().ok();
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    None
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn serve_answers_welcome() {
    let port = free_port();
    let _srv = spawn_server(Some(port), None);
    let hello = welcome(port).expect("server came up");
    assert_eq!(hello["dvpId"], 0);
    assert_eq!(hello["endpoints"]["sse"], "/sse");
}

#[test]
fn port_comes_from_env_without_flag() {
    let port = free_port();
    let _srv = spawn_server(None, Some(port));
    assert!(welcome(port).is_some());
}

#[test]
fn flag_wins_over_env() {
    let (flag, env) = (free_port(), free_port());
    let _srv = spawn_server(Some(flag), Some(env));
    assert!(welcome(flag).is_some());
    assert!(reqwest::blocking::get(format!("http://127.0.0.1:{env}/welcome")).is_err());
}

#[test]
fn occupied_port_exits_2() {
    let holder = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port().to_string();
    let out = plotbridge(&["serve", "--port", &port]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot bind"));
}

#[cfg(unix)]
#[test]
fn interrupt_shuts_down_cleanly() {
    let port = free_port();
    let mut srv = spawn_server(Some(port), None);
    assert!(welcome(port).is_some());
    let sent = Command::new("kill").args(["-INT", &srv.0.id().to_string()]).status().unwrap();
    assert!(sent.success());
    let deadline = Instant::now() + Duration::from_secs(10);
    let status = loop {
        if let Some(s) = srv.0.try_wait().unwrap() {
            break s;
        }
        assert!(Instant::now() < deadline, "server ignored the interrupt");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert_eq!(status.code(), Some(0));
}

#[test]
fn serve_preloads_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "toy.csv", TOY_CSV);
    let script = write(dir.path(), "s.json", &json!([{"op": "connect"}, {"op": "fetch", "name": "toy"}]).to_string());
    let port = free_port();
    let mut cmd = Command::new(BIN);
    cmd.args(["serve", "--port", &port.to_string(), "--data-dir"])
        .arg(dir.path())
        .stdout(Stdio::null())
        .stderr(Stdio::null());
    let _srv = Server(cmd.spawn().unwrap());
    assert!(welcome(port).is_some());
    let out = plotbridge(&["mock-sce", "--server", &format!("http://127.0.0.1:{port}"), &script]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(t["variables"]["toy"]["rows"], 6);
}

#[test]
fn usage_errors_exit_1() {
    let out = plotbridge(&["render", "--data", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(plotbridge(&["serve", "--port", "notaport"]).status.code(), Some(1));
    assert_eq!(plotbridge(&["--help"]).status.code(), Some(0));
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "fig.gog", plotbridge::gog::EXAMPLE_SCRIPT);
    let data = write(dir.path(), "toy.csv", TOY_CSV);
    let out_path = dir.path().join("fig.svg");
    let out = plotbridge(&["render", &script, "--data", &data, "-o", out_path.to_str().unwrap(), "--size", "640x480"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(out_path).unwrap();
    roxmltree::Document::parse(&svg).unwrap();
    for label in ["Birth Rate", "Death Rate", "Zero Population Growth"] {
        assert!(svg.contains(label), "{label}");
    }
    assert!(svg.contains(r#"width="640""#));
}

#[test]
fn render_parcoords_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "toy.csv", TOY_CSV);
    let out = plotbridge(&["render", "--data", &data, "--parcoords", "birth,death"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let rows = doc.descendants().filter(|n| n.attribute("class") == Some("row")).count();
    assert_eq!(rows, 6);
}

#[test]
fn render_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "toy.csv", TOY_CSV);
    let missing = write(dir.path(), "m.gog", "ELEMENT: point(position(birth*gdp))");
    let out = plotbridge(&["render", &missing, "--data", &data]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gdp"));

    let good = write(dir.path(), "g.gog", plotbridge::gog::EXAMPLE_SCRIPT);
    assert_eq!(plotbridge(&["render", &good, "--data", &data, "--size", "0x0"]).status.code(), Some(3));

    let bad = write(dir.path(), "b.gog", "ELEMENT point(");
    assert_eq!(plotbridge(&["render", &bad, "--data", &data]).status.code(), Some(3));
    assert_eq!(plotbridge(&["render", &good, "--data", "/nonexistent.csv"]).status.code(), Some(3));
}

#[test]
fn mock_sce_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(
        dir.path(),
        "ok.json",
        &json!({"steps": [
            {"op": "connect"},
            {"op": "store", "name": "d", "random": {"rows": 20, "cols": 3, "seed": 1}},
            {"op": "figure.add", "source": "d"},
            {"op": "disconnect"}
        ]})
        .to_string(),
    )
    .to_string();
    let port = free_port();
    let _srv = spawn_server(Some(port), None);
    assert!(welcome(port).is_some());
    let server = format!("http://127.0.0.1:{port}");

    let transcript = dir.path().join("t.json");
    let out = plotbridge(&["mock-sce", "--server", &server, &script, "-o", transcript.to_str().unwrap(), "--canonical"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&transcript).unwrap()).unwrap();
    assert_eq!(t["steps"].as_array().unwrap().len(), 4);
    assert_eq!(t["dvpId"], "<dvpId:0>");

    let unreachable = plotbridge(&["mock-sce", "--server", "http://127.0.0.1:1", &script]);
    assert_eq!(unreachable.status.code(), Some(4));

    let waits = write(
        dir.path(),
        "wait.json",
        &json!([{"op": "connect"}, {"op": "await_selection", "timeoutMs": 200}]).to_string(),
    );
    let out = plotbridge(&["mock-sce", "--server", &server, &waits]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 1 (await_selection)"));
}
