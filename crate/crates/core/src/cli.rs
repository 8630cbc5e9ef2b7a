//! The `plotbridge` command line: `serve`, `render` and `mock-sce`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bridge::{serve, ServerConfig};
use crate::data::{load_csv, CsvOptions, DataSource};
use crate::mock_sce::{canonicalize, run_script_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BIND: i32 = 2;
pub const EXIT_RENDER: i32 = 3;
pub const EXIT_PROTOCOL: i32 = 4;

pub const DEFAULT_PORT: u16 = 8765;

#[derive(Debug, Parser)]
#[command(name = "plotbridge", version, about = "Visualization bridge server and tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the bridge server.
    Serve(ServeArgs),
    /// Render a GoG script, or a parallel-coordinates view, to SVG.
    Render(RenderArgs),
    /// Run a mock computing-environment script against a server.
    MockSce(MockArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "DVP_PORT", default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// CSV files here are bound as variables named by file stem.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Static UI bundle, served at `/` when the directory exists.
    #[arg(long, default_value = "ui")]
    pub ui_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// GoG script file.
    #[arg(required_unless_present = "parcoords")]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "800x500", value_parser = parse_size)]
    pub size: (u32, u32),
    /// Render these columns on parallel axes instead of a script.
    #[arg(long, value_delimiter = ',', conflicts_with = "script")]
    pub parcoords: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct MockArgs {
    #[arg(long, default_value = "http://127.0.0.1:8765")]
    pub server: String,
    /// Step script (JSON).
    pub script: PathBuf,
    /// Transcript file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Replace server-assigned ids with stable placeholders.
    #[arg(long)]
    pub canonical: bool,
}

/// Parses `WxH`. Zero is accepted here and rejected by the renderer.
pub fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("bad size {s:?}: {e}"));
    Ok((dim(w)?, dim(h)?))
}

/// Help and version requests succeed; anything else is a usage error.
pub fn usage_exit(e: &clap::Error) -> i32 {
    if e.use_stderr() {
        EXIT_USAGE
    } else {
        EXIT_OK
    }
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return usage_exit(&e);
        }
    };
    match cli.command {
        Command::Serve(a) => cmd_serve(a),
        Command::Render(a) => cmd_render(&a),
        Command::MockSce(a) => cmd_mock_sce(&a),
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime")
}

fn read_csv(path: &Path, name: &str) -> Result<DataSource, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let opts = CsvOptions {
        name: name.to_string(),
        ..CsvOptions::default()
    };
    load_csv(&bytes, &opts).map_err(|e| format!("{}: {e}", path.display()))
}

/// Every `*.csv` in `dir`, sorted by file name.
pub fn load_data_dir(dir: &Path) -> Result<Vec<(String, DataSource)>, String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            read_csv(p, &stem).map(|d| (stem, d))
        })
        .collect()
}

fn cmd_serve(a: ServeArgs) -> i32 {
    let preload = match a.data_dir.as_deref().map(load_data_dir).transpose() {
        Ok(p) => p.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let config = ServerConfig {
        static_dir: a.ui_dir.is_dir().then(|| a.ui_dir.clone()),
        preload,
        ..ServerConfig::default()
    };
    runtime().block_on(async move {
        let listener = match tokio::net::TcpListener::bind((a.host.as_str(), a.port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot bind {}:{}: {e}", a.host, a.port);
                return EXIT_BIND;
            }
        };
        match listener.local_addr() {
            Ok(addr) => tracing::info!("listening on http://{addr}"),
            Err(e) => tracing::warn!("local address unavailable: {e}"),
        }
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        match serve(listener, config, shutdown).await {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_BIND
            }
        }
    })
}

/// Produces the SVG text for `render`.
pub fn render_svg(a: &RenderArgs) -> Result<String, String> {
    let stem = a.data.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let data = read_csv(&a.data, &stem)?;
    if let Some(axes) = &a.parcoords {
        let refs: Vec<&str> = axes.iter().map(String::as_str).collect();
        let layout = crate::parcoords::layout(&data, &refs, 1.0).map_err(|e| e.to_string())?;
        return crate::render::render_parcoords(&layout, &data, &[], a.size).map_err(|e| e.to_string());
    }
    let path = a.script.as_deref().expect("clap requires a script without --parcoords");
    let source = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let scene = crate::gog::compile_script(&source, &data).map_err(|e| e.to_string())?;
    crate::render::render_scene(&scene, a.size, &[]).map_err(|e| e.to_string())
}

fn cmd_render(a: &RenderArgs) -> i32 {
    let svg = match render_svg(a) {
        Ok(svg) => svg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RENDER;
        }
    };
    match write_out(a.output.as_deref(), &svg) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RENDER
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| e.to_string())
        }
    }
}

fn cmd_mock_sce(a: &MockArgs) -> i32 {
    let outcome = runtime().block_on(run_script_file(&a.server, &a.script));
    let (session, failure) = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut transcript = session.transcript();
    if a.canonical {
        transcript = canonicalize(&transcript);
    }
    let text = serde_json::to_string_pretty(&transcript).expect("serializable");
    if let Err(e) = write_out(a.output.as_deref(), &text) {
        eprintln!("error: {e}");
        return EXIT_PROTOCOL;
    }
    match failure {
        None => EXIT_OK,
        Some(e) => {
            eprintln!("error: {e}");
            EXIT_PROTOCOL
        }
    }
}
