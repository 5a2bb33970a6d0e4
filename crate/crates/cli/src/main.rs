use std::io::{self, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;
use tungstenite::Message;

use projector_core::jsonc::SyntaxTree;
use projector_core::menu::{menu_for, schema_search};
use projector_core::projection::Registry;
use projector_core::schema::SchemaDoc;
use projector_core::service::{document_diagnostics, serve_lines, Service};
use projector_core::tracery::{self, Grammar};

/// Headless projectional editing for JSON DSLs.
#[derive(Parser)]
#[command(name = "engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve JSON-RPC over stdio (default) or WebSocket.
    Serve {
        /// Listen for WebSocket connections on this port.
        #[arg(long, conflicts_with = "stdio")]
        port: Option<u16>,
        /// Read newline-delimited requests from stdin.
        #[arg(long)]
        stdio: bool,
    },
    /// Print diagnostics as JSON lines; exit 1 if any is an error.
    Check {
        file: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Print the menu at a byte offset.
    Menu {
        file: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        offset: usize,
    },
    /// Search a schema and print suggestions for an empty document.
    Search {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Tracery grammar tools.
    Tracery {
        #[command(subcommand)]
        command: TraceryCommand,
    },
}

#[derive(Subcommand)]
enum TraceryCommand {
    /// Expand a grammar with a seed.
    Expand {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = tracery::DEFAULT_DEPTH_LIMIT)]
        depth_limit: usize,
        /// Print the full expansion trace as JSON instead of the text.
        #[arg(long)]
        trace: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_schema(path: &Path) -> Result<SchemaDoc> {
    let text = read(path)?;
    SchemaDoc::load_with_uri(&text, &path.to_string_lossy()).with_context(|| format!("loading schema {}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ENGINE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Serve { port: Some(port), .. } => serve_ws(port)?,
        Command::Serve { .. } => serve_lines(&Service::new(), io::stdin().lock(), out)?,
        Command::Check { file, schema } => {
            let tree = SyntaxTree::parse(&read(&file)?);
            let schema = match schema {
                Some(p) => load_schema(&p)?,
                None => SchemaDoc::any(),
            };
            let diagnostics = document_diagnostics(&tree, &schema);
            for d in &diagnostics {
                writeln!(out, "{d}")?;
            }
            out.flush()?;
            if diagnostics.iter().any(|d| d["severity"] == "error") {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Menu { file, schema, offset } => {
            let tree = SyntaxTree::parse(&read(&file)?);
            let schema = load_schema(&schema)?;
            let menu = menu_for(&tree, &schema, &Registry::with_builtins(), offset)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&menu)?)?;
        }
        Command::Search { schema, query, limit } => {
            let schema = load_schema(&schema)?;
            for s in schema_search(&SyntaxTree::parse("{}"), &schema, &query, limit) {
                writeln!(out, "{}", serde_json::to_string(&s)?)?;
            }
        }
        Command::Tracery { command: TraceryCommand::Expand { file, seed, depth_limit, trace } } => {
            let text = read(&file)?;
            let grammar = Grammar::from_json(&text)?;
            let expansion = tracery::expand(&grammar, seed, depth_limit)?;
            if trace {
                writeln!(out, "{}", serde_json::to_string_pretty(&expansion)?)?;
            } else {
                writeln!(out, "{}", expansion.output)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve_ws(port: u16) -> Result<()> {
    let listener = TcpListener::bind(("127.0.0.1", port)).with_context(|| format!("binding port {port}"))?;
    log::info!("listening on ws://{}", listener.local_addr()?);
    let service = Arc::new(Service::new());
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let service = Arc::clone(&service);
        thread::spawn(move || {
            if let Err(e) = connection(&service, stream) {
                log::info!("connection closed: {e}");
            }
        });
    }
    Ok(())
}

fn connection(service: &Service, stream: TcpStream) -> Result<()> {
    let mut socket = tungstenite::accept(stream)?;
    loop {
        let reply = match socket.read()? {
            Message::Text(text) => service.handle_text(&text),
            Message::Binary(bytes) => match std::str::from_utf8(&bytes) {
                Ok(text) => service.handle_text(text),
                Err(_) => Some(invalid_utf8()),
            },
            Message::Close(_) => return Ok(()),
            _ => None,
        };
        if let Some(reply) = reply {
            socket.send(Message::text(reply))?;
        }
    }
}

fn invalid_utf8() -> String {
    let error = projector_core::service::RpcError::new(
        projector_core::service::rpc::PARSE_ERROR,
        "parseError",
        "message is not valid UTF-8",
    );
    projector_core::service::rpc::response(Value::Null, Err(error)).to_string()
}
