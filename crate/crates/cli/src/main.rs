use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread::sleep;
use std::time::{Duration, SystemTime};

use augvis_core::artifacts::{anchor_payload, local_id, render_preview, render_reference, render_virtual, DEFAULT_HUB};
use augvis_core::augment::{compile, expand_placeholders, Compiled};
use augvis_core::spec::{parse_spec, validate_schema, AppendSource, Spec};
use augvis_core::validator::{validate_compiled, Verdict};
use augvis_hub::Store;
use clap::{Parser, Subcommand};
use serde_json::json;

const OK: u8 = 0;
const USAGE: u8 = 1;
const INVALID: u8 = 2;
const COMPILE: u8 = 3;

#[derive(Parser)]
#[command(name = "augvis", version, about = "Compile, validate and publish augmented static visualizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write static.svg, virtual.svg, preview.svg and anchor.json.
    Compile {
        spec: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override every placeholder seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Hub address recorded in the anchor payload.
        #[arg(long, env = "PAPAR_HUB", default_value = DEFAULT_HUB)]
        hub: String,
        #[arg(long)]
        watch: bool,
    },
    /// Check that the virtual layer leaves the static layer unchanged.
    Validate {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        watch: bool,
    },
    /// Print the rows placeholders expand to.
    Mock {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Upload the spec to a hub and print the receipt.
    Publish {
        spec: PathBuf,
        #[arg(long, env = "PAPAR_HUB", default_value = DEFAULT_HUB)]
        hub: String,
        /// Publish even when validation fails.
        #[arg(long)]
        force: bool,
    },
    /// Run the hub.
    Serve {
        #[arg(long, default_value_t = 7070)]
        port: u16,
        #[arg(long, default_value = "augvis-store")]
        store: PathBuf,
        /// Directory of editor assets served at `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

struct Failure(u8, String);

/// Write to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

type Outcome = Result<u8, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure(USAGE, format!("{}: {e}", path.display()))
}

fn load(path: &Path, seed: Option<u64>) -> Result<(String, Spec), Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut spec = parse_spec(&text).map_err(|e| Failure(COMPILE, format!("parse: {e}")))?;
    let issues = validate_schema(&spec);
    if !issues.is_empty() {
        let lines: Vec<String> = issues.iter().map(|i| format!("schema: {i}")).collect();
        return Err(Failure(COMPILE, lines.join("\n")));
    }
    if let Some(seed) = seed {
        spec.set_placeholder_seed(seed);
    }
    Ok((text, spec))
}

fn build(spec: &Spec) -> Result<Compiled, Failure> {
    compile(spec).map_err(|e| Failure(COMPILE, e.to_string()))
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| io_err(&path, e))
}

fn cmd_compile(spec_path: &Path, out: &Path, seed: Option<u64>, hub: &str) -> Outcome {
    let (_, spec) = load(spec_path, seed)?;
    let compiled = build(&spec)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let payload = anchor_payload(&spec, &local_id(&spec), 1, hub);
    write(out, "static.svg", &render_reference(&compiled, &payload))?;
    match render_virtual(&compiled) {
        Some(v) => write(out, "virtual.svg", &v)?,
        None => {
            let _ = fs::remove_file(out.join("virtual.svg"));
            eprintln!("note: no ar block, virtual.svg not written");
        }
    }
    write(out, "preview.svg", &render_preview(&compiled))?;
    write(out, "anchor.json", &format!("{}\n", payload.to_canonical()))?;
    Ok(OK)
}

fn cmd_validate(spec_path: &Path, as_json: bool) -> Outcome {
    let (_, spec) = load(spec_path, None)?;
    let compiled = build(&spec)?;
    let report = validate_compiled(&spec, &compiled).map_err(|e| Failure(COMPILE, e.to_string()))?;
    if as_json {
        emit(&format!("{}\n", serde_json::to_string_pretty(&report.to_json()).unwrap()));
    } else {
        emit(&report.to_text());
    }
    Ok(if report.verdict == Verdict::Invalid { INVALID } else { OK })
}

fn cmd_mock(spec_path: &Path, seed: Option<u64>) -> Outcome {
    let (_, spec) = load(spec_path, seed)?;
    let Some(ar) = &spec.ar else {
        return Err(Failure(USAGE, "spec has no ar block".into()));
    };
    let expanded = expand_placeholders(ar);
    let out: Vec<serde_json::Value> = ar
        .appends
        .iter()
        .zip(&expanded.appends)
        .filter(|(before, _)| matches!(before.source, AppendSource::Placeholder(_)))
        .map(|(_, after)| match &after.source {
            AppendSource::Values(rows) => json!({"dataset": after.dataset, "values": rows}),
            AppendSource::Placeholder(_) => unreachable!("placeholders are expanded"),
        })
        .collect();
    emit(&format!("{}\n", serde_json::to_string_pretty(&out).unwrap()));
    Ok(OK)
}

fn cmd_publish(spec_path: &Path, hub: &str, force: bool) -> Outcome {
    let (text, spec) = load(spec_path, None)?;
    let compiled = build(&spec)?;
    if compiled.has_virtual() {
        let report = validate_compiled(&spec, &compiled).map_err(|e| Failure(COMPILE, e.to_string()))?;
        if report.verdict == Verdict::Invalid {
            if !force {
                eprint!("{}", report.to_text());
                return Err(Failure(INVALID, "validation failed, not published (use --force to publish anyway)".into()));
            }
            eprintln!("warning: publishing a spec that failed validation");
            eprint!("{}", report.to_text());
        }
    }
    let url = format!("{}/specs{}", hub.trim_end_matches('/'), if force { "?force=true" } else { "" });
    let res = reqwest::blocking::Client::new()
        .post(&url)
        .header("content-type", "application/json")
        .body(text)
        .send()
        .map_err(|e| Failure(USAGE, format!("{url}: {e}")))?;
    let status = res.status();
    let body = res.text().map_err(|e| Failure(USAGE, format!("{url}: {e}")))?;
    if !status.is_success() {
        let code = match status.as_u16() {
            409 => INVALID,
            400 => COMPILE,
            _ => USAGE,
        };
        return Err(Failure(code, format!("hub answered {status}: {body}")));
    }
    let receipt: serde_json::Value = serde_json::from_str(&body).map_err(|e| Failure(USAGE, format!("bad receipt: {e}")))?;
    emit(&format!("{}\n", serde_json::to_string_pretty(&receipt).unwrap()));
    Ok(OK)
}

fn cmd_serve(port: u16, store: &Path, ui: Option<PathBuf>) -> Outcome {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure(USAGE, e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .map_err(|e| Failure(USAGE, format!("bind {port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Failure(USAGE, e.to_string()))?;
        let url = format!("http://{addr}");
        let store = Store::open(store, url.clone()).map_err(|e| io_err(store, e))?;
        emit(&format!("listening on {url}\n"));
        augvis_hub::serve(listener, store, ui).await.map_err(|e| Failure(USAGE, e.to_string()))?;
        Ok(OK)
    })
}

fn mtime(path: &Path) -> Option<SystemTime> {
    fs::metadata(path).and_then(|m| m.modified()).ok()
}

/// Re-run `f` whenever `path` changes; a change must settle for 200 ms first.
fn watch(path: &Path, mut f: impl FnMut() -> Outcome) -> ! {
    let debounce = Duration::from_millis(200);
    let mut seen = mtime(path);
    report(f());
    loop {
        sleep(debounce);
        let now = mtime(path);
        if now == seen {
            continue;
        }
        let mut settled = now;
        loop {
            sleep(debounce);
            let again = mtime(path);
            if again == settled {
                break;
            }
            settled = again;
        }
        seen = settled;
        report(f());
    }
}

fn report(outcome: Outcome) -> u8 {
    match outcome {
        Ok(code) => code,
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Compile { spec, out, seed, hub, watch: true } => watch(&spec.clone(), || cmd_compile(&spec, &out, seed, &hub)),
        Command::Compile { spec, out, seed, hub, .. } => cmd_compile(&spec, &out, seed, &hub),
        Command::Validate { spec, json, watch: true } => watch(&spec.clone(), || cmd_validate(&spec, json)),
        Command::Validate { spec, json, .. } => cmd_validate(&spec, json),
        Command::Mock { spec, seed } => cmd_mock(&spec, seed),
        Command::Publish { spec, hub, force } => cmd_publish(&spec, &hub, force),
        Command::Serve { port, store, ui } => cmd_serve(port, &store, ui),
    };
    ExitCode::from(report(outcome))
}
