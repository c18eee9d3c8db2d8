use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sla_core::chat::{from_sla_xml, lint_chat, parse_chat, serialize_chat, to_sla_xml, Diagnostic, OccasionMeta};
use sla_core::media::{build_waveform_cache, decode_wav, DEFAULT_BASE_BUCKET};
use sla_core::report::effort_estimate;
use sla_service::{router, AppState, Config};
use sla_store::{Store, StoreError};

type CliResult = Result<ExitCode, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "sla", version, about = "Spoken-language resource service and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "SLA_CONFIG")]
        config: Option<PathBuf>,
        /// Create the store first if it does not exist.
        #[arg(long)]
        init: bool,
    },
    /// Create an empty store.
    Init {
        #[arg(long, env = "SLA_CONFIG")]
        config: Option<PathBuf>,
        /// Store root; defaults to the configured one.
        root: Option<PathBuf>,
    },
    /// Check CHAT (.cha) or SLA-XML (.xml) files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Convert between CHAT and SLA-XML, by file extension.
    Convert {
        input: PathBuf,
        output: PathBuf,
        /// Occasion id written to SLA-XML output.
        #[arg(long, default_value = "o0001")]
        id: String,
        /// Occasion title written to SLA-XML output.
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Build the waveform pyramid of a WAV file.
    Waveform {
        wav: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BASE_BUCKET)]
        base_bucket: u32,
        /// Write the sidecar file here.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Transcription and indexing effort for a record length.
    Effort { minutes: f64 },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Serve { config, init } => serve(config.as_deref(), init),
        Command::Init { config, root } => init_store(config.as_deref(), root),
        Command::Validate { files } => validate(&files),
        Command::Convert { input, output, id, title } => convert(&input, &output, OccasionMeta { id, title }),
        Command::Waveform { wav, base_bucket, sidecar } => waveform(&wav, base_bucket, sidecar.as_deref()),
        Command::Effort { minutes } => effort(minutes),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn serve(config: Option<&Path>, init: bool) -> CliResult {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let config = Config::load(config)?;
    let store = match Store::open(&config.store_root) {
        Err(StoreError::NotInitialized(_)) if init => Store::init(&config.store_root)?,
        other => other?,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&config.bind).await?;
        tracing::info!(bind = %config.bind, store = %config.store_root.display(), "serving");
        let app = router(AppState::new(store, config));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(ExitCode::SUCCESS)
    })
}

fn init_store(config: Option<&Path>, root: Option<PathBuf>) -> CliResult {
    let root = match root {
        Some(r) => r,
        None => Config::load(config)?.store_root,
    };
    Store::init(&root)?;
    println!("initialized store at {}", root.display());
    Ok(ExitCode::SUCCESS)
}

fn is_xml(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml"))
}

fn diagnostics_of(path: &Path) -> Result<Vec<Diagnostic>, Box<dyn Error>> {
    let text = fs::read_to_string(path)?;
    Ok(match is_xml(path) {
        true => from_sla_xml(&text).err().unwrap_or_default(),
        false => lint_chat(&text),
    })
}

fn validate(files: &[PathBuf]) -> CliResult {
    let mut failed = false;
    for path in files {
        let diagnostics = diagnostics_of(path)?;
        failed |= diagnostics.iter().any(Diagnostic::is_error);
        if diagnostics.is_empty() {
            println!("{}: ok", path.display());
        }
        for d in diagnostics {
            println!("{}: {d}", path.display());
        }
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn report(path: &Path, diagnostics: Vec<Diagnostic>) -> CliResult {
    for d in diagnostics {
        eprintln!("{}: {d}", path.display());
    }
    Ok(ExitCode::FAILURE)
}

fn convert(input: &Path, output: &Path, meta: OccasionMeta) -> CliResult {
    let text = fs::read_to_string(input)?;
    let doc = match is_xml(input) {
        true => match from_sla_xml(&text) {
            Ok((_, doc)) => doc,
            Err(diagnostics) => return report(input, diagnostics),
        },
        false => match parse_chat(&text) {
            Ok(doc) => doc,
            Err(diagnostics) => return report(input, diagnostics),
        },
    };
    let out = match is_xml(output) {
        true => to_sla_xml(&doc, &meta),
        false => serialize_chat(&doc),
    };
    fs::write(output, out)?;
    Ok(ExitCode::SUCCESS)
}

fn waveform(wav: &Path, base_bucket: u32, sidecar: Option<&Path>) -> CliResult {
    let pcm = decode_wav(&fs::read(wav)?)?;
    let cache = build_waveform_cache(&pcm, base_bucket)?;
    let summary = serde_json::json!({
        "sample_rate": cache.sample_rate,
        "total_samples": cache.total_samples,
        "duration_ms": pcm.duration_ms(),
        "base_bucket": cache.base_bucket,
        "levels": cache.levels.iter().map(Vec::len).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = sidecar {
        fs::write(path, cache.to_sidecar())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn effort(minutes: f64) -> CliResult {
    println!("{}", serde_json::to_string_pretty(&effort_estimate(minutes)?)?);
    Ok(ExitCode::SUCCESS)
}
