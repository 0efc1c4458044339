//! Batch front end: `anosovlab <command> --config <file.json> [--out DIR]
//! [--seed N] [--workers N]`.
//!
//! Every command reads the `surface` block and its own section of the JSON
//! config (see `docs/config.md`), writes `<command>.json` plus tidy CSV files
//! into the output directory and embeds the config hash and tool version in
//! each of them.

mod commands;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL: &str = "anosovlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Energy identity residuals over random band-limited fields.
    Pestov,
    /// Terminator bracket over a profile pool.
    Terminator,
    /// Trapping test plus terminator bracket.
    Anosov,
    /// Ray transform checks and the s-injectivity experiment.
    Xray,
    /// Invariant extension of prescribed low modes.
    Invariant,
    /// Parameter search and certificate for the collar construction.
    Gulliver,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pestov => "pestov",
            Command::Terminator => "terminator",
            Command::Anosov => "anosov",
            Command::Xray => "xray",
            Command::Invariant => "invariant",
            Command::Gulliver => "gulliver",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anosovlab", version, about = "Geodesic flow experiments on closed surfaces")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the `seed` field of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// The parsed configuration with the effective seed folded in.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub raw: Value,
    pub seed: u64,
    pub hash: String,
}

impl RunConfig {
    /// `seed_override` wins over the `seed` field, which defaults to 0.
    pub fn from_value(mut raw: Value, seed_override: Option<u64>) -> Result<Self> {
        let obj = raw.as_object_mut().ok_or_else(|| Error::Config("the config must be a JSON object".into()))?;
        let seed = match (seed_override, obj.get("seed")) {
            (Some(s), _) => s,
            (None, None) => 0,
            (None, Some(v)) => v.as_u64().ok_or_else(|| Error::Config("'seed' must be a non-negative integer".into()))?,
        };
        obj.insert("seed".into(), json!(seed));
        // serde_json maps are ordered by key, so this serialization is canonical
        let hash = Sha256::digest(serde_json::to_vec(&raw)?).iter().map(|b| format!("{b:02x}")).collect();
        Ok(RunConfig { raw, seed, hash })
    }

    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let raw: Value = serde_json::from_str(&text)?;
        Self::from_value(raw, seed_override)
    }

    /// The section named `key`, or an empty object.
    pub fn section(&self, key: &str) -> Value {
        self.raw.get(key).cloned().unwrap_or_else(|| json!({}))
    }

    pub fn surface(&self) -> Option<&Value> {
        self.raw.get("surface")
    }
}

/// Collects the files of one run and writes them with provenance columns.
pub struct Output {
    dir: PathBuf,
    command: Command,
    hash: String,
    seed: u64,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path, command: Command, cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), command, hash: cfg.hash.clone(), seed: cfg.seed, written: Vec::new() })
    }

    /// Writes `<command>.json` wrapping `result` in the run envelope.
    pub fn json(&mut self, result: &impl Serialize) -> Result<()> {
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command.name(),
            "config_hash": self.hash,
            "seed": self.seed,
            "result": result,
        });
        let path = self.dir.join(format!("{}.json", self.command.name()));
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        self.written.push(path);
        Ok(())
    }

    /// Writes a tidy CSV; each row gets the config hash and tool version
    /// prepended.
    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        let mut head = vec!["config_hash", "tool_version"];
        head.extend_from_slice(header);
        w.write_record(&head)?;
        for r in rows {
            w.serialize((&self.hash, VERSION, r))?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Runs one command; returns the files written.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut o = Output::new(out, command, cfg)?;
    match command {
        Command::Pestov => commands::pestov(cfg, &mut o)?,
        Command::Terminator => commands::terminator(cfg, &mut o)?,
        Command::Anosov => commands::anosov(cfg, &mut o)?,
        Command::Xray => commands::xray(cfg, &mut o)?,
        Command::Invariant => commands::invariant(cfg, &mut o)?,
        Command::Gulliver => commands::gulliver(cfg, &mut o)?,
    }
    Ok(o.written)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    let outcome = (|| -> Result<Vec<PathBuf>> {
        let cfg = RunConfig::load(&args.config, args.seed)?;
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = args.workers {
            if n == 0 {
                return Err(Error::Config("--workers must be at least 1".into()));
            }
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| run(args.command, &cfg, &args.out))
    })();
    match outcome {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("anosovlab {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}
