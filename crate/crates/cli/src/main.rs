//! Command-line and daemon frontend for the converter.
//!
//! Exit codes: 0 success, 1 success with warnings, 2 fatal conversion
//! error, 3 invalid arguments or I/O failure.

mod daemon;
mod job;

use std::fs::OpenOptions;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::Parser;

use texsmith_core::bindings::load_bindings;
use texsmith_core::postprocess::SplitLevel;

use job::{profile_tsv, run_job, Format, Job, JobError, Source, Status};

#[derive(Debug, Parser)]
#[command(
    name = "texsmith",
    about = "Convert a TeX-subset document to XML, HTML5, or EPUB3",
    disable_help_subcommand = true
)]
struct Cli {
    /// Input document (required unless --daemon is given)
    input: Option<PathBuf>,

    /// Output format: xml, html5, or epub
    #[arg(long, default_value = "xml")]
    format: String,

    /// Output file (xml, epub) or directory (html5); xml defaults to stdout
    #[arg(long)]
    dest: Option<PathBuf>,

    /// Page splitting: none or section
    #[arg(long, default_value = "none")]
    splitat: String,

    /// Binding files to load after the standard set, in order
    #[arg(long = "preload")]
    preload: Vec<PathBuf>,

    /// Record per-macro timing and print a TSV profile
    #[arg(long)]
    profile: bool,

    /// Write the profile table here instead of stderr
    #[arg(long)]
    profile_out: Option<PathBuf>,

    /// Treat recoverable errors (undefined macros, unknown environments) as fatal
    #[arg(long)]
    strict: bool,

    /// Check output structure after writing and report violations
    #[arg(long)]
    validate: bool,

    /// Per-job time limit in seconds
    #[arg(long, default_value_t = 60)]
    timeout: u64,

    /// Serve newline-delimited JSON jobs instead of converting once
    #[arg(long)]
    daemon: bool,

    /// Unix socket path for daemon mode (default: stdin/stdout)
    #[arg(long)]
    socket: Option<PathBuf>,

    /// Append diagnostics to this file instead of stderr
    #[arg(long)]
    log: Option<PathBuf>,

    /// Suppress warning output
    #[arg(short, long)]
    quiet: bool,

    /// Increase diagnostic detail
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

struct Diagnostics {
    quiet: bool,
    file: Option<std::fs::File>,
}

impl Diagnostics {
    fn open(cli: &Cli) -> Result<Diagnostics, String> {
        let file = match &cli.log {
            Some(path) => Some(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| format!("cannot open log {}: {e}", path.display()))?,
            ),
            None => None,
        };
        Ok(Diagnostics {
            quiet: cli.quiet,
            file,
        })
    }

    fn emit(&mut self, line: &str) {
        if let Some(f) = &mut self.file {
            let _ = writeln!(f, "{line}");
        } else if !self.quiet {
            eprintln!("{line}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err((code, message)) => {
            eprintln!("texsmith: {message}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, (u8, String)> {
    let invalid = |m: String| (3u8, m);

    let format = Format::parse(&cli.format)
        .ok_or_else(|| invalid(format!("unknown format `{}`", cli.format)))?;
    let splitat = SplitLevel::parse(&cli.splitat)
        .ok_or_else(|| invalid(format!("unknown splitat `{}`", cli.splitat)))?;
    if cli.timeout == 0 {
        return Err(invalid("timeout must be positive".to_string()));
    }

    let registry = load_bindings(&cli.preload)
        .map_err(|e| invalid(format!("binding load failed: {e}")))?
        .shared();

    let mut diag = Diagnostics::open(&cli).map_err(invalid)?;

    if cli.daemon {
        if cli.input.is_some() {
            return Err(invalid("--daemon takes no input argument".to_string()));
        }
        let result = match &cli.socket {
            Some(path) => daemon::serve_socket(path, &registry),
            None => {
                let stdin = io::stdin().lock();
                daemon::serve(BufReader::new(stdin), io::stdout().lock(), &registry)
            }
        };
        return result
            .map(|()| ExitCode::SUCCESS)
            .map_err(|e| invalid(format!("daemon I/O error: {e}")));
    }

    let input = cli
        .input
        .clone()
        .ok_or_else(|| invalid("no input file given".to_string()))?;
    let job = Job {
        source: Source::Path(input),
        format,
        dest: cli.dest.clone(),
        splitat,
        profile: cli.profile,
        strict: cli.strict,
        validate: cli.validate,
        timeout: Duration::from_secs(cli.timeout),
    };
    let outcome = run_job(&job, &registry).map_err(|e| match e {
        JobError::Invalid(m) => (3u8, m),
        JobError::Fatal(m) => (2u8, m),
    })?;

    for line in &outcome.log {
        diag.emit(&format!("warning: {line}"));
    }
    if cli.verbose > 0 {
        if let Some(dest) = &outcome.dest {
            diag.emit(&format!("wrote {dest}"));
        }
    }
    if let Some(records) = &outcome.profile {
        let tsv = profile_tsv(records);
        match &cli.profile_out {
            Some(path) => std::fs::write(path, tsv)
                .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?,
            None => eprint!("{tsv}"),
        }
    }
    if let Some(bytes) = &outcome.stdout {
        io::stdout()
            .write_all(bytes)
            .map_err(|e| invalid(format!("cannot write stdout: {e}")))?;
    }
    Ok(match outcome.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Warn => ExitCode::from(1),
    })
}
