//! Daemon batch mode: newline-delimited JSON requests on stdin (or a
//! unix socket), one JSON response line per request, in order.  The
//! binding registry is loaded once at startup and shared across jobs;
//! each job still gets a fresh engine state.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use texsmith_core::bindings::Registry;
use texsmith_core::postprocess::SplitLevel;

use crate::job::{run_job, Format, Job, JobError, Source, Status};

fn default_timeout() -> u64 {
    60
}

/// One request line; mirrors the one-shot CLI's job fields.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    #[serde(default)]
    pub source: Option<PathBuf>,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub dest: Option<PathBuf>,
    #[serde(default)]
    pub splitat: Option<String>,
    #[serde(default)]
    pub profile: bool,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub validate: bool,
    #[serde(default = "default_timeout")]
    pub timeout: u64,
}

#[derive(Debug, Serialize)]
pub struct Response {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dest: Option<String>,
    pub log: String,
}

impl Request {
    fn into_job(self) -> Result<Job, String> {
        let source = match (self.source, self.text) {
            (Some(p), None) => Source::Path(p),
            (None, Some(t)) => Source::Text(t),
            (Some(_), Some(_)) => return Err("give either source or text, not both".to_string()),
            (None, None) => return Err("request needs a source path or inline text".to_string()),
        };
        let splitat = match self.splitat.as_deref() {
            None => SplitLevel::None,
            Some(s) => SplitLevel::parse(s).ok_or_else(|| format!("unknown splitat `{s}`"))?,
        };
        if self.timeout == 0 {
            return Err("timeout must be positive".to_string());
        }
        Ok(Job {
            source,
            format: self.format,
            dest: self.dest,
            splitat,
            profile: self.profile,
            strict: self.strict,
            validate: self.validate,
            timeout: Duration::from_secs(self.timeout),
        })
    }
}

/// Process one request line into a response.
pub fn handle_line(line: &str, registry: &Arc<Registry>) -> Response {
    let error = |msg: String| Response {
        status: "error",
        dest: None,
        log: msg,
    };
    let request: Request = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return error(format!("malformed request: {e}")),
    };
    let job = match request.into_job() {
        Ok(j) => j,
        Err(msg) => return error(msg),
    };
    match run_job(&job, registry) {
        Ok(outcome) => {
            let mut log = outcome.log.join("\n");
            if let Some(bytes) = outcome.stdout {
                // xml jobs without a dest return the document in the log
                log = String::from_utf8_lossy(&bytes).into_owned();
            }
            Response {
                status: match outcome.status {
                    Status::Ok => "ok",
                    Status::Warn => "warn",
                },
                dest: outcome.dest,
                log,
            }
        }
        Err(e @ (JobError::Invalid(_) | JobError::Fatal(_))) => error(e.message().to_string()),
    }
}

/// Serve requests from `input`, writing one response line each to
/// `output`.  Returns on end of input.
pub fn serve<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    registry: &Arc<Registry>,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = handle_line(&line, registry);
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

/// Listen on a unix socket, serving each connection in turn.
pub fn serve_socket(path: &Path, registry: &Arc<Registry>) -> std::io::Result<()> {
    let _ = std::fs::remove_file(path);
    let listener = std::os::unix::net::UnixListener::bind(path)?;
    for stream in listener.incoming() {
        let stream = stream?;
        let reader = BufReader::new(stream.try_clone()?);
        serve(reader, stream, registry)?;
    }
    Ok(())
}
