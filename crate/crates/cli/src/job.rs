//! One conversion job: source → engine → postprocess → output artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::Deserialize;

use texsmith_core::bindings::Registry;
use texsmith_core::doc::{self, Document};
use texsmith_core::engine::{convert, ConvertOutput, EngineOptions};
use texsmith_core::engine::profiler::ProfileRecord;
use texsmith_core::epub::{self, EpubMetadata};
use texsmith_core::postprocess::{resolve_refs, serialize_page, split_pages, to_html5, Page, SplitLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Xml,
    Html5,
    Epub,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "xml" => Some(Format::Xml),
            "html5" => Some(Format::Html5),
            "epub" => Some(Format::Epub),
            _ => None,
        }
    }
}

/// Where the job's TeX source comes from.
#[derive(Debug, Clone)]
pub enum Source {
    Path(PathBuf),
    Text(String),
}

#[derive(Debug, Clone)]
pub struct Job {
    pub source: Source,
    pub format: Format,
    pub dest: Option<PathBuf>,
    pub splitat: SplitLevel,
    pub profile: bool,
    pub strict: bool,
    pub validate: bool,
    pub timeout: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Warn,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub dest: Option<String>,
    /// Human-readable diagnostics, one per line.
    pub log: Vec<String>,
    pub profile: Option<Vec<ProfileRecord>>,
    /// Serialized output when no destination was given (xml to stdout).
    pub stdout: Option<Vec<u8>>,
}

#[derive(Debug)]
pub enum JobError {
    /// Bad arguments or I/O trouble — exit code 3.
    Invalid(String),
    /// The conversion itself failed — exit code 2.
    Fatal(String),
}

impl JobError {
    pub fn message(&self) -> &str {
        match self {
            JobError::Invalid(m) | JobError::Fatal(m) => m,
        }
    }
}

fn read_source(job: &Job) -> Result<(String, String), JobError> {
    match &job.source {
        Source::Path(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| JobError::Invalid(format!("cannot read {}: {e}", p.display())))?;
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "document".to_string());
            Ok((text, stem))
        }
        Source::Text(t) => Ok((t.clone(), "document".to_string())),
    }
}

/// Run the engine on its own thread so a runaway expansion cannot hang
/// the process past the job timeout.  The worker is detached on timeout.
fn convert_with_timeout(
    source: String,
    registry: Arc<Registry>,
    options: EngineOptions,
    timeout: Duration,
) -> Result<ConvertOutput, JobError> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(convert(&source, &registry, &options));
    });
    match rx.recv_timeout(timeout) {
        Ok(Ok(out)) => Ok(out),
        Ok(Err(e)) => Err(JobError::Fatal(format!(
            "{}:{}: {}",
            e.line, e.col, e.source
        ))),
        Err(_) => Err(JobError::Fatal(format!(
            "job exceeded timeout of {} s",
            timeout.as_secs_f64()
        ))),
    }
}

/// The `modified` timestamp baked into EPUB output.  Honors the
/// reproducible-builds `SOURCE_DATE_EPOCH` convention; otherwise the
/// current time is used.
pub fn epub_modified() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<i64>().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0)
        });
    format_utc(secs)
}

/// Render a Unix timestamp as `CCYY-MM-DDThh:mm:ssZ` (civil-from-days
/// algorithm, proleptic Gregorian).
pub fn format_utc(secs: i64) -> String {
    let days = secs.div_euclid(86_400);
    let tod = secs.rem_euclid(86_400);
    let (h, mi, s) = (tod / 3600, (tod / 60) % 60, tod % 60);
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!("{y:04}-{m:02}-{d:02}T{h:02}:{mi:02}:{s:02}Z")
}

fn build_pages(document: &Document, level: SplitLevel, log: &mut Vec<String>) -> Vec<Page> {
    let mut pages = split_pages(document, level);
    log.extend(resolve_refs(&mut pages, &document.labels));
    pages
}

/// Execute one job end to end.
pub fn run_job(job: &Job, registry: &Arc<Registry>) -> Result<Outcome, JobError> {
    if job.timeout.is_zero() {
        return Err(JobError::Invalid("timeout must be positive".to_string()));
    }
    if job.dest.is_none() && job.format != Format::Xml {
        return Err(JobError::Invalid(
            "--dest is required for html5 and epub output".to_string(),
        ));
    }
    let (source, stem) = read_source(job)?;
    let options = EngineOptions {
        strict: job.strict,
        profile: job.profile,
        ..EngineOptions::default()
    };
    let out = convert_with_timeout(source, Arc::clone(registry), options, job.timeout)?;
    let mut log: Vec<String> = out.document.warnings.clone();

    let mut stdout = None;
    let mut dest_str = None;
    match job.format {
        Format::Xml => {
            let bytes = doc::serialize_xml(&out.document)
                .map_err(|e| JobError::Fatal(format!("serialization failed: {e}")))?;
            match &job.dest {
                Some(path) => {
                    fs::write(path, &bytes).map_err(|e| {
                        JobError::Invalid(format!("cannot write {}: {e}", path.display()))
                    })?;
                    dest_str = Some(path.display().to_string());
                }
                None => stdout = Some(bytes),
            }
        }
        Format::Html5 => {
            let dest = job.dest.as_ref().unwrap();
            let pages = build_pages(&out.document, job.splitat, &mut log);
            texsmith_core::postprocess::write_site(&pages, dest)
                .map_err(|e| JobError::Invalid(e.to_string()))?;
            if job.validate {
                validate_pages(&pages, &mut log)?;
            }
            dest_str = Some(dest.display().to_string());
        }
        Format::Epub => {
            let dest = job.dest.as_ref().unwrap();
            let pages = build_pages(&out.document, job.splitat, &mut log);
            let meta = EpubMetadata {
                identifier: format!("urn:texsmith:{stem}"),
                title: pages
                    .first()
                    .map(|p| p.title.clone())
                    .unwrap_or_else(|| "Document".to_string()),
                language: "en".to_string(),
                modified: epub_modified(),
            };
            let bytes = epub::build_package(&pages, &[], &meta)
                .map_err(|e| JobError::Fatal(format!("packaging failed: {e}")))?;
            if job.validate {
                let violations = epub::validate_structure(&bytes)
                    .map_err(|e| JobError::Fatal(format!("validation failed: {e}")))?;
                for v in violations {
                    log.push(format!("structure violation: {v}"));
                }
            }
            fs::write(dest, &bytes)
                .map_err(|e| JobError::Invalid(format!("cannot write {}: {e}", dest.display())))?;
            dest_str = Some(dest.display().to_string());
        }
    }

    let status = if log.is_empty() { Status::Ok } else { Status::Warn };
    Ok(Outcome {
        status,
        dest: dest_str,
        log,
        profile: out.profile,
        stdout,
    })
}

fn validate_pages(pages: &[Page], log: &mut Vec<String>) -> Result<(), JobError> {
    for page in pages {
        let html =
            to_html5(page, pages).map_err(|e| JobError::Fatal(format!("lowering failed: {e}")))?;
        let body = serialize_page(&html);
        let fragment = body
            .trim_start_matches("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n")
            .trim_start_matches("<!DOCTYPE html>\n");
        if texsmith_core::xml::parse_document(fragment).is_err() {
            log.push(format!("page {} is not well-formed", page.path));
        }
    }
    Ok(())
}

/// Render the profile as TSV: name, calls, inclusive-ms, exclusive-ms.
pub fn profile_tsv(records: &[ProfileRecord]) -> String {
    let mut out = String::from("name\tcalls\tinclusive-ms\texclusive-ms\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.3}\t{:.3}",
            r.name,
            r.calls,
            r.inclusive.as_secs_f64() * 1000.0,
            r.exclusive.as_secs_f64() * 1000.0
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utc_formatting_matches_known_dates() {
        assert_eq!(format_utc(0), "1970-01-01T00:00:00Z");
        assert_eq!(format_utc(1_378_036_800), "2013-09-01T12:00:00Z");
        assert_eq!(format_utc(951_782_399), "2000-02-28T23:59:59Z");
        assert_eq!(format_utc(951_782_400), "2000-02-29T00:00:00Z");
    }

    #[test]
    fn format_parse() {
        assert_eq!(Format::parse("xml"), Some(Format::Xml));
        assert_eq!(Format::parse("html5"), Some(Format::Html5));
        assert_eq!(Format::parse("epub"), Some(Format::Epub));
        assert_eq!(Format::parse("pdf"), None);
    }

    #[test]
    fn xml_job_without_dest_goes_to_stdout() {
        let reg = texsmith_core::bindings::standard_registry().shared();
        let job = Job {
            source: Source::Text("hello\n".to_string()),
            format: Format::Xml,
            dest: None,
            splitat: SplitLevel::None,
            profile: false,
            strict: false,
            validate: false,
            timeout: Duration::from_secs(10),
        };
        let out = run_job(&job, &reg).unwrap();
        assert_eq!(out.status, Status::Ok);
        let xml = String::from_utf8(out.stdout.unwrap()).unwrap();
        assert!(xml.contains("hello"), "{xml}");
    }

    #[test]
    fn html5_requires_dest() {
        let reg = texsmith_core::bindings::standard_registry().shared();
        let job = Job {
            source: Source::Text("x\n".to_string()),
            format: Format::Html5,
            dest: None,
            splitat: SplitLevel::None,
            profile: false,
            strict: false,
            validate: false,
            timeout: Duration::from_secs(10),
        };
        assert!(matches!(run_job(&job, &reg), Err(JobError::Invalid(_))));
    }

    #[test]
    fn missing_input_is_invalid() {
        let reg = texsmith_core::bindings::standard_registry().shared();
        let job = Job {
            source: Source::Path(PathBuf::from("/nonexistent/input.tex")),
            format: Format::Xml,
            dest: None,
            splitat: SplitLevel::None,
            profile: false,
            strict: false,
            validate: false,
            timeout: Duration::from_secs(10),
        };
        assert!(matches!(run_job(&job, &reg), Err(JobError::Invalid(_))));
    }

    #[test]
    fn profile_tsv_shape() {
        let reg = texsmith_core::bindings::standard_registry().shared();
        let job = Job {
            source: Source::Text("\\textbf{hi}\n".to_string()),
            format: Format::Xml,
            dest: None,
            splitat: SplitLevel::None,
            profile: true,
            strict: false,
            validate: false,
            timeout: Duration::from_secs(10),
        };
        let out = run_job(&job, &reg).unwrap();
        let tsv = profile_tsv(out.profile.as_deref().unwrap());
        let mut lines = tsv.lines();
        assert_eq!(lines.next(), Some("name\tcalls\tinclusive-ms\texclusive-ms"));
        assert!(tsv.lines().any(|l| l.starts_with("textbf\t1\t")), "{tsv}");
    }
}
