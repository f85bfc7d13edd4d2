#![allow(dead_code)]

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use chrono::NaiveDate;
use quantbench::market_data::HistoryCache;
use quantbench::DateRange;

pub const START: &str = "2015-01-05";
pub const END: &str = "2019-11-01";
/// Nothing listens on the discard port, so any accidental download fails fast.
pub const OFFLINE: &str = "http://127.0.0.1:9/history/{ticker}.csv";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_range() -> DateRange {
    DateRange::new(
        NaiveDate::parse_from_str(START, "%Y-%m-%d").unwrap(),
        NaiveDate::parse_from_str(END, "%Y-%m-%d").unwrap(),
    )
    .unwrap()
}

/// A cache directory holding the committed fixtures under the full fixture range.
pub fn seeded_cache(tickers: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let cache = HistoryCache::new(dir.path());
    for t in tickers {
        let target = cache.path_for(t, fixture_range());
        fs::copy(fixtures().join(format!("{t}.csv")), target).unwrap();
    }
    dir
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("quantbench").chain(args.iter().copied());
    let code = quantbench_cli::run_with(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

/// All files in `dir` as sorted `(name, bytes)` pairs.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

pub struct MockProvider {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
}

impl MockProvider {
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

/// Serves `/history/{ticker}.csv` from the fixture files; unknown tickers get 404.
pub fn mock_provider() -> MockProvider {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/history/{{ticker}}.csv?start={{start}}&end={{end}}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request = String::new();
            let _ = reader.read_line(&mut request);
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
            }
            let path = request.split_whitespace().nth(1).unwrap_or("");
            let ticker = path
                .strip_prefix("/history/")
                .and_then(|p| p.split(".csv").next())
                .unwrap_or("");
            let file = fixtures().join(format!("{ticker}.csv"));
            let (status, body) = match fs::read_to_string(&file) {
                Ok(body) if !ticker.is_empty() => ("200 OK", body),
                _ => ("404 Not Found", String::from("unknown")),
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    MockProvider { url, hits }
}
