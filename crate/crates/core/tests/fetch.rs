//! Fetching against a throwaway local HTTP server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use chrono::NaiveDate;
use quantbench::market_data::{fetch_history, HistoryCache, Provider};
use quantbench::{DataError, DateRange};

const BODY: &str = "Date,Open,High,Low,Close,Adj Close,Volume
2020-01-02,10,11,9,10.5,10.4,100
2020-01-03,10.5,12,10,11.5,11.4,120
2020-01-06,11.5,12,11,11.8,11.7,90
2020-01-07,11.8,12.5,11.2,12.1,12.0,95
";

struct Server {
    base: String,
    hits: Arc<AtomicUsize>,
}

/// Serves `/history/{ticker}.csv`: GOOD gets `BODY`, FLAKY fails with 503, anything else 404.
fn serve() -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            let _ = reader.read_line(&mut request_line);
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
            }
            let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            let (status, body) = if path.starts_with("/history/GOOD.csv") {
                ("200 OK", BODY)
            } else if path.starts_with("/history/FLAKY.csv") {
                ("503 Service Unavailable", "busy")
            } else {
                ("404 Not Found", "no such ticker")
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: text/csv\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    Server { base, hits }
}

fn provider(base: &str) -> Provider {
    let mut p = Provider::new(format!("{base}/history/{{ticker}}.csv?start={{start}}&end={{end}}"));
    p.initial_backoff = Duration::from_millis(5);
    p.timeout = Duration::from_secs(5);
    p
}

fn range(a: (i32, u32, u32), b: (i32, u32, u32)) -> DateRange {
    DateRange::new(
        NaiveDate::from_ymd_opt(a.0, a.1, a.2).unwrap(),
        NaiveDate::from_ymd_opt(b.0, b.1, b.2).unwrap(),
    )
    .unwrap()
}

#[test]
fn downloads_slices_and_caches() {
    let server = serve();
    let dir = tempfile::tempdir().unwrap();
    let cache = HistoryCache::new(dir.path());
    let r = range((2020, 1, 3), (2020, 1, 6));
    let series = fetch_history("GOOD", r, &provider(&server.base), &cache).unwrap();
    assert_eq!(series.len(), 2);
    assert_eq!(series.bars()[0].adj_close, 11.4);
    assert!(cache.path_for("GOOD", r).exists());
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);

    // Second call is served from disk even with a dead provider.
    let offline = provider("http://127.0.0.1:9");
    let again = fetch_history("GOOD", r, &offline, &cache).unwrap();
    assert_eq!(again, series);
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn not_found_is_an_unknown_ticker() {
    let server = serve();
    let dir = tempfile::tempdir().unwrap();
    let cache = HistoryCache::new(dir.path());
    let err = fetch_history("NOPE", range((2020, 1, 1), (2020, 2, 1)), &provider(&server.base), &cache).unwrap_err();
    assert!(matches!(err, DataError::UnknownTicker(ref t) if t == "NOPE"), "{err}");
    assert_eq!(server.hits.load(Ordering::SeqCst), 1, "404 must not be retried");
}

#[test]
fn empty_window_is_an_unknown_ticker() {
    let server = serve();
    let dir = tempfile::tempdir().unwrap();
    let cache = HistoryCache::new(dir.path());
    let err = fetch_history("GOOD", range((2021, 1, 1), (2021, 2, 1)), &provider(&server.base), &cache).unwrap_err();
    assert!(matches!(err, DataError::UnknownTicker(_)), "{err}");
}

#[test]
fn server_errors_are_retried_then_reported() {
    let server = serve();
    let dir = tempfile::tempdir().unwrap();
    let cache = HistoryCache::new(dir.path());
    let p = provider(&server.base);
    let err = fetch_history("FLAKY", range((2020, 1, 1), (2020, 2, 1)), &p, &cache).unwrap_err();
    assert!(matches!(err, DataError::Network { .. }), "{err}");
    assert_eq!(server.hits.load(Ordering::SeqCst), p.max_attempts as usize);
}

#[test]
fn unreachable_provider_without_cache_is_a_network_error() {
    let dir = tempfile::tempdir().unwrap();
    let cache = HistoryCache::new(dir.path());
    let err = fetch_history("GOOD", range((2020, 1, 1), (2020, 2, 1)), &provider("http://127.0.0.1:9"), &cache).unwrap_err();
    assert!(matches!(err, DataError::Network { .. }), "{err}");
}
