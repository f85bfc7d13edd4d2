use std::thread;
use std::time::Duration;

use super::{parse_csv, DataError, DateRange, HistoryCache, PriceSeries, Result};

/// Default endpoint template. `{ticker}`, `{start}` and `{end}` are substituted.
pub const DEFAULT_PROVIDER_URL: &str =
    "http://127.0.0.1:8750/history/{ticker}.csv?start={start}&end={end}";

/// HTTP client settings for the price provider.
#[derive(Debug, Clone)]
pub struct Provider {
    pub url_template: String,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl Provider {
    pub fn new(url_template: impl Into<String>) -> Self {
        Self {
            url_template: url_template.into(),
            max_attempts: 3,
            initial_backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(30),
        }
    }

    pub fn url_for(&self, ticker: &str, range: DateRange) -> String {
        let start = range.start().format("%Y-%m-%d").to_string();
        let end = range.end().format("%Y-%m-%d").to_string();
        let ticker = encode_component(ticker);
        if self.url_template.contains("{ticker}") {
            self.url_template
                .replace("{ticker}", &ticker)
                .replace("{start}", &start)
                .replace("{end}", &end)
        } else {
            let sep = if self.url_template.contains('?') { '&' } else { '?' };
            format!(
                "{}{sep}ticker={ticker}&start={start}&end={end}",
                self.url_template
            )
        }
    }

    fn download(&self, ticker: &str, range: DateRange) -> Result<String> {
        let url = self.url_for(ticker, range);
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let mut backoff = self.initial_backoff;
        let mut last_error = String::new();
        for attempt in 1..=self.max_attempts.max(1) {
            match agent.get(&url).call() {
                Ok(mut response) => {
                    return response
                        .body_mut()
                        .read_to_string()
                        .map_err(|e| DataError::Network {
                            ticker: ticker.to_string(),
                            reason: e.to_string(),
                        });
                }
                Err(ureq::Error::StatusCode(404)) => {
                    return Err(DataError::UnknownTicker(ticker.to_string()))
                }
                Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) => {
                    return Err(DataError::Network {
                        ticker: ticker.to_string(),
                        reason: format!("provider answered HTTP {code}"),
                    });
                }
                Err(e) => last_error = e.to_string(),
            }
            if attempt < self.max_attempts {
                thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(DataError::Network {
            ticker: ticker.to_string(),
            reason: format!("gave up after {} attempts: {last_error}", self.max_attempts),
        })
    }
}

impl Default for Provider {
    fn default() -> Self {
        Self::new(DEFAULT_PROVIDER_URL)
    }
}

/// Returns the history for `ticker` restricted to `range`, from the cache when present,
/// otherwise from the provider (and then cached).
pub fn fetch_history(
    ticker: &str,
    range: DateRange,
    provider: &Provider,
    cache: &HistoryCache,
) -> Result<PriceSeries> {
    if ticker.trim().is_empty() {
        return Err(DataError::UnknownTicker(ticker.to_string()));
    }
    if let Some(series) = cache.load(ticker, range)? {
        return Ok(series);
    }
    let body = provider.download(ticker, range)?;
    let series = match parse_csv(ticker, &body) {
        Ok(parsed) => parsed.series,
        Err(DataError::EmptySeries { .. }) => return Err(DataError::UnknownTicker(ticker.into())),
        Err(e) => return Err(e),
    };
    let series = match series.slice(range) {
        Ok(s) => s,
        Err(DataError::EmptySeries { .. }) => return Err(DataError::UnknownTicker(ticker.into())),
        Err(e) => return Err(e),
    };
    cache.store(&series, range)?;
    Ok(series)
}

fn encode_component(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for b in text.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}
