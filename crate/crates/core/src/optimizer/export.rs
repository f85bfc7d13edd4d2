use std::fmt::Write as _;

use super::aggregate::{GroupBy, GroupKey, PairAggregate, RankMetric, RankRow, RankingTable, ScatterData};
use super::grid::SkippedTrial;
use super::{OptimizerError, Result, SmaPair, TrialRecord};

pub const TRIALS_CSV_HEADER: &str = "Ticker,Short,Long,OutperformancePct,VolatilityRatio";
pub const RANKING_CSV_HEADER: &str = "Rank,Short,Long,Metric";
pub const SCATTER_CSV_HEADER: &str = "VolatilityRatio,OutperformancePct";
pub const SKIPPED_CSV_HEADER: &str = "Ticker,Short,Long,Reason";

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    // Writing into a Vec cannot fail and every field is valid UTF-8.
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn write_row<const N: usize>(w: &mut csv::Writer<Vec<u8>>, row: [String; N]) {
    w.write_record(row).expect("in-memory csv");
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut w = writer();
    write_row(&mut w, ["Ticker", "Short", "Long", "OutperformancePct", "VolatilityRatio"].map(String::from));
    for r in records {
        write_row(
            &mut w,
            [
                r.ticker.clone(),
                r.pair.short().to_string(),
                r.pair.long().to_string(),
                r.outperformance_pct.to_string(),
                r.volatility_ratio.to_string(),
            ],
        );
    }
    finish(w)
}

pub fn skipped_csv(skipped: &[SkippedTrial]) -> String {
    let mut w = writer();
    write_row(&mut w, ["Ticker", "Short", "Long", "Reason"].map(String::from));
    for s in skipped {
        write_row(
            &mut w,
            [s.ticker.clone(), s.pair.short().to_string(), s.pair.long().to_string(), s.reason.clone()],
        );
    }
    finish(w)
}

pub fn ranking_csv(table: &RankingTable) -> String {
    let mut out = String::from(RANKING_CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(out, "{},{},{},{}", r.rank, r.pair.short(), r.pair.long(), r.value);
    }
    out
}

/// Header and rows for per-group means. Ratio buckets are written as their lower and
/// upper ratio bounds.
pub fn aggregate_csv(aggregates: &[PairAggregate], group_by: GroupBy) -> String {
    let key_header = match group_by {
        GroupBy::Pair => "Short,Long",
        GroupBy::Short => "Short",
        GroupBy::Long => "Long",
        GroupBy::RatioBucket(_) => "RatioFrom,RatioTo",
    };
    let mut out = format!("{key_header},MeanOutperformancePct,MeanVolatilityRatio,Count\n");
    for a in aggregates {
        let key = match (a.key, group_by) {
            (GroupKey::Pair(p), _) => format!("{},{}", p.short(), p.long()),
            (GroupKey::Short(s), _) => s.to_string(),
            (GroupKey::Long(l), _) => l.to_string(),
            (GroupKey::RatioBucket(b), GroupBy::RatioBucket(w)) => {
                format!("{},{}", b as f64 * w, (b + 1) as f64 * w)
            }
            (GroupKey::RatioBucket(b), _) => format!("{b},{}", b + 1),
        };
        let _ = writeln!(
            out,
            "{key},{},{},{}",
            a.mean_outperformance_pct, a.mean_volatility_ratio, a.count
        );
    }
    out
}

pub fn scatter_csv(data: &ScatterData) -> String {
    let mut out = String::from(SCATTER_CSV_HEADER);
    out.push('\n');
    for (v, o) in &data.points {
        let _ = writeln!(out, "{v},{o}");
    }
    out
}

/// Single-line JSON: point count and correlation (`null` when undefined).
pub fn scatter_summary_json(data: &ScatterData) -> String {
    let mut s = serde_json::json!({
        "points": data.points.len(),
        "pearson_correlation": data.correlation,
    })
    .to_string();
    s.push('\n');
    s
}

fn malformed(line: usize, reason: impl Into<String>) -> OptimizerError {
    OptimizerError::MalformedCsv { line, reason: reason.into() }
}

fn records(text: &str, header: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found = rdr.headers().map_err(|e| malformed(1, e.to_string()))?;
    let want: Vec<&str> = header.split(',').collect();
    if found.iter().collect::<Vec<_>>() != want {
        return Err(malformed(1, format!("expected header {header}")));
    }
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 2;
            r.map(|r| (line, r)).map_err(|e| malformed(line, e.to_string()))
        })
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).ok_or_else(|| malformed(line, format!("missing column {idx}")))?;
    raw.parse().map_err(|_| malformed(line, format!("cannot parse {raw:?}")))
}

fn pair(s: usize, l: usize, line: usize) -> Result<SmaPair> {
    SmaPair::new(s, l).ok_or_else(|| malformed(line, format!("invalid pair ({s}, {l})")))
}

pub fn parse_trials_csv(text: &str) -> Result<Vec<TrialRecord>> {
    records(text, TRIALS_CSV_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(TrialRecord {
                ticker: field(&r, 0, line)?,
                pair: pair(field(&r, 1, line)?, field(&r, 2, line)?, line)?,
                outperformance_pct: field(&r, 3, line)?,
                volatility_ratio: field(&r, 4, line)?,
            })
        })
        .collect()
}

pub fn parse_ranking_csv(text: &str, metric: RankMetric) -> Result<RankingTable> {
    let rows = records(text, RANKING_CSV_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(RankRow {
                rank: field(&r, 0, line)?,
                pair: pair(field(&r, 1, line)?, field(&r, 2, line)?, line)?,
                value: field(&r, 3, line)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RankingTable { metric, rows })
}

pub fn parse_scatter_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    records(text, SCATTER_CSV_HEADER)?
        .into_iter()
        .map(|(line, r)| Ok((field(&r, 0, line)?, field(&r, 1, line)?)))
        .collect()
}
