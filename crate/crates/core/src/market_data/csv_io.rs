use std::io::Read;

use super::{parse_date, Bar, DataError, PriceSeries, Result};

/// Header emitted by [`serialize_csv`], matching the data provider's layout.
pub const CSV_HEADER: &str = "Date,Open,High,Low,Close,Adj Close,Volume";

const COLUMNS: [&str; 7] = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"];

/// A parsed series together with the number of rows skipped for missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub series: PriceSeries,
    pub dropped_rows: usize,
}

pub fn parse_csv(ticker: &str, text: &str) -> Result<ParsedCsv> {
    parse_csv_reader(ticker, text.as_bytes())
}

/// Parses provider CSV. Columns are located by header name; extra columns are ignored.
/// Rows where any required field is empty or `null` are dropped and counted.
pub fn parse_csv_reader<R: Read>(ticker: &str, reader: R) -> Result<ParsedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(|e| malformed(None, e.to_string()))?.clone();
    let mut index = [0usize; 7];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| malformed(Some(1), format!("missing required column {name:?}")))?;
    }

    let mut bars = Vec::new();
    let mut dropped_rows = 0;
    for (row_no, record) in rdr.records().enumerate() {
        let line = row_no + 2;
        let record = record.map_err(|e| malformed(Some(line), e.to_string()))?;
        let mut fields = [""; 7];
        for (field, &col) in fields.iter_mut().zip(&index) {
            *field = record.get(col).unwrap_or("");
        }
        if fields.iter().any(|f| is_missing(f)) {
            dropped_rows += 1;
            continue;
        }
        let date = parse_date(fields[0])
            .ok_or_else(|| malformed(Some(line), format!("unparseable date {:?}", fields[0])))?;
        let price = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    malformed(Some(line), format!("bad {} value {:?}", COLUMNS[i], fields[i]))
                })
        };
        let bar = Bar {
            date,
            open: price(1)?,
            high: price(2)?,
            low: price(3)?,
            close: price(4)?,
            adj_close: price(5)?,
            volume: parse_volume(fields[6])
                .ok_or_else(|| malformed(Some(line), format!("bad Volume value {:?}", fields[6])))?,
        };
        bar.check()
            .map_err(|reason| malformed(Some(line), reason))?;
        bars.push(bar);
    }

    if bars.is_empty() {
        return Err(DataError::EmptySeries {
            context: Some(format!("{ticker}: no complete rows in csv")),
        });
    }
    bars.sort_by_key(|b| b.date);
    if let Some(pair) = bars.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(DataError::DuplicateDate(pair[0].date));
    }
    Ok(ParsedCsv {
        series: PriceSeries::new(ticker, bars)?,
        dropped_rows,
    })
}

/// Writes a series in the provider layout with ISO dates. Floats use the shortest
/// representation that parses back to the same value.
pub fn serialize_csv(series: &PriceSeries) -> String {
    let mut out = String::with_capacity(series.len() * 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for b in series.bars() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.date.format("%Y-%m-%d"),
            b.open,
            b.high,
            b.low,
            b.close,
            b.adj_close,
            b.volume
        ));
    }
    out
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("null") || field.eq_ignore_ascii_case("nan")
}

fn parse_volume(field: &str) -> Option<u64> {
    if let Ok(v) = field.parse::<u64>() {
        return Some(v);
    }
    // some providers emit volume as "12345.0"
    let v = field.parse::<f64>().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v < 1.8e19).then_some(v as u64)
}

fn malformed(line: Option<usize>, reason: String) -> DataError {
    DataError::MalformedCsv { line, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    const INDEX_TABLE: &str = "\
Date,Open,High,Low,Close,Adj Close,Volume
2017/12/1,null,null,null,null,null,null
2018/1/1,1187.32,1273.99,1187.32,1251.42,1251.420044,73366640000
2018/2/1,1248.27,1258.88,1120.08,1201.87,1201.869995,79579410000
2018/3/1,1202.46,1235.97,1131.98,1157.37,1157.369995,76349800000
";

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn null_row_is_dropped_and_counted() {
        let parsed = parse_csv("^GSPC", INDEX_TABLE).unwrap();
        assert_eq!(parsed.series.len(), 3);
        assert_eq!(parsed.dropped_rows, 1);
        assert_eq!(
            parsed.series.adjusted_closes(),
            vec![
                (d(2018, 1, 1), 1251.420044),
                (d(2018, 2, 1), 1201.869995),
                (d(2018, 3, 1), 1157.369995)
            ]
        );
        assert_eq!(parsed.series.bars()[0].volume, 73_366_640_000);
    }

    #[test]
    fn header_only_is_empty() {
        let err = parse_csv("X", "Date,Open,High,Low,Close,Adj Close,Volume\n").unwrap_err();
        assert!(matches!(err, DataError::EmptySeries { .. }));
    }

    #[test]
    fn duplicate_dates_rejected() {
        let text = "Date,Open,High,Low,Close,Adj Close,Volume\n\
2018/1/1,1,1,1,1,1,1\n\
2018-01-01,2,2,2,2,2,2\n";
        assert!(matches!(
            parse_csv("X", text),
            Err(DataError::DuplicateDate(date)) if date == d(2018, 1, 1)
        ));
    }

    #[test]
    fn columns_are_found_by_name() {
        let text = "Volume,Adj Close,Date,Close,Low,High,Open,Extra\n\
10,5.5,2018-01-02,5.5,5,6,5.2,zzz\n\
12,5.7,2018-01-01,5.7,5.1,6.1,5.3,zzz\n";
        let s = parse_csv("X", text).unwrap().series;
        assert_eq!(s.first_date(), d(2018, 1, 1));
        assert_eq!(s.bars()[1].open, 5.2);
        assert_eq!(s.bars()[1].volume, 10);
    }

    #[test]
    fn malformed_inputs() {
        let missing = "Date,Open,High,Low,Close,Volume\n2018-01-01,1,1,1,1,1\n";
        assert!(matches!(
            parse_csv("X", missing),
            Err(DataError::MalformedCsv { .. })
        ));
        let bad_num = "Date,Open,High,Low,Close,Adj Close,Volume\n2018-01-01,1,abc,1,1,1,1\n";
        assert!(matches!(
            parse_csv("X", bad_num),
            Err(DataError::MalformedCsv { line: Some(2), .. })
        ));
        let bad_date = "Date,Open,High,Low,Close,Adj Close,Volume\n01.01.2018,1,1,1,1,1,1\n";
        assert!(matches!(
            parse_csv("X", bad_date),
            Err(DataError::MalformedCsv { .. })
        ));
    }

    #[test]
    fn serialized_header_is_exact() {
        let s = parse_csv("X", INDEX_TABLE).unwrap().series;
        let text = serialize_csv(&s);
        assert!(text.starts_with("Date,Open,High,Low,Close,Adj Close,Volume\n2018-01-01,"));
    }

    fn arb_series() -> impl Strategy<Value = PriceSeries> {
        prop::collection::vec(
            (0.01f64..1e5, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.01f64..1e5, 0u64..u64::MAX / 2),
            1..60,
        )
        .prop_map(|rows| {
            let start = d(2000, 1, 3);
            let bars = rows
                .into_iter()
                .enumerate()
                .map(|(i, (low, a, b, spread, adj, volume))| {
                    let high = low + spread * 10.0 + 0.01;
                    Bar {
                        date: start + chrono::Days::new(i as u64 * 3),
                        open: (low + a * (high - low)).min(high),
                        high,
                        low,
                        close: (low + b * (high - low)).min(high),
                        adj_close: adj,
                        volume,
                    }
                })
                .collect();
            PriceSeries::new("RT", bars).unwrap()
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_identity(series in arb_series()) {
            let text = serialize_csv(&series);
            let parsed = parse_csv("RT", &text).unwrap();
            prop_assert_eq!(parsed.dropped_rows, 0);
            prop_assert_eq!(parsed.series, series);
        }
    }
}
