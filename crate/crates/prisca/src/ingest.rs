//! Text ingestion: one value per line, or `time,value` rows where repeated
//! integer times become multiple observations of one instant.

use std::path::Path;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Reads a series from a UTF-8 file. See [`parse_series`] for the format.
pub fn ingest(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path)?;
    parse_series(&text)
}

/// Parses series text.
///
/// Accepted layouts, chosen by the first data row's column count:
/// one value per line, or `time,value` with nondecreasing integer times.
/// Strictly increasing times give a plain series; repeated times group into
/// multi-observation instants. A non-numeric first line is taken as a
/// header. Blank lines are skipped; CRLF endings are fine. Errors carry
/// 1-based line numbers.
pub fn parse_series(text: &str) -> Result<TimeSeries> {
    let mut columns: Option<usize> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut last_time: Option<i64> = None;
    let mut saw_first = false;
    let mut line_count = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        line_count = line;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if !saw_first {
            saw_first = true;
            if fields.iter().any(|f| f.parse::<f64>().is_err()) {
                // Header row.
                continue;
            }
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(n) if n != fields.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {n} columns, found {}", fields.len()),
                })
            }
            Some(_) => {}
        }
        match fields.len() {
            1 => {
                values.push(parse_value(fields[0], line)?);
                counts.push(1);
            }
            2 => {
                let time: i64 = fields[0].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid integer time {:?}", fields[0]),
                })?;
                let value = parse_value(fields[1], line)?;
                match last_time {
                    Some(prev) if time < prev => {
                        return Err(Error::Parse {
                            line,
                            message: "time not increasing".into(),
                        })
                    }
                    Some(prev) if time == prev => {
                        *counts.last_mut().expect("group exists") += 1;
                    }
                    _ => counts.push(1),
                }
                last_time = Some(time);
                values.push(value);
            }
            n => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 1 or 2 columns, found {n}"),
                })
            }
        }
    }

    if values.is_empty() {
        return Err(Error::Parse { line: line_count + 1, message: "no data rows".into() });
    }
    if counts.iter().all(|&c| c == 1) {
        TimeSeries::new(values)
    } else {
        TimeSeries::with_counts(values, counts)
    }
}

fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("invalid number {field:?}") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("value {field:?} is not finite") });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column() {
        let s = parse_series("1.0\n2.0\n").unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
        assert!(!s.has_replicates());
    }

    #[test]
    fn repeated_times_group_into_counts() {
        let s = parse_series("t,y\n1,0.5\n1,0.7\n2,0.1\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.counts(), Some(&[2, 1][..]));
        assert_eq!(s.values(), &[0.5, 0.7, 0.1]);
    }

    #[test]
    fn decreasing_time_is_an_error_with_the_line() {
        let err = parse_series("1,0.5\n0,0.2\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert_eq!(message, "time not increasing");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn strictly_increasing_times_give_a_plain_series() {
        let s = parse_series("10,1.5\n12,2.5\n20,3.5\n").unwrap();
        assert_eq!(s.len(), 3);
        assert!(!s.has_replicates());
        let neg = parse_series("-3,1.0\n-1,2.0\n").unwrap();
        assert_eq!(neg.len(), 2);
    }

    #[test]
    fn crlf_blank_lines_and_padding_are_tolerated() {
        let s = parse_series("1.0\r\n\r\n 2.0 \r\n").unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
    }

    #[test]
    fn bad_payloads_carry_line_numbers() {
        match parse_series("1.0\nx\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        match parse_series("1.0\nnan\n").unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("finite"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        match parse_series("1,2.0\n3\n").unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("columns"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(matches!(parse_series(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_series_headers_only(), Err(Error::Parse { line: 2, .. })));
    }

    fn parse_series_headers_only() -> Result<TimeSeries> {
        parse_series("t,y\n")
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = ingest(Path::new("/nonexistent/series.csv")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
