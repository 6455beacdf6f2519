//! Reading observations.
//!
//! One decimal number per line. Blank lines and lines starting with `#` are
//! skipped, and a non-numeric first line is taken as the header of a
//! single-column CSV.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut values = Vec::new();
    let mut seen_data_line = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_data_line;
        seen_data_line = true;

        let columns = line.split(',').count();
        if columns > 1 {
            return Err(Error::Columns {
                line: idx + 1,
                columns,
            });
        }
        match parse_finite(line) {
            Some(v) => values.push(v),
            None if first && looks_like_header(line) => {}
            None => {
                return Err(Error::Parse {
                    line: idx + 1,
                    text: line.to_owned(),
                })
            }
        }
    }
    Ok(values)
}

fn parse_finite(s: &str) -> Option<f64> {
    let s = s.trim_matches('"').trim();
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

// A header names the column; anything that starts like a number, or spells
// a non-finite float, is a bad value instead.
fn looks_like_header(s: &str) -> bool {
    let s = s.trim_matches('"').trim();
    let numeric_start = s
        .chars()
        .next()
        .map_or(true, |c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.'));
    !numeric_start && s.parse::<f64>().is_err()
}

/// Reads a file, or standard input for `None` or `-`.
pub fn read_values(path: Option<&Path>) -> Result<Vec<f64>> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|source| Error::Io {
                    path: "<stdin>".into(),
                    source,
                })?;
            s
        }
    };
    parse_values(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_lines_and_comments() {
        let v = parse_values("# seeded draws\n0.5\n\n-1.25e-1\n  3 \r\n# end\n").unwrap();
        assert_eq!(v, vec![0.5, -0.125, 3.0]);
    }

    #[test]
    fn header_row_is_detected() {
        assert_eq!(parse_values("x\n1\n2\n").unwrap(), vec![1.0, 2.0]);
        assert_eq!(
            parse_values("\u{feff}\"value\"\n\"1.5\"\n").unwrap(),
            vec![1.5]
        );
        assert!(parse_values("1\nx\n").is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(matches!(
            parse_values("1\n2,3\n"),
            Err(Error::Columns { line: 2, .. })
        ));
        assert!(matches!(
            parse_values("1\nnan\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_values("inf\n").is_err());
        assert!(parse_values("1.2.3\n").is_err());
        assert!(parse_values("").unwrap().is_empty());
    }
}
