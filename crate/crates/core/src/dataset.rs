//! Line-oriented dataset readers and seeded synthetic generators.
//!
//! Input files are UTF-8 with one element per line (LF or CRLF); blank lines
//! are skipped. Readers are lazy and hold only the current line. Generators
//! reproduce the same sequence for the same `(count, seed)` pair: numeric
//! values uniform over [-1000, 1000], strings of 4 to 8 letters drawn
//! uniformly from the 52-letter alphabet.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug)]
pub enum DataError {
    Io(io::Error),
    /// A line failed to parse as a decimal literal.
    Parse { line: usize, content: String },
    /// A line was not valid UTF-8.
    InvalidUtf8 { line: usize },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Parse { line, content } => {
                write!(f, "line {line}: cannot parse {content:?} as a number")
            }
            Self::InvalidUtf8 { line } => write!(f, "line {line}: invalid UTF-8"),
        }
    }
}

impl std::error::Error for DataError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for DataError {
    fn from(e: io::Error) -> Self {
        DataError::Io(e)
    }
}

/// Where a dataset comes from: a file on disk or a seeded generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSpec {
    NumericFile(PathBuf),
    StringFile(PathBuf),
    NumericGenerated { count: usize, seed: u64 },
    StringGenerated { count: usize, seed: u64 },
}

impl DatasetSpec {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            DatasetSpec::NumericFile(_) | DatasetSpec::NumericGenerated { .. }
        )
    }
}

/// Non-blank lines of a file with their 1-based line numbers.
struct NonBlankLines {
    lines: Lines<BufReader<File>>,
    line_no: usize,
}

impl NonBlankLines {
    fn open(path: &Path) -> Result<Self, DataError> {
        let file = File::open(path)?;
        Ok(NonBlankLines {
            lines: BufReader::new(file).lines(),
            line_no: 0,
        })
    }
}

impl Iterator for NonBlankLines {
    type Item = Result<(usize, String), DataError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let raw = self.lines.next()?;
            self.line_no += 1;
            match raw {
                Ok(mut line) => {
                    if line.ends_with('\r') {
                        line.pop();
                    }
                    if line.is_empty() {
                        continue;
                    }
                    return Some(Ok((self.line_no, line)));
                }
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    return Some(Err(DataError::InvalidUtf8 { line: self.line_no }));
                }
                Err(e) => return Some(Err(DataError::Io(e))),
            }
        }
    }
}

/// Lazily parse one 64-bit float per line. Lines that are blank after
/// trimming whitespace are skipped; anything else that fails to parse
/// reports its line number.
pub fn read_numeric(
    path: impl AsRef<Path>,
) -> Result<impl Iterator<Item = Result<f64, DataError>>, DataError> {
    let lines = NonBlankLines::open(path.as_ref())?;
    Ok(lines.filter_map(|item| match item {
        Ok((line_no, line)) => {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                return None;
            }
            Some(trimmed.parse::<f64>().map_err(|_| DataError::Parse {
                line: line_no,
                content: trimmed.to_string(),
            }))
        }
        Err(e) => Some(Err(e)),
    }))
}

/// Lazily yield one string per line, verbatim apart from the stripped line
/// terminator. Interior whitespace is preserved; empty lines are skipped.
pub fn read_strings(
    path: impl AsRef<Path>,
) -> Result<impl Iterator<Item = Result<String, DataError>>, DataError> {
    let lines = NonBlankLines::open(path.as_ref())?;
    Ok(lines.map(|item| item.map(|(_, line)| line)))
}

/// Number of elements a dataset yields. Generated datasets answer directly;
/// files are scanned once (parse errors surface here).
pub fn count_elements(spec: &DatasetSpec) -> Result<usize, DataError> {
    match spec {
        DatasetSpec::NumericFile(path) => {
            let mut count = 0usize;
            for item in read_numeric(path)? {
                item?;
                count += 1;
            }
            Ok(count)
        }
        DatasetSpec::StringFile(path) => {
            let mut count = 0usize;
            for item in read_strings(path)? {
                item?;
                count += 1;
            }
            Ok(count)
        }
        DatasetSpec::NumericGenerated { count, .. } | DatasetSpec::StringGenerated { count, .. } => {
            Ok(*count)
        }
    }
}

/// `count` doubles uniform over [-1000, 1000], reproducible per seed.
pub fn generate_numeric(count: usize, seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(move |_| rng.gen_range(-1000.0..=1000.0))
}

/// `count` strings of 4 to 8 characters drawn uniformly from `a-zA-Z`,
/// reproducible per seed.
pub fn generate_strings(count: usize, seed: u64) -> impl Iterator<Item = String> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(move |_| {
        let len = rng.gen_range(4..=8usize);
        (0..len)
            .map(|_| {
                let i = rng.gen_range(0..52u8);
                if i < 26 {
                    (b'a' + i) as char
                } else {
                    (b'A' + i - 26) as char
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn numeric_reader_parses_in_order() {
        let f = write_temp(b"1.5\n-2\n");
        let values: Vec<f64> = read_numeric(f.path())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(values, vec![1.5, -2.0]);
    }

    #[test]
    fn numeric_reader_accepts_exponents_and_signs() {
        let f = write_temp(b"+1e3\n-2.5E-2\n.5\n");
        let values: Vec<f64> = read_numeric(f.path())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(values, vec![1000.0, -0.025, 0.5]);
    }

    #[test]
    fn numeric_reader_reports_parse_error_with_line_number() {
        let f = write_temp(b"1\n2\nabc\n4\n");
        let mut iter = read_numeric(f.path()).unwrap();
        assert_eq!(iter.next().unwrap().unwrap(), 1.0);
        assert_eq!(iter.next().unwrap().unwrap(), 2.0);
        match iter.next().unwrap() {
            Err(DataError::Parse { line, content }) => {
                assert_eq!(line, 3);
                assert_eq!(content, "abc");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn numeric_reader_skips_blank_lines_and_handles_empty_file() {
        let f = write_temp(b"\n1\n\n\n2\n\n");
        let values: Vec<f64> = read_numeric(f.path())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(values, vec![1.0, 2.0]);

        let empty = write_temp(b"");
        assert_eq!(read_numeric(empty.path()).unwrap().count(), 0);
    }

    #[test]
    fn string_reader_strips_crlf_and_preserves_interior_whitespace() {
        let f = write_temp(b"alpha beta\r\n\r\n  spaced  \r\ngamma\n");
        let values: Vec<String> = read_strings(f.path())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(values, vec!["alpha beta", "  spaced  ", "gamma"]);
    }

    #[test]
    fn string_reader_reports_invalid_utf8() {
        let f = write_temp(b"ok\n\xff\xfe\n");
        let mut iter = read_strings(f.path()).unwrap();
        assert_eq!(iter.next().unwrap().unwrap(), "ok");
        assert!(matches!(
            iter.next().unwrap(),
            Err(DataError::InvalidUtf8 { line: 2 })
        ));
    }

    #[test]
    fn reader_missing_file_is_io_error() {
        assert!(matches!(
            read_numeric("/nonexistent/definitely/missing.txt"),
            Err(DataError::Io(_))
        ));
    }

    #[test]
    fn numeric_generator_is_deterministic_and_in_range() {
        let a: Vec<f64> = generate_numeric(1000, 9).collect();
        let b: Vec<f64> = generate_numeric(1000, 9).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-1000.0..=1000.0).contains(v)));
        assert_eq!(generate_numeric(0, 9).count(), 0);
        let c: Vec<f64> = generate_numeric(10, 10).collect();
        assert_ne!(&a[..10], &c[..]);
    }

    #[test]
    fn numeric_generator_mean_is_near_zero() {
        let n = 1_000_000;
        let mean = generate_numeric(n, 123).sum::<f64>() / n as f64;
        // Standard error is about 0.577; five is a comfortable margin.
        assert!(mean.abs() < 5.0, "mean {mean}");
    }

    #[test]
    fn string_generator_shape() {
        let strings: Vec<String> = generate_strings(100_000, 77).collect();
        let mut length_counts = [0usize; 9];
        for s in &strings {
            assert!(s.len() >= 4 && s.len() <= 8, "bad length: {s:?}");
            assert!(s.bytes().all(|b| b.is_ascii_alphabetic()), "bad chars: {s:?}");
            length_counts[s.len()] += 1;
        }
        // Each length should carry 20% plus or minus one point.
        for len in 4..=8 {
            let share = length_counts[len] as f64 / strings.len() as f64;
            assert!((share - 0.2).abs() < 0.01, "length {len} share {share}");
        }
        assert_eq!(generate_strings(0, 77).count(), 0);
        let again: Vec<String> = generate_strings(100, 77).collect();
        assert_eq!(&strings[..100], &again[..]);
    }
}
