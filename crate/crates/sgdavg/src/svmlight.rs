//! Reader and writer for the svmlight sparse text format:
//! `label idx:val idx:val ...` with 1-based strictly ascending indices,
//! labels `+1`/`-1` (bare `1` accepted as `+1`), `#` starting a comment.

use crate::vector::Vector;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: invalid label {token:?} (expected +1, -1 or 1)")]
    InvalidLabel { line: usize, token: String },
    #[error("line {line}: malformed feature token {token:?}")]
    MalformedToken { line: usize, token: String },
    #[error("line {line}: feature index {index} not ascending (previous index {prev})")]
    NonAscendingIndex {
        line: usize,
        index: usize,
        prev: usize,
    },
    #[error("line {line}: feature indices are 1-based, got 0")]
    ZeroIndex { line: usize },
    #[error("line {line}: non-finite feature value {token:?}")]
    NonFiniteValue { line: usize, token: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// One labeled sparse example.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    /// +1 or -1.
    pub label: i8,
    /// `(index, value)` pairs with strictly ascending 1-based indices.
    pub features: Vec<(usize, f64)>,
}

impl SparseExample {
    /// Sparse dot product against a dense vector of dimension >= max index.
    pub fn dot(&self, w: &Vector) -> f64 {
        self.features.iter().map(|&(i, v)| v * w[i - 1]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.features.iter().map(|&(_, v)| v * v).sum()
    }
}

/// An in-memory sparse dataset, read-only after parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub examples: Vec<SparseExample>,
    /// Largest feature index present; doubles as the inferred dimension.
    pub max_index: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.examples.iter().map(|e| e.features.len()).sum()
    }

    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.label > 0).count()
    }

    /// `max_i ||x_i||^2`, used when documenting gradient moment bounds.
    pub fn max_norm_sq(&self) -> f64 {
        self.examples
            .iter()
            .map(SparseExample::norm_sq)
            .fold(0.0, f64::max)
    }
}

/// Parses svmlight text. Empty lines and lines starting with `#` are
/// skipped; text after `#` on a line is ignored. Errors carry the 1-based
/// line number.
pub fn parse_svmlight(reader: impl BufRead, name: &str) -> Result<Dataset, ParseError> {
    let mut examples = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| ParseError::Io {
            path: name.to_string(),
            source,
        })?;
        let line_number = lineno + 1;
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label = match label_tok {
            "+1" | "1" => 1,
            "-1" => -1,
            _ => {
                return Err(ParseError::InvalidLabel {
                    line: line_number,
                    token: label_tok.to_string(),
                })
            }
        };
        let mut features = Vec::new();
        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_str, val_str) =
                tok.split_once(':')
                    .ok_or_else(|| ParseError::MalformedToken {
                        line: line_number,
                        token: tok.to_string(),
                    })?;
            let index: usize = idx_str.parse().map_err(|_| ParseError::MalformedToken {
                line: line_number,
                token: tok.to_string(),
            })?;
            if index == 0 {
                return Err(ParseError::ZeroIndex { line: line_number });
            }
            if index <= prev_index {
                return Err(ParseError::NonAscendingIndex {
                    line: line_number,
                    index,
                    prev: prev_index,
                });
            }
            let value: f64 = val_str.parse().map_err(|_| ParseError::MalformedToken {
                line: line_number,
                token: tok.to_string(),
            })?;
            if !value.is_finite() {
                return Err(ParseError::NonFiniteValue {
                    line: line_number,
                    token: tok.to_string(),
                });
            }
            prev_index = index;
            max_index = max_index.max(index);
            features.push((index, value));
        }
        examples.push(SparseExample { label, features });
    }
    Ok(Dataset {
        name: name.to_string(),
        examples,
        max_index,
    })
}

pub fn parse_svmlight_str(text: &str, name: &str) -> Result<Dataset, ParseError> {
    parse_svmlight(text.as_bytes(), name)
}

pub fn load_svmlight(path: &Path) -> Result<Dataset, ParseError> {
    let file = File::open(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_svmlight(BufReader::new(file), &name)
}

/// Writes the dataset back in svmlight syntax. Values use the shortest
/// representation that reparses to the same double, so
/// `parse(serialize(parse(text)))` equals `parse(text)`.
pub fn serialize_svmlight(dataset: &Dataset) -> String {
    let mut out = String::new();
    for ex in &dataset.examples {
        out.push_str(if ex.label > 0 { "+1" } else { "-1" });
        for &(i, v) in &ex.features {
            out.push_str(&format!(" {i}:{v}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_line() {
        let ds = parse_svmlight_str("+1 1:0.5 3:1.0", "t").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.examples[0].label, 1);
        assert_eq!(ds.examples[0].features, vec![(1, 0.5), (3, 1.0)]);
        assert_eq!(ds.max_index, 3);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let ds = parse_svmlight_str("-1 2:2\n# comment\n\n+1 1:1", "t").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.max_index, 2);
    }

    #[test]
    fn trailing_comment_ignored() {
        let ds = parse_svmlight_str("+1 1:1 # trailing note 9:9", "t").unwrap();
        assert_eq!(ds.examples[0].features, vec![(1, 1.0)]);
        assert_eq!(ds.max_index, 1);
    }

    #[test]
    fn rejects_non_ascending_index() {
        let err = parse_svmlight_str("+1 3:1 1:1", "t").unwrap_err();
        match err {
            ParseError::NonAscendingIndex { line, index, prev } => {
                assert_eq!((line, index, prev), (1, 1, 3));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_label_with_line_number() {
        let err = parse_svmlight_str("+1 1:1\n2 1:1", "t").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_malformed_token() {
        let err = parse_svmlight_str("+1 1:x", "t").unwrap_err();
        assert!(matches!(err, ParseError::MalformedToken { line: 1, .. }));
        let err = parse_svmlight_str("+1 nocolon", "t").unwrap_err();
        assert!(matches!(err, ParseError::MalformedToken { line: 1, .. }));
    }

    #[test]
    fn bare_one_is_positive() {
        let ds = parse_svmlight_str("1 1:2.5", "t").unwrap();
        assert_eq!(ds.examples[0].label, 1);
    }

    #[test]
    fn round_trip_reparses_equal() {
        let text = "+1 1:0.5 3:-1.25e-3\n-1 2:7\n+1 4:0.1";
        let ds = parse_svmlight_str(text, "t").unwrap();
        let reparsed = parse_svmlight_str(&serialize_svmlight(&ds), "t").unwrap();
        assert_eq!(ds, reparsed);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn example_strategy() -> impl Strategy<Value = SparseExample> {
            (
                prop_oneof![Just(1i8), Just(-1i8)],
                proptest::collection::btree_map(1usize..50, -1e6f64..1e6, 0..8),
            )
                .prop_map(|(label, feats)| SparseExample {
                    label,
                    features: feats.into_iter().collect(),
                })
        }

        proptest! {
            #[test]
            fn serialize_parse_round_trip(
                examples in proptest::collection::vec(example_strategy(), 1..20)
            ) {
                let max_index = examples
                    .iter()
                    .flat_map(|e| e.features.iter().map(|&(i, _)| i))
                    .max()
                    .unwrap_or(0);
                let ds = Dataset { name: "prop".into(), examples, max_index };
                let reparsed = parse_svmlight_str(&serialize_svmlight(&ds), "prop").unwrap();
                prop_assert_eq!(ds, reparsed);
            }
        }
    }
}
