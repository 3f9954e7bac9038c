//! Line-oriented input files: memory and table words in hex or binary, and
//! bit-string specs. Blank lines and `#` comments are skipped.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::polyenc::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct WordFileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> WordFileError {
    WordFileError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WordFormat {
    /// Binary when every line is exactly `word_bits` characters of 0/1,
    /// hex otherwise.
    #[default]
    Auto,
    Hex,
    Binary,
}

impl fmt::Display for WordFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordFormat::Auto => "auto",
            WordFormat::Hex => "hex",
            WordFormat::Binary => "binary",
        })
    }
}

impl FromStr for WordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(WordFormat::Auto),
            "hex" => Ok(WordFormat::Hex),
            "binary" | "bin" => Ok(WordFormat::Binary),
            _ => Err(format!("unknown word format {s:?} (auto, hex, binary)")),
        }
    }
}

fn content_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses one word per line; binary words are written most significant bit first.
pub fn parse_words(
    src: &str,
    word_bits: usize,
    format: WordFormat,
) -> Result<Vec<u64>, WordFileError> {
    if !(1..=64).contains(&word_bits) {
        return Err(err(0, format!("word size {word_bits} is outside 1..=64")));
    }
    let lines: Vec<(usize, &str)> = content_lines(src).collect();
    let binary = match format {
        WordFormat::Binary => true,
        WordFormat::Hex => false,
        WordFormat::Auto => {
            !lines.is_empty()
                && lines
                    .iter()
                    .all(|(_, l)| l.len() == word_bits && l.bytes().all(|b| b == b'0' || b == b'1'))
        }
    };
    lines
        .into_iter()
        .map(|(no, l)| {
            let clean = l.replace('_', "");
            let value = if binary {
                if clean.len() > word_bits {
                    return Err(err(no, format!("{l:?} is longer than {word_bits} bits")));
                }
                u64::from_str_radix(&clean, 2)
            } else {
                let digits = clean
                    .strip_prefix("0x")
                    .or_else(|| clean.strip_prefix("0X"))
                    .unwrap_or(&clean);
                u64::from_str_radix(digits, 16)
            }
            .map_err(|e| err(no, format!("{l:?}: {e}")))?;
            if word_bits < 64 && value >> word_bits != 0 {
                return Err(err(no, format!("{l:?} does not fit in {word_bits} bits")));
            }
            Ok(value)
        })
        .collect()
}

pub fn format_words(words: &[u64], word_bits: usize, format: WordFormat) -> String {
    let mut out = String::new();
    for w in words {
        match format {
            WordFormat::Binary => out.push_str(&format!("{w:0word_bits$b}\n")),
            _ => out.push_str(&format!("{:0width$x}\n", w, width = word_bits.div_ceil(4))),
        }
    }
    out
}

/// Bit strings, one per line, `b_1` first. `n` is taken from the first line
/// when not given; an empty spec needs it explicitly.
pub fn parse_bitstrings(
    src: &str,
    n: Option<usize>,
) -> Result<(Vec<BitString>, usize), WordFileError> {
    let mut width = n;
    let mut out = Vec::new();
    for (no, l) in content_lines(src) {
        let b: BitString = l.parse().map_err(|e| err(no, format!("{l:?}: {e}")))?;
        match width {
            Some(w) if w != b.len() => {
                return Err(err(no, format!("{l:?} has {} bits, expected {w}", b.len())))
            }
            Some(_) => {}
            None => width = Some(b.len()),
        }
        out.push(b);
    }
    let n = width.ok_or_else(|| err(0, "empty spec; give the bit count explicitly"))?;
    out.sort_unstable();
    out.dedup();
    Ok((out, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_detects_binary_and_hex() {
        assert_eq!(
            parse_words("01\n10\n11\n00\n", 2, WordFormat::Auto).unwrap(),
            vec![1, 2, 3, 0]
        );
        assert_eq!(
            parse_words("0x1f\nff # max\n\n0\n", 8, WordFormat::Auto).unwrap(),
            vec![0x1f, 0xff, 0]
        );
        assert_eq!(
            parse_words("1\n0\n", 1, WordFormat::Auto).unwrap(),
            vec![1, 0]
        );
        assert_eq!(parse_words("10\n", 8, WordFormat::Binary).unwrap(), vec![2]);
    }

    #[test]
    fn word_errors_name_the_line() {
        let e = parse_words("1\n\n3\n", 1, WordFormat::Hex).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(
            parse_words("zz\n", 4, WordFormat::Auto).unwrap_err().line,
            1
        );
        assert!(parse_words("1", 0, WordFormat::Auto).is_err());
    }

    #[test]
    fn words_round_trip() {
        let words = vec![0, 5, 255, 17];
        for f in [WordFormat::Hex, WordFormat::Binary] {
            assert_eq!(
                parse_words(&format_words(&words, 8, f), 8, f).unwrap(),
                words
            );
        }
    }

    #[test]
    fn bitstring_specs() {
        let (set, n) = parse_bitstrings("000\n001\n# c\n011\n111\n001\n", None).unwrap();
        assert_eq!(n, 3);
        assert_eq!(set.len(), 4);
        assert_eq!(parse_bitstrings("01\n011\n", None).unwrap_err().line, 2);
        assert!(parse_bitstrings("", None).is_err());
        assert_eq!(parse_bitstrings("", Some(4)).unwrap(), (vec![], 4));
    }
}
