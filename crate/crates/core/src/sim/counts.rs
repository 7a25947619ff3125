use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("histogram sums to {sum} but header says {shots} shots")]
    ShotMismatch { sum: u64, shots: u64 },
    #[error("bitstrings have inconsistent widths")]
    WidthMismatch,
}

/// Renders the low `width` bits of `word` with clbit 0 as the rightmost
/// character.
pub fn bitstring(word: u64, width: usize) -> String {
    (0..width).rev().map(|k| if (word >> k) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Histogram of readout bitstrings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counts {
    width: usize,
    shots: u64,
    histogram: BTreeMap<String, u64>,
}

impl Counts {
    pub fn new(width: usize) -> Self {
        Counts { width, shots: 0, histogram: BTreeMap::new() }
    }

    pub fn from_histogram(width: usize, histogram: BTreeMap<String, u64>) -> Result<Self, CountsError> {
        if histogram.keys().any(|k| k.len() != width || !k.bytes().all(|b| b == b'0' || b == b'1')) {
            return Err(CountsError::WidthMismatch);
        }
        let shots = histogram.values().sum();
        Ok(Counts { width, shots, histogram })
    }

    pub fn add(&mut self, word: u64, n: u64) {
        if n == 0 {
            return;
        }
        *self.histogram.entry(bitstring(word, self.width)).or_insert(0) += n;
        self.shots += n;
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn histogram(&self) -> &BTreeMap<String, u64> {
        &self.histogram
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.histogram.get(bits).copied().unwrap_or(0)
    }

    /// Number of shots in which clbit `k` read 1.
    pub fn ones_at(&self, k: usize) -> u64 {
        let pos = self.width - 1 - k;
        self.histogram.iter().filter(|(b, _)| b.as_bytes()[pos] == b'1').map(|(_, n)| n).sum()
    }

    /// Parses the text form written by `Display`.
    pub fn parse(text: &str) -> Result<Self, CountsError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let syntax = |line: usize, msg: &str| CountsError::Syntax { line: line + 1, msg: msg.into() };
        let (l0, header) = lines.next().ok_or_else(|| syntax(0, "missing `shots N` header"))?;
        let shots: u64 = header
            .trim()
            .strip_prefix("shots ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| syntax(l0, "expected `shots N`"))?;
        let mut histogram = BTreeMap::new();
        let mut width = None;
        for (i, line) in lines {
            let mut toks = line.split_whitespace();
            let (Some(bits), Some(n), None) = (toks.next(), toks.next(), toks.next()) else {
                return Err(syntax(i, "expected `bitstring count`"));
            };
            let n: u64 = n.parse().map_err(|_| syntax(i, "bad count"))?;
            if *width.get_or_insert(bits.len()) != bits.len() {
                return Err(CountsError::WidthMismatch);
            }
            *histogram.entry(bits.to_string()).or_insert(0) += n;
        }
        let c = Counts::from_histogram(width.unwrap_or(0), histogram)?;
        if c.shots != shots {
            return Err(CountsError::ShotMismatch { sum: c.shots, shots });
        }
        Ok(c)
    }
}

impl fmt::Display for Counts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shots {}", self.shots)?;
        for (b, n) in &self.histogram {
            writeln!(f, "{b} {n}")?;
        }
        Ok(())
    }
}
