//! Finite binary words: Morse blocks, complements, concatenation, and the
//! overlap (`BBb`) and cube (`BBB`) scanners.
//!
//! Word positions are 0-based. Infinite points in [`crate::symseq`] are
//! 1-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Morse block order materialized by default (2^30 symbols).
pub const MAX_BLOCK_ORDER: u32 = 30;

/// A finite word over {0, 1}.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word {
    symbols: Vec<u8>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Builds a word from raw symbols, rejecting anything outside {0, 1}.
    pub fn from_bits(symbols: Vec<u8>) -> Result<Self> {
        if let Some(pos) = symbols.iter().position(|&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "symbol {} at position {pos} is not a bit",
                symbols[pos]
            )));
        }
        Ok(Word { symbols })
    }

    pub(crate) fn from_bits_unchecked(symbols: Vec<u8>) -> Self {
        debug_assert!(symbols.iter().all(|&b| b <= 1));
        Word { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn as_bits(&self) -> &[u8] {
        &self.symbols
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.symbols
    }

    pub fn get(&self, pos: usize) -> Option<u8> {
        self.symbols.get(pos).copied()
    }

    /// Sub-word `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Option<Word> {
        let end = start.checked_add(len)?;
        self.symbols
            .get(start..end)
            .map(|s| Word::from_bits_unchecked(s.to_vec()))
    }

    pub fn complement(&self) -> Word {
        complement(self)
    }

    pub fn concat(&self, other: &Word) -> Word {
        concat(self, other)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.symbols.iter().map(|&b| (b'0' + b) as char).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .bytes()
            .enumerate()
            .map(|(i, c)| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::InvalidArgument(format!(
                    "word character {:?} at position {i} is not 0 or 1",
                    c as char
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Word { symbols })
    }
}

impl TryFrom<String> for Word {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

/// The Morse block `M_order`, of length `2^order`, with the default cap.
pub fn morse_block(order: u32) -> Result<Word> {
    morse_block_capped(order, MAX_BLOCK_ORDER)
}

/// `M_order` built by the doubling recurrence `M_i = M_{i-1} complement(M_{i-1})`.
pub fn morse_block_capped(order: u32, max_order: u32) -> Result<Word> {
    if order > max_order {
        return Err(Error::capacity("Morse block order", order, max_order));
    }
    let mut symbols = Vec::with_capacity(1usize << order);
    symbols.push(0u8);
    for _ in 0..order {
        let n = symbols.len();
        for i in 0..n {
            let flipped = symbols[i] ^ 1;
            symbols.push(flipped);
        }
    }
    Ok(Word::from_bits_unchecked(symbols))
}

pub fn complement(w: &Word) -> Word {
    Word::from_bits_unchecked(w.symbols.iter().map(|b| b ^ 1).collect())
}

pub fn concat(a: &Word, b: &Word) -> Word {
    let mut symbols = Vec::with_capacity(a.len() + b.len());
    symbols.extend_from_slice(&a.symbols);
    symbols.extend_from_slice(&b.symbols);
    Word::from_bits_unchecked(symbols)
}

/// Location of a periodic factor: 0-based start and the length of `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub start: usize,
    pub block_len: usize,
}

impl Witness {
    /// Total length of the factor for a shape that repeats `B` and then
    /// adds `tail` more symbols of period `|B|`.
    pub fn span(&self, tail: usize) -> usize {
        2 * self.block_len + tail
    }
}

/// First factor `B B b` (b the first symbol of `B`, `|B| >= 1`), ordered by
/// start then by `|B|`. Absent exactly when `w` is overlap-free.
pub fn find_bbb_pattern(w: &Word) -> Option<Witness> {
    find_periodic(w.as_bits(), |_| 1)
}

/// First cube `B B B` with `|B| >= 1`, ordered by start then by `|B|`.
pub fn find_cube(w: &Word) -> Option<Witness> {
    find_periodic(w.as_bits(), |b| b)
}

/// For each period `b`, a factor of length `2b + tail(b)` with period `b`
/// is the same thing as `b + tail(b)` consecutive positions `t` with
/// `w[t] == w[t + b]`. One linear pass per period.
fn find_periodic(w: &[u8], tail: impl Fn(usize) -> usize) -> Option<Witness> {
    let n = w.len();
    let mut best: Option<Witness> = None;
    let mut b = 1;
    while 2 * b + tail(b) <= n {
        let need = b + tail(b);
        let mut run = 0usize;
        // Positions past the current best start cannot improve the answer.
        let limit = best.map_or(n - b, |w| (w.start + need).min(n - b));
        for t in 0..limit {
            if w[t] == w[t + b] {
                run += 1;
                if run == need {
                    let cand = Witness {
                        start: t + 1 - need,
                        block_len: b,
                    };
                    if best.map_or(true, |cur| cand < cur) {
                        best = Some(cand);
                    }
                    break;
                }
            } else {
                run = 0;
            }
        }
        b += 1;
    }
    best
}

/// Whether `needle` occurs contiguously in `haystack`; the empty word is a
/// factor of everything.
pub fn is_factor(needle: &Word, haystack: &Word) -> bool {
    if needle.is_empty() {
        return true;
    }
    haystack
        .as_bits()
        .windows(needle.len())
        .any(|win| win == needle.as_bits())
}
