use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// A string over `{0, 1}`. The first character is the front.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(VecDeque<bool>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit `{found}` at offset {offset}: only 0 and 1 are allowed")]
pub struct BitsError {
    pub offset: usize,
    pub found: char,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn front(&self) -> Option<bool> {
        self.0.front().copied()
    }

    pub fn pop_front(&mut self) -> Option<bool> {
        self.0.pop_front()
    }

    pub fn push_front(&mut self, bit: bool) {
        self.0.push_front(bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// All bit strings of length at most `max_len`, shortest first, then
    /// lexicographically.
    pub fn all_up_to(max_len: usize) -> Vec<Bits> {
        let mut out = vec![Bits::new()];
        let mut layer = vec![Bits::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for b in &layer {
                for bit in [false, true] {
                    let mut c = b.clone();
                    c.0.push_back(bit);
                    next.push(c);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl FromStr for Bits {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                found => Err(BitsError { offset, found }),
            })
            .collect()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Base-2 representation, most significant bit first; `bin(0)` is empty.
pub fn bin(n: u64) -> Bits {
    if n == 0 {
        return Bits::new();
    }
    let width = 64 - n.leading_zeros();
    (0..width).rev().map(|i| (n >> i) & 1 == 1).collect()
}

/// Inverse of [`bin`] on canonical strings (no leading zero). Returns `None`
/// for strings with a leading zero or more than 64 bits.
pub fn unbin(bits: &Bits) -> Option<u64> {
    if bits.front() == Some(false) || bits.len() > 64 {
        return None;
    }
    Some(bits.iter().fold(0u64, |acc, b| (acc << 1) | b as u64))
}
