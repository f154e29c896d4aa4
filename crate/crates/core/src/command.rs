//! Instrument commands: finite bit strings with explicit length.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommandParseError {
    #[error("invalid hex digit in command {0:?}")]
    BadHex(String),
    #[error("invalid bit length in command {0:?}")]
    BadLength(String),
    #[error("invalid binary digit in command {0:?}")]
    BadBinary(String),
}

/// A command transmitted to the instruments.
///
/// Equality is bitwise and includes the length, so `0` and `00` differ.
/// Concatenation (`concat`) is associative with [`Command::empty`] as identity.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Command {
    bits: Vec<bool>,
}

impl Command {
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            bits: bits.into_iter().collect(),
        }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_binary(s: &str) -> Result<Self, CommandParseError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CommandParseError::BadBinary(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|bits| Self { bits })
    }

    /// Big-endian encoding of `value` in exactly `width` bits.
    pub fn from_uint(value: u64, width: usize) -> Self {
        Self {
            bits: (0..width).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn concat(&self, other: &Command) -> Command {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Command { bits }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Hex form. Bits are left-aligned into nibbles; when the length is not a
    /// multiple of four the bit length is appended as `/<len>`.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.bits.len() / 4 + 4);
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, bit) in chunk.iter().enumerate() {
                if *bit {
                    nibble |= 1 << (3 - i);
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        if !self.bits.len().is_multiple_of(4) {
            out.push('/');
            out.push_str(&self.bits.len().to_string());
        }
        out
    }

    pub fn from_hex(s: &str) -> Result<Self, CommandParseError> {
        let (digits, len) = match s.split_once('/') {
            Some((d, l)) => {
                let len: usize = l.parse().map_err(|_| CommandParseError::BadLength(s.to_string()))?;
                (d, Some(len))
            }
            None => (s, None),
        };
        let mut bits = Vec::with_capacity(digits.len() * 4);
        for c in digits.chars() {
            let v = c.to_digit(16).ok_or_else(|| CommandParseError::BadHex(s.to_string()))?;
            for i in (0..4).rev() {
                bits.push((v >> i) & 1 == 1);
            }
        }
        if let Some(len) = len {
            if len > bits.len() || bits.len() - len >= 4 || bits[len..].iter().any(|b| *b) {
                return Err(CommandParseError::BadLength(s.to_string()));
            }
            bits.truncate(len);
        }
        Ok(Self { bits })
    }
}

impl fmt::Debug for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Command({self})")
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("ε");
        }
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Command {
    type Err = CommandParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_hex(s)
    }
}

impl Serialize for Command {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Command {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Command::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Finite command set in insertion order.
pub type CommandSet = IndexSet<Command>;
