use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Labels of the sites of `L_n` in lexicographic site order (0-based symbols).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowConfiguration(Vec<u8>);

impl RowConfiguration {
    pub fn new(symbols: Vec<u8>) -> Self {
        RowConfiguration(symbols)
    }

    /// The `index`-th configuration of length `len` in lexicographic order,
    /// i.e. `index` written in base `d`, first site most significant.
    pub fn from_index(d: usize, len: usize, mut index: u64) -> Self {
        let mut symbols = vec![0u8; len];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % d as u64) as u8;
            index /= d as u64;
        }
        RowConfiguration(symbols)
    }

    pub fn index(&self, d: usize) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &s| acc * d as u64 + s as u64)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bare 1-based digits when `d ≤ 9` (`"12"`), comma separated otherwise.
    pub fn render(&self, d: usize) -> String {
        let digits = self.0.iter().map(|&s| (s as usize + 1).to_string());
        if d <= 9 {
            digits.collect()
        } else {
            digits.collect::<Vec<_>>().join(",")
        }
    }
}

impl fmt::Display for RowConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.0.iter().copied().max().unwrap_or(0) as usize + 1;
        f.write_str(&self.render(max))
    }
}

impl fmt::Debug for RowConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for RowConfiguration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_symbol = |i: usize, t: &str| -> Result<u8> {
            match t.trim().parse::<u8>() {
                Ok(v) if (1..=64).contains(&v) => Ok(v - 1),
                _ => Err(Error::parse(0, i + 1, format!("bad symbol {t:?}"))),
            }
        };
        let symbols = if s.contains(',') {
            s.split(',')
                .enumerate()
                .map(|(i, t)| parse_symbol(i, t))
                .collect::<Result<Vec<_>>>()?
        } else {
            s.char_indices()
                .map(|(i, c)| parse_symbol(i, &c.to_string()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(RowConfiguration(symbols))
    }
}

impl Serialize for RowConfiguration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RowConfiguration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_indexing() {
        let all: Vec<String> = (0..4)
            .map(|i| RowConfiguration::from_index(2, 2, i).to_string())
            .collect();
        assert_eq!(all, ["11", "12", "21", "22"]);
        let c: RowConfiguration = "231".parse().unwrap();
        assert_eq!(c.index(3), 9 + 2 * 3);
        assert_eq!(RowConfiguration::from_index(3, 3, c.index(3)), c);
    }

    #[test]
    fn wide_alphabets_use_commas() {
        let c: RowConfiguration = "10,2".parse().unwrap();
        assert_eq!(c.symbols(), &[9, 1]);
        assert_eq!(c.render(12), "10,2");
        assert_eq!(c.to_string(), "10,2");
        assert!("1,0".parse::<RowConfiguration>().is_err());
        assert!("1a".parse::<RowConfiguration>().is_err());
    }
}
