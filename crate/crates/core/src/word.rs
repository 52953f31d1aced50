//! Free-group words over named generators and their evaluation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;

/// Generator name to matrix. A `BTreeMap` so iteration order is fixed.
pub type Generators = BTreeMap<String, RationalMatrix>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Syllable {
    pub name: String,
    pub exp: i64,
}

/// A freely reduced word, stored as syllables `name^exp` with adjacent names
/// distinct and exponents nonzero. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupWord {
    syllables: Vec<Syllable>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a word from arbitrary `(name, exp)` pairs and reduces it.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, i64)>) -> Self {
        let mut w = Self::default();
        for (name, exp) in pairs {
            w.push(name.into(), exp);
        }
        w
    }

    pub fn letter(name: &str, exp: i64) -> Self {
        Self::from_pairs([(name, exp)])
    }

    fn push(&mut self, name: String, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.name == name {
                last.exp += exp;
                if last.exp == 0 {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push(Syllable { name, exp });
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length in letters, `sum |exp|`.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|s| s.exp.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for s in &other.syllables {
            w.push(s.name.clone(), s.exp);
        }
        w
    }

    pub fn inverse(&self) -> Self {
        Self::from_pairs(self.syllables.iter().rev().map(|s| (s.name.clone(), -s.exp)))
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut w = Self::identity();
        for _ in 0..n.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }

    /// Last letter as `(name, sign)`, if any.
    pub fn last_letter(&self) -> Option<(&str, i64)> {
        self.syllables.last().map(|s| (s.name.as_str(), s.exp.signum()))
    }

    /// Parses whitespace-separated `name` / `name^k` tokens. `""` and `"1"`
    /// denote the identity.
    pub fn parse(input: &str) -> Result<Self> {
        let mut w = Self::default();
        let trimmed = input.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(w);
        }
        let mut offset = 0;
        for token in input.split_whitespace() {
            let start = input[offset..].find(token).map(|p| p + offset).unwrap_or(offset);
            offset = start + token.len();
            let column = input[..start].chars().count() + 1;
            let err = |message: String| Error::Parse { column, message };
            let (name, exp) = match token.split_once('^') {
                Some((n, e)) => {
                    if e.is_empty() {
                        return Err(err(format!("missing exponent after '^' in {token:?}")));
                    }
                    let k: i64 = e.parse().map_err(|_| err(format!("bad exponent in {token:?}")))?;
                    if k == 0 {
                        return Err(err(format!("zero exponent in {token:?}")));
                    }
                    (n, k)
                }
                None => (token, 1),
            };
            if !is_identifier(name) {
                return Err(err(format!("bad generator name {name:?}")));
            }
            w.push(name.to_string(), exp);
        }
        Ok(w)
    }

    /// Evaluates the word: exact product of generator powers in word order.
    pub fn eval(&self, generators: &Generators) -> Result<RationalMatrix> {
        word_eval(generators, self)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if s.exp == 1 {
                write!(f, "{}", s.name)?;
            } else {
                write!(f, "{}^{}", s.name, s.exp)?;
            }
        }
        Ok(())
    }
}

/// Dimension shared by all generators; errors on an empty or mixed set.
pub fn generator_dim(generators: &Generators) -> Result<usize> {
    let mut dims = generators.values().map(RationalMatrix::dim);
    let d = dims.next().ok_or(Error::Empty("generator set"))?;
    for other in dims {
        if other != d {
            return Err(Error::DimensionMismatch { left: d, right: other });
        }
    }
    Ok(d)
}

pub fn word_eval(generators: &Generators, w: &GroupWord) -> Result<RationalMatrix> {
    let dim = match w.syllables.first() {
        Some(s) => generators.get(&s.name).ok_or_else(|| Error::UnboundGenerator(s.name.clone()))?.dim(),
        None => generator_dim(generators).unwrap_or(3),
    };
    let mut acc = RationalMatrix::identity(dim);
    for s in &w.syllables {
        let g = generators.get(&s.name).ok_or_else(|| Error::UnboundGenerator(s.name.clone()))?;
        acc = acc.try_mul(&g.pow(s.exp)?)?;
    }
    Ok(acc)
}
