//! State spaces and token sequences.

use std::fmt;

use crate::error::{Error, Result};

/// Default limit on `d^n` for operations that enumerate the whole space.
pub const DEFAULT_DENSE_CAP: u64 = 65_536;

pub type Token = u32;

/// The universe of length-`n` sequences over an alphabet of `d` tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateSpace {
    n: usize,
    d: usize,
    mask_token: Option<Token>,
    dense_cap: u64,
}

impl StateSpace {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_mask(n, d, None)
    }

    pub fn with_mask(n: usize, d: usize, mask_token: Option<Token>) -> Result<Self> {
        if n < 1 {
            return Err(Error::Validation(format!("sequence length must be >= 1, got {n}")));
        }
        if d < 2 {
            return Err(Error::Validation(format!("alphabet size must be >= 2, got {d}")));
        }
        if d > Token::MAX as usize {
            return Err(Error::Validation(format!("alphabet size {d} is too large")));
        }
        if let Some(m) = mask_token {
            if m as usize >= d {
                return Err(Error::Validation(format!(
                    "mask token {m} is not a valid token for alphabet size {d}"
                )));
            }
        }
        Ok(Self {
            n,
            d,
            mask_token,
            dense_cap: DEFAULT_DENSE_CAP,
        })
    }

    /// Returns a copy with a different enumeration cap.
    pub fn with_dense_cap(mut self, cap: u64) -> Self {
        self.dense_cap = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mask_token(&self) -> Option<Token> {
        self.mask_token
    }

    pub fn dense_cap(&self) -> u64 {
        self.dense_cap
    }

    /// `d^n`, or `None` when it does not fit in 128 bits.
    pub fn num_states(&self) -> Option<u128> {
        (self.d as u128).checked_pow(self.n as u32)
    }

    pub fn is_enumerable(&self) -> bool {
        matches!(self.num_states(), Some(s) if s <= self.dense_cap as u128)
    }

    /// Number of states, or a cap error when the space may not be enumerated.
    pub fn require_dense(&self) -> Result<usize> {
        match self.num_states() {
            Some(s) if s <= self.dense_cap as u128 => Ok(s as usize),
            other => Err(Error::CapExceeded {
                what: "state space d^n",
                size: other.unwrap_or(u128::MAX),
                cap: self.dense_cap as u128,
                hint: "use the sampled method or raise the dense cap",
            }),
        }
    }

    /// Same alphabet and length; caps and mask designations may differ.
    pub fn same_shape(&self, other: &StateSpace) -> bool {
        self.n == other.n && self.d == other.d
    }

    pub fn check_same(&self, other: &StateSpace) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "n={} d={} vs n={} d={}",
                self.n, self.d, other.n, other.d
            )))
        }
    }

    pub fn state(&self, tokens: Vec<Token>) -> Result<SequenceState> {
        let s = SequenceState(tokens);
        self.validate(&s)?;
        Ok(s)
    }

    pub fn validate(&self, s: &SequenceState) -> Result<()> {
        if s.0.len() != self.n {
            return Err(Error::Validation(format!(
                "state {s} has length {}, expected {}",
                s.0.len(),
                self.n
            )));
        }
        if let Some(t) = s.0.iter().find(|&&t| t as usize >= self.d) {
            return Err(Error::Validation(format!(
                "token {t} in state {s} is outside alphabet of size {}",
                self.d
            )));
        }
        Ok(())
    }

    /// Big-endian mixed-radix index, so index order equals lexicographic order.
    pub fn index_of(&self, s: &SequenceState) -> usize {
        s.0.iter().fold(0usize, |acc, &t| acc * self.d + t as usize)
    }

    pub fn state_at(&self, mut index: usize) -> SequenceState {
        let mut tokens = vec![0; self.n];
        for slot in tokens.iter_mut().rev() {
            *slot = (index % self.d) as Token;
            index /= self.d;
        }
        SequenceState(tokens)
    }

    /// All states in lexicographic order. Requires an enumerable space.
    pub fn states(&self) -> Result<impl Iterator<Item = SequenceState> + '_> {
        let size = self.require_dense()?;
        Ok((0..size).map(move |i| self.state_at(i)))
    }

    /// The all-mask sequence, if a mask token is designated.
    pub fn all_mask(&self) -> Option<SequenceState> {
        self.mask_token.map(|m| SequenceState(vec![m; self.n]))
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} d={} mask=", self.n, self.d)?;
        match self.mask_token {
            Some(m) => write!(f, "{m}"),
            None => f.write_str("none"),
        }
    }
}

/// A sequence of tokens. Ordering is lexicographic over the tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequenceState(pub(crate) Vec<Token>);

impl SequenceState {
    /// Builds a state without checking it against a space.
    pub fn from_tokens(tokens: impl Into<Vec<Token>>) -> Self {
        Self(tokens.into())
    }

    /// Parses a compact digit string such as `"01"` (alphabets up to 10 tokens).
    pub fn from_digits(digits: &str) -> Result<Self> {
        digits
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::Validation(format!("'{c}' is not a digit")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Token {
        self.0[i]
    }

    pub fn hamming(&self, other: &SequenceState) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for SequenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
