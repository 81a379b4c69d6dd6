//! Atomic tokens and alphabets.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One atomic token. Content symbols come from an [`Alphabet`]; three
/// reserved specials mark sequence structure.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub const BOS_TEXT: &'static str = "<bos>";
    pub const SEP_TEXT: &'static str = "<sep>";
    pub const EOS_TEXT: &'static str = "<eos>";

    pub fn new(text: impl AsRef<str>) -> Self {
        let text = text.as_ref();
        match text {
            "⟨bos⟩" => Self::bos(),
            "⟨sep⟩" => Self::sep(),
            "⟨eos⟩" => Self::eos(),
            _ => Symbol(Arc::from(text)),
        }
    }

    pub fn bos() -> Self {
        Symbol(Arc::from(Self::BOS_TEXT))
    }

    pub fn sep() -> Self {
        Symbol(Arc::from(Self::SEP_TEXT))
    }

    pub fn eos() -> Self {
        Symbol(Arc::from(Self::EOS_TEXT))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_special(&self) -> bool {
        matches!(&*self.0, Self::BOS_TEXT | Self::SEP_TEXT | Self::EOS_TEXT)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<char> for Symbol {
    fn from(c: char) -> Self {
        Symbol::new(c.to_string())
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Symbol::new(s))
    }
}

/// Split a whitespace-separated token string into symbols.
///
/// `⟨bos⟩`-style spellings of the specials are accepted alongside `<bos>`.
pub fn tokenize(text: &str) -> Vec<Symbol> {
    text.split_whitespace().map(Symbol::new).collect()
}

/// Render symbols space-separated.
pub fn detokenize(symbols: &[Symbol]) -> String {
    let mut out = String::new();
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(s.as_str());
    }
    out
}

/// An ordered set of content symbols. Specials are never members.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
}

/// ASCII letters followed by digits: the 62-symbol default.
pub const DEFAULT_ALPHABET_CHARS: &str =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

impl Alphabet {
    /// Builds an alphabet, dropping duplicates and specials while keeping
    /// first-seen order.
    pub fn new<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Symbol>,
    {
        let mut alphabet = Alphabet::default();
        for s in symbols {
            alphabet.insert(s.into());
        }
        alphabet
    }

    pub fn from_chars(chars: &str) -> Self {
        Alphabet::new(chars.chars())
    }

    pub fn default_ascii() -> Self {
        Alphabet::from_chars(DEFAULT_ALPHABET_CHARS)
    }

    /// The default alphabet extended with `u062`, `u063`, ... until it holds
    /// at least `size` symbols. Used where injective sources exceed 62 tokens.
    pub fn extended(size: usize) -> Self {
        let mut alphabet = Alphabet::default_ascii();
        let mut next = alphabet.len();
        while alphabet.len() < size {
            alphabet.insert(Symbol::new(format!("u{next:03}")));
            next += 1;
        }
        alphabet
    }

    pub fn insert(&mut self, symbol: Symbol) -> bool {
        if symbol.is_special() || self.index.contains_key(&symbol) {
            return false;
        }
        self.index.insert(symbol.clone(), self.symbols.len());
        self.symbols.push(symbol);
        true
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        self.index.contains_key(symbol)
    }

    /// Content symbol or one of the reserved specials.
    pub fn admits(&self, symbol: &Symbol) -> bool {
        symbol.is_special() || self.contains(symbol)
    }

    pub fn position(&self, symbol: &Symbol) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_bracket_spellings_are_normalized() {
        assert_eq!(Symbol::new("⟨bos⟩"), Symbol::bos());
        assert_eq!(Symbol::new("⟨sep⟩"), Symbol::sep());
        assert!(Symbol::new("<eos>").is_special());
        assert!(!Symbol::new("a").is_special());
    }

    #[test]
    fn alphabet_rejects_specials_and_duplicates() {
        let a = Alphabet::new(["a", "b", "a", "<sep>"]);
        assert_eq!(a.len(), 2);
        assert!(a.admits(&Symbol::sep()));
        assert!(!a.contains(&Symbol::sep()));
    }

    #[test]
    fn extended_alphabet_grows_past_default() {
        let a = Alphabet::extended(500);
        assert_eq!(a.len(), 500);
        assert!(a.contains(&Symbol::new("u499")));
        assert_eq!(Alphabet::extended(10).len(), 62);
    }
}
