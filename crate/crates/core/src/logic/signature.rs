use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("relation `{0}` declared twice")]
    Duplicate(String),
    #[error("relation `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("relation `{name}` used with arity {found}, previously {expected}")]
    Conflict {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("bad signature entry `{0}` (expected NAME/ARITY)")]
    Syntax(String),
}

/// Relation symbols with their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        if arity == 0 {
            return Err(SignatureError::ZeroArity(name.to_string()));
        }
        if self.relations.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.relations.insert(name.to_string(), arity);
        Ok(())
    }

    /// Adds `name` unless it is already present with the same arity.
    pub fn observe(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        match self.relations.get(name) {
            Some(&a) if a == arity => Ok(()),
            Some(&a) => Err(SignatureError::Conflict {
                name: name.to_string(),
                expected: a,
                found: arity,
            }),
            None => self.declare(name, arity),
        }
    }

    pub fn with(mut self, name: &str, arity: usize) -> Self {
        self.declare(name, arity).expect("valid signature entry");
        self
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    /// Relations in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.relations.iter().map(|(n, &a)| (n.as_str(), a))
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Parses the compact `E/2,P/1` form used on the command line.
    pub fn parse_compact(text: &str) -> Result<Self, SignatureError> {
        let mut sig = Signature::new();
        for entry in text.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (name, arity) = entry
                .split_once('/')
                .ok_or_else(|| SignatureError::Syntax(entry.to_string()))?;
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| SignatureError::Syntax(entry.to_string()))?;
            sig.declare(name.trim(), arity)?;
        }
        Ok(sig)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(n, a)| format!("{n}/{a}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_arity_and_duplicates() {
        let mut s = Signature::new();
        assert!(s.declare("E", 0).is_err());
        s.declare("E", 2).unwrap();
        assert_eq!(s.declare("E", 2), Err(SignatureError::Duplicate("E".into())));
        assert!(s.observe("E", 2).is_ok());
        assert!(s.observe("E", 3).is_err());
    }

    #[test]
    fn compact_round_trip() {
        let s = Signature::parse_compact("E/2, P/1").unwrap();
        assert_eq!(s.to_string(), "E/2,P/1");
        assert!(Signature::parse_compact("E2").is_err());
    }
}
