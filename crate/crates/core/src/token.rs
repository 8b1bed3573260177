//! Tokens: canonical string keys, one per (feature name, value) pair.
//!
//! A token is the concatenation `feature SEP value` where `SEP` is a reserved
//! separator character. The separator keeps distinct pairs distinct: raw
//! concatenation would collide `("x1", "23")` with `("x12", "3")`.

use crate::error::{Error, Result};

/// Default reserved separator: the ASCII unit separator. It cannot occur in
/// CSV header names or canonical values produced by this crate's loaders, so
/// token keys always contain it exactly once.
pub const DEFAULT_SEPARATOR: char = '\u{1f}';

/// Exact-match key into the inverted index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Builds the token for one feature/value pair.
    ///
    /// Rejects empty feature names and names or values containing the
    /// separator; either signals a corrupt schema.
    pub fn new(feature: &str, value: &str, separator: char) -> Result<Token> {
        if feature.is_empty() || feature.contains(separator) {
            return Err(Error::BadFeatureName(feature.to_string()));
        }
        if value.contains(separator) {
            return Err(Error::SeparatorInValue {
                feature: feature.to_string(),
                value: value.to_string(),
            });
        }
        let mut key = String::with_capacity(feature.len() + separator.len_utf8() + value.len());
        key.push_str(feature);
        key.push(separator);
        key.push_str(value);
        Ok(Token(key))
    }

    /// Validates a raw key (used when rebuilding a store from a model file).
    /// The key must contain the separator exactly once.
    pub fn parse(key: &str, separator: char) -> Result<Token> {
        let mut parts = key.split(separator);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(feature), Some(value), None) => Token::new(feature, value, separator),
            _ => Err(Error::BadFeatureName(key.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Splits the key back into (feature, value).
    pub fn parts(&self, separator: char) -> (&str, &str) {
        // A Token always contains the separator exactly once.
        self.0.split_once(separator).expect("token without separator")
    }
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEP: char = DEFAULT_SEPARATOR;

    #[test]
    fn concatenates_with_separator() {
        let t = Token::new("alcohol", "9.4", SEP).unwrap();
        assert_eq!(t.as_str(), format!("alcohol{SEP}9.4"));
        assert_eq!(t.parts(SEP), ("alcohol", "9.4"));
    }

    #[test]
    fn categorical_value_passes_through() {
        let t = Token::new("diagnosis", "M", SEP).unwrap();
        assert_eq!(t.as_str(), format!("diagnosis{SEP}M"));
    }

    #[test]
    fn separator_prevents_cross_feature_collision() {
        let a = Token::new("x1", "23", SEP).unwrap();
        let b = Token::new("x12", "3", SEP).unwrap();
        assert_ne!(a, b);
        // Raw concatenation would have collided.
        assert_eq!("x1".to_string() + "23", "x12".to_string() + "3");
    }

    #[test]
    fn rejects_separator_in_feature_name() {
        let name = format!("bad{SEP}name");
        assert!(matches!(
            Token::new(&name, "1", SEP),
            Err(Error::BadFeatureName(_))
        ));
    }

    #[test]
    fn rejects_empty_feature_name() {
        assert!(matches!(Token::new("", "1", SEP), Err(Error::BadFeatureName(_))));
    }

    #[test]
    fn rejects_separator_in_value() {
        let value = format!("a{SEP}b");
        assert!(matches!(
            Token::new("col", &value, SEP),
            Err(Error::SeparatorInValue { .. })
        ));
    }

    #[test]
    fn parse_accepts_exactly_one_separator() {
        let good = format!("a{SEP}1");
        assert_eq!(Token::parse(&good, SEP).unwrap().as_str(), good);
        let twice = format!("a{SEP}1{SEP}2");
        assert!(Token::parse(&twice, SEP).is_err());
        assert!(Token::parse("nosep", SEP).is_err());
    }
}
