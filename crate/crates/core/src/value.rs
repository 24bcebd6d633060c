//! Typed property values and their literal text form.
//!
//! Literals are shared by the query language and every on-disk format:
//! integers are signed decimal, strings are single-quoted with `''` standing
//! for an embedded quote.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Integer,
    String,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Integer => "integer",
            ValueType::String => "string",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "integer" => Some(ValueType::Integer),
            "string" => Some(ValueType::String),
            _ => None,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A typed property value. Equality is exact on the typed value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Str(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Integer,
            Value::Str(_) => ValueType::String,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Str(_) => None,
        }
    }

    /// Literal form, e.g. `20` or `'Yang'`.
    pub fn literal(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Str(s) => format!("'{}'", s.replace('\'', "''")),
        }
    }

    /// Parses a single literal occupying the whole input.
    pub fn parse_literal(text: &str) -> Result<Value, LiteralError> {
        let (value, rest) = Self::parse_literal_prefix(text)?;
        if !rest.is_empty() {
            return Err(LiteralError::Trailing(text.to_string()));
        }
        Ok(value)
    }

    /// Parses a literal at the start of `text`, returning the remainder.
    pub fn parse_literal_prefix(text: &str) -> Result<(Value, &str), LiteralError> {
        if let Some(body) = text.strip_prefix('\'') {
            let mut out = String::new();
            let mut chars = body.char_indices();
            while let Some((i, c)) = chars.next() {
                if c == '\'' {
                    if body[i + 1..].starts_with('\'') {
                        out.push('\'');
                        chars.next();
                    } else {
                        return Ok((Value::Str(out), &body[i + 1..]));
                    }
                } else {
                    out.push(c);
                }
            }
            Err(LiteralError::UnterminatedString(text.to_string()))
        } else {
            let end = text
                .char_indices()
                .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-')))
                .map(|(i, _)| i)
                .unwrap_or(text.len());
            let digits = &text[..end];
            digits
                .parse::<i64>()
                .map(|v| (Value::Int(v), &text[end..]))
                .map_err(|_| LiteralError::BadInteger(text.to_string()))
        }
    }

    /// Ordering among values of the same type; `None` across types.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    // Integers sort before strings; only same-type comparisons are meaningful.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Int(_), Value::Str(_)) => Ordering::Less,
            (Value::Str(_), Value::Int(_)) => Ordering::Greater,
        }
    }
}

/// Rendering for result tables: strings without quotes.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    #[error("unterminated string literal: {0}")]
    UnterminatedString(String),
    #[error("invalid integer literal: {0}")]
    BadInteger(String),
    #[error("unexpected text after literal: {0}")]
    Trailing(String),
}
