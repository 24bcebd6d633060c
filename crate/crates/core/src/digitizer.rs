//! Dense digitization of distinct property values.
//!
//! A [`Codec`] assigns the labels `0..N` to the `N` distinct values of one
//! file's property. Files are padded to `4^n` cells; padding always occupies
//! labels `N..4^n`, so a codec hit never lands on a padding cell.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::quantum::{space_size, Label};
use crate::value::{LiteralError, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DigitizeError {
    #[error("value {0} occurs more than once; digitization needs distinct values")]
    Duplicate(String),
    #[error("malformed codec file: {0}")]
    Format(String),
    #[error(transparent)]
    Literal(#[from] LiteralError),
}

/// How labels are assigned to values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OrderPolicy {
    /// Label = position in the value sequence (no sorting ever happens).
    #[default]
    Insertion,
    /// Label = rank in ascending value order.
    Rank,
}

impl OrderPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderPolicy::Insertion => "insertion",
            OrderPolicy::Rank => "rank",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "insertion" => Some(OrderPolicy::Insertion),
            "rank" => Some(OrderPolicy::Rank),
            _ => None,
        }
    }
}

impl fmt::Display for OrderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which file and property a codec belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodecScope {
    pub file_id: String,
    pub property: String,
}

impl CodecScope {
    pub fn new(file_id: impl Into<String>, property: impl Into<String>) -> Self {
        CodecScope {
            file_id: file_id.into(),
            property: property.into(),
        }
    }
}

/// Letter count for `count` real entries: `ceil(log4 max(count, 1))`.
pub fn letters_for(count: usize) -> u32 {
    let mut n = 0;
    while space_size(n) < count.max(1) {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadPlan {
    pub padded_size: usize,
    pub n: u32,
    pub padding_count: usize,
}

pub fn pad_plan(count: usize) -> PadPlan {
    let n = letters_for(count);
    let padded_size = space_size(n);
    PadPlan {
        padded_size,
        n,
        padding_count: padded_size - count,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codec {
    scope: CodecScope,
    forward: HashMap<Value, usize>,
    backward: Vec<Value>,
    policy: OrderPolicy,
}

impl Codec {
    pub fn build(
        scope: CodecScope,
        values: &[Value],
        policy: OrderPolicy,
    ) -> Result<Codec, DigitizeError> {
        let mut backward = values.to_vec();
        if policy == OrderPolicy::Rank {
            backward.sort();
        }
        let mut forward = HashMap::with_capacity(backward.len());
        for (label, v) in backward.iter().enumerate() {
            if forward.insert(v.clone(), label).is_some() {
                return Err(DigitizeError::Duplicate(v.literal()));
            }
        }
        Ok(Codec {
            scope,
            forward,
            backward,
            policy,
        })
    }

    pub fn empty(scope: CodecScope, policy: OrderPolicy) -> Codec {
        Codec {
            scope,
            forward: HashMap::new(),
            backward: Vec::new(),
            policy,
        }
    }

    pub fn scope(&self) -> &CodecScope {
        &self.scope
    }

    pub fn policy(&self) -> OrderPolicy {
        self.policy
    }

    /// Number of real entries `N`.
    pub fn count(&self) -> usize {
        self.backward.len()
    }

    pub fn letters(&self) -> u32 {
        letters_for(self.count())
    }

    /// `None` means the value is not in the file: the search is empty.
    pub fn encode(&self, v: &Value) -> Option<Label> {
        self.forward
            .get(v)
            .map(|&l| Label::new(l, self.letters()).expect("label within space"))
    }

    pub fn decode(&self, label: usize) -> Option<&Value> {
        self.backward.get(label)
    }

    /// Values in ascending label order.
    pub fn values(&self) -> &[Value] {
        &self.backward
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "CODEC {} {} n={} N={} policy={}\n",
            self.scope.file_id,
            self.scope.property,
            self.letters(),
            self.count(),
            self.policy
        );
        for (label, v) in self.backward.iter().enumerate() {
            out.push_str(&format!("{label}\t{}\n", v.literal()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Codec, DigitizeError> {
        let bad = |m: &str| DigitizeError::Format(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty codec file"))?;
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() != 6 || parts[0] != "CODEC" {
            return Err(bad(&format!("bad header `{header}`")));
        }
        let field = |p: &str, key: &str| -> Result<String, DigitizeError> {
            p.strip_prefix(key)
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("expected `{key}` in header")))
        };
        let n: u32 = field(parts[3], "n=")?
            .parse()
            .map_err(|_| bad("bad letter count"))?;
        let count: usize = field(parts[4], "N=")?
            .parse()
            .map_err(|_| bad("bad entry count"))?;
        let policy = OrderPolicy::parse(&field(parts[5], "policy=")?)
            .ok_or_else(|| bad("unknown policy"))?;
        let mut values = Vec::with_capacity(count);
        for (i, line) in lines.enumerate() {
            let (label, lit) = line
                .split_once('\t')
                .ok_or_else(|| bad(&format!("bad entry line `{line}`")))?;
            if label.parse::<usize>().ok() != Some(i) {
                return Err(bad(&format!(
                    "labels must be dense and ascending at `{line}`"
                )));
            }
            values.push(Value::parse_literal(lit)?);
        }
        if values.len() != count || letters_for(count) != n {
            return Err(bad("header counts disagree with entries"));
        }
        // Labels are explicit in the file, so keep them as written.
        let scope = CodecScope::new(parts[1], parts[2]);
        let mut forward = HashMap::with_capacity(count);
        for (label, v) in values.iter().enumerate() {
            if forward.insert(v.clone(), label).is_some() {
                return Err(DigitizeError::Duplicate(v.literal()));
            }
        }
        Ok(Codec {
            scope,
            forward,
            backward: values,
            policy,
        })
    }
}
