use std::fmt;

use crate::value::{Value, ValueType};

use super::StorageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Key,
    Common,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Key => "key",
            Role::Common => "common",
        }
    }
}

/// Finite ordered value set of a property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// Every integer in `[lo, hi]`.
    Interval(i64, i64),
    /// Explicit values, kept sorted ascending and distinct.
    Values(Vec<Value>),
}

impl Domain {
    pub fn values(mut vals: Vec<Value>) -> Domain {
        vals.sort();
        vals.dedup();
        Domain::Values(vals)
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Domain::Interval(lo, hi) => v.as_int().is_some_and(|x| *lo <= x && x <= *hi),
            Domain::Values(vals) => vals.binary_search(v).is_ok(),
        }
    }

    /// All members in ascending order.
    pub fn members(&self) -> Box<dyn Iterator<Item = Value> + '_> {
        match self {
            Domain::Interval(lo, hi) => Box::new((*lo..=*hi).map(Value::Int)),
            Domain::Values(vals) => Box::new(vals.iter().cloned()),
        }
    }

    fn parse(text: &str) -> Result<Domain, String> {
        if let Some(body) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let (lo, hi) = body.split_once(',').ok_or("interval needs two bounds")?;
            let lo: i64 = lo.trim().parse().map_err(|_| "bad interval bound")?;
            let hi: i64 = hi.trim().parse().map_err(|_| "bad interval bound")?;
            return Ok(Domain::Interval(lo, hi));
        }
        let body = text
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or("domain must be [x1,x2] or {v1,v2,...}")?;
        let mut vals = Vec::new();
        let mut rest = body.trim_start();
        while !rest.is_empty() {
            let (v, tail) = Value::parse_literal_prefix(rest).map_err(|e| e.to_string())?;
            vals.push(v);
            let tail = tail.trim_start();
            rest = match tail.strip_prefix(',') {
                Some(t) => t.trim_start(),
                None if tail.is_empty() => tail,
                None => return Err(format!("unexpected `{tail}` in domain")),
            };
        }
        Ok(Domain::Values(vals))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Interval(lo, hi) => write!(f, "[{lo},{hi}]"),
            Domain::Values(vals) => {
                let parts: Vec<String> = vals.iter().map(Value::literal).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertySpec {
    pub name: String,
    pub role: Role,
    pub value_type: ValueType,
    pub domain: Option<Domain>,
    pub searchable: bool,
}

impl PropertySpec {
    pub fn key(name: &str, value_type: ValueType) -> Self {
        PropertySpec {
            name: name.to_string(),
            role: Role::Key,
            value_type,
            domain: None,
            searchable: true,
        }
    }

    pub fn common(name: &str, value_type: ValueType) -> Self {
        PropertySpec {
            name: name.to_string(),
            role: Role::Common,
            value_type,
            domain: None,
            searchable: false,
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn searchable(mut self) -> Self {
        self.searchable = true;
        self
    }

    /// Common properties that carry auxiliary files.
    pub fn has_aux(&self) -> bool {
        self.role == Role::Common && self.searchable
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    properties: Vec<PropertySpec>,
    key: usize,
}

impl Schema {
    pub fn new(properties: Vec<PropertySpec>) -> Result<Schema, StorageError> {
        let keys: Vec<usize> = (0..properties.len())
            .filter(|&i| properties[i].role == Role::Key)
            .collect();
        if keys.len() != 1 {
            return Err(StorageError::Schema(format!(
                "exactly one key property required, found {}",
                keys.len()
            )));
        }
        for (i, p) in properties.iter().enumerate() {
            if !is_identifier(&p.name) {
                return Err(StorageError::Schema(format!(
                    "bad property name `{}`",
                    p.name
                )));
            }
            if properties[..i].iter().any(|q| q.name == p.name) {
                return Err(StorageError::Schema(format!(
                    "duplicate property `{}`",
                    p.name
                )));
            }
            match &p.domain {
                Some(Domain::Interval(lo, hi)) => {
                    if p.value_type != ValueType::Integer {
                        return Err(StorageError::Schema(format!(
                            "interval domain on non-integer property `{}`",
                            p.name
                        )));
                    }
                    if lo > hi {
                        return Err(StorageError::Schema(format!(
                            "empty interval [{lo},{hi}] on `{}`",
                            p.name
                        )));
                    }
                }
                Some(Domain::Values(vals)) => {
                    if let Some(bad) = vals.iter().find(|v| v.value_type() != p.value_type) {
                        return Err(StorageError::Schema(format!(
                            "domain value {} does not match type {} of `{}`",
                            bad.literal(),
                            p.value_type,
                            p.name
                        )));
                    }
                    if vals.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(StorageError::Schema(format!(
                            "domain of `{}` must be ascending and distinct",
                            p.name
                        )));
                    }
                }
                None => {}
            }
        }
        Ok(Schema {
            properties,
            key: keys[0],
        })
    }

    pub fn properties(&self) -> &[PropertySpec] {
        &self.properties
    }

    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    pub fn key_index(&self) -> usize {
        self.key
    }

    pub fn key(&self) -> &PropertySpec {
        &self.properties[self.key]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.properties.iter().position(|p| p.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&PropertySpec> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// `schema.txt` form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            let domain = p
                .domain
                .as_ref()
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                p.name,
                p.role.as_str(),
                p.value_type,
                domain,
                p.searchable
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Schema, StorageError> {
        let mut props = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| StorageError::Schema(format!("line {}: {m}", lineno + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 tab-separated fields"));
            }
            let role = match fields[1] {
                "key" => Role::Key,
                "common" => Role::Common,
                other => return Err(bad(&format!("unknown role `{other}`"))),
            };
            let value_type = ValueType::parse(fields[2])
                .ok_or_else(|| bad(&format!("unknown type `{}`", fields[2])))?;
            let domain = match fields[3] {
                "-" => None,
                d => Some(Domain::parse(d).map_err(|e| bad(&e))?),
            };
            let searchable = match fields[4] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(bad(&format!(
                        "searchable must be true/false, got `{other}`"
                    )))
                }
            };
            props.push(PropertySpec {
                name: fields[0].to_string(),
                role,
                value_type,
                domain,
                searchable,
            });
        }
        Schema::new(props)
    }
}
