use std::cmp::Ordering;
use std::fmt;

use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl ComparisonOp {
    pub const ALL: [ComparisonOp; 6] = [
        ComparisonOp::Eq,
        ComparisonOp::Ne,
        ComparisonOp::Lt,
        ComparisonOp::Le,
        ComparisonOp::Gt,
        ComparisonOp::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ComparisonOp::Eq => "=",
            ComparisonOp::Ne => "!=",
            ComparisonOp::Lt => "<",
            ComparisonOp::Le => "<=",
            ComparisonOp::Gt => ">",
            ComparisonOp::Ge => ">=",
        }
    }

    pub fn accepts(self, ord: Ordering) -> bool {
        match self {
            ComparisonOp::Eq => ord == Ordering::Equal,
            ComparisonOp::Ne => ord != Ordering::Equal,
            ComparisonOp::Lt => ord == Ordering::Less,
            ComparisonOp::Le => ord != Ordering::Greater,
            ComparisonOp::Gt => ord == Ordering::Greater,
            ComparisonOp::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for ComparisonOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `property op literal`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimpleCondition {
    pub property: String,
    pub op: ComparisonOp,
    pub literal: Value,
}

impl SimpleCondition {
    pub fn new(property: impl Into<String>, op: ComparisonOp, literal: impl Into<Value>) -> Self {
        SimpleCondition {
            property: property.into(),
            op,
            literal: literal.into(),
        }
    }

    /// Classical evaluation against a stored value; false across types.
    pub fn holds(&self, value: &Value) -> bool {
        value
            .compare(&self.literal)
            .is_some_and(|ord| self.op.accepts(ord))
    }
}

impl fmt::Display for SimpleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.property, self.op, self.literal.literal())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Leaf(SimpleCondition),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

impl BoolExpr {
    pub fn leaf(property: impl Into<String>, op: ComparisonOp, literal: impl Into<Value>) -> Self {
        BoolExpr::Leaf(SimpleCondition::new(property, op, literal))
    }

    pub fn and(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(c))
    }

    pub fn leaves(&self) -> Vec<&SimpleCondition> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SimpleCondition>) {
        match self {
            BoolExpr::Leaf(c) => out.push(c),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
            BoolExpr::Not(c) => c.collect_leaves(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BoolExpr::Leaf(_) => 1,
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => 1 + l.depth().max(r.depth()),
            BoolExpr::Not(c) => 1 + c.depth(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            BoolExpr::Not(_) => 3,
            BoolExpr::Leaf(_) => 4,
        }
    }
}

/// Canonical text with the minimum parentheses needed to re-parse to the
/// same tree (binary operators associate to the left).
impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &BoolExpr, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        let p = self.precedence();
        match self {
            BoolExpr::Leaf(c) => write!(f, "{c}"),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
                let kw = if matches!(self, BoolExpr::And(..)) {
                    "AND"
                } else {
                    "OR"
                };
                child(f, l, l.precedence() < p)?;
                write!(f, " {kw} ")?;
                child(f, r, r.precedence() <= p)
            }
            BoolExpr::Not(c) => {
                f.write_str("NOT ")?;
                child(f, c, c.precedence() < p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Columns {
    All,
    Named(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectStatement {
    pub columns: Columns,
    pub table: String,
    pub filter: Option<BoolExpr>,
}

impl fmt::Display for SelectStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        match &self.columns {
            Columns::All => f.write_str("*")?,
            Columns::Named(cols) => f.write_str(&cols.join(", "))?,
        }
        write!(f, " FROM {}", self.table)?;
        if let Some(e) = &self.filter {
            write!(f, " WHERE {e}")?;
        }
        Ok(())
    }
}
