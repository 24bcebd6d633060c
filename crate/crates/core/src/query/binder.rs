use thiserror::Error;

use super::ast::{BoolExpr, Columns, SelectStatement};
use crate::storage::Schema;
use crate::value::ValueType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("type mismatch: `{property}` is {expected} but the literal {literal} is {found}")]
    TypeMismatch {
        property: String,
        expected: ValueType,
        found: ValueType,
        literal: String,
    },
}

/// A statement resolved against one table's schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSelect {
    pub table: String,
    /// Projected property positions, in output order.
    pub columns: Vec<usize>,
    pub filter: Option<BoolExpr>,
}

pub fn bind(
    stmt: &SelectStatement,
    table: &str,
    schema: &Schema,
) -> Result<BoundSelect, BindError> {
    if stmt.table != table {
        return Err(BindError::UnknownTable(stmt.table.clone()));
    }
    let columns = match &stmt.columns {
        Columns::All => (0..schema.len()).collect(),
        Columns::Named(names) => names
            .iter()
            .map(|n| {
                schema
                    .position(n)
                    .ok_or_else(|| BindError::UnknownProperty(n.clone()))
            })
            .collect::<Result<_, _>>()?,
    };
    if let Some(filter) = &stmt.filter {
        check_filter(filter, schema)?;
    }
    Ok(BoundSelect {
        table: stmt.table.clone(),
        columns,
        filter: stmt.filter.clone(),
    })
}

/// Resolves every leaf of `expr` against `schema`.
pub(crate) fn check_filter(expr: &BoolExpr, schema: &Schema) -> Result<(), BindError> {
    for leaf in expr.leaves() {
        let spec = schema
            .property(&leaf.property)
            .ok_or_else(|| BindError::UnknownProperty(leaf.property.clone()))?;
        let found = leaf.literal.value_type();
        if found != spec.value_type {
            return Err(BindError::TypeMismatch {
                property: spec.name.clone(),
                expected: spec.value_type,
                found,
                literal: leaf.literal.literal(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse;
    use crate::storage::{Domain, PropertySpec};

    fn schema() -> Schema {
        Schema::new(vec![
            PropertySpec::key("ID", ValueType::Integer),
            PropertySpec::common("Name", ValueType::String),
            PropertySpec::common("Age", ValueType::Integer)
                .with_domain(Domain::Interval(0, 150))
                .searchable(),
        ])
        .unwrap()
    }

    fn bind_text(text: &str) -> Result<BoundSelect, BindError> {
        bind(&parse(text).unwrap(), "Table1", &schema())
    }

    #[test]
    fn binds_example_statement() {
        let b = bind_text("SELECT ID, Name, Age FROM Table1 WHERE Age=20").unwrap();
        assert_eq!(b.columns, vec![0, 1, 2]);
        let b = bind_text("SELECT Age, ID FROM Table1").unwrap();
        assert_eq!(b.columns, vec![2, 0]);
    }

    #[test]
    fn binding_errors() {
        assert_eq!(
            bind_text("SELECT * FROM Table1 WHERE Nom=5"),
            Err(BindError::UnknownProperty("Nom".into()))
        );
        assert!(matches!(
            bind_text("SELECT * FROM Table1 WHERE Name<18"),
            Err(BindError::TypeMismatch { .. })
        ));
        assert!(matches!(
            bind_text("SELECT * FROM Table1 WHERE ID='x'"),
            Err(BindError::TypeMismatch { .. })
        ));
        assert_eq!(
            bind_text("SELECT * FROM Other"),
            Err(BindError::UnknownTable("Other".into()))
        );
        assert_eq!(
            bind_text("SELECT Nom FROM Table1"),
            Err(BindError::UnknownProperty("Nom".into()))
        );
    }
}
