//! The four-record student table used throughout the documentation and tests.

use crate::digitizer::OrderPolicy;
use crate::storage::{Domain, PropertySpec, Schema, Table};
use crate::value::ValueType;

pub const TABLE1: &str = "Table1";

/// `(ID, Name, Age)` in insertion order.
pub const TABLE1_ROWS: [(i64, &str, i64); 4] = [
    (960112, "Lin", 18),
    (960114, "Yang", 20),
    (960113, "Xing", 19),
    (960115, "Yingyu", 20),
];

pub fn table1_schema(age_domain: Domain) -> Schema {
    Schema::new(vec![
        PropertySpec::key("ID", ValueType::Integer),
        PropertySpec::common("Name", ValueType::String),
        PropertySpec::common("Age", ValueType::Integer)
            .with_domain(age_domain)
            .searchable(),
    ])
    .expect("fixture schema is valid")
}

/// Age domain `[0,150]`.
pub fn table1(policy: OrderPolicy) -> Table {
    table1_with_age_domain(Domain::Interval(0, 150), policy)
}

pub fn table1_with_age_domain(age_domain: Domain, policy: OrderPolicy) -> Table {
    let mut t = Table::create(TABLE1, table1_schema(age_domain), policy).expect("fixture table");
    for (id, name, age) in TABLE1_ROWS {
        t.insert(vec![id.into(), name.into(), age.into()])
            .expect("fixture rows are valid");
    }
    t
}
