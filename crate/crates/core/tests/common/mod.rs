//! Random tables and filters shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use factordb_core::query::{BoolExpr, ComparisonOp};
use factordb_core::storage::{Domain, PropertySpec, Schema, Table};
use factordb_core::{OrderPolicy, Value, ValueType};
use rand::seq::SliceRandom;
use rand::Rng;

pub const MAX_MULTIPLICITY: usize = 8;

/// Key `ID`, searchable `A` (integer interval), searchable `B` (string set),
/// plain `C`.
pub fn random_schema(rng: &mut impl Rng, a_size: i64, b_size: usize) -> Schema {
    let b_vals: Vec<Value> = (0..b_size)
        .map(|i| Value::Str(format!("b{i:02}")))
        .collect();
    let lo = rng.gen_range(-5..=5);
    Schema::new(vec![
        PropertySpec::key("ID", ValueType::Integer),
        PropertySpec::common("A", ValueType::Integer)
            .with_domain(Domain::Interval(lo, lo + a_size - 1))
            .searchable(),
        PropertySpec::common("B", ValueType::String)
            .with_domain(Domain::values(b_vals))
            .searchable(),
        PropertySpec::common("C", ValueType::Integer),
    ])
    .unwrap()
}

/// Picks a domain member whose current count is below the multiplicity cap.
fn capped_pick(rng: &mut impl Rng, domain: &[Value], counts: &mut HashMap<Value, usize>) -> Value {
    loop {
        let v = domain.choose(rng).unwrap().clone();
        let c = counts.entry(v.clone()).or_insert(0);
        if *c < MAX_MULTIPLICITY {
            *c += 1;
            return v;
        }
    }
}

/// A table of up to `max_records` records with some holes punched by deletes.
pub fn random_table(rng: &mut impl Rng, max_records: usize) -> Table {
    let r = rng.gen_range(1..=max_records);
    let min_dom = r.div_ceil(MAX_MULTIPLICITY).max(2);
    let a_size = rng.gen_range(min_dom..=min_dom * 3) as i64;
    let b_size = rng.gen_range(min_dom..=min_dom * 2);
    let schema = random_schema(rng, a_size, b_size);
    let policy = if rng.gen_bool(0.5) {
        OrderPolicy::Insertion
    } else {
        OrderPolicy::Rank
    };
    let a_dom: Vec<Value> = schema
        .property("A")
        .unwrap()
        .domain
        .as_ref()
        .unwrap()
        .members()
        .collect();
    let b_dom: Vec<Value> = schema
        .property("B")
        .unwrap()
        .domain
        .as_ref()
        .unwrap()
        .members()
        .collect();
    let mut t = Table::create("R", schema, policy).unwrap();
    let mut ids: Vec<i64> = (0..(r as i64) * 4).map(|i| i * 3 - 50).collect();
    ids.shuffle(rng);
    let (mut ca, mut cb) = (HashMap::new(), HashMap::new());
    for &id in &ids[..r] {
        let a = capped_pick(rng, &a_dom, &mut ca);
        let b = capped_pick(rng, &b_dom, &mut cb);
        t.insert(vec![id.into(), a, b, rng.gen_range(0..100i64).into()])
            .unwrap();
    }
    if r > 2 && rng.gen_bool(0.4) {
        let mut victims = ids[..r].to_vec();
        victims.shuffle(rng);
        for id in victims.iter().take(rng.gen_range(1..=r / 3 + 1)) {
            t.delete(&(*id).into()).unwrap();
        }
    }
    t
}

const OPS: [ComparisonOp; 6] = ComparisonOp::ALL;

/// A literal for `prop`: usually a live value, sometimes a domain member not
/// in the table, sometimes something outside the domain.
fn random_literal(rng: &mut impl Rng, t: &Table, prop: &str) -> Value {
    let pos = t.schema().position(prop).unwrap();
    let live: Vec<Value> = t.records().map(|r| r.values[pos].clone()).collect();
    let spec = t.schema().property(prop).unwrap();
    match rng.gen_range(0..10) {
        0..=5 if !live.is_empty() => live.choose(rng).unwrap().clone(),
        6..=7 if spec.domain.is_some() => {
            let d: Vec<Value> = spec.domain.as_ref().unwrap().members().collect();
            d.choose(rng).unwrap().clone()
        }
        _ => match spec.value_type {
            ValueType::Integer => Value::Int(rng.gen_range(-100..1000)),
            ValueType::String => Value::Str(format!("b{:02}", rng.gen_range(0..120))),
        },
    }
}

pub fn random_expr(rng: &mut impl Rng, t: &Table, depth: usize) -> BoolExpr {
    if depth <= 1 || rng.gen_bool(0.3) {
        let prop = *["ID", "A", "B"].choose(rng).unwrap();
        let op = *OPS.choose(rng).unwrap();
        return BoolExpr::leaf(prop, op, random_literal(rng, t, prop));
    }
    match rng.gen_range(0..5) {
        0 => BoolExpr::not(random_expr(rng, t, depth - 1)),
        1 | 2 => BoolExpr::and(
            random_expr(rng, t, depth - 1),
            random_expr(rng, t, depth - 1),
        ),
        _ => BoolExpr::or(
            random_expr(rng, t, depth - 1),
            random_expr(rng, t, depth - 1),
        ),
    }
}

/// One random insert, delete or update; failures are expected and ignored.
pub fn random_dml(rng: &mut impl Rng, t: &mut Table, next_id: &mut i64) {
    let keys: Vec<Value> = t.records().map(|r| r.values[0].clone()).collect();
    let a_dom: Vec<Value> = t
        .schema()
        .property("A")
        .unwrap()
        .domain
        .as_ref()
        .unwrap()
        .members()
        .collect();
    let b_dom: Vec<Value> = t
        .schema()
        .property("B")
        .unwrap()
        .domain
        .as_ref()
        .unwrap()
        .members()
        .collect();
    let choice = if keys.is_empty() {
        0
    } else {
        rng.gen_range(0..4)
    };
    match choice {
        0 | 1 => {
            *next_id += 1;
            let id = if !keys.is_empty() && rng.gen_bool(0.1) {
                keys.choose(rng).unwrap().clone()
            } else {
                Value::Int(*next_id)
            };
            let _ = t.insert(vec![
                id,
                a_dom.choose(rng).unwrap().clone(),
                b_dom.choose(rng).unwrap().clone(),
                Value::Int(rng.gen_range(0..100)),
            ]);
        }
        2 => {
            let _ = t.delete(keys.choose(rng).unwrap());
        }
        _ => {
            let key = keys.choose(rng).unwrap().clone();
            let mut changes = Vec::new();
            if rng.gen_bool(0.6) {
                changes.push(("A".to_string(), a_dom.choose(rng).unwrap().clone()));
            }
            if rng.gen_bool(0.5) {
                changes.push(("B".to_string(), b_dom.choose(rng).unwrap().clone()));
            }
            if rng.gen_bool(0.2) {
                *next_id += 1;
                changes.push(("ID".to_string(), Value::Int(*next_id)));
            }
            let _ = t.update(&key, &changes);
        }
    }
}

/// Multiplicities recomputed by a plain scan of the records.
pub fn scan_multiplicities(t: &Table, prop: &str) -> HashMap<Value, usize> {
    let pos = t.schema().position(prop).unwrap();
    let mut m = HashMap::new();
    for r in t.records() {
        *m.entry(r.values[pos].clone()).or_insert(0) += 1;
    }
    m
}
