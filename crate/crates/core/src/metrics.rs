//! Oracle-query accounting per query and auxiliary-space accounting per table.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::digitizer::{letters_for, pad_plan};
use crate::planner::ExecutionTrace;
use crate::storage::Table;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryStats {
    /// Simple queries.
    pub p: usize,
    /// Most equality probes that reached the search algorithm in one simple query.
    pub q: usize,
    /// Most auxiliary files over the touched properties; 1 for the key.
    pub m: usize,
    /// Padded main-file size.
    pub n: usize,
    /// `ceil(log4 n)`.
    pub log4n: u32,
    pub oracle_queries: u64,
    pub bound: u64,
    pub codec_lookups: usize,
    pub search_calls: usize,
    /// Equality probes issued, including those answered by a codec miss.
    pub enumerated: usize,
    pub cells_touched: usize,
}

impl QueryStats {
    pub fn within_bound(&self) -> bool {
        self.oracle_queries <= self.bound
    }

    fn fields(&self) -> [(&'static str, String); 11] {
        [
            ("P", self.p.to_string()),
            ("Q", self.q.to_string()),
            ("M", self.m.to_string()),
            ("N", self.n.to_string()),
            ("log4N", self.log4n.to_string()),
            ("bound", self.bound.to_string()),
            ("oracle_queries", self.oracle_queries.to_string()),
            ("search_calls", self.search_calls.to_string()),
            ("codec_lookups", self.codec_lookups.to_string()),
            ("enumerated", self.enumerated.to_string()),
            ("cells_touched", self.cells_touched.to_string()),
        ]
    }

    pub fn render_block(&self) -> String {
        render_aligned(&self.fields())
    }

    pub fn render_tsv(&self) -> String {
        self.fields()
            .iter()
            .map(|(k, v)| format!("{k}\t{v}\n"))
            .collect()
    }
}

fn render_aligned(fields: &[(&str, String)]) -> String {
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    fields
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

pub fn stats_from_trace(trace: &ExecutionTrace, table: &Table) -> QueryStats {
    let p = trace.simple.len();
    let q = trace
        .simple
        .iter()
        .map(|s| s.searched_probes())
        .max()
        .unwrap_or(0);
    let m = trace.simple.iter().map(|s| s.aux_files).max().unwrap_or(1);
    let n = table.padded_size();
    let log4n = letters_for(n);
    let calls = || trace.simple.iter().flat_map(|s| s.calls());
    QueryStats {
        p,
        q,
        m,
        n,
        log4n,
        oracle_queries: trace.oracle_queries(),
        bound: (p * q * m) as u64 * u64::from(log4n),
        codec_lookups: calls().count(),
        search_calls: calls().filter(|c| c.searched()).count(),
        enumerated: trace.simple.iter().map(|s| s.probes.len()).sum(),
        cells_touched: calls().map(|c| c.cells_touched).sum(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertySpace {
    pub property: String,
    /// Distinct values with their multiplicities, in main-file address order
    /// of first appearance.
    pub multiplicities: Vec<(Value, usize)>,
    /// Maximum multiplicity, recomputed from the main file.
    pub m: usize,
    /// Padded sizes derived from the multiplicities.
    pub padded_sizes: Vec<usize>,
    pub total: usize,
    /// Auxiliary files actually stored.
    pub stored_files: usize,
    pub stored_total: usize,
}

impl PropertySpace {
    pub fn t(&self) -> usize {
        self.multiplicities.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceReport {
    pub table: String,
    /// Padded main-file size.
    pub n: usize,
    pub properties: Vec<PropertySpace>,
}

impl SpaceReport {
    pub fn limit(&self) -> usize {
        4 * self.n
    }

    pub fn within_limit(&self) -> bool {
        self.properties
            .iter()
            .all(|p| p.total <= self.limit() && p.stored_total <= self.limit())
    }

    pub fn property(&self, name: &str) -> Option<&PropertySpace> {
        self.properties.iter().find(|p| p.property == name)
    }

    pub fn render_block(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "table {}  N={}  limit={}",
            self.table,
            self.n,
            self.limit()
        );
        for p in &self.properties {
            let js: Vec<String> = p
                .multiplicities
                .iter()
                .map(|(_, j)| j.to_string())
                .collect();
            let sizes: Vec<String> = p.padded_sizes.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}: M={}, aux total {}", p.property, p.m, p.total);
            out.push_str(&indent(&render_aligned(&[
                ("t", p.t().to_string()),
                ("j", format!("({})", js.join(","))),
                ("sizes", format!("({})", sizes.join(","))),
            ])));
        }
        out
    }

    pub fn render_tsv(&self) -> String {
        let mut out = format!(
            "table\t{}\nN\t{}\nlimit\t{}\n",
            self.table,
            self.n,
            self.limit()
        );
        for p in &self.properties {
            let js: Vec<String> = p
                .multiplicities
                .iter()
                .map(|(_, j)| j.to_string())
                .collect();
            let sizes: Vec<String> = p.padded_sizes.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}.t\t{}", p.property, p.t());
            let _ = writeln!(out, "{}.j\t{}", p.property, js.join(","));
            let _ = writeln!(out, "{}.M\t{}", p.property, p.m);
            let _ = writeln!(out, "{}.sizes\t{}", p.property, sizes.join(","));
            let _ = writeln!(out, "{}.total\t{}", p.property, p.total);
        }
        out
    }
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("  {l}\n")).collect()
}

pub fn space_report(table: &Table) -> SpaceReport {
    let n = table.padded_size();
    let schema = table.schema();
    let mut properties = Vec::new();
    for (pos, spec) in schema.properties().iter().enumerate() {
        if !spec.has_aux() {
            continue;
        }
        let mut order: Vec<(Value, usize)> = Vec::new();
        let mut index: HashMap<&Value, usize> = HashMap::new();
        for rec in table.records() {
            let v = &rec.values[pos];
            match index.get(v) {
                Some(&i) => order[i].1 += 1,
                None => {
                    index.insert(v, order.len());
                    order.push((v.clone(), 1));
                }
            }
        }
        let m = order.iter().map(|(_, j)| *j).max().unwrap_or(0);
        // File k holds every value of multiplicity at least k.
        let padded_sizes: Vec<usize> = (1..=m)
            .map(|k| pad_plan(order.iter().filter(|(_, j)| *j >= k).count()).padded_size)
            .collect();
        let stored = table.aux_files(&spec.name);
        properties.push(PropertySpace {
            property: spec.name.clone(),
            total: padded_sizes.iter().sum(),
            multiplicities: order,
            m,
            padded_sizes,
            stored_files: stored.len(),
            stored_total: stored.iter().map(|a| a.padded_size()).sum(),
        });
    }
    let report = SpaceReport {
        table: table.name().to_string(),
        n,
        properties,
    };
    debug_assert!(report.within_limit(), "auxiliary space exceeds 4N");
    report
}
