//! Turns a WHERE expression into factorized searches and set algebra.
//!
//! Each leaf is a simple query `x o a`. Equality runs one search on the main
//! file (key properties) or one search per auxiliary file (searchable common
//! properties). `≠` and the range operators enumerate the property's finite
//! domain in ascending order and issue an equality probe per matching value.
//! `AND`, `OR` and `NOT` combine leaf results by intersection, union and
//! complement against the table's real addresses. No reordering or
//! short-circuiting is done.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::metrics::{stats_from_trace, QueryStats};
use crate::qram::{fetch_all, FileView, QramError};
use crate::quantum::{run_search, FactorizedOracle, Label, QuantumError, DEFAULT_EPS};
use crate::query::{BoolExpr, BoundSelect, ComparisonOp, SimpleCondition};
use crate::storage::{PropertySpec, Role, Table};
use crate::value::Value;

pub type ResultSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("query on `{0}` failed: property is neither the key nor searchable")]
    QueryFailure(String),
    #[error("`{0}` has no finite domain to enumerate")]
    UnboundedDomain(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Qram(#[from] QramError),
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Prune tolerance for the projection step.
    pub eps: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { eps: DEFAULT_EPS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallOutcome {
    /// Main-file address of the verified record.
    Hit(usize),
    /// Codec lookup failed; no search was run.
    Miss,
    /// The search landed on a padding cell and the result was dropped.
    Padding,
}

/// One codec lookup and, on a hit, one factorized search on one file.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchCall {
    pub file_id: String,
    pub target: Option<Label>,
    pub queries: u64,
    pub cells_touched: usize,
    pub outcome: CallOutcome,
}

impl SearchCall {
    /// Whether a factorized search actually ran.
    pub fn searched(&self) -> bool {
        self.target.is_some()
    }
}

/// `f(x,=,y)` issued on behalf of a simple query.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualProbe {
    pub value: Value,
    pub calls: Vec<SearchCall>,
}

impl EqualProbe {
    pub fn searched(&self) -> bool {
        self.calls.iter().any(SearchCall::searched)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimpleTrace {
    pub condition: SimpleCondition,
    pub probes: Vec<EqualProbe>,
    /// Auxiliary files of the property at execution time (1 for the key).
    pub aux_files: usize,
    pub result: ResultSet,
}

impl SimpleTrace {
    pub fn calls(&self) -> impl Iterator<Item = &SearchCall> {
        self.probes.iter().flat_map(|p| p.calls.iter())
    }

    pub fn queries(&self) -> u64 {
        self.calls().map(|c| c.queries).sum()
    }

    /// Equality probes that reached the search algorithm.
    pub fn searched_probes(&self) -> usize {
        self.probes.iter().filter(|p| p.searched()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    /// `Q<i>`, 1-based.
    Simple(usize),
    /// `R<i>`, 1-based.
    Combined(usize),
}

impl std::fmt::Display for NodeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeRef::Simple(i) => write!(f, "Q{i}"),
            NodeRef::Combined(i) => write!(f, "R{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOpKind {
    Intersection,
    Union,
    Complement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetOpTrace {
    pub kind: SetOpKind,
    pub inputs: Vec<NodeRef>,
    pub output: NodeRef,
    pub result: ResultSet,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionTrace {
    pub simple: Vec<SimpleTrace>,
    pub set_ops: Vec<SetOpTrace>,
}

impl ExecutionTrace {
    pub fn oracle_queries(&self) -> u64 {
        self.simple.iter().map(SimpleTrace::queries).sum()
    }
}

pub struct Planner<'t> {
    table: &'t Table,
    opts: SearchOptions,
}

impl<'t> Planner<'t> {
    pub fn new(table: &'t Table) -> Self {
        Planner {
            table,
            opts: SearchOptions::default(),
        }
    }

    pub fn with_options(table: &'t Table, opts: SearchOptions) -> Self {
        Planner { table, opts }
    }

    pub fn table(&self) -> &'t Table {
        self.table
    }

    /// Post-order evaluation of `expr`.
    pub fn evaluate(&self, expr: &BoolExpr) -> Result<(ResultSet, ExecutionTrace), PlanError> {
        let mut trace = ExecutionTrace::default();
        let (set, _) = self.eval_node(expr, &mut trace)?;
        Ok((set, trace))
    }

    fn eval_node(
        &self,
        expr: &BoolExpr,
        trace: &mut ExecutionTrace,
    ) -> Result<(ResultSet, NodeRef), PlanError> {
        let (kind, inputs, result) = match expr {
            BoolExpr::Leaf(cond) => {
                let (set, simple) = self.exec_simple(cond)?;
                trace.simple.push(simple);
                return Ok((set, NodeRef::Simple(trace.simple.len())));
            }
            BoolExpr::And(l, r) => {
                let (a, ra) = self.eval_node(l, trace)?;
                let (b, rb) = self.eval_node(r, trace)?;
                (SetOpKind::Intersection, vec![ra, rb], &a & &b)
            }
            BoolExpr::Or(l, r) => {
                let (a, ra) = self.eval_node(l, trace)?;
                let (b, rb) = self.eval_node(r, trace)?;
                (SetOpKind::Union, vec![ra, rb], &a | &b)
            }
            BoolExpr::Not(c) => {
                let (a, ra) = self.eval_node(c, trace)?;
                (
                    SetOpKind::Complement,
                    vec![ra],
                    &self.table.real_addresses() - &a,
                )
            }
        };
        let output = NodeRef::Combined(trace.set_ops.len() + 1);
        trace.set_ops.push(SetOpTrace {
            kind,
            inputs,
            output,
            result: result.clone(),
        });
        Ok((result, output))
    }

    fn spec(&self, property: &str) -> Result<&'t PropertySpec, PlanError> {
        self.table
            .schema()
            .property(property)
            .ok_or_else(|| PlanError::UnknownProperty(property.to_string()))
    }

    pub fn exec_simple(
        &self,
        cond: &SimpleCondition,
    ) -> Result<(ResultSet, SimpleTrace), PlanError> {
        let spec = self.spec(&cond.property)?;
        if spec.role == Role::Common && !spec.searchable {
            return Err(PlanError::QueryFailure(spec.name.clone()));
        }
        let (result, probes) = match cond.op {
            ComparisonOp::Eq => self.search_equal(cond, &cond.literal)?,
            ComparisonOp::Ne => self.search_not_equal(cond)?,
            _ => self.search_range(cond)?,
        };
        let aux_files = match spec.role {
            Role::Key => 1,
            Role::Common => self.table.aux_files(&spec.name).len(),
        };
        Ok((
            result.clone(),
            SimpleTrace {
                condition: cond.clone(),
                probes,
                aux_files,
                result,
            },
        ))
    }

    /// Domain values in ascending order: the declared domain, or for the key
    /// the values currently in its codec.
    fn domain(&self, spec: &PropertySpec) -> Result<Vec<Value>, PlanError> {
        if let Some(d) = &spec.domain {
            return Ok(d.members().collect());
        }
        if spec.role == Role::Key {
            let mut vals = self.table.key_codec().values().to_vec();
            vals.sort();
            return Ok(vals);
        }
        Err(PlanError::UnboundedDomain(spec.name.clone()))
    }

    fn enumerate<F>(
        &self,
        cond: &SimpleCondition,
        keep: F,
    ) -> Result<(ResultSet, Vec<EqualProbe>), PlanError>
    where
        F: Fn(&Value) -> bool,
    {
        let spec = self.spec(&cond.property)?;
        let mut result = ResultSet::new();
        let mut probes = Vec::new();
        for y in self.domain(spec)?.into_iter().filter(|y| keep(y)) {
            let (hits, mut p) = self.search_equal(cond, &y)?;
            result.extend(hits);
            probes.append(&mut p);
        }
        Ok((result, probes))
    }

    pub fn search_not_equal(
        &self,
        cond: &SimpleCondition,
    ) -> Result<(ResultSet, Vec<EqualProbe>), PlanError> {
        self.enumerate(cond, |y| y != &cond.literal)
    }

    pub fn search_range(
        &self,
        cond: &SimpleCondition,
    ) -> Result<(ResultSet, Vec<EqualProbe>), PlanError> {
        self.enumerate(cond, |y| cond.holds(y))
    }

    /// `f(x,=,value)`; `origin` is the simple query every hit must satisfy.
    pub fn search_equal(
        &self,
        origin: &SimpleCondition,
        value: &Value,
    ) -> Result<(ResultSet, Vec<EqualProbe>), PlanError> {
        let spec = self.spec(&origin.property)?;
        let pos = self
            .table
            .schema()
            .position(&spec.name)
            .expect("spec came from schema");
        let mut calls = Vec::new();
        let mut result = ResultSet::new();
        let verify = |address: usize| -> Result<(), PlanError> {
            let rec = self.table.record(address).ok_or_else(|| {
                PlanError::Consistency(format!("address {address} is not a record"))
            })?;
            let stored = &rec.values[pos];
            if stored != value || !origin.holds(stored) {
                return Err(PlanError::Consistency(format!(
                    "record {address} holds {} for `{}`, expected {}",
                    stored.literal(),
                    spec.name,
                    value.literal()
                )));
            }
            Ok(())
        };
        match spec.role {
            Role::Key => {
                let view = self.table.main_view();
                let call = self.search_file(&view, value, Some)?;
                if let CallOutcome::Hit(addr) = call.outcome {
                    verify(addr)?;
                    result.insert(addr);
                }
                calls.push(call);
            }
            Role::Common => {
                for aux in self.table.aux_files(&spec.name) {
                    let view = aux.view();
                    let call = self
                        .search_file(&view, value, |cell| aux.entry_at(cell).map(|e| e.address))?;
                    if let CallOutcome::Hit(addr) = call.outcome {
                        verify(addr)?;
                        result.insert(addr);
                    }
                    calls.push(call);
                }
            }
        }
        Ok((
            result,
            vec![EqualProbe {
                value: value.clone(),
                calls,
            }],
        ))
    }

    /// Codec lookup, then a qRAM fetch and factorized search on a hit.
    /// `resolve` maps the measured cell to a main-file address.
    fn search_file(
        &self,
        view: &FileView<'_>,
        value: &Value,
        resolve: impl Fn(usize) -> Option<usize>,
    ) -> Result<SearchCall, PlanError> {
        let Some(label) = view.codec.encode(value) else {
            return Ok(SearchCall {
                file_id: view.file_id.clone(),
                target: None,
                queries: 0,
                cells_touched: 0,
                outcome: CallOutcome::Miss,
            });
        };
        let target = label.widen(view.letters()).ok_or_else(|| {
            PlanError::Consistency(format!("label {label} does not fit {}", view.file_id))
        })?;
        let fetch = fetch_all(view)?;
        let mut oracle = FactorizedOracle::new(target);
        let outcome = run_search(fetch.state, &mut oracle, self.opts.eps)?;
        if outcome.label != target || outcome.probability < 1.0 - 1e-9 {
            return Err(PlanError::Consistency(format!(
                "search on {} measured {} with probability {}, expected {target}",
                view.file_id, outcome.label, outcome.probability
            )));
        }
        let outcome_kind = match resolve(outcome.address) {
            Some(addr) => CallOutcome::Hit(addr),
            None => CallOutcome::Padding,
        };
        Ok(SearchCall {
            file_id: view.file_id.clone(),
            target: Some(target),
            queries: outcome.queries,
            cells_touched: fetch.cells_touched,
            outcome: outcome_kind,
        })
    }

    /// Runs a bound SELECT: filter, then classical fetch and projection in
    /// address order.
    pub fn select(&self, stmt: &BoundSelect) -> Result<QueryResult, PlanError> {
        let (addresses, trace) = match &stmt.filter {
            Some(expr) => self.evaluate(expr)?,
            None => (self.table.real_addresses(), ExecutionTrace::default()),
        };
        let names = self.table.schema().properties();
        let columns = stmt
            .columns
            .iter()
            .map(|&c| names[c].name.clone())
            .collect();
        let rows = addresses
            .iter()
            .map(|&addr| {
                let rec = self.table.record(addr).ok_or_else(|| {
                    PlanError::Consistency(format!("result address {addr} is padding"))
                })?;
                Ok(Row {
                    address: addr,
                    values: stmt
                        .columns
                        .iter()
                        .map(|&c| rec.values[c].clone())
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>, PlanError>>()?;
        let stats = stats_from_trace(&trace, self.table);
        Ok(QueryResult {
            columns,
            rows,
            trace,
            stats,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub address: usize,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub trace: ExecutionTrace,
    pub stats: QueryStats,
}

fn render_set(set: &ResultSet) -> String {
    let parts: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

fn render_call(out: &mut String, indent: &str, call: &SearchCall) {
    let target = call
        .target
        .map(|t| t.to_string())
        .unwrap_or_else(|| "-".to_string());
    let result = match call.outcome {
        CallOutcome::Hit(a) => a.to_string(),
        CallOutcome::Miss => "miss".to_string(),
        CallOutcome::Padding => "pad".to_string(),
    };
    let _ = writeln!(
        out,
        "{indent}call {} target={target} queries={} -> {result}",
        call.file_id, call.queries
    );
}

/// Text form of a trace used by `explain`.
pub fn render_explain(trace: &ExecutionTrace, stats: &QueryStats) -> String {
    let mut out = String::new();
    for (i, s) in trace.simple.iter().enumerate() {
        let c = &s.condition;
        let _ = writeln!(
            out,
            "Q{}: f({},{},{})",
            i + 1,
            c.property,
            c.op,
            c.literal.literal()
        );
        for p in &s.probes {
            if c.op == ComparisonOp::Eq {
                for call in &p.calls {
                    render_call(&mut out, "  ", call);
                }
            } else {
                let _ = writeln!(out, "  f({},=,{})", c.property, p.value.literal());
                for call in &p.calls {
                    render_call(&mut out, "    ", call);
                }
            }
        }
        let _ = writeln!(out, "  => {}", render_set(&s.result));
    }
    for op in &trace.set_ops {
        let line = match (op.kind, op.inputs.as_slice()) {
            (SetOpKind::Intersection, [a, b]) => format!("{a} AND {b}"),
            (SetOpKind::Union, [a, b]) => format!("{a} OR {b}"),
            (SetOpKind::Complement, [a]) => format!("NOT {a}"),
            _ => unreachable!("set operation arity"),
        };
        let _ = writeln!(out, "{} = {line} -> {}", op.output, render_set(&op.result));
    }
    let _ = writeln!(
        out,
        "total: P={} Q={} M={} N={} oracle_queries={} bound={} codec_lookups={}",
        stats.p, stats.q, stats.m, stats.n, stats.oracle_queries, stats.bound, stats.codec_lookups
    );
    out
}
