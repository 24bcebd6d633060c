//! Command-line front end: table lifecycle, queries, explain/stats and a REPL.
//!
//! [`run`] takes the argument vector and explicit streams so the whole CLI can
//! be driven from tests. Exit codes: 0 success, 1 user or query error,
//! 2 internal consistency error.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use factordb_core::metrics::{space_report, QueryStats};
use factordb_core::planner::render_explain;
use factordb_core::quantum::DEFAULT_EPS;
use factordb_core::storage::{table_dir, Domain, PropertySpec, Schema, StorageError};
use factordb_core::{
    execute, fixtures, ErrorKind, OrderPolicy, QueryResult, SearchOptions, Table, Value, ValueType,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Parser)]
#[command(
    name = "factordb",
    version,
    about = "Query unsorted flat-file tables with simulated factorized search"
)]
struct Cli {
    /// Directory holding one subdirectory per table.
    #[arg(long, global = true, default_value = "./data")]
    data: PathBuf,
    /// Prune tolerance of the projection step.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Label order for codecs; re-digitizes loaded tables when it differs.
    #[arg(long = "codec-policy", global = true, value_parser = parse_policy)]
    codec_policy: Option<OrderPolicy>,
    /// Tab-separated output.
    #[arg(long, global = true)]
    tsv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create an empty table from a schema file.
    CreateTable {
        schema: PathBuf,
        /// Table name; defaults to the schema file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Insert one record, values in schema order.
    Insert {
        table: String,
        #[arg(required = true, allow_hyphen_values = true)]
        values: Vec<String>,
    },
    /// Delete the record with the given key.
    Delete {
        table: String,
        #[arg(allow_hyphen_values = true)]
        key: String,
    },
    /// Change properties of one record: `update T <key> Prop=value ...`.
    Update {
        table: String,
        #[arg(allow_hyphen_values = true)]
        key: String,
        #[arg(required = true, allow_hyphen_values = true)]
        assignments: Vec<String>,
    },
    /// Run a SELECT statement.
    Query { sql: String },
    /// Run a SELECT statement and print its search trace.
    Explain { sql: String },
    /// Auxiliary-file space report of a table.
    Stats { table: String },
    /// Interactive loop reading one statement per line.
    Repl,
    /// Create the four-record example table `Table1`.
    Demo,
    /// Create a random table for experiments.
    Generate {
        name: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        rows: usize,
    },
}

fn parse_policy(s: &str) -> Result<OrderPolicy, String> {
    OrderPolicy::parse(s).ok_or_else(|| format!("expected `insertion` or `rank`, got `{s}`"))
}

#[derive(Debug)]
enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<factordb_core::Error> for CliError {
    fn from(e: factordb_core::Error) -> Self {
        match e.kind() {
            ErrorKind::User => CliError::User(e.to_string()),
            ErrorKind::Internal => CliError::Internal(e.to_string()),
        }
    }
}

impl From<StorageError> for CliError {
    fn from(e: StorageError) -> Self {
        factordb_core::Error::from(e).into()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

struct Session<'a> {
    data: PathBuf,
    opts: SearchOptions,
    policy: Option<OrderPolicy>,
    tsv: bool,
    out: &'a mut dyn Write,
}

/// Runs one command line. `input` feeds the REPL; `prompt` enables its prompt.
pub fn run<I, S>(
    args: I,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
    prompt: bool,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            return match e.kind() {
                K::DisplayHelp | K::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    if !(cli.eps.is_finite() && cli.eps >= 0.0 && cli.eps < 0.5) {
        let _ = writeln!(err, "error: --eps must be in [0, 0.5), got {}", cli.eps);
        return 1;
    }
    let mut session = Session {
        data: cli.data,
        opts: SearchOptions { eps: cli.eps },
        policy: cli.codec_policy,
        tsv: cli.tsv,
        out,
    };
    let result = match cli.command {
        Command::CreateTable { schema, name } => session.create_table(&schema, name),
        Command::Insert { table, values } => session.insert(&table, &values),
        Command::Delete { table, key } => session.delete(&table, &key),
        Command::Update {
            table,
            key,
            assignments,
        } => session.update(&table, &key, &assignments),
        Command::Query { sql } => session.query(&sql, false).map(|_| ()),
        Command::Explain { sql } => session.query(&sql, true).map(|_| ()),
        Command::Stats { table } => session.stats(&table),
        Command::Repl => session.repl(input, prompt),
        Command::Demo => session.demo(),
        Command::Generate { name, seed, rows } => session.generate(&name, seed, rows),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn parse_value(spec: &PropertySpec, text: &str) -> CliResult<Value> {
    let bad = || {
        CliError::User(format!(
            "`{text}` is not a valid {} for `{}`",
            spec.value_type, spec.name
        ))
    };
    match spec.value_type {
        ValueType::Integer => text
            .trim()
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| bad()),
        ValueType::String if text.starts_with('\'') => match Value::parse_literal(text) {
            Ok(v @ Value::Str(_)) => Ok(v),
            _ => Err(bad()),
        },
        ValueType::String => Ok(Value::Str(text.to_string())),
    }
}

fn render_rows(result: &QueryResult, tsv: bool) -> String {
    let header: Vec<String> = result.columns.clone();
    let body: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| r.values.iter().map(|v| v.to_string()).collect())
        .collect();
    let mut out = String::new();
    if tsv {
        out.push_str(&header.join("\t"));
        out.push('\n');
        for row in &body {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        return out;
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    out.push_str(&line(&header));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(&rule));
    for row in &body {
        out.push_str(&line(row));
    }
    let n = body.len();
    out.push_str(&format!("({n} row{})\n", if n == 1 { "" } else { "s" }));
    out
}

impl Session<'_> {
    fn table_path(&self, name: &str) -> PathBuf {
        table_dir(&self.data, name)
    }

    fn exists(&self, name: &str) -> bool {
        self.table_path(name).join("schema.txt").is_file()
    }

    fn load(&self, name: &str) -> CliResult<Table> {
        if !self.exists(name) {
            return Err(CliError::User(format!("unknown table `{name}`")));
        }
        let mut t = Table::load(&self.table_path(name))?;
        if let Some(p) = self.policy {
            t.set_policy(p)?;
        }
        Ok(t)
    }

    /// Verifies invariants, then writes the table back.
    fn store(&self, t: &Table) -> CliResult {
        t.check_invariants().map_err(CliError::Internal)?;
        t.save(&self.table_path(t.name()))?;
        Ok(())
    }

    fn store_new(&mut self, t: &Table) -> CliResult {
        if self.exists(t.name()) {
            return Err(CliError::User(format!(
                "table `{}` already exists",
                t.name()
            )));
        }
        self.store(t)
    }

    fn create_table(&mut self, schema_path: &Path, name: Option<String>) -> CliResult {
        let text = fs::read_to_string(schema_path)
            .map_err(|e| CliError::User(format!("{}: {e}", schema_path.display())))?;
        let schema = Schema::from_text(&text)?;
        let name = match name {
            Some(n) => n,
            None => schema_path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::User("cannot derive a table name; pass --name".into()))?
                .to_string(),
        };
        let count = schema.len();
        let t = Table::create(&name, schema, self.policy.unwrap_or_default())?;
        self.store_new(&t)?;
        writeln!(self.out, "created table {name} ({count} properties)")?;
        Ok(())
    }

    fn insert(&mut self, table: &str, values: &[String]) -> CliResult {
        let mut t = self.load(table)?;
        let specs = t.schema().properties();
        if values.len() != specs.len() {
            return Err(StorageError::Arity {
                expected: specs.len(),
                got: values.len(),
            }
            .into());
        }
        let row = specs
            .iter()
            .zip(values)
            .map(|(s, v)| parse_value(s, v))
            .collect::<CliResult<Vec<_>>>()?;
        let address = t.insert(row)?;
        self.store(&t)?;
        writeln!(self.out, "inserted at address {address}")?;
        Ok(())
    }

    fn delete(&mut self, table: &str, key: &str) -> CliResult {
        let mut t = self.load(table)?;
        let key = parse_value(t.schema().key(), key)?;
        t.delete(&key)?;
        self.store(&t)?;
        writeln!(self.out, "deleted {}", key.literal())?;
        Ok(())
    }

    fn update(&mut self, table: &str, key: &str, assignments: &[String]) -> CliResult {
        let mut t = self.load(table)?;
        let key = parse_value(t.schema().key(), key)?;
        let mut changes = Vec::new();
        for a in assignments {
            let (prop, text) = a
                .split_once('=')
                .ok_or_else(|| CliError::User(format!("expected Prop=value, got `{a}`")))?;
            let spec = t
                .schema()
                .property(prop.trim())
                .ok_or_else(|| CliError::User(format!("unknown property `{}`", prop.trim())))?;
            changes.push((spec.name.clone(), parse_value(spec, text)?));
        }
        t.update(&key, &changes)?;
        self.store(&t)?;
        writeln!(self.out, "updated {}", key.literal())?;
        Ok(())
    }

    fn run_select(&self, sql: &str) -> CliResult<QueryResult> {
        let stmt = factordb_core::query::parse(sql).map_err(factordb_core::Error::from)?;
        let t = self.load(&stmt.table)?;
        Ok(execute(&t, sql, self.opts)?)
    }

    fn query(&mut self, sql: &str, explain: bool) -> CliResult<QueryStats> {
        let result = self.run_select(sql)?;
        if explain {
            write!(self.out, "{}", render_explain(&result.trace, &result.stats))?;
        } else {
            write!(self.out, "{}", render_rows(&result, self.tsv))?;
        }
        Ok(result.stats)
    }

    fn stats(&mut self, table: &str) -> CliResult {
        let t = self.load(table)?;
        let report = space_report(&t);
        if self.tsv {
            write!(self.out, "{}", report.render_tsv())?;
        } else {
            write!(self.out, "{}", report.render_block())?;
        }
        Ok(())
    }

    fn repl(&mut self, input: &mut dyn BufRead, prompt: bool) -> CliResult {
        let mut explain = false;
        let mut last: Option<QueryStats> = None;
        let mut line = String::new();
        loop {
            if prompt {
                write!(self.out, "factordb> ")?;
                self.out.flush()?;
            }
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Ok(());
            }
            let stmt = line.trim();
            if stmt.is_empty() {
                continue;
            }
            let outcome: CliResult = match stmt.strip_prefix('\\') {
                Some(cmd) => {
                    let mut words = cmd.split_whitespace();
                    match (words.next(), words.next(), words.next()) {
                        (Some("quit" | "q"), None, _) => return Ok(()),
                        (Some("explain"), Some("on"), None) => {
                            explain = true;
                            Ok(())
                        }
                        (Some("explain"), Some("off"), None) => {
                            explain = false;
                            Ok(())
                        }
                        (Some("stats"), None, _) => match &last {
                            Some(s) => {
                                let text = if self.tsv {
                                    s.render_tsv()
                                } else {
                                    s.render_block()
                                };
                                write!(self.out, "{text}").map_err(CliError::from)
                            }
                            None => Err(CliError::User("no query has run yet".into())),
                        },
                        (Some("stats"), Some(table), None) => self.stats(table),
                        (Some("help"), None, _) => writeln!(
                            self.out,
                            "SELECT ... ;  \\explain on|off  \\stats [table]  \\quit"
                        )
                        .map_err(CliError::from),
                        _ => Err(CliError::User(format!("unknown command `\\{cmd}`"))),
                    }
                }
                None => self.run_select(stmt).and_then(|r| {
                    write!(self.out, "{}", render_rows(&r, self.tsv))?;
                    if explain {
                        write!(self.out, "{}", render_explain(&r.trace, &r.stats))?;
                    }
                    last = Some(r.stats);
                    Ok(())
                }),
            };
            if let Err(e) = outcome {
                writeln!(self.out, "error: {}", e.message())?;
            }
        }
    }

    fn demo(&mut self) -> CliResult {
        let t = fixtures::table1(self.policy.unwrap_or_default());
        self.store_new(&t)?;
        writeln!(
            self.out,
            "created table {} with {} records in {}",
            t.name(),
            t.real_count(),
            self.data.display()
        )?;
        Ok(())
    }

    fn generate(&mut self, name: &str, seed: u64, rows: usize) -> CliResult {
        let depts: Vec<Value> = ["cs", "ee", "ma", "ph"].iter().map(|&d| d.into()).collect();
        let schema = Schema::new(vec![
            PropertySpec::key("ID", ValueType::Integer),
            PropertySpec::common("Grade", ValueType::Integer)
                .with_domain(Domain::Interval(0, 9))
                .searchable(),
            PropertySpec::common("Dept", ValueType::String)
                .with_domain(Domain::values(depts.clone()))
                .searchable(),
            PropertySpec::common("Score", ValueType::Integer).with_domain(Domain::Interval(0, 100)),
        ])?;
        let mut t = Table::create(name, schema, self.policy.unwrap_or_default())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<i64> = (1..=(rows as i64).saturating_mul(10).max(1)).collect();
        ids.shuffle(&mut rng);
        for &id in ids.iter().take(rows) {
            let dept = depts.choose(&mut rng).expect("non-empty").clone();
            t.insert(vec![
                id.into(),
                rng.gen_range(0..=9i64).into(),
                dept,
                rng.gen_range(0..=100i64).into(),
            ])?;
        }
        self.store_new(&t)?;
        writeln!(self.out, "generated table {name} with {rows} records")?;
        Ok(())
    }
}
