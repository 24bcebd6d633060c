//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any
//! failure. Runs as a plain binary (`harness = false`).

mod common;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use factordb_core::metrics::{space_report, stats_from_trace};
use factordb_core::qram::fetch_all;
use factordb_core::quantum::{
    factorized_search, run_search, space_size, FactorizedOracle, Label, Reflection4,
};
use factordb_core::query::{bind, parse, BoolExpr, ComparisonOp};
use factordb_core::storage::Table;
use factordb_core::{execute, fixtures, OrderPolicy, Planner, SearchOptions, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn operator_exactness() -> Check {
    let r = Reflection4::R0.matrix();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let rrt: f64 = (0..4).map(|k| r[i][k] * r[j][k]).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((rrt - id).abs());
            // 2|s><s| - I with |s> = (1,1,1,1)/2.
            let expected = 2.0 * 0.5 * 0.5 - id;
            ensure(r[i][j] == expected, || {
                format!("R0[{i}][{j}] = {} != {expected}", r[i][j])
            })?;
        }
    }
    ensure(worst < 1e-12, || format!("unitarity residual {worst:e}"))
}

fn check_search(n: u32, target: usize, corr: Vec<usize>) -> Check {
    let label = Label::new(target, n).unwrap();
    let mut oracle = FactorizedOracle::new(label);
    let want_addr = corr[target];
    let out = factorized_search(n, corr, &mut oracle).map_err(|e| e.to_string())?;
    ensure(out.label == label, || {
        format!("n={n}: target {label} measured {}", out.label)
    })?;
    ensure(out.address == want_addr, || {
        format!("n={n}: address {} != {want_addr}", out.address)
    })?;
    ensure(out.probability >= 1.0 - 1e-9, || {
        format!("n={n}: probability {}", out.probability)
    })?;
    ensure(out.queries == u64::from(n), || {
        format!("n={n}: {} queries", out.queries)
    })
}

fn search_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 0..=6u32 {
        let size = space_size(n);
        let targets: Vec<usize> = if n <= 3 {
            (0..size).collect()
        } else {
            (0..100).map(|_| rng.gen_range(0..size)).collect()
        };
        for target in targets {
            let mut corr: Vec<usize> = (1..=size).collect();
            corr.shuffle(&mut rng);
            check_search(n, target, corr)?;
        }
    }
    Ok(())
}

fn joint_state_trace() -> Check {
    for policy in [OrderPolicy::Insertion, OrderPolicy::Rank] {
        let t = fixtures::table1(policy);
        // Expected labels straight from the fixture rows.
        let mut keys: Vec<i64> = fixtures::TABLE1_ROWS.iter().map(|r| r.0).collect();
        if policy == OrderPolicy::Rank {
            keys.sort();
        }
        let expected_corr: Vec<usize> = keys
            .iter()
            .map(|k| {
                fixtures::TABLE1_ROWS
                    .iter()
                    .position(|r| r.0 == *k)
                    .unwrap()
                    + 1
            })
            .collect();
        let view = t.main_view();
        let fetch = fetch_all(&view).map_err(|e| e.to_string())?;
        let st = &fetch.state;
        ensure(st.correlation() == expected_corr.as_slice(), || {
            format!(
                "{policy}: correlation {:?} != {expected_corr:?}",
                st.correlation()
            )
        })?;
        for l in 0..4 {
            let a = st.amplitude(l);
            ensure((a.re - 0.5).abs() < 1e-15 && a.im == 0.0, || {
                format!("{policy}: amplitude {l} = {a}")
            })?;
        }
        let target = t.key_codec().encode(&Value::Int(960112)).unwrap();
        ensure(
            target.index() == keys.iter().position(|k| *k == 960112).unwrap(),
            || format!("{policy}: label {target}"),
        )?;
        let mut oracle = FactorizedOracle::new(target);
        let out = run_search(fetch.state.clone(), &mut oracle, 1e-9).map_err(|e| e.to_string())?;
        ensure(out.queries == 1, || {
            format!("{policy}: {} queries", out.queries)
        })?;
        ensure(out.address == 1, || {
            format!("{policy}: address {}", out.address)
        })?;
        let fin = &out.final_state;
        for l in 0..4 {
            let p = fin.probability(l);
            let want = if l == target.index() { 1.0 } else { 0.0 };
            ensure((p - want).abs() < 1e-12, || {
                format!("{policy}: final probability of {l} = {p}")
            })?;
        }
        ensure(fin.address_of(target.index()) == 1, || {
            format!("{policy}: final correlation")
        })?;
    }
    Ok(())
}

fn example_fixtures() -> Check {
    let row = |i: usize| {
        let (id, name, age) = fixtures::TABLE1_ROWS[i];
        vec![Value::Int(id), Value::from(name), Value::Int(age)]
    };
    let cases = [
        (
            "SELECT ID, Name, Age FROM Table1 WHERE Age=20",
            vec![row(1), row(3)],
        ),
        (
            "SELECT ID, Name, Age FROM Table1 WHERE ID<960115",
            vec![row(0), row(1), row(2)],
        ),
        (
            "SELECT ID, Name, Age FROM Table1 WHERE ID<960115 AND Age=20",
            vec![row(1)],
        ),
    ];
    for policy in [OrderPolicy::Insertion, OrderPolicy::Rank] {
        let t = fixtures::table1(policy);
        for (sql, want) in &cases {
            let res = execute(&t, sql, SearchOptions::default()).map_err(|e| e.to_string())?;
            let got: Vec<Vec<Value>> = res.rows.into_iter().map(|r| r.values).collect();
            ensure(&got == want, || {
                format!("{policy}: `{sql}` returned {got:?}")
            })?;
        }
        let aux = t.aux_files("Age");
        let pairs = |k: usize| -> Vec<(Value, usize)> {
            aux[k]
                .entries()
                .iter()
                .map(|e| (e.value.clone(), e.address))
                .collect()
        };
        ensure(aux.len() == 2, || format!("{} aux files", aux.len()))?;
        ensure(
            pairs(0)
                == vec![
                    (Value::Int(18), 1),
                    (Value::Int(20), 2),
                    (Value::Int(19), 3),
                ],
            || format!("aux A = {:?}", pairs(0)),
        )?;
        ensure(pairs(1) == vec![(Value::Int(20), 4)], || {
            format!("aux B = {:?}", pairs(1))
        })?;
    }
    Ok(())
}

struct Trials {
    equivalence: Check,
    bound: Check,
}

fn randomized_trials(count: usize) -> Trials {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut equivalence = Ok(());
    let mut bound = Ok(());
    // Trials whose answer is neither empty nor the whole table.
    let mut partial = 0;
    for trial in 0..count {
        let t = common::random_table(&mut rng, 256);
        let expr = common::random_expr(&mut rng, &t, 4);
        let expected = t
            .linear_scan(&expr)
            .expect("generated filters are well typed");
        match Planner::new(&t).evaluate(&expr) {
            Ok((got, trace)) => {
                partial += usize::from(!got.is_empty() && got.len() < t.real_count());
                if got != expected && equivalence.is_ok() {
                    equivalence = Err(format!(
                        "trial {trial}: `{expr}` gave {got:?}, scan {expected:?}"
                    ));
                }
                let s = stats_from_trace(&trace, &t);
                if !s.within_bound() && bound.is_ok() {
                    bound = Err(format!(
                        "trial {trial}: `{expr}` used {} > bound {}",
                        s.oracle_queries, s.bound
                    ));
                }
            }
            Err(e) => {
                if equivalence.is_ok() {
                    equivalence = Err(format!("trial {trial}: `{expr}` failed: {e}"));
                }
            }
        }
    }
    if equivalence.is_ok() && partial < count / 4 {
        equivalence = Err(format!(
            "only {partial} of {count} trials had a selective answer"
        ));
    }
    Trials { equivalence, bound }
}

fn combined_query_stats() -> Check {
    let t = fixtures::table1(OrderPolicy::Insertion);
    let stmt = parse("SELECT ID, Name, Age FROM Table1 WHERE ID<960115 AND Age=20").unwrap();
    let bound_stmt = bind(&stmt, "Table1", t.schema()).unwrap();
    let s = Planner::new(&t)
        .select(&bound_stmt)
        .map_err(|e| e.to_string())?
        .stats;
    ensure(
        (s.p, s.q, s.m, s.bound, s.oracle_queries) == (2, 3, 2, 12, 4),
        || {
            format!(
                "P={} Q={} M={} bound={} actual={}",
                s.p, s.q, s.m, s.bound, s.oracle_queries
            )
        },
    )
}

fn space_checks(t: &Table, step: usize) -> Check {
    let report = space_report(t);
    let limit = 4 * t.padded_size();
    for prop in ["A", "B"] {
        let files = t.aux_files(prop);
        for f in files {
            let distinct: HashSet<&Value> = f.entries().iter().map(|e| &e.value).collect();
            ensure(distinct.len() == f.entries().len(), || {
                format!("step {step}: {} holds duplicate values", f.file_id())
            })?;
        }
        let scan = common::scan_multiplicities(t, prop);
        let max_mult = scan.values().copied().max().unwrap_or(0);
        let p = report.property(prop).unwrap();
        ensure(p.m == max_mult && files.len() == max_mult, || {
            format!(
                "step {step}: {prop} M={} files={} max multiplicity {max_mult}",
                p.m,
                files.len()
            )
        })?;
        let stored: usize = files.iter().map(|f| f.padded_size()).sum();
        ensure(stored <= limit && p.total <= limit, || {
            format!("step {step}: {prop} aux cells {stored} > {limit}")
        })?;
    }
    t.check_invariants()
        .map_err(|e| format!("step {step}: {e}"))
}

fn space_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seq in 0..100 {
        let mut t = if seq % 2 == 0 {
            let (a, b) = (rng.gen_range(2..6), rng.gen_range(2..5));
            let schema = common::random_schema(&mut rng, a, b);
            Table::create("S", schema, OrderPolicy::Insertion).unwrap()
        } else {
            common::random_table(&mut rng, 40)
        };
        let mut next_id = 10_000;
        let len = rng.gen_range(1..=64);
        for step in 0..len {
            common::random_dml(&mut rng, &mut t, &mut next_id);
            space_checks(&t, step).map_err(|e| format!("sequence {seq}, {e}"))?;
        }
    }
    Ok(())
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn persistence_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut tables = vec![
        fixtures::table1(OrderPolicy::Insertion),
        fixtures::table1(OrderPolicy::Rank),
    ];
    for _ in 0..20 {
        tables.push(common::random_table(&mut rng, 120));
    }
    for (i, t) in tables.iter().enumerate() {
        let a = tmp.path().join(format!("a{i}"));
        let b = tmp.path().join(format!("b{i}"));
        t.save(&a).map_err(|e| e.to_string())?;
        let loaded = Table::load(&a).map_err(|e| e.to_string())?;
        loaded.save(&b).map_err(|e| e.to_string())?;
        ensure(dir_snapshot(&a) == dir_snapshot(&b), || {
            format!("table {i}: directories differ")
        })?;
        ensure(&loaded == t, || format!("table {i}: loaded table differs"))?;
        let exprs: Vec<BoolExpr> = if i < 2 {
            vec![
                BoolExpr::leaf("Age", ComparisonOp::Eq, 20),
                BoolExpr::and(
                    BoolExpr::leaf("ID", ComparisonOp::Lt, 960115),
                    BoolExpr::leaf("Age", ComparisonOp::Eq, 20),
                ),
            ]
        } else {
            (0..5)
                .map(|_| common::random_expr(&mut rng, t, 3))
                .collect()
        };
        for e in exprs {
            let before: BTreeSet<usize> =
                Planner::new(t).evaluate(&e).map_err(|e| e.to_string())?.0;
            let after = Planner::new(&loaded)
                .evaluate(&e)
                .map_err(|e| e.to_string())?
                .0;
            ensure(before == after, || {
                format!("table {i}: `{e}` differs after reload")
            })?;
        }
    }
    Ok(())
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report =
        |id: usize, name: &str, result: Check, elapsed: Duration, limit: Option<Duration>| {
            let result = match (result, limit) {
                (Ok(()), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
                (r, _) => r,
            };
            match &result {
                Ok(()) => println!("[PASS] {id}. {name} ({elapsed:.2?})"),
                Err(e) => {
                    failed += 1;
                    println!("[FAIL] {id}. {name} ({elapsed:.2?}): {e}");
                }
            }
        };

    let (r, d) = timed(operator_exactness);
    report(1, "operator exactness", r, d, Some(Duration::from_secs(1)));
    let (r, d) = timed(search_exactness);
    report(2, "search exactness", r, d, Some(Duration::from_secs(30)));
    let (r, d) = timed(joint_state_trace);
    report(3, "joint state trace", r, d, None);
    let (r, d) = timed(example_fixtures);
    report(4, "example fixtures", r, d, None);
    let (trials, d) = timed(|| randomized_trials(500));
    report(
        5,
        "oracle equivalence",
        trials.equivalence,
        d,
        Some(Duration::from_secs(120)),
    );
    let (ex3, d3) = timed(combined_query_stats);
    let bound = trials.bound.and(ex3);
    report(6, "query bound", bound, d + d3, None);
    let (r, d) = timed(space_law);
    report(7, "space law", r, d, None);
    let (r, d) = timed(persistence_round_trip);
    report(8, "persistence round-trip", r, d, None);

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
