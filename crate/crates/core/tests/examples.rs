use factordb_core::planner::{render_explain, CallOutcome};
use factordb_core::query::ParseError;
use factordb_core::storage::Table;
use factordb_core::{execute, fixtures, Error, ErrorKind, OrderPolicy, SearchOptions, Value};

fn ids(t: &Table, sql: &str) -> Vec<i64> {
    execute(t, sql, SearchOptions::default())
        .unwrap()
        .rows
        .iter()
        .map(|r| r.values[0].as_int().unwrap())
        .collect()
}

#[test]
fn three_selects_on_table1() {
    for policy in [OrderPolicy::Insertion, OrderPolicy::Rank] {
        let t = fixtures::table1(policy);
        assert_eq!(
            ids(&t, "SELECT ID, Name, Age FROM Table1 WHERE Age=20"),
            [960114, 960115]
        );
        assert_eq!(
            ids(&t, "SELECT ID, Name, Age FROM Table1 WHERE ID<960115"),
            [960112, 960114, 960113]
        );
        assert_eq!(
            ids(
                &t,
                "SELECT ID, Name, Age FROM Table1 WHERE ID<960115 AND Age=20"
            ),
            [960114]
        );
    }
}

#[test]
fn result_rows_use_the_table_values() {
    let t = fixtures::table1(OrderPolicy::Insertion);
    let res = execute(
        &t,
        "SELECT * FROM Table1 WHERE ID<960115",
        SearchOptions::default(),
    )
    .unwrap();
    assert_eq!(
        res.rows[2].values,
        vec![Value::Int(960113), "Xing".into(), Value::Int(19)]
    );
    assert_eq!(
        res.rows.iter().map(|r| r.address).collect::<Vec<_>>(),
        [1, 2, 3]
    );
}

#[test]
fn age_equality_searches_each_aux_file_with_its_own_cost() {
    let t = fixtures::table1(OrderPolicy::Insertion);
    let res = execute(
        &t,
        "SELECT * FROM Table1 WHERE Age=20",
        SearchOptions::default(),
    )
    .unwrap();
    let calls: Vec<_> = res.trace.simple[0].calls().collect();
    assert_eq!(calls.iter().map(|c| c.queries).collect::<Vec<_>>(), [1, 0]);
    assert_eq!(
        calls.iter().map(|c| c.outcome).collect::<Vec<_>>(),
        [CallOutcome::Hit(2), CallOutcome::Hit(4)]
    );
    assert_eq!(res.stats.oracle_queries, 1);
    assert_eq!(res.stats.bound, 2);
}

#[test]
fn explain_marks_every_search() {
    let t = fixtures::table1(OrderPolicy::Rank);
    let res = execute(
        &t,
        "SELECT * FROM Table1 WHERE NOT (Age = 20 OR ID >= 960113)",
        SearchOptions::default(),
    )
    .unwrap();
    assert_eq!(
        ids(
            &t,
            "SELECT * FROM Table1 WHERE NOT (Age = 20 OR ID >= 960113)"
        ),
        [960112]
    );
    let text = render_explain(&res.trace, &res.stats);
    assert!(text.contains("R1 = Q1 OR Q2 -> {2,3,4}\n"), "{text}");
    assert!(text.contains("R2 = NOT R1 -> {1}\n"), "{text}");
}

#[test]
fn error_kinds() {
    let t = fixtures::table1(OrderPolicy::Insertion);
    let run = |sql: &str| execute(&t, sql, SearchOptions::default()).unwrap_err();
    let e = run("SELECT * FROM Table1 WHERE Age = ");
    assert!(
        matches!(e, Error::Parse(ParseError::Syntax { pos: 33, .. })),
        "{e:?}"
    );
    assert_eq!(e.kind(), ErrorKind::User);
    assert_eq!(
        run("SELECT * FROM Table1 WHERE Name = 'Lin'").kind(),
        ErrorKind::User
    );
    assert_eq!(run("SELECT * FROM Other").kind(), ErrorKind::User);
    assert_eq!(
        run("SELECT * FROM Table1 WHERE Age = 'x'").kind(),
        ErrorKind::User
    );
}

#[test]
fn dml_then_query_then_reload() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = fixtures::table1(OrderPolicy::Insertion);
    t.insert(vec![960116.into(), "Wu".into(), 20.into()])
        .unwrap();
    t.update(&960112.into(), &[("Age".into(), 20.into())])
        .unwrap();
    t.delete(&960114.into()).unwrap();
    assert_eq!(
        ids(&t, "SELECT ID FROM Table1 WHERE Age = 20"),
        [960112, 960115, 960116]
    );
    t.save(dir.path()).unwrap();
    let loaded = Table::load(dir.path()).unwrap();
    assert_eq!(
        ids(&loaded, "SELECT ID FROM Table1 WHERE Age = 20"),
        [960112, 960115, 960116]
    );
    assert_eq!(
        ids(&loaded, "SELECT ID FROM Table1 WHERE Age != 20"),
        [960113]
    );
    assert_eq!(loaded.aux_files("Age").len(), 3);
}

#[test]
fn coarse_eps_still_exact_on_table1() {
    let t = fixtures::table1(OrderPolicy::Insertion);
    let res = execute(
        &t,
        "SELECT ID FROM Table1 WHERE ID = 960115",
        SearchOptions { eps: 0.1 },
    )
    .unwrap();
    assert_eq!(res.rows.len(), 1);
    assert_eq!(res.stats.oracle_queries, 1);
}
