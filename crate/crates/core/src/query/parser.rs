//! Recursive-descent parser for the SELECT subset.
//!
//! ```text
//! select := SELECT cols FROM ident [WHERE expr] [';']
//! cols   := '*' | ident (',' ident)*
//! expr   := term (OR term)*
//! term   := factor (AND factor)*
//! factor := NOT factor | '(' expr ')' | ident cmp literal
//! ```

use super::ast::{BoolExpr, Columns, ComparisonOp, SelectStatement, SimpleCondition};
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use super::ParseError;
use crate::value::Value;

/// Clause keywords of full SQL that this engine rejects by name.
const UNSUPPORTED: &[&str] = &[
    "GROUP",
    "HAVING",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "UNION",
    "INTERSECT",
    "EXCEPT",
    "JOIN",
    "INTO",
    "DISTINCT",
    "ALL",
    "FOR",
    "BETWEEN",
    "IN",
    "LIKE",
];

pub fn parse(text: &str) -> Result<SelectStatement, ParseError> {
    let tokens = tokenize(text)?;
    parse_tokens(&tokens, text.chars().count())
}

/// Parses a token sequence; `end` is the offset reported for errors at end
/// of input.
pub fn parse_tokens(tokens: &[Token], end: usize) -> Result<SelectStatement, ParseError> {
    let mut p = Parser { tokens, at: 0, end };
    let stmt = p.select()?;
    Ok(stmt)
}

pub fn parse_select(tokens: &[Token]) -> Result<SelectStatement, ParseError> {
    let end = tokens.last().map(|t| t.pos + 1).unwrap_or(0);
    parse_tokens(tokens, end)
}

struct Parser<'a> {
    tokens: &'a [Token],
    at: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.at)
    }

    fn pos(&self) -> usize {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.at);
        self.at += 1;
        t
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Keyword(k), .. }) if *k == kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        if let Some(Token {
            kind: TokenKind::Ident(word),
            pos,
        }) = self.peek()
        {
            let upper = word.to_ascii_uppercase();
            if UNSUPPORTED.contains(&upper.as_str()) {
                return Err(ParseError::Unsupported {
                    pos: *pos,
                    clause: upper,
                });
            }
        }
        Err(ParseError::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .peek()
                .map(|t| t.kind.to_string())
                .unwrap_or_else(|| "end of input".to_string()),
        })
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.unexpected(&[kw.as_str()])
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(s),
                ..
            }) => {
                let upper = s.to_ascii_uppercase();
                if UNSUPPORTED.contains(&upper.as_str()) {
                    return self.unexpected(&["identifier"]);
                }
                self.at += 1;
                Ok(s.clone())
            }
            _ => self.unexpected(&["identifier"]),
        }
    }

    fn select(&mut self) -> Result<SelectStatement, ParseError> {
        self.expect_keyword(Keyword::Select)?;
        let columns = if self.eat(&TokenKind::Star) {
            Columns::All
        } else {
            let mut cols = vec![self.ident()?];
            while self.eat(&TokenKind::Comma) {
                cols.push(self.ident()?);
            }
            Columns::Named(cols)
        };
        self.expect_keyword(Keyword::From)?;
        let table = self.ident()?;
        let filter = if self.eat_keyword(Keyword::Where) {
            Some(self.expr()?)
        } else {
            None
        };
        self.eat(&TokenKind::Semicolon);
        if self.peek().is_some() {
            let expected: &[&str] = if filter.is_some() {
                &["AND", "OR", "end of input"]
            } else {
                &["WHERE", "end of input"]
            };
            return self.unexpected(expected);
        }
        Ok(SelectStatement {
            columns,
            table,
            filter,
        })
    }

    fn expr(&mut self) -> Result<BoolExpr, ParseError> {
        let mut left = self.term()?;
        while self.eat_keyword(Keyword::Or) {
            let right = self.term()?;
            left = BoolExpr::or(left, right);
        }
        Ok(left)
    }

    fn term(&mut self) -> Result<BoolExpr, ParseError> {
        let mut left = self.factor()?;
        while self.eat_keyword(Keyword::And) {
            let right = self.factor()?;
            left = BoolExpr::and(left, right);
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<BoolExpr, ParseError> {
        if self.eat_keyword(Keyword::Not) {
            return Ok(BoolExpr::not(self.factor()?));
        }
        if self.eat(&TokenKind::LParen) {
            let inner = self.expr()?;
            if !self.eat(&TokenKind::RParen) {
                return self.unexpected(&["`)`", "AND", "OR"]);
            }
            return Ok(inner);
        }
        if !matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Ident(_),
                ..
            })
        ) {
            return self.unexpected(&["NOT", "`(`", "identifier"]);
        }
        let property = self.ident()?;
        let op = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Eq) => ComparisonOp::Eq,
            Some(TokenKind::NotEq | TokenKind::LtGt) => ComparisonOp::Ne,
            Some(TokenKind::Lt) => ComparisonOp::Lt,
            Some(TokenKind::Le) => ComparisonOp::Le,
            Some(TokenKind::Gt) => ComparisonOp::Gt,
            Some(TokenKind::Ge) => ComparisonOp::Ge,
            _ => return self.unexpected(&["comparison operator"]),
        };
        self.at += 1;
        let literal = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Int(v)) => Value::Int(*v),
            Some(TokenKind::Str(s)) => Value::Str(s.clone()),
            _ => return self.unexpected(&["integer literal", "string literal"]),
        };
        self.bump();
        Ok(BoolExpr::Leaf(SimpleCondition {
            property,
            op,
            literal,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn filter(text: &str) -> BoolExpr {
        parse(text).unwrap().filter.unwrap()
    }

    #[test]
    fn single_equality() {
        let stmt = parse("SELECT ID, Name, Age FROM Table1 WHERE Age=20").unwrap();
        assert_eq!(
            stmt.columns,
            Columns::Named(vec!["ID".into(), "Name".into(), "Age".into()])
        );
        assert_eq!(stmt.table, "Table1");
        assert_eq!(
            stmt.filter,
            Some(BoolExpr::leaf("Age", ComparisonOp::Eq, 20))
        );
    }

    #[test]
    fn conjunction() {
        assert_eq!(
            filter("SELECT ID, Name, Age FROM Table1 WHERE ID<960115 AND Age=20"),
            BoolExpr::and(
                BoolExpr::leaf("ID", ComparisonOp::Lt, 960115),
                BoolExpr::leaf("Age", ComparisonOp::Eq, 20)
            )
        );
    }

    #[test]
    fn precedence_not_and_or() {
        assert_eq!(
            filter("SELECT * FROM T WHERE NOT A=1 OR B=2 AND C=3"),
            BoolExpr::or(
                BoolExpr::not(BoolExpr::leaf("A", ComparisonOp::Eq, 1)),
                BoolExpr::and(
                    BoolExpr::leaf("B", ComparisonOp::Eq, 2),
                    BoolExpr::leaf("C", ComparisonOp::Eq, 3)
                )
            )
        );
        assert_eq!(
            filter("select * from T where (A=1 or B=2) and not (C<>3)"),
            BoolExpr::and(
                BoolExpr::or(
                    BoolExpr::leaf("A", ComparisonOp::Eq, 1),
                    BoolExpr::leaf("B", ComparisonOp::Eq, 2)
                ),
                BoolExpr::not(BoolExpr::leaf("C", ComparisonOp::Ne, 3))
            )
        );
    }

    #[test]
    fn no_where_and_trailing_semicolon() {
        let stmt = parse("SELECT * FROM Table1;").unwrap();
        assert_eq!(stmt.columns, Columns::All);
        assert!(stmt.filter.is_none());
    }

    #[test]
    fn unsupported_clause_is_named() {
        assert_eq!(
            parse("SELECT * FROM T ORDER BY ID"),
            Err(ParseError::Unsupported {
                pos: 16,
                clause: "ORDER".into()
            })
        );
        assert!(matches!(
            parse("SELECT * FROM T WHERE A=1 GROUP BY A"),
            Err(ParseError::Unsupported { clause, .. }) if clause == "GROUP"
        ));
        assert!(matches!(
            parse("SELECT DISTINCT A FROM T"),
            Err(ParseError::Unsupported { clause, .. }) if clause == "DISTINCT"
        ));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("SELECT * FROM T WHERE Age 20") {
            Err(ParseError::Syntax { pos, expected, .. }) => {
                assert_eq!(pos, 26);
                assert_eq!(expected, vec!["comparison operator".to_string()]);
            }
            other => panic!("{other:?}"),
        }
        match parse("SELECT * FROM T WHERE (A=1") {
            Err(ParseError::Syntax { pos, found, .. }) => {
                assert_eq!(pos, 26);
                assert_eq!(found, "end of input");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("SELECT FROM T"),
            Err(ParseError::Syntax { pos: 7, .. })
        ));
        assert!(matches!(
            parse("SELECT * FROM T WHERE A=B"),
            Err(ParseError::Syntax { pos: 24, .. })
        ));
        assert!(matches!(
            parse("SELECT * FROM T U"),
            Err(ParseError::Syntax { pos: 16, .. })
        ));
    }

    #[test]
    fn parse_select_from_tokens() {
        let toks = tokenize("SELECT ID FROM T WHERE ID=1").unwrap();
        assert_eq!(
            parse_select(&toks).unwrap(),
            parse("SELECT ID FROM T WHERE ID=1").unwrap()
        );
    }

    fn arb_expr() -> impl Strategy<Value = BoolExpr> {
        let leaf = (
            prop::sample::select(vec!["A", "B", "Cee"]),
            prop::sample::select(ComparisonOp::ALL.to_vec()),
            prop_oneof![
                (-50i64..50).prop_map(Value::Int),
                "[a-z' ]{0,4}".prop_map(Value::Str)
            ],
        )
            .prop_map(|(p, op, v)| BoolExpr::leaf(p, op, v));
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| BoolExpr::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| BoolExpr::or(l, r)),
                inner.prop_map(BoolExpr::not),
            ]
        })
    }

    fn fully_parenthesized(e: &BoolExpr) -> String {
        match e {
            BoolExpr::Leaf(c) => c.to_string(),
            BoolExpr::And(l, r) => format!(
                "({} AND {})",
                fully_parenthesized(l),
                fully_parenthesized(r)
            ),
            BoolExpr::Or(l, r) => {
                format!("({} OR {})", fully_parenthesized(l), fully_parenthesized(r))
            }
            BoolExpr::Not(c) => format!("(NOT {})", fully_parenthesized(c)),
        }
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(e in arb_expr()) {
            let text = format!("SELECT * FROM T WHERE {e}");
            prop_assert_eq!(filter(&text), e);
        }

        #[test]
        fn parenthesized_form_matches_precedence_form(e in arb_expr()) {
            let text = format!("SELECT * FROM T WHERE {}", fully_parenthesized(&e));
            prop_assert_eq!(filter(&text), e);
        }

        #[test]
        fn errors_point_inside_input(text in "[A-Za-z0-9=<>!'(), *@]{0,30}") {
            let len = text.chars().count();
            match parse(&text) {
                Ok(_) => {}
                Err(e) => prop_assert!(e.position() <= len),
            }
        }
    }
}
