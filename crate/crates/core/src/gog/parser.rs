use super::ast::{CallExpr, Expr, GogStatement, StatementKind};
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use super::GogError;

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn error(&self, expected: &[&str]) -> GogError {
        let (pos, found) = match self.peek() {
            Some(t) => (Some(t.pos), t.kind.to_string()),
            None => (None, "end of input".to_string()),
        };
        GogError::Syntax {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expect(&mut self, kind: &TokenKind, label: &str) -> Result<(), GogError> {
        if self.peek_kind() == Some(kind) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn statement(&mut self) -> Result<GogStatement, GogError> {
        let tok = self.next().expect("caller checked for input");
        let kind = match tok.kind {
            TokenKind::Keyword(Keyword::Element) => StatementKind::Element,
            TokenKind::Keyword(Keyword::Guide) => StatementKind::Guide,
            TokenKind::Keyword(k) => {
                return Err(GogError::Reserved {
                    pos: tok.pos,
                    keyword: k.as_str().to_string(),
                })
            }
            TokenKind::Ident(word) => {
                return Err(GogError::UnknownStatement { pos: tok.pos, word })
            }
            _ => {
                self.at -= 1;
                return Err(self.error(&["ELEMENT", "GUIDE"]));
            }
        };
        self.expect(&TokenKind::Colon, "':'")?;
        let call = match self.peek_kind() {
            Some(TokenKind::Ident(_)) => self.call()?,
            _ => return Err(self.error(&["identifier"])),
        };
        Ok(GogStatement { kind, call })
    }

    /// Parses `ident(.ident)*` and stops before anything else.
    fn path(&mut self) -> Result<Vec<String>, GogError> {
        let mut path = Vec::new();
        loop {
            match self.next() {
                Some(Token {
                    kind: TokenKind::Ident(s),
                    ..
                }) => path.push(s),
                _ => {
                    self.at -= 1;
                    return Err(self.error(&["identifier"]));
                }
            }
            if self.peek_kind() == Some(&TokenKind::Dot) {
                self.at += 1;
            } else {
                return Ok(path);
            }
        }
    }

    fn call(&mut self) -> Result<CallExpr, GogError> {
        let path = self.path()?;
        self.call_args(path)
    }

    fn call_args(&mut self, path: Vec<String>) -> Result<CallExpr, GogError> {
        self.expect(&TokenKind::LParen, "'('")?;
        let mut args = Vec::new();
        if self.peek_kind() == Some(&TokenKind::RParen) {
            self.at += 1;
            return Ok(CallExpr { path, args });
        }
        loop {
            args.push(self.expr()?);
            match self.peek_kind() {
                Some(TokenKind::Comma) => self.at += 1,
                Some(TokenKind::RParen) => {
                    self.at += 1;
                    return Ok(CallExpr { path, args });
                }
                _ => return Err(self.error(&["','", "')'", "'*'"])),
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, GogError> {
        let lhs = self.primary()?;
        if self.peek_kind() != Some(&TokenKind::Star) {
            return Ok(lhs);
        }
        if !matches!(lhs, Expr::Ident(_) | Expr::Call(_)) {
            return Err(self.error(&["','", "')'"]));
        }
        self.at += 1;
        let rhs = match self.peek_kind() {
            Some(TokenKind::Ident(_)) => self.primary()?,
            _ => return Err(self.error(&["identifier"])),
        };
        if self.peek_kind() == Some(&TokenKind::Star) {
            // Only the binary cross is supported; a*b*c would nest crosses.
            return Err(self.error(&["','", "')'"]));
        }
        Ok(Expr::Cross(Box::new(lhs), Box::new(rhs)))
    }

    fn primary(&mut self) -> Result<Expr, GogError> {
        match self.peek_kind() {
            Some(TokenKind::Ident(_)) => {
                let path = self.path()?;
                if self.peek_kind() == Some(&TokenKind::LParen) {
                    Ok(Expr::Call(self.call_args(path)?))
                } else if path.len() == 1 {
                    Ok(Expr::Ident(path.into_iter().next().unwrap()))
                } else {
                    Err(self.error(&["'('"]))
                }
            }
            Some(TokenKind::Str(_)) => match self.next().map(|t| t.kind) {
                Some(TokenKind::Str(s)) => Ok(Expr::Str(s)),
                _ => unreachable!(),
            },
            Some(TokenKind::Number(n)) => {
                let n = *n;
                self.at += 1;
                Ok(Expr::Number(n))
            }
            Some(TokenKind::LParen) => {
                self.at += 1;
                let a = self.number()?;
                self.expect(&TokenKind::Comma, "','")?;
                let b = self.number()?;
                self.expect(&TokenKind::RParen, "')'")?;
                Ok(Expr::Tuple(a, b))
            }
            _ => Err(self.error(&["identifier", "string", "number", "'('"])),
        }
    }

    fn number(&mut self) -> Result<f64, GogError> {
        match self.peek_kind() {
            Some(TokenKind::Number(n)) => {
                let n = *n;
                self.at += 1;
                Ok(n)
            }
            _ => Err(self.error(&["number"])),
        }
    }
}

/// Parses a script into statements in source order.
pub fn parse(source: &str) -> Result<Vec<GogStatement>, GogError> {
    let mut p = Parser {
        tokens: tokenize(source)?,
        at: 0,
    };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.statement()?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::ast::pretty_print;
    use crate::gog::Pos;
    use crate::gog::EXAMPLE_SCRIPT;
    use proptest::prelude::*;

    fn ident(s: &str) -> Expr {
        Expr::Ident(s.into())
    }

    #[test]
    fn listing() {
        let stmts = parse(EXAMPLE_SCRIPT).unwrap();
        assert_eq!(stmts.len(), 5);
        let kinds: Vec<_> = stmts.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            [
                StatementKind::Element,
                StatementKind::Element,
                StatementKind::Guide,
                StatementKind::Guide,
                StatementKind::Guide
            ]
        );
        assert_eq!(
            stmts[0].call,
            CallExpr::new(
                "point",
                vec![
                    Expr::Call(CallExpr::new(
                        "position",
                        vec![Expr::Cross(Box::new(ident("birth")), Box::new(ident("death")))]
                    )),
                    Expr::Call(CallExpr::new("size", vec![ident("zero")])),
                    Expr::Call(CallExpr::new("label", vec![ident("country")])),
                ]
            )
        );
        let density = &stmts[1].call.args[0];
        let Expr::Call(position) = density else { panic!() };
        let Expr::Call(kde) = &position.args[0] else { panic!() };
        assert!(kde.is("smooth.density.kernel.epanechnikov.joint"));
        assert_eq!(
            stmts[2].call.arg_call("position").unwrap().args,
            vec![Expr::Tuple(0.0, 0.0), Expr::Tuple(30.0, 30.0)]
        );
        assert_eq!(
            stmts[4].call.arg_call("label").unwrap().args,
            vec![Expr::Str("Death Rate".into())]
        );
    }

    #[test]
    fn empty_script() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("  # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn unbalanced_paren() {
        match parse("ELEMENT: point(").unwrap_err() {
            GogError::Syntax { pos, found, .. } => {
                assert_eq!(pos, None);
                assert_eq!(found, "end of input");
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn reserved_and_unknown_keywords() {
        assert!(matches!(
            parse("SCALE: linear(dim(1))"),
            Err(GogError::Reserved { .. })
        ));
        assert!(matches!(
            parse("FACET: x()"),
            Err(GogError::UnknownStatement { .. })
        ));
    }

    #[test]
    fn syntax_error_location() {
        match parse("GUIDE: axis(dim(1)\nELEMENT: point(a)").unwrap_err() {
            GogError::Syntax { pos, expected, .. } => {
                assert_eq!(pos, Some(Pos { line: 2, col: 1 }));
                assert!(expected.contains(&"')'".to_string()));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn cross_restrictions() {
        assert!(parse("ELEMENT: point(position(a*b*c))").is_err());
        assert!(parse("ELEMENT: point(position(\"a\"*b))").is_err());
        assert!(parse("ELEMENT: point(position(a.b))").is_err());
    }

    #[test]
    fn pretty_print_listing_round_trips() {
        let stmts = parse(EXAMPLE_SCRIPT).unwrap();
        let text = pretty_print(&stmts);
        assert!(text.starts_with("ELEMENT: point(position(birth*death), size(zero), label(country))\n"));
        assert_eq!(parse(&text).unwrap(), stmts);
    }

    fn arb_ident() -> impl Strategy<Value = String> {
        "[a-z_][a-z0-9_]{0,5}"
    }

    fn arb_call(depth: u32) -> BoxedStrategy<CallExpr> {
        let args = if depth == 0 {
            proptest::collection::vec(arb_leaf(), 0..3).boxed()
        } else {
            proptest::collection::vec(
                prop_oneof![arb_leaf(), arb_call(depth - 1).prop_map(Expr::Call)],
                0..3,
            )
            .boxed()
        };
        (proptest::collection::vec(arb_ident(), 1..4), args)
            .prop_map(|(path, args)| CallExpr { path, args })
            .boxed()
    }

    fn arb_leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            arb_ident().prop_map(Expr::Ident),
            "[ -~é]{0,6}".prop_map(Expr::Str),
            (-1e6f64..1e6).prop_map(Expr::Number),
            ((-100f64..100.0), (-100f64..100.0)).prop_map(|(a, b)| Expr::Tuple(a, b)),
            (arb_ident(), arb_ident())
                .prop_map(|(a, b)| Expr::Cross(Box::new(Expr::Ident(a)), Box::new(Expr::Ident(b)))),
        ]
    }

    fn arb_statement() -> impl Strategy<Value = GogStatement> {
        (any::<bool>(), arb_call(2)).prop_map(|(e, call)| GogStatement {
            kind: if e { StatementKind::Element } else { StatementKind::Guide },
            call,
        })
    }

    proptest! {
        #[test]
        fn parse_pretty_parse_is_stable(stmts in proptest::collection::vec(arb_statement(), 0..4)) {
            let text = pretty_print(&stmts);
            let once = parse(&text).unwrap();
            prop_assert_eq!(&once, &stmts);
            let twice = parse(&pretty_print(&once)).unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
