use std::fmt::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    Element,
    Guide,
}

impl StatementKind {
    pub fn keyword(self) -> &'static str {
        match self {
            StatementKind::Element => "ELEMENT",
            StatementKind::Guide => "GUIDE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GogStatement {
    pub kind: StatementKind,
    pub call: CallExpr,
}

/// `a.b.c(arg, ...)`
#[derive(Debug, Clone, PartialEq)]
pub struct CallExpr {
    pub path: Vec<String>,
    pub args: Vec<Expr>,
}

impl CallExpr {
    pub fn new(path: &str, args: Vec<Expr>) -> Self {
        CallExpr {
            path: path.split('.').map(str::to_string).collect(),
            args,
        }
    }

    pub fn dotted(&self) -> String {
        self.path.join(".")
    }

    pub fn is(&self, dotted: &str) -> bool {
        self.path.iter().map(String::as_str).eq(dotted.split('.'))
    }

    /// First argument that is a call to `name`.
    pub fn arg_call(&self, name: &str) -> Option<&CallExpr> {
        self.args.iter().find_map(|a| match a {
            Expr::Call(c) if c.is(name) => Some(c),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Call(CallExpr),
    Ident(String),
    Str(String),
    Number(f64),
    Tuple(f64, f64),
    /// `a*b`; operands are identifiers or calls.
    Cross(Box<Expr>, Box<Expr>),
}

fn write_str_lit(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
}

impl Expr {
    fn write(&self, out: &mut String) {
        match self {
            Expr::Call(c) => c.write(out),
            Expr::Ident(s) => out.push_str(s),
            Expr::Str(s) => write_str_lit(out, s),
            Expr::Number(n) => {
                let _ = write!(out, "{n}");
            }
            Expr::Tuple(a, b) => {
                let _ = write!(out, "({a},{b})");
            }
            Expr::Cross(a, b) => {
                a.write(out);
                out.push('*');
                b.write(out);
            }
        }
    }
}

impl CallExpr {
    fn write(&self, out: &mut String) {
        out.push_str(&self.dotted());
        out.push('(');
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            arg.write(out);
        }
        out.push(')');
    }
}

impl fmt::Display for GogStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.call.write(&mut out);
        write!(f, "{}: {}", self.kind.keyword(), out)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write(&mut out);
        f.write_str(&out)
    }
}

/// Renders statements back to script text, one per line.
pub fn pretty_print(statements: &[GogStatement]) -> String {
    statements.iter().map(|s| format!("{s}\n")).collect()
}
