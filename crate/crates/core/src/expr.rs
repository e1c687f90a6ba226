//! A small expression language for real coefficient functions of one variable.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := factor (("*" | "/") factor)*
//! factor  := "-" factor | power
//! power   := primary ("^" factor)?          right associative
//! primary := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! Unary minus binds looser than `^`, so `-t^2` reads as `-(t^2)` while
//! `2^-1` is still accepted. Recognized functions are `exp`, `ln`, `sin`,
//! `cos`, `sqrt` and `abs`; the only other identifier allowed is the declared
//! variable.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Exp => x.exp(),
            // ln(0) is -inf and ln(x<0) is NaN; both surface as non-finite.
            UnaryOp::Ln => x.ln(),
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Sqrt => x.sqrt(),
            UnaryOp::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn apply(self, l: f64, r: f64) -> f64 {
        match self {
            BinaryOp::Add => l + r,
            BinaryOp::Sub => l - r,
            BinaryOp::Mul => l * r,
            BinaryOp::Div => l / r,
            BinaryOp::Pow => l.powf(r),
        }
    }
}

/// Parsed expression tree over a single variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluates the expression at `x`. Non-finite results are returned as is.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Unary(op, e) => op.apply(e.eval(x)),
            Expr::Binary(op, l, r) => op.apply(l.eval(x), r.eval(x)),
        }
    }

    /// True when the tree contains no variable reference.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Unary(_, e) => e.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    /// Source text that parses back to an identical tree.
    pub fn display<'a>(&'a self, var: &'a str) -> impl fmt::Display + 'a {
        Printer { expr: self, var }
    }
}

struct Printer<'a> {
    expr: &'a Expr,
    var: &'a str,
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e| Printer { expr: e, var: self.var };
        match self.expr {
            // `{:?}` on f64 is the shortest representation that round-trips.
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str(self.var),
            Expr::Unary(UnaryOp::Neg, e) => write!(f, "(-({}))", sub(e)),
            Expr::Unary(op, e) => write!(f, "{}({})", op.name(), sub(e)),
            Expr::Binary(op, l, r) => write!(f, "({} {} {})", sub(l), op.symbol(), sub(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: {message}")]
pub struct ParseError {
    /// Zero-based character offset; equals the input length for unexpected end.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| ParseError {
                    position: start,
                    message: format!("malformed number '{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        position: start,
                        message: format!("number '{text}' is out of range"),
                    });
                }
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => {
                return Err(ParseError {
                    position: start,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.close_paren(at)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(op) = UnaryOp::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected(&format!("'(' after function '{name}'")));
                    }
                    let open = self.offset();
                    self.bump();
                    let arg = self.expr()?;
                    self.close_paren(open)?;
                    Ok(Expr::Unary(op, Box::new(arg)))
                } else if name == self.var {
                    Ok(Expr::Var)
                } else {
                    Err(ParseError {
                        position: at,
                        message: format!("unknown identifier '{name}' (variable is '{}')", self.var),
                    })
                }
            }
            Tok::RParen => Err(ParseError {
                position: at,
                message: "unbalanced ')'".into(),
            }),
            Tok::End if at == 0 => Err(ParseError {
                position: 0,
                message: "empty input".into(),
            }),
            _ => Err(self.unexpected("a number, identifier or '('")),
        }
    }

    fn close_paren(&mut self, open: usize) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            Tok::End => Err(ParseError {
                position: self.offset(),
                message: format!("unbalanced '(' opened at offset {open}"),
            }),
            _ => Err(self.unexpected("')'")),
        }
    }
}

/// Parses `source` as an expression in the single variable `variable`.
pub fn parse(source: &str, variable: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        var: variable,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => Err(ParseError {
            position: p.offset(),
            message: "unbalanced ')'".into(),
        }),
        other => Err(ParseError {
            position: p.offset(),
            message: format!("trailing input starting with {}", describe(other)),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, x: f64) -> f64 {
        parse(src, "t").unwrap().eval(x)
    }

    #[test]
    fn basic_values() {
        assert!((ev("-1/3", 7.0) + 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(ev("exp(-t)", 0.0), 1.0);
        assert_eq!(ev("1/t", 2.0), 0.5);
        assert_eq!(ev("t^2", 3.0), 9.0);
        assert!(!ev("1/t", 0.0).is_finite());
        assert_eq!(ev("exp(1)", 0.0), std::f64::consts::E);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2+3*4", 0.0), 14.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-t^2", 3.0), -9.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("8/4/2", 0.0), 1.0);
        assert_eq!(ev("10-4-3", 0.0), 3.0);
        assert_eq!(ev(" ( 1 + t ) * 2 ", 1.5), 5.0);
        assert_eq!(ev("1.5e2 + .5 + 2E-1", 0.0), 150.7);
    }

    #[test]
    fn functions() {
        assert_eq!(ev("sqrt(16)", 0.0), 4.0);
        assert_eq!(ev("abs(-t)", 2.0), 2.0);
        assert_eq!(ev("ln(exp(t))", 1.25), 1.25);
        assert_eq!(ev("sin(0) + cos(0)", 0.0), 1.0);
        assert!(ev("ln(t)", -1.0).is_nan());
        assert!(ev("sqrt(t)", -1.0).is_nan());
    }

    #[test]
    fn other_variable_name() {
        let e = parse("1/(n+1)", "n").unwrap();
        assert_eq!(e.eval(3.0), 0.25);
        assert!(parse("1/(t+1)", "n").is_err());
    }

    #[test]
    fn error_offsets() {
        assert_eq!(parse("2*+3", "t").unwrap_err().position, 2);
        assert_eq!(parse("", "t").unwrap_err().position, 0);
        assert_eq!(parse("   ", "t").unwrap_err().position, 3);
        let e = parse("1 + x", "t").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(e.message.contains("unknown identifier"));
        let e = parse("(1+t", "t").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(e.message.contains("unbalanced"));
        assert_eq!(parse("1+t)", "t").unwrap_err().position, 3);
        assert_eq!(parse("1 2", "t").unwrap_err().position, 2);
        assert_eq!(parse("exp 2", "t").unwrap_err().position, 4);
        assert_eq!(parse("2 $ 3", "t").unwrap_err().position, 2);
        assert_eq!(parse("1e999", "t").unwrap_err().position, 0);
    }

    #[test]
    fn position_within_input() {
        for src in ["", "(", "1+", "t t", "sin(", "))", "2**3"] {
            let err = parse(src, "t").unwrap_err();
            assert!(err.position <= src.chars().count(), "{src:?}: {err}");
        }
    }

    #[test]
    fn constant_detection() {
        assert!(parse("-1/3", "t").unwrap().is_constant());
        assert!(!parse("1/t", "t").unwrap().is_constant());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(0.0f64..1e6).prop_map(Expr::Const), Just(Expr::Var),];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let unary = prop_oneof![
                Just(UnaryOp::Neg),
                Just(UnaryOp::Exp),
                Just(UnaryOp::Ln),
                Just(UnaryOp::Sin),
                Just(UnaryOp::Cos),
                Just(UnaryOp::Sqrt),
                Just(UnaryOp::Abs),
            ];
            let binary = prop_oneof![
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
                Just(BinaryOp::Div),
                Just(BinaryOp::Pow),
            ];
            prop_oneof![
                (unary, inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
                (binary, inner.clone(), inner).prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let text = e.display("t").to_string();
            let back = parse(&text, "t").unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn eval_is_deterministic(e in arb_expr(), x in -10.0f64..10.0) {
            prop_assert_eq!(e.eval(x).to_bits(), e.eval(x).to_bits());
        }
    }
}
