//! A small arithmetic language for sequences indexed by `n`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" factor)?
//! base   := number | "n" | "(" expr ")" | func "(" args ")"
//! func   := "ln" | "exp" | "iterlog"
//! ```
//!
//! `ln` and `exp` take one argument; `iterlog(k, x)` takes a literal
//! integer `k` and computes `ln_(k) x`. There is no unary minus. Parsed
//! expressions are compiled to postfix code, so evaluation needs no
//! recursion regardless of the input length.

use std::fmt;

use crate::error::{Error, Result};
use crate::iterlog::{self, index_to_real, Level, K_MAX_NUMERIC};
use crate::real::Real;

/// Parenthesis / exponent nesting accepted by the parser.
pub const MAX_NESTING: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Const(f64),
    Index,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Ln,
    Exp,
    Iterlog(Level),
}

/// A parsed expression in the variable `n`.
#[derive(Clone, PartialEq)]
pub struct Expr {
    text: String,
    code: Vec<Op>,
}

pub fn parse_expression(text: &str) -> Result<Expr> {
    Expr::parse(text)
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            depth: 0,
            code: Vec::new(),
        };
        p.expr()?;
        let tok = p.peek();
        if tok.kind != Tok::End {
            return Err(syntax(
                tok.pos,
                format!("expected operator or end of input, found {}", tok.kind),
            ));
        }
        Ok(Expr {
            text: text.to_owned(),
            code: p.code,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Value at index `n`. Fails on logarithms of non-positive values,
    /// division by zero, non-positive iterated logarithms and any
    /// non-finite intermediate.
    pub fn eval<R: Real>(&self, n: u64) -> Result<R> {
        let mut stack: Vec<R> = Vec::with_capacity(8);
        for &op in &self.code {
            let v = match op {
                Op::Const(c) => R::from_f64(c),
                Op::Index => index_to_real(n)?,
                Op::Ln => {
                    let x = stack.pop().expect("compiled code is balanced");
                    if !(x > R::zero()) {
                        return Err(eval_err(
                            n,
                            format!("ln of non-positive value {:e}", x.to_f64()),
                        ));
                    }
                    x.ln()
                }
                Op::Exp => stack.pop().expect("compiled code is balanced").exp(),
                Op::Iterlog(k) => {
                    let x = stack.pop().expect("compiled code is balanced");
                    let v = iterlog::iterlog(k, x).map_err(|e| eval_err(n, e.to_string()))?;
                    if !(v > R::zero()) {
                        return Err(eval_err(
                            n,
                            format!(
                                "iterlog({k}, {:e}) = {:e} is not positive",
                                x.to_f64(),
                                v.to_f64()
                            ),
                        ));
                    }
                    v
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
                    let b = stack.pop().expect("compiled code is balanced");
                    let a = stack.pop().expect("compiled code is balanced");
                    match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => {
                            if b == R::zero() {
                                return Err(eval_err(n, "division by zero".into()));
                            }
                            a / b
                        }
                        _ => power(a, b).map_err(|m| eval_err(n, m))?,
                    }
                }
            };
            if !v.is_finite() {
                return Err(eval_err(n, "non-finite intermediate value".into()));
            }
            stack.push(v);
        }
        Ok(stack.pop().expect("compiled code yields one value"))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.text)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

fn eval_err(n: u64, msg: String) -> Error {
    Error::Eval(format!("at n={n}: {msg}"))
}

fn syntax(position: usize, message: String) -> Error {
    Error::Syntax { position, message }
}

/// `a^b`; small integer exponents use repeated multiplication so that
/// negative bases work and integer powers stay exact where possible.
fn power<R: Real>(a: R, b: R) -> std::result::Result<R, String> {
    let e = b.to_f64();
    if e.fract() == 0.0 && e.abs() <= 64.0 && R::from_f64(e) == b {
        let mut k = e.abs() as u32;
        let mut base = a;
        let mut acc = R::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        if e < 0.0 {
            if acc == R::zero() {
                return Err("division by zero in negative power".into());
            }
            acc = acc.recip();
        }
        return Ok(acc);
    }
    if a > R::zero() {
        Ok(a.powf(b))
    } else if a == R::zero() && b > R::zero() {
        Ok(R::zero())
    } else {
        Err(format!("{:e}^{:e} is undefined", a.to_f64(), e))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v, _) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    /// Character offset of the token's first character.
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, pos: start });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut integral = true;
            if i < chars.len() && chars[i] == '.' {
                integral = false;
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
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lexeme: String = chars[start..i].iter().collect();
            let v: f64 = lexeme
                .parse()
                .map_err(|_| syntax(start, format!("malformed number '{lexeme}'")))?;
            out.push(Token {
                kind: Tok::Num(v, integral),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(chars[start..i].iter().collect()),
                pos: start,
            });
        } else {
            return Err(syntax(start, format!("unexpected character {c:?}")));
        }
    }
    out.push(Token {
        kind: Tok::End,
        pos: chars.len(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    code: Vec<Op>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: Tok, what: &str) -> Result<()> {
        let t = self.bump();
        if t.kind != kind {
            return Err(syntax(t.pos, format!("expected {what}, found {}", t.kind)));
        }
        Ok(())
    }

    fn nest(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax(
                self.peek().pos,
                format!("nesting deeper than {MAX_NESTING}"),
            ));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<()> {
        self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => Op::Add,
                Tok::Minus => Op::Sub,
                _ => return Ok(()),
            };
            self.bump();
            self.term()?;
            self.code.push(op);
        }
    }

    fn term(&mut self) -> Result<()> {
        self.factor()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => Op::Mul,
                Tok::Slash => Op::Div,
                _ => return Ok(()),
            };
            self.bump();
            self.factor()?;
            self.code.push(op);
        }
    }

    fn factor(&mut self) -> Result<()> {
        self.base()?;
        if self.peek().kind == Tok::Caret {
            self.bump();
            self.nest()?;
            self.factor()?;
            self.depth -= 1;
            self.code.push(Op::Pow);
        }
        Ok(())
    }

    fn base(&mut self) -> Result<()> {
        let t = self.bump();
        match t.kind {
            Tok::Num(v, _) => self.code.push(Op::Const(v)),
            Tok::LParen => {
                self.nest()?;
                self.expr()?;
                self.depth -= 1;
                self.expect(Tok::RParen, "')'")?;
            }
            Tok::Ident(name) => match name.as_str() {
                "n" => self.code.push(Op::Index),
                "ln" | "exp" => {
                    self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                    self.nest()?;
                    self.expr()?;
                    self.depth -= 1;
                    self.expect(Tok::RParen, "')'")?;
                    self.code.push(if name == "ln" { Op::Ln } else { Op::Exp });
                }
                "iterlog" => {
                    self.expect(Tok::LParen, "'(' after iterlog")?;
                    let k = self.bump();
                    let level = match k.kind {
                        Tok::Num(v, true) if (1.0..=f64::from(K_MAX_NUMERIC)).contains(&v) => {
                            Level::new(v as u32).expect("k >= 1")
                        }
                        other => {
                            return Err(syntax(
                                k.pos,
                                format!("expected integer level 1..={K_MAX_NUMERIC} for iterlog, found {other}"),
                            ))
                        }
                    };
                    self.expect(Tok::Comma, "','")?;
                    self.nest()?;
                    self.expr()?;
                    self.depth -= 1;
                    self.expect(Tok::RParen, "')'")?;
                    self.code.push(Op::Iterlog(level));
                }
                _ => {
                    return Err(syntax(
                        t.pos,
                        format!("unknown identifier '{name}'; expected n, ln, exp or iterlog"),
                    ))
                }
            },
            other => {
                return Err(syntax(
                    t.pos,
                    format!("expected number, n, '(' or function, found {other}"),
                ))
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Dd;
    use proptest::prelude::*;

    fn ev(s: &str, n: u64) -> Result<f64> {
        Expr::parse(s)?.eval::<f64>(n)
    }

    #[test]
    fn overflowing_power_terminates() {
        let e = Expr::parse("1e-9^1e308").unwrap();
        assert_eq!(e.eval::<f64>(1).unwrap(), 0.0);
        assert_eq!(e.eval::<Dd>(1).unwrap().to_f64(), 0.0);
    }

    #[test]
    fn identity() {
        assert_eq!(ev("n", 7).unwrap(), 7.0);
    }

    #[test]
    fn log_power_term_at_e_to_the_e() {
        // 1/(e^e * e^2), written with n replaced by its value
        let e = std::f64::consts::E;
        let x = e.powf(e);
        let v = Expr::parse("1/(x*ln(x)^2)".replace('x', &format!("{x:?}")).as_str())
            .unwrap()
            .eval::<f64>(1)
            .unwrap();
        assert!((v - 0.008930509521353123).abs() < 1e-16, "{v}");
    }

    #[test]
    fn log_power_term_at_integer() {
        let v: Dd = Expr::parse("1/(n*ln(n)^2)").unwrap().eval(15).unwrap();
        let l = 15f64.ln();
        assert!((v.to_f64() - 1.0 / (15.0 * l * l)).abs() < 1e-17);
    }

    #[test]
    fn iterlog_domain_edge() {
        assert!(matches!(ev("1/(n*iterlog(2,n))", 2), Err(Error::Eval(_))));
        assert!(matches!(ev("iterlog(2,n)", 1), Err(Error::Eval(_))));
        assert!((ev("iterlog(3,n)", 100).unwrap() - 0.4234226524603038).abs() < 1e-15);
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(ev("1/(n-3)", 3), Err(Error::Eval(_))));
        assert!(matches!(ev("ln(n-5)", 5), Err(Error::Eval(_))));
        assert!(matches!(ev("exp(n)", 1000), Err(Error::Eval(_))));
        assert!(matches!(ev("(n-5)^0.5", 2), Err(Error::Eval(_))));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2+3*n", 4).unwrap(), 14.0);
        assert_eq!(ev("n-2-1", 10).unwrap(), 7.0);
        assert_eq!(ev("n/2/5", 100).unwrap(), 10.0);
        assert_eq!(ev("2^3^2", 1).unwrap(), 512.0);
        assert_eq!(ev("(n-5)^3", 2).unwrap(), -27.0);
        assert!(ev("n^-1", 2).is_err());
        assert_eq!(ev("2.5e1 + .5", 1).unwrap(), 25.5);
        assert!((ev("exp(ln(n))", 9).unwrap() - 9.0).abs() < 1e-14);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let pos = |s: &str| match Expr::parse(s) {
            Err(Error::Syntax { position, .. }) => position,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(pos(""), 0);
        assert_eq!(pos("n+"), 2);
        assert_eq!(pos("(n"), 2);
        assert_eq!(pos("n n"), 2);
        assert_eq!(pos("foo(n)"), 0);
        assert_eq!(pos("iterlog(2.5,n)"), 8);
        assert_eq!(pos("iterlog(0,n)"), 8);
        assert_eq!(pos("ln n"), 3);
        assert_eq!(pos("n # 2"), 2);
        assert_eq!(pos("-n"), 0);
        match Expr::parse("(n") {
            Err(Error::Syntax { message, .. }) => {
                assert!(message.contains("expected ')'"), "{message}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deep_input_is_rejected_not_overflowed() {
        let deep = "(".repeat(100_000) + "n" + &")".repeat(100_000);
        assert!(matches!(Expr::parse(&deep), Err(Error::Syntax { .. })));
        let tower = vec!["n"; 10_000].join("^");
        assert!(matches!(Expr::parse(&tower), Err(Error::Syntax { .. })));
        let long = vec!["n"; 200_000].join("+");
        assert_eq!(
            Expr::parse(&long).unwrap().eval::<f64>(1).unwrap(),
            200_000.0
        );
    }

    proptest! {
        #[test]
        fn never_panics_on_arbitrary_text(s in "\\PC{0,40}") {
            if let Ok(e) = Expr::parse(&s) {
                let _ = e.eval::<f64>(10);
            }
        }

        #[test]
        fn never_panics_on_grammar_soup(s in "[n0-9.e()+*/^ ,-]{0,40}|(ln|exp|iterlog|[n0-9()+*/^,])*") {
            if let Ok(e) = Expr::parse(&s) {
                let _ = e.eval::<Dd>(1000);
            }
        }
    }
}
