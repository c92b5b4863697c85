//! A small expression language in `x` and `y`.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?            right associative
//! atom  := number | 'x' | 'y' | 'pi' | 'zero'
//!        | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
//! ```
//!
//! Expressions can be differentiated symbolically. Powers with a
//! non-constant exponent are differentiable only when the base is a positive
//! constant.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Field1D, Field2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Arc<Node>,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let node = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected {} in {src:?}",
                p.tokens[p.pos].describe()
            )));
        }
        Ok(Self {
            root: Arc::new(simplify(node)),
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            root: Arc::new(Node::Num(c)),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        eval(&self.root, x, y)
    }

    /// The value if the expression does not depend on `x` or `y`.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.root {
            Node::Num(c) => Some(c),
            _ => None,
        }
    }

    pub fn uses(&self, v: Var) -> bool {
        uses(&self.root, v)
    }

    pub fn derivative(&self, v: Var) -> Result<Self> {
        Ok(Self {
            root: Arc::new(simplify(diff(&self.root, v)?)),
        })
    }

    /// `D_x^p D_y^q` of the expression.
    pub fn partial(&self, p: usize, q: usize) -> Result<Self> {
        let mut e = self.clone();
        for _ in 0..p {
            e = e.derivative(Var::X)?;
        }
        for _ in 0..q {
            e = e.derivative(Var::Y)?;
        }
        Ok(e)
    }

    pub fn to_field2d(&self) -> Field2D {
        if let Some(c) = self.as_constant() {
            return Field2D::constant(c);
        }
        let e = self.clone();
        Field2D::analytic(move |x, y| e.eval(x, y))
    }

    /// A function of the single variable `v`; other variables are rejected.
    /// Symbolic first and second derivatives are attached when available.
    pub fn to_field1d(&self, v: Var) -> Result<Field1D> {
        let other = match v {
            Var::X => Var::Y,
            Var::Y => Var::X,
        };
        if self.uses(other) {
            return Err(Error::Expression(format!(
                "{self} must depend on {} only",
                if v == Var::X { "x" } else { "y" }
            )));
        }
        if let Some(c) = self.as_constant() {
            return Ok(Field1D::constant(c));
        }
        let at = move |e: Expr| {
            move |t: f64| match v {
                Var::X => e.eval(t, 0.0),
                Var::Y => e.eval(0.0, t),
            }
        };
        match (self.derivative(v), self.partial_along(v, 2)) {
            (Ok(d1), Ok(d2)) => Ok(Field1D::analytic_with_derivatives(
                at(self.clone()),
                at(d1),
                at(d2),
            )),
            _ => Ok(Field1D::analytic(at(self.clone()))),
        }
    }

    fn partial_along(&self, v: Var, n: usize) -> Result<Self> {
        match v {
            Var::X => self.partial(n, 0),
            Var::Y => self.partial(0, n),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn eval(n: &Node, x: f64, y: f64) -> f64 {
    match n {
        Node::Num(c) => *c,
        Node::Var(Var::X) => x,
        Node::Var(Var::Y) => y,
        Node::Neg(a) => -eval(a, x, y),
        Node::Add(a, b) => eval(a, x, y) + eval(b, x, y),
        Node::Sub(a, b) => eval(a, x, y) - eval(b, x, y),
        Node::Mul(a, b) => eval(a, x, y) * eval(b, x, y),
        Node::Div(a, b) => eval(a, x, y) / eval(b, x, y),
        Node::Pow(a, b) => pow(eval(a, x, y), eval(b, x, y)),
        Node::Call(f, a) => f.apply(eval(a, x, y)),
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b == b.trunc() && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

fn uses(n: &Node, v: Var) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var(w) => *w == v,
        Node::Neg(a) | Node::Call(_, a) => uses(a, v),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            uses(a, v) || uses(b, v)
        }
    }
}

fn num(c: f64) -> Box<Node> {
    Box::new(Node::Num(c))
}

fn diff(n: &Node, v: Var) -> Result<Node> {
    use Node::*;
    let b = |n: Node| Box::new(n);
    Ok(match n {
        Num(_) => Num(0.0),
        Var(w) => Num(if *w == v { 1.0 } else { 0.0 }),
        Neg(a) => Neg(b(diff(a, v)?)),
        Add(p, q) => Add(b(diff(p, v)?), b(diff(q, v)?)),
        Sub(p, q) => Sub(b(diff(p, v)?), b(diff(q, v)?)),
        Mul(p, q) => Add(
            b(Mul(b(diff(p, v)?), q.clone())),
            b(Mul(p.clone(), b(diff(q, v)?))),
        ),
        Div(p, q) => Div(
            b(Sub(
                b(Mul(b(diff(p, v)?), q.clone())),
                b(Mul(p.clone(), b(diff(q, v)?))),
            )),
            b(Pow(q.clone(), num(2.0))),
        ),
        Pow(base, exp) => {
            if !uses(exp, v) {
                // c f^(c-1) f'
                Mul(
                    b(Mul(
                        exp.clone(),
                        b(Pow(base.clone(), b(Sub(exp.clone(), num(1.0))))),
                    )),
                    b(diff(base, v)?),
                )
            } else if let Num(c) = simplify((**base).clone()) {
                if c <= 0.0 {
                    return Err(Error::Expression(
                        "power with variable exponent needs a positive constant base".into(),
                    ));
                }
                Mul(b(Mul(b(n.clone()), num(c.ln()))), b(diff(exp, v)?))
            } else {
                return Err(Error::Expression(
                    "cannot differentiate a power whose base and exponent both vary".into(),
                ));
            }
        }
        Call(f, a) => {
            let outer = match f {
                Func::Sin => Call(Func::Cos, a.clone()),
                Func::Cos => Neg(b(Call(Func::Sin, a.clone()))),
                Func::Exp => Call(Func::Exp, a.clone()),
            };
            Mul(b(outer), b(diff(a, v)?))
        }
    })
}

/// Constant folding and removal of additive zeros and multiplicative ones.
fn simplify(n: Node) -> Node {
    use Node::*;
    match n {
        Neg(a) => match simplify(*a) {
            Num(c) => Num(-c),
            Neg(inner) => *inner,
            a => Neg(Box::new(a)),
        },
        Add(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(b)) => Num(a + b),
            (Num(z), e) | (e, Num(z)) if z == 0.0 => e,
            (p, q) => Add(Box::new(p), Box::new(q)),
        },
        Sub(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(b)) => Num(a - b),
            (e, Num(z)) if z == 0.0 => e,
            (Num(z), e) if z == 0.0 => simplify(Neg(Box::new(e))),
            (p, q) => Sub(Box::new(p), Box::new(q)),
        },
        Mul(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(b)) => Num(a * b),
            (Num(z), _) | (_, Num(z)) if z == 0.0 => Num(0.0),
            (Num(o), e) | (e, Num(o)) if o == 1.0 => e,
            (p, q) => Mul(Box::new(p), Box::new(q)),
        },
        Div(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(b)) => Num(a / b),
            (Num(z), _) if z == 0.0 => Num(0.0),
            (e, Num(o)) if o == 1.0 => e,
            (p, q) => Div(Box::new(p), Box::new(q)),
        },
        Pow(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(b)) => Num(pow(a, b)),
            (_, Num(z)) if z == 0.0 => Num(1.0),
            (e, Num(o)) if o == 1.0 => e,
            (p, q) => Pow(Box::new(p), Box::new(q)),
        },
        Call(f, a) => match simplify(*a) {
            Num(c) => Num(f.apply(c)),
            a => Call(f, Box::new(a)),
        },
        leaf => leaf,
    }
}

fn precedence(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        Node::Num(c) if *c < 0.0 => 3,
        _ => 5,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node) -> fmt::Result {
    let child = |f: &mut fmt::Formatter<'_>, c: &Node, min: u8| {
        if precedence(c) < min {
            write!(f, "(")?;
            write_node(f, c)?;
            write!(f, ")")
        } else {
            write_node(f, c)
        }
    };
    match n {
        Node::Num(c) => write!(f, "{c:?}"),
        Node::Var(Var::X) => write!(f, "x"),
        Node::Var(Var::Y) => write!(f, "y"),
        Node::Neg(a) => {
            write!(f, "-")?;
            child(f, a, 4)
        }
        Node::Add(a, b) => {
            child(f, a, 1)?;
            write!(f, " + ")?;
            child(f, b, 2)
        }
        Node::Sub(a, b) => {
            child(f, a, 1)?;
            write!(f, " - ")?;
            child(f, b, 2)
        }
        Node::Mul(a, b) => {
            child(f, a, 2)?;
            write!(f, " * ")?;
            child(f, b, 3)
        }
        Node::Div(a, b) => {
            child(f, a, 2)?;
            write!(f, " / ")?;
            child(f, b, 4)
        }
        Node::Pow(a, b) => {
            child(f, a, 5)?;
            write!(f, "^")?;
            child(f, b, 4)
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    Open,
    Close,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("name {s:?}"),
            Token::Op(c) => format!("operator {c:?}"),
            Token::Open => "'('".into(),
            Token::Close => "')'".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| Error::Expression(format!("bad number {text:?}")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::Open);
            i += 1;
        } else if c == ')' {
            out.push(Token::Close);
            i += 1;
        } else {
            return Err(Error::Expression(format!(
                "unexpected character {c:?} in {src:?}"
            )));
        }
    }
    if out.is_empty() {
        return Err(Error::Expression("empty expression".into()));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &str) -> Option<char> {
        match self.peek() {
            Some(Token::Op(c)) if ops.contains(*c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op("+-") {
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op("*/") {
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_op("-").is_some() {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op("+").is_some() {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat_op("^").is_some() {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Node::Num(v)),
            Some(Token::Open) => {
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Node::Var(Var::X)),
                "y" => Ok(Node::Var(Var::Y)),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "zero" => Ok(Node::Num(0.0)),
                "sin" | "cos" | "exp" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    match self.next() {
                        Some(Token::Open) => {}
                        _ => return Err(Error::Expression(format!("expected '(' after {name}"))),
                    }
                    let arg = self.expr()?;
                    self.close()?;
                    Ok(Node::Call(f, Box::new(arg)))
                }
                _ => Err(Error::Expression(format!("unknown name {name:?}"))),
            },
            Some(t) => Err(Error::Expression(format!("unexpected {}", t.describe()))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }

    fn close(&mut self) -> Result<()> {
        match self.next() {
            Some(Token::Close) => Ok(()),
            _ => Err(Error::Expression("missing ')'".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn ev(s: &str, x: f64, y: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x, y)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("(x + y) / 2", 3.0, 5.0), 4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0), -4.0);
        assert_eq!(ev("zero", 1.0, 1.0), 0.0);
        assert_eq!(ev("1.5e-1 * 2E1", 0.0, 0.0), 3.0);
        assert!((ev("sin(pi / 2) + cos(0) + exp(0)", 0.0, 0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "(x", "foo(x)", "sin x", "x $ y", "1..2", "x y"] {
            assert!(Expr::parse(bad).is_err(), "{bad:?} should fail");
        }
        let e = Expr::parse("x^y").unwrap();
        assert!(e.derivative(Var::Y).is_err());
        assert!(e.partial(1, 1).is_err());
        assert!(Expr::parse("2^x").unwrap().derivative(Var::X).is_ok());
    }

    #[test]
    fn symbolic_derivatives() {
        let e = Expr::parse("x^2 * y^2").unwrap();
        assert_eq!(e.partial(2, 2).unwrap().as_constant(), Some(4.0));
        assert_eq!(e.partial(3, 0).unwrap().as_constant(), Some(0.0));
        let e = Expr::parse("sin(x) * sin(y)").unwrap();
        let d = e.partial(2, 2).unwrap();
        for (x, y) in [(0.3, 0.7), (1.0, 0.1)] {
            assert!((d.eval(x, y) - e.eval(x, y)).abs() < 1e-15);
        }
        let e = Expr::parse("exp(2*x) / (1 + y)").unwrap();
        let d = e.partial(1, 1).unwrap();
        let (x, y): (f64, f64) = (0.4, 0.6);
        let expect = -2.0 * (2.0 * x).exp() / (1.0 + y).powi(2);
        assert!((d.eval(x, y) - expect).abs() < 1e-13);
        let e = Expr::parse("3^x").unwrap();
        let d = e.derivative(Var::X).unwrap();
        assert!((d.eval(0.5, 0.0) - 3f64.sqrt() * 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_fields() {
        let f = Expr::parse("y^3").unwrap().to_field1d(Var::Y).unwrap();
        assert_eq!(f.eval(2.0), 8.0);
        assert_eq!(f.derivative(2, 2.0), Some(12.0));
        assert!(Expr::parse("x + y").unwrap().to_field1d(Var::Y).is_err());
    }

    fn leaf() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("x".to_string()),
            Just("y".to_string()),
            (1u32..9).prop_map(|n| n.to_string()),
        ]
    }

    fn tree() -> impl Strategy<Value = String> {
        leaf().prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
                inner.clone().prop_map(|a| format!("sin({a})")),
                inner.clone().prop_map(|a| format!("cos({a})")),
                inner.prop_map(|a| format!("({a})^2")),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses_to_same_values(s in tree(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let e = Expr::parse(&s).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            let (a, b) = (e.eval(x, y), again.eval(x, y));
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn derivative_matches_central_difference(s in tree(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let e = Expr::parse(&s).unwrap();
            let d = e.derivative(Var::X).unwrap().eval(x, y);
            let h = 1e-5;
            let fd = (e.eval(x + h, y) - e.eval(x - h, y)) / (2.0 * h);
            prop_assert!((d - fd).abs() <= 1e-4 * (1.0 + d.abs()), "{s}: {d} vs {fd}");
        }
    }
}
