//! Scalar component functions of chart coordinates.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | coordinate | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | tan | exp | log | sqrt
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is accepted.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::dual::{Dual, Scalar};

/// Names that cannot be used as coordinates.
pub const RESERVED: [&str; 8] = ["pi", "e", "sin", "cos", "tan", "exp", "log", "sqrt"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

/// Expression tree. Coordinates are referenced by index into the owning
/// chart's coordinate list.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("coordinate name `{0}` is reserved")]
    ReservedCoordinate(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {op} at argument {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("point has {got} coordinates, expression expects {expected}")]
    Arity { expected: usize, got: usize },
}

fn domain(op: &'static str, arg: f64) -> EvalError {
    EvalError::Domain { op, arg }
}

/// A parsed scalar function of the chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr {
    node: Node,
    arity: usize,
}

impl ScalarExpr {
    /// Parses `source` over the given coordinate names.
    pub fn parse(source: &str, coordinates: &[impl AsRef<str>]) -> Result<Self, ParseError> {
        check_coordinates(coordinates)?;
        if source.trim().is_empty() {
            return Err(ParseError::Empty);
        }
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            coords: coordinates,
            end: source.len(),
        };
        let node = parser.expr()?;
        if let Some(t) = parser.peek() {
            return Err(ParseError::Syntax {
                position: t.pos,
                message: "unexpected trailing input".to_string(),
            });
        }
        Ok(ScalarExpr {
            node,
            arity: coordinates.len(),
        })
    }

    pub fn from_node(node: Node, arity: usize) -> Self {
        ScalarExpr { node, arity }
    }

    pub fn constant(value: f64, arity: usize) -> Self {
        ScalarExpr {
            node: Node::Num(value),
            arity,
        }
    }

    pub fn coordinate(index: usize, arity: usize) -> Self {
        assert!(index < arity);
        ScalarExpr {
            node: Node::Var(index),
            arity,
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The literal value when the tree is a bare number.
    pub fn as_number(&self) -> Option<f64> {
        match self.node {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval_generic(point)
    }

    /// Value and exact gradient at `point`.
    pub fn eval_dual(&self, point: &[f64]) -> Result<Dual<f64>, EvalError> {
        self.check_arity(point.len())?;
        let seeded = Dual::seed(point);
        eval_node(&self.node, &seeded)
    }

    /// Evaluates over any scalar type; derivative levels come from the
    /// caller's seeding of `point`.
    pub fn eval_generic<S: Scalar>(&self, point: &[S]) -> Result<S, EvalError> {
        self.check_arity(point.len())?;
        eval_node(&self.node, point)
    }

    fn check_arity(&self, got: usize) -> Result<(), EvalError> {
        if got != self.arity {
            return Err(EvalError::Arity {
                expected: self.arity,
                got,
            });
        }
        Ok(())
    }

    /// Canonical source text; `parse(to_source(e)) == e` for parsed trees.
    pub fn to_source(&self, coordinates: &[impl AsRef<str>]) -> String {
        let mut out = String::new();
        print_node(&self.node, coordinates, 0, &mut out);
        out
    }

    // Builders used by constructions that produce new fields. They fold
    // numeric constants and the additive/multiplicative identities only.

    pub fn add(&self, rhs: &ScalarExpr) -> ScalarExpr {
        self.same_arity(rhs);
        let node = match (&self.node, &rhs.node) {
            (Node::Num(a), Node::Num(b)) => Node::Num(a + b),
            (Node::Num(a), _) if *a == 0.0 => rhs.node.clone(),
            (_, Node::Num(b)) if *b == 0.0 => self.node.clone(),
            (_, Node::Num(b)) if *b < 0.0 => Node::Sub(Box::new(self.node.clone()), Box::new(Node::Num(-b))),
            _ => Node::Add(Box::new(self.node.clone()), Box::new(rhs.node.clone())),
        };
        ScalarExpr::from_node(node, self.arity)
    }

    pub fn sub(&self, rhs: &ScalarExpr) -> ScalarExpr {
        self.same_arity(rhs);
        let node = match (&self.node, &rhs.node) {
            (Node::Num(a), Node::Num(b)) => Node::Num(a - b),
            (Node::Num(a), _) if *a == 0.0 => return rhs.neg(),
            (_, Node::Num(b)) if *b == 0.0 => self.node.clone(),
            _ => Node::Sub(Box::new(self.node.clone()), Box::new(rhs.node.clone())),
        };
        ScalarExpr::from_node(node, self.arity)
    }

    pub fn mul(&self, rhs: &ScalarExpr) -> ScalarExpr {
        self.same_arity(rhs);
        let node = match (&self.node, &rhs.node) {
            (Node::Num(a), Node::Num(b)) => Node::Num(a * b),
            (Node::Num(a), _) => return rhs.scale(*a),
            (_, Node::Num(b)) => return self.scale(*b),
            _ => Node::Mul(Box::new(self.node.clone()), Box::new(rhs.node.clone())),
        };
        ScalarExpr::from_node(node, self.arity)
    }

    pub fn neg(&self) -> ScalarExpr {
        let node = match &self.node {
            Node::Num(a) => Node::Num(-a),
            Node::Neg(inner) => (**inner).clone(),
            other => Node::Neg(Box::new(other.clone())),
        };
        ScalarExpr::from_node(node, self.arity)
    }

    /// `c * self`, merging with an existing leading numeric factor.
    pub fn scale(&self, c: f64) -> ScalarExpr {
        let node = if c == 0.0 {
            Node::Num(0.0)
        } else if c == 1.0 {
            self.node.clone()
        } else {
            match &self.node {
                Node::Num(a) => Node::Num(c * a),
                Node::Neg(inner) => return ScalarExpr::from_node((**inner).clone(), self.arity).scale(-c),
                Node::Mul(a, b) => match **a {
                    Node::Num(k) => return ScalarExpr::from_node((**b).clone(), self.arity).scale(c * k),
                    _ => Node::Mul(Box::new(Node::Num(c)), Box::new(self.node.clone())),
                },
                _ if c == -1.0 => Node::Neg(Box::new(self.node.clone())),
                _ => Node::Mul(Box::new(Node::Num(c)), Box::new(self.node.clone())),
            }
        };
        ScalarExpr::from_node(node, self.arity)
    }

    /// Sum of an iterator of expressions (zero when empty).
    pub fn sum(terms: impl IntoIterator<Item = ScalarExpr>, arity: usize) -> ScalarExpr {
        terms
            .into_iter()
            .fold(ScalarExpr::constant(0.0, arity), |acc, t| acc.add(&t))
    }

    /// The same tree read over a chart with `arity` coordinates. Returns
    /// `None` if the tree references a coordinate index `>= arity`.
    pub fn with_arity(&self, arity: usize) -> Option<ScalarExpr> {
        if max_var(&self.node).is_some_and(|m| m >= arity) {
            return None;
        }
        Some(ScalarExpr::from_node(self.node.clone(), arity))
    }

    fn same_arity(&self, other: &ScalarExpr) {
        assert_eq!(self.arity, other.arity, "expressions over different charts");
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Num(_) | Node::Const(_) => None,
        Node::Var(i) => Some(*i),
        Node::Neg(a) | Node::Call(_, a) => max_var(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            max_var(a).max(max_var(b))
        }
    }
}

fn check_coordinates(coordinates: &[impl AsRef<str>]) -> Result<(), ParseError> {
    for (i, c) in coordinates.iter().enumerate() {
        let c = c.as_ref();
        if RESERVED.contains(&c) {
            return Err(ParseError::ReservedCoordinate(c.to_string()));
        }
        if coordinates[..i].iter().any(|d| d.as_ref() == c) {
            return Err(ParseError::DuplicateCoordinate(c.to_string()));
        }
    }
    Ok(())
}

fn eval_node<S: Scalar>(node: &Node, p: &[S]) -> Result<S, EvalError> {
    let out = match node {
        Node::Num(v) => S::from_f64(*v),
        Node::Const(Constant::Pi) => S::from_f64(core::f64::consts::PI),
        Node::Const(Constant::E) => S::from_f64(core::f64::consts::E),
        Node::Var(i) => p[*i].clone(),
        Node::Neg(a) => -eval_node(a, p)?,
        Node::Add(a, b) => eval_node(a, p)? + eval_node(b, p)?,
        Node::Sub(a, b) => eval_node(a, p)? - eval_node(b, p)?,
        Node::Mul(a, b) => eval_node(a, p)? * eval_node(b, p)?,
        Node::Div(a, b) => {
            let num = eval_node(a, p)?;
            let den = eval_node(b, p)?;
            if den.value() == 0.0 {
                return Err(domain("division by zero", 0.0));
            }
            num / den
        }
        Node::Pow(a, b) => {
            let base = eval_node(a, p)?;
            match integer_exponent(b) {
                Some(n) => {
                    if n < 0 && base.value() == 0.0 {
                        return Err(domain("negative power of zero", 0.0));
                    }
                    base.powi(n)
                }
                None => {
                    let v = base.value();
                    if v <= 0.0 {
                        return Err(domain("real power of non-positive base", v));
                    }
                    (eval_node(b, p)? * base.ln()).exp()
                }
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, p)?;
            let v = x.value();
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(domain("log of non-positive", v));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(domain("sqrt of negative", v));
                    }
                    x.sqrt()
                }
            }
        }
    };
    if !out.is_finite() {
        return Err(domain("non-finite result", out.value()));
    }
    Ok(out)
}

/// Integer value of an exponent subtree that contains no coordinates.
fn integer_exponent(node: &Node) -> Option<i32> {
    let v = constant_value(node)?;
    if libm::trunc(v) == v && v.abs() <= i32::MAX as f64 {
        Some(v as i32)
    } else {
        None
    }
}

fn constant_value(node: &Node) -> Option<f64> {
    match node {
        Node::Num(v) => Some(*v),
        Node::Neg(a) => constant_value(a).map(|v| -v),
        Node::Add(a, b) => Some(constant_value(a)? + constant_value(b)?),
        Node::Sub(a, b) => Some(constant_value(a)? - constant_value(b)?),
        Node::Mul(a, b) => Some(constant_value(a)? * constant_value(b)?),
        Node::Div(a, b) => Some(constant_value(a)? / constant_value(b)?),
        Node::Pow(a, b) => Some(libm::pow(constant_value(a)?, constant_value(b)?)),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Tokenizer and parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when followed by digits, so `2*e` style input stays unambiguous
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                position: start,
                message: alloc::format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                pos: start,
            });
        } else if "+-*/^()".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                pos: i,
            });
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                position: i,
                message: alloc::format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a, C: AsRef<str>> {
    tokens: &'a [Token],
    pos: usize,
    coords: &'a [C],
    end: usize,
}

impl<C: AsRef<str>> Parser<'_, C> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if let Some(Token { tok: Tok::Op(c), .. }) = self.peek() {
            if *c == op {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn error<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position: self.here(),
            message: message.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat_op('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(token) = self.peek().cloned() else {
            return self.error("unexpected end of input");
        };
        self.pos += 1;
        match token.tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return self.error("expected `)`");
                }
                Ok(inner)
            }
            Tok::Op(c) => Err(ParseError::Syntax {
                position: token.pos,
                message: alloc::format!("unexpected `{c}`"),
            }),
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if !self.eat_op('(') {
                        return self.error("expected `(` after function name");
                    }
                    let arg = self.expr()?;
                    if !self.eat_op(')') {
                        return self.error("expected `)`");
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => return Ok(Node::Const(Constant::Pi)),
                    "e" => return Ok(Node::Const(Constant::E)),
                    _ => {}
                }
                match self.coords.iter().position(|c| c.as_ref() == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(ParseError::UnknownSymbol(name)),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Printer

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => PREC_ADD,
        Node::Mul(..) | Node::Div(..) => PREC_MUL,
        Node::Neg(_) => PREC_NEG,
        Node::Num(v) if *v < 0.0 => PREC_NEG,
        Node::Pow(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn print_number(v: f64, out: &mut String) {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        let _ = write!(out, "{a}");
    } else {
        let _ = write!(out, "{a:e}");
    }
}

fn print_node(node: &Node, coords: &[impl AsRef<str>], min_prec: u8, out: &mut String) {
    let prec = precedence(node);
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    match node {
        Node::Num(v) => {
            if *v < 0.0 {
                out.push('-');
            }
            print_number(*v, out);
        }
        Node::Const(Constant::Pi) => out.push_str("pi"),
        Node::Const(Constant::E) => out.push('e'),
        Node::Var(i) => out.push_str(coords[*i].as_ref()),
        Node::Neg(a) => {
            out.push('-');
            print_node(a, coords, PREC_NEG, out);
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            print_node(a, coords, PREC_ADD, out);
            out.push_str(if matches!(node, Node::Add(..)) { " + " } else { " - " });
            print_node(b, coords, PREC_MUL, out);
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            print_node(a, coords, PREC_MUL, out);
            out.push(if matches!(node, Node::Mul(..)) { '*' } else { '/' });
            print_node(b, coords, PREC_NEG, out);
        }
        Node::Pow(a, b) => {
            print_node(a, coords, PREC_ATOM, out);
            out.push('^');
            print_node(b, coords, PREC_NEG, out);
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_node(a, coords, 0, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const XYZ: [&str; 3] = ["x", "y", "z"];

    fn parse(s: &str) -> ScalarExpr {
        ScalarExpr::parse(s, &XYZ).unwrap()
    }

    #[test]
    fn parses_division_by_literal() {
        let e = parse("y/2");
        assert_eq!(e.node(), &Node::Div(Box::new(Node::Var(1)), Box::new(Node::Num(2.0))));
        assert_eq!(e.eval(&[0.0, 4.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn accepts_function_calls() {
        assert!(ScalarExpr::parse("sin(x)*exp(z)", &XYZ).is_ok());
    }

    #[test]
    fn rejects_unknown_symbol() {
        assert_eq!(
            ScalarExpr::parse("w+1", &XYZ),
            Err(ParseError::UnknownSymbol("w".into()))
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        match ScalarExpr::parse("x + * y", &XYZ) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match ScalarExpr::parse("sin(x", &XYZ) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ScalarExpr::parse("x $ y", &XYZ),
            Err(ParseError::Syntax { position: 2, .. })
        ));
        assert_eq!(ScalarExpr::parse("  ", &XYZ), Err(ParseError::Empty));
    }

    #[test]
    fn rejects_bad_coordinate_lists() {
        assert!(matches!(
            ScalarExpr::parse("x", &["x", "x", "z"]),
            Err(ParseError::DuplicateCoordinate(_))
        ));
        assert!(matches!(
            ScalarExpr::parse("x", &["x", "e", "z"]),
            Err(ParseError::ReservedCoordinate(_))
        ));
    }

    #[test]
    fn evaluates_polynomial() {
        assert_eq!(parse("x^2+y").eval(&[3.0, 1.0, 0.0]).unwrap(), 10.0);
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        assert!(matches!(
            parse("1/x").eval(&[0.0, 1.0, 1.0]),
            Err(EvalError::Domain { .. })
        ));
        assert!(parse("log(x)").eval(&[-1.0, 0.0, 0.0]).is_err());
        assert!(parse("sqrt(x)").eval(&[-1.0, 0.0, 0.0]).is_err());
        assert!(parse("x^0.5").eval(&[-1.0, 0.0, 0.0]).is_err());
        assert!(parse("x^-1").eval(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(parse("pi").eval(&[0.0; 3]).unwrap(), core::f64::consts::PI);
        assert_eq!(parse("e").eval(&[0.0; 3]).unwrap(), core::f64::consts::E);
        assert_eq!(parse("2e3").eval(&[0.0; 3]).unwrap(), 2000.0);
        assert_eq!(parse("2*e").eval(&[0.0; 3]).unwrap(), 2.0 * core::f64::consts::E);
    }

    #[test]
    fn arity_is_checked() {
        assert!(matches!(
            parse("x").eval(&[1.0]),
            Err(EvalError::Arity { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = [2.0, 3.0, 0.0];
        assert_eq!(parse("-x^2").eval(&p).unwrap(), -4.0);
        assert_eq!(parse("2^3^2").eval(&p).unwrap(), 512.0);
        assert_eq!(parse("x - y - 1").eval(&p).unwrap(), -2.0);
        assert_eq!(parse("12/x/y").eval(&p).unwrap(), 2.0);
        assert_eq!(parse("2^-1").eval(&p).unwrap(), 0.5);
    }

    #[test]
    fn dual_product_rule() {
        let d = parse("x*y").eval_dual(&[2.0, 3.0, 0.0]).unwrap();
        assert_eq!(d.value, 6.0);
        assert_eq!(d.gradient(3), vec![3.0, 2.0, 0.0]);
        let s = parse("sin(x)").eval_dual(&[0.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.partial(0), 1.0);
    }

    #[test]
    fn dual_matches_finite_differences() {
        let e = parse("x^2+y");
        let p = [0.7, -0.3, 0.2];
        let d = e.eval_dual(&p).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let fd = (e.eval(&a).unwrap() - e.eval(&b).unwrap()) / (2.0 * h);
            assert!((d.partial(i) - fd).abs() <= 1e-9, "slot {i}");
        }
    }

    #[test]
    fn printer_round_trips() {
        for s in [
            "y/2",
            "-x^2",
            "(x + y)*z",
            "x - (y - z)",
            "x/(y*z)",
            "(x^y)^z",
            "x^y^z",
            "-(x*y)",
            "x*-y",
            "sin(x)*exp(z) + log(2 + x^2)",
            "1e-20*x",
            "0.5*sqrt(y + 3) - pi/e",
        ] {
            let e = parse(s);
            let printed = e.to_source(&XYZ);
            assert_eq!(parse(&printed), e, "{s} -> {printed}");
        }
    }

    #[test]
    fn builders_fold_constants() {
        let x = ScalarExpr::coordinate(0, 3);
        let zero = ScalarExpr::constant(0.0, 3);
        assert_eq!(x.add(&zero), x);
        assert_eq!(x.mul(&ScalarExpr::constant(1.0, 3)), x);
        assert_eq!(x.scale(2.0).scale(0.5), x);
        assert_eq!(x.scale(0.0).as_number(), Some(0.0));
        assert_eq!(x.neg().neg(), x);
        assert_eq!(x.scale(-3.0).to_source(&XYZ), "-3*x");
        let s = x.add(&ScalarExpr::constant(-2.0, 3));
        assert_eq!(s.to_source(&XYZ), "x - 2");
    }
}
