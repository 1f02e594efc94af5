//! A small, total expression language for coefficient fields, weight functions
//! and initial data.
//!
//! Expressions are parsed once into an [`Expr`] tree and then evaluated many
//! times at grid points. The grammar is
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | 'e' | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! var     := 'x1' | 'x2' | 'x3' | 's'
//! func    := sin | cos | exp | log | sqrt | abs | atan | min | max
//! ```
//!
//! so `^` is right-associative and binds tighter than unary minus
//! (`-2^2 == -4`, `2^3^2 == 512`).

use std::fmt;

use thiserror::Error;

/// Maximum accepted source length in bytes.
pub const MAX_SOURCE_LEN: usize = 64 * 1024;
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
    X3,
    S,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::X3 => "x3",
            Var::S => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Atan,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "atan" => Func::Atan,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Atan => "atan",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Parsed expression. Numeric literals produced by the parser are always
/// non-negative; negation is an explicit [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: expected {expected}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{}`", .0.name())]
    UnboundVariable(Var),
    #[error("domain error: {op} of {arg}")]
    Domain { op: &'static str, arg: f64 },
}

/// Variable bindings for evaluation; `None` means unbound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub x: [Option<f64>; 3],
    pub s: Option<f64>,
}

impl Bindings {
    /// Binds `x1..` to the coordinates of `point` (at most three are used).
    pub fn at_point(point: &[f64]) -> Self {
        let mut b = Bindings::default();
        for (slot, &v) in b.x.iter_mut().zip(point) {
            *slot = Some(v);
        }
        b
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    fn get(&self, var: Var) -> Option<f64> {
        match var {
            Var::X1 => self.x[0],
            Var::X2 => self.x[1],
            Var::X3 => self.x[2],
            Var::S => self.s,
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.len() > MAX_SOURCE_LEN {
        return Err(ParseError {
            position: MAX_SOURCE_LEN,
            expected: format!("at most {MAX_SOURCE_LEN} bytes of input"),
        });
    }
    let mut parser = Parser { src: text.as_bytes(), pos: 0, depth: 0 };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("operator or end of input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &str) -> ParseError {
        ParseError { position: self.pos.min(self.src.len()), expected: expected.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("shallower nesting"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let e = if self.eat(b'-') { Expr::Neg(Box::new(self.unary()?)) } else { self.power()? };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("`)`"));
                }
                Ok(e)
            }
            _ => Err(self.error("number, variable, function or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("digits"));
        }
        // Exponent only when followed by digits, so `2*e` style input is not
        // swallowed by the literal.
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => {
                self.pos = start;
                Err(self.error("finite numeric literal"))
            }
        }
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let simple = match name {
            "pi" => Some(Expr::Const(Constant::Pi)),
            "e" => Some(Expr::Const(Constant::E)),
            "x1" => Some(Expr::Var(Var::X1)),
            "x2" => Some(Expr::Var(Var::X2)),
            "x3" => Some(Expr::Var(Var::X3)),
            "s" => Some(Expr::Var(Var::S)),
            _ => None,
        };
        if let Some(e) = simple {
            return Ok(e);
        }
        let Some(func) = Func::from_name(name) else {
            self.pos = start;
            return Err(self.error("variable (x1, x2, x3, s), constant (pi, e) or function name"));
        };
        if !self.eat(b'(') {
            return Err(self.error("`(`"));
        }
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if args.len() < func.arity() {
            return Err(self.error("`,`"));
        }
        if args.len() > func.arity() {
            return Err(self.error(&format!("{} argument(s) to {}", func.arity(), func.name())));
        }
        if !self.eat(b')') {
            return Err(self.error("`)`"));
        }
        Ok(Expr::Call(func, args))
    }
}

fn check(op: &'static str, arg: f64, v: f64) -> Result<f64, EvalError> {
    if v.is_nan() {
        Err(EvalError::Domain { op, arg })
    } else {
        Ok(v)
    }
}

impl Expr {
    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Const(Constant::Pi) => Ok(std::f64::consts::PI),
            Expr::Const(Constant::E) => Ok(std::f64::consts::E),
            Expr::Var(v) => b.get(*v).ok_or(EvalError::UnboundVariable(*v)),
            Expr::Neg(a) => Ok(-a.eval(b)?),
            Expr::Binary(op, l, r) => {
                let x = l.eval(b)?;
                let y = r.eval(b)?;
                match op {
                    BinOp::Add => check("addition", x, x + y),
                    BinOp::Sub => check("subtraction", x, x - y),
                    BinOp::Mul => check("multiplication", x, x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(EvalError::Domain { op: "division by zero", arg: x })
                        } else {
                            check("division", x, x / y)
                        }
                    }
                    BinOp::Pow => check("power", x, x.powf(y)),
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(b)?;
                match f {
                    Func::Sin => check("sin", x, x.sin()),
                    Func::Cos => check("cos", x, x.cos()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log if x <= 0.0 => Err(EvalError::Domain { op: "log", arg: x }),
                    Func::Log => Ok(x.ln()),
                    Func::Sqrt if x < 0.0 => Err(EvalError::Domain { op: "sqrt", arg: x }),
                    Func::Sqrt => Ok(x.sqrt()),
                    Func::Abs => Ok(x.abs()),
                    Func::Atan => Ok(x.atan()),
                    Func::Min => Ok(x.min(args[1].eval(b)?)),
                    Func::Max => Ok(x.max(args[1].eval(b)?)),
                }
            }
        }
    }

    /// True when the expression mentions `var`.
    pub fn mentions(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(a) => a.mentions(var),
            Expr::Binary(_, l, r) => l.mentions(var) || r.mentions(var),
            Expr::Call(_, args) => args.iter().any(|a| a.mentions(var)),
        }
    }

    /// True when no spatial variable appears.
    pub fn is_spatially_constant(&self) -> bool {
        ![Var::X1, Var::X2, Var::X3].iter().any(|&v| self.mentions(v))
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, 3)
            }
            Expr::Binary(op, l, r) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                l.write_at(f, lmin)?;
                write!(f, "{}", op.symbol())?;
                r.write_at(f, rmin)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    a.write_at(f, 0)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Box<Expr> {
        Box::new(Expr::Num(v))
    }

    fn ev(text: &str) -> f64 {
        parse(text).unwrap().eval(&Bindings::default()).unwrap()
    }

    #[test]
    fn parses_polynomial() {
        let e = parse("x1^2 + 1").unwrap();
        let expected = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Binary(BinOp::Pow, Box::new(Expr::Var(Var::X1)), num(2.0))),
            num(1.0),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2+3*4"), 14.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("8/4/2"), 1.0);
        assert_eq!(ev("10-4-3"), 3.0);
        assert_eq!(ev("--3"), 3.0);
        assert_eq!(ev("max(1, min(5, 3))"), 3.0);
        assert!((ev("2*e") - 2.0 * std::f64::consts::E).abs() < 1e-15);
        assert_eq!(ev("1.5e2"), 150.0);
    }

    #[test]
    fn ratio4_weight_text() {
        let e = parse("2*s*(2+s^2)/(s^2+1)^2").unwrap();
        let v = e.eval(&Bindings::default().with_s(1.0)).unwrap();
        assert_eq!(v, 1.5);
        let phi = parse("2*s^2*(2+s^2)/(s^2+1)^2").unwrap();
        assert_eq!(phi.eval(&Bindings::default().with_s(1.0)).unwrap(), 1.5);
    }

    #[test]
    fn product_of_coordinates() {
        let e = parse("x1*x2").unwrap();
        assert_eq!(e.eval(&Bindings::at_point(&[2.0, 3.0])).unwrap(), 6.0);
    }

    #[test]
    fn unterminated_call_reports_end_offset() {
        let err = parse("sin(").unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse("1 +").unwrap_err().position, 3);
        assert_eq!(parse("foo(1)").unwrap_err().position, 0);
        assert_eq!(parse("(1").unwrap_err().position, 2);
        assert_eq!(parse("1 2").unwrap_err().position, 2);
        assert_eq!(parse("min(1)").unwrap_err().position, 5);
        assert!(parse("").is_err());
    }

    #[test]
    fn domain_errors() {
        let log = parse("log(x1)").unwrap();
        assert!(matches!(log.eval(&Bindings::at_point(&[-1.0])), Err(EvalError::Domain { op: "log", .. })));
        assert!(parse("sqrt(0-1)").unwrap().eval(&Bindings::default()).is_err());
        assert!(parse("1/(x1-x1)").unwrap().eval(&Bindings::at_point(&[1.0])).is_err());
        assert!(parse("(0-1)^0.5").unwrap().eval(&Bindings::default()).is_err());
        assert_eq!(parse("s+1").unwrap().eval(&Bindings::default()), Err(EvalError::UnboundVariable(Var::S)));
    }

    #[test]
    fn oversized_input_rejected() {
        let text = "1+".repeat(MAX_SOURCE_LEN / 2) + "1";
        assert!(parse(&text).is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = "(".repeat(5000) + "1" + &")".repeat(5000);
        assert!(parse(&text).is_err());
    }

    #[test]
    fn printer_keeps_structure() {
        for text in ["(2^3)^2", "a", "-(1+2)", "(-2)^2", "1-(2-3)", "1/(2*3)", "2^-x1", "-x1^2"] {
            let Ok(e) = parse(text) else { continue };
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{text}");
        }
    }
}
