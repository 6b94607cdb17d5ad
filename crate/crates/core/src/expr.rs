//! A small closed-form expression language for potentials, metric
//! components and perturbation profiles.
//!
//! Expressions are evaluated generically over [`Real`], so the same tree
//! serves plain values and jets of any nesting depth. Variables are the four
//! chart coordinates `x1 y1 x2 y2` (aliases `c0..c3`), and `|z1|^2`, `|z2|^2`
//! denote the squared moduli of the complex coordinates `z1 = x1 + i y1`,
//! `z2 = x2 + i y2`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::ExprError;
use crate::jet::{Real, DIM};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    /// `|z_k|^2` for complex coordinate `k` in `{0, 1}`.
    AbsSq(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn coord(i: usize) -> Expr {
        Expr::Coord(i)
    }

    pub fn abs_sq(k: usize) -> Expr {
        Expr::AbsSq(k)
    }

    pub fn pow(self, n: i32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn apply(self, f: Func) -> Expr {
        Expr::Func(f, Box::new(self))
    }

    pub fn log(self) -> Expr {
        self.apply(Func::Log)
    }

    pub fn sin(self) -> Expr {
        self.apply(Func::Sin)
    }

    pub fn cos(self) -> Expr {
        self.apply(Func::Cos)
    }

    pub fn exp(self) -> Expr {
        self.apply(Func::Exp)
    }

    pub fn eval<T: Real>(&self, x: &[T; DIM]) -> T {
        match self {
            Expr::Const(v) => T::cst(*v),
            Expr::Coord(i) => x[*i].clone(),
            Expr::AbsSq(k) => {
                let a = x[2 * k].clone();
                let b = x[2 * k + 1].clone();
                a.clone() * a + b.clone() * b
            }
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => match (&**a, &**b) {
                (Expr::Const(k), e) | (e, Expr::Const(k)) => e.eval(x).scale(*k),
                _ => a.eval(x) * b.eval(x),
            },
            Expr::Div(a, b) => match &**b {
                Expr::Const(k) => a.eval(x).scale(1.0 / k),
                _ => a.eval(x) / b.eval(x),
            },
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, n) => a.eval(x).powi(*n),
            Expr::Func(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Log => v.ln(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.visit(f),
            _ => {}
        }
    }

    /// True if the raw coordinate `i` appears outside of `|z_k|^2` terms.
    pub fn uses_coordinate(&self, i: usize) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if *e == Expr::Coord(i) {
                found = true;
            }
        });
        found
    }

    /// True if the value can change when coordinate `i` alone moves.
    pub fn depends_on(&self, i: usize) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if *e == Expr::Coord(i) || *e == Expr::AbsSq(i / 2) {
                found = true;
            }
        });
        found
    }

    /// Invariance under rotation of complex coordinate `k`.
    pub fn rotation_invariant(&self, k: usize) -> bool {
        !self.uses_coordinate(2 * k) && !self.uses_coordinate(2 * k + 1)
    }

    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(ExprError::Trailing(p.pos));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 4] = ["x1", "y1", "x2", "y2"];
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Coord(i) => write!(f, "{}", NAMES[*i]),
            Expr::AbsSq(k) => write!(f, "|z{}|^2", k + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "{a}^({n})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $v:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(o))
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, o: f64) -> Expr {
                Expr::$v(Box::new(self), Box::new(Expr::Const(o)))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$v(Box::new(Expr::Const(self)), Box::new(o))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || ((chars[i] == 'e' || chars[i] == 'E')
                        && i + 1 < chars.len()
                        && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '-')))
            {
                if chars[i] == 'e' || chars[i] == 'E' {
                    i += 1;
                }
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| ExprError::BadNumber(start))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()|".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprError::UnexpectedChar(c, i));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(usize::MAX)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ExprError::Expected(c, self.at()))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let at = self.at();
        let base = self.primary()?;
        if !self.eat('^') {
            if let Expr::Pow(inner, 1) = &base {
                if let Expr::AbsSq(_) = **inner {
                    return Err(ExprError::OddModulusPower(at));
                }
            }
            return Ok(base);
        }
        let neg = self.eat('-');
        let paren = self.eat('(');
        let neg = neg || (paren && self.eat('-'));
        let n = match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 64.0 => *v as i32,
            _ => return Err(ExprError::IntegerExponent(self.at())),
        };
        self.pos += 1;
        if paren {
            self.expect(')')?;
        }
        let n = if neg { -n } else { n };
        // `|z|` is parsed as a marker `Pow(AbsSq, 1)`; only even powers are smooth.
        if let Expr::Pow(inner, 1) = &base {
            if let Expr::AbsSq(_) = **inner {
                if n % 2 != 0 {
                    return Err(ExprError::OddModulusPower(at));
                }
                return Ok(if n == 2 { (**inner).clone() } else { (**inner).clone().pow(n / 2) });
            }
        }
        Ok(base.pow(n))
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.at();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Op('|')) => {
                self.pos += 1;
                let k = match self.peek() {
                    Some(Tok::Ident(s)) if s == "z1" => 0,
                    Some(Tok::Ident(s)) if s == "z2" => 1,
                    _ => return Err(ExprError::ModulusTarget(self.at())),
                };
                self.pos += 1;
                self.expect('|')?;
                Ok(Expr::AbsSq(k).pow(1))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "log" | "ln" => Some(Func::Log),
                    "exp" => Some(Func::Exp),
                    "sqrt" => Some(Func::Sqrt),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                if let Some(f) = func {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return Ok(e.apply(f));
                }
                match name.as_str() {
                    "x1" | "c0" => Ok(Expr::Coord(0)),
                    "y1" | "c1" => Ok(Expr::Coord(1)),
                    "x2" | "c2" => Ok(Expr::Coord(2)),
                    "y2" | "c3" => Ok(Expr::Coord(3)),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    _ => Err(ExprError::UnknownIdent(name, at)),
                }
            }
            _ => Err(ExprError::UnexpectedEnd(at)),
        }
    }
}
