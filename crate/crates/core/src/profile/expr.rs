//! Tiny closed-form expression language for profile functions: one free
//! variable, `+ - * / ^` with integer exponents, `sin`/`cos`, and `pi`.
//! Expressions differentiate symbolically, so profile derivatives are exact.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub enum Expr<T> {
    Const(T),
    Var,
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    Neg(Box<Expr<T>>),
    Pow(Box<Expr<T>>, i32),
    Sin(Box<Expr<T>>),
    Cos(Box<Expr<T>>),
}

impl<T: Real> Expr<T> {
    pub fn eval(&self, x: T) -> T {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, k) => a.eval(x).powi(*k),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
        }
    }

    pub fn diff(&self) -> Expr<T> {
        use Expr::*;
        match self {
            Const(_) => Const(T::zero()),
            Var => Const(T::one()),
            Add(a, b) => simplify(Add(Box::new(a.diff()), Box::new(b.diff()))),
            Sub(a, b) => simplify(Sub(Box::new(a.diff()), Box::new(b.diff()))),
            Mul(a, b) => simplify(Add(
                Box::new(simplify(Mul(Box::new(a.diff()), b.clone()))),
                Box::new(simplify(Mul(a.clone(), Box::new(b.diff())))),
            )),
            Div(a, b) => simplify(Div(
                Box::new(simplify(Sub(
                    Box::new(simplify(Mul(Box::new(a.diff()), b.clone()))),
                    Box::new(simplify(Mul(a.clone(), Box::new(b.diff())))),
                ))),
                Box::new(simplify(Pow(b.clone(), 2))),
            )),
            Neg(a) => simplify(Neg(Box::new(a.diff()))),
            Pow(a, k) => {
                if *k == 0 {
                    return Const(T::zero());
                }
                let inner = simplify(Mul(
                    Box::new(Const(T::of(*k as f64))),
                    Box::new(simplify(Pow(a.clone(), k - 1))),
                ));
                simplify(Mul(Box::new(inner), Box::new(a.diff())))
            }
            Sin(a) => simplify(Mul(Box::new(Cos(a.clone())), Box::new(a.diff()))),
            Cos(a) => simplify(Neg(Box::new(simplify(Mul(
                Box::new(Sin(a.clone())),
                Box::new(a.diff()),
            ))))),
        }
    }
}

fn as_const<T: Real>(e: &Expr<T>) -> Option<T> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

/// One level of constant folding and unit/zero elimination.
pub fn simplify<T: Real>(e: Expr<T>) -> Expr<T> {
    use Expr::*;
    match e {
        Add(a, b) => match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) => Const(x + y),
            (Some(x), None) if x == T::zero() => *b,
            (None, Some(y)) if y == T::zero() => *a,
            _ => Add(a, b),
        },
        Sub(a, b) => match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) => Const(x - y),
            (None, Some(y)) if y == T::zero() => *a,
            (Some(x), None) if x == T::zero() => simplify(Neg(b)),
            _ => Sub(a, b),
        },
        Mul(a, b) => match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) => Const(x * y),
            (Some(x), None) if x == T::zero() => Const(T::zero()),
            (None, Some(y)) if y == T::zero() => Const(T::zero()),
            (Some(x), None) if x == T::one() => *b,
            (None, Some(y)) if y == T::one() => *a,
            _ => Mul(a, b),
        },
        Div(a, b) => match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) if y != T::zero() => Const(x / y),
            (Some(x), None) if x == T::zero() => Const(T::zero()),
            (None, Some(y)) if y == T::one() => *a,
            _ => Div(a, b),
        },
        Neg(a) => match as_const(&a) {
            Some(x) => Const(-x),
            None => Neg(a),
        },
        Pow(a, k) => match (as_const(&a), k) {
            (_, 0) => Const(T::one()),
            (_, 1) => *a,
            (Some(x), k) => Const(x.powi(k)),
            _ => Pow(a, k),
        },
        other => other,
    }
}

// ---------------------------------------------------------------------------
// parser

#[derive(Clone, Debug, PartialEq)]
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
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number literal '{s}'")))?;
                toks.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(toks)
}

struct Parser<'a, T> {
    toks: &'a [Tok],
    pos: usize,
    var: &'a str,
    _marker: std::marker::PhantomData<T>,
}

impl<'a, T: Real> Parser<'a, T> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Parse(format!("expected {t:?}, got {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr<T>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = simplify(Expr::Add(Box::new(acc), Box::new(rhs)));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = simplify(Expr::Sub(Box::new(acc), Box::new(rhs)));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr<T>> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = simplify(Expr::Mul(Box::new(acc), Box::new(rhs)));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = simplify(Expr::Div(Box::new(acc), Box::new(rhs)));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr<T>> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(simplify(Expr::Neg(Box::new(inner))));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr<T>> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            // allow a leading minus on the exponent
            let neg = matches!(self.peek(), Some(Tok::Minus));
            if neg {
                self.pos += 1;
            }
            match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 => {
                    let k = v as i32 * if neg { -1 } else { 1 };
                    return Ok(simplify(Expr::Pow(Box::new(base), k)));
                }
                got => return Err(Error::Parse(format!("exponent must be an integer, got {got:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr<T>> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(T::of(v))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "pi" => Ok(Expr::Const(T::PI())),
                "sin" | "cos" => {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(if name == "sin" {
                        Expr::Sin(Box::new(arg))
                    } else {
                        Expr::Cos(Box::new(arg))
                    })
                }
                v if v == self.var => Ok(Expr::Var),
                other => Err(Error::Parse(format!(
                    "unknown identifier '{other}' (variable here is '{}')",
                    self.var
                ))),
            },
            got => Err(Error::Parse(format!("unexpected token {got:?}"))),
        }
    }
}

/// Parse `src` with `var` as the single free variable name.
pub fn parse<T: Real>(src: &str, var: &str) -> Result<Expr<T>> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser::<T> {
        toks: &toks,
        pos: 0,
        var,
        _marker: std::marker::PhantomData,
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(Error::Parse(format!(
            "trailing tokens after expression: {:?}",
            &toks[p.pos..]
        )));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let e: Expr<f64> = parse("1 + rho", "rho").unwrap();
        assert_eq!(e.eval(0.5), 1.5);
        let e: Expr<f64> = parse("2*cos(z) - sin(z)^2", "z").unwrap();
        let z = 0.7;
        assert!((e.eval(z) - (2.0 * z.cos() - z.sin().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn symbolic_derivatives() {
        let e: Expr<f64> = parse("rho^3 - 2*rho + 4", "rho").unwrap();
        let d1 = e.diff();
        let d2 = d1.diff();
        let x = 1.3;
        assert!((d1.eval(x) - (3.0 * x * x - 2.0)).abs() < 1e-14);
        assert!((d2.eval(x) - 6.0 * x).abs() < 1e-14);

        let t: Expr<f64> = parse("2*cos(z)", "z").unwrap();
        let d3 = t.diff().diff().diff();
        let z = 0.3;
        assert!((d3.eval(z) - 2.0 * z.sin()).abs() < 1e-14);
    }

    #[test]
    fn precedence_and_unary() {
        let e: Expr<f64> = parse("-2 + 3 * 4 ^ 2", "x").unwrap();
        assert_eq!(e.eval(0.0), 46.0);
        let e: Expr<f64> = parse("(1 - 2) * (3 + 1)", "x").unwrap();
        assert_eq!(e.eval(0.0), -4.0);
    }

    #[test]
    fn rejects_unknown_identifier() {
        assert!(parse::<f64>("1 + tau", "rho").is_err());
        assert!(parse::<f64>("rho +", "rho").is_err());
        assert!(parse::<f64>("x^0.5", "x").is_err());
    }

    #[test]
    fn pi_constant() {
        let e: Expr<f64> = parse("sin(pi/2)", "x").unwrap();
        assert!((e.eval(0.0) - 1.0).abs() < 1e-15);
    }
}
