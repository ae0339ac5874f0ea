//! Arithmetic expressions over `u1..uN` and `lambda`.

use std::fmt;

use bihamo::{Coeff, CoeffFn};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// 0-based component index.
    U(usize),
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(u64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Int(_) | Expr::Var(_) => 5,
        }
    }

    pub fn contains_lambda(&self) -> bool {
        match self {
            Expr::Var(Var::Lambda) => true,
            Expr::Int(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.contains_lambda(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.contains_lambda() || b.contains_lambda(),
        }
    }

    /// Evaluate in the concrete coefficient ring.
    pub fn to_coeff(&self) -> Result<CoeffFn, bihamo::Error> {
        Ok(match self {
            Expr::Int(k) => CoeffFn::from_rat(bihamo::Rat::from_integer((*k).into())),
            Expr::Var(Var::U(i)) => CoeffFn::u(*i),
            Expr::Var(Var::Lambda) => CoeffFn::lambda(),
            Expr::Neg(a) => a.to_coeff()?.neg(),
            Expr::Add(a, b) => a.to_coeff()?.add(&b.to_coeff()?),
            Expr::Sub(a, b) => a.to_coeff()?.sub(&b.to_coeff()?),
            Expr::Mul(a, b) => a.to_coeff()?.mul(&b.to_coeff()?),
            Expr::Div(a, b) => a.to_coeff()?.checked_div(&b.to_coeff()?)?,
            Expr::Pow(a, e) => a.to_coeff()?.pow(*e),
        })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::U(i) => write!(f, "u{}", i + 1),
            Var::Lambda => f.write_str("lambda"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool| if paren { write!(f, "({e})") } else { write!(f, "{e}") };
        let p = self.prec();
        match self {
            Expr::Int(k) => write!(f, "{k}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.prec() < p)
            }
            Expr::Pow(a, e) => {
                wrap(f, a, a.prec() <= p)?;
                write!(f, "^{e}")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                // left associative: the right operand needs parentheses at equal precedence
                wrap(f, a, a.prec() < p)?;
                f.write_str(op)?;
                wrap(f, b, b.prec() <= p)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(u64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, CliError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| CliError::Syntax { pos: start, msg: "integer literal too large".into() })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(CliError::Syntax { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, CliError> {
        Err(CliError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr, CliError> {
        let mut a = self.term()?;
        loop {
            if self.eat('+') {
                a = Expr::Add(Box::new(a), Box::new(self.term()?));
            } else if self.eat('-') {
                a = Expr::Sub(Box::new(a), Box::new(self.term()?));
            } else {
                return Ok(a);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, CliError> {
        let mut a = self.unary()?;
        loop {
            if self.eat('*') {
                a = Expr::Mul(Box::new(a), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let pos = self.pos();
                self.at += 1;
                let b = self.unary()?;
                if b.contains_lambda() {
                    return Err(CliError::LambdaDenominator { pos });
                }
                a = Expr::Div(Box::new(a), Box::new(b));
            } else {
                return Ok(a);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, CliError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, CliError> {
        let a = self.atom()?;
        if !self.eat('^') {
            return Ok(a);
        }
        match self.peek() {
            Some(&Tok::Num(e)) => {
                let e = u32::try_from(e).or_else(|_| self.err("exponent too large"))?;
                self.at += 1;
                if self.peek() == Some(&Tok::Sym('^')) {
                    return self.err("chained powers need parentheses");
                }
                Ok(Expr::Pow(Box::new(a), e))
            }
            _ => self.err("expected a non-negative integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<Expr, CliError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(Expr::Var(variable(&s, self.n, pos)?))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(_) => self.err("expected a number, a variable or '('"),
            None => self.err("unexpected end of input"),
        }
    }
}

fn variable(s: &str, n: usize, pos: usize) -> Result<Var, CliError> {
    if s == "lambda" {
        return Ok(Var::Lambda);
    }
    let unknown = || CliError::UnknownVariable { name: s.to_string(), pos };
    let idx: usize = s.strip_prefix('u').and_then(|d| d.parse().ok()).ok_or_else(unknown)?;
    if idx == 0 || idx > n || s.starts_with("u0") {
        return Err(unknown());
    }
    Ok(Var::U(idx - 1))
}

/// Parse `src` with variables `u1..un` and `lambda`.
pub fn parse_expr(src: &str, n: usize) -> Result<Expr, CliError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.chars().count(), n };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(Var::U(i)))
    }

    #[test]
    fn difference_with_lambda() {
        assert_eq!(parse_expr("u1 - lambda", 1).unwrap(), Expr::Sub(v(0), Box::new(Expr::Var(Var::Lambda))));
    }

    #[test]
    fn quotient_of_square() {
        let e = parse_expr("(u1-u2)^2/ (u1*u2)", 2).unwrap();
        let expect = Expr::Div(Box::new(Expr::Pow(Box::new(Expr::Sub(v(0), v(1))), 2)), Box::new(Expr::Mul(v(0), v(1))));
        assert_eq!(e, expect);
        assert_eq!(e.to_string(), "(u1 - u2)^2/(u1*u2)");
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_expr("-u1^2", 1).unwrap(), Expr::Neg(Box::new(Expr::Pow(v(0), 2))));
        assert_eq!(parse_expr("-u1*u1", 1).unwrap(), Expr::Mul(Box::new(Expr::Neg(v(0))), v(0)));
        assert_eq!(parse_expr("1-2-3", 1).unwrap().to_string(), "1 - 2 - 3");
        assert_eq!(parse_expr("1-(2-3)", 1).unwrap().to_string(), "1 - (2 - 3)");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_expr("u3", 2), Err(CliError::UnknownVariable { .. })));
        assert!(matches!(parse_expr("x", 2), Err(CliError::UnknownVariable { .. })));
        assert!(matches!(parse_expr("u1/(lambda+1)", 1), Err(CliError::LambdaDenominator { .. })));
        assert!(matches!(parse_expr("u1 +", 1), Err(CliError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expr("u1 $ 2", 1), Err(CliError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr("u1^u1", 1), Err(CliError::Syntax { .. })));
    }

    #[test]
    fn evaluation() {
        let c = parse_expr("1/8", 1).unwrap().to_coeff().unwrap();
        assert_eq!(c, CoeffFn::from_rat(bihamo::rat::rat(1, 8)));
        assert!(parse_expr("u1/(u1-u1)", 1).unwrap().to_coeff().is_err());
    }
}
