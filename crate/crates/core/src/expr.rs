//! A tiny arithmetic expression grammar for user-supplied scalar fields and
//! measure densities: variables `x1..x8`, the Euclidean norm `|x|` (also
//! spelled `r`), numbers, `+ - * / ^`, unary minus, parentheses, and the
//! functions `exp`, `log`, `abs`, `sqrt`, `sin`, `cos`, `max`, `min`.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// zero-based coordinate index
    Var(usize),
    /// Euclidean norm of the full point
    Norm,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Abs(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Norm => x.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Log(a) => a.eval(x).ln(),
            Expr::Abs(a) => a.eval(x).abs(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Max(a, b) => a.eval(x).max(b.eval(x)),
            Expr::Min(a, b) => a.eval(x).min(b.eval(x)),
        }
    }

    /// Highest coordinate index referenced, plus one (0 if none).
    pub fn min_dim(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Norm => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Abs(a)
            | Expr::Sqrt(a)
            | Expr::Sin(a)
            | Expr::Cos(a) => a.min_dim(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b)
            | Expr::Max(a, b)
            | Expr::Min(a, b) => a.min_dim().max(b.min_dim()),
        }
    }
}

/// Parse an expression string.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(Error::Expr(format!(
            "unexpected trailing input at position {}",
            p.pos
        )));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Expr(format!(
                "expected '{}' at position {}",
                c, self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            // right-associative; exponent may carry a unary minus
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('|') => {
                self.bump();
                // only the norm |x| is allowed between bars
                let inner = self.ident()?;
                if inner != "x" {
                    return Err(Error::Expr(format!("expected |x|, got |{inner}|")));
                }
                self.expect('|')?;
                Ok(Expr::Norm)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident()?;
                self.named(&name)
            }
            other => Err(Error::Expr(format!(
                "unexpected input {:?} at position {}",
                other, self.pos
            ))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Expr(format!("expected name at position {}", start)));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit()
                || self.chars[self.pos] == '.'
                || ((self.chars[self.pos] == 'e' || self.chars[self.pos] == 'E')
                    && self.pos + 1 < self.chars.len()
                    && (self.chars[self.pos + 1].is_ascii_digit()
                        || self.chars[self.pos + 1] == '-'
                        || self.chars[self.pos + 1] == '+'))
                || ((self.chars[self.pos] == '-' || self.chars[self.pos] == '+')
                    && self.pos > start
                    && (self.chars[self.pos - 1] == 'e' || self.chars[self.pos - 1] == 'E')))
        {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Expr(format!("bad number literal '{text}'")))
    }

    fn named(&mut self, name: &str) -> Result<Expr> {
        // coordinates x1..x8
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i) = rest.parse::<usize>() {
                if (1..=8).contains(&i) {
                    return Ok(Expr::Var(i - 1));
                }
                return Err(Error::Expr(format!("coordinate {name} out of range")));
            }
        }
        match name {
            "r" => return Ok(Expr::Norm),
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            _ => {}
        }
        // function call
        self.expect('(')?;
        let a = self.expr()?;
        let two_arg = |p: &mut Parser, a: Expr| -> Result<(Expr, Expr)> {
            p.expect(',')?;
            let b = p.expr()?;
            p.expect(')')?;
            Ok((a, b))
        };
        let one_arg = |p: &mut Parser| -> Result<()> { p.expect(')') };
        Ok(match name {
            "exp" => {
                one_arg(self)?;
                Expr::Exp(Box::new(a))
            }
            "log" => {
                one_arg(self)?;
                Expr::Log(Box::new(a))
            }
            "abs" => {
                one_arg(self)?;
                Expr::Abs(Box::new(a))
            }
            "sqrt" => {
                one_arg(self)?;
                Expr::Sqrt(Box::new(a))
            }
            "sin" => {
                one_arg(self)?;
                Expr::Sin(Box::new(a))
            }
            "cos" => {
                one_arg(self)?;
                Expr::Cos(Box::new(a))
            }
            "max" => {
                let (a, b) = two_arg(self, a)?;
                Expr::Max(Box::new(a), Box::new(b))
            }
            "min" => {
                let (a, b) = two_arg(self, a)?;
                Expr::Min(Box::new(a), Box::new(b))
            }
            _ => return Err(Error::Expr(format!("unknown function '{name}'"))),
        })
    }
}
