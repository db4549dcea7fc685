//! Recursive-descent parser for field expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

use std::collections::HashMap;

use super::expr::{BinaryOp, Expr, Rbf, RbfKernel, UnaryOp};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError {
                column: start + 1,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(v), start + 1));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start + 1));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i + 1));
            i += 1;
        } else {
            return Err(ExprError { column: i + 1, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    names: &'a HashMap<String, Expr>,
    end_col: usize,
}

impl Parser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { column: self.col(), message: message.into() })
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.toks.get(self.pos), Some((Tok::Sym(s), _)) if *s == c)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym('+') {
                lhs = Expr::binary(BinaryOp::Add, lhs, self.term()?);
            } else if self.eat_sym('-') {
                lhs = Expr::binary(BinaryOp::Sub, lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_sym('*') {
                lhs = Expr::binary(BinaryOp::Mul, lhs, self.unary()?);
            } else if self.eat_sym('/') {
                lhs = Expr::binary(BinaryOp::Div, lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat_sym('-') {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::unary(UnaryOp::Neg, e),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if !self.eat_sym('^') {
            return Ok(base);
        }
        let neg = self.eat_sym('-');
        match self.toks.get(self.pos) {
            Some((Tok::Num(n), _)) if n.fract() == 0.0 && n.abs() <= 64.0 => {
                let mut k = *n as i32;
                self.pos += 1;
                if neg {
                    k = -k;
                }
                Ok(Expr::Powi(Box::new(base), k))
            }
            _ => self.err("exponent must be an integer literal"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let col = self.col();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some((Tok::Sym('('), _)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                if self.eat_sym('(') {
                    let mut args = vec![self.expr()?];
                    while self.eat_sym(',') {
                        args.push(self.expr()?);
                    }
                    self.expect_sym(')')?;
                    self.call(&name, args, col)
                } else {
                    self.name(&name, col)
                }
            }
            Some(_) => self.err("expected a number, name or '('"),
            None => self.err("unexpected end of expression"),
        }
    }

    fn name(&self, name: &str, column: usize) -> Result<Expr, ExprError> {
        let coord = match name {
            "x" => Some(0),
            "y" => Some(1),
            "z" => Some(2),
            _ => None,
        };
        if let Some(i) = coord {
            if i >= self.dim {
                return Err(ExprError {
                    column,
                    message: format!("coordinate '{name}' used in a {}-d scene", self.dim),
                });
            }
            return Ok(Expr::Var(i));
        }
        match name {
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "e" => Ok(Expr::Const(std::f64::consts::E)),
            _ => self
                .names
                .get(name)
                .cloned()
                .ok_or_else(|| ExprError { column, message: format!("unknown name '{name}'") }),
        }
    }

    fn call(&self, name: &str, args: Vec<Expr>, column: usize) -> Result<Expr, ExprError> {
        let fail = |message: String| Err(ExprError { column, message });
        let arity = |n: usize| -> Result<(), ExprError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ExprError {
                    column,
                    message: format!("{name} takes {n} argument(s), got {}", args.len()),
                })
            }
        };
        let consts = |args: &[Expr]| -> Result<Vec<f64>, ExprError> {
            args.iter()
                .map(|a| {
                    a.as_constant().ok_or_else(|| ExprError {
                        column,
                        message: format!("arguments of {name} must be constants"),
                    })
                })
                .collect()
        };
        let d = self.dim;
        let unary = |op| -> Result<Expr, ExprError> {
            arity(1)?;
            Ok(Expr::unary(op, args[0].clone()))
        };
        match name {
            "exp" => unary(UnaryOp::Exp),
            "ln" | "log" => unary(UnaryOp::Ln),
            "sqrt" => unary(UnaryOp::Sqrt),
            "abs" => unary(UnaryOp::Abs),
            "sqr" => unary(UnaryOp::Sqr),
            "min" | "max" => {
                if args.len() < 2 {
                    return fail(format!("{name} needs at least two arguments"));
                }
                let op = if name == "min" { BinaryOp::Min } else { BinaryOp::Max };
                let mut it = args.into_iter();
                let first = it.next().unwrap();
                Ok(it.fold(first, |acc, e| Expr::binary(op, acc, e)))
            }
            "smin" | "smax" => {
                arity(3)?;
                let k = consts(&args[2..])?[0];
                if !(k > 0.0) {
                    return fail(format!("{name} blend radius must be positive"));
                }
                let mut it = args.into_iter();
                let (a, b) = (it.next().unwrap(), it.next().unwrap());
                if name == "smin" {
                    Ok(Expr::smooth_min(a, b, k))
                } else {
                    let neg = |e| Expr::unary(UnaryOp::Neg, e);
                    Ok(neg(Expr::smooth_min(neg(a), neg(b), k)))
                }
            }
            "norm" => Ok(Expr::Norm(args)),
            "dot" => {
                if args.is_empty() || !args.len().is_multiple_of(2) {
                    return fail("dot takes an even number of arguments".into());
                }
                let mut a = args;
                let b = a.split_off(a.len() / 2);
                Ok(Expr::Dot(a, b))
            }
            "circle" | "sphere" => {
                let want = if name == "circle" { 2 } else { 3 };
                if d != want {
                    return fail(format!("{name} is only available in {want}-d scenes"));
                }
                arity(d + 1)?;
                let v = consts(&args)?;
                if !(v[d] > 0.0) {
                    return fail(format!("{name} radius must be positive"));
                }
                Ok(Expr::Sphere { center: v[..d].to_vec(), radius: v[d] })
            }
            "plane" => {
                arity(d + 1)?;
                let v = consts(&args)?;
                Ok(Expr::Plane { normal: v[..d].to_vec(), offset: v[d] })
            }
            "torus" => {
                if d != 3 {
                    return fail("torus is only available in 3-d scenes".into());
                }
                arity(5)?;
                let v = consts(&args)?;
                if !(v[3] > v[4] && v[4] > 0.0) {
                    return fail("torus needs major > minor > 0".into());
                }
                Ok(Expr::Torus { center: [v[0], v[1], v[2]], major: v[3], minor: v[4] })
            }
            "harmonic_rbf" | "gaussian_rbf" => {
                let v = consts(&args)?;
                let (kernel, rest) = if name == "gaussian_rbf" {
                    if v.is_empty() || !(v[0] > 0.0) {
                        return fail("gaussian_rbf needs a positive sigma first".into());
                    }
                    (RbfKernel::Gaussian { sigma: v[0] }, &v[1..])
                } else {
                    (RbfKernel::Harmonic, &v[..])
                };
                if rest.is_empty() || (rest.len() - 1) % (d + 1) != 0 || rest.len() == 1 {
                    return fail(format!(
                        "{name} takes a bias followed by groups of {d} center coordinates and a weight"
                    ));
                }
                let bias = rest[0];
                let mut centers = Vec::new();
                let mut weights = Vec::new();
                for g in rest[1..].chunks(d + 1) {
                    centers.push(g[..d].to_vec());
                    weights.push(g[d]);
                }
                Ok(Expr::Rbf(Rbf { kernel, bias, centers, weights }))
            }
            _ => fail(format!("unknown function '{name}'")),
        }
    }
}

/// Parses `text` as a field over R^`dim`. `names` supplies previously bound
/// sub-expressions.
pub fn parse_expr(text: &str, dim: usize, names: &HashMap<String, Expr>) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, dim, names, end_col: text.chars().count() + 1 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}
