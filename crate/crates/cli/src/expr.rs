//! Polynomial expressions in `x` with exact rational coefficients.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*'? factor)*
//! factor := ('+' | '-') factor | atom ('^' nat)?
//! atom   := number | 'x' | '(' expr ')'
//! number := integer | decimal | integer '/' integer
//! ```
//!
//! Whitespace is ignored. Positions in errors are 1-based character offsets.

use std::fmt;

use stcalc::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum ExprError {
    Syntax { pos: usize, msg: String },
    DegreeOverflow { degree: usize, max: usize },
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Syntax { pos, msg } => write!(f, "syntax error at offset {pos}: {msg}"),
            ExprError::DegreeOverflow { degree, max } => {
                write!(f, "expression has degree {degree}, above the order {max}")
            }
        }
    }
}

impl std::error::Error for ExprError {}

type Poly = Vec<Rational>;

/// Largest exponent accepted after `^`.
const MAX_EXPONENT: usize = 1024;

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    src: &'a str,
    max_degree: usize,
}

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Rational::zero());
    }
    p
}

fn add(a: &[Rational], b: &[Rational], sign: i64) -> Poly {
    let n = a.len().max(b.len());
    let s = Rational::from_i64(sign);
    let out = (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(Rational::zero);
            let y = b.get(k).cloned().unwrap_or_else(Rational::zero);
            x + s.clone() * y
        })
        .collect();
    trim(out)
}

fn mul(a: &[Rational], b: &[Rational]) -> Poly {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    trim(out)
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, max_degree: usize) -> Self {
        let chars = src
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i + 1, c))
            .collect();
        Parser {
            chars,
            at: 0,
            src,
            max_degree,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars
            .get(self.at)
            .map(|&(p, _)| p)
            .unwrap_or(self.src.chars().count() + 1)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    fn check_degree(&self, p: Poly) -> Result<Poly, ExprError> {
        let degree = p.len() - 1;
        if degree > self.max_degree {
            return Err(ExprError::DegreeOverflow {
                degree,
                max: self.max_degree,
            });
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Poly, ExprError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.at += 1;
            let rhs = self.term()?;
            acc = add(&acc, &rhs, if c == '+' { 1 } else { -1 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.at += 1;
                }
                Some(c) if c == 'x' || c == '(' || c.is_ascii_digit() || c == '.' => {}
                _ => return Ok(acc),
            }
            let rhs = self.factor()?;
            acc = self.check_degree(mul(&acc, &rhs))?;
        }
    }

    fn factor(&mut self) -> Result<Poly, ExprError> {
        match self.peek() {
            Some('-') => {
                self.at += 1;
                let f = self.factor()?;
                return Ok(add(&[Rational::zero()], &f, -1));
            }
            Some('+') => {
                self.at += 1;
                return self.factor();
            }
            _ => {}
        }
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.at += 1;
        let e = self.natural()?;
        let mut acc = vec![Rational::one()];
        for _ in 0..e {
            acc = self.check_degree(mul(&acc, &base))?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Poly, ExprError> {
        match self.peek() {
            Some('x') => {
                self.at += 1;
                self.check_degree(vec![Rational::zero(), Rational::one()])
            }
            Some('(') => {
                self.at += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return self.fail("expected ')'");
                }
                self.at += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(vec![self.number()?]),
            Some(_) => self.fail("expected a number, 'x' or '('"),
            None => self.fail("unexpected end of input"),
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.at += 1;
        }
        s
    }

    fn natural(&mut self) -> Result<usize, ExprError> {
        let start = self.pos();
        let d = self.digits();
        if d.is_empty() {
            return self.fail("expected a natural exponent");
        }
        match d.parse::<usize>() {
            Ok(e) if e <= MAX_EXPONENT => Ok(e),
            _ => Err(ExprError::Syntax {
                pos: start,
                msg: "exponent too large".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<Rational, ExprError> {
        let start = self.at;
        let int = self.digits();
        let mut frac = String::new();
        if self.peek() == Some('.') {
            self.at += 1;
            frac = self.digits();
        }
        if int.is_empty() && frac.is_empty() {
            self.at = start;
            return self.fail("malformed number");
        }
        let mut exp: i64 = 0;
        if self.peek() == Some('e') || self.peek() == Some('E') {
            self.at += 1;
            let neg = match self.peek() {
                Some('-') => {
                    self.at += 1;
                    true
                }
                Some('+') => {
                    self.at += 1;
                    false
                }
                _ => false,
            };
            let d = self.digits();
            if d.is_empty() {
                return self.fail("malformed exponent");
            }
            exp = d.parse().map_err(|_| ExprError::Syntax {
                pos: self.pos(),
                msg: "exponent too large".into(),
            })?;
            if neg {
                exp = -exp;
            }
        }
        let mut value = decimal(&int, &frac, exp);
        if self.peek() == Some('/') && frac.is_empty() && exp == 0 {
            self.at += 1;
            let den_at = self.at;
            let den = self.digits();
            if den.is_empty() {
                return self.fail("expected a denominator");
            }
            let den = decimal(&den, "", 0);
            if den.is_zero() {
                self.at = den_at;
                return self.fail("zero denominator");
            }
            value /= den;
        }
        Ok(value)
    }
}

/// Exact value of the decimal `int.frac * 10^exp`.
fn decimal(int: &str, frac: &str, exp: i64) -> Rational {
    let mantissa = format!("{}{}", if int.is_empty() { "0" } else { int }, frac);
    let scale = exp - frac.len() as i64;
    let ten = Rational::from_i64(10);
    let m: Rational = mantissa.parse().expect("digit string");
    m * ten.powi(scale)
}

/// Parses `text` into coefficients of degree at most `max_degree`.
pub fn parse_expression(text: &str, max_degree: usize) -> Result<Vec<Rational>, ExprError> {
    let mut p = Parser::new(text, max_degree);
    if p.peek().is_none() {
        return p.fail("empty expression");
    }
    let out = p.expr()?;
    if p.peek().is_some() {
        return p.fail("unexpected character");
    }
    p.check_degree(out)
}

/// Parses a single number such as `-3/4`, `0.25` or `1e-3`.
pub fn parse_number(text: &str) -> Result<Rational, ExprError> {
    let p = parse_expression(text, 0)?;
    Ok(p[0].clone())
}

/// Prints coefficients so that `parse_expression` reads them back unchanged.
pub fn print_expression(coeffs: &[Rational]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = *c < Rational::zero();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let one = mag == Rational::one();
        match (k, one) {
            (0, _) => out.push_str(&mag.to_string()),
            (_, true) => {}
            _ => {
                out.push_str(&mag.to_string());
                out.push('*');
            }
        }
        match k {
            0 => {}
            1 => out.push('x'),
            _ => out.push_str(&format!("x^{k}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn reads_polynomials() {
        assert_eq!(
            parse_expression("1 + 2x - x^3", 8).unwrap(),
            vec![r(1, 1), r(2, 1), r(0, 1), r(-1, 1)]
        );
        assert_eq!(parse_expression("3/4*x^2", 8).unwrap(), vec![r(0, 1), r(0, 1), r(3, 4)]);
        assert_eq!(parse_expression("(1 + x)^2", 8).unwrap(), vec![r(1, 1), r(2, 1), r(1, 1)]);
        assert_eq!(parse_expression("0.25 - 1e-2 x", 8).unwrap(), vec![r(1, 4), r(-1, 100)]);
        assert_eq!(parse_expression("-(x)", 8).unwrap(), vec![r(0, 1), r(-1, 1)]);
        assert_eq!(parse_expression("2 x x", 8).unwrap(), vec![r(0, 1), r(0, 1), r(2, 1)]);
        assert_eq!(parse_expression("x - x", 8).unwrap(), vec![r(0, 1)]);
    }

    #[test]
    fn reports_positions() {
        let err = parse_expression("x^^2", 8).unwrap_err();
        assert_eq!(
            err,
            ExprError::Syntax {
                pos: 3,
                msg: "expected a natural exponent".into()
            }
        );
        assert!(matches!(parse_expression("", 8), Err(ExprError::Syntax { pos: 1, .. })));
        assert!(matches!(parse_expression("1 + y", 8), Err(ExprError::Syntax { pos: 5, .. })));
        assert!(matches!(parse_expression("(1 + x", 8), Err(ExprError::Syntax { pos: 7, .. })));
        assert!(matches!(parse_expression("2^5000", 8), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expression("1/0", 8), Err(ExprError::Syntax { pos: 3, .. })));
    }

    #[test]
    fn rejects_overflowing_degree() {
        assert_eq!(
            parse_expression("x^5", 4).unwrap_err(),
            ExprError::DegreeOverflow { degree: 5, max: 4 }
        );
    }

    #[test]
    fn number_literals() {
        assert_eq!(parse_number("-3/4").unwrap(), r(-3, 4));
        assert_eq!(parse_number("1.5E+2").unwrap(), r(150, 1));
        assert!(parse_number("x").is_err());
    }

    proptest::proptest! {
        #[test]
        fn random_coefficients_round_trip(c in proptest::collection::vec((-50i64..50, 1i64..9), 1..10)) {
            let mut coeffs: Vec<Rational> = c.iter().map(|&(n, d)| r(n, d)).collect();
            while coeffs.len() > 1 && coeffs.last().is_some_and(|v| v.is_zero()) {
                coeffs.pop();
            }
            let printed = print_expression(&coeffs);
            proptest::prop_assert_eq!(parse_expression(&printed, 16).unwrap(), coeffs);
        }
    }

    #[test]
    fn printer_round_trips() {
        for text in ["1 + 2x - x^3", "-3/4*x^2", "0", "x", "-x + 7/3 x^4", "0.125 - x^2"] {
            let c = parse_expression(text, 8).unwrap();
            let printed = print_expression(&c);
            assert_eq!(parse_expression(&printed, 8).unwrap(), c, "{text} -> {printed}");
        }
        assert_eq!(print_expression(&[r(1, 1), r(2, 1), r(0, 1), r(-1, 1)]), "1 + 2*x - x^3");
    }
}
