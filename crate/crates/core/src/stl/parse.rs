//! Recursive-descent parser. Binding, loosest first: `|`, `&`, `U[a,b]`,
//! then the prefixes `!`, `F[a,b]`, `G[a,b]`. Binaries associate left.

use super::{Cmp, Formula, Interval, StlError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Ge,
    Le,
    Bang,
    Amp,
    Bar,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

fn describe(t: Option<&(usize, Tok)>) -> String {
    match t {
        None => "end of input".into(),
        Some((_, Tok::Ident(s))) => format!("`{s}`"),
        Some((_, Tok::Num(v))) => format!("number {v}"),
        Some((_, t)) => format!("{t:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, StlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'!' => Some(Tok::Bang),
            b'&' => Some(Tok::Amp),
            b'|' => Some(Tok::Bar),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((start, t));
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'>' || c == b'<' {
            if bytes.get(i + 1) != Some(&b'=') {
                return Err(StlError::Syntax { pos: i, msg: "expected `>=` or `<=`".into() });
            }
            out.push((start, if c == b'>' { Tok::Ge } else { Tok::Le }));
            i += 2;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                i += 1;
            }
            // projection ids `x[3]`; `F[`, `G[`, `U[` open intervals instead
            let word = &text[start..i];
            if !matches!(word, "F" | "G" | "U") && bytes.get(i) == Some(&b'[') {
                let digits = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
                if digits > 0 && bytes.get(i + 1 + digits) == Some(&b']') {
                    i += digits + 2;
                }
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'+' {
            i += 1;
            while i < bytes.len() {
                let d = bytes[i];
                let exp_sign = (d == b'-' || d == b'+') && matches!(bytes[i - 1], b'e' | b'E');
                if d.is_ascii_digit() || d == b'.' || d == b'e' || d == b'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let lit = &text[start..i];
            match lit.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push((start, Tok::Num(v))),
                _ => return Err(StlError::Syntax { pos: start, msg: format!("bad number `{lit}`") }),
            }
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(StlError::Syntax { pos: i, msg: format!("unexpected character `{ch}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, StlError> {
        Err(StlError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), StlError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.toks.get(self.pos))))
        }
    }

    fn number(&mut self) -> Result<f64, StlError> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err(format!("expected a number, found {}", describe(self.toks.get(self.pos)))),
        }
    }

    fn at_temporal(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == op) && self.peek2() == Some(&Tok::LBracket)
    }

    /// Consumes `OP[a,b]`.
    fn interval(&mut self) -> Result<Interval, StlError> {
        self.pos += 1;
        self.expect(Tok::LBracket, "`[`")?;
        let a = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let b = self.number()?;
        self.expect(Tok::RBracket, "`]`")?;
        Interval::new(a, b)
    }

    fn or_expr(&mut self) -> Result<Formula, StlError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            lhs = lhs.or(self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, StlError> {
        let mut lhs = self.until_expr()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            lhs = lhs.and(self.until_expr()?);
        }
        Ok(lhs)
    }

    fn until_expr(&mut self) -> Result<Formula, StlError> {
        let mut lhs = self.unary()?;
        while self.at_temporal("U") {
            let i = self.interval()?;
            lhs = lhs.until(i, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, StlError> {
        if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            return Ok(self.unary()?.not());
        }
        if self.at_temporal("F") {
            let i = self.interval()?;
            return Ok(Formula::eventually(i, self.unary()?));
        }
        if self.at_temporal("G") {
            let i = self.interval()?;
            return Ok(Formula::always(i, self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, StlError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.or_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) if name == "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let cmp = match self.peek() {
                    Some(Tok::Ge) => Cmp::Ge,
                    Some(Tok::Le) => Cmp::Le,
                    _ => return self.err(format!("expected `>=` or `<=` after `{name}`")),
                };
                self.pos += 1;
                let mu = self.number()?;
                Ok(Formula::Atom { func: name, cmp, mu })
            }
            _ => self.err(format!("expected a formula, found {}", describe(self.toks.get(self.pos)))),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, StlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.or_expr()?;
    if p.pos < p.toks.len() {
        return p.err(format!("unexpected {}", describe(p.toks.get(p.pos))));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_and_windows() {
        assert_eq!(parse("x1 >= 3").unwrap(), Formula::ge("x1", 3.0));
        let f = parse("F[92,165] (in_green >= 0.5)").unwrap();
        assert_eq!(f, Formula::eventually(Interval { a: 92.0, b: 165.0 }, Formula::ge("in_green", 0.5)));
        assert_eq!(parse("a >= 1 U[2,1] b >= 0"), Err(StlError::BadInterval { a: 2.0, b: 1.0 }));
        assert_eq!(parse("F[-1,2] a <= 0"), Err(StlError::BadInterval { a: -1.0, b: 2.0 }));
    }

    #[test]
    fn precedence() {
        let a = || Formula::ge("a", 0.0);
        let b = || Formula::ge("b", 0.0);
        let c = || Formula::ge("c", 0.0);
        let i = Interval { a: 0.0, b: 1.0 };
        assert_eq!(parse("a>=0 | b>=0 & c>=0").unwrap(), a().or(b().and(c())));
        assert_eq!(parse("a>=0 & b>=0 U[0,1] c>=0").unwrap(), a().and(b().until(i, c())));
        assert_eq!(parse("!a>=0 U[0,1] b>=0").unwrap(), a().not().until(i, b()));
        assert_eq!(parse("F[0,1] a>=0 & b>=0").unwrap(), Formula::eventually(i, a()).and(b()));
        assert_eq!(parse("a>=0 U[0,1] b>=0 U[0,1] c>=0").unwrap(), a().until(i, b()).until(i, c()));
        assert_eq!(parse("a>=0 & b>=0 & c>=0").unwrap(), a().and(b()).and(c()));
        assert_eq!(parse("G[0,1] !(true)").unwrap(), Formula::always(i, Formula::True.not()));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(parse("x >= "), Err(StlError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x > 1"), Err(StlError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("(x >= 1"), Err(StlError::Syntax { pos: 7, .. })));
        assert!(matches!(parse("x >= 1 y"), Err(StlError::Syntax { pos: 7, .. })));
        assert!(matches!(parse("F[1 2] x >= 0"), Err(StlError::Syntax { pos: 4, .. })));
        assert!(matches!(parse(""), Err(StlError::Syntax { pos: 0, .. })));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("x <= -1.5e-3").unwrap(), Formula::le("x", -1.5e-3));
        assert_eq!(parse("x>=.25").unwrap(), Formula::ge("x", 0.25));
        assert_eq!(parse("x[2] <= 1").unwrap(), Formula::le("x[2]", 1.0));
        assert!(parse("x >= 1e999").is_err());
    }
}
