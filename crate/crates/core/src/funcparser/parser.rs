//! Precedence-climbing parser for the expression grammar
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-' unary | atom
//! atom   := NUMBER | 'x' | 'y' | 'pi' | 'e' | IDENT '(' expr ')' | '(' expr ')'
//! ```

use super::expr::{BinOp, Expr, Func};
use crate::error::ParseError;

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
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
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &src[start..i];
                let v = text
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ParseError {
                        offset: start,
                        expected: vec!["finite number".into()],
                        found: format!("`{text}`"),
                    })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["expression token".into()],
                    found: format!("character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// digits ['.' digits] [('e'|'E') ['+'|'-'] digits]; the exponent is only
/// taken when digits follow, so `2e` lexes as `2` then `e`.
fn scan_number(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

fn atom_expectations() -> Vec<String> {
    let mut v: Vec<String> = ["number", "'x'", "'y'", "'pi'", "'e'", "'('", "'-'"]
        .into_iter()
        .map(String::from)
        .collect();
    v.extend(Func::ALL.iter().map(|f| format!("'{}('", f.name())));
    v
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<String>) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                offset: self.offset(),
                expected: vec![format!("at most {MAX_DEPTH} levels of nesting")],
                found: "deeper nesting".into(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.descend()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.descend()?;
        let base = self.unary()?;
        let out = if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            Expr::pow(base, exponent)
        } else {
            base
        };
        self.depth -= 1;
        Ok(out)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.descend()?;
            self.bump();
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::neg(inner));
        }
        self.atom()
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![tok.describe()]))
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => {
                    self.bump();
                    Ok(Expr::x())
                }
                "y" => {
                    self.bump();
                    Ok(Expr::y())
                }
                "pi" => {
                    self.bump();
                    Ok(Expr::pi())
                }
                "e" => {
                    self.bump();
                    Ok(Expr::e())
                }
                other => match Func::from_name(other) {
                    Some(func) => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::call(func, arg))
                    }
                    None => Err(ParseError {
                        offset: at,
                        expected: atom_expectations(),
                        found: format!("unknown identifier `{other}`"),
                    }),
                },
            },
            _ => Err(self.error(atom_expectations())),
        }
    }
}

/// Parse a complete expression; trailing input is an error.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error(vec!["operator".into(), "')'".into(), "end of input".into()])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcparser::expr::Func;

    #[test]
    fn parses_catalog_shape() {
        let e = parse("x*sin(pi*y)").unwrap();
        assert_eq!(
            e,
            Expr::mul(
                Expr::x(),
                Expr::call(Func::Sin, Expr::mul(Expr::pi(), Expr::y()))
            )
        );
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_tighter_than_power_base() {
        assert_eq!(parse("-2^2").unwrap().eval(0.0, 0.0).unwrap(), 4.0);
        assert_eq!(parse("2^-1").unwrap().eval(0.0, 0.0).unwrap(), 0.5);
        assert_eq!(parse("-(2^2)").unwrap().eval(0.0, 0.0).unwrap(), -4.0);
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| parse(s).unwrap().eval(2.0, 3.0).unwrap();
        assert_eq!(v("1 + 2 * 3"), 7.0);
        assert_eq!(v("8 - 3 - 2"), 3.0);
        assert_eq!(v("8 / 4 / 2"), 1.0);
        assert_eq!(v("x - -y"), 5.0);
        assert_eq!(v("(x + y) * 2"), 10.0);
        assert_eq!(v("2.5e1 + .5"), 25.5);
    }

    #[test]
    fn incomplete_expression_reports_end_offset() {
        let err = parse("x +").unwrap_err();
        assert_eq!(err.offset, 3);
        assert!(err.found.contains("end of input"));
        assert!(err.expected.iter().any(|e| e == "number"));
    }

    #[test]
    fn rejects_trailing_garbage_and_unknown_names() {
        assert_eq!(parse("x y").unwrap_err().offset, 2);
        assert_eq!(parse("2e").unwrap_err().offset, 1);
        assert_eq!(parse("foo(x)").unwrap_err().offset, 0);
        assert_eq!(parse("sin x").unwrap_err().offset, 4);
        assert_eq!(parse("(x").unwrap_err().offset, 2);
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("x $ y").unwrap_err().offset, 2);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = "(".repeat(10_000) + "x" + &")".repeat(10_000);
        assert!(parse(&src).is_err());
        let src = "-".repeat(10_000) + "x";
        assert!(parse(&src).is_err());
        let src = "2^".repeat(10_000) + "x";
        assert!(parse(&src).is_err());
    }
}
