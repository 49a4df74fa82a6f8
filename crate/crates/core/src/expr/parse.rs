use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};

/// Maximum tree depth accepted by the parser.
pub const MAX_DEPTH: usize = 200;
/// Largest integer exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

/// Parse `text` as an expression over `x1..xn` and `y1..ym`.
///
/// Precedence, tightest first: `^` (integer literal exponent), unary `-`,
/// `*` `/`, `+` `-`. Binary operators associate to the left.
pub fn parse(text: &str, n: usize, m: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
        m,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("expression"));
    }
    let (e, _) = p.expr(0)?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    m: usize,
}

// Each production returns the parsed tree together with its depth.
type Parsed = (Expr, usize);

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = String::from_utf8_lossy(&self.src[self.pos..]);
                let c = rest.chars().next().unwrap_or('?');
                format!("'{c}'")
            }
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.to_string(),
            found: self.found(),
        }
    }

    fn check_depth(&self, depth: usize, at: usize) -> Result<(), ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError {
                offset: at,
                expected: format!("expression of depth at most {MAX_DEPTH}"),
                found: "deeper nesting".to_string(),
            });
        }
        Ok(())
    }

    fn expr(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let (mut lhs, mut depth) = self.term(nesting)?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok((lhs, depth)),
            };
            let at = self.pos;
            self.pos += 1;
            let (rhs, d) = self.term(nesting)?;
            depth = 1 + depth.max(d);
            self.check_depth(depth, at)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let (mut lhs, mut depth) = self.unary(nesting)?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok((lhs, depth)),
            };
            let at = self.pos;
            self.pos += 1;
            let (rhs, d) = self.unary(nesting)?;
            depth = 1 + depth.max(d);
            self.check_depth(depth, at)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            let at = self.pos;
            self.pos += 1;
            self.check_depth(nesting + 1, at)?;
            self.skip_ws();
            let literal = matches!(self.peek(), Some(b'0'..=b'9' | b'.'));
            let (inner, d) = self.unary(nesting + 1)?;
            // A negated bare literal is stored as a negative constant.
            return Ok(match inner {
                Expr::Const(c) if literal => (Expr::Const(-c), d),
                other => {
                    self.check_depth(d + 1, at)?;
                    (Expr::Unary(UnaryOp::Neg, Box::new(other)), d + 1)
                }
            });
        }
        self.power(nesting)
    }

    fn power(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let (mut base, mut depth) = self.primary(nesting)?;
        loop {
            self.skip_ws();
            if self.peek() != Some(b'^') {
                return Ok((base, depth));
            }
            let at = self.pos;
            self.pos += 1;
            self.skip_ws();
            let k = self.exponent()?;
            depth += 1;
            self.check_depth(depth, at)?;
            base = Expr::Pow(Box::new(base), k);
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let expected = format!("integer exponent in 0..={MAX_EXPONENT}");
        if start == self.pos {
            return Err(self.error(&expected));
        }
        if matches!(self.peek(), Some(b'.' | b'e' | b'E')) {
            self.pos = start;
            return Err(self.error(&expected));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match digits.parse::<u32>() {
            Ok(k) if k <= MAX_EXPONENT => Ok(k),
            _ => Err(ParseError {
                offset: start,
                expected,
                found: format!("'{digits}'"),
            }),
        }
    }

    fn primary(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                let at = self.pos;
                self.pos += 1;
                self.check_depth(nesting + 1, at)?;
                let inner = self.expr(nesting + 1)?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'0'..=b'9' | b'.') => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(nesting),
            _ => Err(self.error("operand")),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("'{}'", c as char)))
        }
    }

    fn number(&mut self) -> Result<Parsed, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(b'0'..=b'9')) {
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Expr::Const(v), 1)),
            _ => Err(ParseError {
                offset: start,
                expected: "finite number".to_string(),
                found: format!("'{text}'"),
            }),
        }
    }

    fn identifier(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let func = match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            _ => None,
        };
        if let Some(op) = func {
            self.expect(b'(')?;
            self.check_depth(nesting + 1, start)?;
            let (arg, d) = self.expr(nesting + 1)?;
            self.expect(b')')?;
            self.check_depth(d + 1, start)?;
            return Ok((Expr::Unary(op, Box::new(arg)), d + 1));
        }
        match self.variable(name) {
            Some(v) => Ok((Expr::Var(v), 1)),
            None => Err(ParseError {
                offset: start,
                expected: format!("declared variable (x1..x{}, y1..y{}) or function", self.n, self.m),
                found: format!("'{name}'"),
            }),
        }
    }

    fn variable(&self, name: &str) -> Option<Var> {
        let (kind, digits) = name.split_at(1);
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        match kind {
            "x" if k <= self.n => Some(Var::X(k - 1)),
            "y" if k <= self.m => Some(Var::Y(k - 1)),
            _ => None,
        }
    }
}
