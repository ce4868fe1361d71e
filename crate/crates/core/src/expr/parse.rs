//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr      := term (('+'|'-') term)*
//! term      := unary (('*'|'/') unary)*
//! unary     := '-' unary | factor
//! factor    := base ('^' number)?
//! base      := number | 'x' | ident '(' expr ')' | '(' expr ')' | piecewise
//! piecewise := 'piecewise(' guard ':' expr (';' guard ':' expr)* ')'
//! guard     := 'x' ('<' | '<=' | '>=' | '>') number
//! ```
//!
//! Guards are first-match-wins and must be in increasing normal form: all
//! but the last use `<` or `<=` with strictly increasing constants, and the
//! last guard closes the line with the complementary `>`/`>=` at the final
//! breakpoint. `x<=c` puts the breakpoint in the left piece, `x<c` in the
//! right one.

use super::{Breakpoint, Expr, Piecewise, Side, UnaryOp};
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = Expr::add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = Expr::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat(b'-') {
            self.skip_ws();
            let inner = self.unary()?;
            // Fold a negated literal so `-1` and `Const(-1)` print and
            // reparse identically.
            if let Expr::Const(c) = inner {
                return Ok(Expr::Const(-c));
            }
            return Ok(Expr::unary(UnaryOp::Neg, inner));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let sign = if self.eat(b'-') { -1.0 } else { 1.0 };
            let n = self.number()?;
            return Ok(Expr::pow(base, sign * n));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                if name == "x" {
                    return Ok(Expr::Var);
                }
                if name == "piecewise" {
                    return self.piecewise();
                }
                let op = match name.as_str() {
                    "exp" => UnaryOp::Exp,
                    "ln" => UnaryOp::Ln,
                    "sqrt" => UnaryOp::Sqrt,
                    "abs" => UnaryOp::Abs,
                    "atan" => UnaryOp::Atan,
                    "neg" => UnaryOp::Neg,
                    _ => {
                        return Err(Error::UnknownIdentifier {
                            name,
                            offset: start,
                        })
                    }
                };
                self.skip_ws();
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(Expr::unary(op, arg))
            }
            _ => Err(self.err("expected a number, `x`, function call, or `(`")),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_alphanumeric() || c == b'_')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_ascii_digit() || c == b'.')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        // optional exponent
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
            if self.pos == digits_start {
                self.pos = mark; // `e` belonged to something else
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<f64>().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid number `{s}`"),
        })
    }

    fn signed_number(&mut self) -> Result<f64> {
        self.skip_ws();
        let sign = if self.eat(b'-') { -1.0 } else { 1.0 };
        Ok(sign * self.number()?)
    }

    fn piecewise(&mut self) -> Result<Expr> {
        self.skip_ws();
        self.expect(b'(')?;
        let mut guards: Vec<(GuardOp, f64)> = Vec::new();
        let mut pieces: Vec<Expr> = Vec::new();
        loop {
            let g = self.guard()?;
            self.skip_ws();
            self.expect(b':')?;
            let piece = self.expr()?;
            guards.push(g);
            pieces.push(piece);
            self.skip_ws();
            if self.eat(b';') {
                continue;
            }
            self.expect(b')')?;
            break;
        }
        self.normalize_piecewise(guards, pieces)
    }

    fn guard(&mut self) -> Result<(GuardOp, f64)> {
        self.skip_ws();
        if !self.eat(b'x') {
            return Err(self.err("guard must start with `x`"));
        }
        self.skip_ws();
        let op = match self.peek() {
            Some(b'<') => {
                self.pos += 1;
                if self.eat(b'=') {
                    GuardOp::Le
                } else {
                    GuardOp::Lt
                }
            }
            Some(b'>') => {
                self.pos += 1;
                if self.eat(b'=') {
                    GuardOp::Ge
                } else {
                    GuardOp::Gt
                }
            }
            _ => return Err(self.err("expected `<`, `<=`, `>=`, or `>`")),
        };
        let c = self.signed_number()?;
        Ok((op, c))
    }

    fn normalize_piecewise(&self, guards: Vec<(GuardOp, f64)>, pieces: Vec<Expr>) -> Result<Expr> {
        if guards.len() < 2 {
            return Err(self.err("piecewise needs at least two pieces"));
        }
        let m = guards.len() - 1;
        let mut breaks = Vec::with_capacity(m);
        for (t, (op, c)) in guards[..m].iter().enumerate() {
            let includes = match op {
                GuardOp::Lt => Side::Right,
                GuardOp::Le => Side::Left,
                _ => return Err(self.err("only the last guard may use `>` or `>=`")),
            };
            if t > 0 && breaks[t - 1].at >= *c {
                return Err(self.err("piecewise breakpoints must strictly increase"));
            }
            breaks.push(Breakpoint { at: *c, includes });
        }
        let (last_op, last_c) = guards[m];
        let last_break: &Breakpoint = breaks.last().unwrap();
        if last_c != last_break.at {
            return Err(self.err("final guard must close at the last breakpoint"));
        }
        let consistent = match (last_op, last_break.includes) {
            (GuardOp::Ge, Side::Right) => true,
            (GuardOp::Gt, Side::Left) => true,
            _ => false,
        };
        if !consistent {
            return Err(self.err("final guard must complement the previous one"));
        }
        Ok(Expr::Piecewise(Piecewise { breaks, pieces }))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum GuardOp {
    Lt,
    Le,
    Ge,
    Gt,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp;

    #[test]
    fn atoms() {
        assert_eq!(parse("x").unwrap(), Expr::Var);
        assert_eq!(parse("2.5").unwrap(), Expr::Const(2.5));
        assert_eq!(
            parse("ln(x)").unwrap(),
            Expr::unary(UnaryOp::Ln, Expr::Var)
        );
    }

    #[test]
    fn precedence() {
        // 1 + 2*x parses as 1 + (2*x)
        let e = parse("1+2*x").unwrap();
        match e {
            Expr::Binary(BinOp::Add, a, b) => {
                assert_eq!(*a, Expr::Const(1.0));
                assert!(matches!(*b, Expr::Binary(BinOp::Mul, _, _)));
            }
            other => panic!("bad parse: {other:?}"),
        }
        // -x^2 is -(x^2)
        let e = parse("-x^2").unwrap();
        assert!(matches!(e, Expr::Unary(UnaryOp::Neg, _)));
        assert_eq!(e.eval(2.0).unwrap(), -4.0);
    }

    #[test]
    fn negative_literal_folds() {
        assert_eq!(parse("-1").unwrap(), Expr::Const(-1.0));
        assert_eq!(parse("x^-2").unwrap(), Expr::pow(Expr::Var, -2.0));
    }

    #[test]
    fn piecewise_normal_form() {
        let e = parse("piecewise(x<0: x; x>=0: x+1)").unwrap();
        match &e {
            Expr::Piecewise(pw) => {
                assert_eq!(pw.breaks.len(), 1);
                assert_eq!(pw.breaks[0].at, 0.0);
                assert_eq!(pw.breaks[0].includes, Side::Right);
            }
            other => panic!("bad parse: {other:?}"),
        }
    }

    #[test]
    fn piecewise_three_pieces() {
        let e = parse("piecewise(x<0: x; x<1: x+1; x>=1: x+2)").unwrap();
        assert_eq!(e.eval(-1.0).unwrap(), -1.0);
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        assert_eq!(e.eval(1.0).unwrap(), 3.0);
    }

    #[test]
    fn piecewise_rejects_bad_forms() {
        assert!(parse("piecewise(x<1: x; x>=0: x+1)").is_err());
        assert!(parse("piecewise(x<0: x; x>0: x+1)").is_err());
        assert!(parse("piecewise(x>0: x; x<=0: x+1)").is_err());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1 + @") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("foo(x)") {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 0);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }
}
