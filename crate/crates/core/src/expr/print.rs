//! Canonical printer. `parse(print(e)) == e` for every tree the parser can
//! produce, which gives the round-trip law `parse . print . parse == parse`.

use super::{BinOp, Expr, Side, UnaryOp};
use std::fmt;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

// Precedence levels: 0 add/sub, 1 mul/div, 2 unary minus, 3 power base.
fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match e {
        Expr::Const(c) => write_number(*c, f),
        Expr::Var => write!(f, "x"),
        Expr::Unary(UnaryOp::Neg, inner) => {
            let need = prec > 1;
            if need {
                write!(f, "(")?;
            }
            write!(f, "-")?;
            write_expr(inner, f, 2)?;
            if need {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Unary(op, inner) => {
            write!(f, "{}(", op.name())?;
            write_expr(inner, f, 0)?;
            write!(f, ")")
        }
        Expr::Binary(op, a, b) => {
            let (my, sym) = match op {
                BinOp::Add => (0, "+"),
                BinOp::Sub => (0, "-"),
                BinOp::Mul => (1, "*"),
                BinOp::Div => (1, "/"),
            };
            let need = prec > my;
            if need {
                write!(f, "(")?;
            }
            write_expr(a, f, my)?;
            write!(f, "{sym}")?;
            // Right operand of `-`/`/` needs one level more to keep
            // left-associativity on reparse.
            write_expr(b, f, my + 1)?;
            if need {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Pow(base, r) => {
            let atomic = matches!(
                **base,
                Expr::Var | Expr::Unary(UnaryOp::Exp, _)
                    | Expr::Unary(UnaryOp::Ln, _)
                    | Expr::Unary(UnaryOp::Sqrt, _)
                    | Expr::Unary(UnaryOp::Abs, _)
                    | Expr::Unary(UnaryOp::Atan, _)
            ) || matches!(**base, Expr::Const(c) if c >= 0.0);
            if atomic {
                write_expr(base, f, 3)?;
            } else {
                write!(f, "(")?;
                write_expr(base, f, 0)?;
                write!(f, ")")?;
            }
            write!(f, "^")?;
            write_number(*r, f)
        }
        Expr::Piecewise(pw) => {
            write!(f, "piecewise(")?;
            for (t, piece) in pw.pieces.iter().enumerate() {
                if t > 0 {
                    write!(f, "; ")?;
                }
                if t < pw.breaks.len() {
                    let b = &pw.breaks[t];
                    let op = if b.includes == Side::Left { "<=" } else { "<" };
                    write!(f, "x{op}")?;
                    write_number(b.at, f)?;
                } else {
                    let b = &pw.breaks[t - 1];
                    let op = if b.includes == Side::Left { ">" } else { ">=" };
                    write!(f, "x{op}")?;
                    write_number(b.at, f)?;
                }
                write!(f, ": ")?;
                write_expr(piece, f, 0)?;
            }
            write!(f, ")")
        }
    }
}

fn write_number(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Rust's shortest round-trip formatting; no scientific notation, so the
    // lexer always reads it back exactly.
    write!(f, "{c}")
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[track_caller]
    fn roundtrip(text: &str) {
        let e1 = parse(text).unwrap();
        let printed = e1.to_string();
        let e2 = parse(&printed).unwrap();
        assert_eq!(e1, e2, "round trip failed: {text} -> {printed}");
    }

    #[test]
    fn print_round_trips() {
        for s in [
            "x",
            "-x",
            "1+2*x",
            "(x+1)/(x-1)",
            "x^2",
            "x^-2",
            "(x+1)^3",
            "2-3-4",
            "2/3/4",
            "2-(3-4)",
            "ln(exp(x))",
            "sqrt(abs(x))",
            "atan(x)",
            "-(x+1)",
            "piecewise(x<0: x; x>=0: x+1)",
            "piecewise(x<=0: -x; x>0: x*x)",
            "piecewise(x<0: x; x<1: x+1; x>=1: x+2)",
            "1/(1+x^2)",
            "x*-1",
            "0.5*x^2+1e-3",
        ] {
            roundtrip(s);
        }
    }

    #[test]
    fn subtraction_associativity_survives() {
        let e = parse("2-3-4").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), -5.0);
        let p = e.to_string();
        assert_eq!(parse(&p).unwrap().eval(0.0).unwrap(), -5.0);
    }
}
