//! Order-3 jets: value and first three derivatives propagated through the
//! expression tree, plus the Schwarzian derivative and the closed-form
//! derivatives of inverse functions.

use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, UnaryOp};

/// Truncated Taylor data of a function at a point: value and first three
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub fn constant(c: f64) -> Jet3 {
        Jet3 {
            v: c,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    pub fn variable(x: f64) -> Jet3 {
        Jet3 {
            v: x,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }

    fn neg(self) -> Jet3 {
        Jet3 {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
            d3: -self.d3,
        }
    }

    fn add(self, o: Jet3) -> Jet3 {
        Jet3 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
        }
    }

    fn sub(self, o: Jet3) -> Jet3 {
        Jet3 {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
            d3: self.d3 - o.d3,
        }
    }

    // Leibniz rule up to third order.
    fn mul(self, o: Jet3) -> Jet3 {
        Jet3 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        }
    }

    /// Composition with scalar derivatives `outer = (phi, phi', phi'', phi''')`
    /// evaluated at `self.v` (Faa di Bruno to order 3).
    fn compose(self, outer: [f64; 4]) -> Jet3 {
        let [p0, p1, p2, p3] = outer;
        let u1 = self.d1;
        let u2 = self.d2;
        let u3 = self.d3;
        Jet3 {
            v: p0,
            d1: p1 * u1,
            d2: p2 * u1 * u1 + p1 * u2,
            d3: p3 * u1 * u1 * u1 + 3.0 * p2 * u1 * u2 + p1 * u3,
        }
    }
}

/// Evaluate value and derivatives of `e` at `x`. Jets are undefined at
/// piecewise breakpoints.
pub fn jet_eval(e: &Expr, x: f64) -> Result<Jet3> {
    let j = jet_node(e, x)?;
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite { x })
    }
}

fn jet_node(e: &Expr, x: f64) -> Result<Jet3> {
    match e {
        Expr::Const(c) => Ok(Jet3::constant(*c)),
        Expr::Var => Ok(Jet3::variable(x)),
        Expr::Unary(op, inner) => {
            let u = jet_node(inner, x)?;
            jet_unary(*op, u)
        }
        Expr::Binary(op, a, b) => {
            let ja = jet_node(a, x)?;
            let jb = jet_node(b, x)?;
            match op {
                BinOp::Add => Ok(ja.add(jb)),
                BinOp::Sub => Ok(ja.sub(jb)),
                BinOp::Mul => Ok(ja.mul(jb)),
                BinOp::Div => {
                    if jb.v == 0.0 {
                        return Err(Error::DivisionByZero { x });
                    }
                    Ok(ja.mul(recip(jb)))
                }
            }
        }
        Expr::Pow(base, r) => {
            let u = jet_node(base, x)?;
            jet_pow(u, *r, x)
        }
        Expr::Piecewise(pw) => {
            for b in &pw.breaks {
                if b.at == x {
                    return Err(Error::Breakpoint { x });
                }
            }
            jet_node(&pw.pieces[pw.piece_index(x)], x)
        }
    }
}

fn jet_unary(op: UnaryOp, u: Jet3) -> Result<Jet3> {
    let t = u.v;
    match op {
        UnaryOp::Neg => Ok(u.neg()),
        UnaryOp::Exp => {
            let e = t.exp();
            Ok(u.compose([e, e, e, e]))
        }
        UnaryOp::Ln => {
            if t <= 0.0 {
                return Err(Error::Domain { op: "ln", arg: t });
            }
            Ok(u.compose([t.ln(), 1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t)]))
        }
        UnaryOp::Sqrt => {
            if t <= 0.0 {
                return Err(Error::Domain { op: "sqrt", arg: t });
            }
            let s = t.sqrt();
            Ok(u.compose([
                s,
                0.5 / s,
                -0.25 / (s * t),
                0.375 / (s * t * t),
            ]))
        }
        UnaryOp::Abs => {
            if t == 0.0 {
                return Err(Error::Domain { op: "abs'", arg: t });
            }
            let s = t.signum();
            Ok(Jet3 {
                v: t.abs(),
                d1: s * u.d1,
                d2: s * u.d2,
                d3: s * u.d3,
            })
        }
        UnaryOp::Atan => {
            let w = 1.0 + t * t;
            Ok(u.compose([
                t.atan(),
                1.0 / w,
                -2.0 * t / (w * w),
                (6.0 * t * t - 2.0) / (w * w * w),
            ]))
        }
    }
    .map_err(|e| match e {
        Error::Domain { op, arg } => Error::Domain { op, arg },
        other => other,
    })
    .map(|j| {
        let _ = x;
        j
    })
}

fn recip(b: Jet3) -> Jet3 {
    let t = b.v;
    b.compose([
        1.0 / t,
        -1.0 / (t * t),
        2.0 / (t * t * t),
        -6.0 / (t * t * t * t),
    ])
}

fn jet_pow(u: Jet3, r: f64, x: f64) -> Result<Jet3> {
    let t = u.v;
    let integer = r == r.trunc() && r.abs() < 1e15;
    if !integer && t <= 0.0 {
        return Err(Error::Domain { op: "pow", arg: t });
    }
    if integer && t == 0.0 && r < 3.0 {
        // derivatives of t^r blow up or are undefined at 0 for r < 3
        return Err(Error::Domain { op: "pow'", arg: t });
    }
    let _ = x;
    let pw = |e: f64| -> f64 {
        if integer {
            t.powi(e as i32)
        } else {
            t.powf(e)
        }
    };
    Ok(u.compose([
        pw(r),
        r * pw(r - 1.0),
        r * (r - 1.0) * pw(r - 2.0),
        r * (r - 1.0) * (r - 2.0) * pw(r - 3.0),
    ]))
}

/// Tolerance below which a first derivative counts as vanishing.
pub const D1_TOL: f64 = 1e-12;

/// Schwarzian derivative `f'''/f' - (3/2)(f''/f')^2` at `x`.
pub fn schwarzian(e: &Expr, x: f64) -> Result<f64> {
    let j = jet_eval(e, x)?;
    if j.d1.abs() <= D1_TOL {
        return Err(Error::VanishingDerivative { x });
    }
    let a = j.d2 / j.d1;
    Ok(j.d3 / j.d1 - 1.5 * a * a)
}

/// First three derivatives of the inverse function at the image point.
/// The inverse's value there is the original abscissa, which the jet does
/// not carry, so only derivatives are returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseDerivs {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Derivatives of `f^{-1}` at `f(x)` from the jet of `f` at `x`:
/// `1/f'`, `-f''/(f')^3`, `(3(f'')^2 - f'f''')/(f')^5`.
pub fn inverse_jets(j: &Jet3) -> Result<InverseDerivs> {
    if j.d1 == 0.0 {
        return Err(Error::VanishingDerivative { x: j.v });
    }
    let f1 = j.d1;
    let f2 = j.d2;
    let f3 = j.d3;
    let f1_3 = f1 * f1 * f1;
    Ok(InverseDerivs {
        d1: 1.0 / f1,
        d2: -f2 / f1_3,
        d3: (3.0 * f2 * f2 - f1 * f3) / (f1_3 * f1 * f1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn jets(text: &str, x: f64) -> Jet3 {
        jet_eval(&parse(text).unwrap(), x).unwrap()
    }

    #[track_caller]
    fn assert_jet(j: Jet3, v: f64, d1: f64, d2: f64, d3: f64, tol: f64) {
        assert!((j.v - v).abs() <= tol, "v: {} vs {}", j.v, v);
        assert!((j.d1 - d1).abs() <= tol, "d1: {} vs {}", j.d1, d1);
        assert!((j.d2 - d2).abs() <= tol, "d2: {} vs {}", j.d2, d2);
        assert!((j.d3 - d3).abs() <= tol, "d3: {} vs {}", j.d3, d3);
    }

    #[test]
    fn identity_jet() {
        assert_jet(jets("x", 5.0), 5.0, 1.0, 0.0, 0.0, 0.0);
    }

    #[test]
    fn ln_jet_at_one() {
        assert_jet(jets("ln(x)", 1.0), 0.0, 1.0, -1.0, 2.0, 0.0);
    }

    #[test]
    fn square_jet() {
        assert_jet(jets("x^2", 3.0), 9.0, 6.0, 2.0, 0.0, 0.0);
    }

    #[test]
    fn quotient_jet() {
        // 1/x at 2: value 0.5, d1 -1/4, d2 2/8, d3 -6/16
        assert_jet(jets("1/x", 2.0), 0.5, -0.25, 0.25, -0.375, 1e-15);
    }

    #[test]
    fn jets_reject_breakpoints() {
        let e = parse("piecewise(x<0: x; x>=0: x+1)").unwrap();
        assert!(matches!(jet_eval(&e, 0.0), Err(Error::Breakpoint { .. })));
        assert!(jet_eval(&e, 0.5).is_ok());
    }

    #[test]
    fn schwarzian_of_linear_is_zero() {
        let e = parse("x").unwrap();
        for x in [-3.0, 0.1, 7.5] {
            assert_eq!(schwarzian(&e, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn schwarzian_of_exp_is_minus_half() {
        let e = parse("exp(x)").unwrap();
        for x in [-1.0, 0.0, 2.0] {
            assert!((schwarzian(&e, x).unwrap() + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzian_of_mobius_is_zero() {
        let e = parse("(2*x+1)/(x+1)").unwrap();
        assert!(schwarzian(&e, 0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn schwarzian_of_ln() {
        // S(ln)(x) = 1/(2x^2)
        let e = parse("ln(x)").unwrap();
        for x in [0.5, 1.0, 3.0] {
            let expect = 0.5 / (x * x);
            assert!((schwarzian(&e, x).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_jets_examples() {
        let inv = inverse_jets(&Jet3 {
            v: 7.0,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        })
        .unwrap();
        assert_eq!((inv.d1, inv.d2, inv.d3), (1.0, 0.0, 0.0));

        // jets of ln at 1 invert to the jets of exp at 0
        let inv = inverse_jets(&Jet3 {
            v: 0.0,
            d1: 1.0,
            d2: -1.0,
            d3: 2.0,
        })
        .unwrap();
        assert!((inv.d1 - 1.0).abs() < 1e-15);
        assert!((inv.d2 - 1.0).abs() < 1e-15);
        assert!((inv.d3 - 1.0).abs() < 1e-15);

        let inv = inverse_jets(&Jet3 {
            v: 0.0,
            d1: 2.0,
            d2: 0.0,
            d3: 0.0,
        })
        .unwrap();
        assert_eq!((inv.d1, inv.d2, inv.d3), (0.5, 0.0, 0.0));
    }

    #[test]
    fn inverse_jets_is_an_involution() {
        let cases = [
            (1.3, 0.7, -2.1),
            (-0.4, 1.9, 3.3),
            (2.0, 0.0, 0.0),
            (0.25, -1.0, 0.5),
        ];
        for (a, b, c) in cases {
            let first = inverse_jets(&Jet3 {
                v: 0.0,
                d1: a,
                d2: b,
                d3: c,
            })
            .unwrap();
            let back = inverse_jets(&Jet3 {
                v: 0.0,
                d1: first.d1,
                d2: first.d2,
                d3: first.d3,
            })
            .unwrap();
            assert!((back.d1 - a).abs() <= 1e-12 * (1.0 + a.abs()));
            assert!((back.d2 - b).abs() <= 1e-12 * (1.0 + b.abs()));
            assert!((back.d3 - c).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn vanishing_derivative_rejected() {
        let e = parse("x^2").unwrap();
        // d1 of x^2 at 0 is 0 -> pow'(0) guard fires first
        assert!(jet_eval(&e, 0.0).is_err() || schwarzian(&e, 0.0).is_err());
        assert!(inverse_jets(&Jet3::constant(1.0)).is_err());
    }
}
