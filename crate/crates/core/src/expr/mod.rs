//! Single-variable real expressions: AST, evaluation, intervals, and
//! certified monotone functions.
//!
//! Expressions are trees over one free variable `x` with the elementary
//! operations needed for mean generators and weight functions, plus ordered
//! piecewise definitions so that strictly monotone generators with jump
//! discontinuities are first-class values.

mod parse;
mod print;

pub use parse::parse;

use crate::error::{Error, Result};

/// Unary operations. `Atan` exists for the closed-form primitives of
/// reciprocal quadratics; the rest are the minimal generator vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Atan,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
            UnaryOp::Atan => "atan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Which neighbouring piece owns a breakpoint value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A piecewise breakpoint: the abscissa and which side includes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint {
    pub at: f64,
    pub includes: Side,
}

/// Ordered piecewise definition: `breaks.len() + 1` pieces covering the
/// whole line, breakpoints strictly increasing, every point owned by
/// exactly one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    pub breaks: Vec<Breakpoint>,
    pub pieces: Vec<Expr>,
}

impl Piecewise {
    /// Index of the piece that owns `x`.
    pub fn piece_index(&self, x: f64) -> usize {
        let mut idx = 0;
        for (t, b) in self.breaks.iter().enumerate() {
            if x > b.at || (x == b.at && b.includes == Side::Right) {
                idx = t + 1;
            }
        }
        idx
    }
}

/// Expression tree over one real variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant real exponent (the grammar only admits
    /// numeric exponents).
    Pow(Box<Expr>, f64),
    Piecewise(Piecewise),
}

impl Expr {
    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Div, a, b)
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    /// `k1 * e + k0`, dropping the units that cannot change domain behaviour.
    pub fn affine(k1: f64, e: Expr, k0: f64) -> Expr {
        let scaled = if k1 == 1.0 {
            e
        } else {
            Expr::mul(Expr::Const(k1), e)
        };
        if k0 == 0.0 {
            scaled
        } else {
            Expr::add(scaled, Expr::Const(k0))
        }
    }

    /// Replace every occurrence of the variable by `inner`.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => inner.clone(),
            Expr::Unary(op, e) => Expr::unary(*op, e.substitute(inner)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(inner), b.substitute(inner)),
            Expr::Pow(b, r) => Expr::pow(b.substitute(inner), *r),
            Expr::Piecewise(pw) => Expr::Piecewise(Piecewise {
                breaks: pw.breaks.clone(),
                pieces: pw.pieces.iter().map(|p| p.substitute(inner)).collect(),
            }),
        }
    }

    /// All piecewise breakpoints appearing anywhere in the tree, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Const(_) | Expr::Var => {}
            Expr::Unary(_, e) => e.collect_breakpoints(out),
            Expr::Binary(_, a, b) => {
                a.collect_breakpoints(out);
                b.collect_breakpoints(out);
            }
            Expr::Pow(b, _) => b.collect_breakpoints(out),
            Expr::Piecewise(pw) => {
                out.extend(pw.breaks.iter().map(|b| b.at));
                for p in &pw.pieces {
                    p.collect_breakpoints(out);
                }
            }
        }
    }

    /// Evaluate the tree at `x`. Every result is a finite real or a
    /// domain error; non-finite intermediates are rejected.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x })
        }
    }

    fn eval_raw(&self, x: f64) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var => Ok(x),
            Expr::Unary(op, e) => {
                let u = e.eval_raw(x)?;
                eval_unary(*op, u)
            }
            Expr::Binary(op, a, b) => {
                let ua = a.eval_raw(x)?;
                let ub = b.eval_raw(x)?;
                match op {
                    BinOp::Add => Ok(ua + ub),
                    BinOp::Sub => Ok(ua - ub),
                    BinOp::Mul => Ok(ua * ub),
                    BinOp::Div => {
                        if ub == 0.0 {
                            Err(Error::DivisionByZero { x })
                        } else {
                            Ok(ua / ub)
                        }
                    }
                }
            }
            Expr::Pow(base, r) => {
                let u = base.eval_raw(x)?;
                eval_pow(u, *r, x)
            }
            Expr::Piecewise(pw) => {
                let idx = pw.piece_index(x);
                pw.pieces[idx].eval_raw(x)
            }
        }
    }

    /// One-sided limits `(f(x0-), f(x0+))`. At a breakpoint these are the
    /// adjacent piece expressions evaluated at `x0`; elsewhere both equal
    /// the plain value.
    pub fn one_sided_limits(&self, x0: f64) -> Result<(f64, f64)> {
        match self {
            Expr::Piecewise(pw) => {
                for (t, b) in pw.breaks.iter().enumerate() {
                    if b.at == x0 {
                        let left = pw.pieces[t].eval(x0)?;
                        let right = pw.pieces[t + 1].eval(x0)?;
                        return Ok((left, right));
                    }
                }
                let idx = pw.piece_index(x0);
                pw.pieces[idx].one_sided_limits(x0)
            }
            Expr::Unary(UnaryOp::Neg, e) => {
                let (l, r) = e.one_sided_limits(x0)?;
                Ok((-l, -r))
            }
            _ => {
                // Compositions of continuous nodes over a piecewise inner
                // expression are not used for generators; the jump always
                // sits at the outermost level in this crate.
                let v = self.eval(x0)?;
                Ok((v, v))
            }
        }
    }
}

fn eval_unary(op: UnaryOp, u: f64) -> Result<f64> {
    match op {
        UnaryOp::Neg => Ok(-u),
        UnaryOp::Exp => Ok(u.exp()),
        UnaryOp::Ln => {
            if u <= 0.0 {
                Err(Error::Domain { op: "ln", arg: u })
            } else {
                Ok(u.ln())
            }
        }
        UnaryOp::Sqrt => {
            if u < 0.0 {
                Err(Error::Domain { op: "sqrt", arg: u })
            } else {
                Ok(u.sqrt())
            }
        }
        UnaryOp::Abs => Ok(u.abs()),
        UnaryOp::Atan => Ok(u.atan()),
    }
}

fn eval_pow(base: f64, r: f64, x: f64) -> Result<f64> {
    if r == r.trunc() && r.abs() < 1e15 {
        if base == 0.0 && r < 0.0 {
            return Err(Error::DivisionByZero { x });
        }
        Ok(base.powi(r as i32))
    } else {
        if base <= 0.0 {
            return Err(Error::Domain { op: "pow", arg: base });
        }
        Ok(base.powf(r))
    }
}

/// Open real interval, endpoints possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Grid operations clamp infinite endpoints here.
pub const ENDPOINT_CLAMP: f64 = 1e8;

/// Relative pad used to approach open endpoints; scaled by the clamped
/// width, capped at 1 so half-infinite domains keep their near-endpoint
/// behaviour.
const ENDPOINT_PAD: f64 = 1e-9;

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn require(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Closed evaluation interval: infinite endpoints clamped to
    /// `ENDPOINT_CLAMP`, open finite endpoints approached to a small pad.
    pub fn clamped(&self) -> (f64, f64) {
        let lo_c = self.lo.max(-ENDPOINT_CLAMP);
        let hi_c = self.hi.min(ENDPOINT_CLAMP);
        let pad = ENDPOINT_PAD * (hi_c - lo_c).min(1.0);
        let mut a = lo_c + pad;
        let mut b = hi_c - pad;
        if a <= lo_c {
            a = next_up(lo_c);
        }
        if b >= hi_c {
            b = next_down(hi_c);
        }
        (a, b)
    }

    /// `n` evenly spaced points on the clamped interval, endpoints included.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.clamped();
        if n <= 1 {
            return vec![(a + b) / 2.0];
        }
        let step = (b - a) / (n - 1) as f64;
        (0..n).map(|k| a + step * k as f64).collect()
    }
}

fn next_up(x: f64) -> f64 {
    if x == f64::INFINITY {
        x
    } else {
        let bits = if x == 0.0 {
            1
        } else if x > 0.0 {
            x.to_bits() + 1
        } else {
            x.to_bits() - 1
        };
        f64::from_bits(bits)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Declared monotonicity direction of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    #[serde(rename = "inc")]
    Increasing,
    #[serde(rename = "dec")]
    Decreasing,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
        }
    }
}

/// Outcome of a grid monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneCheck {
    Increasing,
    Decreasing,
    Violation { x1: f64, x2: f64 },
}

/// Evaluate `f` on a `grid_size`-point grid of `domain` and classify the
/// ordering of consecutive values. Strict monotonicity is certified only
/// at sampling scale; ties or mixed orderings report the first violating
/// pair.
pub fn check_strict_monotone(
    f: &Expr,
    domain: &Interval,
    grid_size: usize,
) -> Result<MonotoneCheck> {
    let grid = domain.grid(grid_size.max(2));
    let values: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect::<Result<_>>()?;
    let mut incr = true;
    let mut decr = true;
    for w in values.windows(2) {
        if w[1] <= w[0] {
            incr = false;
        }
        if w[1] >= w[0] {
            decr = false;
        }
    }
    if incr {
        return Ok(MonotoneCheck::Increasing);
    }
    if decr {
        return Ok(MonotoneCheck::Decreasing);
    }
    // Report the first adjacent pair incompatible with the majority trend.
    let ups = values.windows(2).filter(|w| w[1] > w[0]).count();
    let want_up = ups * 2 >= values.len() - 1;
    for (k, w) in values.windows(2).enumerate() {
        let ok = if want_up { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Ok(MonotoneCheck::Violation {
                x1: grid[k],
                x2: grid[k + 1],
            });
        }
    }
    unreachable!("windows classified above");
}

/// Default grid size used when certifying a [`MonotoneFn`].
pub const MONOTONE_GRID: usize = 512;

/// A strictly monotone expression on an open interval, direction certified
/// on a sampling grid at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFn {
    expr: Expr,
    domain: Interval,
    direction: Direction,
}

impl MonotoneFn {
    pub fn new(expr: Expr, domain: Interval, direction: Direction) -> Result<MonotoneFn> {
        Self::with_grid(expr, domain, direction, MONOTONE_GRID)
    }

    pub fn with_grid(
        expr: Expr,
        domain: Interval,
        direction: Direction,
        grid_size: usize,
    ) -> Result<MonotoneFn> {
        match check_strict_monotone(&expr, &domain, grid_size)? {
            MonotoneCheck::Increasing if direction == Direction::Increasing => {}
            MonotoneCheck::Decreasing if direction == Direction::Decreasing => {}
            MonotoneCheck::Violation { x1, x2 } => return Err(Error::NotMonotone { x1, x2 }),
            _ => {
                let (a, b) = domain.clamped();
                return Err(Error::NotMonotone { x1: a, x2: b });
            }
        }
        Ok(MonotoneFn {
            expr,
            domain,
            direction,
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.expr.eval(x)
    }

    /// Breakpoints strictly inside the domain.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.expr
            .breakpoints()
            .into_iter()
            .filter(|&b| self.domain.contains(b))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Expr {
        parse(text).unwrap()
    }

    #[test]
    fn eval_identity_and_ln() {
        assert_eq!(p("x").eval(3.0).unwrap(), 3.0);
        assert_eq!(p("ln(x)").eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_rational() {
        // (4 + 1) / 2
        assert_eq!(p("(x^2+1)/x").eval(2.0).unwrap(), 2.5);
    }

    #[test]
    fn eval_domain_errors() {
        assert!(matches!(
            p("ln(x)").eval(-1.0),
            Err(Error::Domain { op: "ln", .. })
        ));
        assert!(matches!(
            p("sqrt(x)").eval(-4.0),
            Err(Error::Domain { op: "sqrt", .. })
        ));
        assert!(matches!(
            p("1/x").eval(0.0),
            Err(Error::DivisionByZero { .. })
        ));
    }

    #[test]
    fn pow_integer_exponent_allows_negative_base() {
        assert_eq!(p("x^3").eval(-2.0).unwrap(), -8.0);
        assert!(matches!(
            p("x^0.5").eval(-2.0),
            Err(Error::Domain { op: "pow", .. })
        ));
    }

    #[test]
    fn piecewise_breakpoint_ownership() {
        let e = p("piecewise(x<0: x; x>=0: x+1)");
        assert_eq!(e.eval(-0.5).unwrap(), -0.5);
        assert_eq!(e.eval(0.0).unwrap(), 1.0);
        assert_eq!(e.eval(0.5).unwrap(), 1.5);
    }

    #[test]
    fn piecewise_left_inclusion() {
        let e = p("piecewise(x<=0: x; x>0: x+1)");
        assert_eq!(e.eval(0.0).unwrap(), 0.0);
        assert_eq!(e.eval(1e-12).unwrap(), 1.0 + 1e-12);
    }

    #[test]
    fn one_sided_limits_at_jump() {
        let e = p("piecewise(x<0: x; x>=0: x+1)");
        let (l, r) = e.one_sided_limits(0.0).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(r, 1.0);
        let (l, r) = e.one_sided_limits(0.5).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn monotone_classification() {
        let dom = Interval::new(0.0, 1.0).unwrap();
        assert_eq!(
            check_strict_monotone(&p("x"), &dom, 100).unwrap(),
            MonotoneCheck::Increasing
        );
        assert_eq!(
            check_strict_monotone(&p("-x"), &dom, 100).unwrap(),
            MonotoneCheck::Decreasing
        );
        let dom2 = Interval::new(-1.0, 1.0).unwrap();
        match check_strict_monotone(&p("x*x"), &dom2, 100).unwrap() {
            MonotoneCheck::Violation { x1, x2 } => {
                assert!(x1 < 0.1 && x2 < 0.1, "violation near 0, got {x1}, {x2}");
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn jump_generator_is_certified_increasing() {
        let dom = Interval::new(-1.0, 1.0).unwrap();
        let f = MonotoneFn::new(p("piecewise(x<0: x; x>=0: x+1)"), dom, Direction::Increasing);
        assert!(f.is_ok());
    }

    #[test]
    fn interval_clamping() {
        let dom = Interval::new(0.0, f64::INFINITY).unwrap();
        let (a, b) = dom.clamped();
        assert!(a > 0.0 && a < 1e-8);
        assert_eq!(b, ENDPOINT_CLAMP - 1e-9);
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn substitute_composes() {
        let outer = p("ln(x)");
        let inner = p("x+1");
        let composed = outer.substitute(&inner);
        assert!((composed.eval(0.0).unwrap() - 0.0).abs() < 1e-15);
        assert!((composed.eval(1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }
}
