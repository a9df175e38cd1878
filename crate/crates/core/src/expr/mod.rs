//! Complex-analytic expressions: AST, parser, evaluation, symbolic
//! derivatives and truncated Taylor jets.

mod parse;
mod series;

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{is_finite, Cx, Real};

pub use parse::SyntaxError;
pub use series::{homogeneous_part, Jet};

/// Default jet truncation order used by order detection and the blow-up.
pub const DEFAULT_JET_ORDER: usize = 32;

/// Denominators with modulus below this are treated as poles.
const POLE_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by a value of modulus {modulus:e}")]
    DivisionByZero { modulus: f64 },
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
}

/// Expression tree over the grammar `+ - * / ^ exp sin cos`, the variable
/// `z` and complex constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Constant(Cx<T>),
    Variable,
    Neg(Box<Expr<T>>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    Pow(Box<Expr<T>>, u32),
    Exp(Box<Expr<T>>),
    Sin(Box<Expr<T>>),
    Cos(Box<Expr<T>>),
}

impl<T: Real> Expr<T> {
    pub fn parse(source: &str) -> Result<Self, SyntaxError> {
        parse::parse(source)
    }

    pub fn constant(c: Cx<T>) -> Self {
        Expr::Constant(c)
    }

    pub fn real(x: T) -> Self {
        Expr::Constant(Complex::new(x, T::zero()))
    }

    fn as_constant(&self) -> Option<Cx<T>> {
        match self {
            Expr::Constant(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self.as_constant(), Some(c) if c.re == T::zero() && c.im == T::zero())
    }

    fn is_one(&self) -> bool {
        matches!(self.as_constant(), Some(c) if c.re == T::one() && c.im == T::zero())
    }

    /// `true` if any `Div` node occurs in the tree.
    pub fn has_division(&self) -> bool {
        match self {
            Expr::Constant(_) | Expr::Variable => false,
            Expr::Div(..) => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
                a.has_division()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.has_division() || b.has_division()
            }
        }
    }

    /// `true` if the variable `z` occurs in the tree.
    pub fn has_variable(&self) -> bool {
        match self {
            Expr::Constant(_) => false,
            Expr::Variable => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.has_variable(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_variable() || b.has_variable()
            }
        }
    }

    /// Every denominator occurring in a `Div` node, outermost first.
    pub fn denominators(&self) -> Vec<&Expr<T>> {
        let mut out = Vec::new();
        self.collect_denominators(&mut out);
        out
    }

    fn collect_denominators<'a>(&'a self, out: &mut Vec<&'a Expr<T>>) {
        match self {
            Expr::Constant(_) | Expr::Variable => {}
            Expr::Div(a, b) => {
                out.push(b);
                a.collect_denominators(out);
                b.collect_denominators(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
                a.collect_denominators(out)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_denominators(out);
                b.collect_denominators(out);
            }
        }
    }

    pub fn evaluate(&self, z: Cx<T>) -> Result<Cx<T>, EvalError> {
        let v = self.eval_raw(z)?;
        if is_finite(v) {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_raw(&self, z: Cx<T>) -> Result<Cx<T>, EvalError> {
        Ok(match self {
            Expr::Constant(c) => *c,
            Expr::Variable => z,
            Expr::Neg(a) => -a.eval_raw(z)?,
            Expr::Add(a, b) => a.eval_raw(z)? + b.eval_raw(z)?,
            Expr::Sub(a, b) => a.eval_raw(z)? - b.eval_raw(z)?,
            Expr::Mul(a, b) => a.eval_raw(z)? * b.eval_raw(z)?,
            Expr::Div(a, b) => {
                let d = b.eval_raw(z)?;
                let modulus = d.norm();
                if !(modulus >= T::lit(POLE_GUARD)) {
                    return Err(EvalError::DivisionByZero {
                        modulus: modulus.to_f64().unwrap_or(0.0),
                    });
                }
                a.eval_raw(z)? / d
            }
            Expr::Pow(a, n) => a.eval_raw(z)?.powu(*n),
            Expr::Exp(a) => a.eval_raw(z)?.exp(),
            Expr::Sin(a) => a.eval_raw(z)?.sin(),
            Expr::Cos(a) => a.eval_raw(z)?.cos(),
        })
    }

    /// Symbolic derivative with respect to `z`.
    pub fn derivative(&self) -> Self {
        match self {
            Expr::Constant(_) => Expr::real(T::zero()),
            Expr::Variable => Expr::real(T::one()),
            Expr::Neg(a) => neg(a.derivative()),
            Expr::Add(a, b) => add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Expr::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = sub(
                    mul(a.derivative(), (**b).clone()),
                    mul((**a).clone(), b.derivative()),
                );
                if num.is_zero() {
                    num
                } else {
                    Expr::Div(Box::new(num), Box::new(pow((**b).clone(), 2)))
                }
            }
            Expr::Pow(a, n) => match *n {
                0 => Expr::real(T::zero()),
                n => mul(
                    mul(
                        Expr::real(T::from_u32(n).unwrap_or_else(T::nan)),
                        pow((**a).clone(), n - 1),
                    ),
                    a.derivative(),
                ),
            },
            Expr::Exp(a) => mul(self.clone(), a.derivative()),
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.derivative()),
            Expr::Cos(a) => mul(neg(Expr::Sin(a.clone())), a.derivative()),
        }
    }

    /// Replaces every occurrence of `z` by `replacement`.
    pub fn substitute(&self, replacement: &Expr<T>) -> Self {
        let s = |e: &Expr<T>| Box::new(e.substitute(replacement));
        match self {
            Expr::Constant(c) => Expr::Constant(*c),
            Expr::Variable => replacement.clone(),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Pow(a, n) => Expr::Pow(s(a), *n),
            Expr::Exp(a) => Expr::Exp(s(a)),
            Expr::Sin(a) => Expr::Sin(s(a)),
            Expr::Cos(a) => Expr::Cos(s(a)),
        }
    }

    /// Truncated Taylor expansion `c_0 … c_order` at `base`, propagated
    /// through the tree as power series.
    pub fn taylor_jet(&self, base: Cx<T>, order: usize) -> Result<Jet<T>, EvalError> {
        let coefficients = self.series(base, order + 1)?;
        if coefficients.iter().any(|c| !is_finite(*c)) {
            return Err(EvalError::NonFinite);
        }
        Ok(Jet::new(base, coefficients))
    }

    fn series(&self, base: Cx<T>, len: usize) -> Result<Vec<Cx<T>>, EvalError> {
        let zero = Complex::new(T::zero(), T::zero());
        Ok(match self {
            Expr::Constant(c) => {
                let mut v = vec![zero; len];
                v[0] = *c;
                v
            }
            Expr::Variable => {
                let mut v = vec![zero; len];
                v[0] = base;
                if len > 1 {
                    v[1] = Complex::new(T::one(), T::zero());
                }
                v
            }
            Expr::Neg(a) => a.series(base, len)?.into_iter().map(|c| -c).collect(),
            Expr::Add(a, b) => {
                let (a, b) = (a.series(base, len)?, b.series(base, len)?);
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            }
            Expr::Sub(a, b) => {
                let (a, b) = (a.series(base, len)?, b.series(base, len)?);
                a.iter().zip(&b).map(|(x, y)| x - y).collect()
            }
            Expr::Mul(a, b) => series::mul(&a.series(base, len)?, &b.series(base, len)?),
            Expr::Div(a, b) => {
                let den = b.series(base, len)?;
                let modulus = den[0].norm();
                if !(modulus >= T::lit(POLE_GUARD)) {
                    return Err(EvalError::DivisionByZero {
                        modulus: modulus.to_f64().unwrap_or(0.0),
                    });
                }
                series::div(&a.series(base, len)?, &den)
            }
            Expr::Pow(a, n) => series::powu(&a.series(base, len)?, *n),
            Expr::Exp(a) => series::exp(&a.series(base, len)?),
            Expr::Sin(a) => series::sin_cos(&a.series(base, len)?).0,
            Expr::Cos(a) => series::sin_cos(&a.series(base, len)?).1,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn neg<T: Real>(a: Expr<T>) -> Expr<T> {
    match a {
        Expr::Constant(c) => Expr::Constant(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add<T: Real>(a: Expr<T>, b: Expr<T>) -> Expr<T> {
    if a.is_zero() {
        b
    } else if b.is_zero() {
        a
    } else if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        Expr::Constant(x + y)
    } else {
        Expr::Add(Box::new(a), Box::new(b))
    }
}

fn sub<T: Real>(a: Expr<T>, b: Expr<T>) -> Expr<T> {
    if b.is_zero() {
        a
    } else if a.is_zero() {
        neg(b)
    } else if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        Expr::Constant(x - y)
    } else {
        Expr::Sub(Box::new(a), Box::new(b))
    }
}

fn mul<T: Real>(a: Expr<T>, b: Expr<T>) -> Expr<T> {
    if a.is_zero() || b.is_zero() {
        Expr::real(T::zero())
    } else if a.is_one() {
        b
    } else if b.is_one() {
        a
    } else if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        Expr::Constant(x * y)
    } else if b.as_constant().is_some() {
        // keep constants on the left
        Expr::Mul(Box::new(b), Box::new(a))
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

fn pow<T: Real>(a: Expr<T>, n: u32) -> Expr<T> {
    match n {
        0 => Expr::real(T::one()),
        1 => a,
        n => Expr::Pow(Box::new(a), n),
    }
}

struct Number<T>(T);

impl<T: Real> fmt::Display for Number<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Display on floats never uses exponent notation, which the grammar lacks.
        write!(f, "{}", self.0.abs())
    }
}

fn write_constant<T: Real>(f: &mut fmt::Formatter<'_>, c: Cx<T>) -> fmt::Result {
    let zero = T::zero();
    let sign = |x: T| if x < zero { "-" } else { "+" };
    match (c.re == zero, c.im == zero) {
        (_, true) if c.re >= zero => write!(f, "{}", Number(c.re)),
        (_, true) => write!(f, "(-{})", Number(c.re)),
        (true, false) if c.im > zero => write!(f, "{}i", Number(c.im)),
        (true, false) => write!(f, "(-{}i)", Number(c.im)),
        (false, false) => write!(
            f,
            "({}{}{}{}i)",
            if c.re < zero { "-" } else { "" },
            Number(c.re),
            sign(c.im),
            Number(c.im)
        ),
    }
}

impl<T: Real> Expr<T> {
    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Prints the expression back in the input grammar; `parse(e.to_string())`
/// reproduces `e`.
impl<T: Real> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) => write_constant(f, *c),
            Expr::Variable => write!(f, "z"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_child(f, 1)?;
                write!(f, "{}", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                b.write_child(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.write_child(f, 3)
            }
            Expr::Pow(a, n) => {
                a.write_child(f, 5)?;
                write!(f, "^{n}")
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

/// A parsed field `F` together with its first two derivatives.
#[derive(Debug, Clone)]
pub struct FunctionModel<T> {
    source: String,
    expr: Expr<T>,
    first: Expr<T>,
    second: Expr<T>,
}

impl<T: Real> FunctionModel<T> {
    pub fn parse(source: &str) -> Result<Self, SyntaxError> {
        let expr = Expr::parse(source)?;
        Ok(Self::with_source(source.trim().to_string(), expr))
    }

    pub fn from_expr(expr: Expr<T>) -> Self {
        Self::with_source(expr.to_string(), expr)
    }

    fn with_source(source: String, expr: Expr<T>) -> Self {
        let first = expr.derivative();
        let second = first.derivative();
        Self {
            source,
            expr,
            first,
            second,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr<T> {
        &self.expr
    }

    pub fn derivative_expr(&self) -> &Expr<T> {
        &self.first
    }

    pub fn has_division(&self) -> bool {
        self.expr.has_division()
    }

    pub fn eval(&self, z: Cx<T>) -> Result<Cx<T>, EvalError> {
        self.expr.evaluate(z)
    }

    pub fn eval_derivative(&self, z: Cx<T>) -> Result<Cx<T>, EvalError> {
        self.first.evaluate(z)
    }

    pub fn eval_second_derivative(&self, z: Cx<T>) -> Result<Cx<T>, EvalError> {
        self.second.evaluate(z)
    }

    pub fn jet(&self, base: Cx<T>, order: usize) -> Result<Jet<T>, EvalError> {
        self.expr.taylor_jet(base, order)
    }

    /// The field `-F`, used for backward-time integration.
    pub fn negated(&self) -> Self {
        Self::from_expr(Expr::Neg(Box::new(self.expr.clone())))
    }

    /// The field `factor · F`.
    pub fn scaled(&self, factor: Cx<T>) -> Self {
        Self::from_expr(Expr::Mul(
            Box::new(Expr::Constant(factor)),
            Box::new(self.expr.clone()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    type E = Expr<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn eval(src: &str, z: Complex<f64>) -> Complex<f64> {
        E::parse(src).unwrap().evaluate(z).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(eval("i*z", c(2.0, 0.0)), c(0.0, 2.0));
        assert_eq!(eval("z^3*(z-1)^3", c(2.0, 0.0)), c(8.0, 0.0));
        assert_eq!(eval("z^3*(z-1)^3", c(0.5, 0.0)), c(-0.015625, 0.0));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = E::parse("1/z").unwrap();
        assert!(matches!(
            e.evaluate(c(0.0, 0.0)),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert!(matches!(
            e.taylor_jet(c(0.0, 0.0), 3),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert_eq!(e.evaluate(c(2.0, 0.0)).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn overflow_is_reported() {
        let e = E::parse("exp(z)").unwrap();
        assert_eq!(e.evaluate(c(1000.0, 0.0)), Err(EvalError::NonFinite));
    }

    #[test]
    fn jet_examples() {
        let jet = E::parse("exp(z)").unwrap().taylor_jet(c(0.0, 0.0), 3).unwrap();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0];
        assert_eq!(jet.coefficients().len(), 4);
        for (got, want) in jet.coefficients().iter().zip(expected) {
            assert_relative_eq!(got.re, want, epsilon = 1e-15);
            assert_eq!(got.im, 0.0);
        }

        let jet = E::parse("z^5*exp(z)").unwrap().taylor_jet(c(0.0, 0.0), 7).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.5];
        for (got, want) in jet.coefficients().iter().zip(expected) {
            assert_relative_eq!(got.re, want, epsilon = 1e-15);
        }

        let jet = E::parse("z^3*(z-1)^3").unwrap().taylor_jet(c(0.0, 0.0), 4).unwrap();
        let expected = [0.0, 0.0, 0.0, -1.0, 3.0];
        for (got, want) in jet.coefficients().iter().zip(expected) {
            assert_relative_eq!(got.re, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(E::parse("z^2").unwrap().derivative().to_string(), "2*z");
        assert_eq!(E::parse("exp(z)").unwrap().derivative().to_string(), "exp(z)");
        let d = E::parse("i*z").unwrap().derivative();
        assert_eq!(d.evaluate(c(7.0, 0.0)).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn display_round_trips_awkward_constants() {
        for src in ["-z^2", "(-1.5)*z", "(0.25-3i)*z", "z-(z-1)", "z/(z*z)", "-(z+1)"] {
            let e = E::parse(src).unwrap();
            assert_eq!(E::parse(&e.to_string()).unwrap(), e, "{src}");
        }
        let e = E::Mul(
            Box::new(E::Constant(c(-1e-10, 2.5))),
            Box::new(E::Sub(
                Box::new(E::Variable),
                Box::new(E::Sub(Box::new(E::Variable), Box::new(E::real(1.0)))),
            )),
        );
        let reparsed = E::parse(&e.to_string()).unwrap();
        let z = c(0.3, 0.9);
        assert_eq!(reparsed.evaluate(z).unwrap(), e.evaluate(z).unwrap());
    }

    #[test]
    fn model_negation_and_scaling() {
        let f = FunctionModel::<f64>::parse("z^2").unwrap();
        let z = c(0.3, -0.7);
        assert_eq!(f.negated().eval(z).unwrap(), -f.eval(z).unwrap());
        assert_eq!(
            f.scaled(c(0.0, 1.0)).eval(z).unwrap(),
            c(0.0, 1.0) * f.eval(z).unwrap()
        );
        assert_eq!(f.eval_second_derivative(z).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn f32_pipeline_works() {
        let e = Expr::<f32>::parse("z^3*(z-1)^3").unwrap();
        assert_eq!(e.evaluate(Complex::new(2.0f32, 0.0)).unwrap().re, 8.0);
        let jet = e.taylor_jet(Complex::new(0.0f32, 0.0), 4).unwrap();
        assert_eq!(jet.coefficients()[3].re, -1.0);
    }

    fn arb_expr() -> impl Strategy<Value = E> {
        let leaf = prop_oneof![
            Just(E::Variable),
            (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| E::Constant(c(a, b))),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| E::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), 0u32..4).prop_map(|(a, n)| E::Pow(Box::new(a), n)),
                inner.clone().prop_map(|a| E::Exp(Box::new(a))),
                inner.clone().prop_map(|a| E::Sin(Box::new(a))),
                inner.prop_map(|a| E::Cos(Box::new(a))),
            ]
        })
    }

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|x| x as f64).product()
    }

    fn rel_close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    proptest! {
        #[test]
        fn jet_matches_repeated_symbolic_derivative(
            e in arb_expr(),
            re in -1.0..1.0f64,
            im in -1.0..1.0f64,
        ) {
            let base = c(re, im);
            let jet = e.taylor_jet(base, 4).unwrap();
            let mut d = e.clone();
            for k in 0..=4 {
                let symbolic = d.evaluate(base).unwrap();
                let from_jet = jet.coefficients()[k] * factorial(k);
                prop_assert!(rel_close(symbolic, from_jet, 1e-9), "k={k} {symbolic} vs {from_jet}");
                d = d.derivative();
            }
        }

        #[test]
        fn printed_expressions_reparse_to_the_same_function(
            e in arb_expr(),
            re in -1.0..1.0f64,
            im in -1.0..1.0f64,
        ) {
            let printed = e.to_string();
            let reparsed = E::parse(&printed).unwrap();
            let z = c(re, im);
            prop_assert!(rel_close(reparsed.evaluate(z).unwrap(), e.evaluate(z).unwrap(), 1e-12));
            let again = reparsed.to_string();
            prop_assert_eq!(E::parse(&again).unwrap().to_string(), again);
        }

        #[test]
        fn product_jet_is_truncated_convolution(
            f in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6),
            g in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6),
            re in -1.0..1.0f64,
            im in -1.0..1.0f64,
        ) {
            let poly = |coeffs: &[(f64, f64)]| {
                coeffs.iter().rev().fold(E::real(0.0), |acc, &(a, b)| {
                    E::Add(
                        Box::new(E::Mul(Box::new(acc), Box::new(E::Variable))),
                        Box::new(E::Constant(c(a, b))),
                    )
                })
            };
            let (pf, pg) = (poly(&f), poly(&g));
            let base = c(re, im);
            let k = 8;
            let jf = pf.taylor_jet(base, k).unwrap();
            let jg = pg.taylor_jet(base, k).unwrap();
            let jp = E::Mul(Box::new(pf), Box::new(pg)).taylor_jet(base, k).unwrap();
            for n in 0..=k {
                let conv: Complex<f64> = (0..=n)
                    .map(|j| jf.coefficients()[j] * jg.coefficients()[n - j])
                    .sum();
                prop_assert!(rel_close(jp.coefficients()[n], conv, 1e-14));
            }
        }

        #[test]
        fn shifted_jet_equals_jet_of_substituted_expression(
            e in arb_expr(),
            re in -1.0..1.0f64,
            im in -1.0..1.0f64,
        ) {
            let a = c(re, im);
            let direct = e.taylor_jet(a, 6).unwrap();
            let shifted_src = e
                .substitute(&E::Add(Box::new(E::Variable), Box::new(E::Constant(a))))
                .to_string();
            let shifted = E::parse(&shifted_src).unwrap().taylor_jet(c(0.0, 0.0), 6).unwrap();
            for (x, y) in direct.coefficients().iter().zip(shifted.coefficients()) {
                prop_assert!(rel_close(*x, *y, 1e-10));
            }
        }
    }
}
