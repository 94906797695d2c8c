//! Profile functions: the scalar ingredients of every shear flow.
//!
//! A profile is either a closed-form expression (exact symbolic derivatives)
//! or a C2 cubic spline (analytic spline derivatives). Twist and Morse-Bott
//! certificates depend on derivative quality, so finite differences are never
//! used here.

pub mod expr;

use crate::error::{Error, Result};
use crate::numerics::spline::{CubicSpline, SplineBc};
use crate::scalar::Real;
use expr::Expr;

/// Closed-form profile: the expression and its first three derivatives,
/// differentiated symbolically at construction.
#[derive(Clone, Debug)]
pub struct ClosedForm<T> {
    source: String,
    e: [Expr<T>; 4],
}

#[derive(Clone, Debug)]
pub enum Profile1D<T> {
    ClosedForm(ClosedForm<T>),
    Spline(CubicSpline<T>),
}

impl<T: Real> Profile1D<T> {
    pub fn parse(src: &str, var: &str) -> Result<Self> {
        let e0 = expr::parse::<T>(src, var)?;
        let e1 = e0.diff();
        let e2 = e1.diff();
        let e3 = e2.diff();
        Ok(Profile1D::ClosedForm(ClosedForm {
            source: src.to_string(),
            e: [e0, e1, e2, e3],
        }))
    }

    pub fn constant(c: T) -> Self {
        Profile1D::ClosedForm(ClosedForm {
            source: format!("{c}"),
            e: [
                Expr::Const(c),
                Expr::Const(T::zero()),
                Expr::Const(T::zero()),
                Expr::Const(T::zero()),
            ],
        })
    }

    pub fn spline(xs: Vec<T>, ys: Vec<T>, bc: SplineBc) -> Result<Self> {
        Ok(Profile1D::Spline(CubicSpline::new(xs, ys, bc)?))
    }

    /// Sample a closed-form profile onto a spline (used by tests to compare
    /// the two representations).
    pub fn resample_spline(&self, a: T, b: T, n: usize, bc: SplineBc) -> Result<Self> {
        let xs: Vec<T> = (0..=n)
            .map(|i| a + (b - a) * T::of(i as f64) / T::of(n as f64))
            .collect();
        let ys: Vec<T> = xs.iter().map(|&x| self.eval(x)).collect();
        Profile1D::spline(xs, ys, bc)
    }

    pub fn eval(&self, x: T) -> T {
        match self {
            Profile1D::ClosedForm(c) => c.e[0].eval(x),
            Profile1D::Spline(s) => s.eval(x),
        }
    }

    pub fn d1(&self, x: T) -> T {
        match self {
            Profile1D::ClosedForm(c) => c.e[1].eval(x),
            Profile1D::Spline(s) => s.deriv1(x),
        }
    }

    pub fn d2(&self, x: T) -> T {
        match self {
            Profile1D::ClosedForm(c) => c.e[2].eval(x),
            Profile1D::Spline(s) => s.deriv2(x),
        }
    }

    pub fn d3(&self, x: T) -> T {
        match self {
            Profile1D::ClosedForm(c) => c.e[3].eval(x),
            Profile1D::Spline(s) => s.deriv3(x),
        }
    }

    pub fn is_spline(&self) -> bool {
        matches!(self, Profile1D::Spline(_))
    }

    pub fn describe(&self) -> String {
        match self {
            Profile1D::ClosedForm(c) => c.source.clone(),
            Profile1D::Spline(s) => format!(
                "spline[{}..{}]",
                s.x_min().as_f64(),
                s.x_max().as_f64()
            ),
        }
    }

    /// Build from the profile JSON schema: an expression string or an array
    /// of `[x, y]` nodes.
    pub fn from_json(value: &serde_json::Value, var: &str, bc: SplineBc) -> Result<Self> {
        match value {
            serde_json::Value::String(s) => Self::parse(s, var),
            serde_json::Value::Number(n) => Ok(Self::constant(T::of(
                n.as_f64().ok_or_else(|| Error::Parse("bad number".into()))?,
            ))),
            serde_json::Value::Array(nodes) => {
                let mut xs = Vec::with_capacity(nodes.len());
                let mut ys = Vec::with_capacity(nodes.len());
                for node in nodes {
                    let pair = node.as_array().ok_or_else(|| {
                        Error::Parse("spline node must be a [x, y] pair".into())
                    })?;
                    if pair.len() != 2 {
                        return Err(Error::Parse("spline node must be a [x, y] pair".into()));
                    }
                    let x = pair[0]
                        .as_f64()
                        .ok_or_else(|| Error::Parse("spline node x must be a number".into()))?;
                    let y = pair[1]
                        .as_f64()
                        .ok_or_else(|| Error::Parse("spline node y must be a number".into()))?;
                    xs.push(T::of(x));
                    ys.push(T::of(y));
                }
                Self::spline(xs, ys, bc)
            }
            other => Err(Error::Parse(format!(
                "profile must be an expression string or node array, got {other}"
            ))),
        }
    }
}
