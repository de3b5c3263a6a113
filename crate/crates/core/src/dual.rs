//! Forward-mode dual numbers over a generic scalar.
//!
//! `Dual<S>` carries a value and one partial derivative per coordinate. The
//! derivative vector may be shorter than the number of coordinates; missing
//! slots are zero, so a lifted constant is simply an empty vector. Nesting
//! (`Dual<Dual<f64>>`) yields exact second derivatives.

use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by the expression evaluator and the tensor kernels.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    /// Real part (innermost value).
    fn value(&self) -> f64;
    fn scale(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    /// True when the value and every derivative component are finite.
    fn is_finite(&self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn tan(&self) -> Self {
        libm::tan(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        libm::pow(*self, n as f64)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Value plus gradient with respect to the chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S = f64> {
    pub value: S,
    pub derivatives: Vec<S>,
}

impl<S: Scalar> Dual<S> {
    pub fn constant(value: S) -> Self {
        Dual {
            value,
            derivatives: Vec::new(),
        }
    }

    /// The `index`-th coordinate variable seeded at `value`.
    pub fn variable(value: S, index: usize, dim: usize) -> Self {
        let mut derivatives = alloc::vec![S::zero(); dim];
        derivatives[index] = S::from_f64(1.0);
        Dual { value, derivatives }
    }

    /// Seeds every coordinate of `point` as an independent variable.
    pub fn seed(point: &[S]) -> Vec<Self> {
        let dim = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, v)| Dual::variable(v.clone(), i, dim))
            .collect()
    }

    /// Partial derivative `i` (zero when the slot is absent).
    pub fn partial(&self, i: usize) -> S {
        self.derivatives.get(i).cloned().unwrap_or_else(S::zero)
    }

    /// Gradient padded to `dim` slots.
    pub fn gradient(&self, dim: usize) -> Vec<S> {
        (0..dim).map(|i| self.partial(i)).collect()
    }

    /// Chain rule for a unary function with derivative `slope` at the value.
    fn chain(&self, value: S, slope: S) -> Self {
        Dual {
            value,
            derivatives: self.derivatives.iter().map(|d| d.clone() * slope.clone()).collect(),
        }
    }
}

fn merge<S: Scalar>(
    a: &[S],
    b: &[S],
    both: impl Fn(&S, &S) -> S,
    only_a: impl Fn(&S) -> S,
    only_b: impl Fn(&S) -> S,
) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => both(x, y),
            (Some(x), None) => only_a(x),
            (None, Some(y)) => only_b(y),
            (None, None) => unreachable!(),
        })
        .collect()
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual {
            value: self.value + rhs.value,
            derivatives: merge(
                &self.derivatives,
                &rhs.derivatives,
                |x, y| x.clone() + y.clone(),
                S::clone,
                S::clone,
            ),
        }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual {
            value: self.value - rhs.value,
            derivatives: merge(
                &self.derivatives,
                &rhs.derivatives,
                |x, y| x.clone() - y.clone(),
                S::clone,
                |y| -y.clone(),
            ),
        }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (av, bv) = (&self.value, &rhs.value);
        Dual {
            derivatives: merge(
                &self.derivatives,
                &rhs.derivatives,
                |x, y| x.clone() * bv.clone() + av.clone() * y.clone(),
                |x| x.clone() * bv.clone(),
                |y| av.clone() * y.clone(),
            ),
            value: av.clone() * bv.clone(),
        }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let value = self.value.clone() / rhs.value.clone();
        let bv = &rhs.value;
        let q = &value;
        Dual {
            derivatives: merge(
                &self.derivatives,
                &rhs.derivatives,
                |x, y| (x.clone() - q.clone() * y.clone()) / bv.clone(),
                |x| x.clone() / bv.clone(),
                |y| -(q.clone() * y.clone()) / bv.clone(),
            ),
            value,
        }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            value: -self.value,
            derivatives: self.derivatives.into_iter().map(|d| -d).collect(),
        }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(c: f64) -> Self {
        Dual::constant(S::from_f64(c))
    }
    fn value(&self) -> f64 {
        self.value.value()
    }
    fn scale(&self, c: f64) -> Self {
        Dual {
            value: self.value.scale(c),
            derivatives: self.derivatives.iter().map(|d| d.scale(c)).collect(),
        }
    }
    fn sin(&self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn tan(&self) -> Self {
        let t = self.value.tan();
        let slope = S::from_f64(1.0) + t.clone() * t.clone();
        self.chain(t, slope)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e.clone(), e)
    }
    fn ln(&self) -> Self {
        let slope = S::from_f64(1.0) / self.value.clone();
        self.chain(self.value.ln(), slope)
    }
    fn sqrt(&self) -> Self {
        let r = self.value.sqrt();
        let slope = S::from_f64(0.5) / r.clone();
        self.chain(r, slope)
    }
    fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::from_f64(1.0);
        }
        let slope = self.value.powi(n - 1).scale(n as f64);
        self.chain(self.value.powi(n), slope)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.derivatives.iter().all(Scalar::is_finite)
    }
}

/// Lifts a point of scalars one differentiation level up.
pub fn lift<S: Scalar>(point: &[S]) -> Vec<Dual<S>> {
    Dual::seed(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_zero_gradient() {
        let c = Dual::<f64>::from_f64(3.5);
        assert_eq!(c.gradient(3), alloc::vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn product_rule() {
        let p = Dual::seed(&[2.0, 3.0, 0.0]);
        let r = p[0].clone() * p[1].clone();
        assert_eq!(r.value, 6.0);
        assert_eq!(r.gradient(3), alloc::vec![3.0, 2.0, 0.0]);
    }

    #[test]
    fn quotient_rule() {
        let p = Dual::seed(&[1.0, 2.0]);
        let r = p[0].clone() / p[1].clone();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.gradient(2), alloc::vec![0.5, -0.25]);
    }

    #[test]
    fn nested_gives_second_derivative() {
        // f = x^3 y ; f_xx = 6 x y, f_xy = 3 x^2
        let inner = Dual::seed(&[2.0, 5.0]);
        let outer = Dual::seed(&inner);
        let f = outer[0].powi(3) * outer[1].clone();
        let fx = f.partial(0);
        assert_eq!(fx.value, 3.0 * 4.0 * 5.0);
        assert_eq!(fx.partial(0), 6.0 * 2.0 * 5.0);
        assert_eq!(fx.partial(1), 12.0);
        let fy = f.partial(1);
        assert_eq!(fy.partial(0), 12.0);
    }

    #[test]
    fn mismatched_lengths_pad_with_zero() {
        let a = Dual::variable(1.0, 2, 3);
        let b = Dual::from_f64(4.0);
        let r = b - a;
        assert_eq!(r.gradient(3), alloc::vec![0.0, 0.0, -1.0]);
    }
}
