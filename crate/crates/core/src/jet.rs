//! Truncated second-order Taylor jets in four variables.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian. The
//! coefficient type is itself generic over [`Real`], so nesting
//! `Jet2<Jet2<f64>>` yields exact derivatives up to fourth order, which is
//! what curvature of a Kähler potential needs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const DIM: usize = 4;

/// Scalar arithmetic that metric and potential formulas are written against.
pub trait Real:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Plain value with all derivative information dropped.
    fn re(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;

    fn scale(&self, k: f64) -> Self {
        self.clone() * Self::cst(k)
    }

    fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::cst(1.0);
        }
        let mut base = if n < 0 { Self::cst(1.0) / self.clone() } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc: Option<Self> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a * base.clone(),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc.unwrap_or_else(|| Self::cst(1.0))
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

#[derive(Clone, Debug)]
pub struct Jet2<T> {
    pub v: T,
    pub g: [T; DIM],
    pub h: [[T; DIM]; DIM],
}

impl<T: Real> Jet2<T> {
    pub fn constant(v: T) -> Self {
        let z = T::cst(0.0);
        Jet2 {
            v,
            g: std::array::from_fn(|_| z.clone()),
            h: std::array::from_fn(|_| std::array::from_fn(|_| z.clone())),
        }
    }

    /// The coordinate function `x_index` evaluated at `v`.
    pub fn variable(v: T, index: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[index] = T::cst(1.0);
        j
    }

    /// Composition `f(self)` given `f`, `f'`, `f''` at the current value.
    fn chain(&self, f0: T, f1: T, f2: T) -> Self {
        let g: [T; DIM] = std::array::from_fn(|i| f1.clone() * self.g[i].clone());
        let mut h: [[T; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| T::cst(0.0)));
        for i in 0..DIM {
            for j in i..DIM {
                let v = f1.clone() * self.h[i][j].clone() + f2.clone() * self.g[i].clone() * self.g[j].clone();
                h[i][j] = v.clone();
                h[j][i] = v;
            }
        }
        Jet2 { v: f0, g, h }
    }

    fn recip(&self) -> Self {
        let inv = T::cst(1.0) / self.v.clone();
        let inv2 = inv.clone() * inv.clone();
        let f1 = -inv2.clone();
        let f2 = inv2 * inv.clone() * T::cst(2.0);
        self.chain(inv, f1, f2)
    }
}

impl<T: Real> Add for Jet2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Jet2 {
            v: self.v + o.v,
            g: std::array::from_fn(|i| self.g[i].clone() + o.g[i].clone()),
            h: std::array::from_fn(|i| std::array::from_fn(|j| self.h[i][j].clone() + o.h[i][j].clone())),
        }
    }
}

impl<T: Real> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Jet2 {
            v: self.v - o.v,
            g: std::array::from_fn(|i| self.g[i].clone() - o.g[i].clone()),
            h: std::array::from_fn(|i| std::array::from_fn(|j| self.h[i][j].clone() - o.h[i][j].clone())),
        }
    }
}

impl<T: Real> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet2 { v: -self.v, g: self.g.map(|x| -x), h: self.h.map(|row| row.map(|x| -x)) }
    }
}

impl<T: Real> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let g: [T; DIM] = std::array::from_fn(|i| self.g[i].clone() * o.v.clone() + self.v.clone() * o.g[i].clone());
        let mut h: [[T; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| T::cst(0.0)));
        for i in 0..DIM {
            for j in i..DIM {
                let v = self.h[i][j].clone() * o.v.clone()
                    + self.v.clone() * o.h[i][j].clone()
                    + self.g[i].clone() * o.g[j].clone()
                    + self.g[j].clone() * o.g[i].clone();
                h[i][j] = v.clone();
                h[j][i] = v;
            }
        }
        Jet2 { v: self.v * o.v, g, h }
    }
}

impl<T: Real> Div for Jet2<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real> Real for Jet2<T> {
    fn cst(v: f64) -> Self {
        Jet2::constant(T::cst(v))
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sin(&self) -> Self {
        let s = self.v.sin();
        let c = self.v.cos();
        self.chain(s.clone(), c, -s)
    }
    fn cos(&self) -> Self {
        let s = self.v.sin();
        let c = self.v.cos();
        self.chain(c.clone(), -s, -c)
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e.clone(), e.clone(), e)
    }
    fn ln(&self) -> Self {
        let inv = T::cst(1.0) / self.v.clone();
        let f2 = -(inv.clone() * inv.clone());
        self.chain(self.v.ln(), inv, f2)
    }
    fn sqrt(&self) -> Self {
        let r = self.v.sqrt();
        let f1 = T::cst(0.5) / r.clone();
        let f2 = -(f1.clone() / (self.v.clone() * T::cst(2.0)));
        self.chain(r, f1, f2)
    }
    fn scale(&self, k: f64) -> Self {
        Jet2 {
            v: self.v.scale(k),
            g: std::array::from_fn(|i| self.g[i].scale(k)),
            h: std::array::from_fn(|i| std::array::from_fn(|j| self.h[i][j].scale(k))),
        }
    }
}

/// Seeds a point as first-order variables of a single jet level.
pub fn seed(x: [f64; DIM]) -> [Jet2<f64>; DIM] {
    std::array::from_fn(|i| Jet2::variable(x[i], i))
}

/// Seeds a point for two nested jet levels (derivatives to fourth order).
pub fn seed_nested(x: [f64; DIM]) -> [Jet2<Jet2<f64>>; DIM] {
    std::array::from_fn(|i| {
        let mut outer = Jet2::constant(Jet2::variable(x[i], i));
        outer.g[i] = Jet2::constant(1.0);
        outer
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<T: Real>(x: &[T; DIM]) -> T {
        (x[0].clone() * x[1].clone()).sin() + x[2].exp() / (T::cst(1.0) + x[3].powi(2)).sqrt() - x[0].ln()
    }

    #[test]
    fn first_and_second_derivatives_match_finite_differences() {
        let p = [0.7, -0.3, 0.2, 1.1];
        let j = f(&seed(p));
        let h = 1e-4;
        for a in 0..DIM {
            let mut xp = p;
            let mut xm = p;
            xp[a] += h;
            xm[a] -= h;
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            assert!((fd - j.g[a]).abs() < 1e-7, "grad {a}");
            for b in 0..DIM {
                let mut xpp = p;
                let mut xpm = p;
                let mut xmp = p;
                let mut xmm = p;
                xpp[a] += h;
                xpp[b] += h;
                xpm[a] += h;
                xpm[b] -= h;
                xmp[a] -= h;
                xmp[b] += h;
                xmm[a] -= h;
                xmm[b] -= h;
                let fd2 = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h);
                assert!((fd2 - j.h[a][b]).abs() < 1e-5, "hess {a}{b}");
            }
        }
    }

    #[test]
    fn nested_jets_carry_third_derivatives() {
        // d^3/dx0^3 of sin(x0) is -cos(x0)
        let p = [0.4, 0.0, 0.0, 0.0];
        let j = seed_nested(p)[0].sin();
        assert!((j.h[0][0].g[0] + 0.4f64.cos()).abs() < 1e-14);
        assert!((j.h[0][0].h[0][0] - 0.4f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(2.0f64.powi(-2), 0.25);
        let j = Jet2::variable(3.0, 0).powi(3);
        assert!((j.v - 27.0).abs() < 1e-12);
        assert!((j.g[0] - 27.0).abs() < 1e-12);
        assert!((j.h[0][0] - 18.0).abs() < 1e-12);
        let k = Jet2::variable(2.0, 1).powi(-1);
        assert!((k.g[1] + 0.25).abs() < 1e-15);
    }
}
