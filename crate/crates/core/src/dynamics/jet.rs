//! Second-order forward-mode jets in two variables.
//!
//! A `Jet` carries a value together with its gradient and Hessian with
//! respect to `(q₁, q₂)`. Arithmetic applies the chain rule exactly, so any
//! composition of the supported operations yields analytic first and second
//! derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 2],
    /// Upper triangle `(h11, h12, h22)`.
    pub h: [f64; 3],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; 2], h: [0.0; 3] }
    }

    /// The independent variable `q_i` with value `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut g = [0.0; 2];
        g[i] = 1.0;
        Jet { v, g, h: [0.0; 3] }
    }

    /// Apply a scalar function given its value and first two derivatives.
    #[inline]
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let [g1, g2] = self.g;
        Jet {
            v: f,
            g: [df * g1, df * g2],
            h: [
                df * self.h[0] + d2f * g1 * g1,
                df * self.h[1] + d2f * g1 * g2,
                df * self.h[2] + d2f * g2 * g2,
            ],
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Jet {
            v: s * self.v,
            g: [s * self.g[0], s * self.g[1]],
            h: [s * self.h[0], s * self.h[1], s * self.h[2]],
        }
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn atan(self) -> Self {
        let x = self.v;
        let d = 1.0 / (1.0 + x * x);
        self.chain(x.atan(), d, -2.0 * x * d * d)
    }

    pub fn atanh(self) -> Self {
        let x = self.v;
        let d = 1.0 / (1.0 - x * x);
        self.chain(x.atanh(), d, 2.0 * x * d * d)
    }

    pub fn ln(self) -> Self {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.h[0], self.h[1]], [self.h[1], self.h[2]]]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1]],
            h: [self.h[0] + o.h[0], self.h[1] + o.h[1], self.h[2] + o.h[2]],
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self, o);
        Jet {
            v: a.v * b.v,
            g: [a.v * b.g[0] + b.v * a.g[0], a.v * b.g[1] + b.v * a.g[1]],
            h: [
                a.v * b.h[0] + b.v * a.h[0] + 2.0 * a.g[0] * b.g[0],
                a.v * b.h[1] + b.v * a.h[1] + a.g[0] * b.g[1] + a.g[1] * b.g[0],
                a.v * b.h[2] + b.v * a.h[2] + 2.0 * a.g[1] * b.g[1],
            ],
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}
