//! Second-order forward-mode jets: value, gradient and Hessian in up to
//! four variables, propagated exactly through arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A 2-jet in `n ≤ 4` variables: `f`, `∂f/∂xᵢ` and `∂²f/∂xᵢ∂xⱼ`.
///
/// The Hessian is kept exactly symmetric: every operation fills the upper
/// triangle and mirrors it.
#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub n: usize,
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

impl Jet2 {
    /// Constant jet: all derivatives zero.
    pub fn constant(value: f64, n: usize) -> Self {
        Jet2 {
            n,
            value,
            grad: [0.0; 4],
            hess: [[0.0; 4]; 4],
        }
    }

    /// Jet seeded for coordinate `i`: ∂xᵢ/∂xᵢ = 1.
    pub fn coordinate(value: f64, i: usize, n: usize) -> Self {
        debug_assert!(i < n && n <= 4);
        let mut j = Jet2::constant(value, n);
        j.grad[i] = 1.0;
        j
    }

    /// Unary chain rule: for `F = f(u)`,
    /// `F' = f'·u'` and `F'' = f'·u'' + f''·u'⊗u'`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        let mut out = Jet2::constant(f, self.n);
        for i in 0..self.n {
            out.grad[i] = df * self.grad[i];
        }
        for i in 0..self.n {
            for j in i..self.n {
                let h = df * self.hess[i][j] + ddf * self.grad[i] * self.grad[j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        let sech2 = 1.0 - t * t;
        self.chain(t, sech2, -2.0 * t * sech2)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * r * r))
    }

    /// |u|; the second derivative of the sign is ignored (valid away from 0).
    pub fn abs(self) -> Self {
        let s = if self.value < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.value.abs(), s, 0.0)
    }

    pub fn recip(self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    /// Integer power by repeated multiplication; valid for any base.
    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Jet2::constant(1.0, self.n);
        }
        let mut e = k.unsigned_abs();
        let mut base = self;
        let mut acc: Option<Jet2> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a * base,
                    None => base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        let p = acc.unwrap();
        if k < 0 {
            p.recip()
        } else {
            p
        }
    }

    /// General power `u^w = exp(w·ln u)`; requires `u > 0`.
    pub fn powf(self, rhs: Jet2) -> Self {
        (rhs * self.ln()).exp()
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.n, rhs.n);
        let mut out = Jet2::constant(self.value + rhs.value, self.n);
        for i in 0..self.n {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        for i in 0..self.n {
            for j in i..self.n {
                let h = self.hess[i][j] + rhs.hess[i][j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.n, rhs.n);
        let mut out = Jet2::constant(self.value - rhs.value, self.n);
        for i in 0..self.n {
            out.grad[i] = self.grad[i] - rhs.grad[i];
        }
        for i in 0..self.n {
            for j in i..self.n {
                let h = self.hess[i][j] - rhs.hess[i][j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    /// Leibniz to second order: `(fg)'' = f''g + f'⊗g' + g'⊗f' + fg''`.
    fn mul(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.n, rhs.n);
        let mut out = Jet2::constant(self.value * rhs.value, self.n);
        for i in 0..self.n {
            out.grad[i] = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        for i in 0..self.n {
            for j in i..self.n {
                let h = self.hess[i][j] * rhs.value
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.value * rhs.hess[i][j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        let mut out = Jet2::constant(-self.value, self.n);
        for i in 0..self.n {
            out.grad[i] = -self.grad[i];
        }
        for i in 0..self.n {
            for j in i..self.n {
                out.hess[i][j] = -self.hess[i][j];
                out.hess[j][i] = out.hess[i][j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn product_of_coordinates() {
        let x = Jet2::coordinate(3.0, 0, 2);
        let y = Jet2::coordinate(5.0, 1, 2);
        let p = x * y;
        assert_eq!(p.value, 15.0);
        assert_eq!(p.grad[0], 5.0);
        assert_eq!(p.grad[1], 3.0);
        assert_eq!(p.hess[0][1], 1.0);
        assert_eq!(p.hess[1][0], 1.0);
        assert_eq!(p.hess[0][0], 0.0);
    }

    #[test]
    fn sin_at_zero() {
        let x = Jet2::coordinate(0.0, 0, 1);
        let s = x.sin();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.grad[0], 1.0);
        assert_eq!(s.hess[0][0], 0.0);
    }

    #[test]
    fn powi_matches_powf_for_positive_base() {
        let x = Jet2::coordinate(1.7, 0, 1);
        let a = x.powi(5);
        let b = x.powf(Jet2::constant(5.0, 1));
        assert!(close(a.value, b.value, 1e-14));
        assert!(close(a.grad[0], b.grad[0], 1e-13));
        assert!(close(a.hess[0][0], b.hess[0][0], 1e-13));
    }

    #[test]
    fn powi_handles_negative_base_and_exponent() {
        let x = Jet2::coordinate(-2.0, 0, 1);
        let p = x.powi(-3);
        // d/dx x^-3 = -3 x^-4, d²/dx² = 12 x^-5
        assert!(close(p.value, -0.125, 1e-15));
        assert!(close(p.grad[0], -3.0 / 16.0, 1e-14));
        assert!(close(p.hess[0][0], 12.0 / -32.0, 1e-14));
    }

    #[test]
    fn hessian_stays_bitwise_symmetric() {
        let x = Jet2::coordinate(0.3, 0, 4);
        let y = Jet2::coordinate(0.7, 1, 4);
        let z = Jet2::coordinate(-0.2, 2, 4);
        let w = Jet2::coordinate(1.1, 3, 4);
        let f = (x * y + z.sin() * w.exp()) / (w * w + Jet2::constant(2.0, 4)) + (x + z).tanh();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(f.hess[i][j].to_bits(), f.hess[j][i].to_bits());
            }
        }
    }
}
