//! Reference-frame transformations between the three-phase (a,b,c), the
//! stationary (α,β) and the rotating (d,q) frames.
//!
//! The Clarke transformation is amplitude invariant (scaled by 2/3). Angles
//! are plain radians and are never wrapped.

use std::ops::{Add, Mul, Neg, Sub};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// A three-phase quantity (voltage, current or flux).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// A quantity in the stationary (α,β) frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

/// A quantity in the rotating (d,q) frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dq {
    pub d: f64,
    pub q: f64,
}

impl Abc {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    pub fn get(&self, index: usize) -> f64 {
        self.to_array()[index]
    }
}

impl AlphaBeta {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn norm(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    /// Angle of the vector in (−π, π].
    pub fn angle(&self) -> f64 {
        self.beta.atan2(self.alpha)
    }
}

impl Dq {
    pub const fn new(d: f64, q: f64) -> Self {
        Self { d, q }
    }

    pub fn norm(&self) -> f64 {
        self.d.hypot(self.q)
    }
}

macro_rules! impl_linear {
    ($ty:ident { $($f:ident),+ }) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                $ty { $($f: self.$f + rhs.$f),+ }
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                $ty { $($f: self.$f - rhs.$f),+ }
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty { $($f: -self.$f),+ }
            }
        }
        impl Mul<$ty> for f64 {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                $ty { $($f: self * rhs.$f),+ }
            }
        }
    };
}

impl_linear!(Abc { a, b, c });
impl_linear!(AlphaBeta { alpha, beta });
impl_linear!(Dq { d, q });

/// Amplitude-invariant Clarke transformation.
pub fn clarke(x: Abc) -> AlphaBeta {
    AlphaBeta {
        alpha: (2.0 / 3.0) * (x.a - 0.5 * x.b - 0.5 * x.c),
        beta: (2.0 / 3.0) * (SQRT_3 / 2.0) * (x.b - x.c),
    }
}

/// Inverse Clarke transformation. The result always sums to zero.
pub fn inverse_clarke(x: AlphaBeta) -> Abc {
    let half_sqrt3_beta = 0.5 * SQRT_3 * x.beta;
    Abc {
        a: x.alpha,
        b: -0.5 * x.alpha + half_sqrt3_beta,
        c: -0.5 * x.alpha - half_sqrt3_beta,
    }
}

/// Rotates a stationary vector by `-phi_k` into the rotating frame.
pub fn park(x: AlphaBeta, phi_k: f64) -> Dq {
    let (s, c) = phi_k.sin_cos();
    Dq {
        d: c * x.alpha + s * x.beta,
        q: -s * x.alpha + c * x.beta,
    }
}

/// Rotates a rotating-frame vector by `phi_k` back into the stationary frame.
pub fn inverse_park(x: Dq, phi_k: f64) -> AlphaBeta {
    let (s, c) = phi_k.sin_cos();
    AlphaBeta {
        alpha: c * x.d - s * x.q,
        beta: s * x.d + c * x.q,
    }
}

/// Clarke followed by Park.
pub fn abc_to_dq(x: Abc, phi_k: f64) -> Dq {
    park(clarke(x), phi_k)
}

/// Inverse Park followed by inverse Clarke.
pub fn dq_to_abc(x: Dq, phi_k: f64) -> Abc {
    inverse_clarke(inverse_park(x, phi_k))
}
