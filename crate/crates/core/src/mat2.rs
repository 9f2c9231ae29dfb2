//! Dense real 2×2 matrices.
//!
//! Everything in this crate lives on a two-dimensional phase space
//! `z = (x, p)`, so a fixed-size array type with a handful of hand-written
//! operations covers all linear algebra needs.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Row-major real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// The symplectic form `Λ = [[0, 1], [-1, 0]]`.
pub const LAMBDA: Mat2 = Mat2([[0.0, 1.0], [-1.0, 0.0]]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Mat2([[d1, 0.0], [0.0, d2]])
    }

    #[inline]
    pub fn m11(&self) -> f64 {
        self.0[0][0]
    }
    #[inline]
    pub fn m12(&self) -> f64 {
        self.0[0][1]
    }
    #[inline]
    pub fn m21(&self) -> f64 {
        self.0[1][0]
    }
    #[inline]
    pub fn m22(&self) -> f64 {
        self.0[1][1]
    }

    pub fn trace(&self) -> f64 {
        self.m11() + self.m22()
    }

    pub fn det(&self) -> f64 {
        self.m11() * self.m22() - self.m12() * self.m21()
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.m11(), self.m21(), self.m12(), self.m22())
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(s * self.m11(), s * self.m12(), s * self.m21(), s * self.m22())
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        [
            self.m11() * z[0] + self.m12() * z[1],
            self.m21() * z[0] + self.m22() * z[1],
        ]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Mat2::IDENTITY;
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            k >>= 1;
        }
        result
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor
    /// series.
    ///
    /// This is a general-purpose routine with no knowledge of the trace-free
    /// structure of the generators it is usually applied to, which makes it
    /// usable as an independent check on closed-form logarithms.
    pub fn expm(&self) -> Self {
        let norm = self.0.iter().map(|r| r[0].abs() + r[1].abs()).fold(0.0, f64::max);
        let mut squarings = 0u32;
        if norm > 0.25 {
            squarings = (norm / 0.25).log2().ceil() as u32;
        }
        let a = self.scale(0.5_f64.powi(squarings as i32));
        let mut term = Mat2::IDENTITY;
        let mut sum = Mat2::IDENTITY;
        for k in 1..=24 {
            term = (term * a).scale(1.0 / k as f64);
            sum = sum + term;
            if term.max_abs() < 1e-20 * sum.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11() + rhs.m11(),
            self.m12() + rhs.m12(),
            self.m21() + rhs.m21(),
            self.m22() + rhs.m22(),
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}
