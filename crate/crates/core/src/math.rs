//! Small fixed-size linear algebra and `libm` shims.

use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Point or vector in the plane. One-dimensional problems use `y = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        hypot(self.x, self.y)
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v.scale(self)
    }
}

/// General 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn scaled(s: f64) -> Self {
        Self::diag(s, s)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.a22 / d,
            -self.a12 / d,
            -self.a21 / d,
            self.a11 / d,
        ))
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a21 * v.x + self.a22 * v.y,
        )
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// `AᵀA` as a symmetric matrix.
    pub fn gram(&self) -> Sym2 {
        Sym2::new(
            self.a11 * self.a11 + self.a21 * self.a21,
            self.a11 * self.a12 + self.a21 * self.a22,
            self.a12 * self.a12 + self.a22 * self.a22,
        )
    }

    /// `A S Aᵀ` for symmetric `S`.
    pub fn congruence(&self, s: &Sym2) -> Sym2 {
        let m = self.mul(&s.to_mat()).mul(&self.transpose());
        Sym2::new(m.a11, 0.5 * (m.a12 + m.a21), m.a22)
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let d = [
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        ];
        d.iter().fold(0.0, |m, v| m.max(abs(*v)))
    }

    /// Largest singular value.
    pub fn norm2(&self) -> f64 {
        sqrt(self.gram().eigen().0.max(0.0))
    }

    /// Smallest singular value.
    pub fn min_singular(&self) -> f64 {
        sqrt(self.gram().eigen().1.max(0.0))
    }

    /// Symmetric positive-definite factor `P` of the polar decomposition `A = QP`.
    pub fn polar_spd(&self) -> Sym2 {
        self.gram().sqrt()
    }
}

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
///
/// One-dimensional fields store their scalar in `a11` and keep the other
/// entries at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2::new(1.0, 0.0, 1.0);

    #[inline]
    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Adjugate `[[a22, -a12], [-a12, a11]]`.
    #[inline]
    pub fn adjugate(&self) -> Sym2 {
        Sym2::new(self.a22, -self.a12, self.a11)
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.a11, self.a12, self.a12, self.a22)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        self.to_mat().apply(v)
    }

    /// `vᵀ S v`.
    #[inline]
    pub fn quad(&self, v: Vec2) -> f64 {
        self.a11 * v.x * v.x + 2.0 * self.a12 * v.x * v.y + self.a22 * v.y * v.y
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    pub fn inverse(&self) -> Option<Sym2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(1.0 / d))
    }

    /// Eigenvalues `(max, min)`.
    pub fn eigen(&self) -> (f64, f64) {
        let m = 0.5 * (self.a11 + self.a22);
        let d = hypot(0.5 * (self.a11 - self.a22), self.a12);
        (m + d, m - d)
    }

    /// Eigenvalues `(max, min)` with unit eigenvectors.
    pub fn eigen_vectors(&self) -> ((f64, Vec2), (f64, Vec2)) {
        let (l1, l2) = self.eigen();
        let v1 = if abs(self.a12) > 1e-300 {
            let v = Vec2::new(l1 - self.a22, self.a12);
            let w = Vec2::new(self.a12, l1 - self.a11);
            // pick the better conditioned representation
            let v = if v.norm2() >= w.norm2() { v } else { w };
            v.scale(1.0 / v.norm())
        } else if self.a11 >= self.a22 {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(0.0, 1.0)
        };
        let v2 = Vec2::new(-v1.y, v1.x);
        ((l1, v1), (l2, v2))
    }

    /// Principal square root of a positive semidefinite matrix.
    pub fn sqrt(&self) -> Sym2 {
        let ((l1, v1), (l2, v2)) = self.eigen_vectors();
        let s1 = sqrt(l1.max(0.0));
        let s2 = sqrt(l2.max(0.0));
        Sym2::new(
            s1 * v1.x * v1.x + s2 * v2.x * v2.x,
            s1 * v1.x * v1.y + s2 * v2.x * v2.y,
            s1 * v1.y * v1.y + s2 * v2.y * v2.y,
        )
    }

    pub fn max_abs_diff(&self, o: &Sym2) -> f64 {
        abs(self.a11 - o.a11)
            .max(abs(self.a12 - o.a12))
            .max(abs(self.a22 - o.a22))
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.a11 - o.a11, self.a12 - o.a12, self.a22 - o.a22)
    }
}

/// Dense solve of a small square system by Gaussian elimination with partial
/// pivoting. `a` is row-major `n×n`; returns `None` when singular.
pub fn dense_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    for col in 0..n {
        let mut piv = col;
        let mut best = abs(a[col * n + col]);
        for r in col + 1..n {
            let v = abs(a[r * n + col]);
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}
