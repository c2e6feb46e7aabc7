//! Small fixed-size linear algebra: real 3×3 matrices, complex 3-vectors,
//! complex 2×2 matrices, and closed-form root finding for the real
//! characteristic cubic.
//!
//! Everything here is dimension 2 or 3, so closed forms beat general-purpose
//! decompositions both in accuracy and in dependency weight.

// fixed 3×3 kernels read better with explicit indices
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Hermitian inner product ⟨a,b⟩, conjugate-linear in the first argument.
pub fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn cnorm(a: &CVec3) -> f64 {
    cdot(a, a).re.sqrt()
}

/// Bilinear (unconjugated) cross product; c satisfies aᵀc = bᵀc = 0.
pub fn ccross(a: &CVec3, b: &CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn cscale(a: &CVec3, s: Complex64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn csub(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Unit standard basis vector e_k as a complex 3-vector.
pub fn cbasis(k: usize) -> CVec3 {
    let mut v = [C_ZERO; 3];
    v[k] = C_ONE;
    v
}

/// Real 3×3 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn zero() -> Self {
        Mat3([[0.0; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &Vec3) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j] + other.0[i][j];
            }
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j] * s;
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += self.0[i][k] * other.0[k][j];
                }
                m.0[i][j] = s;
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = dot(&self.0[i], v);
        }
        out
    }

    pub fn mul_cvec(&self, v: &CVec3) -> CVec3 {
        let mut out = [C_ZERO; 3];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry magnitude; used as the natural scale of the matrix.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Coefficients (a, b, c) of the characteristic polynomial
    /// λ³ + aλ² + bλ + c.
    pub fn characteristic_cubic(&self) -> (f64, f64, f64) {
        let m = &self.0;
        let a = -self.trace();
        let b = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
        let c = -self.det();
        (a, b, c)
    }

    /// Solve self · x = rhs by Gaussian elimination with partial pivoting.
    /// Returns None when a pivot vanishes (singular to working precision).
    pub fn solve(&self, rhs: &Vec3) -> Option<Vec3> {
        let mut a = self.0;
        let mut b = *rhs;
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[piv][col].abs() < f64::MIN_POSITIVE {
                return None;
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for row in (col + 1)..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = [0.0; 3];
        for row in (0..3).rev() {
            let mut s = b[row];
            for k in (row + 1)..3 {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        Some(x)
    }
}

/// Complex 3×3 matrix, row major.
#[derive(Debug, Clone, Copy)]
pub struct CMat3(pub [[Complex64; 3]; 3]);

impl CMat3 {
    pub fn from_real(m: &Mat3) -> Self {
        let mut out = [[C_ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = Complex64::new(m.0[i][j], 0.0);
            }
        }
        CMat3(out)
    }

    /// self − λ·I
    pub fn shift(&self, lambda: Complex64) -> Self {
        let mut out = *self;
        for i in 0..3 {
            out.0[i][i] -= lambda;
        }
        out
    }

    pub fn mul_vec(&self, v: &CVec3) -> CVec3 {
        let mut out = [C_ZERO; 3];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn row(&self, i: usize) -> CVec3 {
        self.0[i]
    }

    /// Solve self · x = rhs with partial pivoting. None on a vanishing pivot.
    pub fn solve(&self, rhs: &CVec3) -> Option<CVec3> {
        let mut a = self.0;
        let mut b = *rhs;
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&i, &j| a[i][col].norm_sqr().total_cmp(&a[j][col].norm_sqr()))
                .unwrap();
            if a[piv][col].norm_sqr() < f64::MIN_POSITIVE {
                return None;
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for row in (col + 1)..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = [C_ZERO; 3];
        for row in (0..3).rev() {
            let mut s = b[row];
            for k in (row + 1)..3 {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        Some(x)
    }
}

/// Complex 2×2 matrix, row major. The workhorse for density-matrix-level
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2c(pub [[Complex64; 2]; 2]);

impl Mat2c {
    pub fn zero() -> Self {
        Mat2c([[C_ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2c([[C_ONE, C_ZERO], [C_ZERO, C_ONE]])
    }

    /// Pauli matrix σ_k for k in 1..=3.
    pub fn pauli(k: usize) -> Self {
        match k {
            1 => Mat2c([[C_ZERO, C_ONE], [C_ONE, C_ZERO]]),
            2 => Mat2c([[C_ZERO, -C_I], [C_I, C_ZERO]]),
            3 => Mat2c([[C_ONE, C_ZERO], [C_ZERO, -C_ONE]]),
            _ => panic!("Pauli index must be 1, 2 or 3"),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][j] + other.0[i][j];
            }
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] *= s;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Mat2c([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.norm()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }
}

/// Root structure of a real cubic. Non-real roots always come as an exactly
/// conjugate pair; repeated roots are detected through the discriminant so
/// downstream code can reason about multiplicity instead of re-inferring it
/// from fuzzy comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicRoots {
    /// Three distinct real roots, ascending.
    ThreeReal([f64; 3]),
    /// One real root and the pair re ± i·im with im > 0.
    OneRealPair {
        real: f64,
        re: f64,
        im: f64,
    },
    /// A simple real root plus a real double root.
    DoubleReal {
        single: f64,
        double: f64,
    },
    TripleReal(f64),
}

impl CubicRoots {
    pub fn scaled(&self, s: f64) -> CubicRoots {
        match *self {
            CubicRoots::ThreeReal([x, y, z]) => CubicRoots::ThreeReal([x * s, y * s, z * s]),
            CubicRoots::OneRealPair { real, re, im } => CubicRoots::OneRealPair {
                real: real * s,
                re: re * s,
                im: im * s,
            },
            CubicRoots::DoubleReal { single, double } => CubicRoots::DoubleReal {
                single: single * s,
                double: double * s,
            },
            CubicRoots::TripleReal(x) => CubicRoots::TripleReal(x * s),
        }
    }

    pub fn as_complex(&self) -> [Complex64; 3] {
        match *self {
            CubicRoots::ThreeReal([x, y, z]) => [
                Complex64::new(x, 0.0),
                Complex64::new(y, 0.0),
                Complex64::new(z, 0.0),
            ],
            CubicRoots::OneRealPair { real, re, im } => [
                Complex64::new(real, 0.0),
                Complex64::new(re, -im),
                Complex64::new(re, im),
            ],
            CubicRoots::DoubleReal { single, double } => {
                let mut v = [single, double, double];
                v.sort_by(f64::total_cmp);
                [
                    Complex64::new(v[0], 0.0),
                    Complex64::new(v[1], 0.0),
                    Complex64::new(v[2], 0.0),
                ]
            }
            CubicRoots::TripleReal(x) => [Complex64::new(x, 0.0); 3],
        }
    }
}

/// A discriminant this close to zero (relative to its own magnitude scale)
/// is treated as an exact repeated root. Keeps the two branches of a
/// square-root branch point from leaking tiny spurious imaginary parts.
const DISC_REL_EPS: f64 = 1e-12;

/// Roots of λ³ + aλ² + bλ + c for real coefficients of order unity.
pub fn solve_cubic(a: f64, b: f64, c: f64) -> CubicRoots {
    // depressed form x³ + px + q with λ = x − a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;

    let four_p3 = 4.0 * p * p * p;
    let twenty7_q2 = 27.0 * q * q;
    let disc = -four_p3 - twenty7_q2;
    let disc_scale = four_p3.abs() + twenty7_q2;

    let roots = if disc_scale < 1e-30 {
        CubicRoots::TripleReal(0.0)
    } else if disc.abs() <= DISC_REL_EPS * disc_scale {
        // repeated root: x_double = -3q/(2p), x_single = 3q/p (p ≠ 0 here,
        // otherwise disc_scale would be ~27q² and disc = -27q² not ~0)
        let double = -3.0 * q / (2.0 * p);
        let single = 3.0 * q / p;
        CubicRoots::DoubleReal { single, double }
    } else if disc > 0.0 {
        // three distinct real roots; p < 0 is guaranteed
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let phi = arg.clamp(-1.0, 1.0).acos() / 3.0;
        let mut xs = [
            m * phi.cos(),
            m * (phi - 2.0 * std::f64::consts::PI / 3.0).cos(),
            m * (phi - 4.0 * std::f64::consts::PI / 3.0).cos(),
        ];
        xs.sort_by(f64::total_cmp);
        CubicRoots::ThreeReal(xs)
    } else {
        // one real root plus a conjugate pair (Cardano, cancellation-safe)
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let (u, v) = if q <= 0.0 {
            let u = (-q / 2.0 + s).cbrt();
            (u, if u == 0.0 { 0.0 } else { -p / (3.0 * u) })
        } else {
            let v = (-q / 2.0 - s).cbrt();
            (if v == 0.0 { 0.0 } else { -p / (3.0 * v) }, v)
        };
        let real = u + v;
        let re = -real / 2.0;
        let im = (3.0f64.sqrt() / 2.0) * (u - v);
        CubicRoots::OneRealPair {
            real,
            re,
            im: im.abs(),
        }
    };

    polish(undepress(roots, shift), a, b, c)
}

fn undepress(roots: CubicRoots, shift: f64) -> CubicRoots {
    match roots {
        CubicRoots::ThreeReal([x, y, z]) => {
            CubicRoots::ThreeReal([x - shift, y - shift, z - shift])
        }
        CubicRoots::OneRealPair { real, re, im } => CubicRoots::OneRealPair {
            real: real - shift,
            re: re - shift,
            im,
        },
        CubicRoots::DoubleReal { single, double } => CubicRoots::DoubleReal {
            single: single - shift,
            double: double - shift,
        },
        CubicRoots::TripleReal(x) => CubicRoots::TripleReal(x - shift),
    }
}

/// One guarded Newton step per simple root; repeated roots are left where the
/// closed form put them (Newton is ill-conditioned there) and conjugate pairs
/// are polished once and mirrored so pairing stays exact.
fn polish(roots: CubicRoots, a: f64, b: f64, c: f64) -> CubicRoots {
    let f = |x: Complex64| ((x + a) * x + b) * x + c;
    let df = |x: Complex64| (3.0 * x + 2.0 * a) * x + b;
    let step = |x: f64| -> f64 {
        let z = Complex64::new(x, 0.0);
        let d = df(z);
        if d.norm() > 1e-6 {
            let next = z - f(z) / d;
            next.re
        } else {
            x
        }
    };
    match roots {
        CubicRoots::ThreeReal([x, y, z]) => {
            let mut out = [step(x), step(y), step(z)];
            out.sort_by(f64::total_cmp);
            CubicRoots::ThreeReal(out)
        }
        CubicRoots::OneRealPair { real, re, im } => {
            let z = Complex64::new(re, im);
            let d = df(z);
            let z = if d.norm() > 1e-6 { z - f(z) / d } else { z };
            CubicRoots::OneRealPair {
                real: step(real),
                re: z.re,
                im: z.im.abs().max(f64::MIN_POSITIVE),
            }
        }
        CubicRoots::DoubleReal { single, double } => CubicRoots::DoubleReal {
            single: step(single),
            double,
        },
        CubicRoots::TripleReal(x) => CubicRoots::TripleReal(x),
    }
}

/// Eigenvalues of a real 3×3 matrix via the characteristic cubic, computed on
/// the entry-normalized matrix and rescaled.
pub fn eigenvalues3(m: &Mat3) -> CubicRoots {
    let scale = m.max_abs();
    if scale == 0.0 {
        return CubicRoots::TripleReal(0.0);
    }
    let (a, b, c) = m.scale(1.0 / scale).characteristic_cubic();
    solve_cubic(a, b, c).scaled(scale)
}

/// Shifted QR iteration on the (complexified) 3×3 matrix. Fallback path for
/// eigenvalues when the closed form leaves a residual above tolerance.
pub fn qr_eigenvalues3(m: &Mat3, max_iters: usize) -> [Complex64; 3] {
    let scale = m.max_abs();
    if scale == 0.0 {
        return [C_ZERO; 3];
    }
    let mut a = CMat3::from_real(&m.scale(1.0 / scale)).0;

    // Hessenberg form: rotate rows/cols 1,2 to kill a[2][0].
    let (c, s) = givens(a[1][0], a[2][0]);
    rot_rows(&mut a, 1, 2, c, s);
    rot_cols(&mut a, 1, 2, c, s);

    let eps = 1e-15;
    for _ in 0..max_iters {
        let sub0 = a[1][0].norm();
        let sub1 = a[2][1].norm();
        if sub1 <= eps * (a[1][1].norm() + a[2][2].norm()) {
            if sub0 <= eps * (a[0][0].norm() + a[1][1].norm()) {
                break;
            }
            // deflate to the leading 2×2 block
            let lam = quad_eigen(a[0][0], a[0][1], a[1][0], a[1][1]);
            let out = [lam.0, lam.1, a[2][2]];
            return rescale3(out, scale);
        }
        // Wilkinson shift from the trailing 2×2 block
        let (l1, l2) = quad_eigen(a[1][1], a[1][2], a[2][1], a[2][2]);
        let mu = if (l1 - a[2][2]).norm() < (l2 - a[2][2]).norm() {
            l1
        } else {
            l2
        };
        for i in 0..3 {
            a[i][i] -= mu;
        }
        // QR via two Givens rotations, then RQ
        let (c1, s1) = givens(a[0][0], a[1][0]);
        rot_rows(&mut a, 0, 1, c1, s1);
        let (c2, s2) = givens(a[1][1], a[2][1]);
        rot_rows(&mut a, 1, 2, c2, s2);
        rot_cols(&mut a, 0, 1, c1, s1);
        rot_cols(&mut a, 1, 2, c2, s2);
        for i in 0..3 {
            a[i][i] += mu;
        }
    }
    // read off what we have; solve any surviving trailing block exactly
    if a[2][1].norm() > 1e-12 {
        let (l1, l2) = quad_eigen(a[1][1], a[1][2], a[2][1], a[2][2]);
        return rescale3([a[0][0], l1, l2], scale);
    }
    rescale3([a[0][0], a[1][1], a[2][2]], scale)
}

fn rescale3(lams: [Complex64; 3], scale: f64) -> [Complex64; 3] {
    [lams[0] * scale, lams[1] * scale, lams[2] * scale]
}

fn quad_eigen(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * c).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let r = (f.norm_sqr() + g.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, C_ZERO);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, C_ONE);
    }
    let c = fn_ / r;
    let s = (f / fn_) * g.conj() / r;
    (c, s)
}

fn rot_rows(a: &mut [[Complex64; 3]; 3], i: usize, j: usize, c: f64, s: Complex64) {
    for k in 0..3 {
        let x = a[i][k];
        let y = a[j][k];
        a[i][k] = c * x + s * y;
        a[j][k] = -s.conj() * x + c * y;
    }
}

fn rot_cols(a: &mut [[Complex64; 3]; 3], i: usize, j: usize, c: f64, s: Complex64) {
    for k in 0..3 {
        let x = a[k][i];
        let y = a[k][j];
        a[k][i] = c * x + s.conj() * y;
        a[k][j] = -s * x + c * y;
    }
}
