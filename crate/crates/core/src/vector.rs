//! Small fixed-size vector helpers for real and complex 3-vectors.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const CZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// Bilinear dot product `a · b` (no conjugation).
pub fn cdot(a: &CVec3, b: &CVec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian product `a* · b`.
pub fn hdot(a: &CVec3, b: &CVec3) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn ccross(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn cconj(a: &CVec3) -> CVec3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

pub fn creal(a: Vec3) -> CVec3 {
    [a[0].into(), a[1].into(), a[2].into()]
}

pub fn cnorm_sqr(a: &CVec3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}
