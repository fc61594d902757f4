//! Conformal points and the primitives spanned by them.

use super::blade::{self, E0, E1, E2, E3, EINF};
use super::multivector::Multivector;
use crate::error::{Error, Result};
use crate::math::sqrt;

/// `P = e0 + x + ½|x|² e∞`.
pub fn embed_point(x: [f64; 3]) -> Multivector {
    let half_sq = 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    Multivector::vector(x, 1.0, half_sq)
}

/// Euclidean position of a (possibly scaled) conformal point.
pub fn extract_point(p: &Multivector) -> Result<[f64; 3]> {
    let weight = -(Multivector::einf() | *p).scalar_part();
    if weight == 0.0 {
        return Err(Error::PointAtInfinity);
    }
    Ok([
        p[blade::index(E1)] / weight,
        p[blade::index(E2)] / weight,
        p[blade::index(E3)] / weight,
    ])
}

pub fn point_pair(a: [f64; 3], b: [f64; 3]) -> Multivector {
    embed_point(a) ^ embed_point(b)
}

/// Circle through three points (outer product null space).
pub fn circle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Multivector {
    embed_point(a) ^ embed_point(b) ^ embed_point(c)
}

/// Plane through three points: `P1 ∧ P2 ∧ P3 ∧ e∞`.
pub fn plane(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Multivector {
    circle(a, b, c) ^ Multivector::einf()
}

pub fn sphere(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> Multivector {
    circle(a, b, c) ^ embed_point(d)
}

/// Line through `point` along `direction`, `P ∧ d ∧ e∞`, scaled to a unit
/// direction part. Zero-length directions are rejected.
pub fn line(point: [f64; 3], direction: [f64; 3]) -> Result<Multivector> {
    let raw = embed_point(point) ^ Multivector::vector(direction, 0.0, 0.0) ^ Multivector::einf();
    normalize_line(&raw)
}

/// Rescales a line so its direction part has unit Euclidean magnitude.
pub fn normalize_line(l: &Multivector) -> Result<Multivector> {
    let (d, _) = line_direction_moment(l);
    let n = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if !(n > 1e-12) {
        return Err(Error::Invalid("line has a zero-length direction".into()));
    }
    Ok(*l * (1.0 / n))
}

/// Direction `d` and moment `p × d` of a line `(e0 + p) ∧ d ∧ e∞`.
pub fn line_direction_moment(l: &Multivector) -> ([f64; 3], [f64; 3]) {
    // e0∧ei∧e∞ = -ei∧e0∧e∞, the stored blade
    let d = [
        -l.get(E1 | E0 | EINF),
        -l.get(E2 | E0 | EINF),
        -l.get(E3 | E0 | EINF),
    ];
    let m = [l.get(E2 | E3 | EINF), -l.get(E1 | E3 | EINF), l.get(E1 | E2 | EINF)];
    (d, m)
}
