//! Fixed-size vectors and matrices for dimensions one and two.
//!
//! Every spatial object in the crate lives in d ∈ {1, 2}. Points are stored as
//! `[f64; 2]`; in one dimension the second component is zero and ignored.

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn dot(a: &Vec2, b: &Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: &Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
pub fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

#[inline]
pub fn scale(m: &Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub fn diag(a: f64, b: f64) -> Mat2 {
    [[a, 0.0], [0.0, b]]
}

/// Hilbert-Schmidt norm restricted to the leading `dim × dim` block.
pub fn hs_norm(m: &Mat2, dim: usize) -> f64 {
    let mut s = 0.0;
    for row in m.iter().take(dim) {
        for v in row.iter().take(dim) {
            s += v * v;
        }
    }
    s.sqrt()
}

/// Smallest and largest singular values of the leading `dim × dim` block.
pub fn singular_values(m: &Mat2, dim: usize) -> (f64, f64) {
    if dim == 1 {
        let a = m[0][0].abs();
        return (a, a);
    }
    // eigenvalues of mᵀm
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let c = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    let lo = (0.5 * (tr - disc)).max(0.0).sqrt();
    let hi = (0.5 * (tr + disc)).sqrt();
    (lo, hi)
}

pub fn is_diagonal(m: &Mat2) -> bool {
    m[0][1] == 0.0 && m[1][0] == 0.0
}
