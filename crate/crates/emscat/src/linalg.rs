//! Small fixed-dimension vector/matrix helpers.
//!
//! The spatial dimension is a const generic so the hot loops (trajectory
//! integration, Picard sweeps, sinogram assembly) run on stack arrays.

/// Euclidean dot product.
#[inline]
pub fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

/// Euclidean norm.
#[inline]
pub fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    let mut r = [0.0; D];
    for i in 0..D {
        r[i] = a[i] + b[i];
    }
    r
}

#[inline]
pub fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    let mut r = [0.0; D];
    for i in 0..D {
        r[i] = a[i] - b[i];
    }
    r
}

#[inline]
pub fn scale<const D: usize>(a: &[f64; D], s: f64) -> [f64; D] {
    let mut r = [0.0; D];
    for i in 0..D {
        r[i] = s * a[i];
    }
    r
}

/// `a + s*b`.
#[inline]
pub fn axpy<const D: usize>(a: &[f64; D], s: f64, b: &[f64; D]) -> [f64; D] {
    let mut r = [0.0; D];
    for i in 0..D {
        r[i] = a[i] + s * b[i];
    }
    r
}

/// Matrix action `M v` for a row-indexed square matrix (`M[i][k] v[k]`).
#[inline]
pub fn matvec<const D: usize>(m: &[[f64; D]; D], v: &[f64; D]) -> [f64; D] {
    let mut r = [0.0; D];
    for i in 0..D {
        let mut s = 0.0;
        for k in 0..D {
            s += m[i][k] * v[k];
        }
        r[i] = s;
    }
    r
}

/// Normalizes `a`; returns `None` for the zero vector.
pub fn unit<const D: usize>(a: &[f64; D]) -> Option<[f64; D]> {
    let n = norm(a);
    if n == 0.0 {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// Zero vector, occasionally clearer at call sites than `[0.0; D]`.
#[inline]
pub fn zero<const D: usize>() -> [f64; D] {
    [0.0; D]
}

/// Completes a unit vector `n` to an orthonormal basis of its orthogonal
/// complement, returned as `D-1` vectors. Householder-style: reflect the
/// coordinate basis so that one axis maps to `n`.
pub fn orthonormal_complement<const D: usize>(n: &[f64; D]) -> Vec<[f64; D]> {
    // pick the coordinate axis least aligned with n to seed Gram-Schmidt
    let mut basis: Vec<[f64; D]> = Vec::with_capacity(D - 1);
    let mut axes: Vec<usize> = (0..D).collect();
    axes.sort_by(|&i, &j| n[i].abs().partial_cmp(&n[j].abs()).unwrap());
    for &ax in axes.iter().take(D - 1) {
        let mut v = [0.0; D];
        v[ax] = 1.0;
        // remove components along n and along previously accepted vectors
        let mut w = sub(&v, &scale(n, dot(&v, n)));
        for b in &basis {
            w = sub(&w, &scale(b, dot(&w, b)));
        }
        let u = unit(&w).expect("axis independent of n by construction");
        basis.push(u);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let n = unit(&[1.0, -2.0, 0.5]).unwrap();
        let basis = orthonormal_complement(&n);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!((norm(b) - 1.0).abs() < 1e-14);
            assert!(dot(b, &n).abs() < 1e-14);
        }
        assert!(dot(&basis[0], &basis[1]).abs() < 1e-14);
    }

    #[test]
    fn matvec_matches_by_hand() {
        let m = [[0.0, 2.0], [-2.0, 0.0]];
        let v = [3.0, 4.0];
        assert_eq!(matvec(&m, &v), [8.0, -6.0]);
    }
}
