//! Relativistic kinematics: the impulse/velocity maps, the conserved energy
//! and the Lorentz force.
//!
//! Natural units with configurable speed of light `c` (mass 1, charge 1).

use crate::fields::Field;
use crate::linalg::{dot, matvec, norm, scale};

/// Global physical parameters: speed of light and the decay exponent of the
/// admissible field class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    /// Speed of light, `c > 0`.
    pub c: f64,
    /// Decay exponent of the fields, `alpha > 1`.
    pub alpha: f64,
}

impl PhysicsParams {
    pub fn new(c: f64, alpha: f64) -> Result<Self, KinematicsError> {
        if !(c > 0.0) {
            return Err(KinematicsError::InvalidParams {
                what: format!("speed of light must be positive, got {c}"),
            });
        }
        if !(alpha > 1.0) {
            return Err(KinematicsError::InvalidParams {
                what: format!("decay exponent must exceed 1, got {alpha}"),
            });
        }
        Ok(PhysicsParams { c, alpha })
    }
}

/// Position/velocity pair of a trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVec<const D: usize> {
    pub x: [f64; D],
    pub v: [f64; D],
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("velocity magnitude {speed} is not below the speed of light {c}")]
    SuperluminalVelocity { speed: f64, c: f64 },
    #[error("invalid physical parameters: {what}")]
    InvalidParams { what: String },
}

/// Impulse -> velocity map `g(p) = p / sqrt(1 + |p|^2/c^2)`.
///
/// Total on `R^d`; its image is the open ball of radius `c`.
#[inline]
pub fn velocity_from_impulse<const D: usize>(p: &[f64; D], c: f64) -> [f64; D] {
    let f = 1.0 / (1.0 + dot(p, p) / (c * c)).sqrt();
    scale(p, f)
}

/// Velocity -> impulse map `gamma(v) = v / sqrt(1 - |v|^2/c^2)`, the inverse
/// of [`velocity_from_impulse`]. Errors when `|v| >= c`.
#[inline]
pub fn impulse_from_velocity<const D: usize>(
    v: &[f64; D],
    c: f64,
) -> Result<[f64; D], KinematicsError> {
    let s2 = dot(v, v) / (c * c);
    if s2 >= 1.0 {
        return Err(KinematicsError::SuperluminalVelocity {
            speed: norm(v),
            c,
        });
    }
    Ok(scale(v, 1.0 / (1.0 - s2).sqrt()))
}

/// Lorentz factor `1/sqrt(1 - |v|^2/c^2)`.
pub fn lorentz_factor(speed: f64, c: f64) -> Result<f64, KinematicsError> {
    if speed >= c {
        return Err(KinematicsError::SuperluminalVelocity { speed, c });
    }
    Ok(1.0 / (1.0 - (speed / c).powi(2)).sqrt())
}

/// Total energy `E = c^2 sqrt(1 + |p|^2/c^2) + V(x)` with `p = gamma(v)`.
///
/// Constant along exact trajectories; independent of the vector potential
/// because the magnetic force is orthogonal to the velocity.
pub fn energy<const D: usize, F: Field<D>>(
    x: &[f64; D],
    v: &[f64; D],
    field: &F,
    c: f64,
) -> Result<f64, KinematicsError> {
    let gf = lorentz_factor(norm(v), c)?;
    Ok(c * c * gf + field.v(x))
}

/// Energy written in terms of the impulse, used by the ODE integrator whose
/// state is `(x, p)`.
pub fn energy_impulse<const D: usize, F: Field<D>>(
    x: &[f64; D],
    p: &[f64; D],
    field: &F,
    c: f64,
) -> f64 {
    c * c * (1.0 + dot(p, p) / (c * c)).sqrt() + field.v(x)
}

/// Lorentz force `F(x, v) = -grad V(x) + (1/c) B(x) v`.
///
/// Total in both arguments; the magnetic part is orthogonal to `v` because
/// `B` is antisymmetric.
#[inline]
pub fn force<const D: usize, F: Field<D>>(
    x: &[f64; D],
    v: &[f64; D],
    field: &F,
    c: f64,
) -> [f64; D] {
    let g = field.grad_v(x);
    let b = field.b(x);
    let bv = matvec(&b, v);
    let mut r = [0.0; D];
    for i in 0..D {
        r[i] = -g[i] + bv[i] / c;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::families::{GaussianElectric, MagneticLoop, Profile};
    use crate::fields::ZeroField;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_vec<const D: usize>(rng: &mut impl Rng, scale: f64) -> [f64; D] {
        let mut v = [0.0; D];
        for c in v.iter_mut() {
            *c = rng.gen_range(-scale..scale);
        }
        v
    }

    #[test]
    fn impulse_map_fixed_points() {
        let z = [0.0; 3];
        assert_eq!(velocity_from_impulse(&z, 1.0), z);
        // |p| = c forces the factor 1/sqrt(2)
        let c = 2.0;
        let p = [c, 0.0, 0.0];
        let v = velocity_from_impulse(&p, c);
        assert!((v[0] - c / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn gamma_inverts_g() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = 1.0;
        for _ in 0..200 {
            let mut v: [f64; 3] = rand_vec(&mut rng, 1.0);
            while norm(&v) >= c {
                v = rand_vec(&mut rng, 1.0);
            }
            let p = impulse_from_velocity(&v, c).unwrap();
            let back = velocity_from_impulse(&p, c);
            for i in 0..3 {
                assert!((back[i] - v[i]).abs() < 1e-12);
            }
            // and the other composition on impulses
            let p0: [f64; 3] = rand_vec(&mut rng, 20.0);
            let q = impulse_from_velocity(&velocity_from_impulse(&p0, c), c).unwrap();
            for i in 0..3 {
                assert!((q[i] - p0[i]).abs() < 1e-10 * (1.0 + p0[i].abs()));
            }
        }
    }

    #[test]
    fn gamma_rejects_the_light_cone() {
        let v = [1.0, 0.0];
        assert!(matches!(
            impulse_from_velocity(&v, 1.0),
            Err(KinematicsError::SuperluminalVelocity { .. })
        ));
        // explicit inverse pair from the sphere |p| = c
        let c = 1.0;
        let v = [c / 2f64.sqrt(), 0.0];
        let p = impulse_from_velocity(&v, c).unwrap();
        assert!((p[0] - c).abs() < 1e-14);
    }

    #[test]
    fn lipschitz_bound_on_g() {
        // |g(x) - g(y)| <= sqrt(d) |x - y| on random pairs
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = 1.7;
        for _ in 0..500 {
            let x: [f64; 3] = rand_vec(&mut rng, 30.0);
            let y: [f64; 3] = rand_vec(&mut rng, 30.0);
            let gx = velocity_from_impulse(&x, c);
            let gy = velocity_from_impulse(&y, c);
            let lhs = norm(&crate::linalg::sub(&gx, &gy));
            let rhs = 3f64.sqrt() * norm(&crate::linalg::sub(&x, &y));
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gradient_bound_on_g_by_finite_differences() {
        // |grad g_i(x)|^2 <= 1/(1 + |x|^2/c^2), central differences
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = 2.0;
        for _ in 0..200 {
            let x: [f64; 3] = rand_vec(&mut rng, 10.0);
            let h = 1e-6 * (1.0 + norm(&x));
            for i in 0..3 {
                let mut grad2 = 0.0;
                for k in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    let d = (velocity_from_impulse(&xp, c)[i]
                        - velocity_from_impulse(&xm, c)[i])
                        / (2.0 * h);
                    grad2 += d * d;
                }
                let bound = 1.0 / (1.0 + dot(&x, &x) / (c * c));
                assert!(grad2 <= bound * (1.0 + 1e-5), "{grad2} vs {bound}");
            }
        }
    }

    #[test]
    fn rest_energy_and_lightlike_impulse() {
        let zero = ZeroField;
        let c = 3.0;
        let e0 = energy(&[1.0, 2.0], &[0.0, 0.0], &zero, c).unwrap();
        assert!((e0 - c * c).abs() < 1e-13);
        // |v| = c/sqrt(2)  =>  |p| = c  =>  E = c^2 sqrt(2)
        let v = [c / 2f64.sqrt(), 0.0];
        let e1 = energy(&[0.0, 0.0], &v, &zero, c).unwrap();
        assert!((e1 - c * c * 2f64.sqrt()).abs() < 1e-12);
        assert!(energy(&[0.0, 0.0], &[c, 0.0], &zero, c).is_err());
    }

    #[test]
    fn force_zero_field_and_planar_magnetic_action() {
        let zero = ZeroField;
        let f = force(&[1.0, 2.0], &[0.3, 0.4], &zero, 1.0);
        assert_eq!(f, [0.0, 0.0]);

        // d=2 at the origin the loop family has grad V = 0 and B_{1,2} = b,
        // so F = (b v2/c, -b v1/c)
        let c = 1.5;
        let field = MagneticLoop::<2>::new(0, 1, Profile::InversePower { amp: 0.7, sigma: 2.0 });
        let b12 = field.b(&[0.0, 0.0])[0][1];
        let v = [0.2, -0.5];
        let f = force(&[0.0, 0.0], &v, &field, c);
        assert!((f[0] - b12 * v[1] / c).abs() < 1e-14);
        assert!((f[1] + b12 * v[0] / c).abs() < 1e-14);
    }

    #[test]
    fn magnetic_force_is_orthogonal_to_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let field = MagneticLoop::<3>::new(0, 1, Profile::Gaussian { amp: 0.9, width: 1.3 });
        for _ in 0..300 {
            let x: [f64; 3] = rand_vec(&mut rng, 4.0);
            let v: [f64; 3] = rand_vec(&mut rng, 0.9);
            let bv = matvec(&field.b(&x), &v);
            assert!(dot(&bv, &v).abs() < 1e-12 * (1.0 + dot(&v, &v)));
        }
    }

    #[test]
    fn energy_does_not_depend_on_vector_potential() {
        let electric = GaussianElectric::<2>::new(0.4, 1.2);
        let with_b = crate::fields::SumField::new(vec![
            crate::fields::AnyField::GaussianElectric(electric.clone()),
            crate::fields::AnyField::MagneticLoop(MagneticLoop::new(
                0,
                1,
                Profile::Gaussian { amp: 0.8, width: 1.0 },
            )),
        ]);
        let x = [0.4, -0.2];
        let v = [0.1, 0.3];
        let e1 = energy(&x, &v, &electric, 1.0).unwrap();
        let e2 = energy(&x, &v, &with_b, 1.0).unwrap();
        assert_eq!(e1, e2);
    }
}
