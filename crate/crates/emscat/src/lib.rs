//! Numerical laboratory for relativistic charged-particle scattering in
//! static electromagnetic fields with algebraic decay.
//!
//! The crate simulates scattering solutions of the Newton-Einstein equation
//!
//! ```text
//! dp/dt = F(x, dx/dt) = -grad V(x) + (1/c) B(x) dx/dt,   p = gamma(dx/dt),
//! ```
//!
//! two independent ways (fixed-point iteration of the deflection integral
//! operator, and direct Runge-Kutta integration), evaluates the explicit
//! small-angle/high-energy estimates that control the scattering data, and
//! reconstructs the potentials `(V, B)` from simulated scattering data via
//! X-ray-transform inversion.
//!
//! Module map:
//!
//! - [`kinematics`]: impulse/velocity maps, energy, Lorentz force
//! - [`fields`]: concrete field families, decay verification, transversal gauge
//! - [`quad`]: panel quadrature for improper line and plane integrals
//! - [`xray`]: rays on the line manifold, the X-ray transform, 2-D filtered
//!   back-projection
//! - [`dynamics`]: deflection solvers and scattering-data extraction
//! - [`bounds`]: the explicit constants, envelopes and threshold speeds
//! - [`asymptotics`]: high-energy functionals `w1..w4` and the finite-speed
//!   comparators
//! - [`reconstruct`]: inversion pipelines and the non-uniqueness demos
//! - [`config`] / [`cli`]: reproducible experiment runner

pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod fields;
pub mod kinematics;
pub mod linalg;
pub mod quad;
pub mod reconstruct;
pub mod suites;
pub mod xray;

/// Formats a float with 17 significant digits so that CSV output
/// round-trips bit-exactly through `str::parse::<f64>()`.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::fmt_f64;

    #[test]
    fn float_format_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -1.0,
            std::f64::consts::PI,
            1.0e-300,
            -3.718281828459045e17,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(x.to_bits(), back.to_bits(), "{s}");
        }
    }
}
