//! The explicit constants, contraction estimates, decay envelopes, threshold
//! speeds and proximity constants that control the small-angle scattering
//! regime, implemented verbatim as evaluatable formulas.
//!
//! Everything here is pure arithmetic in the parameter pack
//! `(c, d, alpha, beta_1, beta_tilde, r, |v_-|, |x_-|)`; the dynamics module
//! checks these formulas empirically against the integral operator.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("no sign change of {what} on bracket [{lo}, {hi}]")]
    NoRoot { what: String, lo: f64, hi: f64 },
    #[error("parameters outside admissible domain: {what}")]
    OutOfRange { what: String },
    #[error("envelope argument t = {t} has the wrong sign for the {which} pair")]
    WrongSignT { t: f64, which: &'static str },
}

/// Parameter pack of the bound formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub c: f64,
    pub d: usize,
    pub alpha: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Radius of the candidate ball, `0 < r <= 1`, `r < c / sqrt(2)`.
    pub r: f64,
    /// `|x_-|`.
    pub x_norm: f64,
    /// `|v_-|`.
    pub v_norm: f64,
}

impl BoundParams {
    pub fn beta_tilde(&self) -> f64 {
        self.beta1.max(self.beta2)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        let err = |what: String| Err(BoundsError::OutOfRange { what });
        if !(self.c > 0.0) {
            return err(format!("c = {} must be positive", self.c));
        }
        if self.d < 2 {
            return err(format!("d = {} must be at least 2", self.d));
        }
        if !(self.alpha > 1.0) {
            return err(format!("alpha = {} must exceed 1", self.alpha));
        }
        if !(self.r > 0.0 && self.r <= 1.0 && self.r < self.c / 2f64.sqrt()) {
            return err(format!(
                "r = {} must satisfy 0 < r <= 1 and r < c/sqrt(2) = {}",
                self.r,
                self.c / 2f64.sqrt()
            ));
        }
        if self.beta0 < 0.0 || self.beta1 < 0.0 || self.beta2 < 0.0 {
            return err("beta constants must be nonnegative".into());
        }
        if self.x_norm < 0.0 {
            return err(format!("|x| = {} must be nonnegative", self.x_norm));
        }
        if !(self.v_norm >= 0.0 && self.v_norm < self.c) {
            return err(format!("|v| = {} must lie in [0, c)", self.v_norm));
        }
        Ok(())
    }

    fn df(&self) -> f64 {
        self.d as f64
    }

    /// `1 / sqrt(1 + v^2 / (4 (c^2 - v^2)))`, the relativistic suppression
    /// shared by every operator bound.
    pub fn relativistic_factor(&self) -> f64 {
        let (v, c) = (self.v_norm, self.c);
        1.0 / (1.0 + v * v / (4.0 * (c * c - v * v))).sqrt()
    }

    fn vr(&self) -> f64 {
        self.v_norm / 2f64.sqrt()
    }

    fn xr(&self) -> f64 {
        1.0 + self.x_norm / 2f64.sqrt()
    }
}

/// Self-map bound on the horizon `T <= 0`.
pub fn rho_t(p: &BoundParams, t_horizon: f64) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    p.relativistic_factor()
        * 2f64.powf(a + 2.0)
        * d
        * d.sqrt()
        * p.beta1
        * (2.0 + r / p.c)
        * (p.vr() + 1.0 - r)
        / ((a - 1.0)
            * (p.vr() - r).powi(2)
            * (p.xr() - (p.vr() - r) * t_horizon).powf(a - 1.0))
}

/// Self-map bound for `T <= +inf`.
pub fn rho(p: &BoundParams) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    p.relativistic_factor()
        * 2f64.powf(a + 3.0)
        * d
        * d.sqrt()
        * p.beta1
        * (2.0 + r / p.c)
        * (p.vr() + 1.0 - r)
        / ((a - 1.0) * (p.vr() - r).powi(2) * p.xr().powf(a - 1.0))
}

/// Lipschitz bound on the horizon `T <= 0`.
pub fn lambda_t(p: &BoundParams, t_horizon: f64) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    let bt = p.beta_tilde();
    p.relativistic_factor()
        * 2f64.powf(a + 4.0)
        * d
        * d
        * bt
        * (1.0 + 1.0 / p.c)
        * (p.vr() + 1.0 - r).powi(2)
        / ((a - 1.0)
            * (p.vr() - r).powi(3)
            * (p.xr() - (p.vr() - r) * t_horizon).powf(a - 1.0))
}

/// Lipschitz bound for `T <= +inf`.
pub fn lambda(p: &BoundParams) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    let bt = p.beta_tilde();
    p.relativistic_factor()
        * 2f64.powf(2.0 * a + 9.0)
        * 3.0
        * d.powi(3)
        * bt
        * (1.0 + bt)
        * (1.0 + 1.0 / p.c).powi(3)
        * (p.vr() + 1.0 - r).powi(3)
        / ((a - 1.0) * (p.vr() - r).powi(4) * p.xr().powf(a - 1.0))
}

/// Common contraction majorant on the horizon `T <= 0`.
pub fn mu_t(p: &BoundParams, t_horizon: f64) -> f64 {
    lambda_t(p, t_horizon) / p.r
}

/// Common contraction majorant for `T <= +inf`; the fixed-point iteration is
/// certified exactly when this is below 1.
pub fn mu(p: &BoundParams) -> f64 {
    lambda(p) / p.r
}

/// `mu` as a function of speed, for root finding and monotonicity scans.
pub fn mu_at_speed(p: &BoundParams, speed: f64) -> f64 {
    let mut q = *p;
    q.v_norm = speed;
    mu(&q)
}

/// Velocity-deflection envelope for `t <= 0`.
pub fn zeta_minus(p: &BoundParams, t: f64) -> Result<f64, BoundsError> {
    if t > 0.0 {
        return Err(BoundsError::WrongSignT { t, which: "minus" });
    }
    let (d, a, r) = (p.df(), p.alpha, p.r);
    Ok(p.relativistic_factor()
        * d
        * d.sqrt()
        * p.beta1
        * 2f64.powf(a + 2.0)
        * (2.0 + r / p.c)
        / (a * (p.vr() - r) * (p.xr() - (p.vr() - r) * t).powf(a)))
}

/// Position-deflection envelope for `t <= 0`.
pub fn xi_minus(p: &BoundParams, t: f64) -> Result<f64, BoundsError> {
    if t > 0.0 {
        return Err(BoundsError::WrongSignT { t, which: "minus" });
    }
    let (d, a, r) = (p.df(), p.alpha, p.r);
    Ok(p.relativistic_factor()
        * d
        * d.sqrt()
        * p.beta1
        * 2f64.powf(a + 2.0)
        * (2.0 + r / p.c)
        / (a * (a - 1.0) * (p.vr() - r).powi(2) * (p.xr() - (p.vr() - r) * t).powf(a - 1.0)))
}

/// Velocity-residual envelope for `t >= 0`.
pub fn zeta_plus(p: &BoundParams, t: f64) -> Result<f64, BoundsError> {
    if t < 0.0 {
        return Err(BoundsError::WrongSignT { t, which: "plus" });
    }
    let (d, a, r) = (p.df(), p.alpha, p.r);
    Ok(p.relativistic_factor()
        * d
        * d.sqrt()
        * p.beta1
        * 2f64.powf(a + 2.0)
        * (2.0 + r / p.c)
        / (a * (p.vr() - r) * (p.xr() + (p.vr() - r) * t).powf(a)))
}

/// Position-residual envelope for `t >= 0`.
pub fn xi_plus(p: &BoundParams, t: f64) -> Result<f64, BoundsError> {
    if t < 0.0 {
        return Err(BoundsError::WrongSignT { t, which: "plus" });
    }
    let (d, a, r) = (p.df(), p.alpha, p.r);
    Ok(p.relativistic_factor()
        * d
        * d.sqrt()
        * p.beta1
        * 2f64.powf(a + 2.0)
        * (2.0 + r / p.c)
        / (a * (a - 1.0) * (p.vr() - r).powi(2) * (p.xr() + (p.vr() - r) * t).powf(a - 1.0)))
}

/// Proximity of the velocity datum to its straight-line evaluation.
pub fn eps_a_prime(p: &BoundParams) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    let bt = p.beta_tilde();
    d * d * bt * (1.0 + 1.0 / p.c) * 2f64.powf(a + 5.0) * (p.vr() + 1.0 - r)
        / (a * (p.vr() - r).powi(2) * p.xr().powf(a))
        * rho(p)
        * p.relativistic_factor()
}

/// Proximity of the rescaled velocity datum to the straight-line force
/// integral.
pub fn eps_a(p: &BoundParams) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    let bt = p.beta_tilde();
    2f64.powf(a + 5.0) * d * d.sqrt() * bt * (1.0 + 1.0 / p.c) * (p.vr() + 1.0 - r)
        / (a * (p.vr() - r).powi(2) * p.xr().powf(a))
        * rho(p)
}

/// Proximity of the configuration datum to its straight-line evaluation.
pub fn eps_b(p: &BoundParams) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    let bt = p.beta_tilde();
    2f64.powf(2.0 * a + 9.0)
        * d.powi(3)
        * bt
        * (1.0 + bt)
        * 3.0
        * (1.0 + 1.0 / p.c).powi(3)
        * (p.vr() + 1.0 - r).powi(2)
        / ((a - 1.0) * (p.vr() - r).powi(4) * p.xr().powf(a - 1.0))
        * rho(p)
        * p.relativistic_factor()
}

/// Bisection on `[lo, hi]` for a continuous function with a sign change.
/// Runs to machine resolution of the bracket (well below the 1e-12 target),
/// so the plug-back residual is limited only by the local slope.
fn bisect(
    what: &str,
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<f64, BoundsError> {
    if !(lo < hi) {
        return Err(BoundsError::NoRoot {
            what: format!("{what} (empty bracket)"),
            lo,
            hi,
        });
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(BoundsError::NoRoot {
            what: what.to_string(),
            lo,
            hi,
        });
    }
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}

/// Bisection for the threshold equations, which diverge at the lower edge of
/// the admissible speed interval. When the nominal lower bracket already sits
/// past the root (vanishingly weak fields push the root against the edge),
/// the bracket shrinks geometrically towards the edge until the sign change
/// is recovered; if instead the edge-side sign matches the upper end, no root
/// exists in the interval at all.
fn bisect_with_edge(
    what: &str,
    f: impl Fn(f64) -> f64,
    edge: f64,
    lo0: f64,
    hi: f64,
) -> Result<f64, BoundsError> {
    if !(lo0 < hi) {
        return Err(BoundsError::NoRoot {
            what: format!("{what} (empty bracket)"),
            lo: lo0,
            hi,
        });
    }
    let fhi = f(hi);
    let mut lo = lo0;
    let mut flo = f(lo);
    if flo.signum() != fhi.signum() {
        return bisect(what, &f, lo, hi);
    }
    // probe the divergent edge: a root can only hide in (edge, lo0) if the
    // function changes sign across that gap
    let gap_min = 4.0 * f64::EPSILON * edge.abs().max(1.0);
    let f_edge = f(edge + gap_min);
    if !f_edge.is_finite() || f_edge.signum() == fhi.signum() {
        return Err(BoundsError::NoRoot {
            what: what.to_string(),
            lo: lo0,
            hi,
        });
    }
    for _ in 0..64 {
        let gap = lo - edge;
        if gap <= gap_min {
            return Ok(lo);
        }
        lo = edge + gap / 32.0;
        flo = f(lo);
        if flo.signum() != fhi.signum() {
            return bisect(what, &f, lo, hi);
        }
    }
    Ok(lo)
}

/// Residual of the defining equation of `z_1` at speed `z`.
pub fn z1_residual(p: &BoundParams, z: f64) -> f64 {
    let (d, a, r) = (p.df(), p.alpha, p.r);
    z / (1.0 - z * z / (p.c * p.c)).sqrt()
        - 2f64.powf(a + 5.0) * p.beta1 * d * (2.0 + r / p.c)
            / (a * (z / 2f64.sqrt() - r) * (p.x_norm / 2f64.sqrt() + 1.0).powf(a))
}

/// Threshold speed `z_1`: root of [`z1_residual`] in `(sqrt(2) r, c)`.
/// Degenerates to `sqrt(2) r` as `beta_1 -> 0`.
pub fn threshold_z1(p: &BoundParams) -> Result<f64, BoundsError> {
    p.validate()?;
    if p.beta1 == 0.0 {
        return Ok(2f64.sqrt() * p.r);
    }
    let edge = 2f64.sqrt() * p.r;
    bisect_with_edge(
        "z1 equation",
        |z| z1_residual(p, z),
        edge,
        edge + 1e-9,
        p.c * (1.0 - 1e-13),
    )
}

/// Threshold speed `z`: root of `mu(speed) = 1` in `(sqrt(2) r, c)`;
/// the certified-contraction frontier.
pub fn threshold_z(p: &BoundParams) -> Result<f64, BoundsError> {
    p.validate()?;
    if p.beta_tilde() == 0.0 {
        return Ok(2f64.sqrt() * p.r);
    }
    let edge = 2f64.sqrt() * p.r;
    bisect_with_edge(
        "mu(z) = 1",
        |z| mu_at_speed(p, z) - 1.0,
        edge,
        edge + 1e-9,
        p.c * (1.0 - 1e-13),
    )
}

/// Residual of the defining equation of `z_2` at speed `z`.
pub fn z2_residual(p: &BoundParams, z: f64) -> f64 {
    let (d, a) = (p.df(), p.alpha);
    z / (1.0 - z * z / (p.c * p.c)).sqrt()
        - 32.0 * p.beta1 * d
            / (a * (z / 2f64.sqrt()) * (1.0 + p.x_norm / 2f64.sqrt()).powf(a))
}

/// Threshold speed `z_2`: root of [`z2_residual`] in `(0, c)`.
pub fn threshold_z2(p: &BoundParams) -> Result<f64, BoundsError> {
    p.validate()?;
    if p.beta1 == 0.0 {
        return Ok(0.0);
    }
    bisect_with_edge(
        "z2 equation",
        |z| z2_residual(p, z),
        0.0,
        1e-12 * p.c,
        p.c * (1.0 - 1e-13),
    )
}

/// The explicit constant multiplying the velocity-comparator envelope, as a
/// function of the entry speed `s1`.
pub fn c1_formula(p: &BoundParams, s1: f64) -> f64 {
    let (d, a, r, c) = (p.df(), p.alpha, p.r, p.c);
    let bt = p.beta_tilde();
    d.powi(3) * bt * bt * 2f64.powf(2.0 * a + 9.0) * (1.0 + 1.0 / c).powi(2) * c
        * (c / 2f64.sqrt() + 1.0 - r).powi(2)
        / (a * (a - 1.0) * (s1 / 2f64.sqrt() - r).powi(4) * p.xr().powf(2.0 * a - 1.0))
}

/// The explicit part of the configuration-comparator constant, as a function
/// of the entry speed `s2`; the empirically fitted remainder is added by the
/// caller.
pub fn c2_formula(p: &BoundParams, s2: f64, c_fit: f64) -> f64 {
    let (d, a, r, c) = (p.df(), p.alpha, p.r, p.c);
    let bt = p.beta_tilde();
    c_fit
        + 4.0 * d.powi(4) * d.sqrt() * bt * bt * (1.0 + bt) * 2f64.powf(3.0 * a + 15.0)
            * (1.0 + 1.0 / c).powi(4)
            * (c / 2f64.sqrt() + 1.0 - r).powi(3)
            / ((a - 1.0).powi(2) * (s2 / 2f64.sqrt() - r).powi(6) * p.xr().powf(2.0 * a - 2.0))
}

/// Entry speeds and envelope constants of the two high-energy comparators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Constants {
    pub s1: f64,
    pub s2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Assembles `(C_1, C_2, s_1, s_2)`. `c_fit` is the empirically fitted
/// configuration constant (a valid lower bound for reporting is 0, since the
/// explicit part is a sum of nonnegative terms).
pub fn theorem1_constants(p: &BoundParams, c_fit: f64) -> Result<Theorem1Constants, BoundsError> {
    let z1 = threshold_z1(p)?;
    let z = threshold_z(p)?;
    let z2 = threshold_z2(p)?;
    let s1 = z.max(z1);
    let s2 = z.max(z1).max(z2);
    Ok(Theorem1Constants {
        s1,
        s2,
        c1: c1_formula(p, s1),
        c2: c2_formula(p, s2, c_fit),
    })
}

/// Everything the `constants` subcommand prints for one speed.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSet {
    pub z1: f64,
    pub z: f64,
    pub z2: f64,
    pub rho: f64,
    pub lambda: f64,
    pub mu: f64,
    pub zeta_minus0: f64,
    pub xi_minus0: f64,
    pub zeta_plus0: f64,
    pub xi_plus0: f64,
    pub eps_a_prime: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    pub s1: f64,
    pub s2: f64,
    pub c1: f64,
    pub c2: f64,
    pub res_z1: f64,
    pub res_z2: f64,
    pub res_mu_at_z: f64,
}

pub fn constant_set(p: &BoundParams, c_fit: f64) -> Result<ConstantSet, BoundsError> {
    let z1 = threshold_z1(p)?;
    let z = threshold_z(p)?;
    let z2 = threshold_z2(p)?;
    let th = theorem1_constants(p, c_fit)?;
    Ok(ConstantSet {
        z1,
        z,
        z2,
        rho: rho(p),
        lambda: lambda(p),
        mu: mu(p),
        zeta_minus0: zeta_minus(p, 0.0)?,
        xi_minus0: xi_minus(p, 0.0)?,
        zeta_plus0: zeta_plus(p, 0.0)?,
        xi_plus0: xi_plus(p, 0.0)?,
        eps_a_prime: eps_a_prime(p),
        eps_a: eps_a(p),
        eps_b: eps_b(p),
        s1: th.s1,
        s2: th.s2,
        c1: th.c1,
        c2: th.c2,
        res_z1: z1_residual(p, z1),
        res_z2: z2_residual(p, z2),
        res_mu_at_z: mu_at_speed(p, z) - 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Parameter point of the independently hand-evaluated freezes.
    fn frozen_point() -> BoundParams {
        BoundParams {
            c: 2.0,
            d: 3,
            alpha: 2.5,
            beta0: 0.2,
            beta1: 0.1,
            beta2: 0.15,
            r: 0.5,
            x_norm: 2.0,
            v_norm: 1.5,
        }
    }

    #[test]
    fn operator_bounds_match_independent_arithmetic() {
        let p = frozen_point();
        let t = -1.5;
        assert!((rho_t(&p, t) - 12.969640292793278).abs() < 1e-12 * 13.0);
        assert!((rho(&p) - 40.612682757888574).abs() < 1e-12 * 41.0);
        assert!((lambda_t(&p, t) - 250.12505174961269).abs() < 1e-12 * 251.0);
        assert!((lambda(&p) - 4595337.5732738476).abs() < 1e-6);
        assert!((mu_t(&p, t) - 500.25010349922539).abs() < 1e-9);
        assert!((mu(&p) - 9190675.1465476953).abs() < 1e-5);
    }

    #[test]
    fn envelopes_match_independent_arithmetic() {
        let p = frozen_point();
        assert!((zeta_minus(&p, -2.0).unwrap() - 0.69855451442315684).abs() < 1e-14);
        assert!((xi_minus(&p, -2.0).unwrap() - 2.9367322015463341).abs() < 1e-13);
        assert!((zeta_plus(&p, 2.0).unwrap() - 0.69855451442315684).abs() < 1e-14);
        assert!((xi_plus(&p, 2.0).unwrap() - 2.9367322015463341).abs() < 1e-13);
        assert!(zeta_minus(&p, 0.5).is_err());
        assert!(xi_plus(&p, -0.5).is_err());
    }

    #[test]
    fn proximity_constants_match_independent_arithmetic() {
        let p = frozen_point();
        assert!((eps_a_prime(&p) - 2840.0078542127348).abs() < 1e-8);
        assert!((eps_a(&p) - 1884.8672134726564).abs() < 1e-8);
        assert!((eps_b(&p) - 119583359.91616888).abs() < 1e-3);
    }

    #[test]
    fn theorem1_formula_pieces_match_independent_arithmetic() {
        let p = frozen_point();
        assert!((c1_formula(&p, 1.8) - 3612.2231399573744).abs() < 1e-8);
        assert!((c2_formula(&p, 1.9, 0.0) - 268205756.98395622).abs() < 1e-3);
        assert!(c2_formula(&p, 1.9, 5.0) > c2_formula(&p, 1.9, 0.0));
    }

    #[test]
    fn envelope_ratio_approaches_two_to_the_alpha() {
        // zeta_-(t)/zeta_-(2t) -> 2^alpha as t -> -inf, forced by the
        // (xr - (vr - r) t)^{-alpha} form
        let p = frozen_point();
        let t = -1e8;
        let ratio = zeta_minus(&p, t).unwrap() / zeta_minus(&p, 2.0 * t).unwrap();
        assert!((ratio - 2f64.powf(p.alpha)).abs() < 1e-6);
        // xi carries one exponent less
        let ratio_xi = xi_minus(&p, t).unwrap() / xi_minus(&p, 2.0 * t).unwrap();
        assert!((ratio_xi - 2f64.powf(p.alpha - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn thresholds_solve_their_equations() {
        let mut p = frozen_point();
        p.c = 10.0;
        p.v_norm = 9.0;
        p.r = 1.0;
        p.beta1 = 0.05;
        p.beta2 = 0.05;
        let z1 = threshold_z1(&p).unwrap();
        assert!(z1 > 2f64.sqrt() * p.r && z1 < p.c);
        assert!(z1_residual(&p, z1).abs() < 1e-9, "{}", z1_residual(&p, z1));

        let z2 = threshold_z2(&p).unwrap();
        assert!(z2_residual(&p, z2).abs() < 1e-9);

        let z = threshold_z(&p).unwrap();
        // mu is steep near its root, so the plug-back residual is limited by
        // slope * ulp(z); assert the adjacent-float bracketing instead
        let below = z * (1.0 - 1e-12);
        let above = z * (1.0 + 1e-12);
        assert!(mu_at_speed(&p, below) >= 1.0 && mu_at_speed(&p, above) <= 1.0);
        assert!((mu_at_speed(&p, z) - 1.0).abs() < 1e-5, "{}", mu_at_speed(&p, z));
        // observation: mu < 1 exactly above z
        for k in 1..40 {
            let s = z + (p.c - 1e-9 - z) * k as f64 / 40.0;
            assert!(mu_at_speed(&p, s) < 1.0);
        }
        for k in 1..40 {
            let s = 2f64.sqrt() * p.r + 1e-6 + (z - 2f64.sqrt() * p.r - 2e-6) * k as f64 / 40.0;
            assert!(mu_at_speed(&p, s) > 1.0);
        }
    }

    #[test]
    fn z1_decreases_with_offset_radius() {
        let mut p = frozen_point();
        p.c = 10.0;
        p.r = 1.0;
        p.beta1 = 0.05;
        let mut last = f64::INFINITY;
        for x in [0.0, 1.0, 3.0, 10.0, 30.0] {
            let mut q = p;
            q.x_norm = x;
            let z1 = threshold_z1(&q).unwrap();
            assert!(z1 < last, "z1 must decrease as |x| grows");
            last = z1;
        }
    }

    #[test]
    fn z1_limit_for_vanishing_field() {
        let mut p = frozen_point();
        p.beta1 = 1e-12;
        let z1 = threshold_z1(&p).unwrap();
        assert!(z1 > 2f64.sqrt() * p.r);
        assert!(z1 - 2f64.sqrt() * p.r < 1e-6);
        p.beta1 = 0.0;
        assert_eq!(threshold_z1(&p).unwrap(), 2f64.sqrt() * p.r);
    }

    #[test]
    fn mu_majorizes_rho_over_r_and_lambda() {
        // sampled on admissible points with |v| >= z1
        let mut p = frozen_point();
        p.c = 10.0;
        p.r = 0.8;
        p.beta1 = 0.03;
        p.beta2 = 0.05;
        for k in 0..60 {
            let mut q = p;
            q.v_norm = 2.0 + 7.9 * k as f64 / 59.0;
            if q.v_norm < threshold_z1(&q).unwrap() {
                continue;
            }
            assert!(mu(&q) >= rho(&q) / q.r - 1e-12);
            assert!(mu(&q) >= lambda(&q) - 1e-12);
            assert!(mu_t(&q, -1.0) >= rho_t(&q, -1.0) / q.r - 1e-12);
            assert!(mu_t(&q, -1.0) >= lambda_t(&q, -1.0) - 1e-12);
        }
    }

    #[test]
    fn rho_decreases_in_speed_above_threshold() {
        let mut p = frozen_point();
        p.c = 10.0;
        p.r = 1.0;
        p.beta1 = 0.05;
        p.beta2 = 0.05;
        let z1 = threshold_z1(&p).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..50 {
            let mut q = p;
            q.v_norm = z1 + (p.c - 1e-6 - z1) * k as f64 / 49.0;
            let val = rho(&q);
            assert!(val < last, "rho must decrease in |v| on (z1, c)");
            last = val;
        }
    }

    #[test]
    fn proximity_constants_vanish_at_light_speed_and_stay_positive() {
        let mut p = frozen_point();
        p.c = 10.0;
        p.r = 1.0;
        p.beta1 = 0.05;
        p.beta2 = 0.07;
        // -> 0 as v -> c
        let mut q = p;
        q.v_norm = p.c * (1.0 - 1e-12);
        assert!(eps_a_prime(&q) < 1e-4);
        assert!(eps_b(&q) < 1e-2);
        // positivity on random admissible draws
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..1000 {
            let mut q = p;
            q.v_norm = rng.gen_range(2.0..9.99);
            q.x_norm = rng.gen_range(0.0..20.0);
            q.r = rng.gen_range(0.05..1.0);
            if q.v_norm <= 2f64.sqrt() * q.r {
                continue;
            }
            for val in [eps_a_prime(&q), eps_a(&q), eps_b(&q)] {
                assert!(val > 0.0 && val.is_finite());
            }
            // printed relation: eps_a' = sqrt(d) * relf * eps_a
            let lhs = eps_a_prime(&q);
            let rhs = eps_a(&q) * (q.d as f64).sqrt() * q.relativistic_factor();
            assert!((lhs - rhs).abs() < 1e-9 * lhs.max(rhs));
        }
    }

    #[test]
    fn s2_majorizes_s1() {
        let mut p = frozen_point();
        p.c = 10.0;
        p.r = 1.0;
        p.beta1 = 0.02;
        p.beta2 = 0.02;
        let th = theorem1_constants(&p, 0.0).unwrap();
        assert!(th.s2 >= th.s1);
        assert!(th.c1 > 0.0 && th.c2 > 0.0);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let mut p = frozen_point();
        p.r = 1.8;
        assert!(matches!(
            threshold_z1(&p),
            Err(BoundsError::OutOfRange { .. })
        ));
        let mut p = frozen_point();
        p.v_norm = 2.5;
        assert!(p.validate().is_err());
    }
}
