//! Electromagnetic field models: scalar potential `V`, vector potential `A`,
//! the antisymmetric magnetic matrix `B_{i,k} = d_i A_k - d_k A_i`, and the
//! decay metadata that every improper integral in the crate relies on.

pub mod families;

use crate::linalg::{dot, norm, scale, sub};

pub use families::{GaussianElectric, InversePowerElectric, MagneticLoop, Profile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("transversal-gauge quadrature did not converge (residual {residual:e} after {panels} panels)")]
    QuadratureFailure { residual: f64, panels: usize },
    #[error("magnetic plane axes must be distinct and within dimension {d}, got ({a}, {b})")]
    InvalidPlane { a: usize, b: usize, d: usize },
    #[error("profile exponent must exceed 1 for integrable decay, got {sigma}")]
    SlowProfile { sigma: f64 },
}

/// How the field magnitudes fall off at infinity; drives quadrature
/// truncation radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// `(1 + |x|)^{-(alpha + order)}` envelopes.
    Algebraic,
    /// `exp(-|x|^2 / width^2)` envelopes (truncation radii shrink to
    /// logarithmic size).
    Gaussian { width: f64 },
}

/// Decay metadata of a field: `|d^j V|, |d^j A_i| <= beta_{|j|} (1+|x|)^{-(alpha+|j|)}`.
///
/// The `beta` values here are nominal envelopes owned by the family and are
/// used only to size integration domains. Measured constants for the bound
/// formulas come from [`verify_decay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    pub alpha: f64,
    /// Envelope amplitudes for derivative orders 0, 1, 2.
    pub beta: [f64; 3],
    pub tail: Tail,
}

impl DecayModel {
    /// Radius beyond which every entry of derivative order `order` is below
    /// `tol` in magnitude.
    pub fn cutoff_radius(&self, order: usize, tol: f64) -> f64 {
        let beta = self.beta[order.min(2)].max(tol);
        match self.tail {
            Tail::Gaussian { width } => width * (beta / tol).ln().max(0.0).sqrt() + width,
            Tail::Algebraic => {
                let e = self.alpha + order as f64;
                (beta / tol).powf(1.0 / e).max(1.0)
            }
        }
    }

    /// Truncation radius `R` for a line integral of an order-`order`
    /// derivative envelope against the weight `|t|^weight_pow`, for a line at
    /// distance at most `offset` from the origin, so that the discarded tail
    /// `int_{|t|>R}` is below `tol`.
    pub fn line_tail_radius(&self, order: usize, weight_pow: u32, offset: f64, tol: f64) -> f64 {
        let beta = self.beta[order.min(2)].max(1e-300);
        let w = weight_pow as f64;
        match self.tail {
            Tail::Gaussian { width } => {
                // conservative: int_R..inf t^w exp(-(t-offset)^2/width^2) dt
                // bounded via the peak value times width once R - offset is a
                // few widths out
                let mut r = offset + 2.0 * width + 1.0;
                for _ in 0..3 {
                    let peak = beta * (r.powf(w) + 1.0) * width;
                    let need = (peak / tol).ln().max(1.0).sqrt();
                    r = offset + width * (need + 1.0);
                }
                r
            }
            Tail::Algebraic => {
                let e = self.alpha + order as f64;
                // requires integrability of t^w (1+t-offset)^{-e}
                let p = e - w - 1.0;
                assert!(
                    p > 0.0,
                    "line integrand with weight t^{weight_pow} and decay exponent {e} is not integrable"
                );
                let r = offset + (2f64.powf(w) * beta / (tol * p)).powf(1.0 / p);
                r.max(2.0 * offset + 2.0)
            }
        }
    }
}

/// A static electromagnetic field.
///
/// Implementors supply `V`, `grad V`, `A` and the Jacobian `d_i A_k`;
/// the magnetic matrix and its derivatives are derived from those. Second
/// derivatives fall back to central finite differences with step
/// `1e-5 (1 + |x|)` unless overridden with closed forms.
pub trait Field<const D: usize>: Sync + Send {
    fn v(&self, x: &[f64; D]) -> f64;
    fn grad_v(&self, x: &[f64; D]) -> [f64; D];
    fn vector_potential(&self, x: &[f64; D]) -> [f64; D];
    /// Jacobian of the vector potential, `jac[i][k] = d_i A_k`.
    fn jac_potential(&self, x: &[f64; D]) -> [[f64; D]; D];
    fn decay(&self) -> DecayModel;

    /// Hessian of `V`, `hess[l][m] = d_l d_m V`.
    fn hess_v(&self, x: &[f64; D]) -> [[f64; D]; D] {
        let mut h = [[0.0; D]; D];
        let step = 1e-5 * (1.0 + norm(x));
        for l in 0..D {
            let mut xp = *x;
            let mut xm = *x;
            xp[l] += step;
            xm[l] -= step;
            let gp = self.grad_v(&xp);
            let gm = self.grad_v(&xm);
            for m in 0..D {
                h[l][m] = (gp[m] - gm[m]) / (2.0 * step);
            }
        }
        h
    }

    /// Second derivatives of the vector potential, `d2[l][i][k] = d_l d_i A_k`.
    fn d2_potential(&self, x: &[f64; D]) -> [[[f64; D]; D]; D] {
        let mut d2 = [[[0.0; D]; D]; D];
        let step = 1e-5 * (1.0 + norm(x));
        for l in 0..D {
            let mut xp = *x;
            let mut xm = *x;
            xp[l] += step;
            xm[l] -= step;
            let jp = self.jac_potential(&xp);
            let jm = self.jac_potential(&xm);
            for i in 0..D {
                for k in 0..D {
                    d2[l][i][k] = (jp[i][k] - jm[i][k]) / (2.0 * step);
                }
            }
        }
        d2
    }

    /// Magnetic matrix `B_{i,k} = d_i A_k - d_k A_i` (antisymmetric, zero
    /// diagonal by construction).
    fn b(&self, x: &[f64; D]) -> [[f64; D]; D] {
        let jac = self.jac_potential(x);
        let mut b = [[0.0; D]; D];
        for i in 0..D {
            for k in (i + 1)..D {
                let v = jac[i][k] - jac[k][i];
                b[i][k] = v;
                b[k][i] = -v;
            }
        }
        b
    }

    /// Derivatives of the magnetic matrix, `db[l][i][k] = d_l B_{i,k}`.
    fn db(&self, x: &[f64; D]) -> [[[f64; D]; D]; D] {
        let d2 = self.d2_potential(x);
        let mut db = [[[0.0; D]; D]; D];
        for l in 0..D {
            for i in 0..D {
                for k in (i + 1)..D {
                    let v = d2[l][i][k] - d2[l][k][i];
                    db[l][i][k] = v;
                    db[l][k][i] = -v;
                }
            }
        }
        db
    }
}

/// The trivial field `V = 0`, `A = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZeroField;

impl<const D: usize> Field<D> for ZeroField {
    fn v(&self, _x: &[f64; D]) -> f64 {
        0.0
    }
    fn grad_v(&self, _x: &[f64; D]) -> [f64; D] {
        [0.0; D]
    }
    fn vector_potential(&self, _x: &[f64; D]) -> [f64; D] {
        [0.0; D]
    }
    fn jac_potential(&self, _x: &[f64; D]) -> [[f64; D]; D] {
        [[0.0; D]; D]
    }
    fn hess_v(&self, _x: &[f64; D]) -> [[f64; D]; D] {
        [[0.0; D]; D]
    }
    fn d2_potential(&self, _x: &[f64; D]) -> [[[f64; D]; D]; D] {
        [[[0.0; D]; D]; D]
    }
    fn decay(&self) -> DecayModel {
        DecayModel {
            alpha: 2.0,
            beta: [0.0; 3],
            tail: Gaussianish_zero_tail(),
        }
    }
}

#[allow(non_snake_case)]
fn Gaussianish_zero_tail() -> Tail {
    Tail::Gaussian { width: 1.0 }
}

/// Closed set of built-in field families, dispatched without boxing so the
/// integrator loops stay monomorphic.
#[derive(Debug, Clone)]
pub enum AnyField<const D: usize> {
    Zero,
    InversePowerElectric(InversePowerElectric<D>),
    GaussianElectric(GaussianElectric<D>),
    MagneticLoop(MagneticLoop<D>),
    Sum(SumField<D>),
}

/// Superposition of fields; potentials add, so `B` adds as well.
#[derive(Debug, Clone, Default)]
pub struct SumField<const D: usize> {
    pub terms: Vec<AnyField<D>>,
}

impl<const D: usize> SumField<D> {
    pub fn new(terms: Vec<AnyField<D>>) -> Self {
        SumField { terms }
    }
}

macro_rules! any_dispatch {
    ($self:ident, $f:ident, $x:ident, $zero:expr) => {
        match $self {
            AnyField::Zero => $zero,
            AnyField::InversePowerElectric(t) => t.$f($x),
            AnyField::GaussianElectric(t) => t.$f($x),
            AnyField::MagneticLoop(t) => t.$f($x),
            AnyField::Sum(t) => t.$f($x),
        }
    };
}

impl<const D: usize> Field<D> for AnyField<D> {
    fn v(&self, x: &[f64; D]) -> f64 {
        any_dispatch!(self, v, x, 0.0)
    }
    fn grad_v(&self, x: &[f64; D]) -> [f64; D] {
        any_dispatch!(self, grad_v, x, [0.0; D])
    }
    fn vector_potential(&self, x: &[f64; D]) -> [f64; D] {
        any_dispatch!(self, vector_potential, x, [0.0; D])
    }
    fn jac_potential(&self, x: &[f64; D]) -> [[f64; D]; D] {
        any_dispatch!(self, jac_potential, x, [[0.0; D]; D])
    }
    fn hess_v(&self, x: &[f64; D]) -> [[f64; D]; D] {
        any_dispatch!(self, hess_v, x, [[0.0; D]; D])
    }
    fn d2_potential(&self, x: &[f64; D]) -> [[[f64; D]; D]; D] {
        any_dispatch!(self, d2_potential, x, [[[0.0; D]; D]; D])
    }
    fn decay(&self) -> DecayModel {
        match self {
            AnyField::Zero => Field::<D>::decay(&ZeroField),
            AnyField::InversePowerElectric(t) => t.decay(),
            AnyField::GaussianElectric(t) => t.decay(),
            AnyField::MagneticLoop(t) => t.decay(),
            AnyField::Sum(t) => t.decay(),
        }
    }
}

impl<const D: usize> Field<D> for SumField<D> {
    fn v(&self, x: &[f64; D]) -> f64 {
        self.terms.iter().map(|t| t.v(x)).sum()
    }
    fn grad_v(&self, x: &[f64; D]) -> [f64; D] {
        let mut r = [0.0; D];
        for t in &self.terms {
            let g = t.grad_v(x);
            for i in 0..D {
                r[i] += g[i];
            }
        }
        r
    }
    fn vector_potential(&self, x: &[f64; D]) -> [f64; D] {
        let mut r = [0.0; D];
        for t in &self.terms {
            let a = t.vector_potential(x);
            for i in 0..D {
                r[i] += a[i];
            }
        }
        r
    }
    fn jac_potential(&self, x: &[f64; D]) -> [[f64; D]; D] {
        let mut r = [[0.0; D]; D];
        for t in &self.terms {
            let j = t.jac_potential(x);
            for i in 0..D {
                for k in 0..D {
                    r[i][k] += j[i][k];
                }
            }
        }
        r
    }
    fn hess_v(&self, x: &[f64; D]) -> [[f64; D]; D] {
        let mut r = [[0.0; D]; D];
        for t in &self.terms {
            let h = t.hess_v(x);
            for i in 0..D {
                for k in 0..D {
                    r[i][k] += h[i][k];
                }
            }
        }
        r
    }
    fn d2_potential(&self, x: &[f64; D]) -> [[[f64; D]; D]; D] {
        let mut r = [[[0.0; D]; D]; D];
        for t in &self.terms {
            let d = t.d2_potential(x);
            for l in 0..D {
                for i in 0..D {
                    for k in 0..D {
                        r[l][i][k] += d[l][i][k];
                    }
                }
            }
        }
        r
    }
    fn decay(&self) -> DecayModel {
        if self.terms.is_empty() {
            return Field::<D>::decay(&ZeroField);
        }
        let models: Vec<DecayModel> = self.terms.iter().map(|t| t.decay()).collect();
        let alpha = models.iter().map(|m| m.alpha).fold(f64::INFINITY, f64::min);
        let mut beta = [0.0; 3];
        for m in &models {
            for o in 0..3 {
                beta[o] += m.beta[o];
            }
        }
        let tail = if models
            .iter()
            .all(|m| matches!(m.tail, Tail::Gaussian { .. }))
        {
            let w = models
                .iter()
                .map(|m| match m.tail {
                    Tail::Gaussian { width } => width,
                    Tail::Algebraic => unreachable!(),
                })
                .fold(0.0, f64::max);
            Tail::Gaussian { width: w }
        } else {
            Tail::Algebraic
        };
        DecayModel { alpha, beta, tail }
    }
}

/// Ad-hoc vector potential given as a closure; the Jacobian (and hence `B`)
/// comes from central finite differences. Used to wrap gauges that have no
/// closed-form derivatives, e.g. the transversal gauge.
pub struct NumericVectorPotential<F> {
    pub a: F,
    pub decay: DecayModel,
    pub fd_step: f64,
}

impl<F> NumericVectorPotential<F> {
    pub fn new(a: F, decay: DecayModel) -> Self {
        NumericVectorPotential {
            a,
            decay,
            fd_step: 1e-5,
        }
    }
}

impl<const D: usize, F: Fn(&[f64; D]) -> [f64; D] + Sync + Send> Field<D>
    for NumericVectorPotential<F>
{
    fn v(&self, _x: &[f64; D]) -> f64 {
        0.0
    }
    fn grad_v(&self, _x: &[f64; D]) -> [f64; D] {
        [0.0; D]
    }
    fn vector_potential(&self, x: &[f64; D]) -> [f64; D] {
        (self.a)(x)
    }
    fn jac_potential(&self, x: &[f64; D]) -> [[f64; D]; D] {
        let step = self.fd_step * (1.0 + norm(x));
        let mut jac = [[0.0; D]; D];
        for i in 0..D {
            let mut xp = *x;
            let mut xm = *x;
            xp[i] += step;
            xm[i] -= step;
            let ap = (self.a)(&xp);
            let am = (self.a)(&xm);
            for k in 0..D {
                jac[i][k] = (ap[k] - am[k]) / (2.0 * step);
            }
        }
        jac
    }
    fn decay(&self) -> DecayModel {
        self.decay
    }
}

/// The transversal gauge `A(x) = -int_0^1 s B(sx) x ds` of a magnetic matrix
/// function. For closed, decaying `B` the result reproduces `B` as its curl
/// and satisfies `|A(x)| <= beta (1+|x|)^{-1}`.
pub struct TransversalGauge<const D: usize, FB> {
    b_fn: FB,
    abs_tol: f64,
}

impl<const D: usize, FB: Fn(&[f64; D]) -> [[f64; D]; D]> TransversalGauge<D, FB> {
    pub fn new(b_fn: FB) -> Self {
        TransversalGauge {
            b_fn,
            abs_tol: 1e-10,
        }
    }
}

impl<const D: usize, FB: Fn(&[f64; D]) -> [[f64; D]; D]> TransversalGauge<D, FB> {
    /// Evaluates the gauge integral with panel-doubling Gauss-Legendre
    /// quadrature on `[0, 1]`.
    pub fn eval(&self, x: &[f64; D]) -> Result<[f64; D], FieldError> {
        let integrand = |s: f64| -> [f64; D] {
            let xs = scale(x, s);
            let bx = crate::linalg::matvec(&(self.b_fn)(&xs), x);
            scale(&bx, -s)
        };
        let mut panels = 2usize;
        let mut prev = gl_integrate_01::<D>(&integrand, panels);
        for _ in 0..14 {
            panels *= 2;
            let next = gl_integrate_01::<D>(&integrand, panels);
            let mut residual = 0.0f64;
            for i in 0..D {
                residual = residual.max((next[i] - prev[i]).abs());
            }
            if residual < self.abs_tol {
                return Ok(next);
            }
            prev = next;
        }
        Err(FieldError::QuadratureFailure {
            residual: f64::NAN,
            panels,
        })
    }
}

fn gl_integrate_01<const D: usize>(f: &impl Fn(f64) -> [f64; D], panels: usize) -> [f64; D] {
    let mut acc = [0.0; D];
    let h = 1.0 / panels as f64;
    for p in 0..panels {
        let a = p as f64 * h;
        for (node, weight) in crate::quad::GL16 {
            let s = a + 0.5 * h * (node + 1.0);
            let val = f(s);
            for i in 0..D {
                acc[i] += 0.5 * h * weight * val[i];
            }
        }
    }
    acc
}

/// Result of sampling the decay conditions: estimated envelope constants and
/// the points where the ratios peaked.
#[derive(Debug, Clone)]
pub struct DecayReport<const D: usize> {
    /// Estimated `beta_0, beta_1, beta_2`.
    pub beta: [f64; 3],
    /// Sample points realizing each maximum.
    pub worst: [[f64; D]; 3],
    /// Whether the sampled ratios stayed finite and bounded out to the far
    /// shell.
    pub pass: bool,
}

/// Sampling layout for [`verify_decay`].
#[derive(Debug, Clone, Copy)]
pub struct DecaySampling {
    /// Radial grid size (log-spaced radii up to `r_max`).
    pub radial: usize,
    /// Extra uniformly random points per radius decade.
    pub random: usize,
    pub r_max: f64,
    pub seed: u64,
}

impl Default for DecaySampling {
    fn default() -> Self {
        DecaySampling {
            radial: 160,
            random: 400,
            r_max: 1e3,
            seed: 1,
        }
    }
}

/// Estimates the smallest constants `beta_m` such that
/// `|d^j A_i(x)| + |d^j V(x)| <= beta_{|j|} (1+|x|)^{-(alpha+|j|)}`
/// holds on the sample set, for `|j| <= 2`. `pass` turns false when the
/// ratios keep growing towards the outer shell (decay slower than requested).
pub fn verify_decay<const D: usize, F: Field<D>>(
    field: &F,
    alpha: f64,
    sampling: DecaySampling,
) -> DecayReport<D> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sampling.seed);

    let mut samples: Vec<[f64; D]> = Vec::new();
    // log-spaced radial grid along mixed directions
    for i in 0..sampling.radial {
        let t = i as f64 / (sampling.radial - 1).max(1) as f64;
        let r = if i == 0 {
            0.0
        } else {
            sampling.r_max.powf(t) - 1.0 + t
        };
        let mut dir = [0.0; D];
        for c in dir.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let dir = crate::linalg::unit(&dir).unwrap_or({
            let mut e = [0.0; D];
            e[0] = 1.0;
            e
        });
        samples.push(scale(&dir, r));
    }
    for _ in 0..sampling.random {
        let u: f64 = rng.gen_range(0.0..1.0);
        let r = sampling.r_max.powf(u) - 1.0;
        let mut dir = [0.0; D];
        for c in dir.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        if let Some(d) = crate::linalg::unit(&dir) {
            samples.push(scale(&d, r));
        }
    }

    let mut beta = [0.0f64; 3];
    let mut worst = [[0.0; D]; 3];
    // track the inner/outer maxima to detect unbounded ratios
    let mut inner_max = [0.0f64; 3];
    let mut outer_max = [0.0f64; 3];
    let shell = sampling.r_max * 0.5;

    for x in &samples {
        let w0 = (1.0 + norm(x)).powf(alpha);
        let w1 = (1.0 + norm(x)).powf(alpha + 1.0);
        let w2 = (1.0 + norm(x)).powf(alpha + 2.0);
        let v = field.v(x).abs();
        let a = field.vector_potential(x);
        let gv = field.grad_v(x);
        let ja = field.jac_potential(x);
        let hv = field.hess_v(x);
        let d2a = field.d2_potential(x);

        let mut q0 = 0.0f64;
        for i in 0..D {
            q0 = q0.max(a[i].abs() + v);
        }
        let mut q1 = 0.0f64;
        for l in 0..D {
            for i in 0..D {
                q1 = q1.max(ja[l][i].abs() + gv[l].abs());
            }
        }
        let mut q2 = 0.0f64;
        for l in 0..D {
            for m in 0..D {
                for i in 0..D {
                    q2 = q2.max(d2a[l][m][i].abs() + hv[l][m].abs());
                }
            }
        }
        let ratios = [q0 * w0, q1 * w1, q2 * w2];
        for o in 0..3 {
            if !ratios[o].is_finite() {
                return DecayReport {
                    beta: [f64::INFINITY; 3],
                    worst: [*x; 3],
                    pass: false,
                };
            }
            if ratios[o] > beta[o] {
                beta[o] = ratios[o];
                worst[o] = *x;
            }
            if norm(x) > shell {
                outer_max[o] = outer_max[o].max(ratios[o]);
            } else {
                inner_max[o] = inner_max[o].max(ratios[o]);
            }
        }
    }

    let pass = (0..3).all(|o| outer_max[o] <= inner_max[o] * 1.01 + 1e-300);
    DecayReport { beta, worst, pass }
}

/// Central-difference curl of an arbitrary vector-potential closure; the
/// finite-difference fallback behind `B = d_i A_k - d_k A_i` when no analytic
/// Jacobian is available.
pub fn curl_from_closure<const D: usize>(
    a: &impl Fn(&[f64; D]) -> [f64; D],
    x: &[f64; D],
    step: f64,
) -> [[f64; D]; D] {
    let mut b = [[0.0; D]; D];
    let h = step * (1.0 + norm(x));
    for i in 0..D {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        let ap = a(&xp);
        let am = a(&xm);
        for k in 0..D {
            b[i][k] += (ap[k] - am[k]) / (2.0 * h);
        }
    }
    // antisymmetrize: B_{i,k} = d_i A_k - d_k A_i
    let mut out = [[0.0; D]; D];
    for i in 0..D {
        for k in 0..D {
            out[i][k] = b[i][k] - b[k][i];
        }
    }
    out
}

/// Max-magnitude distance between the analytic `B` of `field` and the
/// finite-difference curl of its own vector potential at `x`.
pub fn curl_consistency<const D: usize, F: Field<D>>(field: &F, x: &[f64; D], step: f64) -> f64 {
    let fd = curl_from_closure(&|y: &[f64; D]| field.vector_potential(y), x, step);
    let an = field.b(x);
    let mut worst = 0.0f64;
    for i in 0..D {
        for k in 0..D {
            worst = worst.max((fd[i][k] - an[i][k]).abs());
        }
    }
    worst
}

/// Residual of the closedness identity
/// `d_i B_{k,l} + d_l B_{i,k} + d_k B_{l,i} = 0` at `x`, maximized over
/// index triples.
pub fn closedness_residual<const D: usize, F: Field<D>>(field: &F, x: &[f64; D]) -> f64 {
    let db = field.db(x);
    let mut worst = 0.0f64;
    for i in 0..D {
        for k in 0..D {
            for l in 0..D {
                let r = db[i][k][l] + db[l][i][k] + db[k][l][i];
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// Residual of the derivative identity
/// `d_k B_{i,j} - d_i B_{k,j} = d_j B_{i,k}`, maximized over index triples.
pub fn bianchi_residual<const D: usize, F: Field<D>>(field: &F, x: &[f64; D]) -> f64 {
    let db = field.db(x);
    let mut worst = 0.0f64;
    for i in 0..D {
        for k in 0..D {
            for j in 0..D {
                let r = db[k][i][j] - db[i][k][j] - db[j][i][k];
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// Verifies the transversal gauge of `field`'s own magnetic matrix against
/// the field: curl of the gauge must reproduce `B`. Returns the max residual
/// over the given points.
pub fn transversal_gauge_residual<const D: usize, F: Field<D>>(
    field: &F,
    points: &[[f64; D]],
) -> Result<f64, FieldError> {
    let gauge = TransversalGauge::new(|y: &[f64; D]| field.b(y));
    let mut worst = 0.0f64;
    for x in points {
        let a_fn = |y: &[f64; D]| gauge.eval(y).expect("gauge integral converges for smooth B");
        let fd = curl_from_closure(&a_fn, x, 1e-6);
        let truth = field.b(x);
        for i in 0..D {
            for k in 0..D {
                worst = worst.max((fd[i][k] - truth[i][k]).abs());
            }
        }
    }
    Ok(worst)
}

/// `2 (1 + |x_- + v_- s + f|) >= 1 + |x_-|/sqrt2 + (|v_-|/sqrt2 - r)|s|`
/// geometry helper shared by tests: left side of the trajectory lower bound.
pub fn trajectory_lower_bound_lhs<const D: usize>(
    x_minus: &[f64; D],
    v_minus: &[f64; D],
    s: f64,
    f: &[f64; D],
) -> f64 {
    let mut p = [0.0; D];
    for i in 0..D {
        p[i] = x_minus[i] + v_minus[i] * s + f[i];
    }
    2.0 * (1.0 + norm(&p))
}

pub(crate) fn scan_envelope_beta(
    alpha: f64,
    order: usize,
    env: impl Fn(f64) -> f64,
    r_max: f64,
) -> f64 {
    let n = 4000;
    let mut beta = 0.0f64;
    for i in 0..=n {
        let r = r_max * (i as f64 / n as f64).powi(2);
        let val = env(r) * (1.0 + r).powf(alpha + order as f64);
        if val.is_finite() {
            beta = beta.max(val);
        }
    }
    beta
}

pub(crate) fn dot_shifted<const D: usize>(x: &[f64; D], center: &[f64; D]) -> f64 {
    let y = sub(x, center);
    dot(&y, &y)
}
