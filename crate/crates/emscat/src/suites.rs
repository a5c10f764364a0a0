//! Randomized verification suites for the explicit inequalities: every bound
//! of the contraction analysis is evaluated against the actual integral
//! operator on random admissible draws. Shared by the `verify-bounds`
//! subcommand and the acceptance gate.

use crate::bounds::{self, BoundParams};
use crate::dynamics::{
    apply_operator, certify_contraction, extract_kl, pick_horizon, random_path_in_ball,
    solve_deflection_picard, DeflectionPath, SolverSpec, TimeGrid,
};
use crate::fields::Field;
use crate::kinematics::{force, impulse_from_velocity};
use crate::linalg::{axpy, dot, norm, scale, sub};
use crate::quad::cumulative_integral;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Result of one inequality suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: String,
    pub draws: usize,
    pub violations: usize,
    /// Worst observed `lhs / rhs` (1 is the theoretical edge).
    pub worst_ratio: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Tally {
    name: &'static str,
    draws: usize,
    violations: usize,
    worst_ratio: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            draws: 0,
            violations: 0,
            worst_ratio: 0.0,
        }
    }

    fn check(&mut self, lhs: f64, rhs: f64) {
        self.draws += 1;
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
        // slack for quadrature/roundoff; the bounds carry orders of margin
        if lhs > rhs * (1.0 + 1e-9) + 1e-13 {
            self.violations += 1;
        }
    }

    fn outcome(self) -> SuiteOutcome {
        SuiteOutcome {
            name: self.name.to_string(),
            draws: self.draws,
            violations: self.violations,
            worst_ratio: self.worst_ratio,
        }
    }
}

/// Inputs of the randomized suites: the field, its measured decay constants,
/// and the draw budget.
pub struct SuiteParams<'a, const D: usize, F: Field<D>> {
    pub field: &'a F,
    pub c: f64,
    pub alpha: f64,
    pub beta: [f64; 3],
    pub draws: usize,
    pub seed: u64,
}

fn rand_unit<const D: usize>(rng: &mut impl Rng) -> [f64; D] {
    loop {
        let mut v = [0.0; D];
        for c in v.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        if let Some(u) = crate::linalg::unit(&v) {
            if norm(&v) > 0.1 {
                return u;
            }
        }
    }
}

/// Random orthogonal pair `(v, x)` with `|v| = v_norm`, `|x| = x_norm`.
fn orthogonal_pair<const D: usize>(
    rng: &mut impl Rng,
    v_norm: f64,
    x_norm: f64,
) -> ([f64; D], [f64; D]) {
    let v_hat = rand_unit::<D>(rng);
    let mut x_dir = rand_unit::<D>(rng);
    // Gram-Schmidt against v
    x_dir = sub(&x_dir, &scale(&v_hat, dot(&x_dir, &v_hat)));
    let x_hat = crate::linalg::unit(&x_dir).unwrap_or_else(|| {
        let basis = crate::linalg::orthonormal_complement(&v_hat);
        basis[0]
    });
    (scale(&v_hat, v_norm), scale(&x_hat, x_norm))
}

/// Force bounds (pointwise and Lipschitz) on random points.
pub fn run_force_bounds<const D: usize, F: Field<D>>(
    p: &SuiteParams<D, F>,
) -> Vec<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x41);
    let d = D as f64;
    let (c, alpha) = (p.c, p.alpha);
    let beta1 = p.beta[1];
    let beta2 = p.beta[2];
    let mut t_point = Tally::new("force pointwise bound (4.4)");
    let mut t_lip = Tally::new("force Lipschitz bound (4.5)");
    for _ in 0..p.draws {
        let mut x = [0.0; D];
        let mut y = [0.0; D];
        let mut x2 = [0.0; D];
        let mut y2 = [0.0; D];
        for i in 0..D {
            x[i] = rng.gen_range(-6.0..6.0);
            y[i] = rng.gen_range(-2.0 * c..2.0 * c);
            x2[i] = x[i] + rng.gen_range(-1.0..1.0);
            y2[i] = y[i] + rng.gen_range(-0.5 * c..0.5 * c);
        }
        let f1 = force(&x, &y, p.field, c);
        t_point.check(
            norm(&f1),
            2.0 * d * beta1 * (1.0 + norm(&x)).powf(-(alpha + 1.0)) * (1.0 + norm(&y) / c),
        );

        let f2 = force(&x2, &y2, p.field, c);
        let mut sup_x = 0.0f64;
        let mut sup_mixed = 0.0f64;
        for k in 0..=32 {
            let eps = k as f64 / 32.0;
            let xm = axpy(&scale(&x, eps), 1.0 - eps, &x2);
            let ym = axpy(&scale(&y, eps), 1.0 - eps, &y2);
            sup_x = sup_x.max((1.0 + norm(&xm)).powf(-(alpha + 1.0)));
            sup_mixed = sup_mixed
                .max((1.0 + norm(&ym) / c) * (1.0 + norm(&xm)).powf(-(alpha + 2.0)));
        }
        let rhs = 2.0 * d * beta1 / c * sup_x * norm(&sub(&y, &y2))
            + 2.0 * d * d.sqrt() * beta2 * sup_mixed * norm(&sub(&x, &x2));
        t_lip.check(norm(&sub(&f1, &f2)), rhs);
    }
    vec![t_point.outcome(), t_lip.outcome()]
}

/// Draws an admissible `(r, x, v)` triple with `|v| >= z1`, biased towards
/// the light speed so that the relativistic suppression gets exercised.
fn admissible_draw<const D: usize>(
    rng: &mut impl Rng,
    c: f64,
    alpha: f64,
    beta: [f64; 3],
) -> Option<(BoundParams, [f64; D], [f64; D])> {
    let r = rng.gen_range(0.05..(c / 2f64.sqrt() - 1e-3).min(1.0));
    let x_norm = rng.gen_range(0.0..3.0);
    let mut bp = BoundParams {
        c,
        d: D,
        alpha,
        beta0: beta[0],
        beta1: beta[1],
        beta2: beta[2],
        r,
        x_norm,
        v_norm: 0.0,
    };
    let z1 = bounds::threshold_z1(&bp).ok()?;
    if z1 >= c * (1.0 - 1e-12) {
        return None;
    }
    // bias towards c: v = c - (c - z1) u^3
    let u: f64 = rng.gen_range(1e-4..1.0f64);
    bp.v_norm = c - (c - z1 * 1.000001) * u.powi(3);
    if bp.v_norm <= z1 || bp.v_norm >= c {
        return None;
    }
    let (v, x) = orthogonal_pair::<D>(rng, bp.v_norm, x_norm);
    Some((bp, v, x))
}

fn path_grid<const D: usize, F: Field<D>>(
    field: &F,
    c: f64,
    bp: &BoundParams,
    tail_tol: f64,
) -> TimeGrid {
    let horizon = pick_horizon(&field.decay(), c, bp.v_norm, bp.x_norm, bp.r, tail_tol);
    let scale_t = match field.decay().tail {
        crate::fields::Tail::Gaussian { width } => width,
        crate::fields::Tail::Algebraic => 1.0,
    } / bp.v_norm.max(1e-6);
    TimeGrid::new(horizon, 0.05 * scale_t.min(1.0)).expect("suite grids stay modest")
}

/// Trajectory geometry and prefix-integral bounds on random candidate paths.
pub fn run_geometry_bounds<const D: usize, F: Field<D>>(
    p: &SuiteParams<D, F>,
) -> Vec<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x48);
    let mut t_lower = Tally::new("trajectory lower bound (4.8)");
    let mut t_prefix = Tally::new("prefix force integral bound (4.9)");
    let mut t_resolvent = Tally::new("impulse perturbation bound (4.10)");
    let mut t_fh = Tally::new("candidate coordinate bounds (4.6)+(4.7)");
    let (c, alpha) = (p.c, p.alpha);
    let d = D as f64;
    while t_lower.draws < p.draws {
        let Some((bp, v, x)) = admissible_draw::<D>(&mut rng, c, alpha, p.beta) else {
            continue;
        };
        let grid = path_grid(p.field, c, &bp, 1e-8);
        let path: DeflectionPath<D> = random_path_in_ball(grid, bp.r, &mut rng);
        let nrm = path.norm_full();
        // geometry at a handful of nodes per draw
        for _ in 0..8 {
            let i = rng.gen_range(0..grid.len());
            let s = grid.node(i);
            let lhs_geom = 1.0 + bp.x_norm / 2f64.sqrt() + (bp.v_norm / 2f64.sqrt() - bp.r) * s.abs();
            let pos = axpy(&axpy(&x, s, &v), 1.0, &path.f[i]);
            t_lower.check(lhs_geom, 2.0 * (1.0 + norm(&pos)));
            t_fh.check(norm(&path.f[i]), (1.0 + s.abs()) * nrm * (1.0 + 1e-12));
            t_fh.check(norm(&path.h[i]), nrm * (1.0 + 1e-12));
        }
        // prefix integrals of the force along the perturbed trajectory
        let n = grid.len();
        let mut f_samples = vec![[0.0; D]; n];
        for i in 0..n {
            let s = grid.node(i);
            let pos = axpy(&axpy(&x, s, &v), 1.0, &path.f[i]);
            let vel = axpy(&v, 1.0, &path.h[i]);
            f_samples[i] = force(&pos, &vel, p.field, c);
        }
        let prefix = cumulative_integral(&f_samples, grid.step());
        let bound_49 = p.beta[1] * d * 2f64.powf(alpha + 3.0) * (2.0 + bp.r / c)
            / (alpha
                * (bp.v_norm / 2f64.sqrt() - bp.r)
                * (bp.x_norm / 2f64.sqrt() + 1.0).powf(alpha));
        let mut max_prefix = 0.0f64;
        for pre in &prefix {
            max_prefix = max_prefix.max(norm(pre));
        }
        t_prefix.check(max_prefix, bound_49);

        // impulse perturbations stay within half of gamma(v)
        let gamma_v = impulse_from_velocity(&v, c).expect("subluminal");
        let target = (1.0 + bp.v_norm * bp.v_norm / (4.0 * (c * c - bp.v_norm * bp.v_norm)))
            .powf(-1.0);
        for _ in 0..4 {
            let e1: f64 = rng.gen_range(-1.0..1.0);
            let e2: f64 = rng.gen_range(-1.0..1.0);
            let i1 = rng.gen_range(0..n);
            let i2a = rng.gen_range(0..n);
            let i2b = rng.gen_range(i2a..n);
            let mut pert = gamma_v;
            for j in 0..D {
                pert[j] += e1 * prefix[i1][j] + e2 * (prefix[i2b][j] - prefix[i2a][j]);
            }
            // (1 + |pert|^2/c^2)^{-1} <= (1 + v^2/(4(c^2-v^2)))^{-1}
            let lhs = (1.0 + dot(&pert, &pert) / (c * c)).powf(-1.0);
            t_resolvent.check(lhs, target);
        }
    }
    vec![
        t_lower.outcome(),
        t_fh.outcome(),
        t_prefix.outcome(),
        t_resolvent.outcome(),
    ]
}

/// Operator self-map, Lipschitz and envelope bounds on random candidate
/// paths.
pub fn run_operator_bounds<const D: usize, F: Field<D>>(
    p: &SuiteParams<D, F>,
) -> Vec<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x51);
    let (c, alpha) = (p.c, p.alpha);
    let mut t_rho_t = Tally::new("self-map bound on half-line (2.8a)");
    let mut t_rho = Tally::new("self-map bound (2.8b)");
    let mut t_lam_t = Tally::new("Lipschitz bound on half-line (2.9a)");
    let mut t_lam = Tally::new("Lipschitz bound (2.9b)");
    let mut t_mu = Tally::new("contraction majorant dominates (2.10)");
    let mut t_zeta = Tally::new("velocity envelope (2.11)");
    let mut t_xi = Tally::new("position envelope (2.12)");
    let mut t_k = Tally::new("velocity datum bound (2.15a)");
    let mut t_l = Tally::new("configuration datum bound (2.15b)");
    let mut t_zp = Tally::new("forward velocity envelope (2.16)");
    let mut t_xp = Tally::new("forward position envelope (2.17)");
    while t_rho.draws < p.draws {
        let Some((bp, v, x)) = admissible_draw::<D>(&mut rng, c, alpha, p.beta) else {
            continue;
        };
        let grid = path_grid(p.field, c, &bp, 1e-8);
        let path1: DeflectionPath<D> = random_path_in_ball(grid, bp.r, &mut rng);
        let path2: DeflectionPath<D> = random_path_in_ball(grid, bp.r, &mut rng);
        let out1 = apply_operator(p.field, c, &v, &x, &path1);
        let out2 = apply_operator(p.field, c, &v, &x, &path2);

        // full-line bounds
        t_rho.check(out1.norm_full(), bounds::rho(&bp));
        t_lam.check(
            out1.distance(&out2),
            bounds::lambda(&bp) * path1.distance(&path2),
        );
        t_mu.check(
            (bounds::rho(&bp) / bp.r).max(bounds::lambda(&bp)),
            bounds::mu(&bp),
        );

        // half-line bounds at a random horizon T <= 0
        let t_hor = rng.gen_range(-4.0..0.0);
        t_rho_t.check(out1.norm_to(t_hor), bounds::rho_t(&bp, t_hor));
        let mut dist_t = 0.0f64;
        let mut in_dist_t = 0.0f64;
        for i in 0..grid.len() {
            let t = grid.node(i);
            if t > t_hor {
                break;
            }
            let dh = sub(&out2.h[i], &out1.h[i]);
            let df = sub(&out2.f[i], &out1.f[i]);
            dist_t = dist_t.max(norm(&dh)).max(norm(&sub(&df, &scale(&dh, t))));
            let dh_in = sub(&path2.h[i], &path1.h[i]);
            let df_in = sub(&path2.f[i], &path1.f[i]);
            in_dist_t = in_dist_t
                .max(norm(&dh_in))
                .max(norm(&sub(&df_in, &scale(&dh_in, t))));
        }
        t_lam_t.check(dist_t, bounds::lambda_t(&bp, t_hor) * in_dist_t);

        // pointwise envelopes for t <= 0
        for i in 0..grid.len() {
            let t = grid.node(i);
            if t > 0.0 {
                break;
            }
            t_zeta.check(norm(&out1.h[i]), bounds::zeta_minus(&bp, t).unwrap());
            t_xi.check(norm(&out1.f[i]), bounds::xi_minus(&bp, t).unwrap());
        }

        // datum functionals and the forward residual envelopes
        let (k, l) = extract_kl(p.field, c, &v, &x, &path1);
        t_k.check(norm(&k), 2.0 * bounds::zeta_minus(&bp, 0.0).unwrap());
        t_l.check(norm(&l), 2.0 * bounds::xi_minus(&bp, 0.0).unwrap());
        for i in 0..grid.len() {
            let t = grid.node(i);
            if t < 0.0 {
                continue;
            }
            let hdot = sub(&out1.h[i], &k);
            let hval = sub(&out1.f[i], &axpy(&l, t, &k));
            t_zp.check(norm(&hdot), bounds::zeta_plus(&bp, t).unwrap());
            t_xp.check(norm(&hval), bounds::xi_plus(&bp, t).unwrap());
        }
    }
    vec![
        t_rho_t.outcome(),
        t_rho.outcome(),
        t_lam_t.outcome(),
        t_lam.outcome(),
        t_mu.outcome(),
        t_zeta.outcome(),
        t_xi.outcome(),
        t_k.outcome(),
        t_l.outcome(),
        t_zp.outcome(),
        t_xp.outcome(),
    ]
}

/// Fixed-point estimates: membership, envelopes, scattering-data bounds and
/// proximity to the straight-line comparators, on certified draws.
pub fn run_fixed_point_bounds<const D: usize, F: Field<D>>(
    p: &SuiteParams<D, F>,
) -> Vec<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5a);
    let (c, alpha) = (p.c, p.alpha);
    let spec = SolverSpec::default();
    let mut t_member = Tally::new("fixed point stays in the ball (3.1)");
    let mut t_zeta = Tally::new("solution velocity envelope (3.2)");
    let mut t_xi = Tally::new("solution position envelope (3.3)");
    let mut t_asc = Tally::new("velocity datum bound (3.6a)");
    let mut t_bsc = Tally::new("configuration datum bound (3.6b)");
    let mut t_hdot = Tally::new("residual velocity envelope (3.7)");
    let mut t_h = Tally::new("residual position envelope (3.8)");
    let mut t_prox_a = Tally::new("velocity proximity (2.18a)/(3.5a)");
    let mut t_prox_rescaled = Tally::new("rescaled velocity proximity (2.18b)/(3.5b)");
    let mut t_prox_b = Tally::new("configuration proximity (2.18c)/(3.5c)");
    let mut t_angle = Tally::new("small-angle regime (sup angle < pi/4)");
    let mut guard = 0usize;
    while t_member.draws < p.draws && guard < p.draws * 200 {
        guard += 1;
        // draw an (r, x) pair, then a certified speed above the mu = 1 root
        let r = rng.gen_range(0.05..(c / 2f64.sqrt() - 1e-3).min(1.0));
        let x_norm = rng.gen_range(0.0..2.0);
        let mut bp = BoundParams {
            c,
            d: D,
            alpha,
            beta0: p.beta[0],
            beta1: p.beta[1],
            beta2: p.beta[2],
            r,
            x_norm,
            v_norm: 0.0,
        };
        let Ok(z) = bounds::threshold_z(&bp) else {
            continue;
        };
        let Ok(z1) = bounds::threshold_z1(&bp) else {
            continue;
        };
        if z >= c * (1.0 - 1e-12) {
            continue;
        }
        let lo = z.max(z1);
        let u: f64 = rng.gen_range(0.05..1.0f64);
        bp.v_norm = c - (c - lo) * u * 0.8;
        if bounds::mu(&bp) >= 1.0 || bp.v_norm <= z1 {
            continue;
        }
        let (v, x) = orthogonal_pair::<D>(&mut rng, bp.v_norm, x_norm);
        let Ok((path, _diag)) =
            solve_deflection_picard(p.field, c, &v, &x, p.beta, alpha, &spec)
        else {
            continue;
        };
        t_member.check(path.norm_full(), bp.r);
        let (a_sc, b_sc) = extract_kl(p.field, c, &v, &x, &path);
        t_asc.check(norm(&a_sc), 2.0 * bounds::zeta_minus(&bp, 0.0).unwrap());
        t_bsc.check(norm(&b_sc), 2.0 * bounds::xi_minus(&bp, 0.0).unwrap());
        let mut worst_cos: f64 = 1.0;
        for i in 0..path.grid.len() {
            let t = path.grid.node(i);
            if t <= 0.0 {
                t_zeta.check(norm(&path.h[i]), bounds::zeta_minus(&bp, t).unwrap());
                t_xi.check(norm(&path.f[i]), bounds::xi_minus(&bp, t).unwrap());
            } else {
                let hdot = sub(&path.h[i], &a_sc);
                let hval = sub(&path.f[i], &axpy(&b_sc, t, &a_sc));
                t_hdot.check(norm(&hdot), bounds::zeta_plus(&bp, t).unwrap());
                t_h.check(norm(&hval), bounds::xi_plus(&bp, t).unwrap());
            }
            let vel = axpy(&v, 1.0, &path.h[i]);
            worst_cos = worst_cos.min(dot(&vel, &v) / (norm(&vel) * norm(&v)));
        }
        t_angle.check(worst_cos.acos(), std::f64::consts::FRAC_PI_4);

        // straight-line comparators on the same grid
        let zero = DeflectionPath::zero(path.grid);
        let (k0, l0) = extract_kl(p.field, c, &v, &x, &zero);
        t_prox_a.check(norm(&sub(&a_sc, &k0)), bounds::eps_a_prime(&bp));
        t_prox_b.check(norm(&sub(&b_sc, &l0)), bounds::eps_b(&bp));

        // rescaled proximity against the raw straight-line force integral
        let n = path.grid.len();
        let mut f_samples = vec![[0.0; D]; n];
        for i in 0..n {
            let pos = axpy(&x, path.grid.node(i), &v);
            f_samples[i] = force(&pos, &v, p.field, c);
        }
        let prefix = cumulative_integral(&f_samples, path.grid.step());
        let straight = prefix[n - 1];
        let rel = (c - bp.v_norm) * (c + bp.v_norm) / (c * c);
        let lhs = norm(&sub(&scale(&a_sc, 1.0 / rel.sqrt()), &straight));
        t_prox_rescaled.check(lhs, bounds::eps_a(&bp));
    }
    vec![
        t_member.outcome(),
        t_zeta.outcome(),
        t_xi.outcome(),
        t_asc.outcome(),
        t_bsc.outcome(),
        t_hdot.outcome(),
        t_h.outcome(),
        t_prox_a.outcome(),
        t_prox_rescaled.outcome(),
        t_prox_b.outcome(),
        t_angle.outcome(),
    ]
}

/// Runs every suite with the shared draw budget.
pub fn run_all<const D: usize, F: Field<D>>(p: &SuiteParams<D, F>) -> Vec<SuiteOutcome> {
    let mut out = run_force_bounds(p);
    out.extend(run_geometry_bounds(p));
    out.extend(run_operator_bounds(p));
    out.extend(run_fixed_point_bounds(p));
    out
}

/// Contraction certificate scan helper shared with tests: the largest
/// `c - v` whose certified majorant stays under `mu_target`.
pub fn certified_speed_gap<const D: usize>(
    beta: [f64; 3],
    c: f64,
    alpha: f64,
    x_norm: f64,
    mu_target: f64,
) -> Option<f64> {
    let mut gap = 1e-2 * c;
    for _ in 0..60 {
        if let Ok(cert) = certify_contraction(beta, c, D, alpha, c - gap, x_norm) {
            if cert.mu < mu_target {
                return Some(gap);
            }
        }
        gap *= 0.5;
        if gap < 1e-12 * c {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::families::{GaussianElectric, MagneticLoop, Profile};
    use crate::fields::{AnyField, SumField};

    fn suite_field() -> SumField<2> {
        SumField::new(vec![
            AnyField::GaussianElectric(GaussianElectric::new(0.02, 1.5)),
            AnyField::MagneticLoop(MagneticLoop::new(
                0,
                1,
                Profile::Gaussian { amp: 0.015, width: 1.5 },
            )),
        ])
    }

    #[test]
    fn quick_suites_have_no_violations() {
        let field = suite_field();
        let report = crate::fields::verify_decay(&field, 2.0, Default::default());
        assert!(report.pass);
        let params = SuiteParams {
            field: &field,
            c: 10.0,
            alpha: 2.0,
            beta: report.beta,
            draws: 60,
            seed: 42,
        };
        for outcome in run_all(&params) {
            assert!(
                outcome.passed(),
                "{}: {} violations over {} draws (worst ratio {})",
                outcome.name,
                outcome.violations,
                outcome.draws,
                outcome.worst_ratio
            );
            assert!(outcome.draws > 0, "{} never drew", outcome.name);
        }
    }
}
