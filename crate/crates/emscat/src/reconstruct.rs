//! Inverse problem: recovering `grad V`, `V` and the magnetic matrix from
//! the high-energy functionals, plus the demonstrations that the
//! second-order functionals cannot see radial potentials (any `d`) or
//! rotation-invariant planar magnetic fields (`d = 2`).
//!
//! The extraction formulas split the even/odd orientation parts of the
//! first-order functional:
//!
//! ```text
//! P(grad V)(theta, x) = -(w1(theta, x) + w1(-theta, x)) / 2
//! P B_{i,k}(theta, x) =  theta_k w3_i - theta_i w3_k          (plane rays)
//! P B_{i,k}(theta, x) =  [d_{y_k} w3~_i - d_{y_i} w3~_k]_{y = theta}
//! ```
//!
//! and the sampled transforms are inverted with 2-D filtered back-projection
//! on a plane, exactly the classical route.

use crate::asymptotics::{self, one_minus_speed_sq, AsymptoticsError, SweepContext};
use crate::dynamics::Method;
use crate::fields::Field;
use crate::linalg::{axpy, dot, norm, orthonormal_complement, scale, sub, unit};
use crate::quad::{plane_nodes, QuadSpec};
use crate::xray::{
    invert_xray_2d, ray_2d, GridFunction, PlaneEmbedding, Ray, Sinogram, XrayError,
};
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Central-difference steps of the derivative-based formulas: first-order
/// steps in the `y` and `x` arguments, and the wider outer step of the
/// nested second differences (the functionals carry ~1e-10 quadrature noise,
/// so the steps balance truncation against roundoff).
pub const FD_STEP_Y: f64 = 1e-4;
pub const FD_STEP_X: f64 = 1e-3;
pub const FD_STEP_NESTED: f64 = 2e-3;

#[derive(Debug, thiserror::Error)]
pub enum ReconstructError {
    #[error("ray direction is off the ({i}, {k}) coordinate manifold (|theta_j| = {defect:e})")]
    OffManifold { i: usize, k: usize, defect: f64 },
    #[error("dataset is missing solves on {failures} of {total} rays")]
    IncompleteDataset { failures: usize, total: usize },
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error(transparent)]
    Xray(#[from] XrayError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Even-part extraction: `P(grad V)(theta, x)` from the two orientations of
/// the first-order functional.
pub fn pgradv_from_w1<const D: usize>(w1_plus: &[f64; D], w1_minus: &[f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = -0.5 * (w1_plus[i] + w1_minus[i]);
    }
    out
}

fn check_on_manifold<const D: usize>(
    theta: &[f64; D],
    i: usize,
    k: usize,
) -> Result<(), ReconstructError> {
    let mut defect = 0.0f64;
    for (j, t) in theta.iter().enumerate() {
        if j != i && j != k {
            defect = defect.max(t.abs());
        }
    }
    if defect > 1e-12 {
        return Err(ReconstructError::OffManifold { i, k, defect });
    }
    Ok(())
}

/// Odd-part extraction on the coordinate manifold (`theta` supported on
/// components `i` and `k`, so `theta_i^2 + theta_k^2 = 1`):
/// `P B_{i,k} = theta_k w3_i - theta_i w3_k` with `w3` the odd part of `w1`.
pub fn pb_from_w1_plane<const D: usize>(
    theta: &[f64; D],
    w1_plus: &[f64; D],
    w1_minus: &[f64; D],
    i: usize,
    k: usize,
) -> Result<f64, ReconstructError> {
    check_on_manifold(theta, i, k)?;
    let odd_i = 0.5 * (w1_plus[i] - w1_minus[i]);
    let odd_k = 0.5 * (w1_plus[k] - w1_minus[k]);
    Ok(theta[k] * odd_i - theta[i] * odd_k)
}

/// Same extraction fed directly by `w3` samples (magnetic-only data).
pub fn pb_from_w3_plane<const D: usize>(
    theta: &[f64; D],
    w3_val: &[f64; D],
    i: usize,
    k: usize,
) -> Result<f64, ReconstructError> {
    check_on_manifold(theta, i, k)?;
    Ok(theta[k] * w3_val[i] - theta[i] * w3_val[k])
}

/// Derivative-based extraction valid on every ray: the even-in-orientation
/// combination of `y`-derivatives of the extended first-order functional,
/// central differences at `y = +-theta`.
pub fn pb_from_w1_derivative<const D: usize, S>(
    sampler: &S,
    ray: &Ray<D>,
    i: usize,
    k: usize,
) -> Result<f64, ReconstructError>
where
    S: Fn(&[f64; D], &[f64; D]) -> Result<[f64; D], AsymptoticsError>,
{
    let h = FD_STEP_Y;
    let diff = |base: &[f64; D], comp_wrt: usize, comp_of: usize| -> Result<f64, ReconstructError> {
        let mut yp = *base;
        let mut ym = *base;
        yp[comp_wrt] += h;
        ym[comp_wrt] -= h;
        Ok((sampler(&yp, &ray.offset)?[comp_of] - sampler(&ym, &ray.offset)?[comp_of]) / (2.0 * h))
    };
    let theta = ray.theta;
    let neg = scale(&theta, -1.0);
    let val = 0.5
        * (diff(&theta, k, i)? + diff(&neg, k, i)? - diff(&theta, i, k)? - diff(&neg, i, k)?);
    Ok(val)
}

/// Derivative-based extraction from the magnetic-only extension:
/// `P B_{i,k} = [d_{y_k} w3~_i - d_{y_i} w3~_k]_{y = theta}`.
pub fn pb_from_w3_derivative<const D: usize, S>(
    sampler: &S,
    ray: &Ray<D>,
    i: usize,
    k: usize,
) -> Result<f64, ReconstructError>
where
    S: Fn(&[f64; D], &[f64; D]) -> Result<[f64; D], AsymptoticsError>,
{
    let h = FD_STEP_Y;
    let diff = |comp_wrt: usize, comp_of: usize| -> Result<f64, ReconstructError> {
        let mut yp = ray.theta;
        let mut ym = ray.theta;
        yp[comp_wrt] += h;
        ym[comp_wrt] -= h;
        Ok((sampler(&yp, &ray.offset)?[comp_of] - sampler(&ym, &ray.offset)?[comp_of]) / (2.0 * h))
    };
    Ok(diff(k, i)? - diff(i, k)?)
}

/// Direct quadrature of `P B_{i,k}` along a ray: the oracle the extraction
/// formulas are checked against.
pub fn pb_direct<const D: usize, F: Field<D>>(
    field: &F,
    ray: &Ray<D>,
    i: usize,
    k: usize,
    spec: &QuadSpec,
) -> Result<f64, ReconstructError> {
    let g = |x: &[f64; D]| [field.b(x)[i][k]];
    Ok(crate::xray::xray_transform(&g, ray, &field.decay(), 1, spec)?[0])
}

/// Residual of the second-order identity linking the `x`-curl of the
/// extended second-order functional to the transforms of `B`:
///
/// ```text
/// sum_j theta_j [theta_k PB_{i,j} - theta_i PB_{k,j}] - PB_{i,k}
///   = d_{x_i} w4~_k - d_{x_k} w4~_i .
/// ```
pub fn w4_identity_check<const D: usize, F: Field<D>>(
    field: &F,
    ray: &Ray<D>,
    i: usize,
    k: usize,
    spec: &QuadSpec,
) -> Result<f64, ReconstructError> {
    let mut lhs = -pb_direct(field, ray, i, k, spec)?;
    for j in 0..D {
        if ray.theta[j].abs() < 1e-15 {
            continue;
        }
        let pb_ij = pb_direct(field, ray, i, j, spec)?;
        let pb_kj = pb_direct(field, ray, k, j, spec)?;
        lhs += ray.theta[j] * (ray.theta[k] * pb_ij - ray.theta[i] * pb_kj);
    }
    let h = FD_STEP_X;
    let d_of = |comp_wrt: usize, comp_of: usize| -> Result<f64, ReconstructError> {
        let mut xp = ray.offset;
        let mut xm = ray.offset;
        xp[comp_wrt] += h;
        xm[comp_wrt] -= h;
        let vp = asymptotics::w4_tilde(field, &ray.theta, &xp, spec)?;
        let vm = asymptotics::w4_tilde(field, &ray.theta, &xm, spec)?;
        Ok((vp[comp_of] - vm[comp_of]) / (2.0 * h))
    };
    let rhs = d_of(i, k)? - d_of(k, i)?;
    Ok((lhs - rhs).abs())
}

/// `P B_{j,k}` from the second-order functional alone, valid for `d >= 4` on
/// rays with `theta_j = theta_k = 0`: the identity collapses to
/// `PB_{j,k} = d_{x_k} w4~_j - d_{x_j} w4~_k`.
pub fn pb_from_w4_d4<const D: usize, F: Field<D>>(
    field: &F,
    ray: &Ray<D>,
    j: usize,
    k: usize,
    spec: &QuadSpec,
) -> Result<f64, ReconstructError> {
    let defect = ray.theta[j].abs().max(ray.theta[k].abs());
    if defect > 1e-12 {
        return Err(ReconstructError::OffManifold { i: j, k, defect });
    }
    let h = FD_STEP_X;
    let d_of = |comp_wrt: usize, comp_of: usize| -> Result<f64, ReconstructError> {
        let mut xp = ray.offset;
        let mut xm = ray.offset;
        xp[comp_wrt] += h;
        xm[comp_wrt] -= h;
        let vp = asymptotics::w4_tilde(field, &ray.theta, &xp, spec)?;
        let vm = asymptotics::w4_tilde(field, &ray.theta, &xm, spec)?;
        Ok((vp[comp_of] - vm[comp_of]) / (2.0 * h))
    };
    Ok(d_of(k, j)? - d_of(j, k)?)
}

// ---------------------------------------------------------------------------
// Fourier reconstruction of the derivatives of B for d = 3
// ---------------------------------------------------------------------------

/// Cached samples of the second-difference triple
/// `(w4~_{2,3,l}, w4~_{1,3,l}, w4~_{1,2,l})(theta, y)` on the plane
/// orthogonal to `theta`, reusable across Fourier weights.
pub struct W4PlaneSamples {
    pub theta: [f64; 3],
    pub basis: ([f64; 3], [f64; 3]),
    /// `(u, v, weight)` quadrature nodes in plane coordinates.
    pub nodes: Vec<(f64, f64, f64)>,
    /// The triple at each node.
    pub values: Vec<[f64; 3]>,
}

/// `w4~_{m,n,l} = d_{x_l} (d_{x_m} w4~_n - d_{x_n} w4~_m)` for the three
/// pairs `(2,3), (1,3), (1,2)` (0-based `(1,2), (0,2), (0,1)`), nested
/// central differences.
fn w4_second_diffs<F: Field<3>>(
    field: &F,
    theta: &[f64; 3],
    y: &[f64; 3],
    l: usize,
    spec: &QuadSpec,
) -> Result<[f64; 3], AsymptoticsError> {
    let curl = |x: &[f64; 3]| -> Result<[f64; 3], AsymptoticsError> {
        // D_{mn} = d_{x_m} w4~_n - d_{x_n} w4~_m for the three pairs
        let h = FD_STEP_X;
        let mut grads = [[0.0; 3]; 3]; // grads[m][n] = d_{x_m} w4~_n
        for m in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[m] += h;
            xm[m] -= h;
            let vp = asymptotics::w4_tilde(field, theta, &xp, spec)?;
            let vm = asymptotics::w4_tilde(field, theta, &xm, spec)?;
            for n in 0..3 {
                grads[m][n] = (vp[n] - vm[n]) / (2.0 * h);
            }
        }
        Ok([
            grads[1][2] - grads[2][1],
            grads[0][2] - grads[2][0],
            grads[0][1] - grads[1][0],
        ])
    };
    let h = FD_STEP_NESTED;
    let mut yp = *y;
    let mut ym = *y;
    yp[l] += h;
    ym[l] -= h;
    let cp = curl(&yp)?;
    let cm = curl(&ym)?;
    Ok([
        (cp[0] - cm[0]) / (2.0 * h),
        (cp[1] - cm[1]) / (2.0 * h),
        (cp[2] - cm[2]) / (2.0 * h),
    ])
}

/// Samples the second-difference triple over the plane orthogonal to
/// `theta`, on a tensor panel grid of half-extent `half_extent`.
pub fn sample_w4_derivs_on_plane<F: Field<3>>(
    field: &F,
    theta: &[f64; 3],
    l: usize,
    half_extent: f64,
    panels_per_axis: usize,
    spec: &QuadSpec,
) -> Result<W4PlaneSamples, ReconstructError> {
    let basis = orthonormal_complement(theta);
    let (b1, b2) = (basis[0], basis[1]);
    let nodes = plane_nodes(half_extent, panels_per_axis);
    let values: Vec<[f64; 3]> = nodes
        .par_iter()
        .map(|&(u, v, _)| {
            let y = axpy(&scale(&b1, u), v, &b2);
            w4_second_diffs(field, theta, &y, l, spec).unwrap_or([f64::NAN; 3])
        })
        .collect();
    Ok(W4PlaneSamples {
        theta: *theta,
        basis: (b1, b2),
        nodes,
        values,
    })
}

/// Assembles the Fourier vector
/// `(-F B_{2,3,l}, F B_{1,3,l}, -F B_{1,2,l})(p)` from plane samples whose
/// `theta` are orthogonal to `p` (two planes for `p != 0`, three for the
/// zero frequency). The result lies in the span of the sampled `theta`s by
/// construction.
pub fn fourier_from_samples(samples: &[&W4PlaneSamples], p: &[f64; 3]) -> [Complex64; 3] {
    let norm_const = (2.0 * std::f64::consts::PI).powf(-1.5);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for s in samples {
        // W = int_plane e^{-i y.p} (w~_{2,3,l}, -w~_{1,3,l}, w~_{1,2,l}) dy
        let mut w = [Complex64::new(0.0, 0.0); 3];
        for (idx, &(u, v, wt)) in s.nodes.iter().enumerate() {
            let y = axpy(&scale(&s.basis.0, u), v, &s.basis.1);
            let phase = Complex64::from_polar(1.0, -dot(&y, p));
            let vals = s.values[idx];
            w[0] += wt * phase * vals[0];
            w[1] -= wt * phase * vals[1];
            w[2] += wt * phase * vals[2];
        }
        let proj = s.theta[0] * w[0] + s.theta[1] * w[1] + s.theta[2] * w[2];
        for i in 0..3 {
            out[i] += norm_const * proj * s.theta[i];
        }
    }
    out
}

/// Full evaluation of the Fourier formulas: `p = 0` uses any orthonormal
/// basis, `p != 0` an orthonormal family of the plane orthogonal to `p`.
pub fn fourier_b_derivs_from_w4<F: Field<3>>(
    field: &F,
    p: &[f64; 3],
    l: usize,
    half_extent: f64,
    panels_per_axis: usize,
    spec: &QuadSpec,
) -> Result<[Complex64; 3], ReconstructError> {
    let thetas: Vec<[f64; 3]> = if norm(p) == 0.0 {
        vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    } else {
        let p_hat = unit(p).expect("nonzero p");
        orthonormal_complement(&p_hat)
    };
    let samples: Vec<W4PlaneSamples> = thetas
        .iter()
        .map(|th| sample_w4_derivs_on_plane(field, th, l, half_extent, panels_per_axis, spec))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&W4PlaneSamples> = samples.iter().collect();
    Ok(fourier_from_samples(&refs, p))
}

/// Direct-quadrature oracle: `F[d_l B_{i,k}](p) = (2 pi)^{-3/2}
/// int d_l B_{i,k}(x) e^{-i x.p} dx` over a truncated cube, assembled into
/// the same signed triple.
pub fn fourier_b_derivs_oracle<F: Field<3>>(
    field: &F,
    p: &[f64; 3],
    l: usize,
    half_extent: f64,
    panels_per_axis: usize,
) -> [Complex64; 3] {
    let grid = crate::quad::PanelGrid::uniform(-half_extent, half_extent, panels_per_axis);
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    // tensor GL16 over the cube
    let line: Vec<(f64, f64)> = grid
        .edges
        .windows(2)
        .flat_map(|w| {
            let (a, b) = (w[0], w[1]);
            crate::quad::GL16
                .iter()
                .map(move |(n, wt)| (a + 0.5 * (b - a) * (n + 1.0), 0.5 * (b - a) * wt))
        })
        .collect();
    let planes: Vec<[Complex64; 3]> = line
        .par_iter()
        .map(|&(x0, w0)| {
            let mut local = [Complex64::new(0.0, 0.0); 3];
            for &(x1, w1) in &line {
                for &(x2, w2) in &line {
                    let x = [x0, x1, x2];
                    let db = field.db(&x);
                    let phase = Complex64::from_polar(1.0, -dot(&x, p));
                    let w = w0 * w1 * w2;
                    local[0] += w * phase * -db[l][1][2];
                    local[1] += w * phase * db[l][0][2];
                    local[2] += w * phase * -db[l][0][1];
                }
            }
            local
        })
        .collect();
    for pl in planes {
        for i in 0..3 {
            acc[i] += pl[i];
        }
    }
    let norm_const = (2.0 * std::f64::consts::PI).powf(-1.5);
    for a in acc.iter_mut() {
        *a *= norm_const;
    }
    acc
}

// ---------------------------------------------------------------------------
// Scattering-data reconstruction pipelines
// ---------------------------------------------------------------------------

/// Angle/offset layout of a simulated dataset.
#[derive(Debug, Clone, Copy)]
pub struct RayGridSpec {
    pub angles: usize,
    pub offsets: usize,
    pub extent: f64,
}

impl RayGridSpec {
    pub fn offsets_vec(&self) -> Vec<f64> {
        (0..self.offsets)
            .map(|k| {
                -self.extent + 2.0 * self.extent * k as f64 / (self.offsets - 1).max(1) as f64
            })
            .collect()
    }

    pub fn angles_vec(&self) -> Vec<f64> {
        (0..self.angles)
            .map(|j| std::f64::consts::PI * j as f64 / self.angles as f64)
            .collect()
    }
}

/// Velocity data simulated on both orientations of every ray of a plane
/// grid at one speed: the input of the reconstruction pipelines.
pub struct AscDataset<const D: usize> {
    pub s: f64,
    pub c: f64,
    pub grid: RayGridSpec,
    pub plane: PlaneEmbedding<D>,
    /// Plane coordinate axes' indices when the plane is a coordinate plane.
    pub axes: (usize, usize),
    pub asc_plus: Vec<[f64; D]>,
    pub asc_minus: Vec<[f64; D]>,
    pub failures: usize,
}

/// Simulates the velocity datum on every `(+theta, -theta)` ray pair of the
/// grid at speed `s` (fraction of `c` premultiplied by the caller).
pub fn simulate_dataset<const D: usize, F: Field<D>>(
    field: &F,
    ctx: &SweepContext,
    plane: PlaneEmbedding<D>,
    axes: (usize, usize),
    grid: RayGridSpec,
    s: f64,
    method: Method,
) -> Result<AscDataset<D>, ReconstructError> {
    let angles = grid.angles_vec();
    let offsets = grid.offsets_vec();
    let results: Vec<Result<([f64; D], [f64; D]), ReconstructError>> = angles
        .par_iter()
        .flat_map(|&phi| {
            offsets
                .par_iter()
                .map(move |&q| (phi, q))
                .collect::<Vec<_>>()
        })
        .map(|(phi, q)| {
            let ray = plane.embed_ray(&ray_2d(phi, q))?;
            let plus = asymptotics::solve_on_ray(field, ctx, &ray, s, method)?;
            let minus = asymptotics::solve_on_ray(field, ctx, &ray.reversed(), s, method)?;
            Ok((plus.a_sc, minus.a_sc))
        })
        .collect();
    let mut asc_plus = Vec::with_capacity(results.len());
    let mut asc_minus = Vec::with_capacity(results.len());
    let mut failures = 0usize;
    for r in results {
        match r {
            Ok((p, m)) => {
                asc_plus.push(p);
                asc_minus.push(m);
            }
            Err(_) => {
                failures += 1;
                asc_plus.push([f64::NAN; D]);
                asc_minus.push([f64::NAN; D]);
            }
        }
    }
    if failures > 0 {
        return Err(ReconstructError::IncompleteDataset {
            failures,
            total: asc_plus.len(),
        });
    }
    Ok(AscDataset {
        s,
        c: ctx.c,
        grid,
        plane,
        axes,
        asc_plus,
        asc_minus,
        failures,
    })
}

/// A reconstruction outcome: grid estimate, truth, relative error and how
/// the numbers were produced.
pub struct ReconstructionReport {
    pub target: String,
    pub estimate: GridFunction,
    pub truth: GridFunction,
    pub rel_l2: f64,
    pub provenance: String,
    /// Secondary internal-consistency figure (path-independence defect for
    /// the potential pipeline, 0 otherwise).
    pub consistency: f64,
}

impl ReconstructionReport {
    /// Writes `<stem>.csv` (the estimate), `<stem>_truth.csv` and a flat
    /// `<stem>_meta.txt` sidecar.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<(), ReconstructError> {
        std::fs::create_dir_all(dir)?;
        self.estimate.write_csv(&dir.join(format!("{stem}.csv")))?;
        self.truth.write_csv(&dir.join(format!("{stem}_truth.csv")))?;
        let mut meta = std::io::BufWriter::new(std::fs::File::create(
            dir.join(format!("{stem}_meta.txt")),
        )?);
        writeln!(meta, "target = {}", self.target)?;
        writeln!(meta, "rel_l2_error = {}", crate::fmt_f64(self.rel_l2))?;
        writeln!(meta, "consistency = {}", crate::fmt_f64(self.consistency))?;
        writeln!(meta, "grid_n = {}", self.estimate.n)?;
        writeln!(meta, "extent = {}", crate::fmt_f64(self.estimate.extent))?;
        writeln!(meta, "provenance = {}", self.provenance)?;
        Ok(())
    }
}

/// Scale factor turning the velocity datum into a first-order functional
/// estimate: `s / sqrt(1 - s^2/c^2)`.
fn w1_scale(s: f64, c: f64) -> f64 {
    s / one_minus_speed_sq(s, c).sqrt()
}

/// Reconstructs the magnetic component `B_{i,k}` on the dataset's plane via
/// the odd-part extraction and filtered back-projection; reports the
/// relative L2 error against the field truth on a congruent grid.
pub fn reconstruct_b<const D: usize, F: Field<D>>(
    field: &F,
    dataset: &AscDataset<D>,
    grid_n: usize,
) -> Result<ReconstructionReport, ReconstructError> {
    let (i, k) = dataset.axes;
    let scale_fac = w1_scale(dataset.s, dataset.c);
    let angles = dataset.grid.angles_vec();
    let offsets = dataset.grid.offsets_vec();
    let mut sino = Sinogram::new(
        angles.clone(),
        offsets.clone(),
        dataset.grid.extent,
        format!("PB_{i}{k} from velocity data at s = {}", dataset.s),
        1,
    );
    for (a, &phi) in angles.iter().enumerate() {
        for (q, _) in offsets.iter().enumerate() {
            let idx = a * offsets.len() + q;
            let ray = dataset.plane.embed_ray(&ray_2d(phi, offsets[q]))?;
            let w1p = scale(&dataset.asc_plus[idx], scale_fac);
            let w1m = scale(&dataset.asc_minus[idx], scale_fac);
            let pb = pb_from_w1_plane(&ray.theta, &w1p, &w1m, i, k)?;
            sino.set(a, q, 0, pb);
        }
    }
    let estimate = invert_xray_2d(&sino, grid_n)?;
    let truth = GridFunction::from_fn(dataset.grid.extent, grid_n, |u, v| {
        field.b(&dataset.plane.embed_point(u, v))[i][k]
    });
    let rel_l2 = estimate.rel_l2_error(&truth);
    Ok(ReconstructionReport {
        target: format!("B_{i}{k}"),
        estimate,
        truth,
        rel_l2,
        provenance: format!(
            "a_sc at s={} -> rescale {} -> odd part -> plane manifold extraction -> FBP",
            dataset.s, scale_fac
        ),
        consistency: 0.0,
    })
}

/// Reconstructs the scalar potential on the dataset's plane: even-part
/// extraction of `P(grad V)`, FBP per gradient component, then integration
/// of the gradient from the far boundary (where `V` has decayed). The two
/// integration directions are averaged and their mismatch reported.
pub fn reconstruct_v<const D: usize, F: Field<D>>(
    field: &F,
    dataset: &AscDataset<D>,
    grid_n: usize,
) -> Result<ReconstructionReport, ReconstructError> {
    let scale_fac = w1_scale(dataset.s, dataset.c);
    let angles = dataset.grid.angles_vec();
    let offsets = dataset.grid.offsets_vec();
    let mut sino_g1 = Sinogram::new(
        angles.clone(),
        offsets.clone(),
        dataset.grid.extent,
        "P dV/du",
        1,
    );
    let mut sino_g2 = Sinogram::new(
        angles.clone(),
        offsets.clone(),
        dataset.grid.extent,
        "P dV/dv",
        1,
    );
    for (a, _) in angles.iter().enumerate() {
        for (q, _) in offsets.iter().enumerate() {
            let idx = a * offsets.len() + q;
            let w1p = scale(&dataset.asc_plus[idx], scale_fac);
            let w1m = scale(&dataset.asc_minus[idx], scale_fac);
            let pgrad = pgradv_from_w1(&w1p, &w1m);
            sino_g1.set(a, q, 0, dot(&pgrad, &dataset.plane.e1));
            sino_g2.set(a, q, 0, dot(&pgrad, &dataset.plane.e2));
        }
    }
    let g1 = invert_xray_2d(&sino_g1, grid_n)?;
    let g2 = invert_xray_2d(&sino_g2, grid_n)?;

    // integrate the gradient along rows (from the left boundary) and along
    // columns (from the bottom); V ~ 0 on the boundary by decay
    let n = grid_n;
    let h = 2.0 * dataset.grid.extent / (n - 1) as f64;
    let mut v_rows = GridFunction::zeros(dataset.grid.extent, n);
    let mut v_cols = GridFunction::zeros(dataset.grid.extent, n);
    for iy in 0..n {
        for ix in 1..n {
            v_rows.values[iy * n + ix] = v_rows.values[iy * n + ix - 1]
                + 0.5 * h * (g1.values[iy * n + ix - 1] + g1.values[iy * n + ix]);
        }
    }
    for ix in 0..n {
        for iy in 1..n {
            v_cols.values[iy * n + ix] = v_cols.values[(iy - 1) * n + ix]
                + 0.5 * h * (g2.values[(iy - 1) * n + ix] + g2.values[iy * n + ix]);
        }
    }
    let consistency = v_rows.rel_l2_error(&v_cols).min(
        // relative to the larger amplitude to avoid 0/0 on trivial fields
        (v_rows
            .values
            .iter()
            .zip(&v_cols.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
            / v_rows.max_abs().max(v_cols.max_abs()).max(1e-300)
            / (n as f64),
    );
    let mut estimate = GridFunction::zeros(dataset.grid.extent, n);
    for idx in 0..n * n {
        estimate.values[idx] = 0.5 * (v_rows.values[idx] + v_cols.values[idx]);
    }
    let truth = GridFunction::from_fn(dataset.grid.extent, n, |u, v| {
        field.v(&dataset.plane.embed_point(u, v))
    });
    let rel_l2 = estimate.rel_l2_error(&truth);
    Ok(ReconstructionReport {
        target: "V".into(),
        estimate,
        truth,
        rel_l2,
        provenance: format!(
            "a_sc at s={} -> rescale -> even part = P(grad V) -> FBP per component -> boundary integration",
            dataset.s
        ),
        consistency,
    })
}

// ---------------------------------------------------------------------------
// Non-uniqueness demonstrations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonuniqueKind {
    /// Radial scalar potentials are invisible to the second-order electric
    /// functional.
    Electric,
    /// Rotation-invariant planar magnetic fields are invisible to the
    /// second-order magnetic functional in `d = 2`.
    Magnetic2d,
}

/// Outcome of a kernel demonstration: the invisible functional stays at
/// quadrature noise while a first-order witness sees the field.
#[derive(Debug, Clone)]
pub struct NonuniquenessReport {
    pub kind: NonuniqueKind,
    pub rays: usize,
    /// Max of the functional that is blind to the field.
    pub kernel_max: f64,
    /// Max of the functional that distinguishes the field.
    pub witness_max: f64,
    /// Max additivity defect of the blind functional when the kernel field
    /// is superposed onto a visible one.
    pub additivity_defect: f64,
}

/// Runs the kernel demonstration over `rays` deterministic pseudo-random
/// rays.
pub fn nonuniqueness_demo(
    kind: NonuniqueKind,
    rays: usize,
    seed: u64,
    spec: &QuadSpec,
) -> Result<NonuniquenessReport, ReconstructError> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut kernel_max = 0.0f64;
    let mut witness_max = 0.0f64;
    let mut additivity_defect = 0.0f64;
    match kind {
        NonuniqueKind::Electric => {
            let radial = crate::fields::InversePowerElectric::<2>::new(0.5, 2.5);
            // a visibly asymmetric potential to superpose with
            let offcenter = crate::fields::GaussianElectric::<2>::with_center(
                0.4,
                1.2,
                [0.9, -0.4],
            );
            let both = crate::fields::SumField::new(vec![
                crate::fields::AnyField::InversePowerElectric(radial.clone()),
                crate::fields::AnyField::GaussianElectric(offcenter.clone()),
            ]);
            for idx in 0..rays {
                let ray = ray_2d(
                    rng.gen_range(0.0..std::f64::consts::PI),
                    rng.gen_range(-3.0..3.0),
                );
                let w2_rad = asymptotics::w2(&radial, 1.0, &ray, spec)?;
                kernel_max = kernel_max.max(norm(&w2_rad));
                witness_max =
                    witness_max.max(norm(&asymptotics::w1(&radial, 1.0, &ray, spec)?));
                if idx % 100 == 0 {
                    let w2_sum = asymptotics::w2(&both, 1.0, &ray, spec)?;
                    let w2_off = asymptotics::w2(&offcenter, 1.0, &ray, spec)?;
                    additivity_defect =
                        additivity_defect.max(norm(&sub(&w2_sum, &w2_off)));
                }
            }
        }
        NonuniqueKind::Magnetic2d => {
            let field = crate::fields::MagneticLoop::<2>::new(
                0,
                1,
                crate::fields::Profile::InversePower { amp: 0.5, sigma: 2.0 },
            );
            for _ in 0..rays {
                let ray = ray_2d(
                    rng.gen_range(0.0..std::f64::consts::PI),
                    rng.gen_range(-3.0..3.0),
                );
                kernel_max = kernel_max.max(norm(&asymptotics::w4(&field, &ray, spec)?));
                witness_max = witness_max.max(norm(&asymptotics::w3(&field, &ray, spec)?));
            }
        }
    }
    Ok(NonuniquenessReport {
        kind,
        rays,
        kernel_max,
        witness_max,
        additivity_defect,
    })
}
