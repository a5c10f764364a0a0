//! Ray geometry on the manifold of oriented lines, the forward X-ray
//! transform, and its 2-D inversion by filtered back-projection.
//!
//! A line is parametrized as `(theta, x)` with `theta` a unit direction and
//! `x` the offset orthogonal to it. Scalar sinograms live on an angle grid
//! over `[0, pi)` and a uniform offset grid; vector-valued data keeps both
//! orientations upstream and is reduced to scalar sinograms before inversion.

use crate::fields::DecayModel;
use crate::linalg::{axpy, dot, norm, scale, sub, unit};
use crate::quad::{self, QuadSpec};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum XrayError {
    #[error("ray direction must be nonzero")]
    ZeroDirection,
    #[error("ray invariants violated: |theta| - 1 = {unit_defect:e}, theta.x = {ortho_defect:e}")]
    InvalidRay { unit_defect: f64, ortho_defect: f64 },
    #[error("declared decay exponent {beta} is not integrable along lines (needs > 1)")]
    NonIntegrableDecay { beta: f64 },
    #[error("sinogram must provide at least 2 angles and 2 offsets, got {angles} x {offsets}")]
    InsufficientCoverage { angles: usize, offsets: usize },
    #[error("plane tangent vectors must be orthonormal (defect {defect:e})")]
    NonOrthonormalTangent { defect: f64 },
    #[error("sinogram holds {components} components; expected a scalar")]
    NotScalar { components: usize },
    #[error("inconsistent sinogram layout: {what}")]
    BadLayout { what: String },
    #[error("quadrature failure: {0}")]
    Quad(#[from] quad::QuadError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// An oriented line `t -> x + t theta` with `|theta| = 1`, `theta . x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray<const D: usize> {
    pub theta: [f64; D],
    pub offset: [f64; D],
}

impl<const D: usize> Ray<D> {
    /// Checked constructor; both invariants must hold to `1e-12`.
    pub fn new(theta: [f64; D], offset: [f64; D]) -> Result<Self, XrayError> {
        let unit_defect = (norm(&theta) - 1.0).abs();
        let ortho_defect = dot(&theta, &offset).abs();
        if unit_defect > 1e-12 || ortho_defect > 1e-12 * (1.0 + norm(&offset)) {
            return Err(XrayError::InvalidRay {
                unit_defect,
                ortho_defect,
            });
        }
        Ok(Ray { theta, offset })
    }

    /// Point on the line at parameter `t`.
    pub fn point(&self, t: f64) -> [f64; D] {
        axpy(&self.offset, t, &self.theta)
    }

    /// The same line traversed backwards; the offset is unchanged.
    pub fn reversed(&self) -> Ray<D> {
        Ray {
            theta: scale(&self.theta, -1.0),
            offset: self.offset,
        }
    }
}

/// Normalizes `(y, x)` to the ray through `x` with direction `y/|y|`:
/// the parallel component of `x` is removed.
pub fn project_to_ray<const D: usize>(y: &[f64; D], x: &[f64; D]) -> Result<Ray<D>, XrayError> {
    let theta = unit(y).ok_or(XrayError::ZeroDirection)?;
    let offset = sub(x, &scale(&theta, dot(x, &theta)));
    Ok(Ray { theta, offset })
}

/// Line integral `Pf(theta, x) = int f(t theta + x) dt` of a decaying
/// integrand. `order` selects which derivative-order envelope of the decay
/// metadata sizes the truncation (0 for potentials, 1 for forces and `B`).
pub fn xray_transform<const D: usize, const N: usize>(
    f: &(impl Fn(&[f64; D]) -> [f64; N] + Sync),
    ray: &Ray<D>,
    decay: &DecayModel,
    order: usize,
    spec: &QuadSpec,
) -> Result<[f64; N], XrayError> {
    if decay.alpha + order as f64 <= 1.0 {
        return Err(XrayError::NonIntegrableDecay {
            beta: decay.alpha + order as f64,
        });
    }
    // theta.offset = 0, so |x + t theta| >= |t| and the tail needs no shift
    let r_max = decay.line_tail_radius(order, 0, 0.0, spec.tail_tol);
    let core = decay.cutoff_radius(order, 0.5 * decay.beta[order.min(2)].max(1e-12)) + 1.0;
    let g = |t: f64| f(&ray.point(t));
    Ok(quad::integrate_line(&g, 0.0, core.min(r_max), r_max, spec)?)
}

/// Sampled X-ray transform: `angles x offsets x components` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    /// Angles in radians, strictly increasing within `[0, pi)`.
    pub angles: Vec<f64>,
    /// Signed offsets, strictly increasing, spanning `[-extent, extent]`.
    pub offsets: Vec<f64>,
    pub extent: f64,
    /// Identifier of the field/functional that produced the data.
    pub label: String,
    pub components: usize,
    /// Row-major `[angle][offset][component]`.
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn new(
        angles: Vec<f64>,
        offsets: Vec<f64>,
        extent: f64,
        label: impl Into<String>,
        components: usize,
    ) -> Self {
        let values = vec![0.0; angles.len() * offsets.len() * components];
        Sinogram {
            angles,
            offsets,
            extent,
            label: label.into(),
            components,
            values,
        }
    }

    /// Uniform grid: `m` angles over `[0, pi)`, `n` offsets over `[-l, l]`.
    pub fn uniform_grid(
        m: usize,
        n: usize,
        l: f64,
        label: impl Into<String>,
        components: usize,
    ) -> Self {
        let angles = (0..m)
            .map(|j| std::f64::consts::PI * j as f64 / m as f64)
            .collect();
        let offsets = (0..n)
            .map(|k| -l + 2.0 * l * k as f64 / (n - 1).max(1) as f64)
            .collect();
        Sinogram::new(angles, offsets, l, label, components)
    }

    #[inline]
    pub fn idx(&self, a: usize, q: usize, comp: usize) -> usize {
        (a * self.offsets.len() + q) * self.components + comp
    }

    pub fn get(&self, a: usize, q: usize, comp: usize) -> f64 {
        self.values[self.idx(a, q, comp)]
    }

    pub fn set(&mut self, a: usize, q: usize, comp: usize, v: f64) {
        let i = self.idx(a, q, comp);
        self.values[i] = v;
    }

    /// Extracts one component as a scalar sinogram.
    pub fn component(&self, comp: usize) -> Sinogram {
        let mut out = Sinogram::new(
            self.angles.clone(),
            self.offsets.clone(),
            self.extent,
            format!("{}[{}]", self.label, comp),
            1,
        );
        for a in 0..self.angles.len() {
            for q in 0..self.offsets.len() {
                out.set(a, q, 0, self.get(a, q, comp));
            }
        }
        out
    }

    /// CSV with header `phi,q,component,value`, 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<(), XrayError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "phi,q,component,value")?;
        for a in 0..self.angles.len() {
            for q in 0..self.offsets.len() {
                for c in 0..self.components {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        crate::fmt_f64(self.angles[a]),
                        crate::fmt_f64(self.offsets[q]),
                        c,
                        crate::fmt_f64(self.get(a, q, c))
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn read_csv(
        path: &Path,
        extent: f64,
        label: impl Into<String>,
    ) -> Result<Sinogram, XrayError> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut angles: Vec<f64> = Vec::new();
        let mut offsets: Vec<f64> = Vec::new();
        let mut rows: Vec<(f64, f64, usize, f64)> = Vec::new();
        let mut components = 1usize;
        for (i, line) in file.lines().enumerate() {
            let line = line?;
            if i == 0 {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(XrayError::BadLayout {
                    what: format!("line {} has {} fields", i + 1, parts.len()),
                });
            }
            let parse = |s: &str| -> Result<f64, XrayError> {
                s.parse().map_err(|_| XrayError::BadLayout {
                    what: format!("bad float {s:?} on line {}", i + 1),
                })
            };
            let phi = parse(parts[0])?;
            let q = parse(parts[1])?;
            let c: usize = parts[2].parse().map_err(|_| XrayError::BadLayout {
                what: format!("bad component on line {}", i + 1),
            })?;
            components = components.max(c + 1);
            if !angles.contains(&phi) {
                angles.push(phi);
            }
            if !offsets.contains(&q) {
                offsets.push(q);
            }
            rows.push((phi, q, c, parse(parts[3])?));
        }
        let mut sino = Sinogram::new(angles, offsets, extent, label, components);
        for (phi, q, c, v) in rows {
            let a = sino.angles.iter().position(|&x| x == phi).unwrap();
            let k = sino.offsets.iter().position(|&x| x == q).unwrap();
            sino.set(a, k, c, v);
        }
        Ok(sino)
    }
}

/// A function sampled on a square `n x n` grid over `[-extent, extent]^2`,
/// `values[iy * n + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub extent: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(extent: f64, n: usize) -> Self {
        GridFunction {
            extent,
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + 2.0 * self.extent * i as f64 / (self.n - 1).max(1) as f64
    }

    /// Samples `f` on the grid.
    pub fn from_fn(extent: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = GridFunction::zeros(extent, n);
        for iy in 0..n {
            let y = g.coord(iy);
            for ix in 0..n {
                let x = g.coord(ix);
                g.values[iy * n + ix] = f(x, y);
            }
        }
        g
    }

    /// Relative L2 distance to `truth` (absolute L2 norm when `truth` is 0).
    pub fn rel_l2_error(&self, truth: &GridFunction) -> f64 {
        assert_eq!(self.n, truth.n, "grids must be congruent");
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.values.len() {
            num += (self.values[i] - truth.values[i]).powi(2);
            den += truth.values[i].powi(2);
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// CSV with header `x1,x2,value`, 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<(), XrayError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x1,x2,value")?;
        for iy in 0..self.n {
            for ix in 0..self.n {
                writeln!(
                    w,
                    "{},{},{}",
                    crate::fmt_f64(self.coord(ix)),
                    crate::fmt_f64(self.coord(iy)),
                    crate::fmt_f64(self.values[iy * self.n + ix])
                )?;
            }
        }
        Ok(())
    }
}

/// Filtered back-projection inversion of a scalar sinogram onto a
/// `grid_n x grid_n` grid spanning the sinogram's offset extent.
///
/// Filter: ramp `|nu|` with a raised-cosine rolloff at the offset Nyquist
/// frequency; linear interpolation in the back-projection. Linear in the
/// sinogram by construction.
pub fn invert_xray_2d(sino: &Sinogram, grid_n: usize) -> Result<GridFunction, XrayError> {
    if sino.components != 1 {
        return Err(XrayError::NotScalar {
            components: sino.components,
        });
    }
    let m = sino.angles.len();
    let n = sino.offsets.len();
    if m < 2 || n < 2 {
        return Err(XrayError::InsufficientCoverage {
            angles: m,
            offsets: n,
        });
    }
    let dq = (sino.offsets[n - 1] - sino.offsets[0]) / (n - 1) as f64;
    let pad = (2 * n).next_power_of_two();
    let nyquist = 0.5 / dq;

    // frequency response: |nu| * (1 + cos(pi nu / nyquist)) / 2
    let mut response = vec![0.0f64; pad];
    for (k, r) in response.iter_mut().enumerate() {
        let nu = if k <= pad / 2 {
            k as f64 / (pad as f64 * dq)
        } else {
            (k as f64 - pad as f64) / (pad as f64 * dq)
        };
        if nu.abs() <= nyquist {
            *r = nu.abs() * 0.5 * (1.0 + (std::f64::consts::PI * nu / nyquist).cos());
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(pad);
    let ifft = planner.plan_fft_inverse(pad);

    let filtered: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); pad];
            for q in 0..n {
                buf[q] = Complex::new(sino.get(a, q, 0), 0.0);
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                *b *= response[k];
            }
            ifft.process(&mut buf);
            (0..n).map(|q| buf[q].re / pad as f64).collect()
        })
        .collect();

    let l = sino.extent;
    let q0 = sino.offsets[0];
    let mut out = GridFunction::zeros(l, grid_n);
    let weight = std::f64::consts::PI / m as f64;
    let normals: Vec<(f64, f64)> = sino.angles.iter().map(|p| (-p.sin(), p.cos())).collect();
    let coords: Vec<f64> = (0..grid_n).map(|i| out.coord(i)).collect();
    let rows: Vec<Vec<f64>> = (0..grid_n)
        .into_par_iter()
        .map(|iy| {
            let y = coords[iy];
            let mut row = vec![0.0; grid_n];
            for (ix, val) in row.iter_mut().enumerate() {
                let x = coords[ix];
                let mut acc = 0.0;
                for a in 0..m {
                    let s = x * normals[a].0 + y * normals[a].1;
                    let u = (s - q0) / dq;
                    let j = u.floor();
                    let frac = u - j;
                    let j = j as isize;
                    if j >= 0 && (j as usize) + 1 < n {
                        let ju = j as usize;
                        acc += (1.0 - frac) * filtered[a][ju] + frac * filtered[a][ju + 1];
                    }
                }
                *val = weight * acc;
            }
            row
        })
        .collect();
    for (iy, row) in rows.into_iter().enumerate() {
        out.values[iy * grid_n..(iy + 1) * grid_n].copy_from_slice(&row);
    }
    Ok(out)
}

/// A 2-plane in `R^d`: origin plus two orthonormal tangent vectors. Reduces
/// reconstruction on the plane to the 2-D problem.
#[derive(Debug, Clone, Copy)]
pub struct PlaneEmbedding<const D: usize> {
    pub origin: [f64; D],
    pub e1: [f64; D],
    pub e2: [f64; D],
}

impl<const D: usize> PlaneEmbedding<D> {
    pub fn new(origin: [f64; D], e1: [f64; D], e2: [f64; D]) -> Result<Self, XrayError> {
        let defect = (norm(&e1) - 1.0)
            .abs()
            .max((norm(&e2) - 1.0).abs())
            .max(dot(&e1, &e2).abs());
        if defect > 1e-10 {
            return Err(XrayError::NonOrthonormalTangent { defect });
        }
        Ok(PlaneEmbedding { origin, e1, e2 })
    }

    /// Coordinate plane `(i, k)` through `origin`.
    pub fn coordinate(origin: [f64; D], i: usize, k: usize) -> Result<Self, XrayError> {
        let mut e1 = [0.0; D];
        let mut e2 = [0.0; D];
        e1[i] = 1.0;
        e2[k] = 1.0;
        PlaneEmbedding::new(origin, e1, e2)
    }

    pub fn embed_point(&self, u: f64, v: f64) -> [f64; D] {
        let mut p = self.origin;
        for i in 0..D {
            p[i] += u * self.e1[i] + v * self.e2[i];
        }
        p
    }

    /// Restriction of a scalar function to the plane.
    pub fn restrict<'a, F: Fn(&[f64; D]) -> f64 + Sync + 'a>(
        &'a self,
        f: F,
    ) -> impl Fn(f64, f64) -> f64 + Sync + 'a {
        move |u, v| f(&self.embed_point(u, v))
    }

    /// Maps a 2-D ray of the plane to the corresponding ray in `R^d`
    /// (offset re-orthogonalized against the embedded direction).
    pub fn embed_ray(&self, ray2: &Ray<2>) -> Result<Ray<D>, XrayError> {
        let mut theta = [0.0; D];
        for i in 0..D {
            theta[i] = ray2.theta[0] * self.e1[i] + ray2.theta[1] * self.e2[i];
        }
        let point = self.embed_point(ray2.offset[0], ray2.offset[1]);
        project_to_ray(&theta, &point)
    }
}

/// The ray of a 2-D sinogram cell: direction at angle `phi`, offset `q`
/// along the normal `(-sin phi, cos phi)`.
pub fn ray_2d(phi: f64, q: f64) -> Ray<2> {
    Ray {
        theta: [phi.cos(), phi.sin()],
        offset: [-q * phi.sin(), q * phi.cos()],
    }
}
