//! Configuration-driven experiment runner: the pipelines as subcommands,
//! emitting reproducible CSV artifacts (fixed seed in, byte-identical files
//! out, independent of thread count).

use crate::asymptotics::{self, SweepContext};
use crate::bounds::{self, BoundParams};
use crate::config::{core_params, ConfigError, CoreParams, ExperimentConfig};
use crate::dynamics::{Method, SolverSpec};
use crate::fields::{AnyField, FieldError, SumField};
use crate::quad::QuadSpec;
use crate::reconstruct::{self, NonuniqueKind, RayGridSpec};
use crate::suites;
use crate::xray::{ray_2d, PlaneEmbedding};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Asymptotics(#[from] crate::asymptotics::AsymptoticsError),
    #[error(transparent)]
    Reconstruct(#[from] crate::reconstruct::ReconstructError),
    #[error(transparent)]
    Xray(#[from] crate::xray::XrayError),
    #[error("spatial dimension {0} is not wired into the command dispatch (supported: 2, 3, 4)")]
    UnsupportedDimension(usize),
    #[error("configuration: {0}")]
    Invalid(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Reproducible experiment runner for relativistic scattering in decaying
/// electromagnetic fields.
#[derive(Parser, Debug)]
#[command(name = "emscat", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration file (flat `section.key = value`).
    #[arg(long, global = true, default_value = "emscat.cfg")]
    pub config: PathBuf,
    /// Override `output.dir` from the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Outputs are identical either way.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override the `seed` key from the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the scattering dynamics over speeds x rays and compare against
    /// the high-energy envelopes.
    Sweep,
    /// Forward-simulate velocity data and reconstruct the potentials via
    /// X-ray inversion.
    Reconstruct,
    /// Demonstrate the kernels of the second-order functionals.
    DemoNonunique,
    /// Print the explicit constant set per requested speed.
    Constants,
    /// Run the randomized inequality suites.
    VerifyBounds,
}

/// Entry point used by the binary; maps every failure to a nonzero exit.
pub fn run(cli: Cli) -> ExitCode {
    if let Some(n) = cli.threads {
        // ignore failure when a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::from_file(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed.to_string());
    }
    if let Some(out) = &cli.out {
        cfg.set("output.dir", out.display().to_string());
    }
    let core = core_params(&cfg)?;
    std::fs::create_dir_all(&core.out_dir)?;
    macro_rules! with_dim {
        ($f:ident) => {
            match core.d {
                2 => $f::<2>(&cfg, &core, &cli.command),
                3 => $f::<3>(&cfg, &core, &cli.command),
                4 => $f::<4>(&cfg, &core, &cli.command),
                other => Err(CliError::UnsupportedDimension(other)),
            }
        };
    }
    with_dim!(run_command)
}

fn parse_center<const D: usize>(
    cfg: &ExperimentConfig,
    key: &str,
) -> Result<[f64; D], CliError> {
    let list = cfg.f64_list(key)?;
    if list.is_empty() {
        return Ok([0.0; D]);
    }
    if list.len() != D {
        return Err(CliError::Invalid(format!(
            "key `{key}` must list {D} coordinates, got {}",
            list.len()
        )));
    }
    let mut out = [0.0; D];
    out.copy_from_slice(&list);
    Ok(out)
}

/// Builds the (possibly summed) field from the numbered `field.N.*` blocks.
pub fn build_field<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
) -> Result<SumField<D>, CliError> {
    let mut indices: Vec<usize> = cfg
        .keys_with_prefix("field.")
        .filter_map(|k| {
            let rest = k.strip_prefix("field.")?;
            let (idx, tail) = rest.split_once('.')?;
            (tail == "family").then(|| idx.parse::<usize>().ok()).flatten()
        })
        .collect();
    indices.sort_unstable();
    indices.dedup();
    let mut terms = Vec::new();
    for idx in indices {
        let base = format!("field.{idx}");
        let family = cfg.require(&format!("{base}.family"))?;
        let center = parse_center::<D>(cfg, &format!("{base}.center"))?;
        let term = match family {
            "zero" => AnyField::Zero,
            "gaussian_electric" => {
                let v0 = cfg.f64_req(&format!("{base}.v0"))?;
                let width = cfg.f64_req(&format!("{base}.width"))?;
                AnyField::GaussianElectric(crate::fields::GaussianElectric::with_center(
                    v0, width, center,
                ))
            }
            "inverse_power_electric" => {
                let v0 = cfg.f64_req(&format!("{base}.v0"))?;
                let alpha = cfg.f64_or(&format!("{base}.alpha"), core.alpha)?;
                AnyField::InversePowerElectric(
                    crate::fields::InversePowerElectric::with_center(v0, alpha, center),
                )
            }
            "magnetic_loop" => {
                let amp = cfg.f64_req(&format!("{base}.amp"))?;
                let profile = match cfg.str_or(&format!("{base}.profile"), "gaussian") {
                    "gaussian" => crate::fields::Profile::Gaussian {
                        amp,
                        width: cfg.f64_req(&format!("{base}.width"))?,
                    },
                    "inverse_power" => crate::fields::Profile::InversePower {
                        amp,
                        sigma: cfg.f64_req(&format!("{base}.sigma"))?,
                    },
                    other => {
                        return Err(CliError::Invalid(format!(
                            "key `{base}.profile`: unknown profile {other:?}"
                        )))
                    }
                };
                let axis_a = cfg.usize_or(&format!("{base}.axis_a"), 1)?;
                let axis_b = cfg.usize_or(&format!("{base}.axis_b"), 2)?;
                if axis_a == 0 || axis_b == 0 {
                    return Err(CliError::Invalid(format!(
                        "key `{base}.axis_a`/`axis_b` are 1-based"
                    )));
                }
                AnyField::MagneticLoop(crate::fields::MagneticLoop::with_center(
                    axis_a - 1,
                    axis_b - 1,
                    profile,
                    center,
                )?)
            }
            other => {
                return Err(CliError::Invalid(format!(
                    "key `{base}.family`: unknown family {other:?}"
                )))
            }
        };
        terms.push(term);
    }
    Ok(SumField::new(terms))
}

fn solver_spec(cfg: &ExperimentConfig) -> Result<SolverSpec, CliError> {
    Ok(SolverSpec {
        picard_tol: cfg.f64_or("solver.picard_tol", 1e-12)?,
        max_iter: cfg.usize_or("solver.max_iter", 400)?,
        ode_step: cfg.f64_or("solver.ode_step", 0.01)?,
        grid_step: cfg.f64_or("solver.grid_step", 0.02)?,
        tail_tol: cfg.f64_or("solver.tail_tol", 1e-10)?,
    })
}

fn quad_spec(cfg: &ExperimentConfig) -> Result<QuadSpec, CliError> {
    Ok(QuadSpec::with_tols(
        cfg.f64_or("quad.abs_tol", 1e-10)?,
        cfg.f64_or("quad.tail_tol", 1e-12)?,
    ))
}

fn method_from(cfg: &ExperimentConfig) -> Result<Method, CliError> {
    match cfg.str_or("solver.method", "auto") {
        "auto" => Ok(Method::Auto),
        "picard" => Ok(Method::Picard),
        "ode" => Ok(Method::Ode),
        other => Err(CliError::Invalid(format!(
            "key `solver.method`: expected auto|picard|ode, got {other:?}"
        ))),
    }
}

/// Measured decay constants plus the sweep context every pipeline shares.
struct Setup<const D: usize> {
    field: SumField<D>,
    ctx: SweepContext,
    beta: [f64; 3],
    decay_pass: bool,
}

fn setup<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
) -> Result<Setup<D>, CliError> {
    let field = build_field::<D>(cfg, core)?;
    let sampling = crate::fields::DecaySampling {
        seed: core.seed ^ 0xdeca,
        ..Default::default()
    };
    let report = crate::fields::verify_decay(&field, core.alpha, sampling);
    let r_default = 1f64.min(core.c / 2f64.sqrt() - 1e-3);
    let ctx = SweepContext {
        c: core.c,
        alpha: core.alpha,
        beta: report.beta,
        r: cfg.f64_or("bounds.r", r_default)?,
        c_fit: 0.0,
        solver: solver_spec(cfg)?,
        quad: quad_spec(cfg)?,
    };
    Ok(Setup {
        field,
        ctx,
        beta: report.beta,
        decay_pass: report.pass,
    })
}

fn ray_grid(cfg: &ExperimentConfig) -> Result<RayGridSpec, CliError> {
    let grid = RayGridSpec {
        angles: cfg.usize_or("rays.angles", 12)?,
        offsets: cfg.usize_or("rays.offsets", 9)?,
        extent: cfg.f64_or("rays.extent", 6.0)?,
    };
    if grid.angles < 2 || grid.offsets < 2 {
        return Err(CliError::Invalid(format!(
            "ray grid must be at least 2 x 2, got {} x {}",
            grid.angles, grid.offsets
        )));
    }
    Ok(grid)
}

fn plane_for<const D: usize>(
    cfg: &ExperimentConfig,
) -> Result<(PlaneEmbedding<D>, (usize, usize)), CliError> {
    let i = cfg.usize_or("recon.plane_i", 1)?;
    let k = cfg.usize_or("recon.plane_k", 2)?;
    if i == 0 || k == 0 || i > D || k > D || i == k {
        return Err(CliError::Invalid(format!(
            "recon.plane_i/plane_k must be distinct 1-based axes within d = {D}"
        )));
    }
    let origin = parse_center::<D>(cfg, "recon.plane_origin")?;
    Ok((
        PlaneEmbedding::coordinate(origin, i - 1, k - 1)?,
        (i - 1, k - 1),
    ))
}

fn run_command<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
    command: &Command,
) -> Result<bool, CliError> {
    match command {
        Command::Sweep => cmd_sweep::<D>(cfg, core),
        Command::Reconstruct => cmd_reconstruct::<D>(cfg, core),
        Command::DemoNonunique => cmd_demo_nonunique(cfg, core),
        Command::Constants => cmd_constants::<D>(cfg, core),
        Command::VerifyBounds => cmd_verify_bounds::<D>(cfg, core),
    }
}

fn cmd_sweep<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
) -> Result<bool, CliError> {
    let mut setup = setup::<D>(cfg, core)?;
    let grid = ray_grid(cfg)?;
    let method = method_from(cfg)?;
    let envelope_scale = cfg.f64_or("sweep.envelope_scale", 1.0)?;
    if core.speeds.is_empty() {
        return Err(CliError::Invalid("sweep needs a nonempty `speeds` list".into()));
    }
    let (plane, _axes) = plane_for::<D>(cfg)?;

    // calibrate the fitted second-order constant on the central ray
    let calib_ray = plane.embed_ray(&ray_2d(0.0, grid.extent / 3.0))?;
    let calib_speeds: Vec<f64> = core.speeds.iter().map(|s| s * core.c).collect();
    setup.ctx.c_fit =
        asymptotics::fit_thm32_constant(&setup.field, &setup.ctx, &calib_ray, &calib_speeds)?;

    let angles = grid.angles_vec();
    let offsets = grid.offsets_vec();
    struct Row<const D: usize> {
        s: f64,
        phi: f64,
        q: f64,
        datum: Option<crate::dynamics::ScatteringDatum<D>>,
        sample_a: Option<crate::asymptotics::AsymptoticSample<D>>,
        sample_b: Option<crate::asymptotics::AsymptoticSample<D>>,
    }
    let mut rows: Vec<Row<D>> = Vec::new();
    for &frac in &core.speeds {
        let s = frac * core.c;
        let mut speed_rows: Vec<Row<D>> = angles
            .par_iter()
            .flat_map(|&phi| offsets.par_iter().map(move |&q| (phi, q)).collect::<Vec<_>>())
            .map(|(phi, q)| {
                let Ok(ray) = plane.embed_ray(&ray_2d(phi, q)) else {
                    return Row { s, phi, q, datum: None, sample_a: None, sample_b: None };
                };
                let datum = asymptotics::solve_on_ray(&setup.field, &setup.ctx, &ray, s, method);
                match datum {
                    Ok(datum) => {
                        let sample_a =
                            asymptotics::compare_thm11_a(&setup.field, &setup.ctx, &ray, s, &datum)
                                .ok();
                        let sample_b =
                            asymptotics::compare_thm11_b(&setup.field, &setup.ctx, &ray, s, &datum)
                                .ok();
                        Row { s, phi, q, datum: Some(datum), sample_a, sample_b }
                    }
                    Err(_) => Row { s, phi, q, datum: None, sample_a: None, sample_b: None },
                }
            })
            .collect();
        rows.append(&mut speed_rows);
    }

    // scattering.csv: raw per-ray data
    let mut w = std::io::BufWriter::new(std::fs::File::create(core.out_dir.join("scattering.csv"))?);
    write!(w, "s,phi,q")?;
    for i in 1..=D {
        write!(w, ",theta_{i}")?;
    }
    for i in 1..=D {
        write!(w, ",x_{i}")?;
    }
    for i in 1..=D {
        write!(w, ",a_sc_{i}")?;
    }
    for i in 1..=D {
        write!(w, ",b_sc_{i}")?;
    }
    writeln!(w, ",energy_drift,method,iters,mu")?;
    let mut failures = 0usize;
    for row in &rows {
        write!(
            w,
            "{},{},{}",
            crate::fmt_f64(row.s),
            crate::fmt_f64(row.phi),
            crate::fmt_f64(row.q)
        )?;
        match &row.datum {
            Some(datum) => {
                let theta = crate::linalg::scale(&datum.v_minus, 1.0 / row.s);
                for i in 0..D {
                    write!(w, ",{}", crate::fmt_f64(theta[i]))?;
                }
                for i in 0..D {
                    write!(w, ",{}", crate::fmt_f64(datum.x_minus[i]))?;
                }
                for i in 0..D {
                    write!(w, ",{}", crate::fmt_f64(datum.a_sc[i]))?;
                }
                for i in 0..D {
                    write!(w, ",{}", crate::fmt_f64(datum.b_sc[i]))?;
                }
                writeln!(
                    w,
                    ",{},{},{},{}",
                    crate::fmt_f64(datum.diag.energy_drift),
                    datum.diag.method,
                    datum.diag.iterations,
                    crate::fmt_f64(datum.diag.mu)
                )?;
            }
            None => {
                failures += 1;
                for _ in 0..(4 * D) {
                    write!(w, ",nan")?;
                }
                writeln!(w, ",nan,failed,0,nan")?;
            }
        }
    }
    drop(w);

    // sweep.csv: gaps against envelopes
    let mut w = std::io::BufWriter::new(std::fs::File::create(core.out_dir.join("sweep.csv"))?);
    writeln!(w, "s,phi,q,gap_a,envelope_a,gap_b,envelope_b")?;
    let mut all_under = true;
    for row in &rows {
        let (gap_a, env_a) = row
            .sample_a
            .as_ref()
            .map(|smp| (smp.gap, smp.envelope * envelope_scale))
            .unwrap_or((f64::NAN, f64::NAN));
        let (gap_b, env_b) = row
            .sample_b
            .as_ref()
            .map(|smp| (smp.gap, smp.envelope * envelope_scale))
            .unwrap_or((f64::NAN, f64::NAN));
        if !(gap_a <= env_a) || !(gap_b <= env_b) {
            all_under = false;
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            crate::fmt_f64(row.s),
            crate::fmt_f64(row.phi),
            crate::fmt_f64(row.q),
            crate::fmt_f64(gap_a),
            crate::fmt_f64(env_a),
            crate::fmt_f64(gap_b),
            crate::fmt_f64(env_b)
        )?;
    }
    drop(w);

    let mut meta = std::io::BufWriter::new(std::fs::File::create(core.out_dir.join("sweep_meta.txt"))?);
    writeln!(meta, "beta0 = {}", crate::fmt_f64(setup.beta[0]))?;
    writeln!(meta, "beta1 = {}", crate::fmt_f64(setup.beta[1]))?;
    writeln!(meta, "beta2 = {}", crate::fmt_f64(setup.beta[2]))?;
    writeln!(meta, "decay_pass = {}", setup.decay_pass)?;
    writeln!(meta, "r = {}", crate::fmt_f64(setup.ctx.r))?;
    writeln!(meta, "c_fit = {}", crate::fmt_f64(setup.ctx.c_fit))?;
    writeln!(meta, "rows = {}", rows.len())?;
    writeln!(meta, "failures = {failures}")?;
    writeln!(meta, "all_gaps_under_envelopes = {all_under}")?;
    drop(meta);

    println!(
        "sweep: {} rows, {} failures, gaps under envelopes: {}",
        rows.len(),
        failures,
        all_under
    );
    Ok(all_under && failures == 0)
}

fn cmd_reconstruct<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
) -> Result<bool, CliError> {
    let setup = setup::<D>(cfg, core)?;
    let grid = ray_grid(cfg)?;
    let method = method_from(cfg)?;
    let grid_n = cfg.usize_or("recon.grid_n", 129)?;
    let target = cfg.str_or("recon.target", "both");
    if core.speeds.is_empty() {
        return Err(CliError::Invalid(
            "reconstruct needs a nonempty `speeds` list".into(),
        ));
    }
    let (plane, axes) = plane_for::<D>(cfg)?;
    let mut ok = true;
    let mut meta = std::io::BufWriter::new(std::fs::File::create(
        core.out_dir.join("recon_meta.txt"),
    )?);
    writeln!(meta, "beta1 = {}", crate::fmt_f64(setup.beta[1]))?;
    for (si, &frac) in core.speeds.iter().enumerate() {
        let s = frac * core.c;
        let dataset = reconstruct::simulate_dataset(
            &setup.field,
            &setup.ctx,
            plane,
            axes,
            grid,
            s,
            method,
        )?;
        if target == "b" || target == "both" {
            let report = reconstruct::reconstruct_b(&setup.field, &dataset, grid_n)?;
            report.write_files(&core.out_dir, &format!("recon_s{si}_b"))?;
            println!(
                "s = {s}: {} relative L2 error {:.4}",
                report.target, report.rel_l2
            );
            writeln!(
                meta,
                "s{si}_b_rel_l2 = {}",
                crate::fmt_f64(report.rel_l2)
            )?;
            ok &= report.rel_l2.is_finite();
        }
        if target == "v" || target == "both" {
            let report = reconstruct::reconstruct_v(&setup.field, &dataset, grid_n)?;
            report.write_files(&core.out_dir, &format!("recon_s{si}_v"))?;
            println!(
                "s = {s}: {} relative L2 error {:.4} (path defect {:.4})",
                report.target, report.rel_l2, report.consistency
            );
            writeln!(
                meta,
                "s{si}_v_rel_l2 = {}",
                crate::fmt_f64(report.rel_l2)
            )?;
            ok &= report.rel_l2.is_finite();
        }
    }
    Ok(ok)
}

fn cmd_demo_nonunique(cfg: &ExperimentConfig, core: &CoreParams) -> Result<bool, CliError> {
    let kind = match cfg.str_or("demo.kind", "magnetic2d") {
        "electric" => NonuniqueKind::Electric,
        "magnetic2d" => NonuniqueKind::Magnetic2d,
        other => {
            return Err(CliError::Invalid(format!(
                "key `demo.kind`: expected electric|magnetic2d, got {other:?}"
            )))
        }
    };
    let rays = cfg.usize_or("demo.rays", 500)?;
    let tol = cfg.f64_or("demo.tol", 1e-8)?;
    let quad = quad_spec(cfg)?;
    let report = reconstruct::nonuniqueness_demo(kind, rays, core.seed, &quad)?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(
        core.out_dir.join("nonunique_report.txt"),
    )?);
    writeln!(w, "kind = {:?}", report.kind)?;
    writeln!(w, "rays = {}", report.rays)?;
    writeln!(w, "kernel_max = {}", crate::fmt_f64(report.kernel_max))?;
    writeln!(w, "witness_max = {}", crate::fmt_f64(report.witness_max))?;
    writeln!(
        w,
        "additivity_defect = {}",
        crate::fmt_f64(report.additivity_defect)
    )?;
    drop(w);
    println!(
        "{:?}: kernel max {:.3e} (tolerance {tol:.1e}), witness max {:.3e} over {} rays",
        report.kind, report.kernel_max, report.witness_max, report.rays
    );
    Ok(report.kernel_max < tol && report.witness_max > 0.0)
}

fn cmd_constants<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
) -> Result<bool, CliError> {
    let mut setup = setup::<D>(cfg, core)?;
    let x_norm = cfg.f64_or("constants.x", 0.0)?;
    if !core.speeds.is_empty() && cfg.str_or("constants.fit", "true") == "true" {
        let mut offset = [0.0; D];
        offset[1 % D] = x_norm;
        let mut theta = [0.0; D];
        theta[0] = 1.0;
        let ray = crate::xray::Ray::new(theta, offset)?;
        let speeds: Vec<f64> = core.speeds.iter().map(|f| f * core.c).collect();
        setup.ctx.c_fit =
            asymptotics::fit_thm32_constant(&setup.field, &setup.ctx, &ray, &speeds)?;
    }
    let header = "s,z1,z,z2,rho,lambda,mu,zeta_minus0,xi_minus0,zeta_plus0,xi_plus0,eps_a_prime,eps_a,eps_b,s1,s2,c1,c2,c_fit,res_z1,res_z2,res_mu_at_z";
    let mut lines = vec![header.to_string()];
    for &frac in &core.speeds {
        let s = frac * core.c;
        let bp = BoundParams {
            c: core.c,
            d: D,
            alpha: core.alpha,
            beta0: setup.beta[0],
            beta1: setup.beta[1],
            beta2: setup.beta[2],
            r: setup.ctx.r,
            x_norm,
            v_norm: s,
        };
        let set = bounds::constant_set(&bp, setup.ctx.c_fit)?;
        let row = [
            s,
            set.z1,
            set.z,
            set.z2,
            set.rho,
            set.lambda,
            set.mu,
            set.zeta_minus0,
            set.xi_minus0,
            set.zeta_plus0,
            set.xi_plus0,
            set.eps_a_prime,
            set.eps_a,
            set.eps_b,
            set.s1,
            set.s2,
            set.c1,
            set.c2,
            setup.ctx.c_fit,
            set.res_z1,
            set.res_z2,
            set.res_mu_at_z,
        ];
        lines.push(
            row.iter()
                .map(|v| crate::fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    std::fs::write(core.out_dir.join("constants.csv"), text)?;
    Ok(true)
}

fn cmd_verify_bounds<const D: usize>(
    cfg: &ExperimentConfig,
    core: &CoreParams,
) -> Result<bool, CliError> {
    let setup = setup::<D>(cfg, core)?;
    let draws = cfg.usize_or("bounds.samples", 1000)?;
    let params = suites::SuiteParams {
        field: &setup.field,
        c: core.c,
        alpha: core.alpha,
        beta: setup.beta,
        draws,
        seed: core.seed,
    };
    let outcomes = suites::run_all(&params);
    let mut all_pass = true;
    let mut w = std::io::BufWriter::new(std::fs::File::create(
        core.out_dir.join("verify_bounds.csv"),
    )?);
    writeln!(w, "suite,draws,violations,worst_ratio")?;
    for o in &outcomes {
        all_pass &= o.passed();
        println!(
            "{}: {} draws, {} violations, worst ratio {:.3e} -> {}",
            o.name,
            o.draws,
            o.violations,
            o.worst_ratio,
            if o.passed() { "PASS" } else { "FAIL" }
        );
        writeln!(
            w,
            "{},{},{},{}",
            o.name,
            o.draws,
            o.violations,
            crate::fmt_f64(o.worst_ratio)
        )?;
    }
    Ok(all_pass)
}

/// Writes a config back out (sorted); used by tests for the round-trip
/// contract.
pub fn write_config(cfg: &ExperimentConfig, path: &Path) -> Result<(), CliError> {
    Ok(std::fs::write(path, cfg.to_config_string())?)
}
