//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Args;
use deblur::export::{coefficient_table, lcurve_table, picard_table, sigma_table, table, trace_table, write_table};
use deblur::multilevel::{coarse_noise_norm, CoarseMethod, CoarseSelector};
use deblur::param::{default_grid, select_gtik_mu, select_tv_lambda};
use deblur::pgm::write_pgm;
use deblur::regularization::residual_norm;
use deblur::{
    build_hierarchy, discrepancy_lambda, filtered_solve, general_tikhonov_solve, lcurve_corner, lcurve_scan,
    multilevel_solve, picard_coefficients, relative_error, restrict_image, svd_of, tv_irls_solve, BoundaryCondition,
    FilterSpec, Image64, IrlsOptions, NoiseKind, OperatorDescriptor, OperatorKind, RegularizerL, SceneKind,
    SvdFactorization,
};

use crate::failure::{CliError, CliResult};
use crate::options::{Method, Selector};
use crate::scene::{load_scene, write_scene, Scene, SceneConfig};

const LCURVE_POINTS: usize = 50;

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Image side length in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Test scene: H or single_pixel.
    #[arg(long, default_value = "H")]
    pub scene: SceneKind,
    /// Gaussian spread in pixels.
    #[arg(long = "s", default_value_t = 2.0)]
    pub spread: f64,
    /// Kernel truncation radius; defaults to ceil(4s).
    #[arg(long)]
    pub half_width: Option<usize>,
    /// Boundary condition: zero, periodic or reflexive.
    #[arg(long, default_value = "zero")]
    pub bc: BoundaryCondition,
    /// Operator storage; defaults to the natural one for the boundary condition.
    #[arg(long)]
    pub variant: Option<OperatorKind>,
    /// gaussian:<level>, poisson:<peak> or saltpepper[:<fraction>].
    #[arg(long, default_value = "gaussian:0.001")]
    pub noise: NoiseKind,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DeblurArgs {
    /// Scene directory written by `simulate`.
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// naive, tsvd:<k>, tikhonov, gtik or tv.
    #[arg(long)]
    pub method: Method,
    /// lcurve, discrepancy:auto, discrepancy:<delta> or fixed:<value>.
    #[arg(long)]
    pub select: Option<Selector>,
    /// Discrepancy safety factor.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Deblur this PGM instead of the regenerated data.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Write results into this subdirectory of the scene directory.
    #[arg(long)]
    pub run: Option<String>,
    /// TV smoothing; defaults to 1e-4·max|b|.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub max_outer: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// Analyze the noiseless blurred image instead of the noisy one.
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub run: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MultilevelArgs {
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// Number of coarsening steps.
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// tikhonov or tv.
    #[arg(long, default_value = "tikhonov")]
    pub method: Method,
    /// discrepancy:auto, discrepancy:<delta> or fixed:<value>.
    #[arg(long, default_value = "discrepancy:auto")]
    pub select: Selector,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Also write every coarse solution prolonged to the finest grid.
    #[arg(long)]
    pub prolong: bool,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub run: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long = "s", default_value_t = 2.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Skip the total-variation reconstruction, the slowest step.
    #[arg(long)]
    pub skip_tv: bool,
}

/// Summary of one `deblur` run.
#[derive(Debug, Clone, Copy)]
pub struct DeblurOutcome {
    pub parameter: Option<f64>,
    pub relative_error: f64,
    pub residual: f64,
}

fn run_dir(out: &Path, run: Option<&str>) -> CliResult<PathBuf> {
    let dir = match run {
        Some(r) => out.join(r),
        None => out.to_path_buf(),
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_csv(path: &Path, bytes: CliResult<Vec<u8>>) -> CliResult<()> {
    write_table(path, &bytes?)?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    if args.size == 0 {
        return Err(CliError::flags("--size must be positive"));
    }
    if !(args.spread > 0.0 && args.spread.is_finite()) {
        return Err(CliError::flags(format!("--s must be positive, got {}", args.spread)));
    }
    let config = SceneConfig {
        scene: args.scene,
        operator: OperatorDescriptor {
            kind: args.variant.unwrap_or_else(|| OperatorKind::natural_for(args.bc)),
            bc: args.bc,
            spread: args.spread,
            half_width: args
                .half_width
                .unwrap_or_else(|| deblur::psf::default_half_width(args.spread)),
            rows: args.size,
            cols: args.size,
        },
        noise: args.noise,
        seed: args.seed,
    };
    let scene = config.generate()?;
    write_scene(&args.out, &scene)?;
    println!(
        "simulated {} {}x{}: |b_true| = {:.6e}, |e| = {:.6e}",
        config.scene,
        args.size,
        args.size,
        scene.b_true.norm(),
        scene.e_norm
    );
    Ok(())
}

fn noise_norm(scene: &Scene, selector: Selector) -> f64 {
    match selector {
        Selector::Discrepancy(Some(d)) => d,
        _ => scene.e_norm,
    }
}

fn derivative(scene: &Scene) -> CliResult<RegularizerL> {
    Ok(RegularizerL::first_derivative(scene.op.rows(), scene.op.cols())?)
}

fn irls_options(args: &DeblurArgs) -> CliResult<IrlsOptions<f64>> {
    if args.max_outer == 0 {
        return Err(CliError::flags("--max-outer must be at least 1"));
    }
    Ok(IrlsOptions {
        epsilon: args.epsilon,
        max_outer: args.max_outer,
        ..IrlsOptions::default()
    })
}

fn svd_for(scene: &Scene) -> CliResult<SvdFactorization<f64>> {
    Ok(svd_of(&scene.op)?)
}

/// L-curve corner `λ`, also writing `lcurve.csv` into `dir`.
fn lcurve_lambda(svd: &SvdFactorization<f64>, b: &Image64, dir: &Path) -> CliResult<f64> {
    let grid = default_grid(svd.sigma()[0], LCURVE_POINTS);
    let points = lcurve_scan(svd, b, &grid)?;
    let corner = lcurve_corner(&points);
    write_csv(
        &dir.join("lcurve.csv"),
        Ok(lcurve_table(&points, corner.as_ref().ok())?),
    )?;
    let corner = corner?;
    if corner.weak {
        eprintln!("warning: weak L-curve corner; treat the selected parameter with care");
    }
    Ok(corner.lambda)
}

pub fn deblur(args: &DeblurArgs) -> CliResult<DeblurOutcome> {
    if !(args.tau >= 1.0) {
        return Err(CliError::flags(format!("--tau must be >= 1, got {}", args.tau)));
    }
    let scene = load_scene(&args.out, args.input.as_deref())?;
    let dir = run_dir(&args.out, args.run.as_deref())?;
    let b = &scene.b;
    let mut m = scene.config.manifest();
    m.set("method", args.method);
    let selector = match (args.method, args.select) {
        (Method::Naive | Method::Tsvd(_), Some(s)) => {
            return Err(CliError::flags(format!(
                "{} takes no parameter selector, got {s}",
                args.method
            )))
        }
        (Method::Naive | Method::Tsvd(_), None) => None,
        (Method::Gtik | Method::Tv, Some(Selector::LCurve)) => {
            return Err(CliError::flags("the lcurve selector is only available for tikhonov"))
        }
        (Method::Tikhonov, s) => Some(s.unwrap_or(Selector::LCurve)),
        (_, s) => Some(s.unwrap_or(Selector::Discrepancy(None))),
    };
    if let Some(s) = selector {
        m.set("select", s);
        if matches!(s, Selector::Discrepancy(_)) {
            m.set_f64("tau", args.tau).set_f64("delta", noise_norm(&scene, s));
        }
    }
    let target = |s: Selector| args.tau * noise_norm(&scene, s);

    let (x, parameter) = match (args.method, selector) {
        (Method::Naive, _) => (filtered_solve(&svd_for(&scene)?, b, &FilterSpec::Naive)?, None),
        (Method::Tsvd(k), _) => {
            let x = filtered_solve(&svd_for(&scene)?, b, &FilterSpec::Tsvd(k))?;
            (x, Some(k as f64))
        }
        (Method::Tikhonov, Some(s)) => {
            let svd = svd_for(&scene)?;
            let lambda = match s {
                Selector::LCurve => lcurve_lambda(&svd, b, &dir)?,
                Selector::Discrepancy(_) => discrepancy_lambda(&svd, b, noise_norm(&scene, s), args.tau)?,
                Selector::Fixed(l) => l,
            };
            m.set_f64("lambda", lambda).set_f64("mu", lambda * lambda);
            (filtered_solve(&svd, b, &FilterSpec::Tikhonov(lambda))?, Some(lambda))
        }
        (Method::Gtik, Some(s)) => {
            let reg = derivative(&scene)?;
            let (mu, x) = match s {
                Selector::Fixed(mu) => (mu, general_tikhonov_solve(&scene.op, b, reg, mu)?),
                _ => select_gtik_mu(&scene.op, b, reg, target(s))?,
            };
            m.set_f64("mu", mu);
            (x, Some(mu))
        }
        (Method::Tv, Some(s)) => {
            let reg = derivative(&scene)?;
            let opts = irls_options(args)?;
            let (lambda, sol) = match s {
                Selector::Fixed(l) => (l, tv_irls_solve(&scene.op, b, reg, l, &opts)?),
                _ => select_tv_lambda(&scene.op, b, reg, target(s), &opts)?,
            };
            if !sol.converged {
                eprintln!(
                    "warning: IRLS hit --max-outer {}; returning the best iterate",
                    args.max_outer
                );
            }
            write_csv(&dir.join("trace.csv"), trace_table(&sol.trace).map_err(Into::into))?;
            m.set_f64("lambda", lambda)
                .set_f64("epsilon", sol.epsilon)
                .set("converged", sol.converged)
                .set("outer_iterations", sol.trace.len() - 1);
            (sol.x, Some(lambda))
        }
        (_, None) => unreachable!("selector defaulted above"),
    };

    let outcome = DeblurOutcome {
        parameter,
        relative_error: relative_error(x.as_slice(), scene.x_true.as_slice())?,
        residual: residual_norm(&scene.op, &x, b)?,
    };
    write_pgm(&dir.join("x_reg.pgm"), &x, Some(scene.config.seed))?;
    let param_text = parameter.map(|p| format!("{p:?}")).unwrap_or_default();
    let report = table(
        &["method", "parameter", "relative_error", "residual"],
        [[
            args.method.to_string(),
            param_text.clone(),
            format!("{:?}", outcome.relative_error),
            format!("{:?}", outcome.residual),
        ]],
    );
    write_csv(&dir.join("report.csv"), report.map_err(Into::into))?;
    m.set("parameter", &param_text)
        .set_f64("relative_error", outcome.relative_error)
        .set_f64("residual", outcome.residual)
        .set_f64("solution_norm", x.norm())
        .set_f64(
            "blurred_relative_error",
            relative_error(b.as_slice(), scene.x_true.as_slice())?,
        )
        .set("x_reg", "x_reg.pgm")
        .set("report", "report.csv");
    m.write(&dir.join("run_manifest.txt"))?;
    println!(
        "{}: parameter {} relative error {:.6e} residual {:.6e}",
        args.method,
        if param_text.is_empty() { "-" } else { &param_text },
        outcome.relative_error,
        outcome.residual
    );
    Ok(outcome)
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let scene = load_scene(&args.out, args.input.as_deref())?;
    let dir = run_dir(&args.out, args.run.as_deref())?;
    let data = if args.noiseless { &scene.b_true } else { &scene.b };
    let svd = svd_for(&scene)?;
    let sigma = svd.sigma();
    write_csv(&dir.join("sigma.csv"), Ok(sigma_table(sigma)?))?;
    let picard = picard_coefficients(&svd, data)?;
    write_csv(&dir.join("picard.csv"), Ok(picard_table(&picard)?))?;
    let true_coeffs = svd.right_coefficients(&scene.x_true)?;
    write_csv(
        &dir.join("coefficients.csv"),
        Ok(coefficient_table(sigma, &true_coeffs, &picard.ratio)?),
    )?;
    match lcurve_lambda(&svd, data, &dir) {
        Ok(lambda) => println!("L-curve corner at lambda = {lambda:.6e}"),
        Err(e) => eprintln!("warning: no L-curve corner: {e}"),
    }
    println!(
        "sigma_1 = {:.6e}, sigma_m = {:.6e}, condition number {:.3e}",
        sigma[0],
        sigma[sigma.len() - 1],
        svd.condition_number()
    );
    Ok(())
}

pub fn multilevel(args: &MultilevelArgs) -> CliResult<()> {
    let method = match args.method {
        Method::Tikhonov => CoarseMethod::Tikhonov,
        Method::Tv => CoarseMethod::Tv,
        other => {
            return Err(CliError::flags(format!(
                "multilevel supports tikhonov and tv, got {other}"
            )))
        }
    };
    if matches!(args.select, Selector::LCurve) {
        return Err(CliError::flags("multilevel selects by discrepancy or a fixed value"));
    }
    if !(args.tau >= 1.0) {
        return Err(CliError::flags(format!("--tau must be >= 1, got {}", args.tau)));
    }
    let scene = load_scene(&args.out, args.input.as_deref())?;
    let dir = run_dir(&args.out, args.run.as_deref())?;
    let h = build_hierarchy(&scene.op, &scene.b, args.levels).map_err(CliError::in_hierarchy)?;
    let mut m = scene.config.manifest();
    m.set("method", args.method).set("select", args.select);
    m.extend_from_text(&h.manifest())?;
    let seed = Some(scene.config.seed);
    // a user-supplied noise norm leaves e unknown, so coarse levels scale it by 2⁻ⁿ
    let known_e = match args.select {
        Selector::Discrepancy(None) => scene.e.as_ref(),
        _ => None,
    };
    let mut rows = Vec::new();
    let mut x_ref = scene.x_true.clone();
    for n in 0..=h.depth() {
        if n > 0 {
            x_ref = restrict_image(&x_ref)?;
        }
        let selector = match args.select {
            Selector::Fixed(v) => CoarseSelector::Fixed(v),
            s => CoarseSelector::Discrepancy {
                delta: coarse_noise_norm(known_e, noise_norm(&scene, s), n)?,
                tau: args.tau,
            },
        };
        let sol = multilevel_solve(&h, n, method, selector, args.prolong, &IrlsOptions::default())?;
        let level = h.level(n)?;
        write_pgm(&dir.join(format!("x_level{n}.pgm")), &sol.x, seed)?;
        write_pgm(&dir.join(format!("b_level{n}.pgm")), &level.b, seed)?;
        if let Some(x0) = &sol.prolonged {
            write_pgm(&dir.join(format!("x_level{n}_prolonged.pgm")), x0, seed)?;
        }
        let err = relative_error(sol.x.as_slice(), x_ref.as_slice())?;
        m.set_f64(&format!("level{n}.parameter"), sol.parameter)
            .set_f64(&format!("level{n}.relative_error"), err);
        println!(
            "level {n}: {}x{} {} parameter {:.6e} relative error {:.6e}",
            level.op.rows(),
            level.op.cols(),
            level.op.kind(),
            sol.parameter,
            err
        );
        rows.push([
            n.to_string(),
            level.op.rows().to_string(),
            level.op.kind().to_string(),
            format!("{:?}", sol.parameter),
            format!("{err:?}"),
        ]);
    }
    write_csv(
        &dir.join("multilevel.csv"),
        table(&["level", "p", "structure", "parameter", "relative_error"], rows).map_err(Into::into),
    )?;
    m.write(&dir.join("multilevel_manifest.txt"))
}

/// Regenerates the data behind every diagnostic figure at desk scale.
pub fn repro_figures(args: &ReproArgs) -> CliResult<()> {
    let out = &args.out;
    let sim = |scene: SceneKind, noise: &str, sub: &str| SimulateArgs {
        size: args.size,
        scene,
        spread: args.spread,
        half_width: None,
        bc: BoundaryCondition::Zero,
        variant: None,
        noise: noise.parse().expect("built-in noise spec"),
        seed: args.seed,
        out: out.join(sub),
    };
    println!("== point spread function");
    simulate(&sim(SceneKind::SinglePixel, "gaussian:0.001", "single_pixel"))?;
    println!("== other noise models");
    simulate(&sim(SceneKind::H, "poisson:1e5", "poisson"))?;
    simulate(&sim(SceneKind::H, "saltpepper:0.05", "saltpepper"))?;
    println!("== test scene");
    let scene_dir = out.join("scene");
    simulate(&sim(SceneKind::H, "gaussian:0.001", "scene"))?;

    println!("== spectrum, Picard and L-curve data");
    let analyze_run = |noiseless: bool, run: &str| AnalyzeArgs {
        out: scene_dir.clone(),
        noiseless,
        input: None,
        run: Some(run.into()),
    };
    analyze(&analyze_run(false, "analysis"))?;
    analyze(&analyze_run(true, "analysis_noiseless"))?;

    println!("== reconstructions");
    let run = |method: Method, select: Option<Selector>, name: &str| DeblurArgs {
        out: scene_dir.clone(),
        method,
        select,
        tau: 1.0,
        input: None,
        run: Some(name.into()),
        epsilon: None,
        max_outer: 30,
    };
    deblur(&run(Method::Naive, None, "naive"))?;
    let corner = deblur(&run(Method::Tikhonov, Some(Selector::LCurve), "tikhonov_corner"))?;
    let lambda = corner.parameter.expect("tikhonov reports lambda");
    deblur(&run(
        Method::Tikhonov,
        Some(Selector::Fixed(lambda / 100.0)),
        "tikhonov_under",
    ))?;
    deblur(&run(
        Method::Tikhonov,
        Some(Selector::Fixed(lambda * 100.0)),
        "tikhonov_over",
    ))?;
    deblur(&run(
        Method::Tikhonov,
        Some(Selector::Discrepancy(None)),
        "tikhonov_discrepancy",
    ))?;
    deblur(&run(Method::Gtik, Some(Selector::Discrepancy(None)), "gtik"))?;
    if !args.skip_tv {
        deblur(&run(Method::Tv, Some(Selector::Discrepancy(None)), "tv"))?;
    }

    println!("== multilevel");
    multilevel(&MultilevelArgs {
        out: scene_dir.clone(),
        levels: 1,
        method: Method::Tikhonov,
        select: Selector::Discrepancy(None),
        tau: 1.0,
        prolong: true,
        input: None,
        run: Some("multilevel".into()),
    })?;
    println!("figure data written under {}", out.display());
    Ok(())
}
