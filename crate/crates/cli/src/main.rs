//! qchaos: measurement-conditioned nonlinear qubit maps on the command
//! line. Renders Julia sets of the induced rational map, iterates orbits,
//! finds attracting cycles, estimates Lyapunov exponents, and runs the
//! two-qubit purification protocol.
//!
//! Exit status: 0 success, 1 usage or input errors, 2 a purification run
//! halted by a degenerate measurement, 3 no attracting cycle found.

mod parse;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qchaos_core::{
    find_attracting_cycles, iterate_orbit, lyapunov_estimate, make_initial_rho0, render,
    run_protocol, to_grayscale_gamma, write_pgm, DensityMatrix, Error, GridSpec, MapParam,
    ProtocolParams, Result, SpherePoint, DEFAULT_EPS, DEFAULT_MAX_ITER,
};

#[derive(Parser)]
#[command(
    name = "qchaos",
    version,
    about = "Nonlinear qubit maps from measurement post-selection: Julia-set \
             renders, orbits, attracting cycles, Lyapunov exponents, and the \
             two-qubit purification protocol",
    arg_required_else_help = true
)]
struct Cli {
    /// Worker threads for rendering; output bytes do not depend on this
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the Julia set of F_p as a grayscale convergence-speed image
    Julia(JuliaArgs),
    /// Iterate F_p from one starting point and print the orbit as JSON
    Orbit(OrbitArgs),
    /// Find the attracting cycles of F_p and print them as JSON
    Cycles(CyclesArgs),
    /// Estimate a Lyapunov exponent along an orbit and print it as JSON
    Lyapunov(LyapunovArgs),
    /// Run the two-qubit purification protocol and write a trajectory CSV
    Purify(PurifyArgs),
}

#[derive(Args)]
struct JuliaArgs {
    /// Map parameter p ("a", "ai", "a+bi", "a-bi")
    #[arg(long, value_parser = parse::complex)]
    p: Complex64,
    /// Viewport center
    #[arg(long, default_value = "0", value_parser = parse::complex)]
    center: Complex64,
    /// Viewport half-width; the half-height follows from the aspect ratio
    #[arg(long, default_value = "2", value_parser = clap::value_parser!(f64))]
    half_width: f64,
    /// Image size as WIDTHxHEIGHT
    #[arg(long, default_value = "400x400", value_parser = parse::size)]
    size: (usize, usize),
    /// Chordal convergence tolerance
    #[arg(long, default_value = "1e-6")]
    eps: f64,
    /// Iteration budget per pixel
    #[arg(long, default_value = "500")]
    max_iter: usize,
    /// Shading exponent applied to the normalized step count; 1 = linear
    #[arg(long, default_value = "1")]
    gamma: f64,
    /// Output PGM path; a JSON parameter sidecar is written next to it
    #[arg(long)]
    out: PathBuf,
    /// Also dump raw per-pixel step counts as JSON
    #[arg(long, value_name = "PATH")]
    dump_grid: Option<PathBuf>,
}

#[derive(Args)]
struct OrbitArgs {
    /// Map parameter p ("a", "ai", "a+bi", "a-bi")
    #[arg(long, value_parser = parse::complex)]
    p: Complex64,
    /// Starting point (complex number or "inf")
    #[arg(long, value_parser = parse::sphere_point)]
    z0: SpherePoint,
    /// Number of map applications
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct CyclesArgs {
    /// Map parameter p ("a", "ai", "a+bi", "a-bi")
    #[arg(long, value_parser = parse::complex)]
    p: Complex64,
    /// Chordal tolerance for cycle detection
    #[arg(long, default_value = "1e-6")]
    eps: f64,
    /// Iteration budget per critical orbit
    #[arg(long, default_value = "500")]
    max_iter: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LyapunovStart {
    /// Starting point for a forward orbit (complex number or "inf")
    #[arg(long, value_parser = parse::sphere_point)]
    z0: Option<SpherePoint>,
    /// Start angle for the exact angle-doubling orbit on the unit circle
    /// (radians, or "<decimal>pi"); requires p = 0, where the circle is
    /// invariant
    #[arg(long, value_parser = parse::angle, value_name = "THETA")]
    circle_theta0: Option<f64>,
}

#[derive(Args)]
struct LyapunovArgs {
    /// Map parameter p ("a", "ai", "a+bi", "a-bi")
    #[arg(long, value_parser = parse::complex)]
    p: Complex64,
    #[command(flatten)]
    start: LyapunovStart,
    /// Orbit length (number of points averaged)
    #[arg(long, default_value = "100000")]
    n: usize,
}

#[derive(Args)]
struct PurifyArgs {
    /// First rotation angle (radians, or "<decimal>pi" such as "0.25pi")
    #[arg(long, value_parser = parse::angle)]
    x1: f64,
    /// First rotation phase (radians, or "<decimal>pi")
    #[arg(long, value_parser = parse::angle)]
    phi1: f64,
    /// Second rotation angle (radians, or "<decimal>pi")
    #[arg(long, value_parser = parse::angle)]
    x2: f64,
    /// Second rotation phase (radians, or "<decimal>pi")
    #[arg(long, value_parser = parse::angle)]
    phi2: f64,
    /// Initial two-qubit state: "paper" for the built-in reference state
    /// (fidelity 0.895 to the target), or a density-matrix JSON path
    #[arg(long, default_value = "paper")]
    rho0: String,
    /// Target state; only the Bell-like projector "bell" is available
    #[arg(long, default_value = "bell")]
    target: String,
    /// Number of protocol steps
    #[arg(long)]
    steps: usize,
    /// Output CSV path; a JSON parameter sidecar is written next to it
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not size the worker pool: {e}");
            std::process::exit(1);
        }
    }
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NoCycleFound { .. } => 3,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Julia(args) => julia(args),
        Command::Orbit(args) => orbit(args),
        Command::Cycles(args) => cycles(args),
        Command::Lyapunov(args) => lyapunov(args),
        Command::Purify(args) => purify(args),
    }
}

fn julia(args: JuliaArgs) -> Result<i32> {
    let (width, height) = args.size;
    let p = MapParam::new(args.p)?;
    let grid = GridSpec::new(args.center, args.half_width, width, height)?;
    let classified = render(p, &grid, args.eps, args.max_iter)?;
    let image = to_grayscale_gamma(&classified, args.max_iter, args.gamma)?;
    write_pgm(&image, &args.out)?;
    let params = serde_json::json!({
        "command": "julia",
        "p": [args.p.re, args.p.im],
        "center": [args.center.re, args.center.im],
        "half_width": args.half_width,
        "size": [width, height],
        "eps": args.eps,
        "max_iter": args.max_iter,
        "gamma": args.gamma,
        "out": args.out.display().to_string(),
    });
    write_json(&sidecar_path(&args.out), &params)?;
    if let Some(dump) = &args.dump_grid {
        write_json(dump, &classified)?;
        write_json(&sidecar_path(dump), &params)?;
    }
    Ok(0)
}

fn orbit(args: OrbitArgs) -> Result<i32> {
    let p = MapParam::new(args.p)?;
    let mut record = iterate_orbit(p, args.z0, args.n);
    // Annotation against the attracting cycles is best-effort: an orbit is
    // printable even when no cycle exists within the default budget.
    if let Ok(cycles) = find_attracting_cycles(p, DEFAULT_MAX_ITER, DEFAULT_EPS) {
        record.annotate(&cycles, DEFAULT_EPS);
    }
    print_json(&record)
}

fn cycles(args: CyclesArgs) -> Result<i32> {
    let p = MapParam::new(args.p)?;
    let cycles = find_attracting_cycles(p, args.max_iter, args.eps)?;
    print_json(&cycles)
}

fn lyapunov(args: LyapunovArgs) -> Result<i32> {
    let p = MapParam::new(args.p)?;
    let orbit: Vec<SpherePoint> = match (args.start.z0, args.start.circle_theta0) {
        (Some(z0), None) => iterate_orbit(p, z0, args.n).points,
        (None, Some(theta0)) => {
            if args.p != Complex64::new(0.0, 0.0) {
                eprintln!("error: --circle-theta0 requires --p 0");
                return Ok(1);
            }
            if args.n == 0 {
                eprintln!("error: --circle-theta0 needs --n of at least 1");
                return Ok(1);
            }
            let mut theta = theta0;
            let mut points = Vec::with_capacity(args.n);
            for _ in 0..args.n {
                points.push(SpherePoint::finite(Complex64::from_polar(1.0, theta)));
                theta = (2.0 * theta) % (2.0 * std::f64::consts::PI);
            }
            points
        }
        _ => unreachable!("clap enforces exactly one start"),
    };
    print_json(&lyapunov_estimate(p, &orbit))
}

fn purify(args: PurifyArgs) -> Result<i32> {
    if args.target != "bell" {
        eprintln!("error: unknown --target '{}'; available: bell", args.target);
        return Ok(1);
    }
    let params = ProtocolParams::new(args.x1, args.phi1, args.x2, args.phi2)?;
    let rho0 = if args.rho0 == "paper" {
        make_initial_rho0()
    } else {
        let text = std::fs::read_to_string(&args.rho0).map_err(|source| Error::Io {
            path: args.rho0.clone(),
            source,
        })?;
        serde_json::from_str::<DensityMatrix>(&text)?
    };
    let traj = run_protocol(&rho0, &params, args.steps)?;

    let mut csv = String::from("step,fidelity,purity,success_probability\n");
    for r in &traj.records {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.step, r.fidelity, r.purity, r.success_probability
        ));
    }
    std::fs::write(&args.out, csv).map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    let sidecar = serde_json::json!({
        "command": "purify",
        "x1": args.x1,
        "phi1": args.phi1,
        "x2": args.x2,
        "phi2": args.phi2,
        "rho0": args.rho0,
        "target": args.target,
        "steps": args.steps,
        "out": args.out.display().to_string(),
    });
    write_json(&sidecar_path(&args.out), &sidecar)?;
    if let Some(halt) = traj.degenerate_halt_step {
        eprintln!("degenerate measurement halted the run at step {halt}; partial trajectory written");
        return Ok(2);
    }
    Ok(0)
}

/// j.pgm -> j.pgm.json: the parameter record never shadows the artifact.
fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<i32> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(0)
}
