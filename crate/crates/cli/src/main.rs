//! `knotflux`: torus-knot flux, persistent-current sweeps and ensembles.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a computation fails.

mod failure;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use knotflux::current::{self, ElectronSystem};
use knotflux::ensemble::{self, EnsembleConfig};
use knotflux::geometry::{self, KnotClass, TorusGeometry};
use knotflux::magnetostatics::{self, FieldVector, FluxResult};
use knotflux::modulation::{self, ModulationProfile};
use knotflux::output::{self, format_float, KeyValueRecord};
use knotflux::units::UnitSystem;

use failure::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "knotflux",
    version,
    about = "Aharonov-Bohm flux and persistent currents on torus knots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curve geometry.
    #[command(subcommand)]
    Knot(KnotCommand),
    /// Draw a random minor-radius profile and save it as a record.
    Profile(ProfileArgs),
    /// Threaded flux and Aharonov-Bohm phase for one field.
    Flux(FluxArgs),
    /// Ensemble-averaged persistent current along a field sweep.
    Sweep(SweepArgs),
    /// Histogram of the flux excess over random minor-radius profiles.
    Ensemble(EnsembleArgs),
}

#[derive(Debug, Subcommand)]
enum KnotCommand {
    /// Sample the knot at evenly spaced parameter values.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
struct KnotArgs {
    /// Windings around the rotational axis.
    #[arg(long, allow_negative_numbers = true)]
    p: i64,
    /// Windings through the hole.
    #[arg(long, allow_negative_numbers = true)]
    q: i64,
    /// Major radius R.
    #[arg(long, default_value_t = 1.0)]
    major: f64,
}

#[derive(Debug, Args)]
struct MinorArgs {
    /// Constant minor radius, 0 <= eps < R.
    #[arg(long, required_unless_present = "profile", conflicts_with = "profile")]
    minor: Option<f64>,
    /// Modulated minor radius from a record written by `knotflux profile`.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Metadata sidecar; defaults to `<output>.meta`, or standard error when
    /// writing to standard output.
    #[arg(long)]
    metadata: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    knot: KnotArgs,
    #[command(flatten)]
    minor: MinorArgs,
    /// Number of samples.
    #[arg(long, default_value_t = 360)]
    n: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    eps_mean: f64,
    #[arg(long)]
    eps_amp: f64,
    /// Spectral exponent: coefficients fall off as k^(-beta/2).
    #[arg(long, default_value_t = modulation::DEFAULT_SPECTRUM_EXPONENT)]
    beta: f64,
    #[arg(long, default_value_t = modulation::DEFAULT_MODES)]
    modes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Profile record.
    #[arg(long, short)]
    output: PathBuf,
    /// Also write a `theta,eps` table here.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Args)]
struct PhysicalArgs {
    /// Interpret fields in teslas and scale lengths to metres.
    #[arg(long)]
    physical: bool,
    /// Major radius in metres; lengths given to --major/--minor are rescaled by major-meters/major.
    #[arg(long, requires = "physical")]
    major_meters: Option<f64>,
}

#[derive(Debug, Args)]
struct FluxArgs {
    #[command(flatten)]
    knot: KnotArgs,
    #[command(flatten)]
    minor: MinorArgs,
    /// Field vector `bx,by,bz`.
    #[arg(long, value_parser = parse_field, allow_hyphen_values = true)]
    field: FieldVector,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Trapezoid nodes for the numerical line integral.
    #[arg(long, default_value_t = magnetostatics::DEFAULT_NODES)]
    nodes: usize,
    #[command(flatten)]
    physical: PhysicalArgs,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    knot: KnotArgs,
    #[command(flatten)]
    minor: MinorArgs,
    /// Sweep direction `bx,by,bz`; normalized before use.
    #[arg(long, value_parser = parse_field, allow_hyphen_values = true, default_value = "0,0,1")]
    direction: FieldVector,
    /// Largest field magnitude along the direction.
    #[arg(long)]
    bz_max: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = magnetostatics::DEFAULT_NODES)]
    nodes: usize,
    #[command(flatten)]
    physical: PhysicalArgs,
    /// Electron count, used for the current scale I0 in physical mode.
    #[arg(long, requires = "physical")]
    electrons: Option<u64>,
    /// Effective mass in units of the free electron mass.
    #[arg(long, requires = "physical")]
    mass_ratio: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[command(flatten)]
    knot: KnotArgs,
    #[arg(long)]
    eps_mean: f64,
    #[arg(long)]
    eps_amp: f64,
    #[arg(long, default_value_t = modulation::DEFAULT_SPECTRUM_EXPONENT)]
    beta: f64,
    #[arg(long, default_value_t = modulation::DEFAULT_MODES)]
    modes: usize,
    /// Field direction `bx,by,bz`; needs a nonzero vertical component.
    #[arg(long, value_parser = parse_field, allow_hyphen_values = true, default_value = "0,0,1")]
    field: FieldVector,
    #[arg(long, default_value_t = ensemble::DEFAULT_REALIZATIONS)]
    realizations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = ensemble::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = magnetostatics::DEFAULT_NODES)]
    nodes: usize,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_field(s: &str) -> Result<FieldVector, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [bx, by, bz] = parts.as_slice() else {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let field = FieldVector::new(num(bx)?, num(by)?, num(bz)?);
    if !field.is_finite() {
        return Err(format!("field components must be finite, got `{s}`"));
    }
    Ok(field)
}

fn format_field(f: FieldVector) -> String {
    format!(
        "{},{},{}",
        format_float(f.bx),
        format_float(f.by),
        format_float(f.bz)
    )
}

fn knot_class(args: &KnotArgs) -> Result<KnotClass, Failure> {
    Ok(geometry::validate_knot_class(args.p, args.q)?)
}

fn load_profile(path: &Path) -> Result<ModulationProfile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read profile {}: {e}", path.display())))?;
    let record = KeyValueRecord::parse(&text)
        .map_err(|e| Failure::validation(format!("profile {}: {e}", path.display())))?;
    Ok(ModulationProfile::from_record(&record)?)
}

/// Geometry plus the config echo describing it.
fn build_geometry(
    major: f64,
    minor: &MinorArgs,
    echo: &mut KeyValueRecord,
) -> Result<TorusGeometry, Failure> {
    echo.push_float("major", major);
    match (&minor.profile, minor.minor) {
        (Some(path), _) => {
            let profile = load_profile(path)?;
            echo.push("profile", path.display().to_string());
            echo.extend(&prefixed("profile.", &profile.to_record()));
            Ok(TorusGeometry::modulated(major, profile)?)
        }
        (None, Some(eps)) => {
            echo.push_float("minor", eps);
            Ok(TorusGeometry::new(major, eps)?)
        }
        (None, None) => Err(Failure::validation(
            "either --minor or --profile is required",
        )),
    }
}

fn prefixed(prefix: &str, record: &KeyValueRecord) -> KeyValueRecord {
    let mut out = KeyValueRecord::default();
    for (k, v) in record.entries() {
        out.push(format!("{prefix}{k}"), v.clone());
    }
    out
}

/// Length scale in metres per input length unit, or `None` in dimensionless mode.
fn length_scale(
    args: &PhysicalArgs,
    major: f64,
    echo: &mut KeyValueRecord,
) -> Result<Option<f64>, Failure> {
    if !args.physical {
        echo.push("units", UnitSystem::Dimensionless.name());
        return Ok(None);
    }
    let metres = args
        .major_meters
        .ok_or_else(|| Failure::validation("--physical requires --major-meters"))?;
    if !(metres.is_finite() && metres > 0.0) {
        return Err(Failure::validation(format!(
            "--major-meters must be positive, got {metres}"
        )));
    }
    echo.push("units", UnitSystem::Physical.name());
    echo.push_float("major_meters", metres);
    Ok(Some(metres / major))
}

/// Writes `body` to `path`, or to standard output.
fn emit(path: Option<&Path>, body: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, body)
            .map_err(|e| Failure::validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Writes the metadata sidecar next to the output, or to standard error.
fn emit_metadata(out: &OutputArgs, record: &KeyValueRecord) -> Result<(), Failure> {
    let path = out.metadata.clone().or_else(|| {
        out.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".meta");
            PathBuf::from(s)
        })
    });
    match path {
        Some(p) => emit(Some(&p), record.to_string().as_bytes()),
        None => {
            let mut stderr = io::stderr().lock();
            for (k, v) in record.entries() {
                writeln!(stderr, "# {k}={v}")?;
            }
            Ok(())
        }
    }
}

fn run_sample(args: &SampleArgs) -> Result<(), Failure> {
    let knot = knot_class(&args.knot)?;
    let mut echo = KeyValueRecord::default();
    echo.push("command", "knot sample");
    echo.push("p", knot.p().to_string());
    echo.push("q", knot.q().to_string());
    let geom = build_geometry(args.knot.major, &args.minor, &mut echo)?;
    echo.push("n", args.n.to_string());
    let samples = geometry::sample_curve(knot, &geom, args.n)?;
    let mut body = Vec::new();
    output::write_curve_csv(&mut body, &samples)?;
    emit(args.out.output.as_deref(), &body)?;
    emit_metadata(&args.out, &echo)
}

fn run_profile(args: &ProfileArgs) -> Result<(), Failure> {
    let profile = modulation::generate_profile(
        args.eps_mean,
        args.eps_amp,
        args.beta,
        args.modes,
        args.seed,
    )?;
    emit(
        Some(&args.output),
        profile.to_record().to_string().as_bytes(),
    )?;
    if let Some(table) = &args.table {
        let mut body = Vec::new();
        output::write_profile_csv(&mut body, &modulation::profile_table(&profile))?;
        emit(Some(table), &body)?;
    }
    Ok(())
}

fn push_flux(record: &mut KeyValueRecord, result: &FluxResult) {
    let name = result.method.name();
    record.push_float(format!("phi_tau_{name}"), result.phi_tau);
    record.push_float(format!("phi_over_phi0_{name}"), result.phi_over_phi0());
    record.push_float(format!("chi_{name}"), result.chi);
    if let Some(e) = result.quadrature_error_estimate {
        record.push_float(format!("quadrature_error_estimate_{name}"), e);
    }
}

/// Flux through the knot scaled to metres: flux grows with the square of length.
fn rescale(result: FluxResult, scale: Option<f64>) -> FluxResult {
    match scale {
        None => result,
        Some(s) => FluxResult {
            phi_tau: result.phi_tau * s * s,
            quadrature_error_estimate: result.quadrature_error_estimate.map(|e| e * s * s),
            ..result
        }
        .with_units(UnitSystem::Physical),
    }
}

fn run_flux(args: &FluxArgs) -> Result<(), Failure> {
    let knot = knot_class(&args.knot)?;
    if args.method != Method::Numeric && args.minor.profile.is_some() {
        return Err(Failure::validation(
            "the closed form needs a constant minor radius; use --method numeric with --profile",
        ));
    }
    let mut record = KeyValueRecord::default();
    record.push("command", "flux");
    record.push("p", knot.p().to_string());
    record.push("q", knot.q().to_string());
    let geom = build_geometry(args.knot.major, &args.minor, &mut record)?;
    let scale = length_scale(&args.physical, args.knot.major, &mut record)?;
    record.push("field", format_field(args.field));
    record.push(
        "method",
        match args.method {
            Method::Analytic => "analytic",
            Method::Numeric => "numeric",
            Method::Both => "both",
        },
    );
    record.push("nodes", args.nodes.to_string());

    let analytic = match args.method {
        Method::Numeric => None,
        _ => Some(rescale(
            magnetostatics::flux_analytic(knot, &geom, args.field)?,
            scale,
        )),
    };
    let numeric = match args.method {
        Method::Analytic => None,
        _ => Some(rescale(
            magnetostatics::flux_numeric(knot, &geom, args.field, args.nodes)?,
            scale,
        )),
    };
    for r in analytic.iter().chain(numeric.iter()) {
        push_flux(&mut record, r);
    }
    if let (Some(a), Some(n)) = (analytic, numeric) {
        record.push_float("difference", n.phi_over_phi0() - a.phi_over_phi0());
    }
    emit(args.output.as_deref(), record.to_string().as_bytes())
}

fn run_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let knot = knot_class(&args.knot)?;
    let mut echo = KeyValueRecord::default();
    echo.push("command", "sweep");
    echo.push("p", knot.p().to_string());
    echo.push("q", knot.q().to_string());
    let geom = build_geometry(args.knot.major, &args.minor, &mut echo)?;
    let scale = length_scale(&args.physical, args.knot.major, &mut echo)?;
    echo.push("direction", format_field(args.direction));
    echo.push_float("bz_max", args.bz_max);
    echo.push("steps", args.steps.to_string());
    echo.push("nodes", args.nodes.to_string());

    // Flux per unit field in flux quanta is s²/Φ0 times its dimensionless value.
    let field_factor = match scale {
        None => 1.0,
        Some(s) => {
            let (n, ratio) = match (args.electrons, args.mass_ratio) {
                (Some(n), Some(m)) => (n, m),
                _ => {
                    return Err(Failure::validation(
                        "--physical sweeps require --electrons and --mass-ratio",
                    ))
                }
            };
            let ell = geometry::arc_length(knot, &geom, geometry::DEFAULT_ARC_LENGTH_TOL)? * s;
            let system = ElectronSystem::physical(n, ell, ratio)?;
            echo.push("electrons", n.to_string());
            echo.push_float("mass_ratio", ratio);
            echo.push_float("loop_length_meters", ell);
            echo.push_float("current_scale_amperes", system.current_scale());
            s * s / UnitSystem::Physical.flux_quantum()
        }
    };
    let trace = current::sweep_current_vs_field(
        knot,
        &geom,
        args.direction,
        args.bz_max * field_factor,
        args.steps,
        args.nodes,
    )?;
    let trace = if field_factor == 1.0 {
        trace
    } else {
        trace.with_field_scale(1.0 / field_factor)
    };
    let mut body = Vec::new();
    output::write_trace_csv(&mut body, &trace)?;
    emit(args.out.output.as_deref(), &body)?;
    emit_metadata(&args.out, &echo)
}

fn run_ensemble(args: &EnsembleArgs) -> Result<(), Failure> {
    let knot = knot_class(&args.knot)?;
    let config = EnsembleConfig {
        spectrum_exponent: args.beta,
        n_modes: args.modes,
        realizations: args.realizations,
        seed: args.seed,
        bins: args.bins,
        nodes: args.nodes,
        ..EnsembleConfig::new(
            knot,
            args.knot.major,
            args.eps_mean,
            args.eps_amp,
            args.field,
        )
    };
    config.validate()?;
    // surface parameter errors before spawning workers
    modulation::generate_profile(
        config.eps_mean,
        config.eps_amp,
        config.spectrum_exponent,
        config.n_modes,
        0,
    )?;
    let result = ensemble::run_ensemble(&config, args.threads)?;
    let mut body = Vec::new();
    output::write_histogram_csv(&mut body, &result.histogram)?;
    emit(args.out.output.as_deref(), &body)?;
    let mut meta = KeyValueRecord::default();
    meta.push("command", "ensemble");
    meta.extend(&result.metadata(&config));
    emit_metadata(&args.out, &meta)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Knot(KnotCommand::Sample(a)) => run_sample(a),
        Command::Profile(a) => run_profile(a),
        Command::Flux(a) => run_flux(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Ensemble(a) => run_ensemble(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("knotflux: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
