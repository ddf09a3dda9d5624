//! Command-line front end: `fit`, `certify`, `simulate` and `bound`.
//!
//! Exit status is 0 on success and one of the [`exit`] codes otherwise.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::backfit::{backfit_direct, backfit_iterative, IterativeOptions, Sweep};
use crate::bandwidth::BandwidthRule;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::report::{write_curves, write_json, write_replicates, Provenance, Report};
use crate::simulate::{
    gap_exceedance_bound, run_monte_carlo, BivariateNormal, ComponentFn, Design, MonteCarloConfig, SimSpec,
};
use crate::smoother::build_pair;
use crate::spectral::{certify, ConvergenceCertificate, SpectralMethod, Verdict};

pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// I/O and other runtime failures.
    pub const FAILURE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const NOT_CERTIFIED: i32 = 4;
    pub const SINGULAR: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "backfit", version, about = "Kernel backfitting for bivariate additive models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the additive model to a `y,u,v` CSV.
    Fit(FitArgs),
    /// Check whether backfitting is guaranteed to converge on a `y,u,v` CSV.
    Certify(CertifyArgs),
    /// Monte-Carlo study of gap conditions and certificates on synthetic data.
    Simulate(SimulateArgs),
    /// Print the analytic bounds on P(max uniform spacing >= h).
    Bound(BoundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepArg {
    GaussSeidel,
    Jacobi,
}

impl From<SweepArg> for Sweep {
    fn from(s: SweepArg) -> Self {
        match s {
            SweepArg::GaussSeidel => Sweep::GaussSeidel,
            SweepArg::Jacobi => Sweep::Jacobi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Iterative,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignArg {
    Uniform,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentArg {
    Zero,
    Identity,
    Sine,
    Square,
    Cubic,
}

impl From<ComponentArg> for ComponentFn {
    fn from(c: ComponentArg) -> Self {
        match c {
            ComponentArg::Zero => ComponentFn::Zero,
            ComponentArg::Identity => ComponentFn::Identity,
            ComponentArg::Sine => ComponentFn::Sine,
            ComponentArg::Square => ComponentFn::Square,
            ComponentArg::Cubic => ComponentFn::Cubic,
        }
    }
}

fn parse_kernel(s: &str) -> std::result::Result<Kernel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bandwidth(s: &str) -> std::result::Result<BandwidthRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SmoothingArgs {
    /// uniform | epanechnikov | triangular | gaussian
    #[arg(long, default_value = "gaussian", value_parser = parse_kernel)]
    pub kernel: Kernel,
    /// `<float>`, `rate:<delta>` (sd * n^-delta) or `knn:<k>`; applied to both coordinates.
    #[arg(long, default_value = "rate:0.2", value_parser = parse_bandwidth)]
    pub bandwidth: BandwidthRule,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[arg(long, value_enum, default_value = "iterative")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "gauss-seidel")]
    pub sweep: SweepArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Defaults to 10 n + 1000.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Refuse to fit unless convergence is certified.
    #[arg(long)]
    pub require_certificate: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// Exit with a nonzero status when the verdict is "not certified".
    #[arg(long)]
    pub require_certificate: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub design: DesignArg,
    /// Correlation of the normal design.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "sine")]
    pub m1: ComponentArg,
    #[arg(long, value_enum, default_value = "square")]
    pub m2: ComponentArg,
    #[arg(long, default_value_t = 0.5)]
    pub noise_sd: f64,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// Only collect gap statistics; skip the eigenvalue work.
    #[arg(long)]
    pub no_certify: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: f64,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The certificate was required but not obtained.
    NotCertified,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => exit::SUCCESS,
            Status::NotCertified => exit::NOT_CERTIFIED,
        }
    }
}

pub fn error_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Csv(_) | Error::Json(_) => exit::PARSE,
        Error::NonConvergence { .. } => exit::NON_CONVERGENCE,
        Error::Singular { .. } => exit::SINGULAR,
        _ => exit::FAILURE,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn certificate_for(data: &Dataset, smoothing: &SmoothingArgs) -> Result<ConvergenceCertificate> {
    let bw_u = smoothing.bandwidth.resolve(data.u())?;
    let bw_v = smoothing.bandwidth.resolve(data.v())?;
    let pair = build_pair(data, smoothing.kernel, &bw_u, &bw_v)?;
    certify(data, &pair, smoothing.kernel, &bw_u, &bw_v)
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<Status> {
    match &cli.command {
        Command::Fit(args) => run_fit(args, out),
        Command::Certify(args) => run_certify(args, out),
        Command::Simulate(args) => run_simulate(args, out),
        Command::Bound(args) => run_bound(args, out),
    }
}

fn run_fit(args: &FitArgs, out: &mut impl Write) -> Result<Status> {
    let data = Dataset::read_csv_path(&args.input)?;
    if args.require_certificate {
        let cert = certificate_for(&data, &args.smoothing)?;
        if !cert.verdict.is_certified() {
            writeln!(out, "{}: {}", cert.verdict, cert.notes)?;
            return Ok(Status::NotCertified);
        }
    }
    let bw_u = args.smoothing.bandwidth.resolve(data.u())?;
    let bw_v = args.smoothing.bandwidth.resolve(data.v())?;
    let pair = build_pair(&data, args.smoothing.kernel, &bw_u, &bw_v)?;
    let fit = match args.method {
        MethodArg::Direct => backfit_direct(&pair, data.y())?,
        MethodArg::Iterative => {
            let opts = IterativeOptions {
                tol: args.tol,
                max_iter: args.max_iter.unwrap_or(10 * data.len() + 1000),
                sweep: args.sweep.into(),
            };
            backfit_iterative(&pair, data.y(), opts)?
        }
    };
    ensure_dir(&args.out)?;
    let report = Report {
        provenance: Provenance::new("fit", args)?,
        result: &fit,
    };
    write_json(args.out.join("fit.json"), &report)?;
    write_curves(fs::File::create(args.out.join("curves.csv"))?, &data, &fit)?;
    writeln!(
        out,
        "alpha_hat = {}, iterations = {}, normal-equation residual = {:e}",
        fit.alpha_hat, fit.iterations, fit.residual_normal_eq
    )?;
    Ok(Status::Success)
}

fn run_certify(args: &CertifyArgs, out: &mut impl Write) -> Result<Status> {
    let data = Dataset::read_csv_path(&args.input)?;
    let cert = certificate_for(&data, &args.smoothing)?;
    ensure_dir(&args.out)?;
    let report = Report {
        provenance: Provenance::new("certify", args)?,
        result: &cert,
    };
    write_json(args.out.join("certificate.json"), &report)?;
    writeln!(
        out,
        "{}; rho(S2* S1*) = {:.6}",
        cert.verdict, cert.spectral.rho_product
    )?;
    if args.require_certificate && cert.verdict == Verdict::NotCertified {
        return Ok(Status::NotCertified);
    }
    Ok(Status::Success)
}

fn run_simulate(args: &SimulateArgs, out: &mut impl Write) -> Result<Status> {
    let design = match args.design {
        DesignArg::Uniform => Design::unit_square(),
        DesignArg::Normal => Design::BivariateNormal(BivariateNormal::standard(args.rho)),
    };
    let cfg = MonteCarloConfig {
        spec: SimSpec {
            n: args.n,
            alpha: args.alpha,
            m1: args.m1.into(),
            m2: args.m2.into(),
            design,
            noise_sd: args.noise_sd,
            seed: args.seed,
        },
        kernel: args.smoothing.kernel,
        bandwidth_u: args.smoothing.bandwidth.clone(),
        bandwidth_v: args.smoothing.bandwidth.clone(),
        replicates: args.replicates,
        certify: !args.no_certify,
        method: SpectralMethod::Dense,
    };
    let report = run_monte_carlo(&cfg)?;
    ensure_dir(&args.out)?;
    write_json(
        args.out.join("monte_carlo.json"),
        &Report {
            provenance: Provenance::new("simulate", args)?,
            result: &report,
        },
    )?;
    write_replicates(fs::File::create(args.out.join("replicates.csv"))?, &report.rows)?;
    writeln!(out, "{report}")?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct BoundOutput {
    n: usize,
    h: f64,
    exact: f64,
    exponential: f64,
}

fn run_bound(args: &BoundArgs, out: &mut impl Write) -> Result<Status> {
    let b = gap_exceedance_bound(args.n, args.h)?;
    let text = serde_json::to_string_pretty(&BoundOutput {
        n: args.n,
        h: args.h,
        exact: b.exact,
        exponential: b.exponential,
    })?;
    writeln!(out, "{text}")?;
    Ok(Status::Success)
}
