use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cfrht::fock;
use cfrht::kernel1d::frht_kernel;
use cfrht::params::{validate_params, Route as ParamRoute};
use cfrht::symplectic::{apply_gaussian, frhad_symplectic1, frhad_symplectic2, GaussianState};
use cfrht::twomode::{measure_bell, EtaGrid, TwoModeWavefunction};
use cfrht::verify::{self, Scope};
use cfrht::{Complex64, Grid1D, SampledWavefunction, TransformParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};

use crate::io::{self, MatrixListing, Signal, Signal1D, Signal2D};
use crate::{Failure, EXIT_NUMERIC, EXIT_OK};

/// Relative norm change above which a grid transform is reported as aliased.
pub const NORM_DRIFT_LIMIT: f64 = 1e-3;

/// Largest accepted `--fock-dim`.
pub const MAX_FOCK_DIM: usize = 2048;

#[derive(Debug, Parser)]
#[command(name = "cfrht", version, about = "Continuous fractional Hadamard transform")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform a sampled 1-D signal with the integral kernel.
    Transform(TransformArgs),
    /// Write the truncated number-basis matrix of the transform.
    Fock(FockArgs),
    /// Push a Gaussian state through the phase-space map.
    Gaussian(GaussianArgs),
    /// Transform a sampled two-mode wavefunction on the eta plane.
    Twomode(TwomodeArgs),
    /// Run the cross-representation identity suite and write a report.
    Verify(VerifyArgs),
    /// Emit plot-ready columns from a signal file.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Rotation angle in radians.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["alpha_deg", "sigma"])]
    pub alpha: Option<f64>,
    /// Rotation angle in degrees.
    #[arg(long = "alpha-deg", allow_negative_numbers = true, conflicts_with = "sigma")]
    pub alpha_deg: Option<f64>,
    /// Input scale length.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Output scale length.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub nu: f64,
    /// Hadamard scale: alpha = pi/2, mu = nu = sigma/sqrt(2).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["mu", "nu"])]
    pub sigma: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<TransformParams, Failure> {
        if let Some(sigma) = self.sigma {
            return Ok(cfrht::HadamardScale::new(sigma)?.params());
        }
        let alpha = match (self.alpha, self.alpha_deg) {
            (Some(a), _) => a,
            (None, Some(d)) => d.to_radians(),
            (None, None) => return Err(Failure::input("one of --alpha, --alpha-deg or --sigma is required")),
        };
        Ok(TransformParams::new(alpha, self.mu, self.nu)?)
    }
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output grid (all three or none; default: the input grid).
    #[arg(long = "grid-min", allow_negative_numbers = true, requires_all = ["grid_max", "grid_points"])]
    pub grid_min: Option<f64>,
    #[arg(long = "grid-max", allow_negative_numbers = true, requires_all = ["grid_min", "grid_points"])]
    pub grid_max: Option<f64>,
    #[arg(long = "grid-points", requires_all = ["grid_min", "grid_max"])]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FockRoute {
    #[value(name = "normal_ordered")]
    NormalOrdered,
    #[value(name = "decomposed")]
    Decomposed,
}

impl FockRoute {
    fn as_str(&self) -> &'static str {
        match self {
            FockRoute::NormalOrdered => "normal_ordered",
            FockRoute::Decomposed => "decomposed",
        }
    }
}

#[derive(Debug, Args)]
pub struct FockArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "fock-dim", default_value_t = fock::DEFAULT_DIM)]
    pub fock_dim: usize,
    #[arg(long, value_enum, default_value_t = FockRoute::Decomposed)]
    pub route: FockRoute,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// 1 or 2.
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
    /// Comma-separated mean in the order (X, P) or (X1, P1, X2, P2); default 0.
    #[arg(long, allow_hyphen_values = true)]
    pub mean: Option<String>,
    /// Comma-separated covariance, row-major; default the vacuum I/2.
    #[arg(long, allow_hyphen_values = true)]
    pub cov: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TwomodeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    All,
    Kernel,
    Fock,
    Symplectic,
    Twomode,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => Scope::All,
            ScopeArg::Kernel => Scope::Kernel,
            ScopeArg::Fock => Scope::Fock,
            ScopeArg::Symplectic => Scope::Symplectic,
            ScopeArg::Twomode => Scope::Twomode,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = ScopeArg::All)]
    pub scope: ScopeArg,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// `x,abs`
    #[value(name = "magnitude")]
    Magnitude,
    /// `x,phase`, unwrapped along x (1-D) or principal value (2-D)
    #[value(name = "phase")]
    Phase,
    /// `x,abs,arg`: everything a plot needs, no phase-space distribution
    #[value(name = "wigner_none")]
    WignerNone,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, alias = "what", value_enum)]
    pub format: PlotKind,
}

pub fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Transform(a) => transform(a),
        Command::Fock(a) => fock_matrix(a),
        Command::Gaussian(a) => gaussian(a),
        Command::Twomode(a) => twomode(a),
        Command::Verify(a) => run_verify(a),
        Command::Plotdata(a) => plotdata(a),
    }
}

fn read_signal(path: &Path) -> Result<Signal, Failure> {
    let text = io::read_text(path)?;
    io::parse_signal(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn axis_grid(axis: &[f64]) -> Result<Grid1D, Failure> {
    Ok(Grid1D::new(axis[0], axis[axis.len() - 1], axis.len())?)
}

fn relative_drift(before: f64, after: f64) -> f64 {
    if before > 0.0 {
        (after - before).abs() / before
    } else {
        after
    }
}

/// Reports the norms and turns excessive drift into exit code 3.
fn check_drift(before: f64, after: f64) -> Result<i32, Failure> {
    let drift = relative_drift(before, after);
    eprintln!("norm_in={before} norm_out={after} relative_drift={drift:e}");
    if drift > NORM_DRIFT_LIMIT {
        Err(Failure::numeric(format!(
            "norm changed by {drift:.3e} (limit {NORM_DRIFT_LIMIT:e}); the grid does not resolve the transformed signal"
        )))
    } else {
        Ok(EXIT_OK)
    }
}

fn transform(a: TransformArgs) -> Result<i32, Failure> {
    let p = a.params.resolve()?;
    let Signal::One(s) = read_signal(&a.input)? else {
        return Err(Failure::input("transform expects a 1-D signal (`x,re,im`); use `twomode` for eta-plane files"));
    };
    let grid_in = axis_grid(&s.x)?;
    let grid_out = match (a.grid_min, a.grid_max, a.grid_points) {
        (Some(lo), Some(hi), Some(n)) => Grid1D::new(lo, hi, n)?,
        _ => grid_in,
    };
    let f = SampledWavefunction::new(grid_in, s.values)?;
    let g = frht_kernel(&p, grid_in, grid_out)?.apply(&f)?;
    let x = if grid_out == grid_in { s.x } else { grid_out.points().collect() };
    let (before, after) = (f.norm(), g.norm());
    io::write_output(a.output.as_deref(), &io::render_1d(&Signal1D { x, values: g.into_values() }))?;
    check_drift(before, after)
}

fn twomode(a: TwomodeArgs) -> Result<i32, Failure> {
    let p = a.params.resolve()?;
    let Signal::Two(s) = read_signal(&a.input)? else {
        return Err(Failure::input("twomode expects an eta-plane signal (`eta1,eta2,re,im`)"));
    };
    let grid = EtaGrid::new(axis_grid(&s.eta1)?, axis_grid(&s.eta2)?);
    let f = TwoModeWavefunction::new(grid, s.values)?;
    let g = measure_bell(&p, &f)?;
    let (before, after) = (f.norm(), g.norm());
    let out = Signal2D { eta1: s.eta1, eta2: s.eta2, values: g.values().clone() };
    io::write_output(a.output.as_deref(), &io::render_2d(&out))?;
    check_drift(before, after)
}

fn fock_matrix(a: FockArgs) -> Result<i32, Failure> {
    let p = a.params.resolve()?;
    validate_params(&p, ParamRoute::Fock)?;
    if a.fock_dim > MAX_FOCK_DIM {
        return Err(Failure::input(format!("--fock-dim {} exceeds {MAX_FOCK_DIM}", a.fock_dim)));
    }
    let op = match a.route {
        FockRoute::NormalOrdered => fock::frhad_normal_ordered(&p, a.fock_dim)?,
        FockRoute::Decomposed => fock::frhad_decomposed(&p, a.fock_dim)?,
    };
    let mut meta = vec![
        ("tool_version".to_string(), verify::TOOL_VERSION.to_string()),
        ("route".into(), a.route.as_str().into()),
        ("alpha".into(), p.alpha.to_string()),
        ("mu".into(), p.mu.to_string()),
        ("nu".into(), p.nu.to_string()),
        ("dim".into(), op.dim().to_string()),
        ("trusted".into(), op.trusted().to_string()),
    ];
    if let Some(w) = op.working_dim() {
        meta.push(("working_dim".into(), w.to_string()));
    }
    meta.push(("basis".into(), "number states |0>..|dim-1>; entry (row,col) = <row|H|col>".into()));
    let listing = MatrixListing { meta, entries: op.entries().clone() };
    io::write_output(a.output.as_deref(), &io::render_matrix(&listing))?;
    Ok(EXIT_OK)
}

fn parse_list(flag: &str, text: &str, expected: usize) -> Result<Vec<f64>, Failure> {
    let values = text
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::input(format!("--{flag}: `{t}` is not a finite number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(Failure::input(format!("--{flag}: expected {expected} values, got {}", values.len())));
    }
    Ok(values)
}

fn gaussian(a: GaussianArgs) -> Result<i32, Failure> {
    let p = a.params.resolve()?;
    let size = match a.modes {
        1 | 2 => 2 * a.modes,
        m => return Err(Failure::input(format!("--modes must be 1 or 2, got {m}"))),
    };
    let mean = match &a.mean {
        Some(t) => DVector::from_vec(parse_list("mean", t, size)?),
        None => DVector::zeros(size),
    };
    let cov = match &a.cov {
        Some(t) => DMatrix::from_row_slice(size, size, &parse_list("cov", t, size * size)?),
        None => DMatrix::identity(size, size) * 0.5,
    };
    let state = GaussianState::new(mean, cov)?;
    let map = if a.modes == 1 { frhad_symplectic1(&p)? } else { frhad_symplectic2(&p)? };
    let out = apply_gaussian(&map, &state)?;

    let mut text = String::new();
    let _ = writeln!(text, "# tool_version={}", verify::TOOL_VERSION);
    let _ = writeln!(text, "# modes={}", a.modes);
    let _ = writeln!(text, "# alpha={}", p.alpha);
    let _ = writeln!(text, "# mu={}", p.mu);
    let _ = writeln!(text, "# nu={}", p.nu);
    let basis = if a.modes == 1 { "(X,P)" } else { "(X1,P1,X2,P2)" };
    let _ = writeln!(text, "# basis={basis}");
    let _ = writeln!(text, "# convention=hbar=1; vacuum cov I/2");
    let _ = writeln!(text, "# action=U Q U^dag = map Q; mean_out = map mean_in, cov_out = map cov_in map^T");
    let _ = writeln!(text, "block,row,col,value");
    for i in 0..size {
        let _ = writeln!(text, "mean,{i},0,{}", io::fmt_f64(out.mean()[i]));
    }
    for (name, m) in [("cov", out.cov()), ("map", map.matrix())] {
        for i in 0..size {
            for j in 0..size {
                let _ = writeln!(text, "{name},{i},{j},{}", io::fmt_f64(m[(i, j)]));
            }
        }
    }
    io::write_output(a.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn run_verify(a: VerifyArgs) -> Result<i32, Failure> {
    let report = verify::run(a.scope.into());
    io::write_output(a.output.as_deref(), &report.render())?;
    let failed = report.failed();
    eprintln!(
        "verify scope={} checks={} failed={} elapsed_ms={}",
        report.scope.as_str(),
        report.checks.len(),
        failed.len(),
        report.elapsed.as_millis()
    );
    for c in &failed {
        eprintln!("FAILED {} residual={:e} tolerance={:e} {}", c.name, c.residual, c.tolerance, c.note);
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_NUMERIC })
}

/// Continuous phase along a 1-D sample sequence.
pub fn unwrap_phase(values: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for v in values {
        let raw = v.arg();
        if let Some(p) = prev {
            let step = raw + offset - p;
            offset -= std::f64::consts::TAU * (step / std::f64::consts::TAU).round();
        }
        let unwrapped = raw + offset;
        out.push(unwrapped);
        prev = Some(unwrapped);
    }
    out
}

fn plotdata(a: PlotArgs) -> Result<i32, Failure> {
    let signal = read_signal(&a.input)?;
    let mut text = String::new();
    match &signal {
        Signal::One(s) => {
            let phase = match a.format {
                PlotKind::Phase => unwrap_phase(&s.values),
                _ => s.values.iter().map(|v| v.arg()).collect(),
            };
            let _ = writeln!(
                text,
                "{}",
                match a.format {
                    PlotKind::Magnitude => "x,abs",
                    PlotKind::Phase => "x,phase",
                    PlotKind::WignerNone => "x,abs,arg",
                }
            );
            for ((x, v), ph) in s.x.iter().zip(&s.values).zip(&phase) {
                let _ = match a.format {
                    PlotKind::Magnitude => writeln!(text, "{},{}", io::fmt_f64(*x), io::fmt_f64(v.norm())),
                    PlotKind::Phase => writeln!(text, "{},{}", io::fmt_f64(*x), io::fmt_f64(*ph)),
                    PlotKind::WignerNone => writeln!(text, "{},{},{}", io::fmt_f64(*x), io::fmt_f64(v.norm()), io::fmt_f64(*ph)),
                };
            }
        }
        Signal::Two(s) => {
            let _ = writeln!(
                text,
                "{}",
                match a.format {
                    PlotKind::Magnitude => "eta1,eta2,abs",
                    PlotKind::Phase => "eta1,eta2,phase",
                    PlotKind::WignerNone => "eta1,eta2,abs,arg",
                }
            );
            for (i, e1) in s.eta1.iter().enumerate() {
                for (j, e2) in s.eta2.iter().enumerate() {
                    let v = s.values[(i, j)];
                    let _ = match a.format {
                        PlotKind::Magnitude => writeln!(text, "{},{},{}", io::fmt_f64(*e1), io::fmt_f64(*e2), io::fmt_f64(v.norm())),
                        PlotKind::Phase => writeln!(text, "{},{},{}", io::fmt_f64(*e1), io::fmt_f64(*e2), io::fmt_f64(v.arg())),
                        PlotKind::WignerNone => writeln!(text, "{},{},{},{}", io::fmt_f64(*e1), io::fmt_f64(*e2), io::fmt_f64(v.norm()), io::fmt_f64(v.arg())),
                    };
                }
            }
        }
    }
    io::write_output(a.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}
