//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frontlab_core::Params;

#[derive(Debug, Parser)]
#[command(name = "frontlab", version, about = "Spectra, absolute spectra and simulations of coupled KPP / Swift-Hohenberg fronts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file (directory for repro-figure); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads for sweeps and batches.
    #[arg(long, global = true, env = "FRONTLAB_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Frame speed; defaults to the linear spreading speed 2 sqrt(d alpha).
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
}

impl ParamArgs {
    pub fn params(&self) -> frontlab_core::Result<Params> {
        let p = Params::critical(self.d, self.alpha, self.mu, self.beta)?;
        match self.s {
            Some(s) => Params::new(self.d, self.alpha, self.mu, self.beta, s),
            None => Ok(p),
        }
    }

    /// Parameters that must also lie in the invasion regime `mu < 0`.
    pub fn invasion_params(&self) -> frontlab_core::Result<Params> {
        let p = self.params()?;
        if !(p.mu < 0.0) {
            return Err(frontlab_core::Error::Domain(format!("mu must be negative, got {}", p.mu)));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComponentArg {
    U,
    V,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GreensKind {
    G22,
    G12,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    /// d on the x-axis, alpha on the y-axis, at fixed mu.
    AlphaD,
    /// d on the x-axis, mu on the y-axis, at fixed alpha.
    MuD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Constant,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    Regions,
    ShAbs,
    AbsSpec,
    CheckingHypothesis,
    SimGrid,
    Delay,
}

/// Discretization flags; unset values fall back to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Half-length L of the domain [-L, L].
    #[arg(long = "L")]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// Time between trace samples.
    #[arg(long)]
    pub output_every: Option<f64>,
}

impl GridArgs {
    pub fn apply(&self, cfg: &mut frontlab_core::SimConfig) {
        if let Some(v) = self.half_length {
            cfg.half_length = v;
        }
        if let Some(v) = self.dx {
            cfg.dx = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.t_final {
            cfg.t_final = v;
        }
        if let Some(v) = self.output_every {
            cfg.output_every = v;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability region of (d, alpha, mu).
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Also evaluate gamma_v and the decay-rate condition in Rrem and Rabs.
        #[arg(long)]
        decay: bool,
    },
    /// Closed-form region boundaries in mu.
    Boundaries {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Essential or weighted essential spectrum curves.
    EssSpectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = ComponentArg::Both)]
        component: ComponentArg,
        /// Exponential weight; defaults to the critical rate -s/(2d).
        #[arg(long, allow_negative_numbers = true)]
        eta: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long, default_value_t = frontlab_core::spectra::DEFAULT_CURVE_POINTS)]
        n: usize,
    },
    /// Absolute spectrum curves and singular points.
    AbsSpectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 2.5e-3)]
        k_step: f64,
    },
    /// Double roots and resonance poles at the linear spreading speed.
    DoubleRoots {
        #[command(flatten)]
        params: ParamArgs,
        /// Use the Newton oracle on a grid of seeds instead of the closed forms.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 24)]
        grid: usize,
    },
    /// Triple point of the full absolute spectrum.
    TriplePoint {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Closed-form absolute spectrum of the Swift-Hohenberg equation.
    ShAbs {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Absolute spreading speed.
    Sabs {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        s_hi: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Decay rate gamma_v over the region Omega.
    GammaV {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Decay-rate condition 3 gamma_v > s*/(2d).
    CheckPi {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Pointwise resolvent kernels on a grid of x.
    Greens {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = GreensKind::G12)]
        kind: GreensKind,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
        lambda_re: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
        lambda_im: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        y: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -10.0)]
        x_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
        x_max: f64,
        #[arg(long, default_value_t = 401)]
        n: usize,
    },
    /// Time-dependent simulation in a comoving frame.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// JSON configuration; command-line flags given explicitly override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CouplingArg::Constant)]
        coupling: CouplingArg,
        /// Wavenumber of the cosine coupling; defaults to the resonant value.
        #[arg(long)]
        ell: Option<f64>,
        /// Advance an uncoupled companion run and record the weighted difference.
        #[arg(long)]
        companion: bool,
        /// Times at which to write (x, u, v) snapshots.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        /// Directory for snapshot files.
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
        /// Window t0,t1 for the speed fits; defaults to the second half of the run.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        fit_window: Vec<f64>,
    },
    /// Appearance delay of the resonant mode against coupling strength.
    DelayScan {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1e-8, 1e-16])]
        betas: Vec<f64>,
        #[arg(long)]
        ell: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
    },
    /// Region map over a parameter plane.
    Sweep {
        #[arg(long, value_enum, default_value_t = PlaneArg::MuD)]
        plane: PlaneArg,
        /// The parameter held fixed (mu for alpha-d, alpha for mu-d).
        #[arg(long, allow_negative_numbers = true, default_value_t = 3.0)]
        fixed: f64,
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = vec![0.05, 3.0])]
        x_range: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true, default_values_t = vec![-12.0, -0.05])]
        y_range: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        res: usize,
        /// Also trace the absolute spectrum in every cell.
        #[arg(long)]
        max_re: bool,
    },
    /// Data behind one of the reference figures.
    ReproFigure {
        #[arg(value_enum)]
        id: FigureId,
        /// Grid resolution for maps.
        #[arg(long, default_value_t = 96)]
        res: usize,
        /// Final time for simulation figures.
        #[arg(long = "T")]
        t_final: Option<f64>,
    },
}
