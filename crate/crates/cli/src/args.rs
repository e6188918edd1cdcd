use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "diffsetlab",
    version,
    about = "Difference-set experiment runner"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every verb; each verb reads the ones it needs.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Input file: a point set, or integers for `A`.
    #[arg(long, global = true)]
    pub set: Option<PathBuf>,
    /// Polynomial family, e.g. "d^2" or "d, d^2".
    #[arg(long, global = true)]
    pub poly: Option<String>,
    #[arg(long = "M", global = true)]
    pub m: Option<String>,
    #[arg(long = "N", global = true)]
    pub n: Option<i64>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub eps: Option<String>,
    #[arg(long, global = true)]
    pub eta: Option<String>,
    #[arg(long, global = true)]
    pub sigma: Option<String>,
    /// The small lab constant `c`.
    #[arg(long = "c-lab", global = true)]
    pub c_lab: Option<String>,
    /// The large lab constant `C`.
    #[arg(long = "C-lab", global = true)]
    pub c_lab_upper: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for artifact files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Verb {
    /// Monomial-difference count of a point set.
    Count {
        #[arg(long, value_enum, default_value_t = Backend::Fft)]
        backend: Backend,
    },
    /// Least configuration witness in `A - A`.
    Witness {
        /// Inline elements of `A`, comma separated.
        #[arg(long)]
        elems: Option<String>,
        #[arg(long)]
        d_max: Option<i64>,
    },
    /// Greedy configuration-free subset of `[1, N]`.
    Greedy,
    /// Exact maximum configuration-free subset of `[1, N]`.
    ExactMax {
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
    },
    /// Magnitude histogram of the balanced-function spectrum.
    Spectrum {
        #[arg(long, default_value_t = 32)]
        bins: usize,
    },
    /// Major or minor classification of a frequency.
    Classify {
        /// Coordinates as rationals, comma separated.
        #[arg(long)]
        alpha: String,
    },
    /// Complete sums: one report with `--a`, else the ratio table.
    Gauss {
        #[arg(long)]
        a: Option<String>,
        #[arg(long, default_value_t = 50)]
        q: u64,
        #[arg(long, default_value_t = 4096)]
        exhaustive_cells: u64,
        #[arg(long = "c-hua", default_value_t = 2.0)]
        c_hua: f64,
    },
    /// Oscillatory integral by both quadrature schemes.
    Vint {
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Minor-arc sweep of the curve transform.
    SweepMinor,
    /// Major-arc sweep around `a / q`.
    SweepMajor {
        #[arg(long, default_value_t = 1)]
        q: u64,
        #[arg(long, default_value_t = 8)]
        g: i64,
        #[arg(long, default_value_t = 64)]
        centres: u64,
    },
    /// Weyl-inequality ratio fixture table.
    WeylRatio {
        /// Lengths, comma separated.
        #[arg(long, default_value = "100,400,1600,6400")]
        ns: String,
    },
    /// Log-log fit of the minor-arc maximum against the window length.
    FitNu {
        /// Box sizes, comma separated.
        #[arg(long, default_value = "256,1024,4096")]
        ms: String,
    },
    /// One step of the density-increment dichotomy.
    Dichotomy,
    /// Iterates the dichotomy, writing a JSON-lines trace.
    Iterate {
        #[arg(long, default_value_t = 16)]
        steps: usize,
    },
    /// Major-box spectral masses for every modulus.
    L2table {
        #[arg(long, default_value_t = 256)]
        q_cap: u64,
    },
    /// Density bound by bisection and in closed form.
    Bound,
    /// Lifts `A` and a polynomial family to a set in `Z^k`.
    Lift {
        #[arg(long)]
        elems: Option<String>,
    },
    /// Difference-set reduction for the sumset `A + B`.
    SumsetReduce {
        #[arg(long)]
        elems: String,
        #[arg(long)]
        elems_b: String,
    },
    /// Config-driven experiment writing JSON lines and CSV tables.
    Run {
        #[arg(value_enum)]
        kind: RunKind,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Direct,
    Fft,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Count,
    Dichotomy,
    Iterate,
    SweepMinor,
    SweepMajor,
    Lift,
    Extremal,
    Bound,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Count => "count",
            RunKind::Dichotomy => "dichotomy",
            RunKind::Iterate => "iterate",
            RunKind::SweepMinor => "sweep-minor",
            RunKind::SweepMajor => "sweep-major",
            RunKind::Lift => "lift",
            RunKind::Extremal => "extremal",
            RunKind::Bound => "bound",
        }
    }
}
