use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Spectral bottoms of Sturm–Liouville operators on metric graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// λ₁ of the Dirichlet problems on Γ_n for the listed levels.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Levels n, strictly increasing. Default: 1 up to the level covering the graph.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        /// Write K_p, K_q and M of every level as Matrix Market files under this directory.
        #[arg(long, value_name = "DIR")]
        dump_matrices: Option<PathBuf>,
    },
    /// Bottom of the essential spectrum from Dirichlet annuli Γ_N \ Γ_n.
    Persson {
        #[command(flatten)]
        common: Common,
        /// Inner levels n, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        /// Outer radii N, strictly increasing; each n uses every N > n.
        #[arg(long, value_delimiter = ',', required = true)]
        outer: Vec<usize>,
    },
    /// Positive-solution certificate or refutation for λ on Γ_n.
    ApCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        level: usize,
    },
    /// Nodal values of the positive solution of ly = λy on Γ_n.
    PositiveSolution {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        level: usize,
    },
    /// Window length δ, c and C_ε of the edgewise Sobolev estimate.
    Sobolev {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 2.0])]
        epsilon: Vec<f64>,
    },
    /// Check the coefficient hypotheses and report each clause.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Edges of Γ_n are excluded from the infimum of w.
        #[arg(long)]
        compact_level: Option<usize>,
    },
    /// Run the property suite.
    Verify {
        /// Graph documents; defaults to built-in interval, star, tree, ladder and half-line hosts.
        #[arg(long)]
        graph: Vec<PathBuf>,
        /// Coefficient document applied to every graph.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long)]
    pub graph: PathBuf,
    /// Coefficient document; p = w = 1, q = 0 when omitted.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Target cell size.
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    /// Decision tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Residual tolerance of the eigensolver.
    #[arg(long, default_value_t = 1e-9)]
    pub eig_tol: f64,
    /// Exhaustion root (vertex id); defaults to the graph's root.
    #[arg(long)]
    pub root: Option<String>,
    /// Kirchhoff instead of Dirichlet conditions at boundary vertices.
    #[arg(long)]
    pub no_boundary_dirichlet: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Proceed when the coefficient hypotheses fail.
    #[arg(long = "override")]
    pub override_hypotheses: bool,
    /// Declared exponent η with 1/p ∈ L^η (a number or `inf`).
    #[arg(long, default_value = "1")]
    pub eta: String,
    #[arg(long)]
    pub verbose: bool,
}
