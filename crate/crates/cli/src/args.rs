use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wkstab", version, about = "Weighted K-stability invariants of toric manifolds")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Evaluation backend; `both` computes twice and reports the discrepancy.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Quadrature)]
    pub backend: BackendArg,

    /// Absolute tolerance of adaptive quadrature.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol_abs: f64,

    /// Relative tolerance of adaptive quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_rel: f64,

    /// Polynomial degree of the simplex rule.
    #[arg(long, global = true, default_value_t = 12)]
    pub quad_degree: usize,

    /// Maximum subdivision depth of adaptive quadrature.
    #[arg(long, global = true, default_value_t = 12)]
    pub max_depth: usize,

    /// Relative tolerance for agreement of the two backends.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub agreement_tol: f64,

    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// Emit the command's plot data as CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Exit with status 4 when a tolerance check fails.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Seed for randomly sampled test configurations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Quadrature,
    #[value(alias = "localisation")]
    Localization,
    Both,
}

#[derive(Debug, Args)]
pub struct PolytopeArgs {
    /// Catalog name or path to a polytope JSON file.
    #[arg(long, conflicts_with = "catalog", required_unless_present = "catalog")]
    pub polytope: Option<String>,

    /// Built-in polytope (cp1, cp2, cp1xcp1, bl1cp2, bl2cp2, bl3cp2, hirzebruch-a, cube, `*-reflexive`).
    #[arg(long)]
    pub catalog: Option<String>,
}

impl PolytopeArgs {
    pub fn source(&self) -> &str {
        self.polytope.as_deref().or(self.catalog.as_deref()).expect("clap enforces a polytope source")
    }
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Weight configuration JSON file.
    #[arg(long, conflicts_with_all = ["family", "xi", "a"])]
    pub weights: Option<PathBuf>,

    /// Weight family (cscK, extremal, soliton, sasaki, ckem).
    #[arg(long, default_value = "cscK")]
    pub family: String,

    /// Direction ξ, comma separated; zero if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,

    /// Family parameter `a`; chosen so that `a + ⟨ξ,x⟩ ≥ 1` on P if omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Target {
    #[command(flatten)]
    pub polytope: PolytopeArgs,

    #[command(flatten)]
    pub weights: WeightArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Delzant condition and print the derived vertex data.
    Validate {
        #[command(flatten)]
        polytope: PolytopeArgs,
    },
    /// Weighted volume, perimeter, Ŝ, Futaki vector, Gram form and extremal data.
    Invariants {
        #[command(flatten)]
        target: Target,
    },
    /// The Futaki character along one direction.
    Futaki {
        #[command(flatten)]
        target: Target,

        /// Direction β, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        beta: Vec<f64>,
    },
    /// The extremal affine function `⟨χ,x⟩ + a`.
    ExtremalField {
        #[command(flatten)]
        target: Target,
    },
    /// The Kähler–Ricci soliton field by Gram-preconditioned Newton.
    Soliton {
        #[command(flatten)]
        polytope: PolytopeArgs,

        /// Oracle JSON with an `xi` array to compare against.
        #[arg(long)]
        oracle: Option<PathBuf>,

        /// Newton stopping tolerance on the residual.
        #[arg(long, default_value_t = 1e-10)]
        newton_tol: f64,
    },
    /// Invariants of a toric test configuration.
    Testconfig {
        #[command(subcommand)]
        which: TcCommand,
    },
    /// Compares the exact invariant of the corner chop with its predicted expansion.
    BlowupExpand {
        #[command(flatten)]
        target: Target,

        /// Vertex index, as listed by `validate`.
        #[arg(long)]
        vertex: usize,

        #[arg(long, value_enum)]
        quantity: QuantityArg,

        /// Test configuration file (df, dft).
        #[arg(long)]
        tc: Option<PathBuf>,

        /// Direction β for futaki, comma separated (default e₁).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Option<Vec<f64>>,

        /// Largest chop depth, e.g. `1/8`; the grid starts at a quarter of it.
        #[arg(long)]
        eps_max: Option<String>,

        /// Number of grid points.
        #[arg(long, default_value_t = 8)]
        eps_points: usize,

        /// Relative tolerance on the leading coefficient.
        #[arg(long, default_value_t = 1e-6)]
        coefficient_tol: f64,
    },
    /// The stability dossier for a family of test configurations.
    Report {
        #[command(flatten)]
        target: Target,

        /// Test configuration files.
        #[arg(long)]
        tc: Vec<PathBuf>,

        /// Also sample this many random convex PL test configurations.
        #[arg(long, default_value_t = 0)]
        random: usize,

        /// Add df and df_T blowup expansions at each destabilizing vertex (2-d only).
        #[arg(long)]
        expand: bool,

        /// df_T below minus this counts as a violation.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Runs the acceptance suite.
    Selftest,
}

#[derive(Debug, Subcommand)]
pub enum TcCommand {
    /// Weighted Donaldson–Futaki invariant.
    Df(TcArgs),
    /// Relative (T-orthogonal) Donaldson–Futaki invariant.
    Dft(TcArgs),
    /// Weighted L¹ norms of the configuration and of its orthogonal part.
    Norm(TcArgs),
    /// Chow weights at every vertex.
    Chow(TcArgs),
    /// The vertex maximising the orthogonal Chow weight.
    Destabilize(TcArgs),
}

#[derive(Debug, Args)]
pub struct TcArgs {
    #[command(flatten)]
    pub target: Target,

    /// Test configuration JSON file.
    #[arg(long)]
    pub tc: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    Volume,
    Futaki,
    Df,
    Dft,
    Gram,
}
