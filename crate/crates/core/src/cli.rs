//! Command-line front end. Each subcommand runs the pipeline up to one stage
//! and writes that stage's document into the output directory.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when scaling does not
//! converge, 3 when verification fails. Errors are reported on stderr as a
//! JSON object `{"error", "message", "exit_code"}`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::curve::GeodesicCurve;
use crate::error::{Error, Result};
use crate::graph::{Graph, Measure};
use crate::io;
use crate::pipeline::{self, PipelineOptions, WeightChoice};
use crate::scaling::{minimize_j, CostKernel};
use crate::transport;
use crate::verify::{self, Tolerances, VerifyOptions};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "w1plus", version, about = "Entropic W1 interpolation between measures on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W1 distance and an optimal coupling (witness.json).
    W1(Inputs),
    /// Oriented graph, sources and sinks (orientation.json).
    Orient(Inputs),
    /// Vertex and edge weights of the orientation (weights.json).
    Weights(Inputs),
    /// Entropy-minimising coupling and its scalings (coupling.json).
    Couple(Inputs),
    /// Full curve: factors, densities, fluxes (curve.json).
    Geodesic(Inputs),
    /// Densities at given times (samples.csv).
    Sample {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated times in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
    },
    /// Entropy on a uniform time grid (entropy.csv).
    Entropy {
        #[command(flatten)]
        inputs: Inputs,
        /// Number of grid points, at least 2.
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Runs every check and writes report.json.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// JSON file overriding individual check tolerances.
        #[arg(long)]
        tolerances: Option<PathBuf>,
        /// Number of points of the sampling grid, at least 2.
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Graph document: {"vertices": [...], "edges": [[u, v], ...]}.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Initial measure: {"vertex": mass, ...}.
    #[arg(long)]
    pub f0: Option<PathBuf>,
    /// Final measure.
    #[arg(long)]
    pub f1: Option<PathBuf>,
    /// Custom edge weights: {"edges": [{"tail", "head", "m"}, ...]}.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Saved curve; replaces --graph/--f0/--f1 for sample, entropy, verify.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Marginal tolerance of the scaling iteration.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap of the scaling iteration.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

struct Loaded {
    graph: Arc<Graph>,
    f0: Measure,
    f1: Measure,
}

impl Inputs {
    fn load(&self) -> Result<Loaded> {
        let need = |p: &Option<PathBuf>, flag: &str| {
            p.clone()
                .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
        };
        let graph = io::read_graph(&need(&self.graph, "graph")?)?;
        let f0 = io::read_measure(&graph, &need(&self.f0, "f0")?)?;
        let f1 = io::read_measure(&graph, &need(&self.f1, "f1")?)?;
        Ok(Loaded {
            graph: Arc::new(graph),
            f0,
            f1,
        })
    }

    fn options(&self) -> Result<PipelineOptions> {
        let mut opts = PipelineOptions::default();
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument(format!("--tol must be positive, got {tol}")));
            }
            opts.scaling.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            opts.scaling.max_iter = max_iter;
        }
        if let Some(path) = &self.weights {
            opts.weights = WeightChoice::Named(io::read_weights(path)?);
        }
        Ok(opts)
    }

    fn curve(&self) -> Result<GeodesicCurve> {
        if let Some(path) = &self.curve {
            return io::load_curve(path);
        }
        let l = self.load()?;
        Ok(pipeline::interpolate(l.graph, &l.f0, &l.f1, &self.options()?)?.curve)
    }

    fn out_path(&self, file: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        Ok(self.out.join(file))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// A failed verification, reported with its own exit status.
#[derive(Debug)]
pub struct VerificationFailed(pub Vec<String>);

enum Failure {
    Error(Error),
    Verification(VerificationFailed),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn execute(command: &Command) -> std::result::Result<(), Failure> {
    match command {
        Command::W1(inputs) => {
            let l = inputs.load()?;
            let (value, coupling) = transport::w1(&l.graph, &l.f0, &l.f1)?;
            io::write_json(&inputs.out_path("witness.json")?, &io::WitnessDoc::new(&l.graph, value, &coupling))?;
            println!("{value}");
        }
        Command::Orient(inputs) => {
            let l = inputs.load()?;
            let (union, og) = pipeline::orient(&l.graph, &l.f0, &l.f1, inputs.options()?.union)?;
            io::write_json(&inputs.out_path("orientation.json")?, &io::OrientationDoc::new(&og, &union.pairs))?;
            println!("{} oriented edges, {} active vertices", og.edges().len(), og.active().len());
        }
        Command::Weights(inputs) => {
            let l = inputs.load()?;
            let opts = inputs.options()?;
            let (_, og) = pipeline::orient(&l.graph, &l.f0, &l.f1, opts.union)?;
            let w = pipeline::build_weights(og, &opts.weights)?;
            io::write_json(&inputs.out_path("weights.json")?, &io::WeightsDoc::from_weights(&w))?;
            println!("{} edge weights", w.edge_weights().len());
        }
        Command::Couple(inputs) => {
            let l = inputs.load()?;
            let opts = inputs.options()?;
            let (_, og) = pipeline::orient(&l.graph, &l.f0, &l.f1, opts.union)?;
            let w = pipeline::build_weights(og, &opts.weights)?;
            let ck = CostKernel::new(&w, &l.f0, &l.f1)?;
            let sr = minimize_j(&ck, &l.f0, &l.f1, opts.scaling)?;
            let doc = io::ScalingDoc::new(&l.graph, &ck, &sr);
            io::write_json(&inputs.out_path("coupling.json")?, &doc)?;
            println!("J = {}, {} iterations, marginal error {:e}", doc.j, doc.iterations, doc.marginal_error);
        }
        Command::Geodesic(inputs) => {
            let curve = inputs.curve()?;
            io::save_curve(&inputs.out_path("curve.json")?, &curve)?;
            println!("W1 = {}", curve.w1);
        }
        Command::Sample { inputs, times } => {
            let curve = inputs.curve()?;
            write_text(&inputs.out_path("samples.csv")?, &io::samples_csv(&curve, times)?)?;
        }
        Command::Entropy { inputs, grid } => {
            if *grid < 2 {
                return Err(Error::InvalidArgument(format!("--grid must be at least 2, got {grid}")).into());
            }
            let curve = inputs.curve()?;
            write_text(&inputs.out_path("entropy.csv")?, &io::entropy_csv(&curve, *grid))?;
        }
        Command::Verify {
            inputs,
            tolerances,
            grid,
        } => {
            if *grid < 2 {
                return Err(Error::InvalidArgument(format!("--grid must be at least 2, got {grid}")).into());
            }
            let tolerances: Tolerances = match tolerances {
                Some(path) => io::read_json(path)?,
                None => Tolerances::default(),
            };
            let values = serde_json::to_value(&tolerances).map_err(Error::from)?;
            if let Some((k, v)) = values
                .as_object()
                .into_iter()
                .flatten()
                .find(|(_, v)| !(v.as_f64().unwrap_or(-1.0) > 0.0))
            {
                return Err(Error::InvalidArgument(format!("tolerance {k} must be positive, got {v}")).into());
            }
            let opts = VerifyOptions {
                tolerances,
                grid_points: *grid,
                ..VerifyOptions::default()
            };
            let curve = inputs.curve()?;
            let report = verify::verify(&curve, &opts);
            io::write_json(&inputs.out_path("report.json")?, &report)?;
            print!("{}", report.table());
            if !report.passed {
                let names = report.failures().map(|c| c.name.clone()).collect();
                return Err(Failure::Verification(VerificationFailed(names)));
            }
        }
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(Failure::Error(e)) => {
            let code = e.exit_code();
            report_error(e.code(), &e.to_string(), code);
            code
        }
        Err(Failure::Verification(VerificationFailed(names))) => {
            report_error(
                "verification_failed",
                &format!("failed checks: {}", names.join(", ")),
                EXIT_VERIFICATION,
            );
            EXIT_VERIFICATION
        }
    }
}

fn report_error(code: &str, message: &str, exit_code: i32) {
    eprintln!(
        "{}",
        json!({ "error": code, "message": message, "exit_code": exit_code })
    );
}

/// Parses the process arguments and runs; usage errors exit with status 1.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            report_error("usage", &e.to_string(), EXIT_VALIDATION);
            return EXIT_VALIDATION;
        }
        Err(e) => {
            print!("{e}");
            return 0;
        }
    };
    run(&cli)
}
