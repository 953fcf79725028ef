use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qschur_cli::commands::{cmd_check, cmd_decompose, cmd_gen, cmd_verify, DecomposeFlags};
use qschur_cli::gen::{GenSpec, Template};
use qschur_core::Field;

/// Simultaneous Schur decomposition of matrix collections on quivers.
///
/// A problem file attaches one matrix to each edge of a directed multigraph.
/// The decomposition exists exactly when the graph is a pseudoforest (every
/// connected component has at most one cycle); `check` decides that, and
/// `decompose` computes per-vertex orthogonal/unitary factors together with
/// per-edge (quasi-)upper-triangular or trapezoidal reduced matrices, then
/// verifies them independently. Verbosity is controlled by the QSCHUR_LOG
/// environment variable (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "qschur", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a problem: is the underlying graph a pseudoforest?
    ///
    /// Exit codes: 0 yes, 2 no (two distinct cycles are printed), 1 parse
    /// error.
    Check {
        /// Problem file (JSON).
        problem: PathBuf,
    },
    /// Reduce a problem and verify the result.
    ///
    /// Exit codes: 0 verified, 2 rejected, 3 verification failed, 4 kernel
    /// iteration limit, 1 parse error.
    Decompose {
        /// Problem file (JSON).
        problem: PathBuf,
        /// Result file to write (atomically). Omit to skip writing.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Reconstruction and structural-zero tolerance (relative).
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Total sweep budget for the iterative kernels (default 30·n).
        #[arg(long)]
        max_iter: Option<usize>,
        /// Run over this field instead of the one declared in the file.
        #[arg(long, value_parser = parse_field)]
        field_override: Option<Field>,
    },
    /// Recompute the verification report from a problem and a result file.
    ///
    /// Exit codes: 0 consistent, 3 inconsistent, 1 parse error.
    Verify {
        problem: PathBuf,
        result: PathBuf,
    },
    /// Generate a seeded problem file (byte-reproducible).
    Gen(GenArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Graph template: loop | edge | pencil | contragredient | cycle | tree
    /// | pseudotree | two-loops | parallel.
    #[arg(long)]
    kind: String,
    /// Scalar field of the generated matrices.
    #[arg(long, default_value = "real", value_parser = parse_field)]
    field: Field,
    /// Explicit vertex dimensions (template-specific arity), e.g. "3" or
    /// "2,3". Omitted dimensions are drawn from --dim-range.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Inclusive range "lo:hi" for randomly drawn dimensions.
    #[arg(long, default_value = "1:6", value_parser = parse_range)]
    dim_range: (usize, usize),
    /// Cycle length (cycle, pseudotree) or parallel edge count.
    #[arg(short, long, default_value_t = 3)]
    n: usize,
    /// Tree depth (tree, pseudotree).
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Tree branching factor (tree, pseudotree).
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// RNG seed; all randomness flows through it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output problem file; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_field(s: &str) -> Result<Field, String> {
    match s {
        "real" => Ok(Field::Real),
        "complex" => Ok(Field::Complex),
        _ => Err(format!("expected \"real\" or \"complex\", got \"{s}\"")),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: usize = lo.parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.parse().map_err(|e| format!("{e}"))?;
    if lo == 0 || hi < lo {
        return Err("need 1 <= lo <= hi".into());
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QSCHUR_LOG")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { problem } => cmd_check(&problem),
        Command::Decompose { problem, out, tol, max_iter, field_override } => cmd_decompose(
            &problem,
            out.as_deref(),
            &DecomposeFlags { tol, max_iter, field_override },
        ),
        Command::Verify { problem, result } => cmd_verify(&problem, &result),
        Command::Gen(args) => {
            let Some(template) = Template::from_name(&args.kind) else {
                eprintln!("error: unknown template \"{}\"", args.kind);
                return ExitCode::from(1);
            };
            let spec = GenSpec {
                template,
                field: args.field,
                dims: args.dims,
                dim_range: args.dim_range,
                count: args.n,
                depth: args.depth,
                branching: args.branching,
                seed: args.seed,
            };
            cmd_gen(&spec, args.out.as_deref())
        }
    };
    ExitCode::from(code as u8)
}
