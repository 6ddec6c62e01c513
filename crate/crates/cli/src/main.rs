//! `ernet`: command-line front end. JSON results go to stdout, diagnostics to
//! stderr.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ernet_core::{ExhaustionPlan, GeneratorSpec, Network};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "ernet", version, about = "Resistance, reduction and random-walk analysis of weighted graphs")]
struct Cli {
    /// Worker threads for parallel quadrature and sampling (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Where the network comes from.
#[derive(Debug, Clone, Args)]
pub struct Input {
    /// Inline generator, `family:key=val,...` (e.g. `cycle:N=5`).
    #[arg(long, value_name = "SPEC", conflicts_with = "net", required_unless_present = "net")]
    pub gen: Option<GeneratorSpec>,

    /// NETX file.
    #[arg(long, value_name = "PATH")]
    pub net: Option<PathBuf>,

    /// Exhaustion origin; defaults to the generator's natural origin, or 0.
    #[arg(long)]
    pub origin: Option<usize>,
}

/// A loaded network with the exhaustion plan that goes with it.
pub struct Loaded {
    pub net: Network,
    pub plan: ExhaustionPlan,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a network from a generator spec.
    Gen {
        spec: GeneratorSpec,
        /// Also write the network as NETX.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check that a network parses and satisfies the structural invariants.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Effective resistance between two vertices.
    Resistance {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long, value_enum, default_value = "finite")]
        mode: ResistanceMode,
        /// Successive-difference tolerance for exhaustion limits.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 30)]
        kmax: usize,
        /// Include all six finite formulations.
        #[arg(long)]
        detail: bool,
    },
    /// Dipoles and wired monopoles.
    Solve {
        #[command(subcommand)]
        what: SolveCommand,
    },
    /// Eliminate every vertex outside `--keep` with series, ∇-Y and star-mesh steps.
    Reduce {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', value_name = "A,B,...", required = true)]
        keep: Vec<usize>,
        /// Write the reduction log as JSON lines.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
    },
    /// Replay a reduction log against the input network.
    Replay {
        log: PathBuf,
        #[command(flatten)]
        input: Input,
    },
    /// Currents: minimal flows, projections and the cycle space.
    Flows {
        #[command(subcommand)]
        what: FlowsCommand,
    },
    /// Random-walk probabilities.
    Walk {
        #[command(subcommand)]
        what: WalkCommand,
    },
    /// Integer-lattice quantities by Fourier quadrature.
    Lattice {
        #[command(subcommand)]
        what: LatticeCommand,
    },
    /// Split the energy kernel of a vertex into finite and harmonic parts.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        vertex: usize,
        /// Exhaustion level at which to split.
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResistanceMode {
    Finite,
    Free,
    Wired,
    Trace,
    All,
}

#[derive(Debug, Subcommand)]
enum SolveCommand {
    /// Solve `Δv = δ_a − δ_w`.
    Dipole {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        /// Grounding vertex (default: the second vertex of the pair).
        #[arg(long)]
        ground: Option<usize>,
    },
    /// Solve `Δw = ±δ_o` on a wired exhaustion level.
    Monopole {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        negative: bool,
    },
}

#[derive(Debug, Subcommand)]
enum FlowsCommand {
    /// Unit flow of least dissipation between a pair.
    Minflow {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
    },
    /// Project a current (file of `c u v value` lines) onto induced currents.
    Project {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        current: PathBuf,
        #[arg(long, default_value_t = 0)]
        ground: usize,
    },
    /// Fundamental cycles of a BFS spanning tree.
    Cyclebasis {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: WalkMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WalkMode {
    Exact,
    Mc,
}

#[derive(Debug, Subcommand)]
enum WalkCommand {
    /// Probability of reaching the second vertex before returning to the first.
    Escape {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Probability of hitting the second vertex before any of `--avoid`.
    Hitprob {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long, value_delimiter = ',', value_name = "A,B,...")]
        avoid: Vec<usize>,
    },
    /// Simulate `E[h(X_n)]` for the dipole `h` of `--pair`, started at `--vertex`.
    Martingale {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long)]
        vertex: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Grid {
    #[arg(long)]
    pub d: usize,
    /// Midpoint nodes per axis (default 64 for d ≤ 3, else 32).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Refinement levels around the singularity.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum LatticeCommand {
    /// `R(x, y)` on `Z^d` (`y` defaults to the origin).
    #[command(name = "R", alias = "r")]
    Resistance {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<i64>,
    },
    /// Resistance to infinity, `d ≥ 3`.
    Rinf {
        #[command(flatten)]
        grid: Grid,
    },
    /// Energy kernel `v_x(y)` grounded at the origin.
    Vx {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<i64>,
    },
    /// Monopole `w(x)` with `Δw = −δ_0`, `d ≥ 3`.
    Monopole {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<i64>,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let ids: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad vertex id `{t}`")))
        .collect::<Result<_, _>>()?;
    match ids[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two vertices `x,y`, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("ernet: cannot set thread count: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = commands::run(cli.command);
    let mut stdout = std::io::stdout().lock();
    let code = match &outcome {
        Ok(out) => {
            let _ = writeln!(stdout, "{}", out.json);
            for note in &out.notes {
                eprintln!("ernet: {note}");
            }
            if out.converged {
                0
            } else {
                EXIT_NONCONVERGENCE
            }
        }
        Err(fail) => {
            let _ = writeln!(stdout, "{}", fail.json());
            eprintln!("ernet: {}", fail.message);
            fail.code
        }
    };
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("3,7"), Ok((3, 7)));
        assert_eq!(parse_pair(" 0 , 2 "), Ok((0, 2)));
        assert!(parse_pair("1").is_err());
        assert!(parse_pair("1,2,3").is_err());
        assert!(parse_pair("a,b").is_err());
    }

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_lattice_points_parse() {
        let cli = Cli::try_parse_from(["ernet", "lattice", "R", "--d", "2", "--x", "-1,2"]).unwrap();
        match cli.command {
            Command::Lattice {
                what: LatticeCommand::Resistance { x, y, .. },
            } => {
                assert_eq!(x, vec![-1, 2]);
                assert!(y.is_empty());
            }
            other => panic!("parsed as {other:?}"),
        }
    }
}
