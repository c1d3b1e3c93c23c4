use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tubewha::commands::{self, CategoryRef, CmdError, Env, LatticeCheck, VerifySource};
use tubewha::core::lattice::{Boundary, Model};
use tubewha::report::Report;

#[derive(Parser, Debug)]
#[command(name = "tubewha", version, about = "Boundary tube algebras as weak Hopf algebras, and their cluster-state lattice models")]
struct Cli {
    /// seed for every random choice (sampling, probes, decompositions)
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// print the machine-readable report instead of the text summary
    #[arg(long, global = true)]
    json: bool,
    /// also write the JSON report here
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    /// replay the run recorded in a report and diff the results
    #[arg(long, global = true, value_name = "REPORT")]
    verify_manifest: Option<PathBuf>,
    /// directory holding shipped data such as haagerup_h3.fsym
    #[arg(long, global = true, env = "TUBEWHA_DATA", value_name = "DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(clap::Args, Debug, Clone)]
struct CatArgs {
    /// builtin:NAME (trivial, vec_z2, vec_z3, fibonacci, haagerup_h3) or a spec file
    #[arg(long)]
    category: String,
    /// F-symbol table for builtin:haagerup_h3
    #[arg(long)]
    fsymbols: Option<PathBuf>,
}

impl CatArgs {
    fn to_ref(&self) -> CategoryRef {
        CategoryRef { spec: self.category.clone(), fsymbols: self.fsymbols.clone() }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModelArg {
    Cluster,
    Ladder,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BcArg {
    Periodic,
    Open,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CheckArg {
    Stabilizers,
    Ground,
    Symmetry,
    Negative,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the tube algebra and write its structure constants
    Build {
        #[command(flatten)]
        cat: CatArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weak Hopf axioms, Haar integrals and pentagon
    Verify {
        #[arg(long, conflicts_with = "category", required_unless_present = "category")]
        r#in: Option<PathBuf>,
        #[arg(long)]
        category: Option<String>,
        #[arg(long)]
        fsymbols: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        /// seeded samples per axiom (default: exhaustive up to dim 64, else 10000)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Stabilizer, ground-state and symmetry checks on the lattice model
    Lattice {
        #[command(flatten)]
        cat: CatArgs,
        #[arg(long, value_enum, default_value = "cluster")]
        model: ModelArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "periodic")]
        bc: BcArg,
        #[arg(long, value_enum, value_delimiter = ',')]
        checks: Vec<CheckArg>,
        /// sparse random-state mode when local supports are too large
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 20_000_000)]
        max_dense_dim: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// random states per identity in sampled mode
        #[arg(long, default_value_t = 20)]
        probes: usize,
    },
    /// Contract the tensor-network ground state and check it
    Mps {
        #[command(flatten)]
        cat: CatArgs,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "periodic")]
        bc: BcArg,
        #[arg(long, default_value_t = 5_000_000)]
        max_dense_dim: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Wedderburn blocks and the character fusion ring
    Characters {
        #[command(flatten)]
        cat: CatArgs,
    },
}

fn bc(b: BcArg) -> Boundary {
    match b {
        BcArg::Periodic => Boundary::Periodic,
        BcArg::Open => Boundary::Open,
    }
}

fn run(cmd: &Cmd, env: &Env) -> Result<Report, CmdError> {
    match cmd {
        Cmd::Build { cat, out } => commands::build(env, &commands::BuildArgs { category: cat.to_ref(), out: out.clone() }),
        Cmd::Verify { r#in, category, fsymbols, tol, samples } => {
            let source = match (r#in, category) {
                (Some(p), _) => VerifySource::Dump(p.clone()),
                (None, Some(c)) => VerifySource::Category(CategoryRef { spec: c.clone(), fsymbols: fsymbols.clone() }),
                (None, None) => return Err(CmdError::Input("give --in or --category".into())),
            };
            commands::verify(env, &commands::VerifyArgs { source, tol: *tol, samples: *samples })
        }
        Cmd::Lattice { cat, model, n, bc: b, checks, sampled, max_dense_dim, tol, probes } => {
            let model = match model {
                ModelArg::Cluster => Model::Cluster,
                ModelArg::Ladder => Model::Ladder,
            };
            let mut a = commands::LatticeArgs::new(cat.to_ref(), model, *n, bc(*b));
            if !checks.is_empty() {
                a.checks = checks
                    .iter()
                    .map(|c| match c {
                        CheckArg::Stabilizers => LatticeCheck::Stabilizers,
                        CheckArg::Ground => LatticeCheck::Ground,
                        CheckArg::Symmetry => LatticeCheck::Symmetry,
                        CheckArg::Negative => LatticeCheck::Negative,
                    })
                    .collect();
            }
            a.sampled = *sampled;
            a.max_dense_dim = *max_dense_dim;
            a.tol = *tol;
            a.probes = *probes;
            commands::lattice(env, &a)
        }
        Cmd::Mps { cat, n, bc: b, max_dense_dim, tol } => {
            let mut a = commands::MpsArgs::new(cat.to_ref(), *n, bc(*b));
            a.max_dense_dim = *max_dense_dim;
            a.tol = *tol;
            commands::mps(env, &a)
        }
        Cmd::Characters { cat } => commands::characters(env, &commands::CharactersArgs { category: cat.to_ref() }),
    }
}

fn env_for(cli: &Cli, argv: Vec<String>) -> Env {
    let mut env = Env::new(cli.seed);
    env.argv = argv;
    if let Some(d) = &cli.data_dir {
        env.data_dir = d.clone();
    }
    env
}

fn input_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            return input_error(e);
        }
    }

    if let Some(path) = &cli.verify_manifest {
        let (recorded, rec_argv) = match commands::replay_argv(path) {
            Ok(x) => x,
            Err(e) => return input_error(e),
        };
        let replay_cli = match Cli::try_parse_from(&rec_argv) {
            Ok(c) => c,
            Err(e) => return input_error(format!("recorded arguments do not parse: {e}")),
        };
        let Some(cmd) = &replay_cli.cmd else {
            return input_error("recorded run has no command");
        };
        let mut env = env_for(&replay_cli, rec_argv);
        env.write_outputs = false;
        let replayed = match run(cmd, &env) {
            Ok(r) => r,
            Err(e) => return input_error(e),
        };
        let diffs = commands::compare_reports(&recorded, &replayed);
        if diffs.is_empty() {
            println!("replay of {} matches ({} command)", path.display(), recorded.manifest.command);
            return ExitCode::SUCCESS;
        }
        println!("replay of {} differs:", path.display());
        for d in diffs {
            println!("  {d}");
        }
        return ExitCode::from(1);
    }

    let Some(cmd) = &cli.cmd else {
        return input_error("no command given; see --help");
    };
    let env = env_for(&cli, argv);
    match run(cmd, &env) {
        Ok(r) => {
            if cli.json {
                println!("{}", r.to_json());
            } else {
                print!("{}", r.text);
            }
            if let Some(p) = &cli.report {
                if let Err(e) = std::fs::write(p, r.to_json()) {
                    return input_error(format!("{}: {e}", p.display()));
                }
            }
            if r.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => input_error(e),
    }
}
