use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bequest_core::config::{Case, RunConfig, HORIZON_TOL};
use bequest_core::model::simulate_paths;
use bequest_core::oracle::suite::run_verification;
use bequest_core::report::{self, Csv};
use bequest_core::{format::sig9, predetermined, Model};

const EXIT_VALIDATION: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "bequest", version, about = "Life-insurance purchase timing: solvers, sweeps and verification")]
struct Cli {
    /// TOML configuration; omitted keys take the baseline values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Problem variant, overriding the configuration.
    #[arg(long, global = true)]
    case: Option<Case>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every parameter and model assumption.
    Validate,
    /// Solve the configured case and print the report.
    Solve,
    /// Sweep one parameter (sweep_var, sweep_lo, sweep_hi, sweep_n).
    Sweep,
    /// Simulate income, state-price and dual paths.
    Simulate {
        /// Number of paths, overriding n_paths.
        #[arg(long, default_value_t = 10)]
        paths: usize,
        /// Starting dual value; defaults to z*(x0, y0) of the fixed-bequest solution.
        #[arg(long)]
        z0: Option<f64>,
    },
    /// Run the verification suite; exits with 3 if any band fails.
    Verify {
        #[arg(long, hide = true)]
        corrupt_boundary: bool,
    },
    /// Write the comparison table and every figure sweep.
    ReproducePaper,
}

enum Failure {
    Validation(String),
    Solver(String),
    Verify,
    ClosedPipe,
}

impl From<bequest_core::Error> for Failure {
    fn from(e: bequest_core::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Solver(format!("i/o error: {e}"))
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.gompertz.seed = seed;
    }
    if let Some(case) = cli.case {
        cfg.case = case;
    }
    Ok(cfg)
}

fn checked(cfg: &RunConfig) -> Result<Model, Failure> {
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(Failure::Validation(v.join("\n")));
    }
    Model::new(cfg.params).map_err(|e| Failure::Validation(e.to_string()))
}

fn write_csv(dir: &Path, name: &str, csv: &Csv) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    csv.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Validate => {
            checked(&cfg)?;
            println!("OK");
            let model = Model::new(cfg.params)?;
            let sim = cfg.sim(&model);
            println!("horizon_T = {} (tail weight {HORIZON_TOL:e})", sig9(sim.horizon_t));
        }
        Command::Solve => {
            let model = checked(&cfg)?;
            print!("{}", report::solve_case(&cfg)?);
            if let Some(dir) = &cli.out {
                match cfg.case {
                    Case::Predetermined => {
                        let xs: Vec<f64> = (1..=400).map(f64::from).collect();
                        write_csv(dir, "policy_vs_x.csv", &report::policy_vs_x(&model.p, &xs)?)?;
                    }
                    Case::Controlled => {
                        let ls: Vec<f64> = (1..=20).map(|i| 0.1 * f64::from(i)).collect();
                        write_csv(dir, "B0_vs_l.csv", &report::sweep(&model.p, Case::Controlled, "l", &ls)?)?;
                    }
                    Case::EarmarkedPre => {}
                    Case::EarmarkedCtl => write_csv(dir, "w_tilde_vs_z.csv", &report::w_tilde_curve(&model, 400)?)?,
                    Case::Gompertz => {
                        let (_, csv) = report::gompertz_solution(&cfg)?;
                        write_csv(dir, "gompertz_boundary.csv", &csv)?;
                    }
                }
            }
        }
        Command::Sweep => {
            checked(&cfg)?;
            let csv = report::sweep_from_config(&cfg)?;
            match &cli.out {
                Some(dir) => write_csv(dir, "sweep.csv", &csv)?,
                None => csv.write(std::io::stdout().lock())?,
            }
        }
        Command::Simulate { paths, z0 } => {
            let model = checked(&cfg)?;
            let mut sim = cfg.sim(&model);
            sim.n_paths = *paths;
            if sim.antithetic && sim.n_paths % 2 == 1 {
                sim.antithetic = false;
            }
            let z0 = match z0 {
                Some(z) => *z,
                None => predetermined::solve(&model)?.z_star(model.p.x0, model.p.y0)?,
            };
            let bundle = simulate_paths(&model, &sim, z0)?;
            match &cli.out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    let path = dir.join("paths.csv");
                    bundle.write_csv(fs::File::create(&path)?)?;
                    println!("wrote {}", path.display());
                }
                None => bundle.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Verify { corrupt_boundary } => {
            let model = checked(&cfg)?;
            let corrupt = corrupt_boundary.then_some(1.1);
            let rep = run_verification(&model, &cfg.sim(&model), corrupt)?;
            print!("{rep}");
            if let Some(dir) = &cli.out {
                let mut csv = Csv::new(&["band", "passed", "detail"]);
                for b in &rep.bands {
                    csv.push(vec![b.name.clone(), b.passed.to_string(), format!("\"{}\"", b.detail)]);
                }
                write_csv(dir, "verify.csv", &csv)?;
            }
            if !rep.passed() {
                return Err(Failure::Verify);
            }
        }
        Command::ReproducePaper => {
            checked(&cfg)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("paper_output"));
            for (name, csv) in report::reproduce_paper(&cfg.params)? {
                write_csv(&dir, name, &csv)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
    }
}
