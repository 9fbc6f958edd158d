use brakeidx::angle::Omega;
use brakeidx::galerkin::{index_from_galerkin_upto, GalerkinFamily, Space};
use brakeidx::io::{MatrixInput, PathInput};
use brakeidx::iteration::{bott_l0, bott_periodic, bott_sqrt, iterate_brake, iterate_periodic, IterationReport};
use brakeidx::lagrangian::{i_l, i_omega_l0};
use brakeidx::omega::{i_nu_omega, omega_profile};
use brakeidx::orbits::{orbit_index, shoot_brake, period_spotcheck, Hamiltonian, HamiltonianSpec, OrbitMode, SpotcheckKind};
use brakeidx::signature::{sgn_m_eps_from, EpsSide, DEFAULT_EPS0};
use brakeidx::symplectic::SymplecticMatrix;
use brakeidx::verify::{run_suite, SuiteOptions};
use brakeidx::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "brakeidx", version, about = "Maslov-type indices of symplectic paths and brake orbits")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// write the main output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum IndexFamily {
    #[value(name = "L0")]
    L0,
    #[value(name = "L1")]
    L1,
    #[value(name = "omegaL0")]
    OmegaL0,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sense {
    Brake,
    Periodic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum GalerkinArg {
    L0,
    L1,
    Sqrt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    E,
    Hat,
    Check,
}

#[derive(Subcommand)]
enum Verb {
    /// i_{L0}, i_{L1} or i_ω^{L0} of a path
    Index {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "L0")]
        family: IndexFamily,
        /// rotation angle θ ∈ (0, π) for omegaL0
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta: f64,
    },
    /// periodic index i_ω, or the ω-profile over the circle
    OmegaIndex {
        path: PathBuf,
        /// angle of ω in radians
        #[arg(long, conflicts_with = "profile")]
        omega: Option<f64>,
        #[arg(long)]
        profile: bool,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// k-fold iterate of a path and its index
    Iterate {
        path: PathBuf,
        #[arg(long, visible_alias = "m")]
        k: usize,
        #[arg(long, value_enum, default_value = "brake")]
        sense: Sense,
    },
    /// compares direct and formula indices of iterates
    VerifyBott {
        path: PathBuf,
        #[arg(long, default_value_t = 6)]
        max: usize,
    },
    /// sgn M_ε(P) for a symplectic matrix
    Signature {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "plus")]
        side: SideArg,
        #[arg(long, default_value_t = DEFAULT_EPS0)]
        eps0: f64,
    },
    /// index and nullity from Fourier–Galerkin eigenvalue counts
    Galerkin {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "l0")]
        family: GalerkinArg,
        /// must match the family when given
        #[arg(long, value_enum)]
        space: Option<SpaceArg>,
        #[arg(long, default_value_t = 512)]
        m_max: usize,
    },
    /// brake orbit by shooting, with indices and spot checks
    Orbit {
        hamiltonian: PathBuf,
        #[arg(long = "T", visible_alias = "period")]
        period: f64,
        /// initial guess q₀, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q0: Vec<f64>,
        /// T1.1 … T1.5, repeatable
        #[arg(long)]
        spotcheck: Vec<String>,
    },
    /// the randomized identity suite
    VerifyAll {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// fixed half-dimension (1..=4) instead of cycling 1, 2, 3
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        n: Option<u8>,
        #[arg(long, default_value_t = 6)]
        max_iteration: usize,
        #[arg(long, default_value_t = 30)]
        galerkin_cases: usize,
    },
}

enum Failure {
    Parse(String),
    Runtime(Error),
    Verification { message: String, counterexample: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_path(path: &Path) -> CliResult<PathInput> {
    PathInput::from_json(&read(path)?).map_err(|e| Failure::Parse(e.to_string()))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable output") + "\n"
}

fn run(cli: &Cli) -> CliResult<String> {
    match &cli.verb {
        Verb::Index { path, family, theta } => {
            let p = load_path(path)?.load()?.path;
            let r = match family {
                IndexFamily::L0 => i_l(&p, 0)?,
                IndexFamily::L1 => i_l(&p, 1)?,
                IndexFamily::OmegaL0 => i_omega_l0(&p, *theta)?,
            };
            Ok(json(&r))
        }
        Verb::OmegaIndex { path, omega, profile, resolution } => {
            let p = load_path(path)?.load()?.path;
            if *profile {
                let prof = omega_profile(&p, *resolution)?;
                return Ok(match cli.format {
                    Format::Csv => prof.to_csv(),
                    Format::Json => json(&prof),
                });
            }
            let theta = omega.ok_or_else(|| Failure::Parse("give --omega or --profile".into()))?;
            Ok(json(&i_nu_omega(&p, Omega::approx_radians(theta, 1 << 40))?))
        }
        Verb::Iterate { path, k, sense } => {
            let p = load_path(path)?.load()?.path;
            let (it, record) = match sense {
                Sense::Brake => {
                    let it = iterate_brake(&p, *k)?;
                    let r = i_l(&it, 0)?;
                    (it, r)
                }
                Sense::Periodic => {
                    let it = iterate_periodic(&p, *k)?;
                    let r = i_nu_omega(&it, Omega::ONE)?;
                    (it, r)
                }
            };
            Ok(match cli.format {
                Format::Csv => it.to_csv(),
                Format::Json => json(&serde_json::json!({ "k": k, "tau": it.tau(), "index": record })),
            })
        }
        Verb::VerifyBott { path, max } => {
            let input = load_path(path)?;
            let p = input.load()?.path;
            #[derive(Serialize)]
            struct Row {
                formula: &'static str,
                z: Option<Omega>,
                report: IterationReport,
            }
            let mut rows = Vec::new();
            for k in 1..=*max {
                rows.push(Row { formula: "l0", z: None, report: bott_l0(&p, k)? });
                rows.push(Row { formula: "sqrt", z: None, report: bott_sqrt(&p, k)? });
            }
            for z in [Omega::ONE, Omega::MINUS_ONE, Omega::from_turns(1, 3)] {
                for m in 1..=*max {
                    rows.push(Row { formula: "periodic", z: Some(z), report: bott_periodic(&p, z, m)? });
                }
            }
            let out = json(&rows);
            if let Some(bad) = rows.iter().find(|r| !r.report.agree) {
                return Err(Failure::Verification {
                    message: out,
                    counterexample: json(&serde_json::json!({ "formula": bad.formula, "z": bad.z, "report": bad.report, "path": input })),
                });
            }
            Ok(out)
        }
        Verb::Signature { matrix, side, eps0 } => {
            let m = MatrixInput::from_json(&read(matrix)?).map_err(|e| Failure::Parse(e.to_string()))?.to_matrix()?;
            let side = match side {
                SideArg::Plus => EpsSide::Plus,
                SideArg::Minus => EpsSide::Minus,
            };
            Ok(json(&sgn_m_eps_from(&SymplecticMatrix::new(m)?, side, *eps0)?))
        }
        Verb::Galerkin { path, family, space, m_max } => {
            let input = load_path(path)?;
            let b = input.coefficient_path()?.ok_or_else(|| Failure::Parse("galerkin needs a coefficient path".into()))?;
            let (fam, expected) = match family {
                GalerkinArg::L0 => (GalerkinFamily::L0, Space::E),
                GalerkinArg::L1 => (GalerkinFamily::L1, Space::Check),
                GalerkinArg::Sqrt => (GalerkinFamily::Sqrt, Space::Hat),
            };
            if let Some(s) = space {
                let given = match s {
                    SpaceArg::E => Space::E,
                    SpaceArg::Hat => Space::Hat,
                    SpaceArg::Check => Space::Check,
                };
                if given != expected {
                    return Err(Failure::Parse(format!("space {given:?} does not carry the {:?} family", fam)));
                }
            }
            let g = index_from_galerkin_upto(&b, fam, *m_max)?;
            Ok(match cli.format {
                Format::Csv => g.sweep_csv(),
                Format::Json => json(&g),
            })
        }
        Verb::Orbit { hamiltonian, period, q0, spotcheck } => {
            let spec: HamiltonianSpec =
                serde_json::from_str(&read(hamiltonian)?).map_err(|e| Failure::Parse(format!("Hamiltonian JSON: {e}")))?;
            let which = spotcheck
                .iter()
                .map(|s| s.parse::<SpotcheckKind>().map_err(|e| Failure::Parse(e.to_string())))
                .collect::<CliResult<Vec<_>>>()?;
            let h = Hamiltonian::from_spec(&spec)?;
            let q0 = if q0.is_empty() { vec![1.0; h.n()] } else { q0.clone() };
            let orbit = shoot_brake(&h, *period, &q0)?;
            if cli.format == Format::Csv {
                return Ok(orbit.to_csv());
            }
            let brake = orbit_index(&orbit, OrbitMode::Brake)?;
            let symmetric = if orbit.symmetric { Some(orbit_index(&orbit, OrbitMode::Symmetric)?) } else { None };
            let reports = which.iter().map(|&w| period_spotcheck(&orbit, w)).collect::<brakeidx::Result<Vec<_>>>()?;
            let out = json(&serde_json::json!({
                "orbit": orbit.summary(),
                "brake_index": brake,
                "symmetric_index": symmetric,
                "spotchecks": reports,
            }));
            if let Some(bad) = reports.iter().find(|r| r.applicable && !r.holds) {
                return Err(Failure::Verification {
                    message: out,
                    counterexample: json(&serde_json::json!({ "hamiltonian": spec, "period": period, "q0": q0, "report": bad })),
                });
            }
            Ok(out)
        }
        Verb::VerifyAll { seed, cases, n, max_iteration, galerkin_cases } => {
            let opts = SuiteOptions { max_iteration: *max_iteration, galerkin_cases: *galerkin_cases, identities: None, n: n.map(usize::from) };
            let summary = run_suite(*seed, *cases, &opts);
            let out = match cli.format {
                Format::Json => json(&summary),
                Format::Csv => summary.table(),
            };
            if let Some(bad) = &summary.first_failure {
                return Err(Failure::Verification { message: out, counterexample: json(bad) });
            }
            Ok(out)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let (text, code) = match outcome {
        Ok(text) => (text, ExitCode::SUCCESS),
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(Failure::Verification { message, counterexample }) => {
            eprintln!("verification failed; counterexample:\n{counterexample}");
            (message, ExitCode::from(1))
        }
    };
    if let Err(e) = emit(&cli, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    code
}
