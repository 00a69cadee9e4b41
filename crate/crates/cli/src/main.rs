//! `qcoh` — compute block and POVM coherence measures on JSON inputs, check
//! the measurement coarse-graining order, generate random instances, and run
//! the randomized property suite.
//!
//! All results are JSON on stdout (or `--out FILE`); diagnostics go to
//! stderr. Exit codes: 0 success, 1 suite failures, 2 invalid input,
//! 3 dimension mismatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qcoh_core::block::{block_coherence, closest_free_state};
use qcoh_core::decomp::{
    coarse_grain, coarse_grain_povm, is_refinement, random_composition, refine_randomly, Partition,
    Povm, ProjectiveDecomposition,
};
use qcoh_core::matrix::{max_abs_diff, to_rows};
use qcoh_core::povm::{affinity_povm_coherence, random_povm, relative_entropy_povm_coherence};
use qcoh_core::spectral::{haar_unitary, random_density, random_pure, DensityMatrix, Tolerances};
use qcoh_core::suite::{run_suite, CheckKind, SuiteConfig};
use qcoh_core::Error as CoreError;

/// Environment variable consulted for the default seed when `--seed` is
/// absent; the flag always wins.
const SEED_ENV: &str = "QCOH_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "qcoh",
    version,
    about = "Block and POVM coherence measures with a property-verification suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a coherence measure for a state and a measurement
    Compute {
        /// Density matrix JSON (row-major, complex entries as [re, im])
        #[arg(long)]
        state: PathBuf,
        /// Measurement JSON: {"dim", "projectors"} or {"dim", "elements"}
        #[arg(long)]
        measurement: PathBuf,
        /// Which measure to evaluate
        #[arg(long)]
        measure: Measure,
        /// Include the closest free state (block-affinity only)
        #[arg(long)]
        with_sigma: bool,
        /// Write the result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether the fine measurement refines the coarse one
    CheckOrder {
        /// The candidate refinement
        #[arg(long)]
        fine: PathBuf,
        /// The candidate coarse-graining
        #[arg(long)]
        coarse: PathBuf,
        /// Outcome partition (required for POVM inputs)
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge measurement outcomes along a partition
    CoarseGrain {
        #[arg(long)]
        measurement: PathBuf,
        /// Partition JSON: [[indices], ...]
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random instance, deterministic per seed
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run the randomized property suite; exit 0 iff zero failures
    Suite {
        /// Master seed (default: $QCOH_SEED or 42)
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per check
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Dimensions, e.g. "2-8" or "2,3,5"
        #[arg(long, default_value = "2-8")]
        dims: String,
        /// Assertion tolerance override (default: per-check)
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated check names, "all", or "none"
        #[arg(long, default_value = "all")]
        checks: String,
        /// Free states sampled per closest-free-state trial
        #[arg(long, default_value_t = 200)]
        oracle_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Random density matrix of the given rank
    Density {
        #[arg(long)]
        dim: usize,
        /// Rank (default: dim)
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random pure state
    Pure {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Haar-random projective decomposition
    Decomposition {
        #[arg(long)]
        dim: usize,
        /// Block sizes, e.g. "2,3" (default: random composition)
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random POVM from the normalized Gram construction
    Povm {
        #[arg(long)]
        dim: usize,
        /// Number of elements (default: dim)
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A decomposition together with one random refinement of it
    RefinementPair {
        #[arg(long)]
        dim: usize,
        /// Block sizes of the coarse decomposition
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Measure {
    /// 1 - Σ_m Tr[(P_m √ρ P_m)²] for a projective decomposition
    BlockAffinity,
    /// H[{p_i}] + Σ p_i S(ρ_i) - S(ρ) for a POVM (bits)
    PovmRel,
    /// 1 - Σ_i Tr[(A_i √ρ A_i†)²] for a POVM
    PovmAffinity,
}

impl Measure {
    fn name(self) -> &'static str {
        match self {
            Measure::BlockAffinity => "block-affinity",
            Measure::PovmRel => "povm-rel",
            Measure::PovmAffinity => "povm-affinity",
        }
    }
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::DimensionMismatch { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::invalid(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::invalid(err.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            std::process::exit(err.code);
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Compute {
            state,
            measurement,
            measure,
            with_sigma,
            out,
        } => cmd_compute(&state, &measurement, measure, with_sigma, out.as_deref()),
        Command::CheckOrder {
            fine,
            coarse,
            partition,
            out,
        } => cmd_check_order(&fine, &coarse, partition.as_deref(), out.as_deref()),
        Command::CoarseGrain {
            measurement,
            partition,
            out,
        } => cmd_coarse_grain(&measurement, &partition, out.as_deref()),
        Command::Gen { kind } => cmd_gen(kind),
        Command::Suite {
            seed,
            trials,
            dims,
            tol,
            checks,
            oracle_samples,
            out,
        } => cmd_suite(
            seed,
            trials,
            &dims,
            tol,
            &checks,
            oracle_samples,
            out.as_deref(),
        ),
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn parse_from<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let value = read_json(path)?;
    serde_json::from_value(value).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Decomposition files carry "projectors", POVM files carry "elements".
enum Measurement {
    Projective(ProjectiveDecomposition),
    Povm(Povm),
}

fn parse_measurement(path: &Path) -> Result<Measurement, CliError> {
    let value = read_json(path)?;
    let keys = value
        .as_object()
        .ok_or_else(|| CliError::invalid(format!("{}: expected an object", path.display())))?;
    if keys.contains_key("projectors") {
        let p = serde_json::from_value(value)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        Ok(Measurement::Projective(p))
    } else if keys.contains_key("elements") {
        let e = serde_json::from_value(value)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        Ok(Measurement::Povm(e))
    } else {
        Err(CliError::invalid(format!(
            "{}: expected a \"projectors\" or \"elements\" key",
            path.display()
        )))
    }
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
    })
    .unwrap_or(DEFAULT_SEED)
}

fn seeded_rng(flag: Option<u64>) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(resolve_seed(flag))
}

fn parse_sizes(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::invalid(format!("bad size list entry: {part:?}")))
        })
        .collect()
}

fn parse_dims(text: &str) -> Result<Vec<usize>, CliError> {
    if let Some((lo, hi)) = text.split_once('-') {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| CliError::invalid(format!("bad dims range: {text:?}")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| CliError::invalid(format!("bad dims range: {text:?}")))?;
        if lo == 0 || hi < lo {
            return Err(CliError::invalid(format!("bad dims range: {text:?}")));
        }
        Ok((lo..=hi).collect())
    } else {
        parse_sizes(text)
    }
}

fn parse_checks(text: &str) -> Result<Vec<CheckKind>, CliError> {
    match text.trim() {
        "all" => Ok(CheckKind::ALL.to_vec()),
        "none" => Ok(vec![]),
        list => list
            .split(',')
            .map(|name| {
                CheckKind::from_name(name)
                    .ok_or_else(|| CliError::invalid(format!("unknown check: {name:?}")))
            })
            .collect(),
    }
}

fn cmd_compute(
    state_path: &Path,
    measurement_path: &Path,
    measure: Measure,
    with_sigma: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let rho: DensityMatrix = parse_from(state_path)?;
    let measurement = parse_measurement(measurement_path)?;
    let mut result = match (measure, &measurement) {
        (Measure::BlockAffinity, Measurement::Projective(p)) => {
            let value = block_coherence(&rho, p)?;
            json!({
                "measure": measure.name(),
                "value": value,
                "dim": p.dim(),
                "outcomes": p.len(),
            })
        }
        (Measure::PovmRel, Measurement::Povm(e)) => {
            let value = relative_entropy_povm_coherence(&rho, e)?;
            json!({
                "measure": measure.name(),
                "value": value,
                "dim": e.dim(),
                "outcomes": e.len(),
            })
        }
        (Measure::PovmAffinity, Measurement::Povm(e)) => {
            let value = affinity_povm_coherence(&rho, e)?;
            json!({
                "measure": measure.name(),
                "value": value,
                "dim": e.dim(),
                "outcomes": e.len(),
            })
        }
        (Measure::BlockAffinity, Measurement::Povm(_)) => {
            return Err(CliError::invalid(
                "block-affinity expects a projective decomposition (\"projectors\" key)",
            ))
        }
        (_, Measurement::Projective(_)) => {
            return Err(CliError::invalid(format!(
                "{} expects a POVM (\"elements\" key); convert projectors explicitly",
                measure.name()
            )))
        }
    };
    if with_sigma {
        match (&measurement, measure) {
            (Measurement::Projective(p), Measure::BlockAffinity) => {
                let sigma = closest_free_state(&rho, p)?;
                result["sigma"] = serde_json::to_value(to_rows(sigma.matrix()))?;
            }
            _ => {
                return Err(CliError::invalid(
                    "--with-sigma applies to the block-affinity measure only",
                ))
            }
        }
    }
    emit(&result, out)?;
    Ok(0)
}

fn cmd_check_order(
    fine_path: &Path,
    coarse_path: &Path,
    partition_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let fine = parse_measurement(fine_path)?;
    let coarse = parse_measurement(coarse_path)?;
    let result = match (fine, coarse) {
        (Measurement::Projective(q), Measurement::Projective(p)) => {
            let check = is_refinement(&q, &p, Tolerances::DEFAULT.refine)?;
            match check.witness() {
                Some(w) => json!({
                    "is_refinement": true,
                    "assignment": w.assignment(),
                }),
                None => json!({
                    "is_refinement": false,
                    "assignment": serde_json::Value::Null,
                }),
            }
        }
        (Measurement::Povm(e), Measurement::Povm(f)) => {
            let partition_path = partition_path.ok_or_else(|| {
                CliError::invalid("POVM order checks need --partition for the outcome grouping")
            })?;
            let groups: Vec<Vec<usize>> = parse_from(partition_path)?;
            let partition = Partition::new(groups, e.len())?;
            if f.len() != partition.len() {
                return Err(CliError::invalid(format!(
                    "partition has {} groups but the coarse POVM has {} elements",
                    partition.len(),
                    f.len()
                )));
            }
            let rebuilt = coarse_grain_povm(&e, &partition)?;
            let matches = rebuilt
                .elements()
                .iter()
                .zip(f.elements())
                .all(|(a, b)| max_abs_diff(a, b) <= Tolerances::DEFAULT.refine);
            json!({ "is_refinement": matches })
        }
        _ => {
            return Err(CliError::invalid(
                "fine and coarse measurements must both be decompositions or both POVMs",
            ))
        }
    };
    emit(&result, out)?;
    Ok(0)
}

fn cmd_coarse_grain(
    measurement_path: &Path,
    partition_path: &Path,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let groups: Vec<Vec<usize>> = parse_from(partition_path)?;
    let result = match parse_measurement(measurement_path)? {
        Measurement::Projective(p) => {
            let partition = Partition::new(groups, p.len())?;
            serde_json::to_value(coarse_grain(&p, &partition)?)?
        }
        Measurement::Povm(e) => {
            let partition = Partition::new(groups, e.len())?;
            serde_json::to_value(coarse_grain_povm(&e, &partition)?)?
        }
    };
    emit(&result, out)?;
    Ok(0)
}

fn cmd_gen(kind: GenKind) -> Result<i32, CliError> {
    match kind {
        GenKind::Density {
            dim,
            rank,
            seed,
            out,
        } => {
            if dim == 0 {
                return Err(CliError::invalid("--dim must be ≥ 1"));
            }
            let rank = rank.unwrap_or(dim);
            if rank == 0 || rank > dim {
                return Err(CliError::invalid("--rank must satisfy 1 ≤ rank ≤ dim"));
            }
            let rho = random_density(dim, rank, &mut seeded_rng(seed));
            emit(&serde_json::to_value(&rho)?, out.as_deref())?;
        }
        GenKind::Pure { dim, seed, out } => {
            if dim == 0 {
                return Err(CliError::invalid("--dim must be ≥ 1"));
            }
            let rho = random_pure(dim, &mut seeded_rng(seed));
            emit(&serde_json::to_value(&rho)?, out.as_deref())?;
        }
        GenKind::Decomposition {
            dim,
            blocks,
            seed,
            out,
        } => {
            let mut rng = seeded_rng(seed);
            let p = decomposition_with_blocks(dim, blocks.as_deref(), &mut rng, |_| true)?;
            emit(&serde_json::to_value(&p)?, out.as_deref())?;
        }
        GenKind::Povm {
            dim,
            elements,
            seed,
            out,
        } => {
            if dim == 0 {
                return Err(CliError::invalid("--dim must be ≥ 1"));
            }
            let elements = elements.unwrap_or(dim);
            if elements == 0 {
                return Err(CliError::invalid("--elements must be ≥ 1"));
            }
            let e = random_povm(dim, elements, &mut seeded_rng(seed))?;
            emit(&serde_json::to_value(&e)?, out.as_deref())?;
        }
        GenKind::RefinementPair {
            dim,
            blocks,
            seed,
            out,
        } => {
            if dim < 2 {
                return Err(CliError::invalid("--dim must be ≥ 2 to refine"));
            }
            let mut rng = seeded_rng(seed);
            let coarse = decomposition_with_blocks(dim, blocks.as_deref(), &mut rng, |sizes| {
                sizes.iter().any(|&s| s >= 2)
            })?;
            let (fine, witness) = refine_randomly(&coarse, &mut rng)?;
            let result = json!({
                "fine": serde_json::to_value(&fine)?,
                "coarse": serde_json::to_value(&coarse)?,
                "assignment": witness.assignment(),
            });
            emit(&result, out.as_deref())?;
        }
    }
    Ok(0)
}

fn decomposition_with_blocks(
    dim: usize,
    blocks: Option<&str>,
    rng: &mut rand_chacha::ChaCha8Rng,
    accept: impl Fn(&[usize]) -> bool,
) -> Result<ProjectiveDecomposition, CliError> {
    if dim == 0 {
        return Err(CliError::invalid("--dim must be ≥ 1"));
    }
    let sizes = match blocks {
        Some(text) => {
            let sizes = parse_sizes(text)?;
            if !accept(&sizes) {
                return Err(CliError::invalid(
                    "block sizes leave nothing to refine (need one block of rank ≥ 2)",
                ));
            }
            sizes
        }
        None => loop {
            let sizes = random_composition(dim, rng);
            if accept(&sizes) {
                break sizes;
            }
        },
    };
    Ok(ProjectiveDecomposition::from_blocks(
        &haar_unitary(dim, rng),
        &sizes,
    )?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_suite(
    seed: Option<u64>,
    trials: usize,
    dims: &str,
    tol: Option<f64>,
    checks: &str,
    oracle_samples: usize,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let cfg = SuiteConfig {
        master_seed: resolve_seed(seed),
        trials_per_check: trials,
        dims: parse_dims(dims)?,
        tol_assert: tol,
        checks: parse_checks(checks)?,
        oracle_samples,
    };
    cfg.validate()?;
    let report = run_suite(&cfg);
    emit(&serde_json::to_value(&report)?, out)?;
    Ok(if report.total_failures() == 0 { 0 } else { 1 })
}
