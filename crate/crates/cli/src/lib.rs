//! Command-line front end for `qsslab-core`. Every command writes one JSON
//! [`report::ReportDocument`] to `--out` or stdout.
//!
//! Exit codes: 0 on success, 2 on invalid input, 1 on internal failure.

pub mod finite;
pub mod report;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use qsslab_core::entanglement::{concurrence, lambda_primes, magic_decomposition, min_pt_eigenvalue, ppt_is_exact};
use qsslab_core::io::{load_state, parse_matrix};
use qsslab_core::linalg::restart_rng;
use qsslab_core::protocol::{
    apply_global_filter, apply_local_filter, cnot_example, run_round, run_round_branches, NamedRound, ProtocolRound,
    RoundDims,
};
use qsslab_core::qss::classify;
use qsslab_core::search::{impossibility_probe, optimize_protocol, SearchConfig, Thresholds};
use qsslab_core::states::{random_mixture, QuantumState};
use qsslab_core::{CMatrix, Error};

use finite::check_finite;
use report::{write_report, ReportDocument, ReportError, Versions};

#[derive(Debug, Parser)]
#[command(name = "qsslab", version, about = "Quasi-separability classification and purification-protocol search")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// RNG seed: an unsigned integer, or `random` for fresh entropy.
    #[arg(long, global = true, default_value = "0")]
    pub seed: Seed,

    /// Worker threads for parallel searches (default: available parallelism).
    #[arg(long, global = true, env = "QSSLAB_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Fixed(u64),
    Random,
}

impl FromStr for Seed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            Ok(Seed::Random)
        } else {
            s.parse().map(Seed::Fixed).map_err(|_| format!("expected an unsigned integer or `random`, got `{s}`"))
        }
    }
}

impl Seed {
    fn resolve(self) -> u64 {
        match self {
            Seed::Fixed(s) => s,
            Seed::Random => rand::thread_rng().gen(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a two-party state as quasi-separable.
    Qss {
        #[arg(long)]
        state: PathBuf,
        /// Objective evaluations allowed for the heuristic search.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
    /// Concurrence and λ′ spectrum of a two-qubit state.
    Concurrence {
        #[arg(long)]
        state: PathBuf,
    },
    /// Magic-basis decomposition of a two-qubit state.
    Magic {
        #[arg(long)]
        state: PathBuf,
    },
    /// Positive-partial-transpose test.
    Ppt {
        #[arg(long)]
        state: PathBuf,
    },
    /// Run one protocol round on a source and an ancilla.
    Simulate {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        round: RoundArgs,
        #[arg(long, value_enum, default_value_t = Route::Density)]
        route: Route,
    },
    /// Apply a local filter `a ⊗ b`, or a global filter, to a state.
    Filter {
        #[arg(long)]
        state: PathBuf,
        /// Matrix file for Alice's filter.
        #[arg(long, requires = "b", conflicts_with = "global")]
        a: Option<PathBuf>,
        /// Matrix file for Bob's filter.
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
        /// Matrix file for a filter on the whole system.
        #[arg(long, required_unless_present = "a")]
        global: Option<PathBuf>,
    },
    /// Bilateral CNOT round on the mixed Bell-type source and ancilla.
    ReproduceCnot {
        #[arg(long, default_value_t = 0.5)]
        p1: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda2: f64,
    },
    /// Search protocol rounds for a pure entangled outcome.
    Search {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Classify both inputs, then search for a successful round.
    Probe {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Objective evaluations allowed per classification.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
    /// Sample a random mixed state of given rank.
    RandomState {
        /// Local dimensions, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,2")]
        dims: Vec<usize>,
        /// Number of Haar-random pure members (default: full rank).
        #[arg(long)]
        rank: Option<usize>,
        /// Also write the bare state file here, ready for `--state`.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    ancilla: PathBuf,
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    /// Round file with `u_alice` and `u_bob`.
    #[arg(long, conflicts_with = "named", required_unless_present = "named")]
    round: Option<PathBuf>,
    /// Built-in round: identity, swap or bilateral-cnot.
    #[arg(long)]
    named: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Extra starting rounds (round files), tried after the built-in ones.
    #[arg(long = "start-round")]
    start_rounds: Vec<PathBuf>,
    #[arg(long, default_value_t = Thresholds::default().probability)]
    min_probability: f64,
    #[arg(long, default_value_t = Thresholds::default().purity)]
    min_purity: f64,
    #[arg(long, default_value_t = Thresholds::default().entanglement)]
    min_entanglement: f64,
}

impl SearchArgs {
    fn thresholds(&self) -> Thresholds {
        Thresholds { probability: self.min_probability, purity: self.min_purity, entanglement: self.min_entanglement }
    }

    fn config(&self, seed: u64) -> Result<SearchConfig, CliError> {
        let t = self.thresholds();
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(in_unit(t.probability) && in_unit(t.purity) && in_unit(t.entanglement)) {
            return Err(Error::BadParameters(format!("thresholds must lie in [0, 1], got {t:?}")).into());
        }
        let mut config = SearchConfig::new(self.restarts, self.iters, seed);
        config.thresholds = self.thresholds();
        config.seeds_in = self.start_rounds.iter().map(|p| load_round(p)).collect::<Result<_, _>>()?;
        Ok(config)
    }

    fn echo(&self) -> Value {
        json!({
            "restarts": self.restarts,
            "iters": self.iters,
            "start_rounds": self.start_rounds,
            "thresholds": self.thresholds(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Full density-matrix evolution.
    Density,
    /// Per-branch amplitude contraction.
    Branches,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Validation(#[from] Error),
    #[error("{0}")]
    Internal(String),
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn load(path: &Path) -> Result<QuantumState, CliError> {
    Ok(load_state(path)?.to_state())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
}

fn load_matrix(path: &Path) -> Result<CMatrix, CliError> {
    Ok(parse_matrix(&read(path)?)?)
}

fn load_round(path: &Path) -> Result<ProtocolRound, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())).into())
}

/// Uniform point on the probability simplex: sorted uniform spacings.
fn simplex_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen::<f64>()).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

struct Output {
    command: &'static str,
    inputs: Value,
    results: Value,
    thresholds: Thresholds,
}

/// Packs a typed payload, refusing NaN and infinities before they can be
/// encoded as `null`.
fn output<R: Serialize>(command: &'static str, inputs: Value, results: R) -> Result<Output, CliError> {
    check_finite(&results).map_err(|e| CliError::Internal(format!("refusing to write report: {e}")))?;
    let results = serde_json::to_value(results).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Output { command, inputs, results, thresholds: Thresholds::default() })
}

#[derive(Serialize)]
struct ConcurrenceResult {
    concurrence: f64,
    lambda_primes: [f64; 4],
}

#[derive(Serialize)]
struct PptResult {
    min_pt_eigenvalue: f64,
    ppt: bool,
    decides_separability: bool,
}

#[derive(Serialize)]
struct FilterResult {
    probability: f64,
    state: QuantumState,
}

#[derive(Serialize)]
struct RandomStateResult {
    weights: Vec<f64>,
    state: QuantumState,
}

fn execute(command: &Command, seed: u64) -> Result<Output, CliError> {
    Ok(match command {
        Command::Qss { state, budget } => {
            let rho = load(state)?;
            output("qss", json!({"state": state, "budget": budget}), classify(&rho, *budget, seed)?)?
        }
        Command::Concurrence { state } => {
            let rho = load(state)?;
            let results = ConcurrenceResult { concurrence: concurrence(&rho)?, lambda_primes: lambda_primes(&rho)? };
            output("concurrence", json!({"state": state}), results)?
        }
        Command::Magic { state } => {
            let rho = load(state)?;
            output("magic", json!({"state": state}), magic_decomposition(&rho)?)?
        }
        Command::Ppt { state } => {
            let rho = load(state)?;
            let (d_a, d_b) = rho.bipartite_dims()?;
            let min = min_pt_eigenvalue(&rho)?;
            let results = PptResult {
                min_pt_eigenvalue: min,
                ppt: min >= -qsslab_core::tolerance::PPT_TOL,
                decides_separability: ppt_is_exact(d_a, d_b),
            };
            output("ppt", json!({"state": state}), results)?
        }
        Command::Simulate { pair, round, route } => {
            let rho_s = load(&pair.source)?;
            let rho_a = load(&pair.ancilla)?;
            let r = match (&round.round, &round.named) {
                (Some(path), _) => load_round(path)?,
                (None, Some(name)) => NamedRound::parse(name)?.build(RoundDims::from_states(&rho_s, &rho_a)?)?,
                (None, None) => unreachable!("clap requires --round or --named"),
            };
            let outcomes = match route {
                Route::Density => run_round(&rho_s, &rho_a, &r)?,
                Route::Branches => run_round_branches(&rho_s, &rho_a, &r)?,
            };
            let inputs = json!({
                "source": pair.source, "ancilla": pair.ancilla,
                "round": round.round, "named": round.named, "route": route,
            });
            output("simulate", inputs, outcomes)?
        }
        Command::Filter { state, a, b, global } => {
            let rho = load(state)?;
            let (filtered, probability) = match (a, b, global) {
                (Some(a), Some(b), _) => apply_local_filter(&rho, &load_matrix(a)?, &load_matrix(b)?)?,
                (_, _, Some(g)) => apply_global_filter(&rho, &load_matrix(g)?)?,
                _ => unreachable!("clap requires --a/--b or --global"),
            };
            let inputs = json!({"state": state, "a": a, "b": b, "global": global});
            output("filter", inputs, FilterResult { probability, state: filtered })?
        }
        Command::ReproduceCnot { p1, lambda2 } => {
            output("reproduce-cnot", json!({"p1": p1, "lambda2": lambda2}), cnot_example(*p1, *lambda2)?)?
        }
        Command::Search { pair, search } => {
            let rho_s = load(&pair.source)?;
            let rho_a = load(&pair.ancilla)?;
            let report = optimize_protocol(&rho_s, &rho_a, &search.config(seed)?)?;
            let inputs = json!({"source": pair.source, "ancilla": pair.ancilla, "search": search.echo()});
            Output { thresholds: search.thresholds(), ..output("search", inputs, report)? }
        }
        Command::Probe { pair, search, budget } => {
            let rho_s = load(&pair.source)?;
            let rho_a = load(&pair.ancilla)?;
            let report = impossibility_probe(&rho_s, &rho_a, *budget, &search.config(seed)?)?;
            let inputs = json!({
                "source": pair.source, "ancilla": pair.ancilla, "budget": budget, "search": search.echo(),
            });
            Output { thresholds: search.thresholds(), ..output("probe", inputs, report)? }
        }
        Command::RandomState { dims, rank, state_out } => {
            let d: usize = dims.iter().product();
            let r = rank.unwrap_or(d);
            if r == 0 || r > d || dims.is_empty() {
                return Err(Error::BadParameters(format!("rank {r} for dims {dims:?}")).into());
            }
            let mut rng = restart_rng(seed, 0);
            let weights = simplex_weights(r, &mut rng);
            let state = random_mixture(dims.clone(), &weights, &mut rng)?;
            if let Some(path) = state_out {
                let mut text = serde_json::to_string_pretty(&state).map_err(|e| CliError::Internal(e.to_string()))?;
                text.push('\n');
                std::fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
            }
            let inputs = json!({"dims": dims, "rank": r, "state_out": state_out});
            output("random-state", inputs, RandomStateResult { weights, state })?
        }
    })
}

/// Parses arguments, runs the command and writes its report. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let seed = cli.seed.resolve();
    let out = match cli.workers {
        Some(0) => return Err(Error::BadParameters("--workers must be at least 1".into()).into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(|| execute(&cli.command, seed))?,
        None => execute(&cli.command, seed)?,
    };
    let doc = ReportDocument {
        command: out.command.to_string(),
        inputs: out.inputs,
        results: out.results,
        versions: Versions::new(&out.thresholds),
        seed,
    };
    write_report(&doc, cli.out.as_deref())?;
    Ok(())
}
