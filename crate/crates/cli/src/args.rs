use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ai-lab",
    version,
    about = "Search, MDP, Q-learning and HMM lab activities"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every stochastic step; generated and printed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the main output here instead of stdout, with a run manifest
    /// next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Suppress warnings and summaries on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one search algorithm over a state-space graph.
    Search(SearchArgs),
    /// Red and Black Jack: solve, simulate, perturb, estimate, play.
    #[command(subcommand)]
    Mdp(MdpCommand),
    /// Dice-driven Q-learning on a GridWorld.
    #[command(subcommand)]
    Q(QCommand),
    /// Two Spies: exact filter, particle filter, interactive game.
    #[command(subcommand)]
    Hmm(HmmCommand),
    /// Parse and validate a scenario file.
    Validate(ValidateArgs),
    /// Start the session service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// bfs, dfs, ucs, greedy or astar.
    #[arg(long, default_value = "bfs")]
    pub algo: String,
    /// Write the full role-by-role trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MdpCommand {
    /// Value iteration over the deck's MDP.
    Solve(SolveArgs),
    /// Play many games with a fixed policy.
    Simulate(SimulateArgs),
    /// Edit deck parameters and compare the two solutions.
    Perturb(PerturbArgs),
    /// Estimate transition probabilities from exploratory games.
    Estimate(EstimateArgs),
    /// Play one game at the terminal.
    Play(PlayDeckArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub deck: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub deck: PathBuf,
    /// Policy JSON (`{"(r,b)": "Hit"|"Stand"}` or a `mdp solve` output);
    /// the optimal policy when omitted.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub games: usize,
    /// Worker threads; worker `w` plays a contiguous block of games from
    /// sub-stream `w` of the seed.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub deck: PathBuf,
    /// Edits such as `scores.jackpot=300`; repeatable.
    #[arg(long = "set", required = true)]
    pub edits: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub deck: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub games: usize,
}

#[derive(Debug, Args)]
pub struct PlayDeckArgs {
    #[arg(long)]
    pub deck: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum QCommand {
    /// Train a Q-table over many episodes.
    Train(TrainArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// Faces of the die that mean explore.
    #[arg(long)]
    pub explore_faces: u32,
    #[arg(long, default_value_t = 6)]
    pub die_faces: u32,
    #[arg(long)]
    pub step_budget: Option<usize>,
    /// Episode counts at which to snapshot the table.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<usize>,
}

#[derive(Debug, Subcommand)]
pub enum HmmCommand {
    /// Exact per-round beliefs for an evidence trace.
    Filter(FilterArgs),
    /// Play the hunter against a dice-driven spy.
    Play(PlayMapArgs),
    /// Particle filter against the exact filter.
    Pf(PfArgs),
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlayMapArgs {
    #[arg(long)]
    pub map: PathBuf,
}

#[derive(Debug, Args)]
pub struct PfArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Evidence trace; a seeded demo game supplies one when omitted.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub particles: usize,
    /// Independent filter runs; run `k` uses sub-stream `k` of the seed.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub scenario_dir: Option<PathBuf>,
    /// Persist session logs here and reload them on start.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Enable the per-session oracle endpoint.
    #[arg(long)]
    pub debug_oracle: bool,
}
