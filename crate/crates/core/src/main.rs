use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use agr_core::config::{self, ConfigError};
use agr_core::domain::ScenarioSpec;
use agr_core::harness::{
    derive_seed, episode_seed, restock_counts, run_benchmark, run_episode, summarize, timeline_run, write_csv, write_jsonl,
    BenchmarkGrid, Durations, EpisodeConfig, HarnessError,
};
use agr_core::planner::{PlannerConfig, Variant};

#[derive(Parser)]
#[command(name = "agr", version, about = "Active goal recognition for assistive assembly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario config and print its summary.
    Validate { config: String },
    /// Run one episode and print its log.
    Episode(Opts),
    /// Run the benchmark grid and write CSV rows.
    Bench {
        #[command(flatten)]
        opts: Opts,
        /// Extend the budget ladder to 65536 simulations.
        #[arg(long)]
        full: bool,
    },
    /// Replay demo episodes on a wall clock.
    Demo(Opts),
    /// Play the worker yourself.
    Interactive(Opts),
}

#[derive(Args, Clone)]
struct Opts {
    /// Scenario file, or a bundled name (bench_small, demo_six).
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    planner: Option<Variant>,
    #[arg(long)]
    accuracy: Option<f64>,
    /// Simulations per decision.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Timeline durations in seconds, e.g. `search=20,bring=40`.
    #[arg(long)]
    durations: Option<String>,
    /// Particles in the robot's belief.
    #[arg(long, default_value_t = 2000)]
    particles: usize,
    /// UCB1 exploration constant.
    #[arg(long)]
    ucb_c: Option<f64>,
    /// Search and rollout depth cap.
    #[arg(long)]
    max_depth: Option<u32>,
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl Opts {
    fn spec(&self, default: &str) -> Result<ScenarioSpec, Failure> {
        let spec = config::load_spec(self.config.as_deref().unwrap_or(default))?;
        match self.accuracy {
            Some(a) => spec.with_accuracy(a).map_err(|e| Failure::Invalid(e.to_string())),
            None => Ok(spec),
        }
    }

    fn episode_config(&self, variant: Variant, budget: usize) -> Result<EpisodeConfig, Failure> {
        if self.particles == 0 {
            return Err(Failure::Invalid("--particles must be at least 1".into()));
        }
        let budget = self.budget.unwrap_or(budget);
        if budget == 0 {
            return Err(Failure::Invalid("--budget must be at least 1".into()));
        }
        let mut planner = PlannerConfig::with_variant(self.planner.unwrap_or(variant), budget);
        if let Some(c) = self.ucb_c {
            if !(c > 0.0) {
                return Err(Failure::Invalid("--ucb-c must be positive".into()));
            }
            planner.ucb_c = c;
        }
        if let Some(d) = self.max_depth {
            if d == 0 {
                return Err(Failure::Invalid("--max-depth must be at least 1".into()));
            }
            planner.max_depth = Some(d);
        }
        Ok(EpisodeConfig {
            planner,
            particles: self.particles,
            ..Default::default()
        })
    }

    fn output(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn validate(path: &str) -> Result<(), Failure> {
    let spec = config::load_spec(path)?;
    println!("ok: {} parts, {} hotel types", spec.n_parts(), spec.n_types());
    for (i, h) in spec.hotel_types.iter().enumerate() {
        let parts: Vec<&str> = spec.required(i).iter().map(|p| spec.label(p)).collect();
        println!("  {}: {}", h.name, parts.join(" "));
    }
    println!(
        "  accuracy {}, horizon {}, discount {}",
        spec.sensor_accuracy, spec.horizon, spec.discount
    );
    Ok(())
}

fn episode(opts: &Opts) -> Result<(), Failure> {
    let spec = opts.spec("bench_small")?;
    let cfg = opts.episode_config(Variant::Baseline, 1024)?;
    let seed = opts.seed.unwrap_or(spec.master_seed);
    let res = run_episode(&spec, &cfg, seed).map_err(HarnessError::from)?;
    let mut out = opts.output()?;
    for e in &res.event_log {
        let events: Vec<String> = e.worker_events.iter().map(|w| w.display(&spec)).collect();
        let posterior: Vec<String> = e.type_posterior.iter().map(|p| format!("{p:.2}")).collect();
        writeln!(
            out,
            "{:>3}  [{}]  {:<28} {:<26} {:<28} {:+.1}",
            e.step,
            posterior.join(" "),
            e.action.display(&spec),
            e.observation.display(&spec),
            events.join(", "),
            e.reward
        )?;
    }
    writeln!(
        out,
        "{} after {} steps, discounted return {:.3}",
        if res.completed { "completed" } else { "not completed" },
        res.steps,
        res.discounted_return
    )?;
    if let Some(f) = &res.failure {
        writeln!(out, "belief failure: {f}")?;
    }
    out.flush()?;
    Ok(())
}

fn bench(opts: &Opts, full: bool) -> Result<(), Failure> {
    let spec = opts.spec("bench_small")?;
    let base = opts.episode_config(Variant::Baseline, 1)?;
    let mut grid = BenchmarkGrid::reference(opts.seed.unwrap_or(spec.master_seed), full);
    if let Some(p) = opts.planner {
        grid.planners = vec![p];
    }
    if let Some(a) = opts.accuracy {
        grid.accuracies = vec![a];
    }
    if let Some(b) = opts.budget {
        grid.budgets = vec![b];
    }
    grid.episodes = opts.episodes.unwrap_or(100);
    if grid.episodes == 0 {
        return Err(Failure::Invalid("--episodes must be at least 1".into()));
    }
    let out = opts.output()?;
    let rows = run_benchmark(&spec, &grid, &base)?;
    write_csv(&rows, out)?;
    Ok(())
}

fn demo(opts: &Opts) -> Result<(), Failure> {
    let spec = opts.spec("demo_six")?;
    let cfg = opts.episode_config(Variant::Relevance, 4096)?;
    let durations = match &opts.durations {
        Some(d) => Durations::parse(d).map_err(Failure::Invalid)?,
        None => Durations::default(),
    };
    let runs = opts.episodes.unwrap_or(20);
    let master = opts.seed.unwrap_or(spec.master_seed);
    let mut totals = Vec::new();
    let mut waiting = Vec::new();
    let mut fetching = Vec::new();
    let mut completed = 0;
    for i in 0..runs {
        let run = timeline_run(&spec, &cfg, derive_seed(&[master, i as u64]), &durations)?;
        if i == 0 {
            if let Some(path) = &opts.out {
                write_jsonl(&run.events, BufWriter::new(File::create(path)?))?;
            }
        }
        let first = run.episode.event_log.iter().find_map(|e| match e.action {
            agr_core::RobotAction::Restock(p) => Some(spec.label(p).to_string()),
            _ => None,
        });
        let restocks: Vec<String> = restock_counts(&spec, &run.episode)
            .into_iter()
            .map(|(k, v)| format!("{k}x{v}"))
            .collect();
        println!(
            "run {i:>2}: {} in {:>2} steps, {:>6.1} s, return {:>8.3}, first restock {}, restocks [{}]",
            if run.episode.completed { "completed" } else { "unfinished" },
            run.episode.steps,
            run.summary.total_time,
            run.episode.discounted_return,
            first.as_deref().unwrap_or("-"),
            restocks.join(" ")
        );
        completed += run.episode.completed as usize;
        totals.push(run.summary.total_time);
        waiting.push(run.summary.worker_waiting);
        fetching.push(run.summary.robot_search_bring);
    }
    if runs == 0 {
        return Ok(());
    }
    println!("completed {completed}/{runs}");
    for (name, v, reference) in [
        ("total time", &totals, 344.0),
        ("worker waiting", &waiting, 227.0),
        ("robot search+bring", &fetching, 192.0),
    ] {
        let (m, se) = summarize(v)?;
        println!("mean {name}: {m:.1} s (se {se:.1}); physical robot runs: {reference:.0} s");
    }
    Ok(())
}

fn interactive(opts: &Opts) -> Result<(), Failure> {
    let spec = opts.spec("demo_six")?;
    let cfg = opts.episode_config(Variant::Relevance, 1024)?;
    let seed = opts.seed.unwrap_or(episode_seed(spec.master_seed, "interactive", spec.sensor_accuracy, 0, 0));
    agr_core::harness::interactive_session(&spec, &cfg, seed, io::stdin().lock(), io::stdout().lock())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Validate { config } => validate(config),
        Command::Episode(o) => episode(o),
        Command::Bench { opts, full } => bench(opts, *full),
        Command::Demo(o) => demo(o),
        Command::Interactive(o) => interactive(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
