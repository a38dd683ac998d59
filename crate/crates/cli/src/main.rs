use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use greenspread::engine::{run_simulation, run_simulation_with_states, SpreadParams};
use greenspread::io::{
    check_result_rows, check_state_lines, format_real, parse_config, read_results_csv,
    trajectory_rows, ResultWriter, RunConfig,
};
use greenspread::sweep::{run_sweep_streaming, Aggregator, GridParam, GridSpec, GroupSummary};
use greenspread::{assemble_network, Error, MultilayerNetwork, Result};

/// Green-behaviour diffusion on synthetic multilayer bank-company networks.
#[derive(Debug, Parser)]
#[command(name = "greenspread", version)]
struct Cli {
    /// JSON configuration file (defaults apply when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the network seed, the run seed and the grid base seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N", env = "GREENSPREAD_THREADS")]
    threads: Option<usize>,

    /// Output file; overrides `output_path` from the configuration. Standard
    /// output when neither is set.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a network and write it as JSON.
    Gen,
    /// Run a single simulation and write its per-step metrics.
    Run(RunArgs),
    /// Run a replicated parameter grid and write the long-format results.
    Sweep(SweepArgs),
    /// Check the invariants of a network (.json), results (.csv) or state (.jsonl) file.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Also write every greening-level vector as JSON lines.
    #[arg(long, value_name = "PATH")]
    states: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Write per-group mean and standard deviation of the company greening level.
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,

    /// Grid dimensions to group the summary by (comma separated; pooled when empty).
    #[arg(long, value_name = "PARAMS", value_delimiter = ',')]
    group_by: Vec<GridParam>,

    /// Generate a new network for every replicate.
    #[arg(long)]
    regenerate_network_per_replicate: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    file: PathBuf,
}

fn defaults_help() -> String {
    let cfg = RunConfig {
        params: Some(SpreadParams::default()),
        grid: Some(GridSpec::default()),
        ..RunConfig::default()
    };
    format!(
        "Configuration defaults (`params` is used by `run`, `grid` by `sweep`; \
         give at most one of them):\n\n{}",
        cfg.to_json()
    )
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output_path = Some(out.clone());
    }
    Ok(cfg)
}

fn load_network(cfg: &RunConfig) -> Result<MultilayerNetwork> {
    match &cfg.network_file {
        Some(path) => MultilayerNetwork::load(path),
        None => assemble_network(&cfg.network),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the effective configuration next to the output, or to stderr.
fn echo_config(cfg: &RunConfig) -> Result<()> {
    match &cfg.output_path {
        Some(out) => {
            let mut name = out.as_os_str().to_owned();
            name.push(".config.json");
            let path = PathBuf::from(name);
            std::fs::write(&path, cfg.to_json()).map_err(|e| Error::io(&path, e))
        }
        None => {
            eprint!("{}", cfg.to_json());
            Ok(())
        }
    }
}

fn threads(cli: &Cli) -> Result<usize> {
    match cli.threads {
        Some(0) => Err(Error::config("threads", "must be a positive integer")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn gen(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let net = load_network(&cfg)?;
    let mut out = open_output(cfg.output_path.as_deref())?;
    let path = cfg.output_path.clone().unwrap_or_else(|| "<stdout>".into());
    out.write_all(net.to_json().as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn run(cli: &Cli, args: &RunArgs) -> Result<()> {
    let mut cfg = load_config(cli)?;
    if cfg.grid.is_some() {
        return Err(Error::config(
            "grid",
            "`run` takes `params`; use `sweep` for grids",
        ));
    }
    let params = *cfg.params.get_or_insert_with(SpreadParams::default);
    let net = load_network(&cfg)?;
    let trajectory = if args.states.is_some() {
        run_simulation_with_states(&net, &params)?
    } else {
        run_simulation(&net, &params)?
    };

    let out_path = cfg.output_path.clone().unwrap_or_else(|| "<stdout>".into());
    let mut writer =
        ResultWriter::new(open_output(cfg.output_path.as_deref())?, cfg.output_format)?;
    for row in trajectory_rows(&trajectory) {
        writer.write_row(&row)?;
    }
    writer.into_inner().map_err(|e| match e {
        Error::Write(io) => Error::io(&out_path, io),
        other => other,
    })?;

    if let (Some(path), Some(states)) = (&args.states, &trajectory.states) {
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        for (step, gl) in states.iter().enumerate() {
            let line = serde_json::json!({ "step": step, "gl": gl });
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    echo_config(&cfg)
}

fn write_summary(path: &Path, groups: &[GroupSummary], group_by: &[GridParam]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header: Vec<String> = group_by.iter().map(|p| p.name().to_string()).collect();
    header.extend(
        [
            "n_runs",
            "step",
            "mean_avg_gl_companies",
            "std_avg_gl_companies",
        ]
        .map(String::from),
    );
    writeln!(w, "{}", header.join(",")).map_err(|e| Error::io(path, e))?;
    for g in groups {
        let keys: Vec<String> = g.key.iter().map(|(_, v)| format_real(*v)).collect();
        for (step, (m, s)) in g.step_mean.iter().zip(&g.step_std).enumerate() {
            let mut fields = keys.clone();
            fields.push(g.n_runs.to_string());
            fields.push(step.to_string());
            fields.push(format_real(*m));
            fields.push(format_real(*s));
            writeln!(w, "{}", fields.join(",")).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let mut cfg = load_config(cli)?;
    if cfg.params.is_some() {
        return Err(Error::config(
            "params",
            "`sweep` takes `grid`; use `run` for a single simulation",
        ));
    }
    let grid = cfg.grid.get_or_insert_with(GridSpec::default);
    if args.regenerate_network_per_replicate {
        grid.regenerate_network_per_replicate = true;
    }
    let grid = grid.clone();
    grid.validate().map_err(|e| match e {
        Error::Config { key, constraint } => Error::Config {
            key: format!("grid.{key}"),
            constraint,
        },
        other => other,
    })?;
    let parallelism = threads(cli)?;
    let net = load_network(&cfg)?;

    let out_path = cfg.output_path.clone().unwrap_or_else(|| "<stdout>".into());
    let mut writer =
        ResultWriter::new(open_output(cfg.output_path.as_deref())?, cfg.output_format)?;
    let mut aggregator = args
        .summary
        .as_ref()
        .map(|_| Aggregator::new(&args.group_by));
    run_sweep_streaming(&grid, &net, parallelism, |record| {
        if let Some(agg) = aggregator.as_mut() {
            agg.push(&record);
        }
        for row in record.rows() {
            writer.write_row(&row)?;
        }
        Ok(())
    })
    .map_err(|e| match e {
        Error::Write(io) => Error::io(&out_path, io),
        other => other,
    })?;
    writer.into_inner().map_err(|e| match e {
        Error::Write(io) => Error::io(&out_path, io),
        other => other,
    })?;

    if let (Some(path), Some(agg)) = (&args.summary, aggregator) {
        write_summary(path, &agg.finish(), &args.group_by)?;
    }
    echo_config(&cfg)
}

fn check(args: &CheckArgs) -> Result<()> {
    let path = &args.file;
    let open = || File::open(path).map_err(|e| Error::io(path, e));
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "json" => {
            let net = MultilayerNetwork::load(path)?;
            println!(
                "ok: network with {} banks, {} firms, {} bank edges, {} firm edges, {} interlayer edges",
                net.n_banks(),
                net.n_firms(),
                net.bank_edges().len(),
                net.firm_edges().len(),
                net.interlayer_edges().len()
            );
        }
        "jsonl" => {
            let report = check_state_lines(BufReader::new(open()?))?;
            println!("ok: {} snapshots of {} nodes", report.records, report.items);
        }
        "csv" => {
            let rows = read_results_csv(BufReader::new(open()?))?;
            let report = check_result_rows(&rows)?;
            println!("ok: {} rows in {} runs", report.records, report.items);
        }
        _ => {
            return Err(Error::config(
                "file",
                "expected a .json network, .csv results or .jsonl states file",
            ))
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = match Cli::command()
        .after_long_help(defaults_help())
        .try_get_matches()
    {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Gen => gen(&cli),
        Command::Run(args) => run(&cli, args),
        Command::Sweep(args) => sweep(&cli, args),
        Command::Check(args) => check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
