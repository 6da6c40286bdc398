//! `qclock`: optimal quantum clock states, posteriors, scans and
//! Monte Carlo runs from the command line.
//!
//! Data goes to stdout, diagnostics to stderr. Exit status is 0 on
//! success, 2 for usage errors and 3 when the eigensolver fails.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qclock::cost::{mean_cost_bound, CostFunction, CostLabel};
use qclock::measurement::{
    circular_rms_error, mutual_information, mutual_information_with_grid, posterior,
    posterior_at_estimate, PosteriorGrid, POSTERIOR_POINTS_PER_DIM,
};
use qclock::sim::{build_state, run_simulation, scan_n, BuiltState, SimConfig, StateKind, DEFAULT_BINS};
use qclock::states::energy_stats;
use qclock::ClockError;
use serde::Serialize;
use serde_json::json;

use output::{envelope, Cell, Table};

/// Overrides the number of worker threads.
const THREADS_ENV: &str = "QCLOCK_THREADS";

#[derive(Parser)]
#[command(name = "qclock", version, about = "Optimal quantum clocks on N two-level ions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Amplitudes, energy statistics and mean cost of a clock state.
    State(StateArgs),
    /// Posterior density of the true time given a measurement outcome.
    Posterior(PosteriorArgs),
    /// Figures of merit over a range of N.
    Scan(ScanArgs),
    /// Seeded Monte Carlo run of the clock.
    Simulate(SimulateArgs),
    /// Mutual information between true time and outcome.
    Mutinfo(MutinfoArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct StateSel {
    /// product, phase, optimal, max_spread or basis<k>.
    #[arg(long)]
    kind: String,
    /// Number of ions.
    #[arg(long)]
    n: usize,
    /// sin2, abs, abs_sin_half or neg_delta; required for --kind optimal.
    #[arg(long)]
    cost: Option<String>,
}

#[derive(Args, Serialize)]
struct StateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    sel: StateSel,
    /// Output format [default: json].
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Serialize)]
struct PosteriorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    sel: StateSel,
    /// Outcome index j, estimate t_j = 2 pi j/(N+1).
    #[arg(long, conflicts_with = "t_r")]
    outcome: Option<usize>,
    /// Arbitrary estimate t_r in radians.
    #[arg(long, allow_hyphen_values = true)]
    t_r: Option<f64>,
    /// Grid points over [0, 2 pi) [default: 64(N+1)].
    #[arg(long)]
    grid: Option<usize>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a gnuplot script for the CSV to this file.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ScanArgs {
    /// Cost function.
    #[arg(long, default_value = "sin2")]
    cost: String,
    /// Comma-separated state kinds.
    #[arg(long, default_value = "product,phase,optimal,max_spread")]
    kinds: String,
    /// Range of N as a:b[:step], inclusive.
    #[arg(long)]
    n: String,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a gnuplot script for the CSV to this file.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "sin2")]
    cost: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Histogram bins over (-pi, pi].
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Output format [default: json].
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Serialize)]
struct MutinfoArgs {
    #[command(flatten)]
    #[serde(flatten)]
    sel: StateSel,
    /// Quadrature points over [0, 2 pi) [default: 32(N+1)].
    #[arg(long)]
    grid: Option<usize>,
    /// Output format [default: json].
    #[arg(long, value_enum)]
    format: Option<Format>,
}

enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ClockError> for CliError {
    fn from(e: ClockError) -> Self {
        match e {
            ClockError::NoConvergence { .. } | ClockError::SignConvention { .. } => {
                CliError::Numerical(e.to_string())
            }
            ClockError::MissingCost => {
                CliError::Usage("--cost is required for --kind optimal".into())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("qclock: {}", e.message());
        return ExitCode::from(e.exit_code());
    }
    let result = match &cli.command {
        Command::State(a) => cmd_state(a),
        Command::Posterior(a) => cmd_posterior(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Mutinfo(a) => cmd_mutinfo(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qclock: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn parse_kind(s: &str) -> CliResult<StateKind> {
    s.trim().parse().map_err(|e: ClockError| CliError::Usage(e.to_string()))
}

fn parse_cost(s: &str) -> CliResult<CostLabel> {
    s.trim().parse().map_err(|e: ClockError| CliError::Usage(e.to_string()))
}

/// Parses `a:b[:step]` (or a bare `a`) into the inclusive list of values.
fn parse_range(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("invalid range `{s}`, expected a:b[:step] with 1 <= a <= b"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (a, b, step) = match parts[..] {
        [a] => (a, a, 1),
        [a, b] => (a, b, 1),
        [a, b, step] => (a, b, step),
        _ => return Err(bad()),
    };
    if a == 0 || a > b || step == 0 {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

struct Selected {
    kind: StateKind,
    cost: Option<CostLabel>,
    built: BuiltState,
}

fn select_state(sel: &StateSel) -> CliResult<Selected> {
    let kind = parse_kind(&sel.kind)?;
    let cost = sel.cost.as_deref().map(parse_cost).transpose()?;
    if kind == StateKind::Optimal && cost.is_none() {
        return Err(CliError::Usage("--cost is required for --kind optimal".into()));
    }
    let built = build_state(kind, sel.n, cost)?;
    Ok(Selected { kind, cost, built })
}

#[derive(Serialize)]
struct StatePayload {
    kind: String,
    n_ions: usize,
    cost: Option<CostLabel>,
    amplitudes: Vec<f64>,
    mean_energy: f64,
    energy_stddev: f64,
    resolution_bound: f64,
    /// Holevo bound for the given cost, if any.
    mean_cost: Option<f64>,
    /// Smallest eigenvalue of the cost matrix, for the optimal kind.
    eigenvalue: Option<f64>,
    delta_t: f64,
}

fn cmd_state(args: &StateArgs) -> CliResult<String> {
    let sel = select_state(&args.sel)?;
    let state = &sel.built.state;
    let stats = energy_stats(state);
    let mean_cost = match sel.cost {
        Some(label) => Some(mean_cost_bound(state, &CostFunction::for_ions(label, state.n_ions())?)),
        None => None,
    };
    let payload = StatePayload {
        kind: sel.kind.name(),
        n_ions: state.n_ions(),
        cost: sel.cost,
        amplitudes: state.amplitudes().to_vec(),
        mean_energy: stats.mean_energy,
        energy_stddev: stats.energy_stddev,
        resolution_bound: stats.resolution_bound,
        mean_cost,
        eigenvalue: sel.built.eigenvalue,
        delta_t: circular_rms_error(state),
    };
    Ok(match args.format.unwrap_or(Format::Json) {
        Format::Json => envelope("state", args, &payload),
        Format::Csv => {
            let mut t = Table::new(&["quantity", "index", "value"]);
            for (m, a) in payload.amplitudes.iter().enumerate() {
                t.push(vec!["amplitude".into(), m.into(), (*a).into()]);
            }
            let scalars = [
                ("mean_energy", Some(payload.mean_energy)),
                ("energy_stddev", Some(payload.energy_stddev)),
                ("resolution_bound", Some(payload.resolution_bound)),
                ("delta_t", Some(payload.delta_t)),
                ("mean_cost", payload.mean_cost),
                ("eigenvalue", payload.eigenvalue),
            ];
            for (name, value) in scalars {
                if let Some(v) = value {
                    t.push(vec![name.into(), Cell::Empty, v.into()]);
                }
            }
            t.render()
        }
    })
}

fn cmd_posterior(args: &PosteriorArgs) -> CliResult<String> {
    let sel = select_state(&args.sel)?;
    let state = &sel.built.state;
    let grid = args.grid.unwrap_or(POSTERIOR_POINTS_PER_DIM * state.dim());
    let p: PosteriorGrid = match args.t_r {
        Some(t_r) if t_r.is_finite() => posterior_at_estimate(state, t_r, grid)?,
        Some(_) => return Err(CliError::Usage("--t-r must be finite".into())),
        None => posterior(state, args.outcome.unwrap_or(0), grid)?,
    };
    let format = args.format.unwrap_or(Format::Csv);
    if let Some(path) = &args.gnuplot {
        fs::write(path, posterior_script(&sel.kind.name(), state.n_ions(), p.estimate))?;
    }
    Ok(match format {
        Format::Json => envelope("posterior", args, &p),
        Format::Csv => {
            let mut t = Table::new(&["t", "offset", "density"]);
            for i in 0..p.grid.len() {
                t.push(vec![p.grid[i].into(), p.offset(i).into(), p.density[i].into()]);
            }
            t.render()
        }
    })
}

fn posterior_script(kind: &str, n: usize, estimate: f64) -> String {
    format!(
        "# posterior of t for the {kind} state, N = {n}, t_r = {}\n\
         if (!exists(\"datafile\")) datafile = 'posterior.csv'\n\
         set datafile separator ','\n\
         set xlabel 't - t_r (rad)'\n\
         set ylabel 'P(t | t_r)'\n\
         set xrange [-pi:pi]\n\
         set logscale y\n\
         plot datafile using 2:3 skip 1 with lines title '{kind}, N = {n}'\n",
        output::fmt_num(estimate)
    )
}

fn cmd_scan(args: &ScanArgs) -> CliResult<String> {
    let label = parse_cost(&args.cost)?;
    let kinds: Vec<StateKind> = args
        .kinds
        .split(',')
        .filter(|k| !k.trim().is_empty())
        .map(parse_kind)
        .collect::<CliResult<_>>()?;
    let n_values = parse_range(&args.n)?;
    let rows = scan_n(&kinds, label, &n_values)?;
    let mut failure = None;
    let mut json_rows = Vec::with_capacity(rows.len());
    let mut t = Table::new(&[
        "n",
        "kind",
        "mean_cost",
        "delta_t",
        "mutual_information_bits",
        "energy_stddev",
        "matches_phase_state",
        "error",
    ]);
    for row in &rows {
        match &row.metrics {
            Ok(m) => {
                t.push(vec![
                    row.n_ions.into(),
                    row.kind.name().into(),
                    m.mean_cost.into(),
                    m.delta_t.into(),
                    m.mutual_information_bits.into(),
                    m.energy_stddev.into(),
                    m.matches_phase_state.into(),
                    Cell::Empty,
                ]);
                json_rows.push(json!({
                    "n": row.n_ions,
                    "kind": row.kind.name(),
                    "metrics": m,
                    "error": null,
                }));
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(CliError::from(e.clone()));
                }
                let mut cells: Vec<Cell> = vec![row.n_ions.into(), row.kind.name().into()];
                cells.extend((0..5).map(|_| Cell::Empty));
                cells.push(e.to_string().into());
                t.push(cells);
                json_rows.push(json!({
                    "n": row.n_ions,
                    "kind": row.kind.name(),
                    "metrics": null,
                    "error": e.to_string(),
                }));
            }
        }
    }
    if let Some(path) = &args.gnuplot {
        let names: Vec<String> = kinds.iter().map(|k| k.name()).collect();
        fs::write(path, scan_script(label, &names.join(" ")))?;
    }
    let out = match args.format.unwrap_or(Format::Csv) {
        Format::Json => envelope("scan", args, &json_rows),
        Format::Csv => t.render(),
    };
    match failure {
        // the table is still useful: print it and report the failing rows
        Some(e) => {
            print!("{out}");
            Err(e)
        }
        None => Ok(out),
    }
}

fn scan_script(label: CostLabel, kinds: &str) -> String {
    format!(
        "# mean {label} cost against N\n\
         if (!exists(\"datafile\")) datafile = 'scan.csv'\n\
         set datafile separator ','\n\
         set xlabel 'N'\n\
         set ylabel 'mean cost'\n\
         set logscale xy\n\
         plot for [k in \"{kinds}\"] datafile using 1:(strcol(2) eq k ? $3 : NaN) skip 1 \\\n\
         \x20   with linespoints title k\n"
    )
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<String> {
    let kind = parse_kind(&args.kind)?;
    let cost = parse_cost(&args.cost)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let mut config = SimConfig::new(kind, args.n, cost, args.samples, args.seed);
    config.bins = args.bins;
    let result = run_simulation(&config)?;
    Ok(match args.format.unwrap_or(Format::Json) {
        Format::Json => envelope("simulate", args, &result),
        Format::Csv => {
            let mut t = Table::new(&["quantity", "index", "value"]);
            let scalars = [
                ("empirical_mean_cost", result.empirical_mean_cost),
                ("standard_error_cost", result.standard_error_cost),
                ("empirical_delta_t", result.empirical_delta_t),
            ];
            for (name, v) in scalars {
                t.push(vec![name.into(), Cell::Empty, v.into()]);
            }
            let h = &result.histogram;
            for (b, count) in h.counts.iter().enumerate() {
                let center = 0.5 * (h.edges[b] + h.edges[b + 1]);
                t.push(vec!["bin_center".into(), b.into(), center.into()]);
                t.push(vec!["bin_count".into(), b.into(), (*count).into()]);
            }
            t.render()
        }
    })
}

fn cmd_mutinfo(args: &MutinfoArgs) -> CliResult<String> {
    let sel = select_state(&args.sel)?;
    let state = &sel.built.state;
    let mi = match args.grid {
        Some(g) if g < 4 * state.dim() => {
            return Err(CliError::Usage(format!(
                "grid of {g} points is too coarse, need at least {}",
                4 * state.dim()
            )))
        }
        Some(g) => mutual_information_with_grid(state, g),
        None => mutual_information(state),
    };
    Ok(match args.format.unwrap_or(Format::Json) {
        Format::Json => envelope("mutinfo", args, &mi),
        Format::Csv => {
            let mut t = Table::new(&["bits", "nats", "holevo_bound_bits"]);
            t.push(vec![mi.bits.into(), mi.nats.into(), mi.holevo_bound_bits.into()]);
            t.render()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3:7").ok(), Some(vec![3, 4, 5, 6, 7]));
        assert_eq!(parse_range("3:15:4").ok(), Some(vec![3, 7, 11, 15]));
        assert_eq!(parse_range("5").ok(), Some(vec![5]));
        for bad in ["5:1", "0:3", "1:4:0", "a:b", "1:2:3:4", ""] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }
}
