//! Argument parsing and subcommand dispatch.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gsdma_core::analysis::AccessModelParams;
use gsdma_core::scenario_file::load_scenario_with;

use crate::analyze::{analyze_given, analyze_scenario, write_analysis};
use crate::compare::{run_comparison, write_comparison};
use crate::error::{CliError, Result};
use crate::plot::{build_series, render_svg, PlotSpec};
use crate::results::{read_table, to_csv_string, ResultRow};
use crate::summary::{summarize, write_summary};
use crate::sweep::{run_grid, SweepSpec, DEFAULT_SEEDS};

/// Simulate GSD-MA and 802.11 DCF channel access on small pairwise networks.
#[derive(Debug, Parser)]
#[command(name = "gsdma-sim", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// RNG seed; for sweeps and comparisons it replaces the seed list.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Scenario override, `key=value` or `section.key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output file (run, analyze, plot) or directory (sweep, compare).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and emit its results row.
    Run { scenario: PathBuf },
    /// Run every point of a sweep file; writes results.csv and summary.csv.
    Sweep { sweep: PathBuf },
    /// Run both protocols on the same seeds; writes results.csv and comparison.csv.
    Compare {
        scenario: PathBuf,
        /// Number of seeds, 1..=N.
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: u64,
    },
    /// Evaluate the access model from given or simulated parameters.
    Analyze(AnalyzeArgs),
    /// Draw an SVG chart from a results CSV.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum)]
        spec: PlotSpec,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Estimate parameters by simulating this scenario.
    #[arg(conflicts_with_all = ["p_s", "p_c", "p_p", "t_s_us"])]
    pub scenario: Option<PathBuf>,
    #[arg(long, requires_all = ["p_c", "p_p", "t_s_us"])]
    pub p_s: Option<f64>,
    #[arg(long)]
    pub p_c: Option<f64>,
    #[arg(long)]
    pub p_p: Option<f64>,
    /// Cycle duration in microseconds.
    #[arg(long)]
    pub t_s_us: Option<f64>,
    /// Also tabulate the first-access CDF up to this many cycles.
    #[arg(long, default_value_t = 0)]
    pub cdf: u64,
}

/// Parses `args` (program name first), executes, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { scenario } => cmd_run(scenario, g),
        Command::Sweep { sweep } => cmd_sweep(sweep, g),
        Command::Compare { scenario, seeds } => cmd_compare(scenario, *seeds, g),
        Command::Analyze(a) => cmd_analyze(a, g),
        Command::Plot { csv, spec } => cmd_plot(csv, *spec, g),
    }
}

fn file_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn overrides(g: &GlobalArgs) -> Vec<String> {
    let mut o = g.overrides.clone();
    if let Some(s) = g.seed {
        o.push(format!("seed={s}"));
    }
    o
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn out_dir(g: &GlobalArgs) -> Result<PathBuf> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.digits$}"))
}

fn cmd_run(path: &Path, g: &GlobalArgs) -> Result<()> {
    let cfg = load_scenario_with(path, &overrides(g))?;
    let report = gsdma_core::run(&cfg)?;
    let row = ResultRow::from_report(&file_name(path), &report);
    let csv = to_csv_string(std::slice::from_ref(&row))?;
    let summary = format!(
        "# {} {} pairs on {} (SNR {} dB, lambda {}), seed {}, {} slots\n\
         # efficiency {}  mean access delay {} us  packets served {}\n",
        row.protocol,
        row.num_pairs,
        row.topology,
        fmt_opt(row.snr_db, 1),
        row.lambda,
        row.seed,
        row.sim_slots,
        fmt_opt(row.efficiency, 4),
        fmt_opt(row.mean_access_delay_us, 1),
        row.packets_served,
    );
    match &g.out {
        Some(p) => {
            write_text(Some(p), &csv)?;
            write_text(None, &summary)
        }
        None => write_text(None, &format!("{summary}{csv}")),
    }
}

fn cmd_sweep(path: &Path, g: &GlobalArgs) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut spec = SweepSpec::parse(&text, path.parent(), &g.overrides)?;
    if let Some(s) = g.seed {
        spec.seeds = vec![s];
    }
    let points = spec.points(&file_name(path))?;
    let dir = out_dir(g)?;
    let (rows, out) = run_grid(&points, &spec.seeds, create(&dir.join("results.csv"))?)?;
    drop(out);
    write_summary(create(&dir.join("summary.csv"))?, &summarize(&rows))?;
    println!(
        "{} points x {} seeds -> {}",
        points.len(),
        spec.seeds.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_compare(path: &Path, seeds: u64, g: &GlobalArgs) -> Result<()> {
    let cfg = load_scenario_with(path, &g.overrides)?;
    let seeds: Vec<u64> = match g.seed {
        Some(s) => vec![s],
        None if seeds == 0 => return Err(CliError::config("--seeds must be at least 1")),
        None => (1..=seeds).collect(),
    };
    let dir = out_dir(g)?;
    let (_, table) = run_comparison(&file_name(path), &cfg, &seeds, create(&dir.join("results.csv"))?)?;
    write_comparison(create(&dir.join("comparison.csv"))?, &table)?;
    for r in &table {
        println!(
            "{}: efficiency ratio {}  delay ratio {}",
            r.topology,
            fmt_opt(r.ratio_efficiency, 3),
            fmt_opt(r.ratio_delay, 3)
        );
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs, g: &GlobalArgs) -> Result<()> {
    let rows = match (&a.scenario, a.p_s, a.p_c, a.p_p, a.t_s_us) {
        (Some(path), ..) => analyze_scenario(&load_scenario_with(path, &overrides(g))?, a.cdf)?,
        (None, Some(p_s), Some(p_c), Some(p_p), Some(t_s_us)) => analyze_given(
            AccessModelParams {
                p_s,
                p_c,
                p_p,
                t_s_us,
            },
            a.cdf,
        )?,
        _ => {
            return Err(CliError::config(
                "analyze needs a scenario or all of --p-s, --p-c, --p-p, --t-s-us",
            ))
        }
    };
    let mut buf = Vec::new();
    write_analysis(&mut buf, &rows)?;
    write_text(g.out.as_deref(), &String::from_utf8(buf).expect("csv output is utf-8"))
}

fn cmd_plot(path: &Path, spec: PlotSpec, g: &GlobalArgs) -> Result<()> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let table = read_table(io::BufReader::new(file))?;
    let series = build_series(&table, spec)?;
    write_text(g.out.as_deref(), &render_svg(&series, spec))
}
