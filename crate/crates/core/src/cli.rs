//! Command-line frontend. Every command is a thin adapter over the library.
//!
//! Exit codes: 0 success, 1 negative result (a check failed, or a set did
//! not percolate under `--expect-percolates`), 2 usage or input error,
//! 3 search budget exhausted.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cellset::CellSet;
use crate::constructions::Construction;
use crate::dynamics::{self, RunOptions, RunRecord};
use crate::error::{Error, Result};
use crate::experiments::{self, SweepOptions};
use crate::extremal::{self, SearchOptions, DEFAULT_BUDGET};
use crate::lattice::{Cell, LatticeSpec, Topology};
use crate::witness::{self, StripContext};

/// Environment variable overriding the default search budget.
pub const BUDGET_ENV: &str = "BOOTPERC_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "bootperc", version, about = "d-neighbour bootstrap percolation on grids and tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the process from a construction or a cell file.
    Simulate(SimulateArgs),
    /// Print a named initial set.
    Construct(ConstructArgs),
    /// Build the witness DAG of one strip cell.
    Witness(WitnessArgs),
    /// Smallest percolating set size by exhaustive search.
    SearchMinSet(SearchMinSetArgs),
    /// Smallest percolation time over sets of a fixed size.
    SearchMinTime(SearchMinTimeArgs),
    /// Percolation time against n, with a quadratic fit.
    Sweep(SweepArgs),
    /// Run one of the structural checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessFormat {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Dimension.
    #[arg(long)]
    pub d: u32,
    /// Side length.
    #[arg(long)]
    pub n: u32,
    /// Infection threshold (defaults to d).
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long, default_value = "grid")]
    pub topology: Topology,
}

impl LatticeArgs {
    fn spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.d, self.n, self.topology, self.r.unwrap_or(self.d))
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["construction", "initial"])))]
pub struct SimulateArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// hyperplanes, shifted, diagonal2d, boundary, torus3 or level:K.
    #[arg(long)]
    pub construction: Option<String>,
    /// File with one cell per line, d space-separated 1-based coordinates.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Record the infected-neighbour count of every infection.
    #[arg(long)]
    pub audit: bool,
    /// Record the perimeter after every round (grid only).
    #[arg(long)]
    pub trace: bool,
    /// Exit with status 1 if the set does not percolate.
    #[arg(long)]
    pub expect_percolates: bool,
    /// Stream the infected set every K rounds as JSON lines, e.g. `every=2`.
    #[arg(long, value_name = "every=K")]
    pub snapshot: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub construction: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub n: u32,
    /// Strip index, ceil(d/n) <= s <= d.
    #[arg(long)]
    pub s: u32,
    /// Root cell, e.g. `4,2,2`.
    #[arg(long)]
    pub cell: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: WitnessFormat,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Candidate cap (overrides BOOTPERC_BUDGET).
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// Skip subsets that are not colex-least under the lattice symmetries.
    #[arg(long)]
    pub symmetry: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SearchMinSetArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Largest size to try (defaults to n^d).
    #[arg(long)]
    pub max_size: Option<u32>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct SearchMinTimeArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Set size (defaults to n^(d-1)).
    #[arg(long)]
    pub size: Option<u32>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("range").required(true).args(["ns", "n_range"])))]
pub struct SweepArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value = "hyperplanes")]
    pub construction: String,
    /// Comma-separated side lengths.
    #[arg(long, value_delimiter = ',')]
    pub ns: Vec<u32>,
    /// Inclusive range `FROM..TO` with optional `:STEP`, e.g. `10..40:5`.
    #[arg(long)]
    pub n_range: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// Largest lattice (n^d) accepted.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_cells: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    StripFill,
    Separation,
    Minimal,
    Witness,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Strip index for strip-fill and witness checks (all valid s if omitted).
    #[arg(long)]
    pub s: Option<u32>,
    /// Set checked by `minimal`.
    #[arg(long, default_value = "hyperplanes")]
    pub construction: String,
}

/// Parses `argv` (including the program name), runs the command, writes
/// results to `out` and diagnostics to `err`, and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn budget(flag: Option<u64>) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("{BUDGET_ENV}=`{v}` is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn parse_cell(text: &str) -> Result<Cell> {
    let coords = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::input(format!("malformed cell `{text}`")))?;
    Ok(Cell::new(coords))
}

fn parse_snapshot(text: &str) -> Result<u32> {
    let k = text.strip_prefix("every=").unwrap_or(text);
    match k.parse::<u32>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(Error::input(format!("bad snapshot spec `{text}` (expected every=K with K >= 1)"))),
    }
}

/// `FROM..TO[:STEP]`, inclusive.
pub fn parse_n_range(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::input(format!("bad range `{text}` (expected FROM..TO or FROM..TO:STEP)"));
    let (range, step) = match text.split_once(':') {
        Some((r, s)) => (r, s.parse::<u32>().map_err(|_| bad())?),
        None => (text, 1),
    };
    let (from, to) = range.split_once("..").ok_or_else(bad)?;
    let to = to.strip_prefix('=').unwrap_or(to);
    let (from, to) = (from.parse::<u32>().map_err(|_| bad())?, to.parse::<u32>().map_err(|_| bad())?);
    if step == 0 || from > to {
        return Err(bad());
    }
    Ok((from..=to).step_by(step as usize).collect())
}

fn load_initial(args: &SimulateArgs, spec: &LatticeSpec) -> Result<CellSet> {
    if let Some(name) = &args.construction {
        let c: Construction = name.parse()?;
        return c.build(spec.d(), spec.n())?.retarget(*spec);
    }
    let path = args.initial.as_ref().expect("clap enforces one source");
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    CellSet::from_text(*spec, &text)
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate(args) => simulate(args, out),
        Command::Construct(args) => {
            let set = args.construction.parse::<Construction>()?.build(args.d, args.n)?;
            match args.format {
                Format::Text => write!(out, "{}", set.to_text())?,
                Format::Json => emit_json(out, &set.coord_lists())?,
                Format::Csv => {
                    for cell in set.coord_lists() {
                        let parts: Vec<String> = cell.iter().map(u32::to_string).collect();
                        writeln!(out, "{}", parts.join(","))?;
                    }
                }
            }
            Ok(0)
        }
        Command::Witness(args) => {
            let ctx = StripContext::new(args.d, args.n, args.s)?;
            let dag = witness::build_witness(&parse_cell(&args.cell)?, &ctx)?;
            match args.format {
                WitnessFormat::Json => emit_json(out, &dag.to_json())?,
                WitnessFormat::Dot => write!(out, "{}", dag.to_dot())?,
                WitnessFormat::Text => {
                    writeln!(out, "root: {}", dag.root().label)?;
                    writeln!(out, "depth: {}", dag.depth())?;
                    writeln!(out, "nodes: {}", dag.nodes().len())?;
                    writeln!(out, "leaves: {}", dag.leaves().count())?;
                    writeln!(out, "depth bound: {}", witness::depth_bound(args.d, args.n))?;
                }
            }
            Ok(0)
        }
        Command::SearchMinSet(args) => {
            let spec = args.lattice.spec()?;
            let opts = search_options(&args.search)?;
            let max_size = args.max_size.unwrap_or(spec.cell_count() as u32);
            let result = extremal::min_percolating_size(&spec, max_size, &opts)?;
            write_search(out, &result, args.search.format)?;
            Ok(0)
        }
        Command::SearchMinTime(args) => {
            let spec = args.lattice.spec()?;
            let opts = search_options(&args.search)?;
            let size = match args.size {
                Some(s) => s,
                None => u32::try_from(spec.cell_count() / spec.n() as usize)
                    .map_err(|_| Error::input("default size too large"))?,
            };
            let result = extremal::min_percolation_time(&spec, size, &opts)?;
            write_search(out, &result, args.search.format)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let mut ns = args.ns.clone();
            if let Some(range) = &args.n_range {
                ns.extend(parse_n_range(range)?);
            }
            let construction: Construction = args.construction.parse()?;
            let opts = SweepOptions {
                parallelism: args.parallelism,
                max_cells: args.max_cells,
            };
            let table = experiments::sweep_time(args.d, &ns, construction, &opts)?;
            match args.format {
                Format::Json => emit_json(out, &table)?,
                Format::Csv => write!(out, "{}", table.to_csv()?)?,
                Format::Text => {
                    writeln!(out, "d = {}, construction = {}", table.d, table.construction)?;
                    for r in &table.rows {
                        writeln!(out, "n = {:>3}  T = {:>6}  percolates = {}", r.n, r.final_time, r.percolates)?;
                    }
                    if let Some(fit) = &table.fit {
                        writeln!(
                            out,
                            "fit: T = {:.4} n^2 + {:.4} n + {:.4} (max |residual| {:.3})",
                            fit.a2, fit.a1, fit.a0, fit.max_abs_residual
                        )?;
                    }
                }
            }
            Ok(if table.bound_violations.is_empty() { 0 } else { 1 })
        }
        Command::Verify(args) => verify(args, out),
    }
}

fn search_options(args: &SearchArgs) -> Result<SearchOptions> {
    Ok(SearchOptions {
        budget: budget(args.budget)?,
        symmetry_pruning: args.symmetry,
        parallelism: args.parallelism,
    })
}

fn write_search(out: &mut dyn Write, result: &extremal::SearchResult, format: Format) -> Result<()> {
    match format {
        Format::Json => emit_json(out, &result.to_json()),
        Format::Csv => {
            writeln!(out, "kind,optimum,instances_examined")?;
            let kind = serde_json::to_value(result.kind).map_err(|e| Error::Io(e.to_string()))?;
            let optimum = result.optimum.map(|o| o.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{}", kind.as_str().unwrap_or(""), optimum, result.instances_examined)?;
            Ok(())
        }
        Format::Text => {
            match result.optimum {
                Some(o) => writeln!(out, "optimum: {o}")?,
                None => writeln!(out, "optimum: none")?,
            }
            writeln!(out, "instances examined: {}", result.instances_examined)?;
            if let Some(w) = &result.witness {
                writeln!(out, "witness:")?;
                write!(out, "{}", w.to_text())?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Snapshot {
    step: u32,
    infected: Vec<Vec<u32>>,
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.lattice.spec()?;
    let every = args.snapshot.as_deref().map(parse_snapshot).transpose()?;
    let initial = load_initial(args, &spec)?;
    let options = RunOptions {
        audit: args.audit,
        record_trace: args.trace,
    };
    let rec = dynamics::run(&spec, &initial, options)?;
    if let Some(k) = every {
        write_snapshots(out, &rec, k)?;
    }
    match args.format {
        Format::Json => emit_json(out, &rec.to_json())?,
        Format::Csv => {
            writeln!(out, "step,new_infections,infected,perimeter")?;
            let mut total = 0usize;
            for (step, count) in rec.step_counts().into_iter().enumerate() {
                total += count;
                let perim = rec
                    .perimeter_trace
                    .as_ref()
                    .map(|t| t[step].to_string())
                    .unwrap_or_default();
                writeln!(out, "{step},{count},{total},{perim}")?;
            }
        }
        Format::Text => {
            writeln!(out, "lattice: {spec}")?;
            writeln!(out, "initial: {} cells", rec.initial.len())?;
            writeln!(out, "percolates: {}", rec.percolates)?;
            writeln!(out, "T: {}", rec.final_time)?;
            writeln!(out, "infected: {}/{}", rec.infected_count(), spec.cell_count())?;
        }
    }
    if args.expect_percolates && !rec.percolates {
        return Ok(1);
    }
    Ok(0)
}

fn write_snapshots(out: &mut dyn Write, rec: &RunRecord, every: u32) -> Result<()> {
    let spec = rec.spec;
    let mut step = 0;
    loop {
        let infected = rec
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t <= step)
            .map(|(i, _)| spec.coords_of(i))
            .collect();
        emit_json(out, &Snapshot { step, infected })?;
        if step >= rec.final_time {
            break;
        }
        step = (step + every).min(rec.final_time);
    }
    Ok(())
}

#[derive(Serialize)]
struct StripFillOutcome {
    s: u32,
    holds: bool,
}

#[derive(Serialize)]
struct WitnessOutcome {
    s: u32,
    cells: usize,
    max_depth: u32,
    depth_bound: u64,
}

fn strips(d: u32, n: u32, s: Option<u32>) -> Vec<u32> {
    match s {
        Some(s) => vec![s],
        None => (d.div_ceil(n).max(1)..=d).collect(),
    }
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let (d, n) = (args.lattice.d, args.lattice.n);
    let holds = match args.check {
        Check::StripFill => {
            LatticeSpec::grid(d, n)?;
            let results = strips(d, n, args.s)
                .into_iter()
                .map(|s| Ok(StripFillOutcome { s, holds: experiments::verify_strip_fill(d, n, s)? }))
                .collect::<Result<Vec<_>>>()?;
            let holds = results.iter().all(|r| r.holds);
            emit_json(out, &serde_json::json!({ "check": "strip-fill", "d": d, "n": n, "holds": holds, "strips": results }))?;
            holds
        }
        Check::Separation => {
            let report = experiments::verify_separation(d, n)?;
            emit_json(out, &report)?;
            report.separated
        }
        Check::Minimal => {
            let spec = args.lattice.spec()?;
            let set = args.construction.parse::<Construction>()?.build(d, n)?.retarget(spec)?;
            let minimal = extremal::is_minimal(&spec, &set)?;
            emit_json(out, &serde_json::json!({ "check": "minimal", "d": d, "n": n, "construction": args.construction, "minimal": minimal }))?;
            minimal
        }
        Check::Witness => {
            LatticeSpec::grid(d, n)?;
            let mut results = Vec::new();
            for s in strips(d, n, args.s) {
                let ctx = StripContext::new(d, n, s)?;
                let checks = witness::verify_strip(&ctx)?;
                results.push(WitnessOutcome {
                    s,
                    cells: checks.len(),
                    max_depth: checks.iter().map(|c| c.depth).max().unwrap_or(0),
                    depth_bound: witness::depth_bound(d, n),
                });
            }
            emit_json(out, &serde_json::json!({ "check": "witness", "d": d, "n": n, "holds": true, "strips": results }))?;
            true
        }
    };
    Ok(if holds { 0 } else { 1 })
}
