//! Command-line front end: `simulate`, `check`, `gauge`, `catalog` and
//! `plot-data`.
//!
//! Exit codes: 0 on success, 1 for configuration or usage errors (and any
//! failed check), 2 when a run aborts on the instability guard.

pub mod check;
pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::evolution::{self, CsvSink};
use crate::gauge::{gauge_covariance_residual, CovarianceOptions, LinearRun};
use crate::grid::snapshot;
use crate::kinematics::catalog::{catalog_list, catalog_lookup, suggestions, CatalogEntry};
use crate::Error;
use config::{load_config, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INSTABILITY: i32 = 2;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "DG_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "dglab", version, about = "Borel kinematics, DG nonlinear dynamics and nonlinear gauge transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the configured initial state and write observables and snapshots.
    Simulate(SimulateArgs),
    /// Run residual suites and print a table.
    Check(CheckArgs),
    /// Gauge-covariance residual of a linear run under the configured gauge.
    Gauge(GaugeArgs),
    /// Query the catalog of elementary kinematics.
    Catalog(CatalogArgs),
    /// Emit gnuplot columns from an observables CSV or a snapshot.
    PlotData(PlotArgs),
}

#[derive(Args, Debug)]
struct Overrides {
    /// Override a config key, e.g. `--set physics.D=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Validate and print the resolved config; write nothing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// kinematics, dynamics-obstruction, gauge-equivalence, continuity or all.
    #[arg(required = true)]
    suites: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct GaugeArgs {
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Also run with the derived D scaled by this factor.
    #[arg(long, value_name = "SCALE")]
    control: Option<f64>,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    /// System name; omit to list every entry.
    name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    list: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Observables `.csv`, or a `.wf` / `.json` snapshot.
    input: PathBuf,
    /// Comma-separated CSV columns to keep (default: all).
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Run the CLI with explicit streams. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match cli.command {
        Command::Simulate(a) => simulate(&a, out, err),
        Command::Check(a) => check_cmd(&a, out, err),
        Command::Gauge(a) => gauge_cmd(&a, out, err),
        Command::Catalog(a) => catalog_cmd(&a, out, err),
        Command::PlotData(a) => plot_data(&a, out, err),
    }
}

/// Run with the process arguments and standard streams.
pub fn main_exit_code() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => b = b.num_threads(n),
            _ => return Err(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        }
    }
    b.build().map_err(|e| e.to_string())
}

fn load(path: Option<&Path>, o: &Overrides, err: &mut dyn Write) -> Option<RunConfig> {
    match load_config(path, &o.set) {
        Ok(c) => Some(c),
        Err(e) => {
            let _ = writeln!(err, "config error: {e}");
            None
        }
    }
}

fn fail(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    match e {
        Error::Instability { .. } => EXIT_INSTABILITY,
        _ => EXIT_ERROR,
    }
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(cfg) = load(Some(&a.config), &a.overrides, err) else {
        return EXIT_ERROR;
    };
    if a.dry_run {
        let _ = out.write_all(cfg.echo().as_bytes());
        return EXIT_OK;
    }
    let base = a.config.parent().unwrap_or(Path::new(""));
    let setup = || -> crate::Result<_> {
        let prop = cfg.propagator()?;
        let psi0 = cfg.initial_state(base)?;
        let schedule = cfg.schedule()?;
        std::fs::create_dir_all(&cfg.output_dir)?;
        let sink = CsvSink::new(BufWriter::new(File::create(cfg.output_path(&cfg.csv))?))?;
        Ok((prop, psi0, schedule, sink))
    };
    let (prop, psi0, schedule, mut sink) = match setup() {
        Ok(s) => s,
        Err(e) => return fail(err, &e),
    };
    let result = evolution::run(&psi0, &schedule, &prop, &mut sink, cfg.snapshots);
    let flushed = sink.into_inner();
    let traj = match result {
        Ok(t) => t,
        Err(f) => {
            let path = cfg.output_path(&cfg.last_good);
            let code = fail(err, &f.error);
            match snapshot::save(&path, &f.last_good, cfg.hbar, cfg.mass) {
                Ok(()) => {
                    let _ = writeln!(err, "last good state (t = {}) written to {}", f.last_good.time(), path.display());
                }
                Err(e) => {
                    let _ = writeln!(err, "error: could not write last good state: {e}");
                }
            }
            return code;
        }
    };
    let finish = || -> crate::Result<()> {
        flushed?;
        let last = traj.last().expect("a run records at least its initial state");
        snapshot::save(&cfg.output_path(&cfg.snapshot), last, cfg.hbar, cfg.mass)?;
        if cfg.snapshots {
            for (k, s) in traj.snapshots.iter().enumerate() {
                snapshot::save(&cfg.output_path(Path::new(&format!("snap_{k:06}.wf"))), s, cfg.hbar, cfg.mass)?;
            }
        }
        Ok(())
    };
    if let Err(e) = finish() {
        return fail(err, &e);
    }
    let _ = writeln!(
        out,
        "{} records to {}; final state (t = {}) in {}",
        traj.rows.len(),
        cfg.output_path(&cfg.csv).display(),
        traj.last().map_or(0.0, |s| s.time()),
        cfg.output_path(&cfg.snapshot).display()
    );
    EXIT_OK
}

fn check_cmd(a: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut suites: Vec<&str> = Vec::new();
    for s in &a.suites {
        if s == "all" {
            suites.extend(check::SUITES);
        } else if let Some(known) = check::SUITES.iter().find(|k| *k == s) {
            suites.push(known);
        } else {
            let _ = writeln!(err, "error: unknown suite `{s}`; suites are {}, all", check::SUITES.join(", "));
            return EXIT_ERROR;
        }
    }
    suites.dedup();
    let Some(cfg) = load(a.config.as_deref(), &a.overrides, err) else {
        return EXIT_ERROR;
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_ERROR;
        }
    };
    let results: Vec<_> = pool.install(|| {
        suites
            .par_iter()
            .map(|s| check::run_suite(s, &cfg).expect("suite names were validated"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(v) => rows.extend(v),
            Err(e) => return fail(err, &e),
        }
    }
    let _ = out.write_all(check::table(&rows).as_bytes());
    let failed = rows.iter().filter(|r| !r.pass()).count();
    if failed == 0 {
        let _ = writeln!(out, "all {} residuals within tolerance", rows.len());
        EXIT_OK
    } else {
        let _ = writeln!(out, "{failed} of {} residuals out of tolerance", rows.len());
        EXIT_ERROR
    }
}

fn gauge_cmd(a: &GaugeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(cfg) = load(Some(&a.config), &a.overrides, err) else {
        return EXIT_ERROR;
    };
    let params = cfg.params();
    if !params.is_linear() {
        let _ = writeln!(err, "config error: gauge runs evolve the linear equation; set physics.D = 0 and physics.Dprime = 0");
        return EXIT_ERROR;
    }
    let base = a.config.parent().unwrap_or(Path::new(""));
    let psi0 = match cfg.initial_state(base) {
        Ok(p) => p,
        Err(e) => return fail(err, &e),
    };
    let run = LinearRun { psi0, params, dt: cfg.dt, steps: cfg.steps };
    let report = |scale: f64| gauge_covariance_residual(&cfg.gauge, &run, &CovarianceOptions { d_scale: scale, ..Default::default() });
    let main = match report(1.0) {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };
    let g = &cfg.gauge;
    let d = &main.derived;
    let _ = writeln!(
        out,
        "gauge      kappa = {:?}, gamma = {:?}, lambda = {:?}, theta = {:?}, amp = {:?}",
        g.kappa, g.gamma, g.lambda, g.theta, g.amp
    );
    let _ = writeln!(out, "derived    hbar = {:?}, D = {:?}, Dprime = {:?}", d.hbar, d.d, d.d_prime);
    let _ = writeln!(out, "           c = [{:?}, {:?}, {:?}, {:?}, {:?}]", d.c[0], d.c[1], d.c[2], d.c[3], d.c[4]);
    let _ = writeln!(out, "residual   {:.6e} (max over {} records, dt = {:?})", main.max_residual, main.records, cfg.dt);
    if let Some(scale) = a.control {
        match report(scale) {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "control    {:.6e} with D x {scale} (ratio {:.3})",
                    r.max_residual,
                    r.max_residual / main.max_residual
                );
            }
            Err(e) => return fail(err, &e),
        }
    }
    EXIT_OK
}

fn entry_text(e: &CatalogEntry) -> String {
    format!(
        "system              {}\nconfiguration space {}\npi1                 {}\nH1(M,Z)             {}\nH2(M,Z)             {}\nquantum numbers     {}\n",
        e.system,
        e.configuration_space,
        e.pi1,
        e.h1,
        e.h2,
        e.quantum_numbers_text()
    )
}

fn catalog_table(entries: &[CatalogEntry]) -> String {
    let head = ["system", "M", "pi1", "H1(M,Z)", "H2(M,Z)", "quantum numbers"];
    let rows: Vec<[String; 6]> = entries
        .iter()
        .map(|e| {
            [e.system.clone(), e.configuration_space.clone(), e.pi1.clone(), e.h1.clone(), e.h2.clone(), e.quantum_numbers_text()]
        })
        .collect();
    let width = |i: usize| rows.iter().map(|r| r[i].chars().count()).chain([head[i].len()]).max().unwrap_or(0);
    let widths: Vec<usize> = (0..6).map(width).collect();
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            s.push_str(c);
            if i + 1 < cells.len() {
                s.push_str(&" ".repeat(widths[i] - c.chars().count() + 2));
            }
        }
        s.push('\n');
        s
    };
    let mut s = line(head.to_vec());
    for r in &rows {
        s.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    s
}

fn catalog_cmd(a: &CatalogArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match &a.name {
        Some(name) => match catalog_lookup(name) {
            Ok(e) if a.json => serde_json::to_string_pretty(e).map(|s| s + "\n"),
            Ok(e) => Ok(entry_text(e)),
            Err(_) => {
                let _ = writeln!(
                    err,
                    "error: no catalog entry named \"{name}\"; did you mean: {}?",
                    suggestions(name, 3).join(", ")
                );
                let _ = writeln!(err, "run `dglab catalog --list` for all entries");
                return EXIT_ERROR;
            }
        },
        None if a.json => serde_json::to_string_pretty(catalog_list()).map(|s| s + "\n"),
        None => Ok(catalog_table(catalog_list())),
    };
    match text {
        Ok(t) => {
            let _ = out.write_all(t.as_bytes());
            EXIT_OK
        }
        Err(e) => fail(err, &e.into()),
    }
}

fn csv_columns(text: &str, keep: &[String]) -> crate::Result<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?.split(',').collect();
    let idx: Vec<usize> = if keep.is_empty() {
        (0..header.len()).collect()
    } else {
        keep.iter()
            .map(|k| {
                header.iter().position(|h| h == k).ok_or_else(|| {
                    Error::Format(format!("no column `{k}`; columns are {}", header.join(", ")))
                })
            })
            .collect::<crate::Result<_>>()?
    };
    let mut s = format!("# {}\n", idx.iter().map(|&i| header[i]).collect::<Vec<_>>().join(" "));
    for (n, l) in lines.enumerate() {
        let cells: Vec<&str> = l.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::Format(format!("row {} has {} cells, header has {}", n + 2, cells.len(), header.len())));
        }
        s.push_str(&idx.iter().map(|&i| cells[i]).collect::<Vec<_>>().join(" "));
        s.push('\n');
    }
    Ok(s)
}

fn snapshot_columns(snap: &snapshot::Snapshot) -> String {
    let psi = &snap.psi;
    let g = psi.grid();
    let f = evolution::fmt17;
    let mut s = format!("# t = {}\n", f(psi.time()));
    if g.dim() == 1 {
        s.push_str("# x re im rho phase\n");
        for (i, z) in psi.values().iter().enumerate() {
            s.push_str(&format!("{} {} {} {} {}\n", f(g.point(i)[0]), f(z.re), f(z.im), f(z.norm_sqr()), f(z.arg())));
        }
    } else {
        s.push_str("# x y re im rho\n");
        let ny = g.shape()[1];
        for (i, z) in psi.values().iter().enumerate() {
            let p = g.point(i);
            s.push_str(&format!("{} {} {} {} {}\n", f(p[0]), f(p[1]), f(z.re), f(z.im), f(z.norm_sqr())));
            if (i + 1) % ny == 0 {
                s.push('\n');
            }
        }
    }
    s
}

fn plot_data(a: &PlotArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let is_csv = a.input.extension().is_some_and(|e| e == "csv");
    let text = if is_csv {
        std::fs::read_to_string(&a.input).map_err(Error::from).and_then(|t| csv_columns(&t, &a.columns))
    } else if !a.columns.is_empty() {
        Err(Error::InvalidParameter("--columns applies to CSV input only".into()))
    } else {
        snapshot::load(&a.input).map(|s| snapshot_columns(&s))
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => return fail(err, &e),
    };
    let written = match &a.output {
        Some(p) => std::fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => fail(err, &e.into()),
    }
}
