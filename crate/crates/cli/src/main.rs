use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aadd::scenarios::{Scenario, WaterLevelParams};
use aadd::sim::{oracle, Corner, SimTime};
use aadd::{Context, ContextOptions, Parallelism};
use clap::{Parser, Subcommand};

const BUILTIN: &str = "waterlevel";

#[derive(Parser, Debug)]
#[command(name = "aadd", version, about = "Symbolic simulation with affine arithmetic decision diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario symbolically and check its assertions.
    Run(RunArgs),
    /// Print a scenario as TOML.
    Show {
        /// `waterlevel` or a path to a TOML file
        scenario: String,
        #[arg(long)]
        fault: bool,
        #[arg(long)]
        observer: bool,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// `waterlevel` or a path to a TOML file
    scenario: String,
    /// Builtin only: inject the stuck full-sensor fault.
    #[arg(long)]
    fault: bool,
    /// Builtin only: add the watchdog observer and fail-safe controller.
    #[arg(long)]
    observer: bool,
    /// Simulated seconds; must be a multiple of the hyperperiod.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also run every corner of the uncertainties numerically.
    #[arg(long)]
    corners: bool,
    /// Random interior points to run numerically next to the corners.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write trace.json with per-leaf ranges and report.json.
    #[arg(long)]
    emit_json: bool,
    /// Write every LP instance to lp_dump.txt.
    #[arg(long)]
    dump_lp: bool,
    /// Skip diagram reduction between hyperperiods.
    #[arg(long)]
    no_reduce: bool,
    /// Spread diagram operations over threads. Corner runs are always
    /// parallel.
    #[arg(long)]
    parallel: bool,
}

/// Exit 1: the run could not be set up or carried out.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load(name: &str, fault: bool, observer: bool, horizon: Option<f64>) -> Result<Scenario, Failure> {
    if name == BUILTIN {
        let mut p = WaterLevelParams::default();
        if let Some(h) = horizon {
            p.horizon = h;
        }
        return Ok(p.scenario(fault, observer)?);
    }
    if fault || observer {
        return Err(Failure("--fault and --observer only apply to the builtin scenario".into()));
    }
    let sc = Scenario::load(Path::new(name))?;
    match horizon {
        None => Ok(sc),
        Some(h) => {
            let mut config = sc.config().clone();
            config.horizon = h;
            Ok(Scenario::from_config(config)?)
        }
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

fn run(args: &RunArgs) -> Result<bool, Failure> {
    let sc = load(&args.scenario, args.fault, args.observer, args.horizon)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure(format!("cannot create {}: {e}", args.out.display())))?;

    let mut opts = sc.run_options();
    opts.reduce = !args.no_reduce;
    opts.record_leaves = args.emit_json;
    let ctx = Context::with_options(ContextOptions {
        parallelism: if args.parallel {
            Parallelism::default()
        } else {
            Parallelism::Sequential
        },
        ..ContextOptions::default()
    });
    if args.dump_lp {
        let f = fs::File::create(args.out.join("lp_dump.txt"))?;
        ctx.set_lp_log(Box::new(BufWriter::new(f)));
    }
    let sym = sc.run_symbolic(&ctx, &opts)?;
    ctx.flush_lp_log()?;

    write(&args.out, "trace.csv", &sym.trace.to_csv())?;
    write(&args.out, "report.txt", &sym.report.to_text())?;
    write(&args.out, "stats.json", &serde_json::to_string_pretty(&sym.stats)?)?;
    if args.emit_json {
        write(&args.out, "trace.json", &sym.trace.to_json()?)?;
        write(&args.out, "report.json", &sym.report.to_json()?)?;
    }
    print!("{}", sym.report.to_text());
    println!(
        "{} conditions, max {} leaves, {} LP calls, {:.2} s",
        sym.stats.conditions, sym.stats.max_leaf_count, sym.stats.lp_calls, sym.stats.wall_time_s
    );

    if args.corners || args.samples > 0 {
        let summary = check_points(&sc, &sym.trace, args, &opts.horizon)?;
        print!("{summary}");
    }
    Ok(sym.report.safety_ok())
}

/// Numeric runs at the corners and random points, each checked against the
/// symbolic trace.
fn check_points(
    sc: &Scenario,
    symbolic: &aadd::sim::Trace,
    args: &RunArgs,
    horizon: &SimTime,
) -> Result<String, Failure> {
    let mut points: Vec<(String, Corner)> = Vec::new();
    if args.corners {
        points.extend(oracle::corners(sc.uncertainties()).into_iter().map(|c| (c.label(), c)));
    }
    let samples = oracle::random_samples(sc.uncertainties(), args.samples, args.seed);
    points.extend(samples.into_iter().enumerate().map(|(k, c)| (format!("sample{k}"), c)));

    let mut opts = sc.run_options();
    opts.horizon = *horizon;
    let corners: Vec<Corner> = points.iter().map(|p| p.1.clone()).collect();
    let traces = oracle::run_all(Parallelism::default(), &corners, |c| sc.run_numeric(c, &opts))?;

    let dir = args.out.join("corners");
    fs::create_dir_all(&dir)?;
    let mut summary = String::new();
    let mut contained = 0;
    for ((label, _), t) in points.iter().zip(&traces) {
        write(&dir, &format!("{label}.csv"), &t.to_csv())?;
        let misses = oracle::containment_misses(symbolic, t, 1e-9);
        if misses.is_empty() {
            contained += 1;
            summary.push_str(&format!("{label}: contained\n"));
        } else {
            let m = &misses[0];
            summary.push_str(&format!(
                "{label}: {} misses, first {} at t={} value {}\n",
                misses.len(),
                m.signal,
                m.time,
                m.value
            ));
        }
    }
    summary.push_str(&format!("{contained}/{} runs contained\n", points.len()));
    write(&dir, "containment.txt", &summary)?;
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Show { scenario, fault, observer } => load(scenario, *fault, *observer, None)
            .and_then(|sc| Ok(sc.to_toml()?))
            .map(|text| {
                print!("{text}");
                true
            }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
