//! `sim`: train, program, recall, sweep, mc and compare from the shell.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spinmem::experiments::{compare_implementations, inject_noise, sweep, Implementation, NoiseWindow};
use spinmem::io::patterns::{load_pattern_set, render_grid, PatternSet};
use spinmem::io::report::{
    load_weight_matrix, write_delta, write_hardware_dump, write_json, write_mc_samples, write_mc_summary, write_sweep,
    write_weight_matrix, ComparisonSummary,
};
use spinmem::montecarlo::{iqr_separation, run_weight_mc};
use spinmem::network::{quantize, recall, train, Dynamics, SoftwareNetwork, WeightMatrix};
use spinmem::rng::{stream, Domain};
use spinmem::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "sim", version, about = "MTJ Hopfield memory simulator")]
struct Cli {
    /// JSON run configuration; every key optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: config `output_dir`, else `runs`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads: a positive count or `auto`.
    #[arg(long, global = true, default_value = "auto", value_parser = parse_threads)]
    threads: Threads,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy)]
enum Threads {
    Auto,
    Count(usize),
}

fn parse_threads(s: &str) -> std::result::Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Threads::Count(n)),
        _ => Err(format!("expected a positive integer or `auto`, got {s:?}")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hebbian-train the patterns and write the weight matrix.
    Train(PatternArgs),
    /// Quantize a weight matrix onto synapses and dump the programmed array.
    Program(ProgramArgs),
    /// Run one noisy recall and print the grids.
    Recall(RecallArgs),
    /// Recall-rate sweep over the configured noise rates.
    Sweep(SweepArgs),
    /// Monte Carlo spread of synapse outputs per weight level.
    Mc(McArgs),
    /// Sweep, then test whether hardware recall exceeds software.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct PatternArgs {
    /// Text pattern file, overriding the configured source.
    #[arg(long)]
    patterns: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProgramArgs {
    /// Weight-matrix CSV from `train`; trains from patterns when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[command(flatten)]
    source: PatternArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Software,
    Hardware,
    Both,
}

#[derive(Debug, Args)]
struct RecallArgs {
    /// Index of the stored pattern to corrupt.
    #[arg(long, default_value_t = 0)]
    pattern: usize,
    /// Fraction of bits to flip.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    implementation: Which,
    #[command(flatten)]
    source: PatternArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Trials per (pattern, noise rate) cell.
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    source: PatternArgs,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Samples per weight level.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Noise window `LO:HI` for the U test.
    #[arg(long, value_parser = parse_window)]
    window: Option<NoiseWindow>,
}

fn parse_window(s: &str) -> std::result::Result<NoiseWindow, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    if lo > hi {
        return Err("LO must not exceed HI".into());
    }
    Ok(NoiseWindow { lo, hi })
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn patterns(&self, args: &PatternArgs) -> Result<PatternSet> {
        match &args.patterns {
            Some(p) => Ok(load_pattern_set(p)?),
            None => Ok(self.cfg.load_patterns()?),
        }
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let ctx = Ctx { cfg, out };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Threads::Count(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    pool.install(|| match &cli.command {
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Program(a) => cmd_program(&ctx, a),
        Command::Recall(a) => cmd_recall(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a).map(|_| ()),
        Command::Mc(a) => cmd_mc(&ctx, a),
        Command::Compare(a) => cmd_compare(&ctx, a),
    })
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

fn cmd_train(ctx: &Ctx, args: &PatternArgs) -> Result<()> {
    let set = ctx.patterns(args)?;
    let w = train(&set.patterns, ctx.cfg.network.zero_diagonal)?;
    write_weight_matrix(ctx.create("weights.csv")?, &w)?;
    println!(
        "trained n={} on m={} patterns, max |w| = {}; wrote {}",
        w.n(),
        w.m(),
        w.max_abs(),
        show(&ctx.out.join("weights.csv"))
    );
    Ok(())
}

fn cmd_program(ctx: &Ctx, args: &ProgramArgs) -> Result<()> {
    let w: WeightMatrix = match &args.weights {
        Some(path) => load_weight_matrix(path)?,
        None => train(&ctx.patterns(&args.source)?.patterns, ctx.cfg.network.zero_diagonal)?,
    };
    let net = quantize(&w, &ctx.cfg.hardware())?;
    net.verify_readback()?;
    write_hardware_dump(ctx.create("hardware.csv")?, &net)?;
    let connected = (0..net.n())
        .flat_map(|i| (0..net.n()).map(move |j| (i, j)))
        .filter(|&(i, j)| net.is_connected(i, j))
        .count();
    println!(
        "programmed {}x{} synapses ({connected} connected), readback verified; wrote {}",
        net.n(),
        net.n(),
        show(&ctx.out.join("hardware.csv"))
    );
    Ok(())
}

fn cmd_recall(ctx: &Ctx, args: &RecallArgs) -> Result<()> {
    let set = ctx.patterns(&args.source)?;
    let Some(target) = set.patterns.get(args.pattern) else {
        bail!("--pattern {} out of range ({} patterns)", args.pattern, set.patterns.len());
    };
    let w = train(&set.patterns, ctx.cfg.network.zero_diagonal)?;
    let mut rng = stream(ctx.cfg.seed, Domain::Cli, args.pattern as u64, 0, 0);
    let input = inject_noise(target, args.noise, &mut rng)?;
    println!("input (pattern {}, {} bits flipped):", args.pattern, input.hamming(target));
    print!("{}", render_grid(&input, set.cols));

    let mut nets: Vec<(&str, Box<dyn Dynamics>)> = Vec::new();
    if args.implementation != Which::Hardware {
        nets.push(("software", Box::new(SoftwareNetwork::new(w.clone(), ctx.cfg.network.theta))));
    }
    if args.implementation != Which::Software {
        nets.push(("hardware", Box::new(quantize(&w, &ctx.cfg.hardware())?)));
    }
    for (name, net) in nets {
        let r = recall(net.as_ref(), &input, ctx.cfg.network.max_iters)?;
        println!();
        println!(
            "{name}: converged={} two_cycle={} iterations={} recovered={} hamming_to_target={}",
            r.converged,
            r.two_cycle,
            r.iterations,
            r.converged && r.final_state == *target,
            r.final_state.hamming(target)
        );
        print!("{}", render_grid(&r.final_state, set.cols));
    }
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, args: &SweepArgs) -> Result<spinmem::SweepReport> {
    let set = ctx.patterns(&args.source)?;
    let mut cfg = ctx.cfg.sweep_config(set.patterns);
    if let Some(t) = args.trials {
        cfg.trials_per_point = t;
    }
    let report = sweep(&cfg)?;
    write_sweep(ctx.create("sweep.csv")?, &report)?;
    let mut written = vec!["sweep.csv"];
    if report.has(Implementation::Software) && report.has(Implementation::Hardware) {
        write_delta(ctx.create("delta.csv")?, &report)?;
        written.push("delta.csv");
    }
    println!(
        "swept {} patterns x {} noise rates x {} trials; wrote {} to {}",
        report.n_patterns,
        report.noise_rates.len(),
        cfg.trials_per_point,
        written.join(", "),
        show(&ctx.out)
    );
    Ok(report)
}

fn cmd_mc(ctx: &Ctx, args: &McArgs) -> Result<()> {
    let mut cfg = ctx.cfg.mc_config();
    if let Some(n) = args.samples {
        cfg.n_samples = n;
    }
    let report = run_weight_mc(&cfg)?;
    write_mc_samples(ctx.create("mc_samples.csv")?, &report)?;
    write_mc_summary(ctx.create("mc_summary.csv")?, &report)?;
    for s in &report.levels {
        println!(
            "level {}: q1={:.5} median={:.5} q3={:.5}",
            s.level.level(),
            s.q1,
            s.median,
            s.q3
        );
    }
    let gaps = iqr_separation(&report);
    println!(
        "IQRs disjoint: {}; wrote mc_samples.csv, mc_summary.csv to {}",
        gaps.iter().all(|&g| g > 0.0),
        show(&ctx.out)
    );
    Ok(())
}

fn cmd_compare(ctx: &Ctx, args: &CompareArgs) -> Result<()> {
    let report = cmd_sweep(ctx, &args.sweep)?;
    let window = args.window.unwrap_or(ctx.cfg.compare);
    let test = compare_implementations(&report, window)?;
    let summary = ComparisonSummary::new(&report, window, test);
    write_json(ctx.create("comparison.json")?, &summary)?;
    println!(
        "U = {}, p = {:.4} ({:?}); mean R software {:.4}, hardware {:.4}; wrote comparison.json",
        summary.test.u_statistic,
        summary.test.p_value,
        summary.test.method,
        summary.mean_recall_software,
        summary.mean_recall_hardware
    );
    Ok(())
}
