//! `svdrefine`: certify, refine and deflate SVD triplets, and run the
//! benchmark families.
//!
//! Exit status: 0 on success, 2 when the starting triplet fails
//! certification, 3 when the divergence guard stops a refinement, 1 on any
//! other error (including bad arguments).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use svdrefine::bench::experiment::{generate, init_and_deflate, measurement_bits};
use svdrefine::bench::{init_svd, load_triplet, run_experiment, save_triplet, ExperimentConfig, Family};
use svdrefine::mmio::{load_matrix_market, save_matrix_market};
use svdrefine::refiner::{certify, refine, short_sci, CertKappa, Certificate, RefineOptions, StopRule};
use svdrefine::spectra::deflate;
use svdrefine::{Error, Mode, MpFloat, MpMatrix, MpTriplet, Real};

#[derive(Parser)]
#[command(name = "svdrefine", version, about = "Certified high-order refinement of singular value decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the certification test on a triplet.
    Certify(CertifyArgs),
    /// Refine a triplet with the order-(p+1) map.
    Refine(RefineArgs),
    /// Select one singular value per well-separated group.
    Deflate(DeflateArgs),
    /// Generate, initialize, deflate and refine one of the test families.
    Experiment(ExperimentArgs),
    /// Write a test matrix in Matrix Market format.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Args)]
struct Source {
    /// Matrix Market file holding M.
    #[arg(long)]
    input: PathBuf,
    /// Directory with U.mtx, V.mtx, Sigma.txt and manifest.json. Without it
    /// the baseline SVD is computed at --bits.
    #[arg(long)]
    triplet: Option<PathBuf>,
    /// Override the triplet's mode: `regular` or `cluster:q1,q2,...`.
    #[arg(long)]
    mode: Option<String>,
    /// Order p of the map (the method has order p+1).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    /// Working precision in bits (the base precision when refining).
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(2..))]
    bits: u32,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct RefineArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    /// Stop once epsilon drops below 2^-N.
    #[arg(long)]
    target_bits: Option<u64>,
    /// Keep the precision at --bits instead of growing it geometrically.
    #[arg(long)]
    fixed_precision: bool,
    /// Write the refined triplet here.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct DeflateArgs {
    #[command(flatten)]
    src: Source,
    /// Write the deflated triplet here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Matrix size; for `prescribed` the parameter n of a 4n x 4n matrix.
    #[arg(long)]
    size: usize,
    /// Orders to run: `3`, `1,2,5` or `2..7` (inclusive).
    #[arg(long, default_value = "1", value_parser = parse_orders)]
    order: Orders,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(2..))]
    bits: u32,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(2..))]
    bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination `.mtx` file.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Debug)]
struct Orders(Vec<usize>);

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_orders(s: &str) -> Result<Orders, String> {
    let num = |t: &str| -> Result<usize, String> {
        match t.trim().parse::<usize>() {
            Ok(0) => Err("orders must be at least 1".into()),
            Ok(p) => Ok(p),
            Err(_) => Err(format!("not an order: {t:?}")),
        }
    };
    let orders = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s:?}"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Orders(orders))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // Keep status 2 for certification failures.
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Certify(a) => cmd_certify(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Deflate(a) => cmd_deflate(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(e.downcast_ref::<Error>()))
        }
    }
}

fn exit_status(e: Option<&Error>) -> u8 {
    match e {
        Some(Error::CertificationFailed { .. }) => 2,
        Some(Error::Divergence { .. }) => 3,
        _ => 1,
    }
}

/// `M` at `bits`, and the starting triplet: loaded from disk, or the
/// baseline SVD at `init_bits`.
fn load_inputs(src: &Source, bits: u32, init_bits: u32) -> anyhow::Result<(MpMatrix, MpTriplet)> {
    let m: MpMatrix = load_matrix_market(&src.input, bits)
        .with_context(|| format!("reading {}", src.input.display()))?;
    let mut t = match &src.triplet {
        Some(dir) => load_triplet::<MpFloat>(dir, Some(bits))
            .with_context(|| format!("reading triplet from {}", dir.display()))?,
        None => init_svd(&m, init_bits)?.with_precision(bits),
    };
    if let Some(spec) = &src.mode {
        let mode = Mode::parse(spec)?;
        t = MpTriplet::from_parts(t.u, t.v, t.sigma, mode)?;
    }
    Ok((m, t))
}

fn print_certificate(c: &Certificate<MpFloat>, format: Format) {
    let e = c.e_index().map_or("inf".to_string(), |e| e.to_string());
    match format {
        Format::Csv => {
            println!("order,epsilon,e,kappa,K,delta,eu,ev,u0,pass");
            println!(
                "{},{},{},{},{},{},{},{},{},{}",
                c.p,
                short_sci(&c.epsilon),
                e,
                short_sci(&c.kappa),
                short_sci(&c.k),
                short_sci(&c.delta_norm),
                short_sci(&c.eu_norm),
                short_sci(&c.ev_norm),
                c.constants.u0_f64(),
                c.pass
            );
        }
        Format::Table => {
            println!("order      {}", c.p);
            println!("epsilon    {}", short_sci(&c.epsilon));
            println!("u0         {}", c.constants.u0_f64());
            println!("e          {e}");
            println!("kappa      {}", short_sci(&c.kappa));
            println!("K          {}", short_sci(&c.k));
            println!("|Delta|    {}", short_sci(&c.delta_norm));
            println!("|E(U)|     {}", short_sci(&c.eu_norm));
            println!("|E(V)|     {}", short_sci(&c.ev_norm));
            println!("{}", if c.pass { "PASS" } else { "FAIL" });
        }
    }
}

fn cmd_certify(a: CertifyArgs) -> anyhow::Result<ExitCode> {
    let p = a.src.order as usize;
    // A computed start is measured well above its own precision.
    let bits = if a.src.triplet.is_some() { a.src.bits } else { measurement_bits(a.src.bits) };
    let (m, t) = load_inputs(&a.src, bits, a.src.bits)?;
    let c = certify(&t, &m, p)?;
    print_certificate(&c, a.format);
    Ok(if c.pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_refine(a: RefineArgs) -> anyhow::Result<ExitCode> {
    let p = a.src.order as usize;
    let mut opts = RefineOptions::new(p, a.src.bits, a.iters);
    if a.fixed_precision {
        opts.schedule = svdrefine::refiner::PrecisionSchedule::Fixed { bits: a.src.bits };
    }
    opts.stop = StopRule { max_iter: a.iters, target_bits: a.target_bits };
    let top = opts.schedule.bits(a.iters, p, 1 << 24).max(measurement_bits(a.src.bits));
    let (m, mut t) = load_inputs(&a.src, top, a.src.bits)?;
    if a.src.triplet.is_none() && a.src.mode.is_none() && t.is_square() {
        // Same flow as the experiments: keep one value per group first.
        t = deflate(&t, &m, p)?.triplet;
        opts.kappa = CertKappa::PairTerms;
    }
    let t = t.with_precision(a.src.bits);
    match refine(&m, &t, &opts) {
        Ok(out) => {
            print_trace(&out.trace, a.format);
            if let Some(dir) = &a.output {
                save_triplet(&out.triplet, dir)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            print_trace(&e.trace, a.format);
            eprintln!("error: {}", e.error);
            Ok(ExitCode::from(exit_status(Some(&e.error))))
        }
    }
}

fn print_trace(t: &svdrefine::refiner::RefinementTrace<MpFloat>, format: Format) {
    match format {
        Format::Csv => print!("{}", t.to_csv()),
        Format::Table => print!("{}", t.to_table()),
    }
}

fn cmd_deflate(a: DeflateArgs) -> anyhow::Result<ExitCode> {
    let p = a.src.order as usize;
    let (d, m_bits) = if a.src.triplet.is_none() {
        let mb = measurement_bits(a.src.bits);
        let m: MpMatrix = load_matrix_market(&a.src.input, mb)
            .with_context(|| format!("reading {}", a.src.input.display()))?;
        (init_and_deflate(&m, a.src.bits, p)?, mb)
    } else {
        let (m, t) = load_inputs(&a.src, a.src.bits, a.src.bits)?;
        (deflate(&t, &m, p)?, a.src.bits)
    };
    let one = MpFloat::from_i64_at(1, m_bits);
    let q_plus = d.triplet.spectrum().iter().filter(|s| **s > one).count();
    let idx: Vec<String> = d.indices.iter().map(|i| i.to_string()).collect();
    println!("q        {}", d.q());
    println!("q+       {q_plus}");
    println!("e        {}", short_sci(&d.e));
    println!("kappa    {}", short_sci(&d.kappa));
    println!("indices  {}", idx.join(","));
    if let Some(dir) = &a.output {
        save_triplet(&d.triplet, dir)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(a: ExperimentArgs) -> anyhow::Result<ExitCode> {
    let cfg = ExperimentConfig {
        family: a.family,
        n: a.size,
        orders: a.order.0,
        base_bits: a.bits,
        iterations: a.iters,
        seed: a.seed,
    };
    let table = run_experiment(&cfg)?;
    match a.format {
        Format::Csv => print!("{}", table.to_csv()),
        Format::Table => print!("{}", table.to_table()),
    }
    let mut status = 0;
    for r in &table.runs {
        if let Some(e) = &r.error {
            eprintln!("p = {}: {e}", r.p);
            status = status.max(exit_status(r.failure.as_ref()));
        }
    }
    Ok(ExitCode::from(status))
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<ExitCode> {
    if a.size == 0 {
        bail!("size must be at least 1");
    }
    let cfg = ExperimentConfig {
        family: a.family,
        n: a.size,
        orders: vec![1],
        base_bits: a.bits,
        iterations: 0,
        seed: a.seed,
    };
    let (m, _) = generate(&cfg, a.bits);
    write_matrix(&m, &a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn write_matrix<T: Real>(m: &svdrefine::Matrix<T>, path: &Path) -> anyhow::Result<()> {
    save_matrix_market(m, path).with_context(|| format!("writing {}", path.display()))
}
