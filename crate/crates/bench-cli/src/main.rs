use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bench_cli::{
    emit_outputs, retail_smoke_bench, run_benchmark, run_theory_suite, synthetic_transactions,
    ExperimentConfig, Method,
};
use demand_core::{generate, write_panels_csv, write_panels_jsonl, GenConfig, World};
use retail_pipeline::{
    build_exposure_sequence, build_static_top3, parse_transactions, retail_task_to_panel,
    write_features_csv, FeatureSource,
};

#[derive(Parser)]
#[command(
    name = "demand-bench",
    about = "Multi-task demand estimation benchmark under endogenous pricing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic task panels and write them to CSV / JSONL.
    Generate(GenerateArgs),
    /// Run the (method x confounding x seed) benchmark grid.
    Bench(BenchArgs),
    /// Run the numerical theory checks and emit a JSON report.
    TheoryCheck(TheoryArgs),
    /// Retail transaction pipeline.
    #[command(subcommand)]
    Retail(RetailCommand),
}

#[derive(Args)]
struct GenerateArgs {
    /// World: near-optimal | manager | two-point-probe.
    #[arg(long, default_value = "manager")]
    world: String,
    #[arg(long, default_value_t = 1000)]
    n_tasks: usize,
    #[arg(long, default_value_t = 2)]
    k_obs: usize,
    /// Confounding strength (manager / probe worlds).
    #[arg(long, default_value_t = 0.1)]
    sigma_c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `-` writes CSV to stdout.
    #[arg(long, default_value = "panels.csv")]
    out: PathBuf,
    /// csv | jsonl
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_tasks: Option<usize>,
    /// Comma-separated confounding grid, e.g. "0,0.1,0.2".
    #[arg(long)]
    sigma_grid: Option<String>,
    /// Comma-separated seeds, e.g. "0,1,2".
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated methods, e.g. "dcmoml,meta,eb-gls".
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TheoryArgs {
    /// JSON report path; `-` prints to stdout only.
    #[arg(long, default_value = "theory_report.json")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum RetailCommand {
    /// Build per-product tasks from a transaction CSV.
    BuildTasks(BuildTasksArgs),
    /// Train the transfer methods on retail tasks and report held-out
    /// exposure-weighted RMSE.
    Bench(RetailBenchArgs),
}

#[derive(Args)]
struct BuildTasksArgs {
    /// Transaction CSV (InvoiceNo,StockCode,Description,Quantity,
    /// InvoiceDate,UnitPrice,CustomerID,Country).
    #[arg(long)]
    input: PathBuf,
    /// static-top3 | exposure-sequence
    #[arg(long, default_value = "exposure-sequence")]
    kind: String,
    /// Train runs per task for the exposure-sequence view.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Feature width for description hashing.
    #[arg(long, default_value_t = 256)]
    feature_dim: usize,
    /// Optional precomputed embedding CSV (product_id,f_0..); overrides
    /// hashing.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value = "retail_tasks")]
    out: PathBuf,
}

#[derive(Args)]
struct RetailBenchArgs {
    /// Transaction CSV; omit to run on the synthetic fixture.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Products in the synthetic fixture.
    #[arg(long, default_value_t = 300)]
    synthetic_products: usize,
    #[arg(long, default_value_t = 5)]
    n_seeds: u64,
    #[arg(long, default_value_t = 64)]
    feature_dim: usize,
    #[arg(long, default_value = "retail_bench")]
    out: PathBuf,
}

fn parse_world(s: &str) -> Result<World> {
    match s.trim().to_ascii_lowercase().as_str() {
        "near-optimal" | "nearoptimal" | "sign-flip" => Ok(World::NearOptimal),
        "manager" => Ok(World::Manager),
        "two-point-probe" | "probe" => Ok(World::TwoPointProbe),
        other => bail!("unknown world {other:?} (near-optimal | manager | two-point-probe)"),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry {x:?}: {e}"))
        })
        .collect()
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let world = parse_world(&args.world)?;
    let config = match world {
        World::NearOptimal => GenConfig::near_optimal(args.n_tasks, args.k_obs, args.seed),
        World::Manager => GenConfig::manager(args.n_tasks, args.k_obs, args.sigma_c, args.seed),
        World::TwoPointProbe => GenConfig {
            confound_sigma: args.sigma_c,
            ..GenConfig::two_point_probe(args.n_tasks, args.k_obs, args.seed)
        },
    };
    let panels = generate(&config)?;
    let mut buf = Vec::new();
    match args.format.as_str() {
        "csv" => write_panels_csv(&panels, &mut buf)?,
        "jsonl" => write_panels_jsonl(&panels, &mut buf)?,
        other => bail!("unknown format {other:?} (csv | jsonl)"),
    }
    if args.out.as_os_str() == "-" {
        print!("{}", String::from_utf8_lossy(&buf));
    } else {
        fs::write(&args.out, &buf).with_context(|| format!("writing {}", args.out.display()))?;
        eprintln!("wrote {} tasks to {}", panels.len(), args.out.display());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(n) = args.n_tasks {
        config.n_tasks = n;
    }
    if let Some(s) = &args.sigma_grid {
        config.sigma_grid = parse_list(s, "sigma")?;
    }
    if let Some(s) = &args.seeds {
        config.seeds = parse_list(s, "seed")?;
    }
    if let Some(s) = &args.methods {
        config.methods = s
            .split(',')
            .map(|m| Method::parse(m).ok_or_else(|| anyhow::anyhow!("unknown method {m:?}")))
            .collect::<Result<Vec<_>>>()?;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.display().to_string();
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    if config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global()
            .ok();
    }
    let report = run_benchmark(&config).map_err(|e| anyhow::anyhow!(e))?;
    for row in &report.rows {
        println!(
            "{:8} sigma_c={:<4} slope MSE {:>10.4} +-{:<8.4} intercept MSE {:>10.4} +-{:<8.4} ({} seeds)",
            row.method, row.sigma_c, row.slope_mse, row.slope_hw, row.intercept_mse,
            row.intercept_hw, row.n_seeds
        );
    }
    for cell in &report.cells {
        if let Err(e) = &cell.result {
            eprintln!(
                "cell failed: {} sigma_c={} seed={}: {e}",
                cell.method, cell.sigma_c, cell.seed
            );
        }
    }
    let dir = PathBuf::from(&config.out_dir);
    emit_outputs(&report, &dir)?;
    eprintln!(
        "wrote results.csv, predictions.csv, plot_data.csv to {} ({:.1}s total)",
        dir.display(),
        report.total_wall_secs
    );
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> Result<()> {
    let results = run_theory_suite();
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {} (lhs {:.6e}, rhs {:.6e}, tol {:.2e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.lhs,
            r.rhs,
            r.tolerance
        );
        if !r.pass {
            failed += 1;
        }
    }
    let json = serde_json::to_string_pretty(&results)?;
    if args.out.as_os_str() != "-" {
        fs::write(&args.out, json)?;
        eprintln!("report written to {}", args.out.display());
    }
    if failed > 0 {
        bail!("{failed} theory checks failed");
    }
    Ok(())
}

fn cmd_build_tasks(args: BuildTasksArgs) -> Result<()> {
    let file = fs::File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))?;
    let (records, stats) = parse_transactions(file)?;
    eprintln!(
        "parsed {} rows: kept {}, cancellations {}, nonpositive qty {}, nonpositive price {}, malformed {}",
        stats.rows_read, stats.kept, stats.cancellations, stats.nonpositive_quantity,
        stats.nonpositive_price, stats.malformed
    );
    let source = match &args.embeddings {
        Some(path) => {
            let f = fs::File::open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            retail_pipeline::load_embeddings_csv(f)?
        }
        None => FeatureSource::hashed(args.feature_dim),
    };
    let (tasks, build) = match args.kind.as_str() {
        "static-top3" => build_static_top3(&records, &source),
        "exposure-sequence" => build_exposure_sequence(&records, args.k, &source, 7),
        other => bail!("unknown task kind {other:?}"),
    };
    eprintln!(
        "{} products seen, {} tasks built, {} dropped",
        build.products_seen, build.tasks_built, build.dropped_products
    );
    fs::create_dir_all(&args.out)?;
    let panels: Vec<_> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut p = retail_task_to_panel(t, i as u64);
            p.context = Vec::new(); // features live in the sidecar
            p
        })
        .collect();
    let mut buf = Vec::new();
    write_panels_csv(&panels, &mut buf)?;
    fs::write(args.out.join("tasks.csv"), buf)?;
    let mut fbuf = Vec::new();
    write_features_csv(&tasks, &mut fbuf)?;
    fs::write(args.out.join("features.csv"), fbuf)?;
    eprintln!("wrote tasks.csv and features.csv to {}", args.out.display());
    Ok(())
}

fn cmd_retail_bench(args: RetailBenchArgs) -> Result<()> {
    let records = match &args.input {
        Some(path) => {
            let f = fs::File::open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            parse_transactions(f)?.0
        }
        None => {
            eprintln!(
                "no --input given; running on the synthetic fixture ({} products)",
                args.synthetic_products
            );
            synthetic_transactions(args.synthetic_products, 2024)
        }
    };
    let source = FeatureSource::hashed(args.feature_dim);
    let (tasks, stats) = build_exposure_sequence(&records, 2, &source, 7);
    eprintln!(
        "{} products -> {} exposure-sequence tasks ({} dropped)",
        stats.products_seen, stats.tasks_built, stats.dropped_products
    );
    let overrides = bench_cli::retail_overrides();
    let seeds: Vec<u64> = (0..args.n_seeds).collect();
    let rows = retail_smoke_bench(
        &tasks,
        &[Method::Dcmoml, Method::Meta, Method::MetaNa],
        &overrides,
        &seeds,
    )
    .map_err(|e| anyhow::anyhow!(e))?;
    for row in &rows {
        println!(
            "{:8} holdout exposure-weighted RMSE {:.4} +-{:.4} ({} seeds)",
            row.method, row.rmse_mean, row.rmse_hw, row.n_seeds
        );
    }
    fs::create_dir_all(&args.out)?;
    fs::write(
        args.out.join("retail_rmse.json"),
        serde_json::to_string_pretty(&rows)?,
    )?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::TheoryCheck(args) => cmd_theory(args),
        Command::Retail(RetailCommand::BuildTasks(args)) => cmd_build_tasks(args),
        Command::Retail(RetailCommand::Bench(args)) => cmd_retail_bench(args),
    }
}
