//! The `accel-ppa` command line.
//!
//! Exit codes: 0 success; 1 malformed input, invalid value or usage error;
//! 2 infeasible configuration; 3 normalization requested without a feasible
//! INT16 point; 4 rank-deficient fit under `--strict-rank`; 5 analytical and
//! simulated access counts disagree.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::arch::{check_config, default_arch, parse_arch, AcceleratorConfig};
use crate::costmodel::{default_cost_table, default_cost_table_source, parse_cost_table, ppa_from_stats, CostTable};
use crate::dataflow::{layer_stats, network_stats, simulate_layer_oracle, AccessStats};
use crate::dse::{
    default_grid, explore, join_accuracy, parse_accuracy_csv, parse_grid, parse_objectives, pareto_front,
    GridSpec, Metric,
};
use crate::error::{Error, Result};
use crate::regression::{parse_samples_csv, FitOptions, Target};
use crate::report::{
    load_points_csv, sha256_hex, write_points_csv, write_report, InputDigest, Payload, PpaPayload, RunReport,
};
use crate::workload::{builtin_network, parse_network, LayerConfig, Network, Preset};
use crate::TOOL_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NO_BASELINE: i32 = 3;
pub const EXIT_RANK: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

/// Value of `--arch`, `--cost-table` and `--grid` that selects the bundled file.
pub const BUNDLED: &str = "default";

#[derive(Debug, Parser)]
#[command(name = "accel-ppa", about = "Quantization-aware PPA modeling and design-space exploration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Power, performance and area of one network on one architecture.
    Evaluate(EvaluateArgs),
    /// Evaluate every point of a design grid and write them as CSV.
    Explore(ExploreArgs),
    /// Fit a polynomial surrogate to a samples file.
    Fit(FitArgs),
    /// Extract the Pareto front of a points CSV.
    Pareto(ParetoArgs),
    /// Compare analytical access counts with the loop-nest simulator.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Preset name or network JSON file.
    #[arg(long)]
    network: String,
    #[arg(long, default_value = BUNDLED)]
    arch: String,
    #[arg(long, default_value = BUNDLED)]
    cost_table: String,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExploreArgs {
    #[arg(long)]
    network: String,
    #[arg(long, default_value = BUNDLED)]
    grid: String,
    #[arg(long, default_value = BUNDLED)]
    cost_table: String,
    /// Fill the columns normalized to the best INT16 point.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    samples: PathBuf,
    /// power, latency or area.
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = crate::regression::DEFAULT_MAX_DEGREE)]
    max_degree: usize,
    #[arg(long, default_value_t = crate::regression::DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long, default_value_t = crate::regression::DEFAULT_SEED)]
    seed: u64,
    /// Fail instead of using the minimum-norm solution on rank deficiency.
    #[arg(long)]
    strict_rank: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[arg(long)]
    points: PathBuf,
    /// e.g. `perf_per_area:max,energy:min`.
    #[arg(long)]
    objectives: String,
    /// `network,pe_type,top1` CSV.
    #[arg(long)]
    accuracy: Option<PathBuf>,
    /// Network name to look up in the accuracy table.
    #[arg(long)]
    network: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    network: String,
    #[arg(long, default_value = BUNDLED)]
    arch: String,
}

/// Analytical per-layer statistics, replaceable for harness checks.
pub type LayerModel = fn(&LayerConfig, &AcceleratorConfig) -> Result<AccessStats>;

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_model(args, layer_stats)
}

/// [`run`] with the analytical model used by `oracle` swapped out.
pub fn run_with_model<I, T>(args: I, model: LayerModel) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = Cli::command().version(version_string());
    let cli = match command
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a, &mut stdout),
        Command::Explore(a) => cmd_explore(&a, &mut stdout),
        Command::Fit(a) => cmd_fit(&a, &mut stdout),
        Command::Pareto(a) => cmd_pareto(&a, &mut stdout),
        Command::Oracle(a) => cmd_oracle(&a, model, &mut stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            if let Error::Infeasible(violations) = &e {
                eprintln!("error: configuration is infeasible");
                for v in violations {
                    eprintln!("  {v}");
                }
            } else {
                eprintln!("error: {e}");
            }
            exit_code(&e)
        }
    }
}

/// Tool version and the digest of the bundled cost table.
pub fn version_string() -> String {
    format!(
        "{TOOL_VERSION} (bundled cost table sha256 {})",
        sha256_hex(default_cost_table_source().as_bytes())
    )
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(v) if v.iter().all(|v| v.is_capacity()) => EXIT_INFEASIBLE,
        Error::NoInt16Baseline => EXIT_NO_BASELINE,
        Error::RankDeficient { .. } => EXIT_RANK,
        _ => EXIT_INPUT,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_network(spec: &str) -> Result<(Network, InputDigest)> {
    if spec.parse::<Preset>().is_ok() {
        let label = format!("network:{spec}");
        return Ok((builtin_network(spec)?, InputDigest::of_builtin("network", &label)?));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::UnknownPreset(spec.to_string()));
    }
    let text = read(path)?;
    Ok((parse_network(&text)?, InputDigest::of_bytes("network", spec, text.as_bytes())))
}

fn load_bundled_or<T>(
    spec: &str,
    role: &str,
    bundled: impl FnOnce() -> Result<T>,
    parse: impl FnOnce(&str) -> Result<T>,
) -> Result<(T, InputDigest)> {
    if spec == BUNDLED {
        let digest = InputDigest::of_builtin(role, &format!("{role}:{BUNDLED}"))?;
        return Ok((bundled()?, digest));
    }
    let text = read(Path::new(spec))?;
    Ok((parse(&text)?, InputDigest::of_bytes(role, spec, text.as_bytes())))
}

fn load_arch(spec: &str) -> Result<(AcceleratorConfig, InputDigest)> {
    load_bundled_or(spec, "arch", || Ok(default_arch()), parse_arch)
}

fn load_table(spec: &str) -> Result<(CostTable, InputDigest)> {
    load_bundled_or(spec, "cost_table", default_cost_table, parse_cost_table)
}

fn load_grid(spec: &str) -> Result<(GridSpec, InputDigest)> {
    load_bundled_or(spec, "grid", || Ok(default_grid()), parse_grid)
}

fn cmd_evaluate(a: &EvaluateArgs, out: &mut impl Write) -> Result<i32> {
    let (net, net_digest) = load_network(&a.network)?;
    let (cfg, arch_digest) = load_arch(&a.arch)?;
    let (table, table_digest) = load_table(&a.cost_table)?;
    check_config(&cfg, Some(&net))?;
    let stats = network_stats(&net, &cfg)?;
    let ppa = ppa_from_stats(&stats, &cfg, &table);

    let _ = writeln!(out, "network        {} ({} layers, {} MACs)", net.name, net.layers.len(), stats.macs);
    let _ = writeln!(
        out,
        "architecture   {}x{} {} PEs, {} B global buffer",
        cfg.pe_rows, cfg.pe_cols, cfg.pe_type, cfg.glb_bytes
    );
    let _ = writeln!(out, "latency        {:.6e} s ({} cycles)", ppa.latency_s, stats.latency_cycles);
    let _ = writeln!(out, "energy         {:.6e} J", ppa.energy_j);
    let _ = writeln!(out, "power          {:.6e} W", ppa.avg_power_w);
    let _ = writeln!(out, "area           {:.6} mm^2", ppa.area_mm2);
    let _ = writeln!(out, "perf/area      {:.6e} MAC/s/mm^2", ppa.perf_per_area);
    let _ = writeln!(out, "utilization    {:.4}", stats.utilization);

    if let Some(path) = &a.out {
        let payload = PpaPayload {
            network: net.name.clone(),
            config: cfg,
            stats,
            ppa,
        };
        let report = RunReport::new(
            "evaluate",
            vec![net_digest, arch_digest, table_digest],
            Payload::Ppa(Box::new(payload)),
        );
        write_report(&report, path)?;
        let _ = writeln!(out, "report         {}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_explore(a: &ExploreArgs, out: &mut impl Write) -> Result<i32> {
    let (net, _) = load_network(&a.network)?;
    let (grid, _) = load_grid(&a.grid)?;
    let (table, _) = load_table(&a.cost_table)?;
    let mut result = explore(&net, &grid, &table)?;
    if !a.normalize {
        result.points.iter_mut().for_each(|p| p.clear_normalization());
    }
    write_points_csv(&result.points, &a.out)?;
    let _ = writeln!(
        out,
        "{} points, {} feasible, written to {}",
        result.points.len(),
        result.feasible().count(),
        a.out.display()
    );
    if a.normalize {
        let b = result.baseline()?;
        let c = &result.points[b].cfg;
        let _ = writeln!(
            out,
            "normalized to INT16 point #{b}: {}x{}, {} B global buffer, {} B/cycle",
            c.pe_rows, c.pe_cols, c.glb_bytes, c.dram_bw
        );
    }
    Ok(EXIT_OK)
}

fn cmd_fit(a: &FitArgs, out: &mut impl Write) -> Result<i32> {
    let target: Target = a.target.parse()?;
    let set = parse_samples_csv(&read(&a.samples)?, target)?;
    let opts = FitOptions {
        max_degree: a.max_degree,
        folds: a.folds,
        seed: a.seed,
        strict_rank: a.strict_rank,
    };
    let model = set.fit(&opts)?;
    let mut text = model.to_json();
    text.push('\n');
    std::fs::write(&a.out, text).map_err(|e| Error::io(&a.out, e))?;

    let mean = set.samples.iter().map(|s| s.target).sum::<f64>() / set.samples.len() as f64;
    let _ = writeln!(out, "samples        {}", set.samples.len());
    let _ = writeln!(out, "degree         {}", model.degree);
    let _ = writeln!(out, "cv rmse        {:.6e} ({:.4}% of mean)", model.cv_rmse, 100.0 * model.cv_rmse / mean.abs());
    for (d, e) in model.cv_rmse_by_degree.iter().enumerate() {
        let _ = writeln!(out, "  degree {}     {e:.6e}", d + 1);
    }
    if model.rank_deficient {
        let _ = writeln!(
            out,
            "note           rank deficient (rank {} of {}); minimum-norm solution used",
            model.effective_rank,
            model.coefficients.len()
        );
    }
    let _ = writeln!(out, "model          {}", a.out.display());
    Ok(EXIT_OK)
}

fn cmd_pareto(a: &ParetoArgs, out: &mut impl Write) -> Result<i32> {
    let objectives = parse_objectives(&a.objectives)?;
    let mut points = load_points_csv(&a.points)?;
    match (&a.accuracy, &a.network) {
        (Some(path), Some(network)) => {
            let table = parse_accuracy_csv(&read(path)?)?;
            points = join_accuracy(&points, &table, network)?;
        }
        (Some(_), None) => {
            return Err(Error::parse("arguments", "--accuracy needs --network to select table rows"));
        }
        (None, _) => {
            let needs_top1 = objectives.iter().any(|o| o.metric == Metric::Top1);
            if needs_top1 && points.iter().any(|p| p.feasible && p.accuracy.is_none()) {
                return Err(Error::parse("arguments", "objective top1 needs --accuracy"));
            }
        }
    }
    let front = pareto_front(&points, &objectives)?;
    write_points_csv(&front, &a.out)?;
    let _ = writeln!(
        out,
        "{} of {} feasible points on the front, written to {}",
        front.len(),
        points.iter().filter(|p| p.feasible).count(),
        a.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs, model: LayerModel, out: &mut impl Write) -> Result<i32> {
    let (net, _) = load_network(&a.network)?;
    let (cfg, _) = load_arch(&a.arch)?;
    check_config(&cfg, Some(&net))?;
    let mut mismatch: Option<(String, &'static str)> = None;
    for layer in &net.layers {
        let simulated = simulate_layer_oracle(layer, &cfg)?;
        let analytical = model(layer, &cfg)?;
        let _ = writeln!(out, "layer {}", layer.name);
        let _ = writeln!(out, "  {:<20} {:>16} {:>16}", "field", "analytical", "simulated");
        for ((name, x), (_, y)) in analytical.counts().iter().zip(simulated.counts().iter()) {
            let flag = if x == y { "" } else { "  <-" };
            let _ = writeln!(out, "  {name:<20} {x:>16} {y:>16}{flag}");
        }
        let _ = writeln!(
            out,
            "  {:<20} {:>16} {:>16}",
            "utilization", analytical.utilization, simulated.utilization
        );
        if mismatch.is_none() {
            if let Some(field) = analytical.first_mismatch(&simulated) {
                mismatch = Some((layer.name.clone(), field));
            }
        }
    }
    match mismatch {
        None => {
            let _ = writeln!(out, "all {} layers match", net.layers.len());
            Ok(EXIT_OK)
        }
        Some((layer, field)) => {
            eprintln!("error: layer `{layer}`: field `{field}` differs between the analytical model and the simulator");
            Ok(EXIT_MISMATCH)
        }
    }
}
