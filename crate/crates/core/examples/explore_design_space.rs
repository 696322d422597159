//! Sweeps the bundled grid for one network, normalizes against the best INT16
//! design and writes the point cloud plus its perf/area vs energy front.
//!
//! cargo run --release --example explore_design_space [preset [out_dir]]

use std::path::PathBuf;

use accel_ppa::costmodel::default_cost_table;
use accel_ppa::dse::{default_grid, explore, pareto_front, Metric, Objective};
use accel_ppa::report::write_points_csv;
use accel_ppa::workload::builtin_network;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let net = builtin_network(&args.next().unwrap_or_else(|| "resnet20".into()))?;
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| std::env::temp_dir().display().to_string()));

    let ex = explore(&net, &default_grid(), &default_cost_table()?)?;
    let base = &ex.points[ex.baseline()?];
    println!("{} points, {} feasible", ex.points.len(), ex.feasible().count());
    println!("INT16 baseline: {}x{} glb {} bw {}", base.cfg.pe_rows, base.cfg.pe_cols, base.cfg.glb_bytes, base.cfg.dram_bw);

    let objectives = [Objective::max(Metric::PerfPerArea), Objective::min(Metric::Energy)];
    let front = pareto_front(&ex.points, &objectives)?;
    for p in &front {
        println!(
            "  {:<6} {:>2}x{:<2} glb {:>7}  norm perf/area {:>7.3}  norm energy {:.3}",
            p.cfg.pe_type, p.cfg.pe_rows, p.cfg.pe_cols, p.cfg.glb_bytes,
            p.norm_perf_per_area.unwrap(), p.norm_energy.unwrap()
        );
    }

    let points = out_dir.join(format!("{}_points.csv", net.name));
    let front_path = out_dir.join(format!("{}_front.csv", net.name));
    write_points_csv(&ex.points, &points)?;
    write_points_csv(&front, &front_path)?;
    println!("wrote {} and {}", points.display(), front_path.display());
    Ok(())
}
