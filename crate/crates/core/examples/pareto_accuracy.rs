//! Joins a top-1 accuracy table onto a design sweep and prints the
//! accuracy/perf-per-area front.
//!
//! cargo run --release --example pareto_accuracy [preset]

use accel_ppa::arch::PeType;
use accel_ppa::costmodel::default_cost_table;
use accel_ppa::dse::{default_grid, explore, join_accuracy, pareto_front, AccuracyTable, Metric, Objective};
use accel_ppa::workload::builtin_network;

fn main() -> anyhow::Result<()> {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "resnet20".into());
    let net = builtin_network(&preset)?;
    let ex = explore(&net, &default_grid(), &default_cost_table()?)?;

    // Illustrative numbers; real runs load these with parse_accuracy_csv.
    let mut acc = AccuracyTable::new();
    for (t, top1) in [(PeType::Fp32, 0.915), (PeType::Int16, 0.914), (PeType::Light2, 0.909), (PeType::Light1, 0.901)] {
        acc.insert(preset.as_str(), t, top1)?;
    }
    let points = join_accuracy(&ex.points, &acc, &preset)?;
    let front = pareto_front(&points, &[Objective::max(Metric::Top1), Objective::max(Metric::PerfPerArea)])?;
    println!("{:<7} {:>6} {:>12}  config", "pe", "top1", "perf/area");
    for p in front {
        println!(
            "{:<7} {:>6.3} {:>12.4e}  {}x{} glb {} bw {}",
            p.cfg.pe_type,
            p.accuracy.unwrap(),
            p.ppa.unwrap().perf_per_area,
            p.cfg.pe_rows,
            p.cfg.pe_cols,
            p.cfg.glb_bytes,
            p.cfg.dram_bw
        );
    }
    Ok(())
}
