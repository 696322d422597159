//! Sweeps the bundled grid for every preset network and prints the spread of
//! perf/area and energy plus best-per-type ratios against INT16.
//!
//! cargo run --release --example design_space_summary [cost_table.json [grid.json]]

use accel_ppa::arch::PeType;
use accel_ppa::costmodel::{default_cost_table, parse_cost_table};
use accel_ppa::dse::{best_per_type, default_grid, explore, parse_grid, Metric, Objective};
use accel_ppa::workload::Preset;

fn main() -> anyhow::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => parse_cost_table(&std::fs::read_to_string(path)?)?,
        None => default_cost_table()?,
    };
    let grid = match std::env::args().nth(2) {
        Some(path) => parse_grid(&std::fs::read_to_string(path)?)?,
        None => default_grid(),
    };
    println!(
        "{:<15} {:>9} {:>9} {:>9} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
        "network", "feasible", "ppa_span", "e_span", "L1 ppa", "L2 ppa", "FP ppa", "L1 e", "L2 e", "FP e"
    );
    for preset in Preset::PUBLISHED {
        let net = preset.network();
        let ex = explore(&net, &grid, &table)?;
        let feasible: Vec<_> = ex.feasible().collect();
        let span = |m: Metric| {
            let vals = feasible.iter().filter_map(|p| m.value(p));
            let (lo, hi) = vals.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi / lo
        };
        let best_ppa = best_per_type(&ex.points, Objective::max(Metric::PerfPerArea));
        let best_e = best_per_type(&ex.points, Objective::min(Metric::Energy));
        let pick = |v: &[accel_ppa::dse::DesignPoint], t: PeType, m: Metric| {
            v.iter().find(|p| p.cfg.pe_type == t).and_then(|p| m.value(p)).unwrap_or(f64::NAN)
        };
        let ppa_ratio = |t| pick(&best_ppa, t, Metric::PerfPerArea) / pick(&best_ppa, PeType::Int16, Metric::PerfPerArea);
        let e_ratio = |t| pick(&best_e, t, Metric::Energy) / pick(&best_e, PeType::Int16, Metric::Energy);
        println!(
            "{:<15} {:>9} {:>9.2} {:>9.2} | {:>7.3} {:>7.3} {:>7.3} | {:>7.3} {:>7.3} {:>7.3}",
            preset.name(),
            feasible.len(),
            span(Metric::PerfPerArea),
            span(Metric::Energy),
            ppa_ratio(PeType::Light1),
            ppa_ratio(PeType::Light2),
            ppa_ratio(PeType::Fp32),
            e_ratio(PeType::Light1),
            e_ratio(PeType::Light2),
            e_ratio(PeType::Fp32),
        );
        if std::env::var_os("SHOW_BEST").is_some() {
            for p in best_ppa.iter().chain(&best_e) {
                let ppa = p.ppa.unwrap();
                println!(
                    "   {:<6} {:>2}x{:<2} glb={:>6} spad=({},{},{}) bw={:>2}  lat={:.3e} area={:.3} E={:.3e} [mac {:.2e} spad {:.2e} glb {:.2e} dram {:.2e} leak {:.2e}]",
                    p.cfg.pe_type, p.cfg.pe_rows, p.cfg.pe_cols, p.cfg.glb_bytes,
                    p.cfg.ifmap_spad_bytes, p.cfg.filter_spad_bytes, p.cfg.psum_spad_bytes, p.cfg.dram_bw,
                    ppa.latency_s, ppa.area_mm2, ppa.energy_j, ppa.mac_j, ppa.spad_j, ppa.glb_j, ppa.dram_j, ppa.leak_j
                );
            }
        }
    }
    Ok(())
}
