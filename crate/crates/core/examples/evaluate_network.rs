//! Evaluates one preset network on the default accelerator under each PE type
//! and prints the energy breakdown.
//!
//! cargo run --example evaluate_network [preset]

use accel_ppa::arch::{default_arch, PeType};
use accel_ppa::costmodel::{default_cost_table, evaluate_ppa};
use accel_ppa::dataflow::network_stats;
use accel_ppa::workload::builtin_network;

fn main() -> anyhow::Result<()> {
    let preset = std::env::args().nth(1).unwrap_or_else(|| "resnet20".into());
    let net = builtin_network(&preset)?;
    let table = default_cost_table()?;
    println!("{} ({} layers, {} MACs)", net.name, net.layers.len(), net.total_macs());
    println!(
        "{:<7} {:>10} {:>10} {:>9} {:>10} | {:>6} {:>6} {:>6} {:>6} {:>6}",
        "pe", "latency_s", "energy_J", "area_mm2", "MAC/s/mm2", "mac%", "spad%", "glb%", "dram%", "leak%"
    );
    for t in PeType::ALL {
        let cfg = default_arch().with_pe_type(t);
        let ppa = evaluate_ppa(&net, &cfg, &table)?;
        let pct = |x: f64| 100.0 * x / ppa.energy_j;
        println!(
            "{:<7} {:>10.3e} {:>10.3e} {:>9.3} {:>10.3e} | {:>6.1} {:>6.1} {:>6.1} {:>6.1} {:>6.1}",
            t, ppa.latency_s, ppa.energy_j, ppa.area_mm2, ppa.perf_per_area,
            pct(ppa.mac_j), pct(ppa.spad_j), pct(ppa.glb_j), pct(ppa.dram_j), pct(ppa.leak_j)
        );
    }
    let stats = network_stats(&net, &default_arch())?;
    println!("utilization {:.3}, refetch {}", stats.utilization, stats.refetch_factor);
    Ok(())
}
