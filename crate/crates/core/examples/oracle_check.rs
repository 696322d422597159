//! Cross-checks the closed-form access counts against the brute-force
//! loop-nest simulator on a few small layers and array shapes.
//!
//! cargo run --example oracle_check

use accel_ppa::arch::{default_arch, PeType};
use accel_ppa::dataflow::{layer_stats, simulate_layer_oracle};
use accel_ppa::workload::LayerConfig;

fn main() -> anyhow::Result<()> {
    let layers = [
        LayerConfig::conv("toy", 1, 1, 5, 5, 3, 1, 0),
        LayerConfig::conv("strided", 3, 4, 11, 11, 3, 2, 1),
        LayerConfig::conv("wide", 2, 2, 9, 9, 5, 1, 2).with_batch(2),
        LayerConfig::fc("fc", 32, 10),
    ];
    let mut mismatches = 0;
    for layer in &layers {
        for (rows, cols) in [(1, 1), (3, 4), (4, 4), (8, 8)] {
            let mut cfg = default_arch().with_pe_type(PeType::Light1);
            cfg.pe_rows = rows;
            cfg.pe_cols = cols;
            let model = layer_stats(layer, &cfg)?;
            let oracle = simulate_layer_oracle(layer, &cfg)?;
            let verdict = match model.first_mismatch(&oracle) {
                None => "match".to_string(),
                Some(field) => {
                    mismatches += 1;
                    format!("MISMATCH in {field}")
                }
            };
            println!("{:<8} {rows}x{cols}  macs {:>6} cycles {:>5}  {verdict}", layer.name, model.macs, model.compute_cycles);
        }
    }
    anyhow::ensure!(mismatches == 0, "{mismatches} mismatches");
    Ok(())
}
