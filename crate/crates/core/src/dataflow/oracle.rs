//! Brute-force loop-nest simulator for the row-stationary schedule.
//!
//! Walks every MAC of the seven-deep nest, places it on a physical PE, and
//! counts scratchpad, global-buffer and DRAM events one by one. It shares no
//! arithmetic with [`super::layer_stats`]; the two must agree field for field.

use std::collections::{HashMap, HashSet};

use super::AccessStats;
use crate::arch::{validate_layer, AcceleratorConfig};
use crate::error::{Error, Result};
use crate::workload::LayerConfig;

/// Largest layer (in MACs) the oracle will enumerate.
pub const ORACLE_MAC_LIMIT: u64 = 10_000_000;

pub fn simulate_layer_oracle(layer: &LayerConfig, cfg: &AcceleratorConfig) -> Result<AccessStats> {
    layer.validate()?;
    let violations = validate_layer(cfg, layer);
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    let macs_bound = [
        layer.batch,
        layer.out_channels,
        layer.in_channels,
        layer.out_height(),
        layer.out_width(),
        layer.filter_height,
        layer.filter_width,
    ]
    .iter()
    .fold(1u128, |acc, &d| acc * u128::from(d));
    if macs_bound > u128::from(ORACLE_MAC_LIMIT) {
        return Err(Error::OracleGuard {
            layer: layer.name.clone(),
            macs: macs_bound.min(u128::from(u64::MAX)) as u64,
            limit: ORACLE_MAC_LIMIT,
        });
    }

    let (n_dim, m_dim, c_dim) = (layer.batch, layer.out_channels, layer.in_channels);
    let (e_dim, f_dim) = (layer.out_height(), layer.out_width());
    let (r_dim, s_dim) = (layer.filter_height, layer.filter_width);
    let (rows, cols) = (cfg.pe_rows, cfg.pe_cols);

    // Set geometry: as many filter rows as the array height allows, as many
    // output rows as its width allows; sets tile the array.
    let set_rows = if r_dim < rows { r_dim } else { rows };
    let folds = r_dim.div_ceil(set_rows);
    let strip = if e_dim < cols { e_dim } else { cols };
    let strips = e_dim.div_ceil(strip);
    let sets_across = cols / strip;
    let sets = (rows / set_rows) * sets_across;

    let pass_of = |m: u32, c: u32, fold: u32, n: u32, st: u32| -> u64 {
        let mut p = u64::from(m);
        p = p * u64::from(c_dim) + u64::from(c);
        p = p * u64::from(folds) + u64::from(fold);
        p = p * u64::from(n_dim) + u64::from(n);
        p * u64::from(strips) + u64::from(st)
    };

    let mut stats = AccessStats::default();
    let mut macs_per_round_pe: HashMap<(u64, u32), u64> = HashMap::new();
    let mut row_fills: HashSet<(u64, u32)> = HashSet::new();
    let mut weights_fetched: HashSet<(u32, u32, u32, u32)> = HashSet::new();
    let mut outputs_written: HashSet<(u32, u32, u32, u32)> = HashSet::new();
    let mut slots_used: HashSet<u32> = HashSet::new();
    let padded_row = u64::from(layer.in_width) + 2 * u64::from(layer.padding);

    for n in 0..n_dim {
        for m in 0..m_dim {
            for c in 0..c_dim {
                for e in 0..e_dim {
                    for f in 0..f_dim {
                        for r in 0..r_dim {
                            for s in 0..s_dim {
                                let (fold, pe_row) = (r / set_rows, r % set_rows);
                                let (st, pe_col) = (e / strip, e % strip);
                                let pass = pass_of(m, c, fold, n, st);
                                let slot = (pass % u64::from(sets)) as u32;
                                let round = pass / u64::from(sets);
                                let phys_row = (slot / sets_across) * set_rows + pe_row;
                                let phys_col = (slot % sets_across) * strip + pe_col;
                                assert!(phys_row < rows && phys_col < cols, "PE outside array");
                                let pe = phys_row * cols + phys_col;

                                stats.macs += 1;
                                stats.spad_ifmap_reads += 1;
                                stats.spad_filter_reads += 1;
                                stats.spad_psum_reads += 1;
                                stats.spad_psum_writes += 1;
                                *macs_per_round_pe.entry((round, pe)).or_default() += 1;
                                slots_used.insert(slot);

                                if row_fills.insert((pass, pe)) {
                                    stats.glb_ifmap_reads += padded_row;
                                }
                                if weights_fetched.insert((m, c, r, s)) {
                                    stats.glb_filter_reads += 1;
                                }
                                if outputs_written.insert((n, m, e, f)) {
                                    stats.glb_ofmap_writes += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // A round lasts as long as its busiest PE.
    let mut round_len: HashMap<u64, u64> = HashMap::new();
    for (&(round, _), &count) in &macs_per_round_pe {
        let len = round_len.entry(round).or_default();
        *len = (*len).max(count);
    }
    stats.compute_cycles = round_len.values().sum();

    // A set occupies its whole footprint once any pass lands on it, including
    // the columns a narrower last strip leaves idle.
    let mut active: HashSet<u32> = HashSet::new();
    for &slot in &slots_used {
        for pe_row in 0..set_rows {
            for pe_col in 0..strip {
                let phys_row = (slot / sets_across) * set_rows + pe_row;
                let phys_col = (slot % sets_across) * strip + pe_col;
                active.insert(phys_row * cols + phys_col);
            }
        }
    }
    stats.utilization = active.len() as f64 / (u64::from(rows) * u64::from(cols)) as f64;

    // DRAM: whole tensors move, bit-packed, and the inputs stream through the
    // global buffer in buffer-sized chunks, once per chunk.
    let t = cfg.pe_type;
    let mut ifmap_bits = 0u64;
    for _ in 0..u64::from(n_dim) * u64::from(c_dim) * u64::from(layer.in_height) * u64::from(layer.in_width) {
        ifmap_bits += u64::from(t.act_bits());
    }
    let mut filter_bits = 0u64;
    for _ in 0..weights_fetched.len() {
        filter_bits += u64::from(t.wgt_bits());
    }
    let mut ofmap_bits = 0u64;
    for _ in 0..outputs_written.len() {
        ofmap_bits += u64::from(t.act_bits());
    }
    let to_bytes = |bits: u64| bits / 8 + u64::from(!bits.is_multiple_of(8));
    let (ifmap_bytes, filter_bytes) = (to_bytes(ifmap_bits), to_bytes(filter_bits));

    let mut chunks = 0u64;
    let mut remaining = ifmap_bytes + filter_bytes;
    while remaining > 0 {
        remaining = remaining.saturating_sub(cfg.glb_bytes);
        chunks += 1;
    }
    stats.refetch_factor = chunks.max(1);
    stats.dram_ifmap_bytes = stats.refetch_factor * ifmap_bytes;
    stats.dram_filter_bytes = stats.refetch_factor * filter_bytes;
    stats.dram_ofmap_bytes = to_bytes(ofmap_bits);
    let moved = stats.dram_ifmap_bytes + stats.dram_filter_bytes + stats.dram_ofmap_bytes;
    stats.dram_cycles = (moved as f64 / cfg.dram_bw).ceil() as u64;
    stats.latency_cycles = stats.compute_cycles.max(stats.dram_cycles);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::PeType;
    use crate::dataflow::layer_stats;

    fn cfg(rows: u32, cols: u32) -> AcceleratorConfig {
        AcceleratorConfig {
            pe_rows: rows,
            pe_cols: cols,
            glb_bytes: 4096,
            ifmap_spad_bytes: 1024,
            filter_spad_bytes: 1024,
            psum_spad_bytes: 1024,
            dram_bw: 4.0,
            clock_hz: 1.0,
            pe_type: PeType::Light1,
        }
    }

    #[test]
    fn identity_layer() {
        let layer = LayerConfig::conv("u", 1, 1, 1, 1, 1, 1, 0);
        let c = cfg(1, 1);
        assert_eq!(simulate_layer_oracle(&layer, &c).unwrap(), layer_stats(&layer, &c).unwrap());
    }

    #[test]
    fn toy_layer_counts() {
        let layer = LayerConfig::conv("toy", 1, 1, 5, 5, 3, 1, 0);
        let s = simulate_layer_oracle(&layer, &cfg(4, 4)).unwrap();
        assert_eq!((s.macs, s.compute_cycles), (81, 9));
        assert_eq!((s.glb_ifmap_reads, s.glb_filter_reads, s.glb_ofmap_writes), (45, 9, 9));
        assert_eq!(s.utilization, 9.0 / 16.0);
    }

    #[test]
    fn guard() {
        let big = LayerConfig::conv("big", 64, 64, 56, 56, 3, 1, 1);
        let err = simulate_layer_oracle(&big, &cfg(16, 16)).unwrap_err();
        assert!(matches!(err, Error::OracleGuard { limit: ORACLE_MAC_LIMIT, .. }));
    }

    #[test]
    fn narrow_last_strip_keeps_set_footprint() {
        // E = 5 on 3 columns: strips of 3 and 2, one per set.
        let layer = LayerConfig::conv("n", 1, 1, 7, 7, 3, 1, 0);
        let c = cfg(6, 3);
        let s = simulate_layer_oracle(&layer, &c).unwrap();
        assert_eq!(s.utilization, 1.0);
        assert_eq!(s, layer_stats(&layer, &c).unwrap());
    }

    #[test]
    fn strided_multi_fold_layer_matches() {
        let layer = LayerConfig::conv("s", 2, 3, 9, 7, 5, 2, 2).with_batch(2);
        for (rows, cols) in [(2, 3), (3, 2), (4, 4), (7, 5), (1, 1)] {
            let c = cfg(rows, cols);
            let a = layer_stats(&layer, &c).unwrap();
            let b = simulate_layer_oracle(&layer, &c).unwrap();
            assert_eq!(a.first_mismatch(&b), None, "{rows}x{cols}");
        }
    }
}
